#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "biochain/domain.hpp"

namespace biochain::testing {

inline std::filesystem::path fixture_dir() { return std::filesystem::path(BIOCHAIN_FIXTURE_DIR); }

inline std::filesystem::path tiny_manifest() { return fixture_dir() / "tiny" / "manifest.json"; }

// Fresh directory under the system temp root, removed on destruction.
class TempDir {
  public:
    explicit TempDir(const std::string& tag) {
        static std::mt19937_64 rng(std::random_device{}());
        path_ = std::filesystem::temp_directory_path() /
                ("biochain_" + tag + "_" + std::to_string(rng()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }

  private:
    std::filesystem::path path_;
};

// Five nodes in a single chain z1 -> f1 -> c1 -> ref_z1 plus a second zone z2
// that holds yield but has no arcs; one product with window {1,2} of 4 and a
// pre-located refinery. Small enough to check every row and coefficient by
// hand: the z1 -> f1 flow costs 40 km * 0.1 EUR/t-km + 1 + 2 EUR handling
// = 7 EUR/t and emits 40 * 0.05 + 0.5 + 0.5 = 3 kg/t.
inline Instance hand_instance() {
    Instance inst;
    inst.horizon = 4;

    Product p;
    p.id = "p1";
    p.name = "bulk seeds";
    p.harvest_window = {1, 2};
    p.annual_yield = {{"z1", 60.0}, {"z2", 40.0}};
    inst.products.push_back(p);

    Node z1;
    z1.id = "z1";
    z1.kind = NodeKind::ProductionZone;
    z1.production_cost = 10.0;
    z1.production_emission = 2.0;
    z1.handling_cost = 1.0;
    z1.handling_emission = 0.5;
    inst.nodes.push_back(z1);

    Node z2 = z1;
    z2.id = "z2";
    z2.production_cost = 12.0;
    z2.production_emission = 1.5;
    inst.nodes.push_back(z2);

    Node farm;
    farm.id = "f1";
    farm.kind = NodeKind::FarmStorage;
    farm.capacity = {{"p1", 80.0}};
    farm.storage_cost = 0.5;
    farm.storage_emission = 0.1;
    farm.handling_cost = 2.0;
    farm.handling_emission = 0.5;
    inst.nodes.push_back(farm);

    Node central;
    central.id = "c1";
    central.kind = NodeKind::CentralStorage;
    central.capacity = {{"p1", 120.0}};
    central.storage_cost = 0.3;
    central.storage_emission = 0.05;
    central.handling_cost = 1.5;
    central.handling_emission = 0.4;
    inst.nodes.push_back(central);

    Node slot;
    slot.id = "ref_z1";
    slot.kind = NodeKind::RefinerySlot;
    slot.capacity = {{"p1", 100.0}};
    inst.nodes.push_back(slot);

    inst.arcs.push_back({"z1", "f1", 40.0, "truck", {"p1"}});
    inst.arcs.push_back({"f1", "c1", 20.0, "truck", {"p1"}});
    inst.arcs.push_back({"c1", "ref_z1", 30.0, "truck", {"p1"}});

    inst.vehicles.push_back({"truck", 0.1, 0.05});

    RefineryType r;
    r.id = "r1";
    r.count_required = 1;
    r.setup_cost_annualized = 1000.0;
    r.setup_emission = 50.0;
    r.demand = {{{"p1", 3}, 20.0}, {{"p1", 4}, 20.0}};
    r.allowed_zones = {"z1"};
    r.pre_located = {"z1"};
    inst.refinery_types.push_back(r);

    return inst;
}

}  // namespace biochain::testing
