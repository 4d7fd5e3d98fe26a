#include <fstream>

#include "biochain/generator.hpp"
#include "biochain/ingest.hpp"
#include "biochain/model.hpp"
#include "biochain/oracle.hpp"
#include "biochain/pareto.hpp"
#include "biochain/solver.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace biochain;
using biochain::testing::TempDir;
using biochain::testing::tiny_manifest;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("lcg is the documented recurrence") {
    Lcg rng(1);
    // MMIX constants: x' = 6364136223846793005 x + 1442695040888963407
    CHECK(rng.next() == 6364136223846793005ULL + 1442695040888963407ULL);
    Lcg again(1);
    CHECK(again.next_double() >= 0.0);
    CHECK(again.next_double() < 1.0);
    for (int i = 0; i < 1000; ++i) {
        int v = again.next_int(7);
        CHECK(v >= 0);
        CHECK(v < 7);
        double u = again.uniform(2.0, 3.0);
        CHECK(u >= 2.0);
        CHECK(u <= 3.0);
    }
}

TEST_CASE("identical params give identical instances and identical files") {
    GeneratorParams params;
    params.seed = 99;
    params.num_zones = 4;
    params.num_products = 2;
    params.horizon = 8;

    const Instance a = generate_instance(params);
    const Instance b = generate_instance(params);
    CHECK(a == b);

    TempDir d1("gen"), d2("gen");
    io::write_instance(a, d1.path());
    io::write_instance(b, d2.path());
    for (const char* f : {"nodes.csv", "arcs.csv", "products.csv", "yields.csv", "demands.csv",
                          "vehicles.csv", "refinery_types.csv", "manifest.json"}) {
        CHECK(slurp(d1.path() / f) == slurp(d2.path() / f));
    }
}

TEST_CASE("different seeds differ") {
    GeneratorParams a, b;
    a.seed = 1;
    b.seed = 2;
    CHECK_FALSE(generate_instance(a) == generate_instance(b));
}

TEST_CASE("the shipped tiny fixture is the frozen seed-7 output") {
    GeneratorParams params;
    params.seed = 7;
    params.num_zones = 2;
    params.num_products = 1;
    params.horizon = 4;
    const Instance regenerated = generate_instance(params);

    TempDir dir("frozen");
    io::write_instance(regenerated, dir.path());
    for (const char* f : {"nodes.csv", "arcs.csv", "products.csv", "yields.csv", "demands.csv",
                          "vehicles.csv", "refinery_types.csv", "shared_groups.csv",
                          "manifest.json"}) {
        INFO(f);
        CHECK(slurp(dir.path() / f) == slurp(tiny_manifest().parent_path() / f));
    }
}

TEST_CASE("generated instances always validate clean") {
    for (std::uint64_t seed : {1ULL, 17ULL, 23ULL, 40ULL}) {
        GeneratorParams params;
        params.seed = seed;
        params.num_zones = 3 + static_cast<int>(seed % 4);
        params.num_products = 1 + static_cast<int>(seed % 3);
        params.horizon = 5 + static_cast<int>(seed % 7);
        const Instance inst = generate_instance(params);
        const auto report = validate_instance(inst);
        INFO(report.to_text());
        CHECK(report.clean());
    }
}

TEST_CASE("requested counts and total demand are honored") {
    GeneratorParams params;
    params.seed = 13;
    params.num_zones = 6;
    params.num_products = 2;
    params.horizon = 10;
    params.farm_storages_per_zone = 1;
    params.num_central_storages = 2;
    params.total_demand = 1500.0;
    const Instance inst = generate_instance(params);

    int zones = 0, farms = 0, centrals = 0, slots = 0;
    for (const auto& n : inst.nodes) {
        zones += n.kind == NodeKind::ProductionZone;
        farms += n.kind == NodeKind::FarmStorage;
        centrals += n.kind == NodeKind::CentralStorage;
        slots += n.kind == NodeKind::RefinerySlot;
    }
    CHECK(zones == 6);
    CHECK(farms == 6);
    CHECK(centrals == 2);
    CHECK(slots >= 1);
    CHECK(inst.horizon == 10);
    CHECK(inst.products.size() == 2);

    double demand = 0.0;
    for (const auto& rt : inst.refinery_types)
        for (const auto& [key, tonnes] : rt.demand) demand += tonnes * rt.count_required;
    CHECK(demand == doctest::Approx(1500.0).epsilon(1e-9));
}

TEST_CASE("total demand stays within the feasibility margin of the yields") {
    GeneratorParams params;
    params.seed = 31;
    params.num_zones = 5;
    const Instance inst = generate_instance(params);

    double demand = 0.0;
    for (const auto& rt : inst.refinery_types)
        for (const auto& [key, tonnes] : rt.demand) demand += tonnes * rt.count_required;
    double yields = 0.0;
    for (const auto& p : inst.products)
        for (const auto& [zone, tonnes] : p.annual_yield) yields += tonnes;
    CHECK(demand <= 0.8 * yields + 1e-9);
}

TEST_CASE("generated instances solve to optimality") {
    for (std::uint64_t seed : {2ULL, 8ULL, 21ULL}) {
        GeneratorParams params;
        params.seed = seed;
        params.num_zones = 3;
        params.num_products = 2;
        params.horizon = 6;
        params.refineries = {RefinerySpec{1, 3, 0}};
        const Instance inst = generate_instance(params);
        const auto out = milp::solve_milp(milp::build_model(inst));
        INFO("seed ", seed);
        CHECK(out.status == milp::MilpStatus::Optimal);
        CHECK(out.gap <= 1e-6);
    }
}

TEST_CASE("pre-located plants appear in the instance") {
    GeneratorParams params;
    params.seed = 4;
    params.num_zones = 5;
    params.refineries = {RefinerySpec{2, 4, 1}};
    const Instance inst = generate_instance(params);
    REQUIRE(inst.refinery_types.size() == 1);
    CHECK(inst.refinery_types[0].count_required == 2);
    CHECK(inst.refinery_types[0].allowed_zones.size() == 4);
    CHECK(inst.refinery_types[0].pre_located.size() == 1);
    CHECK(validate_instance(inst).clean());
}

TEST_CASE("conflicting mode builds genuinely opposed objectives") {
    GeneratorParams params;
    params.seed = 6;
    params.num_zones = 4;
    params.num_products = 2;
    params.horizon = 8;
    params.conflicting_rates = true;
    const Instance inst = generate_instance(params);
    CHECK(validate_instance(inst).clean());
    CHECK(inst.vehicles.size() >= 2);

    // parallel arcs: same endpoints served by a cheap-dirty and clean-dear vehicle
    bool parallel = false;
    for (size_t i = 0; i < inst.arcs.size() && !parallel; ++i)
        for (size_t j = i + 1; j < inst.arcs.size() && !parallel; ++j)
            parallel = inst.arcs[i].from == inst.arcs[j].from &&
                       inst.arcs[i].to == inst.arcs[j].to &&
                       inst.arcs[i].vehicle != inst.arcs[j].vehicle;
    CHECK(parallel);

    // the two extremes must actually disagree
    const auto [pf, pg] = pareto::solve_extremes(inst);
    CHECK(pg.ghg < pf.ghg - 1e-6);
    CHECK(pf.cost < pg.cost - 1e-6);
}

TEST_CASE("invalid params raise PARAM_ERROR") {
    GeneratorParams params;
    params.num_zones = 0;
    try {
        generate_instance(params);
        FAIL("expected GeneratorError");
    } catch (const GeneratorError& e) {
        CHECK(std::string(e.what()).rfind("PARAM_ERROR", 0) == 0);
    }

    GeneratorParams bad_range;
    bad_range.yield_range = {5.0, 1.0};
    CHECK_THROWS_AS(generate_instance(bad_range), GeneratorError);

    GeneratorParams bad_ref;
    bad_ref.num_zones = 3;
    bad_ref.refineries = {RefinerySpec{2, 1, 0}};  // 2 plants, 1 candidate zone
    CHECK_THROWS_AS(generate_instance(bad_ref), GeneratorError);
}
