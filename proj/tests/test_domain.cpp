#include "biochain/domain.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace biochain;
using biochain::testing::hand_instance;

TEST_CASE("node accessors default absent keys to zero") {
    Node n;
    n.loss_default = 0.02;
    n.loss_override[{"p1", 3}] = 0.1;
    n.initial_inventory["p1"] = 5.0;

    CHECK(n.loss("p1", 3) == 0.1);
    CHECK(n.loss("p1", 2) == 0.02);
    CHECK(n.loss("p2", 3) == 0.02);
    CHECK(n.initial("p1") == 5.0);
    CHECK(n.initial("p2") == 0.0);
    CHECK(n.final_min("p1") == 0.0);
    CHECK_FALSE(n.capacity_for("p1").has_value());
    n.capacity["p1"] = 7.0;
    CHECK(n.capacity_for("p1") == 7.0);
}

TEST_CASE("arc with empty product list allows everything") {
    Arc a{"x", "y", 1.0, "v", {}};
    CHECK(a.allows("p1"));
    a.allowed_products = {"p1"};
    CHECK(a.allows("p1"));
    CHECK_FALSE(a.allows("p2"));
}

TEST_CASE("refinery demand lookup") {
    RefineryType r;
    r.demand[{"p1", 3}] = 20.0;
    CHECK(r.demand_at("p1", 3) == 20.0);
    CHECK(r.demand_at("p1", 4) == 0.0);
}

TEST_CASE("slot ids derive from zone ids") {
    CHECK(slot_id_for_zone("z07") == "ref_z07");
    CHECK(zone_of_slot("ref_z07") == "z07");
    CHECK_FALSE(zone_of_slot("c1").has_value());
}

TEST_CASE("hand instance validates clean") {
    const ValidationReport r = validate_instance(hand_instance());
    CHECK(r.clean());
    CHECK(r.findings.empty());
}

TEST_CASE("validator flags structural defects") {
    SUBCASE("arc against the layer order") {
        Instance inst = hand_instance();
        inst.arcs.push_back({"f1", "ref_z1", 5.0, "truck", {"p1"}});
        const auto r = validate_instance(inst);
        CHECK_FALSE(r.clean());
        CHECK(r.has("ARC_DIRECTION"));
    }
    SUBCASE("unknown arc endpoint") {
        Instance inst = hand_instance();
        inst.arcs.push_back({"z1", "ghost", 5.0, "truck", {}});
        CHECK(validate_instance(inst).has("ARC_ENDPOINT"));
    }
    SUBCASE("unknown vehicle") {
        Instance inst = hand_instance();
        inst.arcs[0].vehicle = "zeppelin";
        CHECK(validate_instance(inst).has("ARC_UNKNOWN_VEHICLE"));
    }
    SUBCASE("duplicate arc") {
        Instance inst = hand_instance();
        inst.arcs.push_back(inst.arcs[0]);
        CHECK(validate_instance(inst).has("ARC_DUPLICATE"));
    }
    SUBCASE("nonpositive distance") {
        Instance inst = hand_instance();
        inst.arcs[0].distance_km = 0.0;
        CHECK(validate_instance(inst).has("ARC_DISTANCE"));
    }
    SUBCASE("window outside the horizon") {
        Instance inst = hand_instance();
        inst.products[0].harvest_window.insert(9);
        CHECK(validate_instance(inst).has("PRODUCT_WINDOW_RANGE"));
    }
    SUBCASE("yield on a non-zone") {
        Instance inst = hand_instance();
        inst.products[0].annual_yield["f1"] = 10.0;
        CHECK(validate_instance(inst).has("YIELD_UNKNOWN_ZONE"));
    }
    SUBCASE("loss out of range") {
        Instance inst = hand_instance();
        inst.nodes[2].loss_default = 1.0;
        CHECK(validate_instance(inst).has("LOSS_OUT_OF_RANGE"));
    }
    SUBCASE("production rate on a storage node") {
        Instance inst = hand_instance();
        inst.nodes[2].production_cost = 1.0;
        CHECK(validate_instance(inst).has("PRODUCTION_ON_NONZONE"));
    }
    SUBCASE("pre-located outside allowed zones") {
        Instance inst = hand_instance();
        inst.refinery_types[0].pre_located = {"z2"};
        CHECK(validate_instance(inst).has("REF_PRELOCATED_NOT_ALLOWED"));
    }
    SUBCASE("allowed zone without a slot node") {
        Instance inst = hand_instance();
        inst.refinery_types[0].allowed_zones.insert("z2");
        CHECK(validate_instance(inst).has("SLOT_MISSING"));
    }
    SUBCASE("final floor above capacity") {
        Instance inst = hand_instance();
        inst.nodes[2].final_inventory_min["p1"] = 200.0;
        CHECK(validate_instance(inst).has("FINAL_EXCEEDS_CAPACITY"));
    }
    SUBCASE("demand beyond the horizon") {
        Instance inst = hand_instance();
        inst.refinery_types[0].demand[{"p1", 5}] = 1.0;
        CHECK(validate_instance(inst).has("REF_DEMAND_PERIOD"));
    }
    SUBCASE("group member with an individual capacity") {
        Instance inst = hand_instance();
        inst.shared_groups.push_back({"g1", {{"f1", "p1"}}, 50.0});
        CHECK(validate_instance(inst).has("GROUP_CONFLICTS_INDIVIDUAL"));
    }
    SUBCASE("duplicate node id") {
        Instance inst = hand_instance();
        inst.nodes.push_back(inst.nodes[0]);
        CHECK(validate_instance(inst).has("NODE_DUPLICATE_ID"));
    }
}

TEST_CASE("report text lists one finding per line") {
    Instance inst = hand_instance();
    inst.arcs[0].distance_km = -1.0;
    const auto r = validate_instance(inst);
    CHECK_FALSE(r.clean());
    CHECK(r.to_text().find("ARC_DISTANCE") != std::string::npos);
    CHECK(r.to_text().find("error") != std::string::npos);
}
