#include <filesystem>
#include <fstream>
#include <string>

#include "biochain/ingest.hpp"
#include "biochain/model.hpp"
#include "biochain/oracle.hpp"
#include "biochain/report.hpp"
#include "biochain/solver.hpp"
#include "doctest.h"
#include "helpers.hpp"
#include "json.hpp"

using namespace biochain;
using testing::TempDir;
using testing::tiny_manifest;

namespace {

milp::Solution solve_tiny(const Instance& inst) {
    const milp::MilpModel model = milp::build_model(inst);
    const milp::MilpOutcome out = milp::solve_milp(model);
    REQUIRE(out.status == milp::MilpStatus::Optimal);
    return milp::extract_solution(inst, milp::build_variables(inst), out.primal);
}

}  // namespace

TEST_CASE("shares are percentages of the total") {
    report::CostBreakdown b;
    b.production = 50.0;
    b.setup = 30.0;
    b.transport = 10.0;
    b.handling = 5.0;
    b.storage = 5.0;

    CHECK(b.total() == doctest::Approx(100.0));
    CHECK(b.share(b.production) == doctest::Approx(50.0));
    CHECK(b.share(b.setup) == doctest::Approx(30.0));
    CHECK(b.share(b.transport) == doctest::Approx(10.0));
    CHECK(b.share(b.handling) == doctest::Approx(5.0));
    CHECK(b.share(b.storage) == doctest::Approx(5.0));
}

TEST_CASE("an all-zero breakdown does not divide by zero") {
    const report::CostBreakdown b;
    CHECK(b.total() == 0.0);
    CHECK(b.share(b.production) == 0.0);
}

TEST_CASE("the breakdown of a solved instance adds up") {
    const Instance inst = io::load_instance(tiny_manifest());
    const milp::Solution sol = solve_tiny(inst);

    const report::CostBreakdown b = report::cost_breakdown(inst, sol);
    CHECK(b.total() == doctest::Approx(sol.cost).epsilon(1e-6));
    const double shares = b.share(b.production) + b.share(b.setup) + b.share(b.transport) +
                          b.share(b.handling) + b.share(b.storage);
    CHECK(shares == doctest::Approx(100.0).epsilon(1e-4));
    CHECK(b.setup > 0.0);      // one plant always opens
    CHECK(b.transport > 0.0);  // demand sits away from the zones

    const std::string text = b.to_text();
    CHECK(text.find("production") != std::string::npos);
    CHECK(text.find("storage") != std::string::npos);
    CHECK(text.find('%') != std::string::npos);
}

TEST_CASE("solution directories round-trip") {
    const Instance inst = io::load_instance(tiny_manifest());
    const milp::Solution sol = solve_tiny(inst);

    report::StoredSummary summary;
    summary.status = "optimal";
    summary.cost_eur = sol.cost;
    summary.ghg_kg = sol.ghg;
    summary.bound = sol.cost;
    summary.gap = 0.0;
    summary.nodes = 1;
    summary.wall_time_s = 0.25;
    summary.manifest = tiny_manifest().string();
    summary.epsilon = 25000.0;

    TempDir dir("soldir");
    report::write_solution_dir(dir.path(), sol, summary);
    for (const char* name :
         {"harvests.csv", "flows.csv", "inventories.csv", "locations.csv", "summary.json"})
        CHECK(std::filesystem::exists(dir.path() / name));

    report::StoredSummary back;
    const milp::Solution again = report::read_solution_dir(dir.path(), &back);

    CHECK(again.cost == doctest::Approx(sol.cost).epsilon(1e-12));
    CHECK(again.ghg == doctest::Approx(sol.ghg).epsilon(1e-12));
    REQUIRE(again.harvests.size() == sol.harvests.size());
    REQUIRE(again.flows.size() == sol.flows.size());
    REQUIRE(again.opens.size() == sol.opens.size());
    for (size_t i = 0; i < sol.flows.size(); ++i) {
        CHECK(again.flows[i].from == sol.flows[i].from);
        CHECK(again.flows[i].to == sol.flows[i].to);
        CHECK(again.flows[i].vehicle == sol.flows[i].vehicle);
        CHECK(again.flows[i].product == sol.flows[i].product);
        CHECK(again.flows[i].period == sol.flows[i].period);
        CHECK(again.flows[i].tonnes == doctest::Approx(sol.flows[i].tonnes).epsilon(1e-12));
    }

    CHECK(back.status == "optimal");
    CHECK(back.cost_eur == doctest::Approx(sol.cost).epsilon(1e-12));
    CHECK(back.nodes == 1);
    REQUIRE(back.epsilon.has_value());
    CHECK(*back.epsilon == doctest::Approx(25000.0));

    // the round-tripped solution still clears the oracle
    const oracle::ValidationReport rep = oracle::validate_solution(inst, again);
    CHECK(rep.pass);
}

TEST_CASE("a tampered stored cost is caught on read-back") {
    const Instance inst = io::load_instance(tiny_manifest());
    const milp::Solution sol = solve_tiny(inst);

    report::StoredSummary summary;
    summary.status = "optimal";
    summary.cost_eur = sol.cost;
    summary.ghg_kg = sol.ghg;
    summary.manifest = tiny_manifest().string();

    TempDir dir("tamper");
    report::write_solution_dir(dir.path(), sol, summary);

    const std::filesystem::path sfile = dir.path() / "summary.json";
    std::ifstream in(sfile);
    nlohmann::json doc = nlohmann::json::parse(in);
    in.close();
    doc["cost_eur"] = doc["cost_eur"].get<double>() + 5000.0;
    std::ofstream out(sfile);
    out << doc.dump(2) << '\n';
    out.close();

    const milp::Solution tampered = report::read_solution_dir(dir.path());
    const oracle::ValidationReport rep = oracle::validate_solution(inst, tampered);
    CHECK_FALSE(rep.pass);
    bool found = false;
    for (const auto& f : rep.findings)
        if (f.code == "COST_MISMATCH") found = true;
    CHECK(found);
}
