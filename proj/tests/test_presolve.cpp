#include <cmath>

#include "biochain/generator.hpp"
#include "biochain/ingest.hpp"
#include "biochain/model.hpp"
#include "biochain/solver.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace biochain;
using namespace biochain::milp;
using biochain::testing::hand_instance;

namespace {

MilpModel make_lp(int ncols, std::vector<double> lower, std::vector<double> upper,
                  std::vector<double> cost) {
    MilpModel m;
    m.ncols = ncols;
    m.lower = std::move(lower);
    m.upper = std::move(upper);
    m.cost = std::move(cost);
    m.ghg.assign(ncols, 0.0);
    m.integral.assign(ncols, 0);
    for (int j = 0; j < ncols; ++j) m.col_names.push_back("x" + std::to_string(j));
    return m;
}

void add_row(MilpModel& m, char sense, double rhs, const std::vector<std::pair<int, double>>& t) {
    LinearRow row;
    row.name = "r" + std::to_string(m.rows.size());
    row.sense = sense;
    row.rhs = rhs;
    for (auto [c, v] : t) row.add(c, v);
    m.rows.push_back(std::move(row));
}

double evaluate(const LinearRow& row, const std::vector<double>& x) {
    double v = 0.0;
    for (size_t i = 0; i < row.cols.size(); ++i) v += row.coef[i] * x[row.cols[i]];
    return v;
}

}  // namespace

TEST_CASE("fixed columns fold into offsets and the rhs") {
    MilpModel m = make_lp(3, {0, 2, 0}, {5, 2, 5}, {1, 10, 1});
    m.ghg = {0, 3, 0};
    add_row(m, 'L', 9.0, {{0, 1.0}, {1, 2.0}, {2, 1.0}});
    const PresolveResult res = presolve(m);

    CHECK_FALSE(res.infeasible);
    CHECK(res.reduced.ncols == 2);
    CHECK(res.cost_offset == doctest::Approx(20.0));
    CHECK(res.ghg_offset == doctest::Approx(6.0));
    REQUIRE(res.reduced.rows.size() == 1);
    CHECK(res.reduced.rows[0].rhs == doctest::Approx(5.0));  // 9 - 2*2

    const std::vector<double> full = res.restore({1.0, 2.5});
    REQUIRE(full.size() == 3);
    CHECK(full[0] == 1.0);
    CHECK(full[1] == 2.0);
    CHECK(full[2] == 2.5);
}

TEST_CASE("pre-located binaries leave no integral columns behind") {
    const MilpModel m = build_model(hand_instance());
    const PresolveResult res = presolve(m);
    CHECK_FALSE(res.infeasible);
    for (int j = 0; j < res.reduced.ncols; ++j) CHECK(res.reduced.integral[j] == 0);
    CHECK(res.reduced.ncols < m.ncols);
    // setup cost of the pinned plant moved to the offset
    CHECK(res.cost_offset >= 1000.0);

    const std::vector<double> full = res.restore(std::vector<double>(res.reduced.ncols, 0.0));
    bool found = false;
    for (int j = 0; j < m.ncols; ++j)
        if (m.integral[j]) {
            CHECK(full[j] == 1.0);
            found = true;
        }
    CHECK(found);
}

TEST_CASE("empty row with an impossible rhs is infeasible") {
    MilpModel m = make_lp(1, {0}, {1}, {1});
    add_row(m, 'L', -1.0, {});
    const PresolveResult res = presolve(m);
    CHECK(res.infeasible);
    CHECK_FALSE(res.infeasible_reason.empty());
}

TEST_CASE("fixed column turning a row empty still detects infeasibility") {
    MilpModel m = make_lp(2, {0, 0}, {0, 5}, {1, 1});  // x0 fixed at 0
    add_row(m, 'G', 2.0, {{0, 1.0}});                  // becomes 0 >= 2
    const PresolveResult res = presolve(m);
    CHECK(res.infeasible);
}

TEST_CASE("satisfied empty rows are dropped") {
    MilpModel m = make_lp(3, {0, 1, 0}, {5, 1, 5}, {1, 1, 1});
    add_row(m, 'L', 3.0, {{1, 2.0}});  // 2*1 <= 3, gone after the fold
    add_row(m, 'L', 9.0, {{0, 1.0}, {2, 1.0}});
    const PresolveResult res = presolve(m);
    CHECK_FALSE(res.infeasible);
    CHECK(res.reduced.ncols == 2);
    CHECK(res.reduced.rows.size() == 1);
}

TEST_CASE("singleton rows tighten bounds by coefficient sign") {
    SUBCASE("positive coefficient upper bound") {
        MilpModel m = make_lp(1, {0}, {10}, {-1});
        add_row(m, 'L', 6.0, {{0, 2.0}});
        const PresolveResult res = presolve(m);
        CHECK_FALSE(res.infeasible);
        REQUIRE(res.reduced.ncols == 1);
        CHECK(res.reduced.upper[0] == doctest::Approx(3.0));
        CHECK(res.reduced.rows.empty());
    }
    SUBCASE("negative coefficient flips the direction") {
        MilpModel m = make_lp(1, {0}, {10}, {1});
        add_row(m, 'L', -6.0, {{0, -2.0}});  // x >= 3
        const PresolveResult res = presolve(m);
        REQUIRE(res.reduced.ncols == 1);
        CHECK(res.reduced.lower[0] == doctest::Approx(3.0));
    }
    SUBCASE("greater-or-equal tightens the lower bound") {
        MilpModel m = make_lp(1, {0}, {10}, {1});
        add_row(m, 'G', 4.0, {{0, 2.0}});
        const PresolveResult res = presolve(m);
        REQUIRE(res.reduced.ncols == 1);
        CHECK(res.reduced.lower[0] == doctest::Approx(2.0));
    }
    SUBCASE("singleton equality fixes the column") {
        MilpModel m = make_lp(2, {0, 0}, {10, 10}, {1, 1});
        add_row(m, 'E', 6.0, {{0, 2.0}});
        add_row(m, 'L', 8.0, {{0, 1.0}, {1, 1.0}});
        const PresolveResult res = presolve(m);
        CHECK(res.reduced.ncols == 1);
        const std::vector<double> full = res.restore({0.0});
        CHECK(full[0] == doctest::Approx(3.0));
    }
    SUBCASE("singleton equality outside the bounds is infeasible") {
        MilpModel m = make_lp(1, {0}, {2}, {1});
        add_row(m, 'E', 6.0, {{0, 2.0}});
        CHECK(presolve(m).infeasible);
    }
}

TEST_CASE("integral bounds round inward, catching fractional fixings") {
    MilpModel m = make_lp(1, {0.4}, {0.6}, {1});
    m.integral[0] = 1;
    CHECK(presolve(m).infeasible);

    MilpModel ok = make_lp(1, {0.4}, {1.6}, {1});
    ok.integral[0] = 1;
    const PresolveResult res = presolve(ok);
    CHECK_FALSE(res.infeasible);
    // [0.4, 1.6] rounds to the single integer point 1 and folds away
    CHECK(res.reduced.ncols == 0);
    CHECK(res.restore({})[0] == 1.0);
}

TEST_CASE("unit doubleton equalities substitute one column away") {
    // x0 + x1 = 5 with both columns active elsewhere
    MilpModel m = make_lp(3, {0, 0, 0}, {4, 4, 9}, {1, 2, 3});
    m.ghg = {1, 1, 1};
    add_row(m, 'E', 5.0, {{0, 1.0}, {1, 1.0}});
    add_row(m, 'L', 7.0, {{0, 1.0}, {2, 1.0}});
    add_row(m, 'G', 2.0, {{1, 1.0}, {2, 0.5}});
    const PresolveResult res = presolve(m);
    CHECK_FALSE(res.infeasible);
    CHECK(res.reduced.ncols < 3);
    CHECK_FALSE(res.substitutions.empty());

    // arbitrary reduced point restores onto the eliminated equality exactly
    std::vector<double> reduced_x(res.reduced.ncols, 0.0);
    for (int j = 0; j < res.reduced.ncols; ++j)
        reduced_x[j] = std::min(1.0, res.reduced.upper[j]);
    const std::vector<double> full = res.restore(reduced_x);
    CHECK(full[0] + full[1] == doctest::Approx(5.0).epsilon(1e-12));

    // objective bookkeeping survives the substitution
    double reduced_cost = res.cost_offset;
    for (int j = 0; j < res.reduced.ncols; ++j) reduced_cost += res.reduced.cost[j] * reduced_x[j];
    CHECK(reduced_cost == doctest::Approx(m.cost_of(full)).epsilon(1e-12));
    double reduced_ghg = res.ghg_offset;
    for (int j = 0; j < res.reduced.ncols; ++j) reduced_ghg += res.reduced.ghg[j] * reduced_x[j];
    CHECK(reduced_ghg == doctest::Approx(m.ghg_of(full)).epsilon(1e-12));
}

TEST_CASE("presolved and raw optima agree on the tiny fixture") {
    const Instance inst = io::load_instance(biochain::testing::tiny_manifest());
    const MilpModel model = build_model(inst);

    const MilpOutcome raw = branch_and_bound(model);
    const MilpOutcome reduced = solve_milp(model);
    REQUIRE(raw.status == MilpStatus::Optimal);
    REQUIRE(reduced.status == MilpStatus::Optimal);
    CHECK(std::fabs(raw.objective - reduced.objective) <= 1e-9 * std::max(1.0, raw.objective));
}

TEST_CASE("restored relaxation points satisfy every original row") {
    for (std::uint64_t seed : {3ULL, 14ULL, 27ULL}) {
        GeneratorParams params;
        params.seed = seed;
        params.num_zones = 3;
        params.num_products = 2;
        params.horizon = 5;
        params.refineries = {RefinerySpec{1, 2, 1}};
        const Instance inst = generate_instance(params);
        MilpModel model = build_model(inst);

        const PresolveResult res = presolve(model);
        REQUIRE_FALSE(res.infeasible);
        CHECK(res.reduced.ncols <= model.ncols);
        CHECK(res.reduced.rows.size() <= model.rows.size());

        MilpModel relax = res.reduced;
        relax.integral.assign(relax.ncols, 0);
        const LpOutcome lp = solve_lp(relax);
        REQUIRE(lp.status == LpStatus::Optimal);

        const std::vector<double> full = res.restore(lp.primal);
        for (const auto& row : model.rows) {
            const double lhs = evaluate(row, full);
            const double tol = 1e-6 * std::max(1.0, std::fabs(row.rhs));
            INFO("seed ", seed, " row ", row.name);
            if (row.sense == 'E') CHECK(std::fabs(lhs - row.rhs) <= tol);
            if (row.sense == 'L') CHECK(lhs <= row.rhs + tol);
            if (row.sense == 'G') CHECK(lhs >= row.rhs - tol);
        }
        CHECK(model.cost_of(full) ==
              doctest::Approx(lp.objective + res.cost_offset).epsilon(1e-9));
    }
}

TEST_CASE("epsilon row index survives compaction") {
    const Instance inst = hand_instance();
    const MilpModel model = build_model(inst, 1e6);
    REQUIRE(model.epsilon_row.has_value());
    const PresolveResult res = presolve(model);
    REQUIRE_FALSE(res.infeasible);
    if (res.reduced.epsilon_row) {
        const LinearRow& row = res.reduced.rows[*res.reduced.epsilon_row];
        CHECK(row.sense == 'L');
    }
}
