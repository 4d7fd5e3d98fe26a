#include <cmath>
#include <functional>
#include <random>

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

// Exhaustive vertex enumeration for LPs whose variables all carry finite
// bounds: every vertex has n active constraints among rows and bounds, so
// trying all square subsets and keeping the best feasible solution is exact.
struct VertexOracle {
    enum class Status { Optimal, Infeasible };
    Status status = Status::Infeasible;
    double objective = 0.0;

    explicit VertexOracle(const MilpModel& m) {
        const int n = m.ncols;
        struct Con {
            std::vector<double> a;
            double b;
            bool eq;
        };
        std::vector<Con> cons;
        for (const auto& r : m.rows) {
            Con c{std::vector<double>(n, 0.0), r.rhs, r.sense == 'E'};
            for (size_t i = 0; i < r.cols.size(); ++i) c.a[r.cols[i]] = r.coef[i];
            cons.push_back(std::move(c));
        }
        for (int j = 0; j < n; ++j) {
            Con lo{std::vector<double>(n, 0.0), m.lower[j], false};
            lo.a[j] = 1.0;
            cons.push_back(lo);
            Con hi{std::vector<double>(n, 0.0), m.upper[j], false};
            hi.a[j] = 1.0;
            cons.push_back(hi);
        }
        const int total = static_cast<int>(cons.size());

        auto try_active = [&](const std::vector<int>& active) {
            std::vector<std::vector<double>> A(n, std::vector<double>(n));
            std::vector<double> b(n);
            for (int i = 0; i < n; ++i) {
                A[i] = cons[active[i]].a;
                b[i] = cons[active[i]].b;
            }
            // gaussian elimination with partial pivoting
            for (int k = 0; k < n; ++k) {
                int piv = k;
                for (int i = k + 1; i < n; ++i)
                    if (std::fabs(A[i][k]) > std::fabs(A[piv][k])) piv = i;
                if (std::fabs(A[piv][k]) < 1e-9) return;
                std::swap(A[k], A[piv]);
                std::swap(b[k], b[piv]);
                for (int i = k + 1; i < n; ++i) {
                    const double f = A[i][k] / A[k][k];
                    for (int j = k; j < n; ++j) A[i][j] -= f * A[k][j];
                    b[i] -= f * b[k];
                }
            }
            std::vector<double> x(n);
            for (int i = n - 1; i >= 0; --i) {
                double v = b[i];
                for (int j = i + 1; j < n; ++j) v -= A[i][j] * x[j];
                x[i] = v / A[i][i];
            }
            for (int j = 0; j < n; ++j)
                if (x[j] < m.lower[j] - 1e-7 || x[j] > m.upper[j] + 1e-7) return;
            for (const auto& r : m.rows) {
                double lhs = 0.0;
                for (size_t i = 0; i < r.cols.size(); ++i) lhs += r.coef[i] * x[r.cols[i]];
                const double tol = 1e-7 * std::max(1.0, std::fabs(r.rhs));
                if (r.sense == 'E' && std::fabs(lhs - r.rhs) > tol) return;
                if (r.sense == 'L' && lhs > r.rhs + tol) return;
                if (r.sense == 'G' && lhs < r.rhs - tol) return;
            }
            double obj = 0.0;
            for (int j = 0; j < n; ++j) obj += m.cost[j] * x[j];
            if (status == Status::Infeasible || obj < objective) {
                status = Status::Optimal;
                objective = obj;
            }
        };

        // every size-n subset of rows and bounds; any vertex activates some
        // linearly independent n of them, and the full feasibility check in
        // try_active keeps equality rows honest even when not picked
        std::vector<int> active(n);
        std::function<void(int, int)> rec = [&](int start, int depth) {
            if (depth == n) {
                try_active(active);
                return;
            }
            for (int i = start; i < total; ++i) {
                active[depth] = i;
                rec(i + 1, depth + 1);
            }
        };
        rec(0, 0);
    }
};

}  // namespace

TEST_CASE("textbook lp") {
    MilpModel m = make_lp(2, {0, 0}, {kInf, kInf}, {-1, -1});
    add_row(m, 'L', 1.0, {{0, 1.0}, {1, 1.0}});
    const LpOutcome out = solve_lp(m);
    CHECK(out.status == LpStatus::Optimal);
    CHECK(out.objective == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(out.primal[0] + out.primal[1] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(out.max_residual <= 1e-6);
}

TEST_CASE("infeasible bound pair") {
    MilpModel m = make_lp(1, {0}, {kInf}, {1});
    add_row(m, 'L', -1.0, {{0, 1.0}});  // x <= -1 against x >= 0
    CHECK(solve_lp(m).status == LpStatus::Infeasible);
}

TEST_CASE("unbounded ray is detected") {
    MilpModel m = make_lp(2, {0, 0}, {kInf, kInf}, {-1, 0});
    add_row(m, 'G', 1.0, {{0, 1.0}, {1, -1.0}});
    CHECK(solve_lp(m).status == LpStatus::Unbounded);
}

TEST_CASE("optimum lands on an upper bound") {
    MilpModel m = make_lp(2, {0, 0}, {2.0, 3.0}, {-2, -1});
    add_row(m, 'L', 8.0, {{0, 1.0}, {1, 1.0}});  // slack at the optimum
    const LpOutcome out = solve_lp(m);
    CHECK(out.status == LpStatus::Optimal);
    CHECK(out.objective == doctest::Approx(-7.0).epsilon(1e-9));
    CHECK(out.primal[0] == doctest::Approx(2.0));
    CHECK(out.primal[1] == doctest::Approx(3.0));
}

TEST_CASE("equality row with negative rhs needs a signed artificial") {
    MilpModel m = make_lp(2, {0, 0}, {10.0, 10.0}, {1, 2});
    add_row(m, 'E', -3.0, {{0, -1.0}, {1, -1.0}});  // x0 + x1 = 3 in disguise
    const LpOutcome out = solve_lp(m);
    CHECK(out.status == LpStatus::Optimal);
    CHECK(out.objective == doctest::Approx(3.0).epsilon(1e-9));
}

TEST_CASE("random lps match the vertex enumeration oracle") {
    std::mt19937 rng(2024);
    int solved = 0;
    for (int trial = 0; trial < 60; ++trial) {
        const int n = 3 + static_cast<int>(rng() % 4);   // 3..6 columns
        const int nrows = 2 + static_cast<int>(rng() % 4);  // 2..5 rows
        std::vector<double> lo(n, 0.0), hi(n), cost(n);
        for (int j = 0; j < n; ++j) {
            hi[j] = 2.0 + static_cast<double>(rng() % 9);
            cost[j] = static_cast<double>(static_cast<int>(rng() % 11)) - 5.0;
        }
        MilpModel m = make_lp(n, lo, hi, cost);
        for (int i = 0; i < nrows; ++i) {
            std::vector<std::pair<int, double>> terms;
            double at_ones = 0.0;
            for (int j = 0; j < n; ++j) {
                if (rng() % 5 < 2) continue;
                const double c = static_cast<double>(static_cast<int>(rng() % 7)) - 3.0;
                if (c == 0.0) continue;
                terms.push_back({j, c});
                at_ones += c;
            }
            if (terms.empty()) continue;
            // keep x = 1 feasible so the region is never empty
            const int kind = static_cast<int>(rng() % 3);
            if (kind == 0)
                add_row(m, 'L', at_ones + static_cast<double>(rng() % 4), terms);
            else if (kind == 1)
                add_row(m, 'G', at_ones - static_cast<double>(rng() % 4), terms);
            else
                add_row(m, 'E', at_ones, terms);
        }

        const VertexOracle oracle(m);
        const LpOutcome out = solve_lp(m);
        INFO("trial ", trial);
        REQUIRE(oracle.status == VertexOracle::Status::Optimal);
        REQUIRE(out.status == LpStatus::Optimal);
        const double tol = 1e-6 * std::max(1.0, std::fabs(oracle.objective));
        CHECK(std::fabs(out.objective - oracle.objective) <= tol);
        CHECK(out.max_residual <= 1e-6);
        CHECK(out.dual_objective <= out.objective + 1e-6 * std::max(1.0, std::fabs(out.objective)));
        ++solved;
    }
    CHECK(solved == 60);
}

TEST_CASE("dense 20x30 lp solves with strong duality at the optimum") {
    std::mt19937 rng(99);
    const int n = 30, nrows = 20;
    std::vector<double> lo(n, 0.0), hi(n, 10.0), cost(n);
    for (int j = 0; j < n; ++j) cost[j] = static_cast<double>(static_cast<int>(rng() % 21)) - 10.0;
    MilpModel m = make_lp(n, lo, hi, cost);
    for (int i = 0; i < nrows; ++i) {
        std::vector<std::pair<int, double>> terms;
        double at_ones = 0.0;
        for (int j = 0; j < n; ++j) {
            const double c = static_cast<double>(static_cast<int>(rng() % 9)) - 4.0;
            if (c == 0.0) continue;
            terms.push_back({j, c});
            at_ones += c;
        }
        add_row(m, i % 2 ? 'L' : 'G', at_ones + (i % 2 ? 2.0 : -2.0), terms);
    }
    const LpOutcome out = solve_lp(m);
    REQUIRE(out.status == LpStatus::Optimal);
    CHECK(out.max_residual <= 1e-6);
    const double tol = 1e-6 * std::max(1.0, std::fabs(out.objective));
    CHECK(std::fabs(out.dual_objective - out.objective) <= tol);
}

TEST_CASE("lp solves are bit-identical across runs") {
    const MilpModel m = build_model(hand_instance());
    const LpOutcome a = solve_lp(m);
    const LpOutcome b = solve_lp(m);
    CHECK(a.status == b.status);
    CHECK(a.objective == b.objective);
    CHECK(a.iterations == b.iterations);
    CHECK(a.primal == b.primal);
    CHECK(a.duals == b.duals);
}

TEST_CASE("beale's cycling example terminates at its optimum") {
    // cycles forever under plain largest-coefficient pricing; the stall guard
    // has to kick in
    MilpModel m = make_lp(4, {0, 0, 0, 0}, {kInf, kInf, kInf, kInf}, {-0.75, 150, -0.02, 6});
    add_row(m, 'L', 0.0, {{0, 0.25}, {1, -60.0}, {2, -0.04}, {3, 9.0}});
    add_row(m, 'L', 0.0, {{0, 0.5}, {1, -90.0}, {2, -0.02}, {3, 3.0}});
    add_row(m, 'L', 1.0, {{2, 1.0}});
    const LpOutcome out = solve_lp(m);
    CHECK(out.status == LpStatus::Optimal);
    CHECK(out.objective == doctest::Approx(-0.05).epsilon(1e-9));
}

TEST_CASE("extract_solution maps a hand-built primal vector to domain terms") {
    const Instance inst = hand_instance();
    const VariableIndex vars = build_variables(inst);
    std::vector<double> x(vars.ncols(), 0.0);
    x[*vars.harvest_col(0, 0, 1)] = 12.0;
    x[*vars.flow_col(0, 0, 1)] = 12.0;
    x[vars.inv_col(2, 0, 1)] = 12.0;
    x[*vars.open_col(0, 0)] = 1.0;
    x[vars.inv_col(3, 0, 2)] = -1e-12;  // clamps to zero, drops out

    const Solution sol = extract_solution(inst, vars, x);
    REQUIRE(sol.harvests.size() == 1);
    CHECK(sol.harvests[0].zone == "z1");
    CHECK(sol.harvests[0].product == "p1");
    CHECK(sol.harvests[0].period == 1);
    CHECK(sol.harvests[0].tonnes == 12.0);
    REQUIRE(sol.flows.size() == 1);
    CHECK(sol.flows[0].from == "z1");
    CHECK(sol.flows[0].to == "f1");
    CHECK(sol.flows[0].vehicle == "truck");
    REQUIRE(sol.inventories.size() == 1);
    CHECK(sol.inventories[0].node == "f1");
    REQUIRE(sol.opens.size() == 1);
    CHECK(sol.opens[0].zone == "z1");
    CHECK(sol.opens[0].type == "r1");

    // 12 t harvested at 10 EUR + 12 t moved at 7 EUR + 12 t stored at 0.5 + setup
    CHECK(sol.cost == doctest::Approx(12 * 10.0 + 12 * 7.0 + 12 * 0.5 + 1000.0).epsilon(1e-12));
    CHECK(sol.ghg == doctest::Approx(12 * 2.0 + 12 * 3.0 + 12 * 0.1 + 50.0).epsilon(1e-12));
}
