#pragma once

#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "biochain/basis.hpp"
#include "biochain/domain.hpp"
#include "biochain/model.hpp"

namespace biochain::milp {

enum class LpStatus { Optimal, Infeasible, Unbounded };
enum class MilpStatus { Optimal, Infeasible, TimeLimit };

std::string_view to_string(LpStatus s);
std::string_view to_string(MilpStatus s);

struct SolveOptions {
    double feas_tol = 1e-6;
    double opt_tol = 1e-7;
    double int_tol = 1e-6;
    double mip_gap = 1e-6;
    double time_limit_s = std::numeric_limits<double>::infinity();
    long node_limit = -1;    // < 0 means unlimited
    std::uint64_t seed = 0;  // reserved; no randomized rule uses it yet
    std::ostream* node_log = nullptr;
};

class NumericalBreakdown : public std::runtime_error {
  public:
    explicit NumericalBreakdown(const std::string& msg) : std::runtime_error(msg) {}
};

struct LpOutcome {
    LpStatus status = LpStatus::Optimal;
    double objective = 0.0;
    double dual_objective = 0.0;
    std::vector<double> primal;           // structural columns only
    std::vector<double> duals;            // one per row
    std::vector<signed char> col_status;  // 0 at lower, 1 at upper, 2 basic
    double max_residual = 0.0;            // max |Ax-b| / max(1, |b|) over rows
    int iterations = 0;
};

// Two-phase bounded revised primal simplex over one immutable model. Repeated
// solves with different bounds reuse the sparse matrix; every solve starts
// from the crash basis (no warm starts, so results are reproducible). One
// instance per thread; solves are not re-entrant.
class SimplexSolver {
  public:
    using Clock = std::chrono::steady_clock;

    // Raised internally when a deadline passes mid-solve.
    struct TimeUp {};

    SimplexSolver(const MilpModel& model, const SolveOptions& opts);

    LpOutcome solve(const std::vector<double>& lower, const std::vector<double>& upper,
                    std::optional<Clock::time_point> deadline = std::nullopt);

    int rows() const { return m_; }
    int structural_cols() const { return n_; }

  private:
    int price(const std::vector<double>& y, const double* cost, bool bland) const;
    void refactorize();
    void recompute_basics();
    LpStatus run_phase(const double* cost, bool phase_one,
                       const std::optional<Clock::time_point>& deadline, int& iterations);
    double objective_of(const double* cost) const;

    SolveOptions opts_;
    int n_ = 0;       // structural columns
    int m_ = 0;       // rows
    int n_slack_ = 0;
    int total_ = 0;   // structural + slacks + artificials
    SparseMatrix cols_;             // structural + slack columns
    std::vector<double> rhs_;
    std::vector<char> sense_;
    std::vector<double> phase2_cost_;  // structural costs, zeros for logicals
    std::vector<int> slack_of_row_;    // -1 when the row is an equality
    std::vector<double> art_sign_;     // per row, set at solve start

    // per-solve state
    std::vector<double> lb_, ub_, x_;
    std::vector<signed char> status_;  // 0 lower, 1 upper, 2 basic
    std::vector<int> basic_;
    std::vector<double> xb_;
    BasisFactor factor_;
    std::vector<double> work_, ycol_;
};

LpOutcome solve_lp(const MilpModel& model, const SolveOptions& opts = {});

// Optimality-safe reductions: fixed-column removal, empty rows, singleton-row
// bound tightening, unit-coefficient doubleton-equality substitution, integer
// bound rounding, iterated to a fixed point. restore() maps a reduced-space
// point back to the original columns exactly.
struct PresolveResult {
    MilpModel reduced;
    bool infeasible = false;
    std::string infeasible_reason;
    int original_ncols = 0;
    double cost_offset = 0.0;  // original cost  = reduced cost  + offset
    double ghg_offset = 0.0;   // original ghg   = reduced ghg   + offset

    std::vector<int> col_map;         // original column -> reduced column or -1
    std::vector<double> fixed_value;  // value of eliminated fixed columns

    struct Substitution {
        int col = 0;  // original index of the eliminated column
        double rhs = 0.0;
        std::vector<std::pair<int, double>> terms;  // original indices
    };
    std::vector<Substitution> substitutions;

    std::vector<double> restore(const std::vector<double>& reduced_x) const;
};

PresolveResult presolve(const MilpModel& model);

struct MilpOutcome {
    MilpStatus status = MilpStatus::Optimal;
    bool has_incumbent = false;
    double objective = 0.0;
    double bound = -std::numeric_limits<double>::infinity();
    double gap = std::numeric_limits<double>::infinity();
    long nodes = 0;
    double wall_time_s = 0.0;
    std::vector<double> primal;
};

// Best-bound search with an initial depth-first dive, branching on the most
// fractional binary. Deterministic: node LPs are solved from scratch and all
// tie-breaks are by index.
MilpOutcome branch_and_bound(const MilpModel& model, const SolveOptions& opts = {});

// presolve + branch_and_bound + postsolve back to the original columns.
MilpOutcome solve_milp(const MilpModel& model, const SolveOptions& opts = {});

// A solved plan in domain terms. Zero entries are omitted; values are exact
// solver values with anything below 1e-9 clamped to zero.
struct Solution {
    struct Harvest {
        std::string zone, product;
        int period = 0;
        double tonnes = 0.0;
    };
    struct Flow {
        std::string from, to, vehicle, product;
        int period = 0;
        double tonnes = 0.0;
    };
    struct Inventory {
        std::string node, product;
        int period = 0;
        double tonnes = 0.0;
    };
    struct Open {
        std::string zone, type;
    };

    double cost = 0.0;  // EUR
    double ghg = 0.0;   // kg CO2-eq
    std::vector<Harvest> harvests;
    std::vector<Flow> flows;
    std::vector<Inventory> inventories;
    std::vector<Open> opens;
};

Solution extract_solution(const Instance& inst, const VariableIndex& vars,
                          const std::vector<double>& primal);

}  // namespace biochain::milp
