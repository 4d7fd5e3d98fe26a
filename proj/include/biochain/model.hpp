#pragma once

#include <iosfwd>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "biochain/domain.hpp"

namespace biochain::milp {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Maps decision tuples to contiguous column numbers. Families are laid out in
// a fixed order (harvest, flow, inventory, open) so identical instances index
// identically. Only tuples permitted by harvest windows, arc product lists,
// and allowed zones are materialized.
class VariableIndex {
  public:
    enum class Family { Harvest, Flow, Inventory, Open };

    struct ColRef {
        Family family;
        int a = -1;  // zone/arc/node/type index depending on family
        int b = -1;  // product index, or zone index for Open
        int t = -1;  // period, unused for Open
    };

    int ncols() const { return ncols_; }
    std::optional<int> harvest_col(int zone, int product, int period) const;
    std::optional<int> flow_col(int arc, int product, int period) const;
    int inv_col(int node, int product, int period) const;
    std::optional<int> open_col(int type, int zone) const;

    ColRef decode(int col) const;
    std::string name(int col, const Instance& inst) const;

    int harvest_count() const { return flow_base_; }
    int flow_count() const { return inv_base_ - flow_base_; }
    int inv_count() const { return open_base_ - inv_base_; }
    int open_count() const { return ncols_ - open_base_; }

  private:
    friend VariableIndex build_variables(const Instance&);

    int horizon_ = 0;
    int num_products_ = 0;
    int flow_base_ = 0;
    int inv_base_ = 0;
    int open_base_ = 0;
    int ncols_ = 0;
    // harvest: per (zone index, product index) -> base column + sorted window
    std::map<std::pair<int, int>, std::pair<int, std::vector<int>>> harvest_;
    // flow: per arc -> list of (product index, base column)
    std::vector<std::vector<std::pair<int, int>>> flow_;
    // open: per type -> list of (zone node index, column)
    std::vector<std::vector<std::pair<int, int>>> open_;
    std::vector<ColRef> decode_;
};

VariableIndex build_variables(const Instance& inst);

struct LinearRow {
    std::string name;
    std::vector<int> cols;
    std::vector<double> coef;
    char sense = 'E';  // 'L' <=, 'E' =, 'G' >=
    double rhs = 0.0;

    void add(int col, double v);
};

struct MilpModel {
    int ncols = 0;
    std::vector<double> lower, upper;
    std::vector<char> integral;  // 1 for binary open columns
    std::vector<double> cost;    // objective f, EUR per unit
    std::vector<double> ghg;     // objective g, kg CO2-eq per unit
    std::vector<LinearRow> rows;
    std::optional<int> epsilon_row;  // index into rows when an epsilon bound is applied
    std::vector<std::string> col_names;

    double cost_of(const std::vector<double>& x) const;
    double ghg_of(const std::vector<double>& x) const;
};

class EpsilonError : public std::runtime_error {
  public:
    explicit EpsilonError(const std::string& msg) : std::runtime_error(msg) {}
};

// Constraint families. Each returns its rows; build_model assembles them in a
// fixed order. Inventory balance covers zones, farm storages and central
// storages; refinery slots get the demand form instead.
std::vector<LinearRow> build_inventory_balance(const Instance& inst, const VariableIndex& vars);
std::vector<LinearRow> build_capacity_constraints(const Instance& inst, const VariableIndex& vars);
std::vector<LinearRow> build_throughput_constraints(const Instance& inst, const VariableIndex& vars);
std::vector<LinearRow> build_demand_constraints(const Instance& inst, const VariableIndex& vars);
std::vector<LinearRow> build_location_constraints(const Instance& inst, const VariableIndex& vars);

std::vector<double> build_cost_objective(const Instance& inst, const VariableIndex& vars);
std::vector<double> build_ghg_objective(const Instance& inst, const VariableIndex& vars);

// Appends (or replaces) the single row g(x) <= epsilon. Pure transformation;
// throws EpsilonError when epsilon < 0.
MilpModel apply_epsilon(const MilpModel& model, double epsilon);

MilpModel build_model(const Instance& inst, std::optional<double> epsilon = std::nullopt);

// CPLEX LP text format, for cross-checking against external solvers.
void write_lp(const MilpModel& model, std::ostream& os);

}  // namespace biochain::milp
