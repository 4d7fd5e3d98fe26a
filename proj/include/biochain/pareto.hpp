#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "biochain/domain.hpp"
#include "biochain/model.hpp"
#include "biochain/solver.hpp"

namespace biochain::pareto {

class ParetoError : public std::runtime_error {
  public:
    explicit ParetoError(const std::string& message) : std::runtime_error(message) {}
};

struct ParetoPoint {
    std::optional<double> epsilon;  // kg CO2-eq; absent for the two extremes
    double cost = 0.0;              // EUR
    double ghg = 0.0;               // kg CO2-eq
    milp::Solution solution;
    bool complete = true;  // false when the point stopped at the time limit
};

// Points ordered by increasing g; mutually non-dominated, so f is strictly
// decreasing across them.
struct ParetoFront {
    std::vector<ParetoPoint> points;
    std::vector<std::string> notes;  // skipped grid points
};

// (argmin f, argmin g), both solved to the configured gap. The second extreme
// is obtained by swapping the objective vectors. Throws ParetoError
// "INFEASIBLE:" when no feasible plan exists.
std::pair<ParetoPoint, ParetoPoint> solve_extremes(const Instance& inst,
                                                   const milp::SolveOptions& opts = {});

// Evenly spaced epsilon grid, inclusive on [g(argmin g), g(argmin f)], each
// point solved independently as min f subject to g <= epsilon. threads caps
// the parallel sweep; 1 forces the serial reference path, 0 uses the runtime
// default. The assembled front is identical for any thread count.
ParetoFront epsilon_front(const Instance& inst, int num_points,
                          const milp::SolveOptions& opts = {}, int threads = 0);

// Removes points weakly dominated in (f, g); ties keep the earlier point.
// Survivors stay in input order.
std::vector<ParetoPoint> filter_dominated(const std::vector<ParetoPoint>& points);

// Writes front.csv (epsilon,cost_eur,ghg_kg,solution_file) plus one JSON
// solution file per point into dir.
void write_front(const ParetoFront& front, const std::filesystem::path& dir);

}  // namespace biochain::pareto
