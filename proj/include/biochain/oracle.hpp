#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "biochain/domain.hpp"
#include "biochain/solver.hpp"

namespace biochain::oracle {

class OracleError : public std::runtime_error {
  public:
    explicit OracleError(const std::string& message) : std::runtime_error(message) {}
};

// Inventory levels replayed period by period from the solution's harvests,
// flows and served demands, independently of any constraint matrix.
struct SimulatedInventories {
    int num_products = 0;
    int horizon = 0;
    std::vector<double> level;  // (node * P + product) * T + (t - 1)

    // Totals in tonnes, summed over all products.
    double harvested = 0.0;
    double initial = 0.0;
    double shrinkage = 0.0;
    double served = 0.0;
    double final_level = 0.0;

    double at(int node, int product, int period) const {
        return level[(static_cast<size_t>(node) * num_products + product) * horizon + period - 1];
    }
    // harvested + initial - shrinkage - served - final_level; zero up to
    // floating-point accumulation for any inputs, by construction.
    double conservation_residual() const {
        return harvested + initial - shrinkage - served - final_level;
    }
};

SimulatedInventories simulate_inventories(const Instance& inst, const milp::Solution& sol);

struct SolutionFinding {
    std::string code;
    std::string entity;
    int period = 0;  // 0 when not tied to a period
    double magnitude = 0.0;
    std::string message;
};

struct ValidationReport {
    std::vector<SolutionFinding> findings;
    double cost = 0.0;          // recomputed EUR
    double ghg = 0.0;           // recomputed kg CO2-eq
    double max_residual = 0.0;  // worst inventory-balance mismatch, relative
    bool pass = false;

    std::string to_text() const;
    std::string to_json() const;
};

ValidationReport validate_solution(const Instance& inst, const milp::Solution& sol,
                                   double tol = 1e-6);

// Solves the LP for every 0/1 assignment of the free binaries and returns the
// best feasible outcome. Ties prefer the lowest assignment index, so serial
// and parallel runs agree bit for bit.
milp::MilpOutcome enumerate_mini_milp(const milp::MilpModel& model, int max_binaries = 12,
                                      bool parallel = true);

}  // namespace biochain::oracle
