#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "biochain/domain.hpp"
#include "biochain/solver.hpp"

namespace biochain::report {

// Absolute EUR per cost component plus percentage shares of the total.
struct CostBreakdown {
    double production = 0.0;
    double setup = 0.0;  // refinery setup and operating
    double transport = 0.0;
    double handling = 0.0;
    double storage = 0.0;

    double total() const;
    double share(double component) const;  // percent of the total
    std::string to_text() const;
};

CostBreakdown cost_breakdown(const Instance& inst, const milp::Solution& sol);

// Headline numbers duplicated for machine consumption; the human-facing
// report recomputes everything from the solution files and the instance.
struct StoredSummary {
    std::string status;
    double cost_eur = 0.0;
    double ghg_kg = 0.0;
    double bound = 0.0;
    double gap = 0.0;
    long nodes = 0;
    double wall_time_s = 0.0;
    std::string manifest;  // as given on the command line
    std::optional<double> epsilon;
};

// A solution directory holds harvests.csv, flows.csv, inventories.csv,
// locations.csv and summary.json, all in the shared CSV dialect.
void write_solution_dir(const std::filesystem::path& dir, const milp::Solution& sol,
                        const StoredSummary& summary);

// Returns the solution with cost and ghg taken from the stored summary, so a
// later oracle check compares the claim against its own recomputation.
milp::Solution read_solution_dir(const std::filesystem::path& dir,
                                 StoredSummary* summary = nullptr);

}  // namespace biochain::report
