#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "biochain/domain.hpp"

namespace biochain {

// Deterministic 64-bit linear congruential generator (Knuth's MMIX
// constants). Used instead of <random> so fixtures are bit-identical across
// standard libraries and platforms.
class Lcg {
  public:
    explicit Lcg(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next();
    double next_double();              // uniform in [0, 1)
    int next_int(int n);               // uniform in [0, n)
    double uniform(double lo, double hi);

  private:
    std::uint64_t state_;
};

struct Range {
    double lo = 0.0;
    double hi = 0.0;
};

struct RefinerySpec {
    int count_required = 1;
    int num_candidate_zones = 0;  // 0 means every zone is a candidate
    int num_pre_located = 0;
};

// Knobs for the synthetic-instance generator. Defaults give a mid-size
// agricultural network; rates are drawn uniformly from the ranges and
// quantized so serialization is exact.
struct GeneratorParams {
    std::uint64_t seed = 1;
    int num_zones = 4;
    int num_products = 2;
    int horizon = 12;
    int farm_storages_per_zone = 1;
    int num_central_storages = 1;
    std::vector<RefinerySpec> refineries = {RefinerySpec{}};
    double radius_km = 50.0;

    Range yield_range = {800.0, 2400.0};            // t per zone and product
    Range production_cost_range = {20.0, 45.0};     // EUR/t
    Range production_emission_range = {8.0, 20.0};  // kg/t
    Range storage_cost_range = {0.2, 0.8};          // EUR/t per period
    Range storage_emission_range = {0.05, 0.2};     // kg/t per period
    Range handling_cost_range = {1.0, 3.0};         // EUR/t
    Range handling_emission_range = {0.3, 1.0};     // kg/t
    Range transport_cost_range = {0.08, 0.2};       // EUR/t-km
    Range transport_emission_range = {0.04, 0.12};  // kg/t-km
    Range setup_cost_range = {200000.0, 900000.0};  // EUR per plant
    Range setup_emission_range = {0.0, 0.0};        // kg per plant
    Range loss_range = {0.0, 0.01};                 // fraction per period

    // 0 means derive from the yields with a comfortable margin.
    double total_demand = 0.0;

    // Anti-correlated production rates across zones plus parallel arcs with a
    // cheap-but-dirty and a clean-but-expensive vehicle, so the two
    // objectives genuinely fight each other.
    bool conflicting_rates = false;
};

class GeneratorError : public std::runtime_error {
  public:
    explicit GeneratorError(const std::string& msg) : std::runtime_error(msg) {}
};

// Builds a random but always-feasible instance. Identical params give a
// bit-identical instance (canonically ordered). Throws GeneratorError with a
// PARAM_ERROR message on invalid params.
Instance generate_instance(const GeneratorParams& params);

}  // namespace biochain
