#include "biochain/pareto.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "biochain/csv.hpp"
#include "json.hpp"

namespace biochain::pareto {

using io::format_double;
using nlohmann::json;

namespace {

ParetoPoint make_point(const Instance& inst, const milp::VariableIndex& vars,
                       const milp::MilpOutcome& out, std::optional<double> epsilon) {
    ParetoPoint pt;
    pt.epsilon = epsilon;
    pt.solution = milp::extract_solution(inst, vars, out.primal);
    pt.cost = pt.solution.cost;
    pt.ghg = pt.solution.ghg;
    pt.complete = out.status == milp::MilpStatus::Optimal;
    return pt;
}

}  // namespace

std::pair<ParetoPoint, ParetoPoint> solve_extremes(const Instance& inst,
                                                   const milp::SolveOptions& opts) {
    const milp::VariableIndex vars = milp::build_variables(inst);
    const milp::MilpModel base = milp::build_model(inst);

    const milp::MilpOutcome min_cost = milp::solve_milp(base, opts);
    if (min_cost.status == milp::MilpStatus::Infeasible)
        throw ParetoError("INFEASIBLE: the instance admits no feasible plan");
    if (!min_cost.has_incumbent)
        throw ParetoError("TIME_LIMIT: no incumbent for the cost extreme");

    milp::MilpModel swapped = base;
    std::swap(swapped.cost, swapped.ghg);
    const milp::MilpOutcome min_ghg = milp::solve_milp(swapped, opts);
    if (min_ghg.status == milp::MilpStatus::Infeasible)
        throw ParetoError("INFEASIBLE: the instance admits no feasible plan");
    if (!min_ghg.has_incumbent)
        throw ParetoError("TIME_LIMIT: no incumbent for the emission extreme");

    return {make_point(inst, vars, min_cost, std::nullopt),
            make_point(inst, vars, min_ghg, std::nullopt)};
}

ParetoFront epsilon_front(const Instance& inst, int num_points, const milp::SolveOptions& opts,
                          int threads) {
    if (num_points < 2)
        throw ParetoError("NUM_POINTS: the grid needs at least 2 points, got " +
                          std::to_string(num_points));

    const auto [min_cost_pt, min_ghg_pt] = solve_extremes(inst, opts);
    const double g_lo = min_ghg_pt.ghg;
    const double g_hi = min_cost_pt.ghg;

    std::vector<double> grid(num_points);
    for (int i = 0; i < num_points; ++i)
        grid[i] = g_lo + (g_hi - g_lo) * i / (num_points - 1);

    const milp::VariableIndex vars = milp::build_variables(inst);
    const milp::MilpModel base = milp::build_model(inst);

    struct SlotResult {
        std::optional<ParetoPoint> point;
        std::optional<std::string> note;
    };
    std::vector<SlotResult> slots(num_points);

    auto solve_point = [&](int i) {
        const milp::MilpModel bounded = milp::apply_epsilon(base, grid[i]);
        const milp::MilpOutcome out = milp::solve_milp(bounded, opts);
        if (out.status == milp::MilpStatus::Infeasible) {
            slots[i].note = "epsilon " + format_double(grid[i]) + ": infeasible, point skipped";
        } else if (!out.has_incumbent) {
            slots[i].note = "epsilon " + format_double(grid[i]) +
                            ": time limit with no incumbent, point skipped";
        } else {
            slots[i].point = make_point(inst, vars, out, grid[i]);
        }
    };

    bool ran_parallel = false;
    (void)threads;
#ifdef _OPENMP
    const int use_threads = threads > 0 ? threads : omp_get_max_threads();
    if (use_threads > 1) {
        std::atomic<bool> failed{false};
#pragma omp parallel for schedule(dynamic) num_threads(use_threads)
        for (int i = 0; i < num_points; ++i) {
            if (failed.load(std::memory_order_relaxed)) continue;
            try {
                solve_point(i);
            } catch (...) {
                failed.store(true, std::memory_order_relaxed);
            }
        }
        if (failed) throw milp::NumericalBreakdown("grid point solve failed during the sweep");
        ran_parallel = true;
    }
#endif
    if (!ran_parallel)
        for (int i = 0; i < num_points; ++i) solve_point(i);

    ParetoFront front;
    std::vector<ParetoPoint> raw;
    for (int i = 0; i < num_points; ++i) {
        if (slots[i].note) front.notes.push_back(*slots[i].note);
        if (slots[i].point) raw.push_back(std::move(*slots[i].point));
    }
    front.points = filter_dominated(raw);
    std::sort(front.points.begin(), front.points.end(),
              [](const ParetoPoint& a, const ParetoPoint& b) { return a.ghg < b.ghg; });
    return front;
}

std::vector<ParetoPoint> filter_dominated(const std::vector<ParetoPoint>& points) {
    std::vector<ParetoPoint> kept;
    for (size_t i = 0; i < points.size(); ++i) {
        bool dominated = false;
        for (size_t j = 0; j < points.size() && !dominated; ++j) {
            if (j == i) continue;
            if (points[j].cost > points[i].cost || points[j].ghg > points[i].ghg) continue;
            const bool strict =
                points[j].cost < points[i].cost || points[j].ghg < points[i].ghg;
            dominated = strict || j < i;
        }
        if (!dominated) kept.push_back(points[i]);
    }
    return kept;
}

void write_front(const ParetoFront& front, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::vector<std::vector<std::string>> rows;
    for (size_t i = 0; i < front.points.size(); ++i) {
        const ParetoPoint& pt = front.points[i];
        std::string stem = "point_" + std::string(i + 1 < 10 ? "0" : "") +
                           std::to_string(i + 1) + ".json";
        rows.push_back({pt.epsilon ? format_double(*pt.epsilon) : "", format_double(pt.cost),
                        format_double(pt.ghg), stem});

        json j;
        j["epsilon"] = pt.epsilon ? json(*pt.epsilon) : json(nullptr);
        j["cost_eur"] = pt.cost;
        j["ghg_kg"] = pt.ghg;
        j["complete"] = pt.complete;
        j["harvests"] = json::array();
        for (const auto& h : pt.solution.harvests)
            j["harvests"].push_back(
                {{"zone", h.zone}, {"product", h.product}, {"period", h.period},
                 {"tonnes", h.tonnes}});
        j["flows"] = json::array();
        for (const auto& f : pt.solution.flows)
            j["flows"].push_back({{"from", f.from},
                                  {"to", f.to},
                                  {"vehicle", f.vehicle},
                                  {"product", f.product},
                                  {"period", f.period},
                                  {"tonnes", f.tonnes}});
        j["inventories"] = json::array();
        for (const auto& v : pt.solution.inventories)
            j["inventories"].push_back(
                {{"node", v.node}, {"product", v.product}, {"period", v.period},
                 {"tonnes", v.tonnes}});
        j["locations"] = json::array();
        for (const auto& o : pt.solution.opens)
            j["locations"].push_back({{"zone", o.zone}, {"type", o.type}});

        std::ofstream out(dir / stem);
        out << j.dump(2) << "\n";
    }
    io::write_csv(dir / "front.csv", {"epsilon", "cost_eur", "ghg_kg", "solution_file"}, rows);
}

}  // namespace biochain::pareto
