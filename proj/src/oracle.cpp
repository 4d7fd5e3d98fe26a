#include "biochain/oracle.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "biochain/csv.hpp"
#include "json.hpp"

namespace biochain::oracle {

using io::format_double;
using nlohmann::json;

namespace {

// Per-period movements aggregated from a solution, indexed (node*P+p)*T+t-1.
// Entries that cannot be placed (unknown ids, bad periods) are dropped here;
// validate_solution reports them separately.
struct Tally {
    int num_nodes = 0, num_products = 0, horizon = 0;
    std::vector<double> harvest, arrivals, departures, consumed;

    size_t at(int n, int p, int t) const {
        return (static_cast<size_t>(n) * num_products + p) * horizon + t - 1;
    }
    bool in_horizon(int t) const { return t >= 1 && t <= horizon; }
};

Tally tally_solution(const Instance& inst, const milp::Solution& sol) {
    Tally ta;
    ta.num_nodes = static_cast<int>(inst.nodes.size());
    ta.num_products = static_cast<int>(inst.products.size());
    ta.horizon = inst.horizon;
    const size_t cells = static_cast<size_t>(ta.num_nodes) * ta.num_products * ta.horizon;
    ta.harvest.assign(cells, 0.0);
    ta.arrivals.assign(cells, 0.0);
    ta.departures.assign(cells, 0.0);
    ta.consumed.assign(cells, 0.0);

    for (const auto& h : sol.harvests) {
        const int n = inst.node_index(h.zone);
        const int p = inst.product_index(h.product);
        if (n < 0 || p < 0 || !ta.in_horizon(h.period)) continue;
        ta.harvest[ta.at(n, p, h.period)] += h.tonnes;
    }
    for (const auto& f : sol.flows) {
        const int from = inst.node_index(f.from);
        const int to = inst.node_index(f.to);
        const int p = inst.product_index(f.product);
        if (from < 0 || to < 0 || p < 0 || !ta.in_horizon(f.period)) continue;
        ta.departures[ta.at(from, p, f.period)] += f.tonnes;
        ta.arrivals[ta.at(to, p, f.period)] += f.tonnes;
    }
    for (const auto& o : sol.opens) {
        const int slot = inst.node_index(slot_id_for_zone(o.zone));
        if (slot < 0) continue;
        for (const auto& rt : inst.refinery_types) {
            if (rt.id != o.type) continue;
            for (const auto& [key, tonnes] : rt.demand) {
                const int p = inst.product_index(key.first);
                if (p < 0 || !ta.in_horizon(key.second)) continue;
                ta.consumed[ta.at(slot, p, key.second)] += tonnes;
            }
        }
    }
    return ta;
}

SimulatedInventories simulate_from(const Instance& inst, const Tally& ta) {
    SimulatedInventories sim;
    sim.num_products = ta.num_products;
    sim.horizon = ta.horizon;
    sim.level.assign(ta.harvest.size(), 0.0);

    for (int n = 0; n < ta.num_nodes; ++n) {
        for (int p = 0; p < ta.num_products; ++p) {
            const std::string& pid = inst.products[p].id;
            double prev = inst.nodes[n].initial(pid);
            sim.initial += prev;
            for (int t = 1; t <= ta.horizon; ++t) {
                const double lam = inst.nodes[n].loss(pid, t);
                sim.shrinkage += lam * prev;
                const size_t i = ta.at(n, p, t);
                const double level = (1.0 - lam) * prev + ta.harvest[i] + ta.arrivals[i] -
                                     ta.departures[i] - ta.consumed[i];
                sim.level[i] = level;
                sim.harvested += ta.harvest[i];
                sim.served += ta.consumed[i];
                prev = level;
            }
            sim.final_level += prev;
        }
    }
    return sim;
}

}  // namespace

SimulatedInventories simulate_inventories(const Instance& inst, const milp::Solution& sol) {
    return simulate_from(inst, tally_solution(inst, sol));
}

namespace {

struct Checker {
    const Instance& inst;
    const milp::Solution& sol;
    const double tol;
    ValidationReport& rep;

    void add(const std::string& code, const std::string& entity, int period, double magnitude,
             const std::string& message) {
        rep.findings.push_back({code, entity, period, magnitude, message});
    }

    bool over(double value, double limit) const {
        return value > limit + tol * std::max(1.0, std::fabs(limit));
    }

    void scan_harvests() {
        std::map<std::pair<int, int>, double> annual;
        for (const auto& h : sol.harvests) {
            const int n = inst.node_index(h.zone);
            const int p = inst.product_index(h.product);
            if (n < 0 || p < 0) {
                add("UNKNOWN", h.zone + "/" + h.product, h.period, 0.0,
                    "harvest references an unknown zone or product");
                continue;
            }
            if (h.tonnes < -tol)
                add("NONNEGATIVE", h.zone, h.period, -h.tonnes, "negative harvest");
            if (h.period < 1 || h.period > inst.horizon) {
                add("PERIOD", h.zone, h.period, 0.0, "harvest outside the horizon");
                continue;
            }
            if (inst.nodes[n].kind != NodeKind::ProductionZone) {
                add("UNKNOWN", h.zone, h.period, h.tonnes, "harvest at a non-zone node");
                continue;
            }
            if (!inst.products[p].harvest_window.count(h.period))
                add("WINDOW", h.zone, h.period, h.tonnes,
                    "harvest of " + h.product + " outside its window");
            annual[{n, p}] += h.tonnes;
        }
        for (const auto& [key, total] : annual) {
            const auto& prod = inst.products[key.second];
            const auto it = prod.annual_yield.find(inst.nodes[key.first].id);
            const double yield = it == prod.annual_yield.end() ? 0.0 : it->second;
            if (yield <= 0.0) {
                add("YIELD", inst.nodes[key.first].id, 0, total,
                    "harvest of " + prod.id + " at a zone with no yield");
            } else if (over(total, yield)) {
                add("YIELD", inst.nodes[key.first].id, 0, total - yield,
                    "annual harvest of " + prod.id + " exceeds the yield");
            }
        }
    }

    void scan_flows() {
        std::map<std::tuple<std::string, std::string, std::string>, int> arc_of;
        for (size_t a = 0; a < inst.arcs.size(); ++a)
            arc_of.emplace(std::tuple{inst.arcs[a].from, inst.arcs[a].to, inst.arcs[a].vehicle},
                           static_cast<int>(a));
        for (const auto& f : sol.flows) {
            const auto it = arc_of.find(std::tuple{f.from, f.to, f.vehicle});
            if (it == arc_of.end()) {
                add("ARC", f.from + "->" + f.to, f.period, f.tonnes,
                    "flow on a missing arc (vehicle " + f.vehicle + ")");
                continue;
            }
            if (f.tonnes < -tol)
                add("NONNEGATIVE", f.from + "->" + f.to, f.period, -f.tonnes, "negative flow");
            if (f.period < 1 || f.period > inst.horizon)
                add("PERIOD", f.from + "->" + f.to, f.period, 0.0, "flow outside the horizon");
            if (inst.product_index(f.product) < 0 || !inst.arcs[it->second].allows(f.product))
                add("ARC", f.from + "->" + f.to, f.period, f.tonnes,
                    "product " + f.product + " is not allowed on this arc");
        }
    }

    void scan_inventories(std::vector<double>& reported, const Tally& ta) {
        for (const auto& v : sol.inventories) {
            const int n = inst.node_index(v.node);
            const int p = inst.product_index(v.product);
            if (n < 0 || p < 0) {
                add("UNKNOWN", v.node + "/" + v.product, v.period, 0.0,
                    "inventory references an unknown node or product");
                continue;
            }
            if (v.tonnes < -tol)
                add("NONNEGATIVE", v.node, v.period, -v.tonnes, "negative inventory");
            if (v.period < 1 || v.period > inst.horizon) {
                add("PERIOD", v.node, v.period, 0.0, "inventory outside the horizon");
                continue;
            }
            reported[ta.at(n, p, v.period)] += v.tonnes;
        }
    }

    void scan_opens() {
        std::map<std::string, int> per_zone;
        std::map<std::string, int> per_type;
        std::set<std::pair<std::string, std::string>> seen;
        for (const auto& o : sol.opens) {
            const Node* zone = inst.find_node(o.zone);
            const RefineryType* type = nullptr;
            for (const auto& rt : inst.refinery_types)
                if (rt.id == o.type) type = &rt;
            if (!zone || zone->kind != NodeKind::ProductionZone || !type) {
                add("UNKNOWN", o.zone + "/" + o.type, 0, 0.0,
                    "open entry references an unknown zone or refinery type");
                continue;
            }
            if (!seen.insert({o.zone, o.type}).second)
                add("LOCATION", o.zone, 0, 0.0, "duplicate open entry for type " + o.type);
            if (!type->allowed_zones.count(o.zone))
                add("LOCATION", o.zone, 0, 0.0,
                    "refinery type " + o.type + " is not allowed at this zone");
            ++per_zone[o.zone];
            ++per_type[o.type];
        }
        for (const auto& [zone, count] : per_zone)
            if (count > 1)
                add("LOCATION", zone, 0, count - 1.0, "more than one refinery at the zone");
        for (const auto& rt : inst.refinery_types) {
            const int count = per_type.count(rt.id) ? per_type[rt.id] : 0;
            if (count != rt.count_required)
                add("CARDINALITY", rt.id, 0, std::fabs(count - rt.count_required),
                    "opened " + std::to_string(count) + " plants, required " +
                        std::to_string(rt.count_required));
            for (const std::string& zone : rt.pre_located)
                if (!seen.count({zone, rt.id}))
                    add("LOCATION", zone, 0, 0.0,
                        "pre-located refinery of type " + rt.id + " is not opened");
        }
    }

    void check_balances(const std::vector<double>& reported, const Tally& ta,
                        const SimulatedInventories& sim) {
        for (int n = 0; n < ta.num_nodes; ++n)
            for (int p = 0; p < ta.num_products; ++p)
                for (int t = 1; t <= ta.horizon; ++t) {
                    const size_t i = ta.at(n, p, t);
                    const double diff = std::fabs(sim.level[i] - reported[i]);
                    const double rel = diff / std::max(1.0, std::fabs(sim.level[i]));
                    rep.max_residual = std::max(rep.max_residual, rel);
                    if (rel > tol)
                        add("BALANCE", inst.nodes[n].id, t, diff,
                            "inventory of " + inst.products[p].id +
                                " does not match the replayed balance");
                }
    }

    void check_capacities(const std::vector<double>& reported, const Tally& ta) {
        for (int n = 0; n < ta.num_nodes; ++n)
            for (int p = 0; p < ta.num_products; ++p) {
                const auto cap = inst.nodes[n].capacity_for(inst.products[p].id);
                if (!cap) continue;
                for (int t = 1; t <= ta.horizon; ++t)
                    if (over(reported[ta.at(n, p, t)], *cap))
                        add("CAPACITY", inst.nodes[n].id, t, reported[ta.at(n, p, t)] - *cap,
                            "inventory of " + inst.products[p].id + " exceeds the capacity");
            }
        for (const auto& g : inst.shared_groups) {
            for (int t = 1; t <= ta.horizon; ++t) {
                double total = 0.0;
                for (const auto& [node, product] : g.members) {
                    const int n = inst.node_index(node);
                    const int p = inst.product_index(product);
                    if (n >= 0 && p >= 0) total += reported[ta.at(n, p, t)];
                }
                if (over(total, g.capacity))
                    add("SHARED_CAPACITY", g.id, t, total - g.capacity,
                        "group inventory exceeds the shared capacity");
            }
        }
    }

    void check_floors_and_throughput(const std::vector<double>& reported, const Tally& ta) {
        for (int n = 0; n < ta.num_nodes; ++n) {
            for (int p = 0; p < ta.num_products; ++p) {
                const double fmin = inst.nodes[n].final_min(inst.products[p].id);
                if (fmin <= 0.0) continue;
                const double level = reported[ta.at(n, p, ta.horizon)];
                if (level < fmin - tol * std::max(1.0, fmin))
                    add("FINAL_INVENTORY", inst.nodes[n].id, ta.horizon, fmin - level,
                        "final inventory of " + inst.products[p].id + " is below the floor");
            }
            if (!inst.nodes[n].max_throughput) continue;
            for (int t = 1; t <= ta.horizon; ++t) {
                double outflow = 0.0;
                for (int p = 0; p < ta.num_products; ++p) outflow += ta.departures[ta.at(n, p, t)];
                if (over(outflow, *inst.nodes[n].max_throughput))
                    add("THROUGHPUT", inst.nodes[n].id, t,
                        outflow - *inst.nodes[n].max_throughput,
                        "outgoing flow exceeds the handling throughput");
            }
        }
    }

    void check_demand(const Tally& ta, const SimulatedInventories& sim) {
        for (int n = 0; n < ta.num_nodes; ++n) {
            if (inst.nodes[n].kind != NodeKind::RefinerySlot) continue;
            for (int p = 0; p < ta.num_products; ++p)
                for (int t = 1; t <= ta.horizon; ++t) {
                    const size_t i = ta.at(n, p, t);
                    const double level = sim.level[i];
                    if (level < -tol * std::max(1.0, ta.consumed[i]))
                        add("DEMAND", inst.nodes[n].id, t, -level,
                            "deliveries of " + inst.products[p].id +
                                " fall short of the demand of the open refineries");
                }
        }
    }

    void recompute_objectives() {
        double cost = 0.0, ghg = 0.0;
        for (const auto& h : sol.harvests) {
            const Node* zone = inst.find_node(h.zone);
            if (!zone) continue;
            cost += zone->production_cost * h.tonnes;
            ghg += zone->production_emission * h.tonnes;
        }
        for (const auto& f : sol.flows) {
            const Node* from = inst.find_node(f.from);
            const Node* to = inst.find_node(f.to);
            const VehicleType* veh = inst.find_vehicle(f.vehicle);
            if (!from || !to || !veh) continue;
            double dist = 0.0;
            for (const auto& a : inst.arcs)
                if (a.from == f.from && a.to == f.to && a.vehicle == f.vehicle) {
                    dist = a.distance_km;
                    break;
                }
            cost += (dist * veh->transport_cost + from->handling_cost + to->handling_cost) *
                    f.tonnes;
            ghg += (dist * veh->transport_emission + from->handling_emission +
                    to->handling_emission) *
                   f.tonnes;
        }
        for (const auto& v : sol.inventories) {
            const Node* node = inst.find_node(v.node);
            if (!node) continue;
            cost += node->storage_cost * v.tonnes;
            ghg += node->storage_emission * v.tonnes;
        }
        for (const auto& o : sol.opens) {
            for (const auto& rt : inst.refinery_types)
                if (rt.id == o.type) {
                    cost += rt.setup_cost_annualized;
                    ghg += rt.setup_emission;
                }
        }
        rep.cost = cost;
        rep.ghg = ghg;
        if (std::fabs(cost - sol.cost) > tol * std::max(1.0, std::fabs(sol.cost)))
            add("COST_MISMATCH", "solution", 0, std::fabs(cost - sol.cost),
                "recomputed cost " + format_double(cost) + " differs from the claimed " +
                    format_double(sol.cost));
        if (std::fabs(ghg - sol.ghg) > tol * std::max(1.0, std::fabs(sol.ghg)))
            add("GHG_MISMATCH", "solution", 0, std::fabs(ghg - sol.ghg),
                "recomputed emissions " + format_double(ghg) + " differ from the claimed " +
                    format_double(sol.ghg));
    }
};

}  // namespace

ValidationReport validate_solution(const Instance& inst, const milp::Solution& sol, double tol) {
    ValidationReport rep;
    Checker ck{inst, sol, tol, rep};
    const Tally ta = tally_solution(inst, sol);
    const SimulatedInventories sim = simulate_from(inst, ta);
    std::vector<double> reported(sim.level.size(), 0.0);

    ck.scan_harvests();
    ck.scan_flows();
    ck.scan_inventories(reported, ta);
    ck.scan_opens();
    ck.check_balances(reported, ta, sim);
    ck.check_capacities(reported, ta);
    ck.check_floors_and_throughput(reported, ta);
    ck.check_demand(ta, sim);
    ck.recompute_objectives();

    rep.pass = rep.findings.empty() && rep.max_residual <= tol;
    return rep;
}

std::string ValidationReport::to_text() const {
    std::ostringstream os;
    os << "solution check: " << (pass ? "pass" : "FAIL") << "\n";
    os << "  cost " << format_double(cost) << " EUR, emissions " << format_double(ghg)
       << " kg CO2-eq, max balance residual " << format_double(max_residual) << "\n";
    for (const auto& f : findings) {
        os << "  [" << f.code << "] " << f.entity;
        if (f.period > 0) os << " period " << f.period;
        os << ": " << f.message;
        if (f.magnitude > 0.0) os << " (by " << format_double(f.magnitude) << ")";
        os << "\n";
    }
    return os.str();
}

std::string ValidationReport::to_json() const {
    json j;
    j["pass"] = pass;
    j["cost_eur"] = cost;
    j["ghg_kg"] = ghg;
    j["max_residual"] = max_residual;
    j["findings"] = json::array();
    for (const auto& f : findings)
        j["findings"].push_back({{"code", f.code},
                                 {"entity", f.entity},
                                 {"period", f.period},
                                 {"magnitude", f.magnitude},
                                 {"message", f.message}});
    return j.dump(2);
}

milp::MilpOutcome enumerate_mini_milp(const milp::MilpModel& model, int max_binaries,
                                      bool parallel) {
    using Clock = std::chrono::steady_clock;
    const auto t0 = Clock::now();

    std::vector<int> free_bins;
    for (int c = 0; c < model.ncols; ++c) {
        if (!model.integral[c] || model.lower[c] == model.upper[c]) continue;
        if (model.lower[c] < 0.0 || model.upper[c] > 1.0)
            throw OracleError("NON_BINARY: integral column " +
                              (model.col_names.empty() ? std::to_string(c)
                                                       : model.col_names[c]) +
                              " is not 0/1");
        free_bins.push_back(c);
    }
    const int nbin = static_cast<int>(free_bins.size());
    if (nbin > max_binaries)
        throw OracleError("TOO_MANY_BINARIES: " + std::to_string(nbin) +
                          " free binaries exceed the enumeration cap of " +
                          std::to_string(max_binaries));

    const long nmask = 1L << nbin;
    milp::SolveOptions lp_opts;

    // (objective, mask), lexicographic; exact comparison keeps the reduction
    // order independent.
    auto solve_mask = [&](long mask) -> std::pair<double, long> {
        std::vector<double> lower = model.lower, upper = model.upper;
        for (int b = 0; b < nbin; ++b) {
            const double v = (mask >> b) & 1 ? 1.0 : 0.0;
            lower[free_bins[b]] = v;
            upper[free_bins[b]] = v;
        }
        milp::SimplexSolver lp(model, lp_opts);
        const milp::LpOutcome out = lp.solve(lower, upper, std::nullopt);
        if (out.status == milp::LpStatus::Unbounded)
            throw milp::NumericalBreakdown("relaxation is unbounded");
        if (out.status != milp::LpStatus::Optimal) return {milp::kInf, mask};
        return {out.objective, mask};
    };
    auto better = [](const std::pair<double, long>& a, const std::pair<double, long>& b) {
        return a.first < b.first || (a.first == b.first && a.second < b.second);
    };

    std::pair<double, long> best{milp::kInf, -1};
    bool ran_parallel = false;
    (void)parallel;
#ifdef _OPENMP
    if (parallel && nmask > 1) {
        const int nthreads = omp_get_max_threads();
        std::vector<std::pair<double, long>> local(nthreads, {milp::kInf, -1});
        std::atomic<bool> failed{false};
#pragma omp parallel for schedule(dynamic)
        for (long mask = 0; mask < nmask; ++mask) {
            if (failed.load(std::memory_order_relaxed)) continue;
            try {
                auto cand = solve_mask(mask);
                auto& mine = local[omp_get_thread_num()];
                if (cand.first < milp::kInf && better(cand, mine)) mine = cand;
            } catch (...) {
                failed.store(true, std::memory_order_relaxed);
            }
        }
        if (failed) throw milp::NumericalBreakdown("LP solve failed during enumeration");
        for (const auto& cand : local)
            if (cand.first < milp::kInf && better(cand, best)) best = cand;
        ran_parallel = true;
    }
#endif
    if (!ran_parallel) {
        for (long mask = 0; mask < nmask; ++mask) {
            auto cand = solve_mask(mask);
            if (cand.first < milp::kInf && better(cand, best)) best = cand;
        }
    }

    milp::MilpOutcome out;
    out.nodes = nmask;
    if (best.second < 0) {
        out.status = milp::MilpStatus::Infeasible;
        out.objective = milp::kInf;
        out.bound = milp::kInf;
    } else {
        std::vector<double> lower = model.lower, upper = model.upper;
        for (int b = 0; b < nbin; ++b) {
            const double v = (best.second >> b) & 1 ? 1.0 : 0.0;
            lower[free_bins[b]] = v;
            upper[free_bins[b]] = v;
        }
        milp::SimplexSolver lp(model, lp_opts);
        const milp::LpOutcome fin = lp.solve(lower, upper, std::nullopt);
        out.status = milp::MilpStatus::Optimal;
        out.has_incumbent = true;
        out.objective = fin.objective;
        out.bound = fin.objective;
        out.gap = 0.0;
        out.primal = fin.primal;
        for (int b = 0; b < nbin; ++b)
            out.primal[free_bins[b]] = (best.second >> b) & 1 ? 1.0 : 0.0;
    }
    out.wall_time_s = std::chrono::duration<double>(Clock::now() - t0).count();
    return out;
}

}  // namespace biochain::oracle
