#include "biochain/generator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "biochain/ingest.hpp"

namespace biochain {

std::uint64_t Lcg::next() {
    state_ = state_ * 6364136223846793005ULL + 1442695040888963407ULL;
    return state_;
}

double Lcg::next_double() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

int Lcg::next_int(int n) {
    return std::min(n - 1, static_cast<int>(next_double() * n));
}

double Lcg::uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

namespace {

[[noreturn]] void param_error(const std::string& msg) {
    throw GeneratorError("PARAM_ERROR: " + msg);
}

double quantize(double v, int decimals) {
    const double scale = std::pow(10.0, decimals);
    return std::round(v * scale) / scale;
}

std::string pad(int v, int width) {
    std::string s = std::to_string(v);
    while (static_cast<int>(s.size()) < width) s.insert(s.begin(), '0');
    return s;
}

int digits(int n) {
    int d = 1;
    while (n >= 10) {
        n /= 10;
        ++d;
    }
    return d;
}

struct Pt {
    double x = 0.0, y = 0.0;
};

Pt draw_in_disc(Lcg& rng, double radius) {
    for (;;) {
        const double x = rng.uniform(-radius, radius);
        const double y = rng.uniform(-radius, radius);
        if (x * x + y * y <= radius * radius) return {x, y};
    }
}

// Euclidean km scaled by a flat 1.3 road-winding factor, floored so no arc
// degenerates to zero length.
double road_distance(const Pt& a, const Pt& b) {
    const double dx = a.x - b.x, dy = a.y - b.y;
    return std::max(0.5, quantize(1.3 * std::sqrt(dx * dx + dy * dy), 3));
}

void check_range(const Range& r, const char* name, bool positive_lo = false) {
    if (r.lo > r.hi) param_error(std::string(name) + " range is empty");
    if (positive_lo && r.lo <= 0.0) param_error(std::string(name) + " range must be positive");
    if (r.lo < 0.0) param_error(std::string(name) + " range must be nonnegative");
}

void check_params(const GeneratorParams& p) {
    if (p.num_zones < 1) param_error("num_zones must be >= 1");
    if (p.num_products < 1) param_error("num_products must be >= 1");
    if (p.horizon < 1) param_error("horizon must be >= 1");
    if (p.farm_storages_per_zone < 0) param_error("farm_storages_per_zone must be >= 0");
    if (p.num_central_storages < 0) param_error("num_central_storages must be >= 0");
    if (p.radius_km <= 0.0) param_error("radius_km must be positive");
    if (p.total_demand < 0.0) param_error("total_demand must be nonnegative");
    check_range(p.yield_range, "yield", true);
    check_range(p.production_cost_range, "production_cost");
    check_range(p.production_emission_range, "production_emission");
    check_range(p.storage_cost_range, "storage_cost");
    check_range(p.storage_emission_range, "storage_emission");
    check_range(p.handling_cost_range, "handling_cost");
    check_range(p.handling_emission_range, "handling_emission");
    check_range(p.transport_cost_range, "transport_cost");
    check_range(p.transport_emission_range, "transport_emission");
    check_range(p.setup_cost_range, "setup_cost");
    check_range(p.setup_emission_range, "setup_emission");
    check_range(p.loss_range, "loss");
    if (p.loss_range.hi >= 1.0) param_error("loss range must stay below 1");
    for (const RefinerySpec& spec : p.refineries) {
        if (spec.count_required < 1) param_error("refinery count_required must be >= 1");
        if (spec.num_candidate_zones < 0 || spec.num_candidate_zones > p.num_zones)
            param_error("num_candidate_zones out of range");
        const int cand = spec.num_candidate_zones == 0 ? p.num_zones : spec.num_candidate_zones;
        if (cand < spec.count_required)
            param_error("fewer candidate zones than plants required");
        if (spec.num_pre_located < 0 || spec.num_pre_located > spec.count_required ||
            spec.num_pre_located > cand)
            param_error("num_pre_located out of range");
    }
    if (!p.refineries.empty() && p.num_central_storages < 1)
        param_error("refineries need at least one central storage to be reachable");
    if (p.total_demand > 0.0 && p.refineries.empty())
        param_error("total_demand > 0 needs at least one refinery type");
}

std::vector<int> sample_indices(Lcg& rng, int n, int k) {
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    for (int i = 0; i < k; ++i) std::swap(idx[i], idx[i + rng.next_int(n - i)]);
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    return idx;
}

const char* kProductNames[] = {"bulk seeds", "straw bales", "chaff bales",
                               "wood chips", "miscanthus",  "switchgrass"};

}  // namespace

Instance generate_instance(const GeneratorParams& params) {
    check_params(params);
    Lcg rng(params.seed);
    const int Z = params.num_zones;
    const int P = params.num_products;
    const int T = params.horizon;
    const int zw = std::max(2, digits(Z));

    // Geography: zones and central storages in the disc, farm storages close
    // to their zone.
    std::vector<Pt> zone_pt(Z);
    for (Pt& pt : zone_pt) pt = draw_in_disc(rng, params.radius_km);
    std::vector<std::vector<Pt>> farm_pt(Z);
    for (int z = 0; z < Z; ++z)
        for (int j = 0; j < params.farm_storages_per_zone; ++j)
            farm_pt[z].push_back({zone_pt[z].x + rng.uniform(-5.0, 5.0),
                                  zone_pt[z].y + rng.uniform(-5.0, 5.0)});
    std::vector<Pt> central_pt(params.num_central_storages);
    for (Pt& pt : central_pt) pt = draw_in_disc(rng, params.radius_km);

    std::vector<std::string> zone_id(Z), central_id(params.num_central_storages);
    for (int z = 0; z < Z; ++z) zone_id[z] = "z" + pad(z + 1, zw);
    const int cw = digits(std::max(1, params.num_central_storages));
    for (int c = 0; c < params.num_central_storages; ++c) central_id[c] = "c" + pad(c + 1, cw);

    // Products with contiguous harvest windows.
    std::vector<Product> products(P);
    std::vector<int> window_first(P), window_last(P);
    const int pw = digits(P);
    for (int p = 0; p < P; ++p) {
        products[p].id = "p" + pad(p + 1, pw);
        products[p].name = kProductNames[p % 6];
        if (p >= 6) products[p].name += " " + std::to_string(p / 6 + 1);
        const int max_len = std::max(1, (T + 2) / 3);
        const int len = 1 + rng.next_int(max_len);
        const int start = 1 + rng.next_int(T - len + 1);
        window_first[p] = start;
        window_last[p] = start + len - 1;
        for (int t = start; t <= window_last[p]; ++t) products[p].harvest_window.insert(t);
    }

    std::vector<std::vector<double>> yield(Z, std::vector<double>(P));
    for (int z = 0; z < Z; ++z)
        for (int p = 0; p < P; ++p)
            yield[z][p] = quantize(rng.uniform(params.yield_range.lo, params.yield_range.hi), 6);

    // Per-zone production rates. In conflicting mode cheap zones are dirty and
    // clean zones are expensive, which is what forces a broad Pareto front.
    std::vector<double> prod_cost(Z), prod_em(Z);
    for (int z = 0; z < Z; ++z) {
        if (params.conflicting_rates) {
            const double frac = Z > 1 ? static_cast<double>(z) / (Z - 1) : 0.5;
            const auto& c = params.production_cost_range;
            const auto& e = params.production_emission_range;
            prod_cost[z] = quantize((c.lo + (c.hi - c.lo) * frac) * rng.uniform(0.98, 1.02), 6);
            prod_em[z] = quantize((e.hi - (e.hi - e.lo) * frac) * rng.uniform(0.98, 1.02), 6);
        } else {
            prod_cost[z] = quantize(
                rng.uniform(params.production_cost_range.lo, params.production_cost_range.hi), 6);
            prod_em[z] = quantize(rng.uniform(params.production_emission_range.lo,
                                              params.production_emission_range.hi),
                                  6);
        }
    }

    std::vector<VehicleType> vehicles;
    std::string long_haul_a, long_haul_b;
    {
        const auto& tc = params.transport_cost_range;
        const auto& te = params.transport_emission_range;
        VehicleType tractor{"tractor", 0.0, 0.0};
        if (params.conflicting_rates) {
            tractor.transport_cost = quantize((tc.lo + tc.hi) / 2.0, 6);
            tractor.transport_emission = quantize((te.lo + te.hi) / 2.0, 6);
            vehicles.push_back(tractor);
            vehicles.push_back({"truck_a", quantize(tc.lo, 6), quantize(te.hi, 6)});
            vehicles.push_back({"truck_b", quantize(tc.hi, 6), quantize(te.lo, 6)});
            long_haul_a = "truck_a";
            long_haul_b = "truck_b";
        } else {
            tractor.transport_cost = quantize(rng.uniform(tc.lo, tc.hi), 6);
            tractor.transport_emission = quantize(rng.uniform(te.lo, te.hi), 6);
            vehicles.push_back(tractor);
            vehicles.push_back({"truck", quantize(rng.uniform(tc.lo, tc.hi), 6),
                                quantize(rng.uniform(te.lo, te.hi), 6)});
            long_haul_a = "truck";
        }
    }

    // Refinery types: candidate zones and pre-located plants are sampled
    // without replacement.
    const int K = static_cast<int>(params.refineries.size());
    std::vector<RefineryType> types(K);
    const int kw = digits(std::max(1, K));
    std::set<std::string> slot_zones;
    for (int k = 0; k < K; ++k) {
        const RefinerySpec& spec = params.refineries[k];
        types[k].id = "r" + pad(k + 1, kw);
        types[k].count_required = spec.count_required;
        types[k].setup_cost_annualized =
            quantize(rng.uniform(params.setup_cost_range.lo, params.setup_cost_range.hi), 6);
        types[k].setup_emission = quantize(
            rng.uniform(params.setup_emission_range.lo, params.setup_emission_range.hi), 6);
        const int cand = spec.num_candidate_zones == 0 ? Z : spec.num_candidate_zones;
        std::vector<std::string> cand_ids;
        for (int z : sample_indices(rng, Z, cand)) {
            types[k].allowed_zones.insert(zone_id[z]);
            cand_ids.push_back(zone_id[z]);
            slot_zones.insert(zone_id[z]);
        }
        for (int i : sample_indices(rng, cand, spec.num_pre_located))
            types[k].pre_located.insert(cand_ids[i]);
    }

    // Demand calendars. Every plant of type k consumes the same weekly amounts
    // starting at each product's harvest-window opening, so nothing is asked
    // for before it can exist. The final entry absorbs rounding so the grand
    // total lands on total_demand.
    double total = params.total_demand;
    if (total == 0.0 && K > 0) {
        double all_yields = 0.0;
        for (int z = 0; z < Z; ++z)
            for (int p = 0; p < P; ++p) all_yields += yield[z][p];
        total = quantize(0.55 * all_yields, 6);
    }
    if (K > 0 && total > 0.0) {
        std::vector<std::vector<double>> weight(K, std::vector<double>(P));
        double weight_sum = 0.0;
        for (int k = 0; k < K; ++k)
            for (int p = 0; p < P; ++p) {
                weight[k][p] = 0.5 + rng.next_double();
                weight_sum += weight[k][p];
            }
        std::vector<std::vector<double>> per_plant(K, std::vector<double>(P));
        double assigned = 0.0;
        for (int k = 0; k < K; ++k)
            for (int p = 0; p < P; ++p) {
                if (k == K - 1 && p == P - 1) {
                    per_plant[k][p] = (total - assigned) / types[k].count_required;
                } else {
                    per_plant[k][p] =
                        total * weight[k][p] / (types[k].count_required * weight_sum);
                    assigned += types[k].count_required * per_plant[k][p];
                }
            }
        for (int k = 0; k < K; ++k)
            for (int p = 0; p < P; ++p) {
                const int first = window_first[p];
                const int n = T - first + 1;
                std::vector<double> factor(n);
                double fsum = 0.0;
                for (double& f : factor) {
                    f = rng.uniform(0.8, 1.2);
                    fsum += f;
                }
                double spread = 0.0;
                for (int i = 0; i < n; ++i) {
                    double amount;
                    if (i == n - 1)
                        amount = per_plant[k][p] - spread;
                    else {
                        amount = quantize(per_plant[k][p] * factor[i] / fsum, 6);
                        spread += amount;
                    }
                    types[k].demand[{products[p].id, first + i}] = amount;
                }
            }
    }

    // Loss rates drawn per node kind ahead of the feasibility adjustment,
    // which needs the best central-storage loss.
    std::vector<double> zone_loss(Z), central_loss(params.num_central_storages);
    std::vector<std::vector<double>> farm_loss(Z);
    for (int z = 0; z < Z; ++z) {
        zone_loss[z] = quantize(rng.uniform(params.loss_range.lo, params.loss_range.hi), 6);
        for (int j = 0; j < params.farm_storages_per_zone; ++j)
            farm_loss[z].push_back(
                quantize(rng.uniform(params.loss_range.lo, params.loss_range.hi), 6));
    }
    for (double& l : central_loss)
        l = quantize(rng.uniform(params.loss_range.lo, params.loss_range.hi), 6);

    // Feasibility: serving demand in week t from biomass harvested in the last
    // window week shrinks by the storage loss each week in between. Yields are
    // scaled up until the shrinkage-adjusted requirement of every product fits
    // inside 80% of its total yield.
    if (K > 0 && total > 0.0) {
        double best_loss = 1.0;
        for (double l : central_loss) best_loss = std::min(best_loss, l);
        for (int p = 0; p < P; ++p) {
            double required = 0.0;
            for (int k = 0; k < K; ++k)
                for (int t = window_first[p]; t <= T; ++t) {
                    const double d = types[k].demand_at(products[p].id, t);
                    const int held = std::max(0, t - window_last[p]);
                    required +=
                        types[k].count_required * d / std::pow(1.0 - best_loss, held);
                }
            for (int guard = 0; guard < 8; ++guard) {
                double avail = 0.0;
                for (int z = 0; z < Z; ++z) avail += yield[z][p];
                if (required <= 0.8 * avail) break;
                const double factor = required / (0.8 * avail) * 1.01;
                for (int z = 0; z < Z; ++z) yield[z][p] = quantize(yield[z][p] * factor, 6);
            }
        }
    }
    for (int z = 0; z < Z; ++z)
        for (int p = 0; p < P; ++p) products[p].annual_yield[zone_id[z]] = yield[z][p];

    std::vector<double> yield_by_product(P, 0.0);
    double yield_all = 0.0;
    for (int z = 0; z < Z; ++z)
        for (int p = 0; p < P; ++p) {
            yield_by_product[p] += yield[z][p];
            yield_all += yield[z][p];
        }

    Instance inst;
    inst.horizon = T;
    inst.products = products;
    inst.vehicles = vehicles;
    inst.refinery_types = types;

    auto draw_node_rates = [&](Node& n) {
        n.storage_cost =
            quantize(rng.uniform(params.storage_cost_range.lo, params.storage_cost_range.hi), 6);
        n.handling_cost = quantize(
            rng.uniform(params.handling_cost_range.lo, params.handling_cost_range.hi), 6);
        n.storage_emission = quantize(
            rng.uniform(params.storage_emission_range.lo, params.storage_emission_range.hi), 6);
        n.handling_emission = quantize(
            rng.uniform(params.handling_emission_range.lo, params.handling_emission_range.hi),
            6);
    };

    for (int z = 0; z < Z; ++z) {
        Node n;
        n.id = zone_id[z];
        n.kind = NodeKind::ProductionZone;
        n.loss_default = zone_loss[z];
        n.production_cost = prod_cost[z];
        n.production_emission = prod_em[z];
        draw_node_rates(n);
        for (int p = 0; p < P; ++p) n.capacity[products[p].id] = yield[z][p];
        inst.nodes.push_back(std::move(n));
    }
    for (int z = 0; z < Z; ++z)
        for (int j = 0; j < params.farm_storages_per_zone; ++j) {
            Node n;
            n.id = "f" + pad(z + 1, zw) + "_" + std::to_string(j + 1);
            n.kind = NodeKind::FarmStorage;
            n.loss_default = farm_loss[z][j];
            draw_node_rates(n);
            for (int p = 0; p < P; ++p)
                n.capacity[products[p].id] = quantize(0.75 * yield[z][p], 6);
            inst.nodes.push_back(std::move(n));
        }
    for (int c = 0; c < params.num_central_storages; ++c) {
        Node n;
        n.id = central_id[c];
        n.kind = NodeKind::CentralStorage;
        n.loss_default = central_loss[c];
        n.max_throughput = quantize(1.5 * yield_all, 6);
        draw_node_rates(n);
        for (int p = 0; p < P; ++p)
            n.capacity[products[p].id] = quantize(1.2 * yield_by_product[p], 6);
        inst.nodes.push_back(std::move(n));
    }
    for (const std::string& zid : slot_zones) {
        Node n;
        n.id = slot_id_for_zone(zid);
        n.kind = NodeKind::RefinerySlot;
        n.loss_default = quantize(rng.uniform(params.loss_range.lo, params.loss_range.hi), 6);
        draw_node_rates(n);
        for (int p = 0; p < P; ++p)
            n.capacity[products[p].id] = quantize(0.2 * yield_by_product[p], 6);
        inst.nodes.push_back(std::move(n));
    }

    auto add_arc = [&inst](const std::string& from, const std::string& to, double dist,
                           const std::string& vehicle) {
        inst.arcs.push_back({from, to, dist, vehicle, {}});
    };
    for (int z = 0; z < Z; ++z)
        for (int j = 0; j < params.farm_storages_per_zone; ++j)
            add_arc(zone_id[z], "f" + pad(z + 1, zw) + "_" + std::to_string(j + 1),
                    road_distance(zone_pt[z], farm_pt[z][j]), "tractor");
    for (int z = 0; z < Z; ++z)
        for (int c = 0; c < params.num_central_storages; ++c) {
            const double d = road_distance(zone_pt[z], central_pt[c]);
            add_arc(zone_id[z], central_id[c], d, long_haul_a);
            if (params.conflicting_rates) add_arc(zone_id[z], central_id[c], d, long_haul_b);
        }
    for (int z = 0; z < Z; ++z)
        for (int j = 0; j < params.farm_storages_per_zone; ++j)
            for (int c = 0; c < params.num_central_storages; ++c)
                add_arc("f" + pad(z + 1, zw) + "_" + std::to_string(j + 1), central_id[c],
                        road_distance(farm_pt[z][j], central_pt[c]), long_haul_a);
    for (int c = 0; c < params.num_central_storages; ++c)
        for (const std::string& zid : slot_zones) {
            const double d = road_distance(central_pt[c], zone_pt[inst.node_index(zid)]);
            add_arc(central_id[c], slot_id_for_zone(zid), d, long_haul_a);
            if (params.conflicting_rates)
                add_arc(central_id[c], slot_id_for_zone(zid), d, long_haul_b);
        }

    const ValidationReport report = validate_instance(inst);
    if (!report.clean())
        throw std::logic_error("generator produced an invalid instance:\n" + report.to_text());
    return io::canonical(inst);
}

}  // namespace biochain
