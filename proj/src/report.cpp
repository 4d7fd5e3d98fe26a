#include "biochain/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "biochain/csv.hpp"
#include "json.hpp"

namespace biochain::report {

using io::format_double;
using io::IngestError;
using io::IngestErrorKind;
using nlohmann::json;

double CostBreakdown::total() const {
    return production + setup + transport + handling + storage;
}

double CostBreakdown::share(double component) const {
    const double t = total();
    return t == 0.0 ? 0.0 : component / t * 100.0;
}

namespace {

std::string fixed2(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

}  // namespace

std::string CostBreakdown::to_text() const {
    const std::pair<std::string, double> lines[] = {
        {"biomass production", production}, {"refinery setup/operating", setup},
        {"transport", transport},           {"handling", handling},
        {"storage", storage},               {"total", total()},
    };
    size_t name_w = 0, eur_w = 0;
    for (const auto& [name, value] : lines) {
        name_w = std::max(name_w, name.size());
        eur_w = std::max(eur_w, fixed2(value).size());
    }
    std::ostringstream os;
    for (const auto& [name, value] : lines) {
        const std::string eur = fixed2(value);
        char sh[16];
        std::snprintf(sh, sizeof(sh), "%6.2f%%", share(value));
        os << name << std::string(name_w - name.size() + 2, ' ')
           << std::string(eur_w - eur.size(), ' ') << eur << " EUR  " << sh << "\n";
    }
    return os.str();
}

CostBreakdown cost_breakdown(const Instance& inst, const milp::Solution& sol) {
    CostBreakdown bd;
    for (const auto& h : sol.harvests) {
        const Node* zone = inst.find_node(h.zone);
        if (zone) bd.production += zone->production_cost * h.tonnes;
    }
    for (const auto& o : sol.opens) {
        for (const auto& rt : inst.refinery_types)
            if (rt.id == o.type) bd.setup += rt.setup_cost_annualized;
    }
    for (const auto& f : sol.flows) {
        const Node* from = inst.find_node(f.from);
        const Node* to = inst.find_node(f.to);
        const VehicleType* veh = inst.find_vehicle(f.vehicle);
        if (!from || !to || !veh) continue;
        for (const auto& a : inst.arcs)
            if (a.from == f.from && a.to == f.to && a.vehicle == f.vehicle) {
                bd.transport += a.distance_km * veh->transport_cost * f.tonnes;
                break;
            }
        bd.handling += (from->handling_cost + to->handling_cost) * f.tonnes;
    }
    for (const auto& v : sol.inventories) {
        const Node* node = inst.find_node(v.node);
        if (node) bd.storage += node->storage_cost * v.tonnes;
    }
    return bd;
}

void write_solution_dir(const std::filesystem::path& dir, const milp::Solution& sol,
                        const StoredSummary& summary) {
    std::filesystem::create_directories(dir);

    std::vector<std::vector<std::string>> rows;
    for (const auto& h : sol.harvests)
        rows.push_back({h.zone, h.product, std::to_string(h.period), format_double(h.tonnes)});
    io::write_csv(dir / "harvests.csv", {"zone", "product", "period", "tonnes"}, rows);

    rows.clear();
    for (const auto& f : sol.flows)
        rows.push_back({f.from, f.to, f.vehicle, f.product, std::to_string(f.period),
                        format_double(f.tonnes)});
    io::write_csv(dir / "flows.csv", {"from", "to", "vehicle", "product", "period", "tonnes"},
                  rows);

    rows.clear();
    for (const auto& v : sol.inventories)
        rows.push_back({v.node, v.product, std::to_string(v.period), format_double(v.tonnes)});
    io::write_csv(dir / "inventories.csv", {"node", "product", "period", "tonnes"}, rows);

    rows.clear();
    for (const auto& o : sol.opens) rows.push_back({o.zone, o.type});
    io::write_csv(dir / "locations.csv", {"zone", "type"}, rows);

    json j;
    j["status"] = summary.status;
    j["cost_eur"] = summary.cost_eur;
    j["ghg_kg"] = summary.ghg_kg;
    j["bound"] = std::isfinite(summary.bound) ? json(summary.bound) : json(nullptr);
    j["gap"] = std::isfinite(summary.gap) ? json(summary.gap) : json(nullptr);
    j["nodes"] = summary.nodes;
    j["wall_time_s"] = summary.wall_time_s;
    j["manifest"] = summary.manifest;
    j["epsilon"] = summary.epsilon ? json(*summary.epsilon) : json(nullptr);
    std::ofstream out(dir / "summary.json");
    out << j.dump(2) << "\n";
}

milp::Solution read_solution_dir(const std::filesystem::path& dir, StoredSummary* summary) {
    milp::Solution sol;

    io::CsvTable t = io::read_csv(dir / "harvests.csv");
    int c0 = t.require_column("zone"), c1 = t.require_column("product"),
        c2 = t.require_column("period"), c3 = t.require_column("tonnes");
    for (size_t r = 0; r < t.rows.size(); ++r)
        sol.harvests.push_back(
            {t.cell(r, c0), t.cell(r, c1),
             static_cast<int>(io::parse_int(t.cell(r, c2), t.path, t.line_numbers[r])),
             io::parse_double(t.cell(r, c3), t.path, t.line_numbers[r])});

    t = io::read_csv(dir / "flows.csv");
    c0 = t.require_column("from");
    c1 = t.require_column("to");
    int cv = t.require_column("vehicle"), cp = t.require_column("product");
    c2 = t.require_column("period");
    c3 = t.require_column("tonnes");
    for (size_t r = 0; r < t.rows.size(); ++r)
        sol.flows.push_back(
            {t.cell(r, c0), t.cell(r, c1), t.cell(r, cv), t.cell(r, cp),
             static_cast<int>(io::parse_int(t.cell(r, c2), t.path, t.line_numbers[r])),
             io::parse_double(t.cell(r, c3), t.path, t.line_numbers[r])});

    t = io::read_csv(dir / "inventories.csv");
    c0 = t.require_column("node");
    c1 = t.require_column("product");
    c2 = t.require_column("period");
    c3 = t.require_column("tonnes");
    for (size_t r = 0; r < t.rows.size(); ++r)
        sol.inventories.push_back(
            {t.cell(r, c0), t.cell(r, c1),
             static_cast<int>(io::parse_int(t.cell(r, c2), t.path, t.line_numbers[r])),
             io::parse_double(t.cell(r, c3), t.path, t.line_numbers[r])});

    t = io::read_csv(dir / "locations.csv");
    c0 = t.require_column("zone");
    c1 = t.require_column("type");
    for (size_t r = 0; r < t.rows.size(); ++r)
        sol.opens.push_back({t.cell(r, c0), t.cell(r, c1)});

    const std::filesystem::path spath = dir / "summary.json";
    std::ifstream in(spath);
    if (!in)
        throw IngestError(IngestErrorKind::Io, spath.string(), 0, "cannot open summary file");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw IngestError(IngestErrorKind::Parse, spath.string(), 0, e.what());
    }
    StoredSummary local;
    local.status = j.value("status", "");
    local.cost_eur = j.value("cost_eur", 0.0);
    local.ghg_kg = j.value("ghg_kg", 0.0);
    local.bound = j.contains("bound") && j["bound"].is_number() ? j["bound"].get<double>()
                                                                : -milp::kInf;
    local.gap = j.contains("gap") && j["gap"].is_number() ? j["gap"].get<double>() : milp::kInf;
    local.nodes = j.value("nodes", 0L);
    local.wall_time_s = j.value("wall_time_s", 0.0);
    local.manifest = j.value("manifest", "");
    if (j.contains("epsilon") && j["epsilon"].is_number())
        local.epsilon = j["epsilon"].get<double>();

    sol.cost = local.cost_eur;
    sol.ghg = local.ghg_kg;
    if (summary) *summary = local;
    return sol;
}

}  // namespace biochain::report
