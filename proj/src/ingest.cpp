#include "biochain/ingest.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <set>
#include <tuple>

#include "json.hpp"

namespace biochain::io {

namespace {

using nlohmann::json;

const std::vector<std::string> kFileKeys = {"products",       "nodes",   "arcs",
                                            "vehicles",       "refinery_types",
                                            "demands",        "yields",  "shared_groups"};
const std::string kLossKey = "losses";

void warn(std::vector<std::string>* warnings, const std::string& msg) {
    if (warnings) warnings->push_back(msg);
}

// Flags header columns that are not part of the schema.
void check_columns(const CsvTable& t, const std::vector<std::string>& expected,
                   std::vector<std::string>* warnings) {
    for (const auto& col : t.header) {
        if (std::find(expected.begin(), expected.end(), col) == expected.end())
            warn(warnings, t.path + ": ignoring unknown column '" + col + "'");
    }
}

struct Loader {
    std::filesystem::path dir;
    Manifest manifest;
    std::vector<std::string>* warnings;
    Instance inst;

    CsvTable table(const std::string& key) const {
        auto it = manifest.files.find(key);
        if (it == manifest.files.end())
            throw IngestError(IngestErrorKind::Schema, (dir / "manifest.json").string(), 0,
                              "manifest lacks files." + key);
        return read_csv(dir / it->second);
    }

    void load_products() {
        CsvTable t = table("products");
        check_columns(t, {"id", "name", "window_start", "window_end"}, warnings);
        int c_id = t.require_column("id");
        int c_name = t.column("name");
        int c_ws = t.require_column("window_start");
        int c_we = t.require_column("window_end");
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            int line = t.line_numbers[r];
            const std::string& id = t.cell(r, c_id);
            if (id.empty()) throw IngestError(IngestErrorKind::Parse, t.path, line, "empty product id");
            Product* p = nullptr;
            for (auto& existing : inst.products)
                if (existing.id == id) p = &existing;
            if (p == nullptr) {
                inst.products.push_back(Product{id, std::string(t.cell(r, c_name)), {}, {}});
                p = &inst.products.back();
            } else if (!t.cell(r, c_name).empty() && t.cell(r, c_name) != p->name) {
                throw IngestError(IngestErrorKind::Schema, t.path, line,
                                  "conflicting name for product " + id);
            }
            long ws = parse_int(t.cell(r, c_ws), t.path, line);
            long we = parse_int(t.cell(r, c_we), t.path, line);
            if (we < ws)
                throw IngestError(IngestErrorKind::Parse, t.path, line, "window_end before window_start");
            for (long w = ws; w <= we; ++w) p->harvest_window.insert(static_cast<int>(w));
        }
    }

    void load_yields() {
        CsvTable t = table("yields");
        check_columns(t, {"zone", "product", "tonnes"}, warnings);
        int c_zone = t.require_column("zone");
        int c_prod = t.require_column("product");
        int c_tonnes = t.require_column("tonnes");
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            int line = t.line_numbers[r];
            const std::string& prod = t.cell(r, c_prod);
            Product* p = nullptr;
            for (auto& existing : inst.products)
                if (existing.id == prod) p = &existing;
            if (p == nullptr)
                throw IngestError(IngestErrorKind::Schema, t.path, line,
                                  "yield row names unknown product '" + prod + "'");
            p->annual_yield[t.cell(r, c_zone)] += parse_double(t.cell(r, c_tonnes), t.path, line);
        }
    }

    void load_vehicles() {
        CsvTable t = table("vehicles");
        check_columns(t, {"id", "transport_cost", "transport_em"}, warnings);
        int c_id = t.require_column("id");
        int c_cost = t.require_column("transport_cost");
        int c_em = t.require_column("transport_em");
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            int line = t.line_numbers[r];
            inst.vehicles.push_back(VehicleType{t.cell(r, c_id),
                                                parse_double(t.cell(r, c_cost), t.path, line),
                                                parse_double(t.cell(r, c_em), t.path, line)});
        }
    }

    void load_nodes() {
        CsvTable t = table("nodes");
        const std::vector<std::string> schema = {
            "id",           "kind",          "capacity_product", "capacity",
            "initial_inv",  "final_inv_min", "loss_default",     "max_throughput",
            "storage_cost", "handling_cost", "storage_em",       "handling_em",
            "production_cost", "production_em"};
        check_columns(t, schema, warnings);
        int c_id = t.require_column("id");
        int c_kind = t.require_column("kind");
        int c_cp = t.column("capacity_product");
        int c_cap = t.column("capacity");
        int c_ii = t.column("initial_inv");
        int c_fm = t.column("final_inv_min");
        const std::array<int, 8> scalar_cols = {
            t.column("loss_default"),  t.column("max_throughput"), t.column("storage_cost"),
            t.column("handling_cost"), t.column("storage_em"),     t.column("handling_em"),
            t.column("production_cost"), t.column("production_em")};
        std::map<std::string, std::array<std::string, 8>> first_scalars;

        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            int line = t.line_numbers[r];
            const std::string& id = t.cell(r, c_id);
            if (id.empty()) throw IngestError(IngestErrorKind::Parse, t.path, line, "empty node id");
            Node* n = nullptr;
            for (auto& existing : inst.nodes)
                if (existing.id == id) n = &existing;

            std::array<std::string, 8> cells;
            for (std::size_t i = 0; i < cells.size(); ++i) cells[i] = t.cell(r, scalar_cols[i]);

            if (n == nullptr) {
                auto kind = node_kind_from_string(t.cell(r, c_kind));
                if (!kind)
                    throw IngestError(IngestErrorKind::Parse, t.path, line,
                                      "unknown node kind '" + t.cell(r, c_kind) + "'");
                inst.nodes.push_back(Node{});
                n = &inst.nodes.back();
                n->id = id;
                n->kind = *kind;
                first_scalars[id] = cells;
                auto num = [&](const std::string& cell) { return parse_double(cell, t.path, line); };
                if (!cells[0].empty()) n->loss_default = num(cells[0]);
                if (!cells[1].empty()) n->max_throughput = num(cells[1]);
                if (!cells[2].empty()) n->storage_cost = num(cells[2]);
                if (!cells[3].empty()) n->handling_cost = num(cells[3]);
                if (!cells[4].empty()) n->storage_emission = num(cells[4]);
                if (!cells[5].empty()) n->handling_emission = num(cells[5]);
                if (!cells[6].empty()) n->production_cost = num(cells[6]);
                if (!cells[7].empty()) n->production_emission = num(cells[7]);
            } else {
                if (!t.cell(r, c_kind).empty() &&
                    node_kind_from_string(t.cell(r, c_kind)) != n->kind)
                    throw IngestError(IngestErrorKind::Schema, t.path, line,
                                      "conflicting kind for node " + id);
                if (cells != first_scalars[id])
                    throw IngestError(IngestErrorKind::Schema, t.path, line,
                                      "conflicting node-level values for node " + id);
            }

            const std::string& prod = t.cell(r, c_cp);
            auto per_product = [&](int col, std::map<std::string, double>& target, const char* what) {
                const std::string& cell = t.cell(r, col);
                if (cell.empty()) return;
                if (prod.empty())
                    throw IngestError(IngestErrorKind::Schema, t.path, line,
                                      std::string(what) + " given without capacity_product");
                target[prod] = parse_double(cell, t.path, line);
            };
            per_product(c_cap, n->capacity, "capacity");
            per_product(c_ii, n->initial_inventory, "initial_inv");
            per_product(c_fm, n->final_inventory_min, "final_inv_min");
        }
    }

    void load_arcs() {
        CsvTable t = table("arcs");
        check_columns(t, {"from", "to", "distance_km", "vehicle", "products"}, warnings);
        int c_from = t.require_column("from");
        int c_to = t.require_column("to");
        int c_dist = t.require_column("distance_km");
        int c_veh = t.require_column("vehicle");
        int c_prod = t.require_column("products");
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            int line = t.line_numbers[r];
            Arc a;
            a.from = t.cell(r, c_from);
            a.to = t.cell(r, c_to);
            a.distance_km = parse_double(t.cell(r, c_dist), t.path, line);
            a.vehicle = t.cell(r, c_veh);
            const std::string& prods = t.cell(r, c_prod);
            if (prods != "*")
                for (auto& p : split_list(prods)) a.allowed_products.insert(p);
            inst.arcs.push_back(std::move(a));
        }
    }

    void load_refinery_types() {
        CsvTable t = table("refinery_types");
        check_columns(t, {"id", "count_required", "setup_cost", "setup_em", "allowed_zones",
                          "pre_located"},
                      warnings);
        int c_id = t.require_column("id");
        int c_count = t.require_column("count_required");
        int c_cost = t.require_column("setup_cost");
        int c_em = t.column("setup_em");
        int c_allowed = t.require_column("allowed_zones");
        int c_pre = t.column("pre_located");
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            int line = t.line_numbers[r];
            RefineryType rt;
            rt.id = t.cell(r, c_id);
            rt.count_required = static_cast<int>(parse_int(t.cell(r, c_count), t.path, line));
            rt.setup_cost_annualized = parse_double(t.cell(r, c_cost), t.path, line);
            if (!t.cell(r, c_em).empty())
                rt.setup_emission = parse_double(t.cell(r, c_em), t.path, line);
            for (auto& z : split_list(t.cell(r, c_allowed))) rt.allowed_zones.insert(z);
            for (auto& z : split_list(t.cell(r, c_pre))) rt.pre_located.insert(z);
            inst.refinery_types.push_back(std::move(rt));
        }
    }

    void load_demands() {
        CsvTable t = table("demands");
        check_columns(t, {"refinery_type", "product", "period", "tonnes"}, warnings);
        int c_rt = t.require_column("refinery_type");
        int c_prod = t.require_column("product");
        int c_per = t.require_column("period");
        int c_tonnes = t.require_column("tonnes");
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            int line = t.line_numbers[r];
            const std::string& rt_id = t.cell(r, c_rt);
            RefineryType* rt = nullptr;
            for (auto& existing : inst.refinery_types)
                if (existing.id == rt_id) rt = &existing;
            if (rt == nullptr)
                throw IngestError(IngestErrorKind::Schema, t.path, line,
                                  "demand row names unknown refinery type '" + rt_id + "'");
            const std::string& prod = t.cell(r, c_prod);
            if (inst.find_product(prod) == nullptr)
                throw IngestError(IngestErrorKind::Schema, t.path, line,
                                  "demand row names unknown product '" + prod + "'");
            int period = static_cast<int>(parse_int(t.cell(r, c_per), t.path, line));
            rt->demand[{prod, period}] += parse_double(t.cell(r, c_tonnes), t.path, line);
        }
    }

    void load_shared_groups() {
        CsvTable t = table("shared_groups");
        check_columns(t, {"id", "node", "product", "capacity"}, warnings);
        int c_id = t.require_column("id");
        int c_node = t.require_column("node");
        int c_prod = t.require_column("product");
        int c_cap = t.require_column("capacity");
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            int line = t.line_numbers[r];
            const std::string& id = t.cell(r, c_id);
            SharedCapacityGroup* g = nullptr;
            for (auto& existing : inst.shared_groups)
                if (existing.id == id) g = &existing;
            if (g == nullptr) {
                inst.shared_groups.push_back(SharedCapacityGroup{id, {}, 0.0});
                g = &inst.shared_groups.back();
                g->capacity = parse_double(t.cell(r, c_cap), t.path, line);
            } else if (!t.cell(r, c_cap).empty()) {
                double cap = parse_double(t.cell(r, c_cap), t.path, line);
                if (cap != g->capacity)
                    throw IngestError(IngestErrorKind::Schema, t.path, line,
                                      "conflicting capacity for group " + id);
            }
            g->members.insert({t.cell(r, c_node), t.cell(r, c_prod)});
        }
    }

    void load_losses() {
        auto it = manifest.files.find(kLossKey);
        if (it == manifest.files.end()) return;
        CsvTable t = read_csv(dir / it->second);
        check_columns(t, {"node", "product", "period", "loss"}, warnings);
        int c_node = t.require_column("node");
        int c_prod = t.require_column("product");
        int c_per = t.require_column("period");
        int c_loss = t.require_column("loss");
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            int line = t.line_numbers[r];
            const std::string& node_id = t.cell(r, c_node);
            int ni = inst.node_index(node_id);
            if (ni < 0)
                throw IngestError(IngestErrorKind::Schema, t.path, line,
                                  "loss row names unknown node '" + node_id + "'");
            int period = static_cast<int>(parse_int(t.cell(r, c_per), t.path, line));
            inst.nodes[ni].loss_override[{t.cell(r, c_prod), period}] =
                parse_double(t.cell(r, c_loss), t.path, line);
        }
    }
};

Manifest read_manifest(const std::filesystem::path& path, std::vector<std::string>* warnings) {
    std::ifstream in(path);
    if (!in) throw IngestError(IngestErrorKind::Io, path.string(), 0, "cannot open manifest");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw IngestError(IngestErrorKind::Parse, path.string(), 0, e.what());
    }
    Manifest m;
    if (!j.contains("version") || !j["version"].is_number_integer())
        throw IngestError(IngestErrorKind::Schema, path.string(), 0, "manifest lacks integer 'version'");
    m.version = j["version"].get<int>();
    if (m.version != 1)
        throw IngestError(IngestErrorKind::Schema, path.string(), 0,
                          "unsupported manifest version " + std::to_string(m.version));
    if (!j.contains("horizon") || !j["horizon"].is_number_integer())
        throw IngestError(IngestErrorKind::Schema, path.string(), 0, "manifest lacks integer 'horizon'");
    m.horizon = j["horizon"].get<int>();
    if (!j.contains("files") || !j["files"].is_object())
        throw IngestError(IngestErrorKind::Schema, path.string(), 0, "manifest lacks 'files' object");
    for (const auto& [key, value] : j["files"].items()) {
        bool known = std::find(kFileKeys.begin(), kFileKeys.end(), key) != kFileKeys.end() ||
                     key == kLossKey;
        if (!known) {
            warn(warnings, path.string() + ": ignoring unknown files entry '" + key + "'");
            continue;
        }
        m.files[key] = value.get<std::string>();
    }
    for (const auto& key : kFileKeys)
        if (m.files.find(key) == m.files.end())
            throw IngestError(IngestErrorKind::Schema, path.string(), 0, "manifest lacks files." + key);
    return m;
}

}  // namespace

Instance load_instance(const std::filesystem::path& manifest_path,
                       std::vector<std::string>* warnings) {
    Manifest m = read_manifest(manifest_path, warnings);
    Loader loader{manifest_path.parent_path(), m, warnings, {}};
    loader.inst.horizon = m.horizon;
    loader.load_products();
    loader.load_yields();
    loader.load_vehicles();
    loader.load_nodes();
    loader.load_arcs();
    loader.load_refinery_types();
    loader.load_demands();
    loader.load_shared_groups();
    loader.load_losses();

    ValidationReport report = validate_instance(loader.inst);
    if (!report.clean())
        throw IngestError(IngestErrorKind::Validation, manifest_path.string(), 0,
                          "instance failed validation:\n" + report.to_text());
    for (const auto& f : report.findings)
        if (f.severity == Severity::Warning) warn(warnings, f.code + " [" + f.entity + "]: " + f.message);
    return loader.inst;
}

namespace {

std::string fd(double v) { return format_double(v); }

}  // namespace

Instance canonical(const Instance& instance) {
    Instance inst = instance;
    std::sort(inst.products.begin(), inst.products.end(),
              [](const Product& a, const Product& b) { return a.id < b.id; });
    std::sort(inst.nodes.begin(), inst.nodes.end(),
              [](const Node& a, const Node& b) { return a.id < b.id; });
    std::sort(inst.arcs.begin(), inst.arcs.end(), [](const Arc& a, const Arc& b) {
        return std::tie(a.from, a.to, a.vehicle) < std::tie(b.from, b.to, b.vehicle);
    });
    std::sort(inst.vehicles.begin(), inst.vehicles.end(),
              [](const VehicleType& a, const VehicleType& b) { return a.id < b.id; });
    std::sort(inst.refinery_types.begin(), inst.refinery_types.end(),
              [](const RefineryType& a, const RefineryType& b) { return a.id < b.id; });
    std::sort(inst.shared_groups.begin(), inst.shared_groups.end(),
              [](const SharedCapacityGroup& a, const SharedCapacityGroup& b) { return a.id < b.id; });
    return inst;
}

Manifest write_instance(const Instance& instance, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);

    Instance inst = canonical(instance);

    // products.csv: one row per contiguous window block
    {
        std::vector<std::vector<std::string>> rows;
        for (const auto& p : inst.products) {
            std::vector<std::pair<int, int>> blocks;
            for (int t : p.harvest_window) {
                if (!blocks.empty() && blocks.back().second == t - 1)
                    blocks.back().second = t;
                else
                    blocks.push_back({t, t});
            }
            if (blocks.empty()) blocks.push_back({0, 0});
            bool first = true;
            for (auto [ws, we] : blocks) {
                rows.push_back({p.id, first ? p.name : "", std::to_string(ws), std::to_string(we)});
                first = false;
            }
        }
        write_csv(dir / "products.csv", {"id", "name", "window_start", "window_end"}, rows);
    }

    {
        std::vector<std::vector<std::string>> rows;
        for (const auto& p : inst.products)
            for (const auto& [zone, tonnes] : p.annual_yield)
                rows.push_back({zone, p.id, fd(tonnes)});
        write_csv(dir / "yields.csv", {"zone", "product", "tonnes"}, rows);
    }

    {
        std::vector<std::vector<std::string>> rows;
        for (const auto& v : inst.vehicles)
            rows.push_back({v.id, fd(v.transport_cost), fd(v.transport_emission)});
        write_csv(dir / "vehicles.csv", {"id", "transport_cost", "transport_em"}, rows);
    }

    bool any_loss_override = false;
    {
        std::vector<std::vector<std::string>> rows;
        for (const auto& n : inst.nodes) {
            std::set<std::string> prods;
            for (const auto& [p, _] : n.capacity) prods.insert(p);
            for (const auto& [p, _] : n.initial_inventory) prods.insert(p);
            for (const auto& [p, _] : n.final_inventory_min) prods.insert(p);
            if (!n.loss_override.empty()) any_loss_override = true;

            std::vector<std::string> scalar_cells = {
                fd(n.loss_default),
                n.max_throughput ? fd(*n.max_throughput) : "",
                fd(n.storage_cost),
                fd(n.handling_cost),
                fd(n.storage_emission),
                fd(n.handling_emission),
                fd(n.production_cost),
                fd(n.production_emission)};
            auto emit = [&](const std::string& prod) {
                std::vector<std::string> row = {n.id, std::string(to_string(n.kind))};
                if (prod.empty()) {
                    row.insert(row.end(), {"", "", "", ""});
                } else {
                    auto opt_cell = [&](const std::map<std::string, double>& m) {
                        auto it = m.find(prod);
                        return it != m.end() ? fd(it->second) : std::string();
                    };
                    row.push_back(prod);
                    row.push_back(opt_cell(n.capacity));
                    row.push_back(opt_cell(n.initial_inventory));
                    row.push_back(opt_cell(n.final_inventory_min));
                }
                row.insert(row.end(), scalar_cells.begin(), scalar_cells.end());
                rows.push_back(std::move(row));
            };
            if (prods.empty())
                emit("");
            else
                for (const auto& p : prods) emit(p);
        }
        write_csv(dir / "nodes.csv",
                  {"id", "kind", "capacity_product", "capacity", "initial_inv", "final_inv_min",
                   "loss_default", "max_throughput", "storage_cost", "handling_cost", "storage_em",
                   "handling_em", "production_cost", "production_em"},
                  rows);
    }

    {
        std::vector<std::vector<std::string>> rows;
        for (const auto& a : inst.arcs) {
            std::string prods = "*";
            if (!a.allowed_products.empty())
                prods = join_list({a.allowed_products.begin(), a.allowed_products.end()});
            rows.push_back({a.from, a.to, fd(a.distance_km), a.vehicle, prods});
        }
        write_csv(dir / "arcs.csv", {"from", "to", "distance_km", "vehicle", "products"}, rows);
    }

    {
        std::vector<std::vector<std::string>> rows;
        std::vector<std::vector<std::string>> demand_rows;
        for (const auto& rt : inst.refinery_types) {
            rows.push_back({rt.id, std::to_string(rt.count_required), fd(rt.setup_cost_annualized),
                            fd(rt.setup_emission),
                            join_list({rt.allowed_zones.begin(), rt.allowed_zones.end()}),
                            join_list({rt.pre_located.begin(), rt.pre_located.end()})});
            for (const auto& [key, tonnes] : rt.demand)
                demand_rows.push_back({rt.id, key.first, std::to_string(key.second), fd(tonnes)});
        }
        write_csv(dir / "refinery_types.csv",
                  {"id", "count_required", "setup_cost", "setup_em", "allowed_zones", "pre_located"},
                  rows);
        write_csv(dir / "demands.csv", {"refinery_type", "product", "period", "tonnes"}, demand_rows);
    }

    {
        std::vector<std::vector<std::string>> rows;
        for (const auto& g : inst.shared_groups) {
            bool first = true;
            for (const auto& [node, prod] : g.members) {
                rows.push_back({g.id, node, prod, first ? fd(g.capacity) : ""});
                first = false;
            }
        }
        write_csv(dir / "shared_groups.csv", {"id", "node", "product", "capacity"}, rows);
    }

    Manifest m;
    m.version = 1;
    m.horizon = inst.horizon;
    for (const auto& key : kFileKeys) m.files[key] = key + ".csv";

    if (any_loss_override) {
        std::vector<std::vector<std::string>> rows;
        for (const auto& n : inst.nodes)
            for (const auto& [key, loss] : n.loss_override)
                rows.push_back({n.id, key.first, std::to_string(key.second), fd(loss)});
        write_csv(dir / "losses.csv", {"node", "product", "period", "loss"}, rows);
        m.files[kLossKey] = "losses.csv";
    }

    json j;
    j["version"] = m.version;
    j["horizon"] = m.horizon;
    j["files"] = json::object();
    for (const auto& [key, file] : m.files) j["files"][key] = file;
    std::ofstream out(dir / "manifest.json");
    if (!out)
        throw IngestError(IngestErrorKind::Io, (dir / "manifest.json").string(), 0,
                          "cannot open manifest for writing");
    out << j.dump(2) << "\n";
    if (!out)
        throw IngestError(IngestErrorKind::Io, (dir / "manifest.json").string(), 0, "write failed");
    return m;
}

}  // namespace biochain::io
