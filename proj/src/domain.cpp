#include "biochain/domain.hpp"

#include <algorithm>
#include <sstream>

namespace biochain {

std::string_view to_string(NodeKind kind) {
    switch (kind) {
        case NodeKind::ProductionZone: return "production_zone";
        case NodeKind::FarmStorage: return "farm_storage";
        case NodeKind::CentralStorage: return "central_storage";
        case NodeKind::RefinerySlot: return "refinery_slot";
    }
    return "?";
}

std::optional<NodeKind> node_kind_from_string(std::string_view token) {
    if (token == "production_zone") return NodeKind::ProductionZone;
    if (token == "farm_storage") return NodeKind::FarmStorage;
    if (token == "central_storage") return NodeKind::CentralStorage;
    if (token == "refinery_slot") return NodeKind::RefinerySlot;
    return std::nullopt;
}

double Node::loss(const std::string& product, int period) const {
    auto it = loss_override.find({product, period});
    return it != loss_override.end() ? it->second : loss_default;
}

double Node::initial(const std::string& product) const {
    auto it = initial_inventory.find(product);
    return it != initial_inventory.end() ? it->second : 0.0;
}

double Node::final_min(const std::string& product) const {
    auto it = final_inventory_min.find(product);
    return it != final_inventory_min.end() ? it->second : 0.0;
}

std::optional<double> Node::capacity_for(const std::string& product) const {
    auto it = capacity.find(product);
    if (it == capacity.end()) return std::nullopt;
    return it->second;
}

bool Arc::allows(const std::string& product) const {
    return allowed_products.empty() || allowed_products.count(product) > 0;
}

double RefineryType::demand_at(const std::string& product, int period) const {
    auto it = demand.find({product, period});
    return it != demand.end() ? it->second : 0.0;
}

namespace {

template <typename T>
int index_of(const std::vector<T>& items, std::string_view id) {
    for (std::size_t i = 0; i < items.size(); ++i)
        if (items[i].id == id) return static_cast<int>(i);
    return -1;
}

}  // namespace

int Instance::node_index(std::string_view id) const { return index_of(nodes, id); }
int Instance::product_index(std::string_view id) const { return index_of(products, id); }
int Instance::vehicle_index(std::string_view id) const { return index_of(vehicles, id); }

const Node* Instance::find_node(std::string_view id) const {
    int i = node_index(id);
    return i >= 0 ? &nodes[i] : nullptr;
}

const Product* Instance::find_product(std::string_view id) const {
    int i = product_index(id);
    return i >= 0 ? &products[i] : nullptr;
}

const VehicleType* Instance::find_vehicle(std::string_view id) const {
    int i = vehicle_index(id);
    return i >= 0 ? &vehicles[i] : nullptr;
}

std::string slot_id_for_zone(std::string_view zone_id) {
    return "ref_" + std::string(zone_id);
}

std::optional<std::string> zone_of_slot(std::string_view slot_id) {
    constexpr std::string_view prefix = "ref_";
    if (slot_id.substr(0, prefix.size()) != prefix) return std::nullopt;
    return std::string(slot_id.substr(prefix.size()));
}

bool ValidationReport::clean() const {
    return std::none_of(findings.begin(), findings.end(),
                        [](const Finding& f) { return f.severity == Severity::Error; });
}

bool ValidationReport::has(std::string_view code) const {
    return std::any_of(findings.begin(), findings.end(),
                       [&](const Finding& f) { return f.code == code; });
}

std::string ValidationReport::to_text() const {
    std::ostringstream os;
    for (const auto& f : findings) {
        os << (f.severity == Severity::Error ? "error" : "warning") << " " << f.code << " ["
           << f.entity << "]: " << f.message << "\n";
    }
    return os.str();
}

namespace {

struct Checker {
    const Instance& inst;
    std::vector<Finding> out;

    void add(std::string code, std::string entity, std::string message) {
        out.push_back({std::move(code), std::move(entity), std::move(message), Severity::Error});
    }

    static bool is_layer_ok(NodeKind from, NodeKind to) {
        using K = NodeKind;
        if (from == K::ProductionZone) return to == K::FarmStorage || to == K::CentralStorage;
        if (from == K::FarmStorage) return to == K::CentralStorage;
        if (from == K::CentralStorage) return to == K::RefinerySlot;
        return false;
    }

    void check_horizon() {
        if (inst.horizon < 1) add("HORIZON", "instance", "horizon must be at least 1 period");
    }

    void check_products() {
        std::set<std::string> seen;
        for (const auto& p : inst.products) {
            if (!seen.insert(p.id).second) add("PRODUCT_DUPLICATE_ID", p.id, "duplicate product id");
            if (p.harvest_window.empty())
                add("PRODUCT_EMPTY_WINDOW", p.id, "harvest window is empty");
            for (int t : p.harvest_window)
                if (t < 1 || t > inst.horizon)
                    add("PRODUCT_WINDOW_RANGE", p.id,
                        "window period " + std::to_string(t) + " outside 1.." +
                            std::to_string(inst.horizon));
            for (const auto& [zone, tonnes] : p.annual_yield) {
                if (tonnes < 0) add("YIELD_NEGATIVE", p.id, "negative yield in zone " + zone);
                const Node* z = inst.find_node(zone);
                if (z == nullptr || z->kind != NodeKind::ProductionZone)
                    add("YIELD_UNKNOWN_ZONE", p.id, "yield references non-zone '" + zone + "'");
            }
        }
    }

    void check_nodes() {
        std::set<std::string> seen;
        for (const auto& n : inst.nodes) {
            if (!seen.insert(n.id).second) add("NODE_DUPLICATE_ID", n.id, "duplicate node id");
            if (n.loss_default < 0.0 || n.loss_default >= 1.0)
                add("LOSS_OUT_OF_RANGE", n.id, "loss_default outside [0,1)");
            for (const auto& [key, v] : n.loss_override) {
                if (v < 0.0 || v >= 1.0)
                    add("LOSS_OUT_OF_RANGE", n.id,
                        "loss override for " + key.first + "@" + std::to_string(key.second) +
                            " outside [0,1)");
                if (inst.find_product(key.first) == nullptr)
                    add("NODE_UNKNOWN_PRODUCT", n.id, "loss override for unknown product " + key.first);
            }
            auto nonneg = [&](const std::map<std::string, double>& m, const char* what) {
                for (const auto& [prod, v] : m) {
                    if (v < 0) add("NODE_NEGATIVE", n.id, std::string(what) + " negative for " + prod);
                    if (inst.find_product(prod) == nullptr)
                        add("NODE_UNKNOWN_PRODUCT", n.id,
                            std::string(what) + " references unknown product " + prod);
                }
            };
            nonneg(n.capacity, "capacity");
            nonneg(n.initial_inventory, "initial inventory");
            nonneg(n.final_inventory_min, "final inventory floor");
            if (n.max_throughput && *n.max_throughput < 0)
                add("NODE_NEGATIVE", n.id, "max_throughput negative");
            if (n.storage_cost < 0 || n.handling_cost < 0 || n.storage_emission < 0 ||
                n.handling_emission < 0)
                add("NODE_NEGATIVE", n.id, "negative cost or emission rate");
            if (n.kind != NodeKind::ProductionZone &&
                (n.production_cost != 0.0 || n.production_emission != 0.0))
                add("PRODUCTION_ON_NONZONE", n.id,
                    "production rates are only meaningful on production zones");
            if (n.production_cost < 0 || n.production_emission < 0)
                add("NODE_NEGATIVE", n.id, "negative production rate");
            for (const auto& [prod, fmin] : n.final_inventory_min) {
                auto cap = n.capacity_for(prod);
                if (cap && fmin > *cap + 1e-12)
                    add("FINAL_EXCEEDS_CAPACITY", n.id,
                        "final inventory floor above capacity for " + prod);
            }
        }
    }

    void check_arcs() {
        std::set<std::tuple<std::string, std::string, std::string>> seen;
        for (std::size_t i = 0; i < inst.arcs.size(); ++i) {
            const Arc& a = inst.arcs[i];
            const std::string ent = a.from + "->" + a.to;
            if (a.from == a.to) add("ARC_SELF", ent, "arc endpoints coincide");
            const Node* nf = inst.find_node(a.from);
            const Node* nt = inst.find_node(a.to);
            if (nf == nullptr) add("ARC_ENDPOINT", ent, "unknown origin node " + a.from);
            if (nt == nullptr) add("ARC_ENDPOINT", ent, "unknown destination node " + a.to);
            if (nf && nt && !is_layer_ok(nf->kind, nt->kind))
                add("ARC_DIRECTION", ent,
                    std::string("arcs from ") + std::string(to_string(nf->kind)) + " to " +
                        std::string(to_string(nt->kind)) + " are not allowed");
            if (!(a.distance_km > 0)) add("ARC_DISTANCE", ent, "distance must be positive");
            if (inst.find_vehicle(a.vehicle) == nullptr)
                add("ARC_UNKNOWN_VEHICLE", ent, "unknown vehicle type " + a.vehicle);
            for (const auto& p : a.allowed_products)
                if (inst.find_product(p) == nullptr)
                    add("ARC_UNKNOWN_PRODUCT", ent, "unknown product " + p);
            if (!seen.insert({a.from, a.to, a.vehicle}).second)
                add("ARC_DUPLICATE", ent, "duplicate arc with vehicle " + a.vehicle);
        }
    }

    void check_vehicles() {
        std::set<std::string> seen;
        for (const auto& v : inst.vehicles) {
            if (!seen.insert(v.id).second) add("VEHICLE_DUPLICATE_ID", v.id, "duplicate vehicle id");
            if (v.transport_cost < 0 || v.transport_emission < 0)
                add("VEHICLE_NEGATIVE", v.id, "negative transport rate");
        }
    }

    void check_refineries() {
        std::set<std::string> seen;
        for (const auto& r : inst.refinery_types) {
            if (!seen.insert(r.id).second) add("REF_DUPLICATE_ID", r.id, "duplicate refinery type id");
            if (r.count_required < 0) add("REF_COUNT_NEGATIVE", r.id, "count_required negative");
            if (r.setup_cost_annualized < 0 || r.setup_emission < 0)
                add("REF_NEGATIVE", r.id, "negative setup rate");
            for (const auto& z : r.pre_located)
                if (r.allowed_zones.count(z) == 0)
                    add("REF_PRELOCATED_NOT_ALLOWED", r.id,
                        "pre-located zone " + z + " is not an allowed zone");
            if (static_cast<int>(r.pre_located.size()) > r.count_required)
                add("REF_PRELOCATED_COUNT", r.id, "more pre-located plants than count_required");
            for (const auto& [key, tonnes] : r.demand) {
                if (tonnes < 0) add("REF_DEMAND_NEGATIVE", r.id, "negative demand for " + key.first);
                if (inst.find_product(key.first) == nullptr)
                    add("REF_DEMAND_UNKNOWN_PRODUCT", r.id, "demand for unknown product " + key.first);
                if (key.second < 1 || key.second > inst.horizon)
                    add("REF_DEMAND_PERIOD", r.id,
                        "demand period " + std::to_string(key.second) + " outside horizon");
            }
            for (const auto& z : r.allowed_zones) {
                const Node* zn = inst.find_node(z);
                if (zn == nullptr || zn->kind != NodeKind::ProductionZone) {
                    add("REF_UNKNOWN_ZONE", r.id, "allowed zone '" + z + "' is not a production zone");
                    continue;
                }
                const Node* slot = inst.find_node(slot_id_for_zone(z));
                if (slot == nullptr || slot->kind != NodeKind::RefinerySlot)
                    add("SLOT_MISSING", r.id, "no refinery slot node '" + slot_id_for_zone(z) +
                                                  "' for allowed zone " + z);
            }
        }
        for (const auto& n : inst.nodes) {
            if (n.kind != NodeKind::RefinerySlot) continue;
            auto zone = zone_of_slot(n.id);
            const Node* zn = zone ? inst.find_node(*zone) : nullptr;
            if (!zone || zn == nullptr || zn->kind != NodeKind::ProductionZone)
                add("SLOT_ID", n.id, "refinery slot id must be ref_<zone> for an existing zone");
        }
    }

    void check_groups() {
        std::set<std::string> seen;
        std::set<std::pair<std::string, std::string>> member_seen;
        for (const auto& g : inst.shared_groups) {
            if (!seen.insert(g.id).second) add("GROUP_DUPLICATE_ID", g.id, "duplicate group id");
            if (g.members.empty()) add("GROUP_EMPTY", g.id, "group has no members");
            if (g.capacity < 0) add("GROUP_NEGATIVE", g.id, "negative shared capacity");
            for (const auto& [node, prod] : g.members) {
                if (!member_seen.insert({node, prod}).second)
                    add("GROUP_DUPLICATE_MEMBER", g.id,
                        "(" + node + "," + prod + ") appears in more than one group");
                const Node* n = inst.find_node(node);
                if (n == nullptr || inst.find_product(prod) == nullptr) {
                    add("GROUP_UNKNOWN_MEMBER", g.id, "unknown member (" + node + "," + prod + ")");
                } else if (n->capacity_for(prod)) {
                    add("GROUP_CONFLICTS_INDIVIDUAL", g.id,
                        "(" + node + "," + prod + ") also carries an individual capacity");
                }
            }
        }
    }
};

}  // namespace

ValidationReport validate_instance(const Instance& instance) {
    Checker c{instance, {}};
    c.check_horizon();
    c.check_products();
    c.check_nodes();
    c.check_vehicles();
    c.check_arcs();
    c.check_refineries();
    c.check_groups();
    return ValidationReport{std::move(c.out)};
}

}  // namespace biochain
