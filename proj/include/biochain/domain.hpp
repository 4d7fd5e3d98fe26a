#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace biochain {

enum class NodeKind { ProductionZone, FarmStorage, CentralStorage, RefinerySlot };

std::string_view to_string(NodeKind kind);
std::optional<NodeKind> node_kind_from_string(std::string_view token);

// A biomass product (e.g. bulk seeds, straw bales). The harvest window holds
// 1-based period indices; annual_yield maps production-zone id to the maximum
// harvestable dry tonnes over the whole horizon.
struct Product {
    std::string id;
    std::string name;
    std::set<int> harvest_window;
    std::map<std::string, double> annual_yield;

    bool operator==(const Product&) const = default;
};

// A network node. Per-product quantities are sparse maps; an absent key means
// zero (or "no individual capacity" for capacity, where a shared group may
// apply instead). Loss coefficients use a per-node default with sparse
// (product, period) overrides.
struct Node {
    std::string id;
    NodeKind kind = NodeKind::FarmStorage;
    std::map<std::string, double> capacity;
    std::map<std::string, double> initial_inventory;
    std::map<std::string, double> final_inventory_min;
    double loss_default = 0.0;
    std::map<std::pair<std::string, int>, double> loss_override;
    std::optional<double> max_throughput;
    double storage_cost = 0.0;
    double handling_cost = 0.0;
    double storage_emission = 0.0;
    double handling_emission = 0.0;
    // production zones only
    double production_cost = 0.0;
    double production_emission = 0.0;

    double loss(const std::string& product, int period) const;
    double initial(const std::string& product) const;
    double final_min(const std::string& product) const;
    std::optional<double> capacity_for(const std::string& product) const;

    bool operator==(const Node&) const = default;
};

// Directed transport link. Distances are precomputed road distances in km.
// Direction must follow the layer order: zone -> farm storage, zone -> central
// storage, farm storage -> central storage, central storage -> refinery slot.
struct Arc {
    std::string from;
    std::string to;
    double distance_km = 0.0;
    std::string vehicle;
    std::set<std::string> allowed_products;

    bool allows(const std::string& product) const;
    bool operator==(const Arc&) const = default;
};

struct VehicleType {
    std::string id;
    double transport_cost = 0.0;      // EUR per tonne-km
    double transport_emission = 0.0;  // kg CO2-eq per tonne-km

    bool operator==(const VehicleType&) const = default;
};

// A refinery type: a demand calendar in dry tonnes per (product, period),
// a required number of plants, and the zones where they may be located.
struct RefineryType {
    std::string id;
    int count_required = 0;
    double setup_cost_annualized = 0.0;  // EUR per horizon, setup + operating
    double setup_emission = 0.0;         // kg CO2-eq per opened plant
    std::map<std::pair<std::string, int>, double> demand;
    std::set<std::string> allowed_zones;
    std::set<std::string> pre_located;

    double demand_at(const std::string& product, int period) const;

    bool operator==(const RefineryType&) const = default;
};

// Nodes sharing one storage capacity across products. A (node, product) pair
// in a group must not also carry an individual capacity.
struct SharedCapacityGroup {
    std::string id;
    std::set<std::pair<std::string, std::string>> members;  // (node, product)
    double capacity = 0.0;

    bool operator==(const SharedCapacityGroup&) const = default;
};

struct Instance {
    int horizon = 52;
    std::vector<Product> products;
    std::vector<Node> nodes;
    std::vector<Arc> arcs;
    std::vector<VehicleType> vehicles;
    std::vector<RefineryType> refinery_types;
    std::vector<SharedCapacityGroup> shared_groups;

    int node_index(std::string_view id) const;
    int product_index(std::string_view id) const;
    int vehicle_index(std::string_view id) const;
    const Node* find_node(std::string_view id) const;
    const Product* find_product(std::string_view id) const;
    const VehicleType* find_vehicle(std::string_view id) const;

    bool operator==(const Instance&) const = default;
};

// Candidate refinery sites are dedicated RefinerySlot nodes, one per allowed
// zone, linked to their zone by id: the slot for zone Z is named "ref_Z".
std::string slot_id_for_zone(std::string_view zone_id);
std::optional<std::string> zone_of_slot(std::string_view slot_id);

enum class Severity { Warning, Error };

struct Finding {
    std::string code;
    std::string entity;
    std::string message;
    Severity severity = Severity::Error;

    bool operator==(const Finding&) const = default;
};

struct ValidationReport {
    std::vector<Finding> findings;

    bool clean() const;
    bool has(std::string_view code) const;
    std::string to_text() const;
};

// Checks every structural invariant of the instance. Pure: never mutates,
// never throws; all problems come back as findings.
ValidationReport validate_instance(const Instance& instance);

}  // namespace biochain
