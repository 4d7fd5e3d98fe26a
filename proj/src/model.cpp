#include "biochain/model.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "biochain/csv.hpp"

namespace biochain::milp {

using io::format_double;

namespace {

// Arc indices grouped by endpoint, preserving instance order.
struct ArcsByNode {
    std::vector<std::vector<int>> in;
    std::vector<std::vector<int>> out;

    explicit ArcsByNode(const Instance& inst)
        : in(inst.nodes.size()), out(inst.nodes.size()) {
        for (size_t a = 0; a < inst.arcs.size(); ++a) {
            out[inst.node_index(inst.arcs[a].from)].push_back(static_cast<int>(a));
            in[inst.node_index(inst.arcs[a].to)].push_back(static_cast<int>(a));
        }
    }
};

}  // namespace

void LinearRow::add(int col, double v) {
    if (v == 0.0) return;
    cols.push_back(col);
    coef.push_back(v);
}

std::optional<int> VariableIndex::harvest_col(int zone, int product, int period) const {
    auto it = harvest_.find({zone, product});
    if (it == harvest_.end()) return std::nullopt;
    const auto& [base, window] = it->second;
    auto pos = std::lower_bound(window.begin(), window.end(), period);
    if (pos == window.end() || *pos != period) return std::nullopt;
    return base + static_cast<int>(pos - window.begin());
}

std::optional<int> VariableIndex::flow_col(int arc, int product, int period) const {
    for (const auto& [p, base] : flow_[arc])
        if (p == product) return base + (period - 1);
    return std::nullopt;
}

int VariableIndex::inv_col(int node, int product, int period) const {
    return inv_base_ + (node * num_products_ + product) * horizon_ + (period - 1);
}

std::optional<int> VariableIndex::open_col(int type, int zone) const {
    for (const auto& [z, col] : open_[type])
        if (z == zone) return col;
    return std::nullopt;
}

VariableIndex::ColRef VariableIndex::decode(int col) const { return decode_[col]; }

std::string VariableIndex::name(int col, const Instance& inst) const {
    const ColRef r = decode_[col];
    switch (r.family) {
        case Family::Harvest:
            return "h_" + inst.nodes[r.a].id + "_" + inst.products[r.b].id + "_" +
                   std::to_string(r.t);
        case Family::Flow:
            return "f_" + std::to_string(r.a) + "_" + inst.products[r.b].id + "_" +
                   std::to_string(r.t);
        case Family::Inventory:
            return "s_" + inst.nodes[r.a].id + "_" + inst.products[r.b].id + "_" +
                   std::to_string(r.t);
        case Family::Open:
            return "y_" + inst.nodes[r.b].id + "_" + inst.refinery_types[r.a].id;
    }
    return "x" + std::to_string(col);
}

VariableIndex build_variables(const Instance& inst) {
    VariableIndex v;
    v.horizon_ = inst.horizon;
    v.num_products_ = static_cast<int>(inst.products.size());
    int col = 0;

    // Harvest columns exist only where a zone actually yields the product and
    // only for periods inside the harvest window.
    for (size_t n = 0; n < inst.nodes.size(); ++n) {
        if (inst.nodes[n].kind != NodeKind::ProductionZone) continue;
        for (size_t p = 0; p < inst.products.size(); ++p) {
            auto y = inst.products[p].annual_yield.find(inst.nodes[n].id);
            if (y == inst.products[p].annual_yield.end() || y->second <= 0.0) continue;
            std::vector<int> window(inst.products[p].harvest_window.begin(),
                                    inst.products[p].harvest_window.end());
            const int base = col;
            for (int t : window) {
                v.decode_.push_back({VariableIndex::Family::Harvest, static_cast<int>(n),
                                     static_cast<int>(p), t});
                ++col;
            }
            v.harvest_[{static_cast<int>(n), static_cast<int>(p)}] = {base, std::move(window)};
        }
    }
    v.flow_base_ = col;

    v.flow_.resize(inst.arcs.size());
    for (size_t a = 0; a < inst.arcs.size(); ++a) {
        for (size_t p = 0; p < inst.products.size(); ++p) {
            if (!inst.arcs[a].allows(inst.products[p].id)) continue;
            v.flow_[a].push_back({static_cast<int>(p), col});
            for (int t = 1; t <= inst.horizon; ++t) {
                v.decode_.push_back({VariableIndex::Family::Flow, static_cast<int>(a),
                                     static_cast<int>(p), t});
                ++col;
            }
        }
    }
    v.inv_base_ = col;

    // Inventory columns are dense: every node, product and period. Columns of
    // products a node never touches collapse to zero through the balance rows
    // and are cleaned away by presolve.
    for (size_t n = 0; n < inst.nodes.size(); ++n)
        for (size_t p = 0; p < inst.products.size(); ++p)
            for (int t = 1; t <= inst.horizon; ++t) {
                v.decode_.push_back({VariableIndex::Family::Inventory, static_cast<int>(n),
                                     static_cast<int>(p), t});
                ++col;
            }
    v.open_base_ = col;

    v.open_.resize(inst.refinery_types.size());
    for (size_t k = 0; k < inst.refinery_types.size(); ++k)
        for (const std::string& zone : inst.refinery_types[k].allowed_zones) {
            const int zn = inst.node_index(zone);
            v.open_[k].push_back({zn, col});
            v.decode_.push_back({VariableIndex::Family::Open, static_cast<int>(k), zn, 0});
            ++col;
        }
    v.ncols_ = col;
    return v;
}

std::vector<LinearRow> build_inventory_balance(const Instance& inst, const VariableIndex& vars) {
    std::vector<LinearRow> rows;
    const ArcsByNode arcs(inst);
    for (size_t n = 0; n < inst.nodes.size(); ++n) {
        const Node& node = inst.nodes[n];
        if (node.kind == NodeKind::RefinerySlot) continue;
        for (size_t p = 0; p < inst.products.size(); ++p) {
            const std::string& pid = inst.products[p].id;
            for (int t = 1; t <= inst.horizon; ++t) {
                LinearRow row;
                row.name = "bal_" + node.id + "_" + pid + "_" + std::to_string(t);
                row.sense = 'E';
                const double carry = 1.0 - node.loss(pid, t);
                row.add(vars.inv_col(static_cast<int>(n), static_cast<int>(p), t), 1.0);
                if (t == 1)
                    row.rhs = carry * node.initial(pid);
                else
                    row.add(vars.inv_col(static_cast<int>(n), static_cast<int>(p), t - 1),
                            -carry);
                if (auto h = vars.harvest_col(static_cast<int>(n), static_cast<int>(p), t))
                    row.add(*h, -1.0);
                for (int a : arcs.in[n])
                    if (auto f = vars.flow_col(a, static_cast<int>(p), t)) row.add(*f, -1.0);
                for (int a : arcs.out[n])
                    if (auto f = vars.flow_col(a, static_cast<int>(p), t)) row.add(*f, 1.0);
                rows.push_back(std::move(row));
            }
        }
    }
    return rows;
}

std::vector<LinearRow> build_capacity_constraints(const Instance& inst,
                                                  const VariableIndex& vars) {
    std::vector<LinearRow> rows;

    // Individual storage caps, one row per node, product and period. These are
    // deliberately rows rather than variable bounds so reductions stay visible.
    for (size_t n = 0; n < inst.nodes.size(); ++n)
        for (size_t p = 0; p < inst.products.size(); ++p) {
            auto cap = inst.nodes[n].capacity_for(inst.products[p].id);
            if (!cap) continue;
            for (int t = 1; t <= inst.horizon; ++t) {
                LinearRow row;
                row.name = "cap_" + inst.nodes[n].id + "_" + inst.products[p].id + "_" +
                           std::to_string(t);
                row.sense = 'L';
                row.rhs = *cap;
                row.add(vars.inv_col(static_cast<int>(n), static_cast<int>(p), t), 1.0);
                rows.push_back(std::move(row));
            }
        }

    for (const SharedCapacityGroup& g : inst.shared_groups)
        for (int t = 1; t <= inst.horizon; ++t) {
            LinearRow row;
            row.name = "grp_" + g.id + "_" + std::to_string(t);
            row.sense = 'L';
            row.rhs = g.capacity;
            for (const auto& [node_id, product_id] : g.members)
                row.add(vars.inv_col(inst.node_index(node_id),
                                     inst.product_index(product_id), t),
                        1.0);
            rows.push_back(std::move(row));
        }

    for (size_t n = 0; n < inst.nodes.size(); ++n)
        for (size_t p = 0; p < inst.products.size(); ++p) {
            const double fmin = inst.nodes[n].final_min(inst.products[p].id);
            if (fmin <= 0.0) continue;
            LinearRow row;
            row.name = "fin_" + inst.nodes[n].id + "_" + inst.products[p].id;
            row.sense = 'G';
            row.rhs = fmin;
            row.add(vars.inv_col(static_cast<int>(n), static_cast<int>(p), inst.horizon), 1.0);
            rows.push_back(std::move(row));
        }

    // Annual yields cap the harvest of each zone and product over the horizon.
    for (size_t n = 0; n < inst.nodes.size(); ++n) {
        if (inst.nodes[n].kind != NodeKind::ProductionZone) continue;
        for (size_t p = 0; p < inst.products.size(); ++p) {
            auto y = inst.products[p].annual_yield.find(inst.nodes[n].id);
            if (y == inst.products[p].annual_yield.end() || y->second <= 0.0) continue;
            LinearRow row;
            row.name = "yld_" + inst.nodes[n].id + "_" + inst.products[p].id;
            row.sense = 'L';
            row.rhs = y->second;
            for (int t : inst.products[p].harvest_window)
                if (auto h = vars.harvest_col(static_cast<int>(n), static_cast<int>(p), t))
                    row.add(*h, 1.0);
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

std::vector<LinearRow> build_throughput_constraints(const Instance& inst,
                                                    const VariableIndex& vars) {
    std::vector<LinearRow> rows;
    const ArcsByNode arcs(inst);
    for (size_t n = 0; n < inst.nodes.size(); ++n) {
        if (!inst.nodes[n].max_throughput) continue;
        for (int t = 1; t <= inst.horizon; ++t) {
            LinearRow row;
            row.name = "thr_" + inst.nodes[n].id + "_" + std::to_string(t);
            row.sense = 'L';
            row.rhs = *inst.nodes[n].max_throughput;
            for (int a : arcs.out[n])
                for (size_t p = 0; p < inst.products.size(); ++p)
                    if (auto f = vars.flow_col(a, static_cast<int>(p), t)) row.add(*f, 1.0);
            if (!row.cols.empty()) rows.push_back(std::move(row));
        }
    }
    return rows;
}

std::vector<LinearRow> build_demand_constraints(const Instance& inst,
                                                const VariableIndex& vars) {
    std::vector<LinearRow> rows;
    const ArcsByNode arcs(inst);
    for (size_t n = 0; n < inst.nodes.size(); ++n) {
        const Node& node = inst.nodes[n];
        if (node.kind != NodeKind::RefinerySlot) continue;
        const auto zone = zone_of_slot(node.id);
        const int zn = zone ? inst.node_index(*zone) : -1;
        for (size_t p = 0; p < inst.products.size(); ++p) {
            const std::string& pid = inst.products[p].id;
            for (int t = 1; t <= inst.horizon; ++t) {
                LinearRow row;
                row.name = "dem_" + node.id + "_" + pid + "_" + std::to_string(t);
                row.sense = 'E';
                const double carry = 1.0 - node.loss(pid, t);
                row.add(vars.inv_col(static_cast<int>(n), static_cast<int>(p), t), 1.0);
                if (t == 1)
                    row.rhs = carry * node.initial(pid);
                else
                    row.add(vars.inv_col(static_cast<int>(n), static_cast<int>(p), t - 1),
                            -carry);
                for (int a : arcs.in[n])
                    if (auto f = vars.flow_col(a, static_cast<int>(p), t)) row.add(*f, -1.0);
                // Consumption switches on with the plant: each candidate type
                // draws its demand calendar when its open variable is set.
                if (zn >= 0)
                    for (size_t k = 0; k < inst.refinery_types.size(); ++k) {
                        const double d = inst.refinery_types[k].demand_at(pid, t);
                        if (d == 0.0) continue;
                        if (auto y = vars.open_col(static_cast<int>(k), zn)) row.add(*y, d);
                    }
                rows.push_back(std::move(row));
            }
        }
    }
    return rows;
}

std::vector<LinearRow> build_location_constraints(const Instance& inst,
                                                  const VariableIndex& vars) {
    std::vector<LinearRow> rows;

    // At most one plant per zone, across all types.
    for (size_t n = 0; n < inst.nodes.size(); ++n) {
        if (inst.nodes[n].kind != NodeKind::ProductionZone) continue;
        LinearRow row;
        row.name = "loc_" + inst.nodes[n].id;
        row.sense = 'L';
        row.rhs = 1.0;
        for (size_t k = 0; k < inst.refinery_types.size(); ++k)
            if (auto y = vars.open_col(static_cast<int>(k), static_cast<int>(n)))
                row.add(*y, 1.0);
        if (!row.cols.empty()) rows.push_back(std::move(row));
    }

    // Exactly the required number of plants per type.
    for (size_t k = 0; k < inst.refinery_types.size(); ++k) {
        LinearRow row;
        row.name = "cnt_" + inst.refinery_types[k].id;
        row.sense = 'E';
        row.rhs = inst.refinery_types[k].count_required;
        for (const std::string& zone : inst.refinery_types[k].allowed_zones)
            if (auto y = vars.open_col(static_cast<int>(k), inst.node_index(zone)))
                row.add(*y, 1.0);
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<double> build_cost_objective(const Instance& inst, const VariableIndex& vars) {
    std::vector<double> c(vars.ncols(), 0.0);
    for (int col = 0; col < vars.ncols(); ++col) {
        const auto r = vars.decode(col);
        switch (r.family) {
            case VariableIndex::Family::Harvest:
                c[col] = inst.nodes[r.a].production_cost;
                break;
            case VariableIndex::Family::Flow: {
                const Arc& arc = inst.arcs[r.a];
                c[col] = arc.distance_km *
                             inst.vehicles[inst.vehicle_index(arc.vehicle)].transport_cost +
                         inst.find_node(arc.from)->handling_cost +
                         inst.find_node(arc.to)->handling_cost;
                break;
            }
            case VariableIndex::Family::Inventory:
                c[col] = inst.nodes[r.a].storage_cost;
                break;
            case VariableIndex::Family::Open:
                c[col] = inst.refinery_types[r.a].setup_cost_annualized;
                break;
        }
    }
    return c;
}

std::vector<double> build_ghg_objective(const Instance& inst, const VariableIndex& vars) {
    std::vector<double> g(vars.ncols(), 0.0);
    for (int col = 0; col < vars.ncols(); ++col) {
        const auto r = vars.decode(col);
        switch (r.family) {
            case VariableIndex::Family::Harvest:
                g[col] = inst.nodes[r.a].production_emission;
                break;
            case VariableIndex::Family::Flow: {
                const Arc& arc = inst.arcs[r.a];
                g[col] = arc.distance_km *
                             inst.vehicles[inst.vehicle_index(arc.vehicle)].transport_emission +
                         inst.find_node(arc.from)->handling_emission +
                         inst.find_node(arc.to)->handling_emission;
                break;
            }
            case VariableIndex::Family::Inventory:
                g[col] = inst.nodes[r.a].storage_emission;
                break;
            case VariableIndex::Family::Open:
                g[col] = inst.refinery_types[r.a].setup_emission;
                break;
        }
    }
    return g;
}

double MilpModel::cost_of(const std::vector<double>& x) const {
    double v = 0.0;
    for (int j = 0; j < ncols; ++j) v += cost[j] * x[j];
    return v;
}

double MilpModel::ghg_of(const std::vector<double>& x) const {
    double v = 0.0;
    for (int j = 0; j < ncols; ++j) v += ghg[j] * x[j];
    return v;
}

MilpModel apply_epsilon(const MilpModel& model, double epsilon) {
    if (epsilon < 0.0)
        throw EpsilonError("EPSILON_NEGATIVE: emission bound must be nonnegative, got " +
                           format_double(epsilon));
    MilpModel out = model;
    LinearRow row;
    row.name = "epsilon";
    row.sense = 'L';
    row.rhs = epsilon;
    for (int j = 0; j < out.ncols; ++j) row.add(j, out.ghg[j]);
    if (out.epsilon_row) {
        out.rows[*out.epsilon_row] = std::move(row);
    } else {
        out.epsilon_row = static_cast<int>(out.rows.size());
        out.rows.push_back(std::move(row));
    }
    return out;
}

MilpModel build_model(const Instance& inst, std::optional<double> epsilon) {
    const VariableIndex vars = build_variables(inst);
    MilpModel m;
    m.ncols = vars.ncols();
    m.lower.assign(m.ncols, 0.0);
    m.upper.assign(m.ncols, kInf);
    m.integral.assign(m.ncols, 0);
    m.cost = build_cost_objective(inst, vars);
    m.ghg = build_ghg_objective(inst, vars);
    m.col_names.reserve(m.ncols);
    for (int j = 0; j < m.ncols; ++j) m.col_names.push_back(vars.name(j, inst));

    for (int j = 0; j < m.ncols; ++j) {
        const auto r = vars.decode(j);
        if (r.family != VariableIndex::Family::Open) continue;
        m.integral[j] = 1;
        m.upper[j] = 1.0;
        const RefineryType& type = inst.refinery_types[r.a];
        if (type.pre_located.count(inst.nodes[r.b].id)) m.lower[j] = 1.0;
    }

    auto append = [&m](std::vector<LinearRow> rows) {
        for (LinearRow& r : rows) m.rows.push_back(std::move(r));
    };
    append(build_inventory_balance(inst, vars));
    append(build_capacity_constraints(inst, vars));
    append(build_throughput_constraints(inst, vars));
    append(build_demand_constraints(inst, vars));
    append(build_location_constraints(inst, vars));

    if (epsilon) return apply_epsilon(m, *epsilon);
    return m;
}

namespace {

void write_terms(std::ostream& os, const std::vector<int>& cols,
                 const std::vector<double>& coef, const std::vector<std::string>& names) {
    int on_line = 0;
    for (size_t i = 0; i < cols.size(); ++i) {
        double c = coef[i];
        if (i == 0) {
            os << ' ';
            if (c < 0) {
                os << "- ";
                c = -c;
            }
        } else {
            os << (c < 0 ? " - " : " + ");
            c = std::fabs(c);
        }
        os << format_double(c) << ' ' << names[cols[i]];
        if (++on_line == 6 && i + 1 < cols.size()) {
            os << '\n' << "   ";
            on_line = 0;
        }
    }
}

}  // namespace

void write_lp(const MilpModel& model, std::ostream& os) {
    os << "\\ biochain supply chain model\n";
    os << "Minimize\n obj:";
    std::vector<int> obj_cols;
    std::vector<double> obj_coef;
    for (int j = 0; j < model.ncols; ++j)
        if (model.cost[j] != 0.0) {
            obj_cols.push_back(j);
            obj_coef.push_back(model.cost[j]);
        }
    write_terms(os, obj_cols, obj_coef, model.col_names);
    os << "\nSubject To\n";
    for (const LinearRow& row : model.rows) {
        os << ' ' << row.name << ':';
        write_terms(os, row.cols, row.coef, model.col_names);
        switch (row.sense) {
            case 'L': os << " <= "; break;
            case 'G': os << " >= "; break;
            default: os << " = "; break;
        }
        os << format_double(row.rhs) << '\n';
    }
    os << "Bounds\n";
    for (int j = 0; j < model.ncols; ++j) {
        const bool def_lower = model.lower[j] == 0.0;
        const bool def_upper = model.upper[j] == kInf || (model.integral[j] && model.upper[j] == 1.0);
        if (model.lower[j] == model.upper[j]) {
            os << ' ' << model.col_names[j] << " = " << format_double(model.lower[j]) << '\n';
        } else if (!def_lower || !def_upper) {
            os << ' ' << format_double(model.lower[j]) << " <= " << model.col_names[j];
            if (model.upper[j] != kInf) os << " <= " << format_double(model.upper[j]);
            os << '\n';
        }
    }
    bool any_binary = false;
    for (int j = 0; j < model.ncols; ++j)
        if (model.integral[j]) {
            if (!any_binary) {
                os << "Binaries\n";
                any_binary = true;
            }
            os << ' ' << model.col_names[j] << '\n';
        }
    os << "End\n";
}

}  // namespace biochain::milp
