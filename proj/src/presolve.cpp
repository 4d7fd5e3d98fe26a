#include <algorithm>
#include <cmath>

#include "biochain/solver.hpp"

namespace biochain::milp {

namespace {

constexpr double kZeroTol = 1e-12;
constexpr double kFeasTol = 1e-6;
constexpr double kIntTol = 1e-6;

struct Shrinker {
    const MilpModel& model;
    PresolveResult& res;

    int n;
    std::vector<double> lb, ub, cost, ghg;
    std::vector<char> integral;
    std::vector<LinearRow> rows;
    std::vector<char> row_alive, col_alive, col_fixed;
    std::vector<int> col_nnz;
    bool changed = false;

    Shrinker(const MilpModel& m, PresolveResult& r)
        : model(m), res(r), n(m.ncols), lb(m.lower), ub(m.upper), cost(m.cost), ghg(m.ghg),
          integral(m.integral), rows(m.rows), row_alive(m.rows.size(), 1),
          col_alive(n, 1), col_fixed(n, 0), col_nnz(n, 0) {
        res.original_ncols = n;
        res.fixed_value.assign(n, 0.0);
        res.col_map.assign(n, -1);
        for (const LinearRow& row : rows)
            for (int c : row.cols) ++col_nnz[c];
    }

    bool infeasible(const std::string& why) {
        res.infeasible = true;
        res.infeasible_reason = why;
        return false;
    }

    void drop_entry(LinearRow& row, size_t i) {
        --col_nnz[row.cols[i]];
        row.cols.erase(row.cols.begin() + static_cast<long>(i));
        row.coef.erase(row.coef.begin() + static_cast<long>(i));
    }

    // Returns false when trivial infeasibility is detected.
    bool tighten_and_fix() {
        std::vector<int> newly_fixed;
        for (int c = 0; c < n; ++c) {
            if (!col_alive[c]) continue;
            if (integral[c]) {
                const double rl = std::ceil(lb[c] - kIntTol);
                const double ru = std::floor(ub[c] + kIntTol);
                if (rl != lb[c] || ru != ub[c]) changed = true;
                lb[c] = rl;
                ub[c] = ru;
            }
            if (lb[c] > ub[c] + kFeasTol * std::max(1.0, std::fabs(lb[c])))
                return infeasible("contradictory bounds on " + model.col_names[c]);
            if (ub[c] - lb[c] <= kZeroTol) {
                col_alive[c] = 0;
                col_fixed[c] = 1;
                res.fixed_value[c] = lb[c];
                res.cost_offset += cost[c] * lb[c];
                res.ghg_offset += ghg[c] * lb[c];
                newly_fixed.push_back(c);
                changed = true;
            }
        }
        if (newly_fixed.empty()) return true;
        std::vector<char> is_fixed(n, 0);
        for (int c : newly_fixed) is_fixed[c] = 1;
        for (size_t r = 0; r < rows.size(); ++r) {
            if (!row_alive[r]) continue;
            LinearRow& row = rows[r];
            for (size_t i = row.cols.size(); i-- > 0;) {
                const int c = row.cols[i];
                if (!is_fixed[c]) continue;
                row.rhs -= row.coef[i] * res.fixed_value[c];
                drop_entry(row, i);
            }
        }
        return true;
    }

    bool handle_empty(size_t r) {
        const LinearRow& row = rows[r];
        const bool ok = (row.sense == 'L' && row.rhs >= -kFeasTol) ||
                        (row.sense == 'G' && row.rhs <= kFeasTol) ||
                        (row.sense == 'E' && std::fabs(row.rhs) <= kFeasTol);
        if (!ok) return infeasible("empty row " + row.name + " cannot be satisfied");
        row_alive[r] = 0;
        changed = true;
        return true;
    }

    bool handle_singleton(size_t r) {
        LinearRow& row = rows[r];
        const int c = row.cols[0];
        const double a = row.coef[0];
        const double v = row.rhs / a;
        if (row.sense == 'E') {
            if (v < lb[c] - kFeasTol * std::max(1.0, std::fabs(v)) ||
                v > ub[c] + kFeasTol * std::max(1.0, std::fabs(v)))
                return infeasible("singleton row " + row.name + " forces " +
                                  model.col_names[c] + " out of bounds");
            lb[c] = ub[c] = v;
        } else if ((row.sense == 'L') == (a > 0.0)) {
            ub[c] = std::min(ub[c], v);
        } else {
            lb[c] = std::max(lb[c], v);
        }
        drop_entry(row, 0);
        row_alive[r] = 0;
        changed = true;
        return true;
    }

    void add_to_row(LinearRow& row, int col, double delta) {
        for (size_t i = 0; i < row.cols.size(); ++i) {
            if (row.cols[i] != col) continue;
            row.coef[i] += delta;
            if (std::fabs(row.coef[i]) <= kZeroTol) drop_entry(row, i);
            return;
        }
        row.cols.push_back(col);
        row.coef.push_back(delta);
        ++col_nnz[col];
    }

    bool substitute_doubleton(size_t r) {
        LinearRow& row = rows[r];
        // Eliminate a continuous unit-coefficient column; exactness of the
        // postsolve relies on the +-1 coefficients.
        int keep = -1, gone = -1;
        for (int cand = 0; cand < 2; ++cand) {
            const int c = row.cols[cand];
            if (integral[c]) continue;
            if (gone < 0 || col_nnz[c] < col_nnz[gone] ||
                (col_nnz[c] == col_nnz[gone] && c < gone))
                gone = c;
        }
        if (gone < 0) return false;
        keep = row.cols[0] == gone ? row.cols[1] : row.cols[0];
        const double a_gone = row.coef[row.cols[0] == gone ? 0 : 1];
        const double a_keep = row.coef[row.cols[0] == gone ? 1 : 0];
        const double sub_rhs = row.rhs / a_gone;  // gone = sub_rhs - k * keep
        const double k = a_keep / a_gone;

        if (k > 0.0) {
            if (ub[gone] < kInf) lb[keep] = std::max(lb[keep], sub_rhs - ub[gone]);
            if (lb[gone] > -kInf) ub[keep] = std::min(ub[keep], sub_rhs - lb[gone]);
        } else {
            if (lb[gone] > -kInf) lb[keep] = std::max(lb[keep], lb[gone] - sub_rhs);
            if (ub[gone] < kInf) ub[keep] = std::min(ub[keep], ub[gone] - sub_rhs);
        }

        for (size_t r2 = 0; r2 < rows.size(); ++r2) {
            if (!row_alive[r2] || r2 == r) continue;
            LinearRow& other = rows[r2];
            for (size_t i = 0; i < other.cols.size(); ++i) {
                if (other.cols[i] != gone) continue;
                const double beta = other.coef[i];
                drop_entry(other, i);
                add_to_row(other, keep, -beta * k);
                other.rhs -= beta * sub_rhs;
                break;
            }
        }
        cost[keep] += cost[gone] * (-k);
        res.cost_offset += cost[gone] * sub_rhs;
        ghg[keep] += ghg[gone] * (-k);
        res.ghg_offset += ghg[gone] * sub_rhs;

        res.substitutions.push_back({gone, sub_rhs, {{keep, k}}});
        col_alive[gone] = 0;
        --col_nnz[gone];
        --col_nnz[keep];
        row_alive[r] = 0;
        changed = true;
        return true;
    }

    bool sweep_rows() {
        for (size_t r = 0; r < rows.size(); ++r) {
            if (!row_alive[r]) continue;
            const size_t len = rows[r].cols.size();
            if (len == 0) {
                if (!handle_empty(r)) return false;
            } else if (len == 1) {
                if (!handle_singleton(r)) return false;
            } else if (len == 2 && rows[r].sense == 'E' &&
                       std::fabs(std::fabs(rows[r].coef[0]) - 1.0) <= kZeroTol &&
                       std::fabs(std::fabs(rows[r].coef[1]) - 1.0) <= kZeroTol) {
                substitute_doubleton(r);
            }
        }
        return true;
    }

    void compact() {
        MilpModel& red = res.reduced;
        int nc = 0;
        for (int c = 0; c < n; ++c)
            if (col_alive[c]) res.col_map[c] = nc++;
        red.ncols = nc;
        red.lower.reserve(nc);
        for (int c = 0; c < n; ++c) {
            if (!col_alive[c]) continue;
            red.lower.push_back(lb[c]);
            red.upper.push_back(ub[c]);
            red.cost.push_back(cost[c]);
            red.ghg.push_back(ghg[c]);
            red.integral.push_back(integral[c]);
            red.col_names.push_back(model.col_names.empty() ? "" : model.col_names[c]);
        }
        int live_rows = 0;
        for (size_t r = 0; r < rows.size(); ++r) {
            if (!row_alive[r]) continue;
            LinearRow out;
            out.name = rows[r].name;
            out.sense = rows[r].sense;
            out.rhs = rows[r].rhs;
            for (size_t i = 0; i < rows[r].cols.size(); ++i) {
                out.cols.push_back(res.col_map[rows[r].cols[i]]);
                out.coef.push_back(rows[r].coef[i]);
            }
            if (model.epsilon_row && *model.epsilon_row == static_cast<int>(r))
                red.epsilon_row = live_rows;
            red.rows.push_back(std::move(out));
            ++live_rows;
        }
    }
};

}  // namespace

PresolveResult presolve(const MilpModel& model) {
    PresolveResult res;
    Shrinker s(model, res);
    for (int pass = 0; pass < 50; ++pass) {
        s.changed = false;
        if (!s.tighten_and_fix()) return res;
        if (!s.sweep_rows()) return res;
        if (!s.changed) break;
    }
    s.compact();
    return res;
}

std::vector<double> PresolveResult::restore(const std::vector<double>& reduced_x) const {
    std::vector<double> full(original_ncols, 0.0);
    for (int c = 0; c < original_ncols; ++c) {
        if (col_map[c] >= 0)
            full[c] = reduced_x[col_map[c]];
        else
            full[c] = fixed_value[c];
    }
    for (auto it = substitutions.rbegin(); it != substitutions.rend(); ++it) {
        double v = it->rhs;
        for (const auto& [col, coef] : it->terms) v -= coef * full[col];
        full[it->col] = v;
    }
    return full;
}

}  // namespace biochain::milp
