#include "biochain/solver.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

namespace biochain::milp {

std::string_view to_string(LpStatus s) {
    switch (s) {
        case LpStatus::Optimal: return "optimal";
        case LpStatus::Infeasible: return "infeasible";
        case LpStatus::Unbounded: return "unbounded";
    }
    return "?";
}

std::string_view to_string(MilpStatus s) {
    switch (s) {
        case MilpStatus::Optimal: return "optimal";
        case MilpStatus::Infeasible: return "infeasible";
        case MilpStatus::TimeLimit: return "time_limit";
    }
    return "?";
}

namespace {
constexpr double kPivotTol = 1e-10;
constexpr double kRatioTol = 1e-9;
constexpr double kDegenerateStep = 1e-11;
constexpr int kStallLimit = 500;
constexpr int kRefactorEvery = 100;
}  // namespace

SimplexSolver::SimplexSolver(const MilpModel& model, const SolveOptions& opts)
    : opts_(opts), n_(model.ncols), m_(static_cast<int>(model.rows.size())) {
    cols_.nrows = m_;
    // Gather structural columns; duplicate (row, col) pairs are summed so the
    // matrix is well formed even for hand-built models.
    std::vector<std::vector<std::pair<int, double>>> by_col(n_);
    for (int r = 0; r < m_; ++r) {
        const LinearRow& row = model.rows[r];
        for (size_t i = 0; i < row.cols.size(); ++i)
            by_col[row.cols[i]].push_back({r, row.coef[i]});
    }
    std::vector<int> rows_buf;
    std::vector<double> vals_buf;
    for (int j = 0; j < n_; ++j) {
        auto& entries = by_col[j];
        std::sort(entries.begin(), entries.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        rows_buf.clear();
        vals_buf.clear();
        for (const auto& [r, v] : entries) {
            if (!rows_buf.empty() && rows_buf.back() == r)
                vals_buf.back() += v;
            else {
                rows_buf.push_back(r);
                vals_buf.push_back(v);
            }
        }
        cols_.append_column(rows_buf, vals_buf);
    }

    rhs_.resize(m_);
    sense_.resize(m_);
    slack_of_row_.assign(m_, -1);
    for (int r = 0; r < m_; ++r) {
        rhs_[r] = model.rows[r].rhs;
        sense_[r] = model.rows[r].sense;
    }
    for (int r = 0; r < m_; ++r) {
        if (sense_[r] == 'E') continue;
        slack_of_row_[r] = cols_.ncols();
        rows_buf = {r};
        vals_buf = {sense_[r] == 'L' ? 1.0 : -1.0};
        cols_.append_column(rows_buf, vals_buf);
    }
    n_slack_ = cols_.ncols() - n_;
    total_ = n_ + n_slack_ + m_;

    phase2_cost_.assign(total_, 0.0);
    for (int j = 0; j < n_; ++j) phase2_cost_[j] = model.cost[j];
    art_sign_.assign(m_, 1.0);
}

int SimplexSolver::price(const std::vector<double>& y, const double* cost, bool bland) const {
    const int art_base = n_ + n_slack_;
    int best = -1;
    double best_mag = 0.0;
    for (int j = 0; j < total_; ++j) {
        if (status_[j] == 2) continue;
        if (lb_[j] == ub_[j]) continue;
        double d = cost[j];
        if (j < art_base) {
            for (int k = cols_.col_start[j]; k < cols_.col_start[j + 1]; ++k)
                d -= cols_.value[k] * y[cols_.row_index[k]];
        } else {
            d -= art_sign_[j - art_base] * y[j - art_base];
        }
        const double tol = opts_.opt_tol * std::max(1.0, std::fabs(cost[j]));
        const bool eligible = (status_[j] == 0 && d < -tol) || (status_[j] == 1 && d > tol);
        if (!eligible) continue;
        if (bland) return j;
        if (std::fabs(d) > best_mag) {
            best_mag = std::fabs(d);
            best = j;
        }
    }
    return best;
}

void SimplexSolver::refactorize() {
    const int art_base = n_ + n_slack_;
    int art_row_buf = 0;
    double art_val_buf = 0.0;
    const bool ok = factor_.factorize(
        m_,
        [&](int k) -> BasisFactor::Column {
            const int j = basic_[k];
            if (j < art_base)
                return {cols_.row_index.data() + cols_.col_start[j],
                        cols_.value.data() + cols_.col_start[j],
                        cols_.col_start[j + 1] - cols_.col_start[j]};
            art_row_buf = j - art_base;
            art_val_buf = art_sign_[j - art_base];
            return {&art_row_buf, &art_val_buf, 1};
        },
        kPivotTol);
    if (!ok) throw NumericalBreakdown("basis factorization failed (singular basis)");
}

void SimplexSolver::recompute_basics() {
    const int art_base = n_ + n_slack_;
    work_ = rhs_;
    for (int j = 0; j < total_; ++j) {
        if (status_[j] == 2 || x_[j] == 0.0) continue;
        if (j < art_base) {
            for (int k = cols_.col_start[j]; k < cols_.col_start[j + 1]; ++k)
                work_[cols_.row_index[k]] -= cols_.value[k] * x_[j];
        } else {
            work_[j - art_base] -= art_sign_[j - art_base] * x_[j];
        }
    }
    factor_.ftran(work_);
    xb_ = work_;
}

double SimplexSolver::objective_of(const double* cost) const {
    double v = 0.0;
    for (int j = 0; j < total_; ++j)
        if (status_[j] != 2 && x_[j] != 0.0) v += cost[j] * x_[j];
    for (int pos = 0; pos < m_; ++pos) v += cost[basic_[pos]] * xb_[pos];
    return v;
}

LpStatus SimplexSolver::run_phase(const double* cost, bool phase_one,
                                  const std::optional<Clock::time_point>& deadline,
                                  int& iterations) {
    const int art_base = n_ + n_slack_;
    const long iter_limit = 20000L + 200L * (static_cast<long>(m_) + n_);
    int stall = 0;
    bool bland = false;
    int breakdowns = 0;
    long iter = 0;

    for (;;) {
        if (deadline && (iter & 63) == 0 && Clock::now() > *deadline) throw TimeUp{};
        if (++iter > iter_limit)
            throw NumericalBreakdown("simplex iteration limit exceeded");
        if (factor_.updates() >= kRefactorEvery) {
            refactorize();
            recompute_basics();
        }

        ycol_.assign(m_, 0.0);
        for (int pos = 0; pos < m_; ++pos) ycol_[pos] = cost[basic_[pos]];
        factor_.btran(ycol_);

        const int enter = price(ycol_, cost, bland);
        if (enter < 0) return LpStatus::Optimal;
        ++iterations;

        const double sigma = status_[enter] == 0 ? 1.0 : -1.0;
        work_.assign(m_, 0.0);
        if (enter < art_base) {
            for (int k = cols_.col_start[enter]; k < cols_.col_start[enter + 1]; ++k)
                work_[cols_.row_index[k]] = cols_.value[k];
        } else {
            work_[enter - art_base] = art_sign_[enter - art_base];
        }
        factor_.ftran(work_);

        // Ratio test. theta starts at the entering variable's own range (a
        // bound flip); basic variables undercut it. Ties go to the largest
        // pivot magnitude, under Bland's rule to the smallest column index.
        double theta = ub_[enter] - lb_[enter];
        int leave = -1;
        bool leave_to_upper = false;
        for (int pos = 0; pos < m_; ++pos) {
            const double wi = sigma * work_[pos];
            if (std::fabs(wi) <= kRatioTol) continue;
            const int bc = basic_[pos];
            double step;
            bool to_upper;
            if (wi > 0.0) {
                step = std::max(0.0, (xb_[pos] - lb_[bc]) / wi);
                to_upper = false;
            } else {
                if (ub_[bc] == kInf) continue;
                step = std::max(0.0, (xb_[pos] - ub_[bc]) / wi);
                to_upper = true;
            }
            const double tie = 1e-10 * (1.0 + std::min(step, theta));
            if (step < theta - tie) {
                theta = step;
                leave = pos;
                leave_to_upper = to_upper;
            } else if (leave >= 0 && step <= theta + tie) {
                const bool better =
                    bland ? basic_[pos] < basic_[leave]
                          : std::fabs(work_[pos]) > std::fabs(work_[leave]);
                if (better) {
                    theta = std::min(theta, step);
                    leave = pos;
                    leave_to_upper = to_upper;
                }
            }
        }

        if (theta == kInf) return phase_one ? LpStatus::Infeasible : LpStatus::Unbounded;

        if (theta <= kDegenerateStep) {
            if (++stall > kStallLimit) bland = true;
        } else {
            stall = 0;
            bland = false;
        }

        if (leave < 0) {
            // Bound flip: the entering variable crosses to its other bound.
            for (int pos = 0; pos < m_; ++pos) xb_[pos] -= sigma * theta * work_[pos];
            x_[enter] = sigma > 0 ? ub_[enter] : lb_[enter];
            status_[enter] ^= 1;
            continue;
        }

        if (!factor_.update(work_, leave, kPivotTol)) {
            if (++breakdowns >= 2)
                throw NumericalBreakdown("pivot below tolerance after refactorization");
            refactorize();
            recompute_basics();
            continue;
        }
        breakdowns = 0;

        const double enter_value = x_[enter] + sigma * theta;
        for (int pos = 0; pos < m_; ++pos) xb_[pos] -= sigma * theta * work_[pos];
        const int leaving_col = basic_[leave];
        x_[leaving_col] = leave_to_upper ? ub_[leaving_col] : lb_[leaving_col];
        status_[leaving_col] = leave_to_upper ? 1 : 0;
        // Artificials never come back once they leave the basis.
        if (phase_one && leaving_col >= art_base) {
            lb_[leaving_col] = ub_[leaving_col] = 0.0;
            x_[leaving_col] = 0.0;
        }
        basic_[leave] = enter;
        xb_[leave] = enter_value;
        status_[enter] = 2;
        x_[enter] = enter_value;
    }
}

LpOutcome SimplexSolver::solve(const std::vector<double>& lower,
                               const std::vector<double>& upper,
                               std::optional<Clock::time_point> deadline) {
    const int art_base = n_ + n_slack_;
    LpOutcome out;

    lb_.assign(total_, 0.0);
    ub_.assign(total_, kInf);
    for (int j = 0; j < n_; ++j) {
        lb_[j] = lower[j];
        ub_[j] = upper[j];
        assert(lb_[j] > -kInf);
    }

    if (m_ == 0) {
        out.primal.resize(n_);
        for (int j = 0; j < n_; ++j) {
            if (phase2_cost_[j] >= 0.0)
                out.primal[j] = lb_[j];
            else if (ub_[j] < kInf)
                out.primal[j] = ub_[j];
            else {
                out.status = LpStatus::Unbounded;
                return out;
            }
            out.objective += phase2_cost_[j] * out.primal[j];
        }
        out.dual_objective = out.objective;
        out.col_status.assign(n_, 0);
        return out;
    }

    x_.assign(total_, 0.0);
    status_.assign(total_, 0);
    for (int j = 0; j < n_ + n_slack_; ++j) x_[j] = lb_[j];

    // Crash basis: slacks cover rows whose residual has the right sign,
    // artificials take the rest.
    work_ = rhs_;
    for (int j = 0; j < n_ + n_slack_; ++j) {
        if (x_[j] == 0.0) continue;
        for (int k = cols_.col_start[j]; k < cols_.col_start[j + 1]; ++k)
            work_[cols_.row_index[k]] -= cols_.value[k] * x_[j];
    }
    basic_.assign(m_, -1);
    xb_.assign(m_, 0.0);
    bool need_phase_one = false;
    for (int r = 0; r < m_; ++r) {
        const double res = work_[r];
        const int s = slack_of_row_[r];
        const bool slack_ok =
            s >= 0 && ((sense_[r] == 'L' && res >= 0.0) || (sense_[r] == 'G' && res <= 0.0));
        const int art = art_base + r;
        if (slack_ok) {
            basic_[r] = s;
            xb_[r] = sense_[r] == 'L' ? res : -res;
            status_[s] = 2;
            x_[s] = xb_[r];
            art_sign_[r] = 1.0;
            lb_[art] = ub_[art] = 0.0;
        } else {
            art_sign_[r] = res >= 0.0 ? 1.0 : -1.0;
            basic_[r] = art;
            xb_[r] = std::fabs(res);
            status_[art] = 2;
            if (xb_[r] > 0.0) need_phase_one = true;
        }
    }
    refactorize();

    out.iterations = 0;
    if (need_phase_one) {
        std::vector<double> p1(total_, 0.0);
        for (int r = 0; r < m_; ++r) p1[art_base + r] = 1.0;
        const LpStatus st = run_phase(p1.data(), true, deadline, out.iterations);
        if (st != LpStatus::Optimal) {
            out.status = LpStatus::Infeasible;
            return out;
        }
        double bscale = 1.0;
        for (int r = 0; r < m_; ++r) bscale = std::max(bscale, std::fabs(rhs_[r]));
        if (objective_of(p1.data()) > opts_.feas_tol * bscale) {
            out.status = LpStatus::Infeasible;
            return out;
        }
    }
    for (int r = 0; r < m_; ++r) {
        const int art = art_base + r;
        lb_[art] = ub_[art] = 0.0;
        if (status_[art] != 2) x_[art] = 0.0;
    }

    const LpStatus st = run_phase(phase2_cost_.data(), false, deadline, out.iterations);
    if (st == LpStatus::Unbounded) {
        out.status = LpStatus::Unbounded;
        return out;
    }

    // One clean factorization before reading results off the basis.
    refactorize();
    recompute_basics();

    for (int pos = 0; pos < m_; ++pos) x_[basic_[pos]] = xb_[pos];
    out.primal.assign(x_.begin(), x_.begin() + n_);
    out.objective = 0.0;
    for (int j = 0; j < total_; ++j) out.objective += phase2_cost_[j] * x_[j];

    ycol_.assign(m_, 0.0);
    for (int pos = 0; pos < m_; ++pos) ycol_[pos] = phase2_cost_[basic_[pos]];
    factor_.btran(ycol_);
    out.duals = ycol_;

    out.dual_objective = 0.0;
    for (int r = 0; r < m_; ++r) out.dual_objective += ycol_[r] * rhs_[r];
    for (int j = 0; j < n_ + n_slack_; ++j) {
        if (status_[j] == 2 || x_[j] == 0.0) continue;
        double d = phase2_cost_[j];
        for (int k = cols_.col_start[j]; k < cols_.col_start[j + 1]; ++k)
            d -= cols_.value[k] * ycol_[cols_.row_index[k]];
        out.dual_objective += d * x_[j];
    }

    work_ = rhs_;
    for (int j = 0; j < total_; ++j) {
        if (x_[j] == 0.0) continue;
        if (j < art_base) {
            for (int k = cols_.col_start[j]; k < cols_.col_start[j + 1]; ++k)
                work_[cols_.row_index[k]] -= cols_.value[k] * x_[j];
        } else {
            work_[j - art_base] -= art_sign_[j - art_base] * x_[j];
        }
    }
    for (int r = 0; r < m_; ++r)
        out.max_residual =
            std::max(out.max_residual, std::fabs(work_[r]) / std::max(1.0, std::fabs(rhs_[r])));

    out.col_status.assign(status_.begin(), status_.begin() + n_);
    out.status = LpStatus::Optimal;
    return out;
}

LpOutcome solve_lp(const MilpModel& model, const SolveOptions& opts) {
    SimplexSolver solver(model, opts);
    return solver.solve(model.lower, model.upper);
}

Solution extract_solution(const Instance& inst, const VariableIndex& vars,
                          const std::vector<double>& primal) {
    const auto clamp = [](double v) { return std::fabs(v) < 1e-9 ? 0.0 : v; };
    const std::vector<double> cost = build_cost_objective(inst, vars);
    const std::vector<double> ghg = build_ghg_objective(inst, vars);

    Solution s;
    for (int j = 0; j < vars.ncols(); ++j) {
        const double v = clamp(primal[j]);
        s.cost += cost[j] * v;
        s.ghg += ghg[j] * v;
        if (v == 0.0) continue;
        const auto r = vars.decode(j);
        switch (r.family) {
            case VariableIndex::Family::Harvest:
                s.harvests.push_back({inst.nodes[r.a].id, inst.products[r.b].id, r.t, v});
                break;
            case VariableIndex::Family::Flow: {
                const Arc& arc = inst.arcs[r.a];
                s.flows.push_back(
                    {arc.from, arc.to, arc.vehicle, inst.products[r.b].id, r.t, v});
                break;
            }
            case VariableIndex::Family::Inventory:
                s.inventories.push_back({inst.nodes[r.a].id, inst.products[r.b].id, r.t, v});
                break;
            case VariableIndex::Family::Open:
                if (v > 0.5)
                    s.opens.push_back({inst.nodes[r.b].id, inst.refinery_types[r.a].id});
                break;
        }
    }
    return s;
}

}  // namespace biochain::milp
