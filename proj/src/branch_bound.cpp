#include <chrono>
#include <cmath>
#include <optional>
#include <ostream>
#include <queue>
#include <utility>
#include <vector>

#include "biochain/csv.hpp"
#include "biochain/solver.hpp"

namespace biochain::milp {

using io::format_double;

namespace {

struct Node {
    double bound = -kInf;
    long id = 0;
    int depth = 0;
    std::vector<double> lower, upper;
};

// Min-heap on (bound, id); ids are unique so the order is total.
struct NodeOrder {
    bool operator()(const Node& a, const Node& b) const {
        if (a.bound != b.bound) return a.bound > b.bound;
        return a.id > b.id;
    }
};

// Most fractional integral column, lowest index on ties.
int pick_branch_col(const MilpModel& model, const std::vector<double>& x, double int_tol) {
    int best = -1;
    double best_dist = kInf;
    for (int c = 0; c < model.ncols; ++c) {
        if (!model.integral[c]) continue;
        const double f = x[c] - std::floor(x[c]);
        if (std::min(f, 1.0 - f) <= int_tol) continue;
        const double dist = std::fabs(f - 0.5);
        if (dist < best_dist) {
            best_dist = dist;
            best = c;
        }
    }
    return best;
}

void log_node(std::ostream* os, const Node& node, const std::string& bound_text,
              bool have_incumbent, double incumbent) {
    if (!os) return;
    *os << "node " << node.id << " depth " << node.depth << " bound " << bound_text
        << " incumbent " << (have_incumbent ? format_double(incumbent) : "none") << "\n";
}

}  // namespace

MilpOutcome branch_and_bound(const MilpModel& model, const SolveOptions& opts) {
    using Clock = SimplexSolver::Clock;
    const auto t0 = Clock::now();
    std::optional<Clock::time_point> deadline;
    if (std::isfinite(opts.time_limit_s))
        deadline = t0 + std::chrono::duration_cast<Clock::duration>(
                            std::chrono::duration<double>(opts.time_limit_s));

    MilpOutcome out;
    double incumbent = kInf;
    double cutoff = kInf;
    double pruned_min = kInf;
    bool have_incumbent = false;

    std::priority_queue<Node, std::vector<Node>, NodeOrder> heap;
    std::optional<Node> dive;
    long next_id = 0;
    dive = Node{-kInf, next_id++, 0, model.lower, model.upper};

    bool stopped = false;
    while (true) {
        Node cur;
        if (dive) {
            cur = std::move(*dive);
            dive.reset();
        } else if (!heap.empty()) {
            cur = heap.top();
            heap.pop();
        } else {
            break;
        }

        if (have_incumbent && cur.bound >= cutoff) {
            pruned_min = std::min(pruned_min, cur.bound);
            continue;
        }
        if (opts.node_limit >= 0 && out.nodes >= opts.node_limit) {
            stopped = true;
            dive = std::move(cur);
            break;
        }

        ++out.nodes;
        SimplexSolver lp(model, opts);
        LpOutcome rel;
        try {
            rel = lp.solve(cur.lower, cur.upper, deadline);
        } catch (const SimplexSolver::TimeUp&) {
            stopped = true;
            dive = std::move(cur);
            break;
        }

        if (rel.status == LpStatus::Infeasible) {
            log_node(opts.node_log, cur, "infeasible", have_incumbent, incumbent);
            continue;
        }
        if (rel.status == LpStatus::Unbounded)
            throw NumericalBreakdown("relaxation is unbounded");
        log_node(opts.node_log, cur, format_double(rel.objective), have_incumbent, incumbent);

        const double obj = rel.objective;
        if (have_incumbent && obj >= cutoff) {
            pruned_min = std::min(pruned_min, obj);
            continue;
        }

        const int bc = pick_branch_col(model, rel.primal, opts.int_tol);
        if (bc < 0) {
            if (!have_incumbent || obj < incumbent) {
                incumbent = obj;
                have_incumbent = true;
                out.primal = rel.primal;
                for (int c = 0; c < model.ncols; ++c)
                    if (model.integral[c]) out.primal[c] = std::round(out.primal[c]);
                cutoff = incumbent - opts.mip_gap * std::max(1.0, std::fabs(incumbent));
            }
            continue;
        }

        const double fl = std::floor(rel.primal[bc]);
        Node down{obj, next_id++, cur.depth + 1, cur.lower, cur.upper};
        down.upper[bc] = fl;
        Node up{obj, next_id++, cur.depth + 1, std::move(cur.lower), std::move(cur.upper)};
        up.lower[bc] = fl + 1.0;
        if (!have_incumbent) {
            // Dive toward the nearer child until something integral is found.
            if (rel.primal[bc] - fl > 0.5) {
                heap.push(std::move(down));
                dive = std::move(up);
            } else {
                heap.push(std::move(up));
                dive = std::move(down);
            }
        } else {
            heap.push(std::move(down));
            heap.push(std::move(up));
        }
    }

    double open_min = kInf;
    if (dive) open_min = std::min(open_min, dive->bound);
    if (!heap.empty()) open_min = std::min(open_min, heap.top().bound);

    out.has_incumbent = have_incumbent;
    out.objective = have_incumbent ? incumbent : kInf;
    if (stopped) {
        out.status = MilpStatus::TimeLimit;
        out.bound = std::min({incumbent, pruned_min, open_min});
    } else if (!have_incumbent) {
        out.status = MilpStatus::Infeasible;
        out.bound = kInf;
    } else {
        out.status = MilpStatus::Optimal;
        out.bound = std::min(incumbent, pruned_min);
    }
    if (have_incumbent && std::isfinite(out.bound))
        out.gap = std::max(0.0, (out.objective - out.bound) /
                                    std::max(1.0, std::fabs(out.objective)));
    out.wall_time_s = std::chrono::duration<double>(Clock::now() - t0).count();
    return out;
}

MilpOutcome solve_milp(const MilpModel& model, const SolveOptions& opts) {
    using Clock = SimplexSolver::Clock;
    const auto t0 = Clock::now();
    PresolveResult pres = presolve(model);
    if (pres.infeasible) {
        MilpOutcome out;
        out.status = MilpStatus::Infeasible;
        out.objective = kInf;
        out.bound = kInf;
        out.wall_time_s = std::chrono::duration<double>(Clock::now() - t0).count();
        return out;
    }
    MilpOutcome out = branch_and_bound(pres.reduced, opts);
    if (out.has_incumbent) {
        out.objective += pres.cost_offset;
        out.primal = pres.restore(out.primal);
    }
    if (std::isfinite(out.bound)) out.bound += pres.cost_offset;
    if (out.has_incumbent && std::isfinite(out.bound))
        out.gap = std::max(0.0, (out.objective - out.bound) /
                                    std::max(1.0, std::fabs(out.objective)));
    out.wall_time_s = std::chrono::duration<double>(Clock::now() - t0).count();
    return out;
}

}  // namespace biochain::milp
