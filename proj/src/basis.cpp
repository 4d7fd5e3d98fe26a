#include "biochain/basis.hpp"

#include <algorithm>
#include <cmath>

namespace biochain::milp {

namespace {
constexpr double kDropTol = 1e-14;
}

void SparseMatrix::append_column(const std::vector<int>& rows, const std::vector<double>& vals) {
    row_index.insert(row_index.end(), rows.begin(), rows.end());
    value.insert(value.end(), vals.begin(), vals.end());
    col_start.push_back(static_cast<int>(row_index.size()));
}

bool BasisFactor::factorize_impl(int m, std::vector<std::vector<std::pair<int, double>>> work,
                                 double pivot_tol) {
    m_ = m;
    etas_.clear();
    etas_.reserve(static_cast<size_t>(m) + 128);
    row_of_pos_.assign(m, -1);
    base_etas_ = 0;

    std::vector<char> row_done(m, 0), col_done(m, 0);
    std::vector<int> live_nnz(m, 0);
    for (int k = 0; k < m; ++k) live_nnz[k] = static_cast<int>(work[k].size());

    std::vector<double> dense(m, 0.0);
    for (int step = 0; step < m; ++step) {
        // Markowitz-flavoured choice: thinnest remaining column, then the
        // largest pivot inside it. Falls back to a global scan when that
        // column turns out numerically useless.
        int pick = -1;
        for (int k = 0; k < m; ++k)
            if (!col_done[k] && (pick < 0 || live_nnz[k] < live_nnz[pick])) pick = k;
        if (pick < 0) return false;

        auto best_pivot = [&](int k) {
            int row = -1;
            double mag = 0.0;
            for (const auto& [r, v] : work[k])
                if (!row_done[r] && std::fabs(v) > mag) {
                    mag = std::fabs(v);
                    row = r;
                }
            return std::pair<int, double>{row, mag};
        };
        auto [prow, pmag] = best_pivot(pick);
        if (pmag < pivot_tol) {
            pick = -1;
            for (int k = 0; k < m; ++k) {
                if (col_done[k]) continue;
                auto [r, mag] = best_pivot(k);
                if (mag >= pivot_tol && (pick < 0 || mag > pmag)) {
                    pick = k;
                    prow = r;
                    pmag = mag;
                }
            }
            if (pick < 0) return false;
        }

        double pivot = 0.0;
        for (const auto& [r, v] : work[pick])
            if (r == prow) pivot = v;

        Eta eta;
        eta.row = prow;
        eta.idx.reserve(work[pick].size());
        eta.val.reserve(work[pick].size());
        for (const auto& [r, v] : work[pick]) {
            eta.idx.push_back(r);
            eta.val.push_back(r == prow ? 1.0 / pivot : -v / pivot);
        }

        col_done[pick] = 1;
        row_done[prow] = 1;
        row_of_pos_[pick] = prow;

        // Eliminate the pivot row from every remaining column.
        for (int k = 0; k < m; ++k) {
            if (col_done[k]) continue;
            double at_pivot = 0.0;
            for (const auto& [r, v] : work[k])
                if (r == prow) at_pivot = v;
            if (at_pivot == 0.0) continue;
            for (const auto& [r, v] : work[k]) dense[r] = v;
            for (size_t i = 0; i < eta.idx.size(); ++i) {
                const int r = eta.idx[i];
                if (r == prow)
                    dense[r] = at_pivot * eta.val[i];
                else
                    dense[r] += at_pivot * eta.val[i];
            }
            std::vector<std::pair<int, double>> next;
            next.reserve(work[k].size() + eta.idx.size());
            for (const auto& [r, v] : work[k]) {
                if (std::fabs(dense[r]) > kDropTol) next.push_back({r, dense[r]});
                dense[r] = 0.0;
            }
            for (size_t i = 0; i < eta.idx.size(); ++i) {
                const int r = eta.idx[i];
                if (dense[r] != 0.0) {
                    if (std::fabs(dense[r]) > kDropTol) next.push_back({r, dense[r]});
                    dense[r] = 0.0;
                }
            }
            std::sort(next.begin(), next.end());
            work[k] = std::move(next);
            int live = 0;
            for (const auto& [r, v] : work[k])
                if (!row_done[r]) ++live;
            live_nnz[k] = live;
        }
        etas_.push_back(std::move(eta));
    }
    base_etas_ = static_cast<int>(etas_.size());
    return true;
}

void BasisFactor::ftran(std::vector<double>& x) const {
    for (const Eta& e : etas_) {
        const double xr = x[e.row];
        if (xr == 0.0) continue;
        for (size_t i = 0; i < e.idx.size(); ++i) {
            if (e.idx[i] == e.row)
                x[e.row] = xr * e.val[i];
            else
                x[e.idx[i]] += xr * e.val[i];
        }
    }
    scratch_.assign(m_, 0.0);
    for (int pos = 0; pos < m_; ++pos) scratch_[pos] = x[row_of_pos_[pos]];
    x.swap(scratch_);
}

void BasisFactor::btran(std::vector<double>& x) const {
    scratch_.assign(m_, 0.0);
    for (int pos = 0; pos < m_; ++pos) scratch_[row_of_pos_[pos]] = x[pos];
    x.swap(scratch_);
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
        double dot = 0.0;
        for (size_t i = 0; i < it->idx.size(); ++i) dot += it->val[i] * x[it->idx[i]];
        x[it->row] = dot;
    }
}

bool BasisFactor::update(const std::vector<double>& w, int pos, double pivot_tol) {
    const double pivot = w[pos];
    if (std::fabs(pivot) < pivot_tol) return false;
    Eta eta;
    eta.row = row_of_pos_[pos];
    for (int i = 0; i < m_; ++i) {
        if (w[i] == 0.0 && i != pos) continue;
        eta.idx.push_back(row_of_pos_[i]);
        eta.val.push_back(i == pos ? 1.0 / pivot : -w[i] / pivot);
    }
    etas_.push_back(std::move(eta));
    return true;
}

}  // namespace biochain::milp
