#pragma once

#include <vector>

namespace biochain::milp {

// Column-major sparse matrix. Rows within a column are sorted and unique.
struct SparseMatrix {
    int nrows = 0;
    std::vector<int> col_start{0};
    std::vector<int> row_index;
    std::vector<double> value;

    int ncols() const { return static_cast<int>(col_start.size()) - 1; }
    void append_column(const std::vector<int>& rows, const std::vector<double>& vals);
};

// Basis inverse kept as a product of Gauss-Jordan eta matrices plus a row
// permutation: B^{-1} = P^T · E_K ··· E_1. Refactorization rebuilds the chain
// with a sparsity-guided pivot order; simplex pivots append one eta each.
class BasisFactor {
  public:
    // get_col(k) must return the sparse column of basis position k.
    struct Column {
        const int* rows;
        const double* vals;
        int nnz;
    };

    // Returns false when no acceptable pivot exists (singular basis).
    template <typename GetCol>
    bool factorize(int m, GetCol&& get_col, double pivot_tol);

    // x := B^{-1} x (dense, length m).
    void ftran(std::vector<double>& x) const;
    // x := B^{-T} x.
    void btran(std::vector<double>& x) const;

    // Replace basis position pos; w = ftran of the entering column. Returns
    // false when the pivot element is too small to be trusted.
    bool update(const std::vector<double>& w, int pos, double pivot_tol);

    int updates() const { return static_cast<int>(etas_.size()) - base_etas_; }
    int size() const { return m_; }

  private:
    struct Eta {
        int row = 0;  // pivot row; val for it holds 1/pivot
        std::vector<int> idx;
        std::vector<double> val;
    };

    bool factorize_impl(int m, std::vector<std::vector<std::pair<int, double>>> work,
                        double pivot_tol);

    int m_ = 0;
    int base_etas_ = 0;
    std::vector<Eta> etas_;
    std::vector<int> row_of_pos_;
    mutable std::vector<double> scratch_;
};

template <typename GetCol>
bool BasisFactor::factorize(int m, GetCol&& get_col, double pivot_tol) {
    std::vector<std::vector<std::pair<int, double>>> work(m);
    for (int k = 0; k < m; ++k) {
        const Column c = get_col(k);
        work[k].reserve(c.nnz);
        for (int i = 0; i < c.nnz; ++i) work[k].push_back({c.rows[i], c.vals[i]});
    }
    return factorize_impl(m, std::move(work), pivot_tol);
}

}  // namespace biochain::milp
