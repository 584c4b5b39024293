#pragma once

// Square-matrix storage for the probabilistic engine. ProbMatrix keeps rows
// sparse until fill passes a threshold, then flips to a flat dense buffer.
// dense_multiply_dnc is the recursive seven-product multiply used on the
// dense path; it pads to the next power of two and falls back to the naive
// kernel for small blocks.

#include <cstdint>
#include <utility>
#include <vector>

namespace serenqa {

struct DenseMatrix {
    size_t n = 0;
    std::vector<double> v;  // row-major, n*n

    DenseMatrix() = default;
    explicit DenseMatrix(size_t dim) : n(dim), v(dim * dim, 0.0) {}

    double& at(size_t r, size_t c) { return v[r * n + c]; }
    double at(size_t r, size_t c) const { return v[r * n + c]; }
};

// C = A * B for equal square dimensions. Throws DomainError on mismatch.
DenseMatrix dense_multiply_dnc(const DenseMatrix& a, const DenseMatrix& b);

class ProbMatrix {
public:
    using Entry = std::pair<uint32_t, double>;

    // Fill fraction above which sparse storage flips to dense.
    static constexpr double kDensifyThreshold = 0.25;

    ProbMatrix() = default;
    explicit ProbMatrix(size_t dim) : dim_(dim), rows_(dim) {}

    static ProbMatrix from_dense(DenseMatrix d);

    size_t dim() const { return dim_; }
    bool is_dense() const { return dense_; }
    size_t nonzeros() const;

    // Row must be filled in one call; entries sorted by column.
    void set_row(size_t r, std::vector<Entry> entries);
    double at(size_t r, size_t c) const;
    double row_sum(size_t r) const;

    // Visits nonzero entries of one row in column order.
    template <typename Fn>
    void scan_row(size_t r, Fn&& fn) const {
        if (dense_) {
            const double* base = flat_.data() + r * dim_;
            for (size_t c = 0; c < dim_; ++c) {
                if (base[c] != 0.0) fn(static_cast<uint32_t>(c), base[c]);
            }
        } else {
            for (const auto& [c, val] : rows_[r]) fn(c, val);
        }
    }

    void densify();
    // Flips to dense when fill exceeds the threshold.
    void maybe_densify();
    DenseMatrix to_dense() const;

    // y = transpose(M) * x, deterministic for any worker count: rows are
    // processed in fixed blocks whose partial sums are merged in order.
    std::vector<double> transpose_apply(const std::vector<double>& x, unsigned workers) const;

    static ProbMatrix multiply(const ProbMatrix& a, const ProbMatrix& b, unsigned workers);

    // result = result + scale * m (same dimension).
    void add_scaled(const ProbMatrix& m, double scale);
    void scale(double s);

private:
    size_t dim_ = 0;
    bool dense_ = false;
    std::vector<std::vector<Entry>> rows_;
    std::vector<double> flat_;
};

}  // namespace serenqa
