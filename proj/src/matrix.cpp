#include "serenqa/matrix.hpp"

#include <algorithm>
#include <cstring>

#include "serenqa/errors.hpp"
#include "serenqa/util.hpp"

namespace serenqa {

namespace {

constexpr size_t kNaiveCutoff = 64;

size_t next_pow2(size_t n) {
    size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

// Plain kernel over row-major buffers with a common stride.
void naive_block(const double* a, const double* b, double* c, size_t n, size_t stride) {
    for (size_t i = 0; i < n; ++i) {
        double* crow = c + i * stride;
        std::memset(crow, 0, n * sizeof(double));
        for (size_t k = 0; k < n; ++k) {
            double aik = a[i * stride + k];
            if (aik == 0.0) continue;
            const double* brow = b + k * stride;
            for (size_t j = 0; j < n; ++j) crow[j] += aik * brow[j];
        }
    }
}

void copy_block(const double* x, size_t xs, double* out, size_t os, size_t n) {
    for (size_t i = 0; i < n; ++i) std::memcpy(out + i * os, x + i * xs, n * sizeof(double));
}

// Seven-product recursion on 2^m blocks.
void dnc(const double* a, const double* b, double* c, size_t n, size_t stride) {
    if (n <= kNaiveCutoff) {
        naive_block(a, b, c, n, stride);
        return;
    }
    size_t h = n / 2;
    auto idx = [&](const double* base, size_t qr, size_t qc) {
        return base + qr * h * stride + qc * h;
    };
    const double* a11 = idx(a, 0, 0);
    const double* a12 = idx(a, 0, 1);
    const double* a21 = idx(a, 1, 0);
    const double* a22 = idx(a, 1, 1);
    const double* b11 = idx(b, 0, 0);
    const double* b12 = idx(b, 0, 1);
    const double* b21 = idx(b, 1, 0);
    const double* b22 = idx(b, 1, 1);
    double* c11 = c;
    double* c12 = c + h;
    double* c21 = c + h * stride;
    double* c22 = c + h * stride + h;

    std::vector<double> scratch(7 * h * h);
    double* m1 = scratch.data();
    double* m2 = m1 + h * h;
    double* m3 = m2 + h * h;
    double* m4 = m3 + h * h;
    double* m5 = m4 + h * h;
    double* m6 = m5 + h * h;
    double* m7 = m6 + h * h;

    auto packed_add = [&](const double* x, const double* y, double* out) {
        for (size_t i = 0; i < h; ++i)
            for (size_t j = 0; j < h; ++j) out[i * h + j] = x[i * stride + j] + y[i * stride + j];
    };
    auto packed_sub = [&](const double* x, const double* y, double* out) {
        for (size_t i = 0; i < h; ++i)
            for (size_t j = 0; j < h; ++j) out[i * h + j] = x[i * stride + j] - y[i * stride + j];
    };
    auto packed_copy = [&](const double* x, double* out) { copy_block(x, stride, out, h, h); };

    std::vector<double> lhs(h * h), rhs(h * h);

    // m1 = (a11 + a22)(b11 + b22)
    packed_add(a11, a22, lhs.data());
    packed_add(b11, b22, rhs.data());
    dnc(lhs.data(), rhs.data(), m1, h, h);
    // m2 = (a21 + a22) b11
    packed_add(a21, a22, lhs.data());
    packed_copy(b11, rhs.data());
    dnc(lhs.data(), rhs.data(), m2, h, h);
    // m3 = a11 (b12 - b22)
    packed_copy(a11, lhs.data());
    packed_sub(b12, b22, rhs.data());
    dnc(lhs.data(), rhs.data(), m3, h, h);
    // m4 = a22 (b21 - b11)
    packed_copy(a22, lhs.data());
    packed_sub(b21, b11, rhs.data());
    dnc(lhs.data(), rhs.data(), m4, h, h);
    // m5 = (a11 + a12) b22
    packed_add(a11, a12, lhs.data());
    packed_copy(b22, rhs.data());
    dnc(lhs.data(), rhs.data(), m5, h, h);
    // m6 = (a21 - a11)(b11 + b12)
    packed_sub(a21, a11, lhs.data());
    packed_add(b11, b12, rhs.data());
    dnc(lhs.data(), rhs.data(), m6, h, h);
    // m7 = (a12 - a22)(b21 + b22)
    packed_sub(a12, a22, lhs.data());
    packed_add(b21, b22, rhs.data());
    dnc(lhs.data(), rhs.data(), m7, h, h);

    for (size_t i = 0; i < h; ++i) {
        for (size_t j = 0; j < h; ++j) {
            size_t p = i * h + j;
            c11[i * stride + j] = m1[p] + m4[p] - m5[p] + m7[p];
            c12[i * stride + j] = m3[p] + m5[p];
            c21[i * stride + j] = m2[p] + m4[p];
            c22[i * stride + j] = m1[p] - m2[p] + m3[p] + m6[p];
        }
    }
}

}  // namespace

DenseMatrix dense_multiply_dnc(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.n != b.n) {
        throw DomainError("matrix dimensions differ: " + std::to_string(a.n) + " vs " +
                          std::to_string(b.n));
    }
    size_t n = a.n;
    DenseMatrix out(n);
    if (n == 0) return out;
    if (n <= kNaiveCutoff) {
        naive_block(a.v.data(), b.v.data(), out.v.data(), n, n);
        return out;
    }
    size_t p = next_pow2(n);
    if (p == n) {
        dnc(a.v.data(), b.v.data(), out.v.data(), n, n);
        return out;
    }
    std::vector<double> pa(p * p, 0.0), pb(p * p, 0.0), pc(p * p, 0.0);
    for (size_t i = 0; i < n; ++i) {
        std::memcpy(pa.data() + i * p, a.v.data() + i * n, n * sizeof(double));
        std::memcpy(pb.data() + i * p, b.v.data() + i * n, n * sizeof(double));
    }
    dnc(pa.data(), pb.data(), pc.data(), p, p);
    for (size_t i = 0; i < n; ++i) {
        std::memcpy(out.v.data() + i * n, pc.data() + i * p, n * sizeof(double));
    }
    return out;
}

ProbMatrix ProbMatrix::from_dense(DenseMatrix d) {
    ProbMatrix m(d.n);
    m.dense_ = true;
    m.flat_ = std::move(d.v);
    m.rows_.clear();
    return m;
}

size_t ProbMatrix::nonzeros() const {
    size_t nnz = 0;
    if (dense_) {
        for (double v : flat_)
            if (v != 0.0) ++nnz;
    } else {
        for (const auto& r : rows_) nnz += r.size();
    }
    return nnz;
}

void ProbMatrix::set_row(size_t r, std::vector<Entry> entries) {
    if (dense_) {
        double* base = flat_.data() + r * dim_;
        std::fill(base, base + dim_, 0.0);
        for (const auto& [c, v] : entries) base[c] = v;
        return;
    }
    rows_[r] = std::move(entries);
}

double ProbMatrix::at(size_t r, size_t c) const {
    if (dense_) return flat_[r * dim_ + c];
    const auto& row = rows_[r];
    auto it = std::lower_bound(row.begin(), row.end(), static_cast<uint32_t>(c),
                               [](const Entry& e, uint32_t col) { return e.first < col; });
    return (it != row.end() && it->first == c) ? it->second : 0.0;
}

double ProbMatrix::row_sum(size_t r) const {
    double s = 0.0;
    scan_row(r, [&](uint32_t, double v) { s += v; });
    return s;
}

void ProbMatrix::densify() {
    if (dense_) return;
    flat_.assign(dim_ * dim_, 0.0);
    for (size_t r = 0; r < dim_; ++r) {
        for (const auto& [c, v] : rows_[r]) flat_[r * dim_ + c] = v;
    }
    rows_.clear();
    dense_ = true;
}

void ProbMatrix::maybe_densify() {
    if (dense_ || dim_ == 0) return;
    if (static_cast<double>(nonzeros()) > kDensifyThreshold * static_cast<double>(dim_ * dim_)) {
        densify();
    }
}

DenseMatrix ProbMatrix::to_dense() const {
    DenseMatrix d(dim_);
    if (dense_) {
        d.v = flat_;
    } else {
        for (size_t r = 0; r < dim_; ++r)
            for (const auto& [c, v] : rows_[r]) d.v[r * dim_ + c] = v;
    }
    return d;
}

std::vector<double> ProbMatrix::transpose_apply(const std::vector<double>& x,
                                                unsigned workers) const {
    if (x.size() != dim_) throw DomainError("vector length does not match matrix dimension");
    constexpr size_t kBlock = 256;
    size_t blocks = (dim_ + kBlock - 1) / kBlock;
    if (blocks <= 1 || workers <= 1) {
        std::vector<double> y(dim_, 0.0);
        for (size_t r = 0; r < dim_; ++r) {
            double xr = x[r];
            if (xr == 0.0) continue;
            scan_row(r, [&](uint32_t c, double v) { y[c] += v * xr; });
        }
        return y;
    }
    std::vector<std::vector<double>> partial(blocks);
    parallel_for(blocks, workers, [&](size_t bi) {
        auto& y = partial[bi];
        y.assign(dim_, 0.0);
        size_t lo = bi * kBlock, hi = std::min(dim_, lo + kBlock);
        for (size_t r = lo; r < hi; ++r) {
            double xr = x[r];
            if (xr == 0.0) continue;
            scan_row(r, [&](uint32_t c, double v) { y[c] += v * xr; });
        }
    });
    std::vector<double> y(dim_, 0.0);
    for (size_t bi = 0; bi < blocks; ++bi) {
        for (size_t c = 0; c < dim_; ++c) y[c] += partial[bi][c];
    }
    return y;
}

ProbMatrix ProbMatrix::multiply(const ProbMatrix& a, const ProbMatrix& b, unsigned workers) {
    if (a.dim_ != b.dim_) throw DomainError("matrix dimensions differ");
    if (a.dense_ || b.dense_) {
        DenseMatrix da = a.to_dense();
        DenseMatrix db = b.to_dense();
        DenseMatrix prod = dense_multiply_dnc(da, db);
        // The recursive kernel's subtractions leave cancellation noise where
        // an exact entry is zero; probabilities must not go negative.
        for (double& x : prod.v) {
            if (x < 0.0) x = 0.0;
        }
        return from_dense(std::move(prod));
    }
    ProbMatrix out(a.dim_);
    std::vector<std::vector<Entry>> result(a.dim_);
    parallel_for(a.dim_, workers, [&](size_t r) {
        std::vector<double> acc(a.dim_, 0.0);
        std::vector<uint32_t> touched;
        for (const auto& [m, v] : a.rows_[r]) {
            for (const auto& [c, w] : b.rows_[m]) {
                if (acc[c] == 0.0) touched.push_back(c);
                acc[c] += v * w;
            }
        }
        std::sort(touched.begin(), touched.end());
        std::vector<Entry> row;
        row.reserve(touched.size());
        for (uint32_t c : touched) {
            if (acc[c] != 0.0) row.emplace_back(c, acc[c]);
        }
        result[r] = std::move(row);
    });
    out.rows_ = std::move(result);
    out.maybe_densify();
    return out;
}

void ProbMatrix::add_scaled(const ProbMatrix& m, double scale) {
    if (dim_ != m.dim_) throw DomainError("matrix dimensions differ");
    if (!dense_ && !m.dense_) {
        for (size_t r = 0; r < dim_; ++r) {
            std::vector<Entry> merged;
            merged.reserve(rows_[r].size() + m.rows_[r].size());
            auto ia = rows_[r].begin(), ea = rows_[r].end();
            auto ib = m.rows_[r].begin(), eb = m.rows_[r].end();
            while (ia != ea || ib != eb) {
                if (ib == eb || (ia != ea && ia->first < ib->first)) {
                    merged.push_back(*ia++);
                } else if (ia == ea || ib->first < ia->first) {
                    merged.emplace_back(ib->first, scale * ib->second);
                    ++ib;
                } else {
                    merged.emplace_back(ia->first, ia->second + scale * ib->second);
                    ++ia;
                    ++ib;
                }
            }
            rows_[r] = std::move(merged);
        }
        maybe_densify();
        return;
    }
    densify();
    if (m.dense_) {
        for (size_t i = 0; i < flat_.size(); ++i) flat_[i] += scale * m.flat_[i];
    } else {
        for (size_t r = 0; r < dim_; ++r)
            for (const auto& [c, v] : m.rows_[r]) flat_[r * dim_ + c] += scale * v;
    }
}

void ProbMatrix::scale(double s) {
    if (dense_) {
        for (double& v : flat_) v *= s;
    } else {
        for (auto& row : rows_)
            for (auto& [c, v] : row) v *= s;
    }
}

}  // namespace serenqa
