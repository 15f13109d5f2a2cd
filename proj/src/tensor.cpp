#include "gvlm/tensor.hpp"

#include <cmath>

namespace gvlm {

bool Tensor2D::all_finite() const {
    for (double v : data) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

Tensor2D Tensor2D::from_rows(std::size_t r, std::size_t c, std::initializer_list<double> vals) {
    if (vals.size() != r * c) throw std::invalid_argument("from_rows: value count mismatch");
    Tensor2D t(r, c);
    std::size_t i = 0;
    for (double v : vals) t.data[i++] = v;
    return t;
}

Rng::Rng(std::uint64_t seed) : engine_(seed) {}

std::uint64_t Rng::next() { return engine_(); }

double Rng::uniform() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform();
}

double Rng::normal() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    // u1 in (0,1] so the log is finite.
    double u1 = 1.0 - uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
}

std::uint64_t Rng::below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("Rng::below: n must be positive");
    // Rejection sampling over the largest multiple of n.
    std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
        x = next();
    } while (x >= limit);
    return x % n;
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

Tensor2D matmul_plain(const Tensor2D& a, const Tensor2D& b) {
    if (a.cols != b.rows) throw std::invalid_argument("matmul: inner dimension mismatch");
    Tensor2D c(a.rows, b.cols, 0.0);
    // ikj order: the k-accumulation for each (i,j) runs in ascending k,
    // which keeps reductions reproducible.
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* ar = a.row(i);
        double* cr = c.row(i);
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double aik = ar[k];
            const double* br = b.row(k);
            for (std::size_t j = 0; j < b.cols; ++j) {
                cr[j] += aik * br[j];
            }
        }
    }
    return c;
}

Tensor2D transpose_plain(const Tensor2D& a) {
    Tensor2D t(a.cols, a.rows);
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t j = 0; j < a.cols; ++j) t.at(j, i) = a.at(i, j);
    return t;
}

Tensor2D softmax_rows_plain(const Tensor2D& a) {
    if (a.rows == 0 || a.cols == 0) throw std::invalid_argument("softmax_rows: empty input");
    Tensor2D y(a.rows, a.cols);
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* x = a.row(i);
        double* out = y.row(i);
        double mx = x[0];
        for (std::size_t j = 1; j < a.cols; ++j) mx = std::max(mx, x[j]);
        double sum = 0.0;
        for (std::size_t j = 0; j < a.cols; ++j) {
            out[j] = std::exp(x[j] - mx);
            sum += out[j];
        }
        for (std::size_t j = 0; j < a.cols; ++j) out[j] /= sum;
    }
    return y;
}

Tensor2D xavier_uniform(std::size_t rows, std::size_t cols, Rng& rng) {
    Tensor2D t(rows, cols);
    double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    for (double& v : t.data) v = rng.uniform(-limit, limit);
    return t;
}

}  // namespace gvlm
