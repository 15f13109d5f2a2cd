#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace gvlm {

// Error categories map onto CLI exit codes: UsageError -> 1,
// DataError -> 2, NumericError -> 3.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Dense row-major matrix of 64-bit values. The workhorse type for every
/// vector/matrix quantity in the pipeline.
struct Tensor2D {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Tensor2D() = default;
    Tensor2D(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    double* row(std::size_t r) { return data.data() + r * cols; }
    const double* row(std::size_t r) const { return data.data() + r * cols; }

    std::size_t size() const { return data.size(); }
    bool same_shape(const Tensor2D& o) const { return rows == o.rows && cols == o.cols; }

    bool all_finite() const;

    static Tensor2D from_rows(std::size_t r, std::size_t c, std::initializer_list<double> vals);
};

/// Deterministic RNG used everywhere. The mt19937_64 engine output is
/// pinned by the standard; uniform/normal/bounded transforms are hand-rolled
/// so results do not depend on libstdc++ distribution internals.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next();
    /// Uniform in [0, 1) with 53 bits of mantissa.
    double uniform();
    double uniform(double lo, double hi);
    /// Standard normal via Box-Muller (second value cached).
    double normal();
    /// Unbiased integer in [0, n) by rejection.
    std::uint64_t below(std::uint64_t n);

private:
    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

std::uint64_t fnv1a(const std::string& s);

// Plain (non-autodiff) kernels shared by the tape and by oracle-free
// callers such as generation.
Tensor2D matmul_plain(const Tensor2D& a, const Tensor2D& b);
Tensor2D transpose_plain(const Tensor2D& a);

/// Row-wise softmax with per-row max subtraction. Throws on empty input.
Tensor2D softmax_rows_plain(const Tensor2D& a);

Tensor2D xavier_uniform(std::size_t rows, std::size_t cols, Rng& rng);

}  // namespace gvlm
