#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "gvlm/tensor.hpp"

namespace gvlm {

class Tape;

/// Lightweight handle to a node on a Tape.
struct Value {
    Tape* tape = nullptr;
    std::size_t idx = 0;

    const Tensor2D& val() const;
    const Tensor2D& grad() const;
    std::size_t rows() const { return val().rows; }
    std::size_t cols() const { return val().cols; }
    double scalar() const;
};

/// Append-only reverse-mode autodiff tape. Nodes are created in topological
/// order; backward() walks them in reverse. All kernels are single-threaded
/// and accumulate in a fixed index order, so a given graph is bit-reproducible.
class Tape {
public:
    Value leaf(Tensor2D v);
    Value leaf(const Tensor2D& v);

    /// Seeds d(loss)/d(loss) = 1 and propagates. loss must be 1x1.
    void backward(Value loss);

    const Tensor2D& value(std::size_t idx) const { return nodes_[idx].value; }
    const Tensor2D& grad(std::size_t idx) const { return nodes_[idx].grad; }

    std::size_t size() const { return nodes_.size(); }

private:
    friend Value make_node(Tape& t, Tensor2D v, std::function<void(Tape&, std::size_t)> back);

    struct Node {
        Tensor2D value;
        Tensor2D grad;
        std::function<void(Tape&, std::size_t)> back;
    };
    std::vector<Node> nodes_;

    Tensor2D& grad_mut(std::size_t idx) { return nodes_[idx].grad; }

    friend struct OpAccess;
};

// Internal accessor used by op implementations to write parent gradients.
struct OpAccess {
    static Tensor2D& grad(Tape& t, std::size_t idx) { return t.grad_mut(idx); }
};

// ---- differentiable ops ------------------------------------------------

Value matmul(Value a, Value b);
Value add(Value a, Value b);
/// a (m x n) + row vector b (1 x n) broadcast over rows.
Value add_rowvec(Value a, Value b);
Value sub(Value a, Value b);
Value mul(Value a, Value b);
Value scale(Value a, double c);
Value transpose(Value a);
Value softmax_rows(Value a);
/// Row i attends to columns [0, i + offset]; other entries are exactly 0.
Value softmax_rows_causal(Value a, std::size_t offset);
Value gelu(Value a);
Value layer_norm_rows(Value x, Value gain, Value bias, double eps = 1e-5);
Value concat_rows(const std::vector<Value>& parts);
Value concat_cols(const std::vector<Value>& parts);
Value slice_rows(Value a, std::size_t r0, std::size_t r1);
Value slice_cols(Value a, std::size_t c0, std::size_t c1);
/// y[i] = a[indices[i]]; backward scatter-adds in ascending i.
Value rows_gather(Value a, const std::vector<std::size_t>& indices);
Value sum_all(Value a);
Value mean_all(Value a);
/// Column means over rows: (m x n) -> (1 x n).
Value mean_over_rows(Value a);
Value sin_elem(Value a);
Value cos_elem(Value a);
/// L2-normalizes each row; rows with norm < eps are passed through scaled by 1/eps.
Value normalize_rows(Value a, double eps = 1e-12);
/// sum_t -log softmax(logits[t])[ids[t]]; fused for stability.
Value cross_entropy_sum(Value logits, const std::vector<std::size_t>& ids);

}  // namespace gvlm
