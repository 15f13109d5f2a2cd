#pragma once

#include <string>

#include "gvlm/param_store.hpp"
#include "gvlm/tape.hpp"

namespace gvlm {

/// Registers the parameters of one transformer block under `prefix`:
/// q/k/v/o projections (d x d, no bias), 4x feed-forward with biases, and
/// two layer-norm gain/bias pairs. d must be divisible by heads.
void register_attention_block(ParamStore& store, const std::string& prefix,
                              std::size_t d, std::size_t heads, Rng& rng);

/// Registers a pure attention-pool head under `prefix`: q/k/v/o projections
/// plus an output bias. No feed-forward sublayer.
void register_attention_pool(ParamStore& store, const std::string& prefix,
                             std::size_t d, std::size_t heads, Rng& rng);

/// Tape handles for one block's weights. Callers may substitute entries
/// (e.g. LoRA-wrapped projections) before running the forward.
struct BlockWeights {
    Value wq, wk, wv, wo;
    Value w1, b1, w2, b2;
    Value ln1_g, ln1_b, ln2_g, ln2_b;
};

BlockWeights bind_block(ParamUse& use, const std::string& prefix);

/// Multi-head scaled dot-product attention over already-projected Q/K/V,
/// column-split into `heads`; returns concatenated head outputs.
/// `causal_offset` < SIZE_MAX restricts query row i to keys [0, i + offset].
Value multi_head_attention(Value q_proj, Value k_proj, Value v_proj,
                           std::size_t heads, std::size_t causal_offset = SIZE_MAX);

/// MHA(queries, kv) + residual + layer-norm, then GELU feed-forward +
/// residual + layer-norm, with explicit weights.
Value attention_block_forward(const BlockWeights& w, Value queries, Value kv,
                              std::size_t heads, std::size_t causal_offset = SIZE_MAX);

/// Convenience wrapper binding weights from `prefix`.
Value cross_attention_block(ParamUse& use, const std::string& prefix,
                            Value queries, Value kv, std::size_t heads);

/// Attention-only pooling of `seeds` over `tokens`; output projection with
/// bias, no residual, no feed-forward.
Value attention_pool(ParamUse& use, const std::string& prefix,
                     Value seeds, Value tokens, std::size_t heads);

}  // namespace gvlm
