#include "gvlm/attention.hpp"

#include <cmath>

namespace gvlm {

void register_attention_block(ParamStore& store, const std::string& prefix,
                              std::size_t d, std::size_t heads, Rng& rng) {
    if (heads == 0 || d % heads != 0)
        throw std::invalid_argument("attention block: width not divisible by head count");
    store.add(prefix + ".wq", xavier_uniform(d, d, rng));
    store.add(prefix + ".wk", xavier_uniform(d, d, rng));
    store.add(prefix + ".wv", xavier_uniform(d, d, rng));
    store.add(prefix + ".wo", xavier_uniform(d, d, rng));
    store.add(prefix + ".w1", xavier_uniform(d, 4 * d, rng));
    store.add(prefix + ".b1", Tensor2D(1, 4 * d, 0.0));
    store.add(prefix + ".w2", xavier_uniform(4 * d, d, rng));
    store.add(prefix + ".b2", Tensor2D(1, d, 0.0));
    store.add(prefix + ".ln1_g", Tensor2D(1, d, 1.0));
    store.add(prefix + ".ln1_b", Tensor2D(1, d, 0.0));
    store.add(prefix + ".ln2_g", Tensor2D(1, d, 1.0));
    store.add(prefix + ".ln2_b", Tensor2D(1, d, 0.0));
}

void register_attention_pool(ParamStore& store, const std::string& prefix,
                             std::size_t d, std::size_t heads, Rng& rng) {
    if (heads == 0 || d % heads != 0)
        throw std::invalid_argument("attention pool: width not divisible by head count");
    store.add(prefix + ".wq", xavier_uniform(d, d, rng));
    store.add(prefix + ".wk", xavier_uniform(d, d, rng));
    store.add(prefix + ".wv", xavier_uniform(d, d, rng));
    store.add(prefix + ".wo", xavier_uniform(d, d, rng));
    store.add(prefix + ".bo", Tensor2D(1, d, 0.0));
}

BlockWeights bind_block(ParamUse& use, const std::string& prefix) {
    BlockWeights w;
    w.wq = use.p(prefix + ".wq");
    w.wk = use.p(prefix + ".wk");
    w.wv = use.p(prefix + ".wv");
    w.wo = use.p(prefix + ".wo");
    w.w1 = use.p(prefix + ".w1");
    w.b1 = use.p(prefix + ".b1");
    w.w2 = use.p(prefix + ".w2");
    w.b2 = use.p(prefix + ".b2");
    w.ln1_g = use.p(prefix + ".ln1_g");
    w.ln1_b = use.p(prefix + ".ln1_b");
    w.ln2_g = use.p(prefix + ".ln2_g");
    w.ln2_b = use.p(prefix + ".ln2_b");
    return w;
}

Value multi_head_attention(Value q_proj, Value k_proj, Value v_proj,
                           std::size_t heads, std::size_t causal_offset) {
    const std::size_t d = q_proj.cols();
    if (d % heads != 0) throw std::invalid_argument("attention: width not divisible by head count");
    if (k_proj.cols() != d || v_proj.cols() != d)
        throw std::invalid_argument("attention: projection width mismatch");
    if (q_proj.rows() == 0 || k_proj.rows() == 0)
        throw std::invalid_argument("attention: empty queries or keys");
    const std::size_t dh = d / heads;
    const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));
    std::vector<Value> head_outs;
    head_outs.reserve(heads);
    for (std::size_t h = 0; h < heads; ++h) {
        Value qh = slice_cols(q_proj, h * dh, (h + 1) * dh);
        Value kh = slice_cols(k_proj, h * dh, (h + 1) * dh);
        Value vh = slice_cols(v_proj, h * dh, (h + 1) * dh);
        Value scores = scale(matmul(qh, transpose(kh)), inv_sqrt);
        Value weights = causal_offset == SIZE_MAX ? softmax_rows(scores)
                                                  : softmax_rows_causal(scores, causal_offset);
        head_outs.push_back(matmul(weights, vh));
    }
    return heads == 1 ? head_outs[0] : concat_cols(head_outs);
}

Value attention_block_forward(const BlockWeights& w, Value queries, Value kv,
                              std::size_t heads, std::size_t causal_offset) {
    if (queries.cols() != kv.cols()) throw std::invalid_argument("attention block: width mismatch");
    if (queries.cols() != w.wq.rows()) throw std::invalid_argument("attention block: parameter width mismatch");
    Value q_proj = matmul(queries, w.wq);
    Value k_proj = matmul(kv, w.wk);
    Value v_proj = matmul(kv, w.wv);
    Value attn = matmul(multi_head_attention(q_proj, k_proj, v_proj, heads, causal_offset), w.wo);
    Value y1 = layer_norm_rows(add(queries, attn), w.ln1_g, w.ln1_b);
    Value ff = add_rowvec(matmul(gelu(add_rowvec(matmul(y1, w.w1), w.b1)), w.w2), w.b2);
    return layer_norm_rows(add(y1, ff), w.ln2_g, w.ln2_b);
}

Value cross_attention_block(ParamUse& use, const std::string& prefix,
                            Value queries, Value kv, std::size_t heads) {
    return attention_block_forward(bind_block(use, prefix), queries, kv, heads);
}

Value attention_pool(ParamUse& use, const std::string& prefix,
                     Value seeds, Value tokens, std::size_t heads) {
    if (tokens.rows() == 0) throw std::invalid_argument("attention_pool: nothing to pool");
    if (seeds.cols() != tokens.cols()) throw std::invalid_argument("attention_pool: width mismatch");
    Value q_proj = matmul(seeds, use.p(prefix + ".wq"));
    Value k_proj = matmul(tokens, use.p(prefix + ".wk"));
    Value v_proj = matmul(tokens, use.p(prefix + ".wv"));
    Value attn = multi_head_attention(q_proj, k_proj, v_proj, heads);
    return add_rowvec(matmul(attn, use.p(prefix + ".wo")), use.p(prefix + ".bo"));
}

}  // namespace gvlm
