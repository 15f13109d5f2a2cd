#include "gvlm/sparsifier.hpp"

#include <cmath>

namespace gvlm {

std::array<double, 3> TaskPrompt::location_point() const {
    if (!location) throw std::invalid_argument("prompt has no location");
    if (std::holds_alternative<PointLocation>(*location))
        return std::get<PointLocation>(*location).xyz;
    const BoxLocation& box = std::get<BoxLocation>(*location);
    for (int a = 0; a < 3; ++a)
        if (box.min[a] > box.max[a]) throw std::invalid_argument("box location: min > max");
    return box.center();
}

SparsifierVariant variant_from_string(const std::string& s) {
    if (s == "full") return SparsifierVariant::full;
    if (s == "no_depthwise") return SparsifierVariant::no_depthwise;
    if (s == "learnable_queries") return SparsifierVariant::learnable_queries;
    if (s == "knn_downsample") return SparsifierVariant::knn_downsample;
    throw UsageError("unknown variant \"" + s +
                     "\" (valid: full, no_depthwise, learnable_queries, knn_downsample)");
}

std::string variant_to_string(SparsifierVariant v) {
    switch (v) {
        case SparsifierVariant::full: return "full";
        case SparsifierVariant::no_depthwise: return "no_depthwise";
        case SparsifierVariant::learnable_queries: return "learnable_queries";
        case SparsifierVariant::knn_downsample: return "knn_downsample";
    }
    return "full";
}

void register_sparsifier(ParamStore& store, const SparsifierConfig& cfg, Rng& rng) {
    if (cfg.d_f % 2 != 0) throw std::invalid_argument("sparsifier: d_f must be even");
    if (cfg.d_f % cfg.heads != 0) throw std::invalid_argument("sparsifier: d_f not divisible by heads");
    store.add("sparsifier.task_embed", xavier_uniform(cfg.vocab_size, cfg.d_f, rng));
    store.add("sparsifier.scene_seeds", xavier_uniform(cfg.scene_tokens, cfg.d_f, rng));
    store.add("sparsifier.roi_seeds", xavier_uniform(cfg.roi_tokens, cfg.d_f, rng));
    store.add("sparsifier.fourier_b", xavier_uniform(3, cfg.d_f / 2, rng));
    for (int k = 0; k < 3; ++k)
        register_attention_block(store, "sparsifier.block" + std::to_string(k), cfg.d_f, cfg.heads, rng);
    register_attention_pool(store, "sparsifier.query_pool", cfg.d_f, cfg.heads, rng);
    register_attention_pool(store, "sparsifier.roi_pool", cfg.d_f, cfg.heads, rng);
    register_attention_pool(store, "sparsifier.pretrain_pool", cfg.d_f, cfg.heads, rng);
    store.add("sparsifier.pretrain_seed", xavier_uniform(1, cfg.d_f, rng));
    if (cfg.variant == SparsifierVariant::knn_downsample) {
        store.add("sparsifier.knn_seeds", xavier_uniform(cfg.level_cap, cfg.d_f, rng));
        register_attention_pool(store, "sparsifier.knn_pool", cfg.d_f, cfg.heads, rng);
    }
    store.add("sparsifier.proj_w", xavier_uniform(cfg.d_f, cfg.d_lm, rng));
    store.add("sparsifier.proj_b", Tensor2D(1, cfg.d_lm, 0.0));
}

namespace {

Value fourier_from_positions(ParamUse& use, Value positions, const SparsifierConfig& cfg) {
    Value b = use.p("sparsifier.fourier_b");
    if (b.cols() != cfg.d_f / 2) throw std::invalid_argument("fourier_encode: B width mismatch");
    Value phase = scale(matmul(positions, b), 2.0 * M_PI);
    return concat_cols({sin_elem(phase), cos_elem(phase)});
}

}  // namespace

Value fourier_encode(ParamUse& use, const std::array<double, 3>& loc, const SparsifierConfig& cfg) {
    for (double v : loc)
        if (!std::isfinite(v)) throw std::invalid_argument("fourier_encode: non-finite location");
    Tensor2D p(1, 3);
    p.data = {loc[0], loc[1], loc[2]};
    return fourier_from_positions(use, use.c(std::move(p)), cfg);
}

Value fourier_encode_rows(ParamUse& use, Value positions, const SparsifierConfig& cfg) {
    if (positions.cols() != 3) throw std::invalid_argument("fourier_encode_rows: positions must be n x 3");
    return fourier_from_positions(use, positions, cfg);
}

Value embed_task(ParamUse& use, const TaskPrompt& prompt, const SparsifierConfig& cfg) {
    if (prompt.token_ids.empty()) throw std::invalid_argument("embed_task: empty prompt");
    for (std::size_t id : prompt.token_ids)
        if (id >= cfg.vocab_size)
            throw DataError("embed_task: token id " + std::to_string(id) + " out of vocabulary");
    Value table = use.p("sparsifier.task_embed");
    Value embeds = rows_gather(table, prompt.token_ids);
    if (!prompt.has_location()) return embeds;
    return concat_rows({embeds, fourier_encode(use, prompt.location_point(), cfg)});
}

Value make_queries(ParamUse& use, Value task_embeds, const SparsifierConfig& cfg) {
    if (cfg.variant == SparsifierVariant::learnable_queries) return make_queries_learnable(use, cfg);
    if (task_embeds.rows() == 0) throw std::invalid_argument("make_queries: empty task embedding");
    return attention_pool(use, "sparsifier.query_pool", use.p("sparsifier.scene_seeds"),
                          task_embeds, cfg.heads);
}

Value make_queries_learnable(ParamUse& use, const SparsifierConfig& cfg) {
    (void)cfg;
    return use.p("sparsifier.scene_seeds");
}

std::vector<std::size_t> downsample_uniform_indices(std::size_t n, std::size_t target) {
    if (target == 0) throw std::invalid_argument("downsample: target must be >= 1");
    std::vector<std::size_t> idx;
    if (n <= target) {
        idx.resize(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = i;
        return idx;
    }
    idx.resize(target);
    for (std::size_t i = 0; i < target; ++i) idx[i] = i * n / target;
    return idx;
}

namespace {

struct PlainLevel {
    Tensor2D features;
    Tensor2D positions;
};

PlainLevel select_rows(const TokenLevel& level, const std::vector<std::size_t>& idx) {
    PlainLevel out;
    out.features = Tensor2D(idx.size(), level.features.cols);
    out.positions = Tensor2D(idx.size(), 3);
    for (std::size_t i = 0; i < idx.size(); ++i) {
        for (std::size_t j = 0; j < level.features.cols; ++j)
            out.features.at(i, j) = level.features.at(idx[i], j);
        for (std::size_t j = 0; j < 3; ++j) out.positions.at(i, j) = level.positions.at(idx[i], j);
    }
    return out;
}

/// Spatial grouping for the knn_downsample ablation: Lloyd iterations over
/// positions from stride-sampled starts, then per-group feature/position means.
PlainLevel kmeans_group_means(const TokenLevel& level, std::size_t target) {
    const std::size_t n = level.features.rows;
    std::vector<std::size_t> starts = downsample_uniform_indices(n, target);
    std::vector<std::array<double, 3>> centroids(starts.size());
    for (std::size_t c = 0; c < starts.size(); ++c)
        for (int a = 0; a < 3; ++a) centroids[c][a] = level.positions.at(starts[c], a);

    std::vector<std::size_t> assign(n, 0);
    for (int iter = 0; iter < 5; ++iter) {
        for (std::size_t i = 0; i < n; ++i) {
            double best = 1e300;
            std::size_t best_c = 0;
            for (std::size_t c = 0; c < centroids.size(); ++c) {
                double d2 = 0.0;
                for (int a = 0; a < 3; ++a) {
                    double d = level.positions.at(i, a) - centroids[c][a];
                    d2 += d * d;
                }
                if (d2 < best) {
                    best = d2;
                    best_c = c;
                }
            }
            assign[i] = best_c;
        }
        std::vector<std::array<double, 3>> sums(centroids.size(), {0, 0, 0});
        std::vector<std::size_t> counts(centroids.size(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            for (int a = 0; a < 3; ++a) sums[assign[i]][a] += level.positions.at(i, a);
            counts[assign[i]]++;
        }
        for (std::size_t c = 0; c < centroids.size(); ++c) {
            if (counts[c] == 0) continue;  // keep the stale centroid
            for (int a = 0; a < 3; ++a) centroids[c][a] = sums[c][a] / static_cast<double>(counts[c]);
        }
    }

    std::vector<std::size_t> counts(centroids.size(), 0);
    for (std::size_t i = 0; i < n; ++i) counts[assign[i]]++;
    std::size_t nonempty = 0;
    for (std::size_t c : counts) nonempty += c > 0 ? 1 : 0;

    PlainLevel out;
    out.features = Tensor2D(nonempty, level.features.cols, 0.0);
    out.positions = Tensor2D(nonempty, 3, 0.0);
    std::vector<std::size_t> slot(centroids.size(), SIZE_MAX);
    std::size_t next = 0;
    for (std::size_t c = 0; c < centroids.size(); ++c)
        if (counts[c] > 0) slot[c] = next++;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t s = slot[assign[i]];
        for (std::size_t j = 0; j < level.features.cols; ++j)
            out.features.at(s, j) += level.features.at(i, j);
        for (std::size_t j = 0; j < 3; ++j) out.positions.at(s, j) += level.positions.at(i, j);
    }
    for (std::size_t c = 0; c < centroids.size(); ++c) {
        if (counts[c] == 0) continue;
        std::size_t s = slot[c];
        double inv = 1.0 / static_cast<double>(counts[c]);
        for (std::size_t j = 0; j < level.features.cols; ++j) out.features.at(s, j) *= inv;
        for (std::size_t j = 0; j < 3; ++j) out.positions.at(s, j) *= inv;
    }
    return out;
}

}  // namespace

Value task_guided_sparsify(ParamUse& use, const std::array<TokenLevel, 3>& levels,
                           Value queries, const SparsifierConfig& cfg) {
    for (const TokenLevel& level : levels) {
        if (level.features.cols != cfg.d_f)
            throw std::invalid_argument("task_guided_sparsify: level width mismatch");
        if (level.features.rows == 0)
            throw std::invalid_argument("task_guided_sparsify: empty level");
    }
    if (queries.rows() != cfg.scene_tokens || queries.cols() != cfg.d_f)
        throw std::invalid_argument("task_guided_sparsify: query shape mismatch");

    const bool final_only = cfg.variant == SparsifierVariant::no_depthwise;
    const bool knn = cfg.variant == SparsifierVariant::knn_downsample;

    // Per-block key/value token sets. Tape values are built lazily so the
    // knn pooling path can run attention over the raw level.
    std::array<Value, 3> kv;
    for (int k = 0; k < 3; ++k) {
        const TokenLevel& level = levels[final_only ? 2 : k];
        const bool is_final = k == 2;
        const std::size_t n = level.features.rows;
        PlainLevel plain;
        if (knn && n > cfg.level_cap) {
            if (is_final) {
                plain = kmeans_group_means(level, cfg.level_cap);
            } else {
                // Early levels: attention pooling with level_cap seeds.
                Value pooled = attention_pool(use, "sparsifier.knn_pool",
                                              use.p("sparsifier.knn_seeds"),
                                              use.c(level.features), cfg.heads);
                kv[k] = pooled;
                continue;
            }
        } else {
            plain = select_rows(level, downsample_uniform_indices(n, cfg.level_cap));
        }
        Value tokens = use.c(plain.features);
        if (is_final) {
            // Positional injection: add the Fourier encoding of each token
            // center to its key/value embedding.
            Value pos_enc = fourier_encode_rows(use, use.c(plain.positions), cfg);
            tokens = add(tokens, pos_enc);
        }
        kv[k] = tokens;
    }

    Value x = queries;
    for (int k = 0; k < 3; ++k)
        x = cross_attention_block(use, "sparsifier.block" + std::to_string(k), x, kv[k], cfg.heads);
    return x;
}

RoiTokensResult location_guided_sparsify(ParamUse& use, const GaussianScene& scene,
                                         const SpatialGrid& grid,
                                         const std::array<double, 3>& loc,
                                         const SparsifierConfig& cfg) {
    RoiResult roi = roi_members(grid, loc, cfg.roi_radius_m, cfg.roi_step_m);
    Tensor2D members(roi.indices.size(), cfg.d_f);
    for (std::size_t i = 0; i < roi.indices.size(); ++i) {
        const std::vector<float>& f = scene.splats[roi.indices[i]].language_feature;
        if (f.size() != cfg.d_f) throw DataError("location_guided_sparsify: feature width mismatch");
        for (std::size_t j = 0; j < cfg.d_f; ++j) members.at(i, j) = f[j];
    }
    RoiTokensResult out;
    out.tokens = attention_pool(use, "sparsifier.roi_pool", use.p("sparsifier.roi_seeds"),
                                use.c(std::move(members)), cfg.heads);
    out.final_radius = roi.radius;
    out.member_indices = std::move(roi.indices);
    return out;
}

AssembledInput project_and_assemble(ParamUse& use, std::optional<Value> roi,
                                    Value scene_tokens, Value task_embeds_lm,
                                    const SparsifierConfig& cfg) {
    if (scene_tokens.rows() != cfg.scene_tokens || scene_tokens.cols() != cfg.d_f)
        throw std::invalid_argument("project_and_assemble: scene token shape mismatch");
    if (task_embeds_lm.cols() != cfg.d_lm)
        throw std::invalid_argument("project_and_assemble: task embedding width mismatch");
    Value w = use.p("sparsifier.proj_w");
    Value b = use.p("sparsifier.proj_b");
    std::vector<Value> parts;
    AssembledInput out;
    if (roi) {
        if (roi->cols() != cfg.d_f) throw std::invalid_argument("project_and_assemble: roi width mismatch");
        parts.push_back(add_rowvec(matmul(*roi, w), b));
        out.roi_rows = roi->rows();
    }
    parts.push_back(add_rowvec(matmul(scene_tokens, w), b));
    parts.push_back(task_embeds_lm);
    out.scene_rows = scene_tokens.rows();
    out.task_rows = task_embeds_lm.rows();
    out.sequence = concat_rows(parts);
    return out;
}

SparsifierOutput run_sparsifier(ParamUse& use, const GaussianScene& scene,
                                const SpatialGrid& grid,
                                const std::array<TokenLevel, 3>& levels,
                                const TaskPrompt& prompt, const SparsifierConfig& cfg) {
    SparsifierOutput out;
    Value queries;
    if (cfg.variant == SparsifierVariant::learnable_queries) {
        queries = make_queries_learnable(use, cfg);
    } else {
        queries = make_queries(use, embed_task(use, prompt, cfg), cfg);
    }
    out.scene_tokens = task_guided_sparsify(use, levels, queries, cfg);
    if (prompt.has_location()) {
        RoiTokensResult roi = location_guided_sparsify(use, scene, grid, prompt.location_point(), cfg);
        out.roi = roi.tokens;
        out.final_radius = roi.final_radius;
    }
    return out;
}

}  // namespace gvlm
