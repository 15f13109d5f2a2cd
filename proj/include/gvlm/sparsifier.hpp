#pragma once

#include <array>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "gvlm/attention.hpp"
#include "gvlm/param_store.hpp"
#include "gvlm/scene.hpp"

namespace gvlm {

struct PointLocation {
    std::array<double, 3> xyz;
};

struct BoxLocation {
    std::array<double, 3> min, max;
    std::array<double, 3> center() const {
        return {(min[0] + max[0]) * 0.5, (min[1] + max[1]) * 0.5, (min[2] + max[2]) * 0.5};
    }
};

/// Task token ids plus an optional 3D location (point or box).
struct TaskPrompt {
    std::vector<std::size_t> token_ids;
    std::optional<std::variant<PointLocation, BoxLocation>> location;

    bool has_location() const { return location.has_value(); }
    std::array<double, 3> location_point() const;
};

enum class SparsifierVariant { full, no_depthwise, learnable_queries, knn_downsample };

SparsifierVariant variant_from_string(const std::string& s);
std::string variant_to_string(SparsifierVariant v);

struct SparsifierConfig {
    std::size_t vocab_size = 64;
    std::size_t d_f = 64;     // scene feature width (must be even)
    std::size_t d_lm = 64;    // decoder embedding width
    std::size_t heads = 8;
    std::size_t scene_tokens = 128;
    std::size_t roi_tokens = 4;
    std::size_t level_cap = 512;  // per-level token budget before attention
    SparsifierVariant variant = SparsifierVariant::full;
    double roi_radius_m = 0.15;
    double roi_step_m = 0.15;
};

/// Registers every sparsifier parameter under "sparsifier.*".
void register_sparsifier(ParamStore& store, const SparsifierConfig& cfg, Rng& rng);

/// [sin(2*pi*loc*B) ; cos(2*pi*loc*B)], width d_f, differentiable in B.
Value fourier_encode(ParamUse& use, const std::array<double, 3>& loc, const SparsifierConfig& cfg);
/// Batched variant: positions (n x 3) -> encodings (n x d_f).
Value fourier_encode_rows(ParamUse& use, Value positions, const SparsifierConfig& cfg);

/// Embedding-table lookup per token id; a present location is appended as
/// one extra fourier-encoded token (boxes reduce to their center).
Value embed_task(ParamUse& use, const TaskPrompt& prompt, const SparsifierConfig& cfg);

/// Attention-pools the 128 scene seeds over task embeddings; the
/// learnable_queries variant returns the seeds untouched.
Value make_queries(ParamUse& use, Value task_embeds, const SparsifierConfig& cfg);
Value make_queries_learnable(ParamUse& use, const SparsifierConfig& cfg);

/// Deterministic stride selection floor(i*n/target); identity when n <= target.
std::vector<std::size_t> downsample_uniform_indices(std::size_t n, std::size_t target);

struct LevelTokens {
    Value features;            // n x d_f on tape
    const Tensor2D* positions; // n x 3, plain
};

/// The depth-wise task-guided pathway: three cross-attention blocks over the
/// (downsampled) levels, with Fourier positional injection on the final
/// block's keys/values. Returns exactly cfg.scene_tokens rows.
Value task_guided_sparsify(ParamUse& use, const std::array<TokenLevel, 3>& levels,
                           Value queries, const SparsifierConfig& cfg);

struct RoiTokensResult {
    Value tokens;  // roi_tokens x d_f
    double final_radius = 0.0;
    std::vector<std::size_t> member_indices;
};

/// ROI magnifier: radius-grown membership around loc, attention-pooled by
/// the 4 ROI seeds over member language features.
RoiTokensResult location_guided_sparsify(ParamUse& use, const GaussianScene& scene,
                                         const SpatialGrid& grid,
                                         const std::array<double, 3>& loc,
                                         const SparsifierConfig& cfg);

struct AssembledInput {
    Value sequence;        // (roi? + scene + task) x d_lm
    std::size_t roi_rows = 0;
    std::size_t scene_rows = 0;
    std::size_t task_rows = 0;
};

/// Projects ROI and scene tokens into the LM space and concatenates
/// [roi? ; scene ; task_lm].
AssembledInput project_and_assemble(ParamUse& use, std::optional<Value> roi,
                                    Value scene_tokens, Value task_embeds_lm,
                                    const SparsifierConfig& cfg);

/// Full forward for one (scene, prompt) pair, as used by the tokenize
/// command and the trainer.
struct SparsifierOutput {
    Value scene_tokens;             // 128 x d_f
    std::optional<Value> roi;       // 4 x d_f
    double final_radius = 0.0;
};

SparsifierOutput run_sparsifier(ParamUse& use, const GaussianScene& scene,
                                const SpatialGrid& grid,
                                const std::array<TokenLevel, 3>& levels,
                                const TaskPrompt& prompt, const SparsifierConfig& cfg);

}  // namespace gvlm
