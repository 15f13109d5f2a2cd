#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "gvlm/tensor.hpp"

namespace gvlm {

struct Vec3f {
    float x = 0, y = 0, z = 0;
};

/// One Gaussian primitive with a language feature attached.
struct GaussianSplat {
    Vec3f position;                          // meters
    Vec3f scale;                             // meters
    std::array<float, 4> rotation{1, 0, 0, 0};  // unit quaternion (w,x,y,z)
    float opacity = 1.0f;                    // [0,1]
    std::array<float, 3> color{0, 0, 0};     // rgb in [0,1]
    std::vector<float> language_feature;     // width d_f
    std::optional<std::uint32_t> instance_id;
};

struct Aabb {
    Vec3f min, max;
};

struct GaussianScene {
    std::string scene_id;
    std::size_t feature_dim = 0;
    std::vector<GaussianSplat> splats;
    std::map<std::uint32_t, std::string> label_table;
    Aabb bounds;

    void recompute_bounds();
    /// Checks quaternion norms, opacity range, feature widths and
    /// label-table coverage; throws DataError on violation.
    void validate() const;
};

// ---- persistence ---------------------------------------------------------

std::vector<std::uint8_t> save_scene(const GaussianScene& scene);
GaussianScene load_scene(const std::vector<std::uint8_t>& bytes);
void save_scene_file(const GaussianScene& scene, const std::string& path);
/// Dispatches on content: binary GSVL or the JSON mirror format.
GaussianScene load_scene_file(const std::string& path);
GaussianScene scene_from_json(const std::string& text);
std::string scene_to_json(const GaussianScene& scene);

// ---- spatial queries ------------------------------------------------------

/// Uniform hash grid over splat positions; cell = floor(position / cell_size).
class SpatialGrid {
public:
    explicit SpatialGrid(const GaussianScene& scene, double cell_size = 0.15);

    /// Indices with Euclidean distance <= r from center (closed ball),
    /// ascending index order.
    std::vector<std::size_t> radius_query(const std::array<double, 3>& center, double r) const;

    double cell_size() const { return cell_size_; }
    std::size_t point_count() const { return positions_.size(); }

private:
    double cell_size_;
    std::vector<std::array<double, 3>> positions_;
    std::unordered_map<std::uint64_t, std::vector<std::size_t>> cells_;

    static std::uint64_t cell_key(std::int64_t cx, std::int64_t cy, std::int64_t cz);
};

struct RoiResult {
    std::vector<std::size_t> indices;
    double radius = 0.0;
};

/// Members at the smallest radius r0 + k*step (k >= 0) with a nonempty
/// closed-ball query. Throws on an empty scene.
RoiResult roi_members(const SpatialGrid& grid, const std::array<double, 3>& center,
                      double r0 = 0.15, double step = 0.15);

// ---- sampling & mock backbone ----------------------------------------------

/// Exactly n indices: a seeded Fisher-Yates prefix when the scene has at
/// least n splats, otherwise every index once plus seeded draws with
/// replacement.
std::vector<std::size_t> sample_gaussians(const GaussianScene& scene, std::size_t n, std::uint64_t seed);

struct TokenLevel {
    Tensor2D features;   // n x d_f
    Tensor2D positions;  // n x 3
};

/// Deterministic stand-in for backbone decoder hidden states: the sample's
/// features as the final level, and 589 / 2400 Morton-ordered chunk means
/// as the two earlier levels (or the sample itself when smaller).
std::array<TokenLevel, 3> mock_decoder_levels(const GaussianScene& scene,
                                              const std::vector<std::size_t>& sampled);

// ---- synthetic scenes ------------------------------------------------------

struct SynthObjectSpec {
    std::string label;
    std::size_t count = 1;               // object instances of this label
    std::size_t gaussians_per_object = 32;
    double cluster_radius = 0.25;        // meters
};

struct SynthSceneSpec {
    std::string scene_id = "synth";
    std::array<double, 3> room_extent{6.0, 6.0, 3.0};
    std::vector<SynthObjectSpec> objects;
    double feature_noise_sigma = 0.05;
    std::size_t feature_dim = 32;
    std::uint64_t seed = 0;
};

/// Unit embedding per label, deterministic in (sorted label set, dim):
/// regenerated with a bumped salt until all pairwise cosines are < 0.3.
std::map<std::string, std::vector<double>> build_label_embeddings(
    std::vector<std::string> labels, std::size_t dim);

GaussianScene synth_scene(const SynthSceneSpec& spec);
GaussianScene synth_scene(const SynthSceneSpec& spec,
                          const std::map<std::string, std::vector<double>>& label_embeddings);

}  // namespace gvlm
