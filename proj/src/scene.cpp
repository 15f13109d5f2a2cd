#include "gvlm/scene.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include <nlohmann/json.hpp>

#include "gvlm/serial.hpp"

namespace gvlm {

using json = nlohmann::json;

void GaussianScene::recompute_bounds() {
    if (splats.empty()) {
        bounds = Aabb{};
        return;
    }
    Vec3f lo = splats[0].position, hi = splats[0].position;
    for (const GaussianSplat& s : splats) {
        lo.x = std::min(lo.x, s.position.x);
        lo.y = std::min(lo.y, s.position.y);
        lo.z = std::min(lo.z, s.position.z);
        hi.x = std::max(hi.x, s.position.x);
        hi.y = std::max(hi.y, s.position.y);
        hi.z = std::max(hi.z, s.position.z);
    }
    bounds = Aabb{lo, hi};
}

void GaussianScene::validate() const {
    for (std::size_t i = 0; i < splats.size(); ++i) {
        const GaussianSplat& s = splats[i];
        double qn = 0.0;
        for (float q : s.rotation) qn += static_cast<double>(q) * q;
        qn = std::sqrt(qn);
        if (std::abs(qn - 1.0) > 1e-6)
            throw DataError("scene " + scene_id + ": splat " + std::to_string(i) + " quaternion not unit");
        if (s.opacity < 0.0f || s.opacity > 1.0f)
            throw DataError("scene " + scene_id + ": splat " + std::to_string(i) + " opacity outside [0,1]");
        if (s.language_feature.size() != feature_dim)
            throw DataError("scene " + scene_id + ": feature width mismatch at splat " + std::to_string(i));
        if (s.instance_id && !label_table.count(*s.instance_id))
            throw DataError("scene " + scene_id + ": instance id " + std::to_string(*s.instance_id) +
                            " missing from label table");
    }
}

// GSVL layout: magic "GSVL", u32 version = 1, u32 N, u32 d_f, u8 flags
// (bit0 instance ids, bit1 label table), f32 arrays positions/scales/
// rotations/opacity/color/features, optional u32 instance ids, optional
// label table, trailing u32 CRC32.
std::vector<std::uint8_t> save_scene(const GaussianScene& scene) {
    const std::size_t n = scene.splats.size();
    bool has_ids = false;
    for (const GaussianSplat& s : scene.splats) has_ids = has_ids || s.instance_id.has_value();
    bool has_labels = !scene.label_table.empty();

    ByteWriter w;
    w.bytes("GSVL", 4);
    w.u32(1);
    w.u32(static_cast<std::uint32_t>(n));
    w.u32(static_cast<std::uint32_t>(scene.feature_dim));
    w.u8(static_cast<std::uint8_t>((has_ids ? 1 : 0) | (has_labels ? 2 : 0)));
    // scene_id rides along so round trips preserve identity.
    if (scene.scene_id.size() > 0xFFFF) throw DataError("scene id too long");
    w.u16(static_cast<std::uint16_t>(scene.scene_id.size()));
    w.bytes(scene.scene_id.data(), scene.scene_id.size());
    for (const GaussianSplat& s : scene.splats) {
        w.f32(s.position.x);
        w.f32(s.position.y);
        w.f32(s.position.z);
    }
    for (const GaussianSplat& s : scene.splats) {
        w.f32(s.scale.x);
        w.f32(s.scale.y);
        w.f32(s.scale.z);
    }
    for (const GaussianSplat& s : scene.splats)
        for (float q : s.rotation) w.f32(q);
    for (const GaussianSplat& s : scene.splats) w.f32(s.opacity);
    for (const GaussianSplat& s : scene.splats)
        for (float c : s.color) w.f32(c);
    for (const GaussianSplat& s : scene.splats)
        for (float f : s.language_feature) w.f32(f);
    if (has_ids) {
        for (const GaussianSplat& s : scene.splats) {
            if (!s.instance_id) throw DataError("scene has mixed instance-id coverage");
            w.u32(*s.instance_id);
        }
    }
    if (has_labels) {
        w.u32(static_cast<std::uint32_t>(scene.label_table.size()));
        for (const auto& [id, label] : scene.label_table) {
            w.u32(id);
            if (label.size() > 0xFFFF) throw DataError("label too long");
            w.u16(static_cast<std::uint16_t>(label.size()));
            w.bytes(label.data(), label.size());
        }
    }
    w.append_crc();
    return std::move(w).take();
}

GaussianScene load_scene(const std::vector<std::uint8_t>& bytes) {
    ByteReader r(bytes, "GSVL scene");
    r.check_crc();
    char magic[4];
    r.read_bytes(magic, 4);
    if (std::memcmp(magic, "GSVL", 4) != 0) throw DataError("GSVL scene: bad magic");
    std::uint32_t version = r.u32();
    if (version != 1) throw DataError("GSVL scene: unsupported version " + std::to_string(version));
    std::uint32_t n = r.u32();
    std::uint32_t d_f = r.u32();
    std::uint8_t flags = r.u8();
    if (flags & ~0x03u) throw DataError("GSVL scene: unknown flags");

    // Structural bound before allocating: each splat needs at least its
    // fixed fields plus the feature row.
    std::uint64_t per_splat = 4ull * (3 + 3 + 4 + 1 + 3 + d_f) + ((flags & 1) ? 4 : 0);
    if (static_cast<std::uint64_t>(n) * per_splat + 2 > r.remaining())
        throw DataError("GSVL scene: truncated payload");

    GaussianScene scene;
    std::uint16_t id_len = r.u16();
    scene.scene_id.resize(id_len);
    r.read_bytes(scene.scene_id.data(), id_len);
    scene.feature_dim = d_f;
    scene.splats.resize(n);
    for (GaussianSplat& s : scene.splats) {
        s.position.x = r.f32();
        s.position.y = r.f32();
        s.position.z = r.f32();
    }
    for (GaussianSplat& s : scene.splats) {
        s.scale.x = r.f32();
        s.scale.y = r.f32();
        s.scale.z = r.f32();
    }
    for (GaussianSplat& s : scene.splats)
        for (float& q : s.rotation) q = r.f32();
    for (GaussianSplat& s : scene.splats) s.opacity = r.f32();
    for (GaussianSplat& s : scene.splats)
        for (float& c : s.color) c = r.f32();
    for (GaussianSplat& s : scene.splats) {
        s.language_feature.resize(d_f);
        r.f32_array(s.language_feature);
    }
    if (flags & 1) {
        for (GaussianSplat& s : scene.splats) s.instance_id = r.u32();
    }
    if (flags & 2) {
        std::uint32_t count = r.u32();
        for (std::uint32_t i = 0; i < count; ++i) {
            std::uint32_t id = r.u32();
            std::uint16_t len = r.u16();
            std::string label(len, '\0');
            r.read_bytes(label.data(), len);
            scene.label_table[id] = std::move(label);
        }
    }
    r.expect_end();
    scene.recompute_bounds();
    scene.validate();
    return scene;
}

void save_scene_file(const GaussianScene& scene, const std::string& path) {
    std::vector<std::uint8_t> bytes = save_scene(scene);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open for writing: " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("write failed: " + path);
}

GaussianScene load_scene_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open: " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() >= 4 && std::memcmp(bytes.data(), "GSVL", 4) == 0) return load_scene(bytes);
    return scene_from_json(std::string(bytes.begin(), bytes.end()));
}

GaussianScene scene_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw DataError(std::string("scene JSON: parse error: ") + e.what());
    }
    try {
        GaussianScene scene;
        scene.scene_id = j.value("scene_id", "scene");
        scene.feature_dim = j.at("feature_dim").get<std::size_t>();
        const json& positions = j.at("positions");
        std::size_t n = positions.size();
        scene.splats.resize(n);
        auto vec3 = [](const json& a) {
            return Vec3f{a.at(0).get<float>(), a.at(1).get<float>(), a.at(2).get<float>()};
        };
        for (std::size_t i = 0; i < n; ++i) scene.splats[i].position = vec3(positions.at(i));
        const json& scales = j.at("scales");
        for (std::size_t i = 0; i < n; ++i) scene.splats[i].scale = vec3(scales.at(i));
        const json& rots = j.at("rotations");
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < 4; ++k) scene.splats[i].rotation[k] = rots.at(i).at(k).get<float>();
        const json& opacity = j.at("opacity");
        for (std::size_t i = 0; i < n; ++i) scene.splats[i].opacity = opacity.at(i).get<float>();
        const json& color = j.at("color");
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < 3; ++k) scene.splats[i].color[k] = color.at(i).at(k).get<float>();
        const json& features = j.at("features");
        for (std::size_t i = 0; i < n; ++i) {
            scene.splats[i].language_feature = features.at(i).get<std::vector<float>>();
            if (scene.splats[i].language_feature.size() != scene.feature_dim)
                throw DataError("scene JSON: feature width mismatch");
        }
        if (j.contains("instance_ids")) {
            const json& ids = j.at("instance_ids");
            for (std::size_t i = 0; i < n; ++i) scene.splats[i].instance_id = ids.at(i).get<std::uint32_t>();
        }
        if (j.contains("label_table")) {
            for (const auto& [key, val] : j.at("label_table").items())
                scene.label_table[static_cast<std::uint32_t>(std::stoul(key))] = val.get<std::string>();
        }
        scene.recompute_bounds();
        scene.validate();
        return scene;
    } catch (const json::exception& e) {
        throw DataError(std::string("scene JSON: ") + e.what());
    }
}

std::string scene_to_json(const GaussianScene& scene) {
    json j;
    j["scene_id"] = scene.scene_id;
    j["feature_dim"] = scene.feature_dim;
    json positions = json::array(), scales = json::array(), rotations = json::array();
    json opacity = json::array(), color = json::array(), features = json::array();
    for (const GaussianSplat& s : scene.splats) {
        positions.push_back({s.position.x, s.position.y, s.position.z});
        scales.push_back({s.scale.x, s.scale.y, s.scale.z});
        rotations.push_back({s.rotation[0], s.rotation[1], s.rotation[2], s.rotation[3]});
        opacity.push_back(s.opacity);
        color.push_back({s.color[0], s.color[1], s.color[2]});
        features.push_back(s.language_feature);
    }
    j["positions"] = std::move(positions);
    j["scales"] = std::move(scales);
    j["rotations"] = std::move(rotations);
    j["opacity"] = std::move(opacity);
    j["color"] = std::move(color);
    j["features"] = std::move(features);
    bool has_ids = false;
    for (const GaussianSplat& s : scene.splats) has_ids = has_ids || s.instance_id.has_value();
    if (has_ids) {
        json ids = json::array();
        for (const GaussianSplat& s : scene.splats) ids.push_back(s.instance_id.value_or(0));
        j["instance_ids"] = std::move(ids);
    }
    if (!scene.label_table.empty()) {
        json table = json::object();
        for (const auto& [id, label] : scene.label_table) table[std::to_string(id)] = label;
        j["label_table"] = std::move(table);
    }
    return j.dump(2);
}

// ---- spatial grid ----------------------------------------------------------

std::uint64_t SpatialGrid::cell_key(std::int64_t cx, std::int64_t cy, std::int64_t cz) {
    auto mix = [](std::uint64_t h, std::int64_t v) {
        h ^= static_cast<std::uint64_t>(v) + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
        return h;
    };
    std::uint64_t h = 0;
    h = mix(h, cx);
    h = mix(h, cy);
    h = mix(h, cz);
    return h;
}

SpatialGrid::SpatialGrid(const GaussianScene& scene, double cell_size) : cell_size_(cell_size) {
    if (cell_size <= 0.0) throw std::invalid_argument("SpatialGrid: cell size must be positive");
    positions_.reserve(scene.splats.size());
    for (std::size_t i = 0; i < scene.splats.size(); ++i) {
        const Vec3f& p = scene.splats[i].position;
        positions_.push_back({static_cast<double>(p.x), static_cast<double>(p.y), static_cast<double>(p.z)});
        std::int64_t cx = static_cast<std::int64_t>(std::floor(positions_[i][0] / cell_size_));
        std::int64_t cy = static_cast<std::int64_t>(std::floor(positions_[i][1] / cell_size_));
        std::int64_t cz = static_cast<std::int64_t>(std::floor(positions_[i][2] / cell_size_));
        cells_[cell_key(cx, cy, cz)].push_back(i);
    }
}

std::vector<std::size_t> SpatialGrid::radius_query(const std::array<double, 3>& center, double r) const {
    if (r <= 0.0) throw std::invalid_argument("radius_query: radius must be positive");
    std::vector<std::size_t> out;
    const double r2 = r * r;
    std::int64_t lo[3], hi[3];
    for (int a = 0; a < 3; ++a) {
        lo[a] = static_cast<std::int64_t>(std::floor((center[a] - r) / cell_size_));
        hi[a] = static_cast<std::int64_t>(std::floor((center[a] + r) / cell_size_));
    }
    for (std::int64_t cx = lo[0]; cx <= hi[0]; ++cx)
        for (std::int64_t cy = lo[1]; cy <= hi[1]; ++cy)
            for (std::int64_t cz = lo[2]; cz <= hi[2]; ++cz) {
                auto it = cells_.find(cell_key(cx, cy, cz));
                if (it == cells_.end()) continue;
                for (std::size_t i : it->second) {
                    double dx = positions_[i][0] - center[0];
                    double dy = positions_[i][1] - center[1];
                    double dz = positions_[i][2] - center[2];
                    if (dx * dx + dy * dy + dz * dz <= r2) out.push_back(i);
                }
            }
    std::sort(out.begin(), out.end());
    return out;
}

RoiResult roi_members(const SpatialGrid& grid, const std::array<double, 3>& center,
                      double r0, double step) {
    if (grid.point_count() == 0) throw DataError("roi_members: no gaussians");
    if (r0 <= 0.0 || step <= 0.0) throw std::invalid_argument("roi_members: radii must be positive");
    double r = r0;
    while (true) {
        std::vector<std::size_t> members = grid.radius_query(center, r);
        if (!members.empty()) return RoiResult{std::move(members), r};
        r += step;
    }
}

// ---- sampling --------------------------------------------------------------

std::vector<std::size_t> sample_gaussians(const GaussianScene& scene, std::size_t n, std::uint64_t seed) {
    const std::size_t total = scene.splats.size();
    if (total == 0) throw DataError("sample_gaussians: empty scene");
    Rng rng(seed);
    std::vector<std::size_t> pool(total);
    for (std::size_t i = 0; i < total; ++i) pool[i] = i;
    if (total >= n) {
        // Fisher-Yates prefix of length n.
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t j = i + static_cast<std::size_t>(rng.below(total - i));
            std::swap(pool[i], pool[j]);
        }
        pool.resize(n);
        return pool;
    }
    for (std::size_t i = 0; i + 1 < total; ++i) {
        std::size_t j = i + static_cast<std::size_t>(rng.below(total - i));
        std::swap(pool[i], pool[j]);
    }
    while (pool.size() < n) pool.push_back(static_cast<std::size_t>(rng.below(total)));
    return pool;
}

// ---- mock backbone levels ---------------------------------------------------

namespace {

std::uint64_t interleave21(std::uint64_t v) {
    // Spreads the low 21 bits out to every third position.
    v &= 0x1FFFFF;
    v = (v | (v << 32)) & 0x1F00000000FFFFull;
    v = (v | (v << 16)) & 0x1F0000FF0000FFull;
    v = (v | (v << 8)) & 0x100F00F00F00F00Full;
    v = (v | (v << 4)) & 0x10C30C30C30C30C3ull;
    v = (v | (v << 2)) & 0x1249249249249249ull;
    return v;
}

std::uint64_t morton3(double nx, double ny, double nz) {
    constexpr double kMax = 2097151.0;  // 2^21 - 1
    auto q = [](double t) {
        t = std::clamp(t, 0.0, 1.0);
        return static_cast<std::uint64_t>(t * kMax);
    };
    return interleave21(q(nx)) | (interleave21(q(ny)) << 1) | (interleave21(q(nz)) << 2);
}

TokenLevel chunk_means(const std::vector<std::array<double, 3>>& pos,
                       const std::vector<const float*>& feats,
                       std::size_t d_f, std::size_t level_size) {
    const std::size_t n = feats.size();
    const std::size_t out_n = std::min(level_size, n);
    TokenLevel level;
    level.features = Tensor2D(out_n, d_f, 0.0);
    level.positions = Tensor2D(out_n, 3, 0.0);
    for (std::size_t c = 0; c < out_n; ++c) {
        std::size_t begin = c * n / out_n;
        std::size_t end = (c + 1) * n / out_n;
        double inv = 1.0 / static_cast<double>(end - begin);
        for (std::size_t i = begin; i < end; ++i) {
            for (std::size_t k = 0; k < d_f; ++k) level.features.at(c, k) += feats[i][k];
            for (int a = 0; a < 3; ++a) level.positions.at(c, a) += pos[i][a];
        }
        for (std::size_t k = 0; k < d_f; ++k) level.features.at(c, k) *= inv;
        for (int a = 0; a < 3; ++a) level.positions.at(c, a) *= inv;
    }
    return level;
}

}  // namespace

std::array<TokenLevel, 3> mock_decoder_levels(const GaussianScene& scene,
                                              const std::vector<std::size_t>& sampled) {
    if (sampled.empty()) throw DataError("mock_decoder_levels: empty sample");
    const std::size_t d_f = scene.feature_dim;
    for (std::size_t i : sampled)
        if (i >= scene.splats.size()) throw std::invalid_argument("mock_decoder_levels: index out of range");

    // Morton-sort a copy so the output does not depend on input order.
    double lo[3] = {1e300, 1e300, 1e300}, hi[3] = {-1e300, -1e300, -1e300};
    for (std::size_t i : sampled) {
        const Vec3f& p = scene.splats[i].position;
        double xyz[3] = {p.x, p.y, p.z};
        for (int a = 0; a < 3; ++a) {
            lo[a] = std::min(lo[a], xyz[a]);
            hi[a] = std::max(hi[a], xyz[a]);
        }
    }
    double span[3];
    for (int a = 0; a < 3; ++a) span[a] = hi[a] > lo[a] ? hi[a] - lo[a] : 1.0;

    std::vector<std::pair<std::uint64_t, std::size_t>> order;
    order.reserve(sampled.size());
    for (std::size_t i : sampled) {
        const Vec3f& p = scene.splats[i].position;
        order.emplace_back(morton3((p.x - lo[0]) / span[0], (p.y - lo[1]) / span[1], (p.z - lo[2]) / span[2]), i);
    }
    std::sort(order.begin(), order.end());

    std::vector<std::array<double, 3>> pos;
    std::vector<const float*> feats;
    pos.reserve(order.size());
    feats.reserve(order.size());
    for (const auto& [key, i] : order) {
        const GaussianSplat& s = scene.splats[i];
        pos.push_back({static_cast<double>(s.position.x), static_cast<double>(s.position.y),
                       static_cast<double>(s.position.z)});
        feats.push_back(s.language_feature.data());
    }

    std::array<TokenLevel, 3> levels;
    levels[0] = chunk_means(pos, feats, d_f, 589);
    levels[1] = chunk_means(pos, feats, d_f, 2400);
    levels[2] = chunk_means(pos, feats, d_f, order.size());
    return levels;
}

// ---- synthetic scenes -------------------------------------------------------

std::map<std::string, std::vector<double>> build_label_embeddings(
    std::vector<std::string> labels, std::size_t dim) {
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    for (std::uint64_t salt = 0; salt < 1000; ++salt) {
        std::map<std::string, std::vector<double>> table;
        for (const std::string& label : labels) {
            Rng rng(fnv1a(label) ^ (salt * 0x9E3779B97F4A7C15ull));
            std::vector<double> v(dim);
            double norm = 0.0;
            for (double& x : v) {
                x = rng.normal();
                norm += x * x;
            }
            norm = std::sqrt(norm);
            for (double& x : v) x /= norm;
            table[label] = std::move(v);
        }
        bool ok = true;
        for (auto a = table.begin(); a != table.end() && ok; ++a) {
            auto b = a;
            for (++b; b != table.end(); ++b) {
                double dot = 0.0;
                for (std::size_t k = 0; k < dim; ++k) dot += a->second[k] * b->second[k];
                if (dot >= 0.3) {
                    ok = false;
                    break;
                }
            }
        }
        if (ok) return table;
    }
    throw DataError("build_label_embeddings: could not separate labels; dimension too small");
}

GaussianScene synth_scene(const SynthSceneSpec& spec) {
    std::vector<std::string> labels;
    for (const SynthObjectSpec& o : spec.objects) labels.push_back(o.label);
    return synth_scene(spec, build_label_embeddings(labels, spec.feature_dim));
}

GaussianScene synth_scene(const SynthSceneSpec& spec,
                          const std::map<std::string, std::vector<double>>& label_embeddings) {
    if (spec.feature_dim == 0) throw std::invalid_argument("synth_scene: feature_dim must be positive");
    for (const SynthObjectSpec& o : spec.objects) {
        if (o.count == 0 || o.gaussians_per_object == 0)
            throw std::invalid_argument("synth_scene: counts must be >= 1");
        if (!label_embeddings.count(o.label))
            throw DataError("synth_scene: label not in embedding table: " + o.label);
        if (label_embeddings.at(o.label).size() != spec.feature_dim)
            throw DataError("synth_scene: embedding width mismatch for " + o.label);
    }
    if (spec.feature_noise_sigma < 0.0) throw std::invalid_argument("synth_scene: sigma must be >= 0");

    Rng rng(spec.seed);
    GaussianScene scene;
    scene.scene_id = spec.scene_id;
    scene.feature_dim = spec.feature_dim;
    std::uint32_t next_instance = 0;
    for (const SynthObjectSpec& o : spec.objects) {
        const std::vector<double>& base = label_embeddings.at(o.label);
        for (std::size_t inst = 0; inst < o.count; ++inst) {
            std::uint32_t instance_id = next_instance++;
            scene.label_table[instance_id] = o.label;
            double margin = o.cluster_radius;
            double cx = rng.uniform(margin, std::max(margin, spec.room_extent[0] - margin));
            double cy = rng.uniform(margin, std::max(margin, spec.room_extent[1] - margin));
            double cz = rng.uniform(margin, std::max(margin, spec.room_extent[2] - margin));
            for (std::size_t g = 0; g < o.gaussians_per_object; ++g) {
                GaussianSplat s;
                s.position.x = static_cast<float>(cx + rng.normal() * o.cluster_radius * 0.5);
                s.position.y = static_cast<float>(cy + rng.normal() * o.cluster_radius * 0.5);
                s.position.z = static_cast<float>(cz + rng.normal() * o.cluster_radius * 0.5);
                s.scale = Vec3f{static_cast<float>(rng.uniform(0.01, 0.05)),
                                static_cast<float>(rng.uniform(0.01, 0.05)),
                                static_cast<float>(rng.uniform(0.01, 0.05))};
                double q[4], qn = 0.0;
                for (double& x : q) {
                    x = rng.normal();
                }
                for (double x : q) qn += x * x;
                qn = std::sqrt(qn);
                for (std::size_t k = 0; k < 4; ++k) s.rotation[k] = static_cast<float>(q[k] / qn);
                s.opacity = static_cast<float>(rng.uniform(0.5, 1.0));
                for (float& c : s.color) c = static_cast<float>(rng.uniform());
                std::vector<double> f(spec.feature_dim);
                double fn = 0.0;
                for (std::size_t k = 0; k < spec.feature_dim; ++k) {
                    f[k] = base[k] + (spec.feature_noise_sigma > 0.0 ? rng.normal() * spec.feature_noise_sigma : 0.0);
                    fn += f[k] * f[k];
                }
                fn = std::sqrt(fn);
                s.language_feature.resize(spec.feature_dim);
                for (std::size_t k = 0; k < spec.feature_dim; ++k)
                    s.language_feature[k] = static_cast<float>(f[k] / fn);
                s.instance_id = instance_id;
                scene.splats.push_back(std::move(s));
            }
        }
    }
    scene.recompute_bounds();
    scene.validate();
    return scene;
}

}  // namespace gvlm
