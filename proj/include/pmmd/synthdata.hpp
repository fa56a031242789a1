#pragma once

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pmmd/core/common.hpp"
#include "pmmd/core/rng.hpp"
#include "pmmd/core/tensor.hpp"
#include "pmmd/io/png.hpp"

namespace pmmd::synth {

// 7-part capsule skeleton. Part ids are 1-based in pose maps; 0 = background.
inline constexpr int kNumParts = 7;
enum Part : int {
    kTorso = 1,
    kHead = 2,
    kLeftArm = 3,
    kRightArm = 4,
    kLeftLeg = 5,
    kRightLeg = 6,
    kHips = 7,
};

struct Color {
    float r, g, b;
};

inline constexpr int kNumTorsoColors = 5;
inline constexpr const char* kTorsoColorNames[kNumTorsoColors] = {"red", "green", "blue", "yellow",
                                                                  "purple"};
inline constexpr Color kTorsoColors[kNumTorsoColors] = {{0.85f, 0.10f, 0.10f},
                                                        {0.10f, 0.65f, 0.15f},
                                                        {0.15f, 0.25f, 0.80f},
                                                        {0.90f, 0.85f, 0.10f},
                                                        {0.60f, 0.15f, 0.75f}};

inline constexpr int kNumLegsColors = 5;
inline constexpr const char* kLegsColorNames[kNumLegsColors] = {"navy", "white", "orange", "brown",
                                                                "gray"};
inline constexpr Color kLegsColors[kNumLegsColors] = {{0.10f, 0.10f, 0.40f},
                                                      {1.00f, 1.00f, 1.00f},
                                                      {0.95f, 0.55f, 0.10f},
                                                      {0.45f, 0.30f, 0.15f},
                                                      {0.50f, 0.50f, 0.50f}};

inline constexpr Color kSkin = {0.94f, 0.78f, 0.62f};
inline constexpr Color kStripe = {1.00f, 1.00f, 1.00f};
inline constexpr Color kBackground = {0.0f, 0.0f, 0.0f};

enum class Pattern : int { kSolid = 0, kStriped = 1 };

struct AttributeSet {
    int torso_color = 0;  // index into kTorsoColors
    int legs_color = 0;   // index into kLegsColors
    Pattern pattern = Pattern::kSolid;

    // Canonical text serialization; regenerable exactly from the attributes.
    std::string to_text() const {
        std::string s = "the person wears a ";
        s += kTorsoColorNames[torso_color];
        if (pattern == Pattern::kStriped) s += " striped";
        s += " shirt and ";
        s += kLegsColorNames[legs_color];
        s += " pants";
        return s;
    }

    void validate() const {
        PMMD_CHECK(torso_color >= 0 && torso_color < kNumTorsoColors, "bad torso_color index ",
                   torso_color);
        PMMD_CHECK(legs_color >= 0 && legs_color < kNumLegsColors, "bad legs_color index ",
                   legs_color);
    }
};

// Joint angles in radians, one per skeleton segment, with hard limits.
// Order: torso lean, head tilt, left arm, right arm, left leg, right leg, hip swing.
inline constexpr int kNumJoints = 7;
inline constexpr double kJointLimits[kNumJoints][2] = {
    {-0.30, 0.30},  // torso lean
    {-0.40, 0.40},  // head tilt
    {-1.20, 1.20},  // left arm (0 = hanging straight down)
    {-1.20, 1.20},  // right arm
    {-0.50, 0.50},  // left leg
    {-0.50, 0.50},  // right leg
    {-0.20, 0.20},  // hip swing
};

struct FigureSpec {
    int identity_id = 0;
    AttributeSet appearance;
    std::array<double, kNumJoints> pose{};
    int view_id = 0;

    void validate() const {
        appearance.validate();
        PMMD_CHECK(view_id >= 0 && view_id < 4, "view_id must be in [0,3], got ", view_id);
        for (int j = 0; j < kNumJoints; ++j)
            PMMD_CHECK(pose[static_cast<std::size_t>(j)] >= kJointLimits[j][0] &&
                           pose[static_cast<std::size_t>(j)] <= kJointLimits[j][1],
                       "joint ", j, " angle ", pose[static_cast<std::size_t>(j)],
                       " outside limits [", kJointLimits[j][0], ", ", kJointLimits[j][1], "]");
    }
};

namespace detail {

struct Vec2 {
    double x, y;
};

struct Capsule {
    int part;
    Vec2 a, b;     // axis endpoints in canonical space
    double radius;
    Color color;
    bool striped = false;  // alternate color bands along the axis (torso only)
};

inline Vec2 polar(const Vec2& from, double angle, double len) {
    return {from.x + len * std::cos(angle), from.y + len * std::sin(angle)};
}

// Canonical space: origin at image center, y down, 1 unit = image height.
// Painter's order: later entries are drawn on top.
inline std::array<Capsule, kNumParts> build_skeleton(const FigureSpec& spec) {
    const auto& p = spec.pose;
    const Color torso_c = kTorsoColors[spec.appearance.torso_color];
    const Color legs_c = kLegsColors[spec.appearance.legs_color];
    const double down = M_PI / 2.0;  // +y
    const double up = -M_PI / 2.0;

    const Vec2 pelvis = {0.0, 0.05};
    const double tdir = up + p[0];
    const Vec2 hip_l = polar(pelvis, M_PI + p[6], 0.055);   // hip axis swings with joint 6
    const Vec2 hip_r = polar(pelvis, p[6], 0.055);
    const Vec2 neck = polar(pelvis, tdir, 0.22);
    const Vec2 sh_base = polar(pelvis, tdir, 0.185);
    // shoulders sit at the torso edges so hanging arms stay visible
    const Vec2 sh_l = polar(sh_base, tdir + M_PI / 2.0, -0.07);
    const Vec2 sh_r = polar(sh_base, tdir + M_PI / 2.0, 0.07);
    const Vec2 head_top = polar(neck, tdir + p[1], 0.07);
    const double spread = 0.35;  // resting angle of the arms away from the body

    std::array<Capsule, kNumParts> caps = {{
        {kLeftLeg, hip_l, polar(hip_l, down + p[4], 0.28), 0.045, legs_c, false},
        {kRightLeg, hip_r, polar(hip_r, down - p[5], 0.28), 0.045, legs_c, false},
        {kLeftArm, sh_l, polar(sh_l, down + p[0] + spread + p[2], 0.19), 0.032, kSkin, false},
        {kRightArm, sh_r, polar(sh_r, down + p[0] - spread - p[3], 0.19), 0.032, kSkin, false},
        {kHips, hip_l, hip_r, 0.062, legs_c, false},
        {kTorso, pelvis, neck, 0.075, torso_c, spec.appearance.pattern == Pattern::kStriped},
        {kHead, neck, head_top, 0.055, kSkin, false},
    }};
    return caps;
}

// Per-view affine transforms (canonical -> view): identity, horizontal flip,
// small rotation + shrink, opposite rotation + grow. Applied about the origin.
struct ViewXf {
    bool flip;
    double rot, scale;
};
inline constexpr ViewXf kViews[4] = {
    {false, 0.0, 1.0},
    {true, 0.0, 1.0},
    {false, 0.12, 0.95},
    {true, -0.12, 1.05},
};

// Map a view-space point back to canonical coordinates.
inline Vec2 view_to_canonical(const Vec2& p, int view_id) {
    const ViewXf& v = kViews[view_id];
    const double c = std::cos(-v.rot), s = std::sin(-v.rot);
    Vec2 q = {(p.x * c - p.y * s) / v.scale, (p.x * s + p.y * c) / v.scale};
    if (v.flip) q.x = -q.x;
    return q;
}

}  // namespace detail

struct RenderOut {
    Tensor<float> image;     // (3, H, W) in [0,1]
    Tensor<float> pose_map;  // (3, H, W): part/kNumParts, u, v; background = 0
};

// Flat-shaded renderer with exact image/pose-map correspondence: no
// anti-aliasing, so a pixel is background in the image iff its part label is 0.
inline RenderOut render_figure(const FigureSpec& spec, int h, int w) {
    spec.validate();
    PMMD_CHECK(h >= 16 && w >= 16, "resolution must be at least 16x16, got ", h, "x", w);
    const auto caps = detail::build_skeleton(spec);
    RenderOut out{Tensor<float>({3, h, w}), Tensor<float>({3, h, w})};
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const detail::Vec2 pv = {(x + 0.5 - w / 2.0) / h, (y + 0.5 - h / 2.0) / h};
            const detail::Vec2 p = detail::view_to_canonical(pv, spec.view_id);
            int part = 0;
            float u = 0.0f, v = 0.0f;
            Color col = kBackground;
            for (const auto& cap : caps) {
                const double abx = cap.b.x - cap.a.x, aby = cap.b.y - cap.a.y;
                const double apx = p.x - cap.a.x, apy = p.y - cap.a.y;
                const double len2 = abx * abx + aby * aby;
                const double t = len2 > 0.0 ? std::clamp((apx * abx + apy * aby) / len2, 0.0, 1.0)
                                            : 0.0;
                const double dx = apx - t * abx, dy = apy - t * aby;
                if (dx * dx + dy * dy > cap.radius * cap.radius) continue;
                const double len = std::sqrt(len2);
                const double signed_d = len > 0.0 ? (abx * apy - aby * apx) / len : 0.0;
                part = cap.part;
                u = static_cast<float>(t);
                v = static_cast<float>(std::clamp(0.5 + signed_d / (2.0 * cap.radius), 0.0, 1.0));
                col = cap.color;
                if (cap.striped) {
                    // bands of width 0.2 along the axis; the band around t = 0.5
                    // (the invariant sampling point) keeps the base color
                    const int band = static_cast<int>(std::floor(t / 0.2));
                    if (band % 2 != 0) col = kStripe;
                }
            }
            out.image.at(0, y, x) = col.r;
            out.image.at(1, y, x) = col.g;
            out.image.at(2, y, x) = col.b;
            out.pose_map.at(0, y, x) = static_cast<float>(part) / kNumParts;
            out.pose_map.at(1, y, x) = part ? u : 0.0f;
            out.pose_map.at(2, y, x) = part ? v : 0.0f;
        }
    }
    return out;
}

// The canonical image-space sampling point for the torso-color invariant:
// midpoint of the torso axis mapped into the given view.
inline std::pair<int, int> torso_probe_pixel(const FigureSpec& spec, int h, int w) {
    const auto caps = detail::build_skeleton(spec);
    const auto& torso = caps[5];
    detail::Vec2 mid = {(torso.a.x + torso.b.x) / 2.0, (torso.a.y + torso.b.y) / 2.0};
    const auto& vx = detail::kViews[spec.view_id];
    if (vx.flip) mid.x = -mid.x;
    const double c = std::cos(vx.rot), s = std::sin(vx.rot);
    const detail::Vec2 pv = {(mid.x * c - mid.y * s) * vx.scale, (mid.x * s + mid.y * c) * vx.scale};
    const int px = static_cast<int>(std::floor(pv.x * h + w / 2.0));
    const int py = static_cast<int>(std::floor(pv.y * h + h / 2.0));
    return {std::clamp(py, 0, h - 1), std::clamp(px, 0, w - 1)};
}

struct SampleRecord {
    std::array<Tensor<float>, 4> images;
    std::array<Tensor<float>, 4> pose_maps;
    std::string text;
    int identity_id = 0;
};

// Attributes and pose drawn from a stream derived only from (seed, index), so
// generation order and worker count can never change a record.
inline FigureSpec draw_spec(int identity_id, std::uint64_t record_seed) {
    Rng rng(record_seed);
    FigureSpec spec;
    spec.identity_id = identity_id;
    spec.appearance.torso_color = static_cast<int>(rng.uniform_int(kNumTorsoColors));
    spec.appearance.legs_color = static_cast<int>(rng.uniform_int(kNumLegsColors));
    spec.appearance.pattern = rng.uniform() < 0.5 ? Pattern::kSolid : Pattern::kStriped;
    for (int j = 0; j < kNumJoints; ++j)
        spec.pose[static_cast<std::size_t>(j)] =
            rng.uniform(0.8 * kJointLimits[j][0], 0.8 * kJointLimits[j][1]);
    return spec;
}

inline SampleRecord make_record(int identity_id, std::uint64_t global_seed, int h, int w) {
    FigureSpec spec = draw_spec(identity_id, derive_seed(global_seed, "record",
                                                         static_cast<std::uint64_t>(identity_id)));
    SampleRecord rec;
    rec.identity_id = identity_id;
    rec.text = spec.appearance.to_text();
    for (int v = 0; v < 4; ++v) {
        spec.view_id = v;
        RenderOut r = render_figure(spec, h, w);
        rec.images[static_cast<std::size_t>(v)] = std::move(r.image);
        rec.pose_maps[static_cast<std::size_t>(v)] = std::move(r.pose_map);
    }
    return rec;
}

// --- pose-map PNG quantization ---------------------------------------------
// Channel 0 stores part/kNumParts; 255/kNumParts > 36 levels per part, so the
// round trip recovers labels exactly. Channels 1-2 are plain [0,1] bytes.

inline io::ImageU8 pose_map_to_image(const Tensor<float>& pm) { return io::tensor_to_image(pm); }

inline Tensor<float> image_to_pose_map(const io::ImageU8& img) {
    Tensor<float> pm = io::image_to_tensor(img);
    for (int y = 0; y < img.h; ++y)
        for (int x = 0; x < img.w; ++x) {
            const int part = static_cast<int>(std::lround(pm.at(0, y, x) * kNumParts));
            pm.at(0, y, x) = static_cast<float>(part) / kNumParts;
        }
    return pm;
}

inline int pose_map_part(const Tensor<float>& pm, int y, int x) {
    return static_cast<int>(std::lround(pm.at(0, y, x) * kNumParts));
}

// --- dataset directory layout ----------------------------------------------

inline std::string record_dir_name(int i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "rec%04d", i);
    return buf;
}

struct DatasetMeta {
    std::uint64_t seed = 0;
    int h = 0, w = 0;
    int n_identities = 0;
    std::string root;
};

inline nlohmann::json generate_dataset(int n_identities, std::uint64_t seed, int h, int w,
                                       const std::string& out_dir) {
    PMMD_CHECK(n_identities >= 1, "n_identities must be >= 1, got ", n_identities);
    PMMD_CHECK(h >= 16 && w >= 16, "resolution must be at least 16x16, got ", h, "x", w);
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    PMMD_RUNTIME_CHECK(!ec && fs::is_directory(out_dir), "cannot create dataset dir: ", out_dir);

    nlohmann::json records = nlohmann::json::array();
    for (int i = 0; i < n_identities; ++i) {
        const SampleRecord rec = make_record(i, seed, h, w);
        const fs::path rdir = fs::path(out_dir) / record_dir_name(i);
        fs::create_directories(rdir, ec);
        PMMD_RUNTIME_CHECK(!ec, "cannot create record dir: ", rdir.string());
        for (int v = 0; v < 4; ++v) {
            io::write_png((rdir / ("view" + std::to_string(v) + ".png")).string(),
                          io::tensor_to_image(rec.images[static_cast<std::size_t>(v)]));
            io::write_png((rdir / ("pose" + std::to_string(v) + ".png")).string(),
                          pose_map_to_image(rec.pose_maps[static_cast<std::size_t>(v)]));
        }
        std::ofstream tf(rdir / "text.txt");
        PMMD_RUNTIME_CHECK(tf.good(), "cannot write text.txt in ", rdir.string());
        tf << rec.text << "\n";
        records.push_back({{"id", i}, {"dir", record_dir_name(i)}, {"text", rec.text}});
    }
    nlohmann::json manifest = {
        {"version", 1},          {"kind", "pmmd-dataset"},
        {"seed", seed},          {"resolution", {h, w}},
        {"n_identities", n_identities}, {"records", records},
    };
    std::ofstream mf(fs::path(out_dir) / "manifest.json");
    PMMD_RUNTIME_CHECK(mf.good(), "cannot write manifest.json in ", out_dir);
    mf << manifest.dump(2) << "\n";
    return manifest;
}

inline DatasetMeta load_manifest(const std::string& dir) {
    std::ifstream f(std::filesystem::path(dir) / "manifest.json");
    PMMD_RUNTIME_CHECK(f.good(), "dataset manifest not found in ", dir);
    nlohmann::json m;
    try {
        f >> m;
    } catch (const std::exception& e) {
        throw RuntimeError(strcat_msg("corrupt manifest in ", dir, ": ", e.what()));
    }
    PMMD_CHECK(m.value("kind", "") == "pmmd-dataset", "not a pmmd dataset manifest: ", dir);
    PMMD_CHECK(m.value("version", 0) == 1, "unsupported dataset version in ", dir);
    DatasetMeta meta;
    meta.seed = m.at("seed").get<std::uint64_t>();
    meta.h = m.at("resolution")[0].get<int>();
    meta.w = m.at("resolution")[1].get<int>();
    meta.n_identities = m.at("n_identities").get<int>();
    meta.root = dir;
    return meta;
}

inline SampleRecord load_record(const DatasetMeta& meta, int i) {
    PMMD_CHECK(i >= 0 && i < meta.n_identities, "record index ", i, " out of range [0,",
               meta.n_identities, ")");
    namespace fs = std::filesystem;
    const fs::path rdir = fs::path(meta.root) / record_dir_name(i);
    SampleRecord rec;
    rec.identity_id = i;
    for (int v = 0; v < 4; ++v) {
        rec.images[static_cast<std::size_t>(v)] =
            io::image_to_tensor(io::read_png((rdir / ("view" + std::to_string(v) + ".png")).string()));
        rec.pose_maps[static_cast<std::size_t>(v)] =
            image_to_pose_map(io::read_png((rdir / ("pose" + std::to_string(v) + ".png")).string()));
        PMMD_CHECK(rec.images[static_cast<std::size_t>(v)].dim(1) == meta.h &&
                       rec.images[static_cast<std::size_t>(v)].dim(2) == meta.w,
                   "record ", i, " view ", v, " resolution mismatch with manifest");
    }
    std::ifstream tf(rdir / "text.txt");
    PMMD_RUNTIME_CHECK(tf.good(), "missing text.txt for record ", i);
    std::getline(tf, rec.text);
    return rec;
}

}  // namespace pmmd::synth
