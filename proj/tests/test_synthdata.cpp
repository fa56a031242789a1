#include <gtest/gtest.h>

#include <filesystem>
#include <map>
#include <set>

#include "pmmd/synthdata.hpp"

namespace fs = std::filesystem;
namespace synth = pmmd::synth;
using pmmd::Tensor;

namespace {

fs::path fresh_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / name;
    fs::remove_all(p);
    return p;
}

std::map<std::string, std::vector<std::uint8_t>> read_tree(const fs::path& root) {
    std::map<std::string, std::vector<std::uint8_t>> out;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file())
            out[fs::relative(e.path(), root).string()] = pmmd::io::read_file(e.path().string());
    return out;
}

std::set<int> present_parts(const Tensor<float>& pm) {
    std::set<int> parts;
    for (int y = 0; y < pm.dim(1); ++y)
        for (int x = 0; x < pm.dim(2); ++x) parts.insert(synth::pose_map_part(pm, y, x));
    return parts;
}

bool is_background(const Tensor<float>& img, int y, int x) {
    return img.at(0, y, x) == 0.0f && img.at(1, y, x) == 0.0f && img.at(2, y, x) == 0.0f;
}

}  // namespace

TEST(Synthdata, ZeroPoseRendersAlignedFigure) {
    synth::FigureSpec spec;
    const auto out = synth::render_figure(spec, 64, 48);
    int figure_pixels = 0;
    for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 48; ++x) {
            const int part = synth::pose_map_part(out.pose_map, y, x);
            EXPECT_EQ(part == 0, is_background(out.image, y, x)) << "at " << y << "," << x;
            if (part != 0) ++figure_pixels;
        }
    EXPECT_GT(figure_pixels, 200);
    // all 7 parts visible on the upright figure
    const auto parts = present_parts(out.pose_map);
    for (int p = 0; p <= synth::kNumParts; ++p) EXPECT_TRUE(parts.count(p)) << "part " << p;
}

TEST(Synthdata, RenderIsDeterministic) {
    synth::FigureSpec spec;
    spec.pose = {0.1, -0.2, 0.5, -0.3, 0.2, 0.1, -0.05};
    spec.view_id = 2;
    const auto a = synth::render_figure(spec, 64, 48);
    const auto b = synth::render_figure(spec, 64, 48);
    EXPECT_EQ(pmmd::max_abs_diff(a.image, b.image), 0.0);
    EXPECT_EQ(pmmd::max_abs_diff(a.pose_map, b.pose_map), 0.0);
}

TEST(Synthdata, ArmAngleMovesPixelsButKeepsParts) {
    synth::FigureSpec a, b;
    b.pose[2] = M_PI / 2.0 * 0.7;  // left arm raised (within limits)
    const auto ra = synth::render_figure(a, 64, 48);
    const auto rb = synth::render_figure(b, 64, 48);
    EXPECT_GT(pmmd::max_abs_diff(ra.image, rb.image), 0.0);
    EXPECT_EQ(present_parts(ra.pose_map), present_parts(rb.pose_map));
}

TEST(Synthdata, ViewsShareAppearance) {
    for (const int torso : {0, 2}) {
        for (const auto pattern : {synth::Pattern::kSolid, synth::Pattern::kStriped}) {
            synth::FigureSpec spec;
            spec.appearance.torso_color = torso;
            spec.appearance.pattern = pattern;
            const synth::Color want = synth::kTorsoColors[torso];
            for (int v = 0; v < 4; ++v) {
                spec.view_id = v;
                const auto out = synth::render_figure(spec, 64, 48);
                // sample through the PNG quantization path, as a consumer would
                const auto img = pmmd::io::tensor_to_image(out.image);
                const auto [py, px] = synth::torso_probe_pixel(spec, 64, 48);
                EXPECT_NEAR(img.at(py, px, 0) / 255.0, want.r, 2.0 / 255.0) << "view " << v;
                EXPECT_NEAR(img.at(py, px, 1) / 255.0, want.g, 2.0 / 255.0) << "view " << v;
                EXPECT_NEAR(img.at(py, px, 2) / 255.0, want.b, 2.0 / 255.0) << "view " << v;
            }
        }
    }
}

TEST(Synthdata, StripedTorsoHasTwoShirtColors) {
    synth::FigureSpec spec;
    spec.appearance.torso_color = 0;
    auto count_torso_colors = [&] {
        const auto out = synth::render_figure(spec, 64, 48);
        std::set<std::array<int, 3>> colors;
        for (int y = 0; y < 64; ++y)
            for (int x = 0; x < 48; ++x)
                if (synth::pose_map_part(out.pose_map, y, x) == synth::kTorso)
                    colors.insert({static_cast<int>(out.image.at(0, y, x) * 255),
                                   static_cast<int>(out.image.at(1, y, x) * 255),
                                   static_cast<int>(out.image.at(2, y, x) * 255)});
        return colors.size();
    };
    spec.appearance.pattern = synth::Pattern::kSolid;
    EXPECT_EQ(count_torso_colors(), 1u);
    spec.appearance.pattern = synth::Pattern::kStriped;
    EXPECT_EQ(count_torso_colors(), 2u);
}

TEST(Synthdata, Validation) {
    synth::FigureSpec spec;
    spec.pose[2] = 2.0;  // beyond arm limit 1.2
    EXPECT_THROW(synth::render_figure(spec, 64, 48), pmmd::ValidationError);
    spec.pose[2] = 0.0;
    spec.view_id = 4;
    EXPECT_THROW(synth::render_figure(spec, 64, 48), pmmd::ValidationError);
    spec.view_id = 0;
    EXPECT_THROW(synth::render_figure(spec, 15, 15), pmmd::ValidationError);
    EXPECT_NO_THROW(synth::render_figure(spec, 16, 16));
    EXPECT_THROW(synth::generate_dataset(0, 1, 64, 48, "/tmp/unused"), pmmd::ValidationError);
}

TEST(Synthdata, PoseMapQuantizationRoundTrip) {
    synth::FigureSpec spec;
    spec.pose = {0.2, 0.1, -0.4, 0.8, -0.3, 0.2, 0.1};
    const auto out = synth::render_figure(spec, 64, 48);
    const auto img = synth::pose_map_to_image(out.pose_map);
    const auto back = synth::image_to_pose_map(img);
    for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 48; ++x) {
            ASSERT_EQ(synth::pose_map_part(back, y, x), synth::pose_map_part(out.pose_map, y, x));
            EXPECT_NEAR(back.at(1, y, x), out.pose_map.at(1, y, x), 1.0 / 255.0);
            EXPECT_NEAR(back.at(2, y, x), out.pose_map.at(2, y, x), 1.0 / 255.0);
        }
}

TEST(Synthdata, GenerateDatasetIsByteDeterministic) {
    const fs::path d1 = fresh_dir("pmmd_ds_a");
    const fs::path d2 = fresh_dir("pmmd_ds_b");
    synth::generate_dataset(2, 7, 64, 48, d1.string());
    synth::generate_dataset(2, 7, 64, 48, d2.string());
    const auto t1 = read_tree(d1), t2 = read_tree(d2);
    ASSERT_EQ(t1.size(), t2.size());
    EXPECT_EQ(t1, t2);
    // 2 records x (4 views + 4 poses + text) + manifest
    EXPECT_EQ(t1.size(), 2u * 9u + 1u);
    fs::remove_all(d1);
    fs::remove_all(d2);
}

TEST(Synthdata, DatasetRoundTripAndTextRegeneration) {
    const fs::path dir = fresh_dir("pmmd_ds_rt");
    const auto manifest = synth::generate_dataset(3, 11, 64, 48, dir.string());
    EXPECT_EQ(manifest["records"].size(), 3u);
    const auto meta = synth::load_manifest(dir.string());
    EXPECT_EQ(meta.n_identities, 3);
    EXPECT_EQ(meta.h, 64);
    EXPECT_EQ(meta.w, 48);
    for (int i = 0; i < 3; ++i) {
        const auto rec = synth::load_record(meta, i);
        // text regenerable from the drawn attributes
        const auto spec = synth::draw_spec(i, pmmd::derive_seed(11, "record",
                                                                static_cast<std::uint64_t>(i)));
        EXPECT_EQ(rec.text, spec.appearance.to_text());
        // loaded pixels equal the quantized render
        synth::FigureSpec s2 = spec;
        s2.view_id = 1;
        const auto fresh = synth::render_figure(s2, 64, 48);
        const auto quantized = pmmd::io::image_to_tensor(pmmd::io::tensor_to_image(fresh.image));
        EXPECT_EQ(pmmd::max_abs_diff(rec.images[1], quantized), 0.0);
        // alignment invariant survives the PNG round trip
        for (int y = 0; y < 64; ++y)
            for (int x = 0; x < 48; ++x)
                ASSERT_EQ(synth::pose_map_part(rec.pose_maps[1], y, x) == 0,
                          is_background(rec.images[1], y, x));
    }
    EXPECT_THROW(synth::load_record(meta, 3), pmmd::ValidationError);
    EXPECT_THROW(synth::load_manifest("/tmp/definitely_missing_dir"), pmmd::RuntimeError);
    fs::remove_all(dir);
}
