// Copyright Contributors to the nightflare project.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <numbers>

#include "nightflare/compose.hpp"
#include "nightflare/scatter.hpp"
#include "support/fixtures.hpp"

using namespace nightflare;
using testing::constant_raster;
using testing::random_raster;

namespace {

AugmentationParams identity_params(double gamma = 2.2)
{
    AugmentationParams p;
    p.gamma = gamma;
    return p;
}

/// Small rendered flare with component layers, on a 96x96 canvas.
FlareSource small_flare()
{
    ScatterTemplate t;
    t.canvas = {96, 96};
    t.source_pos = {48, 48};
    t.glare.radius = 40.0;
    t.glare.curve = ColorCurve::ramp({0.8f, 0.7f, 0.6f});
    StreakSpec s;
    s.length = 80.0;
    s.width = 4.0;
    s.section_curve = ColorCurve::ramp({1, 1, 1});
    s.falloff_curve = ColorCurve::ramp({0.9f, 0.9f, 1.0f});
    t.streaks.push_back(s);
    t.light = LightSourceSpec{};
    const auto layers = render_scatter(t);
    EncodedImage glare = layers.glare_layer;
    screen_into(glare, layers.shimmer_layer);
    return {"small", layers.flare, layers.light_source, glare, layers.streak_layer};
}

}  // namespace

TEST_CASE("augmentation sampling")
{
    CHECK(sample_augmentation(9) == sample_augmentation(9));
    CHECK(!(sample_augmentation(9) == sample_augmentation(10)));
    double scale = 0.0;
    int flips = 0;
    for (std::uint64_t s = 0; s < 2000; ++s) {
        const auto p = sample_augmentation(s);
        REQUIRE(check_augmentation(p).empty());
        scale += p.affine.scale;
        flips += p.affine.flip_h;
    }
    CHECK(scale / 2000 == doctest::Approx(1.15).epsilon(0.02));
    CHECK(flips > 850);
    CHECK(flips < 1150);

    AugmentationParams bad;
    bad.affine.scale = 2.0;
    bad.blur_sigma = 1.0;
    const auto v = check_augmentation(bad);
    REQUIRE(v.size() == 1);
    CHECK(v[0].path == "affine.scale");
}

TEST_CASE("flare pair augmentation")
{
    const auto flare = random_raster<EncodedDomain>(40, 30, 3, 1);
    const auto light = random_raster<EncodedDomain>(40, 30, 3, 2, 0.0f, 0.3f);

    SUBCASE("identity params decode only")
    {
        const auto p = identity_params(2.0);
        const auto [f, l] = augment_flare_pair(flare, light, p);
        CHECK(f == gamma_decode(flare, GammaCodec(2.0)));
        CHECK(l == gamma_decode(light, GammaCodec(2.0)));
    }

    SUBCASE("shape mismatch")
    {
        const auto other = random_raster<EncodedDomain>(41, 30, 3, 2);
        CHECK_THROWS_AS(augment_flare_pair(flare, other, identity_params()), ShapeError);
    }

    SUBCASE("color offset shifts the flare only")
    {
        auto p = identity_params();
        p.color_offset = {0.02f, 0.0f, 0.0f};
        const auto [f0, l0] = augment_flare_pair(flare, light, identity_params());
        const auto [f1, l1] = augment_flare_pair(flare, light, p);
        CHECK(l0 == l1);
        double diff = 0.0;
        for (int y = 0; y < 30; ++y)
            for (int x = 0; x < 40; ++x)
                diff += f1.at(x, y, 0) - f0.at(x, y, 0);
        CHECK(diff / 1200.0 == doctest::Approx(0.02).epsilon(1e-4));
        CHECK(testing::channel_sum(f1, 1) == testing::channel_sum(f0, 1));
    }

    SUBCASE("geometry is shared and order is kept")
    {
        // flare >= light pointwise going in.
        EncodedImage fl = light;
        for (float& v : fl.samples())
            v = std::min(1.0f, v + 0.2f);
        auto p = sample_augmentation(77);
        p.affine.tx = 3.0;
        p.affine.ty = -4.0;
        const auto [f, l] = augment_flare_pair(fl, light, p, {48, 36});
        CHECK(f.extent() == Extent{48, 36});
        for (std::size_t i = 0; i < f.samples().size(); ++i)
            REQUIRE(f.samples()[i] >= l.samples()[i] - 0.02f - 1e-6f);
    }
}

TEST_CASE("background augmentation")
{
    const auto bg = random_raster<EncodedDomain>(80, 70, 3, 3);
    auto p = identity_params(2.2);
    p.crop_u = 1.0;
    p.crop_v = 0.0;
    const auto plain = augment_background(bg, p, {64, 64});
    const GammaCodec codec(2.2);
    CHECK(plain.at(0, 0, 0) == codec.decode(bg.at(16, 0, 0)));
    CHECK(plain.at(63, 63, 2) == codec.decode(bg.at(79, 63, 2)));

    p.bg_gain = 0.5;
    const auto half = augment_background(bg, p, {64, 64});
    for (std::size_t i = 0; i < half.samples().size(); ++i)
        REQUIRE(half.samples()[i] == plain.samples()[i] * 0.5f);

    CHECK_THROWS_AS(augment_background(bg, p, {81, 10}), InputError);

    SUBCASE("noise variance")
    {
        const auto mid = constant_raster<EncodedDomain>(512, 512, 3, 0.8f);
        auto q = identity_params();
        q.noise_variance = 0.01;
        q.noise_seed = 4;
        const auto clean = augment_background(mid, identity_params(), {512, 512});
        const auto noisy = augment_background(mid, q, {512, 512});
        double s = 0.0, s2 = 0.0;
        const auto n = noisy.samples().size();
        for (std::size_t i = 0; i < n; ++i) {
            const double d = noisy.samples()[i] - clean.samples()[i];
            s += d;
            s2 += d * d;
        }
        const double mean = s / n;
        CHECK(s2 / n - mean * mean == doctest::Approx(0.01).epsilon(0.05));
    }
}

TEST_CASE("segmentation map")
{
    LinearImage light(4, 1, 1), streak(4, 1, 1), glare(4, 1, 1);
    light.at(0, 0, 0) = 1.0f;
    streak.at(0, 0, 0) = 1.0f;
    streak.at(1, 0, 0) = 0.3f;
    glare.at(1, 0, 0) = 0.3f;
    glare.at(2, 0, 0) = 0.3f;
    const auto m = derive_masks(light, streak, glare);
    CHECK(m.at(0, 0) == SegClass::light_source);
    CHECK(m.at(1, 0) == SegClass::streak);
    CHECK(m.at(2, 0) == SegClass::glare);
    CHECK(m.at(3, 0) == SegClass::background);

    const auto zero = derive_masks(LinearImage(8, 8, 1), LinearImage(8, 8, 1), LinearImage(8, 8, 3));
    CHECK(zero.count(SegClass::background) == 64);
    CHECK_THROWS_AS(derive_masks(LinearImage(8, 8, 1), LinearImage(8, 7, 1), LinearImage(8, 8, 1)), ShapeError);

    SegMap big(37, 21);
    for (int y = 0; y < 21; ++y)
        for (int x = 0; x < 37; ++x)
            big.set(x, y, static_cast<SegClass>((x * 7 + y * 3) % 4));
    const auto bytes = big.encode_png();
    CHECK(SegMap::decode_png(bytes) == big);
    const auto rgb = decode_png(bytes);
    // (1, 0) is class 3, drawn blue.
    CHECK(rgb.at(1, 0, 0) == 0.0f);
    CHECK(rgb.at(1, 0, 2) == 1.0f);
}

TEST_CASE("composition")
{
    const auto bg = random_raster<EncodedDomain>(120, 110, 3, 5, 0.0f, 0.9f);
    const FlareSource src = small_flare();
    ComposeOptions opts;
    opts.crop = {96, 96};

    SUBCASE("zero flare leaves the background")
    {
        FlareSource dark{"dark", EncodedImage(96, 96, 3), EncodedImage(96, 96, 3), std::nullopt, std::nullopt};
        const auto s = compose_pair(bg, dark, 3, opts);
        const auto p = s.provenance.params;
        // Color offset still lifts the flare where it is positive.
        for (std::size_t i = 0; i < s.flare_gt.samples().size(); ++i)
            REQUIRE(s.flare_gt.samples()[i] <= std::max(0.0f, p.color_offset[i % 3]) + 1e-7f);
        auto q = p;
        q.color_offset = {0, 0, 0};
        const auto t = compose_with_params(bg, dark, q, 3, opts);
        CHECK(t.input == t.flare_free);
        CHECK(testing::channel_sum(t.flare_gt) == 0.0);
        CHECK(t.seg.count(SegClass::background) == 96u * 96u);
        const auto expected = gamma_encode(clip_unit(augment_background(bg, q, opts.crop)), GammaCodec(q.gamma));
        CHECK(t.flare_free == expected);
    }

    SUBCASE("saturated background absorbs the flare")
    {
        const auto white = constant_raster<EncodedDomain>(120, 110, 3, 1.0f);
        auto p = identity_params();
        p.bg_gain = 1.0;
        const auto s = compose_with_params(white, src, p, 1, opts);
        for (float v : s.input.samples())
            REQUIRE(v == 1.0f);
        CHECK(s.input == s.flare_free);
    }

    SUBCASE("reconstruction identity and ordering")
    {
        for (std::uint64_t seed = 0; seed < 6; ++seed) {
            const auto s = compose_pair(bg, src, seed, opts);
            CHECK(reconstruction_error(s) < 1e-6);
            for (std::size_t i = 0; i < s.input.samples().size(); ++i)
                REQUIRE(s.input.samples()[i] >= s.flare_free.samples()[i]);
        }
    }

    SUBCASE("determinism and provenance")
    {
        const auto a = compose_pair(bg, src, 42, opts);
        const auto b = compose_pair(bg, src, 42, opts);
        CHECK(a.input == b.input);
        CHECK(a.flare_gt == b.flare_gt);
        CHECK(a.seg == b.seg);
        CHECK(a.provenance.source_id == "small");
        CHECK(a.provenance.params == sample_augmentation(42));
    }

    SUBCASE("light core is labelled as light source")
    {
        const auto s = compose_with_params(bg, src, identity_params(), 0, opts);
        CHECK(s.seg.at(48, 48) == SegClass::light_source);
        CHECK(s.seg.at(48 + 15, 48) == SegClass::streak);
        CHECK(s.seg.at(48, 48 + 25) == SegClass::glare);
        CHECK(s.seg.at(2, 2) == SegClass::background);
        CHECK(s.seg.count(SegClass::light_source) > 0);
    }

    SUBCASE("captured flare without components")
    {
        FlareSource real = src;
        real.glare.reset();
        real.streak.reset();
        const auto s = compose_with_params(bg, real, identity_params(), 0, opts);
        CHECK(s.seg.count(SegClass::streak) == 0);
        CHECK(s.seg.at(48, 48) == SegClass::light_source);
        CHECK(s.seg.at(48, 48 + 25) == SegClass::glare);
    }
}

TEST_CASE("threshold light-source baseline")
{
    SUBCASE("dark image")
    {
        const auto img = constant_raster<EncodedDomain>(32, 32, 3, 0.5f);
        CHECK(testing::channel_sum(extract_light_source_baseline(img).mask) == 0.0);
    }

    SUBCASE("large disc survives the opening")
    {
        EncodedImage img(64, 64, 3);
        for (int y = 0; y < 64; ++y)
            for (int x = 0; x < 64; ++x)
                if (std::hypot(x - 32.0, y - 32.0) <= 10.0)
                    for (int c = 0; c < 3; ++c)
                        img.at(x, y, c) = 1.0f;
        BaselineOptions o;
        o.feather_sigma = 0.0;
        const auto r = extract_light_source_baseline(img, o);
        for (int y = 0; y < 64; ++y)
            for (int x = 0; x < 64; ++x)
                if (std::hypot(x - 32.0, y - 32.0) <= 10.0 - o.opening_radius)
                    REQUIRE(r.mask.at(x, y, 0) == 1.0f);
        const auto feathered = extract_light_source_baseline(img);
        CHECK(feathered.mask.at(32, 32, 0) > 0.99f);
        CHECK(feathered.mask.at(32 + 12, 32, 0) > 0.0f);
        CHECK(feathered.mask.at(32 + 12, 32, 0) < 0.5f);
        CHECK(feathered.blended.at(32, 32, 0) > 0.99f);
    }

    SUBCASE("tiny source is erased")
    {
        EncodedImage img(48, 48, 3);
        for (int y = 23; y <= 25; ++y)
            for (int x = 23; x <= 25; ++x)
                for (int c = 0; c < 3; ++c)
                    img.at(x, y, c) = 1.0f;
        CHECK(testing::channel_sum(extract_light_source_baseline(img).mask) == 0.0);
    }

    SUBCASE("paste")
    {
        const auto pred = constant_raster<EncodedDomain>(8, 8, 3, 0.2f);
        const auto srcimg = constant_raster<EncodedDomain>(8, 8, 3, 1.0f);
        auto mask = constant_raster<EncodedDomain>(8, 8, 1, 0.0f);
        mask.at(3, 3, 0) = 1.0f;
        mask.at(4, 3, 0) = 0.5f;
        const auto out = paste_light_source(pred, srcimg, mask);
        CHECK(out.at(3, 3, 1) == 1.0f);
        CHECK(out.at(4, 3, 1) == doctest::Approx(0.6f));
        CHECK(out.at(0, 0, 1) == 0.2f);
    }

    SUBCASE("opening")
    {
        std::vector<std::uint8_t> m(100, 0);
        m[55] = 1;
        CHECK(morphological_open(m, 10, 10, 1) == std::vector<std::uint8_t>(100, 0));
        CHECK(morphological_open(m, 10, 10, 0) == m);
    }
}
