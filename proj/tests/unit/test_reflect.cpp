// Copyright Contributors to the nightflare project.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <numbers>

#include "nightflare/imagecore.hpp"
#include "nightflare/reflect.hpp"
#include "support/fixtures.hpp"

using namespace nightflare;

namespace {

constexpr double kPi = std::numbers::pi;

double luminance_sum(const EncodedImage& img)
{
    double s = 0.0;
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
            s += luminance_at(img, x, y);
    return s;
}

ReflectTemplate chain()
{
    ReflectTemplate t;
    t.canvas = {400, 300};
    t.optical_center = {200, 150};
    for (double k : {-1.2, -0.6, 0.4, 1.6}) {
        IrisSpec s;
        s.k = k;
        s.size = 9.0;
        s.opacity = 0.6;
        s.rgb = {1.0f, 0.8f, 0.6f};
        t.irises.push_back(s);
    }
    return t;
}

}  // namespace

TEST_CASE("two-bounce path count")
{
    CHECK(reflection_paths(0) == 0);
    CHECK(reflection_paths(2) == 1);
    CHECK(reflection_paths(10) == 45);
    CHECK_THROWS_AS(reflection_paths(-1), InputError);
}

TEST_CASE("iris placement on the flare axis")
{
    ReflectTemplate t;
    t.canvas = {400, 200};
    t.optical_center = {200, 100};
    IrisSpec a, b;
    a.k = -1.0;
    b.k = 0.5;
    t.irises = {a, b};
    const auto placed = place_irises(t, {300, 100});
    REQUIRE(placed.size() == 2);
    CHECK(placed[0].center.x == 100.0);
    CHECK(placed[0].center.y == 100.0);
    CHECK(placed[1].center.x == 250.0);
    CHECK(placed[1].center.y == 100.0);

    for (const auto& p : place_irises(t, t.optical_center)) {
        CHECK(p.center.x == 200.0);
        CHECK(p.center.y == 100.0);
    }
    CHECK_THROWS_AS(place_irises(t, {-1, 5}), InputError);
}

TEST_CASE("iris validation")
{
    IrisSpec s;
    s.size = 0.0;
    CHECK(check_iris(s).at(0).path == "iris.size");
    s = IrisSpec{};
    s.shape = RingIris{1.2};
    CHECK(check_iris(s).at(0).path == "iris.shape.inner_ratio");
    s.shape = LatticeIris{0, 2, 5, 1};
    CHECK(check_iris(s).at(0).path == "iris.shape.rows");
    ReflectTemplate t;
    CHECK(check_reflect(t).at(0).path == "irises");
    CHECK_THROWS_AS(render_reflect(t, {10, 10}), SpecError);
}

TEST_CASE("iris rendering basics")
{
    IrisSpec s;
    s.size = 12.0;
    s.opacity = 0.0;
    CHECK(testing::channel_sum(render_iris(s, {32, 32}, {64, 64})) == 0.0);

    s.opacity = 0.5;
    s.rgb = {1.0f, 0.5f, 0.0f};
    const auto img = render_iris(s, {32, 32}, {64, 64});
    CHECK(img.at(32, 32, 0) == doctest::Approx(0.5f));
    CHECK(img.at(32, 32, 1) == doctest::Approx(0.25f));
    CHECK(img.at(32, 32, 2) == 0.0f);
    CHECK(img.at(32, 32 + 14, 0) == 0.0f);
    // Antialiased area matches the disc area.
    CHECK(testing::channel_sum(img, 0) / 0.5 == doctest::Approx(kPi * 144.0).epsilon(0.01));

    s.shape = RingIris{0.5};
    const auto ring = render_iris(s, {32, 32}, {64, 64});
    CHECK(ring.at(32, 32, 0) == 0.0f);
    CHECK(ring.at(32 + 9, 32, 0) == doctest::Approx(0.5f));
}

TEST_CASE("polygon iris is invariant under a rotation by one sector")
{
    for (int sides : {3, 5, 6, 7}) {
        CAPTURE(sides);
        IrisSpec s;
        s.size = 30.0;
        s.opacity = 1.0;
        s.rgb = {1, 1, 1};
        s.edge_feather = 1.5;
        s.shape = PolygonIris{sides, 0.1};
        const auto a = render_iris(s, {64.3, 63.8}, {128, 128});
        s.shape = PolygonIris{sides, 0.1 + 2.0 * kPi / sides};
        const auto b = render_iris(s, {64.3, 63.8}, {128, 128});
        CHECK(testing::max_abs_diff(a, b) < 2.0 / 255.0);

        // Rotating the raster itself agrees up to resampling of the edge ramp.
        AffineParams p;
        p.rotation = 2.0 * kPi / sides;
        const auto c = affine_warp(render_iris(s, {63.5, 63.5}, {128, 128}), p, {63.5, 63.5});
        const auto d = render_iris(s, {63.5, 63.5}, {128, 128});
        double mean = 0.0;
        for (std::size_t i = 0; i < c.samples().size(); ++i)
            mean += std::abs(c.samples()[i] - d.samples()[i]);
        mean /= static_cast<double>(c.samples().size());
        CHECK(mean < 2.0 / 255.0);
    }
}

TEST_CASE("lattice iris has one component per cell")
{
    IrisSpec s;
    s.size = 20.0;
    s.opacity = 1.0;
    s.rgb = {1, 1, 1};
    s.shape = LatticeIris{2, 3, 14.0, 4.0};
    const auto img = render_iris(s, {50, 50}, {100, 100});
    const auto comps = testing::components(img, 0.5f);
    CHECK(comps.size() == 6);
    for (const auto& c : comps)
        CHECK(c.pixels > 30);
}

TEST_CASE("clipping")
{
    IrisSpec s;
    s.size = 20.0;
    s.opacity = 1.0;
    s.rgb = {1, 1, 1};
    s.clip = ClipSpec{50.0, 1.0};
    const Point center{100, 100};
    const auto iris = render_iris(s, center, {200, 200});

    CHECK(apply_clipping(iris, s, center, {1, 0}, 50.0) == iris);
    CHECK(apply_clipping(iris, s, center, {1, 0}, 0.0) == iris);

    const auto clipped = apply_clipping(iris, s, center, {1, 0}, 70.0);
    // The side away from the light is erased first.
    CHECK(clipped.at(84, 100, 0) == 0.0f);
    CHECK(clipped.at(112, 100, 0) == 1.0f);

    double prev = luminance_sum(iris);
    for (int i = 1; i <= 10; ++i) {
        const double d = 50.0 + 5.0 * i;
        const double lum = luminance_sum(apply_clipping(iris, s, center, {0.6, 0.8}, d));
        CHECK(lum <= prev + 1e-9);
        prev = lum;
    }

    IrisSpec plain = s;
    plain.clip.reset();
    CHECK_THROWS_AS(apply_clipping(iris, plain, center, {1, 0}, 70.0), InputError);
}

TEST_CASE("caustics scale linearly with distance")
{
    IrisSpec s;
    s.size = 25.0;
    s.rgb = {0.9f, 0.9f, 1.0f};
    s.caustics = CausticsSpec{0.004};
    const Point c{60, 60};
    const Extent canvas{120, 120};
    CHECK(testing::channel_sum(render_caustics(s, c, 0.0, canvas)) == 0.0);

    const double m1 = testing::channel_sum(render_caustics(s, c, 50.0, canvas));
    const double m2 = testing::channel_sum(render_caustics(s, c, 100.0, canvas));
    CHECK(m2 == doctest::Approx(2.0 * m1).epsilon(0.01));

    const auto img = render_caustics(s, c, 100.0, canvas);
    for (int y = 0; y < 120; ++y)
        for (int x = 0; x < 120; ++x)
            if (std::hypot(x - c.x, y - c.y) > s.size + 1.0)
                REQUIRE(img.at(x, y, 0) == 0.0f);

    IrisSpec plain;
    CHECK_THROWS_AS(render_caustics(plain, c, 10.0, canvas), InputError);
}

TEST_CASE("reflect chain geometry")
{
    const ReflectTemplate t = chain();
    const Point light{310, 80};
    const auto img = render_reflect(t, light);
    auto comps = testing::components(img, 0.05f);
    REQUIRE(comps.size() == t.irises.size());

    // Least-squares line through the centroids (total least squares).
    double mx = 0.0, my = 0.0;
    for (const auto& c : comps) {
        mx += c.cx;
        my += c.cy;
    }
    mx /= comps.size();
    my /= comps.size();
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (const auto& c : comps) {
        sxx += (c.cx - mx) * (c.cx - mx);
        syy += (c.cy - my) * (c.cy - my);
        sxy += (c.cx - mx) * (c.cy - my);
    }
    const double angle = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
    const double nx = -std::sin(angle), ny = std::cos(angle);
    auto line_distance = [&](Point p) { return std::abs((p.x - mx) * nx + (p.y - my) * ny); };
    CHECK(line_distance(t.optical_center) < 0.5);
    CHECK(line_distance(light) < 0.5);

    // Distances from the optical center are proportional to |k|.
    const double span = std::hypot(light.x - t.optical_center.x, light.y - t.optical_center.y);
    for (const auto& iris : t.irises) {
        const double expected = std::abs(iris.k) * span;
        double best = 1e9;
        for (const auto& c : comps)
            best = std::min(best, std::abs(std::hypot(c.cx - t.optical_center.x, c.cy - t.optical_center.y) - expected));
        CHECK(best < 1.0);
    }
}

TEST_CASE("degenerate chains")
{
    ReflectTemplate t;
    t.canvas = {120, 120};
    t.optical_center = {60, 60};
    IrisSpec s;
    s.k = 1.0;
    s.size = 10.0;
    t.irises = {s};
    CHECK(render_reflect(t, {80, 40}) == render_iris(s, {80, 40}, t.canvas));

    t = chain();
    const auto img = render_reflect(t, t.optical_center);
    CHECK(testing::components(img, 0.05f).size() == 1);
}
