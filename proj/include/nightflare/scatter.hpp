// Copyright Contributors to the nightflare project.
// SPDX-License-Identifier: Apache-2.0

/// \file
/// Scattering-flare renderer. A template is split into four components:
/// glare (radial color curve with an optional dimmed sector along the streak
/// axis), streaks (asymmetrically blurred lines), shimmer (angular spikes
/// plus radially blurred noise) and the light source (saturated core with a
/// glow). Components are combined with screen blending on encoded values.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nightflare/image.hpp"
#include "nightflare/violation.hpp"

namespace nightflare {

struct CurvePoint {
    double t = 0.0;
    Rgb rgb{};

    friend bool operator==(const CurvePoint&, const CurvePoint&) = default;
};

/// Piecewise-linear color over normalized distance. Valid curves start at
/// t = 0, end at t = 1 with a zero color, and have strictly increasing t.
class ColorCurve {
public:
    ColorCurve() = default;
    explicit ColorCurve(std::vector<CurvePoint> points) : points_(std::move(points)) {}

    /// Two-point curve from `start` at t = 0 to black at t = 1.
    static ColorCurve ramp(Rgb start);

    /// Clamped below 0; zero at and beyond t = 1.
    Rgb operator()(double t) const noexcept;

    const std::vector<CurvePoint>& points() const noexcept { return points_; }
    bool non_increasing() const noexcept;

    friend bool operator==(const ColorCurve&, const ColorCurve&) = default;

private:
    std::vector<CurvePoint> points_;
};

struct GlareSpec {
    double radius = 100.0;
    ColorCurve curve;
    double vanishing_angle = 0.0;      ///< full width of each dimmed sector; 0 disables
    double vanishing_direction = 0.0;  ///< axis of the sectors (both ends of the line)
    double vanishing_feather = 0.2;

    friend bool operator==(const GlareSpec&, const GlareSpec&) = default;
};

/// Opacity floor inside a vanishing sector.
inline constexpr double kVanishingFloor = 0.2;

struct StreakSpec {
    double direction = 0.0;
    double length = 400.0;
    double width = 6.0;
    ColorCurve section_curve;
    double sharp_side_blur = 1.0;  ///< half-maximum distance of the edge blur, +normal side
    double soft_side_blur = 3.0;   ///< half-maximum distance of the edge blur, -normal side
    ColorCurve falloff_curve;

    friend bool operator==(const StreakSpec&, const StreakSpec&) = default;
};

/// Gaussian sigma for a blur given by its half-maximum distance.
inline constexpr double kHalfLifeToSigma = 1.0 / 1.177;

struct ShimmerSpec {
    int spike_count = 12;
    double radius = 120.0;
    double intensity = 0.6;
    std::uint64_t angular_jitter_seed = 0;
    int noise_octaves = 4;  ///< 0 disables the noise overlay
    double noise_radial_blur = 0.3;
    Rgb rgb{1.0f, 1.0f, 1.0f};

    friend bool operator==(const ShimmerSpec&, const ShimmerSpec&) = default;
};

struct LightSourceSpec {
    std::optional<int> polygon_sides;  ///< nullopt: disc
    double core_radius = 4.0;
    double glow_radius = 12.0;
    Rgb rgb{1.0f, 0.9f, 0.8f};

    friend bool operator==(const LightSourceSpec&, const LightSourceSpec&) = default;
};

struct ScatterTemplate {
    Extent canvas{512, 512};
    Point source_pos{256.0, 256.0};
    GlareSpec glare;
    std::vector<StreakSpec> streaks;
    std::optional<ShimmerSpec> shimmer;
    std::optional<LightSourceSpec> light;

    friend bool operator==(const ScatterTemplate&, const ScatterTemplate&) = default;
};

struct FlareLayers {
    EncodedImage flare;  ///< components and light source, screen-blended
    EncodedImage light_source;
    EncodedImage glare_layer;
    EncodedImage streak_layer;
    EncodedImage shimmer_layer;
};

Violations check_curve(const ColorCurve& c, const std::string& path);
Violations check_glare(const GlareSpec& s, const std::string& path = "glare");
Violations check_streak(const StreakSpec& s, const std::string& path = "streak");
Violations check_shimmer(const ShimmerSpec& s, const std::string& path = "shimmer");
Violations check_light(const LightSourceSpec& s, const std::string& path = "light");
Violations check_scatter(const ScatterTemplate& t);

/// Opacity multiplier of the glare at polar angle `phi`.
double vanishing_opacity(const GlareSpec& s, double phi) noexcept;

EncodedImage render_glare(const GlareSpec& spec, Point source, Extent canvas);
EncodedImage render_streak(const StreakSpec& spec, Point source, Extent canvas);
EncodedImage render_shimmer(const ShimmerSpec& spec, Point source, Extent canvas);
EncodedImage render_light_source(const LightSourceSpec& spec, Point source, Extent canvas);
FlareLayers render_scatter(const ScatterTemplate& t);

/// Every saturated glare pixel is also saturated in the light-source layer.
bool saturation_contained(const FlareLayers& layers);

}  // namespace nightflare
