// Copyright Contributors to the nightflare project.
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <numbers>

#include "nightflare/imagecore.hpp"
#include "nightflare/scatter.hpp"

namespace nightflare {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

void add(Violations& out, const std::string& path, std::string message)
{
    out.push_back({Violation::Kind::semantic, path, std::move(message)});
}

void append(Violations& out, Violations more)
{
    out.insert(out.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
}

void check_rgb(Violations& out, const Rgb& c, const std::string& path)
{
    for (float v : c)
        if (!(v >= 0.0f && v <= 1.0f)) {
            add(out, path, "color components must be in [0,1]");
            return;
        }
}

bool finite_positive(double v) { return std::isfinite(v) && v > 0.0; }

EncodedImage blank(Extent canvas) { return EncodedImage(canvas.width, canvas.height, 3); }

}  // namespace

ColorCurve ColorCurve::ramp(Rgb start) { return ColorCurve({{0.0, start}, {1.0, Rgb{0.0f, 0.0f, 0.0f}}}); }

Rgb ColorCurve::operator()(double t) const noexcept
{
    if (points_.empty() || t >= 1.0)
        return {0.0f, 0.0f, 0.0f};
    if (t <= points_.front().t)
        return points_.front().rgb;
    const auto hi = std::upper_bound(points_.begin(), points_.end(), t,
                                     [](double v, const CurvePoint& p) { return v < p.t; });
    if (hi == points_.end())
        return points_.back().rgb;
    const auto lo = hi - 1;
    const double f = (t - lo->t) / (hi->t - lo->t);
    Rgb out{};
    for (int c = 0; c < 3; ++c)
        out[c] = static_cast<float>(lo->rgb[c] + (hi->rgb[c] - lo->rgb[c]) * f);
    return out;
}

bool ColorCurve::non_increasing() const noexcept
{
    for (std::size_t i = 1; i < points_.size(); ++i)
        for (int c = 0; c < 3; ++c)
            if (points_[i].rgb[c] > points_[i - 1].rgb[c])
                return false;
    return true;
}

Violations check_curve(const ColorCurve& curve, const std::string& path)
{
    Violations out;
    const auto& pts = curve.points();
    if (pts.size() < 2) {
        add(out, path, "a curve needs at least two control points");
        return out;
    }
    if (pts.front().t != 0.0)
        add(out, path + "[0].t", "first control point must be at t = 0");
    if (pts.back().t != 1.0)
        add(out, path + "[" + std::to_string(pts.size() - 1) + "].t", "last control point must be at t = 1");
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const std::string p = path + "[" + std::to_string(i) + "]";
        if (!std::isfinite(pts[i].t) || pts[i].t < 0.0 || pts[i].t > 1.0)
            add(out, p + ".t", "t must be in [0,1]");
        if (i > 0 && !(pts[i].t > pts[i - 1].t))
            add(out, p + ".t", "t must be strictly increasing");
        check_rgb(out, pts[i].rgb, p + ".rgb");
    }
    const Rgb& last = pts.back().rgb;
    if (last[0] != 0.0f || last[1] != 0.0f || last[2] != 0.0f)
        add(out, path + "[" + std::to_string(pts.size() - 1) + "].rgb", "curve must fade to zero at t = 1");
    return out;
}

Violations check_glare(const GlareSpec& s, const std::string& path)
{
    Violations out;
    if (!finite_positive(s.radius))
        add(out, path + ".radius", "must be > 0");
    append(out, check_curve(s.curve, path + ".curve"));
    if (!(s.vanishing_angle >= 0.0 && s.vanishing_angle < kTwoPi))
        add(out, path + ".vanishing_angle", "must be in [0, 2*pi)");
    if (!std::isfinite(s.vanishing_direction))
        add(out, path + ".vanishing_direction", "must be finite");
    if (!finite_positive(s.vanishing_feather))
        add(out, path + ".vanishing_feather", "must be > 0");
    return out;
}

Violations check_streak(const StreakSpec& s, const std::string& path)
{
    Violations out;
    if (!std::isfinite(s.direction))
        add(out, path + ".direction", "must be finite");
    if (!finite_positive(s.length))
        add(out, path + ".length", "must be > 0");
    if (!finite_positive(s.width))
        add(out, path + ".width", "must be > 0");
    append(out, check_curve(s.section_curve, path + ".section_curve"));
    append(out, check_curve(s.falloff_curve, path + ".falloff_curve"));
    if (!(s.sharp_side_blur >= 0.0) || !std::isfinite(s.sharp_side_blur))
        add(out, path + ".sharp_side_blur", "must be >= 0");
    if (!(s.soft_side_blur >= 0.0) || !std::isfinite(s.soft_side_blur))
        add(out, path + ".soft_side_blur", "must be >= 0");
    else if (s.sharp_side_blur > s.soft_side_blur)
        add(out, path + ".sharp_side_blur", "must not exceed soft_side_blur");
    return out;
}

Violations check_shimmer(const ShimmerSpec& s, const std::string& path)
{
    Violations out;
    if (s.spike_count < 3)
        add(out, path + ".spike_count", "must be >= 3");
    if (!finite_positive(s.radius))
        add(out, path + ".radius", "must be > 0");
    if (!(s.intensity >= 0.0 && s.intensity <= 1.0))
        add(out, path + ".intensity", "must be in [0,1]");
    if (s.noise_octaves < 0 || s.noise_octaves > 12)
        add(out, path + ".noise_octaves", "must be in [0,12]");
    if (!(s.noise_radial_blur >= 0.0) || !std::isfinite(s.noise_radial_blur))
        add(out, path + ".noise_radial_blur", "must be >= 0");
    check_rgb(out, s.rgb, path + ".rgb");
    return out;
}

Violations check_light(const LightSourceSpec& s, const std::string& path)
{
    Violations out;
    if (s.polygon_sides && *s.polygon_sides < 3)
        add(out, path + ".shape", "polygon needs at least 3 sides");
    if (!finite_positive(s.core_radius))
        add(out, path + ".core_radius", "must be > 0");
    if (!(s.glow_radius >= s.core_radius) || !std::isfinite(s.glow_radius))
        add(out, path + ".glow_radius", "must be >= core_radius");
    check_rgb(out, s.rgb, path + ".rgb");
    return out;
}

Violations check_scatter(const ScatterTemplate& t)
{
    Violations out;
    if (t.canvas.width <= 0 || t.canvas.height <= 0)
        add(out, "canvas", "dimensions must be positive");
    if (!(t.source_pos.x >= 0.0 && t.source_pos.x <= t.canvas.width - 1 && t.source_pos.y >= 0.0 &&
          t.source_pos.y <= t.canvas.height - 1))
        add(out, "source_pos", "must lie inside the canvas");
    append(out, check_glare(t.glare, "glare"));
    for (std::size_t i = 0; i < t.streaks.size(); ++i)
        append(out, check_streak(t.streaks[i], "streaks[" + std::to_string(i) + "]"));
    if (t.shimmer)
        append(out, check_shimmer(*t.shimmer, "shimmer"));
    if (t.light)
        append(out, check_light(*t.light, "light"));
    return out;
}

double vanishing_opacity(const GlareSpec& s, double phi) noexcept
{
    if (s.vanishing_angle <= 0.0)
        return 1.0;
    // Angular distance to the axis line, in [0, pi/2].
    const double a = std::fmod(std::abs(phi - s.vanishing_direction), kPi);
    const double delta = std::min(a, kPi - a);
    const double half = 0.5 * s.vanishing_angle;
    if (delta <= half)
        return kVanishingFloor;
    if (delta >= half + s.vanishing_feather)
        return 1.0;
    const double t = (delta - half) / s.vanishing_feather;
    return kVanishingFloor + (1.0 - kVanishingFloor) * (0.5 - 0.5 * std::cos(kPi * t));
}

EncodedImage render_glare(const GlareSpec& spec, Point source, Extent canvas)
{
    require_valid(check_glare(spec));
    EncodedImage out = blank(canvas);
    const int x_lo = std::max(0, static_cast<int>(std::floor(source.x - spec.radius)));
    const int x_hi = std::min(canvas.width - 1, static_cast<int>(std::ceil(source.x + spec.radius)));
    const int y_lo = std::max(0, static_cast<int>(std::floor(source.y - spec.radius)));
    const int y_hi = std::min(canvas.height - 1, static_cast<int>(std::ceil(source.y + spec.radius)));
    for (int y = y_lo; y <= y_hi; ++y) {
        for (int x = x_lo; x <= x_hi; ++x) {
            const double dx = x - source.x, dy = y - source.y;
            const double d = std::hypot(dx, dy);
            if (d >= spec.radius)
                continue;
            const Rgb c = spec.curve(d / spec.radius);
            const double opacity = spec.vanishing_angle > 0.0 ? vanishing_opacity(spec, std::atan2(dy, dx)) : 1.0;
            for (int k = 0; k < 3; ++k)
                out.at(x, y, k) = static_cast<float>(std::clamp(c[k] * opacity, 0.0, 1.0));
        }
    }
    return out;
}

namespace {

/// Perpendicular streak profile per channel, tabulated at a fine step. The
/// +v side is blurred with the sharp sigma and the -v side with the soft
/// sigma; each side is rescaled so both meet the unblurred ridge value at
/// v = 0, keeping the ridge on the streak axis.
class StreakProfile {
public:
    static constexpr double kStep = 0.125;

    StreakProfile(const StreakSpec& s)
        : half_width_(0.5 * s.width),
          sigma_sharp_(s.sharp_side_blur * kHalfLifeToSigma),
          sigma_soft_(s.soft_side_blur * kHalfLifeToSigma)
    {
        extent_pos_ = half_width_ + 3.0 * sigma_sharp_;
        extent_neg_ = half_width_ + 3.0 * sigma_soft_;
        const int n_pos = static_cast<int>(std::ceil(extent_pos_ / kStep)) + 1;
        const int n_neg = static_cast<int>(std::ceil(extent_neg_ / kStep)) + 1;
        pos_ = side(s.section_curve, sigma_sharp_, n_pos);
        neg_ = side(s.section_curve, sigma_soft_, n_neg);
    }

    double support_pos() const noexcept { return extent_pos_; }
    double support_neg() const noexcept { return extent_neg_; }

    Rgb operator()(double v) const noexcept
    {
        const auto& table = v >= 0.0 ? pos_ : neg_;
        const double limit = v >= 0.0 ? extent_pos_ : extent_neg_;
        const double a = std::abs(v);
        if (a >= limit)
            return {0.0f, 0.0f, 0.0f};
        const double f = a / kStep;
        const auto i = static_cast<std::size_t>(f);
        const double w = f - static_cast<double>(i);
        Rgb out{};
        for (int c = 0; c < 3; ++c) {
            const float lo = table[i][c];
            const float hi = i + 1 < table.size() ? table[i + 1][c] : 0.0f;
            out[c] = static_cast<float>(lo + (hi - lo) * w);
        }
        return out;
    }

private:
    Rgb section(const ColorCurve& curve, double v) const noexcept { return curve(std::abs(v) / half_width_); }

    std::vector<Rgb> side(const ColorCurve& curve, double sigma, int n) const
    {
        std::vector<Rgb> table(static_cast<std::size_t>(n));
        if (sigma <= 0.0) {
            for (int i = 0; i < n; ++i)
                table[i] = section(curve, i * kStep);
            return table;
        }
        const int taps = static_cast<int>(std::ceil(3.0 * sigma / kStep));
        std::vector<double> kernel(2 * taps + 1);
        double total = 0.0;
        for (int k = -taps; k <= taps; ++k) {
            const double u = k * kStep;
            kernel[k + taps] = std::exp(-0.5 * u * u / (sigma * sigma));
            total += kernel[k + taps];
        }
        auto blurred = [&](double v) {
            std::array<double, 3> acc{};
            for (int k = -taps; k <= taps; ++k) {
                const Rgb s = section(curve, v - k * kStep);
                for (int c = 0; c < 3; ++c)
                    acc[c] += kernel[k + taps] * s[c];
            }
            for (double& a : acc)
                a /= total;
            return acc;
        };
        const Rgb ridge = section(curve, 0.0);
        const auto ridge_blurred = blurred(0.0);
        for (int i = 0; i < n; ++i) {
            const auto b = blurred(i * kStep);
            for (int c = 0; c < 3; ++c) {
                const double scale = ridge_blurred[c] > 0.0 ? ridge[c] / ridge_blurred[c] : 0.0;
                table[i][c] = static_cast<float>(std::clamp(b[c] * scale, 0.0, 1.0));
            }
        }
        return table;
    }

    double half_width_;
    double sigma_sharp_;
    double sigma_soft_;
    double extent_pos_ = 0.0;
    double extent_neg_ = 0.0;
    std::vector<Rgb> pos_;
    std::vector<Rgb> neg_;
};

}  // namespace

EncodedImage render_streak(const StreakSpec& spec, Point source, Extent canvas)
{
    require_valid(check_streak(spec));
    const StreakProfile profile(spec);
    EncodedImage out = blank(canvas);
    const double ux = std::cos(spec.direction), uy = std::sin(spec.direction);
    // +v normal: the sharp side.
    const double nx = -uy, ny = ux;
    const double half_length = 0.5 * spec.length;
    for (int y = 0; y < canvas.height; ++y) {
        for (int x = 0; x < canvas.width; ++x) {
            const double dx = x - source.x, dy = y - source.y;
            const double u = dx * ux + dy * uy;
            if (std::abs(u) >= half_length)
                continue;
            const double v = dx * nx + dy * ny;
            if (v >= profile.support_pos() || -v >= profile.support_neg())
                continue;
            const Rgb across = profile(v);
            const Rgb along = spec.falloff_curve(std::abs(u) / half_length);
            for (int k = 0; k < 3; ++k)
                out.at(x, y, k) = std::clamp(across[k] * along[k], 0.0f, 1.0f);
        }
    }
    return out;
}

namespace {

constexpr double kSpikeSharpness = 4.0;
constexpr double kNoiseGain = 0.5;

}  // namespace

EncodedImage render_shimmer(const ShimmerSpec& spec, Point source, Extent canvas)
{
    require_valid(check_shimmer(spec));
    const int n = spec.spike_count;

    // Per-spike amplitude and a small phase offset, from the seed.
    std::vector<double> amplitude(static_cast<std::size_t>(n));
    std::uint64_t state = mix64(spec.angular_jitter_seed);
    for (int k = 0; k < n; ++k) {
        state = mix64(state);
        amplitude[k] = 0.6 + 0.4 * static_cast<double>(state >> 11) * 0x1.0p-53;
    }
    state = mix64(state);
    const double phase = (static_cast<double>(state >> 11) * 0x1.0p-53) * kTwoPi / n;

    const double r = spec.radius;
    const int x_lo = std::max(0, static_cast<int>(std::floor(source.x - r)));
    const int x_hi = std::min(canvas.width - 1, static_cast<int>(std::ceil(source.x + r)));
    const int y_lo = std::max(0, static_cast<int>(std::floor(source.y - r)));
    const int y_hi = std::min(canvas.height - 1, static_cast<int>(std::ceil(source.y + r)));

    EncodedImage spikes = blank(canvas);
    EncodedImage noise_layer = blank(canvas);
    if (x_lo > x_hi || y_lo > y_hi)
        return spikes;

    std::optional<EncodedImage> noise;
    if (spec.noise_octaves > 0) {
        const int pw = x_hi - x_lo + 1, ph = y_hi - y_lo + 1;
        EncodedImage patch = fractal_noise(pw, ph, spec.noise_octaves, std::max(2.0, r / 4.0),
                                           mix64(spec.angular_jitter_seed ^ 0x6e6f697365ULL));
        noise = radial_blur(patch, Point{source.x - x_lo, source.y - y_lo}, spec.noise_radial_blur);
    }

    for (int y = y_lo; y <= y_hi; ++y) {
        for (int x = x_lo; x <= x_hi; ++x) {
            const double dx = x - source.x, dy = y - source.y;
            const double d = std::hypot(dx, dy);
            if (d >= r)
                continue;
            const double falloff = (1.0 - d / r) * (1.0 - d / r);
            const double theta = std::atan2(dy, dx) - phase;
            const double lobe = std::pow(0.5 + 0.5 * std::cos(n * theta), kSpikeSharpness);
            long k = std::lround(theta * n / kTwoPi) % n;
            if (k < 0)
                k += n;
            const double s = spec.intensity * amplitude[static_cast<std::size_t>(k)] * lobe * falloff;
            const double nv = noise ? kNoiseGain * noise->at(x - x_lo, y - y_lo, 0) * falloff : 0.0;
            for (int c = 0; c < 3; ++c) {
                spikes.at(x, y, c) = static_cast<float>(std::clamp(s * spec.rgb[c], 0.0, 1.0));
                noise_layer.at(x, y, c) = static_cast<float>(std::clamp(nv * spec.rgb[c], 0.0, 1.0));
            }
        }
    }
    screen_into(spikes, noise_layer);
    return spikes;
}

EncodedImage render_light_source(const LightSourceSpec& spec, Point source, Extent canvas)
{
    require_valid(check_light(spec));
    EncodedImage out = blank(canvas);
    const double g = spec.glow_radius;
    const int x_lo = std::max(0, static_cast<int>(std::floor(source.x - g)));
    const int x_hi = std::min(canvas.width - 1, static_cast<int>(std::ceil(source.x + g)));
    const int y_lo = std::max(0, static_cast<int>(std::floor(source.y - g)));
    const int y_hi = std::min(canvas.height - 1, static_cast<int>(std::ceil(source.y + g)));

    const int sides = spec.polygon_sides.value_or(0);
    const double sector = sides > 0 ? kTwoPi / sides : 0.0;
    const double apothem = sides > 0 ? spec.core_radius * std::cos(kPi / sides) : spec.core_radius;

    for (int y = y_lo; y <= y_hi; ++y) {
        for (int x = x_lo; x <= x_hi; ++x) {
            const double dx = x - source.x, dy = y - source.y;
            const double d = std::hypot(dx, dy);
            double boundary = spec.core_radius;
            if (sides > 0 && d > 0.0) {
                // Vertex at -y; edge normals sit half a sector away.
                const double phi = std::atan2(dy, dx) + kPi / 2.0;
                double rel = std::fmod(phi, sector);
                if (rel < 0.0)
                    rel += sector;
                boundary = apothem / std::cos(rel - 0.5 * sector);
            }
            if (d <= boundary) {
                for (int c = 0; c < 3; ++c)
                    out.at(x, y, c) = 1.0f;
                continue;
            }
            if (d >= g)
                continue;
            const double t = (d - boundary) / (g - boundary);
            const double glow = (1.0 - t) * (1.0 - t);
            for (int c = 0; c < 3; ++c)
                out.at(x, y, c) = static_cast<float>(std::clamp(glow * spec.rgb[c], 0.0, 1.0));
        }
    }
    return out;
}

FlareLayers render_scatter(const ScatterTemplate& t)
{
    require_valid(check_scatter(t));
    FlareLayers layers;
    layers.glare_layer = render_glare(t.glare, t.source_pos, t.canvas);
    layers.streak_layer = blank(t.canvas);
    for (const auto& s : t.streaks)
        screen_into(layers.streak_layer, render_streak(s, t.source_pos, t.canvas));
    layers.shimmer_layer = t.shimmer ? render_shimmer(*t.shimmer, t.source_pos, t.canvas) : blank(t.canvas);
    layers.light_source = t.light ? render_light_source(*t.light, t.source_pos, t.canvas) : blank(t.canvas);

    layers.flare = layers.glare_layer;
    screen_into(layers.flare, layers.streak_layer);
    screen_into(layers.flare, layers.shimmer_layer);
    screen_into(layers.flare, layers.light_source);
    return layers;
}

bool saturation_contained(const FlareLayers& layers)
{
    const auto& glare = layers.glare_layer;
    const auto& light = layers.light_source;
    for (int y = 0; y < glare.height(); ++y)
        for (int x = 0; x < glare.width(); ++x) {
            const bool glare_sat = glare.at(x, y, 0) >= 1.0f && glare.at(x, y, 1) >= 1.0f && glare.at(x, y, 2) >= 1.0f;
            const bool light_sat = light.at(x, y, 0) >= 1.0f && light.at(x, y, 1) >= 1.0f && light.at(x, y, 2) >= 1.0f;
            if (glare_sat && !light_sat)
                return false;
        }
    return true;
}

}  // namespace nightflare
