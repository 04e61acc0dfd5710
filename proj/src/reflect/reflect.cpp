// Copyright Contributors to the nightflare project.
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "nightflare/imagecore.hpp"
#include "nightflare/reflect.hpp"

namespace nightflare {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kCausticRings = 4;

template <class... Fs>
struct overloaded : Fs... {
    using Fs::operator()...;
};
template <class... Fs>
overloaded(Fs...) -> overloaded<Fs...>;

void add(Violations& out, const std::string& path, std::string message)
{
    out.push_back({Violation::Kind::semantic, path, std::move(message)});
}

double polygon_sd(int sides, double rotation, double radius, double dx, double dy) noexcept
{
    const double apothem = radius * std::cos(kPi / sides);
    double sd = -apothem;
    // Edge normals sit half a sector away from the vertices; vertex 0 points up.
    for (int i = 0; i < sides; ++i) {
        const double a = -kPi / 2.0 + rotation + (i + 0.5) * 2.0 * kPi / sides;
        sd = std::max(sd, dx * std::cos(a) + dy * std::sin(a) - apothem);
    }
    return sd;
}

/// Largest distance from the center at which the iris is non-zero.
double iris_extent(const IrisSpec& s) noexcept
{
    const double feather = std::max(s.edge_feather, 1.0);
    if (const auto* l = std::get_if<LatticeIris>(&s.shape)) {
        const double hx = 0.5 * (l->cols - 1) * l->pitch, hy = 0.5 * (l->rows - 1) * l->pitch;
        return std::hypot(hx, hy) + l->cell_radius + feather;
    }
    return s.size + feather;
}

/// Antialiased coverage: linear ramp of width max(feather, 1) across the edge.
float coverage(double sd, double feather) noexcept
{
    const double w = std::max(feather, 1.0);
    return static_cast<float>(std::clamp(0.5 - sd / w, 0.0, 1.0));
}

struct Box {
    int x0, x1, y0, y1;
    bool empty() const noexcept { return x0 > x1 || y0 > y1; }
};

Box bounds(Point c, double r, Extent canvas)
{
    return {std::max(0, static_cast<int>(std::floor(c.x - r))),
            std::min(canvas.width - 1, static_cast<int>(std::ceil(c.x + r))),
            std::max(0, static_cast<int>(std::floor(c.y - r))),
            std::min(canvas.height - 1, static_cast<int>(std::ceil(c.y + r)))};
}

}  // namespace

Violations check_iris(const IrisSpec& s, const std::string& path)
{
    Violations out;
    if (!std::isfinite(s.k))
        add(out, path + ".k", "must be finite");
    if (!(s.size > 0.0) || !std::isfinite(s.size))
        add(out, path + ".size", "must be > 0");
    if (!(s.opacity >= 0.0 && s.opacity <= 1.0))
        add(out, path + ".opacity", "must be in [0,1]");
    for (float v : s.rgb)
        if (!(v >= 0.0f && v <= 1.0f)) {
            add(out, path + ".rgb", "color components must be in [0,1]");
            break;
        }
    if (!(s.edge_feather >= 0.0) || !std::isfinite(s.edge_feather))
        add(out, path + ".edge_feather", "must be >= 0");
    std::visit(overloaded{
                   [](const DiscIris&) {},
                   [&](const PolygonIris& p) {
                       if (p.sides < 3)
                           add(out, path + ".shape.sides", "polygon needs at least 3 sides");
                       if (!std::isfinite(p.rotation))
                           add(out, path + ".shape.rotation", "must be finite");
                   },
                   [&](const RingIris& r) {
                       if (!(r.inner_ratio > 0.0 && r.inner_ratio < 1.0))
                           add(out, path + ".shape.inner_ratio", "must be in (0,1)");
                   },
                   [&](const LatticeIris& l) {
                       if (l.rows < 1)
                           add(out, path + ".shape.rows", "must be >= 1");
                       if (l.cols < 1)
                           add(out, path + ".shape.cols", "must be >= 1");
                       if (!(l.pitch > 0.0) || !std::isfinite(l.pitch))
                           add(out, path + ".shape.pitch", "must be > 0");
                       if (!(l.cell_radius > 0.0) || !std::isfinite(l.cell_radius))
                           add(out, path + ".shape.cell_radius", "must be > 0");
                   },
               },
               s.shape);
    if (s.caustics && (!(s.caustics->opacity_slope >= 0.0) || !std::isfinite(s.caustics->opacity_slope)))
        add(out, path + ".caustics.opacity_slope", "must be >= 0");
    if (s.clip) {
        if (!(s.clip->threshold >= 0.0) || !std::isfinite(s.clip->threshold))
            add(out, path + ".clip.threshold", "must be >= 0");
        if (!(s.clip->mask_scale > 0.0) || !std::isfinite(s.clip->mask_scale))
            add(out, path + ".clip.mask_scale", "must be > 0");
    }
    return out;
}

Violations check_reflect(const ReflectTemplate& t)
{
    Violations out;
    if (t.canvas.width <= 0 || t.canvas.height <= 0)
        add(out, "canvas", "dimensions must be positive");
    if (!(t.optical_center.x >= 0.0 && t.optical_center.x <= t.canvas.width - 1 && t.optical_center.y >= 0.0 &&
          t.optical_center.y <= t.canvas.height - 1))
        add(out, "optical_center", "must lie inside the canvas");
    if (t.irises.empty())
        add(out, "irises", "at least one iris is required");
    for (std::size_t i = 0; i < t.irises.size(); ++i) {
        auto v = check_iris(t.irises[i], "irises[" + std::to_string(i) + "]");
        out.insert(out.end(), v.begin(), v.end());
    }
    return out;
}

long reflection_paths(int surfaces)
{
    if (surfaces < 0)
        throw InputError("surface count must be >= 0");
    return static_cast<long>(surfaces) * (surfaces - 1) / 2;
}

std::vector<PlacedIris> place_irises(const ReflectTemplate& t, Point light_pos)
{
    if (!(light_pos.x >= 0.0 && light_pos.x <= t.canvas.width - 1 && light_pos.y >= 0.0 &&
          light_pos.y <= t.canvas.height - 1))
        throw InputError("light position lies outside the canvas");
    std::vector<PlacedIris> out;
    out.reserve(t.irises.size());
    const Point oc = t.optical_center;
    for (const auto& iris : t.irises)
        out.push_back({&iris, {oc.x + iris.k * (light_pos.x - oc.x), oc.y + iris.k * (light_pos.y - oc.y)}});
    return out;
}

double iris_signed_distance(const IrisSpec& s, double dx, double dy) noexcept
{
    return std::visit(overloaded{
                          [&](const DiscIris&) { return std::hypot(dx, dy) - s.size; },
                          [&](const PolygonIris& p) { return polygon_sd(p.sides, p.rotation, s.size, dx, dy); },
                          [&](const RingIris& r) {
                              const double d = std::hypot(dx, dy);
                              return std::max(d - s.size, r.inner_ratio * s.size - d);
                          },
                          [&](const LatticeIris& l) {
                              double sd = std::numeric_limits<double>::infinity();
                              for (int row = 0; row < l.rows; ++row)
                                  for (int col = 0; col < l.cols; ++col) {
                                      const double cx = (col - 0.5 * (l.cols - 1)) * l.pitch;
                                      const double cy = (row - 0.5 * (l.rows - 1)) * l.pitch;
                                      sd = std::min(sd, std::hypot(dx - cx, dy - cy) - l.cell_radius);
                                  }
                              return sd;
                          },
                      },
                      s.shape);
}

EncodedImage render_iris(const IrisSpec& spec, Point center, Extent canvas)
{
    require_valid(check_iris(spec));
    EncodedImage out(canvas.width, canvas.height, 3);
    if (spec.opacity == 0.0)
        return out;
    const Box box = bounds(center, iris_extent(spec), canvas);
    for (int y = box.y0; y <= box.y1; ++y)
        for (int x = box.x0; x <= box.x1; ++x) {
            const float cov = coverage(iris_signed_distance(spec, x - center.x, y - center.y), spec.edge_feather);
            if (cov == 0.0f)
                continue;
            for (int c = 0; c < 3; ++c)
                out.at(x, y, c) = std::min(1.0f, static_cast<float>(spec.rgb[c] * spec.opacity) * cov);
        }
    return out;
}

EncodedImage apply_clipping(const EncodedImage& iris, const IrisSpec& spec, Point center, Point toward_light,
                            double distance)
{
    if (!spec.clip)
        throw InputError("iris has no clipping parameters");
    if (distance <= spec.clip->threshold)
        return iris;
    const double norm = std::hypot(toward_light.x, toward_light.y);
    const double ux = norm > 0.0 ? toward_light.x / norm : 0.0;
    const double uy = norm > 0.0 ? toward_light.y / norm : 0.0;
    const double shift = distance - spec.clip->threshold;
    const Point mc{center.x + ux * shift, center.y + uy * shift};

    // Convex mask of the same outline family; rings and lattices use their disc hull.
    IrisSpec mask = spec;
    mask.size = spec.size * spec.clip->mask_scale;
    if (const auto* l = std::get_if<LatticeIris>(&spec.shape))
        mask.size = (std::hypot(0.5 * (l->cols - 1) * l->pitch, 0.5 * (l->rows - 1) * l->pitch) + l->cell_radius) *
                    spec.clip->mask_scale;
    if (!std::holds_alternative<PolygonIris>(spec.shape))
        mask.shape = DiscIris{};

    EncodedImage out = iris;
    for (int y = 0; y < out.height(); ++y) {
        float* row = out.row(y);
        for (int x = 0; x < out.width(); ++x) {
            bool lit = false;
            for (int c = 0; c < out.channels(); ++c)
                lit = lit || row[x * out.channels() + c] != 0.0f;
            if (!lit)
                continue;
            const float cov = coverage(iris_signed_distance(mask, x - mc.x, y - mc.y), spec.edge_feather);
            for (int c = 0; c < out.channels(); ++c)
                row[x * out.channels() + c] *= cov;
        }
    }
    return out;
}

EncodedImage render_caustics(const IrisSpec& spec, Point center, double distance, Extent canvas)
{
    if (!spec.caustics)
        throw InputError("iris has no caustics parameters");
    require_valid(check_iris(spec));
    EncodedImage out(canvas.width, canvas.height, 3);
    const double opacity = std::min(1.0, spec.caustics->opacity_slope * std::max(distance, 0.0));
    if (opacity == 0.0)
        return out;
    const Box box = bounds(center, iris_extent(spec), canvas);
    for (int y = box.y0; y <= box.y1; ++y)
        for (int x = box.x0; x <= box.x1; ++x) {
            const double dx = x - center.x, dy = y - center.y;
            const float cov = coverage(iris_signed_distance(spec, dx, dy), spec.edge_feather);
            if (cov == 0.0f)
                continue;
            const double r = std::min(std::hypot(dx, dy) / spec.size, 1.0);
            const double rings = (0.5 + 0.5 * std::cos(2.0 * kPi * kCausticRings * r)) * (1.0 - 0.5 * r);
            for (int c = 0; c < 3; ++c)
                out.at(x, y, c) = static_cast<float>(opacity * rings * spec.rgb[c] * cov);
        }
    return out;
}

EncodedImage render_reflect(const ReflectTemplate& t, Point light_pos)
{
    require_valid(check_reflect(t));
    EncodedImage out(t.canvas.width, t.canvas.height, 3);
    for (const auto& placed : place_irises(t, light_pos)) {
        const IrisSpec& spec = *placed.spec;
        const double distance = std::hypot(placed.center.x - light_pos.x, placed.center.y - light_pos.y);
        EncodedImage iris = render_iris(spec, placed.center, t.canvas);
        if (spec.caustics)
            screen_into(iris, render_caustics(spec, placed.center, distance, t.canvas));
        if (spec.clip)
            iris = apply_clipping(iris, spec, placed.center,
                                  {light_pos.x - placed.center.x, light_pos.y - placed.center.y}, distance);
        screen_into(out, iris);
    }
    return out;
}

}  // namespace nightflare
