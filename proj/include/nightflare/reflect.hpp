// Copyright Contributors to the nightflare project.
// SPDX-License-Identifier: Apache-2.0

/// \file
/// Reflective flare (ghost) renderer. Irises sit on the line through the
/// optical center and the light source, at center + k * (light - center).
/// Each iris may be clipped by a displaced mask once it is far enough from
/// the light, and may carry a caustics texture whose strength grows with
/// that distance.

#pragma once

#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "nightflare/image.hpp"
#include "nightflare/violation.hpp"

namespace nightflare {

struct DiscIris {
    friend bool operator==(const DiscIris&, const DiscIris&) = default;
};

/// Regular polygon with circumradius = IrisSpec::size, a vertex pointing up
/// when rotation is 0.
struct PolygonIris {
    int sides = 6;
    double rotation = 0.0;
    friend bool operator==(const PolygonIris&, const PolygonIris&) = default;
};

struct RingIris {
    double inner_ratio = 0.7;
    friend bool operator==(const RingIris&, const RingIris&) = default;
};

/// rows x cols discs on a square grid centered on the iris center.
struct LatticeIris {
    int rows = 2;
    int cols = 3;
    double pitch = 12.0;
    double cell_radius = 4.0;
    friend bool operator==(const LatticeIris&, const LatticeIris&) = default;
};

using IrisShape = std::variant<DiscIris, PolygonIris, RingIris, LatticeIris>;

struct CausticsSpec {
    double opacity_slope = 0.002;  ///< opacity per pixel of iris-light distance
    friend bool operator==(const CausticsSpec&, const CausticsSpec&) = default;
};

struct ClipSpec {
    double threshold = 150.0;  ///< pixels of iris-light distance before clipping starts
    double mask_scale = 1.0;
    friend bool operator==(const ClipSpec&, const ClipSpec&) = default;
};

struct IrisSpec {
    double k = -1.0;
    double size = 20.0;
    Rgb rgb{0.3f, 0.5f, 0.4f};
    double opacity = 0.5;
    IrisShape shape = DiscIris{};
    double edge_feather = 1.0;
    std::optional<CausticsSpec> caustics;
    std::optional<ClipSpec> clip;

    friend bool operator==(const IrisSpec&, const IrisSpec&) = default;
};

struct ReflectTemplate {
    Extent canvas{512, 512};
    Point optical_center{256.0, 256.0};
    std::vector<IrisSpec> irises;

    friend bool operator==(const ReflectTemplate&, const ReflectTemplate&) = default;
};

struct PlacedIris {
    const IrisSpec* spec;
    Point center;
};

Violations check_iris(const IrisSpec& s, const std::string& path = "iris");
Violations check_reflect(const ReflectTemplate& t);

/// Number of two-bounce ghost paths in a lens with `surfaces` optical
/// surfaces: one per unordered pair of surfaces, n(n-1)/2.
long reflection_paths(int surfaces);

/// Throws InputError when light_pos is outside the canvas.
std::vector<PlacedIris> place_irises(const ReflectTemplate& t, Point light_pos);

/// Signed distance to the iris outline (negative inside), relative to its center.
double iris_signed_distance(const IrisSpec& s, double dx, double dy) noexcept;

EncodedImage render_iris(const IrisSpec& spec, Point center, Extent canvas);

/// Multiplies the iris by a convex mask of size mask_scale * size that is
/// shifted toward the light by (distance - threshold) along `toward_light`.
/// Unchanged when distance <= threshold. Throws InputError without spec.clip.
EncodedImage apply_clipping(const EncodedImage& iris, const IrisSpec& spec, Point center, Point toward_light,
                            double distance);

/// Cosine ring texture inside the iris, opacity min(1, slope * distance).
/// Throws InputError without spec.caustics.
EncodedImage render_caustics(const IrisSpec& spec, Point center, double distance, Extent canvas);

EncodedImage render_reflect(const ReflectTemplate& t, Point light_pos);

}  // namespace nightflare
