// Copyright Contributors to the nightflare project.
// SPDX-License-Identifier: Apache-2.0

/// \file
/// Raster primitives shared by the flare renderers and the compositor.
///
/// Pixel coordinates: sample (x, y) sits at the integer point (x, y); the
/// geometric center of a WxH raster is ((W-1)/2, (H-1)/2).

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "nightflare/image.hpp"

namespace nightflare {

/// Power-law transfer curve: decode(x) = x^gamma, encode(y) = y^(1/gamma).
class GammaCodec {
public:
    static constexpr double min_gamma = 1.8;
    static constexpr double max_gamma = 2.2;

    /// Throws InputError unless gamma is in [1.8, 2.2].
    explicit GammaCodec(double gamma = 2.2);

    double gamma() const noexcept { return gamma_; }

    float decode(float x) const noexcept;
    float encode(float y) const noexcept;

    friend bool operator==(const GammaCodec&, const GammaCodec&) = default;

private:
    double gamma_;
    float gamma_f_;
    float inv_gamma_f_;
};

/// Color channels decoded to linear radiance. A fourth (alpha) channel is
/// dropped; use gamma_decode_with_alpha to keep it.
LinearImage gamma_decode(const EncodedImage& img, const GammaCodec& codec);

struct DecodedImage {
    LinearImage color;
    std::optional<EncodedImage> alpha;
};

DecodedImage gamma_decode_with_alpha(const EncodedImage& img, const GammaCodec& codec);

/// Requires every sample in [0,1]; clip first.
EncodedImage gamma_encode(const LinearImage& img, const GammaCodec& codec);

/// 1 - (1-a)(1-b) per sample.
EncodedImage screen_blend(const EncodedImage& a, const EncodedImage& b);

/// Screen-blends `layer` into `acc` in place.
void screen_into(EncodedImage& acc, const EncodedImage& layer);

/// clamp(a + b, 0, 1) per sample.
LinearImage linear_add_clip(const LinearImage& a, const LinearImage& b);

/// min(x, 1) per sample.
LinearImage clip_unit(LinearImage img);

struct AffineParams {
    double rotation = 0.0;  ///< radians; [cos -sin; sin cos] applied in pixel coordinates (y down)
    double tx = 0.0;        ///< pixels
    double ty = 0.0;        ///< pixels
    double shear = 0.0;     ///< radians; x += tan(shear) * y
    double scale = 1.0;
    bool flip_h = false;
    bool flip_v = false;

    bool is_identity() const noexcept;

    friend bool operator==(const AffineParams&, const AffineParams&) = default;
};

Point image_center(Extent e) noexcept;

/// Maps a source point to its warped position. Flip, then scale, shear,
/// rotation about `src_center`, which lands on `dst_center`, then
/// translation.
Point affine_forward(const AffineParams& p, Point src, Point src_center, Point dst_center) noexcept;
Point affine_inverse(const AffineParams& p, Point dst, Point src_center, Point dst_center);

/// Same-shape warp about `center` with bilinear sampling; samples that fall
/// outside the source are zero. Throws InputError for scale <= 0.
template <class D>
Raster<D> affine_warp(const Raster<D>& img, const AffineParams& p, Point center);

/// Warp into a raster of a different size; the source center maps to the
/// destination center before translation.
template <class D>
Raster<D> affine_warp_into(const Raster<D>& img, const AffineParams& p, Extent out);

/// Bilinear sample with zero outside the raster.
template <class D>
float sample_bilinear(const Raster<D>& img, double x, double y, int c) noexcept;

/// Normalized 1-D Gaussian taps, radius ceil(3 sigma) (at least 1).
std::vector<float> gaussian_kernel(double sigma);

/// Separable Gaussian with clamped edges. sigma = 0 returns the input.
template <class D>
Raster<D> gaussian_blur(const Raster<D>& img, double sigma);

/// Number of samples radial_blur takes for a pixel at distance r.
int radial_blur_samples(double amount, double r) noexcept;

/// Zoom blur: every pixel averages samples along the ray from `center`
/// through it, spread over amount * r centered on the pixel.
template <class D>
Raster<D> radial_blur(const Raster<D>& img, Point center, double amount);

/// Single-channel value noise: octaves of bilinear lattice noise, each
/// doubling frequency and halving amplitude, normalized to [0,1].
EncodedImage fractal_noise(int width, int height, int octaves, double base_scale, std::uint64_t seed);

/// 64-bit mixer used for every seeded hash in the library.
std::uint64_t mix64(std::uint64_t x) noexcept;

}  // namespace nightflare
