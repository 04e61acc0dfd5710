// Copyright Contributors to the nightflare project.
// SPDX-License-Identifier: Apache-2.0

/// \file
/// Training-pair assembly. A flare (with its separate light-source layer) is
/// augmented, linearized and added to an augmented background crop. The
/// sample carries the corrupted input, the flare-free target (background plus
/// light source), the flare ground truth and a component segmentation map.

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nightflare/image.hpp"
#include "nightflare/imagecore.hpp"
#include "nightflare/png_io.hpp"
#include "nightflare/violation.hpp"

namespace nightflare {

struct AugmentationParams {
    double gamma = 2.2;
    AffineParams affine;  ///< rotation, translation, shear, scale and both flips
    double blur_sigma = 0.0;
    Rgb color_offset{0.0f, 0.0f, 0.0f};
    double bg_gain = 1.0;
    double noise_variance = 0.0;
    double crop_u = 0.5;  ///< background crop origin as a fraction of the free range
    double crop_v = 0.5;
    std::uint64_t noise_seed = 0;

    friend bool operator==(const AugmentationParams&, const AugmentationParams&) = default;
};

/// Range bounds of the sampling distributions.
namespace augment_range {
inline constexpr double translate = 300.0;
inline constexpr double shear = 0.3490658503988659;  // pi / 9
inline constexpr double scale_lo = 0.8, scale_hi = 1.5;
inline constexpr double blur_lo = 0.1, blur_hi = 3.0;
inline constexpr double color_offset = 0.02;
inline constexpr double gain_lo = 0.5, gain_hi = 1.2;
inline constexpr double noise_scale = 0.01;
}  // namespace augment_range

/// Draws every field from its distribution; deterministic in `seed`.
AugmentationParams sample_augmentation(std::uint64_t seed);

/// Violations for fields outside the sampling ranges.
Violations check_augmentation(const AugmentationParams& p);

/// Decodes both images with p.gamma, applies the same warp and blur to
/// both, adds the color offset to the flare only and floors at zero.
/// Output has `out` extent with centers aligned.
std::pair<LinearImage, LinearImage> augment_flare_pair(const EncodedImage& flare, const EncodedImage& light,
                                                       const AugmentationParams& p, Extent out);
std::pair<LinearImage, LinearImage> augment_flare_pair(const EncodedImage& flare, const EncodedImage& light,
                                                       const AugmentationParams& p);

/// Crop, decode, gain, additive Gaussian noise, floor at zero. Throws
/// InputError when the background is smaller than the crop.
LinearImage augment_background(const EncodedImage& bg, const AugmentationParams& p, Extent crop);

enum class SegClass : std::uint8_t { background = 0, glare = 1, streak = 2, light_source = 3 };

/// One class per pixel. Palette: background black, glare yellow, streak red,
/// light source blue.
class SegMap {
public:
    static constexpr std::array<PaletteEntry, 4> palette{
        PaletteEntry{0, 0, 0}, PaletteEntry{255, 255, 0}, PaletteEntry{255, 0, 0}, PaletteEntry{0, 0, 255}};

    SegMap() = default;
    SegMap(int width, int height);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    SegClass at(int x, int y) const noexcept { return static_cast<SegClass>(classes_[index(x, y)]); }
    void set(int x, int y, SegClass c) noexcept { classes_[index(x, y)] = static_cast<std::uint8_t>(c); }
    std::size_t count(SegClass c) const noexcept;

    IndexedImage to_indexed() const;
    static SegMap from_indexed(const IndexedImage& img);
    std::vector<std::uint8_t> encode_png() const;
    static SegMap decode_png(std::span<const std::uint8_t> bytes);

    friend bool operator==(const SegMap&, const SegMap&) = default;

private:
    std::size_t index(int x, int y) const noexcept { return static_cast<std::size_t>(y) * width_ + x; }

    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> classes_;
};

struct MaskThresholds {
    double light = 0.5;
    double streak = 0.05;
    double glare = 0.02;
};

/// Priority light > streak > glare > background on linear luminance. The
/// glare layer should include shimmer.
SegMap derive_masks(const LinearImage& light, const LinearImage& streak, const LinearImage& glare,
                    const MaskThresholds& t = {});

/// A flare ready for composition. Component layers are present for rendered
/// templates and absent for captured flares; without them everything in
/// flare - light above the glare threshold is classed as glare.
struct FlareSource {
    std::string id;
    EncodedImage flare;
    EncodedImage light;
    std::optional<EncodedImage> glare;  ///< glare and shimmer
    std::optional<EncodedImage> streak;
};

struct Provenance {
    std::string source_id;
    std::uint64_t seed = 0;
    AugmentationParams params;
};

struct PairedSample {
    EncodedImage input;       ///< I
    EncodedImage flare_free;  ///< I0
    LinearImage flare_gt;     ///< F, linear
    EncodedImage light_source;
    SegMap seg;
    Provenance provenance;
};

struct ComposeOptions {
    Extent crop{512, 512};
    MaskThresholds thresholds;
};

PairedSample compose_pair(const EncodedImage& bg, const FlareSource& src, std::uint64_t seed,
                          const ComposeOptions& opts = {});
PairedSample compose_with_params(const EncodedImage& bg, const FlareSource& src, const AugmentationParams& p,
                                 std::uint64_t seed, const ComposeOptions& opts = {});

/// Largest |clip(decode(I0) + F) - decode(I)| over samples whose flare-free
/// value is below saturation.
double reconstruction_error(const PairedSample& s);

/// F as stored on disk: encode(min(F, 1)) with the sample's gamma.
EncodedImage encode_flare_gt(const PairedSample& s);

struct BaselineOptions {
    double threshold = 0.97;
    int opening_radius = 2;
    double feather_sigma = 3.0;
};

struct BaselineResult {
    EncodedImage mask;     ///< 1 channel, feathered
    EncodedImage blended;  ///< the input seen through the mask
};

/// Luminance threshold, morphological opening with a disc, Gaussian feather.
BaselineResult extract_light_source_baseline(const EncodedImage& img, const BaselineOptions& opts = {});

/// prediction * (1 - mask) + source * mask.
EncodedImage paste_light_source(const EncodedImage& prediction, const EncodedImage& source,
                                const EncodedImage& mask);

/// Disc erosion followed by disc dilation of a binary mask.
std::vector<std::uint8_t> morphological_open(const std::vector<std::uint8_t>& mask, int width, int height,
                                             int radius);

}  // namespace nightflare
