// Copyright Contributors to the nightflare project.
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "nightflare/compose.hpp"
#include "nightflare/simd.hpp"

namespace nightflare {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void add(Violations& out, const std::string& path, std::string message)
{
    out.push_back({Violation::Kind::semantic, path, std::move(message)});
}

void check_range(Violations& out, const std::string& path, double v, double lo, double hi)
{
    if (!(v >= lo && v <= hi))
        add(out, path, "outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
}

LinearImage luminance(const LinearImage& img)
{
    LinearImage out(img.width(), img.height(), 1);
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
            out.at(x, y, 0) = std::max(0.0f, luminance_at(img, x, y));
    return out;
}

/// Decode, warp into `out`, blur. No color offset.
LinearImage geometric(const LinearImage& decoded, const AugmentationParams& p, Extent out)
{
    LinearImage warped = affine_warp_into(decoded, p.affine, out);
    return p.blur_sigma > 0.0 ? gaussian_blur(warped, p.blur_sigma) : warped;
}

LinearImage add_offset_floor(const LinearImage& img, const Rgb& offset)
{
    if (offset == Rgb{0.0f, 0.0f, 0.0f})
        return img;
    LinearImage out(img.width(), img.height(), img.channels());
    const auto in = img.samples();
    auto dst = out.samples();
    const int c = img.channels();
    for (std::size_t i = 0; i < in.size(); ++i)
        dst[i] = std::max(in[i] + offset[i % c], 0.0f);
    return out;
}

template <void (*simd::KernelTable::*Op)(const float*, const float*, float*, std::size_t)>
LinearImage binary(const LinearImage& a, const LinearImage& b)
{
    require_same_shape(a, b, "layer arithmetic");
    LinearImage out(a.width(), a.height(), a.channels());
    (simd::active().*Op)(a.samples().data(), b.samples().data(), out.samples().data(), a.sample_count());
    return out;
}

EncodedImage encode_clipped(const LinearImage& img, const GammaCodec& codec)
{
    return gamma_encode(clip_unit(img), codec);
}

std::vector<std::pair<int, int>> disc_offsets(int radius)
{
    std::vector<std::pair<int, int>> out;
    for (int dy = -radius; dy <= radius; ++dy)
        for (int dx = -radius; dx <= radius; ++dx)
            if (dx * dx + dy * dy <= radius * radius)
                out.emplace_back(dx, dy);
    return out;
}

}  // namespace

AugmentationParams sample_augmentation(std::uint64_t seed)
{
    namespace r = augment_range;
    std::mt19937_64 rng(seed);
    auto uniform = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
    std::bernoulli_distribution coin(0.5);
    std::normal_distribution<double> normal(0.0, 1.0);

    AugmentationParams p;
    p.gamma = uniform(GammaCodec::min_gamma, GammaCodec::max_gamma);
    p.affine.rotation = uniform(0.0, kTwoPi);
    if (p.affine.rotation >= kTwoPi)
        p.affine.rotation = 0.0;
    p.affine.tx = uniform(-r::translate, r::translate);
    p.affine.ty = uniform(-r::translate, r::translate);
    p.affine.shear = uniform(-r::shear, r::shear);
    p.affine.scale = uniform(r::scale_lo, r::scale_hi);
    p.affine.flip_h = coin(rng);
    p.affine.flip_v = coin(rng);
    p.blur_sigma = uniform(r::blur_lo, r::blur_hi);
    for (float& c : p.color_offset)
        c = static_cast<float>(uniform(-r::color_offset, r::color_offset));
    p.bg_gain = uniform(r::gain_lo, r::gain_hi);
    const double z = normal(rng);
    p.noise_variance = r::noise_scale * z * z;
    p.crop_u = uniform(0.0, 1.0);
    p.crop_v = uniform(0.0, 1.0);
    p.noise_seed = rng();
    return p;
}

Violations check_augmentation(const AugmentationParams& p)
{
    namespace r = augment_range;
    Violations out;
    check_range(out, "gamma", p.gamma, GammaCodec::min_gamma, GammaCodec::max_gamma);
    if (!(p.affine.rotation >= 0.0 && p.affine.rotation < kTwoPi))
        add(out, "affine.rotation", "outside [0, 2*pi)");
    check_range(out, "affine.tx", p.affine.tx, -r::translate, r::translate);
    check_range(out, "affine.ty", p.affine.ty, -r::translate, r::translate);
    check_range(out, "affine.shear", p.affine.shear, -r::shear, r::shear);
    check_range(out, "affine.scale", p.affine.scale, r::scale_lo, r::scale_hi);
    check_range(out, "blur_sigma", p.blur_sigma, r::blur_lo, r::blur_hi);
    for (int c = 0; c < 3; ++c)
        check_range(out, "color_offset[" + std::to_string(c) + "]", p.color_offset[c], -r::color_offset,
                    r::color_offset);
    check_range(out, "bg_gain", p.bg_gain, r::gain_lo, r::gain_hi);
    if (!(p.noise_variance >= 0.0) || !std::isfinite(p.noise_variance))
        add(out, "noise_variance", "must be >= 0");
    check_range(out, "crop_u", p.crop_u, 0.0, 1.0);
    check_range(out, "crop_v", p.crop_v, 0.0, 1.0);
    return out;
}

std::pair<LinearImage, LinearImage> augment_flare_pair(const EncodedImage& flare, const EncodedImage& light,
                                                       const AugmentationParams& p, Extent out)
{
    require_same_shape(flare, light, "augment_flare_pair");
    const GammaCodec codec(p.gamma);
    LinearImage f = geometric(gamma_decode(flare, codec), p, out);
    LinearImage l = geometric(gamma_decode(light, codec), p, out);
    return {add_offset_floor(f, p.color_offset), std::move(l)};
}

std::pair<LinearImage, LinearImage> augment_flare_pair(const EncodedImage& flare, const EncodedImage& light,
                                                       const AugmentationParams& p)
{
    return augment_flare_pair(flare, light, p, flare.extent());
}

LinearImage augment_background(const EncodedImage& bg, const AugmentationParams& p, Extent crop)
{
    if (bg.width() < crop.width || bg.height() < crop.height)
        throw InputError("background " + std::to_string(bg.width()) + "x" + std::to_string(bg.height()) +
                         " is smaller than the " + std::to_string(crop.width) + "x" +
                         std::to_string(crop.height) + " crop");
    if (!(p.bg_gain >= 0.0) || !(p.noise_variance >= 0.0))
        throw InputError("background gain and noise variance must be >= 0");
    const GammaCodec codec(p.gamma);
    const int x0 = static_cast<int>(std::floor(std::clamp(p.crop_u, 0.0, 1.0) * (bg.width() - crop.width)));
    const int y0 = static_cast<int>(std::floor(std::clamp(p.crop_v, 0.0, 1.0) * (bg.height() - crop.height)));
    const int bc = bg.channels();
    const float gain = static_cast<float>(p.bg_gain);

    std::mt19937_64 rng(p.noise_seed);
    const bool noisy = p.noise_variance > 0.0;
    std::normal_distribution<float> noise(0.0f, noisy ? static_cast<float>(std::sqrt(p.noise_variance)) : 1.0f);

    LinearImage out(crop.width, crop.height, 3);
    for (int y = 0; y < crop.height; ++y) {
        const float* src = bg.row(y0 + y) + static_cast<std::size_t>(x0) * bc;
        float* dst = out.row(y);
        for (int x = 0; x < crop.width; ++x)
            for (int c = 0; c < 3; ++c) {
                const float e = src[x * bc + (bc == 1 ? 0 : c)];
                float v = codec.decode(e) * gain;
                if (noisy)
                    v += noise(rng);
                dst[x * 3 + c] = std::max(v, 0.0f);
            }
    }
    return out;
}

SegMap::SegMap(int width, int height) : width_(width), height_(height)
{
    if (width <= 0 || height <= 0)
        throw ShapeError("segmentation map dimensions must be positive");
    classes_.assign(static_cast<std::size_t>(width) * height, 0);
}

std::size_t SegMap::count(SegClass c) const noexcept
{
    return static_cast<std::size_t>(std::count(classes_.begin(), classes_.end(), static_cast<std::uint8_t>(c)));
}

IndexedImage SegMap::to_indexed() const
{
    return {width_, height_, classes_, std::vector<PaletteEntry>(palette.begin(), palette.end())};
}

SegMap SegMap::from_indexed(const IndexedImage& img)
{
    SegMap out(img.width, img.height);
    if (img.indices.size() != out.classes_.size())
        throw ShapeError("indexed image data does not match its dimensions");
    for (std::size_t i = 0; i < img.indices.size(); ++i) {
        const std::uint8_t idx = img.indices[i];
        if (idx >= img.palette.size())
            throw InputError("palette index out of range");
        const auto it = std::find(palette.begin(), palette.end(), img.palette[idx]);
        if (it == palette.end())
            throw InputError("color is not a segmentation class");
        out.classes_[i] = static_cast<std::uint8_t>(it - palette.begin());
    }
    return out;
}

std::vector<std::uint8_t> SegMap::encode_png() const { return encode_indexed_png(to_indexed()); }

SegMap SegMap::decode_png(std::span<const std::uint8_t> bytes)
{
    return from_indexed(decode_indexed_png(bytes, palette));
}

SegMap derive_masks(const LinearImage& light, const LinearImage& streak, const LinearImage& glare,
                    const MaskThresholds& t)
{
    if (light.extent() != streak.extent() || light.extent() != glare.extent())
        throw ShapeError("derive_masks: layers differ in size");
    SegMap out(light.width(), light.height());
    for (int y = 0; y < light.height(); ++y)
        for (int x = 0; x < light.width(); ++x) {
            if (luminance_at(light, x, y) > t.light)
                out.set(x, y, SegClass::light_source);
            else if (luminance_at(streak, x, y) > t.streak)
                out.set(x, y, SegClass::streak);
            else if (luminance_at(glare, x, y) > t.glare)
                out.set(x, y, SegClass::glare);
        }
    return out;
}

PairedSample compose_with_params(const EncodedImage& bg, const FlareSource& src, const AugmentationParams& p,
                                 std::uint64_t seed, const ComposeOptions& opts)
{
    require_same_shape(src.flare, src.light, "flare source");
    const GammaCodec codec(p.gamma);
    const Extent crop = opts.crop;

    const LinearImage background = augment_background(bg, p, crop);
    const LinearImage flare_geo = geometric(gamma_decode(src.flare, codec), p, crop);
    const LinearImage light = geometric(gamma_decode(src.light, codec), p, crop);
    const LinearImage flare = add_offset_floor(flare_geo, p.color_offset);

    // The light source is part of the flare image; a negative offset or
    // resampling must not push the flare below it.
    const LinearImage flare_full = binary<&simd::KernelTable::maximum>(flare, light);

    PairedSample s;
    s.input = encode_clipped(linear_add_clip(background, flare_full), codec);
    s.flare_free = encode_clipped(linear_add_clip(background, light), codec);
    s.flare_gt = binary<&simd::KernelTable::sub_floor>(flare_full, light);
    s.light_source = encode_clipped(light, codec);

    const LinearImage light_lum = luminance(light);
    if (src.glare && src.streak) {
        const LinearImage streak = geometric(luminance(gamma_decode(*src.streak, codec)), p, crop);
        const LinearImage glare = geometric(luminance(gamma_decode(*src.glare, codec)), p, crop);
        s.seg = derive_masks(light_lum, streak, glare, opts.thresholds);
    } else {
        const LinearImage residual = luminance(binary<&simd::KernelTable::sub_floor>(flare_geo, light));
        s.seg = derive_masks(light_lum, LinearImage(crop.width, crop.height, 1), residual, opts.thresholds);
    }
    s.provenance = {src.id, seed, p};
    return s;
}

PairedSample compose_pair(const EncodedImage& bg, const FlareSource& src, std::uint64_t seed,
                          const ComposeOptions& opts)
{
    return compose_with_params(bg, src, sample_augmentation(seed), seed, opts);
}

double reconstruction_error(const PairedSample& s)
{
    const GammaCodec codec(s.provenance.params.gamma);
    const auto i0 = s.flare_free.samples();
    const auto in = s.input.samples();
    const auto f = s.flare_gt.samples();
    double worst = 0.0;
    for (std::size_t i = 0; i < i0.size(); ++i) {
        const float base = codec.decode(i0[i]);
        if (!(base < 1.0f))
            continue;
        const double rebuilt = std::min(1.0f, base + f[i]);
        worst = std::max(worst, std::abs(rebuilt - static_cast<double>(codec.decode(in[i]))));
    }
    return worst;
}

EncodedImage encode_flare_gt(const PairedSample& s)
{
    return encode_clipped(s.flare_gt, GammaCodec(s.provenance.params.gamma));
}

std::vector<std::uint8_t> morphological_open(const std::vector<std::uint8_t>& mask, int width, int height,
                                             int radius)
{
    if (mask.size() != static_cast<std::size_t>(width) * height)
        throw ShapeError("mask size does not match its dimensions");
    if (radius <= 0)
        return mask;
    const auto offsets = disc_offsets(radius);
    auto pass = [&](const std::vector<std::uint8_t>& in, bool erode) {
        std::vector<std::uint8_t> out(in.size(), 0);
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x) {
                bool v = erode;
                for (const auto& [dx, dy] : offsets) {
                    const int sx = x + dx, sy = y + dy;
                    if (sx < 0 || sy < 0 || sx >= width || sy >= height)
                        continue;
                    const bool set = in[static_cast<std::size_t>(sy) * width + sx] != 0;
                    if (erode && !set) {
                        v = false;
                        break;
                    }
                    if (!erode && set) {
                        v = true;
                        break;
                    }
                }
                out[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0;
            }
        return out;
    };
    return pass(pass(mask, true), false);
}

BaselineResult extract_light_source_baseline(const EncodedImage& img, const BaselineOptions& opts)
{
    const int w = img.width(), h = img.height();
    std::vector<std::uint8_t> bits(img.pixel_count());
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            bits[static_cast<std::size_t>(y) * w + x] = luminance_at(img, x, y) >= opts.threshold ? 1 : 0;
    bits = morphological_open(bits, w, h, opts.opening_radius);

    EncodedImage mask(w, h, 1);
    for (std::size_t i = 0; i < bits.size(); ++i)
        mask.samples()[i] = bits[i];
    if (opts.feather_sigma > 0.0)
        mask = gaussian_blur(mask, opts.feather_sigma);

    EncodedImage blended(w, h, img.channels());
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < img.channels(); ++c)
                blended.at(x, y, c) = img.at(x, y, c) * mask.at(x, y, 0);
    return {std::move(mask), std::move(blended)};
}

EncodedImage paste_light_source(const EncodedImage& prediction, const EncodedImage& source, const EncodedImage& mask)
{
    require_same_shape(prediction, source, "paste_light_source");
    if (mask.extent() != prediction.extent() || mask.channels() != 1)
        throw ShapeError("paste_light_source: mask must be single-channel and match the image");
    EncodedImage out(prediction.width(), prediction.height(), prediction.channels());
    for (int y = 0; y < out.height(); ++y)
        for (int x = 0; x < out.width(); ++x) {
            const float m = mask.at(x, y, 0);
            for (int c = 0; c < out.channels(); ++c)
                out.at(x, y, c) =
                    std::clamp(prediction.at(x, y, c) * (1.0f - m) + source.at(x, y, c) * m, 0.0f, 1.0f);
        }
    return out;
}

}  // namespace nightflare
