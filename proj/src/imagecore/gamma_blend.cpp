// Copyright Contributors to the nightflare project.
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <string>

#include "nightflare/imagecore.hpp"
#include "nightflare/simd.hpp"

namespace nightflare {

GammaCodec::GammaCodec(double gamma)
    : gamma_(gamma), gamma_f_(static_cast<float>(gamma)), inv_gamma_f_(static_cast<float>(1.0 / gamma))
{
    if (!(gamma >= min_gamma && gamma <= max_gamma))
        throw InputError("gamma must be in [1.8, 2.2], got " + std::to_string(gamma));
}

float GammaCodec::decode(float x) const noexcept { return std::pow(x, gamma_f_); }

float GammaCodec::encode(float y) const noexcept { return std::pow(y, inv_gamma_f_); }

DecodedImage gamma_decode_with_alpha(const EncodedImage& img, const GammaCodec& codec)
{
    img.validate();
    const int color_channels = img.channels() == 4 ? 3 : img.channels();
    LinearImage color(img.width(), img.height(), color_channels);
    std::optional<EncodedImage> alpha;
    if (img.channels() == 4)
        alpha.emplace(img.width(), img.height(), 1);

    const auto src = img.samples();
    auto dst = color.samples();
    const std::size_t pixels = img.pixel_count();
    const int sc = img.channels();
    for (std::size_t i = 0; i < pixels; ++i) {
        for (int c = 0; c < color_channels; ++c)
            dst[i * color_channels + c] = codec.decode(src[i * sc + c]);
        if (alpha)
            alpha->samples()[i] = src[i * sc + 3];
    }
    return {std::move(color), std::move(alpha)};
}

LinearImage gamma_decode(const EncodedImage& img, const GammaCodec& codec)
{
    return gamma_decode_with_alpha(img, codec).color;
}

EncodedImage gamma_encode(const LinearImage& img, const GammaCodec& codec)
{
    const auto src = img.samples();
    std::vector<float> out(src.size());
    for (std::size_t i = 0; i < src.size(); ++i) {
        const float v = src[i];
        if (!(v >= 0.0f && v <= 1.0f))
            throw InputError("gamma_encode: sample " + std::to_string(i) + " = " + std::to_string(v) +
                             " outside [0,1]");
        out[i] = codec.encode(v);
    }
    return EncodedImage(img.width(), img.height(), img.channels(), std::move(out));
}

EncodedImage screen_blend(const EncodedImage& a, const EncodedImage& b)
{
    require_same_shape(a, b, "screen_blend");
    EncodedImage out(a.width(), a.height(), a.channels());
    simd::active().screen(a.samples().data(), b.samples().data(), out.samples().data(), a.sample_count());
    return out;
}

void screen_into(EncodedImage& acc, const EncodedImage& layer)
{
    require_same_shape(acc, layer, "screen_into");
    float* p = acc.samples().data();
    simd::active().screen(p, layer.samples().data(), p, acc.sample_count());
}

LinearImage linear_add_clip(const LinearImage& a, const LinearImage& b)
{
    require_same_shape(a, b, "linear_add_clip");
    LinearImage out(a.width(), a.height(), a.channels());
    simd::active().add_clip(a.samples().data(), b.samples().data(), out.samples().data(), a.sample_count());
    return out;
}

LinearImage clip_unit(LinearImage img)
{
    for (float& v : img.samples())
        v = std::min(v, 1.0f);
    return img;
}

}  // namespace nightflare
