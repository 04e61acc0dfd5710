// Copyright Contributors to the nightflare project.
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <string>
#include <type_traits>

#include "nightflare/imagecore.hpp"
#include "nightflare/simd.hpp"

namespace nightflare {

bool AffineParams::is_identity() const noexcept
{
    return rotation == 0.0 && tx == 0.0 && ty == 0.0 && shear == 0.0 && scale == 1.0 && !flip_h && !flip_v;
}

Point image_center(Extent e) noexcept { return {(e.width - 1) * 0.5, (e.height - 1) * 0.5}; }

Point affine_forward(const AffineParams& p, Point src, Point src_center, Point dst_center) noexcept
{
    double x = src.x - src_center.x;
    double y = src.y - src_center.y;
    if (p.flip_h)
        x = -x;
    if (p.flip_v)
        y = -y;
    x *= p.scale;
    y *= p.scale;
    x += std::tan(p.shear) * y;
    const double c = std::cos(p.rotation), s = std::sin(p.rotation);
    const double rx = c * x - s * y;
    const double ry = s * x + c * y;
    return {rx + dst_center.x + p.tx, ry + dst_center.y + p.ty};
}

namespace {

template <class D>
void clamp_encoded(Raster<D>& img) noexcept
{
    if constexpr (std::is_same_v<D, EncodedDomain>) {
        for (float& v : img.samples())
            v = std::min(v, 1.0f);
    }
}

struct InverseMap {
    // src = m * (dst - origin) + src_center
    double m00, m01, m10, m11;
    Point origin;
    Point src_center;

    Point operator()(double x, double y) const noexcept
    {
        const double dx = x - origin.x, dy = y - origin.y;
        return {m00 * dx + m01 * dy + src_center.x, m10 * dx + m11 * dy + src_center.y};
    }
};

InverseMap make_inverse(const AffineParams& p, Point src_center, Point dst_center)
{
    if (!(p.scale > 0.0) || !std::isfinite(p.scale))
        throw InputError("affine scale must be > 0, got " + std::to_string(p.scale));
    const double c = std::cos(p.rotation), s = std::sin(p.rotation);
    const double t = std::tan(p.shear);
    const double fx = p.flip_h ? -1.0 : 1.0;
    const double fy = p.flip_v ? -1.0 : 1.0;
    const double inv_s = 1.0 / p.scale;
    // Undo rotation: [c s; -s c]. Undo shear: x -= t*y. Undo scale and flip.
    const double r00 = c, r01 = s, r10 = -s, r11 = c;
    const double h00 = r00 - t * r10, h01 = r01 - t * r11;
    const double h10 = r10, h11 = r11;
    return {fx * inv_s * h00, fx * inv_s * h01, fy * inv_s * h10, fy * inv_s * h11,
            {dst_center.x + p.tx, dst_center.y + p.ty}, src_center};
}

template <class D>
Raster<D> warp_impl(const Raster<D>& img, const AffineParams& p, Point src_center, Extent out_extent,
                    Point dst_center)
{
    const InverseMap inv = make_inverse(p, src_center, dst_center);
    const int ch = img.channels();
    Raster<D> out(out_extent.width, out_extent.height, ch);
    const int w = img.width(), h = img.height();
    for (int y = 0; y < out_extent.height; ++y) {
        float* dst = out.row(y);
        for (int x = 0; x < out_extent.width; ++x) {
            const Point s = inv(x, y);
            const double fx0 = std::floor(s.x), fy0 = std::floor(s.y);
            if (fx0 < -1.0 || fy0 < -1.0 || fx0 >= w || fy0 >= h)
                continue;
            const int x0 = static_cast<int>(fx0), y0 = static_cast<int>(fy0);
            const float ax = static_cast<float>(s.x - fx0), ay = static_cast<float>(s.y - fy0);
            const float w00 = (1.0f - ax) * (1.0f - ay), w10 = ax * (1.0f - ay);
            const float w01 = (1.0f - ax) * ay, w11 = ax * ay;
            const bool in_x0 = x0 >= 0, in_x1 = x0 + 1 < w, in_y0 = y0 >= 0, in_y1 = y0 + 1 < h;
            for (int c = 0; c < ch; ++c) {
                float v = 0.0f;
                if (in_y0) {
                    if (in_x0)
                        v += w00 * img.at(x0, y0, c);
                    if (in_x1)
                        v += w10 * img.at(x0 + 1, y0, c);
                }
                if (in_y1) {
                    if (in_x0)
                        v += w01 * img.at(x0, y0 + 1, c);
                    if (in_x1)
                        v += w11 * img.at(x0 + 1, y0 + 1, c);
                }
                dst[static_cast<std::size_t>(x) * ch + c] = v;
            }
        }
    }
    clamp_encoded(out);
    return out;
}

}  // namespace

Point affine_inverse(const AffineParams& p, Point dst, Point src_center, Point dst_center)
{
    return make_inverse(p, src_center, dst_center)(dst.x, dst.y);
}

template <class D>
float sample_bilinear(const Raster<D>& img, double x, double y, int c) noexcept
{
    const double fx0 = std::floor(x), fy0 = std::floor(y);
    if (fx0 < -1.0 || fy0 < -1.0 || fx0 >= img.width() || fy0 >= img.height())
        return 0.0f;
    const int x0 = static_cast<int>(fx0), y0 = static_cast<int>(fy0);
    const float ax = static_cast<float>(x - fx0), ay = static_cast<float>(y - fy0);
    auto tap = [&](int xi, int yi) -> float {
        if (xi < 0 || yi < 0 || xi >= img.width() || yi >= img.height())
            return 0.0f;
        return img.at(xi, yi, c);
    };
    return (1.0f - ax) * (1.0f - ay) * tap(x0, y0) + ax * (1.0f - ay) * tap(x0 + 1, y0) +
           (1.0f - ax) * ay * tap(x0, y0 + 1) + ax * ay * tap(x0 + 1, y0 + 1);
}

template <class D>
Raster<D> affine_warp(const Raster<D>& img, const AffineParams& p, Point center)
{
    if (!(p.scale > 0.0))
        throw InputError("affine scale must be > 0, got " + std::to_string(p.scale));
    if (p.is_identity())
        return img;
    return warp_impl(img, p, center, img.extent(), center);
}

template <class D>
Raster<D> affine_warp_into(const Raster<D>& img, const AffineParams& p, Extent out)
{
    if (!(p.scale > 0.0))
        throw InputError("affine scale must be > 0, got " + std::to_string(p.scale));
    if (p.is_identity() && out == img.extent())
        return img;
    return warp_impl(img, p, image_center(img.extent()), out, image_center(out));
}

std::vector<float> gaussian_kernel(double sigma)
{
    if (!(sigma > 0.0))
        throw InputError("gaussian_kernel: sigma must be > 0");
    const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> taps(2 * radius + 1);
    double total = 0.0;
    for (int k = -radius; k <= radius; ++k) {
        taps[k + radius] = std::exp(-0.5 * (k * k) / (sigma * sigma));
        total += taps[k + radius];
    }
    std::vector<float> out(taps.size());
    for (std::size_t i = 0; i < taps.size(); ++i)
        out[i] = static_cast<float>(taps[i] / total);
    return out;
}

template <class D>
Raster<D> gaussian_blur(const Raster<D>& img, double sigma)
{
    if (!(sigma >= 0.0) || !std::isfinite(sigma))
        throw InputError("gaussian_blur: sigma must be >= 0, got " + std::to_string(sigma));
    if (sigma == 0.0)
        return img;

    const std::vector<float> taps = gaussian_kernel(sigma);
    const int radius = static_cast<int>(taps.size() / 2);
    const int w = img.width(), h = img.height(), ch = img.channels();
    const std::size_t row_len = static_cast<std::size_t>(w) * ch;
    const auto& k = simd::active();

    Raster<D> horizontal(w, h, ch);
    std::vector<float> padded((static_cast<std::size_t>(w) + 2 * radius) * ch);
    for (int y = 0; y < h; ++y) {
        const float* src = img.row(y);
        for (int x = -radius; x < w + radius; ++x) {
            const int sx = std::clamp(x, 0, w - 1);
            for (int c = 0; c < ch; ++c)
                padded[static_cast<std::size_t>(x + radius) * ch + c] = src[static_cast<std::size_t>(sx) * ch + c];
        }
        float* dst = horizontal.row(y);
        for (int t = 0; t < static_cast<int>(taps.size()); ++t)
            k.axpy(padded.data() + static_cast<std::size_t>(t) * ch, dst, row_len, taps[t]);
    }

    Raster<D> out(w, h, ch);
    for (int y = 0; y < h; ++y) {
        float* dst = out.row(y);
        for (int t = -radius; t <= radius; ++t)
            k.axpy(horizontal.row(std::clamp(y + t, 0, h - 1)), dst, row_len, taps[t + radius]);
    }
    // Unit-sum taps can overshoot 1 by an ulp.
    clamp_encoded(out);
    return out;
}

int radial_blur_samples(double amount, double r) noexcept
{
    const double n = std::ceil(amount * r);
    return static_cast<int>(std::clamp(n, 3.0, 64.0));
}

template <class D>
Raster<D> radial_blur(const Raster<D>& img, Point center, double amount)
{
    if (!(amount >= 0.0) || !std::isfinite(amount))
        throw InputError("radial_blur: amount must be >= 0");
    if (amount == 0.0)
        return img;
    const int ch = img.channels();
    Raster<D> out(img.width(), img.height(), ch);
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            const double dx = x - center.x, dy = y - center.y;
            const double r = std::hypot(dx, dy);
            if (r == 0.0) {
                for (int c = 0; c < ch; ++c)
                    out.at(x, y, c) = img.at(x, y, c);
                continue;
            }
            const int n = radial_blur_samples(amount, r);
            const double ux = dx / r, uy = dy / r;
            for (int c = 0; c < ch; ++c) {
                double acc = 0.0;
                for (int s = 0; s < n; ++s) {
                    const double rs = r + amount * r * (static_cast<double>(s) / (n - 1) - 0.5);
                    acc += sample_bilinear(img, center.x + ux * rs, center.y + uy * rs, c);
                }
                out.at(x, y, c) = static_cast<float>(acc / n);
            }
        }
    }
    clamp_encoded(out);
    return out;
}

std::uint64_t mix64(std::uint64_t x) noexcept
{
    // splitmix64 finalizer
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

namespace {

double lattice_value(std::uint64_t seed, int octave, std::int64_t ix, std::int64_t iy) noexcept
{
    std::uint64_t hsh = mix64(seed ^ mix64(static_cast<std::uint64_t>(octave) + 0x51ed270b27a3ULL));
    hsh = mix64(hsh ^ static_cast<std::uint64_t>(ix));
    hsh = mix64(hsh ^ (static_cast<std::uint64_t>(iy) * 0x2545f4914f6cdd1dULL));
    return static_cast<double>(hsh >> 11) * 0x1.0p-53;
}

}  // namespace

EncodedImage fractal_noise(int width, int height, int octaves, double base_scale, std::uint64_t seed)
{
    if (width <= 0 || height <= 0)
        throw InputError("fractal_noise: dimensions must be positive");
    if (octaves < 1)
        throw InputError("fractal_noise: octaves must be >= 1");
    if (!(base_scale > 0.0))
        throw InputError("fractal_noise: base_scale must be > 0");

    std::vector<double> acc(static_cast<std::size_t>(width) * height, 0.0);
    double amplitude = 1.0, total_amplitude = 0.0, cell = base_scale;
    for (int o = 0; o < octaves; ++o) {
        for (int y = 0; y < height; ++y) {
            const double gy = y / cell;
            const double fy = std::floor(gy);
            const double ty = gy - fy;
            const auto iy = static_cast<std::int64_t>(fy);
            for (int x = 0; x < width; ++x) {
                const double gx = x / cell;
                const double fx = std::floor(gx);
                const double tx = gx - fx;
                const auto ix = static_cast<std::int64_t>(fx);
                const double v00 = lattice_value(seed, o, ix, iy), v10 = lattice_value(seed, o, ix + 1, iy);
                const double v01 = lattice_value(seed, o, ix, iy + 1), v11 = lattice_value(seed, o, ix + 1, iy + 1);
                const double top = v00 + (v10 - v00) * tx;
                const double bottom = v01 + (v11 - v01) * tx;
                acc[static_cast<std::size_t>(y) * width + x] += amplitude * (top + (bottom - top) * ty);
            }
        }
        total_amplitude += amplitude;
        amplitude *= 0.5;
        cell *= 0.5;
    }
    std::vector<float> data(acc.size());
    for (std::size_t i = 0; i < acc.size(); ++i)
        data[i] = static_cast<float>(std::clamp(acc[i] / total_amplitude, 0.0, 1.0));
    return EncodedImage(width, height, 1, std::move(data));
}

#define NIGHTFLARE_INSTANTIATE(D)                                                                   \
    template float sample_bilinear<D>(const Raster<D>&, double, double, int) noexcept;               \
    template Raster<D> affine_warp<D>(const Raster<D>&, const AffineParams&, Point);                 \
    template Raster<D> affine_warp_into<D>(const Raster<D>&, const AffineParams&, Extent);           \
    template Raster<D> gaussian_blur<D>(const Raster<D>&, double);                                   \
    template Raster<D> radial_blur<D>(const Raster<D>&, Point, double);

NIGHTFLARE_INSTANTIATE(EncodedDomain)
NIGHTFLARE_INSTANTIATE(LinearDomain)

#undef NIGHTFLARE_INSTANTIATE

}  // namespace nightflare
