// Copyright Contributors to the nightflare project.
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <json.hpp>

#include "nightflare/metrics.hpp"
#include "nightflare/simd.hpp"

namespace nightflare {
namespace {

int color_channels(const EncodedImage& img) { return img.channels() == 4 ? 3 : img.channels(); }

/// Valid-region separable filter of one plane, in double.
std::vector<double> filter_valid(const std::vector<double>& plane, int w, int h, const std::vector<double>& k)
{
    const int n = static_cast<int>(k.size());
    const int ow = w - n + 1, oh = h - n + 1;
    std::vector<double> tmp(static_cast<std::size_t>(ow) * h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < ow; ++x) {
            double s = 0.0;
            for (int i = 0; i < n; ++i)
                s += k[i] * plane[static_cast<std::size_t>(y) * w + x + i];
            tmp[static_cast<std::size_t>(y) * ow + x] = s;
        }
    std::vector<double> out(static_cast<std::size_t>(ow) * oh);
    for (int y = 0; y < oh; ++y)
        for (int x = 0; x < ow; ++x) {
            double s = 0.0;
            for (int i = 0; i < n; ++i)
                s += k[i] * tmp[static_cast<std::size_t>(y + i) * ow + x];
            out[static_cast<std::size_t>(y) * ow + x] = s;
        }
    return out;
}

std::string format_db(const std::optional<double>& v)
{
    if (!v)
        return "-";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", *v);
    return buf;
}

nlohmann::json row_json(const EvalRow& r)
{
    nlohmann::json j{{"name", r.name}, {"psnr", r.psnr}, {"ssim", r.ssim}};
    j["g_psnr"] = r.g_psnr ? nlohmann::json(*r.g_psnr) : nlohmann::json(nullptr);
    j["s_psnr"] = r.s_psnr ? nlohmann::json(*r.s_psnr) : nlohmann::json(nullptr);
    return j;
}

}  // namespace

double psnr_from_mse(double mse) noexcept
{
    if (mse <= 0.0)
        return kPsnrSentinel;
    return std::min(kPsnrSentinel, -10.0 * std::log10(mse));
}

double psnr(const EncodedImage& a, const EncodedImage& b)
{
    require_same_shape(a, b, "psnr");
    const double sse = simd::active().sum_sq_diff(a.samples().data(), b.samples().data(), a.sample_count());
    return psnr_from_mse(sse / static_cast<double>(a.sample_count()));
}

double masked_psnr(const EncodedImage& a, const EncodedImage& b, const SegMap& seg, std::span<const SegClass> classes)
{
    require_same_shape(a, b, "masked_psnr");
    if (seg.width() != a.width() || seg.height() != a.height())
        throw ShapeError("masked_psnr: mask size differs from the images");
    const auto& k = simd::active();
    const int c = a.channels();
    double sse = 0.0;
    std::size_t n = 0;
    for (int y = 0; y < a.height(); ++y) {
        // Runs of selected pixels go through the flat kernel.
        int x = 0;
        while (x < a.width()) {
            if (std::find(classes.begin(), classes.end(), seg.at(x, y)) == classes.end()) {
                ++x;
                continue;
            }
            int end = x;
            while (end < a.width() && std::find(classes.begin(), classes.end(), seg.at(end, y)) != classes.end())
                ++end;
            const std::size_t len = static_cast<std::size_t>(end - x) * c;
            sse += k.sum_sq_diff(a.row(y) + static_cast<std::size_t>(x) * c, b.row(y) + static_cast<std::size_t>(x) * c,
                                 len);
            n += len;
            x = end;
        }
    }
    if (n == 0)
        throw EmptySelectionError("masked_psnr: the mask selects no pixels");
    return psnr_from_mse(sse / static_cast<double>(n));
}

double g_psnr(const EncodedImage& a, const EncodedImage& b, const SegMap& seg)
{
    static constexpr SegClass classes[] = {SegClass::glare, SegClass::streak};
    return masked_psnr(a, b, seg, classes);
}

double s_psnr(const EncodedImage& a, const EncodedImage& b, const SegMap& seg)
{
    static constexpr SegClass classes[] = {SegClass::streak};
    return masked_psnr(a, b, seg, classes);
}

double ssim(const EncodedImage& a, const EncodedImage& b, const SsimOptions& opts)
{
    require_same_shape(a, b, "ssim");
    const int w = a.width(), h = a.height(), n = opts.window;
    if (w < n || h < n)
        throw InputError("ssim: image is smaller than the " + std::to_string(n) + "x" + std::to_string(n) + " window");

    std::vector<double> k(static_cast<std::size_t>(n));
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        const double d = i - 0.5 * (n - 1);
        k[i] = std::exp(-0.5 * d * d / (opts.sigma * opts.sigma));
        total += k[i];
    }
    for (double& v : k)
        v /= total;
    const double c1 = (opts.k1) * (opts.k1), c2 = (opts.k2) * (opts.k2);

    const int channels = color_channels(a);
    const std::size_t np = a.pixel_count();
    double sum = 0.0;
    for (int c = 0; c < channels; ++c) {
        std::vector<double> pa(np), pb(np), aa(np), bb(np), ab(np);
        for (std::size_t i = 0; i < np; ++i) {
            const double va = a.samples()[i * a.channels() + c];
            const double vb = b.samples()[i * b.channels() + c];
            pa[i] = va;
            pb[i] = vb;
            aa[i] = va * va;
            bb[i] = vb * vb;
            ab[i] = va * vb;
        }
        const auto ma = filter_valid(pa, w, h, k), mb = filter_valid(pb, w, h, k);
        const auto saa = filter_valid(aa, w, h, k), sbb = filter_valid(bb, w, h, k), sab = filter_valid(ab, w, h, k);
        double acc = 0.0;
        for (std::size_t i = 0; i < ma.size(); ++i) {
            const double va = saa[i] - ma[i] * ma[i], vb = sbb[i] - mb[i] * mb[i], cov = sab[i] - ma[i] * mb[i];
            acc += ((2.0 * ma[i] * mb[i] + c1) * (2.0 * cov + c2)) /
                   ((ma[i] * ma[i] + mb[i] * mb[i] + c1) * (va + vb + c2));
        }
        sum += acc / static_cast<double>(ma.size());
    }
    return sum / channels;
}

double l1_loss(const EncodedImage& a, const EncodedImage& b)
{
    require_same_shape(a, b, "l1_loss");
    return simd::active().sum_abs_diff(a.samples().data(), b.samples().data(), a.sample_count()) /
           static_cast<double>(a.sample_count());
}

double image_loss(const EncodedImage& pred, const EncodedImage& target, const PerceptualLoss& perceptual)
{
    const double l1 = l1_loss(pred, target);
    return perceptual ? l1 + perceptual(pred, target) : l1;
}

double recon_loss(const EncodedImage& input, const EncodedImage& i0_hat, const EncodedImage& f_hat,
                  const GammaCodec& codec)
{
    require_same_shape(input, i0_hat, "recon_loss");
    require_same_shape(input, f_hat, "recon_loss");
    const auto rebuilt = gamma_encode(linear_add_clip(gamma_decode(i0_hat, codec), gamma_decode(f_hat, codec)), codec);
    const LinearImage in = gamma_decode(input, codec);
    // Compare in the encoded domain; alpha, if any, was dropped by the decode.
    return l1_loss(gamma_encode(clip_unit(in), codec), rebuilt);
}

double total_loss(double l_background, double l_flare, double l_recon, const LossWeights& w)
{
    if (w.background < 0.0 || w.flare < 0.0 || w.reconstruction < 0.0)
        throw InputError("loss weights must be >= 0");
    return w.background * l_background + w.flare * l_flare + w.reconstruction * l_recon;
}

EvalRow evaluate_pair(const std::string& name, const EncodedImage& pred, const EncodedImage& gt,
                      const std::optional<SegMap>& seg)
{
    EvalRow row;
    row.name = name;
    row.psnr = psnr(pred, gt);
    row.ssim = ssim(pred, gt);
    if (seg) {
        if (seg->count(SegClass::glare) + seg->count(SegClass::streak) > 0)
            row.g_psnr = g_psnr(pred, gt, *seg);
        if (seg->count(SegClass::streak) > 0)
            row.s_psnr = s_psnr(pred, gt, *seg);
    }
    return row;
}

EvalRow EvalReport::mean() const
{
    EvalRow m;
    m.name = "mean";
    double g = 0.0, s = 0.0;
    int ng = 0, ns = 0;
    for (const auto& r : rows) {
        m.psnr += r.psnr;
        m.ssim += r.ssim;
        if (r.g_psnr) {
            g += *r.g_psnr;
            ++ng;
        }
        if (r.s_psnr) {
            s += *r.s_psnr;
            ++ns;
        }
    }
    if (!rows.empty()) {
        m.psnr /= rows.size();
        m.ssim /= rows.size();
    }
    if (ng > 0)
        m.g_psnr = g / ng;
    if (ns > 0)
        m.s_psnr = s / ns;
    return m;
}

std::string EvalReport::table() const
{
    std::size_t width = 4;
    for (const auto& r : rows)
        width = std::max(width, r.name.size());
    std::string out;
    char buf[256];
    auto line = [&](const EvalRow& r) {
        std::snprintf(buf, sizeof buf, "%-*s  %8.3f  %6.4f  %8s  %8s\n", static_cast<int>(width), r.name.c_str(),
                      r.psnr, r.ssim, format_db(r.g_psnr).c_str(), format_db(r.s_psnr).c_str());
        out += buf;
    };
    std::snprintf(buf, sizeof buf, "%-*s  %8s  %6s  %8s  %8s\n", static_cast<int>(width), "name", "PSNR", "SSIM",
                  "G-PSNR", "S-PSNR");
    out += buf;
    for (const auto& r : rows)
        line(r);
    line(mean());
    return out;
}

std::string EvalReport::jsonl() const
{
    std::string out;
    for (const auto& r : rows)
        out += row_json(r).dump() + "\n";
    out += row_json(mean()).dump() + "\n";
    return out;
}

}  // namespace nightflare
