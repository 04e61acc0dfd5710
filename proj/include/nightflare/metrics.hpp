// Copyright Contributors to the nightflare project.
// SPDX-License-Identifier: Apache-2.0

/// \file
/// Full-reference image metrics, component-masked PSNR and the training loss
/// terms as reference functions.

#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nightflare/compose.hpp"
#include "nightflare/image.hpp"
#include "nightflare/imagecore.hpp"

namespace nightflare {

/// Reported instead of +inf for identical images.
inline constexpr double kPsnrSentinel = 100.0;

/// 10 log10(1 / mse), or the sentinel when mse == 0.
double psnr_from_mse(double mse) noexcept;

/// Peak value 1. Throws ShapeError on mismatch.
double psnr(const EncodedImage& a, const EncodedImage& b);

/// PSNR over the pixels whose class is in `classes`, all channels of each
/// selected pixel. Throws EmptySelectionError when nothing is selected.
double masked_psnr(const EncodedImage& a, const EncodedImage& b, const SegMap& seg, std::span<const SegClass> classes);

/// Glare and streak regions.
double g_psnr(const EncodedImage& a, const EncodedImage& b, const SegMap& seg);
/// Streak regions only.
double s_psnr(const EncodedImage& a, const EncodedImage& b, const SegMap& seg);

struct SsimOptions {
    int window = 11;
    double sigma = 1.5;
    double k1 = 0.01;
    double k2 = 0.03;
};

/// Mean local SSIM over the valid window positions, averaged over channels
/// (alpha excluded). Throws InputError when the image is smaller than the
/// window.
double ssim(const EncodedImage& a, const EncodedImage& b, const SsimOptions& opts = {});

/// Mean absolute difference over all samples.
double l1_loss(const EncodedImage& a, const EncodedImage& b);

/// Optional perceptual term supplied by the host (e.g. a feature-space
/// distance); absent by default.
using PerceptualLoss = std::function<double(const EncodedImage&, const EncodedImage&)>;

/// l1 + perceptual (when supplied).
double image_loss(const EncodedImage& pred, const EncodedImage& target, const PerceptualLoss& perceptual = {});

/// mean |I - encode(clip(decode(I0_hat) + decode(F_hat)))|.
double recon_loss(const EncodedImage& input, const EncodedImage& i0_hat, const EncodedImage& f_hat,
                  const GammaCodec& codec);

struct LossWeights {
    double background = 0.5;
    double flare = 0.5;
    double reconstruction = 1.0;
};

/// Throws InputError for negative weights.
double total_loss(double l_background, double l_flare, double l_recon, const LossWeights& w = {});

struct EvalRow {
    std::string name;
    double psnr = 0.0;
    double ssim = 0.0;
    std::optional<double> g_psnr;  ///< absent without a mask or when the mask has no such pixels
    std::optional<double> s_psnr;
};

EvalRow evaluate_pair(const std::string& name, const EncodedImage& pred, const EncodedImage& gt,
                      const std::optional<SegMap>& seg);

struct EvalReport {
    std::vector<EvalRow> rows;

    /// Column means over the rows that have a value.
    EvalRow mean() const;
    /// Fixed-width table with PSNR, SSIM, G-PSNR and S-PSNR columns and a mean row.
    std::string table() const;
    /// One JSON object per row, then one with "name": "mean".
    std::string jsonl() const;
};

}  // namespace nightflare
