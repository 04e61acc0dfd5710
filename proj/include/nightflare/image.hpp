// Copyright Contributors to the nightflare project.
// SPDX-License-Identifier: Apache-2.0

/// \file
/// Float rasters tagged with the value domain they live in. Encoded images
/// hold gamma-encoded display values in [0,1]; linear images hold radiance
/// (non-negative, may exceed 1 until clipped). Only the gamma codec converts
/// between the two, so mixing them up is a compile error.

#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nightflare/error.hpp"

namespace nightflare {

struct Point {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point&, const Point&) = default;
};

struct Extent {
    int width = 0;
    int height = 0;

    friend bool operator==(const Extent&, const Extent&) = default;
};

using Rgb = std::array<float, 3>;

struct EncodedDomain {
    static constexpr const char* name = "encoded";
    static bool channels_ok(int c) { return c == 1 || c == 3 || c == 4; }
    static bool value_ok(float v) { return std::isfinite(v) && v >= 0.0f && v <= 1.0f; }
};

struct LinearDomain {
    static constexpr const char* name = "linear";
    static bool channels_ok(int c) { return c == 1 || c == 3; }
    static bool value_ok(float v) { return std::isfinite(v) && v >= 0.0f; }
};

/// Interleaved row-major float raster.
template <class Domain>
class Raster {
public:
    using domain_type = Domain;

    Raster() = default;

    Raster(int width, int height, int channels)
        : width_(width), height_(height), channels_(channels)
    {
        check_shape();
        data_.assign(sample_count(), 0.0f);
    }

    Raster(int width, int height, int channels, std::vector<float> data)
        : width_(width), height_(height), channels_(channels), data_(std::move(data))
    {
        check_shape();
        if (data_.size() != sample_count())
            throw ShapeError("raster data length " + std::to_string(data_.size()) +
                             " does not match " + std::to_string(width_) + "x" +
                             std::to_string(height_) + "x" + std::to_string(channels_));
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    int channels() const noexcept { return channels_; }
    Extent extent() const noexcept { return {width_, height_}; }
    bool empty() const noexcept { return data_.empty(); }

    std::size_t pixel_count() const noexcept
    {
        return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
    }
    std::size_t sample_count() const noexcept { return pixel_count() * static_cast<std::size_t>(channels_); }

    std::span<float> samples() noexcept { return data_; }
    std::vector<float> take_samples() && noexcept { return std::move(data_); }
    std::span<const float> samples() const noexcept { return data_; }

    float* row(int y) noexcept { return data_.data() + static_cast<std::size_t>(y) * width_ * channels_; }
    const float* row(int y) const noexcept
    {
        return data_.data() + static_cast<std::size_t>(y) * width_ * channels_;
    }

    float& at(int x, int y, int c) noexcept { return row(y)[static_cast<std::size_t>(x) * channels_ + c]; }
    float at(int x, int y, int c) const noexcept { return row(y)[static_cast<std::size_t>(x) * channels_ + c]; }

    template <class Other>
    bool same_shape(const Raster<Other>& o) const noexcept
    {
        return width_ == o.width() && height_ == o.height() && channels_ == o.channels();
    }

    /// Throws InputError naming the first sample that breaks the domain's
    /// value range.
    void validate() const
    {
        for (std::size_t i = 0; i < data_.size(); ++i) {
            if (!Domain::value_ok(data_[i]))
                throw InputError(std::string(Domain::name) + " image sample " + std::to_string(i) +
                                 " out of range: " + std::to_string(data_[i]));
        }
    }

    friend bool operator==(const Raster& a, const Raster& b)
    {
        return a.same_shape(b) && a.data_ == b.data_;
    }

private:
    void check_shape() const
    {
        if (width_ <= 0 || height_ <= 0)
            throw ShapeError("raster dimensions must be positive");
        if (!Domain::channels_ok(channels_))
            throw ShapeError(std::string(Domain::name) + " image cannot have " + std::to_string(channels_) +
                             " channels");
    }

    int width_ = 0;
    int height_ = 0;
    int channels_ = 0;
    std::vector<float> data_;
};

using EncodedImage = Raster<EncodedDomain>;
using LinearImage = Raster<LinearDomain>;

template <class A, class B>
void require_same_shape(const Raster<A>& a, const Raster<B>& b, const char* what)
{
    if (!a.same_shape(b))
        throw ShapeError(std::string(what) + ": shape mismatch " + std::to_string(a.width()) + "x" +
                         std::to_string(a.height()) + "x" + std::to_string(a.channels()) + " vs " +
                         std::to_string(b.width()) + "x" + std::to_string(b.height()) + "x" +
                         std::to_string(b.channels()));
}

namespace detail {

/// Moves the storage into the other domain without touching values. Only
/// for code that has already established the target domain's invariants.
template <class To, class From>
Raster<To> rebrand(Raster<From>&& img)
{
    const int w = img.width(), h = img.height(), c = img.channels();
    return Raster<To>(w, h, c, std::move(img).take_samples());
}

}  // namespace detail

/// Rec. 709 luma weights; single-channel images return their only sample.
template <class D>
float luminance_at(const Raster<D>& img, int x, int y)
{
    if (img.channels() < 3)
        return img.at(x, y, 0);
    return 0.2126f * img.at(x, y, 0) + 0.7152f * img.at(x, y, 1) + 0.0722f * img.at(x, y, 2);
}

}  // namespace nightflare
