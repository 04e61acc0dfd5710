// Copyright Contributors to the nightflare project.
// SPDX-License-Identifier: Apache-2.0

// Shared helpers for the unit and acceptance suites.

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "nightflare/image.hpp"

namespace nightflare::testing {

template <class D>
Raster<D> random_raster(int w, int h, int c, std::uint64_t seed, float lo = 0.0f, float hi = 1.0f)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> dist(lo, hi);
    Raster<D> img(w, h, c);
    for (float& v : img.samples())
        v = dist(rng);
    return img;
}

template <class D>
Raster<D> constant_raster(int w, int h, int c, float value)
{
    Raster<D> img(w, h, c);
    for (float& v : img.samples())
        v = value;
    return img;
}

template <class D>
Raster<D> gaussian_blob(int w, int h, double cx, double cy, double sigma, float peak = 1.0f)
{
    Raster<D> img(w, h, 1);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
            img.at(x, y, 0) = static_cast<float>(peak * std::exp(-0.5 * d2 / (sigma * sigma)));
        }
    return img;
}

template <class D>
double channel_sum(const Raster<D>& img, int c = -1)
{
    double s = 0.0;
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
            for (int k = 0; k < img.channels(); ++k)
                if (c < 0 || c == k)
                    s += img.at(x, y, k);
    return s;
}

template <class A, class B>
double max_abs_diff(const Raster<A>& a, const Raster<B>& b)
{
    double m = 0.0;
    const auto sa = a.samples();
    const auto sb = b.samples();
    for (std::size_t i = 0; i < sa.size(); ++i)
        m = std::max(m, std::abs(static_cast<double>(sa[i]) - static_cast<double>(sb[i])));
    return m;
}

struct Component {
    int pixels = 0;
    double weight = 0.0;
    double cx = 0.0;  ///< intensity-weighted centroid
    double cy = 0.0;
};

/// 4-connected components of pixels whose channel-0 value exceeds `threshold`.
template <class D>
std::vector<Component> components(const Raster<D>& img, float threshold)
{
    const int w = img.width(), h = img.height();
    std::vector<int> label(static_cast<std::size_t>(w) * h, -1);
    std::vector<Component> out;
    std::vector<std::pair<int, int>> stack;
    for (int y0 = 0; y0 < h; ++y0)
        for (int x0 = 0; x0 < w; ++x0) {
            if (label[y0 * w + x0] >= 0 || !(img.at(x0, y0, 0) > threshold))
                continue;
            const int id = static_cast<int>(out.size());
            Component comp;
            stack.assign(1, {x0, y0});
            label[y0 * w + x0] = id;
            while (!stack.empty()) {
                const auto [x, y] = stack.back();
                stack.pop_back();
                const double v = img.at(x, y, 0);
                ++comp.pixels;
                comp.weight += v;
                comp.cx += v * x;
                comp.cy += v * y;
                const int nx[4] = {x - 1, x + 1, x, x};
                const int ny[4] = {y, y, y - 1, y + 1};
                for (int k = 0; k < 4; ++k) {
                    if (nx[k] < 0 || ny[k] < 0 || nx[k] >= w || ny[k] >= h)
                        continue;
                    int& l = label[ny[k] * w + nx[k]];
                    if (l < 0 && img.at(nx[k], ny[k], 0) > threshold) {
                        l = id;
                        stack.push_back({nx[k], ny[k]});
                    }
                }
            }
            comp.cx /= comp.weight;
            comp.cy /= comp.weight;
            out.push_back(comp);
        }
    return out;
}

}  // namespace nightflare::testing
