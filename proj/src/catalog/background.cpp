// Copyright Contributors to the nightflare project.
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <random>

#include "nightflare/catalog.hpp"

namespace nightflare {

EncodedImage synth_background(int width, int height, std::uint64_t seed)
{
    EncodedImage img(width, height, 3);
    std::mt19937_64 rng(mix64(seed));
    std::uniform_real_distribution<double> u(0.0, 1.0);

    // Sky: deep blue at the top warming toward a sodium-lit horizon.
    const double horizon = height * (0.45 + 0.2 * u(rng));
    const Rgb top{0.02f, 0.03f, 0.08f}, low{0.16f, 0.10f, 0.08f};
    for (int y = 0; y < height; ++y) {
        const float t = static_cast<float>(std::clamp(y / horizon, 0.0, 1.0));
        for (int x = 0; x < width; ++x)
            for (int c = 0; c < 3; ++c)
                img.at(x, y, c) = top[c] + (low[c] - top[c]) * t * t;
    }

    // Buildings with lit windows.
    int x = 0;
    while (x < width) {
        const int bw = 30 + static_cast<int>(u(rng) * 90);
        const int top_y = static_cast<int>(horizon * (0.3 + 0.9 * u(rng)));
        const float shade = static_cast<float>(0.03 + 0.05 * u(rng));
        const double lit = 0.15 + 0.4 * u(rng);
        const Rgb window = u(rng) < 0.5 ? Rgb{0.85f, 0.7f, 0.4f} : Rgb{0.6f, 0.7f, 0.8f};
        for (int y = std::max(top_y, 0); y < height; ++y)
            for (int xx = x; xx < std::min(x + bw, width); ++xx)
                for (int c = 0; c < 3; ++c)
                    img.at(xx, y, c) = shade * (c == 2 ? 1.2f : 1.0f);
        for (int wy = top_y + 6; wy + 6 < height; wy += 12)
            for (int wx = x + 4; wx + 5 < std::min(x + bw, width); wx += 10) {
                if (u(rng) >= lit)
                    continue;
                const float level = static_cast<float>(0.4 + 0.5 * u(rng));
                for (int yy = wy; yy < wy + 6; ++yy)
                    for (int xx = wx; xx < wx + 5; ++xx)
                        for (int c = 0; c < 3; ++c)
                            img.at(xx, yy, c) = window[c] * level;
            }
        x += bw + static_cast<int>(u(rng) * 12);
    }

    // Sensor grain.
    std::normal_distribution<float> grain(0.0f, 0.008f);
    for (float& v : img.samples())
        v = std::clamp(v + grain(rng), 0.0f, 1.0f);
    return img;
}

}  // namespace nightflare
