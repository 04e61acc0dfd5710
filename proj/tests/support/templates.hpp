// Copyright Contributors to the nightflare project.
// SPDX-License-Identifier: Apache-2.0

// Small template documents for catalog, service and dataset tests.

#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "nightflare/catalog.hpp"

namespace nightflare::testing {

inline TemplateDoc scatter_doc(const std::string& id = "scatter-a", int size = 128)
{
    ScatterTemplate t;
    t.canvas = {size, size};
    t.source_pos = {size * 0.5 - 0.5, size * 0.5 - 0.5};
    t.glare.radius = size * 0.3;
    t.glare.curve = ColorCurve::ramp({0.8f, 0.7f, 0.5f});
    StreakSpec s;
    s.direction = 0.3;
    s.length = size * 0.8;
    s.width = 3.0;
    s.section_curve = ColorCurve::ramp({0.9f, 0.8f, 1.0f});
    s.falloff_curve = ColorCurve::ramp({1.0f, 1.0f, 1.0f});
    t.streaks.push_back(s);
    ShimmerSpec sh;
    sh.radius = size * 0.25;
    sh.spike_count = 10;
    sh.angular_jitter_seed = 7;
    t.shimmer = sh;
    LightSourceSpec ls;
    ls.core_radius = 3.0;
    ls.glow_radius = 8.0;
    t.light = ls;

    TemplateDoc doc;
    doc.id = id;
    doc.metadata.name = "test scatter";
    doc.metadata.tags = {"street", "warm"};
    doc.body = t;
    return doc;
}

inline TemplateDoc reflect_doc(const std::string& id = "reflect-a", int size = 128)
{
    ReflectBody b;
    b.reflect.canvas = {size, size};
    b.reflect.optical_center = {size * 0.5 - 0.5, size * 0.5 - 0.5};
    b.light_pos = {size * 0.75, size * 0.3};
    IrisSpec disc;
    disc.k = -0.5;
    disc.size = 6.0;
    IrisSpec poly;
    poly.k = -1.2;
    poly.size = 9.0;
    poly.shape = PolygonIris{6, 0.2};
    poly.caustics = CausticsSpec{0.01};
    IrisSpec ring;
    ring.k = 0.4;
    ring.size = 5.0;
    ring.shape = RingIris{0.6};
    ring.clip = ClipSpec{10.0, 1.0};
    b.reflect.irises = {disc, poly, ring};

    TemplateDoc doc;
    doc.id = id;
    doc.metadata.name = "test reflect";
    doc.metadata.author = "tests";
    doc.metadata.reference_image = "ref.png";
    doc.body = b;
    return doc;
}

/// Unique scratch directory under the system temp dir, removed on scope exit.
class ScratchDir {
public:
    explicit ScratchDir(const std::string& tag)
    {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("nightflare-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~ScratchDir()
    {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    ScratchDir(const ScratchDir&) = delete;
    ScratchDir& operator=(const ScratchDir&) = delete;

    const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
};

}  // namespace nightflare::testing
