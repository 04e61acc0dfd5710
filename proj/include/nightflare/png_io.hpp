// Copyright Contributors to the nightflare project.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "nightflare/image.hpp"

namespace nightflare {

enum class BitDepth { eight = 8, sixteen = 16 };

/// Gray, gray+alpha (alpha dropped), RGB or RGBA PNG at 8 or 16 bits;
/// palette images are expanded to RGB.
EncodedImage decode_png(std::span<const std::uint8_t> bytes);
EncodedImage read_png(const std::filesystem::path& path);

/// Samples are rounded to the nearest code. Output is deterministic: no
/// timestamps or text chunks are written.
std::vector<std::uint8_t> encode_png(const EncodedImage& img, BitDepth depth);
void write_png(const std::filesystem::path& path, const EncodedImage& img, BitDepth depth);

using PaletteEntry = std::array<std::uint8_t, 3>;

/// 8-bit palette-indexed raster.
struct IndexedImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> indices;
    std::vector<PaletteEntry> palette;

    friend bool operator==(const IndexedImage&, const IndexedImage&) = default;
};

std::vector<std::uint8_t> encode_indexed_png(const IndexedImage& img);

/// Reads a palette PNG as-is. RGB/RGBA 8-bit images are accepted when every
/// pixel color appears in `palette`; otherwise IoError.
IndexedImage decode_indexed_png(std::span<const std::uint8_t> bytes, std::span<const PaletteEntry> palette);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace nightflare
