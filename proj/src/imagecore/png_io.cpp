// Copyright Contributors to the nightflare project.
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstring>
#include <fstream>
#include <memory>
#include <string>

#include <png.h>

#include "nightflare/png_io.hpp"

namespace nightflare {
namespace {

struct ReadCursor {
    std::span<const std::uint8_t> bytes;
    std::size_t offset = 0;
};

void read_callback(png_structp png, png_bytep out, png_size_t length)
{
    auto* cur = static_cast<ReadCursor*>(png_get_io_ptr(png));
    if (cur->offset + length > cur->bytes.size())
        png_error(png, "truncated PNG stream");
    std::memcpy(out, cur->bytes.data() + cur->offset, length);
    cur->offset += length;
}

void write_callback(png_structp png, png_bytep data, png_size_t length)
{
    auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
    out->insert(out->end(), data, data + length);
}

void flush_callback(png_structp) {}

void warning_callback(png_structp, png_const_charp) {}

[[noreturn]] void error_callback(png_structp png, png_const_charp)
{
    png_longjmp(png, 1);
}

class ReadHandle {
public:
    ReadHandle()
    {
        png_ = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, error_callback, warning_callback);
        if (png_ == nullptr)
            throw IoError("png_create_read_struct failed");
        info_ = png_create_info_struct(png_);
        if (info_ == nullptr) {
            png_destroy_read_struct(&png_, nullptr, nullptr);
            throw IoError("png_create_info_struct failed");
        }
    }
    ~ReadHandle() { png_destroy_read_struct(&png_, &info_, nullptr); }
    ReadHandle(const ReadHandle&) = delete;
    ReadHandle& operator=(const ReadHandle&) = delete;

    png_structp png() const noexcept { return png_; }
    png_infop info() const noexcept { return info_; }

private:
    png_structp png_ = nullptr;
    png_infop info_ = nullptr;
};

class WriteHandle {
public:
    WriteHandle()
    {
        png_ = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, error_callback, warning_callback);
        if (png_ == nullptr)
            throw IoError("png_create_write_struct failed");
        info_ = png_create_info_struct(png_);
        if (info_ == nullptr) {
            png_destroy_write_struct(&png_, nullptr);
            throw IoError("png_create_info_struct failed");
        }
    }
    ~WriteHandle() { png_destroy_write_struct(&png_, &info_); }
    WriteHandle(const WriteHandle&) = delete;
    WriteHandle& operator=(const WriteHandle&) = delete;

    png_structp png() const noexcept { return png_; }
    png_infop info() const noexcept { return info_; }

private:
    png_structp png_ = nullptr;
    png_infop info_ = nullptr;
};

// Raw decode result; everything after setjmp writes through this heap
// object so nothing needs to survive in registers across a longjmp.
struct RawPng {
    int width = 0;
    int height = 0;
    int channels = 0;
    int bit_depth = 0;
    int color_type = 0;
    std::vector<std::uint8_t> pixels;
    std::vector<PaletteEntry> palette;
    std::vector<png_bytep> rows;
};

bool read_raw(std::span<const std::uint8_t> bytes, bool expand_palette, RawPng* raw, std::string* error)
{
    if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
        *error = "not a PNG stream";
        return false;
    }
    ReadHandle h;
    ReadCursor cursor{bytes, 0};
    png_structp png = h.png();
    png_infop info = h.info();
    if (setjmp(png_jmpbuf(png))) {
        *error = "corrupt PNG stream";
        return false;
    }
    png_set_read_fn(png, &cursor, read_callback);
    png_read_info(png, info);

    raw->color_type = png_get_color_type(png, info);
    if (raw->color_type == PNG_COLOR_TYPE_PALETTE) {
        png_colorp plte = nullptr;
        int count = 0;
        if (png_get_PLTE(png, info, &plte, &count) != 0) {
            for (int i = 0; i < count; ++i)
                raw->palette.push_back({plte[i].red, plte[i].green, plte[i].blue});
        }
        if (expand_palette)
            png_set_palette_to_rgb(png);
    }
    if (raw->color_type == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8)
        png_set_expand_gray_1_2_4_to_8(png);
    if (raw->color_type != PNG_COLOR_TYPE_PALETTE || expand_palette)
        if (png_get_valid(png, info, PNG_INFO_tRNS))
            png_set_tRNS_to_alpha(png);
    if (raw->color_type == PNG_COLOR_TYPE_PALETTE && !expand_palette && png_get_bit_depth(png, info) < 8)
        png_set_packing(png);
    png_read_update_info(png, info);

    raw->width = static_cast<int>(png_get_image_width(png, info));
    raw->height = static_cast<int>(png_get_image_height(png, info));
    raw->channels = png_get_channels(png, info);
    raw->bit_depth = png_get_bit_depth(png, info);
    const std::size_t rowbytes = png_get_rowbytes(png, info);
    raw->pixels.resize(rowbytes * static_cast<std::size_t>(raw->height));
    raw->rows.resize(static_cast<std::size_t>(raw->height));
    for (int y = 0; y < raw->height; ++y)
        raw->rows[y] = raw->pixels.data() + rowbytes * y;
    png_read_image(png, raw->rows.data());
    png_read_end(png, nullptr);
    return true;
}

bool write_raw(const std::uint8_t* pixels, int width, int height, int color_type, int bit_depth,
               std::size_t rowbytes, const std::vector<PaletteEntry>* palette, std::vector<std::uint8_t>* out,
               std::string* error)
{
    std::vector<png_color> plte;
    if (palette != nullptr) {
        for (const auto& e : *palette)
            plte.push_back({e[0], e[1], e[2]});
    }
    WriteHandle h;
    png_structp png = h.png();
    png_infop info = h.info();
    if (setjmp(png_jmpbuf(png))) {
        *error = "PNG encoding failed";
        return false;
    }
    png_set_write_fn(png, out, write_callback, flush_callback);
    // Fast deflate and one fixed filter keep 16-bit dataset writes cheap.
    png_set_compression_level(png, 1);
    png_set_filter(png, PNG_FILTER_TYPE_BASE, plte.empty() ? PNG_FILTER_UP : PNG_FILTER_NONE);
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), bit_depth, color_type,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    if (!plte.empty())
        png_set_PLTE(png, info, plte.data(), static_cast<int>(plte.size()));
    png_write_info(png, info);
    for (int y = 0; y < height; ++y)
        png_write_row(png, const_cast<png_bytep>(pixels + rowbytes * y));
    png_write_end(png, nullptr);
    return true;
}

}  // namespace

EncodedImage decode_png(std::span<const std::uint8_t> bytes)
{
    auto raw = std::make_unique<RawPng>();
    auto error = std::make_unique<std::string>();
    if (!read_raw(bytes, true, raw.get(), error.get()))
        throw IoError(*error);

    const int src_channels = raw->channels;
    const int channels = src_channels == 2 ? 1 : src_channels;
    EncodedImage img(raw->width, raw->height, channels);
    const bool wide = raw->bit_depth == 16;
    const float scale = wide ? 1.0f / 65535.0f : 1.0f / 255.0f;
    const std::size_t pixels = img.pixel_count();
    auto dst = img.samples();
    for (std::size_t i = 0; i < pixels; ++i) {
        for (int c = 0; c < channels; ++c) {
            const std::size_t s = i * src_channels + c;
            const unsigned code = wide ? (static_cast<unsigned>(raw->pixels[2 * s]) << 8) | raw->pixels[2 * s + 1]
                                       : raw->pixels[s];
            dst[i * channels + c] = static_cast<float>(code) * scale;
        }
    }
    return img;
}

EncodedImage read_png(const std::filesystem::path& path)
{
    try {
        return decode_png(read_file(path));
    } catch (const IoError& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

std::vector<std::uint8_t> encode_png(const EncodedImage& img, BitDepth depth)
{
    const int ch = img.channels();
    const int color_type = ch == 1 ? PNG_COLOR_TYPE_GRAY : ch == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_RGBA;
    const bool wide = depth == BitDepth::sixteen;
    const int bytes_per_sample = wide ? 2 : 1;
    const float maxval = wide ? 65535.0f : 255.0f;
    const auto src = img.samples();
    std::vector<std::uint8_t> packed(src.size() * bytes_per_sample);
    for (std::size_t i = 0; i < src.size(); ++i) {
        const float v = std::clamp(src[i], 0.0f, 1.0f);
        const auto code = static_cast<unsigned>(std::lround(v * maxval));
        if (wide) {
            packed[2 * i] = static_cast<std::uint8_t>(code >> 8);
            packed[2 * i + 1] = static_cast<std::uint8_t>(code & 0xff);
        } else {
            packed[i] = static_cast<std::uint8_t>(code);
        }
    }
    auto out = std::make_unique<std::vector<std::uint8_t>>();
    auto error = std::make_unique<std::string>();
    const std::size_t rowbytes = static_cast<std::size_t>(img.width()) * ch * bytes_per_sample;
    if (!write_raw(packed.data(), img.width(), img.height(), color_type, wide ? 16 : 8, rowbytes, nullptr, out.get(),
                   error.get()))
        throw IoError(*error);
    return std::move(*out);
}

void write_png(const std::filesystem::path& path, const EncodedImage& img, BitDepth depth)
{
    write_file(path, encode_png(img, depth));
}

std::vector<std::uint8_t> encode_indexed_png(const IndexedImage& img)
{
    if (img.width <= 0 || img.height <= 0 ||
        img.indices.size() != static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height))
        throw ShapeError("indexed image dimensions do not match index data");
    if (img.palette.empty() || img.palette.size() > 256)
        throw InputError("indexed image palette must have 1..256 entries");
    for (std::uint8_t idx : img.indices)
        if (idx >= img.palette.size())
            throw InputError("palette index out of range");
    auto out = std::make_unique<std::vector<std::uint8_t>>();
    auto error = std::make_unique<std::string>();
    if (!write_raw(img.indices.data(), img.width, img.height, PNG_COLOR_TYPE_PALETTE, 8,
                   static_cast<std::size_t>(img.width), &img.palette, out.get(), error.get()))
        throw IoError(*error);
    return std::move(*out);
}

IndexedImage decode_indexed_png(std::span<const std::uint8_t> bytes, std::span<const PaletteEntry> palette)
{
    auto raw = std::make_unique<RawPng>();
    auto error = std::make_unique<std::string>();
    if (!read_raw(bytes, false, raw.get(), error.get()))
        throw IoError(*error);

    auto lookup = [&](PaletteEntry color) -> std::uint8_t {
        const auto it = std::find(palette.begin(), palette.end(), color);
        if (it == palette.end())
            throw IoError("mask color (" + std::to_string(color[0]) + "," + std::to_string(color[1]) + "," +
                          std::to_string(color[2]) + ") is not in the class palette");
        return static_cast<std::uint8_t>(it - palette.begin());
    };

    IndexedImage out;
    out.width = raw->width;
    out.height = raw->height;
    out.palette.assign(palette.begin(), palette.end());
    out.indices.resize(static_cast<std::size_t>(raw->width) * raw->height);

    if (raw->color_type == PNG_COLOR_TYPE_PALETTE) {
        std::vector<std::uint8_t> remap(raw->palette.size());
        std::vector<bool> remap_ok(raw->palette.size(), false);
        for (std::size_t i = 0; i < out.indices.size(); ++i) {
            const std::uint8_t src = raw->pixels[i];
            if (src >= raw->palette.size())
                throw IoError("palette index out of range in mask");
            if (!remap_ok[src]) {
                remap[src] = lookup(raw->palette[src]);
                remap_ok[src] = true;
            }
            out.indices[i] = remap[src];
        }
        return out;
    }
    if (raw->bit_depth != 8 || raw->channels < 3)
        throw IoError("mask must be a palette PNG or an 8-bit RGB/RGBA PNG");
    for (std::size_t i = 0; i < out.indices.size(); ++i) {
        const std::uint8_t* p = raw->pixels.data() + i * raw->channels;
        out.indices[i] = lookup({p[0], p[1], p[2]});
    }
    return out;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path.string());
    return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw IoError("write failed: " + path.string());
}

}  // namespace nightflare
