// Copyright Contributors to the nightflare project.
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>

#include <openssl/evp.h>

#include "nightflare/facade.hpp"
#include "nightflare/png_io.hpp"

namespace nightflare {

using nlohmann::json;

namespace {

/// Box-filter resample along x (horizontal) or y of an interleaved raster
/// `width` samples wide; `lines` counts the rows or columns being resampled.
std::vector<float> resample_axis(const std::vector<float>& in, int in_len, int out_len, int lines, int channels,
                                 bool horizontal, int width)
{
    const double step = static_cast<double>(in_len) / out_len;
    const int out_w = horizontal ? out_len : width;
    const int out_h = horizontal ? lines : out_len;
    std::vector<float> out(static_cast<std::size_t>(out_w) * out_h * channels, 0.0f);
    for (int o = 0; o < out_len; ++o) {
        const double lo = o * step, hi = (o + 1) * step;
        for (int i = static_cast<int>(lo); i < in_len && i < hi; ++i) {
            const double w = (std::min<double>(hi, i + 1) - std::max<double>(lo, i)) / step;
            if (w <= 0.0)
                continue;
            for (int l = 0; l < lines; ++l)
                for (int c = 0; c < channels; ++c) {
                    const std::size_t src = horizontal
                                                ? (static_cast<std::size_t>(l) * in_len + i) * channels + c
                                                : (static_cast<std::size_t>(i) * width + l) * channels + c;
                    const std::size_t dst = horizontal
                                                ? (static_cast<std::size_t>(l) * out_len + o) * channels + c
                                                : (static_cast<std::size_t>(o) * width + l) * channels + c;
                    out[dst] += static_cast<float>(w * in[src]);
                }
        }
    }
    return out;
}

SegMap downscale_seg(const SegMap& seg, int max_side)
{
    const int side = std::max(seg.width(), seg.height());
    if (side <= max_side)
        return seg;
    const double f = static_cast<double>(max_side) / side;
    const int w = std::max(1, static_cast<int>(std::lround(seg.width() * f)));
    const int h = std::max(1, static_cast<int>(std::lround(seg.height() * f)));
    SegMap out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            out.set(x, y, seg.at(std::min(seg.width() - 1, static_cast<int>((x + 0.5) * seg.width() / w)),
                                 std::min(seg.height() - 1, static_cast<int>((y + 0.5) * seg.height() / h))));
    return out;
}

Point rescale(Point p, Extent from, Extent to)
{
    return {(p.x + 0.5) * to.width / from.width - 0.5, (p.y + 0.5) * to.height / from.height - 0.5};
}

Point read_point(const json& j, const char* what)
{
    if (!j.is_object() || !j.contains("x") || !j.contains("y") || !j["x"].is_number() || !j["y"].is_number())
        throw InputError(std::string(what) + " must be {\"x\": number, \"y\": number}");
    return {j["x"].get<double>(), j["y"].get<double>()};
}

std::string png_b64(const EncodedImage& img)
{
    return base64_encode(encode_png(downscale_to_fit(img, kPreviewMaxSide), BitDepth::eight));
}

}  // namespace

RenderRequest render_request_from_json(const json& j)
{
    if (!j.is_object())
        throw InputError("render request must be a JSON object");
    RenderRequest req;
    const bool has_body = j.contains("template"), has_id = j.contains("id");
    if (has_body == has_id)
        throw InputError("render request needs exactly one of \"template\" and \"id\"");
    if (has_body)
        req.body = template_from_json(j["template"]);
    else if (!j["id"].is_string())
        throw InputError("\"id\" must be a string");
    else
        req.id = j["id"].get<std::string>();
    if (j.contains("light_pos"))
        req.light_pos = read_point(j["light_pos"], "light_pos");
    if (j.contains("canvas")) {
        const json& c = j["canvas"];
        if (!c.is_object() || !c.contains("width") || !c.contains("height") || !c["width"].is_number_integer() ||
            !c["height"].is_number_integer())
            throw InputError("canvas must be {\"width\": integer, \"height\": integer}");
        req.canvas = Extent{c["width"].get<int>(), c["height"].get<int>()};
    }
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned())
            throw InputError("seed must be a non-negative integer");
        req.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("encoding")) {
        const std::string e = j["encoding"].is_string() ? j["encoding"].get<std::string>() : "";
        if (e == "preview")
            req.encoding = OutputEncoding::preview;
        else if (e == "full")
            req.encoding = OutputEncoding::full;
        else
            throw InputError("encoding must be \"preview\" or \"full\"");
    }
    return req;
}

TemplateDoc resolve_render(const Catalog& catalog, const RenderRequest& req)
{
    if (req.body.has_value() == req.id.has_value())
        throw InputError("render request needs exactly one of a template body and an id");
    TemplateDoc doc = req.body ? *req.body : catalog.load_template(*req.id);

    if (auto* s = std::get_if<ScatterTemplate>(&doc.body)) {
        if (req.light_pos)
            throw InputError("light_pos applies to reflect templates only");
        if (req.canvas) {
            s->source_pos = rescale(s->source_pos, s->canvas, *req.canvas);
            s->canvas = *req.canvas;
        }
        if (req.seed && s->shimmer)
            s->shimmer->angular_jitter_seed = *req.seed;
    } else {
        auto& b = std::get<ReflectBody>(doc.body);
        if (req.light_pos)
            b.light_pos = *req.light_pos;
        if (req.canvas) {
            b.reflect.optical_center = rescale(b.reflect.optical_center, b.reflect.canvas, *req.canvas);
            b.light_pos = rescale(b.light_pos, b.reflect.canvas, *req.canvas);
            b.reflect.canvas = *req.canvas;
        }
    }
    require_valid(validate_template(to_json(doc)));
    return doc;
}

std::vector<std::uint8_t> render_png(const Catalog& catalog, const RenderRequest& req)
{
    const EncodedImage flare = render_template(resolve_render(catalog, req)).flare;
    if (req.encoding == OutputEncoding::full)
        return encode_png(flare, BitDepth::sixteen);
    return encode_png(downscale_to_fit(flare, kPreviewMaxSide), BitDepth::eight);
}

EncodedImage downscale_to_fit(const EncodedImage& img, int max_side)
{
    const int side = std::max(img.width(), img.height());
    if (side <= max_side)
        return img;
    const double f = static_cast<double>(max_side) / side;
    const int w = std::max(1, static_cast<int>(std::lround(img.width() * f)));
    const int h = std::max(1, static_cast<int>(std::lround(img.height() * f)));
    const int c = img.channels();
    const std::vector<float> in(img.samples().begin(), img.samples().end());
    auto rows = resample_axis(in, img.width(), w, img.height(), c, true, img.width());
    auto out = resample_axis(rows, img.height(), h, w, c, false, w);
    for (float& v : out)
        v = std::clamp(v, 0.0f, 1.0f);
    return EncodedImage(w, h, c, std::move(out));
}

std::string base64_encode(std::span<const std::uint8_t> bytes)
{
    // EVP_EncodeBlock appends a terminating NUL.
    std::string out(4 * ((bytes.size() + 2) / 3) + 1, '\0');
    const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                                  static_cast<int>(bytes.size()));
    out.resize(static_cast<std::size_t>(n));
    return out;
}

std::vector<std::uint8_t> base64_decode(const std::string& text)
{
    if (text.size() % 4 != 0)
        throw InputError("base64 text length must be a multiple of 4");
    std::vector<std::uint8_t> out(3 * (text.size() / 4));
    const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(text.data()),
                                  static_cast<int>(text.size()));
    if (n < 0)
        throw InputError("malformed base64 text");
    // EVP_DecodeBlock keeps the zero bytes produced by padding.
    std::size_t pad = 0;
    for (auto it = text.rbegin(); it != text.rend() && *it == '=' && pad < 2; ++it)
        ++pad;
    out.resize(static_cast<std::size_t>(n) - pad);
    return out;
}

json sample_bundle(const PairedSample& s)
{
    return {{"input", png_b64(s.input)},
            {"flare_free", png_b64(s.flare_free)},
            {"flare", png_b64(encode_flare_gt(s))},
            {"light", png_b64(s.light_source)},
            {"mask", base64_encode(downscale_seg(s.seg, kPreviewMaxSide).encode_png())},
            {"provenance",
             {{"source_id", s.provenance.source_id},
              {"seed", s.provenance.seed},
              {"params", to_json(s.provenance.params)}}}};
}

json to_json(const Violations& vs)
{
    json out = json::array();
    for (const auto& v : vs)
        out.push_back({{"path", v.path},
                       {"kind", v.kind == Violation::Kind::schema ? "schema" : "semantic"},
                       {"message", v.message}});
    return out;
}

}  // namespace nightflare
