// Copyright Contributors to the nightflare project.
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <fstream>

#include <openssl/evp.h>

#include "nightflare/catalog.hpp"
#include "nightflare/png_io.hpp"

namespace nightflare {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr float kDominanceSlack = 2.0f / 255.0f;

std::vector<std::string> sorted_stems(const fs::path& dir, bool directories)
{
    std::vector<std::string> out;
    std::error_code ec;
    if (!fs::is_directory(dir, ec))
        return out;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (directories) {
            if (e.is_directory() && valid_id(e.path().filename().string()))
                out.push_back(e.path().filename().string());
        } else if (e.is_regular_file() && e.path().extension() == ".json" && valid_id(e.path().stem().string())) {
            out.push_back(e.path().stem().string());
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

void write_atomic(const fs::path& path, const std::string& text)
{
    fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    write_file(tmp, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
    fs::rename(tmp, path);
}

std::string read_text(const fs::path& path)
{
    const auto bytes = read_file(path);
    return std::string(bytes.begin(), bytes.end());
}

EncodedImage rgb_only(const EncodedImage& img)
{
    if (img.channels() == 3)
        return img;
    EncodedImage out(img.width(), img.height(), 3);
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
            for (int c = 0; c < 3; ++c)
                out.at(x, y, c) = img.at(x, y, img.channels() == 1 ? 0 : c);
    return out;
}

json metadata_json(const TemplateMetadata& m)
{
    json j{{"name", m.name}, {"tags", m.tags}, {"author", m.author}};
    if (m.reference_image)
        j["reference_image"] = *m.reference_image;
    return j;
}

}  // namespace

std::string sha256_hex(std::span<const std::uint8_t> bytes)
{
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw Error("sha256 digest failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[md[i] >> 4]);
        out.push_back(hex[md[i] & 15]);
    }
    return out;
}

Catalog::Catalog(fs::path root) : root_(std::move(root)) {}

std::vector<std::string> Catalog::template_ids() const { return sorted_stems(root_ / "templates", false); }

bool Catalog::has_template(const std::string& id) const
{
    return valid_id(id) && fs::is_regular_file(root_ / "templates" / (id + ".json"));
}

TemplateDoc Catalog::load_template(const std::string& id) const
{
    if (!has_template(id))
        throw NotFoundError("no template named '" + id + "'");
    return parse_template(read_text(root_ / "templates" / (id + ".json")));
}

bool Catalog::save_template(const TemplateDoc& doc)
{
    require_valid(validate_template(to_json(doc)));
    const std::string text = serialize_template(doc);
    const fs::path path = root_ / "templates" / (doc.id + ".json");
    std::lock_guard lock(write_mutex_);
    if (fs::is_regular_file(path)) {
        // Formatting differences alone do not count as a change.
        try {
            if (parse_template(read_text(path)) == doc)
                return false;
        } catch (const InputError&) {
        }
    }
    write_atomic(path, text);
    std::lock_guard cache_lock(cache_mutex_);
    cache_.erase(doc.id);
    return true;
}

std::vector<std::string> Catalog::real_ids() const { return sorted_stems(root_ / "real", true); }

ImportResult Catalog::import_real_flare(const fs::path& flare_png, const fs::path& light_png,
                                        const TemplateMetadata& metadata)
{
    if (!fs::is_regular_file(light_png))
        throw InputError("real flare import needs a light-source image: " + light_png.string() + " not found");
    const auto flare_bytes = read_file(flare_png);
    const EncodedImage flare = rgb_only(decode_png(flare_bytes));
    const EncodedImage light = rgb_only(read_png(light_png));
    if (flare.extent() != light.extent())
        throw InputError("flare is " + std::to_string(flare.width()) + "x" + std::to_string(flare.height()) +
                         " but light source is " + std::to_string(light.width()) + "x" +
                         std::to_string(light.height()));

    ImportResult result;
    result.id = "real-" + sha256_hex(flare_bytes).substr(0, 12);
    for (std::size_t p = 0; p < flare.pixel_count(); ++p)
        for (int c = 0; c < 3; ++c)
            if (light.samples()[p * 3 + c] > flare.samples()[p * 3 + c] + kDominanceSlack) {
                ++result.dominance_violations;
                break;
            }
    if (result.dominance_violations > 0)
        result.warning = std::to_string(result.dominance_violations) +
                         " pixels where the light source is brighter than the flare";

    const fs::path dir = root_ / "real" / result.id;
    std::lock_guard lock(write_mutex_);
    fs::create_directories(dir);
    write_png(dir / "flare.png", flare, BitDepth::sixteen);
    write_png(dir / "light.png", light, BitDepth::sixteen);
    json meta{{"id", result.id},
              {"metadata", metadata_json(metadata)},
              {"source", flare_png.filename().string()},
              {"dominance_violations", result.dominance_violations}};
    write_atomic(dir / "meta.json", meta.dump(2) + "\n");
    return result;
}

FlareSource Catalog::load_real(const std::string& id) const
{
    const fs::path dir = root_ / "real" / id;
    if (!valid_id(id) || !fs::is_directory(dir))
        throw NotFoundError("no real flare named '" + id + "'");
    return {id, rgb_only(read_png(dir / "flare.png")), rgb_only(read_png(dir / "light.png")), std::nullopt,
            std::nullopt};
}

std::shared_ptr<const FlareSource> Catalog::flare_source(const std::string& id) const
{
    {
        std::lock_guard lock(cache_mutex_);
        if (const auto it = cache_.find(id); it != cache_.end())
            return it->second;
    }
    auto src = std::make_shared<const FlareSource>(has_template(id) ? render_template(load_template(id))
                                                                    : load_real(id));
    std::lock_guard lock(cache_mutex_);
    return cache_.try_emplace(id, std::move(src)).first->second;
}

}  // namespace nightflare
