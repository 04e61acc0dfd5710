// Copyright Contributors to the nightflare project.
// SPDX-License-Identifier: Apache-2.0

/// \file
/// Template documents, the flare library on disk and dataset generation.
///
/// Library layout:
///   <root>/templates/<id>.json
///   <root>/real/<id>/flare.png, light.png, meta.json
///
/// Dataset layout:
///   <out>/manifest.jsonl
///   <out>/<index:06>/input.png, gt.png, flare.png, light.png, mask.png

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "nightflare/compose.hpp"
#include "nightflare/reflect.hpp"
#include "nightflare/scatter.hpp"

namespace nightflare {

inline constexpr int kTemplateSchemaVersion = 1;

class NotFoundError : public Error {
public:
    using Error::Error;
};

/// Malformed JSON text; the message carries the byte offset.
class ParseError : public InputError {
public:
    using InputError::InputError;
};

struct TemplateMetadata {
    std::string name;
    std::vector<std::string> tags;
    std::string author;
    std::optional<std::string> reference_image;

    friend bool operator==(const TemplateMetadata&, const TemplateMetadata&) = default;
};

/// Reflect templates carry the light position used to render them.
struct ReflectBody {
    ReflectTemplate reflect;
    Point light_pos{384.0, 160.0};

    friend bool operator==(const ReflectBody&, const ReflectBody&) = default;
};

struct TemplateDoc {
    std::string id;
    int schema_version = kTemplateSchemaVersion;
    TemplateMetadata metadata;
    std::variant<ScatterTemplate, ReflectBody> body;

    bool is_scatter() const noexcept { return std::holds_alternative<ScatterTemplate>(body); }

    friend bool operator==(const TemplateDoc&, const TemplateDoc&) = default;
};

nlohmann::json to_json(const TemplateDoc& doc);
nlohmann::json to_json(const AugmentationParams& p);

/// Every schema and semantic violation with its field path. Body fields
/// are reported relative to the body ("glare.radius", "irises[2].k").
Violations validate_template(const nlohmann::json& doc);

/// Throws SpecError with the violations when the document is invalid.
TemplateDoc template_from_json(const nlohmann::json& doc);

/// Throws ParseError for malformed text, SpecError for invalid documents.
nlohmann::json parse_json_text(const std::string& text);
TemplateDoc parse_template(const std::string& text);
std::string serialize_template(const TemplateDoc& doc);

/// Flare, light and component layers of a template at its own canvas size.
FlareSource render_template(const TemplateDoc& doc);

struct ImportResult {
    std::string id;
    std::size_t dominance_violations = 0;  ///< pixels where light exceeds flare by more than 2/255
    std::optional<std::string> warning;
};

/// Template library and imported real flare pairs under one directory.
/// Writes are serialized; reads go straight to disk.
class Catalog {
public:
    explicit Catalog(std::filesystem::path root);

    const std::filesystem::path& root() const noexcept { return root_; }

    std::vector<std::string> template_ids() const;
    bool has_template(const std::string& id) const;
    /// Throws NotFoundError for an unknown id.
    TemplateDoc load_template(const std::string& id) const;
    /// Validates, then writes atomically. Returns true when the stored
    /// document changed.
    bool save_template(const TemplateDoc& doc);

    std::vector<std::string> real_ids() const;
    /// Throws InputError on size mismatch or missing light image.
    ImportResult import_real_flare(const std::filesystem::path& flare_png, const std::filesystem::path& light_png,
                                   const TemplateMetadata& metadata);
    FlareSource load_real(const std::string& id) const;

    /// Template renders are cached per id for the lifetime of the catalog.
    std::shared_ptr<const FlareSource> flare_source(const std::string& id) const;

private:
    std::filesystem::path root_;
    mutable std::mutex write_mutex_;
    mutable std::mutex cache_mutex_;
    mutable std::map<std::string, std::shared_ptr<const FlareSource>> cache_;
};

/// Valid ids: 1-64 characters from [A-Za-z0-9_-].
bool valid_id(const std::string& id) noexcept;

/// Per-sample seed derived from the master seed and the index.
std::uint64_t sample_seed(std::uint64_t master, std::uint64_t index) noexcept;

struct DatasetSpec {
    std::string dataset_id = "nightflare";
    std::filesystem::path library;
    std::filesystem::path backgrounds;
    std::uint64_t master_seed = 0;
    std::size_t count = 0;
    double mix_ratio = 0.5;  ///< probability of drawing a real flare when any are available
    ComposeOptions compose;
    int threads = 1;
};

struct PlannedSample {
    std::size_t index = 0;
    std::uint64_t seed = 0;
    bool real = false;
    std::string source_id;
    std::size_t background = 0;
};

/// Source and background choice for every sample; no rendering. Throws
/// InputError when there are no templates and no real flares, or no
/// backgrounds while count > 0. Throws if two samples share a seed.
std::vector<PlannedSample> plan_dataset(const DatasetSpec& spec, const std::vector<std::string>& template_ids,
                                        const std::vector<std::string>& real_ids, std::size_t background_count);

struct DatasetResult {
    std::filesystem::path manifest;
    std::size_t samples = 0;
    bool complete = false;
};

/// Sorted PNG files of a directory.
std::vector<std::filesystem::path> list_pngs(const std::filesystem::path& dir);

/// Writes every sample and the manifest into `out`. On failure the manifest
/// is closed with "complete": false and the error is rethrown.
DatasetResult generate_dataset(const DatasetSpec& spec, const std::filesystem::path& out);

/// Re-hashes every file named in the manifest. Returns one message per
/// problem; empty when the dataset is intact and complete.
std::vector<std::string> verify_dataset(const std::filesystem::path& out);

std::string sha256_hex(std::span<const std::uint8_t> bytes);

/// Procedural night-time background: dark sky gradient, building blocks with
/// lit windows and sensor-like grain. Deterministic in seed.
EncodedImage synth_background(int width, int height, std::uint64_t seed);

}  // namespace nightflare
