// Copyright Contributors to the nightflare project.
// SPDX-License-Identifier: Apache-2.0

/// \file
/// Operations shared by the command-line tool and the HTTP service.

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nightflare/catalog.hpp"

namespace httplib {
class Server;
}

namespace nightflare {

/// Long side of preview renders.
inline constexpr int kPreviewMaxSide = 512;

enum class OutputEncoding {
    preview,  ///< downscaled to kPreviewMaxSide, 8-bit
    full,     ///< native size, 16-bit
};

/// Exactly one of `body` and `id` is set.
struct RenderRequest {
    std::optional<TemplateDoc> body;
    std::optional<std::string> id;
    std::optional<Point> light_pos;  ///< reflect templates only
    std::optional<Extent> canvas;    ///< positions scale with the canvas
    std::optional<std::uint64_t> seed;  ///< replaces the shimmer jitter seed
    OutputEncoding encoding = OutputEncoding::preview;
};

/// Throws InputError for a malformed request, SpecError for an invalid
/// template body, NotFoundError for an unknown id.
RenderRequest render_request_from_json(const nlohmann::json& j);

/// The template a request resolves to, with overrides applied and checked.
TemplateDoc resolve_render(const Catalog& catalog, const RenderRequest& req);

/// PNG bytes of the flare.
std::vector<std::uint8_t> render_png(const Catalog& catalog, const RenderRequest& req);

/// Area-average downscale so the long side is at most `max_side`; smaller
/// images are returned unchanged.
EncodedImage downscale_to_fit(const EncodedImage& img, int max_side);

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> base64_decode(const std::string& text);

/// Preview PNGs of every image of a sample plus its provenance.
nlohmann::json sample_bundle(const PairedSample& s);

nlohmann::json to_json(const Violations& vs);

struct ServiceConfig {
    std::filesystem::path library = "data/catalog";
    std::filesystem::path backgrounds = "data/backgrounds";
};

/// Registers the endpoints on `server`:
///   POST /render, POST /compose-preview, GET /templates,
///   GET /templates/{id}, PUT /templates/{id}, POST /validate
/// The catalog must outlive the server.
void mount_service(httplib::Server& server, Catalog& catalog, const ServiceConfig& config);

/// Runs the command-line tool. Returns the process exit code: 0 success,
/// 1 failure, 2 usage error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nightflare
