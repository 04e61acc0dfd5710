// Copyright Contributors to the nightflare project.
// SPDX-License-Identifier: Apache-2.0

#include <chrono>
#include <cstdio>

#include <httplib.h>

#include "nightflare/facade.hpp"

namespace nightflare {

using nlohmann::json;

namespace {

void send_json(httplib::Response& res, int status, const json& body)
{
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_violations(httplib::Response& res, const Violations& vs)
{
    bool schema = false;
    for (const auto& v : vs)
        schema = schema || v.kind == Violation::Kind::schema;
    send_json(res, schema ? 400 : 422, {{"error", describe(vs)}, {"violations", to_json(vs)}});
}

/// Maps library exceptions onto status codes.
template <class F>
void guarded(httplib::Response& res, F&& f)
{
    try {
        f();
    } catch (const SpecError& e) {
        send_violations(res, e.violations());
    } catch (const NotFoundError& e) {
        send_json(res, 404, {{"error", e.what()}});
    } catch (const InputError& e) {
        send_json(res, 400, {{"error", e.what()}});
    } catch (const std::exception& e) {
        send_json(res, 500, {{"error", e.what()}});
    }
}

FlareSource request_source(const Catalog& catalog, const json& j)
{
    const bool has_body = j.contains("template"), has_id = j.contains("id");
    if (has_body == has_id)
        throw InputError("request needs exactly one of \"template\" and \"id\"");
    if (has_body)
        return render_template(template_from_json(j["template"]));
    if (!j["id"].is_string())
        throw InputError("\"id\" must be a string");
    return *catalog.flare_source(j["id"].get<std::string>());
}

EncodedImage request_background(const ServiceConfig& config, const json& j, Extent crop, std::uint64_t seed)
{
    if (!j.contains("background"))
        return synth_background(crop.width + 128, crop.height + 128, seed);
    if (!j["background"].is_string())
        throw InputError("\"background\" must be a file name");
    const std::string name = j["background"].get<std::string>();
    for (const auto& p : list_pngs(config.backgrounds))
        if (p.filename().string() == name)
            return read_png(p);
    throw NotFoundError("no background named '" + name + "'");
}

}  // namespace

void mount_service(httplib::Server& server, Catalog& catalog, const ServiceConfig& config)
{
    // The designer UI is served from another origin.
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
    server.Options(".*", [](const httplib::Request&, httplib::Response& res) {
        res.set_header("Access-Control-Allow-Methods", "GET, PUT, POST, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type");
        res.status = 204;
    });

    server.Post("/render", [&catalog](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const auto start = std::chrono::steady_clock::now();
            const auto png = render_png(catalog, render_request_from_json(parse_json_text(req.body)));
            const double ms =
                std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.3f", ms);
            res.set_header("X-Render-Time-Ms", buf);
            res.set_content(std::string(png.begin(), png.end()), "image/png");
        });
    });

    server.Post("/compose-preview", [&catalog, config](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const json j = parse_json_text(req.body);
            if (!j.is_object())
                throw InputError("request must be a JSON object");
            if (!j.contains("seed") || !j["seed"].is_number_unsigned())
                throw InputError("\"seed\" must be a non-negative integer");
            const auto seed = j["seed"].get<std::uint64_t>();
            ComposeOptions opts;
            if (j.contains("crop")) {
                const json& c = j["crop"];
                if (!c.is_object() || !c.value("width", json()).is_number_integer() ||
                    !c.value("height", json()).is_number_integer())
                    throw InputError("crop must be {\"width\": integer, \"height\": integer}");
                opts.crop = {c["width"].get<int>(), c["height"].get<int>()};
                if (opts.crop.width <= 0 || opts.crop.height <= 0)
                    throw InputError("crop must be positive");
            }
            const FlareSource src = request_source(catalog, j);
            const EncodedImage bg = request_background(config, j, opts.crop, seed);
            send_json(res, 200, sample_bundle(compose_pair(bg, src, seed, opts)));
        });
    });

    server.Get("/templates", [&catalog](const httplib::Request&, httplib::Response& res) {
        guarded(res, [&] { send_json(res, 200, {{"templates", catalog.template_ids()}, {"real", catalog.real_ids()}}); });
    });

    server.Get(R"(/templates/([^/]+))", [&catalog](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            res.set_content(serialize_template(catalog.load_template(req.matches[1].str())), "application/json");
        });
    });

    server.Put(R"(/templates/([^/]+))", [&catalog](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const std::string id = req.matches[1].str();
            if (!valid_id(id))
                throw InputError("invalid template id '" + id + "'");
            const TemplateDoc doc = template_from_json(parse_json_text(req.body));
            if (doc.id != id)
                throw InputError("document id '" + doc.id + "' does not match the URL");
            const bool changed = catalog.save_template(doc);
            send_json(res, 200, {{"id", id}, {"changed", changed}});
        });
    });

    server.Post("/validate", [](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const Violations vs = validate_template(parse_json_text(req.body));
            if (!vs.empty())
                send_violations(res, vs);
            else
                send_json(res, 200, {{"valid", true}, {"violations", json::array()}});
        });
    });
}

}  // namespace nightflare
