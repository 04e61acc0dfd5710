// Copyright Contributors to the nightflare project.
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <chrono>
#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <httplib.h>

#include "nightflare/facade.hpp"
#include "nightflare/metrics.hpp"
#include "nightflare/png_io.hpp"

namespace nightflare {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct SourceArgs {
    std::string template_file;
    std::string id;
    std::string library = "data/catalog";

    void add(CLI::App* cmd)
    {
        auto* t = cmd->add_option("--template", template_file, "Template JSON file")->check(CLI::ExistingFile);
        auto* i = cmd->add_option("--id", id, "Template or real-flare id in the library");
        t->excludes(i);
        cmd->add_option("--library", library, "Flare library directory")->capture_default_str();
    }

    void require(const CLI::App* cmd) const
    {
        if (template_file.empty() == id.empty())
            throw CLI::ValidationError(cmd->get_name(), "exactly one of --template and --id is required");
    }
};

TemplateDoc read_template_file(const fs::path& path)
{
    const auto bytes = read_file(path);
    return parse_template(std::string(bytes.begin(), bytes.end()));
}

void write_text(const fs::path& path, const std::string& text)
{
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::string one_line(std::string s)
{
    std::replace(s.begin(), s.end(), '\n', ' ');
    return s;
}

/// Files of `dir` that decode as PNG, keyed by file name.
std::vector<std::string> png_names(const fs::path& dir)
{
    if (!fs::is_directory(dir))
        throw InputError("not a directory: " + dir.string());
    std::vector<std::string> out;
    for (const auto& p : list_pngs(dir))
        out.push_back(p.filename().string());
    return out;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app("Procedural night-time lens flare synthesis", "nightflare");
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", "nightflare 0.1.0");
    std::string report_path;
    app.add_option("--report", report_path, "Write a JSON summary of the run to this file");
    json report;

    // render
    auto* render = app.add_subcommand("render", "Render a template to PNG");
    SourceArgs render_src;
    render_src.add(render);
    std::string render_out;
    std::uint64_t render_seed = 0;
    std::vector<double> light;
    std::vector<int> canvas;
    bool preview = false;
    render->add_option("--out", render_out, "Output PNG")->required();
    auto* render_seed_opt = render->add_option("--seed", render_seed, "Shimmer jitter seed");
    render->add_option("--light", light, "Light position X Y (reflect templates)")->expected(2);
    render->add_option("--canvas", canvas, "Canvas override W H")->expected(2);
    render->add_flag("--preview", preview, "8-bit output downscaled to 512 px");

    // compose
    auto* compose = app.add_subcommand("compose", "Compose one training pair");
    SourceArgs compose_src;
    compose_src.add(compose);
    std::string compose_bg, compose_out;
    std::uint64_t compose_seed = 0;
    std::vector<int> compose_crop{512, 512};
    compose->add_option("--background", compose_bg, "Background PNG (synthetic when absent)")
        ->check(CLI::ExistingFile);
    compose->add_option("--out", compose_out, "Output directory")->required();
    compose->add_option("--seed", compose_seed, "Sample seed")->capture_default_str();
    compose->add_option("--crop", compose_crop, "Crop W H")->expected(2)->capture_default_str();

    // dataset
    auto* dataset = app.add_subcommand("dataset", "Generate a paired dataset with manifest");
    DatasetSpec ds;
    ds.library = "data/catalog";
    ds.backgrounds = "data/backgrounds";
    std::string ds_out = "dataset";
    std::vector<int> ds_crop{512, 512};
    dataset->add_option("--library", ds.library, "Flare library directory")->capture_default_str();
    dataset->add_option("--backgrounds", ds.backgrounds, "Background PNG directory")->capture_default_str();
    dataset->add_option("--out", ds_out, "Output directory")->capture_default_str();
    dataset->add_option("--n", ds.count, "Number of samples")->required();
    dataset->add_option("--seed", ds.master_seed, "Master seed")->capture_default_str();
    dataset->add_option("--mix", ds.mix_ratio, "Probability of a real flare when any exist")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    dataset->add_option("--threads", ds.threads, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
    dataset->add_option("--crop", ds_crop, "Crop W H")->expected(2)->capture_default_str();
    dataset->add_option("--dataset-id", ds.dataset_id, "Name recorded in the manifest")->capture_default_str();

    // eval
    auto* eval = app.add_subcommand("eval", "Score predictions against ground truth");
    std::string pred_dir, gt_dir, mask_dir, jsonl_path;
    eval->add_option("--pred", pred_dir, "Prediction PNG directory")->required();
    eval->add_option("--gt", gt_dir, "Ground-truth PNG directory")->required();
    eval->add_option("--mask", mask_dir, "Segmentation mask directory (same file names)");
    eval->add_option("--jsonl", jsonl_path, "Also write per-image rows as JSON lines");

    // extract-light
    auto* extract = app.add_subcommand("extract-light", "Threshold-based light source extraction baseline");
    std::string extract_in, extract_out, extract_blend;
    BaselineOptions baseline;
    extract->add_option("--in", extract_in, "Input PNG")->required()->check(CLI::ExistingFile);
    extract->add_option("--out", extract_out, "Mask PNG")->required();
    extract->add_option("--blended", extract_blend, "Input seen through the mask");
    extract->add_option("--threshold", baseline.threshold, "Luminance threshold")->capture_default_str();
    extract->add_option("--radius", baseline.opening_radius, "Opening disc radius")->capture_default_str();
    extract->add_option("--feather", baseline.feather_sigma, "Feather sigma")->capture_default_str();

    // validate
    auto* validate = app.add_subcommand("validate", "Check template documents");
    std::vector<std::string> validate_files;
    validate->add_option("templates", validate_files, "Template JSON files")->required()->check(CLI::ExistingFile);

    // serve
    auto* serve = app.add_subcommand("serve", "Run the HTTP service");
    ServiceConfig service;
    std::string host = "127.0.0.1";
    int port = 8080;
    serve->add_option("--library", service.library, "Flare library directory")->capture_default_str();
    serve->add_option("--backgrounds", service.backgrounds, "Background PNG directory")->capture_default_str();
    serve->add_option("--host", host, "Bind address")->capture_default_str();
    serve->add_option("--port", port, "Port")->check(CLI::Range(0, 65535))->capture_default_str();

    // import-real
    auto* import = app.add_subcommand("import-real", "Add a captured flare and its light source to the library");
    std::string import_library = "data/catalog", import_flare, import_light;
    TemplateMetadata import_meta;
    import->add_option("--library", import_library, "Flare library directory")->capture_default_str();
    import->add_option("--flare", import_flare, "Flare PNG")->required()->check(CLI::ExistingFile);
    import->add_option("--light", import_light, "Light source PNG")->required();
    import->add_option("--name", import_meta.name, "Display name");
    import->add_option("--tag", import_meta.tags, "Tag (repeatable)");
    import->add_option("--author", import_meta.author, "Author");

    // make-backgrounds
    auto* backgrounds = app.add_subcommand("make-backgrounds", "Write procedural night-time backgrounds");
    std::string bg_out = "data/backgrounds";
    int bg_count = 4, bg_width = 640, bg_height = 640;
    std::uint64_t bg_seed = 0;
    backgrounds->add_option("--out", bg_out, "Output directory")->capture_default_str();
    backgrounds->add_option("--n", bg_count, "Number of images")->check(CLI::PositiveNumber)->capture_default_str();
    backgrounds->add_option("--seed", bg_seed, "Seed of the first image")->capture_default_str();
    backgrounds->add_option("--width", bg_width, "Width")->check(CLI::PositiveNumber)->capture_default_str();
    backgrounds->add_option("--height", bg_height, "Height")->check(CLI::PositiveNumber)->capture_default_str();

    std::vector<const char*> argv{"nightflare"};
    for (const auto& a : args)
        argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
        if (render->parsed())
            render_src.require(render);
        if (compose->parsed())
            compose_src.require(compose);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? 0 : 2;
    }

    const auto start = std::chrono::steady_clock::now();
    int code = 0;
    try {
        if (render->parsed()) {
            const Catalog catalog(render_src.library);
            RenderRequest req;
            if (!render_src.template_file.empty())
                req.body = read_template_file(render_src.template_file);
            else
                req.id = render_src.id;
            if (!light.empty())
                req.light_pos = Point{light[0], light[1]};
            if (!canvas.empty())
                req.canvas = Extent{canvas[0], canvas[1]};
            if (render_seed_opt->count() > 0)
                req.seed = render_seed;
            req.encoding = preview ? OutputEncoding::preview : OutputEncoding::full;
            const auto png = render_png(catalog, req);
            if (fs::path(render_out).has_parent_path())
                fs::create_directories(fs::path(render_out).parent_path());
            write_file(render_out, png);
            report = {{"command", "render"}, {"out", render_out}, {"sha256", sha256_hex(png)}};
        } else if (compose->parsed()) {
            const Catalog catalog(compose_src.library);
            const FlareSource src = compose_src.template_file.empty()
                                        ? *catalog.flare_source(compose_src.id)
                                        : render_template(read_template_file(compose_src.template_file));
            ComposeOptions opts;
            opts.crop = {compose_crop[0], compose_crop[1]};
            const EncodedImage bg = compose_bg.empty()
                                        ? synth_background(opts.crop.width + 128, opts.crop.height + 128, compose_seed)
                                        : read_png(compose_bg);
            const PairedSample s = compose_pair(bg, src, compose_seed, opts);
            const fs::path dir = compose_out;
            fs::create_directories(dir);
            write_png(dir / "input.png", s.input, BitDepth::sixteen);
            write_png(dir / "gt.png", s.flare_free, BitDepth::sixteen);
            write_png(dir / "flare.png", encode_flare_gt(s), BitDepth::sixteen);
            write_png(dir / "light.png", s.light_source, BitDepth::sixteen);
            write_file(dir / "mask.png", s.seg.encode_png());
            const json prov{{"source_id", s.provenance.source_id},
                            {"seed", s.provenance.seed},
                            {"params", to_json(s.provenance.params)}};
            write_text(dir / "provenance.json", prov.dump(2) + "\n");
            report = {{"command", "compose"}, {"out", compose_out}, {"provenance", prov}};
        } else if (dataset->parsed()) {
            ds.compose.crop = {ds_crop[0], ds_crop[1]};
            const DatasetResult r = generate_dataset(ds, ds_out);
            const auto problems = verify_dataset(ds_out);
            for (const auto& p : problems)
                err << "nightflare: verify: " << p << '\n';
            out << "wrote " << r.samples << " samples to " << ds_out << '\n';
            report = {{"command", "dataset"},
                      {"out", ds_out},
                      {"samples", r.samples},
                      {"complete", r.complete},
                      {"verified", problems.empty()},
                      {"manifest_sha256", sha256_hex(read_file(r.manifest))}};
            code = problems.empty() ? 0 : 1;
        } else if (eval->parsed()) {
            EvalReport rep;
            for (const auto& name : png_names(pred_dir)) {
                const fs::path gt = fs::path(gt_dir) / name;
                if (!fs::is_regular_file(gt))
                    throw InputError("no ground truth for " + name);
                std::optional<SegMap> seg;
                if (!mask_dir.empty() && fs::is_regular_file(fs::path(mask_dir) / name))
                    seg = SegMap::decode_png(read_file(fs::path(mask_dir) / name));
                rep.rows.push_back(evaluate_pair(name, read_png(fs::path(pred_dir) / name), read_png(gt), seg));
            }
            if (rep.rows.empty())
                throw InputError("no PNG files in " + pred_dir);
            out << rep.table();
            if (!jsonl_path.empty())
                write_text(jsonl_path, rep.jsonl());
            json rows = json::array();
            std::istringstream lines(rep.jsonl());
            for (std::string line; std::getline(lines, line);)
                rows.push_back(json::parse(line));
            report = {{"command", "eval"}, {"rows", rows}};
        } else if (extract->parsed()) {
            const EncodedImage img = read_png(extract_in);
            const BaselineResult r = extract_light_source_baseline(img, baseline);
            write_png(extract_out, r.mask, BitDepth::sixteen);
            if (!extract_blend.empty())
                write_png(extract_blend, r.blended, BitDepth::sixteen);
            double area = 0.0;
            for (float v : r.mask.samples())
                area += v;
            report = {{"command", "extract-light"}, {"mask_area", area}};
        } else if (validate->parsed()) {
            json files = json::array();
            for (const auto& f : validate_files) {
                Violations vs;
                try {
                    const auto bytes = read_file(f);
                    vs = validate_template(parse_json_text(std::string(bytes.begin(), bytes.end())));
                } catch (const ParseError& e) {
                    vs.push_back({Violation::Kind::schema, "$", e.what()});
                }
                if (vs.empty())
                    out << f << ": ok\n";
                for (const auto& v : vs)
                    out << f << ": " << (v.kind == Violation::Kind::schema ? "schema" : "semantic") << ": " << v.path
                        << ": " << v.message << '\n';
                code = vs.empty() ? code : 1;
                files.push_back({{"file", f}, {"violations", to_json(vs)}});
            }
            report = {{"command", "validate"}, {"files", files}};
        } else if (serve->parsed()) {
            Catalog catalog(service.library);
            httplib::Server server;
            mount_service(server, catalog, service);
            const int bound = port == 0 ? server.bind_to_any_port(host) : (server.bind_to_port(host, port) ? port : -1);
            if (bound < 0)
                throw IoError("cannot bind " + host + ":" + std::to_string(port));
            out << "listening on http://" << host << ":" << bound << std::endl;
            server.listen_after_bind();
            report = {{"command", "serve"}, {"port", bound}};
        } else if (import->parsed()) {
            Catalog catalog(import_library);
            const ImportResult r = catalog.import_real_flare(import_flare, import_light, import_meta);
            out << r.id << '\n';
            if (r.warning)
                err << "nightflare: warning: " << *r.warning << '\n';
            report = {{"command", "import-real"}, {"id", r.id}, {"dominance_violations", r.dominance_violations}};
        } else if (backgrounds->parsed()) {
            json written = json::array();
            for (int i = 0; i < bg_count; ++i) {
                char name[32];
                std::snprintf(name, sizeof name, "night_%03d.png", i);
                const fs::path p = fs::path(bg_out) / name;
                fs::create_directories(p.parent_path());
                write_png(p, synth_background(bg_width, bg_height, bg_seed + i), BitDepth::eight);
                written.push_back(p.string());
            }
            report = {{"command", "make-backgrounds"}, {"files", written}};
        }
    } catch (const std::exception& e) {
        err << "nightflare: error: " << one_line(e.what()) << '\n';
        code = 1;
        report = {{"command", app.get_subcommands().front()->get_name()}, {"error", e.what()}};
    }

    if (!report_path.empty()) {
        report["exit_code"] = code;
        report["seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        try {
            write_text(report_path, report.dump(2) + "\n");
        } catch (const std::exception& e) {
            err << "nightflare: error: cannot write report: " << one_line(e.what()) << '\n';
            code = 1;
        }
    }
    return code;
}

}  // namespace nightflare
