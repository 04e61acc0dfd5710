// Copyright Contributors to the nightflare project.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <fstream>
#include <set>

#include "nightflare/catalog.hpp"
#include "support/fixtures.hpp"
#include "support/templates.hpp"

using namespace nightflare;
using nlohmann::json;
using testing::random_raster;
using testing::reflect_doc;
using testing::scatter_doc;
using testing::ScratchDir;

namespace {

bool has_violation(const Violations& v, const std::string& path, Violation::Kind kind)
{
    for (const auto& e : v)
        if (e.path == path && e.kind == kind)
            return true;
    return false;
}

std::string file_text(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

/// Library with two templates and a background folder of small images.
void seed_library(const std::filesystem::path& root, int bg_size = 96)
{
    Catalog cat(root / "lib");
    cat.save_template(scatter_doc("scatter-a", 96));
    cat.save_template(reflect_doc("reflect-a", 96));
    std::filesystem::create_directories(root / "bg");
    for (int i = 0; i < 2; ++i)
        write_png(root / "bg" / ("bg" + std::to_string(i) + ".png"), synth_background(bg_size, bg_size, i),
                  BitDepth::sixteen);
}

DatasetSpec small_spec(const std::filesystem::path& root)
{
    DatasetSpec spec;
    spec.library = root / "lib";
    spec.backgrounds = root / "bg";
    spec.master_seed = 11;
    spec.count = 4;
    spec.compose.crop = {64, 64};
    return spec;
}

}  // namespace

TEST_CASE("template round trip")
{
    for (const auto& doc : {scatter_doc(), reflect_doc()}) {
        const std::string text = serialize_template(doc);
        const TemplateDoc back = parse_template(text);
        CHECK(back == doc);
        CHECK(serialize_template(back) == text);
        CHECK(validate_template(json::parse(text)).empty());
    }

    // Every iris shape survives.
    TemplateDoc doc = reflect_doc();
    auto& body = std::get<ReflectBody>(doc.body);
    body.reflect.irises[0].shape = LatticeIris{2, 2, 5.0, 2.0};
    CHECK(parse_template(serialize_template(doc)) == doc);
}

TEST_CASE("semantic violations carry field paths")
{
    json j = to_json(scatter_doc());
    j["body"]["glare"]["radius"] = -5;
    const auto v = validate_template(j);
    REQUIRE(v.size() == 1);
    CHECK(v[0].path == "glare.radius");
    CHECK(v[0].kind == Violation::Kind::semantic);
    CHECK_THROWS_AS(template_from_json(j), SpecError);

    json r = to_json(reflect_doc());
    r["body"]["light_pos"] = {{"x", 500.0}, {"y", 10.0}};
    CHECK(has_violation(validate_template(r), "light_pos", Violation::Kind::semantic));
}

TEST_CASE("schema violations carry field paths")
{
    json j = to_json(reflect_doc());
    j["body"]["irises"][0].erase("k");
    const auto v = validate_template(j);
    REQUIRE(v.size() == 1);
    CHECK(v[0].path == "irises[0].k");
    CHECK(v[0].kind == Violation::Kind::schema);

    json s = to_json(scatter_doc());
    s["body"]["streaks"][0]["width"] = "wide";
    s["body"]["glare"]["colour"] = 1;
    s["body"]["glare"]["curve"][1]["rgb"] = {1, 2};
    const auto w = validate_template(s);
    CHECK(has_violation(w, "streaks[0].width", Violation::Kind::schema));
    CHECK(has_violation(w, "glare.colour", Violation::Kind::schema));
    CHECK(has_violation(w, "glare.curve[1].rgb", Violation::Kind::schema));

    json k = to_json(scatter_doc());
    k["kind"] = "bokeh";
    CHECK(has_violation(validate_template(k), "kind", Violation::Kind::schema));
    k = to_json(scatter_doc());
    k["schema_version"] = 2;
    CHECK(has_violation(validate_template(k), "schema_version", Violation::Kind::schema));
    k["id"] = "bad id";
    CHECK(has_violation(validate_template(k), "id", Violation::Kind::schema));
    CHECK(has_violation(validate_template(json::array()), "$", Violation::Kind::schema));

    CHECK_THROWS_AS(parse_template("{\"id\": "), ParseError);
}

TEST_CASE("ids")
{
    CHECK(valid_id("a"));
    CHECK(valid_id("Street_light-01"));
    CHECK(valid_id(std::string(64, 'x')));
    CHECK(!valid_id(""));
    CHECK(!valid_id(std::string(65, 'x')));
    CHECK(!valid_id("../etc"));
    CHECK(!valid_id("a b"));
}

TEST_CASE("render template")
{
    const FlareSource s = render_template(scatter_doc());
    CHECK(s.flare.extent() == Extent{128, 128});
    REQUIRE(s.glare);
    REQUIRE(s.streak);
    // Saturated core at the source.
    CHECK(s.light.at(64, 64, 0) == doctest::Approx(1.0f));

    const FlareSource r = render_template(reflect_doc());
    CHECK(r.glare->samples().size() == r.flare.samples().size());
    float light_max = 0.0f;
    for (float v : r.light.samples())
        light_max = std::max(light_max, v);
    CHECK(light_max == 0.0f);
}

TEST_CASE("catalog storage")
{
    ScratchDir dir("catalog");
    Catalog cat(dir.path());
    CHECK(cat.template_ids().empty());
    CHECK(cat.save_template(scatter_doc("b")));
    CHECK(cat.save_template(reflect_doc("a")));
    CHECK(!cat.save_template(scatter_doc("b")));
    CHECK(cat.template_ids() == std::vector<std::string>{"a", "b"});
    CHECK(cat.load_template("b") == scatter_doc("b"));
    CHECK_THROWS_AS(cat.load_template("zzz"), NotFoundError);
    CHECK_THROWS_AS(cat.load_template("../b"), NotFoundError);

    TemplateDoc bad = scatter_doc("c");
    std::get<ScatterTemplate>(bad.body).glare.radius = 0.0;
    CHECK_THROWS_AS(cat.save_template(bad), SpecError);
    CHECK(!cat.has_template("c"));

    const auto first = cat.flare_source("b");
    CHECK(cat.flare_source("b") == first);
    TemplateDoc changed = scatter_doc("b");
    std::get<ScatterTemplate>(changed.body).glare.radius = 20.0;
    CHECK(cat.save_template(changed));
    CHECK(cat.flare_source("b") != first);
}

TEST_CASE("real flare import")
{
    ScratchDir dir("real");
    Catalog cat(dir.path() / "lib");
    auto flare = random_raster<EncodedDomain>(40, 30, 3, 1, 0.3f, 1.0f);
    EncodedImage light(40, 30, 3);
    light.at(5, 5, 0) = 1.0f;  // one pixel where the light outshines the flare
    flare.at(5, 5, 0) = 0.5f;
    write_png(dir.path() / "flare.png", flare, BitDepth::sixteen);
    write_png(dir.path() / "light.png", light, BitDepth::sixteen);
    write_png(dir.path() / "small.png", EncodedImage(20, 30, 3), BitDepth::eight);

    const auto result = cat.import_real_flare(dir.path() / "flare.png", dir.path() / "light.png", {"cap", {}, "", {}});
    CHECK(result.dominance_violations == 1);
    CHECK(result.warning);
    CHECK(cat.real_ids() == std::vector<std::string>{result.id});
    const FlareSource src = cat.load_real(result.id);
    CHECK(!src.glare);
    CHECK(src.flare.extent() == Extent{40, 30});
    CHECK(std::abs(src.flare.at(7, 3, 1) - flare.at(7, 3, 1)) < 1e-4f);
    CHECK(cat.flare_source(result.id)->id == result.id);

    CHECK_THROWS_AS(cat.import_real_flare(dir.path() / "flare.png", dir.path() / "small.png", {}), InputError);
    CHECK_THROWS_AS(cat.import_real_flare(dir.path() / "flare.png", dir.path() / "none.png", {}), InputError);
    CHECK_THROWS_AS(cat.load_real("real-nope"), NotFoundError);
}

TEST_CASE("dataset plan")
{
    DatasetSpec spec;
    spec.master_seed = 3;
    spec.count = 10000;
    const std::vector<std::string> templates{"t0", "t1", "t2"}, reals{"r0", "r1"};
    const auto plan = plan_dataset(spec, templates, reals, 4);
    REQUIRE(plan.size() == 10000);
    std::size_t real = 0;
    std::set<std::uint64_t> seeds;
    for (const auto& p : plan) {
        real += p.real;
        seeds.insert(p.seed);
        CHECK(p.background < 4);
    }
    CHECK(real >= 4700);
    CHECK(real <= 5300);
    CHECK(seeds.size() == plan.size());

    const auto again = plan_dataset(spec, templates, reals, 4);
    CHECK(again[1234].seed == plan[1234].seed);
    CHECK(again[1234].source_id == plan[1234].source_id);

    spec.count = 0;
    CHECK(plan_dataset(spec, {}, {}, 0).empty());
    spec.count = 5;
    CHECK_THROWS_AS(plan_dataset(spec, {}, {}, 1), InputError);
    CHECK_THROWS_AS(plan_dataset(spec, templates, {}, 0), InputError);
    for (const auto& p : plan_dataset(spec, templates, {}, 1))
        CHECK(!p.real);
    for (const auto& p : plan_dataset(spec, {}, reals, 1))
        CHECK(p.real);
    spec.mix_ratio = 1.5;
    CHECK_THROWS_AS(plan_dataset(spec, templates, reals, 1), InputError);

    CHECK(sample_seed(1, 0) != sample_seed(2, 0));
    CHECK(sample_seed(1, 0) != sample_seed(1, 1));
}

TEST_CASE("dataset generation")
{
    ScratchDir dir("dataset");
    seed_library(dir.path());
    const DatasetSpec spec = small_spec(dir.path());

    const auto a = generate_dataset(spec, dir.path() / "a");
    CHECK(a.complete);
    CHECK(a.samples == 4);
    CHECK(verify_dataset(dir.path() / "a").empty());
    for (const char* f : {"input.png", "gt.png", "flare.png", "light.png", "mask.png"})
        CHECK(std::filesystem::is_regular_file(dir.path() / "a" / "000003" / f));

    DatasetSpec threaded = spec;
    threaded.threads = 3;
    generate_dataset(threaded, dir.path() / "b");
    CHECK(file_text(a.manifest) == file_text(dir.path() / "b" / "manifest.jsonl"));
    CHECK(file_text(dir.path() / "a" / "000002" / "input.png") ==
          file_text(dir.path() / "b" / "000002" / "input.png"));

    // Manifest sample records name their source and parameters.
    std::ifstream in(a.manifest);
    std::string header, first;
    std::getline(in, header);
    std::getline(in, first);
    const json rec = json::parse(first);
    CHECK(rec["type"] == "sample");
    CHECK(rec["seed"].get<std::uint64_t>() == sample_seed(11, 0));
    CHECK(rec["params"].contains("bg_gain"));
    CHECK(rec["params_sha256"].get<std::string>().size() == 64);

    // Tampering is detected.
    write_png(dir.path() / "a" / "000001" / "gt.png", EncodedImage(64, 64, 3), BitDepth::sixteen);
    const auto problems = verify_dataset(dir.path() / "a");
    REQUIRE(problems.size() == 1);
    CHECK(problems[0].find("000001") != std::string::npos);
    CHECK(!verify_dataset(dir.path() / "missing").empty());
}

TEST_CASE("dataset failure closes the manifest")
{
    ScratchDir dir("dataset-fail");
    seed_library(dir.path(), 48);
    const DatasetSpec spec = small_spec(dir.path());
    CHECK_THROWS_AS(generate_dataset(spec, dir.path() / "out"), InputError);

    // A corrupt template fails mid-run; the footer records the partial state.
    seed_library(dir.path());
    std::ofstream(dir.path() / "lib" / "templates" / "reflect-a.json") << "{";
    DatasetSpec many = spec;
    many.count = 12;
    CHECK_THROWS(generate_dataset(many, dir.path() / "out"));
    const std::string text = file_text(dir.path() / "out" / "manifest.jsonl");
    CHECK(text.find("\"complete\":false") != std::string::npos);
    CHECK(!verify_dataset(dir.path() / "out").empty());
}

TEST_CASE("synthetic backgrounds")
{
    const auto a = synth_background(160, 120, 5);
    CHECK(a == synth_background(160, 120, 5));
    CHECK(!(a == synth_background(160, 120, 6)));
    a.validate();
    double mean = 0.0;
    for (float v : a.samples())
        mean += v;
    mean /= a.sample_count();
    CHECK(mean < 0.3);
}

TEST_CASE("sha256")
{
    const std::string abc = "abc";
    CHECK(sha256_hex(std::span(reinterpret_cast<const std::uint8_t*>(abc.data()), abc.size())) ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("shipped library")
{
    const Catalog cat(std::filesystem::path(NIGHTFLARE_DATA_DIR) / "catalog");
    const auto ids = cat.template_ids();
    CHECK(ids.size() >= 6);
    std::size_t scatter = 0;
    for (const auto& id : ids) {
        const TemplateDoc doc = cat.load_template(id);
        CHECK(doc.id == id);
        scatter += doc.is_scatter();
    }
    CHECK(scatter >= 2);
    CHECK(scatter < ids.size());
    const auto bgs = list_pngs(std::filesystem::path(NIGHTFLARE_DATA_DIR) / "backgrounds");
    REQUIRE(!bgs.empty());
    const auto bg = read_png(bgs.front());
    CHECK(bg.width() >= 512);
    CHECK(bg.height() >= 512);
}
