// Copyright Contributors to the nightflare project.
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <set>
#include <thread>

#include "nightflare/catalog.hpp"
#include "nightflare/png_io.hpp"

namespace nightflare {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t kSourceSalt = 0x736f75726365ULL;
constexpr std::uint64_t kRealSalt = 0x7265616cULL;
constexpr std::uint64_t kBackgroundSalt = 0x6267ULL;

double unit(std::uint64_t bits) noexcept { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

std::string sample_dir(std::size_t index)
{
    char buf[16];
    std::snprintf(buf, sizeof buf, "%06zu", index);
    return buf;
}

struct SampleFile {
    const char* name;
    std::vector<std::uint8_t> bytes;
};

json write_sample(const PlannedSample& plan, const PairedSample& s, const fs::path& out,
                  const std::string& background_name)
{
    const fs::path dir = out / sample_dir(plan.index);
    fs::create_directories(dir);
    SampleFile files[] = {
        {"input.png", encode_png(s.input, BitDepth::sixteen)},
        {"gt.png", encode_png(s.flare_free, BitDepth::sixteen)},
        {"flare.png", encode_png(encode_flare_gt(s), BitDepth::sixteen)},
        {"light.png", encode_png(s.light_source, BitDepth::sixteen)},
        {"mask.png", s.seg.encode_png()},
    };
    json hashes = json::object();
    for (const auto& f : files) {
        write_file(dir / f.name, f.bytes);
        hashes[f.name] = sha256_hex(f.bytes);
    }
    const std::string params = to_json(s.provenance.params).dump();
    return {{"type", "sample"},
            {"index", plan.index},
            {"dir", sample_dir(plan.index)},
            {"seed", plan.seed},
            {"source_id", plan.source_id},
            {"real", plan.real},
            {"background", background_name},
            {"params", json::parse(params)},
            {"params_sha256", sha256_hex(std::span(reinterpret_cast<const std::uint8_t*>(params.data()),
                                                   params.size()))},
            {"files", hashes}};
}

}  // namespace

std::uint64_t sample_seed(std::uint64_t master, std::uint64_t index) noexcept
{
    // mix64 is a bijection, so distinct indices give distinct seeds.
    return mix64(mix64(master) + index);
}

std::vector<PlannedSample> plan_dataset(const DatasetSpec& spec, const std::vector<std::string>& template_ids,
                                        const std::vector<std::string>& real_ids, std::size_t background_count)
{
    if (spec.count == 0)
        return {};
    if (template_ids.empty() && real_ids.empty())
        throw InputError("the flare library has no templates and no real flares");
    if (background_count == 0)
        throw InputError("no background images");
    if (!(spec.mix_ratio >= 0.0 && spec.mix_ratio <= 1.0))
        throw InputError("mix ratio must be within [0, 1]");

    std::vector<PlannedSample> plan(spec.count);
    std::set<std::uint64_t> seen;
    for (std::size_t i = 0; i < spec.count; ++i) {
        PlannedSample& p = plan[i];
        p.index = i;
        p.seed = sample_seed(spec.master_seed, i);
        if (!seen.insert(p.seed).second)
            throw Error("seed collision at sample " + std::to_string(i));
        if (template_ids.empty())
            p.real = true;
        else if (!real_ids.empty())
            p.real = unit(mix64(p.seed ^ kRealSalt)) < spec.mix_ratio;
        const auto& pool = p.real ? real_ids : template_ids;
        p.source_id = pool[mix64(p.seed ^ kSourceSalt) % pool.size()];
        p.background = mix64(p.seed ^ kBackgroundSalt) % background_count;
    }
    return plan;
}

std::vector<fs::path> list_pngs(const fs::path& dir)
{
    std::vector<fs::path> out;
    std::error_code ec;
    if (!fs::is_directory(dir, ec))
        return out;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".png")
            out.push_back(e.path());
    std::sort(out.begin(), out.end());
    return out;
}

DatasetResult generate_dataset(const DatasetSpec& spec, const fs::path& out)
{
    const Catalog catalog(spec.library);
    const auto templates = catalog.template_ids();
    const auto reals = catalog.real_ids();
    const auto bg_paths = list_pngs(spec.backgrounds);
    const auto plan = plan_dataset(spec, templates, reals, bg_paths.size());
    if (spec.threads < 1)
        throw InputError("threads must be >= 1");

    std::vector<EncodedImage> backgrounds;
    std::vector<std::string> bg_names;
    for (const auto& p : bg_paths) {
        backgrounds.push_back(read_png(p));
        bg_names.push_back(p.filename().string());
        const Extent e = backgrounds.back().extent();
        if (e.width < spec.compose.crop.width || e.height < spec.compose.crop.height)
            throw InputError("background " + bg_names.back() + " is smaller than the crop");
    }

    fs::create_directories(out);
    DatasetResult result;
    result.manifest = out / "manifest.jsonl";
    std::ofstream manifest(result.manifest, std::ios::binary | std::ios::trunc);
    if (!manifest)
        throw IoError("cannot write " + result.manifest.string());
    const json header{{"type", "header"},
                      {"dataset_id", spec.dataset_id},
                      {"schema_version", 1},
                      {"master_seed", spec.master_seed},
                      {"count", spec.count},
                      {"mix_ratio", spec.mix_ratio},
                      {"crop", {spec.compose.crop.width, spec.compose.crop.height}},
                      {"templates", templates},
                      {"real", reals},
                      {"backgrounds", bg_names}};
    manifest << header.dump() << '\n';

    std::vector<std::optional<json>> records(plan.size());
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;

    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= plan.size() || failed)
                return;
            try {
                const auto& p = plan[i];
                const auto src = catalog.flare_source(p.source_id);
                const PairedSample s = compose_pair(backgrounds[p.background], *src, p.seed, spec.compose);
                records[i] = write_sample(p, s, out, bg_names[p.background]);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error)
                    error = std::current_exception();
                failed = true;
                return;
            }
        }
    };

    const int threads = static_cast<int>(std::min<std::size_t>(spec.threads, std::max<std::size_t>(plan.size(), 1)));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t)
            pool.emplace_back(worker);
        for (auto& t : pool)
            t.join();
    }

    // Records go out in index order up to the first gap.
    for (const auto& r : records) {
        if (!r)
            break;
        manifest << r->dump() << '\n';
        ++result.samples;
    }
    result.complete = !error && result.samples == plan.size();
    manifest << json{{"type", "footer"}, {"complete", result.complete}, {"samples", result.samples}}.dump() << '\n';
    manifest.close();
    if (error)
        std::rethrow_exception(error);
    return result;
}

std::vector<std::string> verify_dataset(const fs::path& out)
{
    std::vector<std::string> problems;
    const fs::path path = out / "manifest.jsonl";
    std::ifstream in(path, std::ios::binary);
    if (!in)
        return {"missing manifest " + path.string()};

    std::string line;
    std::size_t line_no = 0, samples = 0;
    bool header = false, footer = false;
    std::optional<std::size_t> expected;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty())
            continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error&) {
            problems.push_back("line " + std::to_string(line_no) + ": malformed JSON");
            continue;
        }
        const std::string type = j.value("type", "");
        if (type == "header") {
            header = true;
            expected = j.value("count", std::size_t{0});
        } else if (type == "footer") {
            footer = true;
            if (!j.value("complete", false))
                problems.push_back("manifest is marked incomplete");
        } else if (type == "sample") {
            ++samples;
            const fs::path dir = out / j.value("dir", "");
            for (const auto& [name, hash] : j["files"].items()) {
                const fs::path file = dir / name;
                if (!fs::is_regular_file(file)) {
                    problems.push_back("missing " + file.string());
                    continue;
                }
                if (sha256_hex(read_file(file)) != hash.get<std::string>())
                    problems.push_back("hash mismatch for " + file.string());
            }
        } else {
            problems.push_back("line " + std::to_string(line_no) + ": unknown record type");
        }
    }
    if (!header)
        problems.push_back("manifest has no header");
    if (!footer)
        problems.push_back("manifest has no footer");
    if (expected && *expected != samples)
        problems.push_back("manifest lists " + std::to_string(samples) + " of " + std::to_string(*expected) +
                           " samples");
    return problems;
}

}  // namespace nightflare
