// Copyright Contributors to the nightflare project.
// SPDX-License-Identifier: Apache-2.0

#include <set>

#include "nightflare/catalog.hpp"

namespace nightflare {

using nlohmann::json;

namespace {

std::string join(const std::string& base, const std::string& key) { return base.empty() ? key : base + "." + key; }
std::string index(const std::string& base, std::size_t i) { return base + "[" + std::to_string(i) + "]"; }

/// Pulls typed fields out of a JSON object, recording schema violations
/// instead of throwing so one pass reports every problem.
class Reader {
public:
    Violations violations;

    void schema(const std::string& path, std::string message)
    {
        violations.push_back({Violation::Kind::schema, path, std::move(message)});
    }

    bool object(const json& j, const std::string& path)
    {
        if (j.is_object())
            return true;
        schema(path.empty() ? "$" : path, "expected an object");
        return false;
    }

    /// Flags keys outside `allowed`.
    void only(const json& j, const std::string& path, std::initializer_list<const char*> allowed)
    {
        const std::set<std::string> keys(allowed.begin(), allowed.end());
        for (const auto& [k, v] : j.items())
            if (!keys.contains(k))
                schema(join(path, k), "unknown field");
    }

    const json* field(const json& j, const char* key, const std::string& path, bool required)
    {
        const auto it = j.find(key);
        if (it == j.end() || (!required && it->is_null())) {
            if (required)
                schema(join(path, key), "required field is missing");
            return nullptr;
        }
        return &*it;
    }

    double number(const json& j, const char* key, const std::string& path, double fallback, bool required = true)
    {
        const json* v = field(j, key, path, required);
        if (!v)
            return fallback;
        if (!v->is_number()) {
            schema(join(path, key), "expected a number");
            return fallback;
        }
        return v->get<double>();
    }

    long long integer(const json& j, const char* key, const std::string& path, long long fallback, bool required = true)
    {
        const json* v = field(j, key, path, required);
        if (!v)
            return fallback;
        if (!v->is_number_integer()) {
            schema(join(path, key), "expected an integer");
            return fallback;
        }
        return v->get<long long>();
    }

    std::uint64_t unsigned_integer(const json& j, const char* key, const std::string& path)
    {
        const json* v = field(j, key, path, true);
        if (!v)
            return 0;
        if (!v->is_number_unsigned()) {
            schema(join(path, key), "expected a non-negative integer");
            return 0;
        }
        return v->get<std::uint64_t>();
    }

    std::string string(const json& j, const char* key, const std::string& path, bool required = true)
    {
        const json* v = field(j, key, path, required);
        if (!v)
            return {};
        if (!v->is_string()) {
            schema(join(path, key), "expected a string");
            return {};
        }
        return v->get<std::string>();
    }

    Rgb rgb(const json& j, const char* key, const std::string& path)
    {
        const json* v = field(j, key, path, true);
        Rgb out{};
        if (!v)
            return out;
        if (!v->is_array() || v->size() != 3) {
            schema(join(path, key), "expected an array of three numbers");
            return out;
        }
        for (std::size_t i = 0; i < 3; ++i) {
            if (!(*v)[i].is_number()) {
                schema(index(join(path, key), i), "expected a number");
                continue;
            }
            out[i] = static_cast<float>((*v)[i].get<double>());
        }
        return out;
    }

    Point point(const json& j, const char* key, const std::string& path)
    {
        const json* v = field(j, key, path, true);
        if (!v || !object(*v, join(path, key)))
            return {};
        const std::string p = join(path, key);
        only(*v, p, {"x", "y"});
        return {number(*v, "x", p, 0.0), number(*v, "y", p, 0.0)};
    }

    Extent extent(const json& j, const char* key, const std::string& path)
    {
        const json* v = field(j, key, path, true);
        if (!v || !object(*v, join(path, key)))
            return {};
        const std::string p = join(path, key);
        only(*v, p, {"width", "height"});
        return {static_cast<int>(integer(*v, "width", p, 0)), static_cast<int>(integer(*v, "height", p, 0))};
    }

    ColorCurve curve(const json& j, const char* key, const std::string& path)
    {
        const json* v = field(j, key, path, true);
        const std::string p = join(path, key);
        if (!v)
            return {};
        if (!v->is_array()) {
            schema(p, "expected an array of control points");
            return {};
        }
        std::vector<CurvePoint> pts;
        for (std::size_t i = 0; i < v->size(); ++i) {
            const json& e = (*v)[i];
            const std::string ep = index(p, i);
            if (!object(e, ep))
                continue;
            only(e, ep, {"t", "rgb"});
            pts.push_back({number(e, "t", ep, 0.0), rgb(e, "rgb", ep)});
        }
        return ColorCurve(std::move(pts));
    }
};

json to_json(const Rgb& c) { return json::array({c[0], c[1], c[2]}); }
json to_json(Point p) { return {{"x", p.x}, {"y", p.y}}; }
json to_json(Extent e) { return {{"width", e.width}, {"height", e.height}}; }

json to_json(const ColorCurve& c)
{
    json out = json::array();
    for (const auto& p : c.points())
        out.push_back({{"t", p.t}, {"rgb", to_json(p.rgb)}});
    return out;
}

json scatter_json(const ScatterTemplate& t)
{
    json j;
    j["canvas"] = to_json(t.canvas);
    j["source_pos"] = to_json(t.source_pos);
    j["glare"] = {{"radius", t.glare.radius},
                  {"curve", to_json(t.glare.curve)},
                  {"vanishing_angle", t.glare.vanishing_angle},
                  {"vanishing_direction", t.glare.vanishing_direction},
                  {"vanishing_feather", t.glare.vanishing_feather}};
    j["streaks"] = json::array();
    for (const auto& s : t.streaks)
        j["streaks"].push_back({{"direction", s.direction},
                                {"length", s.length},
                                {"width", s.width},
                                {"section_curve", to_json(s.section_curve)},
                                {"sharp_side_blur", s.sharp_side_blur},
                                {"soft_side_blur", s.soft_side_blur},
                                {"falloff_curve", to_json(s.falloff_curve)}});
    if (t.shimmer)
        j["shimmer"] = {{"spike_count", t.shimmer->spike_count},
                        {"radius", t.shimmer->radius},
                        {"intensity", t.shimmer->intensity},
                        {"angular_jitter_seed", t.shimmer->angular_jitter_seed},
                        {"noise_octaves", t.shimmer->noise_octaves},
                        {"noise_radial_blur", t.shimmer->noise_radial_blur},
                        {"rgb", to_json(t.shimmer->rgb)}};
    if (t.light) {
        json shape = t.light->polygon_sides ? json{{"kind", "polygon"}, {"sides", *t.light->polygon_sides}}
                                            : json{{"kind", "disc"}};
        j["light"] = {{"shape", shape},
                      {"core_radius", t.light->core_radius},
                      {"glow_radius", t.light->glow_radius},
                      {"rgb", to_json(t.light->rgb)}};
    }
    return j;
}

json iris_shape_json(const IrisShape& s)
{
    if (std::holds_alternative<DiscIris>(s))
        return {{"kind", "disc"}};
    if (const auto* p = std::get_if<PolygonIris>(&s))
        return {{"kind", "polygon"}, {"sides", p->sides}, {"rotation", p->rotation}};
    if (const auto* r = std::get_if<RingIris>(&s))
        return {{"kind", "ring"}, {"inner_ratio", r->inner_ratio}};
    const auto& l = std::get<LatticeIris>(s);
    return {{"kind", "lattice"}, {"rows", l.rows}, {"cols", l.cols}, {"pitch", l.pitch}, {"cell_radius", l.cell_radius}};
}

json reflect_json(const ReflectBody& b)
{
    json j;
    j["canvas"] = to_json(b.reflect.canvas);
    j["optical_center"] = to_json(b.reflect.optical_center);
    j["light_pos"] = to_json(b.light_pos);
    j["irises"] = json::array();
    for (const auto& i : b.reflect.irises) {
        json e{{"k", i.k},
               {"size", i.size},
               {"rgb", to_json(i.rgb)},
               {"opacity", i.opacity},
               {"shape", iris_shape_json(i.shape)},
               {"edge_feather", i.edge_feather}};
        if (i.caustics)
            e["caustics"] = {{"opacity_slope", i.caustics->opacity_slope}};
        if (i.clip)
            e["clip"] = {{"threshold", i.clip->threshold}, {"mask_scale", i.clip->mask_scale}};
        j["irises"].push_back(std::move(e));
    }
    return j;
}

ScatterTemplate read_scatter(Reader& r, const json& j)
{
    ScatterTemplate t;
    r.only(j, "", {"canvas", "source_pos", "glare", "streaks", "shimmer", "light"});
    t.canvas = r.extent(j, "canvas", "");
    t.source_pos = r.point(j, "source_pos", "");

    if (const json* g = r.field(j, "glare", "", true); g && r.object(*g, "glare")) {
        r.only(*g, "glare", {"radius", "curve", "vanishing_angle", "vanishing_direction", "vanishing_feather"});
        t.glare.radius = r.number(*g, "radius", "glare", 0.0);
        t.glare.curve = r.curve(*g, "curve", "glare");
        t.glare.vanishing_angle = r.number(*g, "vanishing_angle", "glare", 0.0, false);
        t.glare.vanishing_direction = r.number(*g, "vanishing_direction", "glare", 0.0, false);
        t.glare.vanishing_feather = r.number(*g, "vanishing_feather", "glare", GlareSpec{}.vanishing_feather, false);
    }

    if (const json* ss = r.field(j, "streaks", "", false)) {
        if (!ss->is_array()) {
            r.schema("streaks", "expected an array");
        } else {
            for (std::size_t i = 0; i < ss->size(); ++i) {
                const json& e = (*ss)[i];
                const std::string p = index("streaks", i);
                if (!r.object(e, p))
                    continue;
                r.only(e, p,
                       {"direction", "length", "width", "section_curve", "sharp_side_blur", "soft_side_blur",
                        "falloff_curve"});
                StreakSpec s;
                s.direction = r.number(e, "direction", p, 0.0);
                s.length = r.number(e, "length", p, 0.0);
                s.width = r.number(e, "width", p, 0.0);
                s.section_curve = r.curve(e, "section_curve", p);
                s.sharp_side_blur = r.number(e, "sharp_side_blur", p, 0.0);
                s.soft_side_blur = r.number(e, "soft_side_blur", p, 0.0);
                s.falloff_curve = r.curve(e, "falloff_curve", p);
                t.streaks.push_back(std::move(s));
            }
        }
    }

    if (const json* s = r.field(j, "shimmer", "", false); s && r.object(*s, "shimmer")) {
        r.only(*s, "shimmer",
               {"spike_count", "radius", "intensity", "angular_jitter_seed", "noise_octaves", "noise_radial_blur",
                "rgb"});
        ShimmerSpec sh;
        sh.spike_count = static_cast<int>(r.integer(*s, "spike_count", "shimmer", 0));
        sh.radius = r.number(*s, "radius", "shimmer", 0.0);
        sh.intensity = r.number(*s, "intensity", "shimmer", 0.0);
        sh.angular_jitter_seed = r.unsigned_integer(*s, "angular_jitter_seed", "shimmer");
        sh.noise_octaves = static_cast<int>(r.integer(*s, "noise_octaves", "shimmer", 0));
        sh.noise_radial_blur = r.number(*s, "noise_radial_blur", "shimmer", 0.0);
        sh.rgb = r.rgb(*s, "rgb", "shimmer");
        t.shimmer = sh;
    }

    if (const json* l = r.field(j, "light", "", false); l && r.object(*l, "light")) {
        r.only(*l, "light", {"shape", "core_radius", "glow_radius", "rgb"});
        LightSourceSpec ls;
        if (const json* shape = r.field(*l, "shape", "light", true); shape && r.object(*shape, "light.shape")) {
            const std::string kind = r.string(*shape, "kind", "light.shape");
            if (kind == "polygon") {
                r.only(*shape, "light.shape", {"kind", "sides"});
                ls.polygon_sides = static_cast<int>(r.integer(*shape, "sides", "light.shape", 0));
            } else if (kind == "disc") {
                r.only(*shape, "light.shape", {"kind"});
            } else if (!kind.empty()) {
                r.schema("light.shape.kind", "expected \"disc\" or \"polygon\"");
            }
        }
        ls.core_radius = r.number(*l, "core_radius", "light", 0.0);
        ls.glow_radius = r.number(*l, "glow_radius", "light", 0.0);
        ls.rgb = r.rgb(*l, "rgb", "light");
        t.light = ls;
    }
    return t;
}

IrisShape read_iris_shape(Reader& r, const json& j, const std::string& p)
{
    const std::string kind = r.string(j, "kind", p);
    if (kind == "disc") {
        r.only(j, p, {"kind"});
        return DiscIris{};
    }
    if (kind == "polygon") {
        r.only(j, p, {"kind", "sides", "rotation"});
        return PolygonIris{static_cast<int>(r.integer(j, "sides", p, 0)), r.number(j, "rotation", p, 0.0, false)};
    }
    if (kind == "ring") {
        r.only(j, p, {"kind", "inner_ratio"});
        return RingIris{r.number(j, "inner_ratio", p, 0.0)};
    }
    if (kind == "lattice") {
        r.only(j, p, {"kind", "rows", "cols", "pitch", "cell_radius"});
        return LatticeIris{static_cast<int>(r.integer(j, "rows", p, 0)), static_cast<int>(r.integer(j, "cols", p, 0)),
                           r.number(j, "pitch", p, 0.0), r.number(j, "cell_radius", p, 0.0)};
    }
    if (!kind.empty())
        r.schema(join(p, "kind"), "expected one of disc, polygon, ring, lattice");
    return DiscIris{};
}

ReflectBody read_reflect(Reader& r, const json& j)
{
    ReflectBody b;
    r.only(j, "", {"canvas", "optical_center", "light_pos", "irises"});
    b.reflect.canvas = r.extent(j, "canvas", "");
    b.reflect.optical_center = r.point(j, "optical_center", "");
    b.light_pos = r.point(j, "light_pos", "");
    const json* irises = r.field(j, "irises", "", true);
    if (!irises)
        return b;
    if (!irises->is_array()) {
        r.schema("irises", "expected an array");
        return b;
    }
    for (std::size_t i = 0; i < irises->size(); ++i) {
        const json& e = (*irises)[i];
        const std::string p = index("irises", i);
        if (!r.object(e, p))
            continue;
        r.only(e, p, {"k", "size", "rgb", "opacity", "shape", "edge_feather", "caustics", "clip"});
        IrisSpec s;
        s.k = r.number(e, "k", p, 0.0);
        s.size = r.number(e, "size", p, 0.0);
        s.rgb = r.rgb(e, "rgb", p);
        s.opacity = r.number(e, "opacity", p, 0.0);
        if (const json* shape = r.field(e, "shape", p, true); shape && r.object(*shape, join(p, "shape")))
            s.shape = read_iris_shape(r, *shape, join(p, "shape"));
        s.edge_feather = r.number(e, "edge_feather", p, IrisSpec{}.edge_feather, false);
        if (const json* c = r.field(e, "caustics", p, false); c && r.object(*c, join(p, "caustics"))) {
            r.only(*c, join(p, "caustics"), {"opacity_slope"});
            s.caustics = CausticsSpec{r.number(*c, "opacity_slope", join(p, "caustics"), 0.0)};
        }
        if (const json* c = r.field(e, "clip", p, false); c && r.object(*c, join(p, "clip"))) {
            r.only(*c, join(p, "clip"), {"threshold", "mask_scale"});
            s.clip = ClipSpec{r.number(*c, "threshold", join(p, "clip"), 0.0),
                              r.number(*c, "mask_scale", join(p, "clip"), 1.0, false)};
        }
        b.reflect.irises.push_back(std::move(s));
    }
    return b;
}

/// Parses and collects violations; the doc is meaningful only when none are
/// of schema kind.
TemplateDoc read_doc(const json& j, Violations& out)
{
    Reader r;
    TemplateDoc doc;
    if (!r.object(j, "")) {
        out = std::move(r.violations);
        return doc;
    }
    r.only(j, "", {"schema_version", "id", "kind", "metadata", "body"});
    const long long version = r.integer(j, "schema_version", "", 0);
    if (j.contains("schema_version") && j["schema_version"].is_number_integer() && version != kTemplateSchemaVersion)
        r.schema("schema_version", "unsupported version " + std::to_string(version));
    doc.id = r.string(j, "id", "");
    if (j.contains("id") && j["id"].is_string() && !valid_id(doc.id))
        r.schema("id", "ids use 1-64 characters from A-Z a-z 0-9 _ -");

    if (const json* m = r.field(j, "metadata", "", false); m && r.object(*m, "metadata")) {
        r.only(*m, "metadata", {"name", "tags", "author", "reference_image"});
        doc.metadata.name = r.string(*m, "name", "metadata", false);
        doc.metadata.author = r.string(*m, "author", "metadata", false);
        if (m->contains("reference_image") && !(*m)["reference_image"].is_null())
            doc.metadata.reference_image = r.string(*m, "reference_image", "metadata");
        if (const json* tags = r.field(*m, "tags", "metadata", false)) {
            if (!tags->is_array())
                r.schema("metadata.tags", "expected an array of strings");
            else
                for (std::size_t i = 0; i < tags->size(); ++i) {
                    if ((*tags)[i].is_string())
                        doc.metadata.tags.push_back((*tags)[i].get<std::string>());
                    else
                        r.schema(index("metadata.tags", i), "expected a string");
                }
        }
    }

    const std::string kind = r.string(j, "kind", "");
    const json* body = r.field(j, "body", "", true);
    if (body && r.object(*body, "body")) {
        if (kind == "scatter")
            doc.body = read_scatter(r, *body);
        else if (kind == "reflect")
            doc.body = read_reflect(r, *body);
    }
    if (!kind.empty() && kind != "scatter" && kind != "reflect")
        r.schema("kind", "expected \"scatter\" or \"reflect\"");

    out = std::move(r.violations);
    if (!out.empty())
        return doc;

    // Semantic checks only once the document is structurally sound.
    if (const auto* s = std::get_if<ScatterTemplate>(&doc.body)) {
        out = check_scatter(*s);
    } else {
        const auto& b = std::get<ReflectBody>(doc.body);
        out = check_reflect(b.reflect);
        const Extent c = b.reflect.canvas;
        if (!(b.light_pos.x >= 0.0 && b.light_pos.x <= c.width - 1 && b.light_pos.y >= 0.0 &&
              b.light_pos.y <= c.height - 1))
            out.push_back({Violation::Kind::semantic, "light_pos", "must lie inside the canvas"});
    }
    return doc;
}

}  // namespace

bool valid_id(const std::string& id) noexcept
{
    if (id.empty() || id.size() > 64)
        return false;
    for (char c : id)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-'))
            return false;
    return true;
}

json to_json(const TemplateDoc& doc)
{
    json meta{{"name", doc.metadata.name}, {"tags", doc.metadata.tags}, {"author", doc.metadata.author}};
    if (doc.metadata.reference_image)
        meta["reference_image"] = *doc.metadata.reference_image;
    json j{{"schema_version", doc.schema_version}, {"id", doc.id}, {"metadata", meta}};
    if (const auto* s = std::get_if<ScatterTemplate>(&doc.body)) {
        j["kind"] = "scatter";
        j["body"] = scatter_json(*s);
    } else {
        j["kind"] = "reflect";
        j["body"] = reflect_json(std::get<ReflectBody>(doc.body));
    }
    return j;
}

json to_json(const AugmentationParams& p)
{
    return {{"gamma", p.gamma},
            {"rotation", p.affine.rotation},
            {"tx", p.affine.tx},
            {"ty", p.affine.ty},
            {"shear", p.affine.shear},
            {"scale", p.affine.scale},
            {"flip_h", p.affine.flip_h},
            {"flip_v", p.affine.flip_v},
            {"blur_sigma", p.blur_sigma},
            {"color_offset", to_json(p.color_offset)},
            {"bg_gain", p.bg_gain},
            {"noise_variance", p.noise_variance},
            {"crop_u", p.crop_u},
            {"crop_v", p.crop_v},
            {"noise_seed", p.noise_seed}};
}

Violations validate_template(const json& doc)
{
    Violations out;
    read_doc(doc, out);
    return out;
}

TemplateDoc template_from_json(const json& j)
{
    Violations out;
    TemplateDoc doc = read_doc(j, out);
    require_valid(std::move(out));
    return doc;
}

json parse_json_text(const std::string& text)
{
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError("malformed JSON at byte " + std::to_string(e.byte) + ": " + e.what());
    }
}

TemplateDoc parse_template(const std::string& text) { return template_from_json(parse_json_text(text)); }

std::string serialize_template(const TemplateDoc& doc) { return to_json(doc).dump(2) + "\n"; }

FlareSource render_template(const TemplateDoc& doc)
{
    if (const auto* s = std::get_if<ScatterTemplate>(&doc.body)) {
        FlareLayers layers = render_scatter(*s);
        EncodedImage glare = std::move(layers.glare_layer);
        screen_into(glare, layers.shimmer_layer);
        return {doc.id, std::move(layers.flare), std::move(layers.light_source), std::move(glare),
                std::move(layers.streak_layer)};
    }
    const auto& b = std::get<ReflectBody>(doc.body);
    EncodedImage flare = render_reflect(b.reflect, b.light_pos);
    const Extent c = b.reflect.canvas;
    // Ghost irises belong to the glare region; there is no light source layer.
    return {doc.id, flare, EncodedImage(c.width, c.height, 3), flare, EncodedImage(c.width, c.height, 3)};
}

}  // namespace nightflare
