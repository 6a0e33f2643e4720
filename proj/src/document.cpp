#include "inkline/document.hpp"

#include "inkline/error.hpp"
#include "inkline/text.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>
#include <cstdio>

namespace inkline::document {

using nlohmann::json;

namespace {

struct KindName {
    LayerKind kind;
    std::string_view name;
};
constexpr KindName kKindNames[] = {
    {LayerKind::StaticChart, "static-chart"},       {LayerKind::AnimatedChart, "animated-chart"},
    {LayerKind::Dod, "dod"},                        {LayerKind::StaticGraphic, "static-graphic"},
    {LayerKind::AnimatedGraphic, "animated-graphic"}, {LayerKind::Highlight, "highlight"},
    {LayerKind::AnnotationLine, "annotation-line"}, {LayerKind::Text, "text"},
};

struct FieldName {
    ConfigField field;
    std::string_view name;
};
constexpr FieldName kFieldNames[] = {
    {ConfigField::ShowAxes, "showAxes"},   {ConfigField::ShowLegend, "showLegend"},
    {ConfigField::Animate, "animate"},     {ConfigField::Recolor, "recolor"},
    {ConfigField::Opacity, "opacity"},     {ConfigField::Thickness, "thickness"},
    {ConfigField::Style, "style"},         {ConfigField::FrameDelay, "frameDelayMs"},
};

const std::set<std::string> kLineStyles = {"solid", "dashed", "dotted"};
const std::set<std::string> kTextStyles = {"normal", "italic", "bold", "bold-italic"};

std::string dash_for(const std::string& style, double thickness)
{
    if (style == "dashed") return svg::num(4 * thickness) + " " + svg::num(3 * thickness);
    if (style == "dotted") return svg::num(thickness) + " " + svg::num(2 * thickness);
    return {};
}

std::string style_for_dash(const std::string& dash)
{
    if (dash.empty()) return "solid";
    auto sp = dash.find(' ');
    auto a = text::parse_number(dash.substr(0, sp));
    auto b = sp == std::string::npos ? a : text::parse_number(dash.substr(sp + 1));
    if (a && b && *a < *b) return "dotted";
    return "dashed";
}

std::int64_t floor_mod(std::int64_t a, std::int64_t m)
{
    std::int64_t r = a % m;
    return r < 0 ? r + m : r;
}

std::int64_t floor_div(std::int64_t a, std::int64_t m)
{
    std::int64_t q = a / m;
    return (a % m != 0 && (a < 0) != (m < 0)) ? q - 1 : q;
}

std::vector<Layer>::iterator find_layer(Document& doc, std::string_view id)
{
    auto it = std::find_if(doc.layers.begin(), doc.layers.end(), [&](const Layer& l) { return l.id == id; });
    if (it == doc.layers.end()) throw NotFound("layer", std::string(id));
    return it;
}

void renumber(Document& doc)
{
    std::stable_sort(doc.layers.begin(), doc.layers.end(),
                     [](const Layer& a, const Layer& b) { return a.zOrder < b.zOrder; });
    for (std::size_t i = 0; i < doc.layers.size(); ++i) doc.layers[i].zOrder = static_cast<int>(i);
}

void require_unlocked(const Layer& l)
{
    if (l.locked) throw Error("document.locked", "layer " + l.id + " is locked", l.id);
}

double text_px(const Layer& l) { return l.text->sizePt * 4.0 / 3.0 * l.config.thickness; }

bool chart_scope(LayerKind k) { return is_chart(k); }

std::string allowed_list(ConfigField f)
{
    std::string s;
    for (LayerKind k : permitted_kinds(f)) {
        if (!s.empty()) s += ", ";
        s += to_string(k);
    }
    return s;
}

bool needs_render(const Layer& l, ConfigField f)
{
    switch (f) {
    case ConfigField::ShowAxes:
    case ConfigField::ShowLegend:
    case ConfigField::Animate:
        return true;
    case ConfigField::Thickness:
        return is_chart(l.kind);
    default:
        return false;
    }
}

json text_to_json(const TextContent& t)
{
    return {{"content", t.content}, {"fontFamily", t.fontFamily}, {"sizePt", t.sizePt}, {"color", to_hex(t.color)}};
}

TextContent text_from_json(const json& j)
{
    TextContent t;
    t.content = j.at("content").get<std::string>();
    t.fontFamily = j.value("fontFamily", t.fontFamily);
    t.sizePt = j.value("sizePt", t.sizePt);
    if (j.contains("color")) t.color = parse_color(j.at("color").get<std::string>()).value_or(t.color);
    return t;
}

json config_to_json(const LayerConfig& c)
{
    json j = {{"showAxes", c.showAxes},
              {"showLegend", c.showLegend},
              {"animateColumn", c.animateColumn ? json(*c.animateColumn) : json(nullptr)},
              {"recolor", compose::mapping_to_json(c.recolor)},
              {"thickness", c.thickness},
              {"style", c.style},
              {"frameDelayMs", c.frameDelayMs}};
    return j;
}

LayerConfig config_from_json(const json& j)
{
    LayerConfig c;
    c.showAxes = j.at("showAxes").get<bool>();
    c.showLegend = j.at("showLegend").get<bool>();
    if (!j.at("animateColumn").is_null()) c.animateColumn = j.at("animateColumn").get<std::string>();
    c.recolor = compose::mapping_from_json(j.at("recolor"));
    c.thickness = j.at("thickness").get<double>();
    c.style = j.at("style").get<std::string>();
    c.frameDelayMs = j.at("frameDelayMs").get<int>();
    return c;
}

// Composite <g> for one layer at time `ms`.
svg::Element composite(const Layer& l, std::int64_t ms, const std::map<Rgb, Rgb>* inherited)
{
    const Transform& t = l.transform;
    std::string tr = "translate(" + svg::num(t.tx) + " " + svg::num(t.ty) + ")";
    if (t.rotationDeg != 0)
        tr += " rotate(" + svg::num(t.rotationDeg) + " " + svg::num(l.width * t.scale / 2) + " " +
              svg::num(l.height * t.scale / 2) + ")";
    if (t.scale != 1) tr += " scale(" + svg::num(t.scale) + ")";
    svg::Element g("g", {{"data-layer", l.id}, {"transform", tr}});
    if (l.opacity < 1) g.set("opacity", svg::num(l.opacity));
    svg::Element content = layer_content(l, ms);
    if (inherited && !inherited->empty()) compose::apply_mapping(content, *inherited, true);
    g.add(std::move(content));
    return g;
}

svg::Element compose_at(const Document& doc, std::int64_t ms, bool frameZero)
{
    svg::Element root = svg::document(doc.width, doc.height);
    if (doc.background)
        root.add(svg::Element("rect", {{"width", svg::num(doc.width)}, {"height", svg::num(doc.height)},
                                       {"fill", to_hex(*doc.background)}}));
    for (const Layer& l : doc.layers) {
        // Overlays follow their base chart's colors.
        const std::map<Rgb, Rgb>* inherited = nullptr;
        if (l.kind == LayerKind::Highlight && l.dependsOn)
            for (const Layer& b : doc.layers)
                if (b.id == *l.dependsOn) inherited = &b.config.recolor;
        root.add(composite(l, frameZero ? l.epochMs : ms, inherited));
    }
    return root;
}

void put16(std::string& out, std::uint32_t v)
{
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put32(std::string& out, std::uint32_t v)
{
    put16(out, v & 0xffff);
    put16(out, v >> 16);
}

} // namespace

std::string_view to_string(LayerKind k)
{
    for (const auto& kn : kKindNames)
        if (kn.kind == k) return kn.name;
    return "static-graphic";
}

std::string_view to_string(ConfigField f)
{
    for (const auto& fn : kFieldNames)
        if (fn.field == f) return fn.name;
    return "opacity";
}

LayerKind layer_kind_from_string(std::string_view s)
{
    for (const auto& kn : kKindNames)
        if (kn.name == s) return kn.kind;
    throw Error("document.kind", "unknown layer kind: " + std::string(s), std::string(s));
}

ConfigField config_field_from_string(std::string_view s)
{
    for (const auto& fn : kFieldNames)
        if (fn.name == s) return fn.field;
    throw Error("document.config", "unknown config field: " + std::string(s), std::string(s));
}

bool permitted(LayerKind kind, ConfigField field)
{
    using K = LayerKind;
    switch (field) {
    case ConfigField::ShowAxes:
    case ConfigField::ShowLegend:
        return kind == K::StaticChart || kind == K::AnimatedChart || kind == K::Dod;
    case ConfigField::Animate:
        return kind == K::StaticChart;
    case ConfigField::Recolor:
        return kind == K::StaticChart || kind == K::AnimatedChart || kind == K::StaticGraphic ||
               kind == K::AnimatedGraphic || kind == K::Text;
    case ConfigField::Opacity:
        return true;
    case ConfigField::Thickness:
        return kind == K::StaticChart || kind == K::AnimatedChart || kind == K::Dod || kind == K::AnnotationLine ||
               kind == K::Text;
    case ConfigField::Style:
        return kind == K::AnnotationLine || kind == K::Text;
    case ConfigField::FrameDelay:
        return kind == K::AnimatedChart || kind == K::AnimatedGraphic;
    }
    return false;
}

std::vector<LayerKind> permitted_kinds(ConfigField field)
{
    std::vector<LayerKind> out;
    for (LayerKind k : kAllLayerKinds)
        if (permitted(k, field)) out.push_back(k);
    return out;
}

bool is_animated(LayerKind kind) { return kind == LayerKind::AnimatedChart || kind == LayerKind::AnimatedGraphic; }

bool is_chart(LayerKind kind)
{
    return kind == LayerKind::StaticChart || kind == LayerKind::AnimatedChart || kind == LayerKind::Dod;
}

const Layer& Document::layer(std::string_view lid) const
{
    for (const Layer& l : layers)
        if (l.id == lid) return l;
    throw NotFound("layer", std::string(lid));
}

Layer& Document::layer(std::string_view lid) { return *find_layer(*this, lid); }

Document make_document(std::string id, double width, double height)
{
    if (!(width > 0 && height > 0)) throw Error("document.canvas", "canvas size must be positive");
    Document d;
    d.id = std::move(id);
    d.width = width;
    d.height = height;
    return d;
}

LayerRenderer chart_renderer(const Dataset& ds, compose::GlyphResolver glyphs)
{
    return [&ds, glyphs = std::move(glyphs)](Layer& l) {
        if (!l.chartSpec) return;
        charts::ChartSpec spec = *l.chartSpec;
        spec.showAxes = l.config.showAxes;
        spec.showLegend = l.config.showLegend;
        spec.markScale = l.config.thickness;
        if (l.kind == LayerKind::AnimatedChart) {
            if (!l.config.animateColumn) throw Error("document.config", "animated chart without a time column");
            AnimatedAsset a = charts::animate_chart(spec, ds, *l.config.animateColumn, l.config.frameDelayMs);
            l.frames = std::move(a.frames);
            l.frameKeys = std::move(a.frameKeys);
        } else if (l.kind == LayerKind::Dod) {
            if (!l.glyphs) throw Error("document.asset", "DOD layer without glyphs", l.assetRef);
            charts::ChartImage img = compose::make_dod(spec, charts::render_chart(spec, ds), *l.glyphs, glyphs);
            l.frames = {std::move(img.svg)};
            l.frameKeys.clear();
        } else {
            l.frames = {charts::render_chart(spec, ds).svg};
            l.frameKeys.clear();
        }
        *l.chartSpec = spec;
    };
}

Layer& add_layer(Document& doc, Layer layer)
{
    auto dangling = [&](const std::string& why) {
        throw Error("document.asset", "dangling asset reference: " + why,
                    layer.assetRef.empty() ? std::string(to_string(layer.kind)) : layer.assetRef);
    };
    switch (layer.kind) {
    case LayerKind::StaticChart:
        if (!layer.chartSpec || layer.frames.size() != 1) dangling("chart");
        break;
    case LayerKind::AnimatedChart:
        if (!layer.chartSpec || layer.frames.size() < 2 || !layer.config.animateColumn) dangling("animated chart");
        break;
    case LayerKind::Dod:
        if (!layer.chartSpec || !layer.glyphs || layer.frames.size() != 1) dangling("dod");
        break;
    case LayerKind::StaticGraphic:
        if (layer.frames.size() != 1) dangling("graphic");
        break;
    case LayerKind::AnimatedGraphic:
        if (layer.frames.size() < 2) dangling("animated graphic");
        break;
    case LayerKind::Highlight:
        if (!layer.overlay || layer.frames.size() != 1) dangling("overlay");
        break;
    case LayerKind::AnnotationLine:
        if (!layer.annotation) dangling("annotation");
        compose::validate(*layer.annotation);
        break;
    case LayerKind::Text:
        if (!layer.text || !(layer.text->sizePt > 0)) dangling("text");
        break;
    }
    if (is_animated(layer.kind) && !layer.frameKeys.empty() && layer.frameKeys.size() != layer.frames.size())
        throw Error("document.asset", "frame keys do not match frames", layer.assetRef);
    if (layer.dependsOn) find_layer(doc, *layer.dependsOn);

    LayerConfig c;
    if (layer.chartSpec) {
        c.showAxes = layer.chartSpec->showAxes;
        c.showLegend = layer.chartSpec->showLegend;
        c.thickness = layer.chartSpec->markScale;
    }
    if (is_animated(layer.kind)) {
        if (layer.config.frameDelayMs <= 0) throw Error("document.asset", "frame delay must be positive");
        c.frameDelayMs = layer.config.frameDelayMs;
    }
    if (layer.kind == LayerKind::AnimatedChart) c.animateColumn = layer.config.animateColumn;
    if (layer.kind == LayerKind::AnnotationLine) {
        c.thickness = layer.annotation->line.thicknessPx;
        c.style = style_for_dash(layer.annotation->line.dash);
    }
    if (layer.kind == LayerKind::Text) c.style = "normal";
    layer.config = std::move(c);

    layer.id = "layer-" + std::to_string(doc.nextLayer++);
    layer.transform = {};
    layer.opacity = 1;
    layer.locked = false;
    layer.epochMs = 0;
    layer.restartPending = false;
    if (layer.dependsOn) layer.transform = doc.layer(*layer.dependsOn).transform;

    if (layer.width <= 0 || layer.height <= 0) {
        if (!layer.frames.empty()) {
            svg::ViewBox vb = svg::view_box(layer.frames.front());
            layer.width = vb.width;
            layer.height = vb.height;
        } else if (layer.kind == LayerKind::Text) {
            double px = text_px(layer);
            layer.width = std::max(1.0, 0.6 * px * static_cast<double>(text::codepoint_length(layer.text->content)));
            layer.height = 1.4 * px;
        } else if (layer.dependsOn) {
            layer.width = doc.layer(*layer.dependsOn).width;
            layer.height = doc.layer(*layer.dependsOn).height;
        } else {
            layer.width = charts::kChartWidth;
            layer.height = charts::kChartHeight;
        }
    }

    int top = -1;
    for (const Layer& l : doc.layers) top = std::max(top, l.zOrder);
    layer.zOrder = top + 1;
    doc.layers.push_back(std::move(layer));
    renumber(doc);
    return doc.layers.back();
}

Layer& set_config(Document& doc, std::string_view layerId, ConfigField field, const json& value,
                  const LayerRenderer& render)
{
    Layer& l = *find_layer(doc, layerId);
    if (!permitted(l.kind, field))
        throw Error("document.config",
                    std::string(to_string(field)) + " is not configurable for " + std::string(to_string(l.kind)) +
                        " layers (allowed: " + allowed_list(field) + ")",
                    std::string(to_string(field)));
    require_unlocked(l);

    auto bad = [&](const std::string& why) -> Error {
        return Error("document.config", std::string(to_string(field)) + ": " + why, std::string(to_string(field)));
    };

    Layer before = l;
    try {
        switch (field) {
        case ConfigField::ShowAxes:
            if (!value.is_boolean()) throw bad("expected a boolean");
            l.config.showAxes = value.get<bool>();
            break;
        case ConfigField::ShowLegend:
            if (!value.is_boolean()) throw bad("expected a boolean");
            l.config.showLegend = value.get<bool>();
            break;
        case ConfigField::Animate:
            if (!value.is_string() || value.get<std::string>().empty()) throw bad("expected a column name");
            if (!render) throw bad("animating a chart needs its dataset");
            l.config.animateColumn = value.get<std::string>();
            l.kind = LayerKind::AnimatedChart;
            break;
        case ConfigField::Recolor:
            if (!value.is_object()) throw bad("expected a color mapping");
            try {
                l.config.recolor = compose::mapping_from_json(value);
            } catch (const Error&) {
                throw;
            } catch (const std::exception& e) {
                throw bad(e.what());
            }
            break;
        case ConfigField::Opacity: {
            if (!value.is_number()) throw bad("expected a number");
            double o = value.get<double>();
            if (!(o >= 0 && o <= 1)) throw bad("opacity must be within [0,1]");
            l.opacity = o;
            break;
        }
        case ConfigField::Thickness: {
            if (!value.is_number()) throw bad("expected a number");
            double t = value.get<double>();
            if (!(t > 0) || !std::isfinite(t)) throw bad("thickness must be positive");
            l.config.thickness = t;
            if (l.kind == LayerKind::AnnotationLine) {
                l.annotation->line.thicknessPx = t;
                l.annotation->line.dash = dash_for(l.config.style, t);
            }
            if (l.kind == LayerKind::Text) {
                double px = text_px(l);
                l.width = std::max(1.0, 0.6 * px * static_cast<double>(text::codepoint_length(l.text->content)));
                l.height = 1.4 * px;
            }
            break;
        }
        case ConfigField::Style:
            if (l.kind == LayerKind::AnnotationLine) {
                if (value.is_string()) {
                    std::string s = value.get<std::string>();
                    if (!kLineStyles.count(s)) throw bad("expected solid, dashed or dotted");
                    l.config.style = s;
                } else if (value.is_object()) {
                    std::string s = value.value("pattern", l.config.style);
                    if (!kLineStyles.count(s)) throw bad("expected solid, dashed or dotted");
                    l.config.style = s;
                    if (value.contains("startHead"))
                        l.annotation->line.startHead = compose::head_from_string(value.at("startHead").get<std::string>());
                    if (value.contains("endHead"))
                        l.annotation->line.endHead = compose::head_from_string(value.at("endHead").get<std::string>());
                } else {
                    throw bad("expected a pattern");
                }
                l.annotation->line.dash = dash_for(l.config.style, l.config.thickness);
            } else {
                if (!value.is_string() || !kTextStyles.count(value.get<std::string>()))
                    throw bad("expected normal, italic, bold or bold-italic");
                l.config.style = value.get<std::string>();
            }
            break;
        case ConfigField::FrameDelay: {
            if (!value.is_number_integer()) throw bad("expected an integer");
            auto d = value.get<long long>();
            if (d <= 0 || d > 600000) throw bad("frame delay must be positive");
            l.config.frameDelayMs = static_cast<int>(d);
            break;
        }
        }
        if (needs_render(l, field) && render) render(l);
    } catch (...) {
        l = std::move(before);
        throw;
    }
    return l;
}

void bring_forward(Document& doc, std::string_view layerId)
{
    renumber(doc);
    auto it = find_layer(doc, layerId);
    auto next = std::next(it);
    if (next == doc.layers.end()) return;
    std::swap(it->zOrder, next->zOrder);
    renumber(doc);
}

void send_backward(Document& doc, std::string_view layerId)
{
    renumber(doc);
    auto it = find_layer(doc, layerId);
    if (it == doc.layers.begin()) return;
    std::swap(it->zOrder, std::prev(it)->zOrder);
    renumber(doc);
}

void transform(Document& doc, std::string_view layerId, const Transform& delta)
{
    Layer& base = *find_layer(doc, layerId);
    require_unlocked(base);
    if (!(delta.scale > 0) || !std::isfinite(delta.scale))
        throw Error("document.transform", "scale must be positive");
    if (!std::isfinite(delta.tx) || !std::isfinite(delta.ty) || !std::isfinite(delta.rotationDeg))
        throw Error("document.transform", "transform must be finite");

    std::vector<std::string> targets{base.id};
    for (std::size_t i = 0; i < targets.size(); ++i)
        for (const Layer& l : doc.layers)
            if (l.dependsOn && *l.dependsOn == targets[i]) targets.push_back(l.id);

    for (const std::string& id : targets) {
        Transform& t = doc.layer(id).transform;
        t.tx += delta.tx;
        t.ty += delta.ty;
        t.rotationDeg = std::fmod(t.rotationDeg + delta.rotationDeg, 360.0);
        if (t.rotationDeg < 0) t.rotationDeg += 360.0;
        t.scale *= delta.scale;
    }
}

void set_locked(Document& doc, std::string_view layerId, bool locked) { find_layer(doc, layerId)->locked = locked; }

void remove_layer(Document& doc, std::string_view layerId)
{
    require_unlocked(*find_layer(doc, layerId));
    std::set<std::string> gone{std::string(layerId)};
    bool grew = true;
    while (grew) {
        grew = false;
        for (const Layer& l : doc.layers)
            if (l.dependsOn && gone.count(*l.dependsOn) && gone.insert(l.id).second) grew = true;
    }
    std::erase_if(doc.layers, [&](const Layer& l) { return gone.count(l.id) > 0; });
    renumber(doc);
}

void reset_animations(Document& doc, std::int64_t nowMs)
{
    for (Layer& l : doc.layers) {
        if (!is_animated(l.kind)) continue;
        l.epochMs = nowMs;
        l.restartPending = false;
    }
}

svg::Element layer_content(const Layer& l, std::int64_t ms)
{
    svg::Element out;
    switch (l.kind) {
    case LayerKind::AnnotationLine: {
        out = svg::document(l.width, l.height);
        out.add(compose::render_annotation(*l.annotation));
        return out;
    }
    case LayerKind::Text: {
        out = svg::document(l.width, l.height);
        double px = text_px(l);
        Rgb color = l.text->color;
        if (auto it = l.config.recolor.find(color); it != l.config.recolor.end()) color = it->second;
        svg::Element t("text", {{"x", "0"},
                                {"y", svg::num(px)},
                                {"font-family", l.text->fontFamily},
                                {"font-size", svg::num(px)},
                                {"fill", to_hex(color)}});
        if (l.config.style == "italic" || l.config.style == "bold-italic") t.set("font-style", "italic");
        if (l.config.style == "bold" || l.config.style == "bold-italic") t.set("font-weight", "bold");
        t.add(svg::Element::text_node(l.text->content));
        out.add(std::move(t));
        return out;
    }
    default:
        break;
    }
    if (l.frames.empty()) throw Error("document.asset", "layer has no content", l.id);
    std::size_t idx = 0;
    if (is_animated(l.kind) && l.frames.size() > 1) {
        std::int64_t step = floor_div(ms - l.epochMs, l.config.frameDelayMs);
        idx = static_cast<std::size_t>(floor_mod(step, static_cast<std::int64_t>(l.frames.size())));
    }
    out = l.frames[idx];
    if (!l.config.recolor.empty()) compose::apply_mapping(out, l.config.recolor, chart_scope(l.kind));
    out.set("width", svg::num(l.width));
    out.set("height", svg::num(l.height));
    return out;
}

std::string export_static(const Document& doc)
{
    if (doc.layers.empty()) throw Error("document.empty", "document has no layers", doc.id);
    return svg::serialize(compose_at(doc, 0, true));
}

FrameBundle export_frames(const Document& doc, std::size_t cap)
{
    if (doc.layers.empty()) throw Error("document.empty", "document has no layers", doc.id);
    if (cap == 0) cap = 1;

    struct Clock {
        std::int64_t offset, delay;
    };
    std::vector<Clock> clocks;
    std::int64_t cycle = 0;
    bool overflow = false;
    for (const Layer& l : doc.layers) {
        if (!is_animated(l.kind) || l.frames.size() < 2) continue;
        std::int64_t delay = l.config.frameDelayMs;
        std::int64_t c = delay * static_cast<std::int64_t>(l.frames.size());
        clocks.push_back({floor_mod(l.epochMs, delay), delay});
        if (cycle == 0) {
            cycle = c;
        } else if (!overflow) {
            std::int64_t g = std::gcd(cycle, c);
            if (cycle / g > (std::int64_t(1) << 53) / c) overflow = true;
            else cycle = cycle / g * c;
        }
    }

    FrameBundle b;
    if (clocks.empty()) {
        b.startsMs = {0};
        b.durationsMs = {0};
    } else {
        // Merge the per-layer change instants within one cycle, starting at 0.
        using Item = std::pair<std::int64_t, std::size_t>;
        std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
        for (std::size_t i = 0; i < clocks.size(); ++i) pq.push({clocks[i].offset, i});
        std::vector<std::int64_t> instants{0};
        std::int64_t limit = overflow ? std::numeric_limits<std::int64_t>::max() : cycle;
        std::optional<std::int64_t> beyondCap;
        while (!pq.empty()) {
            auto [t, i] = pq.top();
            pq.pop();
            if (t >= limit) break;
            if (t != instants.back()) {
                if (instants.size() == cap) {
                    beyondCap = t;
                    break;
                }
                instants.push_back(t);
            }
            pq.push({t + clocks[i].delay, i});
        }
        b.truncated = beyondCap.has_value() || overflow;
        b.startsMs = instants;
        for (std::size_t i = 0; i < instants.size(); ++i) {
            std::int64_t end = i + 1 < instants.size() ? instants[i + 1] : (beyondCap ? *beyondCap : cycle);
            b.durationsMs.push_back(end - instants[i]);
        }
    }
    b.cycleMs = overflow ? -1 : cycle;

    std::ostringstream m;
    m << "frames " << b.startsMs.size() << "\n";
    m << "cycle_ms " << b.cycleMs << "\n";
    m << "loop infinite\n";
    m << "truncated " << (b.truncated ? "true" : "false") << "\n";
    for (std::size_t i = 0; i < b.startsMs.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "frame_%03zu.svg", i);
        b.files.emplace_back(name, svg::serialize(compose_at(doc, b.startsMs[i], false)));
        m << name << " " << b.durationsMs[i] << "\n";
    }
    b.manifest = m.str();
    b.files.emplace_back("timing.txt", b.manifest);
    return b;
}

std::string zip_store(const std::vector<std::pair<std::string, std::string>>& files)
{
    constexpr std::uint32_t kDosDate = (0 << 9) | (1 << 5) | 1; // 1980-01-01
    std::string out, central;
    for (const auto& [name, data] : files) {
        std::uint32_t crc = static_cast<std::uint32_t>(
            crc32(0L, reinterpret_cast<const Bytef*>(data.data()), static_cast<uInt>(data.size())));
        std::uint32_t offset = static_cast<std::uint32_t>(out.size());
        auto size = static_cast<std::uint32_t>(data.size());
        auto nameLen = static_cast<std::uint32_t>(name.size());

        put32(out, 0x04034b50);
        put16(out, 20);
        put16(out, 0);
        put16(out, 0);
        put16(out, 0);
        put16(out, kDosDate);
        put32(out, crc);
        put32(out, size);
        put32(out, size);
        put16(out, nameLen);
        put16(out, 0);
        out += name;
        out += data;

        put32(central, 0x02014b50);
        put16(central, 20);
        put16(central, 20);
        put16(central, 0);
        put16(central, 0);
        put16(central, 0);
        put16(central, kDosDate);
        put32(central, crc);
        put32(central, size);
        put32(central, size);
        put16(central, nameLen);
        put16(central, 0);
        put16(central, 0);
        put16(central, 0);
        put16(central, 0);
        put32(central, 0);
        put32(central, offset);
        central += name;
    }
    std::uint32_t cdOffset = static_cast<std::uint32_t>(out.size());
    out += central;
    put32(out, 0x06054b50);
    put16(out, 0);
    put16(out, 0);
    put16(out, static_cast<std::uint32_t>(files.size()));
    put16(out, static_cast<std::uint32_t>(files.size()));
    put32(out, static_cast<std::uint32_t>(central.size()));
    put32(out, cdOffset);
    put16(out, 0);
    return out;
}

json to_json(const Layer& l)
{
    json j = {{"id", l.id},
              {"kind", to_string(l.kind)},
              {"assetRef", l.assetRef},
              {"transform",
               {{"tx", l.transform.tx}, {"ty", l.transform.ty}, {"rotationDeg", l.transform.rotationDeg},
                {"scale", l.transform.scale}}},
              {"zOrder", l.zOrder},
              {"opacity", l.opacity},
              {"locked", l.locked},
              {"config", config_to_json(l.config)},
              {"dependsOn", l.dependsOn ? json(*l.dependsOn) : json(nullptr)},
              {"width", l.width},
              {"height", l.height},
              {"epochMs", l.epochMs},
              {"restartPending", l.restartPending}};
    json frames = json::array();
    for (const auto& f : l.frames) frames.push_back(svg::serialize(f));
    j["frames"] = std::move(frames);
    j["frameKeys"] = l.frameKeys;
    if (l.chartSpec) j["chartSpec"] = charts::to_json(*l.chartSpec);
    if (l.glyphs) j["glyphs"] = {{"assetIds", l.glyphs->assetIds}, {"glyphScale", l.glyphs->glyphScale}};
    if (l.overlay) j["overlay"] = compose::to_json(*l.overlay);
    if (l.annotation) j["annotation"] = compose::to_json(*l.annotation);
    if (l.text) j["text"] = text_to_json(*l.text);
    return j;
}

Layer layer_from_json(const json& j)
{
    Layer l;
    l.id = j.at("id").get<std::string>();
    l.kind = layer_kind_from_string(j.at("kind").get<std::string>());
    l.assetRef = j.at("assetRef").get<std::string>();
    const json& t = j.at("transform");
    l.transform = {t.at("tx").get<double>(), t.at("ty").get<double>(), t.at("rotationDeg").get<double>(),
                   t.at("scale").get<double>()};
    if (!(l.transform.scale > 0)) throw Error("document.parse", "layer scale must be positive", l.id);
    l.zOrder = j.at("zOrder").get<int>();
    l.opacity = j.at("opacity").get<double>();
    l.locked = j.at("locked").get<bool>();
    l.config = config_from_json(j.at("config"));
    if (!j.at("dependsOn").is_null()) l.dependsOn = j.at("dependsOn").get<std::string>();
    l.width = j.at("width").get<double>();
    l.height = j.at("height").get<double>();
    l.epochMs = j.at("epochMs").get<std::int64_t>();
    l.restartPending = j.at("restartPending").get<bool>();
    for (const auto& f : j.at("frames")) l.frames.push_back(svg::parse(f.get<std::string>()));
    l.frameKeys = j.at("frameKeys").get<std::vector<std::string>>();
    if (j.contains("chartSpec")) l.chartSpec = charts::chart_spec_from_json(j.at("chartSpec"));
    if (j.contains("glyphs"))
        l.glyphs = compose::GlyphMap{j.at("glyphs").at("assetIds").get<std::map<std::string, std::string>>(),
                                     j.at("glyphs").at("glyphScale").get<double>()};
    if (j.contains("overlay")) l.overlay = compose::highlight_overlay_from_json(j.at("overlay"));
    if (j.contains("annotation")) l.annotation = compose::annotation_from_json(j.at("annotation"));
    if (j.contains("text")) l.text = text_from_json(j.at("text"));
    return l;
}

std::string serialize(const Document& doc)
{
    json layers = json::array();
    for (const Layer& l : doc.layers) layers.push_back(to_json(l));
    json j = {{"schemaVersion", kSchemaVersion},
              {"id", doc.id},
              {"canvas", {{"width", doc.width}, {"height", doc.height}}},
              {"background", doc.background ? json(to_hex(*doc.background)) : json(nullptr)},
              {"messageRef", doc.messageRef},
              {"nextLayer", doc.nextLayer},
              {"layers", std::move(layers)}};
    return j.dump(1);
}

Document deserialize(std::string_view payload)
{
    json j;
    try {
        j = json::parse(payload.begin(), payload.end());
    } catch (const json::parse_error& e) {
        throw Error("document.parse", std::string("document parse error at byte ") + std::to_string(e.byte),
                    std::to_string(e.byte));
    }
    try {
        if (!j.is_object() || !j.contains("schemaVersion"))
            throw Error("document.parse", "document has no schemaVersion");
        int v = j.at("schemaVersion").get<int>();
        if (v != kSchemaVersion)
            throw Error("document.migration",
                        "cannot migrate document schemaVersion " + std::to_string(v) + " to " +
                            std::to_string(kSchemaVersion),
                        std::to_string(v) + "->" + std::to_string(kSchemaVersion));
        Document d;
        d.id = j.at("id").get<std::string>();
        d.width = j.at("canvas").at("width").get<double>();
        d.height = j.at("canvas").at("height").get<double>();
        if (!(d.width > 0 && d.height > 0)) throw Error("document.parse", "canvas size must be positive");
        if (!j.at("background").is_null()) {
            auto c = parse_color(j.at("background").get<std::string>());
            if (!c) throw Error("document.parse", "bad background color");
            d.background = *c;
        }
        d.messageRef = j.at("messageRef").get<std::string>();
        d.nextLayer = j.at("nextLayer").get<std::uint64_t>();
        std::set<std::string> ids;
        for (const auto& lj : j.at("layers")) {
            d.layers.push_back(layer_from_json(lj));
            if (!ids.insert(d.layers.back().id).second)
                throw Error("document.parse", "duplicate layer id", d.layers.back().id);
        }
        renumber(d);
        return d;
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        throw Error("document.parse", std::string("malformed document: ") + e.what());
    }
}

void History::record(const Document& before)
{
    undo_.push_back(serialize(before));
    if (undo_.size() > kLimit) undo_.erase(undo_.begin());
    redo_.clear();
}

Document History::undo(const Document& current)
{
    if (undo_.empty()) throw Error("document.history", "nothing to undo");
    redo_.push_back(serialize(current));
    Document d = deserialize(undo_.back());
    undo_.pop_back();
    return d;
}

Document History::redo(const Document& current)
{
    if (redo_.empty()) throw Error("document.history", "nothing to redo");
    undo_.push_back(serialize(current));
    Document d = deserialize(redo_.back());
    redo_.pop_back();
    return d;
}

} // namespace inkline::document
