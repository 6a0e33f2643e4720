#include "inkline/compose.hpp"

#include "inkline/error.hpp"
#include "inkline/raster.hpp"
#include "inkline/text.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace inkline::compose {

using nlohmann::json;

namespace {

bool is_text_tag(const std::string& tag) { return tag == "text" || tag == "tspan" || tag == "textPath"; }

bool is_skipped_subtree(const std::string& tag)
{
    return tag == "defs" || tag == "linearGradient" || tag == "radialGradient" || tag == "pattern" ||
           tag == "clipPath" || tag == "mask" || tag == "style" || tag == "metadata";
}

struct StyleDecl {
    std::string name, value;
};

std::vector<StyleDecl> parse_style(const std::string& style)
{
    std::vector<StyleDecl> out;
    std::istringstream in(style);
    std::string decl;
    while (std::getline(in, decl, ';')) {
        auto colon = decl.find(':');
        if (colon == std::string::npos) continue;
        out.push_back({text::trim(decl.substr(0, colon)), text::trim(decl.substr(colon + 1))});
    }
    return out;
}

std::string join_style(const std::vector<StyleDecl>& decls)
{
    std::string out;
    for (const auto& d : decls) {
        if (!out.empty()) out += ';';
        out += d.name + ':' + d.value;
    }
    return out;
}

std::optional<std::string> effective(const svg::Element& e, const std::string& name)
{
    if (auto st = e.attr("style"))
        for (const auto& d : parse_style(*st))
            if (d.name == name) return d.value;
    return e.attr(name);
}

// Calls fn on every counted paint value of one element, allowing rewrites.
void element_paints(svg::Element& e, bool chartScope, const std::function<void(std::string&)>& fn)
{
    if (is_text_tag(e.tag) || e.is_text()) return;
    bool strokeCounts = true;
    if (chartScope) {
        auto fill = effective(e, "fill");
        strokeCounts = fill && text::trim(*fill) == "none";
    }
    auto counts = [&](const std::string& name) { return name == "fill" || (name == "stroke" && strokeCounts); };
    for (auto& [name, value] : e.attrs)
        if (counts(name)) fn(value);
    if (auto st = e.attr("style")) {
        auto decls = parse_style(*st);
        for (auto& d : decls)
            if (counts(d.name)) fn(d.value);
        e.set("style", join_style(decls));
    }
}

void visit_paints(svg::Element& e, bool chartScope, bool inScope, const std::function<void(std::string&)>& fn)
{
    if (e.is_text() || is_skipped_subtree(e.tag)) return;
    bool scoped = inScope || !chartScope || (e.tag == "g" && (svg::has_class(e, "marks") || svg::has_class(e, "legend")));
    if (scoped) element_paints(e, chartScope, fn);
    for (auto& c : e.children) visit_paints(c, chartScope, scoped, fn);
}

Rgb hexrgb(std::string_view s) { return parse_color(s).value_or(Rgb{}); }

std::string head_path(double x, double y, double fromX, double fromY, double size)
{
    double dx = x - fromX, dy = y - fromY;
    double len = std::hypot(dx, dy);
    if (len == 0) {
        dx = 1;
        dy = 0;
        len = 1;
    }
    dx /= len;
    dy /= len;
    double bx = x - dx * size, by = y - dy * size;
    double px = -dy * size * 0.5, py = dx * size * 0.5;
    std::ostringstream os;
    os << 'M' << svg::num(x) << ' ' << svg::num(y) << " L" << svg::num(bx + px) << ' ' << svg::num(by + py) << " L"
       << svg::num(bx - px) << ' ' << svg::num(by - py) << " Z";
    return os.str();
}

svg::Element head_el(Head h, double x, double y, double fromX, double fromY, const LineStyle& s)
{
    std::string color = to_hex(s.color);
    if (h == Head::Dot)
        return svg::Element("circle", {{"cx", svg::num(x)}, {"cy", svg::num(y)},
                                       {"r", svg::num(std::max(2.0, 2 * s.thicknessPx))}, {"fill", color}});
    return svg::Element("path", {{"d", head_path(x, y, fromX, fromY, std::max(6.0, 4 * s.thicknessPx))}, {"fill", color}});
}

std::set<std::string> glyph_attrs_skipped() { return {"x", "y", "width", "height", "viewBox", "xmlns", "version", "xmlns:xlink"}; }

} // namespace

std::string_view to_string(Head h)
{
    switch (h) {
    case Head::None: return "none";
    case Head::Dot: return "dot";
    case Head::Arrow: return "arrow";
    }
    return "none";
}

Head head_from_string(std::string_view s)
{
    if (s == "none") return Head::None;
    if (s == "dot") return Head::Dot;
    if (s == "arrow") return Head::Arrow;
    throw Error("compose.annotation", "unknown line head: " + std::string(s), std::string(s));
}

void validate(const Annotation& a)
{
    if (!(a.line.thicknessPx > 0)) throw Error("compose.annotation", "line thickness must be positive");
    if (!(a.opacity >= 0 && a.opacity <= 1)) throw Error("compose.annotation", "opacity must be within [0,1]");
}

svg::Element render_annotation(const Annotation& a)
{
    validate(a);
    svg::Element g("g", {{"class", "annotation"}});
    if (a.opacity < 1) g.set("opacity", svg::num(a.opacity));
    svg::Element line("line", {{"x1", svg::num(a.labelX)}, {"y1", svg::num(a.labelY)}, {"x2", svg::num(a.targetX)},
                               {"y2", svg::num(a.targetY)}, {"stroke", to_hex(a.line.color)},
                               {"stroke-width", svg::num(a.line.thicknessPx)}});
    if (!a.line.dash.empty()) line.set("stroke-dasharray", a.line.dash);
    g.add(std::move(line));
    if (a.line.endHead != Head::None) g.add(head_el(a.line.endHead, a.targetX, a.targetY, a.labelX, a.labelY, a.line));
    if (a.line.startHead != Head::None)
        g.add(head_el(a.line.startHead, a.labelX, a.labelY, a.targetX, a.targetY, a.line));

    double dx = a.labelX - a.targetX, dy = a.labelY - a.targetY;
    std::string anchor = "middle";
    double tx = a.labelX, ty = a.labelY;
    if (std::abs(dx) >= std::abs(dy)) {
        anchor = dx < 0 ? "end" : "start";
        tx += dx < 0 ? -4 : 4;
        ty += 4;
    } else {
        ty += dy < 0 ? -4 : 12;
    }
    svg::Element label("text", {{"x", svg::num(tx)}, {"y", svg::num(ty)}, {"font-family", "sans-serif"},
                                {"font-size", "12"}, {"fill", to_hex(a.line.color)}, {"text-anchor", anchor}});
    label.add(svg::Element::text_node(a.labelText));
    g.add(std::move(label));
    return g;
}

svg::Element render_overlay(const HighlightOverlay& overlay, const charts::ChartImage& base)
{
    svg::Element root = svg::document(base.width, base.height);
    const charts::PlotArea& p = base.plot;
    root.add(svg::Element("rect", {{"class", "veil"}, {"x", svg::num(p.x - 8)}, {"y", svg::num(p.y - 8)},
                                   {"width", svg::num(p.width + 16)}, {"height", svg::num(p.height + 16)},
                                   {"fill", "#ffffff"}, {"fill-opacity", svg::num(1 - overlay.dimOpacity)}}));
    std::set<std::string> wanted;
    for (std::size_t i : overlay.emphasizedMarks) wanted.insert(std::to_string(i));
    svg::Element emph("g", {{"class", "marks emphasized"}});
    svg::walk(base.svg, [&](const svg::Element& e) {
        if (auto m = e.attr("data-mark"); m && wanted.count(*m)) emph.add(e);
    });
    root.add(std::move(emph));
    for (const auto& a : overlay.annotations) root.add(render_annotation(a));
    return root;
}

HighlightResult highlight(const charts::ChartSpec& spec, const charts::ChartImage& image, const Dataset& ds,
                          const filterql::FilteredTable& filtered, std::string_view chunkText, std::string baseChartRef,
                          double dimOpacity)
{
    if (!spec.datasetId.empty() && !filtered.datasetId.empty() && spec.datasetId != filtered.datasetId)
        throw Error("compose.dataset_mismatch", "filter and chart use different datasets", filtered.datasetId);
    if (filtered.rowIndices.empty()) throw Error("compose.empty_selection", "empty selection");
    if (!(dimOpacity >= 0 && dimOpacity <= 1)) throw Error("compose.highlight", "dim opacity must be within [0,1]");
    std::set<std::size_t> selected(filtered.rowIndices.begin(), filtered.rowIndices.end());

    if (spec.aggregated()) {
        std::vector<std::size_t> rows;
        if (spec.rowFilter) {
            for (std::size_t r : *spec.rowFilter)
                if (selected.count(r)) rows.push_back(r);
        } else {
            rows.assign(selected.begin(), selected.end());
        }
        if (rows.empty()) throw Error("compose.empty_selection", "empty selection");
        charts::ChartSpec narrowed = spec;
        narrowed.rowFilter = rows;
        return charts::render_chart(narrowed, ds);
    }

    HighlightOverlay o;
    o.baseChartRef = std::move(baseChartRef);
    o.dimOpacity = dimOpacity;
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < image.marks.size(); ++i) {
        const auto& m = image.marks[i];
        bool hit = std::any_of(m.rows.begin(), m.rows.end(), [&](std::size_t r) { return selected.count(r) > 0; });
        (hit ? o.emphasizedMarks : o.dimmedMarks).push_back(i);
        if (hit) {
            sx += m.cx;
            sy += m.cy;
        }
    }
    if (o.emphasizedMarks.empty()) throw Error("compose.empty_selection", "empty selection");
    Annotation a;
    a.labelText = std::string(chunkText);
    a.targetX = sx / static_cast<double>(o.emphasizedMarks.size());
    a.targetY = sy / static_cast<double>(o.emphasizedMarks.size());
    double dl = a.targetX, dr = image.width - a.targetX, dt = a.targetY, db = image.height - a.targetY;
    double best = std::min({dl, dr, dt, db});
    a.labelX = a.targetX;
    a.labelY = a.targetY;
    if (best == dl) a.labelX -= kLabelOffsetPx;
    else if (best == dr) a.labelX += kLabelOffsetPx;
    else if (best == dt) a.labelY -= kLabelOffsetPx;
    else a.labelY += kLabelOffsetPx;
    o.annotations.push_back(std::move(a));
    return o;
}

std::vector<Rgb> paints(const svg::Element& root, bool chartScope)
{
    svg::Element copy = root;
    std::vector<Rgb> out;
    std::set<Rgb> seen;
    visit_paints(copy, chartScope, false, [&](std::string& v) {
        if (auto c = parse_color(v); c && seen.insert(*c).second) out.push_back(*c);
    });
    return out;
}

void apply_mapping(svg::Element& root, const std::map<Rgb, Rgb>& mapping, bool chartScope)
{
    visit_paints(root, chartScope, false, [&](std::string& v) {
        if (auto c = parse_color(v)) {
            auto it = mapping.find(*c);
            if (it != mapping.end()) v = to_hex(it->second);
        }
    });
}

RecolorResult recolor_frames(const std::vector<svg::Element*>& frames, const chroma::Palette& target, SchemeKind scheme,
                             bool chartScope)
{
    std::vector<Rgb> order;
    std::set<Rgb> seen;
    std::map<Rgb, double> weight;
    for (const auto* f : frames) {
        for (const auto& c : paints(*f, chartScope))
            if (seen.insert(c).second) order.push_back(c);
        for (const auto& [c, n] : raster::paint_coverage(*f, 256, 256)) weight[c] += static_cast<double>(n);
    }
    if (order.empty()) throw Error("compose.no_paints", "asset has no paint colors");

    std::vector<chroma::SourceColor> sources;
    for (const auto& c : order) sources.push_back({c, std::max(weight[c], 1e-6)});
    std::vector<chroma::SourceColor> head = sources;
    if (head.size() > chroma::kMaxSourceColors) {
        std::stable_sort(head.begin(), head.end(), [](const auto& a, const auto& b) { return a.weight > b.weight; });
        head.resize(chroma::kMaxSourceColors);
        // keep document order among the retained colors
        std::stable_sort(head.begin(), head.end(), [&](const auto& a, const auto& b) {
            return std::find(order.begin(), order.end(), a.color) < std::find(order.begin(), order.end(), b.color);
        });
    }
    RecolorResult r;
    r.scheme = scheme;
    r.mapping = chroma::recolor_mapping(head, target, scheme);
    for (const auto& s : sources) {
        if (r.mapping.count(s.color)) continue;
        const chroma::SourceColor* near = &head.front();
        double best = 1e300;
        for (const auto& h : head) {
            double d = lab_distance<double>(s.color, h.color);
            if (d < best) {
                best = d;
                near = &h;
            }
        }
        r.mapping[s.color] = r.mapping.at(near->color);
    }
    for (auto* f : frames) apply_mapping(*f, r.mapping, chartScope);
    return r;
}

RecolorResult apply_recolor(charts::ChartImage& chart, const chroma::Palette& target, SchemeKind declared)
{
    RecolorResult r = recolor_frames({&chart.svg}, target, declared, true);
    for (auto& m : chart.marks)
        if (auto it = r.mapping.find(m.paint); it != r.mapping.end()) m.paint = it->second;
    for (auto& l : chart.legend)
        if (auto it = r.mapping.find(l.paint); it != r.mapping.end()) l.paint = it->second;
    return r;
}

RecolorResult apply_recolor(svg::Element& graphic, const chroma::Palette& target)
{
    return recolor_frames({&graphic}, target, SchemeKind::Categorical, false);
}

RecolorResult apply_recolor(AnimatedAsset& animation, const chroma::Palette& target, std::optional<SchemeKind> declared)
{
    std::vector<svg::Element*> frames;
    for (auto& f : animation.frames) frames.push_back(&f);
    bool chart = animation.source == AnimationSource::Visualization;
    return recolor_frames(frames, target, declared.value_or(SchemeKind::Categorical), chart);
}

svg::Element place_glyph(const svg::Element& glyph, double x, double y, double size)
{
    auto vb = svg::view_box(glyph);
    svg::Element out("svg", {{"x", svg::num(x)},
                             {"y", svg::num(y)},
                             {"width", svg::num(size)},
                             {"height", svg::num(size)},
                             {"viewBox", svg::num(vb.x) + " " + svg::num(vb.y) + " " + svg::num(vb.width) + " " +
                                             svg::num(vb.height)}});
    static const auto skipped = glyph_attrs_skipped();
    for (const auto& [k, v] : glyph.attrs)
        if (!skipped.count(k)) out.set(k, v);
    out.children = glyph.children;
    return out;
}

charts::ChartImage make_dod(const charts::ChartSpec& spec, const charts::ChartImage& image, const GlyphMap& glyphs,
                            const GlyphResolver& resolve)
{
    using charts::Mark;
    if (spec.mark != Mark::Point && spec.mark != Mark::Bar && spec.mark != Mark::Line)
        throw Error("compose.dod_unsupported", "DOD unsupported for mark", std::string(charts::to_string(spec.mark)));
    const auto* color = spec.encoding(charts::Channel::Color);
    if (!color || color->kind != ColumnKind::Nominal)
        throw Error("compose.dod_no_legend", "DOD needs a nominal color legend");
    if (!(glyphs.glyphScale > 0)) throw Error("compose.dod", "glyph scale must be positive");

    std::set<std::string> values;
    for (const auto& m : image.marks) values.insert(m.series);
    for (const auto& l : image.legend) values.insert(l.value);
    std::map<std::string, svg::Element> resolved;
    for (const auto& v : values) {
        auto it = glyphs.assetIds.find(v);
        if (it == glyphs.assetIds.end())
            throw Error("compose.dod_missing_glyph", "no glyph for legend value '" + v + "'", v);
        resolved.emplace(v, resolve(it->second));
    }

    charts::ChartImage out = image;
    svg::Element* marks = svg::find_first(out.svg, [](const svg::Element& e) { return e.tag == "g" && svg::has_class(e, "marks"); });
    if (!marks) throw Error("compose.dod", "chart has no marks group");

    std::function<void(svg::Element&)> rewrite = [&](svg::Element& parent) {
        std::vector<svg::Element> kids;
        for (auto& child : parent.children) {
            auto idx = child.attr("data-mark");
            if (!idx) {
                rewrite(child);
                kids.push_back(std::move(child));
                continue;
            }
            std::size_t i = std::stoul(*idx);
            auto& m = out.marks.at(i);
            const svg::Element& glyph = resolved.at(m.series);
            if (spec.mark == Mark::Bar) {
                double size = glyphs.glyphScale * std::min(m.width, 12.0);
                svg::Element g("g", {{"data-mark", *idx}, {"data-glyph", m.series}});
                child.erase_attr("data-mark");
                g.add(std::move(child));
                g.add(place_glyph(glyph, m.cx - size / 2, m.cy - size, size));
                kids.push_back(std::move(g));
            } else {
                double size = glyphs.glyphScale * m.width;
                svg::Element g = place_glyph(glyph, m.cx - size / 2, m.cy - size / 2, size);
                g.set("data-mark", *idx);
                g.set("data-glyph", m.series);
                kids.push_back(std::move(g));
                m.shape = "glyph";
                m.width = m.height = size;
            }
        }
        parent.children = std::move(kids);
    };
    rewrite(*marks);

    if (svg::Element* legend = svg::find_first(out.svg, [](const svg::Element& e) { return e.tag == "g" && svg::has_class(e, "legend"); })) {
        for (auto& entry : legend->children) {
            auto v = entry.attr("data-legend");
            if (!v) continue;
            for (auto& c : entry.children) {
                if (c.tag != "rect") continue;
                double x = std::stod(c.attr("x").value_or("0")), y = std::stod(c.attr("y").value_or("0"));
                double w = std::stod(c.attr("width").value_or("12"));
                c = place_glyph(resolved.at(*v), x, y, w);
            }
        }
    }
    return out;
}

std::pair<AnimatedAsset, AnimatedAsset> sync(AnimatedAsset a, AnimatedAsset b)
{
    if (a.frames.size() < 2 || b.frames.size() < 2) throw Error("compose.sync", "both animations need at least 2 frames");
    if (a.frameDelayMs <= 0 || b.frameDelayMs <= 0) throw Error("compose.sync", "frame delays must be positive");
    AnimatedAsset& longer = a.frames.size() >= b.frames.size() ? a : b;
    const AnimatedAsset& shorter = &longer == &a ? b : a;
    std::size_t n = shorter.frames.size(), m = longer.frames.size();
    if (m % n != 0) {
        std::size_t keep = n * (m / n);
        longer.frames.resize(keep);
        if (!longer.frameKeys.empty()) longer.frameKeys.resize(keep);
    }
    bool bIsAuthority = b.source == AnimationSource::Visualization && a.source != AnimationSource::Visualization;
    AnimatedAsset& auth = bIsAuthority ? b : a;
    AnimatedAsset& other = bIsAuthority ? a : b;
    long long cycle = static_cast<long long>(auth.frames.size()) * auth.frameDelayMs;
    auto count = static_cast<long long>(other.frames.size());
    long long delay = (2 * cycle + count) / (2 * count); // round half up
    other.frameDelayMs = static_cast<int>(std::max<long long>(1, delay));
    a.restartPending = b.restartPending = true;
    return {std::move(a), std::move(b)};
}

json to_json(const Annotation& a)
{
    return {{"labelText", a.labelText},
            {"labelAnchor", {{"x", a.labelX}, {"y", a.labelY}}},
            {"targetPoint", {{"x", a.targetX}, {"y", a.targetY}}},
            {"line",
             {{"thicknessPx", a.line.thicknessPx},
              {"color", to_hex(a.line.color)},
              {"dash", a.line.dash},
              {"startHead", to_string(a.line.startHead)},
              {"endHead", to_string(a.line.endHead)}}},
            {"opacity", a.opacity}};
}

Annotation annotation_from_json(const json& j)
{
    Annotation a;
    a.labelText = j.value("labelText", std::string());
    if (j.contains("labelAnchor")) {
        a.labelX = j["labelAnchor"].value("x", 0.0);
        a.labelY = j["labelAnchor"].value("y", 0.0);
    }
    if (j.contains("targetPoint")) {
        a.targetX = j["targetPoint"].value("x", 0.0);
        a.targetY = j["targetPoint"].value("y", 0.0);
    }
    if (j.contains("line")) {
        const auto& l = j["line"];
        a.line.thicknessPx = l.value("thicknessPx", 1.5);
        a.line.color = hexrgb(l.value("color", std::string("#333333")));
        a.line.dash = l.value("dash", std::string());
        a.line.startHead = head_from_string(l.value("startHead", std::string("none")));
        a.line.endHead = head_from_string(l.value("endHead", std::string("arrow")));
    }
    a.opacity = j.value("opacity", 1.0);
    validate(a);
    return a;
}

json to_json(const HighlightOverlay& h)
{
    json anns = json::array();
    for (const auto& a : h.annotations) anns.push_back(to_json(a));
    return {{"baseChartRef", h.baseChartRef},
            {"emphasizedMarks", h.emphasizedMarks},
            {"dimmedMarks", h.dimmedMarks},
            {"dimOpacity", h.dimOpacity},
            {"annotations", anns}};
}

HighlightOverlay highlight_overlay_from_json(const json& j)
{
    HighlightOverlay h;
    h.baseChartRef = j.value("baseChartRef", std::string());
    h.emphasizedMarks = j.value("emphasizedMarks", std::vector<std::size_t>{});
    h.dimmedMarks = j.value("dimmedMarks", std::vector<std::size_t>{});
    h.dimOpacity = j.value("dimOpacity", kDefaultDimOpacity);
    for (const auto& a : j.value("annotations", json::array())) h.annotations.push_back(annotation_from_json(a));
    return h;
}

json mapping_to_json(const std::map<Rgb, Rgb>& m)
{
    json j = json::object();
    for (const auto& [k, v] : m) j[to_hex(k)] = to_hex(v);
    return j;
}

std::map<Rgb, Rgb> mapping_from_json(const json& j)
{
    std::map<Rgb, Rgb> m;
    for (const auto& [k, v] : j.items()) {
        auto a = parse_color(k);
        auto b = parse_color(v.get<std::string>());
        if (!a || !b) throw Error("compose.recolor", "bad color in recolor map", k);
        m[*a] = *b;
    }
    return m;
}

} // namespace inkline::compose
