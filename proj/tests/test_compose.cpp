#include "inkline/compose.hpp"
#include "inkline/error.hpp"
#include "inkline/raster.hpp"

#include "fixtures.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <set>

using namespace inkline;
using namespace inkline::compose;
using charts::Aggregate;
using charts::Channel;
using charts::ChartSpec;
using charts::Mark;

namespace {

std::string code_of(const std::function<void()>& fn, std::string* detail = nullptr)
{
    try {
        fn();
    } catch (const Error& e) {
        if (detail) *detail = e.detail();
        return e.code();
    }
    return {};
}

Dataset tumors()
{
    std::string csv = "radius,texture,diagnosis\n";
    for (int i = 0; i < 10; ++i)
        csv += std::to_string(5 + i) + "," + std::to_string(20 - i % 4) + "," + (i % 3 ? "benign" : "malign") + "\n";
    return ingest_tabular(csv);
}

ChartSpec scatter(const Dataset& ds, bool legend)
{
    ChartSpec s;
    s.mark = Mark::Point;
    s.datasetId = ds.id;
    s.encodings = {{Channel::X, "radius"}, {Channel::Y, "texture"}};
    if (legend) s.encodings.push_back({Channel::Color, "diagnosis", ColumnKind::Nominal});
    return s;
}

filterql::FilteredTable rows(const Dataset& ds, std::vector<std::size_t> r)
{
    return {ds.id, std::move(r), {}};
}

AnimatedAsset anim(std::size_t frames, int delay, AnimationSource source)
{
    AnimatedAsset a;
    for (std::size_t i = 0; i < frames; ++i)
        a.frames.push_back(svg::parse(fixture::small_svg(i % 2 ? "#ff0000" : "#0000ff")));
    a.frameDelayMs = delay;
    a.source = source;
    return a;
}

svg::Element glyph(const char* fill) { return svg::parse(fixture::small_svg(fill)); }

} // namespace

TEST_SUITE("compose") {

TEST_CASE("scatter highlight: 3 of 10 rows emphasized with one annotation")
{
    Dataset ds = tumors();
    ChartSpec s = scatter(ds, false);
    auto img = charts::render_chart(s, ds);
    auto r = highlight(s, img, ds, rows(ds, {1, 4, 7}), "the three outliers", "layer-1");
    REQUIRE(std::holds_alternative<HighlightOverlay>(r));
    const auto& o = std::get<HighlightOverlay>(r);
    std::set<std::size_t> expect;
    for (std::size_t m = 0; m < img.marks.size(); ++m)
        for (std::size_t row : img.marks[m].rows)
            if (row == 1 || row == 4 || row == 7) expect.insert(m);
    CHECK(std::set<std::size_t>(o.emphasizedMarks.begin(), o.emphasizedMarks.end()) == expect);
    CHECK(o.emphasizedMarks.size() == 3);
    CHECK(o.dimmedMarks.size() == 7);
    std::set<std::size_t> all(o.emphasizedMarks.begin(), o.emphasizedMarks.end());
    all.insert(o.dimmedMarks.begin(), o.dimmedMarks.end());
    CHECK(all.size() == img.marks.size());
    CHECK(o.dimOpacity == 0.3);
    REQUIRE(o.annotations.size() == 1);
    const Annotation& a = o.annotations[0];
    CHECK(a.labelText == "the three outliers");
    CHECK(a.line.thicknessPx == 1.5);
    CHECK(a.line.endHead == Head::Arrow);
    CHECK(a.line.dash.empty());
    double cx = 0, cy = 0;
    for (std::size_t m : o.emphasizedMarks) {
        cx += img.marks[m].cx / 3;
        cy += img.marks[m].cy / 3;
    }
    CHECK(a.targetX == doctest::Approx(cx));
    CHECK(a.targetY == doctest::Approx(cy));
    double d = std::hypot(a.labelX - a.targetX, a.labelY - a.targetY);
    CHECK(d == doctest::Approx(kLabelOffsetPx));
    CHECK(o.baseChartRef == "layer-1");
    svg::Element overlay = render_overlay(o, img);
    CHECK(svg::element_count(overlay) > 3);
}

TEST_CASE("aggregated charts are re-rendered over the selection")
{
    Dataset ds = tumors();
    ChartSpec h;
    h.mark = Mark::HistogramBar;
    h.datasetId = ds.id;
    h.encodings = {{Channel::X, "radius", ColumnKind::Quantitative, Aggregate::None, true},
                   {Channel::Y, "radius", ColumnKind::Quantitative, Aggregate::Count}};
    auto img = charts::render_chart(h, ds);
    auto r = highlight(h, img, ds, rows(ds, {0, 1, 2}), "small ones");
    REQUIRE(std::holds_alternative<charts::ChartImage>(r));
    ChartSpec filtered = h;
    filtered.rowFilter = std::vector<std::size_t>{0, 1, 2};
    CHECK(std::get<charts::ChartImage>(r) == charts::render_chart(filtered, ds));
    std::size_t counted = 0;
    for (const auto& m : std::get<charts::ChartImage>(r).marks) counted += m.rows.size();
    CHECK(counted == 3);
}

TEST_CASE("empty selection and dataset mismatch")
{
    Dataset ds = tumors();
    ChartSpec s = scatter(ds, false);
    auto img = charts::render_chart(s, ds);
    CHECK(code_of([&] { highlight(s, img, ds, rows(ds, {}), "x"); }) == "compose.empty_selection");
    filterql::FilteredTable other{"ds-other", {1}, {}};
    CHECK(code_of([&] { highlight(s, img, ds, other, "x"); }) == "compose.dataset_mismatch");
}

TEST_CASE("annotation validation")
{
    Annotation a;
    a.line.thicknessPx = 0;
    CHECK(code_of([&] { validate(a); }) == "compose.annotation");
    a.line.thicknessPx = 2;
    a.opacity = 1.5;
    CHECK(code_of([&] { validate(a); }) == "compose.annotation");
    a.opacity = 0.5;
    a.line.dash = "4 3";
    a.line.startHead = Head::Dot;
    CHECK(annotation_from_json(to_json(a)) == a);
    CHECK(render_annotation(a).tag == "g");
}

TEST_CASE("DOD replaces every point and keeps the mark count")
{
    Dataset ds = tumors();
    ChartSpec s = scatter(ds, true);
    auto img = charts::render_chart(s, ds);
    GlyphMap g;
    g.assetIds = {{"benign", "g-b"}, {"malign", "g-m"}};
    std::map<std::string, int> resolved;
    auto resolve = [&](const std::string& id) {
        ++resolved[id];
        return glyph(id == "g-b" ? "#00aa00" : "#aa0000");
    };
    auto out = make_dod(s, img, g, resolve);
    CHECK(out.marks.size() == img.marks.size());
    std::size_t glyphs = 0;
    svg::walk(out.svg, [&](const svg::Element& e) { glyphs += e.attr("data-glyph").has_value(); });
    CHECK(glyphs >= img.marks.size());
    CHECK(resolved.size() == 2);
    std::set<std::string> kinds;
    for (const auto& m : out.marks) kinds.insert(m.series);
    CHECK(kinds == std::set<std::string>{"benign", "malign"});
    for (std::size_t i = 0; i < out.marks.size(); ++i) CHECK(out.marks[i].rows == img.marks[i].rows);
}

TEST_CASE("DOD on bars and lines keeps the mark count")
{
    Dataset ds = ingest_tabular("t,v,g\n1,2,a\n2,3,b\n3,1,a\n4,5,b\n");
    GlyphMap g;
    g.assetIds = {{"a", "x"}, {"b", "y"}};
    auto resolve = [](const std::string&) { return glyph("#123456"); };
    ChartSpec bar;
    bar.mark = Mark::Bar;
    bar.datasetId = ds.id;
    bar.encodings = {{Channel::X, "g", ColumnKind::Nominal}, {Channel::Y, "v", ColumnKind::Quantitative, Aggregate::Mean},
                     {Channel::Color, "g", ColumnKind::Nominal}};
    auto bi = charts::render_chart(bar, ds);
    CHECK(make_dod(bar, bi, g, resolve).marks.size() == bi.marks.size());
    ChartSpec line;
    line.mark = Mark::Line;
    line.datasetId = ds.id;
    line.encodings = {{Channel::X, "t"}, {Channel::Y, "v"}, {Channel::Color, "g", ColumnKind::Nominal}};
    auto li = charts::render_chart(line, ds);
    CHECK(make_dod(line, li, g, resolve).marks.size() == li.marks.size());
}

TEST_CASE("DOD errors")
{
    Dataset ds = tumors();
    auto resolve = [](const std::string&) { return glyph("#123456"); };
    ChartSpec heat;
    heat.mark = Mark::Rect;
    heat.datasetId = ds.id;
    heat.encodings = {{Channel::X, "diagnosis", ColumnKind::Nominal}, {Channel::Y, "diagnosis", ColumnKind::Nominal}};
    auto hi = charts::render_chart(heat, ds);
    GlyphMap g;
    g.assetIds = {{"benign", "g-b"}, {"malign", "g-m"}};
    CHECK(code_of([&] { make_dod(heat, hi, g, resolve); }) == "compose.dod_unsupported");

    ChartSpec plain = scatter(ds, false);
    CHECK(code_of([&] { make_dod(plain, charts::render_chart(plain, ds), g, resolve); }) == "compose.dod_no_legend");

    ChartSpec s = scatter(ds, true);
    g.assetIds.erase("malign");
    std::string detail;
    CHECK(code_of([&] { make_dod(s, charts::render_chart(s, ds), g, resolve); }, &detail) == "compose.dod_missing_glyph");
    CHECK(detail == "malign");
}

TEST_CASE("sync 8 frames at 200 ms with 24 frames")
{
    auto [a, b] = sync(anim(8, 200, AnimationSource::Visualization), anim(24, 50, AnimationSource::Graphic));
    CHECK(a.frame_count() == 8);
    CHECK(b.frame_count() == 24);
    CHECK(a.frameDelayMs == 200);
    CHECK(b.frameDelayMs == 67);
    CHECK(a.cycle_ms() == 1600);
    CHECK(b.cycle_ms() == 1608);
    CHECK(std::llabs(a.cycle_ms() - b.cycle_ms()) <= b.frameDelayMs);
    CHECK(a.restartPending);
    CHECK(b.restartPending);
}

TEST_CASE("sync trims the longer asset to a multiple")
{
    auto [a, b] = sync(anim(8, 200, AnimationSource::Visualization), anim(10, 80, AnimationSource::Graphic));
    CHECK(a.frame_count() == 8);
    CHECK(b.frame_count() == 8);
    CHECK(b.frameDelayMs == 200);

    // The visualization keeps its delay even as the second argument.
    auto [g, v] = sync(anim(24, 50, AnimationSource::Graphic), anim(8, 200, AnimationSource::Visualization));
    CHECK(v.frameDelayMs == 200);
    CHECK(g.frameDelayMs == 67);

    // Two graphics: the first argument is authoritative.
    auto [p, q] = sync(anim(3, 90, AnimationSource::Graphic), anim(7, 40, AnimationSource::Graphic));
    CHECK(q.frame_count() == 6);
    CHECK(p.frameDelayMs == 90);
    CHECK(q.frameDelayMs == 45);
}

TEST_CASE("sync of equal assets only sets the restart flag")
{
    AnimatedAsset x = anim(6, 120, AnimationSource::Graphic), y = anim(6, 120, AnimationSource::Graphic);
    auto [a, b] = sync(x, y);
    x.restartPending = y.restartPending = true;
    CHECK(a == x);
    CHECK(b == y);
    CHECK(code_of([] { sync(anim(1, 100, AnimationSource::Graphic), anim(4, 100, AnimationSource::Graphic)); }) ==
          "compose.sync");
}

TEST_CASE("property: sync postconditions")
{
    for (std::size_t n = 2; n <= 30; ++n)
        for (std::size_t m = 2; m <= 30; ++m)
            for (int d : {17, 100, 200}) {
                auto [a, b] = sync(anim(n, d, AnimationSource::Visualization), anim(m, 50, AnimationSource::Graphic));
                std::size_t lo = std::min(a.frame_count(), b.frame_count()), hi = std::max(a.frame_count(), b.frame_count());
                CHECK(hi % lo == 0);
                CHECK(a.frameDelayMs == d);
                const AnimatedAsset& shortA = a.frame_count() <= b.frame_count() ? a : b;
                CHECK(std::llabs(a.cycle_ms() - b.cycle_ms()) <= shortA.frameDelayMs);
            }
}

TEST_CASE("recolor is consistent across frames")
{
    AnimatedAsset a = anim(8, 100, AnimationSource::Graphic);
    chroma::Palette target;
    std::vector<Rgb> t = {{10, 10, 10}, {80, 80, 0}, {160, 160, 0}, {220, 220, 0}, {250, 250, 200}};
    for (std::size_t i = 0; i < 5; ++i) target.bins[i] = {t[i], 0.2};
    RecolorResult r = apply_recolor(a, target);
    CHECK(r.mapping.size() == 2);
    Rgb f1 = *parse_color(*a.frames[1].children[0].attr("fill"));
    Rgb f7 = *parse_color(*a.frames[7].children[0].attr("fill"));
    CHECK(f1 == f7);
    CHECK(f1 == r.mapping.at(Rgb{255, 0, 0}));
    CHECK(mapping_from_json(mapping_to_json(r.mapping)) == r.mapping);
}

TEST_CASE("chart recolor keeps a sequential ramp ordered")
{
    Dataset ds = ingest_tabular("a,b\n1,1\n1,2\n2,2\n3,1\n3,3\n2,3\n");
    ChartSpec s;
    s.mark = Mark::Rect;
    s.datasetId = ds.id;
    s.colorScheme.kind = SchemeKind::Sequential;
    s.encodings = {{Channel::X, "a", ColumnKind::Quantitative, Aggregate::None, true},
                   {Channel::Y, "b", ColumnKind::Quantitative, Aggregate::None, true}};
    auto img = charts::render_chart(s, ds);
    auto before = paints(img.svg, true);
    chroma::Palette target;
    std::vector<Rgb> t = {{60, 20, 0}, {120, 60, 0}, {180, 120, 0}, {230, 200, 0}, {255, 250, 180}};
    for (std::size_t i = 0; i < 5; ++i) target.bins[i] = {t[i], 0.2};
    RecolorResult r = apply_recolor(img, target, SchemeKind::Sequential);
    CHECK(r.scheme == SchemeKind::Sequential);
    for (std::size_t i = 0; i < before.size(); ++i)
        for (std::size_t j = 0; j < before.size(); ++j)
            if (luma(before[i]) < luma(before[j])) CHECK(luma(r.mapping.at(before[i])) <= luma(r.mapping.at(before[j])));
}

TEST_CASE("paints and mapping")
{
    svg::Element e = svg::parse(R"(<svg viewBox="0 0 4 4"><rect x="0" y="0" width="4" height="4" fill="#ff0000" stroke="#00ff00"/><path d="M0 0 L4 4" style="stroke:#ff0000"/></svg>)");
    auto p = paints(e);
    CHECK(p == std::vector<Rgb>{{255, 0, 0}, {0, 255, 0}});
    apply_mapping(e, {{{255, 0, 0}, {1, 2, 3}}});
    CHECK(paints(e) == std::vector<Rgb>{{1, 2, 3}, {0, 255, 0}});
}

}
