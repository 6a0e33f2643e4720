#include "inkline/charts.hpp"

#include "inkline/error.hpp"
#include "inkline/text.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <tuple>

namespace inkline::charts {

using nlohmann::json;

namespace {

constexpr std::string_view kMarkNames[] = {"point", "line", "bar", "rect", "histogram-bar", "arc"};
constexpr std::string_view kChannelNames[] = {"x", "y", "color"};
constexpr std::string_view kAggregateNames[] = {"none", "mean", "count"};

template <typename E, std::size_t N>
E enum_from(std::string_view s, const std::string_view (&names)[N], const char* what)
{
    for (std::size_t i = 0; i < N; ++i)
        if (names[i] == s) return static_cast<E>(i);
    throw Error("charts.spec", std::string("unknown ") + what + ": " + std::string(s), std::string(s));
}

int mark_priority(Mark m)
{
    switch (m) {
    case Mark::Point: return 0;
    case Mark::Line: return 1;
    case Mark::Bar: return 2;
    case Mark::Arc: return 3;
    case Mark::Rect: return 4;
    case Mark::HistogramBar: return 5;
    }
    return 6;
}

Rgb hex(std::uint32_t v)
{
    return {static_cast<std::uint8_t>(v >> 16), static_cast<std::uint8_t>(v >> 8), static_cast<std::uint8_t>(v)};
}

std::optional<double> numeric(const Cell& c)
{
    if (const auto* d = std::get_if<double>(&c)) return *d;
    if (const auto* t = std::get_if<Timestamp>(&c)) return static_cast<double>(t->seconds);
    return std::nullopt;
}

bool cell_less(const Cell& a, const Cell& b)
{
    auto na = numeric(a), nb = numeric(b);
    if (na && nb && a.index() == b.index()) return *na < *nb;
    if (a.index() != b.index()) return a.index() < b.index();
    return cell_text(a) < cell_text(b);
}

// ---------------------------------------------------------------- enumeration

struct Col {
    std::string name;
    ColumnKind kind = ColumnKind::Quantitative;
    ColumnKind eff = ColumnKind::Quantitative;
    std::size_t card = 0;
};

ChannelEncoding enc(Channel ch, const Col& c, Aggregate agg = Aggregate::None, bool binned = false)
{
    return {ch, c.name, c.kind, agg, binned};
}

ChartSpec make(Mark m, std::vector<ChannelEncoding> e, const std::string& datasetId)
{
    ChartSpec s;
    s.mark = m;
    s.encodings = std::move(e);
    s.datasetId = datasetId;
    if (m == Mark::Rect) s.colorScheme.kind = SchemeKind::Sequential;
    return s;
}

void pair_charts(const Col& a, const Col& b, const std::string& ds, std::vector<ChartSpec>& out)
{
    using K = ColumnKind;
    if (a.eff == K::Quantitative && b.eff == K::Quantitative) {
        out.push_back(make(Mark::Point, {enc(Channel::X, a), enc(Channel::Y, b)}, ds));
        out.push_back(make(Mark::Rect, {enc(Channel::X, a, Aggregate::None, true), enc(Channel::Y, b, Aggregate::None, true)}, ds));
        return;
    }
    if ((a.eff == K::Temporal && b.eff == K::Quantitative) || (a.eff == K::Quantitative && b.eff == K::Temporal)) {
        const Col& t = a.eff == K::Temporal ? a : b;
        const Col& q = a.eff == K::Temporal ? b : a;
        out.push_back(make(Mark::Line, {enc(Channel::X, t), enc(Channel::Y, q)}, ds));
        return;
    }
    if ((a.eff == K::Nominal && b.eff == K::Quantitative) || (a.eff == K::Quantitative && b.eff == K::Nominal)) {
        const Col& n = a.eff == K::Nominal ? a : b;
        const Col& q = a.eff == K::Nominal ? b : a;
        out.push_back(make(Mark::Bar, {enc(Channel::X, n), enc(Channel::Y, q, Aggregate::Mean)}, ds));
        if (n.card <= kArcCardinality)
            out.push_back(make(Mark::Arc, {enc(Channel::Color, n), enc(Channel::Y, q, Aggregate::Mean)}, ds));
        return;
    }
    if (a.eff == K::Nominal && b.eff == K::Nominal)
        out.push_back(make(Mark::Rect, {enc(Channel::X, a), enc(Channel::Y, b)}, ds));
}

using SpecKey = std::pair<Mark, std::vector<std::tuple<int, std::string, int, bool>>>;

SpecKey spec_key(const ChartSpec& s)
{
    SpecKey k{s.mark, {}};
    for (const auto& e : s.encodings)
        k.second.emplace_back(static_cast<int>(e.channel), e.column, static_cast<int>(e.aggregate), e.binned);
    std::sort(k.second.begin(), k.second.end());
    return k;
}

// ---------------------------------------------------------------- scales

struct Axis {
    enum class Type { None, Linear, Band, Bins } type = Type::None;
    double d0 = 0, d1 = 1;
    std::vector<std::string> cats;
    bool temporal = false;
    double r0 = 0, r1 = 0;

    double map(double v) const { return d1 == d0 ? (r0 + r1) / 2 : r0 + (v - d0) / (d1 - d0) * (r1 - r0); }
    double step() const { return cats.empty() ? 0 : (r1 - r0) / static_cast<double>(cats.size()); }
    double band_center(std::size_t i) const { return r0 + (static_cast<double>(i) + 0.5) * step(); }
    std::optional<std::size_t> band_index(const std::string& v) const
    {
        auto it = std::lower_bound(cats.begin(), cats.end(), v);
        if (it == cats.end() || *it != v) return std::nullopt;
        return static_cast<std::size_t>(it - cats.begin());
    }
    std::size_t bin_of(double v) const
    {
        if (d1 <= d0) return 0;
        auto b = static_cast<long>(std::floor((v - d0) / (d1 - d0) * static_cast<double>(kBins)));
        return static_cast<std::size_t>(std::clamp<long>(b, 0, static_cast<long>(kBins) - 1));
    }
    double edge(std::size_t i) const { return d0 + (d1 - d0) * static_cast<double>(i) / static_cast<double>(kBins); }
    bool numeric() const { return type == Type::Linear || type == Type::Bins; }
};

struct GroupKey {
    std::size_t x = 0, y = 0, c = 0;
    friend auto operator<=>(const GroupKey&, const GroupKey&) = default;
};

struct Bound {
    const ChartSpec& spec;
    const Dataset& ds;
    const ChannelEncoding* xe = nullptr;
    const ChannelEncoding* ye = nullptr;
    const ChannelEncoding* ce = nullptr;
    std::size_t xi = 0, yi = 0, ci = 0;

    Bound(const ChartSpec& s, const Dataset& d) : spec(s), ds(d)
    {
        xe = s.encoding(Channel::X);
        ye = s.encoding(Channel::Y);
        ce = s.encoding(Channel::Color);
        if (xe) xi = *ds.column_index(xe->column);
        if (ye) yi = *ds.column_index(ye->column);
        if (ce) ci = *ds.column_index(ce->column);
    }

    const Cell& cell(std::size_t row, std::size_t col) const { return ds.rows[row][col]; }

    std::vector<std::size_t> usable(const std::vector<std::size_t>& rows) const
    {
        std::vector<std::size_t> out;
        for (std::size_t r : rows) {
            if (xe && is_null(cell(r, xi))) continue;
            if (ye && is_null(cell(r, yi))) continue;
            if (ce && is_null(cell(r, ci))) continue;
            if (ye && ye->aggregate == Aggregate::Mean && !numeric(cell(r, yi))) continue;
            if (xe && xe->kind != ColumnKind::Nominal && !numeric(cell(r, xi))) continue;
            if (ye && ye->aggregate == Aggregate::None && ye->kind != ColumnKind::Nominal && !numeric(cell(r, yi)))
                continue;
            out.push_back(r);
        }
        return out;
    }
};

struct Context {
    Axis x, y;
    std::vector<std::string> colorCats;
    double maxCount = 0;
    PlotArea plot;
};

std::pair<double, double> padded(double lo, double hi)
{
    if (hi == lo) return {lo - 1, hi + 1};
    double pad = (hi - lo) * 0.05;
    return {lo - pad, hi + pad};
}

Axis build_plain_axis(const Bound& b, const ChannelEncoding& e, std::size_t col, const std::vector<std::size_t>& rows)
{
    Axis a;
    if (e.kind == ColumnKind::Nominal) {
        std::set<std::string> cats;
        for (std::size_t r : rows) cats.insert(cell_text(b.cell(r, col)));
        if (cats.size() > kMaxAxisCardinality)
            throw Error("charts.cardinality", "cardinality too high", e.column);
        a.type = Axis::Type::Band;
        a.cats.assign(cats.begin(), cats.end());
        return a;
    }
    double lo = 0, hi = 1;
    bool any = false;
    for (std::size_t r : rows) {
        if (auto v = numeric(b.cell(r, col))) {
            if (!any) lo = hi = *v;
            lo = std::min(lo, *v);
            hi = std::max(hi, *v);
            any = true;
        }
    }
    if (e.binned) {
        a.type = Axis::Type::Bins;
        if (hi == lo) {
            lo -= 0.5;
            hi += 0.5;
        }
        a.d0 = lo;
        a.d1 = hi;
        return a;
    }
    a.type = Axis::Type::Linear;
    a.temporal = e.kind == ColumnKind::Temporal;
    std::tie(a.d0, a.d1) = padded(lo, hi);
    return a;
}

std::size_t slot(const Axis& a, const Cell& c)
{
    if (a.type == Axis::Type::Band) return a.band_index(cell_text(c)).value_or(0);
    if (a.type == Axis::Type::Bins) return a.bin_of(*numeric(c));
    return 0;
}

std::map<GroupKey, std::vector<std::size_t>> group_rows(const Bound& b, const Context& ctx,
                                                        const std::vector<std::size_t>& rows)
{
    std::map<GroupKey, std::vector<std::size_t>> g;
    bool ySlot = b.ye && b.ye->aggregate == Aggregate::None;
    for (std::size_t r : rows) {
        GroupKey k;
        if (b.xe) k.x = slot(ctx.x, b.cell(r, b.xi));
        if (ySlot) k.y = slot(ctx.y, b.cell(r, b.yi));
        if (b.ce) {
            auto it = std::lower_bound(ctx.colorCats.begin(), ctx.colorCats.end(), cell_text(b.cell(r, b.ci)));
            k.c = static_cast<std::size_t>(it - ctx.colorCats.begin());
        }
        g[k].push_back(r);
    }
    return g;
}

double group_value(const Bound& b, const std::vector<std::size_t>& rows)
{
    if (!b.ye || b.ye->aggregate == Aggregate::Count) return static_cast<double>(rows.size());
    double sum = 0;
    for (std::size_t r : rows) sum += *numeric(b.cell(r, b.yi));
    return rows.empty() ? 0 : sum / static_cast<double>(rows.size());
}

// sets[0] is the full domain; later sets are frame subsets sharing its scales.
Context build_context(const Bound& b, const std::vector<std::vector<std::size_t>>& sets)
{
    const ChartSpec& s = b.spec;
    Context ctx;
    bool legend = b.ce && s.showLegend;
    double right = legend ? 120 : 20;
    ctx.plot = {60, 20, kChartWidth - 60 - right, kChartHeight - 20 - 48};

    std::vector<std::vector<std::size_t>> use;
    for (const auto& set : sets) use.push_back(b.usable(set));
    const auto& all = use.front();

    if (b.ce) {
        std::set<std::string> cats;
        for (std::size_t r : all) cats.insert(cell_text(b.cell(r, b.ci)));
        ctx.colorCats.assign(cats.begin(), cats.end());
    }
    if (s.mark == Mark::Arc) return ctx;

    if (b.xe) ctx.x = build_plain_axis(b, *b.xe, b.xi, all);
    if (b.ye && b.ye->aggregate == Aggregate::None) ctx.y = build_plain_axis(b, *b.ye, b.yi, all);
    ctx.x.r0 = ctx.plot.x;
    ctx.x.r1 = ctx.plot.x + ctx.plot.width;
    ctx.y.r0 = ctx.plot.y + ctx.plot.height;
    ctx.y.r1 = ctx.plot.y;

    bool aggY = b.ye && b.ye->aggregate != Aggregate::None;
    if (aggY || s.mark == Mark::Rect) {
        double lo = 0, hi = 0;
        for (const auto& set : use) {
            for (const auto& [k, rows] : group_rows(b, ctx, set)) {
                double v = s.mark == Mark::Rect ? static_cast<double>(rows.size()) : group_value(b, rows);
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        }
        if (s.mark == Mark::Rect) {
            ctx.maxCount = hi;
        } else {
            double pad = (hi - lo) * 0.05;
            if (hi == lo) pad = 1;
            ctx.y.type = Axis::Type::Linear;
            ctx.y.d0 = lo < 0 ? lo - pad : 0;
            ctx.y.d1 = hi > 0 ? hi + pad : 0;
            if (ctx.y.d0 == ctx.y.d1) ctx.y.d1 = 1;
        }
    }
    return ctx;
}

// ---------------------------------------------------------------- paint

Rgb lerp(const Rgb& a, const Rgb& b, double t)
{
    Eigen::Vector3d v = to_vector<double>(a) * (1 - t) + to_vector<double>(b) * t;
    return from_vector<double>(v);
}

Rgb ramp(const std::vector<Rgb>& stops, double t)
{
    if (stops.empty()) return {};
    if (stops.size() == 1) return stops.front();
    t = std::clamp(t, 0.0, 1.0) * static_cast<double>(stops.size() - 1);
    auto i = std::min(static_cast<std::size_t>(t), stops.size() - 2);
    return lerp(stops[i], stops[i + 1], t - static_cast<double>(i));
}

struct Painter {
    std::vector<Rgb> categorical;
    std::vector<Rgb> sequential;
    SchemeKind kind;

    explicit Painter(const ColorScheme& s) : kind(s.kind)
    {
        categorical = default_categorical();
        sequential = default_sequential();
        if (!s.colors.empty()) {
            if (s.kind == SchemeKind::Categorical)
                categorical = s.colors;
            else
                sequential = s.colors;
        }
    }
    Rgb category(std::size_t i, std::size_t n) const
    {
        if (kind != SchemeKind::Categorical)
            return ramp(sequential, n <= 1 ? 1.0 : static_cast<double>(i) / static_cast<double>(n - 1));
        return categorical[i % categorical.size()];
    }
    Rgb single() const { return kind == SchemeKind::Categorical ? categorical.front() : ramp(sequential, 1.0); }
};

// ---------------------------------------------------------------- axes

std::string tick_label(double v, double step, bool temporal)
{
    if (temporal) return format_iso8601(Timestamp{static_cast<std::int64_t>(std::llround(v))});
    int decimals = step >= 1 ? 0 : static_cast<int>(std::ceil(-std::log10(step) - 1e-9));
    std::ostringstream os;
    os << std::fixed << std::setprecision(std::clamp(decimals, 0, 10)) << v;
    std::string s = os.str();
    if (s == "-0") s = "0";
    return s;
}

std::vector<double> nice_ticks(double lo, double hi, double& stepOut)
{
    std::vector<double> ticks;
    if (!(hi > lo)) {
        stepOut = 1;
        ticks.push_back(lo);
        return ticks;
    }
    double raw = (hi - lo) / static_cast<double>(kMaxTicks);
    double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag * 10;
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
        double cand = m * mag;
        if (std::floor(hi / cand) - std::ceil(lo / cand) + 1 <= static_cast<double>(kMaxTicks)) {
            step = cand;
            break;
        }
    }
    for (double k = std::ceil(lo / step); k * step <= hi + step * 1e-9; k += 1) {
        double v = k * step;
        if (std::abs(v) < step * 1e-9) v = 0;
        ticks.push_back(v);
    }
    stepOut = step;
    return ticks;
}

svg::Element text_el(double x, double y, const std::string& s, const char* anchor)
{
    svg::Element t("text", {{"x", svg::num(x)}, {"y", svg::num(y)}, {"font-family", "sans-serif"},
                            {"font-size", "11"}, {"fill", "#333333"}, {"text-anchor", anchor}});
    t.add(svg::Element::text_node(s));
    return t;
}

svg::Element line_el(double x1, double y1, double x2, double y2)
{
    return svg::Element("line", {{"x1", svg::num(x1)}, {"y1", svg::num(y1)}, {"x2", svg::num(x2)},
                                 {"y2", svg::num(y2)}, {"stroke", "#333333"}, {"stroke-width", "1"}});
}

std::string axis_title(const ChannelEncoding& e)
{
    if (e.aggregate == Aggregate::Count) return "count";
    if (e.aggregate == Aggregate::Mean) return "mean(" + e.column + ")";
    if (e.binned) return e.column + " (binned)";
    return e.column;
}

svg::Element draw_axis(const Axis& a, bool horizontal, const PlotArea& p, const std::string& title)
{
    svg::Element g("g", {{"class", horizontal ? "axis axis-x" : "axis axis-y"}});
    double base = horizontal ? p.y + p.height : p.x;
    if (horizontal)
        g.add(line_el(p.x, base, p.x + p.width, base));
    else
        g.add(line_el(base, p.y, base, p.y + p.height));

    auto tick = [&](double pos, const std::string& label) {
        if (horizontal) {
            g.add(line_el(pos, base, pos, base + 5));
            g.add(text_el(pos, base + 17, label, "middle"));
        } else {
            g.add(line_el(base - 5, pos, base, pos));
            g.add(text_el(base - 8, pos + 4, label, "end"));
        }
    };
    if (a.type == Axis::Type::Band) {
        std::size_t every = (a.cats.size() + kMaxTicks - 1) / kMaxTicks;
        every = std::max<std::size_t>(every, 1);
        for (std::size_t i = 0; i < a.cats.size(); i += every) tick(a.band_center(i), a.cats[i]);
    } else if (a.numeric()) {
        double step = 1;
        for (double v : nice_ticks(std::min(a.d0, a.d1), std::max(a.d0, a.d1), step))
            tick(a.map(v), tick_label(v, step, a.temporal));
    }
    if (horizontal) {
        g.add(text_el(p.x + p.width / 2, kChartHeight - 8, title, "middle"));
    } else {
        auto t = text_el(14, p.y + p.height / 2, title, "middle");
        t.set("transform", "rotate(-90 14 " + svg::num(p.y + p.height / 2) + ")");
        g.add(std::move(t));
    }
    return g;
}

// ---------------------------------------------------------------- marks

std::string join_label(const std::vector<std::string>& parts)
{
    std::string out;
    for (const auto& p : parts) {
        if (p.empty()) continue;
        if (!out.empty()) out += " / ";
        out += p;
    }
    return out;
}

struct MarkSink {
    svg::Element group{"g", {{"class", "marks"}}};
    std::vector<MarkGeometry> marks;

    void add(svg::Element el, MarkGeometry m)
    {
        el.set("data-mark", std::to_string(marks.size()));
        group.add(std::move(el));
        marks.push_back(std::move(m));
    }
};

svg::Element rect_el(double x, double y, double w, double h, const Rgb& fill)
{
    return svg::Element("rect", {{"x", svg::num(x)}, {"y", svg::num(y)}, {"width", svg::num(w)},
                                 {"height", svg::num(h)}, {"fill", to_hex(fill)}});
}

svg::Element circle_el(double cx, double cy, double r, const Rgb& fill)
{
    return svg::Element("circle", {{"cx", svg::num(cx)}, {"cy", svg::num(cy)}, {"r", svg::num(r)}, {"fill", to_hex(fill)}});
}

double position(const Axis& a, const Cell& c)
{
    if (a.type == Axis::Type::Band) return a.band_center(a.band_index(cell_text(c)).value_or(0));
    return a.map(*numeric(c));
}

ChartImage draw(const Bound& b, const Context& ctx, const std::vector<std::size_t>& rowsIn)
{
    const ChartSpec& s = b.spec;
    Painter painter(s.colorScheme);
    std::vector<std::size_t> rows = b.usable(rowsIn);
    const std::size_t nCats = ctx.colorCats.size();
    auto paintFor = [&](std::size_t row) {
        if (!b.ce) return painter.single();
        auto it = std::lower_bound(ctx.colorCats.begin(), ctx.colorCats.end(), cell_text(b.cell(row, b.ci)));
        return painter.category(static_cast<std::size_t>(it - ctx.colorCats.begin()), nCats);
    };
    auto colorLabel = [&](std::size_t row) { return b.ce ? cell_text(b.cell(row, b.ci)) : std::string(); };

    ChartImage img;
    img.plot = ctx.plot;
    img.svg = svg::document(kChartWidth, kChartHeight);
    MarkSink sink;
    const PlotArea& p = ctx.plot;

    switch (s.mark) {
    case Mark::Point: {
        double r = 4 * s.markScale;
        for (std::size_t row : rows) {
            double cx = position(ctx.x, b.cell(row, b.xi)), cy = position(ctx.y, b.cell(row, b.yi));
            Rgb paint = paintFor(row);
            sink.add(circle_el(cx, cy, r, paint),
                     {{row}, colorLabel(row), colorLabel(row), "circle", cx, cy, 2 * r, 2 * r, paint});
        }
        break;
    }
    case Mark::Line: {
        std::map<std::size_t, std::vector<std::size_t>> series;
        for (std::size_t row : rows) {
            std::size_t k = 0;
            if (b.ce)
                k = static_cast<std::size_t>(std::lower_bound(ctx.colorCats.begin(), ctx.colorCats.end(),
                                                              cell_text(b.cell(row, b.ci))) -
                                             ctx.colorCats.begin());
            series[k].push_back(row);
        }
        double r = 3 * s.markScale;
        svg::Element paths("g", {{"class", "series"}});
        std::vector<std::pair<svg::Element, MarkGeometry>> vertices;
        for (auto& [k, members] : series) {
            std::stable_sort(members.begin(), members.end(), [&](std::size_t l, std::size_t rr) {
                return *numeric(b.cell(l, b.xi)) < *numeric(b.cell(rr, b.xi));
            });
            Rgb paint = paintFor(members.front());
            std::ostringstream d;
            for (std::size_t i = 0; i < members.size(); ++i) {
                double cx = ctx.x.map(*numeric(b.cell(members[i], b.xi)));
                double cy = position(ctx.y, b.cell(members[i], b.yi));
                d << (i ? " L" : "M") << svg::num(cx) << ' ' << svg::num(cy);
                vertices.emplace_back(circle_el(cx, cy, r, paint),
                                      MarkGeometry{{members[i]}, colorLabel(members[i]), colorLabel(members[i]), "vertex", cx, cy,
                                                   2 * r, 2 * r, paint});
            }
            svg::Element path("path", {{"d", d.str()}, {"fill", "none"}, {"stroke", to_hex(paint)},
                                       {"stroke-width", svg::num(2 * s.markScale)}});
            if (b.ce) path.set("data-series", colorLabel(members.front()));
            paths.add(std::move(path));
        }
        sink.group.add(std::move(paths));
        for (auto& [el, m] : vertices) sink.add(std::move(el), std::move(m));
        break;
    }
    case Mark::Bar: {
        double step = ctx.x.step();
        double y0 = ctx.y.map(0);
        for (const auto& [k, members] : group_rows(b, ctx, rows)) {
            double v = group_value(b, members);
            double start = ctx.x.r0 + static_cast<double>(k.x) * step + step * 0.1;
            double w = step * 0.8;
            if (b.ce && nCats > 0) {
                w /= static_cast<double>(nCats);
                start += w * static_cast<double>(k.c);
            }
            double y1 = ctx.y.map(v);
            double top = std::min(y0, y1), h = std::abs(y1 - y0);
            Rgb paint = paintFor(members.front());
            std::string label = join_label({ctx.x.cats[k.x], colorLabel(members.front())});
            sink.add(rect_el(start, top, w, h, paint),
                     {members, label, colorLabel(members.front()), "rect", start + w / 2, y1, w, h, paint});
        }
        break;
    }
    case Mark::HistogramBar: {
        double y0 = ctx.y.map(0);
        Rgb paint = painter.single();
        for (const auto& [k, members] : group_rows(b, ctx, rows)) {
            double x0 = ctx.x.map(ctx.x.edge(k.x)), x1 = ctx.x.map(ctx.x.edge(k.x + 1));
            double y1 = ctx.y.map(static_cast<double>(members.size()));
            double w = std::max(x1 - x0 - 1, 0.5);
            double top = std::min(y0, y1), h = std::abs(y1 - y0);
            std::string label = tick_label(ctx.x.edge(k.x), (ctx.x.d1 - ctx.x.d0) / kBins, false) + " to " +
                                tick_label(ctx.x.edge(k.x + 1), (ctx.x.d1 - ctx.x.d0) / kBins, false);
            sink.add(rect_el(x0 + 0.5, top, w, h, paint), {members, label, "", "rect", x0 + 0.5 + w / 2, y1, w, h, paint});
        }
        break;
    }
    case Mark::Rect: {
        auto extent = [](const Axis& a, std::size_t i) {
            if (a.type == Axis::Type::Bins) return std::pair{a.map(a.edge(i)), a.map(a.edge(i + 1))};
            double c = a.band_center(i), h = a.step() / 2;
            return std::pair{c - h, c + h};
        };
        auto label = [](const Axis& a, std::size_t i) {
            if (a.type == Axis::Type::Band) return a.cats[i];
            double st = (a.d1 - a.d0) / kBins;
            return tick_label(a.edge(i), st, false) + " to " + tick_label(a.edge(i + 1), st, false);
        };
        for (const auto& [k, members] : group_rows(b, ctx, rows)) {
            auto [x0, x1] = extent(ctx.x, k.x);
            auto [ya, yb] = extent(ctx.y, k.y);
            double left = std::min(x0, x1), w = std::abs(x1 - x0);
            double top = std::min(ya, yb), h = std::abs(yb - ya);
            double t = ctx.maxCount > 0 ? static_cast<double>(members.size()) / ctx.maxCount : 1.0;
            Rgb paint = ramp(painter.sequential, t);
            sink.add(rect_el(left, top, w, h, paint),
                     {members, label(ctx.x, k.x) + " / " + label(ctx.y, k.y), "", "rect", left + w / 2, top + h / 2, w, h,
                      paint});
        }
        break;
    }
    case Mark::Arc: {
        auto groups = group_rows(b, ctx, rows);
        double total = 0;
        for (const auto& [k, members] : groups) {
            double v = group_value(b, members);
            if (v < 0) throw Error("charts.bind", "pie values must be non-negative", b.ye->column);
            total += v;
        }
        double cx = p.x + p.width / 2, cy = p.y + p.height / 2;
        double radius = std::min(p.width, p.height) / 2 - 10;
        double angle = -std::numbers::pi / 2;
        for (const auto& [k, members] : groups) {
            double v = group_value(b, members);
            double frac = total > 0 ? v / total : 1.0 / static_cast<double>(groups.size());
            double a1 = angle + frac * 2 * std::numbers::pi;
            Rgb paint = painter.category(k.c, nCats);
            double mid = (angle + a1) / 2;
            MarkGeometry m{members, ctx.colorCats[k.c], ctx.colorCats[k.c], "wedge", cx + 0.6 * radius * std::cos(mid),
                           cy + 0.6 * radius * std::sin(mid), 2 * radius, 2 * radius, paint};
            if (frac >= 0.9999) {
                sink.add(circle_el(cx, cy, radius, paint), m);
            } else {
                std::ostringstream d;
                d << 'M' << svg::num(cx) << ' ' << svg::num(cy) << " L" << svg::num(cx + radius * std::cos(angle)) << ' '
                  << svg::num(cy + radius * std::sin(angle)) << " A" << svg::num(radius) << ' ' << svg::num(radius)
                  << " 0 " << (frac > 0.5 ? 1 : 0) << " 1 " << svg::num(cx + radius * std::cos(a1)) << ' '
                  << svg::num(cy + radius * std::sin(a1)) << " Z";
                sink.add(svg::Element("path", {{"d", d.str()}, {"fill", to_hex(paint)}, {"stroke", "#ffffff"},
                                               {"stroke-width", "1"}}),
                         m);
            }
            angle = a1;
        }
        break;
    }
    }

    if (s.showAxes && s.mark != Mark::Arc) {
        img.svg.add(draw_axis(ctx.x, true, p, axis_title(*b.xe)));
        img.svg.add(draw_axis(ctx.y, false, p, axis_title(*b.ye)));
    }
    img.svg.add(std::move(sink.group));
    img.marks = std::move(sink.marks);

    if (b.ce && s.showLegend) {
        svg::Element g("g", {{"class", "legend"}});
        double lx = kChartWidth - 120 + 12;
        auto title = text_el(lx, 30, b.ce->column, "start");
        title.set("font-weight", "bold");
        g.add(std::move(title));
        for (std::size_t i = 0; i < nCats; ++i) {
            double ly = 38 + 18 * static_cast<double>(i);
            Rgb paint = painter.category(i, nCats);
            svg::Element entry("g", {{"data-legend", ctx.colorCats[i]}});
            entry.add(rect_el(lx, ly, 12, 12, paint));
            entry.add(text_el(lx + 18, ly + 10, ctx.colorCats[i], "start"));
            g.add(std::move(entry));
            img.legend.push_back({ctx.colorCats[i], paint, lx, ly, 12});
        }
        img.svg.add(std::move(g));
    }
    if (ctx.x.numeric()) img.xDomain = std::pair{ctx.x.d0, ctx.x.d1};
    if (ctx.y.numeric()) img.yDomain = std::pair{ctx.y.d0, ctx.y.d1};
    return img;
}

std::vector<std::size_t> base_rows(const ChartSpec& s, const Dataset& ds)
{
    if (s.rowFilter) return *s.rowFilter;
    std::vector<std::size_t> rows(ds.rowCount());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    return rows;
}

} // namespace

std::string_view to_string(Mark m) { return kMarkNames[static_cast<int>(m)]; }
std::string_view to_string(Channel c) { return kChannelNames[static_cast<int>(c)]; }
std::string_view to_string(Aggregate a) { return kAggregateNames[static_cast<int>(a)]; }
Mark mark_from_string(std::string_view s) { return enum_from<Mark>(s, kMarkNames, "mark"); }
Channel channel_from_string(std::string_view s) { return enum_from<Channel>(s, kChannelNames, "channel"); }
Aggregate aggregate_from_string(std::string_view s) { return enum_from<Aggregate>(s, kAggregateNames, "aggregate"); }

const ChannelEncoding* ChartSpec::encoding(Channel c) const
{
    for (const auto& e : encodings)
        if (e.channel == c) return &e;
    return nullptr;
}

std::vector<std::string> ChartSpec::columns() const
{
    std::vector<std::string> out;
    for (const auto& e : encodings)
        if (std::find(out.begin(), out.end(), e.column) == out.end()) out.push_back(e.column);
    return out;
}

bool ChartSpec::aggregated() const
{
    if (mark == Mark::Rect || mark == Mark::HistogramBar || mark == Mark::Arc || mark == Mark::Bar) return true;
    return std::any_of(encodings.begin(), encodings.end(),
                       [](const ChannelEncoding& e) { return e.aggregate != Aggregate::None || e.binned; });
}

const std::vector<Rgb>& default_categorical()
{
    static const std::vector<Rgb> c = {hex(0x4e79a7), hex(0xf28e2b), hex(0xe15759), hex(0x76b7b2), hex(0x59a14f),
                                       hex(0xedc948), hex(0xb07aa1), hex(0xff9da7), hex(0x9c755f), hex(0xbab0ac)};
    return c;
}

const std::vector<Rgb>& default_sequential()
{
    static const std::vector<Rgb> c = {hex(0xdeebf7), hex(0x9ecae1), hex(0x6baed6), hex(0x3182bd), hex(0x08519c)};
    return c;
}

ColumnKind effective_kind(const ColumnMeta& c)
{
    if (c.kind != ColumnKind::Quantitative) return c.kind;
    auto toks = text::identifier_tokens(c.name);
    bool timed = std::any_of(toks.begin(), toks.end(),
                             [](const std::string& t) { return text::is_time_word(text::fold_plural(t)); });
    return timed ? ColumnKind::Temporal : ColumnKind::Quantitative;
}

std::vector<ChartSpec> enumerate_charts(const std::vector<std::string>& relevant, const DatasetMeta& meta)
{
    std::vector<Col> cols;
    for (const auto& name : relevant) {
        auto it = std::find_if(meta.columns.begin(), meta.columns.end(),
                               [&](const ColumnMeta& c) { return c.name == name; });
        if (it == meta.columns.end()) continue;
        if (std::any_of(cols.begin(), cols.end(), [&](const Col& c) { return c.name == name; })) continue;
        cols.push_back({it->name, it->kind, effective_kind(*it), it->uniqueValues.size()});
    }

    std::vector<ChartSpec> pairs;
    std::vector<std::pair<std::size_t, std::size_t>> pairOf;
    for (std::size_t i = 0; i < cols.size(); ++i) {
        for (std::size_t j = i + 1; j < cols.size(); ++j) {
            std::size_t before = pairs.size();
            pair_charts(cols[i], cols[j], meta.datasetId, pairs);
            for (std::size_t k = before; k < pairs.size(); ++k) pairOf.emplace_back(i, j);
        }
    }
    std::vector<ChartSpec> all = pairs;
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        Mark m = pairs[p].mark;
        if (m != Mark::Point && m != Mark::Line && m != Mark::Bar) continue;
        for (std::size_t k = 0; k < cols.size(); ++k) {
            if (k == pairOf[p].first || k == pairOf[p].second) continue;
            if (cols[k].eff != ColumnKind::Nominal || cols[k].card > kLegendCardinality) continue;
            ChartSpec t = pairs[p];
            t.encodings.push_back(enc(Channel::Color, cols[k]));
            all.push_back(std::move(t));
        }
    }
    for (const auto& c : cols) {
        if (c.eff != ColumnKind::Quantitative) continue;
        all.push_back(make(Mark::HistogramBar,
                           {enc(Channel::X, c, Aggregate::None, true), enc(Channel::Y, c, Aggregate::Count)},
                           meta.datasetId));
    }

    std::vector<ChartSpec> out;
    std::set<SpecKey> seen;
    for (auto& s : all)
        if (seen.insert(spec_key(s)).second) out.push_back(std::move(s));
    return out;
}

std::vector<ChartSpec> rank_chart_specs(std::vector<ChartSpec> specs, const std::vector<std::string>& relevanceOrder)
{
    struct Keyed {
        std::size_t columns;
        std::size_t bestRank;
        int priority;
        std::size_t index;
    };
    std::vector<Keyed> keys;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        auto cols = specs[i].columns();
        std::size_t best = relevanceOrder.size();
        for (const auto& c : cols) {
            auto it = std::find(relevanceOrder.begin(), relevanceOrder.end(), c);
            best = std::min(best, static_cast<std::size_t>(it - relevanceOrder.begin()));
        }
        keys.push_back({cols.size(), best, mark_priority(specs[i].mark), i});
    }
    std::sort(keys.begin(), keys.end(), [](const Keyed& a, const Keyed& b) {
        return std::tuple(b.columns, a.bestRank, a.priority, a.index) < std::tuple(a.columns, b.bestRank, b.priority, b.index);
    });
    std::vector<ChartSpec> out;
    for (std::size_t i = 0; i < keys.size() && i < kMaxCharts; ++i) out.push_back(std::move(specs[keys[i].index]));
    return out;
}

std::string describe(const ChartSpec& spec)
{
    std::ostringstream os;
    os << to_string(spec.mark) << '(';
    bool first = true;
    for (const auto& e : spec.encodings) {
        if (!first) os << ", ";
        first = false;
        os << to_string(e.channel) << '=';
        if (e.aggregate != Aggregate::None) os << to_string(e.aggregate) << '(' << e.column << ')';
        else if (e.binned) os << "bin(" << e.column << ')';
        else os << e.column;
    }
    os << ')';
    return os.str();
}

RecommendationBatch rank_charts(std::vector<ChartSpec> specs, const std::vector<std::string>& relevanceOrder)
{
    auto ranked = rank_chart_specs(std::move(specs), relevanceOrder);
    RecommendationBatch batch;
    batch.kind = AssetKind::Visualization;
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        AssetDescriptor d;
        d.id = "chart-" + std::to_string(i + 1);
        d.kind = AssetKind::Visualization;
        d.score = static_cast<double>(ranked.size() - i) / static_cast<double>(ranked.size());
        d.label = describe(ranked[i]);
        d.body = to_json(ranked[i]);
        batch.items.push_back(std::move(d));
    }
    return batch;
}

void validate(const ChartSpec& spec, const Dataset& ds)
{
    if (!spec.datasetId.empty() && spec.datasetId != ds.id)
        throw Error("charts.bind", "chart is bound to another dataset", spec.datasetId);
    if (!(spec.markScale > 0)) throw Error("charts.spec", "mark scale must be positive");
    std::size_t nx = 0, ny = 0, nc = 0;
    for (const auto& e : spec.encodings) {
        auto idx = ds.column_index(e.column);
        if (!idx) throw Error("charts.bind", "unknown column: " + e.column, e.column);
        const ColumnMeta& col = ds.columns[*idx];
        if (col.kind != e.kind) throw Error("charts.bind", "encoding kind does not match column: " + e.column, e.column);
        if (e.binned && e.kind != ColumnKind::Quantitative)
            throw Error("charts.bind", "only quantitative columns can be binned", e.column);
        if (e.aggregate == Aggregate::Mean && e.kind == ColumnKind::Nominal)
            throw Error("charts.bind", "mean needs a numeric column", e.column);
        if (e.channel == Channel::Color && e.kind != ColumnKind::Nominal)
            throw Error("charts.bind", "color carries nominal columns only", e.column);
        (e.channel == Channel::X ? nx : e.channel == Channel::Y ? ny : nc)++;
    }
    if (nc > 1) throw Error("charts.spec", "at most one color encoding");
    if (spec.mark == Mark::Arc) {
        const auto* y = spec.encoding(Channel::Y);
        if (nx != 0 || ny != 1 || nc != 1 || y->aggregate == Aggregate::None)
            throw Error("charts.spec", "arc needs a color category and an aggregated y");
    } else {
        if (nx != 1 || ny != 1) throw Error("charts.spec", "chart needs exactly one x and one y");
        const auto* x = spec.encoding(Channel::X);
        const auto* y = spec.encoding(Channel::Y);
        if (x->aggregate != Aggregate::None) throw Error("charts.spec", "x cannot be aggregated");
        switch (spec.mark) {
        case Mark::Point:
            if (y->aggregate != Aggregate::None) throw Error("charts.spec", "point marks are not aggregated");
            break;
        case Mark::Line:
            if (x->kind == ColumnKind::Nominal || x->binned) throw Error("charts.spec", "line needs an ordered x");
            break;
        case Mark::Bar:
            if (x->kind != ColumnKind::Nominal || y->aggregate == Aggregate::None)
                throw Error("charts.spec", "bar needs a nominal x and an aggregated y");
            break;
        case Mark::HistogramBar:
            if (!x->binned || y->aggregate != Aggregate::Count)
                throw Error("charts.spec", "histogram needs a binned x and a count y");
            break;
        case Mark::Rect: {
            auto ok = [](const ChannelEncoding* e) {
                return e->aggregate == Aggregate::None && (e->binned || e->kind == ColumnKind::Nominal);
            };
            if (!ok(x) || !ok(y)) throw Error("charts.spec", "heatmap needs binned or nominal axes");
            break;
        }
        case Mark::Arc: break;
        }
    }
    if (spec.rowFilter)
        for (std::size_t r : *spec.rowFilter)
            if (r >= ds.rowCount()) throw Error("charts.bind", "row filter index out of range", std::to_string(r));
}

ChartImage render_chart(const ChartSpec& spec, const Dataset& ds)
{
    validate(spec, ds);
    Bound b(spec, ds);
    auto rows = base_rows(spec, ds);
    Context ctx = build_context(b, {rows});
    return draw(b, ctx, rows);
}

std::vector<ChartImage> animate_chart_images(const ChartSpec& spec, const Dataset& ds, const std::string& timeColumn,
                                             std::vector<std::string>* keysOut)
{
    validate(spec, ds);
    auto col = ds.column_index(timeColumn);
    if (!col) throw Error("charts.bind", "unknown time column: " + timeColumn, timeColumn);
    auto rows = base_rows(spec, ds);

    std::vector<Cell> keys;
    for (std::size_t r : rows)
        if (!is_null(ds.rows[r][*col])) keys.push_back(ds.rows[r][*col]);
    std::sort(keys.begin(), keys.end(), cell_less);
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    if (keys.size() < 2) throw Error("charts.nothing_to_animate", "nothing to animate", timeColumn);

    std::vector<std::vector<std::size_t>> sets{rows};
    for (const auto& k : keys) {
        std::vector<std::size_t> subset;
        for (std::size_t r : rows)
            if (ds.rows[r][*col] == k) subset.push_back(r);
        sets.push_back(std::move(subset));
    }
    Bound b(spec, ds);
    Context ctx = build_context(b, sets);
    std::vector<ChartImage> frames;
    for (std::size_t i = 1; i < sets.size(); ++i) frames.push_back(draw(b, ctx, sets[i]));
    if (keysOut) {
        keysOut->clear();
        for (const auto& k : keys) keysOut->push_back(cell_text(k));
    }
    return frames;
}

AnimatedAsset animate_chart(const ChartSpec& spec, const Dataset& ds, const std::string& timeColumn, int frameDelayMs)
{
    if (frameDelayMs <= 0) throw Error("animation.invalid", "frame delay must be positive");
    AnimatedAsset a;
    a.frameDelayMs = frameDelayMs;
    a.source = AnimationSource::Visualization;
    for (auto& img : animate_chart_images(spec, ds, timeColumn, &a.frameKeys)) a.frames.push_back(std::move(img.svg));
    validate(a);
    return a;
}

json to_json(const ChannelEncoding& e)
{
    return {{"channel", to_string(e.channel)}, {"column", e.column},        {"kind", to_string(e.kind)},
            {"aggregate", to_string(e.aggregate)}, {"binned", e.binned}};
}

json to_json(const ChartSpec& s)
{
    json enc = json::array();
    for (const auto& e : s.encodings) enc.push_back(to_json(e));
    json colors = json::array();
    for (const auto& c : s.colorScheme.colors) colors.push_back(to_hex(c));
    json j = {{"mark", to_string(s.mark)},
              {"encodings", enc},
              {"datasetId", s.datasetId},
              {"rowFilter", nullptr},
              {"showAxes", s.showAxes},
              {"showLegend", s.showLegend},
              {"colorScheme", {{"colors", colors}, {"kind", to_string(s.colorScheme.kind)}}},
              {"markScale", s.markScale}};
    if (s.rowFilter) j["rowFilter"] = *s.rowFilter;
    return j;
}

ChartSpec chart_spec_from_json(const json& j)
{
    try {
        ChartSpec s;
        s.mark = mark_from_string(j.at("mark").get<std::string>());
        for (const auto& e : j.at("encodings")) {
            ChannelEncoding c;
            c.channel = channel_from_string(e.at("channel").get<std::string>());
            c.column = e.at("column").get<std::string>();
            c.kind = column_kind_from_string(e.at("kind").get<std::string>());
            c.aggregate = aggregate_from_string(e.value("aggregate", std::string("none")));
            c.binned = e.value("binned", false);
            s.encodings.push_back(std::move(c));
        }
        s.datasetId = j.value("datasetId", std::string());
        if (j.contains("rowFilter") && !j["rowFilter"].is_null())
            s.rowFilter = j["rowFilter"].get<std::vector<std::size_t>>();
        s.showAxes = j.value("showAxes", true);
        s.showLegend = j.value("showLegend", true);
        if (j.contains("colorScheme")) {
            const auto& cs = j["colorScheme"];
            for (const auto& c : cs.value("colors", json::array())) {
                auto rgb = parse_color(c.get<std::string>());
                if (!rgb) throw Error("charts.spec", "bad color: " + c.get<std::string>());
                s.colorScheme.colors.push_back(*rgb);
            }
            s.colorScheme.kind = scheme_kind_from_string(cs.value("kind", std::string("categorical")));
        }
        s.markScale = j.value("markScale", 1.0);
        return s;
    } catch (const json::exception& e) {
        throw Error("charts.spec", std::string("malformed chart spec: ") + e.what());
    }
}

json to_json(const MarkGeometry& m)
{
    return {{"rows", m.rows},     {"group", m.group},   {"series", m.series}, {"shape", m.shape},   {"cx", m.cx},
            {"cy", m.cy},         {"width", m.width},   {"height", m.height}, {"paint", to_hex(m.paint)}};
}

json to_json(const ChartImage& img)
{
    json marks = json::array();
    for (const auto& m : img.marks) marks.push_back(to_json(m));
    json legend = json::array();
    for (const auto& l : img.legend)
        legend.push_back({{"value", l.value}, {"paint", to_hex(l.paint)}, {"x", l.x}, {"y", l.y}, {"size", l.size}});
    json j = {{"svg", svg::serialize(img.svg)},
              {"width", img.width},
              {"height", img.height},
              {"marks", marks},
              {"legend", legend},
              {"plot", {{"x", img.plot.x}, {"y", img.plot.y}, {"width", img.plot.width}, {"height", img.plot.height}}},
              {"xDomain", nullptr},
              {"yDomain", nullptr}};
    if (img.xDomain) j["xDomain"] = {img.xDomain->first, img.xDomain->second};
    if (img.yDomain) j["yDomain"] = {img.yDomain->first, img.yDomain->second};
    return j;
}

ChartImage chart_image_from_json(const json& j)
{
    ChartImage img;
    img.svg = svg::parse(j.at("svg").get<std::string>());
    img.width = j.value("width", kChartWidth);
    img.height = j.value("height", kChartHeight);
    for (const auto& m : j.value("marks", json::array())) {
        MarkGeometry g;
        g.rows = m.at("rows").get<std::vector<std::size_t>>();
        g.group = m.value("group", std::string());
        g.series = m.value("series", std::string());
        g.shape = m.value("shape", std::string());
        g.cx = m.value("cx", 0.0);
        g.cy = m.value("cy", 0.0);
        g.width = m.value("width", 0.0);
        g.height = m.value("height", 0.0);
        g.paint = parse_color(m.value("paint", std::string("#000000"))).value_or(Rgb{});
        img.marks.push_back(std::move(g));
    }
    for (const auto& l : j.value("legend", json::array()))
        img.legend.push_back({l.at("value").get<std::string>(), parse_color(l.value("paint", std::string("#000"))).value_or(Rgb{}),
                              l.value("x", 0.0), l.value("y", 0.0), l.value("size", 12.0)});
    if (j.contains("plot")) {
        const auto& p = j["plot"];
        img.plot = {p.value("x", 0.0), p.value("y", 0.0), p.value("width", 0.0), p.value("height", 0.0)};
    }
    if (j.contains("xDomain") && j["xDomain"].is_array()) img.xDomain = std::pair{j["xDomain"][0].get<double>(), j["xDomain"][1].get<double>()};
    if (j.contains("yDomain") && j["yDomain"].is_array()) img.yDomain = std::pair{j["yDomain"][0].get<double>(), j["yDomain"][1].get<double>()};
    return img;
}

} // namespace inkline::charts
