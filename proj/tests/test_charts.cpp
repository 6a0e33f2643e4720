#include "inkline/charts.hpp"
#include "inkline/dataset.hpp"
#include "inkline/error.hpp"
#include "inkline/io.hpp"

#include "oracles.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <map>
#include <set>

using namespace inkline;
using namespace inkline::charts;

namespace {

std::string code_of(const std::function<void()>& fn)
{
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return {};
}

oracle::ChartKey key_of(const ChartSpec& s)
{
    std::vector<oracle::Enc> e;
    for (const auto& x : s.encodings)
        e.emplace_back(static_cast<int>(x.channel), x.column, static_cast<int>(x.aggregate), x.binned);
    return oracle::chart_key(static_cast<int>(s.mark), e);
}

std::set<oracle::ChartKey> keys_of(const std::vector<ChartSpec>& specs)
{
    std::set<oracle::ChartKey> out;
    for (const auto& s : specs) out.insert(key_of(s));
    return out;
}

ColumnMeta nominal(std::string name, std::size_t card)
{
    ColumnMeta c;
    c.name = std::move(name);
    c.kind = ColumnKind::Nominal;
    for (std::size_t i = 0; i < card; ++i) c.uniqueValues.push_back("v" + std::to_string(i));
    return c;
}

ColumnMeta quant(std::string name, ColumnKind kind = ColumnKind::Quantitative)
{
    ColumnMeta c;
    c.name = std::move(name);
    c.kind = kind;
    return c;
}

Dataset canary()
{
    return ingest_tabular(io::read_text(std::filesystem::path(INKLINE_SOURCE_DIR) / "data/demo/canary.csv"));
}

ChartSpec spec(Mark m, std::vector<ChannelEncoding> e, const Dataset& ds)
{
    ChartSpec s;
    s.mark = m;
    s.encodings = std::move(e);
    s.datasetId = ds.id;
    return s;
}

} // namespace

TEST_SUITE("charts") {

TEST_CASE("canary columns: point, lines and two histograms")
{
    DatasetMeta m;
    m.columns = {quant("x_position"), quant("y_position"), quant("time_frame")};
    auto specs = enumerate_charts({"x_position", "y_position", "time_frame"}, m);
    auto keys = keys_of(specs);
    using E = oracle::Enc;
    CHECK(keys.count(oracle::chart_key(0, {E{0, "x_position", 0, false}, E{1, "y_position", 0, false}})) == 1);
    CHECK(keys.count(oracle::chart_key(1, {E{0, "time_frame", 0, false}, E{1, "x_position", 0, false}})) == 1);
    CHECK(keys.count(oracle::chart_key(1, {E{0, "time_frame", 0, false}, E{1, "y_position", 0, false}})) == 1);
    int hist = 0, legend = 0;
    for (const auto& s : specs) {
        hist += s.mark == Mark::HistogramBar;
        legend += s.encoding(Channel::Color) != nullptr;
    }
    CHECK(hist == 2);
    CHECK(legend == 0);
    CHECK(effective_kind(m.columns[2]) == ColumnKind::Temporal);
}

TEST_CASE("single quantitative column gives one histogram")
{
    DatasetMeta m;
    m.columns = {quant("length")};
    auto specs = enumerate_charts({"length"}, m);
    REQUIRE(specs.size() == 1);
    CHECK(specs[0].mark == Mark::HistogramBar);
    CHECK(enumerate_charts({}, m).empty());
    CHECK(enumerate_charts({"missing"}, m).empty());
}

TEST_CASE("genre and length give bar and pie of mean length")
{
    DatasetMeta m;
    m.columns = {nominal("genre", 6), quant("length")};
    auto specs = enumerate_charts({"genre", "length"}, m);
    bool bar = false, arc = false;
    for (const auto& s : specs) {
        if (s.mark == Mark::Bar) bar = s.encoding(Channel::Y)->aggregate == Aggregate::Mean && s.encoding(Channel::X)->column == "genre";
        if (s.mark == Mark::Arc) arc = s.encoding(Channel::Y)->aggregate == Aggregate::Mean && s.encoding(Channel::Color)->column == "genre";
    }
    CHECK(bar);
    CHECK(arc);
    m.columns[0] = nominal("genre", 9);
    for (const auto& s : enumerate_charts({"genre", "length"}, m)) CHECK(s.mark != Mark::Arc);
}

TEST_CASE("enumeration equals the subset rule oracle over every 3^5 signature")
{
    const std::size_t cards[] = {3, 10, 20, 6, 12};
    for (int sig = 0; sig < 243; ++sig) {
        DatasetMeta m;
        std::vector<oracle::ColumnSig> sigs;
        std::vector<std::string> names;
        int s = sig;
        for (int i = 0; i < 5; ++i, s /= 3) {
            std::string name = "c" + std::to_string(i);
            names.push_back(name);
            oracle::K k = static_cast<oracle::K>(s % 3);
            if (k == oracle::K::N) m.columns.push_back(nominal(name, cards[i]));
            else m.columns.push_back(quant(name, k == oracle::K::Q ? ColumnKind::Quantitative : ColumnKind::Temporal));
            sigs.push_back({name, k, k == oracle::K::N ? cards[i] : 0});
        }
        auto specs = enumerate_charts(names, m);
        auto keys = keys_of(specs);
        CHECK(keys.size() == specs.size());
        CHECK(keys == oracle::enumerate_by_subsets(sigs));
    }
}

TEST_CASE("ranking: columns used, best relevance, mark priority, enumeration order")
{
    DatasetMeta m;
    m.columns = {quant("a"), quant("b"), nominal("g", 4), quant("c")};
    std::vector<std::string> order = {"a", "b", "g", "c"};
    auto specs = enumerate_charts(order, m);
    auto ranked = rank_chart_specs(specs, order);
    REQUIRE(!ranked.empty());
    CHECK(ranked.size() <= kMaxCharts);
    CHECK(ranked.front().columns().size() == 3);
    auto key = [&](const ChartSpec& s) {
        std::size_t best = order.size();
        for (const auto& c : s.columns())
            best = std::min(best, static_cast<std::size_t>(std::find(order.begin(), order.end(), c) - order.begin()));
        static const int prio[] = {0, 1, 2, 4, 5, 3};
        return std::tuple(-static_cast<int>(s.columns().size()), best, prio[static_cast<int>(s.mark)]);
    };
    for (std::size_t i = 1; i < ranked.size(); ++i) CHECK(key(ranked[i - 1]) <= key(ranked[i]));
    CHECK(rank_chart_specs(ranked, order) == ranked);
    CHECK(rank_chart_specs(specs, order) == ranked);
}

TEST_CASE("same columns: point ranks before bar")
{
    Dataset ds = ingest_tabular("a,b\n1,2\n");
    ChartSpec bar = spec(Mark::Bar, {{Channel::X, "a"}, {Channel::Y, "b", ColumnKind::Quantitative, Aggregate::Mean}}, ds);
    ChartSpec point = spec(Mark::Point, {{Channel::X, "a"}, {Channel::Y, "b"}}, ds);
    auto ranked = rank_chart_specs({bar, point}, {"a", "b"});
    CHECK(ranked[0].mark == Mark::Point);
    CHECK(ranked[1].mark == Mark::Bar);
}

TEST_CASE("25 candidates are cut to 20")
{
    std::vector<ChartSpec> many;
    std::vector<std::string> order;
    for (int i = 0; i < 25; ++i) {
        ChartSpec s;
        s.mark = Mark::HistogramBar;
        std::string c = "q" + std::to_string(i);
        order.push_back(c);
        s.encodings = {{Channel::X, c, ColumnKind::Quantitative, Aggregate::None, true},
                       {Channel::Y, c, ColumnKind::Quantitative, Aggregate::Count}};
        many.push_back(s);
    }
    RecommendationBatch b = rank_charts(many, order);
    CHECK(b.items.size() == 20);
    for (std::size_t i = 1; i < b.items.size(); ++i) CHECK(b.items[i - 1].score > b.items[i].score);
    CHECK(chart_spec_from_json(b.items[0].body) == many[0]);
}

TEST_CASE("point chart over 3 rows has 3 marks and 480x360 size")
{
    Dataset ds = ingest_tabular("a,b\n1,2\n2,4\n3,1\n");
    ChartImage img = render_chart(spec(Mark::Point, {{Channel::X, "a"}, {Channel::Y, "b"}}, ds), ds);
    CHECK(img.marks.size() == 3);
    CHECK(img.width == 480);
    CHECK(img.svg.attr("viewBox") == "0 0 480 360");
    REQUIRE(img.xDomain.has_value());
    // Domain padded 5% on each side of [1, 3].
    CHECK(img.xDomain->first == doctest::Approx(0.9));
    CHECK(img.xDomain->second == doctest::Approx(3.1));
}

TEST_CASE("hidden axes and legend leave no groups")
{
    Dataset ds = ingest_tabular("a,b,g\n1,2,x\n2,4,y\n3,1,x\n");
    ChartSpec s = spec(Mark::Point, {{Channel::X, "a"}, {Channel::Y, "b"}, {Channel::Color, "g", ColumnKind::Nominal}}, ds);
    auto has = [](const svg::Element& root, const char* cls) {
        return svg::find_first(root, [&](const svg::Element& e) { return svg::has_class(e, cls); }) != nullptr;
    };
    ChartImage shown = render_chart(s, ds);
    CHECK(has(shown.svg, "axis"));
    CHECK(has(shown.svg, "legend"));
    CHECK(shown.legend.size() == 2);
    s.showAxes = false;
    s.showLegend = false;
    ChartImage hidden = render_chart(s, ds);
    CHECK_FALSE(has(hidden.svg, "axis"));
    CHECK_FALSE(has(hidden.svg, "legend"));
    CHECK(hidden.marks.size() == 3);
}

TEST_CASE("bar heights follow hand-computed means")
{
    Dataset ds = ingest_tabular("genre,length\npop,3\nrock,5\npop,5\njazz,9\nrock,7\njazz,3\njazz,6\n");
    ChartSpec s = spec(Mark::Bar, {{Channel::X, "genre", ColumnKind::Nominal},
                                   {Channel::Y, "length", ColumnKind::Quantitative, Aggregate::Mean}}, ds);
    ChartImage img = render_chart(s, ds);
    std::map<std::string, double> mean = {{"pop", 4.0}, {"rock", 6.0}, {"jazz", 6.0}};
    REQUIRE(img.marks.size() == 3);
    REQUIRE(img.yDomain.has_value());
    double perUnit = img.plot.height / (img.yDomain->second - img.yDomain->first);
    for (const auto& mk : img.marks) CHECK(mk.height == doctest::Approx(mean.at(mk.group) * perUnit));
}

TEST_CASE("high cardinality axis is refused")
{
    std::string csv = "g,v\n";
    for (int i = 0; i < 60; ++i) csv += "g" + std::to_string(i) + "," + std::to_string(i) + "\n";
    Dataset ds = ingest_tabular(csv);
    ChartSpec s = spec(Mark::Bar, {{Channel::X, "g", ColumnKind::Nominal},
                                   {Channel::Y, "v", ColumnKind::Quantitative, Aggregate::Mean}}, ds);
    CHECK(code_of([&] { render_chart(s, ds); }) == "charts.cardinality");
    ChartSpec bad = spec(Mark::Point, {{Channel::X, "nope"}, {Channel::Y, "v"}}, ds);
    CHECK(code_of([&] { render_chart(bad, ds); }) == "charts.bind");
}

TEST_CASE("every mark renders with geometry")
{
    Dataset ds = ingest_tabular("d,g,h,v,w\n2020-01-01,a,x,1,2\n2020-01-02,b,y,3,1\n2020-01-03,a,y,2,5\n");
    std::vector<ChartSpec> specs = {
        spec(Mark::Line, {{Channel::X, "d", ColumnKind::Temporal}, {Channel::Y, "v"}}, ds),
        spec(Mark::Rect, {{Channel::X, "g", ColumnKind::Nominal}, {Channel::Y, "h", ColumnKind::Nominal}}, ds),
        spec(Mark::Rect, {{Channel::X, "v", ColumnKind::Quantitative, Aggregate::None, true},
                          {Channel::Y, "w", ColumnKind::Quantitative, Aggregate::None, true}}, ds),
        spec(Mark::HistogramBar, {{Channel::X, "v", ColumnKind::Quantitative, Aggregate::None, true},
                                  {Channel::Y, "v", ColumnKind::Quantitative, Aggregate::Count}}, ds),
        spec(Mark::Arc, {{Channel::Color, "g", ColumnKind::Nominal}, {Channel::Y, "v", ColumnKind::Quantitative, Aggregate::Mean}}, ds),
    };
    for (const auto& s : specs) {
        ChartImage img = render_chart(s, ds);
        CHECK_FALSE(img.marks.empty());
        std::set<std::size_t> covered;
        for (const auto& mk : img.marks) covered.insert(mk.rows.begin(), mk.rows.end());
        CHECK(covered.size() == 3);
        CHECK(chart_image_from_json(to_json(img)) == img);
    }
}

TEST_CASE("animating over 8 keys gives 8 frames on shared domains")
{
    Dataset ds = canary();
    ChartSpec s = spec(Mark::Point, {{Channel::X, "x_position"}, {Channel::Y, "y_position"}}, ds);
    std::vector<std::string> keys;
    auto images = animate_chart_images(s, ds, "time_frame", &keys);
    REQUIRE(images.size() == 8);
    CHECK(keys == std::vector<std::string>{"1", "2", "3", "4", "5", "6", "7", "8"});
    ChartImage full = render_chart(s, ds);
    std::multiset<std::size_t> rows;
    for (const auto& img : images) {
        CHECK(img.xDomain == full.xDomain);
        CHECK(img.yDomain == full.yDomain);
        for (const auto& mk : img.marks) rows.insert(mk.rows.begin(), mk.rows.end());
    }
    CHECK(rows.size() == ds.rowCount());
    CHECK(std::set<std::size_t>(rows.begin(), rows.end()).size() == ds.rowCount());

    AnimatedAsset a = animate_chart(s, ds, "time_frame", 200);
    CHECK(a.frame_count() == 8);
    CHECK(a.frameKeys == keys);
    CHECK(a.frameDelayMs == 200);
    CHECK(a.source == AnimationSource::Visualization);
    CHECK(a.cycle_ms() == 1600);
}

TEST_CASE("animation errors")
{
    Dataset ds = canary();
    ChartSpec s = spec(Mark::Point, {{Channel::X, "x_position"}, {Channel::Y, "y_position"}}, ds);
    CHECK(code_of([&] { animate_chart(s, ds, "time_frame", 0); }) == "animation.invalid");
    Dataset flat = ingest_tabular("t,a,b\n1,1,2\n1,2,3\n");
    ChartSpec f = spec(Mark::Point, {{Channel::X, "a"}, {Channel::Y, "b"}}, flat);
    CHECK(code_of([&] { animate_chart(f, flat, "t"); }) == "charts.nothing_to_animate");
}

TEST_CASE("temporal keys sort chronologically")
{
    Dataset ds = ingest_tabular("d,v,w\n2021-03-01,1,2\n2020-12-31,2,3\n2021-01-15,3,1\n");
    ChartSpec s = spec(Mark::Point, {{Channel::X, "v"}, {Channel::Y, "w"}}, ds);
    AnimatedAsset a = animate_chart(s, ds, "d");
    CHECK(a.frameKeys == std::vector<std::string>{"2020-12-31", "2021-01-15", "2021-03-01"});
}

TEST_CASE("spec json round trip")
{
    Dataset ds = ingest_tabular("a,b\n1,2\n");
    ChartSpec s = spec(Mark::Point, {{Channel::X, "a"}, {Channel::Y, "b"}}, ds);
    s.rowFilter = std::vector<std::size_t>{0};
    s.showAxes = false;
    s.colorScheme = {{Rgb{1, 2, 3}}, SchemeKind::Sequential};
    s.markScale = 1.5;
    CHECK(chart_spec_from_json(to_json(s)) == s);
}

}
