#include "inkline/chroma.hpp"
#include "inkline/error.hpp"
#include "inkline/providers.hpp"

#include "oracles.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <random>
#include <set>

using namespace inkline;
using namespace inkline::chroma;

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

RgbaImage stripes(const std::vector<Rgb>& colors, int stripeWidth = 20, int height = 20)
{
    RgbaImage img(stripeWidth * static_cast<int>(colors.size()), height);
    for (int x = 0; x < img.width; ++x)
        for (int y = 0; y < height; ++y) img.set(x, y, colors[static_cast<std::size_t>(x / stripeWidth)]);
    return img;
}

std::array<int, 3> arr(const Rgb& c) { return {c.r, c.g, c.b}; }

Rgb random_color(std::mt19937& rng)
{
    return {static_cast<std::uint8_t>(rng() % 256), static_cast<std::uint8_t>(rng() % 256),
            static_cast<std::uint8_t>(rng() % 256)};
}

Palette palette_of(const std::vector<Rgb>& colors, const std::vector<double>& weights)
{
    Palette p;
    for (std::size_t i = 0; i < kBins; ++i) p.bins[i] = {colors[i], weights[i]};
    p.sortedByLuminosity = false;
    return p;
}

} // namespace

TEST_SUITE("chroma") {

TEST_CASE("five equal stripes give the five colors at 0.2, luminosity sorted")
{
    std::vector<Rgb> colors = {{230, 30, 30}, {20, 20, 160}, {250, 240, 120}, {30, 150, 60}, {120, 120, 120}};
    Palette p = extract_palette(stripes(colors));
    std::set<Rgb> got;
    for (const auto& b : p.bins) {
        got.insert(b.color);
        CHECK(b.weight == doctest::Approx(0.2).epsilon(1e-12));
    }
    CHECK(got == std::set<Rgb>(colors.begin(), colors.end()));
    CHECK(p.sortedByLuminosity);
    for (std::size_t i = 1; i < kBins; ++i) CHECK(luma(p.bins[i - 1].color) <= luma(p.bins[i].color));
}

TEST_CASE("single color image fills all bins")
{
    RgbaImage img(7, 3);
    for (int x = 0; x < 7; ++x)
        for (int y = 0; y < 3; ++y) img.set(x, y, {10, 200, 30});
    Palette p = extract_palette(img);
    double sum = 0;
    for (const auto& b : p.bins) {
        CHECK(b.color == Rgb{10, 200, 30});
        sum += b.weight;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("transparent pixels are ignored; none opaque is an error")
{
    RgbaImage img(4, 4);
    CHECK(code_of([&] { extract_palette(img); }) == "chroma.no_opaque_pixels");
    img.set(0, 0, {255, 0, 0}, 15);
    CHECK(code_of([&] { extract_palette(img); }) == "chroma.no_opaque_pixels");
    img.set(1, 1, {0, 0, 255}, 16);
    Palette p = extract_palette(img);
    for (const auto& b : p.bins) CHECK(b.color == Rgb{0, 0, 255});
}

TEST_CASE("property: weights sum to one on random images")
{
    std::mt19937 rng(21);
    for (int t = 0; t < 40; ++t) {
        RgbaImage img(1 + static_cast<int>(rng() % 30), 1 + static_cast<int>(rng() % 30));
        for (int x = 0; x < img.width; ++x)
            for (int y = 0; y < img.height; ++y) img.set(x, y, random_color(rng), 255);
        Palette p = extract_palette(img);
        double sum = 0;
        for (const auto& b : p.bins) sum += b.weight;
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
        for (std::size_t i = 1; i < kBins; ++i) CHECK(luma(p.bins[i - 1].color) <= luma(p.bins[i].color));
    }
}

TEST_CASE("palettes from text")
{
    providers::FallbackProvider p;
    auto canary = palette_from_text("canary", p);
    REQUIRE(canary.size() == 1);
    CHECK(canary[0].label == "canary");
    for (const auto& b : canary[0].bins) {
        Hsl h = to_hsl(b.color);
        CHECK(h.h >= 40);
        CHECK(h.h <= 62);
    }
    auto two = palette_from_text("canary sky", p);
    REQUIRE(two.size() == 2);
    CHECK(two[0].label == "canary");
    CHECK(two[1].label == "sky");
    CHECK(code_of([&] { palette_from_text("the of", p); }) == "chroma.no_keywords");
    CHECK(lexicon_size() == 64);
    CHECK(lexicon_color("spotify").has_value());
    CHECK(palette_keywords("The canary, THE sky") == std::vector<std::string>{"canary", "sky"});
}

TEST_CASE("fallback image has five bands at lightness offsets")
{
    RgbaImage img = fallback_text_image("qwertyzzz");
    Rgb base = keyword_base_color("qwertyzzz");
    Hsl hb = to_hsl(base);
    CHECK(std::abs(hb.h - static_cast<double>(oracle::fnv(reinterpret_cast<const unsigned char*>("qwertyzzz"), 9) % 360)) < 1.5);
    Palette p = extract_palette(img);
    std::set<Rgb> distinct;
    for (const auto& b : p.bins) {
        distinct.insert(b.color);
        CHECK(b.weight == doctest::Approx(0.2).epsilon(1e-9));
    }
    CHECK(distinct.size() == 5);
}

TEST_CASE("emd of a palette with itself is zero on the diagonal")
{
    Palette a = palette_of({{10, 10, 10}, {60, 60, 200}, {200, 50, 50}, {240, 240, 0}, {255, 255, 255}},
                           {0.1, 0.2, 0.3, 0.15, 0.25});
    TransportPlan t = emd(a, a);
    CHECK(t.totalCost == doctest::Approx(0).epsilon(1e-12));
    for (int i = 0; i < 5; ++i) CHECK(t.flow(i, i) == doctest::Approx(a.bins[static_cast<std::size_t>(i)].weight));
}

TEST_CASE("crossed two-bin toy equals the vertex oracle")
{
    Rgb r{255, 0, 0}, b{0, 0, 255}, k{0, 0, 0};
    Palette s = palette_of({r, b, k, k, k}, {0.5, 0.5, 0, 0, 0});
    Palette t = palette_of({b, r, k, k, k}, {0.5, 0.5, 0, 0, 0});
    TransportPlan plan = emd(s, t);
    CHECK(plan.totalCost == doctest::Approx(0).epsilon(1e-12));
    CHECK(plan.flow(0, 1) == doctest::Approx(0.5));
    CHECK(plan.flow(1, 0) == doctest::Approx(0.5));
    std::vector<std::vector<double>> cost = {{oracle::lab_dist(arr(r), arr(b)), 0}, {0, oracle::lab_dist(arr(b), arr(r))}};
    CHECK(oracle::transport_vertex_min({0.5, 0.5}, {0.5, 0.5}, cost) == doctest::Approx(plan.totalCost).epsilon(1e-12));
}

TEST_CASE("emd is symmetric, feasible and optimal on random instances")
{
    std::mt19937 rng(8);
    for (int t = 0; t < 200; ++t) {
        std::vector<Rgb> ca, cb;
        std::vector<double> wa, wb;
        for (int i = 0; i < 5; ++i) {
            ca.push_back(random_color(rng));
            cb.push_back(random_color(rng));
            wa.push_back(static_cast<double>(rng() % 1000));
            wb.push_back(static_cast<double>(rng() % 1000));
        }
        double sa = std::accumulate(wa.begin(), wa.end(), 0.0), sb = std::accumulate(wb.begin(), wb.end(), 0.0);
        for (auto& w : wa) w /= sa;
        for (auto& w : wb) w /= sb;
        Palette a = palette_of(ca, wa), b = palette_of(cb, wb);
        TransportPlan p = emd(a, b);
        for (int i = 0; i < 5; ++i) {
            CHECK(p.flow.row(i).sum() == doctest::Approx(wa[static_cast<std::size_t>(i)]).epsilon(1e-9));
            CHECK(p.flow.col(i).sum() == doctest::Approx(wb[static_cast<std::size_t>(i)]).epsilon(1e-9));
        }
        CHECK(p.flow.minCoeff() >= 0);
        CHECK(p.totalCost == doctest::Approx(p.flow.cwiseProduct(p.cost).sum()).epsilon(1e-12));
        CHECK(emd(b, a).totalCost == doctest::Approx(p.totalCost).epsilon(1e-9));
    }
}

TEST_CASE("three active bins with random weights match the vertex oracle")
{
    std::mt19937 rng(13);
    for (int t = 0; t < 100; ++t) {
        std::vector<Rgb> ca, cb;
        std::vector<double> wa(5, 0), wb(5, 0);
        for (int i = 0; i < 5; ++i) {
            ca.push_back(random_color(rng));
            cb.push_back(random_color(rng));
        }
        for (int i = 0; i < 3; ++i) {
            wa[static_cast<std::size_t>(i)] = 1 + static_cast<double>(rng() % 9);
            wb[static_cast<std::size_t>(i + 2)] = 1 + static_cast<double>(rng() % 9);
        }
        double sa = std::accumulate(wa.begin(), wa.end(), 0.0), sb = std::accumulate(wb.begin(), wb.end(), 0.0);
        for (auto& w : wa) w /= sa;
        for (auto& w : wb) w /= sb;
        std::vector<std::vector<double>> cost(3, std::vector<double>(3));
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) cost[i][j] = oracle::lab_dist(arr(ca[i]), arr(cb[j + 2]));
        double expect = oracle::transport_vertex_min({wa[0], wa[1], wa[2]}, {wb[2], wb[3], wb[4]}, cost);
        // Weights off the 1e-6 grid are rounded by the solver.
        CHECK(emd(palette_of(ca, wa), palette_of(cb, wb)).totalCost == doctest::Approx(expect).epsilon(1e-5));
    }
}

TEST_CASE("cost matrix is CIELAB distance")
{
    Palette a = palette_of({{1, 2, 3}, {50, 60, 70}, {200, 10, 10}, {0, 0, 0}, {255, 255, 255}}, {0.2, 0.2, 0.2, 0.2, 0.2});
    Matrix5 c = cost_matrix(a, a);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j)
            CHECK(c(i, j) == doctest::Approx(oracle::lab_dist(arr(a.bins[i].color), arr(a.bins[j].color))).epsilon(1e-12));
}

TEST_CASE("categorical mapping of five colors equals the 120 permutation minimum")
{
    std::mt19937 rng(12);
    for (int t = 0; t < 50; ++t) {
        std::vector<SourceColor> src;
        std::set<Rgb> seen;
        while (src.size() < 5) {
            Rgb c = random_color(rng);
            if (seen.insert(c).second) src.push_back({c, 1});
        }
        std::vector<Rgb> tc;
        for (int i = 0; i < 5; ++i) tc.push_back(random_color(rng));
        Palette target = palette_of(tc, {0.2, 0.2, 0.2, 0.2, 0.2});
        auto m = recolor_mapping(src, target, SchemeKind::Categorical);
        REQUIRE(m.size() == 5);
        std::set<Rgb> images;
        double cost = 0;
        for (const auto& s : src) {
            images.insert(m.at(s.color));
            cost += oracle::lab_dist(arr(s.color), arr(m.at(s.color)));
        }
        std::vector<std::vector<double>> cm(5, std::vector<double>(5));
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 5; ++j) cm[i][j] = oracle::lab_dist(arr(src[i].color), arr(tc[j]));
        CHECK(images.size() == std::set<Rgb>(tc.begin(), tc.end()).size());
        CHECK(cost == doctest::Approx(oracle::assignment_min(cm)).epsilon(1e-9));
    }
}

TEST_CASE("sequential mapping preserves luma order")
{
    std::vector<SourceColor> src = {{{222, 235, 247}, 1}, {{158, 202, 225}, 1}, {{49, 130, 189}, 1}, {{8, 81, 156}, 1}};
    Palette target = palette_of({{255, 240, 0}, {40, 40, 40}, {200, 160, 0}, {255, 255, 200}, {120, 90, 0}}, {0.2, 0.2, 0.2, 0.2, 0.2});
    auto m = recolor_mapping(src, target, SchemeKind::Sequential);
    for (std::size_t i = 1; i < src.size(); ++i) CHECK(luma(m.at(src[i - 1].color)) >= luma(m.at(src[i].color)));
}

TEST_CASE("single source maps to the nearest bin; empty is an error")
{
    Palette target = palette_of({{255, 0, 0}, {0, 255, 0}, {0, 0, 255}, {0, 0, 0}, {255, 255, 255}}, {0.2, 0.2, 0.2, 0.2, 0.2});
    auto m = recolor_mapping({{{250, 10, 10}, 1}}, target, SchemeKind::Categorical);
    CHECK(m.at(Rgb{250, 10, 10}) == Rgb{255, 0, 0});
    CHECK(code_of([&] { recolor_mapping({}, target, SchemeKind::Categorical); }) == "chroma.sources");
    std::vector<SourceColor> many;
    for (int i = 0; i < 65; ++i) many.push_back({{static_cast<std::uint8_t>(i), 0, 0}, 1});
    CHECK(code_of([&] { recolor_mapping(many, target, SchemeKind::Categorical); }) == "chroma.sources");
}

TEST_CASE("more than five categorical sources map to nearest targets")
{
    std::vector<SourceColor> src;
    for (int i = 0; i < 8; ++i) src.push_back({{static_cast<std::uint8_t>(30 * i), 100, 50}, 1});
    Palette target = palette_of({{255, 0, 0}, {0, 255, 0}, {0, 0, 255}, {0, 0, 0}, {255, 255, 255}}, {0.2, 0.2, 0.2, 0.2, 0.2});
    auto m = recolor_mapping(src, target, SchemeKind::Categorical);
    CHECK(m.size() == 8);
}

TEST_CASE("assignment solver is exact")
{
    std::mt19937 rng(4);
    for (int t = 0; t < 100; ++t) {
        int rows = 1 + static_cast<int>(rng() % 5);
        Eigen::MatrixXd c(rows, 5);
        std::vector<std::vector<double>> cv(static_cast<std::size_t>(rows), std::vector<double>(5));
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < 5; ++j) cv[i][j] = c(i, j) = static_cast<double>(rng() % 100);
        auto pick = assign(c);
        std::set<std::size_t> used(pick.begin(), pick.end());
        CHECK(used.size() == static_cast<std::size_t>(rows));
        double total = 0;
        for (int i = 0; i < rows; ++i) total += c(i, static_cast<long>(pick[static_cast<std::size_t>(i)]));
        CHECK(total == oracle::assignment_min(cv));
    }
}

TEST_CASE("scheme detection")
{
    CHECK(detect_scheme({{222, 235, 247}, {158, 202, 225}, {107, 174, 214}, {49, 130, 189}, {8, 81, 156}}) ==
          SchemeKind::Sequential);
    CHECK(detect_scheme({{178, 24, 43}, {239, 138, 98}, {247, 247, 247}, {103, 169, 207}, {33, 102, 172}}) ==
          SchemeKind::Diverging);
    std::vector<Rgb> cycle = {{78, 121, 167}, {242, 142, 43}, {225, 87, 89}, {118, 183, 178}, {89, 161, 79},
                              {237, 201, 72}, {176, 122, 161}, {255, 157, 167}, {156, 117, 95}, {186, 176, 172}};
    CHECK(detect_scheme(cycle) == SchemeKind::Categorical);
}

TEST_CASE("palette json round trip")
{
    Palette p = palette_of({{1, 2, 3}, {4, 5, 6}, {7, 8, 9}, {10, 11, 12}, {13, 14, 15}}, {0.25, 0.25, 0.5, 0, 0});
    p.label = "x";
    CHECK(palette_from_json(to_json(p)) == p);
}

}
