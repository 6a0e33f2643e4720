#include "inkline/color.hpp"
#include "inkline/error.hpp"
#include "inkline/io.hpp"
#include "inkline/raster.hpp"
#include "inkline/svg.hpp"
#include "inkline/text.hpp"

#include "oracles.hpp"

#include <doctest.h>

using namespace inkline;

TEST_SUITE("core") {

TEST_CASE("word tokens lowercase and split on punctuation")
{
    auto t = text::word_tokens("Every time-frame, the Canary!");
    CHECK(t == std::vector<std::string>{"every", "time", "frame", "the", "canary"});
    CHECK(text::word_tokens("  ").empty());
    CHECK(t == oracle::lower_words("Every time-frame, the Canary!"));
}

TEST_CASE("identifier tokens split snake and camel case")
{
    CHECK(text::identifier_tokens("time_frame") == std::vector<std::string>{"time", "frame"});
    CHECK(text::identifier_tokens("timeFrame") == std::vector<std::string>{"time", "frame"});
    CHECK(text::identifier_tokens("x-position") == std::vector<std::string>{"x", "position"});
}

TEST_CASE("code point offsets")
{
    std::string s = "caf\xc3\xa9 au lait";
    CHECK(text::codepoint_length(s) == 12);
    CHECK(text::byte_offset(s, 4) == 5u);
    CHECK_FALSE(text::byte_offset(s, 13).has_value());
}

TEST_CASE("number formatting round trips")
{
    CHECK(text::format_number(15) == "15");
    CHECK(text::format_number(2.5) == "2.5");
    CHECK(text::format_number(-0.125) == "-0.125");
    for (double v : {0.1, 1.0 / 3.0, 1e-7, 123456789.25, -42.0}) CHECK(*text::parse_number(text::format_number(v)) == v);
    CHECK_FALSE(text::parse_number("12abc").has_value());
}

TEST_CASE("fnv1a matches the reference vectors")
{
    CHECK(text::fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(text::fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(text::fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("color parsing and hex")
{
    CHECK(parse_color("#ffd700") == Rgb{255, 215, 0});
    CHECK(parse_color("#FD0") == Rgb{255, 221, 0});
    CHECK(parse_color("rgb(1, 2, 3)") == Rgb{1, 2, 3});
    CHECK_FALSE(parse_color("none").has_value());
    CHECK_FALSE(parse_color("url(#g)").has_value());
    CHECK(to_hex({255, 215, 0}) == "#ffd700");
}

TEST_CASE("CIELAB agrees with an independent conversion")
{
    for (Rgb c : {Rgb{0, 0, 0}, Rgb{255, 255, 255}, Rgb{255, 0, 0}, Rgb{18, 200, 77}, Rgb{3, 4, 5}}) {
        auto l = srgb_to_lab(c);
        auto o = oracle::lab(c.r, c.g, c.b);
        for (int i = 0; i < 3; ++i) CHECK(l(i) == doctest::Approx(o[static_cast<std::size_t>(i)]).epsilon(1e-12));
    }
    CHECK(srgb_to_lab(Rgb{255, 255, 255})(0) == doctest::Approx(100).epsilon(1e-6));
}

TEST_CASE("HSL round trip")
{
    for (Rgb c : {Rgb{255, 215, 0}, Rgb{29, 185, 84}, Rgb{10, 10, 10}, Rgb{200, 30, 220}}) CHECK(from_hsl(to_hsl(c)) == c);
}

TEST_CASE("svg parse and serialize round trip")
{
    std::string src = R"(<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 10 20"><g class="marks"><rect x="1" y="2" width="3" height="4" fill="#ff0000"/><text x="0" y="5">a &amp; b</text></g></svg>)";
    svg::Element e = svg::parse(src);
    CHECK(e.tag == "svg");
    CHECK(svg::element_count(e) == 4);
    CHECK(svg::parse(svg::serialize(e)) == e);
    CHECK(e.inner_text() == "a & b");
    auto vb = svg::view_box(e);
    CHECK(vb.width == 10);
    CHECK(vb.height == 20);
}

TEST_CASE("svg parse errors carry the byte offset")
{
    try {
        svg::parse("<svg><g></svg>");
        FAIL("expected a parse error");
    } catch (const Error& e) {
        CHECK(e.code() == "svg.parse");
        CHECK_FALSE(e.detail().empty());
    }
}

TEST_CASE("coordinate formatting keeps two decimals")
{
    CHECK(svg::num(1.0) == "1");
    CHECK(svg::num(1.256) == "1.26");
    CHECK(svg::num(-0.001) == "0");
}

TEST_CASE("rasterizer paints topmost shapes by pixel center")
{
    svg::Element root = svg::parse(
        R"(<svg viewBox="0 0 10 10"><rect x="0" y="0" width="10" height="10" fill="#0000ff"/><rect x="0" y="0" width="5" height="10" fill="#ff0000"/></svg>)");
    RgbaImage img = raster::rasterize(root, 10, 10);
    CHECK(img.rgb(2, 5) == Rgb{255, 0, 0});
    CHECK(img.rgb(7, 5) == Rgb{0, 0, 255});
    auto cov = raster::paint_coverage(root, 10, 10);
    CHECK(cov[Rgb{255, 0, 0}] == 50);
    CHECK(cov[Rgb{0, 0, 255}] == 50);
}

TEST_CASE("rasterized circle covers about pi r squared")
{
    svg::Element root = svg::parse(R"(<svg viewBox="0 0 100 100"><circle cx="50" cy="50" r="30" fill="#00ff00"/></svg>)");
    auto cov = raster::paint_coverage(root, 100, 100);
    CHECK(static_cast<double>(cov[Rgb{0, 255, 0}]) == doctest::Approx(3.14159265 * 900).epsilon(0.02));
}

TEST_CASE("path flattening")
{
    auto polys = raster::flatten_path("M0 0 L10 0 L10 10 Z M20 20 H30 V30");
    REQUIRE(polys.size() == 2);
    CHECK(polys[0].size() >= 3);
}

TEST_CASE("io writes atomically and reports missing files")
{
    auto dir = oracle::scratch_dir("io");
    io::write_text(dir / "a" / "b.txt", "hello");
    CHECK(io::read_text(dir / "a" / "b.txt") == "hello");
    CHECK_THROWS_AS(io::read_text(dir / "missing.txt"), Error);
    std::filesystem::remove_all(dir);
}

}
