#include "inkline/error.hpp"
#include "inkline/gallery.hpp"
#include "inkline/io.hpp"

#include "fixtures.hpp"
#include "oracles.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <random>

using namespace inkline;
using namespace inkline::gallery;

namespace {

GraphicAsset static_asset(std::string id, std::string caption)
{
    GraphicAsset a;
    a.id = std::move(id);
    a.kind = GraphicKind::Static;
    a.image = svg::parse(fixture::small_svg("#ff0000"));
    a.caption = std::move(caption);
    a.license = "CC0";
    return a;
}

GraphicAsset animated_asset(std::string id, std::vector<std::string> frameCaptions)
{
    GraphicAsset a;
    a.id = std::move(id);
    a.kind = GraphicKind::Animated;
    a.caption = frameCaptions.front();
    for (std::size_t i = 0; i < frameCaptions.size(); ++i) a.animation.frames.push_back(svg::parse(fixture::small_svg("#00ff00")));
    a.animation.frameDelayMs = 100;
    a.frameCaptions = std::move(frameCaptions);
    return a;
}

GalleryIndex corpus_index(const std::vector<fixture::GalleryEntry>& entries)
{
    std::vector<GraphicAsset> assets;
    for (const auto& e : entries)
        assets.push_back(e.animated ? animated_asset(e.id, e.frameCaptions) : static_asset(e.id, e.caption));
    for (std::size_t i = 0; i < entries.size(); ++i)
        if (entries[i].animated) assets[i].caption = entries[i].caption;
    return index_assets(assets, fallback_embed);
}

} // namespace

TEST_SUITE("gallery") {

TEST_CASE("embeddings are unit norm and order free")
{
    for (const char* t : {"canary", "a small yellow canary bird", "Lakers vs Detroit 2004"})
        CHECK(fallback_embed(t).norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fallback_embed("").norm() == 0);
    CHECK(fallback_embed("  ,. ").norm() == 0);
    CHECK(cosine(fallback_embed("canary bird"), fallback_embed("bird canary")) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(cosine(fallback_embed("canary"), fallback_embed("")) == 0);
}

TEST_CASE("embedding matches an independent reimplementation of the hash rule")
{
    for (const char* t : {"canary", "spanner", "The canary beats its wings", "caf\xc3\xa9 Au LAIT 42"}) {
        Embedding v = fallback_embed(t);
        auto o = oracle::embed(t);
        for (int i = 0; i < 256; ++i) CHECK(v(i) == doctest::Approx(o[static_cast<std::size_t>(i)]).epsilon(1e-15));
    }
    double c = cosine(fallback_embed("canary"), fallback_embed("spanner"));
    CHECK(c == doctest::Approx(oracle::cos(oracle::embed("canary"), oracle::embed("spanner"))).epsilon(1e-15));
}

TEST_CASE("indexing: one vector per static asset, one per frame")
{
    IndexReport rep;
    GalleryIndex idx = index_assets({static_asset("a", "x"), static_asset("b", "y"), static_asset("c", "z"),
                                     animated_asset("d", {"f1", "f2", "f3", "f4"}), static_asset("e", "  ")},
                                    fallback_embed, "fallback", &rep);
    CHECK(idx.assets.size() == 4);
    CHECK(idx.vectors[0].size() == 1);
    CHECK(idx.vectors[3].size() == 4);
    CHECK(rep.indexed == 4);
    REQUIRE(rep.skipped.size() == 1);
    CHECK(rep.skipped[0].first == "e");
    CHECK(rep.skipped[0].second == "empty caption");
}

TEST_CASE("caption equal to chunk ranks first with score 1, k beyond corpus returns all")
{
    GalleryIndex idx = index_assets({static_asset("a", "blue ocean wave"), static_asset("b", "yellow canary bird"),
                                     static_asset("c", "green leaf")},
                                    fallback_embed);
    auto b = search_static("yellow canary bird", idx, fallback_embed, 100);
    REQUIRE(b.items.size() == 3);
    CHECK(b.items[0].id == "b");
    CHECK(b.items[0].score == doctest::Approx(1.0));
    CHECK(b.kind == AssetKind::StaticGraphic);
    CHECK(search_static("x", GalleryIndex{}, fallback_embed).items.empty());
    CHECK(search_animated("x", GalleryIndex{}, fallback_embed).items.empty());
}

TEST_CASE("animated score is the mean over frames")
{
    GalleryIndex same = index_assets({animated_asset("a", {"canary flap", "canary flap", "canary flap"})}, fallback_embed);
    CHECK(search_animated("canary flap", same, fallback_embed).items[0].score == doctest::Approx(1.0));

    // One frame shares a token with the query; the others land in disjoint buckets.
    std::vector<std::string> frames = {"canary wing"};
    for (int i = 0; frames.size() < 4; ++i) {
        std::string w = "zz" + std::to_string(i);
        if (oracle::cos(oracle::embed("canary"), oracle::embed(w)) == 0) frames.push_back(w);
    }
    GalleryIndex one = index_assets({animated_asset("a", frames)}, fallback_embed);
    double s = cosine(fallback_embed("canary"), fallback_embed("canary wing"));
    CHECK(s > 0);
    CHECK(search_animated("canary", one, fallback_embed).items[0].score == doctest::Approx(s / 4).epsilon(1e-12));
}

TEST_CASE("50-asset corpus matches the exhaustive cosine oracle")
{
    auto entries = fixture::gallery_corpus();
    GalleryIndex idx = corpus_index(entries);
    std::vector<oracle::Captioned> statics, animated;
    for (const auto& e : entries) {
        if (e.animated) animated.push_back({e.id, e.frameCaptions});
        else statics.push_back({e.id, {e.caption}});
    }
    std::mt19937 rng(3);
    for (int q = 0; q < 40; ++q) {
        std::string query = fixture::random_phrase(rng, 1, 4);
        auto bs = search_static(query, idx, fallback_embed);
        auto os = oracle::exhaustive_search(query, statics, 20);
        REQUIRE(bs.items.size() == os.size());
        for (std::size_t i = 0; i < os.size(); ++i) {
            CHECK(bs.items[i].id == os[i].first);
            CHECK(bs.items[i].score == doctest::Approx(os[i].second).epsilon(1e-12));
        }
        auto ba = search_animated(query, idx, fallback_embed);
        auto oa = oracle::exhaustive_search(query, animated, 20);
        REQUIRE(ba.items.size() == oa.size());
        for (std::size_t i = 0; i < oa.size(); ++i) CHECK(ba.items[i].id == oa[i].first);
    }
    CHECK(search_static("canary", idx, fallback_embed).items.size() == 20);
}

TEST_CASE("ordering does not depend on insertion order")
{
    auto entries = fixture::gallery_corpus(9);
    auto shuffled = entries;
    std::mt19937 rng(1);
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    GalleryIndex a = corpus_index(entries), b = corpus_index(shuffled);
    for (const char* q : {"yellow canary", "blue wave", "ball bounce court"}) {
        auto x = search_static(q, a, fallback_embed), y = search_static(q, b, fallback_embed);
        REQUIRE(x.items.size() == y.items.size());
        for (std::size_t i = 0; i < x.items.size(); ++i) CHECK(x.items[i].id == y.items[i].id);
        auto xa = search_animated(q, a, fallback_embed), ya = search_animated(q, b, fallback_embed);
        for (std::size_t i = 0; i < xa.items.size(); ++i) CHECK(xa.items[i].id == ya.items[i].id);
    }
}

TEST_CASE("scores stay within [-1, 1]")
{
    GalleryIndex idx = corpus_index(fixture::gallery_corpus(17));
    std::mt19937 rng(2);
    for (int q = 0; q < 30; ++q) {
        auto b = search_static(fixture::random_phrase(rng, 1, 6), idx, fallback_embed, 50);
        for (const auto& it : b.items) {
            CHECK(it.score <= 1.0);
            CHECK(it.score >= -1.0);
        }
    }
}

TEST_CASE("manifest indexing and persisted round trip")
{
    auto dir = oracle::scratch_dir("gallery");
    io::write_text(dir / "a.svg", fixture::small_svg("#ffd700"));
    io::write_text(dir / "anim" / "f0.svg", fixture::small_svg("#000000"));
    io::write_text(dir / "anim" / "f1.svg", fixture::small_svg("#ffffff"));
    io::write_text(dir / "anim" / "animation.json", R"({"frameDelayMs": 80, "frames": ["f0.svg", "f1.svg"]})");
    nlohmann::json manifest = {{"assets",
                                {{{"id", "a"}, {"kind", "static"}, {"payload", "a.svg"}, {"caption", "yellow star"}, {"license", "CC0"}},
                                 {{"id", "m"}, {"kind", "static"}, {"payload", "missing.svg"}, {"caption", "gone"}},
                                 {{"id", "b"}, {"kind", "animated"}, {"payload", "anim/animation.json"}, {"caption", "blink"},
                                  {"frameCaptions", {"dark", "light"}}}}}};
    io::write_text(dir / "manifest.json", manifest.dump());
    IndexReport rep;
    GalleryIndex idx = index_gallery(dir / "manifest.json", fallback_embed, "fallback", &rep);
    CHECK(idx.assets.size() == 2);
    CHECK(rep.skipped.size() == 1);
    CHECK(idx.find("b")->animation.frameDelayMs == 80);
    save_index(idx, dir / "index.json");
    GalleryIndex back = load_index(dir / "index.json");
    CHECK(back.assets == idx.assets);
    for (const char* q : {"yellow", "light blink"}) {
        CHECK(search_static(q, back, fallback_embed).items[0].id == search_static(q, idx, fallback_embed).items[0].id);
        CHECK(search_animated(q, back, fallback_embed).items[0].score ==
              search_animated(q, idx, fallback_embed).items[0].score);
    }
    std::filesystem::remove_all(dir);
}

}
