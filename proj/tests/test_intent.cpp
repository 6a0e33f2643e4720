#include "inkline/dataset.hpp"
#include "inkline/error.hpp"
#include "inkline/intent.hpp"
#include "inkline/providers.hpp"

#include <doctest.h>

#include <set>

using namespace inkline;

namespace {

ColumnMeta column(std::string name, ColumnKind kind, std::vector<std::string> values = {})
{
    ColumnMeta c;
    c.name = std::move(name);
    c.kind = kind;
    c.uniqueValues = std::move(values);
    return c;
}

DatasetMeta canary_meta()
{
    DatasetMeta m;
    m.datasetId = "ds";
    m.columns = {column("x_position", ColumnKind::Quantitative), column("y_position", ColumnKind::Quantitative),
                 column("time_frame", ColumnKind::Quantitative), column("wing_type", ColumnKind::Nominal, {"left", "right"})};
    return m;
}

struct ScriptedProvider : providers::FallbackProvider {
    std::vector<std::string> columns;
    std::vector<std::string> relevance(std::string_view, const DatasetMeta&) override { return columns; }
    std::vector<std::string> time_columns(const std::vector<ColumnMeta>&) override { return columns; }
};

} // namespace

TEST_SUITE("intent") {

TEST_CASE("asset kind names")
{
    for (AssetKind k : kAllAssetKinds) CHECK(asset_kind_from_string(to_string(k)) == k);
    CHECK(to_string(AssetKind::StaticGraphic) == "static-graphic");
    CHECK_THROWS_AS(asset_kind_from_string("gif"), Error);
}

TEST_CASE("brushing canary creates a static graphic request")
{
    MessageRegistry reg;
    KeyMessage m = reg.create_message("A canary flaps its wings");
    AssetRequest r = reg.brush(m.id, 2, 8, AssetKind::StaticGraphic);
    CHECK(r.kind == AssetKind::StaticGraphic);
    CHECK(reg.chunk(r.chunkId).text == "canary");
}

TEST_CASE("empty and out of range spans are rejected")
{
    MessageRegistry reg;
    KeyMessage m = reg.create_message("hello");
    CHECK_THROWS_AS(reg.brush(m.id, 2, 2, AssetKind::Visualization), Error);
    CHECK_THROWS_AS(reg.brush(m.id, 3, 9, AssetKind::Visualization), Error);
    CHECK_THROWS_AS(reg.brush("msg-404", 0, 1, AssetKind::Visualization), NotFound);
}

TEST_CASE("same span twice reuses the chunk, overlapping spans allowed")
{
    MessageRegistry reg;
    KeyMessage m = reg.create_message("the canary beats its wings");
    AssetRequest a = reg.brush(m.id, 4, 10, AssetKind::StaticGraphic);
    AssetRequest b = reg.brush(m.id, 4, 10, AssetKind::ColorPalette);
    AssetRequest c = reg.brush(m.id, 4, 16, AssetKind::AnimatedGraphic);
    CHECK(a.chunkId == b.chunkId);
    CHECK(a.id != b.id);
    CHECK(c.chunkId != a.chunkId);
    CHECK(reg.message(m.id).chunks.size() == 2);
}

TEST_CASE("offsets are code points")
{
    MessageRegistry reg;
    KeyMessage m = reg.create_message("caf\xc3\xa9 latte");
    AssetRequest r = reg.brush(m.id, 5, 10, AssetKind::ColorPalette);
    CHECK(reg.chunk(r.chunkId).text == "latte");
}

TEST_CASE("chunk links follow batches")
{
    MessageRegistry reg;
    KeyMessage m = reg.create_message("canary yellow");
    AssetRequest a = reg.brush(m.id, 0, 6, AssetKind::StaticGraphic);
    CHECK(reg.chunk_links(a.chunkId).empty());
    RecommendationBatch b1;
    b1.requestId = a.id;
    b1 = reg.attach_batch(b1);
    AssetRequest a2 = reg.brush(m.id, 0, 6, AssetKind::ColorPalette);
    RecommendationBatch b2;
    b2.requestId = a2.id;
    b2 = reg.attach_batch(b2);
    CHECK(reg.chunk_links(a.chunkId) == std::vector<std::string>{b1.id, b2.id});
    CHECK(reg.batch(b1.id).sourceChunkId == a.chunkId);
    reg.remove_batch(b1.id);
    CHECK(reg.chunk_links(a.chunkId) == std::vector<std::string>{b2.id});
    CHECK_THROWS_AS(reg.chunk_links("chunk-404"), NotFound);
}

TEST_CASE("fallback relevance scores")
{
    CHECK(fallback_relevance_score("time frame", column("time_frame", ColumnKind::Quantitative)) == 1.0);
    CHECK(fallback_relevance_score("songs by Coldplay", column("artist", ColumnKind::Nominal, {"Adele", "Coldplay"})) == 0.9);
    CHECK(fallback_relevance_score("every day", column("when", ColumnKind::Temporal)) == 0.5);
    CHECK(fallback_relevance_score("unrelated words", column("artist", ColumnKind::Nominal, {"Adele"})) == 0.0);
    CHECK(fallback_relevance_score("the x value", column("x_position", ColumnKind::Quantitative)) == 0.5);
}

TEST_CASE("canary chunk ranks the positional columns")
{
    auto cols = fallback_relevance("wings based on traced body positions over time", canary_meta());
    CHECK(cols.size() <= 5);
    std::set<std::string> got(cols.begin(), cols.end());
    for (const char* c : {"x_position", "y_position", "time_frame"}) CHECK(got.count(c) == 1);
    CHECK(fallback_relevance("nothing in common", canary_meta()).empty());
}

TEST_CASE("relevance is capped at the schema size and sanitized")
{
    DatasetMeta m;
    m.columns = {column("a", ColumnKind::Quantitative), column("b", ColumnKind::Quantitative),
                 column("c", ColumnKind::Quantitative)};
    ScriptedProvider p;
    p.columns = {"c", "zzz", "a", "c", "b", "a"};
    CHECK(relevant_columns("a b c", m, p) == std::vector<std::string>{"c", "a", "b"});
    CHECK(relevant_columns("a b c", m, p).size() <= 3);
}

TEST_CASE("time columns by kind and lexicon, schema order")
{
    std::vector<ColumnMeta> cols = {column("x_position", ColumnKind::Quantitative),
                                    column("time_frame", ColumnKind::Quantitative)};
    CHECK(fallback_time_columns(cols) == std::vector<std::string>{"time_frame"});
    std::vector<ColumnMeta> nba = {column("season", ColumnKind::Nominal, {"2003-04"}),
                                   column("period", ColumnKind::Quantitative)};
    CHECK(fallback_time_columns(nba) == std::vector<std::string>{"season", "period"});
    CHECK(fallback_time_columns({column("price", ColumnKind::Quantitative)}).empty());
    CHECK(fallback_time_columns({column("when", ColumnKind::Temporal)}) == std::vector<std::string>{"when"});

    ScriptedProvider p;
    p.columns = {"period", "bogus", "season"};
    CHECK(detect_time_columns(nba, p) == std::vector<std::string>{"season", "period"});
}

TEST_CASE("fallback providers are pure")
{
    providers::FallbackProvider p;
    auto meta = canary_meta();
    CHECK(p.relevance("x and y position", meta) == p.relevance("x and y position", meta));
    CHECK(p.embed("canary bird") == p.embed("canary bird"));
}

}
