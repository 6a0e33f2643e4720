#include "inkline/error.hpp"
#include "inkline/gallery.hpp"
#include "inkline/providers.hpp"

#include <doctest.h>
#include <httplib.h>

#include <atomic>
#include <cstdlib>
#include <thread>

using namespace inkline;
using nlohmann::json;

namespace {

DatasetMeta weather_meta()
{
    DatasetMeta m;
    m.datasetId = "ds-test";
    m.rowCount = 3;
    ColumnMeta t;
    t.name = "temperature";
    t.kind = ColumnKind::Quantitative;
    ColumnMeta c;
    c.name = "city";
    c.kind = ColumnKind::Nominal;
    c.uniqueValues = {"Oslo", "Lima"};
    m.columns = {t, c};
    return m;
}

// Scripted stand-in for a model-backed provider.
struct FakeRemote {
    httplib::Server server;
    std::thread thread;
    int port = 0;
    std::atomic<int> hits{0};
    std::string mode = "good";
    json lastRequest;

    FakeRemote()
    {
        server.Post("/v1/provide", [this](const httplib::Request& req, httplib::Response& res) {
            ++hits;
            lastRequest = json::parse(req.body);
            std::string task = lastRequest.at("task");
            json reply;
            if (mode == "500") {
                res.status = 500;
                return;
            }
            if (mode == "404") {
                res.status = 404;
                return;
            }
            if (mode == "garbage") {
                res.set_content("{not json", "application/json");
                return;
            }
            if (mode == "wrong-shape") {
                res.set_content(R"({"columns": "temperature", "query": 3, "vector": [1, 2], "images": {}})",
                                "application/json");
                return;
            }
            if (task == "relevance" || task == "time_columns") {
                reply = {{"columns", {"temperature", "nonexistent", "city"}}};
            } else if (task == "filter") {
                reply = {{"query", "SELECT * FROM df WHERE temperature < 3"}};
            } else if (task == "images") {
                reply = {{"images", {{{"width", 1}, {"height", 2}, {"rgba", {255, 0, 0, 255, 0, 0, 255, 255}}}}}};
                if (mode == "bad-pixels") reply["images"][0]["rgba"] = {1, 2, 3};
            } else if (task == "embed") {
                json v = json::array();
                for (int i = 0; i < 256; ++i) v.push_back(i == 7 ? 1.0 : 0.0);
                reply = {{"vector", v}};
            }
            res.set_content(reply.dump(), "application/json");
        });
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }
    ~FakeRemote()
    {
        server.stop();
        thread.join();
    }

    providers::RemoteProvider provider(int retries = 1)
    {
        providers::RemoteOptions o;
        o.url = "http://127.0.0.1:" + std::to_string(port) + "/v1/provide";
        o.timeout = std::chrono::milliseconds(2000);
        o.retries = retries;
        return providers::RemoteProvider(o);
    }
};

} // namespace

TEST_SUITE("providers") {

TEST_CASE("fallback provider is deterministic and routes to the rule-based helpers")
{
    providers::FallbackProvider p;
    DatasetMeta m = weather_meta();
    CHECK(p.name() == "fallback");
    CHECK(p.relevance("cold days in Oslo", m) == fallback_relevance("cold days in Oslo", m));
    CHECK(p.filter("days under 3.5", m) == p.filter("days under 3.5", m));
    CHECK((p.embed("a yellow bird") - gallery::fallback_embed("a yellow bird")).norm() == 0.0);
    auto a = p.images_from_text("canary"), b = p.images_from_text("canary");
    REQUIRE_FALSE(a.empty());
    CHECK(a[0].pixels == b[0].pixels);
}

TEST_CASE("remote provider speaks the versioned protocol")
{
    FakeRemote fake;
    auto p = fake.provider();
    DatasetMeta m = weather_meta();
    CHECK(p.name() == "remote");
    CHECK(p.relevance("cold", m) == std::vector<std::string>{"temperature", "nonexistent", "city"});
    CHECK(fake.lastRequest.at("version") == providers::kProtocolVersion);
    CHECK(fake.lastRequest.at("task") == "relevance");
    CHECK(fake.lastRequest.at("chunk") == "cold");
    CHECK(p.filter("cold", m) == "SELECT * FROM df WHERE temperature < 3");
    auto imgs = p.images_from_text("red");
    REQUIRE(imgs.size() == 1);
    CHECK(imgs[0].width == 1);
    CHECK(imgs[0].height == 2);
    CHECK(imgs[0].pixels[0] == 255);
    Embedding e = p.embed("x");
    CHECK(e[7] == 1.0);
    CHECK(e.norm() == doctest::Approx(1.0));
    // Relevance sanitizing drops names outside the schema.
    CHECK(relevant_columns("cold", m, p) == std::vector<std::string>{"temperature", "city"});
}

TEST_CASE("schema and transport failures become provider errors")
{
    FakeRemote fake;
    DatasetMeta m = weather_meta();
    for (std::string mode : {"garbage", "wrong-shape", "404"}) {
        fake.mode = mode;
        auto p = fake.provider();
        INFO(mode);
        CHECK_THROWS_AS(p.relevance("x", m), ProviderError);
        CHECK_THROWS_AS(p.filter("x", m), ProviderError);
        CHECK_THROWS_AS(p.embed("x"), ProviderError);
        CHECK_THROWS_AS(p.images_from_text("x"), ProviderError);
    }
    fake.mode = "bad-pixels";
    CHECK_THROWS_AS(fake.provider().images_from_text("x"), ProviderError);
    try {
        fake.mode = "garbage";
        fake.provider().filter("x", m);
    } catch (const Error& e) {
        CHECK(e.code() == "provider.failure");
    }
}

TEST_CASE("server errors are retried, client errors are not")
{
    FakeRemote fake;
    fake.mode = "500";
    CHECK_THROWS_AS(fake.provider(2).embed("x"), ProviderError);
    CHECK(fake.hits == 3);
    fake.hits = 0;
    fake.mode = "404";
    CHECK_THROWS_AS(fake.provider(2).embed("x"), ProviderError);
    CHECK(fake.hits == 1);
}

TEST_CASE("unreachable endpoint fails as a provider error")
{
    int port;
    {
        httplib::Server s;
        port = s.bind_to_any_port("127.0.0.1");
    }
    providers::RemoteOptions o;
    o.url = "http://127.0.0.1:" + std::to_string(port) + "/";
    o.timeout = std::chrono::milliseconds(300);
    o.retries = 0;
    providers::RemoteProvider p(o);
    CHECK_THROWS_AS(p.embed("x"), ProviderError);
}

TEST_CASE("provider selection")
{
    ::unsetenv("INKLINE_PROVIDER_URL");
    CHECK(providers::make_provider()->name() == "fallback");
    CHECK(providers::make_provider("fallback")->name() == "fallback");
    try {
        providers::make_provider("remote");
        FAIL("expected a configuration error");
    } catch (const Error& e) {
        CHECK(e.code() == "provider.config");
    }
    CHECK_THROWS_AS(providers::make_provider("oracle"), Error);
    providers::RemoteOptions bad;
    bad.url = "localhost:80";
    CHECK_THROWS_AS(providers::RemoteProvider{bad}, Error);
    ::setenv("INKLINE_PROVIDER_URL", "http://127.0.0.1:9/x", 1);
    CHECK(providers::make_provider()->name() == "remote");
    ::unsetenv("INKLINE_PROVIDER_URL");
}

}
