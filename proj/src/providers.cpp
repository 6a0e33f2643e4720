#include "inkline/providers.hpp"

#include "inkline/chroma.hpp"
#include "inkline/error.hpp"
#include "inkline/filterql.hpp"
#include "inkline/gallery.hpp"

#include <httplib.h>

#include <algorithm>
#include <cstdlib>

namespace inkline::providers {

using nlohmann::json;

std::vector<std::string> FallbackProvider::relevance(std::string_view chunk, const DatasetMeta& meta)
{
    return fallback_relevance(chunk, meta);
}

std::string FallbackProvider::filter(std::string_view chunk, const DatasetMeta& meta)
{
    return filterql::fallback_filter(chunk, meta);
}

std::vector<std::string> FallbackProvider::time_columns(const std::vector<ColumnMeta>& columns)
{
    return fallback_time_columns(columns);
}

std::vector<RgbaImage> FallbackProvider::images_from_text(std::string_view keyword)
{
    return {chroma::fallback_text_image(keyword)};
}

Embedding FallbackProvider::embed(std::string_view text) { return gallery::fallback_embed(text); }

namespace {

long env_long(const char* name, long fallback)
{
    const char* v = std::getenv(name);
    if (!v || !*v) return fallback;
    char* end = nullptr;
    long x = std::strtol(v, &end, 10);
    return (end && *end == 0) ? x : fallback;
}

std::vector<std::string> string_list(const json& reply, const char* key)
{
    if (!reply.is_object() || !reply.contains(key) || !reply.at(key).is_array())
        throw ProviderError("remote", std::string("reply lacks a '") + key + "' list");
    std::vector<std::string> out;
    for (const auto& v : reply.at(key)) {
        if (!v.is_string()) throw ProviderError("remote", std::string("non-string entry in '") + key + "'");
        out.push_back(v.get<std::string>());
    }
    return out;
}

json columns_json(const std::vector<ColumnMeta>& columns)
{
    json a = json::array();
    for (const auto& c : columns) a.push_back(to_json(c));
    return a;
}

} // namespace

RemoteOptions RemoteOptions::from_env()
{
    RemoteOptions o;
    if (const char* u = std::getenv("INKLINE_PROVIDER_URL")) o.url = u;
    o.timeout = std::chrono::milliseconds(std::max(1L, env_long("INKLINE_PROVIDER_TIMEOUT_MS", 10000)));
    o.retries = static_cast<int>(std::clamp(env_long("INKLINE_PROVIDER_RETRIES", 1), 0L, 10L));
    o.concurrency = static_cast<int>(std::clamp(env_long("INKLINE_PROVIDER_CONCURRENCY", 4), 1L, 1024L));
    return o;
}

RemoteProvider::RemoteProvider(RemoteOptions options)
    : options_(std::move(options)), slots_(std::clamp(options_.concurrency, 1, 1024))
{
    const std::string& u = options_.url;
    auto scheme = u.find("://");
    if (u.empty() || scheme == std::string::npos) throw Error("provider.config", "provider URL must be http://host[:port][/path]", u);
    auto slash = u.find('/', scheme + 3);
    base_ = u.substr(0, slash);
    path_ = slash == std::string::npos ? "/" : u.substr(slash);
}

json RemoteProvider::call(std::string_view task, std::string_view chunk, json meta)
{
    json envelope = {{"version", kProtocolVersion}, {"task", task}, {"chunk", chunk}, {"meta", std::move(meta)}};
    std::string body = envelope.dump();

    slots_.acquire();
    struct Release {
        std::counting_semaphore<1024>& s;
        ~Release() { s.release(); }
    } release{slots_};

    std::string lastError = "no attempt made";
    for (int attempt = 0; attempt <= options_.retries; ++attempt) {
        httplib::Client cli(base_);
        auto secs = std::chrono::duration_cast<std::chrono::seconds>(options_.timeout);
        auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(options_.timeout - secs);
        cli.set_connection_timeout(secs.count(), usecs.count());
        cli.set_read_timeout(secs.count(), usecs.count());
        cli.set_write_timeout(secs.count(), usecs.count());
        auto res = cli.Post(path_, body, "application/json");
        if (!res) {
            lastError = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status != 200) {
            lastError = "HTTP " + std::to_string(res->status);
            if (res->status < 500) break;
            continue;
        }
        try {
            return json::parse(res->body);
        } catch (const json::parse_error& e) {
            throw ProviderError("remote", std::string("malformed reply: ") + e.what());
        }
    }
    throw ProviderError("remote", std::string(task) + " failed: " + lastError);
}

std::vector<std::string> RemoteProvider::relevance(std::string_view chunk, const DatasetMeta& meta)
{
    return string_list(call("relevance", chunk, to_json(meta)), "columns");
}

std::string RemoteProvider::filter(std::string_view chunk, const DatasetMeta& meta)
{
    json r = call("filter", chunk, to_json(meta));
    if (!r.is_object() || !r.contains("query") || !r.at("query").is_string())
        throw ProviderError("remote", "reply lacks a 'query' string");
    return r.at("query").get<std::string>();
}

std::vector<std::string> RemoteProvider::time_columns(const std::vector<ColumnMeta>& columns)
{
    return string_list(call("time_columns", "", {{"columns", columns_json(columns)}}), "columns");
}

std::vector<RgbaImage> RemoteProvider::images_from_text(std::string_view keyword)
{
    json r = call("images", keyword, json::object());
    if (!r.is_object() || !r.contains("images") || !r.at("images").is_array())
        throw ProviderError("remote", "reply lacks an 'images' list");
    std::vector<RgbaImage> out;
    for (const auto& im : r.at("images")) {
        try {
            int w = im.at("width").get<int>(), h = im.at("height").get<int>();
            if (w <= 0 || h <= 0 || w > 4096 || h > 4096) throw ProviderError("remote", "bad image size");
            RgbaImage img(w, h);
            const auto& px = im.at("rgba");
            if (!px.is_array() || px.size() != img.pixels.size())
                throw ProviderError("remote", "image pixel count mismatch");
            for (std::size_t i = 0; i < px.size(); ++i) {
                int v = px[i].get<int>();
                if (v < 0 || v > 255) throw ProviderError("remote", "pixel value out of range");
                img.pixels[i] = static_cast<std::uint8_t>(v);
            }
            out.push_back(std::move(img));
        } catch (const json::exception& e) {
            throw ProviderError("remote", std::string("malformed image: ") + e.what());
        }
    }
    return out;
}

Embedding RemoteProvider::embed(std::string_view text)
{
    json r = call("embed", text, json::object());
    if (!r.is_object() || !r.contains("vector") || !r.at("vector").is_array() ||
        r.at("vector").size() != static_cast<std::size_t>(Embedding::RowsAtCompileTime))
        throw ProviderError("remote", "reply lacks a 256-number 'vector'");
    Embedding e;
    for (int i = 0; i < Embedding::RowsAtCompileTime; ++i) {
        if (!r.at("vector")[i].is_number()) throw ProviderError("remote", "non-numeric vector entry");
        e(i) = r.at("vector")[i].get<double>();
    }
    return e;
}

std::unique_ptr<ProviderSuite> make_provider(std::string_view which)
{
    RemoteOptions o = RemoteOptions::from_env();
    if (which == "fallback" || (which.empty() && o.url.empty())) return std::make_unique<FallbackProvider>();
    if (which == "remote" || which.empty()) {
        if (o.url.empty()) throw Error("provider.config", "remote provider needs INKLINE_PROVIDER_URL");
        return std::make_unique<RemoteProvider>(std::move(o));
    }
    throw Error("provider.config", "unknown provider: " + std::string(which), std::string(which));
}

} // namespace inkline::providers
