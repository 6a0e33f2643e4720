#include "inkline/service.hpp"

#include "inkline/error.hpp"

#include <httplib.h>

#include <cstdlib>
#include <thread>

namespace inkline::service {

using nlohmann::json;

json envelope_ok(json data) { return {{"ok", true}, {"data", std::move(data)}}; }

json envelope_error(const std::string& code, const std::string& message, const std::string& detail)
{
    return {{"ok", false}, {"error", {{"code", code}, {"message", message}, {"detail", detail}}}};
}

int status_for(const Error& e)
{
    if (e.code() == "not_found") return 404;
    if (dynamic_cast<const ProviderError*>(&e)) return 502;
    return 400;
}

namespace {

const json& need(const json& body, const char* key)
{
    if (!body.is_object() || !body.contains(key))
        throw Error("request.missing", std::string("missing field '") + key + "'", key);
    return body.at(key);
}

std::string need_string(const json& body, const char* key)
{
    const json& v = need(body, key);
    if (!v.is_string()) throw Error("request.type", std::string("field '") + key + "' must be a string", key);
    return v.get<std::string>();
}

json layer_summary(const document::Layer& l)
{
    json j = document::to_json(l);
    j.erase("frames");
    j["frameCount"] = l.frames.size();
    return j;
}

json doc_json(const document::Document& d) { return json::parse(document::serialize(d)); }

compose::GlyphMap glyphs_from_json(const json& j)
{
    compose::GlyphMap g;
    g.assetIds = need(j, "assetIds").get<std::map<std::string, std::string>>();
    g.glyphScale = j.value("glyphScale", g.glyphScale);
    return g;
}

document::Transform transform_from_json(const json& j)
{
    document::Transform t;
    t.tx = j.value("tx", 0.0);
    t.ty = j.value("ty", 0.0);
    t.rotationDeg = j.value("rotationDeg", 0.0);
    t.scale = j.value("scale", 1.0);
    return t;
}

} // namespace

Router::Router(Engine& engine) : engine_(engine)
{
    Engine& e = engine_;

    add("POST", "/datasets", [&e](const Params&, const Request&, const json& b) {
        std::string delim = b.value("delimiter", std::string(","));
        if (delim.size() != 1) throw Error("request.type", "delimiter must be one character", "delimiter");
        return to_json(e.ingest(need_string(b, "content"), delim[0]));
    });
    add("GET", "/datasets/([^/]+)/meta", [&e](const Params& p, const Request&, const json&) {
        return to_json(e.meta(p[0]));
    });

    add("POST", "/messages", [&e](const Params&, const Request&, const json& b) {
        std::optional<std::string> ds;
        if (b.contains("datasetId") && !b.at("datasetId").is_null()) ds = need_string(b, "datasetId");
        return to_json(e.create_message(need_string(b, "text"), ds));
    });
    add("GET", "/messages/([^/]+)", [&e](const Params& p, const Request&, const json&) {
        return to_json(e.message(p[0]));
    });
    add("POST", "/messages/([^/]+)/brush", [&e](const Params& p, const Request&, const json& b) {
        auto start = need(b, "start").get<std::size_t>();
        auto end = need(b, "end").get<std::size_t>();
        return to_json(e.brush(p[0], start, end, asset_kind_from_string(need_string(b, "kind"))));
    });
    add("GET", "/batches/([^/]+)", [&e](const Params& p, const Request&, const json&) {
        return to_json(e.batch(p[0]));
    });
    add("GET", "/chunks/([^/]+)/batches", [&e](const Params& p, const Request&, const json&) {
        return json(e.registry().chunk_links(p[0]));
    });

    add("POST", "/charts/render", [&e](const Params&, const Request&, const json& b) {
        return charts::to_json(e.render_chart(charts::chart_spec_from_json(need(b, "spec"))));
    });
    add("POST", "/charts/animate", [&e](const Params&, const Request&, const json& b) {
        return to_json(e.animate_chart(charts::chart_spec_from_json(need(b, "spec")), need_string(b, "column"),
                                       b.value("frameDelayMs", kDefaultFrameDelayMs)));
    });

    add("POST", "/filters/parse", [](const Params&, const Request&, const json& b) {
        filterql::FilterQuery q = filterql::parse_query(need_string(b, "text"));
        json preds = json::array();
        for (const auto& c : q.predicates) {
            json lit = std::holds_alternative<double>(c.literal) ? json(std::get<double>(c.literal))
                                                                 : json(std::get<std::string>(c.literal));
            preds.push_back({{"column", c.column}, {"op", filterql::to_string(c.op)}, {"literal", lit}});
        }
        json order = json::array();
        for (const auto& o : q.orderBy) order.push_back({{"column", o.column}, {"descending", o.descending}});
        return json{{"query", filterql::render(q)},
                    {"table", q.table},
                    {"predicates", preds},
                    {"orderBy", order},
                    {"limit", q.limit ? json(*q.limit) : json(nullptr)}};
    });
    add("POST", "/filters/apply", [&e](const Params&, const Request&, const json& b) {
        return filterql::to_json(e.apply_filter(need_string(b, "datasetId"), need_string(b, "text")));
    });

    add("GET", "/gallery/search", [&e](const Params&, const Request& r, const json&) {
        auto kindIt = r.query.find("kind");
        std::string kind = kindIt == r.query.end() ? "static" : kindIt->second;
        if (kind != "static" && kind != "animated")
            throw Error("request.type", "kind must be static or animated", kind);
        auto qIt = r.query.find("q");
        std::size_t k = kMaxBatchItems;
        if (auto kIt = r.query.find("k"); kIt != r.query.end()) {
            try {
                k = static_cast<std::size_t>(std::stoul(kIt->second));
            } catch (const std::exception&) {
                throw Error("request.type", "k must be a non-negative integer", "k");
            }
        }
        return to_json(e.search_gallery(kind == "static" ? gallery::GraphicKind::Static : gallery::GraphicKind::Animated,
                                        qIt == r.query.end() ? "" : qIt->second, k));
    });
    add("GET", "/gallery/assets/([^/]+)", [&e](const Params& p, const Request&, const json&) {
        return gallery::to_json(e.graphic(p[0]));
    });

    add("POST", "/palettes/from-text", [&e](const Params&, const Request&, const json& b) {
        json out = json::array();
        for (const auto& p : chroma::palette_from_text(need_string(b, "text"), e.provider())) out.push_back(chroma::to_json(p));
        return out;
    });

    add("POST", "/compose/recolor", [&e](const Params&, const Request&, const json& b) {
        chroma::Palette target = chroma::palette_from_json(need(b, "palette"));
        std::optional<SchemeKind> scheme;
        if (b.contains("scheme")) scheme = scheme_kind_from_string(need_string(b, "scheme"));
        if (b.contains("spec")) {
            charts::ChartSpec spec = charts::chart_spec_from_json(b.at("spec"));
            charts::ChartImage img = e.render_chart(spec);
            auto r = compose::apply_recolor(img, target, scheme.value_or(spec.colorScheme.kind));
            return json{{"image", charts::to_json(img)}, {"mapping", compose::mapping_to_json(r.mapping)},
                        {"scheme", to_string(r.scheme)}};
        }
        if (b.contains("animation")) {
            AnimatedAsset a = animated_asset_from_json(b.at("animation"));
            auto r = compose::apply_recolor(a, target, scheme);
            return json{{"animation", to_json(a)}, {"mapping", compose::mapping_to_json(r.mapping)},
                        {"scheme", to_string(r.scheme)}};
        }
        svg::Element g = svg::parse(need_string(b, "svg"));
        auto r = compose::apply_recolor(g, target);
        return json{{"svg", svg::serialize(g)}, {"mapping", compose::mapping_to_json(r.mapping)},
                    {"scheme", to_string(r.scheme)}};
    });
    add("POST", "/compose/dod", [&e](const Params&, const Request&, const json& b) {
        return charts::to_json(e.make_dod(charts::chart_spec_from_json(need(b, "spec")), glyphs_from_json(need(b, "glyphs"))));
    });
    add("POST", "/compose/highlight", [&e](const Params&, const Request&, const json& b) {
        charts::ChartSpec spec = charts::chart_spec_from_json(need(b, "spec"));
        auto ds = e.dataset(spec.datasetId);
        charts::ChartImage img = charts::render_chart(spec, *ds);
        filterql::FilteredTable t = filterql::execute(filterql::parse_query(need_string(b, "query")), *ds);
        auto r = compose::highlight(spec, img, *ds, t, b.value("chunkText", std::string()));
        if (auto* o = std::get_if<compose::HighlightOverlay>(&r))
            return json{{"overlay", compose::to_json(*o)}, {"svg", svg::serialize(compose::render_overlay(*o, img))}};
        return json{{"image", charts::to_json(std::get<charts::ChartImage>(r))}};
    });
    add("POST", "/compose/sync", [](const Params&, const Request&, const json& b) {
        auto [a, c] = compose::sync(animated_asset_from_json(need(b, "a")), animated_asset_from_json(need(b, "b")));
        return json{{"a", to_json(a)}, {"b", to_json(c)}};
    });

    add("GET", "/documents", [&e](const Params&, const Request&, const json&) { return json(e.list_documents()); });
    add("POST", "/documents", [&e](const Params&, const Request&, const json& b) {
        return doc_json(e.create_document(b.value("id", std::string()), b.value("width", 960.0), b.value("height", 720.0)));
    });
    add("GET", "/documents/([^/]+)", [&e](const Params& p, const Request&, const json&) {
        return doc_json(e.get_document(p[0]));
    });
    add("PUT", "/documents/([^/]+)", [&e](const Params& p, const Request&, const json& b) {
        document::Document d = document::deserialize(need(b, "document").dump());
        if (d.id != p[0]) throw Error("request.id", "document id does not match the path", d.id);
        e.put_document(d);
        return doc_json(d);
    });
    add("DELETE", "/documents/([^/]+)", [&e](const Params& p, const Request&, const json&) {
        e.delete_document(p[0]);
        return json{{"deleted", p[0]}};
    });
    add("POST", "/documents/([^/]+)/layers", [&e](const Params& p, const Request&, const json& b) {
        std::string type = need_string(b, "type");
        document::Layer l;
        if (type == "chart") {
            l = e.chart_layer(charts::chart_spec_from_json(need(b, "spec")));
        } else if (type == "animated-chart") {
            l = e.animated_chart_layer(charts::chart_spec_from_json(need(b, "spec")), need_string(b, "column"),
                                       b.value("frameDelayMs", kDefaultFrameDelayMs));
        } else if (type == "graphic") {
            l = e.graphic_layer(need_string(b, "assetId"));
        } else if (type == "dod") {
            l = e.dod_layer(charts::chart_spec_from_json(need(b, "spec")), glyphs_from_json(need(b, "glyphs")));
        } else if (type == "text") {
            const json& t = need(b, "text");
            document::TextContent tc;
            tc.content = need_string(t, "content");
            tc.fontFamily = t.value("fontFamily", tc.fontFamily);
            tc.sizePt = t.value("sizePt", tc.sizePt);
            if (t.contains("color")) tc.color = parse_color(need_string(t, "color")).value_or(tc.color);
            l = Engine::text_layer(tc);
        } else if (type == "annotation") {
            std::optional<std::string> dep;
            if (b.contains("dependsOn") && !b.at("dependsOn").is_null()) dep = need_string(b, "dependsOn");
            l = Engine::annotation_layer(compose::annotation_from_json(need(b, "annotation")), dep);
        } else {
            throw Error("request.type", "unknown layer type: " + type, type);
        }
        std::string id = e.add_layer(p[0], std::move(l));
        if (b.contains("transform")) {
            document::Transform t = transform_from_json(b.at("transform"));
            e.mutate(p[0], [&](document::Document& d) { document::transform(d, id, t); });
        }
        return layer_summary(e.get_document(p[0]).layer(id));
    });
    add("GET", "/documents/([^/]+)/layers/([^/]+)", [&e](const Params& p, const Request&, const json&) {
        return document::to_json(e.get_document(p[0]).layer(p[1]));
    });
    add("DELETE", "/documents/([^/]+)/layers/([^/]+)", [&e](const Params& p, const Request&, const json&) {
        return doc_json(e.mutate(p[0], [&](document::Document& d) { document::remove_layer(d, p[1]); }));
    });
    add("POST", "/documents/([^/]+)/layers/([^/]+)/config", [&e](const Params& p, const Request&, const json& b) {
        auto field = document::config_field_from_string(need_string(b, "field"));
        json value = need(b, "value");
        auto render = e.renderer();
        document::Document d =
            e.mutate(p[0], [&](document::Document& doc) { document::set_config(doc, p[1], field, value, render); });
        return layer_summary(d.layer(p[1]));
    });
    add("POST", "/documents/([^/]+)/layers/([^/]+)/transform", [&e](const Params& p, const Request&, const json& b) {
        document::Transform t = transform_from_json(b);
        return layer_summary(
            e.mutate(p[0], [&](document::Document& d) { document::transform(d, p[1], t); }).layer(p[1]));
    });
    add("POST", "/documents/([^/]+)/layers/([^/]+)/forward", [&e](const Params& p, const Request&, const json&) {
        return doc_json(e.mutate(p[0], [&](document::Document& d) { document::bring_forward(d, p[1]); }));
    });
    add("POST", "/documents/([^/]+)/layers/([^/]+)/backward", [&e](const Params& p, const Request&, const json&) {
        return doc_json(e.mutate(p[0], [&](document::Document& d) { document::send_backward(d, p[1]); }));
    });
    add("POST", "/documents/([^/]+)/layers/([^/]+)/lock", [&e](const Params& p, const Request&, const json& b) {
        bool locked = b.value("locked", true);
        return layer_summary(
            e.mutate(p[0], [&](document::Document& d) { document::set_locked(d, p[1], locked); }).layer(p[1]));
    });
    add("POST", "/documents/([^/]+)/layers/([^/]+)/recolor", [&e](const Params& p, const Request&, const json& b) {
        auto r = e.recolor(p[0], p[1], chroma::palette_from_json(need(b, "palette")));
        return json{{"mapping", compose::mapping_to_json(r.mapping)}, {"scheme", to_string(r.scheme)}};
    });
    add("POST", "/documents/([^/]+)/layers/([^/]+)/highlight", [&e](const Params& p, const Request&, const json& b) {
        document::Document d = e.get_document(p[0]);
        const document::Layer& base = d.layer(p[1]);
        if (!base.chartSpec) throw Error("compose.highlight", "highlight needs a chart layer", p[1]);
        auto t = e.apply_filter(base.chartSpec->datasetId, need_string(b, "query"));
        std::string id = e.highlight(p[0], p[1], t, b.value("chunkText", std::string()));
        return json{{"layerId", id}};
    });
    add("POST", "/documents/([^/]+)/sync", [&e](const Params& p, const Request&, const json& b) {
        e.sync(p[0], need_string(b, "a"), need_string(b, "b"));
        return doc_json(e.get_document(p[0]));
    });
    add("POST", "/documents/([^/]+)/reset-animations", [&e](const Params& p, const Request&, const json& b) {
        std::int64_t now = b.value("nowMs", std::int64_t(0));
        return doc_json(e.mutate(p[0], [&](document::Document& d) { document::reset_animations(d, now); }));
    });
    add("POST", "/documents/([^/]+)/undo", [&e](const Params& p, const Request&, const json&) {
        return doc_json(e.undo(p[0]));
    });
    add("POST", "/documents/([^/]+)/redo", [&e](const Params& p, const Request&, const json&) {
        return doc_json(e.redo(p[0]));
    });
    add("POST", "/documents/([^/]+)/export", [&e](const Params& p, const Request&, const json& b) {
        ExportResult r = e.export_document(p[0], export_mode_from_string(b.value("mode", std::string("svg"))));
        json files = json::array();
        for (const auto& f : r.files) files.push_back("/files/" + f.generic_string());
        json out = {{"files", files}};
        if (r.bundle) {
            out["manifest"] = r.bundle->manifest;
            out["truncated"] = r.bundle->truncated;
            out["cycleMs"] = r.bundle->cycleMs;
        } else {
            out["svg"] = r.staticSvg;
        }
        return out;
    });
}

void Router::add(std::string method, std::string pattern, Handler h)
{
    std::regex re("^" + pattern + "$");
    routes_.push_back({std::move(method), std::move(pattern), std::move(re), std::move(h)});
}

std::vector<std::string> Router::route_table() const
{
    std::vector<std::string> out;
    for (const auto& r : routes_) out.push_back(r.method + " " + r.pattern);
    return out;
}

Response Router::handle(const Request& req) const
{
    Response res;
    auto fail = [&](int status, const std::string& code, const std::string& msg, const std::string& detail) {
        res.status = status;
        res.body = envelope_error(code, msg, detail).dump();
        return res;
    };
    bool pathMatched = false;
    for (const auto& route : routes_) {
        std::smatch m;
        if (!std::regex_match(req.path, m, route.re)) continue;
        pathMatched = true;
        if (route.method != req.method) continue;
        Params params;
        for (std::size_t i = 1; i < m.size(); ++i) params.push_back(m[i].str());
        try {
            json body = json::object();
            if (!req.body.empty()) {
                try {
                    body = json::parse(req.body);
                } catch (const json::parse_error& e) {
                    return fail(400, "request.parse", "malformed request body", std::to_string(e.byte));
                }
            }
            res.body = envelope_ok(route.handler(params, req, body)).dump();
            res.status = 200;
            return res;
        } catch (const Error& e) {
            return fail(status_for(e), e.code(), e.what(), e.detail());
        } catch (const json::exception& e) {
            return fail(400, "request.malformed", e.what(), "");
        } catch (const std::exception& e) {
            return fail(500, "internal", e.what(), "");
        }
    }
    if (pathMatched) return fail(405, "request.method", "method not allowed", req.method + " " + req.path);
    return fail(404, "not_found", "no route for " + req.path, req.path);
}

ServerOptions ServerOptions::from_env()
{
    ServerOptions o;
    if (const char* c = std::getenv("INKLINE_CORS_ORIGIN"); c && *c) o.corsOrigin = c;
    return o;
}

struct Server::Impl {
    Engine& engine;
    ServerOptions options;
    Router router;
    httplib::Server http;
    std::thread thread;
    int port = 0;

    Impl(Engine& e, ServerOptions o) : engine(e), options(std::move(o)), router(e)
    {
        auto dispatch = [this](const httplib::Request& hr, httplib::Response& out) {
            Request r;
            r.method = hr.method;
            r.path = hr.path;
            for (const auto& [k, v] : hr.params) r.query.emplace(k, v);
            r.body = hr.body;
            Response res = router.handle(r);
            out.status = res.status;
            out.set_content(res.body, res.contentType);
        };
        const char* any = R"(/(?!files/).*)";
        http.Get(any, dispatch);
        http.Post(any, dispatch);
        http.Put(any, dispatch);
        http.Delete(any, dispatch);
        http.Options(R"(.*)", [](const httplib::Request&, httplib::Response& out) { out.status = 204; });
        http.set_mount_point("/files", engine.exports_dir().string());
        http.set_default_headers({{"Access-Control-Allow-Origin", options.corsOrigin},
                                  {"Access-Control-Allow-Methods", "GET, POST, PUT, DELETE, OPTIONS"},
                                  {"Access-Control-Allow-Headers", "Content-Type"}});
    }
};

Server::Server(Engine& engine, ServerOptions options) : impl_(std::make_unique<Impl>(engine, std::move(options))) {}

Server::~Server() { stop(); }

int Server::start()
{
    if (impl_->options.port == 0) {
        impl_->port = impl_->http.bind_to_any_port(impl_->options.host);
    } else {
        impl_->port = impl_->http.bind_to_port(impl_->options.host, impl_->options.port) ? impl_->options.port : -1;
    }
    if (impl_->port <= 0) throw Error("service.bind", "could not bind " + impl_->options.host);
    impl_->thread = std::thread([this] { impl_->http.listen_after_bind(); });
    impl_->http.wait_until_ready();
    return impl_->port;
}

void Server::run()
{
    if (!impl_->http.listen(impl_->options.host, impl_->options.port))
        throw Error("service.bind", "could not listen on " + impl_->options.host + ":" + std::to_string(impl_->options.port));
}

void Server::stop()
{
    if (!impl_) return;
    impl_->http.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

} // namespace inkline::service
