#include "inkline/recipe.hpp"

#include "inkline/engine.hpp"
#include "inkline/error.hpp"
#include "inkline/io.hpp"
#include "inkline/providers.hpp"
#include "inkline/text.hpp"

#include <map>

namespace inkline::recipe {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::pair<std::size_t, std::size_t> span_of(const json& brush, const std::string& message)
{
    if (brush.is_string()) {
        std::string phrase = brush.get<std::string>();
        auto pos = message.find(phrase);
        if (phrase.empty() || pos == std::string::npos)
            throw Error("recipe.brush", "phrase not found in the message: " + phrase, phrase);
        std::size_t start = text::codepoint_length(std::string_view(message).substr(0, pos));
        return {start, start + text::codepoint_length(phrase)};
    }
    return {brush.at("start").get<std::size_t>(), brush.at("end").get<std::size_t>()};
}

document::Transform place_of(const json& p)
{
    document::Transform t;
    t.tx = p.value("tx", 0.0);
    t.ty = p.value("ty", 0.0);
    t.rotationDeg = p.value("rotationDeg", 0.0);
    t.scale = p.value("scale", 1.0);
    return t;
}

json batch_summary(const RecommendationBatch& b, const std::string& chunk)
{
    json items = json::array();
    for (const auto& it : b.items) items.push_back({{"id", it.id}, {"label", it.label}, {"score", it.score}});
    return {{"id", b.id}, {"kind", to_string(b.kind)}, {"chunk", chunk}, {"items", items}};
}

json error_json(const std::exception& e)
{
    if (const auto* ie = dynamic_cast<const Error*>(&e))
        return {{"code", ie->code()}, {"message", ie->what()}, {"detail", ie->detail()}};
    return {{"code", "internal"}, {"message", e.what()}, {"detail", ""}};
}

const json& step_layer_ref(const std::map<std::size_t, std::string>& layers, const json& ref, std::string& out)
{
    auto idx = ref.get<std::size_t>();
    auto it = layers.find(idx);
    if (it == layers.end())
        throw Error("recipe.reference", "step " + std::to_string(idx) + " produced no layer", std::to_string(idx));
    out = it->second;
    return ref;
}

} // namespace

Result run_recipe(const Options& options)
{
    Result result;
    json& report = result.report;
    report = {{"recipe", options.recipe.filename().string()}, {"steps", json::array()}, {"outputs", json::array()}};
    std::optional<std::size_t> current;

    auto write_report = [&]() {
        report["ok"] = result.ok;
        io::write_text(options.out / "report.json", report.dump(2) + "\n");
    };

    try {
        fs::create_directories(options.out);
        json r;
        try {
            r = json::parse(io::read_text(options.recipe));
        } catch (const json::parse_error& e) {
            throw Error("recipe.parse", std::string("malformed recipe: ") + e.what(), std::to_string(e.byte));
        }
        fs::path base = options.recipe.parent_path();
        if (options.exportMode != "svg" && options.exportMode != "frames" && options.exportMode != "both")
            throw Error("recipe.export", "export mode must be svg, frames or both", options.exportMode);

        fs::path state = options.out / "state";
        fs::remove_all(state);
        Engine engine(state, providers::make_provider(options.provider));
        report["provider"] = engine.provider().name();

        fs::path dataPath = options.dataOverride ? *options.dataOverride : base / r.at("dataset").get<std::string>();
        DatasetMeta meta = engine.ingest(io::read_text(dataPath));
        report["datasetId"] = meta.datasetId;
        if (r.contains("gallery")) {
            auto rep = engine.index_gallery(base / r.at("gallery").get<std::string>());
            report["gallery"] = {{"indexed", rep.indexed}, {"skipped", rep.skipped.size()}};
        }

        std::string message = r.at("message").get<std::string>();
        KeyMessage msg = engine.create_message(message, meta.datasetId);
        report["messageId"] = msg.id;

        json canvas = r.value("canvas", json::object());
        document::Document doc =
            engine.create_document("recipe", canvas.value("width", 960.0), canvas.value("height", 720.0));
        if (canvas.contains("background")) {
            auto bg = parse_color(canvas.at("background").get<std::string>());
            engine.mutate(doc.id, [&](document::Document& d) { d.background = bg; });
        }
        report["documentId"] = doc.id;

        std::map<std::size_t, std::string> stepLayers;
        const json steps = r.value("steps", json::array());
        auto render = engine.renderer();
        for (std::size_t i = 0; i < steps.size(); ++i) {
            current = i;
            const json& s = steps[i];
            json sr = {{"index", i}};
            std::optional<std::string> layerId;

            if (s.contains("text")) {
                const json& t = s.at("text");
                document::TextContent tc;
                tc.content = t.at("content").get<std::string>();
                tc.fontFamily = t.value("fontFamily", tc.fontFamily);
                tc.sizePt = t.value("sizePt", tc.sizePt);
                if (t.contains("color")) tc.color = parse_color(t.at("color").get<std::string>()).value_or(tc.color);
                layerId = engine.add_layer(doc.id, Engine::text_layer(tc));
            } else {
                auto [start, end] = span_of(s.at("brush"), message);
                AssetKind kind = asset_kind_from_string(s.at("kind").get<std::string>());
                RecommendationBatch batch = engine.brush(msg.id, start, end, kind);
                sr["batch"] = batch_summary(batch, engine.registry().chunk(batch.sourceChunkId).text);
                report["steps"].push_back(sr);

                std::size_t pick = 0;
                if (s.contains("pickId")) {
                    std::string want = s.at("pickId").get<std::string>();
                    auto it = std::find_if(batch.items.begin(), batch.items.end(),
                                           [&](const AssetDescriptor& d) { return d.id == want; });
                    if (it == batch.items.end()) throw Error("recipe.pick", "no item " + want + " in the batch", want);
                    pick = static_cast<std::size_t>(it - batch.items.begin());
                } else {
                    pick = s.value("pick", std::size_t(0));
                }
                if (pick >= batch.items.size())
                    throw Error("recipe.pick",
                                "pick index " + std::to_string(pick) + " is out of range for a batch of " +
                                    std::to_string(batch.items.size()) + " items",
                                std::to_string(pick));
                const AssetDescriptor& item = batch.items[pick];
                sr["pick"] = pick;
                sr["pickedId"] = item.id;
                report["steps"].back() = sr;

                json merge = s.value("merge", json::object());
                std::string op = merge.value("op", std::string());
                switch (kind) {
                case AssetKind::Visualization: {
                    charts::ChartSpec spec = charts::chart_spec_from_json(item.body);
                    if (op == "dod") {
                        compose::GlyphMap g;
                        g.assetIds = merge.at("glyphs").get<std::map<std::string, std::string>>();
                        g.glyphScale = merge.value("glyphScale", g.glyphScale);
                        layerId = engine.add_layer(doc.id, engine.dod_layer(spec, g));
                    } else if (op.empty()) {
                        layerId = engine.add_layer(doc.id, engine.chart_layer(spec));
                    } else {
                        throw Error("recipe.merge", "merge " + op + " does not apply to charts", op);
                    }
                    break;
                }
                case AssetKind::StaticGraphic:
                case AssetKind::AnimatedGraphic:
                    layerId = engine.add_layer(doc.id, engine.graphic_layer(item.body.at("assetId").get<std::string>()));
                    if (op == "sync") {
                        std::string other;
                        step_layer_ref(stepLayers, merge.at("with"), other);
                        engine.sync(doc.id, other, *layerId);
                    } else if (!op.empty()) {
                        throw Error("recipe.merge", "merge " + op + " does not apply to graphics", op);
                    }
                    break;
                case AssetKind::ColorPalette: {
                    chroma::Palette palette = chroma::palette_from_json(item.body);
                    if (op == "recolor") {
                        json mappings = json::array();
                        for (const auto& ref : merge.at("targets")) {
                            std::string target;
                            step_layer_ref(stepLayers, ref, target);
                            auto rc = engine.recolor(doc.id, target, palette);
                            mappings.push_back({{"layer", target},
                                                {"scheme", to_string(rc.scheme)},
                                                {"mapping", compose::mapping_to_json(rc.mapping)}});
                        }
                        sr["recolor"] = mappings;
                    } else if (!op.empty()) {
                        throw Error("recipe.merge", "merge " + op + " does not apply to palettes", op);
                    }
                    break;
                }
                case AssetKind::DataFilter: {
                    filterql::FilteredTable t;
                    t.datasetId = item.body.at("datasetId").get<std::string>();
                    t.rowIndices = item.body.at("rowIndices").get<std::vector<std::size_t>>();
                    t.query = filterql::parse_query(item.body.at("query").get<std::string>());
                    if (op == "highlight") {
                        std::string target;
                        step_layer_ref(stepLayers, merge.at("target"), target);
                        std::string produced =
                            engine.highlight(doc.id, target, t, engine.registry().chunk(batch.sourceChunkId).text);
                        if (produced != target) layerId = produced;
                        sr["highlight"] = produced;
                    } else if (!op.empty()) {
                        throw Error("recipe.merge", "merge " + op + " does not apply to filters", op);
                    }
                    break;
                }
                }
                report["steps"].back() = sr;
            }

            if (layerId) {
                for (const auto& c : s.value("config", json::array())) {
                    auto field = document::config_field_from_string(c.at("field").get<std::string>());
                    json value = c.at("value");
                    engine.mutate(doc.id, [&](document::Document& d) {
                        document::set_config(d, *layerId, field, value, render);
                    });
                }
                if (s.contains("place")) {
                    document::Transform t = place_of(s.at("place"));
                    engine.mutate(doc.id, [&](document::Document& d) { document::transform(d, *layerId, t); });
                }
                stepLayers[i] = *layerId;
                sr["layerId"] = *layerId;
            }
            if (s.contains("text")) report["steps"].push_back(sr);
            else report["steps"].back() = sr;
        }
        current.reset();

        doc = engine.mutate(doc.id, [](document::Document& d) { document::reset_animations(d, 0); });
        json layers = json::array();
        for (const auto& l : doc.layers) {
            json lj = {{"id", l.id}, {"kind", document::to_string(l.kind)}, {"zOrder", l.zOrder},
                       {"frames", l.frames.size()}};
            if (document::is_animated(l.kind)) {
                lj["frameDelayMs"] = l.config.frameDelayMs;
                lj["cycleMs"] = static_cast<std::int64_t>(l.frames.size()) * l.config.frameDelayMs;
            }
            layers.push_back(lj);
        }
        report["layers"] = layers;
        io::write_text(options.out / "document.json", document::serialize(doc));
        report["outputs"].push_back("document.json");

        if (options.exportMode == "svg" || options.exportMode == "both") {
            ExportResult ex = engine.export_document(doc.id, ExportMode::StaticVector);
            io::write_text(options.out / "infographic.svg", ex.staticSvg);
            report["outputs"].push_back("infographic.svg");
        }
        if (options.exportMode == "frames" || options.exportMode == "both") {
            ExportResult ex = engine.export_document(doc.id, ExportMode::FrameBundle);
            io::write_text(options.out / "frames.zip", document::zip_store(ex.bundle->files));
            report["outputs"].push_back("frames.zip");
            report["bundle"] = {{"frames", ex.bundle->startsMs.size()},
                                {"cycleMs", ex.bundle->cycleMs},
                                {"truncated", ex.bundle->truncated}};
        }
    } catch (const std::exception& e) {
        result.ok = false;
        result.failedStep = current;
        result.error = e.what();
        report["error"] = error_json(e);
        report["failedStep"] = current ? json(*current) : json("export");
        if (!current && !report.contains("documentId")) report["failedStep"] = "setup";
    }
    try {
        write_report();
    } catch (const std::exception& e) {
        if (result.ok) {
            result.ok = false;
            result.error = e.what();
        }
    }
    return result;
}

} // namespace inkline::recipe
