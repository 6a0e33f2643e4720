#include "inkline/engine.hpp"

#include "inkline/error.hpp"
#include "inkline/io.hpp"
#include "inkline/providers.hpp"
#include "inkline/text.hpp"

#include <algorithm>
#include <set>

namespace inkline {

namespace fs = std::filesystem;
using nlohmann::json;

ExportMode export_mode_from_string(std::string_view s)
{
    if (s == "svg" || s == "static" || s == "static-vector") return ExportMode::StaticVector;
    if (s == "frames" || s == "frame-bundle") return ExportMode::FrameBundle;
    throw Error("document.export", "unknown export mode: " + std::string(s), std::string(s));
}

namespace {

bool valid_id(const std::string& id)
{
    if (id.empty() || id.size() > 64) return false;
    return std::all_of(id.begin(), id.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' || c == '_';
    });
}

void check_id(const std::string& id, const char* what)
{
    if (!valid_id(id)) throw Error("request.id", std::string("invalid ") + what + " id", id);
}

} // namespace

Engine::Engine(fs::path root, std::unique_ptr<ProviderSuite> provider)
    : root_(std::move(root)), provider_(std::move(provider))
{
    if (!provider_) provider_ = std::make_unique<providers::FallbackProvider>();
    for (const char* d : {"datasets", "gallery", "documents", "exports"}) fs::create_directories(root_ / d);
    if (fs::exists(root_ / "gallery" / "index.json")) gallery_ = gallery::load_index(root_ / "gallery" / "index.json");
}

DatasetMeta Engine::ingest(std::string_view content, char delimiter)
{
    Dataset ds = ingest_tabular(content, delimiter);
    std::string digest = text::hex64(text::fnv1a64(content, text::fnv1a64(std::string(1, delimiter))));
    ds.id = "ds-" + digest;
    std::unique_lock lock(mutex_);
    if (auto it = datasets_.find(ds.id); it != datasets_.end()) return extract_meta(*it->second);
    if (!fs::exists(root_ / "datasets" / (ds.id + ".schema.json"))) save_dataset(ds, root_ / "datasets");
    auto shared = std::make_shared<const Dataset>(std::move(ds));
    datasets_[shared->id] = shared;
    return extract_meta(*shared);
}

std::shared_ptr<const Dataset> Engine::dataset(const std::string& id) const
{
    {
        std::shared_lock lock(mutex_);
        if (auto it = datasets_.find(id); it != datasets_.end()) return it->second;
    }
    if (!valid_id(id) || !fs::exists(root_ / "datasets" / (id + ".schema.json"))) throw NotFound("dataset", id);
    auto shared = std::make_shared<const Dataset>(load_dataset(root_ / "datasets", id));
    std::unique_lock lock(mutex_);
    return datasets_.emplace(id, shared).first->second;
}

DatasetMeta Engine::meta(const std::string& id) const { return extract_meta(*dataset(id)); }

KeyMessage Engine::create_message(std::string text, std::optional<std::string> datasetId)
{
    if (datasetId) dataset(*datasetId);
    return registry_.create_message(std::move(text), std::move(datasetId));
}

RecommendationBatch Engine::brush(const std::string& messageId, std::size_t start, std::size_t end, AssetKind kind)
{
    KeyMessage msg = registry_.message(messageId);
    auto needDataset = [&]() {
        if (!msg.datasetId) throw Error("intent.no_dataset", "the message has no dataset attached", messageId);
        return dataset(*msg.datasetId);
    };
    std::shared_ptr<const Dataset> ds;
    if (kind == AssetKind::Visualization || kind == AssetKind::DataFilter) ds = needDataset();

    AssetRequest req = registry_.brush(messageId, start, end, kind);
    std::string chunk = registry_.chunk(req.chunkId).text;

    RecommendationBatch batch;
    switch (kind) {
    case AssetKind::Visualization: {
        DatasetMeta m = extract_meta(*ds);
        auto relevant = relevant_columns(chunk, m, *provider_);
        batch = charts::rank_charts(charts::enumerate_charts(relevant, m), relevant);
        break;
    }
    case AssetKind::DataFilter: {
        DatasetMeta m = extract_meta(*ds);
        filterql::FilterQuery q = filterql::generate_filter(chunk, m, *provider_);
        filterql::FilteredTable t = filterql::execute(q, *ds);
        AssetDescriptor d;
        d.id = "filter-1";
        d.kind = kind;
        d.score = 1;
        d.label = filterql::render(q);
        d.body = filterql::to_json(t);
        batch.items.push_back(std::move(d));
        break;
    }
    case AssetKind::StaticGraphic:
        batch = search_gallery(gallery::GraphicKind::Static, chunk);
        break;
    case AssetKind::AnimatedGraphic:
        batch = search_gallery(gallery::GraphicKind::Animated, chunk);
        break;
    case AssetKind::ColorPalette: {
        auto palettes = chroma::palette_from_text(chunk, *provider_);
        std::size_t n = std::min(palettes.size(), kMaxBatchItems);
        for (std::size_t i = 0; i < n; ++i) {
            AssetDescriptor d;
            d.id = "palette-" + std::to_string(i + 1);
            d.kind = kind;
            d.score = static_cast<double>(n - i) / static_cast<double>(n);
            d.label = palettes[i].label;
            d.body = chroma::to_json(palettes[i]);
            batch.items.push_back(std::move(d));
        }
        break;
    }
    }
    batch.kind = kind;
    batch.requestId = req.id;
    batch.sourceChunkId = req.chunkId;
    return registry_.attach_batch(std::move(batch));
}

gallery::IndexReport Engine::index_gallery(const fs::path& manifest)
{
    gallery::IndexReport report;
    gallery::Embedder embed = [this](std::string_view t) { return provider_->embed(t); };
    auto index = gallery::index_gallery(manifest, embed, provider_->name(), &report);
    set_gallery(std::move(index));
    return report;
}

void Engine::set_gallery(gallery::GalleryIndex index)
{
    gallery::save_index(index, root_ / "gallery" / "index.json");
    std::unique_lock lock(mutex_);
    gallery_ = std::move(index);
}

RecommendationBatch Engine::search_gallery(gallery::GraphicKind kind, std::string_view query, std::size_t k) const
{
    gallery::Embedder embed = [this](std::string_view t) { return provider_->embed(t); };
    std::shared_lock lock(mutex_);
    return kind == gallery::GraphicKind::Static ? gallery::search_static(query, gallery_, embed, k)
                                                : gallery::search_animated(query, gallery_, embed, k);
}

gallery::GraphicAsset Engine::graphic(const std::string& id) const
{
    std::shared_lock lock(mutex_);
    const gallery::GraphicAsset* a = gallery_.find(id);
    if (!a) throw NotFound("graphic asset", id);
    return *a;
}

compose::GlyphResolver Engine::glyph_resolver() const
{
    return [this](const std::string& id) {
        gallery::GraphicAsset a = graphic(id);
        return a.kind == gallery::GraphicKind::Static ? a.image : a.animation.frames.front();
    };
}

charts::ChartImage Engine::render_chart(const charts::ChartSpec& spec) const
{
    return charts::render_chart(spec, *dataset(spec.datasetId));
}

AnimatedAsset Engine::animate_chart(const charts::ChartSpec& spec, const std::string& column, int frameDelayMs) const
{
    return charts::animate_chart(spec, *dataset(spec.datasetId), column, frameDelayMs);
}

filterql::FilteredTable Engine::apply_filter(const std::string& datasetId, std::string_view queryText) const
{
    return filterql::execute(filterql::parse_query(queryText), *dataset(datasetId));
}

charts::ChartImage Engine::make_dod(const charts::ChartSpec& spec, const compose::GlyphMap& glyphs) const
{
    return compose::make_dod(spec, render_chart(spec), glyphs, glyph_resolver());
}

document::Layer Engine::chart_layer(const charts::ChartSpec& spec) const
{
    document::Layer l;
    l.kind = document::LayerKind::StaticChart;
    l.assetRef = "chart:" + spec.datasetId;
    l.chartSpec = spec;
    l.frames = {render_chart(spec).svg};
    return l;
}

document::Layer Engine::animated_chart_layer(const charts::ChartSpec& spec, const std::string& column,
                                             int frameDelayMs) const
{
    AnimatedAsset a = animate_chart(spec, column, frameDelayMs);
    document::Layer l;
    l.kind = document::LayerKind::AnimatedChart;
    l.assetRef = "chart:" + spec.datasetId;
    l.chartSpec = spec;
    l.frames = std::move(a.frames);
    l.frameKeys = std::move(a.frameKeys);
    l.config.animateColumn = column;
    l.config.frameDelayMs = a.frameDelayMs;
    return l;
}

document::Layer Engine::graphic_layer(const std::string& assetId) const
{
    gallery::GraphicAsset a = graphic(assetId);
    document::Layer l;
    l.assetRef = a.id;
    if (a.kind == gallery::GraphicKind::Static) {
        l.kind = document::LayerKind::StaticGraphic;
        l.frames = {std::move(a.image)};
    } else {
        l.kind = document::LayerKind::AnimatedGraphic;
        l.config.frameDelayMs = a.animation.frameDelayMs;
        l.frames = std::move(a.animation.frames);
        l.frameKeys = std::move(a.animation.frameKeys);
    }
    return l;
}

document::Layer Engine::dod_layer(const charts::ChartSpec& spec, const compose::GlyphMap& glyphs) const
{
    document::Layer l;
    l.kind = document::LayerKind::Dod;
    l.assetRef = "chart:" + spec.datasetId;
    l.chartSpec = spec;
    l.glyphs = glyphs;
    l.frames = {make_dod(spec, glyphs).svg};
    return l;
}

document::Layer Engine::text_layer(document::TextContent text)
{
    document::Layer l;
    l.kind = document::LayerKind::Text;
    l.assetRef = "text";
    l.text = std::move(text);
    return l;
}

document::Layer Engine::annotation_layer(compose::Annotation annotation, std::optional<std::string> dependsOn)
{
    document::Layer l;
    l.kind = document::LayerKind::AnnotationLine;
    l.assetRef = "annotation";
    l.annotation = std::move(annotation);
    l.dependsOn = std::move(dependsOn);
    return l;
}

document::LayerRenderer Engine::renderer() const
{
    return [this](document::Layer& l) {
        if (!l.chartSpec) return;
        auto ds = dataset(l.chartSpec->datasetId);
        document::chart_renderer(*ds, glyph_resolver())(l);
    };
}

std::shared_ptr<Engine::DocSlot> Engine::slot(const std::string& id, bool create) const
{
    check_id(id, "document");
    {
        std::shared_lock lock(mutex_);
        if (auto it = docs_.find(id); it != docs_.end()) return it->second;
    }
    fs::path file = root_ / "documents" / (id + ".json");
    if (!create && !fs::exists(file)) throw NotFound("document", id);
    std::unique_lock lock(mutex_);
    auto& s = docs_[id];
    if (!s) s = std::make_shared<DocSlot>();
    return s;
}

void Engine::persist(const document::Document& doc) const
{
    io::write_text(root_ / "documents" / (doc.id + ".json"), document::serialize(doc));
}

namespace {

// Loads the slot's document from disk on first use. Caller holds the slot lock.
template <typename Slot>
void ensure_loaded(Slot& s, const fs::path& file)
{
    if (s.loaded) return;
    s.doc = document::deserialize(io::read_text(file));
    s.loaded = true;
}

} // namespace

document::Document Engine::create_document(std::string id, double width, double height)
{
    if (id.empty()) {
        std::unique_lock lock(mutex_);
        do {
            id = "doc-" + std::to_string(nextDoc_++);
        } while (docs_.count(id) || fs::exists(root_ / "documents" / (id + ".json")));
    }
    check_id(id, "document");
    if (fs::exists(root_ / "documents" / (id + ".json")))
        throw Error("document.exists", "document already exists: " + id, id);
    auto s = slot(id, true);
    std::unique_lock lock(s->mutex);
    s->doc = document::make_document(id, width, height);
    s->loaded = true;
    s->history = {};
    persist(s->doc);
    return s->doc;
}

document::Document Engine::get_document(const std::string& id) const
{
    auto s = slot(id, false);
    {
        std::shared_lock lock(s->mutex);
        if (s->loaded) return s->doc;
    }
    std::unique_lock lock(s->mutex);
    ensure_loaded(*s, root_ / "documents" / (id + ".json"));
    return s->doc;
}

std::vector<std::string> Engine::list_documents() const
{
    std::set<std::string> ids;
    for (const auto& e : fs::directory_iterator(root_ / "documents"))
        if (e.path().extension() == ".json") ids.insert(e.path().stem().string());
    return {ids.begin(), ids.end()};
}

void Engine::put_document(document::Document doc)
{
    auto s = slot(doc.id, true);
    std::unique_lock lock(s->mutex);
    if (s->loaded || fs::exists(root_ / "documents" / (doc.id + ".json"))) {
        ensure_loaded(*s, root_ / "documents" / (doc.id + ".json"));
        s->history.record(s->doc);
    }
    s->doc = std::move(doc);
    s->loaded = true;
    persist(s->doc);
}

void Engine::delete_document(const std::string& id)
{
    auto s = slot(id, false);
    std::unique_lock lock(s->mutex);
    fs::remove(root_ / "documents" / (id + ".json"));
    std::unique_lock g(mutex_);
    docs_.erase(id);
}

document::Document Engine::mutate(const std::string& id, const std::function<void(document::Document&)>& fn)
{
    auto s = slot(id, false);
    std::unique_lock lock(s->mutex);
    ensure_loaded(*s, root_ / "documents" / (id + ".json"));
    document::Document next = s->doc;
    fn(next);
    if (next == s->doc) return s->doc;
    s->history.record(s->doc);
    s->doc = std::move(next);
    persist(s->doc);
    return s->doc;
}

document::Document Engine::undo(const std::string& id)
{
    auto s = slot(id, false);
    std::unique_lock lock(s->mutex);
    ensure_loaded(*s, root_ / "documents" / (id + ".json"));
    s->doc = s->history.undo(s->doc);
    persist(s->doc);
    return s->doc;
}

document::Document Engine::redo(const std::string& id)
{
    auto s = slot(id, false);
    std::unique_lock lock(s->mutex);
    ensure_loaded(*s, root_ / "documents" / (id + ".json"));
    s->doc = s->history.redo(s->doc);
    persist(s->doc);
    return s->doc;
}

std::string Engine::add_layer(const std::string& docId, document::Layer layer)
{
    std::string id;
    mutate(docId, [&](document::Document& d) { id = document::add_layer(d, std::move(layer)).id; });
    return id;
}

std::string Engine::highlight(const std::string& docId, const std::string& baseLayerId,
                              const filterql::FilteredTable& filtered, std::string_view chunkText)
{
    std::string out;
    mutate(docId, [&](document::Document& d) {
        document::Layer& base = d.layer(baseLayerId);
        if (base.kind != document::LayerKind::StaticChart || !base.chartSpec)
            throw Error("compose.highlight", "highlight needs a static chart layer", baseLayerId);
        auto ds = dataset(base.chartSpec->datasetId);
        charts::ChartSpec spec = *base.chartSpec;
        charts::ChartImage img = charts::render_chart(spec, *ds);
        auto result = compose::highlight(spec, img, *ds, filtered, chunkText, baseLayerId);
        if (std::holds_alternative<charts::ChartImage>(result)) {
            if (base.locked) throw Error("document.locked", "layer " + base.id + " is locked", base.id);
            std::set<std::size_t> selected(filtered.rowIndices.begin(), filtered.rowIndices.end());
            std::vector<std::size_t> rows;
            if (spec.rowFilter) {
                for (std::size_t r : *spec.rowFilter)
                    if (selected.count(r)) rows.push_back(r);
            } else {
                rows.assign(selected.begin(), selected.end());
            }
            base.chartSpec->rowFilter = rows;
            base.frames = {std::move(std::get<charts::ChartImage>(result).svg)};
            out = base.id;
            return;
        }
        document::Layer h;
        h.kind = document::LayerKind::Highlight;
        h.assetRef = "overlay:" + baseLayerId;
        h.overlay = std::get<compose::HighlightOverlay>(std::move(result));
        h.frames = {compose::render_overlay(*h.overlay, img)};
        h.dependsOn = baseLayerId;
        h.width = base.width;
        h.height = base.height;
        out = document::add_layer(d, std::move(h)).id;
    });
    return out;
}

compose::RecolorResult Engine::recolor(const std::string& docId, const std::string& layerId,
                                       const chroma::Palette& target)
{
    compose::RecolorResult result;
    mutate(docId, [&](document::Document& d) {
        document::Layer& l = d.layer(layerId);
        if (!document::permitted(l.kind, document::ConfigField::Recolor)) {
            document::set_config(d, layerId, document::ConfigField::Recolor, json::object());
        }
        if (l.kind == document::LayerKind::Text) {
            result.scheme = SchemeKind::Categorical;
            result.mapping = chroma::recolor_mapping({{l.text->color, 1}}, target, SchemeKind::Categorical);
        } else {
            std::vector<svg::Element> frames = l.frames;
            std::vector<svg::Element*> ptrs;
            for (auto& f : frames) ptrs.push_back(&f);
            SchemeKind scheme = l.chartSpec ? l.chartSpec->colorScheme.kind : SchemeKind::Categorical;
            result = compose::recolor_frames(ptrs, target, scheme, document::is_chart(l.kind));
        }
        document::set_config(d, layerId, document::ConfigField::Recolor, compose::mapping_to_json(result.mapping));
    });
    return result;
}

void Engine::sync(const std::string& docId, const std::string& layerA, const std::string& layerB)
{
    mutate(docId, [&](document::Document& d) {
        auto asset = [&](const document::Layer& l) {
            if (!document::is_animated(l.kind)) throw Error("compose.sync", "layer is not animated", l.id);
            AnimatedAsset a;
            a.frames = l.frames;
            a.frameKeys = l.frameKeys;
            a.frameDelayMs = l.config.frameDelayMs;
            a.source = l.kind == document::LayerKind::AnimatedChart ? AnimationSource::Visualization
                                                                     : AnimationSource::Graphic;
            return a;
        };
        document::Layer& a = d.layer(layerA);
        document::Layer& b = d.layer(layerB);
        if (a.locked || b.locked) throw Error("document.locked", "cannot sync a locked layer");
        auto [sa, sb] = compose::sync(asset(a), asset(b));
        for (auto [layer, synced] : {std::pair{&a, &sa}, std::pair{&b, &sb}}) {
            layer->frames = std::move(synced->frames);
            layer->frameKeys = std::move(synced->frameKeys);
            layer->config.frameDelayMs = synced->frameDelayMs;
            layer->restartPending = synced->restartPending;
        }
    });
}

ExportResult Engine::export_document(const std::string& docId, ExportMode mode)
{
    document::Document d = get_document(docId);
    ExportResult r;
    if (mode == ExportMode::StaticVector) {
        r.staticSvg = document::export_static(d);
        fs::path rel = docId + ".svg";
        io::write_text(exports_dir() / rel, r.staticSvg);
        r.files.push_back(rel);
    } else {
        r.bundle = document::export_frames(d);
        fs::path rel = docId + "-frames.zip";
        io::write_text(exports_dir() / rel, document::zip_store(r.bundle->files));
        r.files.push_back(rel);
    }
    return r;
}

} // namespace inkline
