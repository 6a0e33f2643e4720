#pragma once

#include "inkline/charts.hpp"
#include "inkline/chroma.hpp"
#include "inkline/compose.hpp"
#include "inkline/dataset.hpp"
#include "inkline/document.hpp"
#include "inkline/filterql.hpp"
#include "inkline/gallery.hpp"
#include "inkline/intent.hpp"

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

namespace inkline {

enum class ExportMode { StaticVector, FrameBundle };
ExportMode export_mode_from_string(std::string_view s);

struct ExportResult {
    std::vector<std::filesystem::path> files; // relative to the exports directory
    std::string staticSvg;
    std::optional<document::FrameBundle> bundle;
};

// The embedded engine: datasets, messages, gallery and documents, file-backed
// under one root (datasets/, gallery/, documents/, exports/).
class Engine {
public:
    explicit Engine(std::filesystem::path root, std::unique_ptr<ProviderSuite> provider = nullptr);

    ProviderSuite& provider() noexcept { return *provider_; }
    const std::filesystem::path& root() const noexcept { return root_; }
    std::filesystem::path exports_dir() const { return root_ / "exports"; }

    // Idempotent by content digest.
    DatasetMeta ingest(std::string_view content, char delimiter = ',');
    std::shared_ptr<const Dataset> dataset(const std::string& id) const;
    DatasetMeta meta(const std::string& id) const;

    KeyMessage create_message(std::string text, std::optional<std::string> datasetId = std::nullopt);
    KeyMessage message(const std::string& id) const { return registry_.message(id); }
    // Brush a span and compute the batch for `kind`; the batch is linked to the chunk.
    RecommendationBatch brush(const std::string& messageId, std::size_t start, std::size_t end, AssetKind kind);
    RecommendationBatch batch(const std::string& id) const { return registry_.batch(id); }
    MessageRegistry& registry() noexcept { return registry_; }

    gallery::IndexReport index_gallery(const std::filesystem::path& manifest);
    void set_gallery(gallery::GalleryIndex index);
    RecommendationBatch search_gallery(gallery::GraphicKind kind, std::string_view query,
                                       std::size_t k = kMaxBatchItems) const;
    gallery::GraphicAsset graphic(const std::string& id) const;
    compose::GlyphResolver glyph_resolver() const;

    charts::ChartImage render_chart(const charts::ChartSpec& spec) const;
    AnimatedAsset animate_chart(const charts::ChartSpec& spec, const std::string& column,
                                int frameDelayMs = kDefaultFrameDelayMs) const;
    filterql::FilteredTable apply_filter(const std::string& datasetId, std::string_view queryText) const;
    charts::ChartImage make_dod(const charts::ChartSpec& spec, const compose::GlyphMap& glyphs) const;

    // Layer payloads resolved from engine assets; pass to add_layer.
    document::Layer chart_layer(const charts::ChartSpec& spec) const;
    document::Layer animated_chart_layer(const charts::ChartSpec& spec, const std::string& column,
                                         int frameDelayMs = kDefaultFrameDelayMs) const;
    document::Layer graphic_layer(const std::string& assetId) const;
    document::Layer dod_layer(const charts::ChartSpec& spec, const compose::GlyphMap& glyphs) const;
    static document::Layer text_layer(document::TextContent text);
    static document::Layer annotation_layer(compose::Annotation annotation,
                                            std::optional<std::string> dependsOn = std::nullopt);
    document::LayerRenderer renderer() const;

    document::Document create_document(std::string id = {}, double width = 960, double height = 720);
    document::Document get_document(const std::string& id) const;
    std::vector<std::string> list_documents() const;
    void put_document(document::Document doc);
    void delete_document(const std::string& id);

    // Runs `fn` under the document's writer lock, records an undo snapshot and
    // persists. The document is untouched when `fn` throws.
    document::Document mutate(const std::string& id, const std::function<void(document::Document&)>& fn);
    document::Document undo(const std::string& id);
    document::Document redo(const std::string& id);

    std::string add_layer(const std::string& docId, document::Layer layer);
    // Aggregated charts are re-rendered over the selection (returns the base id);
    // otherwise a dependent highlight layer is added (returns its id).
    std::string highlight(const std::string& docId, const std::string& baseLayerId,
                          const filterql::FilteredTable& filtered, std::string_view chunkText);
    compose::RecolorResult recolor(const std::string& docId, const std::string& layerId, const chroma::Palette& target);
    void sync(const std::string& docId, const std::string& layerA, const std::string& layerB);

    ExportResult export_document(const std::string& docId, ExportMode mode);

private:
    struct DocSlot {
        std::shared_mutex mutex;
        document::Document doc;
        document::History history;
        bool loaded = false;
    };

    std::shared_ptr<DocSlot> slot(const std::string& id, bool create) const;
    void persist(const document::Document& doc) const;

    std::filesystem::path root_;
    std::unique_ptr<ProviderSuite> provider_;
    MessageRegistry registry_;

    mutable std::shared_mutex mutex_; // datasets, gallery, document slots
    mutable std::map<std::string, std::shared_ptr<const Dataset>> datasets_;
    gallery::GalleryIndex gallery_;
    mutable std::map<std::string, std::shared_ptr<DocSlot>> docs_;
    std::size_t nextDoc_ = 1;
};

} // namespace inkline
