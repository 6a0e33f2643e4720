#pragma once

#include "inkline/animation.hpp"
#include "inkline/intent.hpp"
#include "inkline/svg.hpp"

#include <nlohmann/json_fwd.hpp>

#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace inkline::gallery {

enum class GraphicKind { Static, Animated };

struct GraphicAsset {
    std::string id;
    GraphicKind kind = GraphicKind::Static;
    svg::Element image;      // static payload
    AnimatedAsset animation; // animated payload
    std::string caption;
    std::vector<std::string> frameCaptions; // animated only, one per frame
    std::string license;

    friend bool operator==(const GraphicAsset&, const GraphicAsset&) = default;
};

struct GalleryIndex {
    std::vector<GraphicAsset> assets;
    std::vector<std::vector<Embedding>> vectors; // one per static asset, one per frame when animated
    std::string embedder;

    const GraphicAsset* find(std::string_view id) const;
    bool empty() const noexcept { return assets.empty(); }
};

struct IndexReport {
    std::size_t indexed = 0;
    std::vector<std::pair<std::string, std::string>> skipped; // entry id, reason
};

using Embedder = std::function<Embedding(std::string_view)>;

// Signed feature hashing into 256 buckets, L2-normalized; empty text -> zero.
Embedding fallback_embed(std::string_view text);

// Cosine in [-1, 1]; 0 when either vector is zero.
double cosine(const Embedding& a, const Embedding& b);

// In-memory build; invalid entries are skipped and reported.
GalleryIndex index_assets(std::vector<GraphicAsset> assets, const Embedder& embed, std::string embedder = "fallback",
                          IndexReport* report = nullptr);

// Manifest: {"assets": [{id, kind, payload, caption, frameCaptions?, license}]}
// with payload paths relative to the manifest. Animated payloads are JSON
// {"frameDelayMs": n, "frames": [svg paths]}.
GalleryIndex index_gallery(const std::filesystem::path& manifest, const Embedder& embed,
                           std::string embedder = "fallback", IndexReport* report = nullptr);

struct Hit {
    std::size_t asset = 0;
    double score = 0;
};

// Raw scored ordering (descending, ties by id), capped at k.
std::vector<Hit> rank_static(const Embedding& query, const GalleryIndex& index, std::size_t k = kMaxBatchItems);
std::vector<Hit> rank_animated(const Embedding& query, const GalleryIndex& index, std::size_t k = kMaxBatchItems);

RecommendationBatch search_static(std::string_view chunk, const GalleryIndex& index, const Embedder& embed,
                                  std::size_t k = kMaxBatchItems);
RecommendationBatch search_animated(std::string_view chunk, const GalleryIndex& index, const Embedder& embed,
                                    std::size_t k = kMaxBatchItems);

nlohmann::json to_json(const GraphicAsset& a);
GraphicAsset graphic_asset_from_json(const nlohmann::json& j);

void save_index(const GalleryIndex& index, const std::filesystem::path& file);
GalleryIndex load_index(const std::filesystem::path& file);

} // namespace inkline::gallery
