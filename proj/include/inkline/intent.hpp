#pragma once

#include "inkline/dataset.hpp"
#include "inkline/raster.hpp"

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include <cstddef>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

namespace inkline {

enum class AssetKind { Visualization, DataFilter, StaticGraphic, AnimatedGraphic, ColorPalette };

inline constexpr AssetKind kAllAssetKinds[] = {AssetKind::Visualization, AssetKind::DataFilter,
                                               AssetKind::StaticGraphic, AssetKind::AnimatedGraphic,
                                               AssetKind::ColorPalette};

std::string_view to_string(AssetKind k);
AssetKind asset_kind_from_string(std::string_view s);

struct TextChunk {
    std::string id;
    std::size_t start = 0; // code points, half-open
    std::size_t end = 0;
    std::string text;

    friend bool operator==(const TextChunk&, const TextChunk&) = default;
};

struct KeyMessage {
    std::string id;
    std::string text;
    std::vector<TextChunk> chunks;
    std::optional<std::string> datasetId;
};

struct AssetRequest {
    std::string id;
    std::string chunkId;
    AssetKind kind = AssetKind::Visualization;
    std::optional<std::string> datasetId;
};

struct AssetDescriptor {
    std::string id;
    AssetKind kind = AssetKind::Visualization;
    double score = 0;
    std::string label;
    nlohmann::json body; // kind-specific payload (spec, query, palette, ...)
};

inline constexpr std::size_t kMaxBatchItems = 20;

struct RecommendationBatch {
    std::string id;
    std::string requestId;
    std::string sourceChunkId;
    AssetKind kind = AssetKind::Visualization;
    std::vector<AssetDescriptor> items; // descending score, at most 20
};

nlohmann::json to_json(const TextChunk& c);
nlohmann::json to_json(const KeyMessage& m);
nlohmann::json to_json(const AssetRequest& r);
nlohmann::json to_json(const RecommendationBatch& b);

using Embedding = Eigen::Matrix<double, 256, 1>;

// The model-backed capabilities the recommenders depend on. The fallback
// implementation is rule based and pure; the remote one speaks HTTP.
class ProviderSuite {
public:
    virtual ~ProviderSuite() = default;

    virtual std::string name() const = 0;
    // Column names ranked by relevance to the chunk.
    virtual std::vector<std::string> relevance(std::string_view chunk, const DatasetMeta& meta) = 0;
    // Filter query text for the chunk.
    virtual std::string filter(std::string_view chunk, const DatasetMeta& meta) = 0;
    virtual std::vector<std::string> time_columns(const std::vector<ColumnMeta>& columns) = 0;
    virtual std::vector<RgbaImage> images_from_text(std::string_view keyword) = 0;
    virtual Embedding embed(std::string_view text) = 0;
};

// Registers (or reuses) the chunk [start, end) on `message` and returns a new
// request for it. Offsets are code points. Throws "intent.span".
AssetRequest brush(KeyMessage& message, std::size_t start, std::size_t end, AssetKind kind,
                   std::string requestId, std::string newChunkId);

inline constexpr std::size_t kMaxRelevantColumns = 5;

// Scores in [0,1]: max of name-token overlap, 0.9 for a verbatim nominal value
// mention, 0.5 for a time word against a temporal column.
double fallback_relevance_score(std::string_view chunk, const ColumnMeta& column);

// Columns with positive fallback score, best first, schema order on ties, at most 5.
std::vector<std::string> fallback_relevance(std::string_view chunk, const DatasetMeta& meta);

// Provider ranking sanitized to distinct schema names, at most 5.
std::vector<std::string> relevant_columns(std::string_view chunk, const DatasetMeta& meta, ProviderSuite& suite);

// Temporal columns plus columns whose name tokens hit the time lexicon.
std::vector<std::string> fallback_time_columns(const std::vector<ColumnMeta>& columns);
std::vector<std::string> detect_time_columns(const std::vector<ColumnMeta>& columns, ProviderSuite& suite);

// Key messages, chunks, requests and the chunk -> batch links. Single writer,
// many readers.
class MessageRegistry {
public:
    KeyMessage create_message(std::string text, std::optional<std::string> datasetId = std::nullopt);
    KeyMessage message(const std::string& id) const;
    AssetRequest brush(const std::string& messageId, std::size_t start, std::size_t end, AssetKind kind);
    AssetRequest request(const std::string& id) const;
    TextChunk chunk(const std::string& id) const;

    // Stores the batch and links it to its request's chunk; assigns an id if empty.
    RecommendationBatch attach_batch(RecommendationBatch batch);
    RecommendationBatch batch(const std::string& id) const;
    void remove_batch(const std::string& id);
    std::vector<std::string> chunk_links(const std::string& chunkId) const;

private:
    mutable std::shared_mutex mutex_;
    std::map<std::string, KeyMessage> messages_;
    std::map<std::string, std::string> chunkOwner_; // chunk -> message
    std::map<std::string, AssetRequest> requests_;
    std::map<std::string, RecommendationBatch> batches_;
    std::map<std::string, std::vector<std::string>> links_; // chunk -> batches
    std::size_t nextMessage_ = 1, nextChunk_ = 1, nextRequest_ = 1, nextBatch_ = 1;
};

} // namespace inkline
