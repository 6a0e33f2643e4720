#include "inkline/intent.hpp"

#include "inkline/error.hpp"
#include "inkline/text.hpp"

#include <algorithm>
#include <mutex>
#include <numeric>
#include <set>

namespace inkline {

using nlohmann::json;

std::string_view to_string(AssetKind k)
{
    switch (k) {
    case AssetKind::Visualization: return "visualization";
    case AssetKind::DataFilter: return "data-filter";
    case AssetKind::StaticGraphic: return "static-graphic";
    case AssetKind::AnimatedGraphic: return "animated-graphic";
    case AssetKind::ColorPalette: return "color-palette";
    }
    return "visualization";
}

AssetKind asset_kind_from_string(std::string_view s)
{
    for (AssetKind k : kAllAssetKinds)
        if (to_string(k) == s) return k;
    throw Error("intent.kind", "unknown asset kind: " + std::string(s));
}

json to_json(const TextChunk& c)
{
    return {{"id", c.id}, {"start", c.start}, {"end", c.end}, {"text", c.text}};
}

json to_json(const KeyMessage& m)
{
    json chunks = json::array();
    for (const auto& c : m.chunks) chunks.push_back(to_json(c));
    json j = {{"id", m.id}, {"text", m.text}, {"chunks", chunks}};
    j["datasetId"] = m.datasetId ? json(*m.datasetId) : json(nullptr);
    return j;
}

json to_json(const AssetRequest& r)
{
    json j = {{"id", r.id}, {"chunkId", r.chunkId}, {"kind", to_string(r.kind)}};
    j["datasetId"] = r.datasetId ? json(*r.datasetId) : json(nullptr);
    return j;
}

json to_json(const RecommendationBatch& b)
{
    json items = json::array();
    for (const auto& it : b.items)
        items.push_back({{"id", it.id}, {"kind", to_string(it.kind)}, {"score", it.score}, {"label", it.label},
                         {"body", it.body}});
    return {{"id", b.id},
            {"requestId", b.requestId},
            {"sourceChunkId", b.sourceChunkId},
            {"kind", to_string(b.kind)},
            {"items", items}};
}

AssetRequest brush(KeyMessage& message, std::size_t start, std::size_t end, AssetKind kind, std::string requestId,
                   std::string newChunkId)
{
    std::size_t length = text::codepoint_length(message.text);
    if (start >= end || end > length) {
        throw Error("intent.span",
                    "span [" + std::to_string(start) + ", " + std::to_string(end) + ") outside message of length " +
                        std::to_string(length));
    }
    auto it = std::find_if(message.chunks.begin(), message.chunks.end(),
                           [&](const TextChunk& c) { return c.start == start && c.end == end; });
    if (it == message.chunks.end()) {
        std::size_t b0 = *text::byte_offset(message.text, start);
        std::size_t b1 = *text::byte_offset(message.text, end);
        message.chunks.push_back({std::move(newChunkId), start, end, message.text.substr(b0, b1 - b0)});
        it = std::prev(message.chunks.end());
    }
    return {std::move(requestId), it->id, kind, message.datasetId};
}

double fallback_relevance_score(std::string_view chunk, const ColumnMeta& column)
{
    std::set<std::string> chunkTokens;
    for (const auto& t : text::word_tokens(chunk)) chunkTokens.insert(text::fold_plural(t));

    double overlap = 0;
    std::set<std::string> nameTokens;
    for (const auto& t : text::identifier_tokens(column.name)) nameTokens.insert(text::fold_plural(t));
    if (!nameTokens.empty()) {
        auto hits = std::count_if(nameTokens.begin(), nameTokens.end(),
                                  [&](const std::string& t) { return chunkTokens.count(t) > 0; });
        overlap = static_cast<double>(hits) / static_cast<double>(nameTokens.size());
    }

    double valueMention = 0;
    if (column.kind == ColumnKind::Nominal) {
        bool hit = std::any_of(column.uniqueValues.begin(), column.uniqueValues.end(),
                               [&](const std::string& v) { return text::contains_phrase(chunk, v, true); });
        valueMention = hit ? 0.9 : 0.0;
    }

    double timeHint = 0;
    if (column.kind == ColumnKind::Temporal) {
        bool hit = std::any_of(chunkTokens.begin(), chunkTokens.end(),
                               [](const std::string& t) { return text::is_time_word(t); });
        timeHint = hit ? 0.5 : 0.0;
    }
    return std::max({overlap, valueMention, timeHint});
}

std::vector<std::string> fallback_relevance(std::string_view chunk, const DatasetMeta& meta)
{
    std::vector<std::pair<double, std::size_t>> scored;
    for (std::size_t i = 0; i < meta.columns.size(); ++i) {
        double s = fallback_relevance_score(chunk, meta.columns[i]);
        if (s > 0) scored.emplace_back(s, i);
    }
    std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    std::vector<std::string> out;
    for (std::size_t i = 0; i < std::min(kMaxRelevantColumns, scored.size()); ++i)
        out.push_back(meta.columns[scored[i].second].name);
    return out;
}

std::vector<std::string> relevant_columns(std::string_view chunk, const DatasetMeta& meta, ProviderSuite& suite)
{
    if (meta.columns.empty()) throw Error("intent.schema", "dataset has no columns");
    std::vector<std::string> ranked = suite.relevance(chunk, meta);
    std::vector<std::string> out;
    for (auto& name : ranked) {
        bool known = std::any_of(meta.columns.begin(), meta.columns.end(),
                                 [&](const ColumnMeta& c) { return c.name == name; });
        if (known && std::find(out.begin(), out.end(), name) == out.end()) out.push_back(std::move(name));
        if (out.size() == kMaxRelevantColumns) break;
    }
    return out;
}

std::vector<std::string> fallback_time_columns(const std::vector<ColumnMeta>& columns)
{
    std::vector<std::string> out;
    for (const auto& c : columns) {
        auto tokens = text::identifier_tokens(c.name);
        bool named = std::any_of(tokens.begin(), tokens.end(),
                                 [](const std::string& t) { return text::is_time_word(text::fold_plural(t)); });
        if (c.kind == ColumnKind::Temporal || named) out.push_back(c.name);
    }
    return out;
}

std::vector<std::string> detect_time_columns(const std::vector<ColumnMeta>& columns, ProviderSuite& suite)
{
    std::vector<std::string> proposed = suite.time_columns(columns);
    std::vector<std::string> out;
    for (const auto& c : columns)
        if (std::find(proposed.begin(), proposed.end(), c.name) != proposed.end()) out.push_back(c.name);
    return out;
}

KeyMessage MessageRegistry::create_message(std::string text, std::optional<std::string> datasetId)
{
    std::unique_lock lock(mutex_);
    KeyMessage m;
    m.id = "msg-" + std::to_string(nextMessage_++);
    m.text = std::move(text);
    m.datasetId = std::move(datasetId);
    messages_[m.id] = m;
    return m;
}

KeyMessage MessageRegistry::message(const std::string& id) const
{
    std::shared_lock lock(mutex_);
    auto it = messages_.find(id);
    if (it == messages_.end()) throw NotFound("message", id);
    return it->second;
}

AssetRequest MessageRegistry::brush(const std::string& messageId, std::size_t start, std::size_t end, AssetKind kind)
{
    std::unique_lock lock(mutex_);
    auto it = messages_.find(messageId);
    if (it == messages_.end()) throw NotFound("message", messageId);
    std::string chunkId = "chunk-" + std::to_string(nextChunk_);
    std::string requestId = "req-" + std::to_string(nextRequest_);
    AssetRequest req = inkline::brush(it->second, start, end, kind, requestId, chunkId);
    ++nextRequest_;
    if (req.chunkId == chunkId) {
        ++nextChunk_;
        chunkOwner_[chunkId] = messageId;
        links_[chunkId];
    }
    requests_[req.id] = req;
    return req;
}

AssetRequest MessageRegistry::request(const std::string& id) const
{
    std::shared_lock lock(mutex_);
    auto it = requests_.find(id);
    if (it == requests_.end()) throw NotFound("request", id);
    return it->second;
}

TextChunk MessageRegistry::chunk(const std::string& id) const
{
    std::shared_lock lock(mutex_);
    auto owner = chunkOwner_.find(id);
    if (owner == chunkOwner_.end()) throw NotFound("chunk", id);
    const auto& chunks = messages_.at(owner->second).chunks;
    return *std::find_if(chunks.begin(), chunks.end(), [&](const TextChunk& c) { return c.id == id; });
}

RecommendationBatch MessageRegistry::attach_batch(RecommendationBatch batch)
{
    std::unique_lock lock(mutex_);
    auto req = requests_.find(batch.requestId);
    if (req == requests_.end()) throw NotFound("request", batch.requestId);
    if (batch.id.empty()) batch.id = "batch-" + std::to_string(nextBatch_++);
    batch.sourceChunkId = req->second.chunkId;
    batch.kind = req->second.kind;
    if (batch.items.size() > kMaxBatchItems) batch.items.resize(kMaxBatchItems);
    links_[batch.sourceChunkId].push_back(batch.id);
    batches_[batch.id] = batch;
    return batch;
}

RecommendationBatch MessageRegistry::batch(const std::string& id) const
{
    std::shared_lock lock(mutex_);
    auto it = batches_.find(id);
    if (it == batches_.end()) throw NotFound("batch", id);
    return it->second;
}

void MessageRegistry::remove_batch(const std::string& id)
{
    std::unique_lock lock(mutex_);
    auto it = batches_.find(id);
    if (it == batches_.end()) throw NotFound("batch", id);
    auto& links = links_[it->second.sourceChunkId];
    links.erase(std::remove(links.begin(), links.end(), id), links.end());
    batches_.erase(it);
}

std::vector<std::string> MessageRegistry::chunk_links(const std::string& chunkId) const
{
    std::shared_lock lock(mutex_);
    auto it = links_.find(chunkId);
    if (it == links_.end()) throw NotFound("chunk", chunkId);
    return it->second;
}

} // namespace inkline
