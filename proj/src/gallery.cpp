#include "inkline/gallery.hpp"

#include "inkline/error.hpp"
#include "inkline/io.hpp"
#include "inkline/text.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <set>

namespace inkline::gallery {

using nlohmann::json;

namespace {

std::uint64_t second_round(std::uint64_t h)
{
    char bytes[8];
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((h >> (8 * i)) & 0xFF);
    return text::fnv1a64(std::string_view(bytes, 8));
}

std::string check(const GraphicAsset& a)
{
    if (a.id.empty()) return "missing id";
    if (text::trim(a.caption).empty()) return "empty caption";
    if (a.kind == GraphicKind::Static) {
        if (a.image.tag != "svg") return "missing payload";
        if (!a.frameCaptions.empty()) return "static asset with frame captions";
        return {};
    }
    if (a.animation.frames.size() < 2) return "animation needs at least 2 frames";
    if (a.animation.frameDelayMs <= 0) return "frame delay must be positive";
    if (a.frameCaptions.size() != a.animation.frames.size()) return "frame captions do not match frames";
    for (const auto& c : a.frameCaptions)
        if (text::trim(c).empty()) return "empty frame caption";
    return {};
}

std::vector<Hit> top_k(std::vector<Hit> hits, const GalleryIndex& index, std::size_t k)
{
    std::sort(hits.begin(), hits.end(), [&](const Hit& a, const Hit& b) {
        if (a.score != b.score) return a.score > b.score;
        return index.assets[a.asset].id < index.assets[b.asset].id;
    });
    hits.resize(std::min({hits.size(), k, kMaxBatchItems}));
    return hits;
}

RecommendationBatch to_batch(const std::vector<Hit>& hits, const GalleryIndex& index, AssetKind kind)
{
    RecommendationBatch batch;
    batch.kind = kind;
    for (const auto& h : hits) {
        const GraphicAsset& a = index.assets[h.asset];
        AssetDescriptor d;
        d.id = a.id;
        d.kind = kind;
        d.score = h.score;
        d.label = a.caption;
        d.body = {{"assetId", a.id}, {"caption", a.caption}, {"license", a.license}};
        if (a.kind == GraphicKind::Static) {
            d.body["svg"] = svg::serialize(a.image);
        } else {
            d.body["frameCount"] = a.animation.frames.size();
            d.body["frameDelayMs"] = a.animation.frameDelayMs;
            d.body["preview"] = svg::serialize(a.animation.frames.front());
        }
        batch.items.push_back(std::move(d));
    }
    return batch;
}

json vector_json(const Embedding& v)
{
    json out = json::array();
    for (int i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

Embedding vector_from_json(const json& j)
{
    if (!j.is_array() || j.size() != 256) throw Error("gallery.index", "embedding must have 256 entries");
    Embedding v;
    for (int i = 0; i < 256; ++i) v(i) = j[static_cast<std::size_t>(i)].get<double>();
    return v;
}

} // namespace

const GraphicAsset* GalleryIndex::find(std::string_view id) const
{
    for (const auto& a : assets)
        if (a.id == id) return &a;
    return nullptr;
}

Embedding fallback_embed(std::string_view s)
{
    Embedding v = Embedding::Zero();
    for (const auto& tok : text::word_tokens(s)) {
        std::uint64_t h = text::fnv1a64(tok);
        double sign = (second_round(h) >> 63) ? -1.0 : 1.0;
        v(static_cast<long>(h % 256)) += sign;
    }
    double n = v.norm();
    if (n > 0) v /= n;
    return v;
}

double cosine(const Embedding& a, const Embedding& b)
{
    double na = a.norm(), nb = b.norm();
    if (na == 0 || nb == 0) return 0;
    return std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
}

GalleryIndex index_assets(std::vector<GraphicAsset> assets, const Embedder& embed, std::string embedder,
                          IndexReport* report)
{
    GalleryIndex index;
    index.embedder = std::move(embedder);
    std::set<std::string> ids;
    for (auto& a : assets) {
        std::string problem = check(a);
        if (problem.empty() && !ids.insert(a.id).second) problem = "duplicate id";
        if (!problem.empty()) {
            if (report) report->skipped.emplace_back(a.id, problem);
            continue;
        }
        std::vector<Embedding> vecs;
        if (a.kind == GraphicKind::Static) {
            vecs.push_back(embed(a.caption));
        } else {
            for (const auto& c : a.frameCaptions) vecs.push_back(embed(c));
        }
        index.assets.push_back(std::move(a));
        index.vectors.push_back(std::move(vecs));
        if (report) ++report->indexed;
    }
    return index;
}

GalleryIndex index_gallery(const std::filesystem::path& manifest, const Embedder& embed, std::string embedder,
                           IndexReport* report)
{
    json m;
    try {
        m = json::parse(io::read_text(manifest));
    } catch (const json::parse_error& e) {
        throw Error("gallery.manifest", std::string("malformed manifest: ") + e.what(), std::to_string(e.byte));
    }
    const auto base = manifest.parent_path();
    std::vector<GraphicAsset> assets;
    IndexReport local;
    IndexReport& rep = report ? *report : local;
    for (const auto& entry : m.value("assets", json::array())) {
        std::string id = entry.value("id", std::string());
        try {
            GraphicAsset a;
            a.id = id;
            a.kind = entry.value("kind", std::string("static")) == "animated" ? GraphicKind::Animated : GraphicKind::Static;
            a.caption = entry.value("caption", std::string());
            a.frameCaptions = entry.value("frameCaptions", std::vector<std::string>{});
            a.license = entry.value("license", std::string());
            auto payload = base / entry.at("payload").get<std::string>();
            if (a.kind == GraphicKind::Static) {
                a.image = svg::parse(io::read_text(payload));
            } else {
                json anim = json::parse(io::read_text(payload));
                auto dir = payload.parent_path();
                for (const auto& f : anim.at("frames")) a.animation.frames.push_back(svg::parse(io::read_text(dir / f.get<std::string>())));
                a.animation.frameDelayMs = anim.value("frameDelayMs", kDefaultFrameDelayMs);
                a.animation.source = AnimationSource::Graphic;
            }
            assets.push_back(std::move(a));
        } catch (const std::exception& e) {
            rep.skipped.emplace_back(id, e.what());
        }
    }
    return index_assets(std::move(assets), embed, std::move(embedder), &rep);
}

std::vector<Hit> rank_static(const Embedding& query, const GalleryIndex& index, std::size_t k)
{
    std::vector<Hit> hits;
    for (std::size_t i = 0; i < index.assets.size(); ++i)
        if (index.assets[i].kind == GraphicKind::Static) hits.push_back({i, cosine(query, index.vectors[i].front())});
    return top_k(std::move(hits), index, k);
}

std::vector<Hit> rank_animated(const Embedding& query, const GalleryIndex& index, std::size_t k)
{
    std::vector<Hit> hits;
    for (std::size_t i = 0; i < index.assets.size(); ++i) {
        if (index.assets[i].kind != GraphicKind::Animated) continue;
        double sum = 0;
        for (const auto& v : index.vectors[i]) sum += cosine(query, v);
        hits.push_back({i, sum / static_cast<double>(index.vectors[i].size())});
    }
    return top_k(std::move(hits), index, k);
}

RecommendationBatch search_static(std::string_view chunk, const GalleryIndex& index, const Embedder& embed, std::size_t k)
{
    if (index.empty()) return to_batch({}, index, AssetKind::StaticGraphic);
    return to_batch(rank_static(embed(chunk), index, k), index, AssetKind::StaticGraphic);
}

RecommendationBatch search_animated(std::string_view chunk, const GalleryIndex& index, const Embedder& embed,
                                    std::size_t k)
{
    if (index.empty()) return to_batch({}, index, AssetKind::AnimatedGraphic);
    return to_batch(rank_animated(embed(chunk), index, k), index, AssetKind::AnimatedGraphic);
}

json to_json(const GraphicAsset& a)
{
    json j = {{"id", a.id},
              {"kind", a.kind == GraphicKind::Static ? "static" : "animated"},
              {"caption", a.caption},
              {"license", a.license}};
    if (a.kind == GraphicKind::Static) {
        j["svg"] = svg::serialize(a.image);
    } else {
        j["animation"] = to_json(a.animation);
        j["frameCaptions"] = a.frameCaptions;
    }
    return j;
}

GraphicAsset graphic_asset_from_json(const json& j)
{
    GraphicAsset a;
    a.id = j.at("id").get<std::string>();
    a.kind = j.value("kind", std::string("static")) == "animated" ? GraphicKind::Animated : GraphicKind::Static;
    a.caption = j.value("caption", std::string());
    a.license = j.value("license", std::string());
    if (a.kind == GraphicKind::Static) {
        a.image = svg::parse(j.at("svg").get<std::string>());
    } else {
        a.animation = animated_asset_from_json(j.at("animation"));
        a.frameCaptions = j.value("frameCaptions", std::vector<std::string>{});
    }
    return a;
}

void save_index(const GalleryIndex& index, const std::filesystem::path& file)
{
    json assets = json::array();
    for (std::size_t i = 0; i < index.assets.size(); ++i) {
        json a = to_json(index.assets[i]);
        json vecs = json::array();
        for (const auto& v : index.vectors[i]) vecs.push_back(vector_json(v));
        a["vectors"] = vecs;
        assets.push_back(std::move(a));
    }
    io::write_text(file, json{{"embedder", index.embedder}, {"assets", assets}}.dump());
}

GalleryIndex load_index(const std::filesystem::path& file)
{
    json j;
    try {
        j = json::parse(io::read_text(file));
    } catch (const json::parse_error& e) {
        throw Error("gallery.index", std::string("malformed index: ") + e.what(), std::to_string(e.byte));
    }
    GalleryIndex index;
    index.embedder = j.value("embedder", std::string("fallback"));
    for (const auto& a : j.at("assets")) {
        index.assets.push_back(graphic_asset_from_json(a));
        std::vector<Embedding> vecs;
        for (const auto& v : a.at("vectors")) vecs.push_back(vector_from_json(v));
        index.vectors.push_back(std::move(vecs));
    }
    return index;
}

} // namespace inkline::gallery
