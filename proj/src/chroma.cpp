#include "inkline/chroma.hpp"

#include "inkline/error.hpp"
#include "inkline/text.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <limits>
#include <numeric>
#include <set>
#include <unordered_map>

namespace inkline::chroma {

namespace detail {
extern const std::string_view kColorLexicon;
}

using nlohmann::json;

namespace {

using Lexicon = std::unordered_map<std::string, Rgb>;

const Lexicon& lexicon()
{
    static const Lexicon table = [] {
        Lexicon t;
        std::string_view rest = detail::kColorLexicon;
        while (!rest.empty()) {
            auto nl = rest.find('\n');
            std::string line = text::trim(rest.substr(0, nl));
            rest = nl == std::string_view::npos ? std::string_view() : rest.substr(nl + 1);
            if (line.empty() || line.front() == '#') continue;
            auto tab = line.find_first_of("\t ");
            if (tab == std::string::npos) continue;
            auto c = parse_color(text::trim(line.substr(tab + 1)));
            if (c) t.emplace(text::to_lower(line.substr(0, tab)), *c);
        }
        return t;
    }();
    return table;
}

struct Box {
    std::vector<Rgb> pixels;
    Rgb representative;
};

int channel(const Rgb& c, int ch) { return ch == 0 ? c.r : ch == 1 ? c.g : c.b; }

std::array<int, 3> ranges(const std::vector<Rgb>& px)
{
    std::array<int, 3> lo{255, 255, 255}, hi{0, 0, 0};
    for (const auto& c : px)
        for (int ch = 0; ch < 3; ++ch) {
            lo[ch] = std::min(lo[ch], channel(c, ch));
            hi[ch] = std::max(hi[ch], channel(c, ch));
        }
    if (px.empty()) return {0, 0, 0};
    return {hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2]};
}

Rgb mean_color(const std::vector<Rgb>& px)
{
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    for (const auto& c : px) sum += to_vector<double>(c);
    return from_vector<double>(Eigen::Vector3d(sum / static_cast<double>(px.size())));
}

void split_by_value(Box& box, Box& right)
{
    auto r = ranges(box.pixels);
    int ch = 0;
    for (int c = 1; c < 3; ++c)
        if (r[c] > r[ch]) ch = c;
    std::vector<int> vals;
    vals.reserve(box.pixels.size());
    for (const auto& p : box.pixels) vals.push_back(channel(p, ch));
    auto mid = vals.begin() + static_cast<long>((vals.size() - 1) / 2);
    std::nth_element(vals.begin(), mid, vals.end());
    int m = *mid;
    std::size_t le = 0, lt = 0;
    for (const auto& p : box.pixels) {
        le += channel(p, ch) <= m;
        lt += channel(p, ch) < m;
    }
    const std::size_t n = box.pixels.size();
    auto imbalance = [n](std::size_t left) { return left > n - left ? left - (n - left) : (n - left) - left; };
    bool leOk = le > 0 && le < n, ltOk = lt > 0 && lt < n;
    bool useLe = leOk && (!ltOk || imbalance(le) <= imbalance(lt));
    auto it = std::stable_partition(box.pixels.begin(), box.pixels.end(), [&](const Rgb& p) {
        return useLe ? channel(p, ch) <= m : channel(p, ch) < m;
    });
    right.pixels.assign(it, box.pixels.end());
    box.pixels.erase(it, box.pixels.end());
    box.representative = mean_color(box.pixels);
    right.representative = mean_color(right.pixels);
}

double luma_d(const Rgb& c) { return luma<double>(c); }

} // namespace

std::vector<Rgb> Palette::colors() const
{
    std::vector<Rgb> out;
    for (const auto& b : bins) out.push_back(b.color);
    return out;
}

void sort_by_luminosity(Palette& p)
{
    std::stable_sort(p.bins.begin(), p.bins.end(),
                     [](const ColorBin& a, const ColorBin& b) { return luma_d(a.color) < luma_d(b.color); });
    p.sortedByLuminosity = true;
}

Palette extract_palette(const RgbaImage& image)
{
    Box root;
    for (int y = 0; y < image.height; ++y)
        for (int x = 0; x < image.width; ++x)
            if (image.alpha(x, y) >= kAlphaCutoff) root.pixels.push_back(image.rgb(x, y));
    if (root.pixels.empty()) throw Error("chroma.no_opaque_pixels", "no opaque pixels");
    const double total = static_cast<double>(root.pixels.size());
    root.representative = mean_color(root.pixels);

    std::vector<Box> boxes{std::move(root)};
    while (boxes.size() < kBins) {
        std::optional<std::size_t> pick;
        for (std::size_t i = 0; i < boxes.size(); ++i) {
            auto r = ranges(boxes[i].pixels);
            if (r[0] == 0 && r[1] == 0 && r[2] == 0) continue;
            if (!pick || boxes[i].pixels.size() > boxes[*pick].pixels.size()) pick = i;
        }
        Box right;
        if (pick) {
            split_by_value(boxes[*pick], right);
        } else {
            std::size_t big = 0;
            for (std::size_t i = 1; i < boxes.size(); ++i)
                if (boxes[i].pixels.size() > boxes[big].pixels.size()) big = i;
            pick = big;
            Box& b = boxes[big];
            std::size_t k = (b.pixels.size() + 1) / 2;
            right.pixels.assign(b.pixels.begin() + static_cast<long>(k), b.pixels.end());
            b.pixels.resize(k);
            right.representative = b.representative;
        }
        boxes.insert(boxes.begin() + static_cast<long>(*pick) + 1, std::move(right));
    }

    Palette p;
    for (std::size_t i = 0; i < kBins; ++i) {
        const Box& b = boxes[i];
        p.bins[i].color = b.pixels.empty() ? b.representative : mean_color(b.pixels);
        p.bins[i].weight = static_cast<double>(b.pixels.size()) / total;
    }
    sort_by_luminosity(p);
    return p;
}

std::vector<std::string> palette_keywords(std::string_view chunk)
{
    std::vector<std::string> out;
    for (auto& t : text::word_tokens(chunk)) {
        if (text::is_stopword(t)) continue;
        if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(std::move(t));
    }
    return out;
}

std::optional<Rgb> lexicon_color(std::string_view keyword)
{
    const auto& lex = lexicon();
    auto it = lex.find(text::to_lower(keyword));
    if (it == lex.end()) return std::nullopt;
    return it->second;
}

std::size_t lexicon_size() { return lexicon().size(); }

Rgb keyword_base_color(std::string_view keyword)
{
    if (auto c = lexicon_color(keyword)) return *c;
    double hue = static_cast<double>(text::fnv1a64(text::to_lower(keyword)) % 360);
    return from_hsl({hue, 0.65, 0.5});
}

RgbaImage fallback_text_image(std::string_view keyword)
{
    constexpr int kBand = 16, kHeight = 16;
    Hsl base = to_hsl(keyword_base_color(keyword));
    RgbaImage img(kBand * 5, kHeight);
    for (int band = 0; band < 5; ++band) {
        Hsl h = base;
        h.l = std::clamp(base.l + (band - 2) * 0.10, 0.0, 1.0);
        Rgb c = from_hsl(h);
        for (int y = 0; y < kHeight; ++y)
            for (int x = band * kBand; x < (band + 1) * kBand; ++x) img.set(x, y, c);
    }
    return img;
}

std::vector<Palette> palette_from_text(std::string_view chunk, ProviderSuite& suite)
{
    auto keywords = palette_keywords(chunk);
    if (keywords.empty()) throw Error("chroma.no_keywords", "no keywords after stopword removal", std::string(chunk));
    std::vector<Palette> out;
    for (const auto& k : keywords) {
        auto images = suite.images_from_text(k);
        if (images.empty()) throw ProviderError(suite.name(), "image provider returned no images for '" + k + "'");
        for (const auto& img : images) {
            Palette p = extract_palette(img);
            p.label = k;
            out.push_back(std::move(p));
        }
    }
    return out;
}

Matrix5 cost_matrix(const Palette& source, const Palette& target)
{
    Matrix5 c;
    for (std::size_t i = 0; i < kBins; ++i)
        for (std::size_t j = 0; j < kBins; ++j)
            c(static_cast<long>(i), static_cast<long>(j)) = lab_distance<double>(source.bins[i].color, target.bins[j].color);
    return c;
}

TransportPlan emd(const Palette& source, const Palette& target)
{
    TransportPlan plan;
    plan.cost = cost_matrix(source, target);

    // Nodes: 0 source, 1..5 supply bins, 6..10 demand bins, 11 sink.
    struct Edge {
        int to;
        double cap;
        double cost;
    };
    constexpr int N = 12, S = 0, T = 11;
    constexpr double kEps = 1e-15;
    std::vector<Edge> edges;
    std::vector<std::vector<int>> adj(N);
    auto add = [&](int u, int v, double cap, double cost) {
        adj[u].push_back(static_cast<int>(edges.size()));
        edges.push_back({v, cap, cost});
        adj[v].push_back(static_cast<int>(edges.size()));
        edges.push_back({u, 0, -cost});
    };
    double supply = 0, demand = 0;
    for (int i = 0; i < 5; ++i) {
        add(S, 1 + i, source.bins[i].weight, 0);
        supply += source.bins[i].weight;
    }
    std::array<std::array<int, 5>, 5> mid{};
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) {
            mid[i][j] = static_cast<int>(edges.size());
            add(1 + i, 6 + j, std::numeric_limits<double>::infinity(), plan.cost(i, j));
        }
    for (int j = 0; j < 5; ++j) {
        add(6 + j, T, target.bins[j].weight, 0);
        demand += target.bins[j].weight;
    }

    double remaining = std::min(supply, demand);
    while (remaining > kEps) {
        std::array<double, N> dist;
        dist.fill(std::numeric_limits<double>::infinity());
        std::array<int, N> via;
        via.fill(-1);
        dist[S] = 0;
        for (int round = 0; round < N - 1; ++round) {
            bool changed = false;
            for (int u = 0; u < N; ++u) {
                if (dist[u] == std::numeric_limits<double>::infinity()) continue;
                for (int e : adj[u]) {
                    const Edge& ed = edges[static_cast<std::size_t>(e)];
                    if (ed.cap <= kEps) continue;
                    if (dist[u] + ed.cost < dist[ed.to] - 1e-12) {
                        dist[ed.to] = dist[u] + ed.cost;
                        via[ed.to] = e;
                        changed = true;
                    }
                }
            }
            if (!changed) break;
        }
        if (via[T] < 0) break;
        double push = remaining;
        for (int v = T; v != S; v = edges[static_cast<std::size_t>(via[v] ^ 1)].to)
            push = std::min(push, edges[static_cast<std::size_t>(via[v])].cap);
        for (int v = T; v != S; v = edges[static_cast<std::size_t>(via[v] ^ 1)].to) {
            edges[static_cast<std::size_t>(via[v])].cap -= push;
            edges[static_cast<std::size_t>(via[v] ^ 1)].cap += push;
        }
        remaining -= push;
    }

    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) plan.flow(i, j) = edges[static_cast<std::size_t>(mid[i][j] ^ 1)].cap;
    plan.totalCost = plan.flow.cwiseProduct(plan.cost).sum();
    return plan;
}

std::vector<std::size_t> assign(const Eigen::MatrixXd& cost)
{
    const auto n = static_cast<std::size_t>(cost.rows()), m = static_cast<std::size_t>(cost.cols());
    if (n > m) throw Error("chroma.assign", "more rows than columns");
    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0), v(m + 1, 0);
    std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(m + 1, kInf);
        std::vector<bool> used(m + 1, false);
        do {
            used[j0] = true;
            std::size_t i0 = p[j0], j1 = 0;
            double delta = kInf;
            for (std::size_t j = 1; j <= m; ++j) {
                if (used[j]) continue;
                double cur = cost(static_cast<long>(i0 - 1), static_cast<long>(j - 1)) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<std::size_t> out(n, 0);
    for (std::size_t j = 1; j <= m; ++j)
        if (p[j] != 0) out[p[j] - 1] = j - 1;
    return out;
}

namespace {

std::size_t nearest(const Rgb& c, const std::vector<Rgb>& targets)
{
    std::size_t best = 0;
    double bestD = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < targets.size(); ++j) {
        double d = lab_distance<double>(c, targets[j]);
        if (d < bestD) {
            bestD = d;
            best = j;
        }
    }
    return best;
}

std::vector<Rgb> luma_sorted(std::vector<Rgb> colors)
{
    std::stable_sort(colors.begin(), colors.end(), [](const Rgb& a, const Rgb& b) { return luma_d(a) < luma_d(b); });
    return colors;
}

// Rank map of k ordered items onto an ordered pool.
std::size_t rank_index(std::size_t i, std::size_t k, std::size_t poolSize)
{
    if (k <= 1 || poolSize <= 1) return 0;
    return static_cast<std::size_t>(std::lround(static_cast<double>(i) * static_cast<double>(poolSize - 1) /
                                                static_cast<double>(k - 1)));
}

std::map<Rgb, Rgb> sequential_map(const std::vector<Rgb>& src, const std::vector<Rgb>& targets)
{
    std::map<Rgb, Rgb> out;
    if (src.size() == 1) {
        out[src[0]] = targets[nearest(src[0], targets)];
        return out;
    }
    auto sorted = luma_sorted(src);
    auto t = luma_sorted(targets);
    for (std::size_t i = 0; i < sorted.size(); ++i) out[sorted[i]] = t[rank_index(i, sorted.size(), t.size())];
    return out;
}

std::map<Rgb, Rgb> diverging_map(const std::vector<Rgb>& src, const std::vector<Rgb>& targets)
{
    const std::size_t n = src.size();
    if (n < 3) return sequential_map(src, targets);
    auto t = luma_sorted(targets); // t[0] darkest
    std::size_t hi = 1, lo = 1;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (luma_d(src[i]) > luma_d(src[hi])) hi = i;
        if (luma_d(src[i]) < luma_d(src[lo])) lo = i;
    }
    double ends = std::max(luma_d(src.front()), luma_d(src.back()));
    double endsLo = std::min(luma_d(src.front()), luma_d(src.back()));
    bool peak = luma_d(src[hi]) - ends >= endsLo - luma_d(src[lo]);
    std::size_t mid = peak ? hi : lo;

    // Pools are ordered outer (strongest) to inner.
    std::vector<Rgb> poolA, poolB;
    Rgb center;
    if (peak) {
        center = t[4];
        poolA = {t[0], t[2]};
        poolB = {t[1], t[3]};
    } else {
        center = t[0];
        poolA = {t[4], t[2]};
        poolB = {t[3], t[1]};
    }
    std::map<Rgb, Rgb> out;
    out[src[mid]] = center;
    for (std::size_t i = 0; i < mid; ++i) out[src[i]] = poolA[rank_index(i, mid, poolA.size())];
    const std::size_t right = n - mid - 1;
    for (std::size_t k = 0; k < right; ++k) out[src[n - 1 - k]] = poolB[rank_index(k, right, poolB.size())];
    return out;
}

std::map<Rgb, Rgb> categorical_map(const std::vector<SourceColor>& sources, const std::vector<Rgb>& targets)
{
    std::vector<std::size_t> order(sources.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return sources[a].weight > sources[b].weight; });
    std::size_t head = std::min(order.size(), targets.size());
    Eigen::MatrixXd cost(static_cast<long>(head), static_cast<long>(targets.size()));
    for (std::size_t i = 0; i < head; ++i)
        for (std::size_t j = 0; j < targets.size(); ++j)
            cost(static_cast<long>(i), static_cast<long>(j)) = lab_distance<double>(sources[order[i]].color, targets[j]);
    auto picked = assign(cost);
    std::map<Rgb, Rgb> out;
    for (std::size_t i = 0; i < head; ++i) out[sources[order[i]].color] = targets[picked[i]];
    for (std::size_t i = head; i < order.size(); ++i)
        out[sources[order[i]].color] = targets[nearest(sources[order[i]].color, targets)];
    return out;
}

} // namespace

std::map<Rgb, Rgb> recolor_mapping(const std::vector<SourceColor>& sources, const Palette& target, SchemeKind scheme)
{
    if (sources.empty()) throw Error("chroma.sources", "no source colors");
    if (sources.size() > kMaxSourceColors) throw Error("chroma.sources", "too many source colors");
    std::set<Rgb> seen;
    for (const auto& s : sources)
        if (!seen.insert(s.color).second) throw Error("chroma.sources", "source colors must be distinct", to_hex(s.color));
    auto targets = target.colors();
    std::vector<Rgb> src;
    for (const auto& s : sources) src.push_back(s.color);
    switch (scheme) {
    case SchemeKind::Sequential: return sequential_map(src, targets);
    case SchemeKind::Diverging: return diverging_map(src, targets);
    case SchemeKind::Categorical: break;
    }
    return categorical_map(sources, targets);
}

SchemeKind detect_scheme(const std::vector<Rgb>& colors)
{
    if (colors.empty()) return SchemeKind::Categorical;
    std::vector<int> signs;
    for (std::size_t i = 1; i < colors.size(); ++i) {
        double d = luma_d(colors[i]) - luma_d(colors[i - 1]);
        if (std::abs(d) > 1e-9) signs.push_back(d > 0 ? 1 : -1);
    }
    std::size_t changes = 0;
    for (std::size_t i = 1; i < signs.size(); ++i) changes += signs[i] != signs[i - 1];

    if (changes == 0) {
        std::vector<double> hues;
        for (const auto& c : colors) {
            Hsl h = to_hsl(c);
            if (h.s >= 0.15 && h.l > 0.08 && h.l < 0.95) hues.push_back(h.h);
        }
        double span = 0;
        if (hues.size() > 1) {
            std::sort(hues.begin(), hues.end());
            double gap = 360 - hues.back() + hues.front();
            for (std::size_t i = 1; i < hues.size(); ++i) gap = std::max(gap, hues[i] - hues[i - 1]);
            span = 360 - gap;
        }
        return span < 90 ? SchemeKind::Sequential : SchemeKind::Categorical;
    }
    if (changes == 1 && colors.size() >= 3) return SchemeKind::Diverging;
    return SchemeKind::Categorical;
}

json to_json(const Palette& p)
{
    json bins = json::array();
    for (const auto& b : p.bins) bins.push_back({{"color", to_hex(b.color)}, {"weight", b.weight}});
    return {{"label", p.label}, {"bins", bins}, {"sortedByLuminosity", p.sortedByLuminosity}};
}

Palette palette_from_json(const json& j)
{
    Palette p;
    const auto& bins = j.at("bins");
    if (!bins.is_array() || bins.size() != kBins) throw Error("chroma.palette", "a palette has exactly 5 bins");
    for (std::size_t i = 0; i < kBins; ++i) {
        auto c = parse_color(bins[i].at("color").get<std::string>());
        if (!c) throw Error("chroma.palette", "bad palette color", bins[i].at("color").get<std::string>());
        p.bins[i] = {*c, bins[i].value("weight", 0.2)};
    }
    p.label = j.value("label", std::string());
    p.sortedByLuminosity = j.value("sortedByLuminosity", true);
    return p;
}

json to_json(const TransportPlan& t)
{
    json flow = json::array(), cost = json::array();
    for (int i = 0; i < 5; ++i) {
        json fr = json::array(), cr = json::array();
        for (int j = 0; j < 5; ++j) {
            fr.push_back(t.flow(i, j));
            cr.push_back(t.cost(i, j));
        }
        flow.push_back(fr);
        cost.push_back(cr);
    }
    return {{"flow", flow}, {"cost", cost}, {"totalCost", t.totalCost}};
}

} // namespace inkline::chroma
