#pragma once

#include "inkline/animation.hpp"
#include "inkline/charts.hpp"
#include "inkline/chroma.hpp"
#include "inkline/filterql.hpp"
#include "inkline/svg.hpp"

#include <nlohmann/json_fwd.hpp>

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace inkline::compose {

enum class Head { None, Dot, Arrow };
std::string_view to_string(Head h);
Head head_from_string(std::string_view s);

struct LineStyle {
    double thicknessPx = 1.5;
    Rgb color{51, 51, 51};
    std::string dash; // SVG dasharray, empty = solid
    Head startHead = Head::None;
    Head endHead = Head::Arrow;

    friend bool operator==(const LineStyle&, const LineStyle&) = default;
};

struct Annotation {
    std::string labelText;
    double labelX = 0, labelY = 0;
    double targetX = 0, targetY = 0;
    LineStyle line;
    double opacity = 1;

    friend bool operator==(const Annotation&, const Annotation&) = default;
};

// Throws Error "compose.annotation" when thickness <= 0 or opacity is outside [0,1].
void validate(const Annotation& a);
svg::Element render_annotation(const Annotation& a);

struct HighlightOverlay {
    std::string baseChartRef;
    std::vector<std::size_t> emphasizedMarks;
    std::vector<std::size_t> dimmedMarks;
    double dimOpacity = 0.3;
    std::vector<Annotation> annotations;

    friend bool operator==(const HighlightOverlay&, const HighlightOverlay&) = default;
};

inline constexpr double kDefaultDimOpacity = 0.3;
inline constexpr double kLabelOffsetPx = 24;

// Overlay drawn above the base chart: a veil that leaves the dimmed marks at
// dimOpacity, the emphasized marks redrawn on top, then the annotations.
svg::Element render_overlay(const HighlightOverlay& overlay, const charts::ChartImage& base);

using HighlightResult = std::variant<HighlightOverlay, charts::ChartImage>;

// Aggregated charts are re-rendered over the selected rows; others get an
// overlay. Throws "compose.empty_selection" and "compose.dataset_mismatch".
HighlightResult highlight(const charts::ChartSpec& spec, const charts::ChartImage& image, const Dataset& ds,
                          const filterql::FilteredTable& filtered, std::string_view chunkText,
                          std::string baseChartRef = {}, double dimOpacity = kDefaultDimOpacity);

struct RecolorResult {
    std::map<Rgb, Rgb> mapping;
    SchemeKind scheme = SchemeKind::Categorical;
};

// Distinct fill/stroke paints in document order. With chartScope only the
// marks and legend groups are read.
std::vector<Rgb> paints(const svg::Element& root, bool chartScope = false);

// Rewrites every fill/stroke occurrence of a mapped paint.
void apply_mapping(svg::Element& root, const std::map<Rgb, Rgb>& mapping, bool chartScope = false);

// Paints weighted by pixel share at 256x256 over all frames; one mapping.
// Throws "compose.no_paints".
RecolorResult recolor_frames(const std::vector<svg::Element*>& frames, const chroma::Palette& target,
                             SchemeKind scheme, bool chartScope);

RecolorResult apply_recolor(charts::ChartImage& chart, const chroma::Palette& target, SchemeKind declared);
RecolorResult apply_recolor(svg::Element& graphic, const chroma::Palette& target);
RecolorResult apply_recolor(AnimatedAsset& animation, const chroma::Palette& target,
                            std::optional<SchemeKind> declared = std::nullopt);

struct GlyphMap {
    std::map<std::string, std::string> assetIds; // legend value -> graphic asset id
    double glyphScale = 2.0;
    friend bool operator==(const GlyphMap&, const GlyphMap&) = default;
};

using GlyphResolver = std::function<svg::Element(const std::string& assetId)>;

// Nested <svg> placing `glyph` in the box (x, y, size, size).
svg::Element place_glyph(const svg::Element& glyph, double x, double y, double size);

// Throws "compose.dod_unsupported" ("DOD unsupported for mark"),
// "compose.dod_no_legend" and "compose.dod_missing_glyph" (detail = value).
charts::ChartImage make_dod(const charts::ChartSpec& spec, const charts::ChartImage& image, const GlyphMap& glyphs,
                            const GlyphResolver& resolve);

// Trims the longer asset to a multiple of the shorter frame count and retimes
// the non-authoritative asset so both cycles match. The visualization (else
// the first argument) keeps its delay. Throws "compose.sync".
std::pair<AnimatedAsset, AnimatedAsset> sync(AnimatedAsset a, AnimatedAsset b);

nlohmann::json to_json(const Annotation& a);
Annotation annotation_from_json(const nlohmann::json& j);
nlohmann::json to_json(const HighlightOverlay& h);
HighlightOverlay highlight_overlay_from_json(const nlohmann::json& j);
nlohmann::json mapping_to_json(const std::map<Rgb, Rgb>& m);
std::map<Rgb, Rgb> mapping_from_json(const nlohmann::json& j);

} // namespace inkline::compose
