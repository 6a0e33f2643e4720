#pragma once

#include "inkline/animation.hpp"
#include "inkline/charts.hpp"
#include "inkline/compose.hpp"
#include "inkline/svg.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace inkline::document {

enum class LayerKind { StaticChart, AnimatedChart, Dod, StaticGraphic, AnimatedGraphic, Highlight, AnnotationLine, Text };
enum class ConfigField { ShowAxes, ShowLegend, Animate, Recolor, Opacity, Thickness, Style, FrameDelay };

inline constexpr LayerKind kAllLayerKinds[] = {LayerKind::StaticChart,     LayerKind::AnimatedChart, LayerKind::Dod,
                                               LayerKind::StaticGraphic,   LayerKind::AnimatedGraphic,
                                               LayerKind::Highlight,       LayerKind::AnnotationLine, LayerKind::Text};
inline constexpr ConfigField kAllConfigFields[] = {ConfigField::ShowAxes,  ConfigField::ShowLegend, ConfigField::Animate,
                                                   ConfigField::Recolor,   ConfigField::Opacity,    ConfigField::Thickness,
                                                   ConfigField::Style,     ConfigField::FrameDelay};

std::string_view to_string(LayerKind k);
std::string_view to_string(ConfigField f);
LayerKind layer_kind_from_string(std::string_view s);
ConfigField config_field_from_string(std::string_view s);

// The per-kind configuration matrix.
bool permitted(LayerKind kind, ConfigField field);
std::vector<LayerKind> permitted_kinds(ConfigField field);
bool is_animated(LayerKind kind);
bool is_chart(LayerKind kind);

struct Transform {
    double tx = 0, ty = 0;
    double rotationDeg = 0;
    double scale = 1;
    friend bool operator==(const Transform&, const Transform&) = default;
};

struct LayerConfig {
    bool showAxes = true;
    bool showLegend = true;
    std::optional<std::string> animateColumn;
    std::map<Rgb, Rgb> recolor;
    double thickness = 1;
    std::string style = "solid";
    int frameDelayMs = kDefaultFrameDelayMs;
    friend bool operator==(const LayerConfig&, const LayerConfig&) = default;
};

struct TextContent {
    std::string content;
    std::string fontFamily = "sans-serif";
    double sizePt = 24;
    Rgb color{34, 34, 34};
    friend bool operator==(const TextContent&, const TextContent&) = default;
};

struct Layer {
    std::string id;
    LayerKind kind = LayerKind::StaticGraphic;
    std::string assetRef;
    Transform transform;
    int zOrder = 0;
    double opacity = 1;
    bool locked = false;
    LayerConfig config;
    std::optional<std::string> dependsOn; // overlays and annotations follow their base chart
    double width = 0, height = 0;

    // Payload, by kind.
    std::vector<svg::Element> frames; // one for static content
    std::vector<std::string> frameKeys;
    std::optional<charts::ChartSpec> chartSpec;
    std::optional<compose::GlyphMap> glyphs;
    std::optional<compose::HighlightOverlay> overlay;
    std::optional<compose::Annotation> annotation;
    std::optional<TextContent> text;

    std::int64_t epochMs = 0;
    bool restartPending = false;

    friend bool operator==(const Layer&, const Layer&) = default;
};

struct Document {
    std::string id;
    double width = 960, height = 720;
    std::optional<Rgb> background;
    std::string messageRef;
    std::vector<Layer> layers; // kept sorted by zOrder
    std::uint64_t nextLayer = 1;

    const Layer& layer(std::string_view id) const;
    Layer& layer(std::string_view id);
    friend bool operator==(const Document&, const Document&) = default;
};

inline constexpr int kSchemaVersion = 1;
inline constexpr std::size_t kMaxBundleFrames = 64;

Document make_document(std::string id, double width = 960, double height = 720);

// Called after a render-affecting config change (and on demand) to refresh a
// layer's frames from its chart spec.
using LayerRenderer = std::function<void(Layer&)>;

// Renders chart, animated chart and DOD layers from their spec and config.
LayerRenderer chart_renderer(const Dataset& ds, compose::GlyphResolver glyphs = {});

// Appends with zOrder = max + 1, identity transform and the kind's default
// config. Throws "document.asset" when the payload the kind needs is missing.
Layer& add_layer(Document& doc, Layer layer);

// Throws "document.config" (matrix violation / bad value) and "document.locked".
Layer& set_config(Document& doc, std::string_view layerId, ConfigField field, const nlohmann::json& value,
                  const LayerRenderer& render = {});

void bring_forward(Document& doc, std::string_view layerId);
void send_backward(Document& doc, std::string_view layerId);
// Composes: offsets add, rotations add (mod 360), scales multiply.
void transform(Document& doc, std::string_view layerId, const Transform& delta);
void set_locked(Document& doc, std::string_view layerId, bool locked);
// Removes the layer and every layer depending on it.
void remove_layer(Document& doc, std::string_view layerId);
void reset_animations(Document& doc, std::int64_t nowMs = 0);

// Layer content at time `ms` (relative to the document clock), with recolor
// and config applied, in layer-local coordinates.
svg::Element layer_content(const Layer& layer, std::int64_t ms = 0);

// Throws "document.empty".
std::string export_static(const Document& doc);

struct FrameBundle {
    std::vector<std::pair<std::string, std::string>> files; // frame svgs then the manifest
    std::vector<std::int64_t> startsMs, durationsMs;
    std::int64_t cycleMs = 0;
    bool truncated = false;
    std::string manifest;
};

FrameBundle export_frames(const Document& doc, std::size_t cap = kMaxBundleFrames);

// Stored (uncompressed) zip archive.
std::string zip_store(const std::vector<std::pair<std::string, std::string>>& files);

nlohmann::json to_json(const Layer& l);
Layer layer_from_json(const nlohmann::json& j);
std::string serialize(const Document& doc);
// Throws "document.parse" (detail = byte offset) and "document.migration".
Document deserialize(std::string_view payload);

// Snapshot undo/redo over serialized documents.
class History {
public:
    void record(const Document& before);
    bool can_undo() const noexcept { return !undo_.empty(); }
    bool can_redo() const noexcept { return !redo_.empty(); }
    Document undo(const Document& current);
    Document redo(const Document& current);

private:
    std::vector<std::string> undo_, redo_;
    static constexpr std::size_t kLimit = 100;
};

} // namespace inkline::document
