#pragma once

#include "inkline/animation.hpp"
#include "inkline/color.hpp"
#include "inkline/dataset.hpp"
#include "inkline/intent.hpp"
#include "inkline/svg.hpp"

#include <nlohmann/json_fwd.hpp>

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace inkline::charts {

enum class Mark { Point, Line, Bar, Rect, HistogramBar, Arc };
enum class Channel { X, Y, Color };
enum class Aggregate { None, Mean, Count };

std::string_view to_string(Mark m);
std::string_view to_string(Channel c);
std::string_view to_string(Aggregate a);
Mark mark_from_string(std::string_view s);
Channel channel_from_string(std::string_view s);
Aggregate aggregate_from_string(std::string_view s);

struct ChannelEncoding {
    Channel channel = Channel::X;
    std::string column;
    ColumnKind kind = ColumnKind::Quantitative;
    Aggregate aggregate = Aggregate::None;
    bool binned = false;

    friend bool operator==(const ChannelEncoding&, const ChannelEncoding&) = default;
};

// Empty colors means the built-in defaults (10-color cycle / blue ramp).
struct ColorScheme {
    std::vector<Rgb> colors;
    SchemeKind kind = SchemeKind::Categorical;

    friend bool operator==(const ColorScheme&, const ColorScheme&) = default;
};

struct ChartSpec {
    Mark mark = Mark::Point;
    std::vector<ChannelEncoding> encodings;
    std::string datasetId;
    std::optional<std::vector<std::size_t>> rowFilter;
    bool showAxes = true;
    bool showLegend = true;
    ColorScheme colorScheme;
    double markScale = 1.0;

    const ChannelEncoding* encoding(Channel c) const;
    // Distinct columns, encoding order.
    std::vector<std::string> columns() const;
    // Any aggregate/binning, or a mark that always summarizes rows.
    bool aggregated() const;

    friend bool operator==(const ChartSpec&, const ChartSpec&) = default;
};

struct MarkGeometry {
    std::vector<std::size_t> rows; // dataset row indices the mark stands for
    std::string group;             // category / bin label
    std::string series;            // color category, empty without a color encoding
    std::string shape;             // circle, rect, wedge, vertex
    double cx = 0, cy = 0;
    double width = 0, height = 0;
    Rgb paint;

    friend bool operator==(const MarkGeometry&, const MarkGeometry&) = default;
};

struct LegendEntry {
    std::string value;
    Rgb paint;
    double x = 0, y = 0, size = 12; // swatch box

    friend bool operator==(const LegendEntry&, const LegendEntry&) = default;
};

struct PlotArea {
    double x = 0, y = 0, width = 0, height = 0;
    friend bool operator==(const PlotArea&, const PlotArea&) = default;
};

struct ChartImage {
    svg::Element svg;
    double width = 480, height = 360;
    std::vector<MarkGeometry> marks;
    std::vector<LegendEntry> legend;
    std::optional<std::pair<double, double>> xDomain, yDomain; // numeric scales only
    PlotArea plot;

    friend bool operator==(const ChartImage&, const ChartImage&) = default;
};

inline constexpr double kChartWidth = 480;
inline constexpr double kChartHeight = 360;
inline constexpr std::size_t kMaxAxisCardinality = 50;
inline constexpr std::size_t kArcCardinality = 8;
inline constexpr std::size_t kLegendCardinality = 12;
inline constexpr std::size_t kBins = 10;
inline constexpr std::size_t kMaxTicks = 8;
inline constexpr std::size_t kMaxCharts = 20;

const std::vector<Rgb>& default_categorical();
const std::vector<Rgb>& default_sequential();

// Temporal, or Quantitative with a time-lexicon name (treated as an ordered x).
ColumnKind effective_kind(const ColumnMeta& c);

// Rule table over the relevant columns (relevance order). Unknown names are
// ignored; an empty list gives no charts.
std::vector<ChartSpec> enumerate_charts(const std::vector<std::string>& relevant, const DatasetMeta& meta);

// Ranked and capped at 20.
std::vector<ChartSpec> rank_chart_specs(std::vector<ChartSpec> specs, const std::vector<std::string>& relevanceOrder);
RecommendationBatch rank_charts(std::vector<ChartSpec> specs, const std::vector<std::string>& relevanceOrder);

std::string describe(const ChartSpec& spec);

// Throws Error "charts.bind" (detail = column) or "charts.cardinality".
void validate(const ChartSpec& spec, const Dataset& ds);

ChartImage render_chart(const ChartSpec& spec, const Dataset& ds);

// Per-key frames over a shared scale context. Throws "charts.nothing_to_animate"
// and "animation.invalid" for a non-positive delay.
AnimatedAsset animate_chart(const ChartSpec& spec, const Dataset& ds, const std::string& timeColumn,
                            int frameDelayMs = kDefaultFrameDelayMs);

// Frame images with their mark geometry, same frames as animate_chart.
std::vector<ChartImage> animate_chart_images(const ChartSpec& spec, const Dataset& ds, const std::string& timeColumn,
                                             std::vector<std::string>* keys = nullptr);

nlohmann::json to_json(const ChannelEncoding& e);
nlohmann::json to_json(const ChartSpec& s);
ChartSpec chart_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const MarkGeometry& m);
nlohmann::json to_json(const ChartImage& img);
ChartImage chart_image_from_json(const nlohmann::json& j);

} // namespace inkline::charts
