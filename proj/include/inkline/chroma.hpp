#pragma once

#include "inkline/color.hpp"
#include "inkline/intent.hpp"
#include "inkline/raster.hpp"

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace inkline::chroma {

inline constexpr std::size_t kBins = 5;
inline constexpr std::uint8_t kAlphaCutoff = 16;
inline constexpr std::size_t kMaxSourceColors = 64;

struct ColorBin {
    Rgb color;
    double weight = 0;
    friend bool operator==(const ColorBin&, const ColorBin&) = default;
};

struct Palette {
    std::array<ColorBin, kBins> bins{};
    bool sortedByLuminosity = true;
    std::string label;

    std::vector<Rgb> colors() const;
    friend bool operator==(const Palette&, const Palette&) = default;
};

using Matrix5 = Eigen::Matrix<double, 5, 5>;

struct TransportPlan {
    Matrix5 flow = Matrix5::Zero();
    Matrix5 cost = Matrix5::Zero();
    double totalCost = 0;
};

// Median cut over pixels with alpha >= 16. Throws "chroma.no_opaque_pixels".
Palette extract_palette(const RgbaImage& image);

// Sorts bins by luma ascending (stable) and sets the flag.
void sort_by_luminosity(Palette& p);

// Lowercased word tokens, stopwords dropped, first occurrence kept.
std::vector<std::string> palette_keywords(std::string_view chunk);

// Lexicon base color, if the word is in the built-in table.
std::optional<Rgb> lexicon_color(std::string_view keyword);
std::size_t lexicon_size();
// Lexicon color, else hue = FNV-1a(keyword) mod 360 at S 0.65, L 0.5.
Rgb keyword_base_color(std::string_view keyword);
// Five flat vertical bands at lightness offsets -20, -10, 0, +10, +20 points.
RgbaImage fallback_text_image(std::string_view keyword);

// One palette per provider image, labeled by keyword. Throws "chroma.no_keywords".
std::vector<Palette> palette_from_text(std::string_view chunk, ProviderSuite& suite);

Matrix5 cost_matrix(const Palette& source, const Palette& target);

// Balanced transport by successive shortest paths on real-valued supplies.
TransportPlan emd(const Palette& source, const Palette& target);

// Exact minimum-cost assignment of rows to distinct columns (rows <= cols).
// Returns the column picked for each row.
std::vector<std::size_t> assign(const Eigen::MatrixXd& cost);

struct SourceColor {
    Rgb color;
    double weight = 1;
};

// Throws "chroma.sources" for an empty list or more than 64 colors.
std::map<Rgb, Rgb> recolor_mapping(const std::vector<SourceColor>& sources, const Palette& target, SchemeKind scheme);

SchemeKind detect_scheme(const std::vector<Rgb>& colors);

nlohmann::json to_json(const Palette& p);
Palette palette_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TransportPlan& t);

} // namespace inkline::chroma
