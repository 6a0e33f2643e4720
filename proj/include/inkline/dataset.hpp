#pragma once

#include <nlohmann/json_fwd.hpp>

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace inkline {

enum class ColumnKind { Quantitative, Nominal, Temporal };

std::string_view to_string(ColumnKind k);
ColumnKind column_kind_from_string(std::string_view s);

// Seconds since the Unix epoch, UTC.
struct Timestamp {
    std::int64_t seconds = 0;
    friend auto operator<=>(const Timestamp&, const Timestamp&) = default;
};

// ISO-8601 calendar date or date-time: YYYY-MM-DD[(T| )hh:mm[:ss[.frac]]][Z|(+|-)hh[:]mm]
std::optional<Timestamp> parse_iso8601(std::string_view s);
// "YYYY-MM-DD" at midnight, "YYYY-MM-DDThh:mm:ssZ" otherwise.
std::string format_iso8601(Timestamp t);

using Cell = std::variant<std::monostate, double, std::string, Timestamp>;

inline bool is_null(const Cell& c) { return std::holds_alternative<std::monostate>(c); }
std::string cell_text(const Cell& c);

struct ColumnMeta {
    std::string name;
    ColumnKind kind = ColumnKind::Nominal;
    std::vector<std::string> uniqueValues; // Nominal only, most frequent first, capped
    std::optional<Cell> minValue;           // Quantitative/Temporal only
    std::optional<Cell> maxValue;
    std::size_t nullCount = 0;

    friend bool operator==(const ColumnMeta&, const ColumnMeta&) = default;
};

struct Dataset {
    std::string id;
    std::vector<ColumnMeta> columns;
    std::vector<std::vector<Cell>> rows;

    std::size_t rowCount() const noexcept { return rows.size(); }
    // Index of a column by name, if present.
    std::optional<std::size_t> column_index(std::string_view name) const;

    friend bool operator==(const Dataset&, const Dataset&) = default;
};

struct DatasetMeta {
    std::string datasetId;
    std::vector<ColumnMeta> columns;
    std::size_t rowCount = 0;
    std::string summaryText;
};

inline constexpr std::size_t kUniqueValueCap = 64;
inline constexpr double kKindThreshold = 0.9;

// Parses delimited text (RFC 4180 quoting) with a header row.
// Throws Error "dataset.empty" / "dataset.ragged_row" / "dataset.delimiter".
Dataset ingest_tabular(std::string_view content, char delimiter = ',');

// Temporal if >= 90% of non-null cells are ISO dates, else Quantitative if
// >= 90% are numbers, else Nominal. A column with no non-null cells is
// Quantitative (so it carries neither unique values nor a range).
ColumnKind infer_kind(const std::vector<std::string>& values);

// Null cell spellings: "", "NA", "N/A", "null", "NULL", "NaN".
bool is_null_text(std::string_view s);

DatasetMeta extract_meta(const Dataset& ds);

nlohmann::json to_json(const ColumnMeta& c);
ColumnMeta column_meta_from_json(const nlohmann::json& j);
nlohmann::json to_json(const DatasetMeta& m);
nlohmann::json cell_to_json(const Cell& c);

// Columnar persistence: <id>.schema.json + <id>.columns.json in `dir`.
void save_dataset(const Dataset& ds, const std::filesystem::path& dir);
Dataset load_dataset(const std::filesystem::path& dir, const std::string& id);

} // namespace inkline
