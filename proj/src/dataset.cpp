#include "inkline/dataset.hpp"

#include "inkline/error.hpp"
#include "inkline/text.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

namespace inkline {

using nlohmann::json;

std::string_view to_string(ColumnKind k)
{
    switch (k) {
    case ColumnKind::Quantitative: return "quantitative";
    case ColumnKind::Nominal: return "nominal";
    case ColumnKind::Temporal: return "temporal";
    }
    return "nominal";
}

ColumnKind column_kind_from_string(std::string_view s)
{
    if (s == "quantitative") return ColumnKind::Quantitative;
    if (s == "nominal") return ColumnKind::Nominal;
    if (s == "temporal") return ColumnKind::Temporal;
    throw Error("dataset.schema", "unknown column kind: " + std::string(s));
}

namespace {

bool read_digits(std::string_view s, std::size_t& pos, std::size_t n, int& out)
{
    if (pos + n > s.size()) return false;
    out = 0;
    for (std::size_t i = 0; i < n; ++i) {
        char c = s[pos + i];
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
        out = out * 10 + (c - '0');
    }
    pos += n;
    return true;
}

bool expect(std::string_view s, std::size_t& pos, char c)
{
    if (pos < s.size() && s[pos] == c) {
        ++pos;
        return true;
    }
    return false;
}

} // namespace

std::optional<Timestamp> parse_iso8601(std::string_view s)
{
    using namespace std::chrono;
    std::size_t pos = 0;
    int y = 0, mo = 0, d = 0;
    if (!read_digits(s, pos, 4, y) || !expect(s, pos, '-') || !read_digits(s, pos, 2, mo) || !expect(s, pos, '-') ||
        !read_digits(s, pos, 2, d))
        return std::nullopt;
    year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) return std::nullopt;
    std::int64_t secs = sys_days(ymd).time_since_epoch().count() * std::int64_t{86400};
    if (pos == s.size()) return Timestamp{secs};
    if (s[pos] != 'T' && s[pos] != ' ') return std::nullopt;
    ++pos;
    int hh = 0, mm = 0, ss = 0;
    if (!read_digits(s, pos, 2, hh) || !expect(s, pos, ':') || !read_digits(s, pos, 2, mm)) return std::nullopt;
    if (expect(s, pos, ':')) {
        if (!read_digits(s, pos, 2, ss)) return std::nullopt;
        if (expect(s, pos, '.')) {
            std::size_t start = pos;
            while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
            if (pos == start) return std::nullopt;
        }
    }
    if (hh > 23 || mm > 59 || ss > 60) return std::nullopt;
    secs += hh * 3600 + mm * 60 + ss;
    if (pos == s.size()) return Timestamp{secs};
    if (s[pos] == 'Z' && pos + 1 == s.size()) return Timestamp{secs};
    if (s[pos] == '+' || s[pos] == '-') {
        int sign = s[pos] == '+' ? 1 : -1;
        ++pos;
        int oh = 0, om = 0;
        if (!read_digits(s, pos, 2, oh)) return std::nullopt;
        expect(s, pos, ':');
        if (!read_digits(s, pos, 2, om) || pos != s.size()) return std::nullopt;
        return Timestamp{secs - sign * (oh * 3600 + om * 60)};
    }
    return std::nullopt;
}

std::string format_iso8601(Timestamp t)
{
    using namespace std::chrono;
    std::int64_t days = t.seconds >= 0 ? t.seconds / 86400 : -((-t.seconds + 86399) / 86400);
    std::int64_t rem = t.seconds - days * 86400;
    year_month_day ymd{sys_days{std::chrono::days{days}}};
    std::ostringstream os;
    os.fill('0');
    os.width(4);
    os << static_cast<int>(ymd.year()) << '-';
    os.width(2);
    os << static_cast<unsigned>(ymd.month()) << '-';
    os.width(2);
    os << static_cast<unsigned>(ymd.day());
    if (rem != 0) {
        os << 'T';
        os.width(2);
        os << rem / 3600 << ':';
        os.width(2);
        os << (rem / 60) % 60 << ':';
        os.width(2);
        os << rem % 60 << 'Z';
    }
    return os.str();
}

std::string cell_text(const Cell& c)
{
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::monostate>) return "";
            else if constexpr (std::is_same_v<T, double>) return text::format_number(v);
            else if constexpr (std::is_same_v<T, std::string>) return v;
            else return format_iso8601(v);
        },
        c);
}

std::optional<std::size_t> Dataset::column_index(std::string_view name) const
{
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i].name == name) return i;
    return std::nullopt;
}

bool is_null_text(std::string_view s)
{
    std::string t = text::trim(s);
    return t.empty() || t == "NA" || t == "N/A" || t == "null" || t == "NULL" || t == "NaN";
}

ColumnKind infer_kind(const std::vector<std::string>& values)
{
    std::size_t nonNull = 0, dates = 0, numbers = 0;
    for (const auto& raw : values) {
        if (is_null_text(raw)) continue;
        ++nonNull;
        std::string v = text::trim(raw);
        if (parse_iso8601(v)) ++dates;
        else if (text::parse_number(v)) ++numbers;
    }
    if (nonNull == 0) return ColumnKind::Quantitative;
    auto share = [&](std::size_t n) { return static_cast<double>(n) / static_cast<double>(nonNull); };
    if (share(dates) >= kKindThreshold) return ColumnKind::Temporal;
    if (share(numbers) >= kKindThreshold) return ColumnKind::Quantitative;
    return ColumnKind::Nominal;
}

namespace {

std::vector<std::vector<std::string>> split_records(std::string_view content, char delim)
{
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool inQuotes = false, fieldStarted = false, any = false;
    auto endField = [&] {
        record.push_back(std::move(field));
        field.clear();
        fieldStarted = false;
    };
    auto endRecord = [&] {
        endField();
        // blank lines are skipped
        if (!(record.size() == 1 && record[0].empty())) records.push_back(std::move(record));
        record.clear();
        any = false;
    };
    for (std::size_t i = 0; i < content.size(); ++i) {
        char c = content[i];
        if (inQuotes) {
            if (c == '"') {
                if (i + 1 < content.size() && content[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    inQuotes = false;
                }
            } else {
                field.push_back(c);
            }
            continue;
        }
        any = true;
        if (c == '"' && !fieldStarted) {
            inQuotes = true;
            fieldStarted = true;
        } else if (c == delim) {
            endField();
        } else if (c == '\n') {
            endRecord();
        } else if (c == '\r') {
            if (i + 1 < content.size() && content[i + 1] == '\n') continue;
            endRecord();
        } else {
            field.push_back(c);
            fieldStarted = true;
        }
    }
    if (inQuotes) throw Error("dataset.parse", "unterminated quoted field");
    if (any || !field.empty() || !record.empty()) endRecord();
    return records;
}

Cell convert(const std::string& raw, ColumnKind kind)
{
    if (is_null_text(raw)) return std::monostate{};
    std::string v = text::trim(raw);
    switch (kind) {
    case ColumnKind::Quantitative:
        if (auto n = text::parse_number(v)) return *n;
        return std::monostate{};
    case ColumnKind::Temporal:
        if (auto t = parse_iso8601(v)) return *t;
        return std::monostate{};
    case ColumnKind::Nominal: return v;
    }
    return std::monostate{};
}

} // namespace

Dataset ingest_tabular(std::string_view content, char delimiter)
{
    if (delimiter != ',' && delimiter != '\t' && delimiter != ';')
        throw Error("dataset.delimiter", "delimiter must be comma, tab or semicolon");
    // UTF-8 byte order mark
    std::string_view body = content;
    if (body.substr(0, 3) == "\xEF\xBB\xBF") body.remove_prefix(3);
    if (text::trim(body).empty()) throw Error("dataset.empty", "empty dataset");

    auto records = split_records(body, delimiter);
    if (records.empty()) throw Error("dataset.empty", "empty dataset");
    const auto& header = records.front();
    const std::size_t width = header.size();
    for (std::size_t r = 1; r < records.size(); ++r) {
        if (records[r].size() != width) {
            throw Error("dataset.ragged_row",
                        "row " + std::to_string(r) + " has " + std::to_string(records[r].size()) +
                            " cells, header has " + std::to_string(width),
                        std::to_string(r));
        }
    }

    Dataset ds;
    std::string digestInput(1, delimiter);
    digestInput.append(content);
    ds.id = "ds-" + text::hex64(text::fnv1a64(digestInput));
    ds.columns.resize(width);
    std::vector<std::vector<std::string>> byColumn(width);
    for (std::size_t c = 0; c < width; ++c) {
        ds.columns[c].name = text::trim(header[c]);
        for (std::size_t r = 1; r < records.size(); ++r) byColumn[c].push_back(records[r][c]);
        ds.columns[c].kind = infer_kind(byColumn[c]);
    }
    ds.rows.assign(records.size() - 1, std::vector<Cell>(width));
    for (std::size_t c = 0; c < width; ++c)
        for (std::size_t r = 0; r < ds.rows.size(); ++r) ds.rows[r][c] = convert(byColumn[c][r], ds.columns[c].kind);

    // schema carries the statistics as well
    DatasetMeta meta = extract_meta(ds);
    ds.columns = meta.columns;
    return ds;
}

DatasetMeta extract_meta(const Dataset& ds)
{
    DatasetMeta meta;
    meta.datasetId = ds.id;
    meta.rowCount = ds.rowCount();
    for (std::size_t c = 0; c < ds.columns.size(); ++c) {
        ColumnMeta col;
        col.name = ds.columns[c].name;
        col.kind = ds.columns[c].kind;
        std::unordered_map<std::string, std::size_t> counts;
        std::vector<std::string> firstSeen;
        for (const auto& row : ds.rows) {
            const Cell& cell = row[c];
            if (is_null(cell)) {
                ++col.nullCount;
                continue;
            }
            if (col.kind == ColumnKind::Nominal) {
                const auto& s = std::get<std::string>(cell);
                if (counts[s]++ == 0) firstSeen.push_back(s);
            } else {
                if (!col.minValue || cell < *col.minValue) col.minValue = cell;
                if (!col.maxValue || *col.maxValue < cell) col.maxValue = cell;
            }
        }
        if (col.kind == ColumnKind::Nominal) {
            // descending frequency, first occurrence breaks ties
            std::stable_sort(firstSeen.begin(), firstSeen.end(),
                             [&](const std::string& a, const std::string& b) { return counts[a] > counts[b]; });
            if (firstSeen.size() > kUniqueValueCap) firstSeen.resize(kUniqueValueCap);
            col.uniqueValues = std::move(firstSeen);
        }
        meta.columns.push_back(std::move(col));
    }

    std::ostringstream os;
    os << meta.rowCount << " rows; columns: ";
    for (std::size_t i = 0; i < meta.columns.size(); ++i) {
        const auto& col = meta.columns[i];
        if (i) os << ", ";
        os << col.name << " (" << to_string(col.kind);
        if (col.kind == ColumnKind::Nominal) {
            os << ": ";
            for (std::size_t k = 0; k < std::min<std::size_t>(3, col.uniqueValues.size()); ++k)
                os << (k ? ", " : "") << col.uniqueValues[k];
            if (col.uniqueValues.size() > 3) os << ", ...";
        } else if (col.minValue) {
            os << ", " << cell_text(*col.minValue) << " to " << cell_text(*col.maxValue);
        } else {
            os << ", empty";
        }
        os << ")";
    }
    os << ".";
    meta.summaryText = os.str();
    return meta;
}

json cell_to_json(const Cell& c)
{
    return std::visit(
        [](const auto& v) -> json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::monostate>) return nullptr;
            else if constexpr (std::is_same_v<T, double>) return v;
            else if constexpr (std::is_same_v<T, std::string>) return v;
            else return format_iso8601(v);
        },
        c);
}

namespace {

Cell cell_from_json(const json& j, ColumnKind kind)
{
    if (j.is_null()) return std::monostate{};
    switch (kind) {
    case ColumnKind::Quantitative: return j.get<double>();
    case ColumnKind::Nominal: return j.get<std::string>();
    case ColumnKind::Temporal: {
        auto t = parse_iso8601(j.get<std::string>());
        if (!t) throw Error("dataset.schema", "bad timestamp in stored dataset");
        return *t;
    }
    }
    return std::monostate{};
}

} // namespace

json to_json(const ColumnMeta& c)
{
    json j = {{"name", c.name}, {"kind", to_string(c.kind)}, {"nullCount", c.nullCount}};
    if (c.kind == ColumnKind::Nominal) j["uniqueValues"] = c.uniqueValues;
    if (c.minValue) j["minValue"] = cell_to_json(*c.minValue);
    if (c.maxValue) j["maxValue"] = cell_to_json(*c.maxValue);
    return j;
}

ColumnMeta column_meta_from_json(const json& j)
{
    ColumnMeta c;
    c.name = j.at("name").get<std::string>();
    c.kind = column_kind_from_string(j.at("kind").get<std::string>());
    c.nullCount = j.value("nullCount", std::size_t{0});
    if (j.contains("uniqueValues")) c.uniqueValues = j.at("uniqueValues").get<std::vector<std::string>>();
    if (j.contains("minValue")) c.minValue = cell_from_json(j.at("minValue"), c.kind);
    if (j.contains("maxValue")) c.maxValue = cell_from_json(j.at("maxValue"), c.kind);
    return c;
}

json to_json(const DatasetMeta& m)
{
    json cols = json::array();
    for (const auto& c : m.columns) cols.push_back(to_json(c));
    return {{"datasetId", m.datasetId}, {"rowCount", m.rowCount}, {"columns", cols}, {"summaryText", m.summaryText}};
}

void save_dataset(const Dataset& ds, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    json schema = {{"id", ds.id}, {"rowCount", ds.rowCount()}, {"columns", json::array()}};
    json columns = json::array();
    for (std::size_t c = 0; c < ds.columns.size(); ++c) {
        schema["columns"].push_back(to_json(ds.columns[c]));
        json values = json::array();
        for (const auto& row : ds.rows) values.push_back(cell_to_json(row[c]));
        columns.push_back(std::move(values));
    }
    std::ofstream(dir / (ds.id + ".schema.json")) << schema.dump(2) << '\n';
    std::ofstream(dir / (ds.id + ".columns.json")) << columns.dump() << '\n';
}

Dataset load_dataset(const std::filesystem::path& dir, const std::string& id)
{
    std::ifstream schemaIn(dir / (id + ".schema.json"));
    std::ifstream columnsIn(dir / (id + ".columns.json"));
    if (!schemaIn || !columnsIn) throw NotFound("dataset", id);
    json schema = json::parse(schemaIn);
    json columns = json::parse(columnsIn);
    Dataset ds;
    ds.id = schema.at("id").get<std::string>();
    for (const auto& c : schema.at("columns")) ds.columns.push_back(column_meta_from_json(c));
    std::size_t rowCount = schema.at("rowCount").get<std::size_t>();
    if (columns.size() != ds.columns.size()) throw Error("dataset.schema", "column store does not match schema");
    ds.rows.assign(rowCount, std::vector<Cell>(ds.columns.size()));
    for (std::size_t c = 0; c < ds.columns.size(); ++c) {
        if (columns[c].size() != rowCount) throw Error("dataset.schema", "column length does not match rowCount");
        for (std::size_t r = 0; r < rowCount; ++r) ds.rows[r][c] = cell_from_json(columns[c][r], ds.columns[c].kind);
    }
    return ds;
}

} // namespace inkline
