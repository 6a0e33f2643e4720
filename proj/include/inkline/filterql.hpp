#pragma once

#include "inkline/dataset.hpp"
#include "inkline/intent.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace inkline::filterql {

enum class CompareOp { Eq, Ne, Lt, Le, Gt, Ge };
std::string_view to_string(CompareOp op);

using Literal = std::variant<double, std::string>;

struct Comparison {
    std::string column;
    CompareOp op = CompareOp::Eq;
    Literal literal;
    friend bool operator==(const Comparison&, const Comparison&) = default;
};

struct OrderKey {
    std::string column;
    bool descending = false;
    friend bool operator==(const OrderKey&, const OrderKey&) = default;
};

struct FilterQuery {
    std::string table = "df";
    std::vector<Comparison> predicates; // conjunction
    std::vector<OrderKey> orderBy;
    std::optional<std::size_t> limit;
    friend bool operator==(const FilterQuery&, const FilterQuery&) = default;
};

struct FilteredTable {
    std::string datasetId;
    std::vector<std::size_t> rowIndices;
    FilterQuery query;
};

// Grammar (keywords case-insensitive):
//   SELECT * FROM ident [WHERE cmp (AND cmp)*] [ORDER BY ident [ASC|DESC] (, ...)*] [LIMIT int] [;]
//   cmp := ident (= | <> | < | <= | > | >=) (number | 'string')
// Anything else throws Error "filterql.unsupported_syntax" (detail = byte offset);
// lexical problems throw "filterql.syntax".
FilterQuery parse_query(std::string_view text);

// Canonical text; parse_query(render(q)) == q.
std::string render(const FilterQuery& q);

// Binds against the schema and runs the query. Throws "filterql.bind"
// (detail = column) on unknown columns or literal/column kind mismatch.
FilteredTable execute(const FilterQuery& q, const Dataset& ds);

// Fallback generator: equality on nominal values named in the chunk plus
// "above/over/more than N" and "below/under/less than N" bounds on the most
// relevant quantitative column. Throws "filterql.no_terms".
std::string fallback_filter(std::string_view chunk, const DatasetMeta& meta);

// Provider text validated by parse_query; invalid text is rethrown with the
// raw text attached for repair.
FilterQuery generate_filter(std::string_view chunk, const DatasetMeta& meta, ProviderSuite& suite,
                            std::string* rawText = nullptr);

nlohmann::json to_json(const FilteredTable& t);

} // namespace inkline::filterql
