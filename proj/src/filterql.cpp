#include "inkline/filterql.hpp"

#include "inkline/error.hpp"
#include "inkline/text.hpp"

#include <algorithm>
#include <cctype>
#include <regex>

namespace inkline::filterql {

using nlohmann::json;

std::string_view to_string(CompareOp op)
{
    switch (op) {
    case CompareOp::Eq: return "=";
    case CompareOp::Ne: return "<>";
    case CompareOp::Lt: return "<";
    case CompareOp::Le: return "<=";
    case CompareOp::Gt: return ">";
    case CompareOp::Ge: return ">=";
    }
    return "=";
}

namespace {

enum class Tok { Ident, QuotedIdent, String, Number, Op, Star, Comma, LParen, RParen, Semicolon, Other, End };

struct Token {
    Tok kind = Tok::End;
    std::string text; // identifier / literal value / operator
    std::size_t offset = 0;
};

[[noreturn]] void unsupported(const std::string& what, std::size_t offset)
{
    throw Error("filterql.unsupported_syntax",
                "unsupported syntax: " + what + " at byte " + std::to_string(offset), std::to_string(offset));
}

[[noreturn]] void syntax(const std::string& what, std::size_t offset)
{
    throw Error("filterql.syntax", "syntax error: " + what + " at byte " + std::to_string(offset),
                std::to_string(offset));
}

std::vector<Token> lex(std::string_view s)
{
    std::vector<Token> out;
    std::size_t i = 0;
    auto isIdentStart = [](char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; };
    auto isIdentChar = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; };
    while (i < s.size()) {
        char c = s[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        Token t;
        t.offset = i;
        if (isIdentStart(c)) {
            std::size_t j = i;
            while (j < s.size() && isIdentChar(s[j])) ++j;
            t.kind = Tok::Ident;
            t.text = std::string(s.substr(i, j - i));
            i = j;
        } else if (c == '"' || c == '`') {
            char q = c;
            std::size_t j = i + 1;
            for (;;) {
                if (j >= s.size()) syntax("unterminated quoted identifier", i);
                if (s[j] == q) {
                    if (j + 1 < s.size() && s[j + 1] == q) {
                        t.text.push_back(q);
                        j += 2;
                        continue;
                    }
                    break;
                }
                t.text.push_back(s[j++]);
            }
            t.kind = Tok::QuotedIdent;
            i = j + 1;
        } else if (c == '\'') {
            std::size_t j = i + 1;
            for (;;) {
                if (j >= s.size()) syntax("unterminated string literal", i);
                if (s[j] == '\'') {
                    if (j + 1 < s.size() && s[j + 1] == '\'') {
                        t.text.push_back('\'');
                        j += 2;
                        continue;
                    }
                    break;
                }
                t.text.push_back(s[j++]);
            }
            t.kind = Tok::String;
            i = j + 1;
        } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                   ((c == '-' || c == '.') && i + 1 < s.size() &&
                    (std::isdigit(static_cast<unsigned char>(s[i + 1])) || s[i + 1] == '.'))) {
            std::size_t j = i + (c == '-' ? 1 : 0);
            bool dot = false, exp = false;
            while (j < s.size()) {
                char d = s[j];
                if (std::isdigit(static_cast<unsigned char>(d))) {
                    ++j;
                } else if (d == '.' && !dot && !exp) {
                    dot = true;
                    ++j;
                } else if ((d == 'e' || d == 'E') && !exp && j + 1 < s.size() &&
                           (std::isdigit(static_cast<unsigned char>(s[j + 1])) ||
                            ((s[j + 1] == '-' || s[j + 1] == '+') && j + 2 < s.size() &&
                             std::isdigit(static_cast<unsigned char>(s[j + 2]))))) {
                    exp = true;
                    j += 2;
                } else {
                    break;
                }
            }
            t.kind = Tok::Number;
            t.text = std::string(s.substr(i, j - i));
            if (!text::parse_number(t.text)) syntax("bad number '" + t.text + "'", i);
            i = j;
        } else if (c == '<' || c == '>' || c == '=' || c == '!') {
            std::size_t j = i + 1;
            if (j < s.size() && (s[j] == '=' || (c == '<' && s[j] == '>'))) ++j;
            t.kind = Tok::Op;
            t.text = std::string(s.substr(i, j - i));
            i = j;
        } else {
            switch (c) {
            case '*': t.kind = Tok::Star; break;
            case ',': t.kind = Tok::Comma; break;
            case '(': t.kind = Tok::LParen; break;
            case ')': t.kind = Tok::RParen; break;
            case ';': t.kind = Tok::Semicolon; break;
            default: t.kind = Tok::Other; break;
            }
            t.text = std::string(1, c);
            ++i;
        }
        out.push_back(std::move(t));
    }
    out.push_back({Tok::End, "", s.size()});
    return out;
}

bool keyword_is(const Token& t, std::string_view kw)
{
    return t.kind == Tok::Ident && text::to_lower(t.text) == text::to_lower(kw);
}

const std::vector<std::string_view> kReserved = {"select", "from",  "where", "and",   "or",    "order",
                                                  "by",     "asc",   "desc",  "limit", "not",   "in",
                                                  "like",   "is",    "null",  "join",  "group", "having",
                                                  "union",  "as",    "on",    "between", "offset", "distinct"};

bool is_reserved(const std::string& word)
{
    std::string lw = text::to_lower(word);
    return std::find(kReserved.begin(), kReserved.end(), lw) != kReserved.end();
}

class Parser {
public:
    explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

    FilterQuery run()
    {
        FilterQuery q;
        expect_keyword("SELECT");
        if (keyword_is(peek(), "DISTINCT")) unsupported("DISTINCT", peek().offset);
        if (peek().kind != Tok::Star) unsupported("projection other than *", peek().offset);
        next();
        if (peek().kind == Tok::Comma) unsupported("projection other than *", peek().offset);
        expect_keyword("FROM");
        if (peek().kind == Tok::LParen) unsupported("subquery", peek().offset);
        q.table = identifier("table name");
        if (peek().kind == Tok::Comma || keyword_is(peek(), "JOIN") || keyword_is(peek(), "INNER") ||
            keyword_is(peek(), "LEFT") || keyword_is(peek(), "RIGHT") || keyword_is(peek(), "CROSS") ||
            keyword_is(peek(), "NATURAL") || keyword_is(peek(), "FULL"))
            unsupported("join", peek().offset);

        if (keyword_is(peek(), "WHERE")) {
            next();
            q.predicates.push_back(comparison());
            for (;;) {
                if (keyword_is(peek(), "AND")) {
                    next();
                    q.predicates.push_back(comparison());
                } else if (keyword_is(peek(), "OR")) {
                    unsupported("OR", peek().offset);
                } else {
                    break;
                }
            }
        }
        if (keyword_is(peek(), "GROUP") || keyword_is(peek(), "HAVING") || keyword_is(peek(), "UNION"))
            unsupported(peek().text, peek().offset);
        if (keyword_is(peek(), "ORDER")) {
            next();
            expect_keyword("BY");
            for (;;) {
                OrderKey key;
                if (peek().kind == Tok::Ident && peek2().kind == Tok::LParen) unsupported("function", peek().offset);
                key.column = identifier("order column");
                if (keyword_is(peek(), "ASC")) {
                    next();
                } else if (keyword_is(peek(), "DESC")) {
                    key.descending = true;
                    next();
                }
                q.orderBy.push_back(std::move(key));
                if (peek().kind != Tok::Comma) break;
                next();
            }
        }
        if (keyword_is(peek(), "LIMIT")) {
            next();
            const Token& t = peek();
            if (t.kind != Tok::Number || t.text.find_first_not_of("0123456789") != std::string::npos)
                syntax("LIMIT expects a non-negative integer", t.offset);
            q.limit = static_cast<std::size_t>(std::stoull(t.text));
            next();
            if (keyword_is(peek(), "OFFSET")) unsupported("OFFSET", peek().offset);
        }
        if (peek().kind == Tok::Semicolon) next();
        if (peek().kind != Tok::End) {
            if (keyword_is(peek(), "OR")) unsupported("OR", peek().offset);
            syntax("unexpected '" + peek().text + "'", peek().offset);
        }
        return q;
    }

private:
    const Token& peek() const { return toks_[pos_]; }
    const Token& peek2() const { return toks_[std::min(pos_ + 1, toks_.size() - 1)]; }
    void next()
    {
        if (pos_ + 1 < toks_.size()) ++pos_;
    }

    void expect_keyword(std::string_view kw)
    {
        if (!keyword_is(peek(), kw)) syntax("expected " + std::string(kw), peek().offset);
        next();
    }

    std::string identifier(const std::string& what)
    {
        const Token& t = peek();
        if (t.kind == Tok::QuotedIdent || (t.kind == Tok::Ident && !is_reserved(t.text))) {
            std::string out = t.text;
            next();
            return out;
        }
        syntax("expected " + what, t.offset);
    }

    Comparison comparison()
    {
        Comparison cmp;
        if (keyword_is(peek(), "NOT")) unsupported("NOT", peek().offset);
        if (peek().kind == Tok::LParen) unsupported("parenthesized expression", peek().offset);
        if ((peek().kind == Tok::Ident || peek().kind == Tok::QuotedIdent) && peek2().kind == Tok::LParen)
            unsupported("function", peek().offset);
        cmp.column = identifier("column name");

        const Token& op = peek();
        if (op.kind == Tok::Ident) {
            // IN, LIKE, IS, BETWEEN, NOT ...
            unsupported(text::to_lower(op.text) == "or" ? "OR" : "operator " + op.text, op.offset);
        }
        if (op.kind != Tok::Op) syntax("expected comparison operator", op.offset);
        if (op.text == "=") cmp.op = CompareOp::Eq;
        else if (op.text == "<>") cmp.op = CompareOp::Ne;
        else if (op.text == "<") cmp.op = CompareOp::Lt;
        else if (op.text == "<=") cmp.op = CompareOp::Le;
        else if (op.text == ">") cmp.op = CompareOp::Gt;
        else if (op.text == ">=") cmp.op = CompareOp::Ge;
        else unsupported("operator " + op.text, op.offset);
        next();

        const Token& lit = peek();
        switch (lit.kind) {
        case Tok::Number: cmp.literal = *text::parse_number(lit.text); break;
        case Tok::String: cmp.literal = lit.text; break;
        case Tok::LParen: unsupported("subquery", lit.offset);
        case Tok::Ident:
        case Tok::QuotedIdent:
            if (peek2().kind == Tok::LParen) unsupported("function", lit.offset);
            unsupported("non-literal operand", lit.offset);
        default: syntax("expected literal", lit.offset);
        }
        next();
        return cmp;
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
};

std::string quote_ident(const std::string& name)
{
    bool plain = !name.empty() && (std::isalpha(static_cast<unsigned char>(name[0])) || name[0] == '_') &&
                 std::all_of(name.begin(), name.end(),
                             [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }) &&
                 !is_reserved(name);
    if (plain) return name;
    std::string out = "\"";
    for (char c : name) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string quote_string(const std::string& s)
{
    std::string out = "'";
    for (char c : s) {
        if (c == '\'') out += '\'';
        out += c;
    }
    return out + "'";
}

// Bound predicate: literal converted to the column's cell type.
struct BoundPredicate {
    std::size_t column;
    CompareOp op;
    Cell value;
};

template <typename T>
bool compare(const T& a, CompareOp op, const T& b)
{
    switch (op) {
    case CompareOp::Eq: return a == b;
    case CompareOp::Ne: return a != b;
    case CompareOp::Lt: return a < b;
    case CompareOp::Le: return a <= b;
    case CompareOp::Gt: return a > b;
    case CompareOp::Ge: return a >= b;
    }
    return false;
}

bool matches(const Cell& cell, const BoundPredicate& p)
{
    if (is_null(cell)) return false;
    return std::visit(
        [&](const auto& lhs) -> bool {
            using T = std::decay_t<decltype(lhs)>;
            if constexpr (std::is_same_v<T, std::monostate>) return false;
            else return compare(lhs, p.op, std::get<T>(p.value));
        },
        cell);
}

[[noreturn]] void bind_error(const std::string& column, const std::string& why)
{
    throw Error("filterql.bind", "cannot bind column '" + column + "': " + why, column);
}

} // namespace

FilterQuery parse_query(std::string_view text) { return Parser(lex(text)).run(); }

std::string render(const FilterQuery& q)
{
    std::string out = "SELECT * FROM " + quote_ident(q.table);
    for (std::size_t i = 0; i < q.predicates.size(); ++i) {
        const auto& p = q.predicates[i];
        out += i == 0 ? " WHERE " : " AND ";
        out += quote_ident(p.column);
        out += ' ';
        out += to_string(p.op);
        out += ' ';
        if (const auto* d = std::get_if<double>(&p.literal)) out += text::format_number(*d);
        else out += quote_string(std::get<std::string>(p.literal));
    }
    for (std::size_t i = 0; i < q.orderBy.size(); ++i) {
        out += i == 0 ? " ORDER BY " : ", ";
        out += quote_ident(q.orderBy[i].column);
        out += q.orderBy[i].descending ? " DESC" : " ASC";
    }
    if (q.limit) out += " LIMIT " + std::to_string(*q.limit);
    return out;
}

FilteredTable execute(const FilterQuery& q, const Dataset& ds)
{
    std::vector<BoundPredicate> bound;
    for (const auto& p : q.predicates) {
        auto idx = ds.column_index(p.column);
        if (!idx) bind_error(p.column, "unknown column");
        ColumnKind kind = ds.columns[*idx].kind;
        BoundPredicate b{*idx, p.op, {}};
        const auto* num = std::get_if<double>(&p.literal);
        const auto* str = std::get_if<std::string>(&p.literal);
        switch (kind) {
        case ColumnKind::Quantitative:
            if (!num) bind_error(p.column, "quantitative column compared with text");
            b.value = *num;
            break;
        case ColumnKind::Nominal:
            if (!str) bind_error(p.column, "nominal column compared with a number");
            b.value = *str;
            break;
        case ColumnKind::Temporal: {
            if (!str) bind_error(p.column, "temporal column compared with a number");
            auto ts = parse_iso8601(*str);
            if (!ts) bind_error(p.column, "'" + *str + "' is not an ISO-8601 date");
            b.value = *ts;
            break;
        }
        }
        bound.push_back(std::move(b));
    }
    std::vector<std::pair<std::size_t, bool>> keys;
    for (const auto& k : q.orderBy) {
        auto idx = ds.column_index(k.column);
        if (!idx) bind_error(k.column, "unknown column");
        keys.emplace_back(*idx, k.descending);
    }

    FilteredTable out{ds.id, {}, q};
    for (std::size_t r = 0; r < ds.rowCount(); ++r) {
        const auto& row = ds.rows[r];
        if (std::all_of(bound.begin(), bound.end(), [&](const BoundPredicate& p) { return matches(row[p.column], p); }))
            out.rowIndices.push_back(r);
    }
    if (!keys.empty()) {
        std::stable_sort(out.rowIndices.begin(), out.rowIndices.end(), [&](std::size_t a, std::size_t b) {
            for (const auto& [col, desc] : keys) {
                const Cell& ca = ds.rows[a][col];
                const Cell& cb = ds.rows[b][col];
                bool na = is_null(ca), nb = is_null(cb);
                if (na || nb) {
                    if (na && nb) continue;
                    return nb; // nulls last in either direction
                }
                if (ca == cb) continue;
                return desc ? cb < ca : ca < cb;
            }
            return false;
        });
    }
    if (q.limit && out.rowIndices.size() > *q.limit) out.rowIndices.resize(*q.limit);
    return out;
}

std::string fallback_filter(std::string_view chunk, const DatasetMeta& meta)
{
    FilterQuery q;
    for (const auto& col : meta.columns) {
        if (col.kind != ColumnKind::Nominal) continue;
        for (const auto& v : col.uniqueValues) {
            if (text::trim(v).empty() || !text::contains_phrase(chunk, v, false)) continue;
            Comparison c{col.name, CompareOp::Eq, v};
            if (std::find(q.predicates.begin(), q.predicates.end(), c) == q.predicates.end())
                q.predicates.push_back(std::move(c));
        }
    }

    const ColumnMeta* target = nullptr;
    double best = -1;
    for (const auto& col : meta.columns) {
        if (col.kind != ColumnKind::Quantitative) continue;
        double s = fallback_relevance_score(chunk, col);
        if (s > best) {
            best = s;
            target = &col;
        }
    }
    if (target) {
        static const std::regex pattern(R"((^|[^A-Za-z0-9])(above|over|more than|below|under|less than)\s+(-?\d+(\.\d+)?))",
                                        std::regex::icase);
        std::string s(chunk);
        for (auto it = std::sregex_iterator(s.begin(), s.end(), pattern); it != std::sregex_iterator(); ++it) {
            std::string word = text::to_lower((*it)[2].str());
            bool upper = word == "above" || word == "over" || word == "more than";
            Comparison c{target->name, upper ? CompareOp::Gt : CompareOp::Lt, *text::parse_number((*it)[3].str())};
            if (std::find(q.predicates.begin(), q.predicates.end(), c) == q.predicates.end())
                q.predicates.push_back(std::move(c));
        }
    }
    if (q.predicates.empty()) throw Error("filterql.no_terms", "no filterable terms");
    return render(q);
}

FilterQuery generate_filter(std::string_view chunk, const DatasetMeta& meta, ProviderSuite& suite,
                            std::string* rawText)
{
    std::string raw = suite.filter(chunk, meta);
    if (rawText) *rawText = raw;
    try {
        return parse_query(raw);
    } catch (const Error& e) {
        throw Error(e.code(), std::string(e.what()) + " in generated query: " + raw, raw);
    }
}

json to_json(const FilteredTable& t)
{
    return {{"datasetId", t.datasetId}, {"rowIndices", t.rowIndices}, {"query", render(t.query)}};
}

} // namespace inkline::filterql
