#include "inkline/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>

namespace inkline::text {

namespace {

bool is_alnum(unsigned char c) { return std::isalnum(c) != 0 || c >= 0x80; }

constexpr std::array<std::string_view, 10> kTimeWords = {
    "time", "date", "hour", "day", "week", "month", "year", "frame", "season", "period"};

constexpr std::array<std::string_view, 72> kStopwords = {
    "a",     "an",    "and",   "are",   "as",    "at",    "be",    "been",  "but",
    "by",    "can",   "did",   "do",    "does",  "for",   "from",  "had",   "has",
    "have",  "he",    "her",   "his",   "how",   "i",     "if",    "in",    "into",
    "is",    "it",    "its",   "me",    "my",    "no",    "not",   "of",    "on",
    "or",    "our",   "over",  "she",   "so",    "some",  "than",  "that",  "the",
    "their", "them",  "then",  "there", "these", "they",  "this",  "those", "to",
    "up",    "us",    "very",  "was",   "we",    "were",  "what",  "when",  "where",
    "which", "while", "who",   "why",   "will",  "with",  "would", "you",   "your"};

} // namespace

std::string hex64(std::uint64_t v)
{
    static constexpr char digits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[v & 0xF];
        v >>= 4;
    }
    return out;
}

std::string to_lower(std::string_view s)
{
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string trim(std::string_view s)
{
    auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> word_tokens(std::string_view s)
{
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        auto c = static_cast<unsigned char>(ch);
        if (is_alnum(c)) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

std::vector<std::string> identifier_tokens(std::string_view name)
{
    std::vector<std::string> out;
    std::string cur;
    auto flush = [&] {
        if (!cur.empty()) {
            out.push_back(to_lower(cur));
            cur.clear();
        }
    };
    for (std::size_t i = 0; i < name.size(); ++i) {
        auto c = static_cast<unsigned char>(name[i]);
        if (!is_alnum(c)) {
            flush();
            continue;
        }
        if (std::isupper(c) && !cur.empty() && std::islower(static_cast<unsigned char>(cur.back())))
            flush();
        cur.push_back(static_cast<char>(c));
    }
    flush();
    return out;
}

std::string fold_plural(std::string_view token)
{
    if (token.size() > 3 && token.back() == 's' && token[token.size() - 2] != 's')
        return std::string(token.substr(0, token.size() - 1));
    return std::string(token);
}

bool contains_phrase(std::string_view haystack, std::string_view needle, bool caseSensitive)
{
    if (needle.empty() || needle.size() > haystack.size()) return false;
    std::string h = caseSensitive ? std::string(haystack) : to_lower(haystack);
    std::string n = caseSensitive ? std::string(needle) : to_lower(needle);
    for (std::size_t pos = h.find(n); pos != std::string::npos; pos = h.find(n, pos + 1)) {
        bool leftOk = pos == 0 || !is_alnum(static_cast<unsigned char>(h[pos - 1]));
        std::size_t end = pos + n.size();
        bool rightOk = end == h.size() || !is_alnum(static_cast<unsigned char>(h[end]));
        // a needle that itself starts/ends with punctuation needs no boundary there
        if (!is_alnum(static_cast<unsigned char>(n.front()))) leftOk = true;
        if (!is_alnum(static_cast<unsigned char>(n.back()))) rightOk = true;
        if (leftOk && rightOk) return true;
    }
    return false;
}

bool is_time_word(std::string_view foldedToken)
{
    return std::find(kTimeWords.begin(), kTimeWords.end(), foldedToken) != kTimeWords.end();
}

bool is_stopword(std::string_view lowerToken)
{
    return std::find(kStopwords.begin(), kStopwords.end(), lowerToken) != kStopwords.end();
}

std::size_t codepoint_length(std::string_view utf8)
{
    return static_cast<std::size_t>(std::count_if(utf8.begin(), utf8.end(), [](char c) {
        return (static_cast<unsigned char>(c) & 0xC0) != 0x80;
    }));
}

std::optional<std::size_t> byte_offset(std::string_view utf8, std::size_t codepoint)
{
    std::size_t seen = 0;
    for (std::size_t i = 0; i < utf8.size(); ++i) {
        if ((static_cast<unsigned char>(utf8[i]) & 0xC0) == 0x80) continue;
        if (seen == codepoint) return i;
        ++seen;
    }
    if (seen == codepoint) return utf8.size();
    return std::nullopt;
}

std::string format_number(double v)
{
    if (v == 0.0) return "0";
    std::array<char, 64> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), end);
}

std::optional<double> parse_number(std::string_view s)
{
    if (s.empty()) return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    if (s.empty()) return std::nullopt;
    double v = 0;
    auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || end != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

} // namespace inkline::text
