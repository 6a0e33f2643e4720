#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace inkline::text {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

constexpr std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis = kFnvOffset) noexcept
{
    std::uint64_t h = basis;
    for (char c : bytes) {
        h ^= static_cast<std::uint8_t>(c);
        h *= kFnvPrime;
    }
    return h;
}

// 16 lowercase hex digits.
std::string hex64(std::uint64_t v);

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);

// Lowercased runs of ASCII letters/digits; everything else separates.
// Non-ASCII bytes are kept inside tokens so UTF-8 words stay whole.
std::vector<std::string> word_tokens(std::string_view s);

// Identifier split: '_', '-', spaces and lower->Upper transitions separate.
// "timeFrame" and "time_frame" both give {"time", "frame"}.
std::vector<std::string> identifier_tokens(std::string_view name);

// Light plural folding used for lexical matching: "positions" -> "position".
std::string fold_plural(std::string_view token);

// True when `needle` occurs in `haystack` bounded by non-alphanumerics.
bool contains_phrase(std::string_view haystack, std::string_view needle, bool caseSensitive);

bool is_time_word(std::string_view foldedToken);
bool is_stopword(std::string_view lowerToken);

// UTF-8 helpers: offsets in the engine API are code-point offsets.
std::size_t codepoint_length(std::string_view utf8);
std::optional<std::size_t> byte_offset(std::string_view utf8, std::size_t codepoint);

// Shortest round-trip decimal form ("15", "2.5", "-0.125").
std::string format_number(double v);
std::optional<double> parse_number(std::string_view s);

} // namespace inkline::text
