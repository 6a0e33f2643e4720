#include "inkline/color.hpp"

#include "inkline/text.hpp"

#include <array>
#include <cctype>
#include <utility>

namespace inkline {

namespace {

constexpr std::array<std::pair<std::string_view, Rgb>, 18> kNamed = {{
    {"black", {0, 0, 0}},        {"white", {255, 255, 255}}, {"red", {255, 0, 0}},
    {"green", {0, 128, 0}},      {"blue", {0, 0, 255}},      {"yellow", {255, 255, 0}},
    {"orange", {255, 165, 0}},   {"purple", {128, 0, 128}},  {"gray", {128, 128, 128}},
    {"grey", {128, 128, 128}},   {"silver", {192, 192, 192}}, {"navy", {0, 0, 128}},
    {"teal", {0, 128, 128}},     {"maroon", {128, 0, 0}},    {"lime", {0, 255, 0}},
    {"aqua", {0, 255, 255}},     {"fuchsia", {255, 0, 255}}, {"gold", {255, 215, 0}},
}};

int hex_digit(char c)
{
    if (c >= '0' && c <= '9') return c - '0';
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    return -1;
}

} // namespace

std::string to_hex(const Rgb& c)
{
    static constexpr char digits[] = "0123456789abcdef";
    std::string out = "#";
    for (std::uint8_t v : {c.r, c.g, c.b}) {
        out.push_back(digits[v >> 4]);
        out.push_back(digits[v & 0xF]);
    }
    return out;
}

std::optional<Rgb> parse_color(std::string_view css)
{
    std::string s = text::to_lower(text::trim(css));
    if (s.empty()) return std::nullopt;
    if (s.front() == '#') {
        std::array<int, 6> d{};
        if (s.size() == 4) {
            for (int i = 0; i < 3; ++i) {
                d[2 * i] = d[2 * i + 1] = hex_digit(s[static_cast<std::size_t>(i) + 1]);
            }
        } else if (s.size() == 7) {
            for (int i = 0; i < 6; ++i) d[i] = hex_digit(s[static_cast<std::size_t>(i) + 1]);
        } else {
            return std::nullopt;
        }
        if (std::any_of(d.begin(), d.end(), [](int v) { return v < 0; })) return std::nullopt;
        return Rgb{static_cast<std::uint8_t>(d[0] * 16 + d[1]), static_cast<std::uint8_t>(d[2] * 16 + d[3]),
                   static_cast<std::uint8_t>(d[4] * 16 + d[5])};
    }
    if (s.rfind("rgb(", 0) == 0 && s.back() == ')') {
        std::array<int, 3> v{};
        std::size_t pos = 4;
        for (int i = 0; i < 3; ++i) {
            std::size_t end = s.find_first_of(",)", pos);
            if (end == std::string::npos) return std::nullopt;
            auto num = text::parse_number(text::trim(s.substr(pos, end - pos)));
            if (!num) return std::nullopt;
            v[static_cast<std::size_t>(i)] = std::clamp(static_cast<int>(std::lround(*num)), 0, 255);
            pos = end + 1;
        }
        return Rgb{static_cast<std::uint8_t>(v[0]), static_cast<std::uint8_t>(v[1]), static_cast<std::uint8_t>(v[2])};
    }
    for (const auto& [name, rgb] : kNamed)
        if (name == s) return rgb;
    return std::nullopt;
}

std::string_view to_string(SchemeKind k)
{
    switch (k) {
    case SchemeKind::Categorical: return "categorical";
    case SchemeKind::Sequential: return "sequential";
    case SchemeKind::Diverging: return "diverging";
    }
    return "categorical";
}

SchemeKind scheme_kind_from_string(std::string_view s)
{
    if (s == "sequential") return SchemeKind::Sequential;
    if (s == "diverging") return SchemeKind::Diverging;
    return SchemeKind::Categorical;
}

Hsl to_hsl(const Rgb& c)
{
    double r = c.r / 255.0, g = c.g / 255.0, b = c.b / 255.0;
    double mx = std::max({r, g, b}), mn = std::min({r, g, b});
    Hsl out;
    out.l = (mx + mn) / 2;
    double d = mx - mn;
    if (d == 0) return out;
    out.s = out.l > 0.5 ? d / (2 - mx - mn) : d / (mx + mn);
    double h = 0;
    if (mx == r)
        h = (g - b) / d + (g < b ? 6 : 0);
    else if (mx == g)
        h = (b - r) / d + 2;
    else
        h = (r - g) / d + 4;
    out.h = h * 60.0;
    return out;
}

Rgb from_hsl(const Hsl& c)
{
    double s = std::clamp(c.s, 0.0, 1.0), l = std::clamp(c.l, 0.0, 1.0);
    double h = std::fmod(std::fmod(c.h, 360.0) + 360.0, 360.0) / 360.0;
    auto hue2rgb = [](double p, double q, double t) {
        if (t < 0) t += 1;
        if (t > 1) t -= 1;
        if (t < 1.0 / 6) return p + (q - p) * 6 * t;
        if (t < 1.0 / 2) return q;
        if (t < 2.0 / 3) return p + (q - p) * (2.0 / 3 - t) * 6;
        return p;
    };
    double r = l, g = l, b = l;
    if (s > 0) {
        double q = l < 0.5 ? l * (1 + s) : l + s - l * s;
        double p = 2 * l - q;
        r = hue2rgb(p, q, h + 1.0 / 3);
        g = hue2rgb(p, q, h);
        b = hue2rgb(p, q, h - 1.0 / 3);
    }
    return from_vector<double>(Eigen::Vector3d(r, g, b) * 255.0);
}

} // namespace inkline
