#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace inkline {

struct Rgb {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;

    friend bool operator==(const Rgb&, const Rgb&) = default;
    friend auto operator<=>(const Rgb&, const Rgb&) = default;
};

// "#rrggbb", lowercase.
std::string to_hex(const Rgb& c);

// Accepts #rgb, #rrggbb, rgb(r,g,b) and a handful of CSS names.
// "none", "transparent", url(...) and unknown names give nullopt.
std::optional<Rgb> parse_color(std::string_view css);

template <typename Scalar = double>
Eigen::Matrix<Scalar, 3, 1> to_vector(const Rgb& c)
{
    return {Scalar(c.r), Scalar(c.g), Scalar(c.b)};
}

template <typename Scalar>
Rgb from_vector(const Eigen::Matrix<Scalar, 3, 1>& v)
{
    auto ch = [](Scalar x) {
        return static_cast<std::uint8_t>(std::clamp<long>(std::lround(static_cast<double>(x)), 0, 255));
    };
    return {ch(v(0)), ch(v(1)), ch(v(2))};
}

// Rec. 709 luma on the 0..255 scale.
template <typename Scalar = double>
Scalar luma(const Rgb& c)
{
    static const Eigen::Matrix<Scalar, 3, 1> w(Scalar(0.2126), Scalar(0.7152), Scalar(0.0722));
    return w.dot(to_vector<Scalar>(c));
}

namespace detail {

template <typename Scalar>
Scalar srgb_to_linear(Scalar u)
{
    return u <= Scalar(0.04045) ? u / Scalar(12.92)
                                : std::pow((u + Scalar(0.055)) / Scalar(1.055), Scalar(2.4));
}

template <typename Scalar>
Scalar lab_f(Scalar t)
{
    constexpr double delta = 6.0 / 29.0;
    return t > Scalar(delta * delta * delta) ? std::cbrt(t)
                                             : t / Scalar(3 * delta * delta) + Scalar(4.0 / 29.0);
}

} // namespace detail

// sRGB (D65) -> CIE XYZ, Y of white = 1.
template <typename Scalar = double>
Eigen::Matrix<Scalar, 3, 1> srgb_to_xyz(const Rgb& c)
{
    Eigen::Matrix<Scalar, 3, 3> m;
    m << Scalar(0.4124564), Scalar(0.3575761), Scalar(0.1804375),
         Scalar(0.2126729), Scalar(0.7151522), Scalar(0.0721750),
         Scalar(0.0193339), Scalar(0.1191920), Scalar(0.9503041);
    Eigen::Matrix<Scalar, 3, 1> lin =
        (to_vector<Scalar>(c) / Scalar(255)).unaryExpr([](Scalar u) { return detail::srgb_to_linear(u); });
    return m * lin;
}

template <typename Scalar = double>
Eigen::Matrix<Scalar, 3, 1> srgb_to_lab(const Rgb& c)
{
    static const Eigen::Matrix<Scalar, 3, 1> white(Scalar(0.95047), Scalar(1.0), Scalar(1.08883));
    Eigen::Matrix<Scalar, 3, 1> f =
        srgb_to_xyz<Scalar>(c).cwiseQuotient(white).unaryExpr([](Scalar t) { return detail::lab_f(t); });
    return {Scalar(116) * f(1) - Scalar(16), Scalar(500) * (f(0) - f(1)), Scalar(200) * (f(1) - f(2))};
}

template <typename Scalar = double>
Scalar lab_distance(const Rgb& a, const Rgb& b)
{
    return (srgb_to_lab<Scalar>(a) - srgb_to_lab<Scalar>(b)).norm();
}

enum class SchemeKind { Categorical, Sequential, Diverging };

std::string_view to_string(SchemeKind k);
SchemeKind scheme_kind_from_string(std::string_view s);

// HSL with hue in degrees [0,360), saturation/lightness in [0,1].
struct Hsl {
    double h = 0;
    double s = 0;
    double l = 0;
};

Hsl to_hsl(const Rgb& c);
Rgb from_hsl(const Hsl& c);

} // namespace inkline
