#pragma once

#include "inkline/color.hpp"
#include "inkline/svg.hpp"

#include <Eigen/Geometry>

#include <cstddef>
#include <cstdint>
#include <map>
#include <vector>

namespace inkline {

struct RgbaImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels; // row-major RGBA

    RgbaImage() = default;
    RgbaImage(int w, int h) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h * 4, 0) {}

    bool empty() const noexcept { return width <= 0 || height <= 0; }

    void set(int x, int y, const Rgb& c, std::uint8_t alpha = 255)
    {
        auto i = (static_cast<std::size_t>(y) * width + x) * 4;
        pixels[i] = c.r;
        pixels[i + 1] = c.g;
        pixels[i + 2] = c.b;
        pixels[i + 3] = alpha;
    }
    Rgb rgb(int x, int y) const
    {
        auto i = (static_cast<std::size_t>(y) * width + x) * 4;
        return {pixels[i], pixels[i + 1], pixels[i + 2]};
    }
    std::uint8_t alpha(int x, int y) const { return pixels[(static_cast<std::size_t>(y) * width + x) * 4 + 3]; }

    friend bool operator==(const RgbaImage&, const RgbaImage&) = default;
};

namespace raster {

using Polygon = std::vector<Eigen::Vector2d>;

// Flattened subpaths of an SVG path "d" string in user space.
std::vector<Polygon> flatten_path(std::string_view d);

// Paints an SVG tree onto an opaque-less canvas of width x height pixels,
// mapping the root viewBox onto the canvas. Each pixel takes the paint of the
// topmost shape covering its center (no antialiasing, no blending).
RgbaImage rasterize(const svg::Element& root, int width, int height);

// Pixel count per paint color after rasterizing at width x height.
std::map<Rgb, std::size_t> paint_coverage(const svg::Element& root, int width = 256, int height = 256);

} // namespace raster

} // namespace inkline
