#include "inkline/raster.hpp"

#include "inkline/text.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>

namespace inkline::raster {

namespace {

using Affine = Eigen::Affine2d;

// Presentation attribute or inline style declaration.
std::optional<std::string> property(const svg::Element& e, std::string_view name)
{
    if (auto style = e.attr("style")) {
        std::istringstream in(*style);
        std::string decl;
        while (std::getline(in, decl, ';')) {
            auto colon = decl.find(':');
            if (colon == std::string::npos) continue;
            if (text::trim(decl.substr(0, colon)) == name) return text::trim(decl.substr(colon + 1));
        }
    }
    return e.attr(name);
}

class PathLexer {
public:
    explicit PathLexer(std::string_view d) : d_(d) {}

    void skip_sep()
    {
        while (pos_ < d_.size() && (std::isspace(static_cast<unsigned char>(d_[pos_])) || d_[pos_] == ','))
            ++pos_;
    }
    bool at_end()
    {
        skip_sep();
        return pos_ >= d_.size();
    }
    bool at_command()
    {
        skip_sep();
        return pos_ < d_.size() && std::isalpha(static_cast<unsigned char>(d_[pos_])) && d_[pos_] != 'e' &&
               d_[pos_] != 'E';
    }
    char command() { return d_[pos_++]; }

    std::optional<double> number()
    {
        skip_sep();
        std::size_t start = pos_;
        if (pos_ < d_.size() && (d_[pos_] == '-' || d_[pos_] == '+')) ++pos_;
        bool dot = false, digits = false;
        while (pos_ < d_.size()) {
            char c = d_[pos_];
            if (std::isdigit(static_cast<unsigned char>(c))) {
                digits = true;
                ++pos_;
            } else if (c == '.' && !dot) {
                dot = true;
                ++pos_;
            } else {
                break;
            }
        }
        if (digits && pos_ < d_.size() && (d_[pos_] == 'e' || d_[pos_] == 'E')) {
            std::size_t save = pos_++;
            if (pos_ < d_.size() && (d_[pos_] == '-' || d_[pos_] == '+')) ++pos_;
            if (pos_ < d_.size() && std::isdigit(static_cast<unsigned char>(d_[pos_]))) {
                while (pos_ < d_.size() && std::isdigit(static_cast<unsigned char>(d_[pos_]))) ++pos_;
            } else {
                pos_ = save;
            }
        }
        if (!digits) {
            pos_ = start;
            return std::nullopt;
        }
        return text::parse_number(d_.substr(start, pos_ - start));
    }

    // Arc flags may be written without separators ("a1 1 0 00 1 1").
    std::optional<double> flag()
    {
        skip_sep();
        if (pos_ < d_.size() && (d_[pos_] == '0' || d_[pos_] == '1')) return d_[pos_++] - '0';
        return std::nullopt;
    }

private:
    std::string_view d_;
    std::size_t pos_ = 0;
};

constexpr int kCurveSteps = 16;

void arc_to(Polygon& poly, const Eigen::Vector2d& p0, double rx, double ry, double phiDeg, bool largeArc,
            bool sweep, const Eigen::Vector2d& p1)
{
    if (rx == 0 || ry == 0 || p0 == p1) {
        poly.push_back(p1);
        return;
    }
    rx = std::abs(rx);
    ry = std::abs(ry);
    double phi = phiDeg * std::numbers::pi / 180.0;
    Eigen::Rotation2Dd rot(-phi);
    Eigen::Vector2d d = rot * ((p0 - p1) / 2.0);
    double lambda = (d.x() * d.x()) / (rx * rx) + (d.y() * d.y()) / (ry * ry);
    if (lambda > 1) {
        rx *= std::sqrt(lambda);
        ry *= std::sqrt(lambda);
    }
    double num = rx * rx * ry * ry - rx * rx * d.y() * d.y() - ry * ry * d.x() * d.x();
    double den = rx * rx * d.y() * d.y() + ry * ry * d.x() * d.x();
    double coef = std::sqrt(std::max(0.0, num / den)) * (largeArc == sweep ? -1 : 1);
    Eigen::Vector2d cp(coef * rx * d.y() / ry, -coef * ry * d.x() / rx);
    Eigen::Vector2d center = Eigen::Rotation2Dd(phi) * cp + (p0 + p1) / 2.0;
    auto angle = [](const Eigen::Vector2d& u, const Eigen::Vector2d& v) {
        return std::atan2(u.x() * v.y() - u.y() * v.x(), u.dot(v));
    };
    Eigen::Vector2d u((d.x() - cp.x()) / rx, (d.y() - cp.y()) / ry);
    Eigen::Vector2d v((-d.x() - cp.x()) / rx, (-d.y() - cp.y()) / ry);
    double theta = angle({1, 0}, u);
    double delta = angle(u, v);
    if (!sweep && delta > 0) delta -= 2 * std::numbers::pi;
    if (sweep && delta < 0) delta += 2 * std::numbers::pi;
    int steps = std::max(4, static_cast<int>(std::ceil(std::abs(delta) / (std::numbers::pi / 12))));
    for (int i = 1; i <= steps; ++i) {
        double t = theta + delta * i / steps;
        poly.push_back(Eigen::Rotation2Dd(phi) * Eigen::Vector2d(rx * std::cos(t), ry * std::sin(t)) + center);
    }
}

Affine parse_transform(std::string_view s)
{
    Affine out = Affine::Identity();
    std::size_t pos = 0;
    while (pos < s.size()) {
        auto open = s.find('(', pos);
        if (open == std::string_view::npos) break;
        auto close = s.find(')', open);
        if (close == std::string_view::npos) break;
        std::string name = text::trim(s.substr(pos, open - pos));
        while (!name.empty() && (name.front() == ',' || std::isspace(static_cast<unsigned char>(name.front()))))
            name.erase(name.begin());
        std::vector<double> args;
        PathLexer lex(s.substr(open + 1, close - open - 1));
        while (auto v = lex.number()) args.push_back(*v);
        Affine t = Affine::Identity();
        if (name == "translate" && !args.empty()) {
            t.translate(Eigen::Vector2d(args[0], args.size() > 1 ? args[1] : 0.0));
        } else if (name == "scale" && !args.empty()) {
            t.scale(Eigen::Vector2d(args[0], args.size() > 1 ? args[1] : args[0]));
        } else if (name == "rotate" && !args.empty()) {
            Eigen::Vector2d c = args.size() >= 3 ? Eigen::Vector2d(args[1], args[2]) : Eigen::Vector2d::Zero();
            t.translate(c).rotate(args[0] * std::numbers::pi / 180.0).translate(-c);
        } else if (name == "matrix" && args.size() == 6) {
            t.matrix() << args[0], args[2], args[4], args[1], args[3], args[5], 0, 0, 1;
        } else if (name == "skewX" && !args.empty()) {
            t.matrix()(0, 1) = std::tan(args[0] * std::numbers::pi / 180.0);
        } else if (name == "skewY" && !args.empty()) {
            t.matrix()(1, 0) = std::tan(args[0] * std::numbers::pi / 180.0);
        }
        out = out * t;
        pos = close + 1;
    }
    return out;
}

double attr_num(const svg::Element& e, std::string_view name, double fallback = 0)
{
    auto v = e.attr(name);
    if (!v) return fallback;
    PathLexer lex(*v);
    auto n = lex.number();
    return n ? *n : fallback;
}

std::vector<Polygon> points_attr(const svg::Element& e)
{
    Polygon poly;
    PathLexer lex(e.attr("points").value_or(""));
    for (;;) {
        auto x = lex.number();
        auto y = lex.number();
        if (!x || !y) break;
        poly.emplace_back(*x, *y);
    }
    return {poly};
}

Polygon ellipse_poly(double cx, double cy, double rx, double ry)
{
    Polygon poly;
    constexpr int n = 48;
    for (int i = 0; i < n; ++i) {
        double t = 2 * std::numbers::pi * i / n;
        poly.emplace_back(cx + rx * std::cos(t), cy + ry * std::sin(t));
    }
    return poly;
}

struct Shape {
    std::vector<Polygon> subpaths;
    bool closed = true;
};

std::optional<Shape> geometry(const svg::Element& e)
{
    const std::string& t = e.tag;
    if (t == "rect") {
        double x = attr_num(e, "x"), y = attr_num(e, "y"), w = attr_num(e, "width"), h = attr_num(e, "height");
        if (w <= 0 || h <= 0) return std::nullopt;
        return Shape{{{{x, y}, {x + w, y}, {x + w, y + h}, {x, y + h}}}, true};
    }
    if (t == "circle") {
        double r = attr_num(e, "r");
        if (r <= 0) return std::nullopt;
        return Shape{{ellipse_poly(attr_num(e, "cx"), attr_num(e, "cy"), r, r)}, true};
    }
    if (t == "ellipse") {
        double rx = attr_num(e, "rx"), ry = attr_num(e, "ry");
        if (rx <= 0 || ry <= 0) return std::nullopt;
        return Shape{{ellipse_poly(attr_num(e, "cx"), attr_num(e, "cy"), rx, ry)}, true};
    }
    if (t == "line") {
        return Shape{{{{attr_num(e, "x1"), attr_num(e, "y1")}, {attr_num(e, "x2"), attr_num(e, "y2")}}}, false};
    }
    if (t == "polyline") return Shape{points_attr(e), false};
    if (t == "polygon") return Shape{points_attr(e), true};
    if (t == "path") return Shape{flatten_path(e.attr("d").value_or("")), true};
    return std::nullopt;
}

struct Paint {
    std::optional<Rgb> fill = Rgb{0, 0, 0};
    std::optional<Rgb> stroke;
    double strokeWidth = 1;
    bool evenOdd = false;
    bool visible = true;
};

Paint inherit(const Paint& parent, const svg::Element& e)
{
    Paint p = parent;
    auto resolve = [](const std::string& v, std::optional<Rgb>& slot) {
        std::string lv = text::to_lower(text::trim(v));
        if (lv == "inherit" || lv == "currentcolor") return;
        slot = parse_color(lv); // none / url(...) clear the slot
    };
    if (auto f = property(e, "fill")) resolve(*f, p.fill);
    if (auto s = property(e, "stroke")) resolve(*s, p.stroke);
    if (auto w = property(e, "stroke-width")) {
        PathLexer lex(*w);
        if (auto n = lex.number()) p.strokeWidth = *n;
    }
    if (auto r = property(e, "fill-rule")) p.evenOdd = text::trim(*r) == "evenodd";
    if (auto d = property(e, "display"); d && text::trim(*d) == "none") p.visible = false;
    if (auto v = property(e, "visibility"); v && text::trim(*v) == "hidden") p.visible = false;
    if (auto o = property(e, "opacity")) {
        PathLexer lex(*o);
        if (auto n = lex.number(); n && *n <= 0) p.visible = false;
    }
    return p;
}

class Canvas {
public:
    Canvas(int w, int h) : image_(w, h) {}

    void fill(const std::vector<Polygon>& polys, const Rgb& c, bool evenOdd)
    {
        double minY = 1e300, maxY = -1e300;
        for (const auto& poly : polys)
            for (const auto& p : poly) {
                minY = std::min(minY, p.y());
                maxY = std::max(maxY, p.y());
            }
        if (minY > maxY) return;
        int y0 = std::max(0, static_cast<int>(std::floor(minY)));
        int y1 = std::min(image_.height - 1, static_cast<int>(std::ceil(maxY)));
        std::vector<std::pair<double, int>> crossings;
        for (int y = y0; y <= y1; ++y) {
            double sy = y + 0.5;
            crossings.clear();
            for (const auto& poly : polys) {
                std::size_t n = poly.size();
                for (std::size_t i = 0; i < n; ++i) {
                    const auto& a = poly[i];
                    const auto& b = poly[(i + 1) % n];
                    if ((a.y() <= sy) == (b.y() <= sy)) continue;
                    double x = a.x() + (sy - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
                    crossings.emplace_back(x, b.y() > a.y() ? 1 : -1);
                }
            }
            std::sort(crossings.begin(), crossings.end());
            int winding = 0;
            for (std::size_t i = 0; i + 1 < crossings.size(); ++i) {
                winding = evenOdd ? winding ^ 1 : winding + crossings[i].second;
                if (winding == 0) continue;
                int xa = std::max(0, static_cast<int>(std::ceil(crossings[i].first - 0.5)));
                int xb = std::min(image_.width - 1, static_cast<int>(std::floor(crossings[i + 1].first - 0.5)));
                for (int x = xa; x <= xb; ++x) image_.set(x, y, c);
            }
        }
    }

    void stroke(const std::vector<Polygon>& polys, bool closed, const Rgb& c, double width)
    {
        double hw = std::max(0.5, width / 2);
        for (const auto& poly : polys) {
            std::size_t n = poly.size();
            std::size_t segs = closed ? n : (n == 0 ? 0 : n - 1);
            for (std::size_t i = 0; i < segs; ++i) {
                Eigen::Vector2d a = poly[i], b = poly[(i + 1) % n];
                Eigen::Vector2d dir = b - a;
                if (dir.norm() == 0) continue;
                Eigen::Vector2d nrm = Eigen::Vector2d(-dir.y(), dir.x()).normalized() * hw;
                fill({{a + nrm, b + nrm, b - nrm, a - nrm}}, c, false);
            }
        }
    }

    RgbaImage& image() { return image_; }

private:
    RgbaImage image_;
};

void render(Canvas& canvas, const svg::Element& e, const Affine& parentXf, const Paint& parentPaint)
{
    if (e.is_text()) return;
    static const std::vector<std::string> skipped = {"defs", "clipPath", "mask", "symbol", "title", "desc",
                                                     "metadata", "style", "linearGradient", "radialGradient",
                                                     "pattern", "text", "marker", "filter"};
    if (std::find(skipped.begin(), skipped.end(), e.tag) != skipped.end()) return;
    Paint paint = inherit(parentPaint, e);
    if (!paint.visible) return;
    Affine xf = parentXf;
    if (auto t = e.attr("transform")) xf = xf * parse_transform(*t);

    if (e.tag == "svg") {
        // nested viewport
        auto vb = svg::view_box(e);
        double w = attr_num(e, "width", vb.width), h = attr_num(e, "height", vb.height);
        xf = xf * Affine(Eigen::Translation2d(attr_num(e, "x"), attr_num(e, "y")));
        xf = xf * Eigen::Scaling(w / vb.width, h / vb.height) * Eigen::Translation2d(-vb.x, -vb.y);
    }

    if (auto shape = geometry(e)) {
        for (auto& poly : shape->subpaths)
            for (auto& p : poly) p = xf * p;
        double scale = std::sqrt(std::abs(xf.linear().determinant()));
        if (paint.fill && shape->closed) canvas.fill(shape->subpaths, *paint.fill, paint.evenOdd);
        if (paint.stroke) canvas.stroke(shape->subpaths, shape->closed && e.tag != "path", *paint.stroke,
                                        paint.strokeWidth * scale);
    }
    for (const auto& c : e.children) render(canvas, c, xf, paint);
}

} // namespace

std::vector<Polygon> flatten_path(std::string_view d)
{
    std::vector<Polygon> out;
    PathLexer lex(d);
    Polygon cur;
    Eigen::Vector2d pos(0, 0), start(0, 0), lastCtrl(0, 0);
    char prev = 0;
    auto finish = [&] {
        if (cur.size() >= 2) out.push_back(std::move(cur));
        cur.clear();
    };
    char cmd = 0;
    while (!lex.at_end()) {
        if (lex.at_command()) cmd = lex.command();
        else if (cmd == 0) break;
        bool rel = std::islower(static_cast<unsigned char>(cmd)) != 0;
        char up = static_cast<char>(std::toupper(static_cast<unsigned char>(cmd)));
        Eigen::Vector2d base = rel ? pos : Eigen::Vector2d(0, 0);
        auto pt = [&]() -> std::optional<Eigen::Vector2d> {
            auto x = lex.number();
            auto y = lex.number();
            if (!x || !y) return std::nullopt;
            return Eigen::Vector2d(*x, *y) + base;
        };
        bool ok = true;
        switch (up) {
        case 'M': {
            auto p = pt();
            if (!p) { ok = false; break; }
            finish();
            pos = start = *p;
            cur.push_back(pos);
            cmd = rel ? 'l' : 'L'; // implicit lineto for following pairs
            break;
        }
        case 'L': {
            auto p = pt();
            if (!p) { ok = false; break; }
            pos = *p;
            cur.push_back(pos);
            break;
        }
        case 'H': {
            auto x = lex.number();
            if (!x) { ok = false; break; }
            pos.x() = *x + (rel ? pos.x() : 0);
            cur.push_back(pos);
            break;
        }
        case 'V': {
            auto y = lex.number();
            if (!y) { ok = false; break; }
            pos.y() = *y + (rel ? pos.y() : 0);
            cur.push_back(pos);
            break;
        }
        case 'C':
        case 'S': {
            Eigen::Vector2d c1;
            if (up == 'C') {
                auto p = pt();
                if (!p) { ok = false; break; }
                c1 = *p;
            } else {
                c1 = (prev == 'C' || prev == 'S') ? Eigen::Vector2d(2 * pos - lastCtrl) : pos;
            }
            auto c2 = pt();
            auto p3 = pt();
            if (!c2 || !p3) { ok = false; break; }
            if (cur.empty()) cur.push_back(pos);
            for (int i = 1; i <= kCurveSteps; ++i) {
                double t = static_cast<double>(i) / kCurveSteps, u = 1 - t;
                cur.push_back(u * u * u * pos + 3 * u * u * t * c1 + 3 * u * t * t * *c2 + t * t * t * *p3);
            }
            lastCtrl = *c2;
            pos = *p3;
            break;
        }
        case 'Q':
        case 'T': {
            Eigen::Vector2d c1;
            if (up == 'Q') {
                auto p = pt();
                if (!p) { ok = false; break; }
                c1 = *p;
            } else {
                c1 = (prev == 'Q' || prev == 'T') ? Eigen::Vector2d(2 * pos - lastCtrl) : pos;
            }
            auto p2 = pt();
            if (!p2) { ok = false; break; }
            if (cur.empty()) cur.push_back(pos);
            for (int i = 1; i <= kCurveSteps; ++i) {
                double t = static_cast<double>(i) / kCurveSteps, u = 1 - t;
                cur.push_back(u * u * pos + 2 * u * t * c1 + t * t * *p2);
            }
            lastCtrl = c1;
            pos = *p2;
            break;
        }
        case 'A': {
            auto rx = lex.number();
            auto ry = lex.number();
            auto rot = lex.number();
            auto large = lex.flag();
            auto sweep = lex.flag();
            auto p = pt();
            if (!rx || !ry || !rot || !large || !sweep || !p) { ok = false; break; }
            if (cur.empty()) cur.push_back(pos);
            arc_to(cur, pos, *rx, *ry, *rot, *large != 0, *sweep != 0, *p);
            pos = *p;
            break;
        }
        case 'Z':
            finish();
            pos = start;
            break;
        default:
            ok = false;
        }
        if (!ok) break;
        prev = up;
    }
    finish();
    return out;
}

RgbaImage rasterize(const svg::Element& root, int width, int height)
{
    Canvas canvas(width, height);
    auto vb = svg::view_box(root);
    Affine xf = Affine::Identity();
    xf = xf * Eigen::Scaling(width / vb.width, height / vb.height) * Eigen::Translation2d(-vb.x, -vb.y);
    Paint rootPaint;
    // the root's own viewport is handled here, not as a nested <svg>
    svg::Element shell = root;
    shell.tag = "g";
    render(canvas, shell, xf, rootPaint);
    return std::move(canvas.image());
}

std::map<Rgb, std::size_t> paint_coverage(const svg::Element& root, int width, int height)
{
    RgbaImage img = rasterize(root, width, height);
    std::map<Rgb, std::size_t> out;
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            if (img.alpha(x, y) > 0) ++out[img.rgb(x, y)];
    return out;
}

} // namespace inkline::raster
