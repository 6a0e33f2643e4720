#include "inkline/svg.hpp"

#include "inkline/error.hpp"
#include "inkline/text.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

namespace inkline::svg {

Element Element::text_node(std::string content)
{
    Element e("#text");
    e.text = std::move(content);
    return e;
}

std::optional<std::string> Element::attr(std::string_view name) const
{
    for (const auto& [k, v] : attrs)
        if (k == name) return v;
    return std::nullopt;
}

Element& Element::set(std::string_view name, std::string value)
{
    for (auto& [k, v] : attrs) {
        if (k == name) {
            v = std::move(value);
            return *this;
        }
    }
    attrs.emplace_back(std::string(name), std::move(value));
    return *this;
}

bool Element::erase_attr(std::string_view name)
{
    for (auto it = attrs.begin(); it != attrs.end(); ++it) {
        if (it->first == name) {
            attrs.erase(it);
            return true;
        }
    }
    return false;
}

Element& Element::add(Element child)
{
    children.push_back(std::move(child));
    return children.back();
}

std::string Element::inner_text() const
{
    if (is_text()) return text;
    std::string out;
    for (const auto& c : children) out += c.inner_text();
    return out;
}

void walk(Element& root, const std::function<void(Element&)>& fn)
{
    fn(root);
    for (auto& c : root.children) walk(c, fn);
}

void walk(const Element& root, const std::function<void(const Element&)>& fn)
{
    fn(root);
    for (const auto& c : root.children) walk(c, fn);
}

std::size_t element_count(const Element& root)
{
    std::size_t n = 0;
    walk(root, [&](const Element& e) { n += e.is_text() ? 0 : 1; });
    return n;
}

const Element* find_first(const Element& root, const std::function<bool(const Element&)>& pred)
{
    if (pred(root)) return &root;
    for (const auto& c : root.children)
        if (const Element* hit = find_first(c, pred)) return hit;
    return nullptr;
}

Element* find_first(Element& root, const std::function<bool(const Element&)>& pred)
{
    return const_cast<Element*>(find_first(static_cast<const Element&>(root), pred));
}

bool has_class(const Element& e, std::string_view cls)
{
    auto c = e.attr("class");
    if (!c) return false;
    std::istringstream in(*c);
    std::string word;
    while (in >> word)
        if (word == cls) return true;
    return false;
}

namespace {

void escape_into(std::string& out, std::string_view s, bool attr)
{
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"':
            if (attr) {
                out += "&quot;";
                break;
            }
            [[fallthrough]];
        default: out.push_back(c);
        }
    }
}

void serialize_into(std::string& out, const Element& e, int depth)
{
    if (e.is_text()) {
        escape_into(out, e.text, false);
        return;
    }
    out.append(static_cast<std::size_t>(depth) * 2, ' ');
    out += '<';
    out += e.tag;
    for (const auto& [k, v] : e.attrs) {
        out += ' ';
        out += k;
        out += "=\"";
        escape_into(out, v, true);
        out += '"';
    }
    if (e.children.empty()) {
        out += "/>\n";
        return;
    }
    bool textOnly = std::all_of(e.children.begin(), e.children.end(), [](const Element& c) { return c.is_text(); });
    out += '>';
    if (textOnly) {
        for (const auto& c : e.children) serialize_into(out, c, 0);
    } else {
        out += '\n';
        for (const auto& c : e.children) {
            if (c.is_text()) {
                // whitespace-only runs between elements are dropped on output
                if (text::trim(c.text).empty()) continue;
                out.append(static_cast<std::size_t>(depth + 1) * 2, ' ');
                serialize_into(out, c, 0);
                out += '\n';
            } else {
                serialize_into(out, c, depth + 1);
            }
        }
        out.append(static_cast<std::size_t>(depth) * 2, ' ');
    }
    out += "</";
    out += e.tag;
    out += ">\n";
}

class Parser {
public:
    explicit Parser(std::string_view s) : src_(s) {}

    Element run()
    {
        skip_misc();
        if (pos_ >= src_.size() || src_[pos_] != '<') fail("expected root element");
        Element root = element();
        skip_misc();
        if (pos_ != src_.size()) fail("trailing content after root element");
        return root;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const
    {
        throw Error("svg.parse", "malformed vector image: " + msg + " at byte " + std::to_string(pos_),
                    std::to_string(pos_));
    }

    bool starts(std::string_view s) const { return src_.substr(pos_, s.size()) == s; }

    void skip_ws()
    {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    void skip_until(std::string_view end)
    {
        auto at = src_.find(end, pos_);
        if (at == std::string_view::npos) fail("unterminated markup");
        pos_ = at + end.size();
    }

    // Prolog, comments, doctype and processing instructions between elements.
    void skip_misc()
    {
        for (;;) {
            skip_ws();
            if (starts("<?")) skip_until("?>");
            else if (starts("<!--")) skip_until("-->");
            else if (starts("<!DOCTYPE") || starts("<!doctype")) skip_doctype();
            else return;
        }
    }

    void skip_doctype()
    {
        int depth = 0;
        for (; pos_ < src_.size(); ++pos_) {
            char c = src_[pos_];
            if (c == '[') ++depth;
            else if (c == ']') --depth;
            else if (c == '>' && depth == 0) {
                ++pos_;
                return;
            }
        }
        fail("unterminated doctype");
    }

    std::string name()
    {
        std::size_t start = pos_;
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (std::isalnum(static_cast<unsigned char>(c)) || c == ':' || c == '-' || c == '_' || c == '.')
                ++pos_;
            else
                break;
        }
        if (start == pos_) fail("expected name");
        return std::string(src_.substr(start, pos_ - start));
    }

    std::string decode(std::string_view raw)
    {
        std::string out;
        for (std::size_t i = 0; i < raw.size(); ++i) {
            if (raw[i] != '&') {
                out.push_back(raw[i]);
                continue;
            }
            auto semi = raw.find(';', i);
            if (semi == std::string_view::npos) {
                out.push_back('&');
                continue;
            }
            std::string_view ent = raw.substr(i + 1, semi - i - 1);
            if (ent == "amp") out += '&';
            else if (ent == "lt") out += '<';
            else if (ent == "gt") out += '>';
            else if (ent == "quot") out += '"';
            else if (ent == "apos") out += '\'';
            else if (!ent.empty() && ent[0] == '#') {
                unsigned long cp = ent.size() > 1 && (ent[1] == 'x' || ent[1] == 'X')
                                       ? std::stoul(std::string(ent.substr(2)), nullptr, 16)
                                       : std::stoul(std::string(ent.substr(1)));
                append_utf8(out, cp);
            } else {
                out += '&';
                out += ent;
                out += ';';
            }
            i = semi;
        }
        return out;
    }

    static void append_utf8(std::string& out, unsigned long cp)
    {
        if (cp < 0x80) {
            out.push_back(static_cast<char>(cp));
        } else if (cp < 0x800) {
            out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        } else if (cp < 0x10000) {
            out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        } else {
            out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        }
    }

    Element element()
    {
        ++pos_; // '<'
        Element e(name());
        for (;;) {
            skip_ws();
            if (pos_ >= src_.size()) fail("unterminated start tag");
            if (starts("/>")) {
                pos_ += 2;
                return e;
            }
            if (src_[pos_] == '>') {
                ++pos_;
                break;
            }
            std::string key = name();
            skip_ws();
            if (pos_ >= src_.size() || src_[pos_] != '=') fail("expected '=' after attribute " + key);
            ++pos_;
            skip_ws();
            if (pos_ >= src_.size() || (src_[pos_] != '"' && src_[pos_] != '\'')) fail("expected quoted value");
            char q = src_[pos_++];
            auto end = src_.find(q, pos_);
            if (end == std::string_view::npos) fail("unterminated attribute value");
            e.attrs.emplace_back(std::move(key), decode(src_.substr(pos_, end - pos_)));
            pos_ = end + 1;
        }
        for (;;) {
            if (pos_ >= src_.size()) fail("unterminated element <" + e.tag + ">");
            if (starts("</")) {
                pos_ += 2;
                std::string closing = name();
                if (closing != e.tag) fail("mismatched closing tag </" + closing + "> for <" + e.tag + ">");
                skip_ws();
                if (pos_ >= src_.size() || src_[pos_] != '>') fail("expected '>'");
                ++pos_;
                return e;
            }
            if (starts("<!--")) {
                skip_until("-->");
            } else if (starts("<![CDATA[")) {
                pos_ += 9;
                auto end = src_.find("]]>", pos_);
                if (end == std::string_view::npos) fail("unterminated CDATA");
                e.children.push_back(Element::text_node(std::string(src_.substr(pos_, end - pos_))));
                pos_ = end + 3;
            } else if (starts("<?")) {
                skip_until("?>");
            } else if (src_[pos_] == '<') {
                e.children.push_back(element());
            } else {
                auto end = src_.find('<', pos_);
                if (end == std::string_view::npos) fail("unterminated element <" + e.tag + ">");
                std::string t = decode(src_.substr(pos_, end - pos_));
                if (!text::trim(t).empty()) e.children.push_back(Element::text_node(std::move(t)));
                pos_ = end;
            }
        }
    }

    std::string_view src_;
    std::size_t pos_ = 0;
};

} // namespace

std::string serialize(const Element& root)
{
    std::string out;
    serialize_into(out, root, 0);
    return out;
}

Element parse(std::string_view xml) { return Parser(xml).run(); }

std::string num(double v)
{
    double r = std::round(v * 100.0) / 100.0;
    if (r == 0) r = 0; // no "-0"
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(2);
    os << r;
    std::string s = os.str();
    while (s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
    return s;
}

Element document(double width, double height)
{
    Element root("svg");
    root.set("xmlns", "http://www.w3.org/2000/svg");
    root.set("width", num(width));
    root.set("height", num(height));
    root.set("viewBox", "0 0 " + num(width) + " " + num(height));
    return root;
}

ViewBox view_box(const Element& svgRoot)
{
    if (auto vb = svgRoot.attr("viewBox")) {
        std::string s = *vb;
        for (char& c : s)
            if (c == ',') c = ' ';
        std::istringstream in(s);
        ViewBox out;
        if (in >> out.x >> out.y >> out.width >> out.height && out.width > 0 && out.height > 0) return out;
    }
    auto dim = [&](const char* key) -> double {
        auto v = svgRoot.attr(key);
        if (!v) return 0;
        try {
            return std::stod(*v);
        } catch (...) {
            return 0;
        }
    };
    double w = dim("width"), h = dim("height");
    if (w > 0 && h > 0) return {0, 0, w, h};
    return {0, 0, 100, 100};
}

} // namespace inkline::svg
