#pragma once

#include <functional>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace inkline::svg {

// Minimal XML element tree for the vector-image subset the engine emits and
// consumes. Text runs are children with tag "#text".
struct Element {
    std::string tag;
    std::vector<std::pair<std::string, std::string>> attrs;
    std::vector<Element> children;
    std::string text; // only for "#text" nodes

    Element() = default;
    explicit Element(std::string t) : tag(std::move(t)) {}
    Element(std::string t, std::initializer_list<std::pair<std::string, std::string>> a)
        : tag(std::move(t)), attrs(a) {}

    static Element text_node(std::string content);

    std::optional<std::string> attr(std::string_view name) const;
    Element& set(std::string_view name, std::string value);
    bool erase_attr(std::string_view name);
    Element& add(Element child);

    bool is_text() const noexcept { return tag == "#text"; }

    // Concatenated text of all descendants.
    std::string inner_text() const;

    friend bool operator==(const Element&, const Element&) = default;
};

// Depth-first pre-order walk; the callback may mutate the element.
void walk(Element& root, const std::function<void(Element&)>& fn);
void walk(const Element& root, const std::function<void(const Element&)>& fn);

// Count of non-text elements in the tree, root included.
std::size_t element_count(const Element& root);

// First descendant (or root) matching `pred`.
const Element* find_first(const Element& root, const std::function<bool(const Element&)>& pred);
Element* find_first(Element& root, const std::function<bool(const Element&)>& pred);

bool has_class(const Element& e, std::string_view cls);

std::string serialize(const Element& root);
// Throws inkline::Error("svg.parse") with the byte offset in detail.
Element parse(std::string_view xml);

// Coordinate formatting: at most 2 decimals, no trailing zeros.
std::string num(double v);

// Root <svg> sized width x height with a matching viewBox.
Element document(double width, double height);

struct ViewBox {
    double x = 0, y = 0, width = 0, height = 0;
};
// From viewBox, else width/height, else 100x100.
ViewBox view_box(const Element& svgRoot);

} // namespace inkline::svg
