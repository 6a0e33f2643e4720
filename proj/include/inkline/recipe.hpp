#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <string>

namespace inkline::recipe {

// Recipe file (JSON):
//   {"dataset": path, "gallery": manifest path?, "message": text,
//    "canvas": {"width", "height", "background"?},
//    "steps": [{"brush": phrase | {"start", "end"}, "kind": visualization | data-filter | static-graphic | animated-graphic | color-palette,
//               "pick": index | "pickId": id,
//               "merge": {"op": "recolor", "targets": [step...]}
//                      | {"op": "sync", "with": step}
//                      | {"op": "highlight", "target": step}
//                      | {"op": "dod", "glyphs": {value: assetId}, "glyphScale"?},
//               "config": [{"field", "value"}], "place": {"tx", "ty", "rotationDeg", "scale"}}
//              | {"text": {"content", "sizePt"?, "color"?, "fontFamily"?}, "place"?}]}
// Paths are relative to the recipe file. Picks are 0-based.
struct Options {
    std::filesystem::path recipe;
    std::filesystem::path out;
    std::optional<std::filesystem::path> dataOverride;
    std::string provider = "fallback";
    std::string exportMode = "both"; // svg | frames | both
};

struct Result {
    bool ok = true;
    std::optional<std::size_t> failedStep; // unset when the failure is outside the steps
    std::string error;
    nlohmann::json report;
};

// Writes document.json, infographic.svg, frames.zip and report.json into `out`.
// A failing step stops the run; the report covers everything up to it.
Result run_recipe(const Options& options);

} // namespace inkline::recipe
