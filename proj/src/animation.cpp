#include "inkline/animation.hpp"

#include "inkline/error.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <sstream>

namespace inkline {

using nlohmann::json;

void validate(const AnimatedAsset& a)
{
    if (a.frames.size() < 2) throw Error("animation.invalid", "an animation needs at least 2 frames");
    if (a.frameDelayMs <= 0) throw Error("animation.invalid", "frame delay must be positive");
    if (!a.frameKeys.empty() && a.frameKeys.size() != a.frames.size())
        throw Error("animation.invalid", "frame keys do not match frame count");
}

json to_json(const AnimatedAsset& a)
{
    json frames = json::array();
    for (const auto& f : a.frames) frames.push_back(svg::serialize(f));
    return {{"frames", frames},
            {"frameDelayMs", a.frameDelayMs},
            {"frameKeys", a.frameKeys},
            {"loop", "infinite"},
            {"source", a.source == AnimationSource::Visualization ? "visualization" : "graphic"},
            {"restartPending", a.restartPending}};
}

AnimatedAsset animated_asset_from_json(const json& j)
{
    AnimatedAsset a;
    for (const auto& f : j.at("frames")) a.frames.push_back(svg::parse(f.get<std::string>()));
    a.frameDelayMs = j.value("frameDelayMs", kDefaultFrameDelayMs);
    a.frameKeys = j.value("frameKeys", std::vector<std::string>{});
    a.source = j.value("source", std::string("graphic")) == "visualization" ? AnimationSource::Visualization
                                                                           : AnimationSource::Graphic;
    a.restartPending = j.value("restartPending", false);
    return a;
}

std::string timing_manifest(const AnimatedAsset& a, std::string_view stem)
{
    std::ostringstream os;
    os << "frames " << a.frames.size() << "\n";
    os << "cycle_ms " << a.cycle_ms() << "\n";
    os << "loop infinite\n";
    for (std::size_t i = 0; i < a.frames.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "_%03zu.svg", i);
        os << stem << name << ' ' << a.frameDelayMs;
        if (!a.frameKeys.empty()) os << ' ' << a.frameKeys[i];
        os << "\n";
    }
    return os.str();
}

} // namespace inkline
