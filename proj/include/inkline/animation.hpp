#pragma once

#include "inkline/svg.hpp"

#include <nlohmann/json_fwd.hpp>

#include <string>
#include <string_view>
#include <vector>

namespace inkline {

enum class AnimationSource { Visualization, Graphic };

// Looping frame sequence (always infinite). Frames are vector images.
struct AnimatedAsset {
    std::vector<svg::Element> frames;
    int frameDelayMs = 200;
    std::vector<std::string> frameKeys; // empty, or one label per frame
    AnimationSource source = AnimationSource::Graphic;
    bool restartPending = false;

    std::size_t frame_count() const noexcept { return frames.size(); }
    long long cycle_ms() const noexcept { return static_cast<long long>(frames.size()) * frameDelayMs; }

    friend bool operator==(const AnimatedAsset&, const AnimatedAsset&) = default;
};

inline constexpr int kDefaultFrameDelayMs = 200;

// Throws Error "animation.invalid" when |frames| < 2, delay <= 0, or keys mismatch.
void validate(const AnimatedAsset& a);

nlohmann::json to_json(const AnimatedAsset& a);
AnimatedAsset animated_asset_from_json(const nlohmann::json& j);

// Frame bundle manifest: "<file> <delayMs>" per line plus header lines.
std::string timing_manifest(const AnimatedAsset& a, std::string_view stem = "frame");

} // namespace inkline
