#pragma once

#include "photogeo/grid.hpp"
#include "photogeo/shading.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace photogeo {

/// Ground-truth scene used by the oracle projector and the synthetic benchmarks.
struct SyntheticScene
{
    std::string name;
    DepthMap depth;
    Image albedo;
    /// Object footprint.
    Mask mask;
    Lighting lighting = Lighting::canonical();
};

inline constexpr int kMinSceneSize = 16;

/// Built-in scenes: "hemisphere" (centred cap, mirror symmetric), "bump2" (two
/// unequal bumps, asymmetric) and "ridge" (vertical ridge, mirror symmetric).
SyntheticScene make_scene(std::string_view name, int width, int height);

std::vector<std::string> scene_names();

} // namespace photogeo
