#pragma once

#include "photogeo/grid.hpp"

#include <optional>
#include <string>
#include <string_view>

namespace photogeo {

enum class PriorKind { Ellipsoid, Asymmetric, Shifted, Weak, Flat };

std::string_view to_string(PriorKind kind);
PriorKind prior_kind_from_string(std::string_view name);

/// Initial shape. Centre and radii are in pixels as (row, column); when unset, the
/// prior is centred with radii (0.35 H, 0.3 W).
struct PriorSpec
{
    PriorKind kind = PriorKind::Ellipsoid;
    std::optional<Vec2> center;
    std::optional<Vec2> radii;
    double near = 0.91;
    double far = 1.02;
    /// Horizontal shift of the centre as a fraction of the width (Shifted only).
    double shift_fraction = 1.0 / 6.0;
    /// Align centre and radii with the mask bounding box when a mask is supplied.
    bool align_to_mask = true;
};

/// Hemi-ellipsoid bulging toward the camera: depth is `near` at the centre and `far`
/// on and outside the rim.
DepthMap build_prior(const PriorSpec& spec, int width, int height, const Mask* mask = nullptr);

} // namespace photogeo
