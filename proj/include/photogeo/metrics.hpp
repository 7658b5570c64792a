#pragma once

#include "photogeo/grid.hpp"

#include <cstddef>
#include <optional>
#include <string>

namespace photogeo {

/// Scale-invariant depth error: standard deviation of log(pred) - log(gt) over masked
/// pixels. Returned in natural units (not x1e-2).
double side(const DepthMap& pred, const DepthMap& gt, const Mask* mask = nullptr);

/// Mean angle between normals, in degrees.
double mad(const NormalMap& pred, const NormalMap& gt, const Mask* mask = nullptr);

inline constexpr double kPsnrIdentical = 99.0;

/// 10 log10(1 / MSE) over masked pixels, for images with range [0, 1]. Identical
/// inputs report kPsnrIdentical.
double psnr(const Image& a, const Image& b, const Mask* mask = nullptr);

struct EvalReport
{
    /// x1e-2, matching the usual reporting convention.
    double side = 0.0;
    double mad = 0.0;
    /// Reported only when an image comparison was made.
    std::optional<double> psnr;
    std::size_t pixels = 0;

    std::string to_json() const;
};

} // namespace photogeo
