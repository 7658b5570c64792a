#pragma once

#include "photogeo/grid.hpp"

namespace photogeo {

struct LossValue
{
    double value = 0.0;
    /// dL/d(rendered image); same size as the image.
    Image grad;
};

/// Photometric loss: mean L1 over valid pixels (covered and, when a mask is given,
/// inside it) plus pyramid_weight times the mean L1 of 2x and 4x box-downsampled
/// pairs. A downsampled block counts only when all of its pixels are valid.
LossValue recon_loss(const Image& target, const Image& rendered, const ScalarMap& coverage, const Mask* mask,
                     double pyramid_weight);

struct SmoothnessValue
{
    double value = 0.0;
    DepthMap grad;
};

/// Mean absolute second difference of depth along x and y, over every position where
/// the three-tap stencil fits.
SmoothnessValue smoothness_loss(const DepthMap& depth);

} // namespace photogeo
