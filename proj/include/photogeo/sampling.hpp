#pragma once

#include "photogeo/geometry.hpp"
#include "photogeo/shading.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <string_view>
#include <vector>

namespace photogeo {

using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

struct ViewpointDistribution
{
    Vec6 mean = Vec6::Zero();
    Mat6 covariance = Mat6::Zero();

    /// Zero mean, diagonal: 5, 15, 5 degrees of pitch, yaw, roll and 0.02 per translation.
    static ViewpointDistribution default_preset();
};

/// Uniform offsets for the light direction and diffuse weight; the ambient offset is
/// alpha times the diffuse offset.
struct LightingDistribution
{
    double xmin = -1.0, xmax = 1.0;
    double ymin = -0.2, ymax = 0.8;
    double dmin = -0.1, dmax = 0.6;
    double alpha = -0.6;

    static LightingDistribution bfm();
    static LightingDistribution generic();
    static LightingDistribution preset(std::string_view name);
};

/// Counter-based seeding: draw `index` of `stage` depends only on (base_seed, stage,
/// index, stream), never on the order in which draws are made.
struct SeedPolicy
{
    std::uint64_t base_seed = 0;

    std::uint64_t derive(std::uint64_t stage, std::uint64_t index, std::uint64_t stream = 0) const;
};

std::vector<Viewpoint> sample_viewpoints(const ViewpointDistribution& dist, std::size_t n, const SeedPolicy& seeds,
                                         std::uint64_t stage = 0, const ViewBounds& bounds = {});

std::vector<LightingOffset> sample_lightings(const LightingDistribution& dist, std::size_t n, const SeedPolicy& seeds,
                                             std::uint64_t stage = 0);

} // namespace photogeo
