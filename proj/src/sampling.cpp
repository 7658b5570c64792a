#include "photogeo/sampling.hpp"

#include "photogeo/error.hpp"

#include <Eigen/Eigenvalues>

#include <numbers>
#include <random>
#include <string>

namespace photogeo {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

// SplitMix64 finaliser.
std::uint64_t mix(std::uint64_t z)
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

enum Stream : std::uint64_t { kViewpointStream = 1, kLightingStream = 2 };

} // namespace

std::uint64_t SeedPolicy::derive(std::uint64_t stage, std::uint64_t index, std::uint64_t stream) const
{
    return mix(mix(mix(mix(base_seed) ^ stage) ^ index) ^ stream);
}

ViewpointDistribution ViewpointDistribution::default_preset()
{
    ViewpointDistribution d;
    Vec6 sigma;
    sigma << 5 * kDeg, 15 * kDeg, 5 * kDeg, 0.02, 0.02, 0.02;
    d.covariance = sigma.cwiseAbs2().asDiagonal();
    return d;
}

LightingDistribution LightingDistribution::bfm()
{
    return {-0.9, 0.9, -0.3, 0.8, -0.1, 0.7, -0.4};
}

LightingDistribution LightingDistribution::generic()
{
    return {-1.0, 1.0, -0.2, 0.8, -0.1, 0.6, -0.6};
}

LightingDistribution LightingDistribution::preset(std::string_view name)
{
    if (name == "bfm")
        return bfm();
    if (name == "generic")
        return generic();
    throw Error(ErrorCode::InvalidArgument, "unknown lighting preset '" + std::string(name) + "'");
}

std::vector<Viewpoint> sample_viewpoints(const ViewpointDistribution& dist, std::size_t n, const SeedPolicy& seeds,
                                         std::uint64_t stage, const ViewBounds& bounds)
{
    if (n < 1)
        throw Error(ErrorCode::InvalidArgument, "sample count must be at least 1");
    if (!dist.covariance.isApprox(dist.covariance.transpose(), 1e-12))
        throw Error(ErrorCode::NonPsdCovariance, "covariance is not symmetric");

    // A symmetric square root handles semi-definite (including zero) covariances exactly.
    const Eigen::SelfAdjointEigenSolver<Mat6> eig(dist.covariance);
    const Vec6 lambda = eig.eigenvalues();
    if (lambda.minCoeff() < -1e-9)
        throw Error(ErrorCode::NonPsdCovariance, "covariance is not positive semi-definite");
    const Mat6 L = eig.eigenvectors() * lambda.cwiseMax(0.0).cwiseSqrt().asDiagonal();

    std::vector<Viewpoint> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::mt19937_64 rng(seeds.derive(stage, i, kViewpointStream));
        std::normal_distribution<double> normal;
        Vec6 z;
        for (int k = 0; k < 6; ++k)
            z[k] = normal(rng);
        const Vec6 draw = dist.mean + L * z;
        Viewpoint v;
        for (std::size_t k = 0; k < 6; ++k)
            v[k] = draw[static_cast<int>(k)];
        out[i] = v.clamped(bounds);
    }
    return out;
}

std::vector<LightingOffset> sample_lightings(const LightingDistribution& dist, std::size_t n, const SeedPolicy& seeds,
                                             std::uint64_t stage)
{
    if (n < 1)
        throw Error(ErrorCode::InvalidArgument, "sample count must be at least 1");
    if (dist.xmin > dist.xmax || dist.ymin > dist.ymax || dist.dmin > dist.dmax)
        throw Error(ErrorCode::InvalidArgument, "lighting distribution bounds must satisfy min <= max");

    auto uniform = [](std::mt19937_64& rng, double lo, double hi) {
        if (lo == hi)
            return lo;
        return std::uniform_real_distribution<double>(lo, hi)(rng);
    };

    std::vector<LightingOffset> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::mt19937_64 rng(seeds.derive(stage, i, kLightingStream));
        LightingOffset o;
        o.dlx = uniform(rng, dist.xmin, dist.xmax);
        o.dly = uniform(rng, dist.ymin, dist.ymax);
        o.dkd = uniform(rng, dist.dmin, dist.dmax);
        o.dks = dist.alpha * o.dkd;
        out[i] = o;
    }
    return out;
}

} // namespace photogeo
