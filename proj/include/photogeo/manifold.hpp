#pragma once

#include "photogeo/geometry.hpp"
#include "photogeo/optimizer.hpp"
#include "photogeo/renderer.hpp"
#include "photogeo/sampling.hpp"
#include "photogeo/shading.hpp"

#include <cstddef>
#include <filesystem>

namespace photogeo {

struct ProjectionRequest
{
    const Image& pseudo;
    Viewpoint hint_view;
    LightingOffset hint_light;
    std::size_t stage = 0;
    std::size_t index = 0;
    /// Object footprint in the pseudo sample. When set, the background is ignored while fitting.
    const Mask* mask = nullptr;
    /// Fit steps to spend; negative selects the projector's own default.
    int budget = -1;
};

struct Projection
{
    Image image;
    bool converged = false;
    /// Mean L1 distance between the returned image and the pseudo sample.
    double residual = 0.0;
};

/// Snaps an arbitrary (possibly implausible) rendering onto the manifold of images the
/// target object can produce. Implementations must be safe to call concurrently on
/// distinct requests.
class ManifoldProjector
{
public:
    virtual ~ManifoldProjector() = default;
    virtual Projection project(const ProjectionRequest& request) const = 0;
};

/// Ground truth for the oracle: the only images it can produce are renderings of this
/// scene under some viewpoint and lighting.
struct OracleScene
{
    DepthMap depth;
    Image albedo;
    Lighting base_lighting = Lighting::canonical();
    CameraIntrinsics K;
    /// Gradient steps spent fitting (view, lighting) per request.
    int fit_budget = 100;
    /// Amplitude of zero-mean uniform noise added to the returned image.
    double noise_level = 0.0;
    double view_learning_rate = 0.01;
    double light_learning_rate = 0.03;
};

struct OracleFit
{
    Projection projection;
    Viewpoint view;
    Lighting lighting;
    double initial_residual = 0.0;
};

/// Fits (view, lighting) of the ground-truth scene to the pseudo sample by gradient
/// descent on mean L1, starting from the hint, and returns the best rendering found.
/// With a mask, only pixels inside it are compared.
OracleFit oracle_project(const OracleScene& scene, const Image& pseudo, const Viewpoint& hint_view,
                         const LightingOffset& hint_light, const RenderOptions& options = {},
                         std::uint64_t noise_seed = 0, const Mask* mask = nullptr, int budget = -1);

class OracleProjector : public ManifoldProjector
{
public:
    OracleProjector(OracleScene scene, RenderOptions options, SeedPolicy seeds);
    Projection project(const ProjectionRequest& request) const override;

    const OracleScene& scene() const noexcept { return scene_; }

private:
    OracleScene scene_;
    SceneTape tape_;
    RenderOptions options_;
    SeedPolicy seeds_;
};

/// Reads externally projected samples: `<dir>/proj_NNN.png`, or
/// `<dir>/stage_S/proj_NNN.png` when per-stage directories exist (S counts from 1).
struct ReplayProjector
{
    std::filesystem::path directory;
    int width = 0;
    int height = 0;

    std::filesystem::path path_for(std::size_t index, std::size_t stage = 0) const;
};

Image replay_project(const ReplayProjector& replay, std::size_t index, std::size_t stage = 0);

class ReplayManifoldProjector : public ManifoldProjector
{
public:
    explicit ReplayManifoldProjector(ReplayProjector replay) : replay_(std::move(replay)) {}
    Projection project(const ProjectionRequest& request) const override;

private:
    ReplayProjector replay_;
};

/// Mean absolute difference over all pixels, or over the pixels inside `mask`.
double mean_l1(const Image& a, const Image& b, const Mask* mask = nullptr);

} // namespace photogeo
