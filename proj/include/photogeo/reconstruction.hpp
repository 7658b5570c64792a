#pragma once

#include "photogeo/geometry.hpp"
#include "photogeo/manifold.hpp"
#include "photogeo/optimizer.hpp"
#include "photogeo/priors.hpp"
#include "photogeo/renderer.hpp"
#include "photogeo/sampling.hpp"
#include "photogeo/shading.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace photogeo {

/// Hyper-parameters of one Step 1 -> Step 2 -> Step 3 cycle.
struct StageConfig
{
    int samples = 32;
    int iters1 = 350;
    /// Projection budget per pseudo sample (oracle fit steps).
    int iters2 = 60;
    int iters3 = 300;
    double learning_rate = 0.02;
    double albedo_learning_rate = 0.05;
    double view_learning_rate = 0.005;
    double light_learning_rate = 0.02;
    /// Learning rates decay along a cosine to this fraction by the end of each step.
    double final_lr_fraction = 0.1;
    /// Iterations over which learning rates ramp up linearly at the start of each step.
    int warmup_iters = 25;
    /// Projector regularisation weight; carried for parity with external projectors.
    double lambda1 = 0.01;
    double lambda2 = 0.01;
    double pyramid_weight = 0.5;
    bool symmetry = true;
};

struct PipelineConfig
{
    int stages = 4;
    /// Entry s configures stage s; the last entry repeats for later stages.
    std::vector<StageConfig> stage_configs{StageConfig{}};
    PriorSpec prior;
    ViewpointDistribution viewpoints = ViewpointDistribution::default_preset();
    LightingDistribution lightings = LightingDistribution::generic();
    OptimizerKind optimizer = OptimizerKind::Adam;
    RenderOptions render;
    std::uint64_t seed = 0;
    double fov = 10.0 * std::numbers::pi / 180.0;
    /// Step-3 learning rates of stage s are scaled by stage_lr_decay^s.
    double stage_lr_decay = 0.5;

    const StageConfig& stage(int s) const;
    /// stage(s) with the per-stage learning-rate decay applied.
    StageConfig effective_stage(int s) const;
    void validate() const;
};

/// Everything optimised for one instance. Depth and albedo are shared across samples;
/// each sample has its own view and lighting.
struct InstanceState
{
    ScalarMap depth_raw;
    Image albedo_raw;
    std::vector<Viewpoint> views;
    std::vector<LightingParams> lights;
    /// Lighting of the input image itself.
    Lighting base_lighting = Lighting::canonical();
    int stage = 0;
    bool symmetry = false;

    DepthMap depth() const { return depth_from_raw(depth_raw); }
    Image albedo() const { return albedo_from_raw(albedo_raw); }
};

/// Fresh state: depth from the prior, albedo at 0.5, canonical lighting.
InstanceState initial_state(const DepthMap& prior, bool symmetry);

/// Makes depth and albedo parameters exactly mirror symmetric (average of both sides).
void symmetrize(InstanceState& state);

struct ProjectedSample
{
    Image image;
    Viewpoint hint_view;
    LightingOffset hint_light;
    /// Lighting the sample was rendered with: the instance lighting plus the offset.
    Lighting lighting;
    /// Input mask warped into this sample's view; empty when no mask was given.
    Mask mask;
    bool original = false;
    double residual = 0.0;
    bool converged = true;
};

struct StepReport
{
    std::vector<double> losses;
    /// Window starts t with loss[t + window] > loss[t].
    std::vector<int> window_violations;
    /// Trial iterates discarded because they would have broken the descent window.
    int rejected = 0;
    bool retried = false;
};

/// Per-instance reconstruction objective over a set of views; exposed for gradient checks.
struct ObjectiveValue
{
    double value = 0.0;
    ScalarMap depth_raw;
    Image albedo_raw;
    std::vector<Viewpoint> views;
    std::vector<LightingParams> lights;
};

/// (1/n) sum_i recon_loss(target_i, render(d, a, v_i, l_i)) + lambda2 smoothness(d), with
/// gradients for every parameter.
ObjectiveValue refinement_objective(const SceneParams& scene, const std::vector<Viewpoint>& views,
                                    const std::vector<LightingParams>& lights,
                                    const std::vector<ProjectedSample>& samples, const CameraIntrinsics& K,
                                    const StageConfig& cfg, const RenderOptions& options);

struct ReconContext
{
    CameraIntrinsics K;
    RenderOptions render;
    OptimizerKind optimizer = OptimizerKind::Adam;
    const Mask* mask = nullptr;
    /// Projection fit steps per pseudo sample; negative uses the projector default.
    int projection_budget = -1;
};

/// Fits the albedo so that rendering at the identity view under the instance lighting
/// reproduces `image`. Depth, views and lighting are untouched.
InstanceState step1_fit_albedo(InstanceState state, const Image& image, const StageConfig& cfg,
                               const ReconContext& ctx, StepReport* report = nullptr);

struct SamplerSetup
{
    ViewpointDistribution viewpoints;
    LightingDistribution lightings;
    SeedPolicy seeds;
};

/// Renders `cfg.samples` pseudo samples from the current estimate, projects them, and
/// appends the input image as the final entry.
std::vector<ProjectedSample> step2_generate_and_project(const InstanceState& state, const Image& image,
                                                        const ManifoldProjector& projector,
                                                        const SamplerSetup& sampler, int samples,
                                                        const ReconContext& ctx);

/// Joint refinement of depth, albedo and per-sample view/lighting. The input image's
/// view is held at identity to anchor the reference frame.
InstanceState step3_refine(InstanceState state, const std::vector<ProjectedSample>& samples, const StageConfig& cfg,
                           const ReconContext& ctx, StepReport* report = nullptr);

inline constexpr int kDescentWindow = 50;

struct StageSnapshot
{
    int stage = 0;
    DepthMap depth;
    NormalMap normals;
    Image albedo;
    Image recon;
    Lighting lighting;
    StepReport step1;
    StepReport step3;
    std::vector<double> residuals;
};

struct PipelineResult
{
    InstanceState state;
    std::vector<StageSnapshot> snapshots;
};

using StageObserver = std::function<void(const StageSnapshot&)>;

PipelineResult run_pipeline(const Image& image, const Mask* mask, const PipelineConfig& config,
                            const ManifoldProjector& projector, const StageObserver& observer = {});

enum class ManipulationMode { Rotate, Relight };

struct Manipulation
{
    ManipulationMode mode = ManipulationMode::Rotate;
    /// Rotate: yaw angles in radians. Relight: (lx, ly) pairs flattened.
    std::vector<double> trajectory;
    /// Weights used for relighting.
    double ks = 0.4;
    double kd = 0.6;
};

/// Yaw sweep of `frames` angles evenly spaced over [from, to].
std::vector<double> yaw_sweep(double from, double to, int frames);

std::vector<Image> manipulate(const DepthMap& depth, const Image& albedo, const Lighting& lighting,
                              const Manipulation& m, const CameraIntrinsics& K, const RenderOptions& options = {});
std::vector<Image> manipulate(const InstanceState& state, const Manipulation& m, const CameraIntrinsics& K,
                              const RenderOptions& options = {});

} // namespace photogeo
