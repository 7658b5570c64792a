#include "photogeo/manifold.hpp"

#include "photogeo/error.hpp"
#include "photogeo/image_io.hpp"
#include "photogeo/losses.hpp"

#include <algorithm>
#include <cstdio>
#include <random>

namespace photogeo {

double mean_l1(const Image& a, const Image& b, const Mask* mask)
{
    if (!a.same_shape(b) || (mask && !a.same_shape(*mask)))
        throw Error(ErrorCode::ShapeMismatch, "images differ in size");
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (mask && !(*mask)[i])
            continue;
        sum += (a[i] - b[i]).cwiseAbs().sum();
        ++count;
    }
    return count ? sum / (3.0 * count) : 0.0;
}

namespace {

OracleFit fit(const OracleScene& scene, const SceneTape& tape, const Image& pseudo, const Viewpoint& hint_view,
              const LightingOffset& hint_light, const RenderOptions& options, std::uint64_t noise_seed,
              const Mask* mask, int budget)
{
    if (budget < 0)
        budget = scene.fit_budget;
    const auto& K = scene.K;
    if (pseudo.width() != K.width || pseudo.height() != K.height)
        throw Error(ErrorCode::ShapeMismatch, "pseudo sample is " + std::to_string(pseudo.width()) + "x" +
                                                  std::to_string(pseudo.height()) + ", oracle scene is " +
                                                  std::to_string(K.width) + "x" + std::to_string(K.height));

    const Lighting start_light = apply_offset(scene.base_lighting, hint_light);
    Viewpoint view = hint_view.clamped(options.bounds);
    LightingParams light = LightingParams::from_lighting(start_light);
    if (mask && !pseudo.same_shape(*mask))
        throw Error(ErrorCode::ShapeMismatch, "pseudo sample mask differs in size");
    if (mask && std::none_of(mask->begin(), mask->end(), [](std::uint8_t m) { return m != 0; }))
        mask = nullptr;
    const ScalarMap everywhere(K.width, K.height, 1.0);

    OracleFit best;
    best.view = view;
    best.lighting = start_light;
    best.projection.image = render_view(tape, view, start_light, K, options).output.image;
    best.projection.residual = mean_l1(best.projection.image, pseudo, mask);
    best.initial_residual = best.projection.residual;

    Optimizer view_opt(OptimizerKind::Adam, scene.view_learning_rate);
    Optimizer light_opt(OptimizerKind::Adam, scene.light_learning_rate);
    SceneAccumulator scratch(K.width, K.height);
    for (int it = 0; it <= budget; ++it) {
        const Lighting current = it == 0 ? start_light : light.mapped();
        const ViewTape vt = render_view(tape, view, current, K, options);
        const LossValue loss = recon_loss(pseudo, vt.output.image, everywhere, mask, 0.0);
        if (it > 0 && loss.value < best.projection.residual) {
            best.view = view;
            best.lighting = current;
            best.projection.image = vt.output.image;
            best.projection.residual = loss.value;
        }
        if (it == budget)
            break;
        const ViewGrad g = render_view_backward(tape, vt, view, K, loss.grad, scratch, options);
        const LightingParams gl = lighting_params_backward(light, g.light);
        std::array<double, 6> vp{}, vg{};
        std::array<double, 4> lp{}, lg{};
        for (std::size_t k = 0; k < 6; ++k) {
            vp[k] = view[k];
            vg[k] = g.view[k];
        }
        for (std::size_t k = 0; k < 4; ++k) {
            lp[k] = light[k];
            lg[k] = gl[k];
        }
        view_opt.step(vp, vg);
        light_opt.step(lp, lg);
        for (std::size_t k = 0; k < 6; ++k)
            view[k] = vp[k];
        for (std::size_t k = 0; k < 4; ++k)
            light[k] = lp[k];
        view = view.clamped(options.bounds);
    }

    const double init = best.initial_residual;
    best.projection.converged = best.projection.residual <= 0.99 * init;
    if (scene.noise_level > 0.0) {
        std::mt19937_64 rng(noise_seed);
        std::uniform_real_distribution<double> noise(-scene.noise_level, scene.noise_level);
        for (auto& px : best.projection.image)
            for (int c = 0; c < 3; ++c)
                px[c] += noise(rng);
    }
    return best;
}

} // namespace

OracleFit oracle_project(const OracleScene& scene, const Image& pseudo, const Viewpoint& hint_view,
                         const LightingOffset& hint_light, const RenderOptions& options, std::uint64_t noise_seed,
                         const Mask* mask, int budget)
{
    const SceneTape tape = record_scene(scene.depth, scene.albedo, scene.K);
    return fit(scene, tape, pseudo, hint_view, hint_light, options, noise_seed, mask, budget);
}

OracleProjector::OracleProjector(OracleScene scene, RenderOptions options, SeedPolicy seeds)
    : scene_(std::move(scene)), tape_(record_scene(scene_.depth, scene_.albedo, scene_.K)), options_(options),
      seeds_(seeds)
{
}

Projection OracleProjector::project(const ProjectionRequest& request) const
{
    constexpr std::uint64_t kNoiseStream = 3;
    return fit(scene_, tape_, request.pseudo, request.hint_view, request.hint_light, options_,
               seeds_.derive(request.stage, request.index, kNoiseStream), request.mask, request.budget)
        .projection;
}

std::filesystem::path ReplayProjector::path_for(std::size_t index, std::size_t stage) const
{
    char name[32];
    std::snprintf(name, sizeof(name), "proj_%03zu.png", index);
    const auto staged = directory / ("stage_" + std::to_string(stage + 1));
    if (std::filesystem::is_directory(staged))
        return staged / name;
    return directory / name;
}

Image replay_project(const ReplayProjector& replay, std::size_t index, std::size_t stage)
{
    const auto path = replay.path_for(index, stage);
    if (!std::filesystem::exists(path))
        throw Error(ErrorCode::MissingFile, "projected sample not found: " + path.string());
    Image image = read_png(path);
    if (image.width() != replay.width || image.height() != replay.height)
        throw Error(ErrorCode::ShapeMismatch, path.string() + " is " + std::to_string(image.width()) + "x" +
                                                  std::to_string(image.height()) + ", expected " +
                                                  std::to_string(replay.width) + "x" + std::to_string(replay.height));
    return image;
}

Projection ReplayManifoldProjector::project(const ProjectionRequest& request) const
{
    Projection p;
    p.image = replay_project(replay_, request.index, request.stage);
    p.residual = mean_l1(p.image, request.pseudo, request.mask);
    p.converged = true;
    return p;
}

} // namespace photogeo
