#include "photogeo/reconstruction.hpp"

#include "photogeo/error.hpp"
#include "photogeo/losses.hpp"
#include "photogeo/parallel.hpp"

#include <cmath>
#include <string>

namespace photogeo {

const StageConfig& PipelineConfig::stage(int s) const
{
    if (stage_configs.empty())
        throw Error(ErrorCode::Config, "stage_configs must not be empty");
    return stage_configs[std::min<std::size_t>(static_cast<std::size_t>(s), stage_configs.size() - 1)];
}

StageConfig PipelineConfig::effective_stage(int s) const
{
    StageConfig c = stage(s);
    const double k = std::pow(stage_lr_decay, s);
    c.learning_rate *= k;
    c.albedo_learning_rate *= k;
    c.view_learning_rate *= k;
    c.light_learning_rate *= k;
    return c;
}

void PipelineConfig::validate() const
{
    if (stages < 1)
        throw Error(ErrorCode::Config, "stages must be ≥ 1");
    if (stage_configs.empty())
        throw Error(ErrorCode::Config, "stage_configs must not be empty");
    for (const auto& c : stage_configs) {
        if (c.samples < 0 || c.iters1 < 0 || c.iters2 < 0 || c.iters3 < 0)
            throw Error(ErrorCode::Config, "sample and iteration counts must be ≥ 0");
        if (c.lambda2 < 0.0)
            throw Error(ErrorCode::Config, "lambda2 must be ≥ 0");
        if (c.pyramid_weight < 0.0)
            throw Error(ErrorCode::Config, "pyramid_weight must be ≥ 0");
        if (!(c.learning_rate > 0.0) || !(c.albedo_learning_rate > 0.0) || !(c.view_learning_rate > 0.0) ||
            !(c.light_learning_rate > 0.0))
            throw Error(ErrorCode::Config, "learning rates must be positive");
        if (!(c.final_lr_fraction > 0.0 && c.final_lr_fraction <= 1.0))
            throw Error(ErrorCode::Config, "final_lr_fraction must lie in (0, 1]");
        if (c.warmup_iters < 0)
            throw Error(ErrorCode::Config, "warmup_iters must be ≥ 0");
    }
    if (!(stage_lr_decay > 0.0 && stage_lr_decay <= 1.0))
        throw Error(ErrorCode::Config, "stage_lr_decay must lie in (0, 1]");
    if (!(fov > 0.0 && fov < std::numbers::pi))
        throw Error(ErrorCode::Config, "fov must lie in (0, 180) degrees");
}

InstanceState initial_state(const DepthMap& prior, bool symmetry)
{
    InstanceState s;
    s.depth_raw = raw_from_depth(prior);
    s.albedo_raw = Image(prior.width(), prior.height(), Vec3::Zero());
    s.symmetry = symmetry;
    if (symmetry)
        symmetrize(s);
    return s;
}

namespace {

template <typename T>
void mirror_average(Grid<T>& g)
{
    const int W = g.width();
    for (int y = 0; y < g.height(); ++y)
        for (int x = 0; x < W / 2; ++x) {
            const T avg = 0.5 * (g(y, x) + g(y, W - 1 - x));
            g(y, x) = avg;
            g(y, W - 1 - x) = avg;
        }
}

// Gradient of a parameter shared between mirrored pixels.
template <typename T>
void mirror_sum(Grid<T>& g)
{
    const int W = g.width();
    for (int y = 0; y < g.height(); ++y)
        for (int x = 0; x < W / 2; ++x) {
            const T sum = g(y, x) + g(y, W - 1 - x);
            g(y, x) = sum;
            g(y, W - 1 - x) = sum;
        }
}

std::span<double> flat(ScalarMap& m)
{
    return {m.data().data(), m.size()};
}

std::span<double> flat(Image& img)
{
    return {img.data().data()->data(), img.size() * 3};
}

std::vector<double> pack(const std::vector<Viewpoint>& views)
{
    std::vector<double> out;
    out.reserve(views.size() * 6);
    for (const auto& v : views)
        for (std::size_t k = 0; k < 6; ++k)
            out.push_back(v[k]);
    return out;
}

std::vector<double> pack(const std::vector<LightingParams>& lights)
{
    std::vector<double> out;
    out.reserve(lights.size() * 4);
    for (const auto& l : lights)
        for (std::size_t k = 0; k < 4; ++k)
            out.push_back(l[k]);
    return out;
}

void unpack(const std::vector<double>& in, std::vector<Viewpoint>& views)
{
    for (std::size_t i = 0; i < views.size(); ++i)
        for (std::size_t k = 0; k < 6; ++k)
            views[i][k] = in[i * 6 + k];
}

void unpack(const std::vector<double>& in, std::vector<LightingParams>& lights)
{
    for (std::size_t i = 0; i < lights.size(); ++i)
        for (std::size_t k = 0; k < 4; ++k)
            lights[i][k] = in[i * 4 + k];
}

bool window_accepts(const std::vector<double>& losses, double candidate)
{
    const std::size_t w = kDescentWindow;
    return losses.size() < w || candidate <= losses[losses.size() - w];
}

std::vector<int> descent_violations(const std::vector<double>& losses)
{
    std::vector<int> out;
    for (std::size_t t = 0; t + kDescentWindow < losses.size(); ++t)
        if (losses[t + kDescentWindow] > losses[t])
            out.push_back(static_cast<int>(t));
    return out;
}

template <typename F>
auto in_step(int stage, int step, F&& f)
{
    try {
        return f();
    }
    catch (const Error& e) {
        throw Error(e.code(), "stage " + std::to_string(stage + 1) + ", step " + std::to_string(step) + ": " + e.what());
    }
}

} // namespace

void symmetrize(InstanceState& state)
{
    mirror_average(state.depth_raw);
    mirror_average(state.albedo_raw);
}

ObjectiveValue refinement_objective(const SceneParams& scene, const std::vector<Viewpoint>& views,
                                    const std::vector<LightingParams>& lights,
                                    const std::vector<ProjectedSample>& samples, const CameraIntrinsics& K,
                                    const StageConfig& cfg, const RenderOptions& options)
{
    const std::size_t n = samples.size();
    if (n == 0)
        throw Error(ErrorCode::EmptySet, "no sample to reconstruct");
    if (views.size() != n || lights.size() != n)
        throw Error(ErrorCode::ShapeMismatch, "one view and one lighting per sample required");

    const SceneTape tape = record_scene(scene, K);
    std::vector<double> losses(n, 0.0);
    std::vector<SceneAccumulator> accs(n);
    std::vector<ViewGrad> view_grads(n);
    parallel_for(n, [&](std::size_t i) {
        const auto& s = samples[i];
        const ViewTape vt = render_view(tape, views[i], lights[i].mapped(), K, options);
        LossValue loss = recon_loss(s.image, vt.output.image, vt.output.coverage, s.mask.empty() ? nullptr : &s.mask,
                                    cfg.pyramid_weight);
        losses[i] = loss.value / n;
        for (auto& g : loss.grad)
            g /= static_cast<double>(n);
        accs[i] = SceneAccumulator(K.width, K.height);
        view_grads[i] = render_view_backward(tape, vt, views[i], K, loss.grad, accs[i], options);
    });

    ObjectiveValue out;
    SceneAccumulator total(K.width, K.height);
    for (std::size_t i = 0; i < n; ++i) {
        out.value += losses[i];
        total.add(accs[i]);
    }
    if (cfg.lambda2 > 0.0) {
        const SmoothnessValue smooth = smoothness_loss(tape.depth);
        out.value += cfg.lambda2 * smooth.value;
        for (std::size_t i = 0; i < total.depth.size(); ++i)
            total.depth[i] += cfg.lambda2 * smooth.grad[i];
    }
    SceneGrad sg = scene_backward(tape, K, total);
    out.depth_raw = std::move(sg.depth_raw);
    out.albedo_raw = std::move(sg.albedo_raw);
    out.views.resize(n);
    out.lights.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.views[i] = view_grads[i].view;
        out.lights[i] = lighting_params_backward(lights[i], view_grads[i].light);
    }
    return out;
}

InstanceState step1_fit_albedo(InstanceState state, const Image& image, const StageConfig& cfg,
                               const ReconContext& ctx, StepReport* report)
{
    if (image.width() != ctx.K.width || image.height() != ctx.K.height)
        throw Error(ErrorCode::ShapeMismatch, "input image size differs from the camera");
    Optimizer opt(ctx.optimizer, cfg.albedo_learning_rate);
    StepReport local;
    // Normals do not change here; only the albedo is re-mapped each iteration.
    SceneTape tape = record_scene(state.depth(), state.albedo(), ctx.K);
    for (int it = 0; it < cfg.iters1; ++it) {
        tape.albedo = albedo_from_raw(state.albedo_raw);
        const ViewTape vt = render_view(tape, Viewpoint{}, state.base_lighting, ctx.K, ctx.render);
        const LossValue loss = recon_loss(image, vt.output.image, vt.output.coverage, ctx.mask, cfg.pyramid_weight);
        local.losses.push_back(loss.value);
        opt.set_scale(lr_schedule(it, cfg.iters1, cfg.final_lr_fraction, cfg.warmup_iters));
        SceneAccumulator acc(ctx.K.width, ctx.K.height);
        render_view_backward(tape, vt, Viewpoint{}, ctx.K, loss.grad, acc, ctx.render);
        Image grad = scene_backward(tape, ctx.K, acc).albedo_raw;
        if (state.symmetry)
            mirror_sum(grad);
        opt.step(flat(state.albedo_raw), flat(grad));
    }
    local.window_violations = descent_violations(local.losses);
    if (report)
        *report = std::move(local);
    return state;
}

std::vector<ProjectedSample> step2_generate_and_project(const InstanceState& state, const Image& image,
                                                        const ManifoldProjector& projector,
                                                        const SamplerSetup& sampler, int samples,
                                                        const ReconContext& ctx)
{
    const auto m = static_cast<std::size_t>(std::max(samples, 0));
    const int budget = ctx.projection_budget;
    std::vector<ProjectedSample> out(m + 1);
    if (m > 0) {
        const auto views = sample_viewpoints(sampler.viewpoints, m, sampler.seeds, state.stage, ctx.render.bounds);
        const auto offsets = sample_lightings(sampler.lightings, m, sampler.seeds, state.stage);
        const DepthMap depth = state.depth();
        const SceneTape tape = record_scene(depth, state.albedo(), ctx.K);
        parallel_for(m, [&](std::size_t i) {
            auto& s = out[i];
            s.hint_view = views[i];
            s.hint_light = offsets[i];
            s.lighting = apply_offset(state.base_lighting, offsets[i]);
            const Image pseudo = render_view(tape, views[i], s.lighting, ctx.K, ctx.render).output.image;
            if (ctx.mask)
                s.mask = warp_mask(*ctx.mask, depth, views[i], ctx.K, ctx.render);
            Projection p = projector.project({pseudo, views[i], offsets[i], static_cast<std::size_t>(state.stage), i,
                                              ctx.mask ? &s.mask : nullptr, budget});
            if (p.image.width() != ctx.K.width || p.image.height() != ctx.K.height)
                throw Error(ErrorCode::ShapeMismatch, "projector returned an image of the wrong size");
            s.image = std::move(p.image);
            s.residual = p.residual;
            s.converged = p.converged;
        });
    }
    auto& original = out[m];
    original.image = image;
    original.lighting = state.base_lighting;
    original.original = true;
    if (ctx.mask)
        original.mask = *ctx.mask;
    return out;
}

InstanceState step3_refine(InstanceState state, const std::vector<ProjectedSample>& samples, const StageConfig& cfg,
                           const ReconContext& ctx, StepReport* report)
{
    if (samples.empty())
        throw Error(ErrorCode::EmptySet, "projected set is empty");
    const std::size_t n = samples.size();
    if (state.symmetry)
        symmetrize(state);

    std::vector<Viewpoint> views(n);
    std::vector<LightingParams> lights(n);
    for (std::size_t i = 0; i < n; ++i) {
        views[i] = samples[i].original ? Viewpoint{} : samples[i].hint_view;
        lights[i] = LightingParams::from_lighting(samples[i].lighting);
    }

    Optimizer depth_opt(ctx.optimizer, cfg.learning_rate);
    Optimizer albedo_opt(ctx.optimizer, cfg.albedo_learning_rate);
    Optimizer view_opt(ctx.optimizer, cfg.view_learning_rate);
    Optimizer light_opt(ctx.optimizer, cfg.light_learning_rate);

    struct Checkpoint
    {
        ScalarMap depth_raw;
        Image albedo_raw;
        std::vector<Viewpoint> views;
        std::vector<LightingParams> lights;
    };
    Checkpoint good{state.depth_raw, state.albedo_raw, views, lights};

    auto evaluate = [&] {
        return refinement_objective({state.depth_raw, state.albedo_raw}, views, lights, samples, ctx.K, cfg,
                                    ctx.render);
    };
    auto restore = [&] {
        state.depth_raw = good.depth_raw;
        state.albedo_raw = good.albedo_raw;
        views = good.views;
        lights = good.lights;
    };

    StepReport local;
    double guard = 1.0;
    ObjectiveValue obj = evaluate();
    ObjectiveValue good_obj;
    for (int it = 0; it <= cfg.iters3; ++it) {
        if (!std::isfinite(obj.value)) {
            if (local.retried || local.losses.empty())
                throw Error(ErrorCode::Divergence, "loss is not finite after a halved-step retry");
            local.retried = true;
            restore();
            obj = good_obj;
            for (Optimizer* o : {&depth_opt, &albedo_opt, &view_opt, &light_opt}) {
                o->reset();
                o->set_learning_rate(0.5 * o->learning_rate());
            }
        }
        else if (!local.losses.empty() && !window_accepts(local.losses, obj.value)) {
            ++local.rejected;
            restore();
            obj = good_obj;
            guard *= 0.5;
        }
        else {
            local.losses.push_back(obj.value);
            good = {state.depth_raw, state.albedo_raw, views, lights};
            good_obj = obj;
        }
        if (it == cfg.iters3)
            break;

        ScalarMap g_depth = obj.depth_raw;
        Image g_albedo = obj.albedo_raw;
        if (state.symmetry) {
            mirror_sum(g_depth);
            mirror_sum(g_albedo);
        }
        std::vector<Viewpoint> g_views = obj.views;
        for (std::size_t i = 0; i < n; ++i)
            if (samples[i].original)
                g_views[i] = Viewpoint{};

        const double scale = guard * lr_schedule(it, cfg.iters3, cfg.final_lr_fraction, cfg.warmup_iters);
        for (Optimizer* o : {&depth_opt, &albedo_opt, &view_opt, &light_opt})
            o->set_scale(scale);
        depth_opt.step(flat(state.depth_raw), flat(g_depth));
        albedo_opt.step(flat(state.albedo_raw), flat(g_albedo));
        auto vp = pack(views);
        auto lp = pack(lights);
        view_opt.step(vp, pack(g_views));
        light_opt.step(lp, pack(obj.lights));
        unpack(vp, views);
        unpack(lp, lights);
        for (auto& v : views)
            v = v.clamped(ctx.render.bounds);
        obj = evaluate();
    }
    restore();

    state.views = views;
    state.lights = lights;
    for (std::size_t i = 0; i < n; ++i)
        if (samples[i].original)
            state.base_lighting = lights[i].mapped();
    local.window_violations = descent_violations(local.losses);
    if (report)
        *report = std::move(local);
    return state;
}

PipelineResult run_pipeline(const Image& image, const Mask* mask, const PipelineConfig& config,
                            const ManifoldProjector& projector, const StageObserver& observer)
{
    config.validate();
    if (mask && !mask->same_shape(image))
        throw Error(ErrorCode::ShapeMismatch, "mask size differs from the input image");

    ReconContext ctx;
    ctx.K = intrinsics_from_fov(image.width(), image.height(), config.fov);
    ctx.render = config.render;
    ctx.optimizer = config.optimizer;
    ctx.mask = mask;
    const SamplerSetup sampler{config.viewpoints, config.lightings, SeedPolicy{config.seed}};

    const DepthMap prior = in_step(0, 1, [&] { return build_prior(config.prior, image.width(), image.height(), mask); });
    PipelineResult result;
    result.state = initial_state(prior, config.stage(0).symmetry);

    for (int s = 0; s < config.stages; ++s) {
        const StageConfig cfg = config.effective_stage(s);
        auto& state = result.state;
        state.stage = s;
        state.symmetry = cfg.symmetry;
        if (state.symmetry)
            symmetrize(state);

        StageSnapshot snap;
        snap.stage = s;
        state = in_step(s, 1, [&] { return step1_fit_albedo(state, image, cfg, ctx, &snap.step1); });
        ctx.projection_budget = cfg.iters2;
        const auto samples =
            in_step(s, 2, [&] { return step2_generate_and_project(state, image, projector, sampler, cfg.samples, ctx); });
        for (const auto& p : samples)
            if (!p.original)
                snap.residuals.push_back(p.residual);
        state = in_step(s, 3, [&] { return step3_refine(state, samples, cfg, ctx, &snap.step3); });

        snap.depth = state.depth();
        snap.normals = compute_normals(snap.depth, ctx.K);
        snap.albedo = state.albedo();
        snap.lighting = state.base_lighting;
        snap.recon = render(snap.depth, snap.albedo, Viewpoint{}, state.base_lighting, ctx.K, ctx.render).image;
        if (observer)
            observer(snap);
        result.snapshots.push_back(std::move(snap));
    }
    return result;
}

std::vector<double> yaw_sweep(double from, double to, int frames)
{
    std::vector<double> out;
    if (frames <= 0)
        return out;
    if (frames == 1)
        return {from};
    for (int k = 0; k < frames; ++k)
        out.push_back(from + (to - from) * k / (frames - 1));
    return out;
}

std::vector<Image> manipulate(const InstanceState& state, const Manipulation& m, const CameraIntrinsics& K,
                              const RenderOptions& options)
{
    return manipulate(state.depth(), state.albedo(), state.base_lighting, m, K, options);
}

std::vector<Image> manipulate(const DepthMap& depth, const Image& albedo, const Lighting& lighting,
                              const Manipulation& m, const CameraIntrinsics& K, const RenderOptions& options)
{
    std::vector<Image> frames;
    if (m.mode == ManipulationMode::Rotate) {
        for (double yaw : m.trajectory) {
            Viewpoint v;
            v.ry = yaw;
            frames.push_back(render(depth, albedo, v, lighting, K, options).image);
        }
        return frames;
    }
    if (m.trajectory.size() % 2 != 0)
        throw Error(ErrorCode::InvalidArgument, "relight trajectory must hold (lx, ly) pairs");
    for (std::size_t k = 0; k + 1 < m.trajectory.size(); k += 2) {
        const Lighting light{m.trajectory[k], m.trajectory[k + 1], m.ks, m.kd};
        frames.push_back(render(depth, albedo, Viewpoint{}, light, K, options).image);
    }
    return frames;
}

} // namespace photogeo
