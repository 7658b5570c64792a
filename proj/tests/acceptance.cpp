// Acceptance suite: one PASS/FAIL line per criterion. Pass criterion numbers as
// arguments to run a subset.

#include "photogeo/cli.hpp"
#include "photogeo/image_io.hpp"
#include "photogeo/metrics.hpp"
#include "photogeo/parallel.hpp"
#include "photogeo/reconstruction.hpp"
#include "photogeo/scenes.hpp"
#include "support.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace photogeo;
namespace fs = std::filesystem;
using photogeo::test::kDeg;

namespace {

constexpr std::uint64_t kSeed = 7;

struct Outcome
{
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof(buf), f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------
// 1. Gradient suite

struct GradTally
{
    std::size_t ok = 0, total = 0;
    void add(bool good)
    {
        ok += good;
        ++total;
    }
    double fraction() const { return total ? double(ok) / total : 1.0; }
};

// Relative agreement; entries below a floor tied to the largest gradient of the same
// kind count as agreeing when both sides are below it.
bool agrees(double analytic, double fd, double floor)
{
    const double scale = std::max(std::abs(analytic), std::abs(fd));
    if (scale < floor)
        return true;
    return std::abs(analytic - fd) / scale < 1e-2;
}

Outcome gradient_suite()
{
    const auto t0 = std::chrono::steady_clock::now();
    const int N = 16;
    const double eps = 1e-3;
    const auto K = intrinsics_from_fov(N, N, 10.0 * kDeg);
    std::mt19937_64 rng(kSeed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    GradTally depth, albedo, view, light;

    // Scenes keep curvature, residuals and coverage away from zero so that central
    // differences do not straddle a kink of the L1 terms or the silhouette.
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    auto random_sign = [&] { return u01(rng) < 0.5 ? -1.0 : 1.0; };
    Mask interior(N, N, 0);
    for (int y = 2; y < N - 2; ++y)
        for (int x = 2; x < N - 2; ++x)
            interior(y, x) = 1;

    for (int scene = 0; scene < 20; ++scene) {
        const double ax = 2e-4 * (1 + u01(rng)) * random_sign(), ay = 2e-4 * (1 + u01(rng)) * random_sign();
        const double cx = 6.5 + 2 * u01(rng), cy = 6.5 + 2 * u01(rng);
        DepthMap d(N, N);
        for (int y = 0; y < N; ++y)
            for (int x = 0; x < N; ++x)
                d(y, x) = 1.0 + ax * (x - cx) * (x - cx) + ay * (y - cy) * (y - cy);
        const double fx = 0.05 * (0.5 + u01(rng)), fy = 0.05 * (0.5 + u01(rng)), ph = 2 * std::numbers::pi * u01(rng);
        const Vec3 base(0.35 + 0.3 * u01(rng), 0.35 + 0.3 * u01(rng), 0.35 + 0.3 * u01(rng));
        Image a(N, N);
        for (int y = 0; y < N; ++y)
            for (int x = 0; x < N; ++x)
                a(y, x) = base + 0.15 * Vec3(std::sin(fx * x + ph), std::cos(fy * y + ph), std::sin(fx * x - fy * y));
        const SceneParams p{raw_from_depth(d), raw_from_albedo(a)};

        std::vector<ProjectedSample> samples(3);
        std::vector<Viewpoint> views(3);
        std::vector<LightingParams> lights(3);
        for (int i = 0; i < 3; ++i) {
            for (std::size_t k = 0; k < 6; ++k)
                views[i][k] = (k < 3 ? 5.0 * kDeg : 0.01) * u(rng);
            const Lighting l{0.5 * u(rng), 0.5 * u(rng), 0.5 + 0.2 * u(rng), 0.4 + 0.2 * u(rng)};
            lights[i] = LightingParams::from_lighting(l);
            // Target: the scene's own render plus an offset whose sign is fixed per
            // channel on each 4x4 block, so pixel and pyramid residuals stay nonzero.
            samples[i].image = render(d, a, views[i], l, K).image;
            samples[i].mask = interior;
            Grid<Vec3> sign(N / 4, N / 4);
            for (auto& v : sign)
                v = Vec3(random_sign(), random_sign(), random_sign());
            for (int y = 0; y < N; ++y)
                for (int x = 0; x < N; ++x)
                    for (int c = 0; c < 3; ++c)
                        samples[i].image(y, x)[c] += sign(y / 4, x / 4)[c] * 0.3 * (1 + u01(rng));
        }
        const StageConfig cfg;
        const ObjectiveValue obj = refinement_objective(p, views, lights, samples, K, cfg, {});
        auto f = [&](const SceneParams& q, const std::vector<Viewpoint>& v, const std::vector<LightingParams>& l) {
            return refinement_objective(q, v, l, samples, K, cfg, {}).value;
        };

        double depth_floor = 0.0, albedo_floor = 0.0;
        for (std::size_t i = 0; i < obj.depth_raw.size(); ++i) {
            depth_floor = std::max(depth_floor, std::abs(obj.depth_raw[i]));
            albedo_floor = std::max(albedo_floor, obj.albedo_raw[i].cwiseAbs().maxCoeff());
        }
        depth_floor *= 1e-6;
        albedo_floor *= 1e-6;

        for (int y = 1; y < N - 1; ++y)
            for (int x = 1; x < N - 1; ++x) {
                double lo = 1e9, hi = -1e9;
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        lo = std::min(lo, d(y + dy, x + dx));
                        hi = std::max(hi, d(y + dy, x + dx));
                    }
                if (hi - lo >= 0.01)
                    continue;
                const std::size_t i = d.index(y, x);
                SceneParams qp = p, qm = p;
                qp.depth_raw[i] += eps;
                qm.depth_raw[i] -= eps;
                depth.add(agrees(obj.depth_raw[i], (f(qp, views, lights) - f(qm, views, lights)) / (2 * eps), depth_floor));
                for (int c = 0; c < 3; ++c) {
                    SceneParams ap = p, am = p;
                    ap.albedo_raw[i][c] += eps;
                    am.albedo_raw[i][c] -= eps;
                    albedo.add(agrees(obj.albedo_raw[i][c], (f(ap, views, lights) - f(am, views, lights)) / (2 * eps),
                                      albedo_floor));
                }
            }
        for (std::size_t i = 0; i < 3; ++i) {
            for (std::size_t k = 0; k < 6; ++k) {
                auto vp = views, vm = views;
                vp[i][k] += eps;
                vm[i][k] -= eps;
                view.add(agrees(obj.views[i][k], (f(p, vp, lights) - f(p, vm, lights)) / (2 * eps), 1e-12));
            }
            for (std::size_t k = 0; k < 4; ++k) {
                auto lp = lights, lm = lights;
                lp[i][k] += eps;
                lm[i][k] -= eps;
                light.add(agrees(obj.lights[i][k], (f(p, views, lp) - f(p, views, lm)) / (2 * eps), 1e-12));
            }
        }
    }
    const double t = seconds_since(t0);
    const double worst = std::min({depth.fraction(), albedo.fraction(), view.fraction(), light.fraction()});
    return {worst >= 0.95 && t < 60.0,
            fmt("depth %.3f (%zu), albedo %.3f (%zu), view %.3f (%zu), lighting %.3f (%zu) agree; %.1f s",
                depth.fraction(), depth.total, albedo.fraction(), albedo.total, view.fraction(), view.total,
                light.fraction(), light.total, t)};
}

// ---------------------------------------------------------------------------
// 2. Renderer identity and exhaustive z-buffer

Outcome renderer_identity()
{
    std::mt19937_64 rng(kSeed);
    double worst = 0.0;
    std::size_t uncovered = 0;
    for (const auto& [W, H] : std::vector<std::pair<int, int>>{{16, 16}, {24, 20}, {64, 64}, {7, 33}}) {
        const auto K = intrinsics_from_fov(W, H, 10.0 * kDeg);
        const DepthMap d = test::random_smooth_depth(W, H, rng);
        const Image a = test::random_smooth_albedo(W, H, rng);
        double lo = 1e9, hi = -1e9;
        for (const auto& v : a) {
            lo = std::min(lo, v.minCoeff());
            hi = std::max(hi, v.maxCoeff());
        }
        const RenderOutput out = render(d, a, Viewpoint{}, Lighting{0, 0, 1, 0}, K);
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (out.coverage[i] == 0.0) {
                ++uncovered;
                continue;
            }
            worst = std::max(worst, (out.image[i] - a[i]).cwiseAbs().maxCoeff() / (hi - lo));
        }
    }

    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::size_t meshes = 0, pixels = 0, ambiguous = 0, mismatches = 0;
    for (int H = 2; H <= 8; ++H)
        for (int W = 2; W <= 8; ++W)
            for (int trial = 0; trial < 4; ++trial) {
                const auto Kmesh = intrinsics_from_fov(W, H, 60.0 * kDeg);
                DepthMap d(W, H);
                for (auto& v : d)
                    v = 1.0 + 0.3 * u(rng);
                const TriangleMesh mesh = depth_to_mesh(d, Kmesh);
                const auto K = intrinsics_from_fov(12, 12, 60.0 * kDeg);
                const Viewpoint v{0.4 * u(rng), 0.6 * u(rng), 0.3 * u(rng), 0.1 * u(rng), 0.1 * u(rng), 0.1 * u(rng)};
                const Pose pose = viewpoint_to_pose(v);
                const RenderOutput out = rasterize(mesh, Image(W, H, Vec3::Zero()), K, pose, Vec3::Zero());
                const auto brute = test::brute_force_zbuffer(mesh, K, pose);
                ++meshes;
                for (std::size_t i = 0; i < brute.size(); ++i) {
                    const auto& b = brute[i];
                    if (b.edge_margin < 1e-7) {
                        ++ambiguous;
                        continue;
                    }
                    ++pixels;
                    bool good = (out.coverage[i] > 0) == (b.triangle >= 0);
                    if (good && b.triangle >= 0) {
                        good = std::abs(out.depth[i] - b.z) <= 1e-9 * b.z;
                        if (b.runner_up - b.z > 1e-9)
                            good = good && out.fragments[i].triangle == b.triangle;
                    }
                    mismatches += !good;
                }
            }
    return {worst <= 1e-4 && uncovered == 0 && mismatches == 0,
            fmt("identity max error %.2e of range, %zu uncovered; z-buffer %zu meshes, %zu pixels, %zu mismatches "
                "(%zu edge-ambiguous skipped)",
                worst, uncovered, meshes, pixels, mismatches, ambiguous)};
}

// ---------------------------------------------------------------------------
// 3. Render -> inverse render round trip

Outcome round_trip()
{
    const auto t0 = std::chrono::steady_clock::now();
    const SyntheticScene s = make_scene("hemisphere", 64, 64);
    const auto K = intrinsics_from_fov(64, 64, 10.0 * kDeg);
    const Lighting light{0.3, 0.2, 0.5, 0.5};
    const RenderOptions opts;
    const Image source = render(s.depth, s.albedo, Viewpoint{}, light, K, opts).image;
    double worst = 1e9;
    std::string per;
    for (double deg : {-10.0, -5.0, 5.0, 10.0}) {
        Viewpoint v;
        v.ry = deg * kDeg;
        const RenderOutput target = render(s.depth, s.albedo, v, light, K, opts);
        const Pose pose = viewpoint_to_pose(v, opts.bounds, opts.pivot);
        // Inverse render: pull each source pixel back out of the novel view through the
        // known geometry, keeping pixels seen unoccluded in both views.
        Image back(64, 64, Vec3::Zero());
        Mask both(64, 64, 0);
        for (int y = 0; y < 64; ++y)
            for (int x = 0; x < 64; ++x) {
                const WarpResult w = warp_forward(x, y, s.depth(y, x), K, pose);
                const int x0 = static_cast<int>(std::floor(w.x)), y0 = static_cast<int>(std::floor(w.y));
                if (x0 < 0 || y0 < 0 || x0 + 1 >= 64 || y0 + 1 >= 64)
                    continue;
                bool visible = true;
                for (int dy = 0; dy <= 1; ++dy)
                    for (int dx = 0; dx <= 1; ++dx)
                        visible = visible && target.coverage(y0 + dy, x0 + dx) > 0 &&
                                  std::abs(target.depth(y0 + dy, x0 + dx) - w.depth) < 2e-3;
                if (!visible)
                    continue;
                both(y, x) = 1;
                back(y, x) = sample_bilinear(target.image, w.x, w.y);
            }
        const double p = psnr(source, back, &both);
        worst = std::min(worst, p);
        per += fmt(" %+g:%.1f", deg, p);
    }
    const double t = seconds_since(t0);
    return {worst > 30.0 && t < 30.0, fmt("PSNR dB by yaw%s; %.1f s", per.c_str(), t)};
}

// ---------------------------------------------------------------------------
// 4. Metric correctness

Outcome metric_correctness()
{
    std::mt19937_64 rng(kSeed);
    const DepthMap d = test::random_smooth_depth(32, 32, rng);
    bool scale_ok = true;
    for (double c : {0.5, 1.0, 2.0}) {
        DepthMap s = d;
        for (auto& v : s)
            v *= c;
        scale_ok = scale_ok && side(d, s) == 0.0;
    }
    const double ortho = mad(NormalMap(4, 4, Vec3(0, 0, 1)), NormalMap(4, 4, Vec3(1, 0, 0)));
    DepthMap pred(2, 1, 1.0), gt(2, 1, 1.0);
    gt[1] = std::exp(1.0);
    const double two = side(pred, gt);
    return {scale_ok && std::abs(ortho - 90.0) <= 1e-9 && std::abs(two - 0.5) <= 1e-12,
            fmt("scale invariance %s, orthogonal MAD %.12f, two-pixel SIDE %.15f", scale_ok ? "exact" : "broken", ortho,
                two)};
}

// ---------------------------------------------------------------------------
// 5-8. End-to-end runs on the oracle scenes

struct RunSpec
{
    std::string scene = "hemisphere";
    PriorKind prior = PriorKind::Ellipsoid;
    bool drop_symmetry = false;
};

PipelineConfig pipeline_config(const RunSpec& r)
{
    PipelineConfig c;
    c.stages = 4;
    StageConfig s;
    s.samples = 32;
    c.stage_configs = {s};
    if (r.drop_symmetry) {
        StageConfig later = s;
        later.symmetry = false;
        c.stage_configs.push_back(later);
    }
    c.prior.kind = r.prior;
    c.prior.align_to_mask = false;
    c.seed = kSeed;
    return c;
}

struct RunResult
{
    double prior_side = 0.0;
    std::vector<double> sides;
    std::vector<double> asymmetry;
    double seconds = 0.0;
};

RunResult run_scene(const RunSpec& r)
{
    const auto t0 = std::chrono::steady_clock::now();
    const int N = 64;
    const SyntheticScene scene = make_scene(r.scene, N, N);
    const PipelineConfig cfg = pipeline_config(r);
    const auto K = intrinsics_from_fov(N, N, cfg.fov);
    OracleScene os;
    os.depth = scene.depth;
    os.albedo = scene.albedo;
    os.base_lighting = scene.lighting;
    os.K = K;
    const OracleProjector proj(os, cfg.render, SeedPolicy{cfg.seed});
    const Image image = render(scene.depth, scene.albedo, Viewpoint{}, scene.lighting, K, cfg.render).image;

    RunResult out;
    out.prior_side = side(build_prior(cfg.prior, N, N, &scene.mask), scene.depth, &scene.mask);
    run_pipeline(image, &scene.mask, cfg, proj, [&](const StageSnapshot& s) {
        out.sides.push_back(side(s.depth, scene.depth, &scene.mask));
        double asym = 0.0;
        for (int y = 0; y < N; ++y)
            for (int x = 0; x < N; ++x)
                asym = std::max(asym, std::abs(s.depth(y, x) - s.depth(y, N - 1 - x)));
        out.asymmetry.push_back(asym);
    });
    out.seconds = seconds_since(t0);
    return out;
}

std::string list(const std::vector<double>& v)
{
    std::string s;
    for (double x : v)
        s += fmt("%s%.3e", s.empty() ? "" : " ", x);
    return s;
}

std::map<std::string, RunResult> g_runs;

const RunResult& cached_run(const std::string& key, const RunSpec& spec)
{
    auto it = g_runs.find(key);
    if (it == g_runs.end())
        it = g_runs.emplace(key, run_scene(spec)).first;
    return it->second;
}

Outcome end_to_end()
{
    const RunResult& r = cached_run("hemisphere", {});
    bool monotone = true;
    for (std::size_t k = 1; k < r.sides.size(); ++k)
        monotone = monotone && r.sides[k] <= r.sides[k - 1];
    const bool improved = !r.sides.empty() && r.sides.back() < 0.5 * r.prior_side;
    return {r.sides.size() == 4 && monotone && improved && r.seconds < 600.0,
            fmt("prior SIDE %.3e, per stage %s; %.0f s", r.prior_side, list(r.sides).c_str(), r.seconds)};
}

Outcome prior_ablation()
{
    const RunResult& centred = cached_run("hemisphere", {});
    const RunResult& flat = cached_run("hemisphere-flat", {"hemisphere", PriorKind::Flat});
    const RunResult& shifted = cached_run("hemisphere-shifted", {"hemisphere", PriorKind::Shifted});
    const double c = centred.sides.back(), f = flat.sides.back(), s = shifted.sides.back();
    const double total = centred.seconds + flat.seconds + shifted.seconds;
    return {f > c && std::abs(s - c) <= 0.25 * c && total < 1800.0,
            fmt("final SIDE flat %.3e, centred %.3e, shifted %.3e (%.0f%% of centred); %.0f s", f, c, s, 100.0 * s / c,
                total)};
}

Outcome symmetry_contract()
{
    const RunResult& always = cached_run("bump2", {"bump2"});
    const RunResult& dropped = cached_run("bump2-drop", {"bump2", PriorKind::Ellipsoid, true});
    const double worst = *std::max_element(always.asymmetry.begin(), always.asymmetry.end());
    const bool exact = worst == 0.0 && dropped.asymmetry.front() == 0.0;
    const bool better = dropped.sides.back() <= always.sides.back();
    return {exact && better,
            fmt("max mirror difference %.1e over %zu stages; final SIDE symmetric %.3e, dropped after stage 1 %.3e",
                worst, always.asymmetry.size(), always.sides.back(), dropped.sides.back())};
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Outcome determinism()
{
    const auto dir = fs::temp_directory_path() / "photogeo_acceptance_determinism";
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::ofstream(dir / "run.json") << R"({"size": [64, 64], "stages": 4, "seed": 7,
        "stage": {"samples": 32},
        "prior": {"kind": "ellipsoid", "align_to_mask": false},
        "projector": {"type": "oracle", "scene": "hemisphere"}})";
    std::vector<std::string> digests;
    int failures = 0;
    for (const char* out : {"a", "b"}) {
        std::vector<std::string> args{"photogeo", "run", "--config", (dir / "run.json").string(), "--out",
                                      (dir / out).string()};
        std::vector<char*> argv;
        for (auto& a : args)
            argv.push_back(a.data());
        failures += run_cli(static_cast<int>(argv.size()), argv.data()) != 0;
        digests.push_back(slurp(dir / out / "stage_4" / "depth.pfm"));
    }
    const bool same = failures == 0 && !digests[0].empty() && digests[0] == digests[1];
    const std::size_t bytes = digests[0].size();
    fs::remove_all(dir);
    return {same, fmt("stage_4/depth.pfm %s across two runs (%zu bytes)", same ? "identical" : "differs", bytes)};
}

} // namespace

int main(int argc, char** argv)
{
    set_thread_count(static_cast<int>(std::max(1u, std::thread::hardware_concurrency())));
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"gradient suite", gradient_suite},
        {"renderer identity and z-buffer", renderer_identity},
        {"render/inverse-render round trip", round_trip},
        {"metric correctness", metric_correctness},
        {"end-to-end recovery", end_to_end},
        {"prior ablation ordering", prior_ablation},
        {"symmetry contract", symmetry_contract},
        {"determinism", determinism},
    };
    std::set<int> selected;
    for (int i = 1; i < argc; ++i)
        selected.insert(std::atoi(argv[i]));

    int failed = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        const int id = static_cast<int>(k) + 1;
        if (!selected.empty() && !selected.count(id))
            continue;
        Outcome o;
        try {
            o = criteria[k].second();
        }
        catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::printf("%s %d %s: %s\n", o.pass ? "PASS" : "FAIL", id, criteria[k].first, o.detail.c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
