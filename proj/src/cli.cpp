#include "photogeo/cli.hpp"

#include "photogeo/config.hpp"
#include "photogeo/error.hpp"
#include "photogeo/image_io.hpp"
#include "photogeo/metrics.hpp"
#include "photogeo/parallel.hpp"
#include "photogeo/reconstruction.hpp"
#include "photogeo/scenes.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <thread>

namespace photogeo {

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

constexpr double kDeg = std::numbers::pi / 180.0;

enum Exit { kOk = 0, kUsage = 1, kInput = 2, kDiverged = 3 };

int resolve_threads(int flag, int from_config)
{
    if (flag > 0)
        return flag;
    if (const char* env = std::getenv("PHOTOGEO_THREADS")) {
        char* end = nullptr;
        const long n = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && n > 0)
            return static_cast<int>(n);
        throw Error(ErrorCode::Config, "PHOTOGEO_THREADS must be a positive integer, got '" + std::string(env) + "'");
    }
    if (from_config > 0)
        return from_config;
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

std::string frame_name(std::size_t k)
{
    char name[32];
    std::snprintf(name, sizeof(name), "frame_%03zu.png", k);
    return name;
}

void ensure_dir(const fs::path& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw Error(ErrorCode::IoFailure, "cannot create " + dir.string() + ": " + ec.message());
}

std::size_t count_inside(const Mask* mask, std::size_t total)
{
    if (!mask)
        return total;
    std::size_t n = 0;
    for (auto m : *mask)
        n += m != 0;
    return n;
}

// Per-stage state needed to re-render a snapshot.
struct SavedState
{
    DepthMap depth;
    Image albedo;
    Lighting lighting = Lighting::canonical();
    double fov = 10.0 * kDeg;
    Vec3 background = Vec3::Constant(0.5);
};

std::string state_json(const Lighting& l, double fov, const Vec3& background, int stage)
{
    ordered_json j;
    j["stage"] = stage;
    j["lighting"] = {{"lx", l.lx}, {"ly", l.ly}, {"ks", l.ks}, {"kd", l.kd}};
    j["fov"] = fov / kDeg;
    j["background"] = {background.x(), background.y(), background.z()};
    return j.dump(2) + "\n";
}

SavedState load_state(const fs::path& dir)
{
    for (const char* name : {"depth.pfm", "albedo.png"})
        if (!fs::exists(dir / name))
            throw Error(ErrorCode::MissingFile, "state file not found: " + (dir / name).string());
    SavedState s;
    s.depth = read_pfm_scalar(dir / "depth.pfm");
    s.albedo = read_png(dir / "albedo.png");
    if (!s.depth.same_shape(s.albedo))
        throw Error(ErrorCode::ShapeMismatch, "depth.pfm and albedo.png differ in size");
    const fs::path meta = dir / "state.json";
    if (fs::exists(meta)) {
        std::ifstream in(meta);
        try {
            const auto j = nlohmann::json::parse(in);
            const auto& l = j.at("lighting");
            s.lighting = {l.at("lx").get<double>(), l.at("ly").get<double>(), l.at("ks").get<double>(),
                          l.at("kd").get<double>()};
            s.fov = j.at("fov").get<double>() * kDeg;
            const auto& b = j.at("background");
            s.background = Vec3(b.at(0).get<double>(), b.at(1).get<double>(), b.at(2).get<double>());
        }
        catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::DecodeFailure, meta.string() + ": " + e.what());
        }
    }
    return s;
}

void write_frames(const fs::path& out, const std::vector<Image>& frames)
{
    ensure_dir(out);
    for (std::size_t k = 0; k < frames.size(); ++k)
        write_png(out / frame_name(k), frames[k]);
    std::cout << "wrote " << frames.size() << " frame(s) to " << out.string() << "\n";
}

int cmd_synth(const std::string& name, int width, int height, const fs::path& out)
{
    const SyntheticScene scene = make_scene(name, width, height);
    const auto K = intrinsics_from_fov(width, height, 10.0 * kDeg);
    ensure_dir(out);
    write_pfm(out / "depth_gt.pfm", scene.depth);
    write_png(out / "albedo_gt.png", scene.albedo);
    write_png(out / "image.png", render(scene.depth, scene.albedo, Viewpoint{}, scene.lighting, K).image);
    write_png(out / "mask.png", scene.mask);
    std::cout << "wrote " << name << " " << width << "x" << height << " to " << out.string() << "\n";
    return kOk;
}

int cmd_run(const fs::path& config_path, std::optional<std::uint64_t> seed, const std::string& out, int threads)
{
    RunConfig cfg = load_run_config(config_path);
    if (seed)
        cfg.pipeline.seed = *seed;
    if (!out.empty())
        cfg.output = out;
    set_thread_count(resolve_threads(threads, cfg.threads));

    RunInputs in = prepare_inputs(cfg);
    ensure_dir(cfg.output);
    const Mask* mask = in.mask ? &*in.mask : nullptr;
    const auto& pc = cfg.pipeline;
    const auto K = intrinsics_from_fov(in.image.width(), in.image.height(), pc.fov);
    std::optional<NormalMap> gt_normals;
    if (in.ground_truth)
        gt_normals = compute_normals(*in.ground_truth, K);

    auto observer = [&](const StageSnapshot& snap) {
        const fs::path dir = cfg.output / ("stage_" + std::to_string(snap.stage + 1));
        ensure_dir(dir);
        write_pfm(dir / "depth.pfm", snap.depth);
        write_pfm(dir / "normals.pfm", snap.normals);
        write_png(dir / "albedo.png", snap.albedo);
        write_file_atomic(dir / "state.json", state_json(snap.lighting, pc.fov, pc.render.background, snap.stage + 1));

        // Re-render from the stored files so later manipulation of this snapshot
        // reproduces recon.png exactly.
        const SavedState saved = load_state(dir);
        const Image recon = render(saved.depth, saved.albedo, Viewpoint{}, snap.lighting, K, pc.render).image;
        write_png(dir / "recon.png", recon);

        if (in.ground_truth) {
            EvalReport r;
            r.side = 100.0 * side(snap.depth, *in.ground_truth, mask);
            r.mad = mad(snap.normals, *gt_normals, mask);
            r.psnr = psnr(recon, in.image, mask);
            r.pixels = count_inside(mask, snap.depth.size());
            write_file_atomic(dir / "metrics.json", r.to_json() + "\n");
            std::cout << "stage " << snap.stage + 1 << ": side " << r.side << " (x1e-2), mad " << r.mad << " deg\n";
        }
        else {
            std::cout << "stage " << snap.stage + 1 << " done\n";
        }
        std::cout.flush();
    };
    run_pipeline(in.image, mask, pc, *in.projector, observer);
    return kOk;
}

int cmd_eval(const fs::path& pred_path, const fs::path& gt_path, const fs::path& mask_path, double fov_deg)
{
    for (const auto& p : {pred_path, gt_path})
        if (!fs::exists(p))
            throw Error(ErrorCode::MissingFile, "depth file not found: " + p.string());
    const DepthMap pred = read_pfm_scalar(pred_path);
    const DepthMap gt = read_pfm_scalar(gt_path);
    if (!pred.same_shape(gt))
        throw Error(ErrorCode::ShapeMismatch, "predicted and ground-truth depth differ in size");
    std::optional<Mask> mask;
    if (!mask_path.empty()) {
        if (!fs::exists(mask_path))
            throw Error(ErrorCode::MissingFile, "mask not found: " + mask_path.string());
        mask = read_png_mask(mask_path);
        if (!mask->same_shape(gt))
            throw Error(ErrorCode::ShapeMismatch, "mask size differs from the depth maps");
    }
    const Mask* m = mask ? &*mask : nullptr;
    const auto K = intrinsics_from_fov(gt.width(), gt.height(), fov_deg * kDeg);
    EvalReport r;
    r.side = 100.0 * side(pred, gt, m);
    r.mad = mad(compute_normals(pred, K), compute_normals(gt, K), m);
    r.pixels = count_inside(m, gt.size());
    std::cout << r.to_json() << "\n";
    return kOk;
}

struct RenderArgs
{
    double pitch = 0.0, yaw = 0.0, roll = 0.0;
    double tx = 0.0, ty = 0.0, tz = 0.0;
    std::optional<double> lx, ly, ks, kd;
};

int cmd_render(const fs::path& state_dir, const fs::path& out, const RenderArgs& a)
{
    const SavedState s = load_state(state_dir);
    Lighting light = s.lighting;
    if (a.lx)
        light.lx = *a.lx;
    if (a.ly)
        light.ly = *a.ly;
    if (a.ks)
        light.ks = *a.ks;
    if (a.kd)
        light.kd = *a.kd;
    const Viewpoint v{a.pitch * kDeg, a.yaw * kDeg, a.roll * kDeg, a.tx, a.ty, a.tz};
    RenderOptions opts;
    opts.background = s.background;
    const auto K = intrinsics_from_fov(s.depth.width(), s.depth.height(), s.fov);
    write_frames(out, {render(s.depth, s.albedo, v, light, K, opts).image});
    return kOk;
}

int cmd_manipulate(const fs::path& state_dir, const fs::path& out, Manipulation m)
{
    const SavedState s = load_state(state_dir);
    RenderOptions opts;
    opts.background = s.background;
    const auto K = intrinsics_from_fov(s.depth.width(), s.depth.height(), s.fov);
    write_frames(out, manipulate(s.depth, s.albedo, s.lighting, m, K, opts));
    return kOk;
}

} // namespace

int run_cli(int argc, char** argv)
{
    CLI::App app{"Single-image shape recovery by iterative inverse rendering"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "photogeo 1.0");

    std::string name, out;
    int width = 0, height = 0, threads = 0, frames = 0;
    fs::path config, pred, gt, mask, state;
    std::optional<std::uint64_t> seed;
    double fov = 10.0, from = 0.0, to = 0.0, ly = 0.0, ks = 0.4, kd = 0.6;
    RenderArgs ra;

    auto* synth = app.add_subcommand("synth", "Write a built-in ground-truth scene");
    synth->add_option("name", name, "Scene name (hemisphere, bump2, ridge)")->required();
    synth->add_option("width", width, "Width in pixels")->required();
    synth->add_option("height", height, "Height in pixels")->required();
    synth->add_option("--out", out, "Output directory")->required();

    auto* run = app.add_subcommand("run", "Run the refinement pipeline");
    run->add_option("--config", config, "JSON run configuration")->required();
    run->add_option("--seed", seed, "Override the configured seed");
    run->add_option("--out", out, "Override the output directory");
    run->add_option("--threads", threads, "Worker threads (falls back to PHOTOGEO_THREADS)");

    auto* eval = app.add_subcommand("eval", "Compare a depth map with ground truth");
    eval->add_option("pred", pred, "Predicted depth (PFM)")->required();
    eval->add_option("gt", gt, "Ground-truth depth (PFM)")->required();
    eval->add_option("--mask", mask, "Evaluation mask (PNG)");
    eval->add_option("--fov", fov, "Field of view in degrees");

    auto* rend = app.add_subcommand("render", "Render a saved stage under a new view or lighting");
    rend->add_option("state", state, "Stage directory holding depth.pfm and albedo.png")->required();
    rend->add_option("--out", out, "Output directory")->required();
    rend->add_option("--pitch", ra.pitch, "Degrees");
    rend->add_option("--yaw", ra.yaw, "Degrees");
    rend->add_option("--roll", ra.roll, "Degrees");
    rend->add_option("--tx", ra.tx);
    rend->add_option("--ty", ra.ty);
    rend->add_option("--tz", ra.tz);
    rend->add_option("--lx", ra.lx);
    rend->add_option("--ly", ra.ly);
    rend->add_option("--ks", ra.ks);
    rend->add_option("--kd", ra.kd);

    auto* rotate = app.add_subcommand("rotate", "Render a yaw sweep of a saved stage");
    rotate->add_option("state", state, "Stage directory")->required();
    rotate->add_option("--out", out, "Output directory")->required();
    auto* rot_from = rotate->add_option("--from", from, "First yaw in degrees (default -20)");
    auto* rot_to = rotate->add_option("--to", to, "Last yaw in degrees (default 20)");
    auto* rot_frames = rotate->add_option("--frames", frames, "Frame count (default 20)");

    auto* relight = app.add_subcommand("relight", "Render a light sweep of a saved stage");
    relight->add_option("state", state, "Stage directory")->required();
    relight->add_option("--out", out, "Output directory")->required();
    auto* rel_from = relight->add_option("--from", from, "First lx (default -0.9)");
    auto* rel_to = relight->add_option("--to", to, "Last lx (default 0.9)");
    auto* rel_frames = relight->add_option("--frames", frames, "Frame count (default 10)");
    relight->add_option("--ly", ly, "Vertical light component");
    relight->add_option("--ks", ks, "Ambient weight");
    relight->add_option("--kd", kd, "Diffuse weight");

    try {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*synth)
            return cmd_synth(name, width, height, out);
        if (*run)
            return cmd_run(config, seed, out, threads);
        if (*eval)
            return cmd_eval(pred, gt, mask, fov);
        if (*rend)
            return cmd_render(state, out, ra);
        if (*rotate) {
            Manipulation m;
            m.mode = ManipulationMode::Rotate;
            m.trajectory = yaw_sweep((rot_from->count() ? from : -20.0) * kDeg, (rot_to->count() ? to : 20.0) * kDeg,
                                     rot_frames->count() ? frames : 20);
            return cmd_manipulate(state, out, m);
        }
        if (*relight) {
            Manipulation m;
            m.mode = ManipulationMode::Relight;
            m.ks = ks;
            m.kd = kd;
            for (double lx : yaw_sweep(rel_from->count() ? from : -0.9, rel_to->count() ? to : 0.9,
                                       rel_frames->count() ? frames : 10)) {
                m.trajectory.push_back(lx);
                m.trajectory.push_back(ly);
            }
            return cmd_manipulate(state, out, m);
        }
    }
    catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.code() == ErrorCode::Divergence ? kDiverged : kInput;
    }
    catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInput;
    }
    return kUsage;
}

} // namespace photogeo
