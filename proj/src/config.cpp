#include "photogeo/config.hpp"

#include "photogeo/error.hpp"
#include "photogeo/image_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace photogeo {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr double kDeg = std::numbers::pi / 180.0;

[[noreturn]] void fail(const std::string& key, const std::string& what)
{
    throw Error(ErrorCode::Config, "config key '" + key + "': " + what);
}

// Reads one JSON object, remembering which keys were consumed so the rest can be
// rejected as unknown.
class Section
{
public:
    Section(const json& j, std::string prefix) : j_(j), prefix_(std::move(prefix))
    {
        if (!j_.is_object())
            fail(prefix_.empty() ? "<root>" : prefix_, "expected an object");
    }

    std::string key(const std::string& name) const { return prefix_.empty() ? name : prefix_ + "." + name; }

    const json* find(const std::string& name)
    {
        seen_.insert(name);
        auto it = j_.find(name);
        return it == j_.end() ? nullptr : &*it;
    }

    template <typename T>
    void read(const std::string& name, T& out)
    {
        const json* v = find(name);
        if (!v)
            return;
        out = as<T>(*v, key(name));
    }

    void read_path(const std::string& name, fs::path& out, const fs::path& base)
    {
        const json* v = find(name);
        if (!v)
            return;
        fs::path p = as<std::string>(*v, key(name));
        out = p.is_relative() && !base.empty() ? base / p : p;
    }

    void finish() const
    {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key()))
                fail(key(it.key()), "unknown key");
    }

    template <typename T>
    static T as(const json& v, const std::string& key)
    {
        if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean())
                fail(key, "expected a boolean");
        }
        else if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer())
                fail(key, "expected an integer");
            if constexpr (std::is_unsigned_v<T>)
                if (v.get<long long>() < 0)
                    fail(key, "expected a non-negative integer");
        }
        else if constexpr (std::is_floating_point_v<T>) {
            if (!v.is_number())
                fail(key, "expected a number");
        }
        else if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string())
                fail(key, "expected a string");
        }
        return v.get<T>();
    }

private:
    const json& j_;
    std::string prefix_;
    std::set<std::string> seen_;
};

template <int N>
Eigen::Matrix<double, N, 1> read_vector(const json& v, const std::string& key)
{
    if (!v.is_array() || v.size() != N)
        fail(key, "expected an array of " + std::to_string(N) + " numbers");
    Eigen::Matrix<double, N, 1> out;
    for (int k = 0; k < N; ++k)
        out[k] = Section::as<double>(v[k], key + "[" + std::to_string(k) + "]");
    return out;
}

void read_stage(Section& s, StageConfig& c)
{
    s.read("samples", c.samples);
    s.read("iters1", c.iters1);
    s.read("iters2", c.iters2);
    s.read("iters3", c.iters3);
    s.read("learning_rate", c.learning_rate);
    s.read("albedo_learning_rate", c.albedo_learning_rate);
    s.read("view_learning_rate", c.view_learning_rate);
    s.read("light_learning_rate", c.light_learning_rate);
    s.read("final_lr_fraction", c.final_lr_fraction);
    s.read("warmup_iters", c.warmup_iters);
    s.read("lambda1", c.lambda1);
    s.read("lambda2", c.lambda2);
    s.read("pyramid_weight", c.pyramid_weight);
    s.read("symmetry", c.symmetry);
    s.finish();
}

void read_prior(Section& s, PriorSpec& p)
{
    if (const json* v = s.find("kind")) {
        try {
            p.kind = prior_kind_from_string(Section::as<std::string>(*v, s.key("kind")));
        }
        catch (const Error& e) {
            if (e.code() == ErrorCode::Config)
                throw;
            fail(s.key("kind"), e.what());
        }
    }
    if (const json* v = s.find("center"))
        p.center = read_vector<2>(*v, s.key("center"));
    if (const json* v = s.find("radii"))
        p.radii = read_vector<2>(*v, s.key("radii"));
    s.read("near", p.near);
    s.read("far", p.far);
    s.read("shift_fraction", p.shift_fraction);
    s.read("align_to_mask", p.align_to_mask);
    s.finish();
}

// Rotations are given in degrees, translations in scene units.
Vec6 view_units(Vec6 v)
{
    v.head<3>() *= kDeg;
    return v;
}

ViewpointDistribution read_viewpoints(const json& v, const std::string& key)
{
    if (v.is_string()) {
        if (v.get<std::string>() != "default")
            fail(key, "unknown viewpoint preset '" + v.get<std::string>() + "'");
        return ViewpointDistribution::default_preset();
    }
    Section s(v, key);
    ViewpointDistribution d;
    d.covariance.setZero();
    if (const json* m = s.find("mean"))
        d.mean = view_units(read_vector<6>(*m, s.key("mean")));
    const json* sd = s.find("std");
    const json* cov = s.find("covariance");
    if (sd && cov)
        fail(s.key("covariance"), "give either std or covariance, not both");
    if (sd) {
        const Vec6 sigma = view_units(read_vector<6>(*sd, s.key("std")));
        d.covariance = sigma.cwiseProduct(sigma).asDiagonal();
    }
    if (cov) {
        if (!cov->is_array() || cov->size() != 6)
            fail(s.key("covariance"), "expected a 6x6 array");
        const Vec6 scale = view_units(Vec6::Ones());
        for (int r = 0; r < 6; ++r) {
            const Vec6 row = read_vector<6>((*cov)[r], s.key("covariance") + "[" + std::to_string(r) + "]");
            for (int c = 0; c < 6; ++c)
                d.covariance(r, c) = row[c] * scale[r] * scale[c];
        }
    }
    s.finish();
    return d;
}

LightingDistribution read_lightings(const json& v, const std::string& key)
{
    if (v.is_string()) {
        try {
            return LightingDistribution::preset(v.get<std::string>());
        }
        catch (const Error& e) {
            fail(key, e.what());
        }
    }
    Section s(v, key);
    LightingDistribution d;
    auto range = [&](const char* name, double& lo, double& hi) {
        if (const json* r = s.find(name)) {
            const Vec2 x = read_vector<2>(*r, s.key(name));
            if (!(x[0] <= x[1]))
                fail(s.key(name), "range must be [min, max]");
            lo = x[0];
            hi = x[1];
        }
    };
    range("x", d.xmin, d.xmax);
    range("y", d.ymin, d.ymax);
    range("diffuse", d.dmin, d.dmax);
    s.read("alpha", d.alpha);
    s.finish();
    return d;
}

Lighting read_lighting(Section& s)
{
    Lighting l = Lighting::canonical();
    s.read("lx", l.lx);
    s.read("ly", l.ly);
    s.read("ks", l.ks);
    s.read("kd", l.kd);
    s.finish();
    return l;
}

void read_projector(Section& s, RunConfig& c, const fs::path& base)
{
    std::string type = "oracle";
    s.read("type", type);
    if (type == "replay") {
        c.projector = ProjectorKind::Replay;
        s.read_path("dir", c.replay_dir, base);
        if (c.replay_dir.empty())
            fail(s.key("dir"), "required for the replay projector");
        s.finish();
        return;
    }
    if (type != "oracle")
        fail(s.key("type"), "expected \"oracle\" or \"replay\", got \"" + type + "\"");
    c.projector = ProjectorKind::Oracle;
    auto& o = c.oracle;
    if (const json* scene = s.find("scene")) {
        if (scene->is_string()) {
            o.scene = scene->get<std::string>();
            const auto names = scene_names();
            if (std::find(names.begin(), names.end(), o.scene) == names.end())
                fail(s.key("scene"), "unknown scene '" + o.scene + "'");
        }
        else {
            Section f(*scene, s.key("scene"));
            f.read_path("depth", o.depth, base);
            f.read_path("albedo", o.albedo, base);
            if (o.depth.empty() || o.albedo.empty())
                fail(s.key("scene"), "needs both depth and albedo files");
            if (const json* l = f.find("lighting")) {
                Section ls(*l, f.key("lighting"));
                o.lighting = read_lighting(ls);
            }
            f.finish();
        }
    }
    else {
        fail(s.key("scene"), "required for the oracle projector");
    }
    s.read("fit_budget", o.fit_budget);
    s.read("noise", o.noise);
    s.read("view_learning_rate", o.view_learning_rate);
    s.read("light_learning_rate", o.light_learning_rate);
    if (o.fit_budget < 0)
        fail(s.key("fit_budget"), "must be ≥ 0");
    if (o.noise < 0.0)
        fail(s.key("noise"), "must be ≥ 0");
    s.finish();
}

RunConfig parse(const json& j, const fs::path& base)
{
    RunConfig c;
    auto& p = c.pipeline;
    Section root(j, "");
    root.read_path("image", c.image, base);
    root.read_path("mask", c.mask, base);
    root.read_path("ground_truth", c.ground_truth, base);
    root.read_path("output", c.output, base);
    if (!root.find("output") && !base.empty())
        c.output = base / c.output;
    if (const json* v = root.find("size")) {
        const Vec2 wh = read_vector<2>(*v, "size");
        c.width = static_cast<int>(wh[0]);
        c.height = static_cast<int>(wh[1]);
        if (c.width != wh[0] || c.height != wh[1])
            fail("size", "expected integers");
    }
    root.read("stages", p.stages);

    StageConfig base_stage;
    if (const json* v = root.find("stage")) {
        Section s(*v, "stage");
        read_stage(s, base_stage);
    }
    p.stage_configs = {base_stage};
    if (const json* v = root.find("stage_configs")) {
        if (!v->is_array() || v->empty())
            fail("stage_configs", "expected a non-empty array");
        p.stage_configs.clear();
        for (std::size_t k = 0; k < v->size(); ++k) {
            StageConfig sc = base_stage;
            Section s((*v)[k], "stage_configs[" + std::to_string(k) + "]");
            read_stage(s, sc);
            p.stage_configs.push_back(sc);
        }
    }

    if (const json* v = root.find("prior")) {
        Section s(*v, "prior");
        read_prior(s, p.prior);
    }
    if (const json* v = root.find("sampler")) {
        Section s(*v, "sampler");
        if (const json* vp = s.find("viewpoint"))
            p.viewpoints = read_viewpoints(*vp, "sampler.viewpoint");
        if (const json* lp = s.find("lighting"))
            p.lightings = read_lightings(*lp, "sampler.lighting");
        s.finish();
    }
    if (const json* v = root.find("projector")) {
        Section s(*v, "projector");
        read_projector(s, c, base);
    }
    else {
        fail("projector", "required");
    }

    root.read("seed", p.seed);
    double fov_deg = p.fov / kDeg;
    root.read("fov", fov_deg);
    p.fov = fov_deg * kDeg;
    if (const json* v = root.find("background"))
        p.render.background = v->is_array() ? read_vector<3>(*v, "background")
                                            : Vec3::Constant(Section::as<double>(*v, "background"));
    if (const json* v = root.find("optimizer")) {
        try {
            p.optimizer = optimizer_kind_from_string(Section::as<std::string>(*v, "optimizer"));
        }
        catch (const Error& e) {
            if (e.code() == ErrorCode::Config)
                throw;
            fail("optimizer", e.what());
        }
    }
    root.read("stage_lr_decay", p.stage_lr_decay);
    root.read("threads", c.threads);
    root.finish();

    if (c.threads < 0)
        fail("threads", "must be ≥ 0");
    if (c.image.empty() && c.projector == ProjectorKind::Replay)
        fail("image", "required for the replay projector");
    if (c.image.empty() && c.projector == ProjectorKind::Oracle && c.oracle.scene.empty())
        fail("image", "required when the oracle scene comes from files");
    if (c.image.empty() && (c.width < kMinSceneSize || c.height < kMinSceneSize))
        fail("size", "scenes must be at least " + std::to_string(kMinSceneSize) + "x" + std::to_string(kMinSceneSize));
    p.validate();
    return c;
}

void require(const fs::path& path, const char* what)
{
    if (!fs::exists(path))
        throw Error(ErrorCode::MissingFile, std::string(what) + " not found: " + path.string());
}

} // namespace

RunConfig parse_run_config(const std::string& text, const fs::path& base_dir)
{
    json j;
    try {
        j = json::parse(text);
    }
    catch (const json::parse_error& e) {
        throw Error(ErrorCode::Config, std::string("config is not valid JSON: ") + e.what());
    }
    return parse(j, base_dir);
}

RunConfig load_run_config(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::MissingFile, "config not found: " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_run_config(text.str(), path.parent_path());
}

void validate_paths(const RunConfig& c)
{
    if (!c.image.empty())
        require(c.image, "input image");
    if (!c.mask.empty())
        require(c.mask, "mask");
    if (!c.ground_truth.empty())
        require(c.ground_truth, "ground-truth depth");
    if (c.projector == ProjectorKind::Oracle) {
        if (c.oracle.scene.empty()) {
            require(c.oracle.depth, "oracle depth");
            require(c.oracle.albedo, "oracle albedo");
        }
        return;
    }
    require(c.replay_dir, "replay directory");
    const ReplayProjector replay{c.replay_dir, 0, 0};
    for (int s = 0; s < c.pipeline.stages; ++s) {
        const auto m = static_cast<std::size_t>(std::max(c.pipeline.stage(s).samples, 0));
        for (std::size_t i = 0; i < m; ++i)
            require(replay.path_for(i, static_cast<std::size_t>(s)), "projected sample");
    }
}

RunInputs prepare_inputs(const RunConfig& c)
{
    validate_paths(c);
    RunInputs in;
    std::optional<SyntheticScene> scene;
    if (c.projector == ProjectorKind::Oracle && !c.oracle.scene.empty()) {
        int w = c.width, h = c.height;
        if (!c.image.empty()) {
            const Image probe = read_png(c.image);
            w = probe.width();
            h = probe.height();
        }
        scene = make_scene(c.oracle.scene, w, h);
    }

    const auto K = [&](int w, int h) { return intrinsics_from_fov(w, h, c.pipeline.fov); };
    if (!c.image.empty()) {
        in.image = read_png(c.image);
    }
    else {
        const auto Ks = K(scene->depth.width(), scene->depth.height());
        in.image = render(scene->depth, scene->albedo, Viewpoint{}, scene->lighting, Ks, c.pipeline.render).image;
    }
    const int W = in.image.width(), H = in.image.height();

    if (!c.mask.empty())
        in.mask = read_png_mask(c.mask);
    else if (scene && c.image.empty())
        in.mask = scene->mask;
    if (in.mask && !in.mask->same_shape(in.image))
        throw Error(ErrorCode::ShapeMismatch, "mask size differs from the input image");

    if (!c.ground_truth.empty())
        in.ground_truth = read_pfm_scalar(c.ground_truth);
    else if (scene)
        in.ground_truth = scene->depth;

    const SeedPolicy seeds{c.pipeline.seed};
    if (c.projector == ProjectorKind::Replay) {
        in.projector = std::make_unique<ReplayManifoldProjector>(ReplayProjector{c.replay_dir, W, H});
    }
    else {
        OracleScene os;
        if (scene) {
            os.depth = scene->depth;
            os.albedo = scene->albedo;
            os.base_lighting = scene->lighting;
        }
        else {
            os.depth = read_pfm_scalar(c.oracle.depth);
            os.albedo = read_png(c.oracle.albedo);
            os.base_lighting = c.oracle.lighting;
            if (!in.ground_truth)
                in.ground_truth = os.depth;
        }
        if (!os.depth.same_shape(in.image) || !os.albedo.same_shape(in.image))
            throw Error(ErrorCode::ShapeMismatch, "oracle scene size differs from the input image");
        os.K = K(W, H);
        os.fit_budget = c.oracle.fit_budget;
        os.noise_level = c.oracle.noise;
        os.view_learning_rate = c.oracle.view_learning_rate;
        os.light_learning_rate = c.oracle.light_learning_rate;
        in.projector = std::make_unique<OracleProjector>(std::move(os), c.pipeline.render, seeds);
    }
    if (in.ground_truth && !in.ground_truth->same_shape(in.image))
        throw Error(ErrorCode::ShapeMismatch, "ground-truth depth size differs from the input image");
    return in;
}

} // namespace photogeo
