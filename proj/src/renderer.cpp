#include "photogeo/renderer.hpp"

#include "photogeo/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace photogeo {

TriangleMesh depth_to_mesh(const DepthMap& depth, const CameraIntrinsics& K)
{
    const int W = depth.width(), H = depth.height();
    TriangleMesh mesh;
    mesh.vertices.reserve(depth.size());
    mesh.uv.reserve(depth.size());
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            mesh.vertices.push_back(unproject(x, y, depth(y, x), K));
            mesh.uv.emplace_back(x, y);
        }
    if (W >= 2 && H >= 2)
        mesh.triangles.reserve(static_cast<std::size_t>(W - 1) * (H - 1) * 2);
    for (int y = 0; y + 1 < H; ++y)
        for (int x = 0; x + 1 < W; ++x) {
            const int v00 = y * W + x, v01 = v00 + 1, v10 = v00 + W, v11 = v10 + 1;
            mesh.triangles.push_back({v00, v01, v11});
            mesh.triangles.push_back({v00, v11, v10});
        }
    return mesh;
}

namespace {

constexpr double kInsideTolerance = 1e-9;
constexpr double kNearPlane = 1e-6;

double cross2(const Vec2& a, const Vec2& b)
{
    return a.x() * b.y() - a.y() * b.x();
}

struct TexelFootprint
{
    int x0, x1, y0, y1;
    double fx, fy;
    bool clamped_x, clamped_y;
};

TexelFootprint footprint(const Image& texture, double x, double y)
{
    const double max_x = texture.width() - 1, max_y = texture.height() - 1;
    TexelFootprint t{};
    t.clamped_x = x < 0.0 || x > max_x;
    t.clamped_y = y < 0.0 || y > max_y;
    x = std::clamp(x, 0.0, max_x);
    y = std::clamp(y, 0.0, max_y);
    t.x0 = std::min(static_cast<int>(std::floor(x)), texture.width() - 2);
    t.y0 = std::min(static_cast<int>(std::floor(y)), texture.height() - 2);
    t.x1 = t.x0 + 1;
    t.y1 = t.y0 + 1;
    t.fx = x - t.x0;
    t.fy = y - t.y0;
    return t;
}

} // namespace

Vec3 sample_bilinear(const Image& texture, double x, double y)
{
    const auto t = footprint(texture, x, y);
    const Vec3 top = (1.0 - t.fx) * texture(t.y0, t.x0) + t.fx * texture(t.y0, t.x1);
    const Vec3 bottom = (1.0 - t.fx) * texture(t.y1, t.x0) + t.fx * texture(t.y1, t.x1);
    return (1.0 - t.fy) * top + t.fy * bottom;
}

RenderOutput rasterize(const TriangleMesh& mesh, const Image& texture, const CameraIntrinsics& K, const Pose& pose,
                       const Vec3& background)
{
    if (mesh.triangles.empty())
        throw Error(ErrorCode::EmptyMesh, "mesh has no triangles");
    if (texture.width() < 2 || texture.height() < 2)
        throw Error(ErrorCode::ShapeMismatch, "texture must be at least 2x2");

    const int W = K.width, H = K.height;
    std::vector<Vec3> camera(mesh.vertices.size());
    std::vector<Vec2> screen(mesh.vertices.size());
    for (std::size_t k = 0; k < mesh.vertices.size(); ++k) {
        camera[k] = pose.apply(mesh.vertices[k]);
        if (camera[k].z() > kNearPlane)
            screen[k] = K.project(camera[k]);
    }

    RenderOutput out;
    out.image = Image(W, H, background);
    out.depth = DepthMap(W, H, 0.0);
    out.coverage = ScalarMap(W, H, 0.0);
    out.fragments = Grid<Fragment>(W, H);
    std::vector<double> zbuf(static_cast<std::size_t>(W) * H, std::numeric_limits<double>::infinity());

    bool any_visible = false;
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tri = mesh.triangles[t];
        if (camera[tri[0]].z() <= kNearPlane || camera[tri[1]].z() <= kNearPlane || camera[tri[2]].z() <= kNearPlane)
            continue;
        any_visible = true;
        const Vec2 &s0 = screen[tri[0]], &s1 = screen[tri[1]], &s2 = screen[tri[2]];
        const Vec2 e1 = s1 - s0, e2 = s2 - s0;
        const double area = cross2(e1, e2);
        if (std::abs(area) < 1e-14)
            continue;
        const double min_x = std::min({s0.x(), s1.x(), s2.x()}), max_x = std::max({s0.x(), s1.x(), s2.x()});
        const double min_y = std::min({s0.y(), s1.y(), s2.y()}), max_y = std::max({s0.y(), s1.y(), s2.y()});
        const int x_lo = std::max(0, static_cast<int>(std::ceil(min_x - 1e-7)));
        const int x_hi = std::min(W - 1, static_cast<int>(std::floor(max_x + 1e-7)));
        const int y_lo = std::max(0, static_cast<int>(std::ceil(min_y - 1e-7)));
        const int y_hi = std::min(H - 1, static_cast<int>(std::floor(max_y + 1e-7)));
        const double z0 = camera[tri[0]].z(), z1 = camera[tri[1]].z(), z2 = camera[tri[2]].z();
        for (int py = y_lo; py <= y_hi; ++py)
            for (int px = x_lo; px <= x_hi; ++px) {
                const Vec2 r = Vec2(px, py) - s0;
                const double b1 = cross2(r, e2) / area;
                const double b2 = cross2(e1, r) / area;
                const double b0 = 1.0 - b1 - b2;
                if (b0 < -kInsideTolerance || b1 < -kInsideTolerance || b2 < -kInsideTolerance)
                    continue;
                const double z = b0 * z0 + b1 * z1 + b2 * z2;
                const std::size_t idx = out.depth.index(py, px);
                if (!(z < zbuf[idx]))
                    continue;
                zbuf[idx] = z;
                auto& frag = out.fragments[idx];
                frag.triangle = static_cast<int>(t);
                frag.b1 = b1;
                frag.b2 = b2;
            }
    }
    if (!any_visible)
        throw Error(ErrorCode::AllBehindCamera, "no triangle lies in front of the camera");

    for (std::size_t idx = 0; idx < out.fragments.size(); ++idx) {
        auto& frag = out.fragments[idx];
        if (frag.triangle < 0)
            continue;
        const auto& tri = mesh.triangles[frag.triangle];
        const Vec2& uv0 = mesh.uv[tri[0]];
        frag.uv = uv0 + frag.b1 * (mesh.uv[tri[1]] - uv0) + frag.b2 * (mesh.uv[tri[2]] - uv0);
        out.image[idx] = sample_bilinear(texture, frag.uv.x(), frag.uv.y());
        out.depth[idx] = zbuf[idx];
        out.coverage[idx] = 1.0;
    }
    return out;
}

RasterGrad rasterize_backward(const TriangleMesh& mesh, const Image& texture, const CameraIntrinsics& K,
                              const Pose& pose, const RenderOutput& output, const Image& grad_image)
{
    RasterGrad grad;
    grad.texture = Image(texture.width(), texture.height(), Vec3::Zero());
    grad.vertices.assign(mesh.vertices.size(), Vec3::Zero());
    std::vector<Vec2> grad_screen(mesh.vertices.size(), Vec2::Zero());
    std::vector<Vec3> camera(mesh.vertices.size());
    std::vector<Vec2> screen(mesh.vertices.size());
    for (std::size_t k = 0; k < mesh.vertices.size(); ++k) {
        camera[k] = pose.apply(mesh.vertices[k]);
        screen[k] = K.project(camera[k]);
    }

    for (std::size_t idx = 0; idx < output.fragments.size(); ++idx) {
        const auto& frag = output.fragments[idx];
        const Vec3& g = grad_image[idx];
        if (frag.triangle < 0 || g.isZero())
            continue;

        // Bilinear sampling.
        const auto t = footprint(texture, frag.uv.x(), frag.uv.y());
        const Vec3 &c00 = texture(t.y0, t.x0), &c01 = texture(t.y0, t.x1);
        const Vec3 &c10 = texture(t.y1, t.x0), &c11 = texture(t.y1, t.x1);
        grad.texture(t.y0, t.x0) += (1.0 - t.fx) * (1.0 - t.fy) * g;
        grad.texture(t.y0, t.x1) += t.fx * (1.0 - t.fy) * g;
        grad.texture(t.y1, t.x0) += (1.0 - t.fx) * t.fy * g;
        grad.texture(t.y1, t.x1) += t.fx * t.fy * g;
        const double g_u = t.clamped_x ? 0.0 : g.dot((1.0 - t.fy) * (c01 - c00) + t.fy * (c11 - c10));
        const double g_v = t.clamped_y ? 0.0 : g.dot((1.0 - t.fx) * (c10 - c00) + t.fx * (c11 - c01));
        if (g_u == 0.0 && g_v == 0.0)
            continue;
        const Vec2 g_uv(g_u, g_v);

        // uv = uv0 + b1 (uv1 - uv0) + b2 (uv2 - uv0)
        const auto& tri = mesh.triangles[frag.triangle];
        const Vec2& uv0 = mesh.uv[tri[0]];
        const double g_b1 = g_uv.dot(mesh.uv[tri[1]] - uv0);
        const double g_b2 = g_uv.dot(mesh.uv[tri[2]] - uv0);

        // b1 = (r x e2) / A, b2 = (e1 x r) / A, A = e1 x e2, r = p - s0.
        const Vec2 &s0 = screen[tri[0]], &s1 = screen[tri[1]], &s2 = screen[tri[2]];
        const Vec2 e1 = s1 - s0, e2 = s2 - s0;
        const int py = static_cast<int>(idx / output.fragments.width());
        const int px = static_cast<int>(idx % output.fragments.width());
        const Vec2 r = Vec2(px, py) - s0;
        const double area = cross2(e1, e2);
        const double g_n1 = g_b1 / area, g_n2 = g_b2 / area;
        const double g_area = -(g_b1 * frag.b1 + g_b2 * frag.b2) / area;
        const Vec2 g_r = g_n1 * Vec2(e2.y(), -e2.x()) + g_n2 * Vec2(-e1.y(), e1.x());
        const Vec2 g_e2 = g_n1 * Vec2(-r.y(), r.x()) + g_area * Vec2(-e1.y(), e1.x());
        const Vec2 g_e1 = g_n2 * Vec2(r.y(), -r.x()) + g_area * Vec2(e2.y(), -e2.x());
        grad_screen[tri[0]] -= g_r + g_e1 + g_e2;
        grad_screen[tri[1]] += g_e1;
        grad_screen[tri[2]] += g_e2;
    }

    for (std::size_t k = 0; k < mesh.vertices.size(); ++k) {
        const Vec2& gs = grad_screen[k];
        if (gs.isZero())
            continue;
        const Vec3& q = camera[k];
        const double inv_z = 1.0 / q.z();
        const Vec3 g_q(K.f * gs.x() * inv_z, K.f * gs.y() * inv_z,
                       -K.f * (gs.x() * q.x() + gs.y() * q.y()) * inv_z * inv_z);
        grad.vertices[k] = pose.R.transpose() * g_q;
        grad.R += g_q * mesh.vertices[k].transpose();
        grad.T += g_q;
    }
    return grad;
}

RenderOutput render(const DepthMap& depth, const Image& albedo, const Viewpoint& v, const Lighting& light,
                    const CameraIntrinsics& K, const RenderOptions& options)
{
    if (!depth.same_shape(albedo) || depth.width() != K.width || depth.height() != K.height)
        throw Error(ErrorCode::ShapeMismatch, "depth, albedo and camera sizes must agree");
    const Image shaded = shade(albedo, compute_normals(depth, K), light);
    return rasterize(depth_to_mesh(depth, K), shaded, K, viewpoint_to_pose(v, options.bounds, options.pivot),
                     options.background);
}

Mask warp_mask(const Mask& mask, const DepthMap& depth, const Viewpoint& v, const CameraIntrinsics& K,
               const RenderOptions& options)
{
    if (!mask.same_shape(depth))
        throw Error(ErrorCode::ShapeMismatch, "mask and depth map differ in size");
    Image texture(mask.width(), mask.height());
    for (std::size_t i = 0; i < mask.size(); ++i)
        texture[i] = Vec3::Constant(mask[i] ? 1.0 : 0.0);
    const auto out = rasterize(depth_to_mesh(depth, K), texture, K, viewpoint_to_pose(v, options.bounds, options.pivot),
                               Vec3::Zero());
    Mask warped(K.width, K.height, 0);
    for (std::size_t i = 0; i < warped.size(); ++i)
        warped[i] = out.coverage[i] > 0.0 && out.image[i].x() >= 0.5 ? 1 : 0;
    return warped;
}

SceneTape record_scene(const SceneParams& params, const CameraIntrinsics& K)
{
    if (!params.depth_raw.same_shape(params.albedo_raw) || params.depth_raw.width() != K.width ||
        params.depth_raw.height() != K.height)
        throw Error(ErrorCode::ShapeMismatch, "depth, albedo and camera sizes must agree");
    return record_scene(depth_from_raw(params.depth_raw), albedo_from_raw(params.albedo_raw), K);
}

SceneTape record_scene(const DepthMap& depth, const Image& albedo, const CameraIntrinsics& K)
{
    if (!depth.same_shape(albedo) || depth.width() != K.width || depth.height() != K.height)
        throw Error(ErrorCode::ShapeMismatch, "depth, albedo and camera sizes must agree");
    SceneTape tape;
    tape.depth = depth;
    tape.normals = compute_normals(tape.depth, K);
    tape.albedo = albedo;
    tape.mesh = depth_to_mesh(tape.depth, K);
    return tape;
}

ViewTape render_view(const SceneTape& scene, const Viewpoint& v, const Lighting& light, const CameraIntrinsics& K,
                     const RenderOptions& options)
{
    ViewTape tape;
    tape.light = light;
    tape.pose = viewpoint_to_pose(v, options.bounds, options.pivot);
    tape.shaded = shade(scene.albedo, scene.normals, tape.light);
    tape.output = rasterize(scene.mesh, tape.shaded, K, tape.pose, options.background);
    return tape;
}

SceneAccumulator::SceneAccumulator(int width, int height)
    : depth(width, height, 0.0), normals(width, height, Vec3::Zero()), albedo(width, height, Vec3::Zero())
{
}

void SceneAccumulator::add(const SceneAccumulator& other)
{
    for (std::size_t i = 0; i < depth.size(); ++i) {
        depth[i] += other.depth[i];
        normals[i] += other.normals[i];
        albedo[i] += other.albedo[i];
    }
}

ViewGrad render_view_backward(const SceneTape& scene, const ViewTape& tape, const Viewpoint& v,
                              const CameraIntrinsics& K, const Image& grad_image, SceneAccumulator& acc,
                              const RenderOptions& options)
{
    const RasterGrad raster = rasterize_backward(scene.mesh, tape.shaded, K, tape.pose, tape.output, grad_image);
    for (int y = 0; y < K.height; ++y)
        for (int x = 0; x < K.width; ++x) {
            const std::size_t k = acc.depth.index(y, x);
            acc.depth[k] += raster.vertices[k].dot(K.ray(x, y));
        }

    ShadeGrad sg;
    sg.albedo = std::move(acc.albedo);
    sg.normals = std::move(acc.normals);
    shade_backward(scene.albedo, scene.normals, tape.light, raster.texture, sg);
    acc.albedo = std::move(sg.albedo);
    acc.normals = std::move(sg.normals);

    ViewGrad out;
    out.view = pose_backward(v, raster.R, raster.T, options.pivot);
    out.light = sg.light;
    return out;
}

SceneGrad scene_backward(const SceneTape& scene, const CameraIntrinsics& K, const SceneAccumulator& acc)
{
    DepthMap grad_depth = acc.depth;
    compute_normals_backward(scene.depth, K, acc.normals, grad_depth);
    SceneGrad out;
    out.depth_raw = ScalarMap(grad_depth.width(), grad_depth.height());
    for (std::size_t i = 0; i < grad_depth.size(); ++i)
        out.depth_raw[i] = grad_depth[i] * DepthParameterization::derivative_from_depth(scene.depth[i]);
    out.albedo_raw = Image(scene.albedo.width(), scene.albedo.height());
    for (std::size_t i = 0; i < scene.albedo.size(); ++i) {
        const Vec3& a = scene.albedo[i];
        out.albedo_raw[i] = acc.albedo[i].cwiseProduct(a.cwiseProduct(Vec3::Ones() - a));
    }
    return out;
}

RenderGradients render_gradient(const SceneParams& params, const Viewpoint& v, const LightingParams& light,
                                const CameraIntrinsics& K, const Image& grad_image, const RenderOptions& options)
{
    const SceneTape scene = record_scene(params, K);
    const ViewTape tape = render_view(scene, v, light.mapped(), K, options);
    SceneAccumulator acc(K.width, K.height);
    const ViewGrad vg = render_view_backward(scene, tape, v, K, grad_image, acc, options);
    SceneGrad sg = scene_backward(scene, K, acc);
    return {std::move(sg.depth_raw), std::move(sg.albedo_raw), vg.view, lighting_params_backward(light, vg.light)};
}

} // namespace photogeo
