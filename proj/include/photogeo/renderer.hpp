#pragma once

#include "photogeo/geometry.hpp"
#include "photogeo/shading.hpp"

#include <array>
#include <vector>

namespace photogeo {

/// Height-field mesh: one vertex per depth pixel, two triangles per pixel quad.
struct TriangleMesh
{
    std::vector<Vec3> vertices;
    std::vector<Vec2> uv;
    std::vector<std::array<int, 3>> triangles;
};

/// Vertex (y, x) has index y * W + x. Quads are split along (y, x) -> (y + 1, x + 1).
TriangleMesh depth_to_mesh(const DepthMap& depth, const CameraIntrinsics& K);

/// Which triangle won the depth test at a pixel and where inside it the pixel centre fell.
struct Fragment
{
    int triangle = -1;
    double b1 = 0.0;
    double b2 = 0.0;
    Vec2 uv = Vec2::Zero();
};

struct RenderOutput
{
    Image image;
    DepthMap depth;
    /// 1 where a triangle covers the pixel centre, 0 elsewhere.
    ScalarMap coverage;
    Grid<Fragment> fragments;
};

/// Rasterise `mesh` seen through `pose` with a hard z-buffer. Covered pixels sample
/// `texture` bilinearly (edge clamped) at the screen-space barycentric uv; uncovered
/// pixels get `background`. Output size follows K.
RenderOutput rasterize(const TriangleMesh& mesh, const Image& texture, const CameraIntrinsics& K, const Pose& pose,
                       const Vec3& background);

struct RasterGrad
{
    Image texture;
    /// With respect to pre-pose vertex positions.
    std::vector<Vec3> vertices;
    Mat3 R = Mat3::Zero();
    Vec3 T = Vec3::Zero();
};

/// Reverse pass through bilinear sampling, barycentric interpolation and projection.
/// Silhouette and visibility changes carry no gradient.
RasterGrad rasterize_backward(const TriangleMesh& mesh, const Image& texture, const CameraIntrinsics& K,
                              const Pose& pose, const RenderOutput& output, const Image& grad_image);

Vec3 sample_bilinear(const Image& texture, double x, double y);

struct RenderOptions
{
    Vec3 background = Vec3::Constant(0.5);
    ViewBounds bounds;
    Vec3 pivot = kDefaultPivot;
};

/// rasterize(depth_to_mesh(d), shade(a, normals(d), light), pose(v))
RenderOutput render(const DepthMap& depth, const Image& albedo, const Viewpoint& v, const Lighting& light,
                    const CameraIntrinsics& K, const RenderOptions& options = {});

/// Warp a mask into view v using the mesh of `depth`; thresholded at 0.5.
Mask warp_mask(const Mask& mask, const DepthMap& depth, const Viewpoint& v, const CameraIntrinsics& K,
               const RenderOptions& options = {});

// ---------------------------------------------------------------------------
// Differentiable path. A scene (depth + albedo) is shared across many views, so
// the forward pass is split into a scene part and a per-view part.

struct SceneParams
{
    ScalarMap depth_raw;
    Image albedo_raw;
};

struct SceneTape
{
    DepthMap depth;
    NormalMap normals;
    Image albedo;
    TriangleMesh mesh;
};

SceneTape record_scene(const SceneParams& params, const CameraIntrinsics& K);
SceneTape record_scene(const DepthMap& depth, const Image& albedo, const CameraIntrinsics& K);

struct ViewTape
{
    Lighting light;
    Pose pose;
    Image shaded;
    RenderOutput output;
};

ViewTape render_view(const SceneTape& scene, const Viewpoint& v, const Lighting& light, const CameraIntrinsics& K,
                     const RenderOptions& options = {});

/// Gradients with respect to the mapped depth, normals and albedo, summed over views.
struct SceneAccumulator
{
    DepthMap depth;
    NormalMap normals;
    Image albedo;

    SceneAccumulator() = default;
    SceneAccumulator(int width, int height);
    void add(const SceneAccumulator& other);
};

struct ViewGrad
{
    Viewpoint view;
    /// With respect to the mapped lighting values; see lighting_params_backward.
    LightingGrad light;
};

/// Adds the scene part of dL/d(view image) into `acc` and returns the view/light part.
ViewGrad render_view_backward(const SceneTape& scene, const ViewTape& tape, const Viewpoint& v,
                              const CameraIntrinsics& K, const Image& grad_image, SceneAccumulator& acc,
                              const RenderOptions& options = {});

struct SceneGrad
{
    ScalarMap depth_raw;
    Image albedo_raw;
};

/// Finishes the chain rule from mapped-space accumulators to raw parameters.
SceneGrad scene_backward(const SceneTape& scene, const CameraIntrinsics& K, const SceneAccumulator& acc);

/// Single-view convenience: gradient of <grad_image, render(...)> with respect to every
/// continuous input.
struct RenderGradients
{
    ScalarMap depth_raw;
    Image albedo_raw;
    Viewpoint view;
    LightingParams light;
};

RenderGradients render_gradient(const SceneParams& params, const Viewpoint& v, const LightingParams& light,
                                const CameraIntrinsics& K, const Image& grad_image, const RenderOptions& options = {});

} // namespace photogeo
