#pragma once

#include "photogeo/grid.hpp"

#include <array>
#include <numbers>

namespace photogeo {

/// Pinhole camera with square pixels. The principal point sits at the image centre
/// when built from a field of view.
struct CameraIntrinsics
{
    int width = 0;
    int height = 0;
    double f = 1.0;
    double cx = 0.0;
    double cy = 0.0;

    /// K^-1 (x, y, 1): the ray through pixel (x, y) with unit z.
    Vec3 ray(double x, double y) const { return {(x - cx) / f, (y - cy) / f, 1.0}; }
    Vec2 project(const Vec3& p) const { return {f * p.x() / p.z() + cx, f * p.y() / p.z() + cy}; }
};

CameraIntrinsics intrinsics_from_fov(int width, int height, double fov);

struct ViewBounds
{
    double rotation = std::numbers::pi / 3.0;
    double translation = 0.1;
};

/// Rotation angles (radians) about x, y, z followed by a translation. rx is pitch,
/// ry is yaw and rz is roll.
struct Viewpoint
{
    double rx = 0.0, ry = 0.0, rz = 0.0;
    double tx = 0.0, ty = 0.0, tz = 0.0;

    static constexpr std::size_t size = 6;

    double& operator[](std::size_t i) { return *(&rx + i); }
    double operator[](std::size_t i) const { return *(&rx + i); }

    bool within(const ViewBounds& bounds) const;
    Viewpoint clamped(const ViewBounds& bounds) const;

    friend bool operator==(const Viewpoint&, const Viewpoint&) = default;
};

/// Rigid transform x -> R x + T from the source camera frame to the target view.
struct Pose
{
    Mat3 R = Mat3::Identity();
    Vec3 T = Vec3::Zero();

    Vec3 apply(const Vec3& p) const { return R * p + T; }
    Pose inverse() const { return {R.transpose(), -R.transpose() * T}; }
    Pose compose(const Pose& inner) const { return {R * inner.R, R * inner.T + T}; }
};

/// Default rotation pivot: the object centre sits on the optical axis at unit depth.
inline const Vec3 kDefaultPivot{0.0, 0.0, 1.0};

/// R = Rz(rz) Ry(ry) Rx(rx). The rotation acts about `pivot`, so the returned
/// translation is t + (I - R) pivot; with a zero pivot it is exactly t.
Pose viewpoint_to_pose(const Viewpoint& v, const ViewBounds& bounds = {}, const Vec3& pivot = kDefaultPivot);

/// dR/drx, dR/dry, dR/drz at v.
std::array<Mat3, 3> rotation_jacobian(const Viewpoint& v);

/// Chain rule from (dL/dR, dL/dT) of a pose built by viewpoint_to_pose back to the
/// six viewpoint parameters.
Viewpoint pose_backward(const Viewpoint& v, const Mat3& grad_R, const Vec3& grad_T, const Vec3& pivot = kDefaultPivot);

/// Back-project pixel (x, y) at depth d: returns P with P.z == d.
Vec3 unproject(double x, double y, double d, const CameraIntrinsics& K);

/// Per-pixel normals of the surface unprojected from `depth`. Tangents use central
/// differences in the interior and one-sided differences on the border. A
/// fronto-parallel surface yields (0, 0, 1); x/y components point away from a bump
/// toward the camera.
NormalMap compute_normals(const DepthMap& depth, const CameraIntrinsics& K);

/// Accumulates dL/d(depth) into grad_depth given dL/d(normals).
void compute_normals_backward(const DepthMap& depth, const CameraIntrinsics& K, const NormalMap& grad_normals,
                              DepthMap& grad_depth);

struct WarpResult
{
    double x = 0.0;
    double y = 0.0;
    double depth = 0.0;
};

WarpResult warp_forward(double x, double y, double d, const CameraIntrinsics& K, const Pose& pose);

/// Depth values live in (0.9, 1.1) through d = 1 + 0.1 tanh(u).
struct DepthParameterization
{
    static constexpr double center = 1.0;
    static constexpr double half_range = 0.1;

    static double to_depth(double raw);
    /// Inverse map; depths are clamped just inside the open box first.
    static double to_raw(double depth);
    /// d(depth)/d(raw) expressed through the mapped depth.
    static double derivative_from_depth(double depth);
};

DepthMap depth_from_raw(const ScalarMap& raw);
ScalarMap raw_from_depth(const DepthMap& depth);

} // namespace photogeo
