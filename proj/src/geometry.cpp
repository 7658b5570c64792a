#include "photogeo/geometry.hpp"

#include "photogeo/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace photogeo {

std::string_view to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::InvalidFov: return "invalid-fov";
    case ErrorCode::InvalidSize: return "invalid-size";
    case ErrorCode::OutOfBounds: return "out-of-bounds";
    case ErrorCode::NonpositiveDepth: return "nonpositive-depth";
    case ErrorCode::DegenerateSurface: return "degenerate-surface";
    case ErrorCode::BehindCamera: return "behind-camera";
    case ErrorCode::ShapeMismatch: return "shape-mismatch";
    case ErrorCode::EmptyMesh: return "empty-mesh";
    case ErrorCode::AllBehindCamera: return "all-behind-camera";
    case ErrorCode::EmptyMask: return "empty-mask";
    case ErrorCode::EmptyCoverage: return "empty-coverage";
    case ErrorCode::TooSmall: return "too-small";
    case ErrorCode::NonPsdCovariance: return "non-psd-covariance";
    case ErrorCode::MissingFile: return "missing-file";
    case ErrorCode::DecodeFailure: return "decode-failure";
    case ErrorCode::IoFailure: return "io-failure";
    case ErrorCode::EmptySet: return "empty-set";
    case ErrorCode::Divergence: return "divergence";
    case ErrorCode::Config: return "config";
    case ErrorCode::UnknownScene: return "unknown-scene";
    }
    return "unknown";
}

CameraIntrinsics intrinsics_from_fov(int width, int height, double fov)
{
    if (width < 2 || height < 2)
        throw Error(ErrorCode::InvalidSize, "image must be at least 2x2, got " + std::to_string(width) + "x" +
                                                std::to_string(height));
    if (!(fov > 0.0 && fov < std::numbers::pi))
        throw Error(ErrorCode::InvalidFov, "field of view must lie in (0, pi), got " + std::to_string(fov));
    CameraIntrinsics K;
    K.width = width;
    K.height = height;
    K.cx = (width - 1) / 2.0;
    K.cy = (height - 1) / 2.0;
    K.f = (width - 1) / (2.0 * std::tan(fov / 2.0));
    return K;
}

bool Viewpoint::within(const ViewBounds& bounds) const
{
    for (std::size_t i = 0; i < 3; ++i)
        if (!(std::abs((*this)[i]) <= bounds.rotation))
            return false;
    for (std::size_t i = 3; i < 6; ++i)
        if (!(std::abs((*this)[i]) <= bounds.translation))
            return false;
    return true;
}

Viewpoint Viewpoint::clamped(const ViewBounds& bounds) const
{
    Viewpoint out = *this;
    for (std::size_t i = 0; i < 6; ++i) {
        const double b = i < 3 ? bounds.rotation : bounds.translation;
        out[i] = std::clamp(out[i], -b, b);
    }
    return out;
}

namespace {

Mat3 rot_x(double a)
{
    const double c = std::cos(a), s = std::sin(a);
    Mat3 m;
    m << 1, 0, 0, 0, c, -s, 0, s, c;
    return m;
}

Mat3 rot_y(double a)
{
    const double c = std::cos(a), s = std::sin(a);
    Mat3 m;
    m << c, 0, s, 0, 1, 0, -s, 0, c;
    return m;
}

Mat3 rot_z(double a)
{
    const double c = std::cos(a), s = std::sin(a);
    Mat3 m;
    m << c, -s, 0, s, c, 0, 0, 0, 1;
    return m;
}

Mat3 drot_x(double a)
{
    const double c = std::cos(a), s = std::sin(a);
    Mat3 m;
    m << 0, 0, 0, 0, -s, -c, 0, c, -s;
    return m;
}

Mat3 drot_y(double a)
{
    const double c = std::cos(a), s = std::sin(a);
    Mat3 m;
    m << -s, 0, c, 0, 0, 0, -c, 0, -s;
    return m;
}

Mat3 drot_z(double a)
{
    const double c = std::cos(a), s = std::sin(a);
    Mat3 m;
    m << -s, -c, 0, c, -s, 0, 0, 0, 0;
    return m;
}

} // namespace

Pose viewpoint_to_pose(const Viewpoint& v, const ViewBounds& bounds, const Vec3& pivot)
{
    if (!v.within(bounds))
        throw Error(ErrorCode::OutOfBounds, "viewpoint component exceeds its bound");
    Pose pose;
    pose.R = rot_z(v.rz) * rot_y(v.ry) * rot_x(v.rx);
    pose.T = Vec3(v.tx, v.ty, v.tz) + pivot - pose.R * pivot;
    return pose;
}

std::array<Mat3, 3> rotation_jacobian(const Viewpoint& v)
{
    const Mat3 rx = rot_x(v.rx), ry = rot_y(v.ry), rz = rot_z(v.rz);
    return {rz * ry * drot_x(v.rx), rz * drot_y(v.ry) * rx, drot_z(v.rz) * ry * rx};
}

Viewpoint pose_backward(const Viewpoint& v, const Mat3& grad_R, const Vec3& grad_T, const Vec3& pivot)
{
    // T = t + pivot - R pivot contributes -grad_T pivot^T to dL/dR.
    const Mat3 total_R = grad_R - grad_T * pivot.transpose();
    const auto jac = rotation_jacobian(v);
    Viewpoint g;
    for (std::size_t k = 0; k < 3; ++k)
        g[k] = total_R.cwiseProduct(jac[k]).sum();
    g.tx = grad_T.x();
    g.ty = grad_T.y();
    g.tz = grad_T.z();
    return g;
}

Vec3 unproject(double x, double y, double d, const CameraIntrinsics& K)
{
    if (!(d > 0.0))
        throw Error(ErrorCode::NonpositiveDepth, "depth must be positive, got " + std::to_string(d));
    return d * K.ray(x, y);
}

namespace {

struct TangentStencil
{
    int lo, hi;
};

TangentStencil stencil(int i, int n)
{
    if (i == 0)
        return {0, 1};
    if (i == n - 1)
        return {n - 2, n - 1};
    return {i - 1, i + 1};
}

Vec3 point_at(const DepthMap& depth, const CameraIntrinsics& K, int y, int x)
{
    return depth(y, x) * K.ray(x, y);
}

} // namespace

NormalMap compute_normals(const DepthMap& depth, const CameraIntrinsics& K)
{
    const int W = depth.width(), H = depth.height();
    if (W < 2 || H < 2)
        throw Error(ErrorCode::InvalidSize, "normal map needs at least 2x2 depth");
    for (double d : depth)
        if (!(d > 0.0) || !std::isfinite(d))
            throw Error(ErrorCode::NonpositiveDepth, "depth map must be finite and positive");

    NormalMap normals(W, H);
    for (int y = 0; y < H; ++y) {
        const auto sy = stencil(y, H);
        for (int x = 0; x < W; ++x) {
            const auto sx = stencil(x, W);
            const Vec3 tx = point_at(depth, K, y, sx.hi) - point_at(depth, K, y, sx.lo);
            const Vec3 ty = point_at(depth, K, sy.hi, x) - point_at(depth, K, sy.lo, x);
            const Vec3 c = tx.cross(ty);
            const double len = c.norm();
            if (len < 1e-12)
                throw Error(ErrorCode::DegenerateSurface,
                            "collapsed tangent basis at (" + std::to_string(y) + ", " + std::to_string(x) + ")");
            normals(y, x) = Vec3(-c.x(), -c.y(), c.z()) / len;
        }
    }
    return normals;
}

void compute_normals_backward(const DepthMap& depth, const CameraIntrinsics& K, const NormalMap& grad_normals,
                              DepthMap& grad_depth)
{
    const int W = depth.width(), H = depth.height();
    for (int y = 0; y < H; ++y) {
        const auto sy = stencil(y, H);
        for (int x = 0; x < W; ++x) {
            const Vec3& gn = grad_normals(y, x);
            if (gn.isZero())
                continue;
            const auto sx = stencil(x, W);
            const Vec3 tx = point_at(depth, K, y, sx.hi) - point_at(depth, K, y, sx.lo);
            const Vec3 ty = point_at(depth, K, sy.hi, x) - point_at(depth, K, sy.lo, x);
            const Vec3 c = tx.cross(ty);
            const double len = c.norm();
            const Vec3 n = Vec3(-c.x(), -c.y(), c.z()) / len;
            const Vec3 gm = (gn - n * n.dot(gn)) / len;
            const Vec3 gc(-gm.x(), -gm.y(), gm.z());
            const Vec3 g_tx = ty.cross(gc);
            const Vec3 g_ty = gc.cross(tx);
            grad_depth(y, sx.hi) += g_tx.dot(K.ray(sx.hi, y));
            grad_depth(y, sx.lo) -= g_tx.dot(K.ray(sx.lo, y));
            grad_depth(sy.hi, x) += g_ty.dot(K.ray(x, sy.hi));
            grad_depth(sy.lo, x) -= g_ty.dot(K.ray(x, sy.lo));
        }
    }
}

WarpResult warp_forward(double x, double y, double d, const CameraIntrinsics& K, const Pose& pose)
{
    const Vec3 q = pose.apply(unproject(x, y, d, K));
    if (!(q.z() > 0.0))
        throw Error(ErrorCode::BehindCamera, "warped point is behind the camera");
    const Vec2 s = K.project(q);
    return {s.x(), s.y(), q.z()};
}

double DepthParameterization::to_depth(double raw)
{
    return center + half_range * std::tanh(raw);
}

double DepthParameterization::to_raw(double depth)
{
    const double t = std::clamp((depth - center) / half_range, -1.0 + 1e-9, 1.0 - 1e-9);
    return std::atanh(t);
}

double DepthParameterization::derivative_from_depth(double depth)
{
    const double t = (depth - center) / half_range;
    return half_range * (1.0 - t * t);
}

DepthMap depth_from_raw(const ScalarMap& raw)
{
    DepthMap d(raw.width(), raw.height());
    for (std::size_t i = 0; i < raw.size(); ++i)
        d[i] = DepthParameterization::to_depth(raw[i]);
    return d;
}

ScalarMap raw_from_depth(const DepthMap& depth)
{
    ScalarMap raw(depth.width(), depth.height());
    for (std::size_t i = 0; i < depth.size(); ++i)
        raw[i] = DepthParameterization::to_raw(depth[i]);
    return raw;
}

} // namespace photogeo
