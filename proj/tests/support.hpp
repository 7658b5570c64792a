#pragma once

// Independent reference implementations used as test oracles. None of these call the
// library's rasteriser or gradient code.

#include "photogeo/geometry.hpp"
#include "photogeo/renderer.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <vector>

namespace photogeo::test {

inline constexpr double kDeg = std::numbers::pi / 180.0;

/// Smooth random depth: a sum of a few wide Gaussian blobs over a base plane.
inline DepthMap random_smooth_depth(int W, int H, std::mt19937_64& rng, double amplitude = 0.04)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    DepthMap d(W, H, 1.0);
    for (int b = 0; b < 3; ++b) {
        const double cx = u(rng) * (W - 1), cy = u(rng) * (H - 1);
        const double s = (0.25 + 0.25 * u(rng)) * std::min(W, H);
        const double a = amplitude * (u(rng) - 0.5);
        for (int y = 0; y < H; ++y)
            for (int x = 0; x < W; ++x)
                d(y, x) += a * std::exp(-((x - cx) * (x - cx) + (y - cy) * (y - cy)) / (2 * s * s));
    }
    return d;
}

/// Smooth random albedo with values well inside (0, 1).
inline Image random_smooth_albedo(int W, int H, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Image a(W, H);
    const Vec3 base(0.3 + 0.4 * u(rng), 0.3 + 0.4 * u(rng), 0.3 + 0.4 * u(rng));
    const double fx = 0.1 + 0.2 * u(rng), fy = 0.1 + 0.2 * u(rng);
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x)
            a(y, x) = base + 0.15 * Vec3(std::sin(fx * x), std::cos(fy * y), std::sin(fx * x + fy * y));
    return a;
}

struct BruteFragment
{
    int triangle = -1;
    double z = std::numeric_limits<double>::infinity();
    /// Second-smallest depth among covering triangles (to spot ties).
    double runner_up = std::numeric_limits<double>::infinity();
    /// Smallest |barycentric - (-tolerance)| over covering tests; small values mark
    /// pixels that sit on an edge within rounding.
    double edge_margin = std::numeric_limits<double>::infinity();
};

/// Exhaustive per-pixel nearest-triangle search. Barycentrics come from solving the
/// 2x2 system directly; depth is interpolated linearly in screen space.
inline Grid<BruteFragment> brute_force_zbuffer(const TriangleMesh& mesh, const CameraIntrinsics& K, const Pose& pose,
                                               double tolerance = 1e-9)
{
    Grid<BruteFragment> out(K.width, K.height);
    for (int py = 0; py < K.height; ++py)
        for (int px = 0; px < K.width; ++px) {
            auto& best = out(py, px);
            for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
                Vec3 c[3];
                Vec2 s[3];
                bool in_front = true;
                for (int k = 0; k < 3; ++k) {
                    c[k] = pose.R * mesh.vertices[mesh.triangles[t][k]] + pose.T;
                    in_front = in_front && c[k].z() > 1e-6;
                    s[k] = Vec2(K.f * c[k].x() / c[k].z() + K.cx, K.f * c[k].y() / c[k].z() + K.cy);
                }
                if (!in_front)
                    continue;
                Eigen::Matrix2d A;
                A.col(0) = s[1] - s[0];
                A.col(1) = s[2] - s[0];
                if (std::abs(A.determinant()) < 1e-14)
                    continue;
                const Vec2 b12 = A.fullPivLu().solve(Vec2(px, py) - s[0]);
                const double b[3] = {1.0 - b12[0] - b12[1], b12[0], b12[1]};
                double margin = std::numeric_limits<double>::infinity();
                bool inside = true;
                for (double bk : b) {
                    margin = std::min(margin, std::abs(bk + tolerance));
                    inside = inside && bk >= -tolerance;
                }
                best.edge_margin = std::min(best.edge_margin, margin);
                if (!inside)
                    continue;
                const double z = b[0] * c[0].z() + b[1] * c[1].z() + b[2] * c[2].z();
                if (z < best.z) {
                    best.runner_up = best.z;
                    best.z = z;
                    best.triangle = static_cast<int>(t);
                }
                else {
                    best.runner_up = std::min(best.runner_up, z);
                }
            }
        }
    return out;
}

struct Splat
{
    Image image;
    Mask covered;
};

/// Forward point-splat renderer: every source pixel is subdivided into `sub` x `sub`
/// points with bilinearly interpolated depth and colour. Each point is moved by the
/// pose and dropped into the nearest target pixel with a depth test.
inline Splat splat_render(const DepthMap& depth, const Image& colour, const CameraIntrinsics& K, const Pose& pose,
                          int sub = 6)
{
    const int W = K.width, H = K.height;
    Splat out{Image(W, H, Vec3::Zero()), Mask(W, H, 0)};
    std::vector<double> zbuf(static_cast<std::size_t>(W) * H, std::numeric_limits<double>::infinity());
    auto lerp = [](auto a, auto b, double t) { return a + (b - a) * t; };
    for (int y = 0; y + 1 < H; ++y)
        for (int x = 0; x + 1 < W; ++x)
            for (int sy = 0; sy <= sub; ++sy)
                for (int sx = 0; sx <= sub; ++sx) {
                    const double fx = double(sx) / sub, fy = double(sy) / sub;
                    const double d = lerp(lerp(depth(y, x), depth(y, x + 1), fx),
                                          lerp(depth(y + 1, x), depth(y + 1, x + 1), fx), fy);
                    const Vec3 c = lerp(lerp(colour(y, x), colour(y, x + 1), fx),
                                        lerp(colour(y + 1, x), colour(y + 1, x + 1), fx), fy);
                    const double u = x + fx, v = y + fy;
                    const Vec3 P(d * (u - K.cx) / K.f, d * (v - K.cy) / K.f, d);
                    const Vec3 Q = pose.R * P + pose.T;
                    const int tx = static_cast<int>(std::lround(K.f * Q.x() / Q.z() + K.cx));
                    const int ty = static_cast<int>(std::lround(K.f * Q.y() / Q.z() + K.cy));
                    if (tx < 0 || ty < 0 || tx >= W || ty >= H)
                        continue;
                    const std::size_t i = static_cast<std::size_t>(ty) * W + tx;
                    if (Q.z() < zbuf[i]) {
                        zbuf[i] = Q.z();
                        out.image[i] = c;
                        out.covered[i] = 1;
                    }
                }
    return out;
}

/// Centre of mass of the nonzero pixels, as (x, y).
inline Vec2 centroid(const Mask& m)
{
    Vec2 sum = Vec2::Zero();
    double n = 0.0;
    for (int y = 0; y < m.height(); ++y)
        for (int x = 0; x < m.width(); ++x)
            if (m(y, x)) {
                sum += Vec2(x, y);
                n += 1.0;
            }
    return n > 0 ? Vec2(sum / n) : Vec2(Vec2::Zero());
}

inline double rel_error(double a, double b)
{
    const double scale = std::max({std::abs(a), std::abs(b), 1e-12});
    return std::abs(a - b) / scale;
}

} // namespace photogeo::test
