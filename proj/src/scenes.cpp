#include "photogeo/scenes.hpp"

#include "photogeo/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace photogeo {

namespace {

constexpr double kBackground = 1.05;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

Mask footprint(const DepthMap& depth)
{
    Mask mask(depth.width(), depth.height(), 0);
    for (std::size_t i = 0; i < depth.size(); ++i)
        mask[i] = depth[i] < kBackground - 1e-3 ? 1 : 0;
    return mask;
}

// Smooth colour pattern. With `symmetric` the pattern is even in (x - cx).
Image textured_albedo(int W, int H, const Vec3& base, bool symmetric)
{
    Image a(W, H);
    const double cx = 0.5 * (W - 1), cy = 0.5 * (H - 1);
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            const double u = (x - cx) / W, v = (y - cy) / H;
            const double horiz = symmetric ? std::cos(kTwoPi * 2.5 * u) : std::sin(kTwoPi * 2.5 * u + 0.7);
            const double stripes = std::cos(kTwoPi * 3.0 * v + 0.3);
            const double blob = std::exp(-((u - (symmetric ? 0.0 : 0.12)) * (u - (symmetric ? 0.0 : 0.12)) +
                                           (v + 0.1) * (v + 0.1)) / 0.02);
            for (int c = 0; c < 3; ++c) {
                const double tint = 0.12 * horiz * stripes * (1.0 - 0.3 * c) + 0.1 * blob * (c == 0 ? 1.0 : -0.5);
                a(y, x)[c] = std::clamp(base[c] + tint, 0.05, 0.95);
            }
        }
    return a;
}

SyntheticScene hemisphere(int W, int H)
{
    SyntheticScene s;
    s.name = "hemisphere";
    s.depth = DepthMap(W, H, kBackground);
    const double cx = 0.5 * (W - 1), cy = 0.5 * (H - 1);
    const double radius = 0.36 * std::min(W, H);
    const double height = 0.065;
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            const double dx = x - cx, dy = y - cy;
            const double rho2 = (dx * dx + dy * dy) / (radius * radius);
            if (rho2 < 1.0)
                s.depth(y, x) = kBackground - height * std::sqrt(1.0 - rho2);
        }
    s.albedo = textured_albedo(W, H, Vec3(0.62, 0.5, 0.42), true);
    s.mask = footprint(s.depth);
    return s;
}

SyntheticScene bump2(int W, int H)
{
    SyntheticScene s;
    s.name = "bump2";
    s.depth = DepthMap(W, H, kBackground);
    const double cx = 0.5 * (W - 1), cy = 0.5 * (H - 1);
    struct Bump
    {
        double x, y, sigma, height;
    };
    const Bump bumps[] = {{cx - 0.14 * W, cy + 0.04 * H, 0.15 * W, 0.06}, {cx + 0.2 * W, cy - 0.12 * H, 0.09 * W, 0.035}};
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            double h = 0.0;
            for (const auto& b : bumps) {
                const double r2 = ((x - b.x) * (x - b.x) + (y - b.y) * (y - b.y)) / (b.sigma * b.sigma);
                h += b.height * std::exp(-0.5 * r2);
            }
            // Fade to an exact plane so the footprint is well defined.
            s.depth(y, x) = kBackground - (h > 2e-3 ? h : 0.0);
        }
    s.albedo = textured_albedo(W, H, Vec3(0.55, 0.52, 0.45), false);
    s.mask = footprint(s.depth);
    return s;
}

SyntheticScene ridge(int W, int H)
{
    SyntheticScene s;
    s.name = "ridge";
    s.depth = DepthMap(W, H, kBackground);
    const double cx = 0.5 * (W - 1), cy = 0.5 * (H - 1);
    const double sigma = 0.12 * W, half_len = 0.36 * H;
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            const double across = (x - cx) / sigma;
            const double along = (y - cy) / half_len;
            const double h = 0.05 * std::exp(-0.5 * across * across) * std::exp(-std::pow(along, 4.0));
            s.depth(y, x) = kBackground - (h > 2e-3 ? h : 0.0);
        }
    s.albedo = textured_albedo(W, H, Vec3(0.5, 0.55, 0.6), true);
    s.mask = footprint(s.depth);
    return s;
}

} // namespace

std::vector<std::string> scene_names()
{
    return {"hemisphere", "bump2", "ridge"};
}

SyntheticScene make_scene(std::string_view name, int width, int height)
{
    if (width < kMinSceneSize || height < kMinSceneSize)
        throw Error(ErrorCode::TooSmall, "scene size must be at least " + std::to_string(kMinSceneSize) + "x" +
                                             std::to_string(kMinSceneSize));
    if (name == "hemisphere")
        return hemisphere(width, height);
    if (name == "bump2")
        return bump2(width, height);
    if (name == "ridge")
        return ridge(width, height);
    throw Error(ErrorCode::UnknownScene, "unknown scene '" + std::string(name) + "' (expected hemisphere, bump2 or ridge)");
}

} // namespace photogeo
