#include "photogeo/losses.hpp"

#include "photogeo/error.hpp"

#include <cmath>
#include <vector>

namespace photogeo {

namespace {

double sign(double v)
{
    return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
}

Vec3 sign(const Vec3& v)
{
    return {sign(v.x()), sign(v.y()), sign(v.z())};
}

} // namespace

LossValue recon_loss(const Image& target, const Image& rendered, const ScalarMap& coverage, const Mask* mask,
                     double pyramid_weight)
{
    if (!target.same_shape(rendered) || !target.same_shape(coverage) || (mask && !target.same_shape(*mask)))
        throw Error(ErrorCode::ShapeMismatch, "loss inputs differ in size");
    const int W = target.width(), H = target.height();

    Mask valid(W, H, 0);
    std::size_t count = 0;
    for (std::size_t i = 0; i < valid.size(); ++i)
        if (coverage[i] > 0.0 && (!mask || (*mask)[i])) {
            valid[i] = 1;
            ++count;
        }
    if (count == 0)
        throw Error(ErrorCode::EmptyCoverage, "no covered pixel to compare");

    LossValue out;
    out.grad = Image(W, H, Vec3::Zero());
    const double full_scale = 1.0 / (3.0 * count);
    for (std::size_t i = 0; i < valid.size(); ++i) {
        if (!valid[i])
            continue;
        const Vec3 diff = rendered[i] - target[i];
        out.value += diff.cwiseAbs().sum() * full_scale;
        out.grad[i] = sign(diff) * full_scale;
    }

    if (pyramid_weight == 0.0)
        return out;

    for (int s : {2, 4}) {
        const int bw = W / s, bh = H / s;
        struct Block
        {
            int by, bx;
            Vec3 diff;
        };
        std::vector<Block> blocks;
        for (int by = 0; by < bh; ++by)
            for (int bx = 0; bx < bw; ++bx) {
                bool full = true;
                Vec3 diff = Vec3::Zero();
                for (int y = by * s; y < (by + 1) * s && full; ++y)
                    for (int x = bx * s; x < (bx + 1) * s; ++x) {
                        if (!valid(y, x)) {
                            full = false;
                            break;
                        }
                        diff += rendered(y, x) - target(y, x);
                    }
                if (full)
                    blocks.push_back({by, bx, diff / (s * s)});
            }
        if (blocks.empty())
            continue;
        const double scale = pyramid_weight / (3.0 * blocks.size());
        for (const auto& b : blocks) {
            out.value += b.diff.cwiseAbs().sum() * scale;
            const Vec3 g = sign(b.diff) * (scale / (s * s));
            for (int y = b.by * s; y < (b.by + 1) * s; ++y)
                for (int x = b.bx * s; x < (b.bx + 1) * s; ++x)
                    out.grad(y, x) += g;
        }
    }
    return out;
}

SmoothnessValue smoothness_loss(const DepthMap& depth)
{
    const int W = depth.width(), H = depth.height();
    if (W < 3 && H < 3)
        throw Error(ErrorCode::TooSmall, "smoothness needs at least three pixels along one axis");
    const std::size_t count = static_cast<std::size_t>(H) * std::max(W - 2, 0) +
                              static_cast<std::size_t>(W) * std::max(H - 2, 0);
    const double scale = 1.0 / count;

    SmoothnessValue out;
    out.grad = DepthMap(W, H, 0.0);
    for (int y = 0; y < H; ++y)
        for (int x = 1; x + 1 < W; ++x) {
            const double d2 = depth(y, x - 1) - 2.0 * depth(y, x) + depth(y, x + 1);
            out.value += std::abs(d2) * scale;
            const double g = sign(d2) * scale;
            out.grad(y, x - 1) += g;
            out.grad(y, x) -= 2.0 * g;
            out.grad(y, x + 1) += g;
        }
    for (int y = 1; y + 1 < H; ++y)
        for (int x = 0; x < W; ++x) {
            const double d2 = depth(y - 1, x) - 2.0 * depth(y, x) + depth(y + 1, x);
            out.value += std::abs(d2) * scale;
            const double g = sign(d2) * scale;
            out.grad(y - 1, x) += g;
            out.grad(y, x) -= 2.0 * g;
            out.grad(y + 1, x) += g;
        }
    return out;
}

} // namespace photogeo
