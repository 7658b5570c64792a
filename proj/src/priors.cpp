#include "photogeo/priors.hpp"

#include "photogeo/error.hpp"

#include <algorithm>
#include <cmath>

namespace photogeo {

std::string_view to_string(PriorKind kind)
{
    switch (kind) {
    case PriorKind::Ellipsoid: return "ellipsoid";
    case PriorKind::Asymmetric: return "asymmetric";
    case PriorKind::Shifted: return "shifted";
    case PriorKind::Weak: return "weak";
    case PriorKind::Flat: return "flat";
    }
    return "ellipsoid";
}

PriorKind prior_kind_from_string(std::string_view name)
{
    for (auto kind : {PriorKind::Ellipsoid, PriorKind::Asymmetric, PriorKind::Shifted, PriorKind::Weak,
                      PriorKind::Flat})
        if (to_string(kind) == name)
            return kind;
    throw Error(ErrorCode::InvalidArgument, "unknown prior kind '" + std::string(name) + "'");
}

namespace {

double profile(double dy, double dx, double ri, double rj)
{
    const double u = dx / rj, v = dy / ri;
    return std::sqrt(std::max(0.0, 1.0 - u * u - v * v));
}

} // namespace

DepthMap build_prior(const PriorSpec& spec, int width, int height, const Mask* mask)
{
    if (width < 2 || height < 2)
        throw Error(ErrorCode::InvalidSize, "prior needs at least a 2x2 grid");
    if (!(spec.near < spec.far) || !(spec.near > 0.9) || !(spec.far < 1.1))
        throw Error(ErrorCode::InvalidArgument, "prior depth range must satisfy 0.9 < near < far < 1.1");

    Vec2 center(0.5 * (height - 1), 0.5 * (width - 1));
    Vec2 radii(0.35 * height, 0.3 * width);
    if (spec.center)
        center = *spec.center;
    if (spec.radii)
        radii = *spec.radii;

    if (mask && spec.align_to_mask) {
        if (!mask->same_shape(DepthMap(width, height)))
            throw Error(ErrorCode::ShapeMismatch, "mask size differs from the prior grid");
        int y_min = height, y_max = -1, x_min = width, x_max = -1;
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x)
                if ((*mask)(y, x)) {
                    y_min = std::min(y_min, y);
                    y_max = std::max(y_max, y);
                    x_min = std::min(x_min, x);
                    x_max = std::max(x_max, x);
                }
        if (y_max < 0)
            throw Error(ErrorCode::EmptyMask, "mask selects no pixel");
        center = Vec2(0.5 * (y_min + y_max), 0.5 * (x_min + x_max));
        radii = Vec2(0.5 * (y_max - y_min + 1), 0.5 * (x_max - x_min + 1));
    }

    if (!(radii.x() > 0.0 && radii.y() > 0.0))
        throw Error(ErrorCode::InvalidArgument, "prior radii must be positive");
    if (spec.kind != PriorKind::Shifted &&
        !(center.x() >= 0.0 && center.x() <= height - 1 && center.y() >= 0.0 && center.y() <= width - 1))
        throw Error(ErrorCode::InvalidArgument, "prior centre must lie inside the image");

    double near = spec.near;
    const double far = spec.far;
    if (spec.kind == PriorKind::Shifted)
        center.y() += spec.shift_fraction * width;
    if (spec.kind == PriorKind::Weak)
        near = far - 0.5 * (far - spec.near);

    DepthMap depth(width, height, far);
    if (spec.kind == PriorKind::Flat)
        return depth;

    const double sphere_radius = std::min(radii.x(), radii.y());
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            const double dy = y - center.x(), dx = x - center.y();
            double h = 0.0;
            if (spec.kind == PriorKind::Asymmetric && dx >= 0.0)
                h = profile(dy, dx, sphere_radius, sphere_radius);
            else
                h = profile(dy, dx, radii.x(), radii.y());
            depth(y, x) = far - (far - near) * h;
        }
    return depth;
}

} // namespace photogeo
