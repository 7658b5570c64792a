#include "photogeo/shading.hpp"

#include "photogeo/error.hpp"

#include <algorithm>
#include <cmath>

namespace photogeo {

Lighting apply_offset(const Lighting& base, const LightingOffset& offset)
{
    return {base.lx + offset.dlx, base.ly + offset.dly, std::clamp(base.ks + offset.dks, 0.0, 1.0),
            std::clamp(base.kd + offset.dkd, 0.0, 1.0)};
}

namespace {

double weight_from_raw(double raw)
{
    return 0.5 * (1.0 + std::tanh(raw));
}

double raw_from_weight(double w)
{
    return std::atanh(2.0 * std::clamp(w, 1e-3, 1.0 - 1e-3) - 1.0);
}

} // namespace

Lighting LightingParams::mapped() const
{
    return {lx, ly, weight_from_raw(ks_raw), weight_from_raw(kd_raw)};
}

LightingParams LightingParams::from_lighting(const Lighting& l)
{
    return {l.lx, l.ly, raw_from_weight(l.ks), raw_from_weight(l.kd)};
}

LightingParams lighting_params_backward(const LightingParams& params, const LightingGrad& grad)
{
    const double ts = std::tanh(params.ks_raw), td = std::tanh(params.kd_raw);
    return {grad.lx, grad.ly, grad.ks * 0.5 * (1.0 - ts * ts), grad.kd * 0.5 * (1.0 - td * td)};
}

Vec3 light_direction(double lx, double ly)
{
    return Vec3(lx, ly, 1.0) / std::sqrt(lx * lx + ly * ly + 1.0);
}

Image shade(const Image& albedo, const NormalMap& normals, const Lighting& light)
{
    if (!albedo.same_shape(normals))
        throw Error(ErrorCode::ShapeMismatch, "albedo and normal map differ in size");
    const Vec3 l = light_direction(light.lx, light.ly);
    Image out(albedo.width(), albedo.height());
    for (std::size_t i = 0; i < albedo.size(); ++i) {
        const double factor = light.ks + light.kd * std::max(0.0, l.dot(normals[i]));
        out[i] = factor * albedo[i];
    }
    return out;
}

void shade_backward(const Image& albedo, const NormalMap& normals, const Lighting& light, const Image& grad_image,
                    ShadeGrad& out)
{
    const double norm = std::sqrt(light.lx * light.lx + light.ly * light.ly + 1.0);
    const Vec3 l = Vec3(light.lx, light.ly, 1.0) / norm;
    Vec3 grad_l = Vec3::Zero();
    for (std::size_t i = 0; i < albedo.size(); ++i) {
        const Vec3& g = grad_image[i];
        if (g.isZero())
            continue;
        const double cosine = l.dot(normals[i]);
        const double lit = std::max(0.0, cosine);
        const double factor = light.ks + light.kd * lit;
        out.albedo[i] += factor * g;
        const double g_factor = g.dot(albedo[i]);
        out.light.ks += g_factor;
        out.light.kd += g_factor * lit;
        if (cosine > 0.0) {
            out.normals[i] += g_factor * light.kd * l;
            grad_l += g_factor * light.kd * normals[i];
        }
    }
    const Vec3 grad_w = (grad_l - l * l.dot(grad_l)) / norm;
    out.light.lx += grad_w.x();
    out.light.ly += grad_w.y();
}

double sigmoid(double raw)
{
    return 1.0 / (1.0 + std::exp(-raw));
}

double logit(double value)
{
    const double v = std::clamp(value, 1e-4, 1.0 - 1e-4);
    return std::log(v / (1.0 - v));
}

Image albedo_from_raw(const Image& raw)
{
    Image out(raw.width(), raw.height());
    for (std::size_t i = 0; i < raw.size(); ++i)
        out[i] = raw[i].unaryExpr([](double r) { return sigmoid(r); });
    return out;
}

Image raw_from_albedo(const Image& albedo)
{
    Image out(albedo.width(), albedo.height());
    for (std::size_t i = 0; i < albedo.size(); ++i)
        out[i] = albedo[i].unaryExpr([](double v) { return logit(v); });
    return out;
}

} // namespace photogeo
