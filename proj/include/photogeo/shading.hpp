#pragma once

#include "photogeo/grid.hpp"

namespace photogeo {

/// Lambertian lighting: ambient weight ks, diffuse weight kd, direction (lx, ly, 1) normalised.
struct Lighting
{
    double lx = 0.0;
    double ly = 0.0;
    double ks = 1.0;
    double kd = 0.0;

    /// Front light, ambient only: the image equals the albedo.
    static Lighting canonical() { return {0.0, 0.0, 1.0, 0.0}; }

    friend bool operator==(const Lighting&, const Lighting&) = default;
};

/// Additive perturbation of a lighting, drawn when generating pseudo samples.
struct LightingOffset
{
    double dlx = 0.0;
    double dly = 0.0;
    double dkd = 0.0;
    double dks = 0.0;

    friend bool operator==(const LightingOffset&, const LightingOffset&) = default;
};

/// Adds the offset in value space and clamps ks, kd into [0, 1].
Lighting apply_offset(const Lighting& base, const LightingOffset& offset);

/// Unconstrained optimisation parameters; ks and kd go through 0.5 (1 + tanh(.)).
struct LightingParams
{
    double lx = 0.0;
    double ly = 0.0;
    double ks_raw = 0.0;
    double kd_raw = 0.0;

    static constexpr std::size_t size = 4;
    double& operator[](std::size_t i) { return *(&lx + i); }
    double operator[](std::size_t i) const { return *(&lx + i); }

    Lighting mapped() const;
    /// Weights are pulled into [1e-3, 1 - 1e-3] so the raw value stays finite.
    static LightingParams from_lighting(const Lighting& l);
};

/// Gradient with respect to the mapped lighting values.
struct LightingGrad
{
    double lx = 0.0, ly = 0.0, ks = 0.0, kd = 0.0;
};

LightingParams lighting_params_backward(const LightingParams& params, const LightingGrad& grad);

/// (lx, ly, 1) / sqrt(lx^2 + ly^2 + 1)
Vec3 light_direction(double lx, double ly);

/// J = (ks + kd max(0, <l, n>)) a, per channel. No clamping.
Image shade(const Image& albedo, const NormalMap& normals, const Lighting& light);

struct ShadeGrad
{
    Image albedo;
    NormalMap normals;
    LightingGrad light;
};

/// Reverse pass of shade. Accumulates into `out`, whose grids must already be sized.
void shade_backward(const Image& albedo, const NormalMap& normals, const Lighting& light, const Image& grad_image,
                    ShadeGrad& out);

/// Albedo channels live in [0, 1] through a logistic map.
double sigmoid(double raw);
double logit(double value);
Image albedo_from_raw(const Image& raw);
Image raw_from_albedo(const Image& albedo);

} // namespace photogeo
