#include "photogeo/optimizer.hpp"

#include "photogeo/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace photogeo {

OptimizerKind optimizer_kind_from_string(std::string_view name)
{
    if (name == "adam")
        return OptimizerKind::Adam;
    if (name == "momentum")
        return OptimizerKind::Momentum;
    throw Error(ErrorCode::InvalidArgument, "unknown optimizer '" + std::string(name) + "'");
}

std::string_view to_string(OptimizerKind kind)
{
    return kind == OptimizerKind::Adam ? "adam" : "momentum";
}

Optimizer::Optimizer(OptimizerKind kind, double learning_rate) : kind_(kind), lr_(learning_rate) {}

void Optimizer::reset()
{
    t_ = 0;
    m_.clear();
    v_.clear();
}

void Optimizer::step(std::span<double> params, std::span<const double> grads)
{
    if (params.size() != grads.size())
        throw Error(ErrorCode::ShapeMismatch, "parameter and gradient sizes differ");
    if (m_.size() != params.size()) {
        m_.assign(params.size(), 0.0);
        v_.assign(params.size(), 0.0);
        t_ = 0;
    }
    ++t_;
    if (kind_ == OptimizerKind::Momentum) {
        for (std::size_t i = 0; i < params.size(); ++i) {
            m_[i] = beta1_ * m_[i] + grads[i];
            params[i] -= lr_ * scale_ * m_[i];
        }
        return;
    }
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grads[i];
        v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grads[i] * grads[i];
        params[i] -= lr_ * scale_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps_);
    }
}

double lr_schedule(int it, int total, double floor, int warmup)
{
    const double ramp = warmup > 0 ? std::min(1.0, (it + 1.0) / warmup) : 1.0;
    if (total <= 0)
        return ramp;
    const double t = std::clamp(static_cast<double>(it) / total, 0.0, 1.0);
    return ramp * (floor + (1.0 - floor) * 0.5 * (1.0 + std::cos(std::numbers::pi * t)));
}

} // namespace photogeo
