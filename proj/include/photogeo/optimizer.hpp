#pragma once

#include <span>
#include <string_view>
#include <vector>

namespace photogeo {

enum class OptimizerKind { Adam, Momentum };

OptimizerKind optimizer_kind_from_string(std::string_view name);
std::string_view to_string(OptimizerKind kind);

/// First-order update rule over one flat parameter group. State is sized on the first
/// step and persists across steps.
class Optimizer
{
public:
    Optimizer(OptimizerKind kind, double learning_rate);

    void step(std::span<double> params, std::span<const double> grads);
    void reset();

    double learning_rate() const noexcept { return lr_; }
    void set_learning_rate(double lr) noexcept { lr_ = lr; }
    /// Multiplier applied on top of the learning rate, for schedules.
    void set_scale(double scale) noexcept { scale_ = scale; }

private:
    OptimizerKind kind_;
    double lr_;
    double scale_ = 1.0;
    double beta1_ = 0.9;
    double beta2_ = 0.999;
    double eps_ = 1e-8;
    long t_ = 0;
    std::vector<double> m_;
    std::vector<double> v_;
};

/// Linear warmup over the first `warmup` iterations, then cosine decay to `floor` at `it = total`.
double lr_schedule(int it, int total, double floor, int warmup);

} // namespace photogeo
