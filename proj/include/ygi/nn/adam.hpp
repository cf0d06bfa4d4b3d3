#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "ygi/nn/tensor.hpp"

namespace ygi::nn {

struct AdamConfig {
    double lr = 0.002;
    double beta1 = 0.9;
    double beta2 = 0.99;
    double epsilon = 1e-8;
};

template <typename T>
struct AdamState {
    AdamConfig config;
    std::int64_t step_count = 0;
    std::vector<std::vector<T>> first_moment;
    std::vector<std::vector<T>> second_moment;
};

// Bias-corrected Adam. Moments are created on the first call and must keep
// matching the parameter list afterwards.
template <typename T>
void adam_step(std::span<const Parameter<T>> params, AdamState<T>& state) {
    const AdamConfig& cfg = state.config;
    if (!(cfg.beta1 >= 0.0 && cfg.beta1 < 1.0 && cfg.beta2 >= 0.0 && cfg.beta2 < 1.0)) {
        throw argument_error("adam: betas must be in [0, 1)");
    }
    if (state.first_moment.empty()) {
        for (const auto& p : params) {
            state.first_moment.emplace_back(p.tensor->size(), T(0));
            state.second_moment.emplace_back(p.tensor->size(), T(0));
        }
    }
    if (state.first_moment.size() != params.size()) throw shape_error("adam: parameter list changed");
    ++state.step_count;
    const double t = static_cast<double>(state.step_count);
    const double c1 = 1.0 - std::pow(cfg.beta1, t);
    const double c2 = 1.0 - std::pow(cfg.beta2, t);
    for (size_t k = 0; k < params.size(); ++k) {
        Tensor<T>& p = *params[k].tensor;
        if (p.grad.size() != p.size()) continue;  // never touched by backward
        auto& m = state.first_moment[k];
        auto& v = state.second_moment[k];
        if (m.size() != p.size()) throw shape_error("adam: moment shape mismatch for " + params[k].name);
        for (size_t i = 0; i < p.size(); ++i) {
            const double g = p.grad[i];
            const double mi = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
            const double vi = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
            m[i] = static_cast<T>(mi);
            v[i] = static_cast<T>(vi);
            p.data[i] = static_cast<T>(p.data[i] - cfg.lr * (mi / c1) / (std::sqrt(vi / c2) + cfg.epsilon));
        }
    }
}

}  // namespace ygi::nn
