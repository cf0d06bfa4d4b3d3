#pragma once

#include <algorithm>
#include <cmath>

#include "ygi/nn/tensor.hpp"

namespace ygi::nn {

inline constexpr double kBceClamp = 1e-7;

// L = -1/(2N) * sum[q log p + (1 - q) log(1 - p)] with N the element count and
// p clamped to [1e-7, 1 - 1e-7]. Writes dL/dp into *grad when given; clamped
// elements get zero gradient.
template <typename T>
T bce_loss(const Tensor<T>& prediction, const Tensor<T>& target, Tensor<T>* grad = nullptr) {
    require_shape(prediction.shape == target.shape, "bce_loss", prediction.shape, target.shape.str());
    const double count = static_cast<double>(prediction.size());
    const double lo = static_cast<T>(kBceClamp);
    const double hi = static_cast<T>(1.0 - kBceClamp);
    if (grad) *grad = Tensor<T>(prediction.shape);
    double sum = 0.0;
    for (size_t i = 0; i < prediction.size(); ++i) {
        const double raw = prediction.data[i];
        const double p = std::clamp(raw, lo, hi);
        const double q = target.data[i];
        sum += q * std::log(p) + (1.0 - q) * std::log(1.0 - p);
        if (grad) {
            const bool clamped = raw < lo || raw > hi;
            grad->data[i] = clamped ? T(0) : static_cast<T>(-(q / p - (1.0 - q) / (1.0 - p)) / (2.0 * count));
        }
    }
    return static_cast<T>(-sum / (2.0 * count));
}

}  // namespace ygi::nn
