#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <string>
#include <vector>

#include "ygi/error.hpp"

namespace ygi::nn {

// NCHW shape. Lower-rank data uses trailing 1s.
struct Shape {
    int n = 0, c = 0, h = 0, w = 0;

    size_t size() const { return static_cast<size_t>(n) * c * h * w; }
    size_t plane() const { return static_cast<size_t>(h) * w; }
    size_t sample() const { return static_cast<size_t>(c) * h * w; }
    bool operator==(const Shape&) const = default;
    std::string str() const {
        std::ostringstream os;
        os << "[" << n << "," << c << "," << h << "," << w << "]";
        return os.str();
    }
};

template <typename T>
struct Tensor {
    Shape shape;
    std::vector<T> data;
    std::vector<T> grad;  // empty until gradients are needed

    Tensor() = default;
    explicit Tensor(Shape s, T fill = T(0)) : shape(s), data(s.size(), fill) {}

    size_t size() const { return data.size(); }
    T* sample(int i) { return data.data() + i * shape.sample(); }
    const T* sample(int i) const { return data.data() + i * shape.sample(); }
    T& at(int i, int c, int y, int x) { return data[((static_cast<size_t>(i) * shape.c + c) * shape.h + y) * shape.w + x]; }
    T at(int i, int c, int y, int x) const {
        return data[((static_cast<size_t>(i) * shape.c + c) * shape.h + y) * shape.w + x];
    }

    void ensure_grad() {
        if (grad.size() != data.size()) grad.assign(data.size(), T(0));
    }
    void zero_grad() { std::fill(grad.begin(), grad.end(), T(0)); }

    bool all_finite() const {
        return std::all_of(data.begin(), data.end(), [](T v) { return std::isfinite(v); });
    }

    template <typename U>
    Tensor<U> cast() const {
        Tensor<U> out(shape);
        std::transform(data.begin(), data.end(), out.data.begin(), [](T v) { return static_cast<U>(v); });
        return out;
    }
};

template <typename T>
struct Parameter {
    std::string name;
    Tensor<T>* tensor = nullptr;
};

inline void require_shape(bool ok, const char* op, const Shape& got, const std::string& expected) {
    if (!ok) throw shape_error(std::string(op) + ": got " + got.str() + ", expected " + expected);
}

}  // namespace ygi::nn
