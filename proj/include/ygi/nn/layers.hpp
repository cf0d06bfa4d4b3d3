#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "ygi/nn/tensor.hpp"
#include "ygi/random.hpp"

namespace ygi::nn {

enum class Mode { kTrain, kEval };

// A layer caches what its backward pass needs during forward. backward()
// returns dL/d(input) and accumulates into the .grad of its parameters, so one
// forward must precede each backward.
template <typename T>
class Layer {
public:
    virtual ~Layer() = default;
    virtual Tensor<T> forward(const Tensor<T>& input, Mode mode) = 0;
    virtual Tensor<T> backward(const Tensor<T>& grad_output) = 0;
    virtual Shape output_shape(const Shape& input) const = 0;
    virtual std::string describe() const = 0;
    virtual std::vector<Parameter<T>> parameters() { return {}; }
    // Non-trainable state that still belongs in a checkpoint.
    virtual std::vector<Parameter<T>> buffers() { return {}; }
};

// ---- convolution ----------------------------------------------------------

template <typename T>
class Conv2d final : public Layer<T> {
public:
    using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    using MatrixMap = Eigen::Map<Matrix>;
    using ConstMatrixMap = Eigen::Map<const Matrix>;

    Conv2d(int in_channels, int out_channels, int kernel, int stride = 1, int padding = 0)
        : weight(Shape{out_channels, in_channels, kernel, kernel}), bias(Shape{out_channels, 1, 1, 1}),
          in_c_(in_channels), out_c_(out_channels), k_(kernel), stride_(stride), pad_(padding) {
        if (in_channels < 1 || out_channels < 1 || kernel < 1 || stride < 1 || padding < 0) {
            throw argument_error("conv2d: invalid geometry");
        }
    }

    int in_channels() const { return in_c_; }
    int out_channels() const { return out_c_; }
    int kernel() const { return k_; }
    int stride() const { return stride_; }
    int padding() const { return pad_; }

    Shape output_shape(const Shape& in) const override {
        require_shape(in.c == in_c_, "conv2d", in, "channels " + std::to_string(in_c_));
        const int oh = (in.h + 2 * pad_ - k_) / stride_ + 1;
        const int ow = (in.w + 2 * pad_ - k_) / stride_ + 1;
        require_shape(in.h + 2 * pad_ >= k_ && in.w + 2 * pad_ >= k_ && oh >= 1 && ow >= 1, "conv2d", in,
                      "spatial size >= kernel");
        return {in.n, out_c_, oh, ow};
    }

    std::string describe() const override {
        return "conv" + std::to_string(k_) + "x" + std::to_string(k_) + " " + std::to_string(in_c_) + "->" +
               std::to_string(out_c_) + " s" + std::to_string(stride_) + " p" + std::to_string(pad_);
    }

    Tensor<T> forward(const Tensor<T>& input, Mode) override {
        const Shape os = output_shape(input.shape);
        input_ = input;
        input_.grad.clear();
        Tensor<T> out(os);
        const int K = in_c_ * k_ * k_;
        const int P = os.h * os.w;
        cols_.resize(static_cast<size_t>(K) * P);
        ConstMatrixMap w(weight.data.data(), out_c_, K);
        MatrixMap cols(cols_.data(), K, P);
        Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>> b(bias.data.data(), out_c_);
        for (int i = 0; i < input.shape.n; ++i) {
            im2col(input.sample(i), input.shape, os);
            MatrixMap y(out.sample(i), out_c_, P);
            y.noalias() = w * cols;
            y.colwise() += b;
        }
        return out;
    }

    Tensor<T> backward(const Tensor<T>& grad_output) override {
        const Shape is = input_.shape;
        const Shape os = output_shape(is);
        require_shape(grad_output.shape == os, "conv2d backward", grad_output.shape, os.str());
        weight.ensure_grad();
        bias.ensure_grad();
        const int K = in_c_ * k_ * k_;
        const int P = os.h * os.w;
        cols_.resize(static_cast<size_t>(K) * P);
        dcols_.resize(static_cast<size_t>(K) * P);
        ConstMatrixMap w(weight.data.data(), out_c_, K);
        MatrixMap dw(weight.grad.data(), out_c_, K);
        MatrixMap cols(cols_.data(), K, P);
        MatrixMap dcols(dcols_.data(), K, P);
        Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>> db(bias.grad.data(), out_c_);
        Tensor<T> grad_input(is);
        for (int i = 0; i < is.n; ++i) {
            im2col(input_.sample(i), is, os);
            ConstMatrixMap dy(grad_output.sample(i), out_c_, P);
            dw.noalias() += dy * cols.transpose();
            // plain loop: Eigen's vectorized sum peels by address, which breaks bitwise reproducibility
            for (int o = 0; o < out_c_; ++o) {
                const T* g = grad_output.sample(i) + static_cast<size_t>(o) * P;
                T acc = T(0);
                for (int k = 0; k < P; ++k) acc += g[k];
                db[o] += acc;
            }
            dcols.noalias() = w.transpose() * dy;
            col2im(grad_input.sample(i), is, os);
        }
        return grad_input;
    }

    std::vector<Parameter<T>> parameters() override { return {{"weight", &weight}, {"bias", &bias}}; }

    Tensor<T> weight;
    Tensor<T> bias;

private:
    // Output columns ox whose input column ox * stride - pad + kx lies inside the image.
    std::pair<int, int> valid_columns(int kx, int in_w, int out_w) const {
        const int first = pad_ - kx;
        const int lo = first <= 0 ? 0 : (first + stride_ - 1) / stride_;
        const int hi = std::min(out_w, (in_w + pad_ - kx + stride_ - 1) / stride_);
        return {std::min(lo, out_w), std::max(hi, std::min(lo, out_w))};
    }

    void im2col(const T* x, const Shape& is, const Shape& os) {
        T* dst = cols_.data();
        for (int c = 0; c < in_c_; ++c) {
            const T* plane = x + static_cast<size_t>(c) * is.plane();
            for (int ky = 0; ky < k_; ++ky) {
                for (int kx = 0; kx < k_; ++kx) {
                    for (int oy = 0; oy < os.h; ++oy) {
                        const int iy = oy * stride_ - pad_ + ky;
                        if (iy < 0 || iy >= is.h) {
                            std::fill(dst, dst + os.w, T(0));
                            dst += os.w;
                            continue;
                        }
                        const T* row = plane + static_cast<size_t>(iy) * is.w;
                        const int shift = kx - pad_;
                        const auto [lo, hi] = valid_columns(kx, is.w, os.w);
                        std::fill(dst, dst + lo, T(0));
                        if (stride_ == 1) {
                            if (hi > lo) std::copy(row + lo + shift, row + hi + shift, dst + lo);
                        } else {
                            for (int ox = lo; ox < hi; ++ox) dst[ox] = row[ox * stride_ + shift];
                        }
                        std::fill(dst + hi, dst + os.w, T(0));
                        dst += os.w;
                    }
                }
            }
        }
    }

    void col2im(T* dx, const Shape& is, const Shape& os) const {
        const T* src = dcols_.data();
        for (int c = 0; c < in_c_; ++c) {
            T* plane = dx + static_cast<size_t>(c) * is.plane();
            for (int ky = 0; ky < k_; ++ky) {
                for (int kx = 0; kx < k_; ++kx) {
                    for (int oy = 0; oy < os.h; ++oy) {
                        const int iy = oy * stride_ - pad_ + ky;
                        if (iy < 0 || iy >= is.h) {
                            src += os.w;
                            continue;
                        }
                        T* row = plane + static_cast<size_t>(iy) * is.w;
                        const int shift = kx - pad_;
                        const auto [lo, hi] = valid_columns(kx, is.w, os.w);
                        for (int ox = lo; ox < hi; ++ox) row[ox * stride_ + shift] += src[ox];
                        src += os.w;
                    }
                }
            }
        }
    }

    int in_c_, out_c_, k_, stride_, pad_;
    Tensor<T> input_;
    std::vector<T> cols_, dcols_;
};

// ---- batch normalization --------------------------------------------------

template <typename T>
class BatchNorm2d final : public Layer<T> {
public:
    explicit BatchNorm2d(int channels, double momentum = 0.1, double epsilon = 1e-5)
        : gamma(Shape{channels, 1, 1, 1}, T(1)), beta(Shape{channels, 1, 1, 1}, T(0)),
          running_mean(Shape{channels, 1, 1, 1}, T(0)), running_var(Shape{channels, 1, 1, 1}, T(1)),
          c_(channels), momentum_(momentum), eps_(epsilon) {}

    Shape output_shape(const Shape& in) const override {
        require_shape(in.c == c_, "batchnorm2d", in, "channels " + std::to_string(c_));
        return in;
    }
    std::string describe() const override { return "batchnorm " + std::to_string(c_); }

    Tensor<T> forward(const Tensor<T>& input, Mode mode) override {
        const Shape s = output_shape(input.shape);
        const size_t plane = s.plane();
        const double count = static_cast<double>(s.n) * plane;
        Tensor<T> out(s);
        training_ = mode == Mode::kTrain;
        if (training_) {
            if (count <= 1.0) throw shape_error("batchnorm2d: batch statistics need more than one value");
            normalized_ = Tensor<T>(s);
            inv_std_.assign(c_, 0.0);
        }
        for (int c = 0; c < c_; ++c) {
            double mean, var;
            if (training_) {
                double sum = 0.0;
                for (int i = 0; i < s.n; ++i) {
                    const T* p = input.sample(i) + c * plane;
                    for (size_t k = 0; k < plane; ++k) sum += p[k];
                }
                mean = sum / count;
                double sq = 0.0;
                for (int i = 0; i < s.n; ++i) {
                    const T* p = input.sample(i) + c * plane;
                    for (size_t k = 0; k < plane; ++k) sq += (p[k] - mean) * (p[k] - mean);
                }
                var = sq / count;
                running_mean.data[c] = static_cast<T>((1.0 - momentum_) * running_mean.data[c] + momentum_ * mean);
                running_var.data[c] = static_cast<T>((1.0 - momentum_) * running_var.data[c] +
                                                     momentum_ * var * count / (count - 1.0));
            } else {
                mean = running_mean.data[c];
                var = running_var.data[c];
            }
            const double inv = 1.0 / std::sqrt(var + eps_);
            if (training_) inv_std_[c] = inv;
            const double g = gamma.data[c], b = beta.data[c];
            for (int i = 0; i < s.n; ++i) {
                const T* p = input.sample(i) + c * plane;
                T* q = out.sample(i) + c * plane;
                T* xh = training_ ? normalized_.sample(i) + c * plane : nullptr;
                for (size_t k = 0; k < plane; ++k) {
                    const double n = (p[k] - mean) * inv;
                    if (xh) xh[k] = static_cast<T>(n);
                    q[k] = static_cast<T>(g * n + b);
                }
            }
        }
        return out;
    }

    Tensor<T> backward(const Tensor<T>& grad_output) override {
        if (!training_) throw argument_error("batchnorm2d: backward requires a training-mode forward");
        const Shape s = normalized_.shape;
        require_shape(grad_output.shape == s, "batchnorm2d backward", grad_output.shape, s.str());
        gamma.ensure_grad();
        beta.ensure_grad();
        const size_t plane = s.plane();
        const double count = static_cast<double>(s.n) * plane;
        Tensor<T> grad_input(s);
        for (int c = 0; c < c_; ++c) {
            double sum_dy = 0.0, sum_dy_xh = 0.0;
            for (int i = 0; i < s.n; ++i) {
                const T* dy = grad_output.sample(i) + c * plane;
                const T* xh = normalized_.sample(i) + c * plane;
                for (size_t k = 0; k < plane; ++k) {
                    sum_dy += dy[k];
                    sum_dy_xh += dy[k] * xh[k];
                }
            }
            gamma.grad[c] += static_cast<T>(sum_dy_xh);
            beta.grad[c] += static_cast<T>(sum_dy);
            const double scale = gamma.data[c] * inv_std_[c] / count;
            for (int i = 0; i < s.n; ++i) {
                const T* dy = grad_output.sample(i) + c * plane;
                const T* xh = normalized_.sample(i) + c * plane;
                T* dx = grad_input.sample(i) + c * plane;
                for (size_t k = 0; k < plane; ++k) {
                    dx[k] = static_cast<T>(scale * (count * dy[k] - sum_dy - xh[k] * sum_dy_xh));
                }
            }
        }
        return grad_input;
    }

    std::vector<Parameter<T>> parameters() override { return {{"gamma", &gamma}, {"beta", &beta}}; }
    std::vector<Parameter<T>> buffers() override {
        return {{"running_mean", &running_mean}, {"running_var", &running_var}};
    }

    int channels() const { return c_; }

    Tensor<T> gamma, beta, running_mean, running_var;

private:
    int c_;
    double momentum_, eps_;
    bool training_ = false;
    Tensor<T> normalized_;
    std::vector<double> inv_std_;
};

// ---- pooling / resampling -------------------------------------------------

// 2x2 max pooling, stride 2; odd trailing rows/columns are dropped. Ties go
// to the first element in row-major window order.
template <typename T>
class MaxPool2 final : public Layer<T> {
public:
    Shape output_shape(const Shape& in) const override {
        require_shape(in.h >= 2 && in.w >= 2, "maxpool2", in, "H, W >= 2");
        return {in.n, in.c, in.h / 2, in.w / 2};
    }
    std::string describe() const override { return "maxpool2"; }

    Tensor<T> forward(const Tensor<T>& input, Mode) override {
        const Shape os = output_shape(input.shape);
        in_shape_ = input.shape;
        Tensor<T> out(os);
        argmax_.resize(os.size());
        size_t o = 0;
        for (int i = 0; i < os.n; ++i) {
            for (int c = 0; c < os.c; ++c) {
                const size_t base = (static_cast<size_t>(i) * in_shape_.c + c) * in_shape_.plane();
                for (int y = 0; y < os.h; ++y) {
                    for (int x = 0; x < os.w; ++x, ++o) {
                        size_t best = base + static_cast<size_t>(2 * y) * in_shape_.w + 2 * x;
                        for (int dy = 0; dy < 2; ++dy) {
                            for (int dx = 0; dx < 2; ++dx) {
                                const size_t idx = base + static_cast<size_t>(2 * y + dy) * in_shape_.w + 2 * x + dx;
                                if (input.data[idx] > input.data[best]) best = idx;
                            }
                        }
                        argmax_[o] = best;
                        out.data[o] = input.data[best];
                    }
                }
            }
        }
        return out;
    }

    Tensor<T> backward(const Tensor<T>& grad_output) override {
        require_shape(grad_output.size() == argmax_.size(), "maxpool2 backward", grad_output.shape, "pooled shape");
        Tensor<T> grad_input(in_shape_);
        for (size_t o = 0; o < argmax_.size(); ++o) grad_input.data[argmax_[o]] += grad_output.data[o];
        return grad_input;
    }

private:
    Shape in_shape_;
    std::vector<size_t> argmax_;
};

// Nearest-neighbour x2 upsampling.
template <typename T>
class Upsample2 final : public Layer<T> {
public:
    Shape output_shape(const Shape& in) const override { return {in.n, in.c, in.h * 2, in.w * 2}; }
    std::string describe() const override { return "upsample2"; }

    Tensor<T> forward(const Tensor<T>& input, Mode) override {
        in_shape_ = input.shape;
        const Shape os = output_shape(in_shape_);
        Tensor<T> out(os);
        for (int p = 0; p < in_shape_.n * in_shape_.c; ++p) {
            const T* src = input.data.data() + p * in_shape_.plane();
            T* dst = out.data.data() + p * os.plane();
            for (int y = 0; y < os.h; ++y) {
                for (int x = 0; x < os.w; ++x) dst[y * os.w + x] = src[(y / 2) * in_shape_.w + x / 2];
            }
        }
        return out;
    }

    Tensor<T> backward(const Tensor<T>& grad_output) override {
        const Shape os = output_shape(in_shape_);
        require_shape(grad_output.shape == os, "upsample2 backward", grad_output.shape, os.str());
        Tensor<T> grad_input(in_shape_);
        for (int p = 0; p < in_shape_.n * in_shape_.c; ++p) {
            const T* src = grad_output.data.data() + p * os.plane();
            T* dst = grad_input.data.data() + p * in_shape_.plane();
            for (int y = 0; y < os.h; ++y) {
                for (int x = 0; x < os.w; ++x) dst[(y / 2) * in_shape_.w + x / 2] += src[y * os.w + x];
            }
        }
        return grad_input;
    }

private:
    Shape in_shape_;
};

// ---- stochastic / pointwise ----------------------------------------------

// Inverted dropout: survivors are scaled by 1 / (1 - rate) so evaluation is
// the identity. The mask is drawn from `seed` at each training forward.
template <typename T>
class Dropout final : public Layer<T> {
public:
    explicit Dropout(double rate) : rate_(rate) {
        if (!(rate >= 0.0 && rate < 1.0)) throw argument_error("dropout: rate must be in [0, 1)");
    }

    void set_seed(std::uint64_t seed) { seed_ = seed; }
    double rate() const { return rate_; }

    Shape output_shape(const Shape& in) const override { return in; }
    std::string describe() const override { return "dropout " + std::to_string(rate_); }

    Tensor<T> forward(const Tensor<T>& input, Mode mode) override {
        active_ = mode == Mode::kTrain && rate_ > 0.0;
        if (!active_) return input;
        std::mt19937_64 rng(seed_);
        const T scale = static_cast<T>(1.0 / (1.0 - rate_));
        mask_.resize(input.size());
        Tensor<T> out(input.shape);
        for (size_t i = 0; i < input.size(); ++i) {
            const double u = unit_interval(rng());
            mask_[i] = u < rate_ ? T(0) : scale;
            out.data[i] = input.data[i] * mask_[i];
        }
        return out;
    }

    Tensor<T> backward(const Tensor<T>& grad_output) override {
        if (!active_) return grad_output;
        Tensor<T> grad_input(grad_output.shape);
        for (size_t i = 0; i < grad_output.size(); ++i) grad_input.data[i] = grad_output.data[i] * mask_[i];
        return grad_input;
    }

private:
    double rate_;
    std::uint64_t seed_ = 0;
    bool active_ = false;
    std::vector<T> mask_;
};

// max(0, x); the subgradient at exactly 0 is 0.
template <typename T>
class ReLU final : public Layer<T> {
public:
    Shape output_shape(const Shape& in) const override { return in; }
    std::string describe() const override { return "relu"; }

    Tensor<T> forward(const Tensor<T>& input, Mode) override {
        Tensor<T> out(input.shape);
        for (size_t i = 0; i < input.size(); ++i) out.data[i] = input.data[i] > T(0) ? input.data[i] : T(0);
        output_ = out.data;
        return out;
    }

    Tensor<T> backward(const Tensor<T>& grad_output) override {
        Tensor<T> grad_input(grad_output.shape);
        for (size_t i = 0; i < grad_output.size(); ++i) {
            grad_input.data[i] = output_[i] > T(0) ? grad_output.data[i] : T(0);
        }
        return grad_input;
    }

private:
    std::vector<T> output_;
};

// Logistic function, kept strictly inside (0, 1) even where it would round to an endpoint.
template <typename T>
class Sigmoid final : public Layer<T> {
public:
    Shape output_shape(const Shape& in) const override { return in; }
    std::string describe() const override { return "sigmoid"; }

    static T apply(T x) {
        const T y = x >= T(0) ? T(1) / (T(1) + std::exp(-x)) : std::exp(x) / (T(1) + std::exp(x));
        return std::clamp(y, std::numeric_limits<T>::min(), std::nextafter(T(1), T(0)));
    }

    Tensor<T> forward(const Tensor<T>& input, Mode) override {
        Tensor<T> out(input.shape);
        for (size_t i = 0; i < input.size(); ++i) out.data[i] = apply(input.data[i]);
        output_ = out.data;
        return out;
    }

    Tensor<T> backward(const Tensor<T>& grad_output) override {
        Tensor<T> grad_input(grad_output.shape);
        for (size_t i = 0; i < grad_output.size(); ++i) {
            grad_input.data[i] = grad_output.data[i] * output_[i] * (T(1) - output_[i]);
        }
        return grad_input;
    }

private:
    std::vector<T> output_;
};

// ---- container ------------------------------------------------------------

template <typename T>
class Sequential {
public:
    template <typename L, typename... Args>
    L& add(std::string name, Args&&... args) {
        auto layer = std::make_unique<L>(std::forward<Args>(args)...);
        L& ref = *layer;
        layers_.push_back({std::move(name), std::move(layer)});
        return ref;
    }

    Tensor<T> forward(const Tensor<T>& input, Mode mode) {
        Tensor<T> x = input;
        for (auto& [name, layer] : layers_) x = layer->forward(x, mode);
        return x;
    }

    Tensor<T> backward(const Tensor<T>& grad_output) {
        Tensor<T> g = grad_output;
        for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = it->second->backward(g);
        return g;
    }

    std::vector<Parameter<T>> parameters(const std::string& prefix) {
        return collect(prefix, [](Layer<T>& l) { return l.parameters(); });
    }
    std::vector<Parameter<T>> buffers(const std::string& prefix) {
        return collect(prefix, [](Layer<T>& l) { return l.buffers(); });
    }

    size_t size() const { return layers_.size(); }
    Layer<T>& layer(size_t i) { return *layers_[i].second; }
    const std::string& name(size_t i) const { return layers_[i].first; }

private:
    template <typename F>
    std::vector<Parameter<T>> collect(const std::string& prefix, F&& get) {
        std::vector<Parameter<T>> out;
        for (auto& [name, layer] : layers_) {
            for (auto p : get(*layer)) out.push_back({prefix + name + "." + p.name, p.tensor});
        }
        return out;
    }

    std::vector<std::pair<std::string, std::unique_ptr<Layer<T>>>> layers_;
};

}  // namespace ygi::nn
