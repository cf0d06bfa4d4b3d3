#pragma once

// Template definitions for YNet; included from ynet.hpp only.

#include <cmath>
#include <random>

#include "ygi/random.hpp"

namespace ygi {
namespace detail {

constexpr int kKernel = 4;
constexpr int kPoolStages = 4;

template <typename T>
void build_encoder(const YNetConfig& cfg, nn::Sequential<T>& seq) {
    const auto& ch = cfg.encoder_channels;
    seq.template add<nn::BatchNorm2d<T>>("bn0", 1);
    seq.template add<nn::Conv2d<T>>("conv1", 1, ch[0], kKernel, 1, 1);
    seq.template add<nn::ReLU<T>>("relu1");
    for (int s = 1; s <= kPoolStages; ++s) {
        const std::string id = std::to_string(s + 1);
        seq.template add<nn::Conv2d<T>>("conv" + id, ch[s - 1], ch[s], kKernel, 1, 1);
        seq.template add<nn::ReLU<T>>("relu" + id);
        seq.template add<nn::MaxPool2<T>>("pool" + id);
    }
}

template <typename T>
nn::Dropout<T>* build_decoder(const YNetConfig& cfg, nn::Sequential<T>& seq) {
    const auto& ch = cfg.decoder_channels;
    int in = cfg.encoder_channels.back();
    int k = 0;
    auto conv = [&](int stride, int pad) {
        const std::string id = std::to_string(k + 1);
        seq.template add<nn::Conv2d<T>>("conv" + id, in, ch[k], kKernel, stride, pad);
        in = ch[k++];
        return id;
    };
    for (int s = 0; s < kPoolStages; ++s) {
        seq.template add<nn::Upsample2<T>>("up" + std::to_string(s + 1));
        seq.template add<nn::ReLU<T>>("relu" + conv(1, 1));
    }
    auto& dropout = seq.template add<nn::Dropout<T>>("dropout", cfg.dropout_rate);
    seq.template add<nn::ReLU<T>>("relu" + conv(1, 1));
    seq.template add<nn::ReLU<T>>("relu" + conv(2, 1));
    for (int s = 0; s < 3; ++s) seq.template add<nn::ReLU<T>>("relu" + conv(1, cfg.final_padding));
    conv(1, cfg.final_padding);
    seq.template add<nn::Sigmoid<T>>("sigmoid");
    return &dropout;
}

// He-uniform weights with bound sqrt(6 / fan_in), zero biases.
template <typename T>
void initialize(nn::Sequential<T>& seq, std::mt19937_64& rng) {
    for (size_t i = 0; i < seq.size(); ++i) {
        auto* conv = dynamic_cast<nn::Conv2d<T>*>(&seq.layer(i));
        if (!conv) continue;
        const double bound = std::sqrt(6.0 / (conv->in_channels() * conv->kernel() * conv->kernel()));
        for (T& w : conv->weight.data) w = static_cast<T>(bound * (2.0 * unit_interval(rng()) - 1.0));
        std::fill(conv->bias.data.begin(), conv->bias.data.end(), T(0));
    }
}

template <typename T>
nn::Tensor<T> concat_batch(const nn::Tensor<T>& a, const nn::Tensor<T>& b) {
    nn::Tensor<T> out(nn::Shape{a.shape.n + b.shape.n, a.shape.c, a.shape.h, a.shape.w});
    std::copy(a.data.begin(), a.data.end(), out.data.begin());
    std::copy(b.data.begin(), b.data.end(), out.data.begin() + static_cast<std::ptrdiff_t>(a.size()));
    return out;
}

}  // namespace detail

template <typename T>
YNet<T>::YNet(const YNetConfig& config, std::uint64_t seed) : config_(config) {
    build_geometry(config_);
    detail::build_encoder(config_, encoder_ref_);
    detail::build_encoder(config_, encoder_test_);
    dropout_ = detail::build_decoder(config_, decoder_);
    std::mt19937_64 rng(splitmix64(seed));
    detail::initialize(encoder_ref_, rng);
    detail::initialize(encoder_test_, rng);
    detail::initialize(decoder_, rng);
}

template <typename T>
nn::Tensor<T> YNet<T>::forward(const nn::Tensor<T>& reference, const nn::Tensor<T>& test, nn::Mode mode,
                               std::uint64_t dropout_seed) {
    const int n = config_.input_n;
    nn::require_shape(reference.shape.c == 1 && reference.shape.h == n && reference.shape.w == n, "ynet reference",
                      reference.shape, "[N,1," + std::to_string(n) + "," + std::to_string(n) + "]");
    nn::require_shape(test.shape == reference.shape, "ynet test", test.shape, reference.shape.str());
    nn::Tensor<T> ref_features, test_features;
    if (config_.shared_encoders) {
        nn::Tensor<T> both = encoder_ref_.forward(detail::concat_batch(reference, test), mode);
        const size_t half = both.size() / 2;
        nn::Shape s = both.shape;
        s.n /= 2;
        ref_features = nn::Tensor<T>(s);
        test_features = nn::Tensor<T>(s);
        std::copy(both.data.begin(), both.data.begin() + half, ref_features.data.begin());
        std::copy(both.data.begin() + half, both.data.end(), test_features.data.begin());
    } else {
        ref_features = encoder_ref_.forward(reference, mode);
        test_features = encoder_test_.forward(test, mode);
    }
    latent_ = std::move(ref_features);
    for (size_t i = 0; i < latent_.size(); ++i) latent_.data[i] -= test_features.data[i];
    dropout_->set_seed(dropout_seed);
    return decoder_.forward(latent_, mode);
}

template <typename T>
void YNet<T>::backward(const nn::Tensor<T>& grad_output) {
    nn::Tensor<T> g = decoder_.backward(grad_output);
    nn::Tensor<T> neg = g;
    for (T& v : neg.data) v = -v;
    if (config_.shared_encoders) {
        encoder_ref_.backward(detail::concat_batch(g, neg));
    } else {
        encoder_ref_.backward(g);
        encoder_test_.backward(neg);
    }
}

template <typename T>
std::vector<nn::Parameter<T>> YNet<T>::parameters() {
    auto out = encoder_ref_.parameters("encoder_ref.");
    auto test = encoder_test_.parameters("encoder_test.");
    auto dec = decoder_.parameters("decoder.");
    out.insert(out.end(), test.begin(), test.end());
    out.insert(out.end(), dec.begin(), dec.end());
    return out;
}

template <typename T>
std::vector<nn::Parameter<T>> YNet<T>::buffers() {
    auto out = encoder_ref_.buffers("encoder_ref.");
    auto test = encoder_test_.buffers("encoder_test.");
    out.insert(out.end(), test.begin(), test.end());
    return out;
}

template <typename T>
void YNet<T>::zero_grad() {
    for (auto& p : parameters()) p.tensor->zero_grad();
}

template <typename T>
template <typename U>
void YNet<T>::copy_from(YNet<U>& other) {
    if (!(other.config() == config_)) throw shape_error("ynet: copy between different configurations");
    auto copy = [](auto dst, auto src) {
        for (size_t i = 0; i < dst.size(); ++i) {
            auto& d = *dst[i].tensor;
            const auto& s = *src[i].tensor;
            std::transform(s.data.begin(), s.data.end(), d.data.begin(), [](U v) { return static_cast<T>(v); });
        }
    };
    copy(parameters(), other.parameters());
    copy(buffers(), other.buffers());
}

}  // namespace ygi
