#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "ygi/dataset.hpp"
#include "ygi/nn/adam.hpp"
#include "ygi/nn/layers.hpp"
#include "ygi/nn/loss.hpp"
#include "ygi/optics.hpp"

namespace ygi {

// Channel plan and geometry of the two-encoder / one-decoder network.
struct YNetConfig {
    std::vector<int> encoder_channels{8, 16, 32, 64, 64};
    std::vector<int> decoder_channels{64, 32, 16, 8, 8, 8, 8, 8, 8, 1};
    double dropout_rate = 0.6;
    int input_n = 64;
    int output_n = 28;
    int final_padding = 3;
    // Diagnostic only: both branches run through the reference encoder.
    bool shared_encoders = false;

    static YNetConfig full_width();
    static YNetConfig desk() { return {}; }

    void validate() const;
    bool operator==(const YNetConfig&) const = default;
};

struct LayerGeometry {
    std::string stage;
    std::string layer;
    int channels = 0;
    int size = 0;
};

// Spatial trace of one branch through encoder and decoder. Never throws on a
// non-closing geometry; build_geometry() does.
std::vector<LayerGeometry> geometry_table(const YNetConfig& config);
std::string format_geometry(const std::vector<LayerGeometry>& table);
// geometry_table() plus the closure check against output_n.
std::vector<LayerGeometry> build_geometry(const YNetConfig& config);

std::uint64_t architecture_fingerprint(const YNetConfig& config);
// Trainable parameter count derived from the channel plan alone.
size_t parameter_count(const YNetConfig& config);

template <typename T>
class YNet {
public:
    YNet(const YNetConfig& config, std::uint64_t seed);
    YNet(const YNet&) = delete;
    YNet& operator=(const YNet&) = delete;

    // reference, test: [N, 1, input_n, input_n], already normalized to [0, 1].
    // Returns [N, 1, output_n, output_n] in (0, 1).
    nn::Tensor<T> forward(const nn::Tensor<T>& reference, const nn::Tensor<T>& test, nn::Mode mode,
                          std::uint64_t dropout_seed = 0);
    // Accumulates parameter gradients for the last forward.
    void backward(const nn::Tensor<T>& grad_output);

    std::vector<nn::Parameter<T>> parameters();
    std::vector<nn::Parameter<T>> buffers();
    void zero_grad();

    // Reference-branch features minus test-branch features from the last forward.
    const nn::Tensor<T>& latent() const { return latent_; }
    const YNetConfig& config() const { return config_; }
    std::uint64_t fingerprint() const { return architecture_fingerprint(config_); }

    // Copies every parameter and buffer value from a model of the same config.
    template <typename U>
    void copy_from(YNet<U>& other);

private:
    YNetConfig config_;
    nn::Sequential<T> encoder_ref_;
    nn::Sequential<T> encoder_test_;
    nn::Sequential<T> decoder_;
    nn::Dropout<T>* dropout_ = nullptr;
    nn::Tensor<T> latent_;
};

extern template class YNet<float>;
extern template class YNet<double>;

using Model = YNet<float>;

// ---- data -----------------------------------------------------------------

// Normalized network inputs and targets for a set of records.
struct TrainingSet {
    nn::Tensor<float> reference;
    nn::Tensor<float> test;
    nn::Tensor<float> target;
    std::vector<std::int64_t> sample_ids;

    int size() const { return reference.shape.n; }
};

TrainingSet prepare_training_set(const std::vector<DatasetRecord>& records);

// Single-pair inference in evaluation mode. Raw detector intensities are
// min-max normalized first.
SampleImage predict(Model& model, const IntensityImage& reference, const IntensityImage& test);

struct Evaluation {
    double loss = 0.0;
    double mean_ssim = 0.0;
    double mean_psnr = 0.0;  // infinite PSNRs are excluded
    std::vector<SampleImage> outputs;
};

Evaluation evaluate(Model& model, const TrainingSet& set, int batch_size = 64, bool keep_outputs = false);

// ---- training -------------------------------------------------------------

struct TrainOptions {
    int epochs = 40;
    int batch_size = 32;
    nn::AdamConfig adam;
    std::uint64_t seed = 1;
};

struct EpochStats {
    int epoch = 0;
    double train_loss = 0.0;
    double val_loss = 0.0;
    double val_ssim = 0.0;
    double val_psnr = 0.0;
    double seconds = 0.0;
};

struct TrainReport {
    std::vector<EpochStats> epochs;
    double wall_seconds = 0.0;
    std::uint64_t seed = 0;
    int best_epoch = -1;
    double best_val_ssim = 0.0;

    void write_csv(const std::filesystem::path& path) const;
};

// Everything needed to continue a run where it stopped.
struct TrainState {
    nn::AdamState<float> adam;
    int epochs_done = 0;
    std::uint64_t seed = 0;
    int best_epoch = -1;
    double best_val_ssim = 0.0;
};

using EpochCallback = std::function<void(const EpochStats&, Model&, const TrainState&, bool improved)>;

// Mini-batch Adam on the averaged binary cross-entropy. Shuffling and dropout
// masks are derived from (seed, epoch) and (seed, step), so a run resumed from
// `state` reproduces the uninterrupted loss curve. The callback fires after
// every epoch; `improved` marks a new best validation SSIM.
TrainReport train(Model& model, const TrainingSet& train_set, const TrainingSet& validation,
                  const TrainOptions& options, TrainState& state, const EpochCallback& on_epoch = {});

// ---- checkpoints ----------------------------------------------------------

inline constexpr char kCheckpointMagic[4] = {'Y', 'N', 'C', '1'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(Model& model, const std::filesystem::path& path, const TrainState* state = nullptr);
// Restores the model; fills *state when the file carries optimizer state
// (otherwise *state is left untouched and has_state is false).
std::unique_ptr<Model> load_checkpoint(const std::filesystem::path& path, TrainState* state = nullptr,
                                       bool* has_state = nullptr);

// ---- experiments ----------------------------------------------------------

struct StabilityResult {
    std::vector<SpecklePair> inputs;
    std::vector<SampleImage> outputs;
    std::vector<double> ssim_matrix;  // repetitions^2, row-major
    std::vector<double> target_ssim;  // output vs sample
    double mean_offdiagonal_ssim = 0.0;
};

// Runs `repetitions` fresh dynamic illuminations of one sample through the model.
StabilityResult stability_experiment(Model& model, const SampleImage& sample, std::int64_t sample_id,
                                     const OpticalConfig& optics, int repetitions, std::uint64_t base_seed);

}  // namespace ygi

#include "ygi/ynet_impl.hpp"
