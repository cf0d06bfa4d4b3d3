#include "ygi/ynet.hpp"

#include <chrono>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "binary_io.hpp"
#include "ygi/metrics.hpp"

namespace ygi {

template class YNet<float>;
template class YNet<double>;

namespace {

constexpr std::uint64_t kShuffleTag = 0x53485546464c4500ULL;
constexpr std::uint64_t kDropoutTag = 0x44524f504f555400ULL;

std::string join(const std::vector<int>& v) {
    std::ostringstream os;
    for (size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
    return os.str();
}

double output_pitch(const YNetConfig& cfg) { return kSampleExtent / cfg.output_n; }

template <typename T>
void walk(const std::string& stage, nn::Sequential<T>& seq, nn::Shape& shape, std::vector<LayerGeometry>& out,
          bool& broken) {
    for (size_t i = 0; i < seq.size() && !broken; ++i) {
        try {
            shape = seq.layer(i).output_shape(shape);
            out.push_back({stage, seq.name(i) + " (" + seq.layer(i).describe() + ")", shape.c, shape.h});
        } catch (const Error&) {
            out.push_back({stage, seq.name(i) + " (" + seq.layer(i).describe() + ")", 0, -1});
            broken = true;
        }
    }
}

}  // namespace

// ---- configuration --------------------------------------------------------

YNetConfig YNetConfig::full_width() {
    YNetConfig c;
    c.encoder_channels = {16, 32, 64, 128, 128};
    c.decoder_channels = {128, 64, 32, 16, 16, 16, 16, 16, 16, 1};
    return c;
}

void YNetConfig::validate() const {
    if (encoder_channels.size() != 5) throw config_error("ynet: encoder needs 5 channel counts");
    if (decoder_channels.size() != 10) throw config_error("ynet: decoder needs 10 channel counts");
    for (int c : encoder_channels) {
        if (c < 1) throw config_error("ynet: channel counts must be positive");
    }
    for (int c : decoder_channels) {
        if (c < 1) throw config_error("ynet: channel counts must be positive");
    }
    if (decoder_channels.back() != 1) throw config_error("ynet: decoder must end with one channel");
    if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw config_error("ynet: dropout rate must be in [0, 1)");
    if (input_n < 1 || output_n < 1 || final_padding < 0) throw config_error("ynet: invalid input/output size");
}

std::vector<LayerGeometry> geometry_table(const YNetConfig& config) {
    config.validate();
    nn::Sequential<float> encoder, decoder;
    detail::build_encoder(config, encoder);
    detail::build_decoder(config, decoder);
    std::vector<LayerGeometry> table{{"input", "speckle", 1, config.input_n}};
    nn::Shape shape{1, 1, config.input_n, config.input_n};
    bool broken = false;
    walk("encoder", encoder, shape, table, broken);
    if (broken) return table;
    table.push_back({"merge", "reference - test", shape.c, shape.h});
    walk("decoder", decoder, shape, table, broken);
    return table;
}

std::string format_geometry(const std::vector<LayerGeometry>& table) {
    std::ostringstream os;
    os << std::left << std::setw(9) << "stage" << std::setw(34) << "layer" << std::right << std::setw(9)
       << "channels" << std::setw(6) << "size" << "\n";
    for (const auto& g : table) {
        os << std::left << std::setw(9) << g.stage << std::setw(34) << g.layer << std::right << std::setw(9)
           << g.channels << std::setw(6);
        if (g.size < 0) {
            os << "FAIL";
        } else {
            os << g.size;
        }
        os << "\n";
    }
    return os.str();
}

std::vector<LayerGeometry> build_geometry(const YNetConfig& config) {
    auto table = geometry_table(config);
    const auto& last = table.back();
    if (last.size != config.output_n || last.channels != 1) {
        throw config_error("ynet: layer geometry does not produce a " + std::to_string(config.output_n) + "x" +
                           std::to_string(config.output_n) + " output\n" + format_geometry(table));
    }
    return table;
}

std::uint64_t architecture_fingerprint(const YNetConfig& config) {
    std::ostringstream os;
    os << "enc:" << join(config.encoder_channels) << ";dec:" << join(config.decoder_channels)
       << ";drop:" << std::setprecision(17) << config.dropout_rate << ";in:" << config.input_n
       << ";out:" << config.output_n << ";pad:" << config.final_padding << ";shared:" << config.shared_encoders;
    const std::string s = os.str();
    return binary::fnv1a({reinterpret_cast<const unsigned char*>(s.data()), s.size()});
}

size_t parameter_count(const YNetConfig& config) {
    config.validate();
    const size_t kk = static_cast<size_t>(detail::kKernel) * detail::kKernel;
    size_t encoder = 2;  // input batch norm
    int in = 1;
    for (int c : config.encoder_channels) {
        encoder += in * kk * c + c;
        in = c;
    }
    size_t decoder = 0;
    for (int c : config.decoder_channels) {
        decoder += in * kk * c + c;
        in = c;
    }
    return 2 * encoder + decoder;
}

// ---- data -----------------------------------------------------------------

TrainingSet prepare_training_set(const std::vector<DatasetRecord>& records) {
    TrainingSet set;
    if (records.empty()) return set;
    const int dn = records.front().reference.n;
    const int tn = records.front().target.n;
    const int count = static_cast<int>(records.size());
    set.reference = nn::Tensor<float>({count, 1, dn, dn});
    set.test = nn::Tensor<float>({count, 1, dn, dn});
    set.target = nn::Tensor<float>({count, 1, tn, tn});
    set.sample_ids.reserve(records.size());
    for (int i = 0; i < count; ++i) {
        const auto& r = records[i];
        if (r.reference.n != dn || r.test.n != dn || r.target.n != tn) {
            throw shape_error("training set: record " + std::to_string(i) + " has a different geometry");
        }
        const RealImage ref = normalize_speckle(r.reference);
        const RealImage test = normalize_speckle(r.test);
        std::transform(ref.values.begin(), ref.values.end(), set.reference.sample(i),
                       [](double v) { return static_cast<float>(v); });
        std::transform(test.values.begin(), test.values.end(), set.test.sample(i),
                       [](double v) { return static_cast<float>(v); });
        std::transform(r.target.values.begin(), r.target.values.end(), set.target.sample(i),
                       [](double v) { return static_cast<float>(v); });
        set.sample_ids.push_back(r.sample_id);
    }
    return set;
}

namespace {

nn::Tensor<float> gather(const nn::Tensor<float>& source, const std::vector<int>& index, size_t begin, size_t end) {
    nn::Shape s = source.shape;
    s.n = static_cast<int>(end - begin);
    nn::Tensor<float> out(s);
    const size_t stride = s.sample();
    for (size_t k = begin; k < end; ++k) {
        const float* src = source.sample(index[k]);
        std::copy(src, src + stride, out.data.begin() + static_cast<std::ptrdiff_t>((k - begin) * stride));
    }
    return out;
}

SampleImage to_sample(const nn::Tensor<float>& batch, int i, double pitch) {
    const int n = batch.shape.h;
    SampleImage img(n, pitch);
    std::copy(batch.sample(i), batch.sample(i) + batch.shape.sample(), img.values.begin());
    return img;
}

}  // namespace

SampleImage predict(Model& model, const IntensityImage& reference, const IntensityImage& test) {
    const int n = model.config().input_n;
    if (reference.n != n || test.n != n) {
        throw shape_error("predict: expected " + std::to_string(n) + "x" + std::to_string(n) + " speckle images");
    }
    nn::Tensor<float> ref({1, 1, n, n}), tst({1, 1, n, n});
    const RealImage rn = normalize_speckle(reference);
    const RealImage tn = normalize_speckle(test);
    std::transform(rn.values.begin(), rn.values.end(), ref.data.begin(), [](double v) { return float(v); });
    std::transform(tn.values.begin(), tn.values.end(), tst.data.begin(), [](double v) { return float(v); });
    const auto out = model.forward(ref, tst, nn::Mode::kEval);
    return to_sample(out, 0, output_pitch(model.config()));
}

Evaluation evaluate(Model& model, const TrainingSet& set, int batch_size, bool keep_outputs) {
    if (batch_size < 1) throw argument_error("evaluate: batch size must be positive");
    Evaluation ev;
    const int count = set.size();
    if (count == 0) return ev;
    std::vector<int> index(count);
    std::iota(index.begin(), index.end(), 0);
    const double pitch = output_pitch(model.config());
    double loss = 0.0, ssim_sum = 0.0, psnr_sum = 0.0;
    int finite_psnr = 0;
    for (int begin = 0; begin < count; begin += batch_size) {
        const int end = std::min(count, begin + batch_size);
        const auto ref = gather(set.reference, index, begin, end);
        const auto test = gather(set.test, index, begin, end);
        const auto target = gather(set.target, index, begin, end);
        const auto out = model.forward(ref, test, nn::Mode::kEval);
        loss += nn::bce_loss(out, target) * (end - begin);
        for (int i = 0; i < end - begin; ++i) {
            const SampleImage pred = to_sample(out, i, pitch);
            const SampleImage truth = to_sample(target, i, pitch);
            ssim_sum += ssim(pred, truth);
            const Psnr p = psnr(pred, truth);
            if (!p.infinite) {
                psnr_sum += p.db;
                ++finite_psnr;
            }
            if (keep_outputs) ev.outputs.push_back(pred);
        }
    }
    ev.loss = loss / count;
    ev.mean_ssim = ssim_sum / count;
    ev.mean_psnr = finite_psnr ? psnr_sum / finite_psnr : 0.0;
    return ev;
}

// ---- training -------------------------------------------------------------

void TrainReport::write_csv(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw io_error("cannot write '" + path.string() + "'");
    out << "epoch,train_loss,val_loss,val_ssim,val_psnr,seconds\n" << std::setprecision(9);
    for (const auto& e : epochs) {
        out << e.epoch << "," << e.train_loss << "," << e.val_loss << "," << e.val_ssim << "," << e.val_psnr << ","
            << e.seconds << "\n";
    }
    if (!out) throw io_error("write failed for '" + path.string() + "'");
}

TrainReport train(Model& model, const TrainingSet& train_set, const TrainingSet& validation,
                  const TrainOptions& options, TrainState& state, const EpochCallback& on_epoch) {
    if (options.epochs < 0 || options.batch_size < 1) throw argument_error("train: invalid epochs or batch size");
    if (train_set.size() == 0 || validation.size() == 0) throw argument_error("train: empty training or validation set");
    const auto wall_start = std::chrono::steady_clock::now();
    if (state.epochs_done == 0 && state.adam.step_count == 0) {
        state.adam.config = options.adam;
        state.seed = options.seed;
    }
    const std::uint64_t seed = state.seed;
    auto params = model.parameters();
    const int count = train_set.size();
    std::vector<int> order(count);

    TrainReport report;
    report.seed = seed;
    for (int epoch = state.epochs_done + 1; epoch <= options.epochs; ++epoch) {
        const auto epoch_start = std::chrono::steady_clock::now();
        std::iota(order.begin(), order.end(), 0);
        std::mt19937_64 rng(splitmix64(seed ^ kShuffleTag) ^ splitmix64(static_cast<std::uint64_t>(epoch)));
        for (int i = count - 1; i > 0; --i) std::swap(order[i], order[rng() % static_cast<std::uint64_t>(i + 1)]);

        double loss_sum = 0.0;
        for (int begin = 0; begin < count; begin += options.batch_size) {
            const int end = std::min(count, begin + options.batch_size);
            const auto ref = gather(train_set.reference, order, begin, end);
            const auto test = gather(train_set.test, order, begin, end);
            const auto target = gather(train_set.target, order, begin, end);
            const std::uint64_t step = static_cast<std::uint64_t>(state.adam.step_count);
            model.zero_grad();
            const auto out =
                model.forward(ref, test, nn::Mode::kTrain, splitmix64(seed ^ kDropoutTag) ^ splitmix64(step));
            nn::Tensor<float> grad;
            const double loss = nn::bce_loss(out, target, &grad);
            if (!std::isfinite(loss) || !out.all_finite()) {
                throw numeric_error("training diverged: non-finite loss at epoch " + std::to_string(epoch) +
                                    ", step " + std::to_string(step));
            }
            model.backward(grad);
            nn::adam_step<float>(params, state.adam);
            for (const auto& p : params) {
                if (!p.tensor->all_finite()) {
                    throw numeric_error("training diverged: non-finite parameter " + p.name + " at epoch " +
                                        std::to_string(epoch) + ", step " + std::to_string(step));
                }
            }
            loss_sum += loss * (end - begin);
        }

        const Evaluation ev = evaluate(model, validation);
        EpochStats stats;
        stats.epoch = epoch;
        stats.train_loss = loss_sum / count;
        stats.val_loss = ev.loss;
        stats.val_ssim = ev.mean_ssim;
        stats.val_psnr = ev.mean_psnr;
        stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - epoch_start).count();
        const bool improved = state.best_epoch < 0 || ev.mean_ssim > state.best_val_ssim;
        if (improved) {
            state.best_epoch = epoch;
            state.best_val_ssim = ev.mean_ssim;
        }
        state.epochs_done = epoch;
        report.epochs.push_back(stats);
        if (on_epoch) on_epoch(stats, model, state, improved);
    }
    report.best_epoch = state.best_epoch;
    report.best_val_ssim = state.best_val_ssim;
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
    return report;
}

// ---- checkpoints ----------------------------------------------------------

namespace {

void put_config(std::vector<unsigned char>& out, const YNetConfig& c) {
    for (const auto* v : {&c.encoder_channels, &c.decoder_channels}) {
        binary::put<std::uint32_t>(out, static_cast<std::uint32_t>(v->size()));
        for (int x : *v) binary::put<std::int32_t>(out, x);
    }
    binary::put<double>(out, c.dropout_rate);
    binary::put<std::int32_t>(out, c.input_n);
    binary::put<std::int32_t>(out, c.output_n);
    binary::put<std::int32_t>(out, c.final_padding);
    binary::put<std::uint8_t>(out, c.shared_encoders ? 1 : 0);
}

YNetConfig get_config(binary::Reader& r) {
    YNetConfig c;
    for (auto* v : {&c.encoder_channels, &c.decoder_channels}) {
        const auto len = r.get<std::uint32_t>();
        if (!r.ok() || len > 64) throw corrupt_error("checkpoint: implausible channel list");
        v->resize(len);
        for (auto& x : *v) x = r.get<std::int32_t>();
    }
    c.dropout_rate = r.get<double>();
    c.input_n = r.get<std::int32_t>();
    c.output_n = r.get<std::int32_t>();
    c.final_padding = r.get<std::int32_t>();
    c.shared_encoders = r.get<std::uint8_t>() != 0;
    if (!r.ok()) throw corrupt_error("checkpoint: truncated configuration");
    return c;
}

std::vector<nn::Parameter<float>> all_tensors(Model& model) {
    auto tensors = model.parameters();
    auto buffers = model.buffers();
    tensors.insert(tensors.end(), buffers.begin(), buffers.end());
    return tensors;
}

}  // namespace

void save_checkpoint(Model& model, const std::filesystem::path& path, const TrainState* state) {
    std::vector<unsigned char> out;
    binary::put_bytes(out, kCheckpointMagic, 4);
    binary::put<std::uint32_t>(out, kCheckpointVersion);
    binary::put<std::uint64_t>(out, model.fingerprint());
    put_config(out, model.config());
    const auto tensors = all_tensors(model);
    binary::put<std::uint32_t>(out, static_cast<std::uint32_t>(tensors.size()));
    for (const auto& t : tensors) {
        binary::put_string(out, t.name);
        const auto& s = t.tensor->shape;
        for (int d : {s.n, s.c, s.h, s.w}) binary::put<std::uint32_t>(out, static_cast<std::uint32_t>(d));
        binary::put_floats<float>(out, t.tensor->data);
    }
    binary::put<std::uint8_t>(out, state ? 1 : 0);
    if (state) {
        const auto& a = state->adam;
        binary::put<std::int64_t>(out, a.step_count);
        for (double v : {a.config.lr, a.config.beta1, a.config.beta2, a.config.epsilon}) binary::put<double>(out, v);
        binary::put<std::int32_t>(out, state->epochs_done);
        binary::put<std::uint64_t>(out, state->seed);
        binary::put<std::int32_t>(out, state->best_epoch);
        binary::put<double>(out, state->best_val_ssim);
        binary::put<std::uint32_t>(out, static_cast<std::uint32_t>(a.first_moment.size()));
        for (size_t k = 0; k < a.first_moment.size(); ++k) {
            binary::put<std::uint32_t>(out, static_cast<std::uint32_t>(a.first_moment[k].size()));
            binary::put_floats<float>(out, a.first_moment[k]);
            binary::put_floats<float>(out, a.second_moment[k]);
        }
    }
    binary::put<std::uint64_t>(out, binary::fnv1a(out));

    const auto tmp = std::filesystem::path(path.string() + ".tmp");
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw io_error("cannot write '" + tmp.string() + "'");
        f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
        if (!f) throw io_error("write failed for '" + tmp.string() + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw io_error("cannot move checkpoint into '" + path.string() + "': " + ec.message());
}

std::unique_ptr<Model> load_checkpoint(const std::filesystem::path& path, TrainState* state, bool* has_state) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw io_error("cannot open '" + path.string() + "'");
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    if (bytes.size() < 4 || std::memcmp(bytes.data(), kCheckpointMagic, 4) != 0) {
        throw format_error("'" + path.string() + "' is not a model checkpoint");
    }
    if (bytes.size() < 24) throw corrupt_error("checkpoint: truncated file");
    const std::span<const unsigned char> body(bytes.data(), bytes.size() - 8);
    binary::Reader tail({bytes.data() + body.size(), 8});
    if (tail.get<std::uint64_t>() != binary::fnv1a(body)) throw corrupt_error("checkpoint: checksum mismatch");

    binary::Reader r(body);
    r.get<std::uint32_t>();  // magic, checked above
    const auto version = r.get<std::uint32_t>();
    if (version != kCheckpointVersion) {
        throw format_error("checkpoint: unsupported version " + std::to_string(version));
    }
    const auto fingerprint = r.get<std::uint64_t>();
    const YNetConfig config = get_config(r);
    config.validate();
    if (architecture_fingerprint(config) != fingerprint) {
        throw corrupt_error("checkpoint: architecture fingerprint does not match its configuration");
    }
    auto model = std::make_unique<Model>(config, 0);
    auto tensors = all_tensors(*model);
    const auto count = r.get<std::uint32_t>();
    if (!r.ok() || count != tensors.size()) throw shape_error("checkpoint: tensor count mismatch");
    for (auto& t : tensors) {
        const std::string name = r.get_string(4096);
        std::uint32_t dims[4];
        for (auto& d : dims) d = r.get<std::uint32_t>();
        if (!r.ok()) throw corrupt_error("checkpoint: truncated tensor header");
        const auto& s = t.tensor->shape;
        if (name != t.name || dims[0] != std::uint32_t(s.n) || dims[1] != std::uint32_t(s.c) ||
            dims[2] != std::uint32_t(s.h) || dims[3] != std::uint32_t(s.w)) {
            throw shape_error("checkpoint: tensor '" + name + "' does not match '" + t.name + "' " + s.str());
        }
        for (auto& v : t.tensor->data) v = r.get<float>();
    }
    const bool with_state = r.get<std::uint8_t>() != 0;
    if (!r.ok()) throw corrupt_error("checkpoint: truncated tensor data");
    if (has_state) *has_state = with_state;
    if (with_state) {
        TrainState s;
        s.adam.step_count = r.get<std::int64_t>();
        s.adam.config.lr = r.get<double>();
        s.adam.config.beta1 = r.get<double>();
        s.adam.config.beta2 = r.get<double>();
        s.adam.config.epsilon = r.get<double>();
        s.epochs_done = r.get<std::int32_t>();
        s.seed = r.get<std::uint64_t>();
        s.best_epoch = r.get<std::int32_t>();
        s.best_val_ssim = r.get<double>();
        const auto moments = r.get<std::uint32_t>();
        if (!r.ok() || (moments != 0 && moments != model->parameters().size())) {
            throw corrupt_error("checkpoint: optimizer state does not match the model");
        }
        for (std::uint32_t k = 0; k < moments; ++k) {
            const auto len = r.get<std::uint32_t>();
            if (!r.ok() || len > r.remaining()) throw corrupt_error("checkpoint: truncated optimizer state");
            std::vector<float> m(len), v(len);
            for (auto& x : m) x = r.get<float>();
            for (auto& x : v) x = r.get<float>();
            s.adam.first_moment.push_back(std::move(m));
            s.adam.second_moment.push_back(std::move(v));
        }
        if (!r.ok()) throw corrupt_error("checkpoint: truncated optimizer state");
        if (state) *state = std::move(s);
    }
    if (r.remaining() != 0) throw corrupt_error("checkpoint: trailing bytes");
    return model;
}

// ---- experiments ----------------------------------------------------------

StabilityResult stability_experiment(Model& model, const SampleImage& sample, std::int64_t sample_id,
                                     const OpticalConfig& optics, int repetitions, std::uint64_t base_seed) {
    if (repetitions < 2) throw argument_error("stability: need at least two repetitions");
    if (sample.n != model.config().output_n) throw shape_error("stability: sample size differs from model output");
    StabilityResult result;
    for (int k = 0; k < repetitions; ++k) {
        const auto seed =
            derive_seed(base_seed, sample_id, static_cast<std::uint64_t>(k), IlluminationMode::kDynamic);
        result.inputs.push_back(simulate_pair(sample, optics, seed));
        result.outputs.push_back(predict(model, result.inputs.back().reference, result.inputs.back().test));
    }
    const size_t n = static_cast<size_t>(repetitions);
    result.ssim_matrix.assign(n * n, 1.0);
    double off = 0.0;
    for (size_t i = 0; i < n; ++i) {
        result.target_ssim.push_back(ssim(result.outputs[i], sample));
        for (size_t j = i + 1; j < n; ++j) {
            const double s = ssim(result.outputs[i], result.outputs[j]);
            result.ssim_matrix[i * n + j] = result.ssim_matrix[j * n + i] = s;
            off += 2.0 * s;
        }
    }
    result.mean_offdiagonal_ssim = off / static_cast<double>(n * (n - 1));
    return result;
}

}  // namespace ygi
