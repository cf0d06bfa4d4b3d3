#include "ygi/ygi.h"

#include <cstring>
#include <fstream>
#include <memory>
#include <new>
#include <string>

#include "ygi/classical.hpp"
#include "ygi/dataset.hpp"
#include "ygi/image_io.hpp"
#include "ygi/metrics.hpp"
#include "ygi/optics.hpp"
#include "ygi/ynet.hpp"

struct ygi_image {
    ygi::RealImage image;
};

struct ygi_pair {
    ygi_image reference;
    ygi_image test;
    std::uint64_t seed = 0;
    std::int64_t sample_id = -1;
    ygi::IlluminationMode mode = ygi::IlluminationMode::kDynamic;
};

struct ygi_digits {
    std::vector<ygi_image> images;
    std::vector<int> labels;
};

struct ygi_dataset {
    std::unique_ptr<ygi::DatasetReader> reader;
};

struct ygi_model {
    std::unique_ptr<ygi::Model> net;
    ygi::TrainState state;
};

struct ygi_stability {
    ygi::StabilityResult result;
    std::vector<ygi_image> outputs;
    std::vector<ygi_pair> inputs;
};

namespace {

thread_local std::string last_error;

ygi_status to_status(ygi::ErrorCode code) {
    switch (code) {
        case ygi::ErrorCode::kConfig: return YGI_ERR_CONFIG;
        case ygi::ErrorCode::kIo: return YGI_ERR_IO;
        case ygi::ErrorCode::kFormat: return YGI_ERR_FORMAT;
        case ygi::ErrorCode::kCorrupt: return YGI_ERR_CORRUPT;
        case ygi::ErrorCode::kNumeric: return YGI_ERR_NUMERIC;
        case ygi::ErrorCode::kShape: return YGI_ERR_SHAPE;
        case ygi::ErrorCode::kDegenerate: return YGI_ERR_DEGENERATE;
        case ygi::ErrorCode::kArgument: return YGI_ERR_ARGUMENT;
    }
    return YGI_ERR_INTERNAL;
}

template <typename F>
ygi_status guarded(F&& body) {
    try {
        body();
        last_error.clear();
        return YGI_OK;
    } catch (const ygi::Error& e) {
        last_error = e.what();
        return to_status(e.code());
    } catch (const std::bad_alloc&) {
        last_error = "out of memory";
    } catch (const std::exception& e) {
        last_error = e.what();
    } catch (...) {
        last_error = "unknown failure";
    }
    return YGI_ERR_INTERNAL;
}

template <typename... P>
void require(const char* what, const P*... pointers) {
    if (((pointers == nullptr) || ...)) throw ygi::argument_error(std::string(what) + ": null argument");
}

ygi::OpticalConfig to_cpp(const ygi_optics& o) {
    ygi::OpticalConfig c;
    c.wavelength = o.wavelength;
    c.d1 = o.d1;
    c.d2 = o.d2;
    c.source_diameter = o.source_diameter;
    c.sim_pitch = o.sim_pitch;
    c.detector_pitch = o.detector_pitch;
    c.sim_grid_n = o.sim_grid_n;
    c.detector_n = o.detector_n;
    c.pad_factor = o.pad_factor;
    return c;
}

ygi_optics to_c(const ygi::OpticalConfig& c) {
    return {c.wavelength, c.d1, c.d2, c.source_diameter, c.sim_pitch, c.detector_pitch,
            c.sim_grid_n, c.detector_n, c.pad_factor};
}

ygi::YNetConfig to_cpp(const ygi_model_config& m) {
    ygi::YNetConfig c;
    c.encoder_channels.assign(std::begin(m.encoder_channels), std::end(m.encoder_channels));
    c.decoder_channels.assign(std::begin(m.decoder_channels), std::end(m.decoder_channels));
    c.dropout_rate = m.dropout_rate;
    c.input_n = m.input_n;
    c.output_n = m.output_n;
    c.final_padding = m.final_padding;
    c.shared_encoders = m.shared_encoders != 0;
    return c;
}

ygi_model_config to_c(const ygi::YNetConfig& c) {
    ygi_model_config m{};
    std::copy(c.encoder_channels.begin(), c.encoder_channels.end(), m.encoder_channels);
    std::copy(c.decoder_channels.begin(), c.decoder_channels.end(), m.decoder_channels);
    m.dropout_rate = c.dropout_rate;
    m.input_n = c.input_n;
    m.output_n = c.output_n;
    m.final_padding = c.final_padding;
    m.shared_encoders = c.shared_encoders ? 1 : 0;
    return m;
}

template <typename Derived>
Derived as(const ygi_image& image) {
    Derived out;
    static_cast<ygi::RealImage&>(out) = image.image;
    return out;
}

ygi_image* wrap(ygi::RealImage image) { return new ygi_image{std::move(image)}; }

ygi::SpecklePair to_cpp(const ygi_pair& p) {
    return {as<ygi::IntensityImage>(p.reference), as<ygi::IntensityImage>(p.test), p.seed, p.sample_id, p.mode};
}

ygi_pair to_c(const ygi::SpecklePair& p) { return {{p.reference}, {p.test}, p.seed, p.sample_id, p.mode}; }

char* duplicate(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

ygi::IlluminationMode to_cpp(ygi_mode mode) {
    if (mode != YGI_MODE_STATIC && mode != YGI_MODE_DYNAMIC) throw ygi::argument_error("unknown illumination mode");
    return mode == YGI_MODE_STATIC ? ygi::IlluminationMode::kStatic : ygi::IlluminationMode::kDynamic;
}

void append_epoch(const std::filesystem::path& path, const ygi::EpochStats& s) {
    const bool fresh = s.epoch == 1 || !std::filesystem::exists(path);
    std::ofstream out(path, fresh ? std::ios::trunc : std::ios::app);
    if (!out) throw ygi::io_error("cannot write '" + path.string() + "'");
    if (fresh) out << "epoch,train_loss,val_loss,val_ssim,val_psnr,seconds\n";
    out.precision(9);
    out << s.epoch << "," << s.train_loss << "," << s.val_loss << "," << s.val_ssim << "," << s.val_psnr << ","
        << s.seconds << "\n";
}

}  // namespace

extern "C" {

const char* ygi_last_error(void) { return last_error.c_str(); }

const char* ygi_status_name(ygi_status status) {
    switch (status) {
        case YGI_OK: return "ok";
        case YGI_ERR_CONFIG: return "configuration error";
        case YGI_ERR_IO: return "I/O error";
        case YGI_ERR_FORMAT: return "format error";
        case YGI_ERR_CORRUPT: return "corrupt data";
        case YGI_ERR_NUMERIC: return "numeric failure";
        case YGI_ERR_SHAPE: return "shape mismatch";
        case YGI_ERR_DEGENERATE: return "degenerate input";
        case YGI_ERR_ARGUMENT: return "invalid argument";
        case YGI_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

const char* ygi_version(void) { return "1.0.0"; }

void ygi_string_free(char* text) { std::free(text); }

// ---- optics ---------------------------------------------------------------

void ygi_optics_defaults(ygi_optics* optics) {
    if (optics) *optics = to_c(ygi::OpticalConfig{});
}

ygi_status ygi_optics_validate(const ygi_optics* optics) {
    return guarded([&] {
        require("ygi_optics_validate", optics);
        to_cpp(*optics).validate();
    });
}

ygi_status ygi_expected_grain(const ygi_optics* optics, double* pixels) {
    return guarded([&] {
        require("ygi_expected_grain", optics, pixels);
        const auto c = to_cpp(*optics);
        c.validate();
        *pixels = ygi::expected_grain_pixels(c);
    });
}

// ---- images ---------------------------------------------------------------

ygi_status ygi_image_create(int32_t n, double pitch, const double* values, ygi_image** out) {
    return guarded([&] {
        require("ygi_image_create", out);
        if (n < 1 || !(pitch > 0.0)) throw ygi::argument_error("ygi_image_create: size and pitch must be positive");
        ygi::RealImage image(n, pitch);
        if (values) std::copy(values, values + image.size(), image.values.begin());
        *out = wrap(std::move(image));
    });
}

void ygi_image_free(ygi_image* image) { delete image; }
int32_t ygi_image_size(const ygi_image* image) { return image ? image->image.n : 0; }
double ygi_image_pitch(const ygi_image* image) { return image ? image->image.pitch : 0.0; }
const double* ygi_image_data(const ygi_image* image) { return image ? image->image.values.data() : nullptr; }

ygi_status ygi_image_write_pgm(const ygi_image* image, const char* path, double lo, double hi, double* used_lo,
                               double* used_hi) {
    return guarded([&] {
        require("ygi_image_write_pgm", image, path);
        ygi::PgmScaling s{lo, hi};
        if (lo >= hi) {
            s = ygi::write_pgm(image->image, path);
        } else {
            ygi::write_pgm(image->image, path, s);
        }
        if (used_lo) *used_lo = s.lo;
        if (used_hi) *used_hi = s.hi;
    });
}

ygi_status ygi_image_mosaic(const ygi_image* const* tiles, size_t count, int32_t columns, ygi_image** out) {
    return guarded([&] {
        require("ygi_image_mosaic", tiles, out);
        std::vector<ygi::RealImage> images;
        for (size_t i = 0; i < count; ++i) {
            require("ygi_image_mosaic", tiles[i]);
            images.push_back(tiles[i]->image);
        }
        *out = wrap(ygi::mosaic(images, columns));
    });
}

// ---- speckle simulation ---------------------------------------------------

ygi_status ygi_simulate_pair(const ygi_optics* optics, const ygi_image* sample, uint64_t seed, ygi_pair** out) {
    return guarded([&] {
        require("ygi_simulate_pair", optics, sample, out);
        *out = new ygi_pair(to_c(ygi::simulate_pair(as<ygi::SampleImage>(*sample), to_cpp(*optics), seed)));
    });
}

ygi_status ygi_simulate_reference(const ygi_optics* optics, uint64_t seed, ygi_image** out) {
    return guarded([&] {
        require("ygi_simulate_reference", optics, out);
        *out = wrap(ygi::simulate_reference(to_cpp(*optics), seed));
    });
}

void ygi_pair_free(ygi_pair* pair) { delete pair; }
const ygi_image* ygi_pair_reference(const ygi_pair* pair) { return pair ? &pair->reference : nullptr; }
const ygi_image* ygi_pair_test(const ygi_pair* pair) { return pair ? &pair->test : nullptr; }
uint64_t ygi_pair_seed(const ygi_pair* pair) { return pair ? pair->seed : 0; }

ygi_status ygi_autocorrelation(const ygi_image* const* frames, size_t count, ygi_image** map, double* g2_peak,
                               double* fwhm_pixels) {
    return guarded([&] {
        require("ygi_autocorrelation", frames);
        if (count == 0) throw ygi::argument_error("ygi_autocorrelation: no frames");
        ygi::CorrelationMap mean;
        for (size_t k = 0; k < count; ++k) {
            require("ygi_autocorrelation", frames[k]);
            const auto g2 = ygi::autocorrelation_g2(as<ygi::IntensityImage>(*frames[k]));
            if (k == 0) {
                mean = g2;
            } else {
                if (g2.n != mean.n) throw ygi::shape_error("ygi_autocorrelation: frames differ in size");
                for (size_t i = 0; i < g2.values.size(); ++i) mean.values[i] += g2.values[i];
            }
        }
        for (double& v : mean.values) v /= static_cast<double>(count);
        const auto stats = ygi::speckle_stats(mean);
        if (g2_peak) *g2_peak = stats.peak;
        if (fwhm_pixels) *fwhm_pixels = stats.fwhm_pixels;
        if (map) {
            ygi::RealImage image(mean.n, frames[0]->image.pitch);
            image.values = mean.values;
            *map = wrap(std::move(image));
        }
    });
}

uint64_t ygi_derive_seed(uint64_t base_seed, int64_t sample_id, uint64_t repetition, ygi_mode mode) {
    return ygi::derive_seed(base_seed, sample_id, repetition,
                            mode == YGI_MODE_STATIC ? ygi::IlluminationMode::kStatic : ygi::IlluminationMode::kDynamic);
}

// ---- digits and datasets --------------------------------------------------

ygi_status ygi_digits_load(const char* images_path, const char* labels_path, ygi_digits** out) {
    return guarded([&] {
        require("ygi_digits_load", images_path, out);
        auto digits = std::make_unique<ygi_digits>();
        for (auto& img : ygi::load_idx_images(images_path)) digits->images.push_back({std::move(img)});
        if (labels_path) {
            digits->labels = ygi::load_idx_labels(labels_path);
            if (digits->labels.size() != digits->images.size()) {
                throw ygi::corrupt_error("ygi_digits_load: image and label counts differ");
            }
        }
        *out = digits.release();
    });
}

void ygi_digits_free(ygi_digits* digits) { delete digits; }
size_t ygi_digits_count(const ygi_digits* digits) { return digits ? digits->images.size() : 0; }

const ygi_image* ygi_digits_image(const ygi_digits* digits, size_t index) {
    return digits && index < digits->images.size() ? &digits->images[index] : nullptr;
}

int32_t ygi_digits_label(const ygi_digits* digits, size_t index) {
    return digits && index < digits->labels.size() ? digits->labels[index] : -1;
}

ygi_status ygi_dataset_generate(const ygi_digits* digits, size_t first, size_t count, const ygi_optics* optics,
                                ygi_mode mode, uint64_t base_seed, uint64_t repetition, const char* out_path) {
    return guarded([&] {
        require("ygi_dataset_generate", digits, optics, out_path);
        if (first + count > digits->images.size() || first + count < first) {
            throw ygi::argument_error("ygi_dataset_generate: range [" + std::to_string(first) + ", " +
                                      std::to_string(first + count) + ") exceeds " +
                                      std::to_string(digits->images.size()) + " digits");
        }
        std::vector<ygi::IndexedSample> samples;
        samples.reserve(count);
        for (size_t i = first; i < first + count; ++i) {
            samples.push_back({static_cast<std::int64_t>(i), as<ygi::SampleImage>(digits->images[i])});
        }
        ygi::generate_dataset(samples, to_cpp(*optics), to_cpp(mode), base_seed, out_path, repetition);
    });
}

ygi_status ygi_dataset_open(const char* path, ygi_dataset** out) {
    return guarded([&] {
        require("ygi_dataset_open", path, out);
        auto ds = std::make_unique<ygi_dataset>();
        ds->reader = std::make_unique<ygi::DatasetReader>(path);
        *out = ds.release();
    });
}

void ygi_dataset_free(ygi_dataset* dataset) { delete dataset; }

ygi_status ygi_dataset_info_get(const ygi_dataset* dataset, ygi_dataset_info* info) {
    return guarded([&] {
        require("ygi_dataset_info_get", dataset, info);
        const auto& h = dataset->reader->header();
        info->version = h.version;
        info->record_count = h.record_count;
        info->detector_n = h.detector_n;
        info->target_n = h.target_n;
        info->mode = h.mode == ygi::IlluminationMode::kStatic ? YGI_MODE_STATIC : YGI_MODE_DYNAMIC;
        info->base_seed = h.base_seed;
        info->optics = to_c(h.optics);
    });
}

ygi_status ygi_dataset_record(ygi_dataset* dataset, uint64_t index, ygi_pair** pair, ygi_image** target,
                              int64_t* sample_id) {
    return guarded([&] {
        require("ygi_dataset_record", dataset);
        auto r = dataset->reader->at(index);
        if (sample_id) *sample_id = r.sample_id;
        if (target) *target = wrap(std::move(r.target));
        if (pair) {
            *pair = new ygi_pair{{std::move(r.reference)}, {std::move(r.test)}, r.seed, r.sample_id,
                                 dataset->reader->header().mode};
        }
    });
}

// ---- classical reconstruction ---------------------------------------------

void ygi_classical_defaults(ygi_classical_options* options) {
    if (!options) return;
    const ygi::PhaseRetrievalOptions d;
    *options = {d.support_n, d.beta, d.iterations, d.restarts, d.seed, d.error_reduction ? 1 : 0};
}

ygi_status ygi_classical_reconstruct(const ygi_pair* pair, const ygi_optics* optics,
                                     const ygi_classical_options* options, ygi_image** image, ygi_image** modulus,
                                     double* residual, int32_t* degenerate) {
    return guarded([&] {
        require("ygi_classical_reconstruct", pair, optics, options, image);
        ygi::PhaseRetrievalOptions o;
        o.support_n = options->support_n;
        o.beta = options->beta;
        o.iterations = options->iterations;
        o.restarts = options->restarts;
        o.seed = options->seed;
        o.error_reduction = options->error_reduction != 0;
        auto result = ygi::classical_pipeline(to_cpp(*pair), to_cpp(*optics), o);
        if (modulus) {
            ygi::RealImage m(result.modulus.n, result.modulus.freq_pitch);
            m.values = result.modulus.values;
            *modulus = wrap(std::move(m));
        }
        if (residual) *residual = result.residual;
        if (degenerate) *degenerate = result.degenerate ? 1 : 0;
        *image = wrap(std::move(result.image));
    });
}

ygi_status ygi_fourier_modulus(const ygi_pair* const* pairs, size_t count, const ygi_optics* optics,
                               ygi_image** modulus) {
    return guarded([&] {
        require("ygi_fourier_modulus", pairs, optics, modulus);
        std::vector<ygi::SpecklePair> frames;
        for (size_t i = 0; i < count; ++i) {
            require("ygi_fourier_modulus", pairs[i]);
            frames.push_back(to_cpp(*pairs[i]));
        }
        const auto m = ygi::fgi_correlate(frames, to_cpp(*optics));
        ygi::RealImage image(m.n, m.freq_pitch);
        image.values = m.values;
        *modulus = wrap(std::move(image));
    });
}

// ---- network --------------------------------------------------------------

void ygi_model_config_defaults(ygi_model_config* config, int32_t full_width) {
    if (config) *config = to_c(full_width ? ygi::YNetConfig::full_width() : ygi::YNetConfig::desk());
}

ygi_status ygi_model_geometry(const ygi_model_config* config, char** table) {
    return guarded([&] {
        require("ygi_model_geometry", config, table);
        *table = duplicate(ygi::format_geometry(ygi::build_geometry(to_cpp(*config))));
    });
}

ygi_status ygi_model_create(const ygi_model_config* config, uint64_t seed, ygi_model** out) {
    return guarded([&] {
        require("ygi_model_create", config, out);
        auto model = std::make_unique<ygi_model>();
        model->net = std::make_unique<ygi::Model>(to_cpp(*config), seed);
        *out = model.release();
    });
}

ygi_status ygi_model_load(const char* path, ygi_model** out) {
    return guarded([&] {
        require("ygi_model_load", path, out);
        auto model = std::make_unique<ygi_model>();
        model->net = ygi::load_checkpoint(path, &model->state);
        *out = model.release();
    });
}

ygi_status ygi_model_save(ygi_model* model, const char* path, int32_t with_state) {
    return guarded([&] {
        require("ygi_model_save", model, path);
        ygi::save_checkpoint(*model->net, path, with_state ? &model->state : nullptr);
    });
}

void ygi_model_free(ygi_model* model) { delete model; }

ygi_status ygi_model_config_get(const ygi_model* model, ygi_model_config* config) {
    return guarded([&] {
        require("ygi_model_config_get", model, config);
        *config = to_c(model->net->config());
    });
}

uint64_t ygi_model_fingerprint(const ygi_model* model) { return model ? model->net->fingerprint() : 0; }

uint64_t ygi_model_parameter_count(const ygi_model* model) {
    return model ? ygi::parameter_count(model->net->config()) : 0;
}

int32_t ygi_model_epochs_done(const ygi_model* model) { return model ? model->state.epochs_done : 0; }

ygi_status ygi_predict(ygi_model* model, const ygi_image* reference, const ygi_image* test, ygi_image** out) {
    return guarded([&] {
        require("ygi_predict", model, reference, test, out);
        *out = wrap(ygi::predict(*model->net, as<ygi::IntensityImage>(*reference), as<ygi::IntensityImage>(*test)));
    });
}

void ygi_train_defaults(ygi_train_options* options) {
    if (!options) return;
    const ygi::TrainOptions d;
    *options = {d.epochs, d.batch_size, d.adam.lr, d.adam.beta1, d.adam.beta2, d.adam.epsilon, d.seed};
}

ygi_status ygi_train(ygi_model* model, const char* train_path, const char* val_path, const ygi_train_options* options,
                     const char* checkpoint_dir, ygi_epoch_fn on_epoch, void* user) {
    return guarded([&] {
        require("ygi_train", model, train_path, val_path, options);
        const auto train_set = ygi::prepare_training_set(ygi::read_all(train_path));
        const auto val_set = ygi::prepare_training_set(ygi::read_all(val_path));
        ygi::TrainOptions o;
        o.epochs = options->epochs;
        o.batch_size = options->batch_size;
        o.adam = {options->learning_rate, options->beta1, options->beta2, options->epsilon};
        o.seed = options->seed;
        std::filesystem::path dir;
        if (checkpoint_dir) {
            dir = checkpoint_dir;
            std::filesystem::create_directories(dir);
        }
        ygi::train(*model->net, train_set, val_set, o, model->state,
                   [&](const ygi::EpochStats& s, ygi::Model& net, const ygi::TrainState& state, bool improved) {
                       if (!dir.empty()) {
                           ygi::save_checkpoint(net, dir / "last.ync", &state);
                           if (improved) ygi::save_checkpoint(net, dir / "best.ync", &state);
                           append_epoch(dir / "train_report.csv", s);
                       }
                       if (on_epoch) {
                           const ygi_epoch_stats c{s.epoch,    s.train_loss, s.val_loss, s.val_ssim,
                                                   s.val_psnr, s.seconds,    improved ? 1 : 0};
                           on_epoch(&c, user);
                       }
                   });
    });
}

ygi_status ygi_evaluate_dataset(ygi_model* model, const char* dataset_path, ygi_evaluation* out) {
    return guarded([&] {
        require("ygi_evaluate_dataset", model, dataset_path, out);
        const auto set = ygi::prepare_training_set(ygi::read_all(dataset_path));
        const auto ev = ygi::evaluate(*model->net, set);
        *out = {ev.loss, ev.mean_ssim, ev.mean_psnr, static_cast<std::uint64_t>(set.size())};
    });
}

// ---- metrics --------------------------------------------------------------

ygi_status ygi_ssim(const ygi_image* a, const ygi_image* b, double* value) {
    return guarded([&] {
        require("ygi_ssim", a, b, value);
        *value = ygi::ssim(a->image, b->image);
    });
}

ygi_status ygi_psnr(const ygi_image* a, const ygi_image* b, double* db, int32_t* infinite) {
    return guarded([&] {
        require("ygi_psnr", a, b, db, infinite);
        const auto p = ygi::psnr(a->image, b->image);
        *db = p.infinite ? 0.0 : p.db;
        *infinite = p.infinite ? 1 : 0;
    });
}

ygi_status ygi_mse(const ygi_image* a, const ygi_image* b, double* value) {
    return guarded([&] {
        require("ygi_mse", a, b, value);
        *value = ygi::mse(a->image, b->image);
    });
}

ygi_status ygi_compare_methods(const ygi_image* const* targets, size_t sample_count, const char* const* method_labels,
                               size_t method_count, const ygi_image* const* outputs, const char* const* sample_labels,
                               const char* text_path, const char* csv_path, char** text, char** csv) {
    return guarded([&] {
        require("ygi_compare_methods", targets, method_labels, outputs);
        std::vector<ygi::RealImage> truth;
        for (size_t i = 0; i < sample_count; ++i) {
            require("ygi_compare_methods", targets[i]);
            truth.push_back(targets[i]->image);
        }
        std::vector<std::string> labels;
        std::vector<std::vector<ygi::RealImage>> results(method_count);
        for (size_t m = 0; m < method_count; ++m) {
            require("ygi_compare_methods", method_labels[m]);
            labels.emplace_back(method_labels[m]);
            for (size_t i = 0; i < sample_count; ++i) {
                const ygi_image* img = outputs[m * sample_count + i];
                require("ygi_compare_methods", img);
                results[m].push_back(img->image);
            }
        }
        std::vector<std::string> names;
        if (sample_labels) {
            for (size_t i = 0; i < sample_count; ++i) names.emplace_back(sample_labels[i] ? sample_labels[i] : "");
        }
        const auto report = ygi::compare_methods(truth, labels, results, names);
        if (text_path && csv_path) {
            report.write(text_path, csv_path);
        } else if (text_path || csv_path) {
            throw ygi::argument_error("ygi_compare_methods: give both report paths or neither");
        }
        if (text) *text = duplicate(report.text_table());
        if (csv) *csv = duplicate(report.csv());
    });
}

// ---- stability experiment -------------------------------------------------

ygi_status ygi_stability_run(ygi_model* model, const ygi_image* sample, int64_t sample_id, const ygi_optics* optics,
                             int32_t repetitions, uint64_t base_seed, ygi_stability** out) {
    return guarded([&] {
        require("ygi_stability_run", model, sample, optics, out);
        auto s = std::make_unique<ygi_stability>();
        s->result = ygi::stability_experiment(*model->net, as<ygi::SampleImage>(*sample), sample_id, to_cpp(*optics),
                                              repetitions, base_seed);
        for (const auto& o : s->result.outputs) s->outputs.push_back({o});
        for (const auto& p : s->result.inputs) s->inputs.push_back(to_c(p));
        *out = s.release();
    });
}

void ygi_stability_free(ygi_stability* result) { delete result; }

int32_t ygi_stability_repetitions(const ygi_stability* result) {
    return result ? static_cast<int32_t>(result->outputs.size()) : 0;
}

const double* ygi_stability_matrix(const ygi_stability* result) {
    return result ? result->result.ssim_matrix.data() : nullptr;
}

const double* ygi_stability_target_ssim(const ygi_stability* result) {
    return result ? result->result.target_ssim.data() : nullptr;
}

double ygi_stability_mean_offdiagonal(const ygi_stability* result) {
    return result ? result->result.mean_offdiagonal_ssim : 0.0;
}

const ygi_image* ygi_stability_output(const ygi_stability* result, int32_t index) {
    return result && index >= 0 && static_cast<size_t>(index) < result->outputs.size() ? &result->outputs[index]
                                                                                        : nullptr;
}

const ygi_pair* ygi_stability_input(const ygi_stability* result, int32_t index) {
    return result && index >= 0 && static_cast<size_t>(index) < result->inputs.size() ? &result->inputs[index]
                                                                                       : nullptr;
}

}  // extern "C"
