// Command-line driver. Talks to the library only through the C interface.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "ygi/ygi.h"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

enum Exit { kOk = 0, kConfig = 2, kIo = 3, kNumeric = 4, kOther = 5 };

int exit_code(ygi_status s) {
    switch (s) {
        case YGI_OK: return kOk;
        case YGI_ERR_CONFIG:
        case YGI_ERR_ARGUMENT: return kConfig;
        case YGI_ERR_IO:
        case YGI_ERR_FORMAT:
        case YGI_ERR_CORRUPT: return kIo;
        case YGI_ERR_NUMERIC:
        case YGI_ERR_DEGENERATE: return kNumeric;
        default: return kOther;
    }
}

struct Failure {
    int code;
    std::string message;
};

void check(ygi_status s, const std::string& context) {
    if (s != YGI_OK) throw Failure{exit_code(s), context + ": " + ygi_status_name(s) + ": " + ygi_last_error()};
}

// RAII wrappers over the C handles.
template <typename T, void (*Free)(T*)>
struct Handle {
    T* ptr = nullptr;
    Handle() = default;
    Handle(const Handle&) = delete;
    Handle& operator=(const Handle&) = delete;
    Handle(Handle&& o) noexcept : ptr(o.ptr) { o.ptr = nullptr; }
    Handle& operator=(Handle&& o) noexcept {
        std::swap(ptr, o.ptr);
        return *this;
    }
    ~Handle() {
        if (ptr) Free(ptr);
    }
    T** out() { return &ptr; }
    T* get() const { return ptr; }
};

using Image = Handle<ygi_image, ygi_image_free>;
using Pair = Handle<ygi_pair, ygi_pair_free>;
using Digits = Handle<ygi_digits, ygi_digits_free>;
using Dataset = Handle<ygi_dataset, ygi_dataset_free>;
using ModelHandle = Handle<ygi_model, ygi_model_free>;
using Stability = Handle<ygi_stability, ygi_stability_free>;

// [section] key = value files; keys map onto --section.key flags.
class DottedIni : public CLI::ConfigINI {
public:
    std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
        std::vector<CLI::ConfigItem> out;
        for (auto& item : CLI::ConfigINI::from_config(in)) {
            if (item.name == "++" || item.name == "--") continue;
            std::string prefix;
            for (const auto& p : item.parents) prefix += p + ".";
            item.name = prefix + item.name;
            item.parents.clear();
            out.push_back(std::move(item));
        }
        return out;
    }
};

struct Settings {
    std::uint64_t seed = 20200721;
    std::string mode = "dynamic";
    std::string method = "ynet";
    std::string out = "ygi_out";
    int epochs = 40;
    int pairs = 4000;
    bool resume = false;
    int index = 0;

    ygi_optics optics{};
    std::string images = "data/mnist5k-images-idx3-ubyte";
    std::string labels = "data/mnist5k-labels-idx1-ubyte";
    int val_count = 500;
    int test_count = 500;
    std::string train_path, val_path, test_path;

    std::string width = "desk";
    double dropout = 0.6;
    bool shared_encoders = false;
    std::string checkpoint;

    ygi_train_options train{};
    ygi_classical_options classical{};

    int eval_samples = 100;
    int stability_digits = 10;
    int repetitions = 10;
    int autocorr_frames = 20;
};

std::uint64_t fnv1a_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[1 << 16];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
    }
    return h;
}

std::string hex(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string config_echo(const CLI::App& app) {
    std::map<std::string, std::vector<std::pair<std::string, std::string>>> sections;
    for (const auto* opt : app.get_options()) {
        const auto& names = opt->get_lnames();
        if (names.empty() || names[0] == "help" || names[0] == "config" || names[0] == "resume") continue;
        const std::string value = opt->count() ? opt->as<std::string>() : opt->get_default_str();
        const auto dot = names[0].find('.');
        if (dot == std::string::npos) {
            sections[""].push_back({names[0], value});
        } else {
            sections[names[0].substr(0, dot)].push_back({names[0].substr(dot + 1), value});
        }
    }
    std::ostringstream os;
    for (const auto& [section, items] : sections) {
        if (!section.empty()) os << "\n[" << section << "]\n";
        for (const auto& [k, v] : items) os << k << " = " << (v.empty() ? "\"\"" : v) << "\n";
    }
    return os.str();
}

// Collects provenance for one command and writes it next to the outputs.
class Manifest {
public:
    Manifest(std::string command, const CLI::App& app, const fs::path& dir) : dir_(dir) {
        doc_["command"] = std::move(command);
        doc_["version"] = ygi_version();
        doc_["config"] = config_echo(app);
        doc_["seeds"] = json::object();
        doc_["artifacts"] = json::array();
    }
    void seed(const std::string& name, std::uint64_t v) { doc_["seeds"][name] = v; }
    void note(const std::string& name, json v) { doc_[name] = std::move(v); }
    void artifact(const fs::path& path, json extra = json::object()) {
        extra["path"] = fs::relative(path, dir_).generic_string();
        extra["fnv1a64"] = hex(fnv1a_file(path));
        doc_["artifacts"].push_back(std::move(extra));
    }
    void write() {
        std::ofstream(dir_ / "config.ini") << doc_["config"].get<std::string>();
        std::ofstream out(dir_ / "manifest.json");
        out << doc_.dump(2) << "\n";
        if (!out) throw Failure{kIo, "cannot write manifest in '" + dir_.string() + "'"};
    }

private:
    fs::path dir_;
    json doc_;
};

ygi_mode parse_mode(const std::string& m) { return m == "static" ? YGI_MODE_STATIC : YGI_MODE_DYNAMIC; }

fs::path or_default(const std::string& path, const fs::path& fallback) { return path.empty() ? fallback : fs::path(path); }

void write_image(Manifest& manifest, const ygi_image* image, const fs::path& path) {
    double lo = 0, hi = 0;
    check(ygi_image_write_pgm(image, path.string().c_str(), 0, 0, &lo, &hi), "writing " + path.string());
    manifest.artifact(path, {{"scale_lo", lo}, {"scale_hi", hi}});
}

Digits load_digits(const Settings& s) {
    for (const auto& p : {s.images, s.labels}) {
        if (!p.empty() && !fs::exists(p)) {
            throw Failure{kIo, "digit file not found: '" + p + "'. Expected IDX files at data.images = '" + s.images +
                                   "' and data.labels = '" + s.labels + "' (run tools/make_mnist_subset.py)"};
        }
    }
    Digits d;
    check(ygi_digits_load(s.images.c_str(), s.labels.empty() ? nullptr : s.labels.c_str(), d.out()), "loading digits");
    return d;
}

ygi_model_config model_config(const Settings& s) {
    ygi_model_config c;
    ygi_model_config_defaults(&c, s.width == "full");
    c.dropout_rate = s.dropout;
    c.input_n = s.optics.detector_n;
    c.shared_encoders = s.shared_encoders ? 1 : 0;
    return c;
}

ModelHandle load_model(const Settings& s, const fs::path& out) {
    const fs::path path = or_default(s.checkpoint, out / "best.ync");
    ModelHandle m;
    check(ygi_model_load(path.string().c_str(), m.out()), "loading model '" + path.string() + "'");
    return m;
}

struct Record {
    Pair pair;
    Image target;
    std::int64_t sample_id = 0;
};

Record read_record(ygi_dataset* ds, std::uint64_t index) {
    Record r;
    check(ygi_dataset_record(ds, index, r.pair.out(), r.target.out(), &r.sample_id),
          "reading record " + std::to_string(index));
    return r;
}

std::uint64_t record_count(ygi_dataset* ds) {
    ygi_dataset_info info;
    check(ygi_dataset_info_get(ds, &info), "dataset header");
    return info.record_count;
}

Image reconstruct_classical(const Settings& s, const ygi_pair* pair, Image* modulus) {
    Image out;
    double residual = 0;
    int32_t degenerate = 0;
    check(ygi_classical_reconstruct(pair, &s.optics, &s.classical, out.out(), modulus ? modulus->out() : nullptr,
                                    &residual, &degenerate),
          "classical reconstruction");
    return out;
}

Image predict(ygi_model* model, const ygi_pair* pair) {
    Image out;
    check(ygi_predict(model, ygi_pair_reference(pair), ygi_pair_test(pair), out.out()), "network prediction");
    return out;
}

// ---- commands -------------------------------------------------------------

void cmd_generate(const Settings& s, const CLI::App& app, const fs::path& out) {
    auto digits = load_digits(s);
    const size_t available = ygi_digits_count(digits.get());
    const size_t need = static_cast<size_t>(s.pairs) + s.val_count + s.test_count;
    if (need > available) {
        throw Failure{kConfig, "need " + std::to_string(need) + " digits for the splits, only " +
                                   std::to_string(available) + " available"};
    }
    Manifest manifest("generate", app, out);
    manifest.seed("base_seed", s.seed);
    const ygi_mode mode = parse_mode(s.mode);
    struct Split {
        const char* name;
        size_t first, count;
        fs::path path;
    };
    const Split splits[] = {
        {"train", 0, static_cast<size_t>(s.pairs), or_default(s.train_path, out / "train.ygi")},
        {"val", static_cast<size_t>(s.pairs), static_cast<size_t>(s.val_count), or_default(s.val_path, out / "val.ygi")},
        {"test", static_cast<size_t>(s.pairs) + s.val_count, static_cast<size_t>(s.test_count),
         or_default(s.test_path, out / "test.ygi")},
    };
    for (const auto& sp : splits) {
        if (sp.count == 0) continue;
        check(ygi_dataset_generate(digits.get(), sp.first, sp.count, &s.optics, mode, s.seed, 0,
                                   sp.path.string().c_str()),
              std::string("generating ") + sp.name);
        manifest.artifact(sp.path, {{"split", sp.name}, {"first_digit", sp.first}, {"records", sp.count}});
        std::cout << sp.name << ": " << sp.count << " " << s.mode << " records (digits " << sp.first << ".."
                  << sp.first + sp.count - 1 << ") -> " << sp.path.string() << "\n";
    }
    std::cout << "optics: lambda=" << s.optics.wavelength << " d1=" << s.optics.d1 << " d2=" << s.optics.d2
              << " D=" << s.optics.source_diameter << " detector=" << s.optics.detector_n << "x"
              << s.optics.detector_n << " @ " << s.optics.detector_pitch << " m, base seed " << s.seed << "\n";
    manifest.write();
}

void cmd_train(const Settings& s, const CLI::App& app, const fs::path& out) {
    ModelHandle model;
    const fs::path last = out / "last.ync";
    if (s.resume) {
        check(ygi_model_load(last.string().c_str(), model.out()), "resuming from '" + last.string() + "'");
        std::cout << "resuming after epoch " << ygi_model_epochs_done(model.get()) << "\n";
    } else {
        const auto cfg = model_config(s);
        char* table = nullptr;
        check(ygi_model_geometry(&cfg, &table), "network geometry");
        std::cout << table;
        ygi_string_free(table);
        check(ygi_model_create(&cfg, s.seed, model.out()), "creating network");
    }
    std::cout << "parameters: " << ygi_model_parameter_count(model.get()) << ", fingerprint "
              << hex(ygi_model_fingerprint(model.get())) << "\n";
    Manifest manifest("train", app, out);
    manifest.seed("init_seed", s.seed);
    manifest.seed("train_seed", s.train.seed);
    ygi_train_options opts = s.train;
    opts.epochs = s.epochs;
    const auto train = or_default(s.train_path, out / "train.ygi");
    const auto val = or_default(s.val_path, out / "val.ygi");
    auto on_epoch = [](const ygi_epoch_stats* e, void*) {
        std::printf("epoch %3d  train %.5f  val %.5f  ssim %.4f  psnr %.2f dB  %.1f s%s\n", e->epoch, e->train_loss,
                    e->val_loss, e->val_ssim, e->val_psnr, e->seconds, e->improved ? "  *" : "");
        std::fflush(stdout);
    };
    check(ygi_train(model.get(), train.string().c_str(), val.string().c_str(), &opts, out.string().c_str(), on_epoch,
                    nullptr),
          "training");
    for (const char* name : {"last.ync", "best.ync", "train_report.csv"}) {
        if (fs::exists(out / name)) manifest.artifact(out / name);
    }
    manifest.write();
}

void cmd_reconstruct(const Settings& s, const CLI::App& app, const fs::path& out) {
    Dataset ds;
    const auto test = or_default(s.test_path, out / "test.ygi");
    check(ygi_dataset_open(test.string().c_str(), ds.out()), "opening '" + test.string() + "'");
    auto rec = read_record(ds.get(), static_cast<std::uint64_t>(s.index));
    Manifest manifest("reconstruct", app, out);
    manifest.seed("illumination_seed", ygi_pair_seed(rec.pair.get()));
    const std::string stem = "recon_" + std::to_string(rec.sample_id);
    Image image;
    if (s.method == "ynet") {
        auto model = load_model(s, out);
        image = predict(model.get(), rec.pair.get());
    } else {
        Image modulus;
        manifest.seed("phase_retrieval_seed", s.classical.seed);
        image = reconstruct_classical(s, rec.pair.get(), &modulus);
        write_image(manifest, modulus.get(), out / (stem + "_modulus.pgm"));
    }
    write_image(manifest, image.get(), out / (stem + "_" + s.method + ".pgm"));
    write_image(manifest, rec.target.get(), out / (stem + "_target.pgm"));
    write_image(manifest, ygi_pair_reference(rec.pair.get()), out / (stem + "_reference.pgm"));
    write_image(manifest, ygi_pair_test(rec.pair.get()), out / (stem + "_test.pgm"));
    double ssim = 0, db = 0;
    int32_t inf = 0;
    check(ygi_ssim(image.get(), rec.target.get(), &ssim), "ssim");
    check(ygi_psnr(image.get(), rec.target.get(), &db, &inf), "psnr");
    std::cout << s.method << " reconstruction of sample " << rec.sample_id << ": SSIM " << ssim << ", PSNR "
              << (inf ? std::string("inf") : std::to_string(db)) << " dB\n";
    manifest.note("scores", {{"ssim", ssim}, {"psnr_db", inf ? json("inf") : json(db)}});
    manifest.write();
}

// Central (2 radius + 1) window; the outer lags of a g2 map rest on few pixel pairs.
Image central(const ygi_image* map, int radius) {
    const int n = ygi_image_size(map);
    const int size = std::min(n, 2 * radius + 1);
    const int offset = (n - size) / 2;
    std::vector<double> values(static_cast<size_t>(size) * size);
    const double* src = ygi_image_data(map);
    for (int r = 0; r < size; ++r) {
        for (int c = 0; c < size; ++c) values[static_cast<size_t>(r) * size + c] = src[(r + offset) * n + c + offset];
    }
    Image out;
    check(ygi_image_create(size, ygi_image_pitch(map), values.data(), out.out()), "cropping");
    return out;
}

void autocorr_panels(const Settings& s, Manifest& manifest, const fs::path& out) {
    // Simulation geometry: one reference frame. Experimental surrogate: the mean
    // over independent exposures, as a camera sequence would be averaged.
    std::vector<Image> frames(static_cast<size_t>(s.autocorr_frames));
    std::vector<const ygi_image*> views;
    for (int k = 0; k < s.autocorr_frames; ++k) {
        const auto seed = ygi_derive_seed(s.seed, -1, static_cast<std::uint64_t>(k), YGI_MODE_DYNAMIC);
        check(ygi_simulate_reference(&s.optics, seed, frames[k].out()), "simulating reference speckle");
        views.push_back(frames[k].get());
    }
    double grain = 0;
    check(ygi_expected_grain(&s.optics, &grain), "grain size");
    std::ofstream csv(out / "autocorr.csv");
    csv << "panel,frames,g2_peak,fwhm_pixels,expected_pixels\n";
    json summary = json::array();
    for (const auto& [name, count] : {std::pair<std::string, size_t>{"simulation", 1},
                                      std::pair<std::string, size_t>{"surrogate", views.size()}}) {
        Image map;
        double peak = 0, fwhm = 0;
        check(ygi_autocorrelation(views.data(), count, map.out(), &peak, &fwhm), "autocorrelation");
        write_image(manifest, central(map.get(), 16).get(), out / ("g2_" + name + ".pgm"));
        csv << name << "," << count << "," << peak << "," << fwhm << "," << grain << "\n";
        std::cout << name << ": " << count << " frame(s), g2(0) = " << peak << ", FWHM = " << fwhm
                  << " px (expected grain " << grain << " px)\n";
        summary.push_back({{"panel", name}, {"frames", count}, {"g2_peak", peak}, {"fwhm_pixels", fwhm}});
    }
    write_image(manifest, views.front(), out / "speckle_reference.pgm");
    csv.close();
    manifest.artifact(out / "autocorr.csv");
    manifest.note("autocorrelation", summary);
}

void stability_grids(const Settings& s, ygi_model* model, ygi_dataset* ds, Manifest& manifest, const fs::path& out) {
    const auto count = std::min<std::uint64_t>(record_count(ds), static_cast<std::uint64_t>(s.stability_digits));
    std::ofstream csv(out / "stability_ssim.csv");
    csv << "sample_id,i,j,ssim\n";
    std::ofstream summary(out / "stability_summary.csv");
    summary << "sample_id,mean_offdiagonal_ssim,mean_target_ssim,max_target_deviation\n";
    std::vector<Image> keep;
    std::vector<const ygi_image*> grid;
    for (std::uint64_t k = 0; k < count; ++k) {
        auto rec = read_record(ds, k);
        Stability st;
        check(ygi_stability_run(model, rec.target.get(), rec.sample_id, &s.optics, s.repetitions, s.seed, st.out()),
              "stability experiment");
        const int n = ygi_stability_repetitions(st.get());
        const double* m = ygi_stability_matrix(st.get());
        const double* t = ygi_stability_target_ssim(st.get());
        double mean_t = 0, dev = 0;
        for (int i = 0; i < n; ++i) mean_t += t[i] / n;
        for (int i = 0; i < n; ++i) dev = std::max(dev, std::abs(t[i] - mean_t));
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) csv << rec.sample_id << "," << i << "," << j << "," << m[i * n + j] << "\n";
        }
        summary << rec.sample_id << "," << ygi_stability_mean_offdiagonal(st.get()) << "," << mean_t << "," << dev
                << "\n";
        std::cout << "sample " << rec.sample_id << ": mean pairwise SSIM " << ygi_stability_mean_offdiagonal(st.get())
                  << ", target SSIM " << mean_t << " +/- " << dev << "\n";
        for (int i = 0; i < n; ++i) {
            Image copy;
            const ygi_image* o = ygi_stability_output(st.get(), i);
            check(ygi_image_create(ygi_image_size(o), ygi_image_pitch(o), ygi_image_data(o), copy.out()), "copy");
            grid.push_back(copy.get());
            keep.push_back(std::move(copy));
        }
    }
    csv.close();
    summary.close();
    if (!grid.empty()) {
        Image mosaic;
        check(ygi_image_mosaic(grid.data(), grid.size(), s.repetitions, mosaic.out()), "stability grid");
        write_image(manifest, mosaic.get(), out / "stability_grid.pgm");
    }
    manifest.artifact(out / "stability_ssim.csv");
    manifest.artifact(out / "stability_summary.csv");
    manifest.seed("stability_base_seed", s.seed);
}

void cmd_autocorr(const Settings& s, const CLI::App& app, const fs::path& out) {
    Manifest manifest("autocorr", app, out);
    manifest.seed("base_seed", s.seed);
    autocorr_panels(s, manifest, out);
    manifest.write();
}

void cmd_stability(const Settings& s, const CLI::App& app, const fs::path& out) {
    auto model = load_model(s, out);
    Dataset ds;
    const auto test = or_default(s.test_path, out / "test.ygi");
    check(ygi_dataset_open(test.string().c_str(), ds.out()), "opening '" + test.string() + "'");
    Manifest manifest("stability", app, out);
    stability_grids(s, model.get(), ds.get(), manifest, out);
    manifest.write();
}

void cmd_evaluate(const Settings& s, const CLI::App& app, const fs::path& out) {
    auto model = load_model(s, out);
    Dataset ds;
    const auto test = or_default(s.test_path, out / "test.ygi");
    check(ygi_dataset_open(test.string().c_str(), ds.out()), "opening '" + test.string() + "'");
    Digits digits;
    if (fs::exists(s.images) && fs::exists(s.labels)) digits = load_digits(s);  // labels only annotate the report
    Manifest manifest("evaluate", app, out);
    manifest.seed("phase_retrieval_seed", s.classical.seed);

    const auto count = std::min<std::uint64_t>(record_count(ds.get()), static_cast<std::uint64_t>(s.eval_samples));
    std::vector<Image> targets, ynet, classical;
    std::vector<std::string> names;
    for (std::uint64_t k = 0; k < count; ++k) {
        auto rec = read_record(ds.get(), k);
        ynet.push_back(predict(model.get(), rec.pair.get()));
        classical.push_back(reconstruct_classical(s, rec.pair.get(), nullptr));
        const int label = digits.get() ? ygi_digits_label(digits.get(), static_cast<size_t>(rec.sample_id)) : -1;
        names.push_back(std::to_string(rec.sample_id) + (label >= 0 ? ":" + std::to_string(label) : ""));
        targets.push_back(std::move(rec.target));
        if ((k + 1) % 10 == 0) std::cerr << "evaluated " << k + 1 << "/" << count << "\n";
    }
    std::vector<const ygi_image*> target_views, outputs;
    std::vector<const char*> labels;
    for (auto& t : targets) target_views.push_back(t.get());
    for (auto& y : ynet) outputs.push_back(y.get());
    for (auto& c : classical) outputs.push_back(c.get());
    for (auto& n : names) labels.push_back(n.c_str());
    const char* methods[] = {"Y-net", "GI"};
    char* text = nullptr;
    const auto txt_path = (out / "report.txt").string(), csv_path = (out / "report.csv").string();
    check(ygi_compare_methods(target_views.data(), targets.size(), methods, 2, outputs.data(), labels.data(),
                              txt_path.c_str(), csv_path.c_str(), &text, nullptr),
          "metric report");
    std::cout << text;
    ygi_string_free(text);
    manifest.artifact(txt_path);
    manifest.artifact(csv_path);

    const size_t shown = std::min<size_t>(10, targets.size());
    if (shown > 0) {
        std::vector<const ygi_image*> panel;
        for (size_t i = 0; i < shown; ++i) panel.push_back(target_views[i]);
        for (size_t i = 0; i < shown; ++i) panel.push_back(ynet[i].get());
        for (size_t i = 0; i < shown; ++i) panel.push_back(classical[i].get());
        Image mosaic;
        check(ygi_image_mosaic(panel.data(), panel.size(), static_cast<int32_t>(shown), mosaic.out()), "panel");
        write_image(manifest, mosaic.get(), out / "comparison.pgm");
    }
    autocorr_panels(s, manifest, out);
    stability_grids(s, model.get(), ds.get(), manifest, out);
    manifest.write();
}

void add_options(CLI::App& app, Settings& s) {
    // a repeated option overrides the earlier one, as in the config file
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    ygi_optics_defaults(&s.optics);
    ygi_train_defaults(&s.train);
    ygi_classical_defaults(&s.classical);
    s.train.seed = s.seed;
    s.classical.seed = s.seed;

    app.add_option("--seed", s.seed, "Base seed for illumination, initialization and shuffling");
    app.add_option("--mode", s.mode, "Illumination mode")->check(CLI::IsMember({"static", "dynamic"}));
    app.add_option("--method", s.method, "Reconstruction method")->check(CLI::IsMember({"ynet", "classical"}));
    app.add_option("--out", s.out, "Output directory");
    app.add_option("--epochs", s.epochs, "Training epochs (total, including resumed ones)")
        ->check(CLI::NonNegativeNumber);
    app.add_option("--pairs", s.pairs, "Training pairs to generate")->check(CLI::NonNegativeNumber);
    app.add_flag("--resume", s.resume, "Continue training from <out>/last.ync");
    app.add_option("--index", s.index, "Test record to reconstruct")->check(CLI::NonNegativeNumber);

    app.add_option("--optics.wavelength", s.optics.wavelength, "Wavelength [m]");
    app.add_option("--optics.d1", s.optics.d1, "Source to splitter distance [m]");
    app.add_option("--optics.d2", s.optics.d2, "Object/splitter to detector distance [m]");
    app.add_option("--optics.source_diameter", s.optics.source_diameter, "Source aperture diameter [m]");
    app.add_option("--optics.sim_pitch", s.optics.sim_pitch, "Simulation grid pitch [m]");
    app.add_option("--optics.detector_pitch", s.optics.detector_pitch, "Detector pixel pitch [m]");
    app.add_option("--optics.sim_grid_n", s.optics.sim_grid_n, "Simulation grid size");
    app.add_option("--optics.detector_n", s.optics.detector_n, "Detector size in pixels");
    app.add_option("--optics.pad_factor", s.optics.pad_factor, "Guard-band factor of the field grid");

    app.add_option("--data.images", s.images, "IDX image file");
    app.add_option("--data.labels", s.labels, "IDX label file");
    app.add_option("--data.val_count", s.val_count, "Validation pairs")->check(CLI::NonNegativeNumber);
    app.add_option("--data.test_count", s.test_count, "Test pairs")->check(CLI::NonNegativeNumber);
    app.add_option("--data.train", s.train_path, "Training set file (default <out>/train.ygi)");
    app.add_option("--data.val", s.val_path, "Validation set file (default <out>/val.ygi)");
    app.add_option("--data.test", s.test_path, "Test set file (default <out>/test.ygi)");

    app.add_option("--model.width", s.width, "Channel plan")->check(CLI::IsMember({"desk", "full"}));
    app.add_option("--model.dropout", s.dropout, "Decoder dropout rate");
    app.add_option("--model.shared_encoders", s.shared_encoders, "Use one encoder for both arms (diagnostic)");
    app.add_option("--model.checkpoint", s.checkpoint, "Model file (default <out>/best.ync)");

    app.add_option("--train.batch_size", s.train.batch_size, "Mini-batch size")->check(CLI::PositiveNumber);
    app.add_option("--train.learning_rate", s.train.learning_rate, "Adam step size");
    app.add_option("--train.beta1", s.train.beta1, "Adam first-moment decay");
    app.add_option("--train.beta2", s.train.beta2, "Adam second-moment decay");
    app.add_option("--train.epsilon", s.train.epsilon, "Adam epsilon");

    app.add_option("--classical.support_n", s.classical.support_n, "Phase-retrieval support width");
    app.add_option("--classical.beta", s.classical.beta, "HIO feedback");
    app.add_option("--classical.iterations", s.classical.iterations, "HIO iterations per restart");
    app.add_option("--classical.restarts", s.classical.restarts, "Random restarts");
    app.add_option("--classical.error_reduction", s.classical.error_reduction, "Use error reduction instead of HIO");

    app.add_option("--eval.samples", s.eval_samples, "Test digits in the metric report");
    app.add_option("--eval.stability_digits", s.stability_digits, "Digits in the stability experiment");
    app.add_option("--eval.repetitions", s.repetitions, "Illumination realizations per digit");
    app.add_option("--eval.autocorr_frames", s.autocorr_frames, "Frames in the averaged autocorrelation")
        ->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app("Ghost imaging with a dual-encoder network and a classical correlation baseline");
    app.fallthrough();
    app.option_defaults()->always_capture_default();
    app.config_formatter(std::make_shared<DottedIni>());
    app.set_config("--config", "", "INI file; [section] key = value sets --section.key");
    Settings s;
    add_options(app, s);
    app.require_subcommand(1, 1);
    using Command = void (*)(const Settings&, const CLI::App&, const fs::path&);
    const std::pair<const char*, Command> commands[] = {
        {"generate", cmd_generate},   {"train", cmd_train}, {"reconstruct", cmd_reconstruct},
        {"evaluate", cmd_evaluate},   {"autocorr", cmd_autocorr}, {"stability", cmd_stability},
    };
    const char* help[] = {"Simulate train/val/test speckle datasets", "Train the network",
                          "Reconstruct one test pair", "Metric report, autocorrelation and stability figures",
                          "Speckle autocorrelation panels", "Repeated-illumination stability grids"};
    for (size_t i = 0; i < std::size(commands); ++i) app.add_subcommand(commands[i].first, help[i]);
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }
    // Options that follow the seed unless set explicitly.
    if (app.get_option("--seed")->count()) {
        s.train.seed = s.seed;
        s.classical.seed = s.seed;
    }
    try {
        check(ygi_optics_validate(&s.optics), "optics");
        const fs::path out = s.out;
        fs::create_directories(out);
        for (const auto& [name, fn] : commands) {
            if (app.got_subcommand(name)) fn(s, app, out);
        }
    } catch (const Failure& f) {
        std::cerr << "error: " << f.message << "\n";
        return f.code;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kOther;
    }
    return kOk;
}
