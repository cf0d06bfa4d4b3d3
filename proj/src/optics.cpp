#include "ygi/optics.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "ygi/error.hpp"
#include "ygi/fft.hpp"
#include "ygi/random.hpp"

namespace ygi {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Physical coordinate of cell index i on an n-cell grid; index n/2 is the origin,
// matching the zero-frequency bin after fftshift.
double cell_coordinate(int i, int n, double pitch) { return (i - n / 2) * pitch; }

}  // namespace

void OpticalConfig::validate() const {
    auto fail = [](const std::string& what) { throw config_error("optical config: " + what); };
    if (!(wavelength > 0.0)) fail("wavelength must be positive");
    if (!(d1 > 0.0) || !(d2 > 0.0)) fail("d1 and d2 must be positive");
    if (!(source_diameter > 0.0)) fail("source_diameter must be positive");
    if (!(sim_pitch > 0.0) || !(detector_pitch > 0.0)) fail("pitches must be positive");
    if (sim_grid_n < 2 || detector_n < 1) fail("grid sizes must be positive");
    if (pad_factor < 1) fail("pad_factor must be >= 1");
    const double ratio = detector_pitch / sim_pitch;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio || std::round(ratio) < 1.0) {
        std::ostringstream os;
        os << "sim_pitch must divide detector_pitch exactly (ratio " << ratio << ")";
        fail(os.str());
    }
    if (detector_n * binning() > sim_grid_n) {
        std::ostringstream os;
        os << "detector window " << detector_n * detector_pitch << " m exceeds simulation window "
           << sim_grid_n * sim_pitch << " m";
        fail(os.str());
    }
}

int OpticalConfig::binning() const { return static_cast<int>(std::lround(detector_pitch / sim_pitch)); }

double ComplexField::energy() const {
    double sum = 0.0;
    for (const auto& v : values) sum += std::norm(v);
    return sum * pitch * pitch;
}

std::string_view to_string(IlluminationMode mode) {
    return mode == IlluminationMode::kStatic ? "static" : "dynamic";
}

IlluminationMode parse_mode(std::string_view text) {
    if (text == "static") return IlluminationMode::kStatic;
    if (text == "dynamic") return IlluminationMode::kDynamic;
    throw config_error("unknown illumination mode '" + std::string(text) + "' (expected static|dynamic)");
}

int aperture_cell_count(const OpticalConfig& config) {
    const int n = config.field_n();
    const double radius = 0.5 * config.source_diameter;
    int count = 0;
    for (int r = 0; r < n; ++r) {
        const double y = cell_coordinate(r, n, config.sim_pitch);
        for (int c = 0; c < n; ++c) {
            const double x = cell_coordinate(c, n, config.sim_pitch);
            if (x * x + y * y <= radius * radius) ++count;
        }
    }
    return count;
}

ComplexField make_source_field(const OpticalConfig& config, std::uint64_t seed) {
    config.validate();
    if (config.source_diameter < config.sim_pitch) {
        throw degenerate_error("source aperture is smaller than one simulation cell");
    }
    const int n = config.field_n();
    const double radius = 0.5 * config.source_diameter;
    if (radius > 0.5 * n * config.sim_pitch) throw config_error("source aperture exceeds the field window");

    ComplexField field(n, config.sim_pitch);
    std::mt19937_64 rng(seed);
    for (int r = 0; r < n; ++r) {
        const double y = cell_coordinate(r, n, config.sim_pitch);
        for (int c = 0; c < n; ++c) {
            const double x = cell_coordinate(c, n, config.sim_pitch);
            if (x * x + y * y <= radius * radius) {
                field.at(r, c) = std::polar(1.0, kTwoPi * unit_interval(rng()));
            }
        }
    }
    return field;
}

ComplexField propagate(const ComplexField& field, double distance, const OpticalConfig& config) {
    if (!(distance >= 0.0)) throw argument_error("propagate: distance must be >= 0");
    if (!(config.wavelength > 0.0)) throw config_error("optical config: wavelength must be positive");
    if (distance == 0.0) return field;

    const int n = field.grid_n;
    ComplexField out = field;
    fft::forward2d(out.values, n);
    const double df = 1.0 / (n * field.pitch);
    const double chirp = std::numbers::pi * config.wavelength * distance;
    std::vector<double> f2(n);
    for (int i = 0; i < n; ++i) {
        const double f = (i < (n + 1) / 2 ? i : i - n) * df;
        f2[i] = f * f;
    }
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
            out.at(r, c) *= std::polar(1.0, -chirp * (f2[r] + f2[c]));
        }
    }
    fft::inverse2d(out.values, n);
    return out;
}

ComplexField apply_transmittance(const ComplexField& field, const SampleImage& sample) {
    const double window = field.grid_n * field.pitch;
    const double extent = sample.extent();
    if (sample.n <= 0 || !(sample.pitch > 0.0)) throw argument_error("apply_transmittance: empty sample");
    if (extent > window * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "sample extent " << extent << " m exceeds field window " << window << " m";
        throw argument_error(os.str());
    }
    const int n = field.grid_n;
    // Sample index for each field row/column; -1 marks the opaque surround.
    std::vector<int> index(n);
    for (int i = 0; i < n; ++i) {
        const double u = cell_coordinate(i, n, field.pitch) + 0.5 * extent;
        const double j = std::floor(u / sample.pitch + 1e-9);
        index[i] = (j >= 0.0 && j < sample.n) ? static_cast<int>(j) : -1;
    }
    ComplexField out(n, field.pitch);
    for (int r = 0; r < n; ++r) {
        if (index[r] < 0) continue;
        for (int c = 0; c < n; ++c) {
            if (index[c] < 0) continue;
            out.at(r, c) = field.at(r, c) * sample.at(index[r], index[c]);
        }
    }
    return out;
}

IntensityImage detect(const ComplexField& field, const OpticalConfig& config) {
    config.validate();
    const int ratio = config.binning();
    const int window = config.detector_n * ratio;
    if (window > field.grid_n) throw argument_error("detect: detector window exceeds field grid");
    const int start = field.grid_n / 2 - window / 2;
    const double inv = 1.0 / (static_cast<double>(ratio) * ratio);

    IntensityImage image(config.detector_n, config.detector_pitch);
    for (int r = 0; r < config.detector_n; ++r) {
        for (int c = 0; c < config.detector_n; ++c) {
            double sum = 0.0;
            for (int i = 0; i < ratio; ++i) {
                for (int j = 0; j < ratio; ++j) {
                    sum += std::norm(field.at(start + r * ratio + i, start + c * ratio + j));
                }
            }
            image.at(r, c) = sum * inv;
        }
    }
    return image;
}

SpecklePair simulate_pair(const SampleImage& sample, const OpticalConfig& config, std::uint64_t seed) {
    const ComplexField source = make_source_field(config, seed);
    SpecklePair pair;
    pair.seed = seed;
    pair.reference = detect(propagate(source, config.d1 + config.d2, config), config);
    const ComplexField at_sample = propagate(source, config.d1, config);
    pair.test = detect(propagate(apply_transmittance(at_sample, sample), config.d2, config), config);
    return pair;
}

IntensityImage simulate_reference(const OpticalConfig& config, std::uint64_t seed) {
    return detect(propagate(make_source_field(config, seed), config.distance(), config), config);
}

CorrelationMap autocorrelation_g2(const IntensityImage& image) {
    const int n = image.n;
    if (n <= 0) throw argument_error("autocorrelation_g2: empty image");
    double mean = 0.0;
    for (double v : image.values) mean += v;
    mean /= static_cast<double>(image.size());
    if (!(mean > 0.0)) throw degenerate_error("autocorrelation_g2: image mean must be positive");

    CorrelationMap map;
    map.n = 2 * n - 1;
    map.values.assign(static_cast<size_t>(map.n) * map.n, 0.0);
    const double norm = 1.0 / (mean * mean);
    for (int dy = -(n - 1); dy <= n - 1; ++dy) {
        const int r0 = std::max(0, -dy), r1 = std::min(n, n - dy);
        for (int dx = -(n - 1); dx <= n - 1; ++dx) {
            const int c0 = std::max(0, -dx), c1 = std::min(n, n - dx);
            double sum = 0.0;
            for (int r = r0; r < r1; ++r) {
                const double* a = &image.values[static_cast<size_t>(r) * n];
                const double* b = &image.values[static_cast<size_t>(r + dy) * n + dx];
                for (int c = c0; c < c1; ++c) sum += a[c] * b[c];
            }
            const double pairs = static_cast<double>(r1 - r0) * (c1 - c0);
            map.values[static_cast<size_t>(dy + n - 1) * map.n + (dx + n - 1)] = sum / pairs * norm;
        }
    }
    return map;
}

SpeckleStats speckle_stats(const CorrelationMap& g2) {
    SpeckleStats stats;
    stats.peak = g2.at(0, 0);
    const double half = 0.5 * (stats.peak + 1.0);
    const int reach = g2.center();
    // Distance from the origin along one direction at which g2 first drops below half.
    auto crossing = [&](int sy, int sx) {
        double prev = stats.peak;
        for (int k = 1; k <= reach; ++k) {
            const double v = g2.at(k * sy, k * sx);
            if (v < half) return (k - 1) + (prev - half) / (prev - v);
            prev = v;
        }
        return static_cast<double>(reach);
    };
    const double wx = crossing(0, 1) + crossing(0, -1);
    const double wy = crossing(1, 0) + crossing(-1, 0);
    stats.fwhm_pixels = 0.5 * (wx + wy);
    return stats;
}

double expected_grain_pixels(const OpticalConfig& config) {
    return config.wavelength * config.distance() / config.source_diameter / config.detector_pitch;
}

}  // namespace ygi
