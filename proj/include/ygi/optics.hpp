#pragma once

#include <complex>
#include <cstdint>
#include <string_view>
#include <vector>

#include "ygi/image.hpp"

namespace ygi {

// Two-arm lensless ghost-imaging geometry. Lengths in metres.
//
// Fields are simulated on a grid of sim_grid_n * pad_factor cells: the central
// sim_grid_n x sim_grid_n window is what the detectors see, the rest is a zero
// guard band that keeps the periodic propagator from wrapping energy back into
// that window.
struct OpticalConfig {
    double wavelength = 532e-9;
    double d1 = 0.05;
    double d2 = 0.201;
    double source_diameter = 1e-3;
    int sim_grid_n = 128;
    double sim_pitch = 23.44e-6;
    int detector_n = 64;
    double detector_pitch = 46.88e-6;
    int pad_factor = 2;

    // Throws config_error when an invariant does not hold.
    void validate() const;
    // detector_pitch / sim_pitch; validate() guarantees it is integral.
    int binning() const;
    int field_n() const { return sim_grid_n * pad_factor; }
    double distance() const { return d1 + d2; }
    // Spatial frequency per detector pixel of shift, detector_pitch / (wavelength * d2).
    double frequency_pitch() const { return detector_pitch / (wavelength * d2); }
};

struct ComplexField {
    int grid_n = 0;
    double pitch = 0.0;
    std::vector<std::complex<double>> values;

    ComplexField() = default;
    ComplexField(int n, double cell_pitch)
        : grid_n(n), pitch(cell_pitch), values(static_cast<size_t>(n) * n) {}

    std::complex<double>& at(int row, int col) { return values[static_cast<size_t>(row) * grid_n + col]; }
    const std::complex<double>& at(int row, int col) const {
        return values[static_cast<size_t>(row) * grid_n + col];
    }
    // Sum |E|^2 * pitch^2.
    double energy() const;
};

enum class IlluminationMode : std::uint32_t { kStatic = 0, kDynamic = 1 };

std::string_view to_string(IlluminationMode mode);
IlluminationMode parse_mode(std::string_view text);

struct SpecklePair {
    IntensityImage reference;
    IntensityImage test;
    std::uint64_t seed = 0;
    std::int64_t sample_id = -1;
    IlluminationMode mode = IlluminationMode::kDynamic;
};

// Unit-amplitude disc of diameter source_diameter centred on the field grid,
// with an independent uniform phase in [0, 2pi) per in-aperture cell.
ComplexField make_source_field(const OpticalConfig& config, std::uint64_t seed);

// Number of grid cells whose centre lies inside the source aperture.
int aperture_cell_count(const OpticalConfig& config);

// Fresnel propagation by the transfer function exp(-i pi lambda z (fx^2 + fy^2)),
// applied periodically on the field's own grid. The constant phase e^{ikz} is
// dropped; it never reaches a detected intensity.
ComplexField propagate(const ComplexField& field, double distance, const OpticalConfig& config);

// Multiplies by the sample transmittance, nearest-neighbour resampled and
// centred. Cells outside the sample extent are opaque.
ComplexField apply_transmittance(const ComplexField& field, const SampleImage& sample);

// |E|^2 over the central detector window, mean-binned to detector_n pixels.
IntensityImage detect(const ComplexField& field, const OpticalConfig& config);

SpecklePair simulate_pair(const SampleImage& sample, const OpticalConfig& config, std::uint64_t seed);

// Reference arm only: detect(propagate(source, d1 + d2)).
IntensityImage simulate_reference(const OpticalConfig& config, std::uint64_t seed);

// g2(d) = <I(x) I(x + d)>_x / <I>^2 for every displacement with at least one
// in-frame pixel pair. The map is (2n - 1) square with d = 0 at (n - 1, n - 1).
struct CorrelationMap {
    int n = 0;
    std::vector<double> values;

    int center() const { return n / 2; }
    double at(int dy, int dx) const {
        return values[static_cast<size_t>(dy + center()) * n + (dx + center())];
    }
};

CorrelationMap autocorrelation_g2(const IntensityImage& image);

struct SpeckleStats {
    double peak = 0.0;        // g2(0)
    double fwhm_pixels = 0.0; // full width where g2 crosses (g2(0) + 1) / 2, mean of both axes
};

SpeckleStats speckle_stats(const CorrelationMap& g2);

// Expected speckle grain size lambda * (d1 + d2) / source_diameter, in detector pixels.
double expected_grain_pixels(const OpticalConfig& config);

}  // namespace ygi
