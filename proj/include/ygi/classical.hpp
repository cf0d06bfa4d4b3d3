#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "ygi/image.hpp"
#include "ygi/optics.hpp"

namespace ygi {

// |T(f)|^2 sampled on an n x n grid of detector-pixel shifts d = x_r - x_t,
// d in [-n/2, n/2 - 1] per axis, zero shift at index (n/2, n/2).
// Frequency of shift d is d * freq_pitch.
struct FourierModulus {
    int n = 0;
    double freq_pitch = 0.0;
    std::vector<double> values;

    int center() const { return n / 2; }
    double& at(int dy, int dx) { return values[static_cast<size_t>(dy + center()) * n + (dx + center())]; }
    double at(int dy, int dx) const { return values[static_cast<size_t>(dy + center()) * n + (dx + center())]; }
};

// Cross-correlation of intensity fluctuations <dI_r(x_t + d) dI_t(x_t)>, averaged
// over every in-frame pixel pair of every frame. Fluctuations are taken about
// each frame's spatial mean; negative estimates are clamped to zero.
FourierModulus fgi_correlate(std::span<const SpecklePair> pairs, const OpticalConfig& config);

// y = A b with one row per test pixel whose full shift neighbourhood is in frame,
// A[j, k] = I_r(x_j + d_k), y[j] = I_t(x_j). Shifts d_k run row-major over
// [-radius, radius]^2.
struct SensingSystem {
    int shift_radius = 0;
    double freq_pitch = 0.0;
    Eigen::MatrixXd matrix;
    Eigen::VectorXd observation;
};

SensingSystem build_sensing_system(const SpecklePair& pair, int shift_radius, const OpticalConfig& config);

struct SensingSolution {
    FourierModulus estimate;       // (2 * radius + 1)^2, zero shift in the middle
    std::vector<double> objective; // ||A b - y||_2 before the first step and after each step
};

// Nonnegative least squares by projected gradient with step 1/L, L estimated
// by power iteration on A^T A.
SensingSolution solve_sensing(const SensingSystem& system, int iterations);

struct PhaseRetrievalOptions {
    int support_n = 28;
    double beta = 0.9;
    int iterations = 1000;
    int restarts = 20;
    std::uint64_t seed = 0;
    // Fienup error reduction instead of hybrid input-output.
    bool error_reduction = false;
    // Record the Fourier-domain residual after every iteration of restart 0.
    bool trace = false;
};

struct PhaseRetrievalResult {
    SampleImage image;       // support_n square, min-max normalized to [0, 1]
    double residual = 0.0;   // || |F(x)| - sqrt(modulus) || / || sqrt(modulus) ||
    bool degenerate = false; // modulus was identically zero
    int best_restart = 0;
    std::vector<double> residual_trace;
};

PhaseRetrievalResult hio_phase_retrieval(const FourierModulus& modulus, const PhaseRetrievalOptions& options);

// Replaces each spectrum magnitude by the target magnitude, keeping phase; zero
// bins take phase 0.
void magnitude_projection(std::span<std::complex<double>> spectrum, std::span<const double> magnitude);

struct ClassicalResult {
    SampleImage image;
    FourierModulus modulus;
    double residual = 0.0;
    bool degenerate = false;
};

// Single-pair Fourier-transform ghost imaging: spatially averaged correlation
// followed by phase retrieval.
ClassicalResult classical_pipeline(const SpecklePair& pair, const OpticalConfig& config,
                                   const PhaseRetrievalOptions& options = {});

}  // namespace ygi
