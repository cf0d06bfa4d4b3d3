#include "ygi/classical.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "ygi/error.hpp"
#include "ygi/fft.hpp"
#include "ygi/random.hpp"

namespace ygi {
namespace {

std::vector<double> fluctuation(const IntensityImage& image) {
    double mean = 0.0;
    for (double v : image.values) mean += v;
    mean /= static_cast<double>(image.size());
    std::vector<double> out(image.size());
    for (size_t i = 0; i < out.size(); ++i) out[i] = image.values[i] - mean;
    return out;
}

double fourier_residual(std::span<const double> image, std::span<const double> magnitude, int n,
                        std::vector<std::complex<double>>& scratch) {
    for (size_t i = 0; i < scratch.size(); ++i) scratch[i] = image[i];
    fft::forward2d(scratch, n);
    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < scratch.size(); ++i) {
        const double d = std::abs(scratch[i]) - magnitude[i];
        num += d * d;
        den += magnitude[i] * magnitude[i];
    }
    return std::sqrt(num / den);
}

struct RestartOutcome {
    std::vector<double> image;  // full n x n, constrained
    double residual = 0.0;
    std::vector<double> trace;
};

RestartOutcome run_restart(std::span<const double> magnitude, std::span<const char> support, int n,
                           const PhaseRetrievalOptions& options, std::uint64_t seed) {
    const size_t size = static_cast<size_t>(n) * n;
    std::mt19937_64 rng(seed);
    std::vector<std::complex<double>> spectrum(size), scratch(size);
    for (size_t i = 0; i < size; ++i) {
        const double phase = 2.0 * std::numbers::pi * unit_interval(rng());
        spectrum[i] = std::polar(magnitude[i], phase);
    }
    fft::inverse2d(spectrum, n);
    std::vector<double> g(size), projected(size, 0.0);
    for (size_t i = 0; i < size; ++i) g[i] = spectrum[i].real();

    RestartOutcome outcome;
    for (int it = 0; it < options.iterations; ++it) {
        for (size_t i = 0; i < size; ++i) spectrum[i] = g[i];
        fft::forward2d(spectrum, n);
        magnitude_projection(spectrum, magnitude);
        fft::inverse2d(spectrum, n);
        for (size_t i = 0; i < size; ++i) {
            const double gp = spectrum[i].real();
            const bool feasible = support[i] && gp >= 0.0;
            projected[i] = feasible ? gp : 0.0;
            if (feasible) {
                g[i] = gp;
            } else {
                g[i] = options.error_reduction ? 0.0 : g[i] - options.beta * gp;
            }
        }
        if (options.trace) outcome.trace.push_back(fourier_residual(projected, magnitude, n, scratch));
    }
    outcome.residual = fourier_residual(projected, magnitude, n, scratch);
    outcome.image = std::move(projected);
    return outcome;
}

}  // namespace

FourierModulus fgi_correlate(std::span<const SpecklePair> pairs, const OpticalConfig& config) {
    if (pairs.empty()) throw argument_error("fgi_correlate: no speckle pairs");
    const int n = pairs.front().reference.n;
    const double pitch = pairs.front().reference.pitch;
    for (const auto& p : pairs) {
        if (p.reference.n != n || p.test.n != n || p.reference.pitch != pitch || p.test.pitch != pitch) {
            throw shape_error("fgi_correlate: speckle pairs do not share geometry");
        }
    }
    FourierModulus out;
    out.n = n;
    out.freq_pitch = pitch / (config.wavelength * config.d2);
    out.values.assign(static_cast<size_t>(n) * n, 0.0);

    std::vector<double> sums(out.values.size(), 0.0);
    for (const auto& pair : pairs) {
        const auto ref = fluctuation(pair.reference);
        const auto test = fluctuation(pair.test);
        for (int dy = -n / 2; dy < n - n / 2; ++dy) {
            const int r0 = std::max(0, -dy), r1 = std::min(n, n - dy);
            for (int dx = -n / 2; dx < n - n / 2; ++dx) {
                const int c0 = std::max(0, -dx), c1 = std::min(n, n - dx);
                double sum = 0.0;
                for (int r = r0; r < r1; ++r) {
                    const double* t = &test[static_cast<size_t>(r) * n];
                    const double* q = &ref[static_cast<size_t>(r + dy) * n + dx];
                    for (int c = c0; c < c1; ++c) sum += q[c] * t[c];
                }
                sums[static_cast<size_t>(dy + n / 2) * n + (dx + n / 2)] += sum / ((r1 - r0) * (c1 - c0));
            }
        }
    }
    const double frames = static_cast<double>(pairs.size());
    for (size_t i = 0; i < sums.size(); ++i) out.values[i] = std::max(0.0, sums[i] / frames);
    return out;
}

SensingSystem build_sensing_system(const SpecklePair& pair, int shift_radius, const OpticalConfig& config) {
    const int n = pair.reference.n;
    if (pair.test.n != n) throw shape_error("build_sensing_system: reference and test differ in size");
    if (shift_radius < 0 || 2 * shift_radius >= n) {
        throw argument_error("build_sensing_system: shift radius leaves no valid overlap");
    }
    const int span = 2 * shift_radius + 1;
    const int inner = n - 2 * shift_radius;
    SensingSystem sys;
    sys.shift_radius = shift_radius;
    sys.freq_pitch = pair.reference.pitch / (config.wavelength * config.d2);
    sys.matrix.resize(static_cast<Eigen::Index>(inner) * inner, span * span);
    sys.observation.resize(static_cast<Eigen::Index>(inner) * inner);
    Eigen::Index row = 0;
    for (int r = shift_radius; r < n - shift_radius; ++r) {
        for (int c = shift_radius; c < n - shift_radius; ++c, ++row) {
            sys.observation(row) = pair.test.at(r, c);
            Eigen::Index col = 0;
            for (int dy = -shift_radius; dy <= shift_radius; ++dy) {
                for (int dx = -shift_radius; dx <= shift_radius; ++dx, ++col) {
                    sys.matrix(row, col) = pair.reference.at(r + dy, c + dx);
                }
            }
        }
    }
    return sys;
}

SensingSolution solve_sensing(const SensingSystem& system, int iterations) {
    if (iterations < 1) throw argument_error("solve_sensing: iterations must be >= 1");
    const Eigen::MatrixXd& a = system.matrix;
    const Eigen::VectorXd& y = system.observation;
    if (a.rows() != y.size()) throw shape_error("solve_sensing: matrix and observation disagree");
    if (a.cwiseAbs().maxCoeff() == 0.0) throw degenerate_error("solve_sensing: zero sensing matrix");

    // Largest eigenvalue of A^T A, padded so 1/L stays a valid descent step.
    Eigen::VectorXd v = Eigen::VectorXd::Ones(a.cols()) / std::sqrt(static_cast<double>(a.cols()));
    double lipschitz = 0.0;
    for (int i = 0; i < 200; ++i) {
        Eigen::VectorXd w = a.transpose() * (a * v);
        const double norm = w.norm();
        if (norm == 0.0) break;
        const double prev = lipschitz;
        lipschitz = norm;
        v = w / norm;
        if (std::abs(lipschitz - prev) <= 1e-12 * lipschitz) break;
    }
    lipschitz *= 1.01;
    const double step = 1.0 / lipschitz;

    SensingSolution out;
    Eigen::VectorXd b = Eigen::VectorXd::Zero(a.cols());
    Eigen::VectorXd residual = a * b - y;
    out.objective.push_back(residual.norm());
    for (int it = 0; it < iterations; ++it) {
        b = (b - step * (a.transpose() * residual)).cwiseMax(0.0);
        residual = a * b - y;
        out.objective.push_back(residual.norm());
    }

    const int span = 2 * system.shift_radius + 1;
    out.estimate.n = span;
    out.estimate.freq_pitch = system.freq_pitch;
    out.estimate.values.assign(b.data(), b.data() + b.size());
    return out;
}

void magnitude_projection(std::span<std::complex<double>> spectrum, std::span<const double> magnitude) {
    for (size_t i = 0; i < spectrum.size(); ++i) {
        const double m = std::abs(spectrum[i]);
        spectrum[i] = m > 0.0 ? spectrum[i] * (magnitude[i] / m) : std::complex<double>(magnitude[i], 0.0);
    }
}

PhaseRetrievalResult hio_phase_retrieval(const FourierModulus& modulus, const PhaseRetrievalOptions& options) {
    if (!(options.beta > 0.0 && options.beta <= 1.0)) throw argument_error("phase retrieval: beta must be in (0, 1]");
    if (options.iterations < 1 || options.restarts < 1) {
        throw argument_error("phase retrieval: iterations and restarts must be >= 1");
    }
    const int n = modulus.n;
    if (options.support_n < 1 || options.support_n > n) throw argument_error("phase retrieval: bad support size");
    const int s = options.support_n;
    const double pitch = modulus.freq_pitch > 0.0 ? 1.0 / (n * modulus.freq_pitch) : 0.0;

    PhaseRetrievalResult result;
    result.image = SampleImage(s, pitch);

    // Magnitudes in FFT order.
    std::vector<std::complex<double>> shifted(modulus.values.size());
    bool any = false;
    for (size_t i = 0; i < shifted.size(); ++i) {
        const double m = std::max(0.0, modulus.values[i]);
        any = any || m > 0.0;
        shifted[i] = std::sqrt(m);
    }
    if (!any) {
        result.degenerate = true;
        result.residual = 0.0;
        return result;
    }
    fft::ifftshift(shifted, n);
    std::vector<double> magnitude(shifted.size());
    for (size_t i = 0; i < shifted.size(); ++i) magnitude[i] = shifted[i].real();

    const int start = n / 2 - s / 2;
    std::vector<char> support(magnitude.size(), 0);
    for (int r = start; r < start + s; ++r) {
        for (int c = start; c < start + s; ++c) support[static_cast<size_t>(r) * n + c] = 1;
    }

    RestartOutcome best;
    for (int k = 0; k < options.restarts; ++k) {
        PhaseRetrievalOptions opts = options;
        opts.trace = options.trace && k == 0;
        RestartOutcome outcome =
            run_restart(magnitude, support, n, opts, splitmix64(options.seed ^ splitmix64(static_cast<std::uint64_t>(k))));
        if (k == 0) result.residual_trace = outcome.trace;
        if (k == 0 || outcome.residual < best.residual) {
            best = std::move(outcome);
            result.best_restart = k;
        }
    }
    result.residual = best.residual;

    double lo = best.image[static_cast<size_t>(start) * n + start], hi = lo;
    for (int r = 0; r < s; ++r) {
        for (int c = 0; c < s; ++c) {
            const double v = best.image[static_cast<size_t>(start + r) * n + start + c];
            result.image.at(r, c) = v;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    if (hi > lo) {
        for (auto& v : result.image.values) v = (v - lo) / (hi - lo);
    } else {
        std::fill(result.image.values.begin(), result.image.values.end(), 0.0);
        result.degenerate = true;
    }
    return result;
}

ClassicalResult classical_pipeline(const SpecklePair& pair, const OpticalConfig& config,
                                   const PhaseRetrievalOptions& options) {
    ClassicalResult out;
    out.modulus = fgi_correlate(std::span<const SpecklePair>(&pair, 1), config);
    PhaseRetrievalResult pr = hio_phase_retrieval(out.modulus, options);
    out.image = std::move(pr.image);
    out.residual = pr.residual;
    out.degenerate = pr.degenerate;
    return out;
}

}  // namespace ygi
