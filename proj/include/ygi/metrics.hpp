#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ygi/image.hpp"

namespace ygi {

inline constexpr double kMaxIntensity = 1.0;
inline constexpr double kSsimC1 = (0.01 * kMaxIntensity) * (0.01 * kMaxIntensity);
inline constexpr double kSsimC2 = (0.03 * kMaxIntensity) * (0.03 * kMaxIntensity);

// Single-window SSIM over the whole image: means, variances and covariance are
// taken over all pixels.
double ssim(const RealImage& u, const RealImage& v);

struct Psnr {
    double db = 0.0;
    bool infinite = false;  // images are identical, MSE = 0
};

double mse(const RealImage& u, const RealImage& v);
Psnr psnr(const RealImage& u, const RealImage& v);

struct MethodScores {
    std::string label;
    std::vector<double> ssim;
    std::vector<Psnr> psnr;
    double mean_ssim = 0.0;
    double mean_psnr = 0.0;  // over finite entries
    int infinite_psnr = 0;
};

struct MetricReport {
    std::vector<std::string> sample_labels;
    std::vector<MethodScores> methods;

    std::string text_table() const;
    std::string csv() const;
    void write(const std::filesystem::path& text_path, const std::filesystem::path& csv_path) const;
};

// outputs[m][i] is method m's reconstruction of targets[i].
MetricReport compare_methods(const std::vector<RealImage>& targets, const std::vector<std::string>& method_labels,
                             const std::vector<std::vector<RealImage>>& outputs,
                             std::vector<std::string> sample_labels = {});

}  // namespace ygi
