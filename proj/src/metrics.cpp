#include "ygi/metrics.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "ygi/error.hpp"

namespace ygi {
namespace {

void check_same(const RealImage& u, const RealImage& v, const char* op) {
    if (u.n != v.n || u.values.size() != v.values.size() || u.values.empty()) {
        throw shape_error(std::string(op) + ": images differ in shape");
    }
}

std::string format_psnr(const Psnr& p) {
    if (p.infinite) return "inf";
    std::ostringstream os;
    os << std::fixed << std::setprecision(4) << p.db;
    return os.str();
}

}  // namespace

double ssim(const RealImage& u, const RealImage& v) {
    check_same(u, v, "ssim");
    const double count = static_cast<double>(u.size());
    double mu = 0.0, mv = 0.0;
    for (size_t i = 0; i < u.size(); ++i) {
        mu += u.values[i];
        mv += v.values[i];
    }
    mu /= count;
    mv /= count;
    double su = 0.0, sv = 0.0, suv = 0.0;
    for (size_t i = 0; i < u.size(); ++i) {
        const double a = u.values[i] - mu, b = v.values[i] - mv;
        su += a * a;
        sv += b * b;
        suv += a * b;
    }
    su /= count;
    sv /= count;
    suv /= count;
    return ((2.0 * mu * mv + kSsimC1) * (2.0 * suv + kSsimC2)) /
           ((mu * mu + mv * mv + kSsimC1) * (su + sv + kSsimC2));
}

double mse(const RealImage& u, const RealImage& v) {
    check_same(u, v, "mse");
    double sum = 0.0;
    for (size_t i = 0; i < u.size(); ++i) {
        const double d = u.values[i] - v.values[i];
        sum += d * d;
    }
    return sum / static_cast<double>(u.size());
}

Psnr psnr(const RealImage& u, const RealImage& v) {
    const double e = mse(u, v);
    if (e == 0.0) return {0.0, true};
    return {10.0 * std::log10(kMaxIntensity * kMaxIntensity / e), false};
}

MetricReport compare_methods(const std::vector<RealImage>& targets, const std::vector<std::string>& method_labels,
                             const std::vector<std::vector<RealImage>>& outputs,
                             std::vector<std::string> sample_labels) {
    if (method_labels.size() != outputs.size()) throw argument_error("compare_methods: label/output count mismatch");
    if (!sample_labels.empty() && sample_labels.size() != targets.size()) {
        throw argument_error("compare_methods: sample label count mismatch");
    }
    MetricReport report;
    if (sample_labels.empty()) {
        for (size_t i = 0; i < targets.size(); ++i) sample_labels.push_back(std::to_string(i));
    }
    report.sample_labels = std::move(sample_labels);
    for (size_t m = 0; m < outputs.size(); ++m) {
        if (outputs[m].size() != targets.size()) {
            throw argument_error("compare_methods: method '" + method_labels[m] + "' output count mismatch");
        }
        MethodScores scores;
        scores.label = method_labels[m];
        double ssim_sum = 0.0, psnr_sum = 0.0;
        int finite = 0;
        for (size_t i = 0; i < targets.size(); ++i) {
            scores.ssim.push_back(ssim(outputs[m][i], targets[i]));
            scores.psnr.push_back(psnr(outputs[m][i], targets[i]));
            ssim_sum += scores.ssim.back();
            if (scores.psnr.back().infinite) {
                ++scores.infinite_psnr;
            } else {
                psnr_sum += scores.psnr.back().db;
                ++finite;
            }
        }
        if (!targets.empty()) scores.mean_ssim = ssim_sum / static_cast<double>(targets.size());
        scores.mean_psnr = finite > 0 ? psnr_sum / finite : 0.0;
        report.methods.push_back(std::move(scores));
    }
    return report;
}

std::string MetricReport::text_table() const {
    std::ostringstream os;
    const int w = 12;
    os << std::left << std::setw(10) << "sample";
    for (const auto& m : methods) os << std::right << std::setw(w) << ("SSIM " + m.label);
    for (const auto& m : methods) os << std::right << std::setw(w) << ("PSNR " + m.label);
    os << "\n";
    for (size_t i = 0; i < sample_labels.size(); ++i) {
        os << std::left << std::setw(10) << sample_labels[i];
        for (const auto& m : methods) os << std::right << std::setw(w) << std::fixed << std::setprecision(4) << m.ssim[i];
        for (const auto& m : methods) os << std::right << std::setw(w) << format_psnr(m.psnr[i]);
        os << "\n";
    }
    os << std::left << std::setw(10) << "mean";
    for (const auto& m : methods) os << std::right << std::setw(w) << std::fixed << std::setprecision(4) << m.mean_ssim;
    for (const auto& m : methods) os << std::right << std::setw(w) << std::fixed << std::setprecision(4) << m.mean_psnr;
    os << "\n";
    return os.str();
}

std::string MetricReport::csv() const {
    std::ostringstream os;
    os << "sample";
    for (const auto& m : methods) os << ",ssim_" << m.label;
    for (const auto& m : methods) os << ",psnr_" << m.label;
    os << "\n" << std::setprecision(17);
    for (size_t i = 0; i < sample_labels.size(); ++i) {
        os << sample_labels[i];
        for (const auto& m : methods) os << "," << m.ssim[i];
        for (const auto& m : methods) {
            os << ",";
            if (m.psnr[i].infinite) {
                os << "inf";
            } else {
                os << m.psnr[i].db;
            }
        }
        os << "\n";
    }
    os << "mean";
    for (const auto& m : methods) os << "," << m.mean_ssim;
    for (const auto& m : methods) os << "," << m.mean_psnr;
    os << "\n";
    return os.str();
}

void MetricReport::write(const std::filesystem::path& text_path, const std::filesystem::path& csv_path) const {
    auto put = [](const std::filesystem::path& p, const std::string& body) {
        std::ofstream out(p);
        if (!out) throw io_error("cannot write report '" + p.string() + "'");
        out << body;
        if (!out) throw io_error("write failed for report '" + p.string() + "'");
    };
    put(text_path, text_table());
    put(csv_path, csv());
}

}  // namespace ygi
