#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "ygi/dataset.hpp"
#include "ygi/fft.hpp"
#include "ygi/image.hpp"
#include "ygi/optics.hpp"

namespace testing {

inline std::filesystem::path data_dir() { return YGI_DATA_DIR; }

inline const std::vector<ygi::SampleImage>& digits() {
    static const auto images = ygi::load_idx_images(data_dir() / "mnist5k-images-idx3-ubyte");
    return images;
}

// Fresh directory under the system temp dir, removed at scope exit.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / ("ygi_" + tag + "_" + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline std::vector<unsigned char> read_bytes(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_bytes(const std::filesystem::path& p, const std::vector<unsigned char>& bytes) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

inline double ncc(const std::vector<double>& a, const std::vector<double>& b) {
    double ma = 0, mb = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= static_cast<double>(a.size());
    mb /= static_cast<double>(b.size());
    double s = 0, sa = 0, sb = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        s += (a[i] - ma) * (b[i] - mb);
        sa += (a[i] - ma) * (a[i] - ma);
        sb += (b[i] - mb) * (b[i] - mb);
    }
    return s / std::sqrt(sa * sb);
}

// Best normalized correlation over all integer translations and the 180 degree twin.
inline double registered_ncc(const ygi::RealImage& estimate, const ygi::RealImage& truth) {
    const int n = truth.n;
    double best = -1.0;
    std::vector<double> a(truth.size()), b(truth.values);
    for (int twin = 0; twin < 2; ++twin) {
        for (int sy = -n + 1; sy < n; ++sy) {
            for (int sx = -n + 1; sx < n; ++sx) {
                for (int r = 0; r < n; ++r) {
                    for (int c = 0; c < n; ++c) {
                        const int rr = r + sy, cc = c + sx;
                        double v = 0.0;
                        if (rr >= 0 && rr < n && cc >= 0 && cc < n) {
                            v = twin ? estimate.at(n - 1 - rr, n - 1 - cc) : estimate.at(rr, cc);
                        }
                        a[static_cast<size_t>(r) * n + c] = v;
                    }
                }
                best = std::max(best, ncc(a, b));
            }
        }
    }
    return best;
}

// |DFT|^2 of the image centred in an n x n zero frame, zero frequency at (n/2, n/2).
inline std::vector<double> true_modulus(const ygi::RealImage& image, int n) {
    std::vector<std::complex<double>> buf(static_cast<size_t>(n) * n);
    const int off = (n - image.n) / 2;
    for (int r = 0; r < image.n; ++r) {
        for (int c = 0; c < image.n; ++c) buf[static_cast<size_t>(r + off) * n + c + off] = image.at(r, c);
    }
    ygi::fft::forward2d(buf, n);
    ygi::fft::fftshift(buf, n);
    std::vector<double> out(buf.size());
    for (size_t i = 0; i < buf.size(); ++i) out[i] = std::norm(buf[i]);
    return out;
}

// Two vertical slits of the given width and centre separation, height `height`,
// on a 1 mm sample sampled at `pitch`.
inline ygi::SampleImage double_slit(double width, double separation, double height, double pitch = 10e-6) {
    const int n = static_cast<int>(std::lround(ygi::kSampleExtent / pitch));
    ygi::SampleImage s(n, pitch, 0.0);
    for (int r = 0; r < n; ++r) {
        const double y = (r + 0.5) * pitch - ygi::kSampleExtent / 2;
        if (std::abs(y) >= height / 2) continue;
        for (int c = 0; c < n; ++c) {
            const double x = (c + 0.5) * pitch - ygi::kSampleExtent / 2;
            if (std::abs(std::abs(x) - separation / 2) < width / 2) s.at(r, c) = 1.0;
        }
    }
    return s;
}

inline double relative_difference(const std::vector<double>& a, const std::vector<double>& b) {
    double num = 0, den = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        num += (a[i] - b[i]) * (a[i] - b[i]);
        den += b[i] * b[i];
    }
    return std::sqrt(num / den);
}

}  // namespace testing
