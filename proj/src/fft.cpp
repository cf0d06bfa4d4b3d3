#include "ygi/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>
#include <vector>

#include "ygi/error.hpp"

namespace ygi::fft {
namespace {

// FFTW planning is not thread-safe, execution on new arrays is. Plans are made
// once per (size, direction) with FFTW_ESTIMATE so the chosen algorithm, and
// therefore every output bit, does not depend on timing measurements.
class PlanCache {
public:
    ~PlanCache() {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

    fftw_plan get(int n, int sign) {
        std::lock_guard lock(mutex_);
        auto key = std::make_pair(n, sign);
        if (auto it = plans_.find(key); it != plans_.end()) return it->second;
        std::vector<fftw_complex> scratch(static_cast<size_t>(n) * n);
        fftw_plan plan = fftw_plan_dft_2d(n, n, scratch.data(), scratch.data(), sign,
                                          FFTW_ESTIMATE | FFTW_UNALIGNED);
        if (plan == nullptr) throw numeric_error("fftw: could not create plan");
        plans_.emplace(key, plan);
        return plan;
    }

private:
    std::mutex mutex_;
    std::map<std::pair<int, int>, fftw_plan> plans_;
};

PlanCache& cache() {
    static PlanCache instance;
    return instance;
}

void execute(std::span<std::complex<double>> data, int n, int sign) {
    if (data.size() != static_cast<size_t>(n) * n) throw shape_error("fft: buffer is not n*n");
    auto* buf = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(cache().get(n, sign), buf, buf);
}

void shift(std::span<std::complex<double>> data, int n, int offset) {
    std::vector<std::complex<double>> copy(data.begin(), data.end());
    for (int r = 0; r < n; ++r) {
        int rr = (r + offset) % n;
        for (int c = 0; c < n; ++c) {
            int cc = (c + offset) % n;
            data[static_cast<size_t>(rr) * n + cc] = copy[static_cast<size_t>(r) * n + c];
        }
    }
}

}  // namespace

void forward2d(std::span<std::complex<double>> data, int n) { execute(data, n, FFTW_FORWARD); }

void inverse2d(std::span<std::complex<double>> data, int n) {
    execute(data, n, FFTW_BACKWARD);
    const double scale = 1.0 / (static_cast<double>(n) * n);
    for (auto& v : data) v *= scale;
}

void fftshift(std::span<std::complex<double>> data, int n) { shift(data, n, n / 2); }
void ifftshift(std::span<std::complex<double>> data, int n) { shift(data, n, n - n / 2); }

}  // namespace ygi::fft
