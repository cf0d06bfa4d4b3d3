#pragma once

#include <cstddef>
#include <vector>

namespace ygi {

// Square, row-major real image with a physical pixel pitch in metres.
struct RealImage {
    int n = 0;
    double pitch = 0.0;
    std::vector<double> values;

    RealImage() = default;
    RealImage(int size, double pixel_pitch, double fill = 0.0)
        : n(size), pitch(pixel_pitch), values(static_cast<size_t>(size) * size, fill) {}

    double& at(int row, int col) { return values[static_cast<size_t>(row) * n + col]; }
    double at(int row, int col) const { return values[static_cast<size_t>(row) * n + col]; }
    size_t size() const { return values.size(); }
    double extent() const { return n * pitch; }
};

// Transmittance t(x') of the object, values in [0, 1].
struct SampleImage : RealImage {
    using RealImage::RealImage;
};

// Detected intensity, values >= 0.
struct IntensityImage : RealImage {
    using RealImage::RealImage;
};

}  // namespace ygi
