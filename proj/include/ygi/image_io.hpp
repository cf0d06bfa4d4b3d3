#pragma once

#include <filesystem>
#include <vector>

#include "ygi/image.hpp"

namespace ygi {

// Display range mapped onto 0..255.
struct PgmScaling {
    double lo = 0.0;
    double hi = 1.0;
};

// 8-bit binary PGM with min-max scaling; a constant image maps to mid-grey.
PgmScaling write_pgm(const RealImage& image, const std::filesystem::path& path);
// Fixed display range; values outside it are clipped.
void write_pgm(const RealImage& image, const std::filesystem::path& path, PgmScaling scaling);
// Values come back as grey / 255.
RealImage read_pgm(const std::filesystem::path& path);

// Row-major grid of equally sized tiles separated by `gap` background pixels.
// Each tile is min-max scaled on its own when `normalize_tiles` is set.
RealImage mosaic(const std::vector<RealImage>& tiles, int columns, int gap = 1, bool normalize_tiles = true,
                 double background = 1.0);

}  // namespace ygi
