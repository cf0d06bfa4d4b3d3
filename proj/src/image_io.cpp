#include "ygi/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "ygi/error.hpp"

namespace ygi {

PgmScaling write_pgm(const RealImage& image, const std::filesystem::path& path) {
    if (image.values.empty()) throw argument_error("write_pgm: empty image");
    const auto [lo, hi] = std::minmax_element(image.values.begin(), image.values.end());
    PgmScaling s{*lo, *hi};
    write_pgm(image, path, s);
    return s;
}

void write_pgm(const RealImage& image, const std::filesystem::path& path, PgmScaling scaling) {
    if (image.values.empty()) throw argument_error("write_pgm: empty image");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write '" + path.string() + "'");
    out << "P5\n" << image.n << " " << image.n << "\n255\n";
    const double span = scaling.hi - scaling.lo;
    std::string pixels(image.size(), '\0');
    for (size_t i = 0; i < image.size(); ++i) {
        const double v = span > 0.0 ? (image.values[i] - scaling.lo) / span : 0.5;
        pixels[i] = static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * std::clamp(v, 0.0, 1.0))));
    }
    out.write(pixels.data(), static_cast<std::streamsize>(pixels.size()));
    if (!out) throw io_error("write failed for '" + path.string() + "'");
}

RealImage read_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open '" + path.string() + "'");
    std::string magic;
    int w = 0, h = 0, maxval = 0;
    in >> magic >> w >> h >> maxval;
    if (magic != "P5" || w <= 0 || w != h || maxval != 255) {
        throw format_error("'" + path.string() + "' is not a square 8-bit binary PGM");
    }
    in.get();
    std::string pixels(static_cast<size_t>(w) * h, '\0');
    if (!in.read(pixels.data(), static_cast<std::streamsize>(pixels.size()))) {
        throw corrupt_error("'" + path.string() + "': truncated pixel data");
    }
    RealImage image(w, 1.0);
    for (size_t i = 0; i < pixels.size(); ++i) image.values[i] = static_cast<unsigned char>(pixels[i]) / 255.0;
    return image;
}

RealImage mosaic(const std::vector<RealImage>& tiles, int columns, int gap, bool normalize_tiles, double background) {
    if (tiles.empty() || columns < 1 || gap < 0) throw argument_error("mosaic: need tiles, columns >= 1, gap >= 0");
    const int t = tiles.front().n;
    for (const auto& tile : tiles) {
        if (tile.n != t) throw shape_error("mosaic: tiles differ in size");
    }
    const int rows = (static_cast<int>(tiles.size()) + columns - 1) / columns;
    const int width = std::max(columns, rows) * (t + gap) + gap;
    RealImage out(width, tiles.front().pitch, background);
    for (size_t k = 0; k < tiles.size(); ++k) {
        const auto& tile = tiles[k];
        double lo = 0.0, scale = 1.0;
        if (normalize_tiles) {
            const auto [mn, mx] = std::minmax_element(tile.values.begin(), tile.values.end());
            lo = *mn;
            scale = *mx > *mn ? 1.0 / (*mx - *mn) : 0.0;
        }
        const int oy = gap + static_cast<int>(k) / columns * (t + gap);
        const int ox = gap + static_cast<int>(k) % columns * (t + gap);
        for (int r = 0; r < t; ++r) {
            for (int c = 0; c < t; ++c) out.at(oy + r, ox + c) = (tile.at(r, c) - lo) * scale;
        }
    }
    return out;
}

}  // namespace ygi
