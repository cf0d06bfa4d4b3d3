#include "doctest.h"
#include "support.hpp"
#include "ygi/image_io.hpp"

using namespace ygi;

TEST_SUITE("image_io") {
    TEST_CASE("PGM round trip with min-max scaling") {
        testing::TempDir dir("pgm");
        RealImage img(3, 1.0);
        img.values = {2, 3, 4, 5, 6, 7, 8, 9, 10};
        const auto s = write_pgm(img, dir / "a.pgm");
        CHECK(s.lo == 2.0);
        CHECK(s.hi == 10.0);
        const auto bytes = testing::read_bytes(dir / "a.pgm");
        const std::string header = "P5\n3 3\n255\n";
        REQUIRE(bytes.size() == header.size() + 9);
        CHECK(std::string(bytes.begin(), bytes.begin() + header.size()) == header);
        CHECK(bytes[header.size()] == 0);
        CHECK(bytes.back() == 255);
        const auto back = read_pgm(dir / "a.pgm");
        CHECK(back.n == 3);
        for (size_t i = 0; i < 9; ++i) {
            CHECK(std::abs(back.values[i] * 8 + 2 - img.values[i]) <= 8.0 / 255 / 2 + 1e-12);
        }
    }

    TEST_CASE("fixed scaling clips and constant images are mid-grey") {
        testing::TempDir dir("pgm2");
        RealImage img(2, 1.0);
        img.values = {-1, 0.5, 2, 1};
        write_pgm(img, dir / "f.pgm", {0.0, 1.0});
        const auto f = read_pgm(dir / "f.pgm");
        CHECK(f.values[0] == 0.0);
        CHECK(f.values[1] == doctest::Approx(128.0 / 255));
        CHECK(f.values[2] == 1.0);
        CHECK(f.values[3] == 1.0);

        RealImage flat(2, 1.0, 0.7);
        const auto s = write_pgm(flat, dir / "c.pgm");
        CHECK(s.lo == s.hi);
        for (double v : read_pgm(dir / "c.pgm").values) CHECK(v == doctest::Approx(128.0 / 255));
    }

    TEST_CASE("malformed input") {
        testing::TempDir dir("pgm3");
        const std::string p2 = "P2\n2 2\n255\n0 0 0 0\n";
        testing::write_bytes(dir / "ascii.pgm", {p2.begin(), p2.end()});
        CHECK_THROWS_AS(read_pgm(dir / "ascii.pgm"), Error);
        const std::string cut = "P5\n4 4\n255\nab";
        testing::write_bytes(dir / "cut.pgm", {cut.begin(), cut.end()});
        CHECK_THROWS_AS(read_pgm(dir / "cut.pgm"), Error);
        CHECK_THROWS_AS(read_pgm(dir / "none.pgm"), Error);
        CHECK_THROWS_AS(write_pgm(RealImage{}, dir / "e.pgm"), Error);
    }

    TEST_CASE("mosaic layout") {
        RealImage a(2, 1.0), b(2, 1.0);
        a.values = {0, 1, 2, 3};
        b.values = {5, 5, 5, 5};
        const auto m = mosaic({a, b, a}, 2, 1, true, 0.25);
        CHECK(m.n == 7);  // two columns, two rows, 1-pixel gaps
        CHECK(m.at(0, 0) == 0.25);
        CHECK(m.at(1, 1) == 0.0);
        CHECK(m.at(2, 2) == 1.0);
        CHECK(m.at(1, 4) == 0.0);  // constant tile maps to zero
        CHECK(m.at(4, 1) == 0.0);
        CHECK(m.at(5, 5) == 0.25);  // empty slot keeps the background

        const auto raw = mosaic({b}, 1, 0, false);
        CHECK(raw.values == b.values);
        CHECK_THROWS_AS(mosaic({}, 1), Error);
        CHECK_THROWS_AS(mosaic({a, RealImage(3, 1.0)}, 2), Error);
    }
}
