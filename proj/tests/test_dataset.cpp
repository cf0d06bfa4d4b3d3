#include <cstring>
#include <set>
#include <unordered_set>

#include "doctest.h"
#include "support.hpp"
#include "ygi/dataset.hpp"

using namespace ygi;

namespace {

void put_be32(std::vector<unsigned char>& out, std::uint32_t v) {
    for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<unsigned char>(v >> s));
}

std::vector<unsigned char> idx3(std::uint32_t magic, std::uint32_t count, std::uint32_t rows, std::uint32_t cols,
                                size_t payload) {
    std::vector<unsigned char> b;
    put_be32(b, magic);
    put_be32(b, count);
    put_be32(b, rows);
    put_be32(b, cols);
    b.resize(b.size() + payload, 0);
    return b;
}

template <typename Fault>
Fault fault_of(const std::filesystem::path& path) {
    try {
        if constexpr (std::is_same_v<Fault, IdxFault>) {
            load_idx_images(path);
        } else {
            read_all(path);
        }
    } catch (const IdxError& e) {
        if constexpr (std::is_same_v<Fault, IdxFault>) return e.fault();
    } catch (const DatasetError& e) {
        if constexpr (std::is_same_v<Fault, DatasetFault>) return e.fault();
    }
    FAIL("expected a typed error");
    return Fault{};
}

std::vector<IndexedSample> first_digits(int count, int repeat_first = 0) {
    std::vector<IndexedSample> s;
    for (int i = 0; i < count; ++i) s.push_back({i, testing::digits()[i]});
    for (int k = 0; k < repeat_first; ++k) s.push_back({0, testing::digits()[0]});
    return s;
}

constexpr size_t kHeader = 96;
constexpr size_t kRecord = 4 * (2 * 64 * 64 + 28 * 28) + 16;

}  // namespace

TEST_SUITE("dataset") {
    TEST_CASE("IDX images load, scale and validate") {
        const auto& d = testing::digits();
        CHECK(d.size() == 5000);
        CHECK(d[0].n == 28);
        CHECK(d[0].extent() == doctest::Approx(1e-3));
        const auto labels = load_idx_labels(testing::data_dir() / "mnist5k-labels-idx1-ubyte");
        CHECK(labels.size() == 5000);
        for (int l : labels) CHECK((l >= 0 && l <= 9));

        testing::TempDir dir("idx");
        auto one = idx3(0x803, 1, 28, 28, 784);
        one[16] = 255;
        one[17] = 51;
        testing::write_bytes(dir / "one", one);
        const auto img = load_idx_images(dir / "one");
        CHECK(img[0].values[0] == 1.0);
        CHECK(img[0].values[1] == doctest::Approx(0.2));

        testing::write_bytes(dir / "magic", idx3(0x801, 1, 28, 28, 784));
        CHECK(fault_of<IdxFault>(dir / "magic") == IdxFault::kBadMagic);
        testing::write_bytes(dir / "short", idx3(0x803, 2, 28, 28, 784));
        CHECK(fault_of<IdxFault>(dir / "short") == IdxFault::kTruncated);
        testing::write_bytes(dir / "dims", idx3(0x803, 1, 32, 32, 1024));
        CHECK(fault_of<IdxFault>(dir / "dims") == IdxFault::kBadDimensions);
        CHECK_THROWS_AS(load_idx_images(dir / "missing"), Error);

        // A full-size training file is accepted.
        testing::write_bytes(dir / "big", idx3(0x803, 60000, 28, 28, 60000ull * 784));
        CHECK(load_idx_images(dir / "big").size() == 60000);
    }

    TEST_CASE("seed derivation") {
        using enum IlluminationMode;
        CHECK(derive_seed(5, 1, 0, kStatic) == derive_seed(5, 999, 3, kStatic));
        CHECK(derive_seed(5, 1, 0, kStatic) != derive_seed(6, 1, 0, kStatic));
        CHECK(derive_seed(5, 1, 0, kDynamic) != derive_seed(5, 2, 0, kDynamic));
        CHECK(derive_seed(5, 1, 0, kDynamic) != derive_seed(5, 1, 1, kDynamic));
        CHECK(derive_seed(5, 1, 0, kDynamic) == derive_seed(5, 1, 0, kDynamic));

        std::unordered_set<std::uint64_t> seen;
        for (std::int64_t id = 0; id < 70000; ++id) seen.insert(derive_seed(20200721, id, 0, kDynamic));
        CHECK(seen.size() == 70000);
    }

    TEST_CASE("generation is deterministic and round-trips") {
        testing::TempDir dir("gen");
        OpticalConfig c;
        const auto samples = first_digits(5);
        const auto h = generate_dataset(samples, c, IlluminationMode::kDynamic, 3, dir / "a.ygi", 0, 2);
        generate_dataset(samples, c, IlluminationMode::kDynamic, 3, dir / "b.ygi", 0, 1);
        CHECK(h.record_count == 5);
        const auto a = testing::read_bytes(dir / "a.ygi");
        CHECK(a.size() == kHeader + 5 * kRecord);
        CHECK(a == testing::read_bytes(dir / "b.ygi"));

        DatasetReader reader(dir / "a.ygi");
        CHECK(reader.header().detector_n == 64);
        CHECK(reader.header().target_n == 28);
        CHECK(reader.header().base_seed == 3);
        CHECK(reader.header().mode == IlluminationMode::kDynamic);
        CHECK(reader.header().optics.d2 == c.d2);
        const auto records = read_all(dir / "a.ygi");
        REQUIRE(records.size() == 5);
        for (int i = 0; i < 5; ++i) {
            const auto& r = records[i];
            CHECK(r.sample_id == i);
            CHECK(r.seed == derive_seed(3, i, 0, IlluminationMode::kDynamic));
            const auto p = simulate_pair(samples[i].image, c, r.seed);
            for (size_t k = 0; k < p.test.size(); ++k) {
                CHECK(r.test.values[k] == static_cast<float>(p.test.values[k]));
                CHECK(r.reference.values[k] == static_cast<float>(p.reference.values[k]));
            }
            for (size_t k = 0; k < r.target.size(); ++k) {
                CHECK(r.target.values[k] == static_cast<float>(samples[i].image.values[k]));
            }
        }
        CHECK(reader.at(3).sample_id == 3);
        CHECK_THROWS_AS(reader.at(5), Error);
    }

    TEST_CASE("static mode shares one illumination") {
        testing::TempDir dir("static");
        generate_dataset(first_digits(3, 1), OpticalConfig{}, IlluminationMode::kStatic, 9, dir / "s.ygi");
        const auto r = read_all(dir / "s.ygi");
        REQUIRE(r.size() == 4);
        for (const auto& rec : r) CHECK(rec.reference.values == r[0].reference.values);
        CHECK(r[3].test.values == r[0].test.values);
        CHECK(r[1].test.values != r[0].test.values);
    }

    TEST_CASE("damaged dataset files are rejected with typed errors") {
        testing::TempDir dir("bad");
        generate_dataset(first_digits(2), OpticalConfig{}, IlluminationMode::kDynamic, 1, dir / "ok.ygi");
        const auto good = testing::read_bytes(dir / "ok.ygi");

        auto bytes = good;
        bytes[0] = 'X';
        testing::write_bytes(dir / "magic.ygi", bytes);
        CHECK(fault_of<DatasetFault>(dir / "magic.ygi") == DatasetFault::kBadMagic);

        bytes = good;
        bytes[4] = 7;
        testing::write_bytes(dir / "version.ygi", bytes);
        CHECK(fault_of<DatasetFault>(dir / "version.ygi") == DatasetFault::kBadVersion);

        bytes = good;
        bytes.resize(bytes.size() - 10);
        testing::write_bytes(dir / "short.ygi", bytes);
        CHECK(fault_of<DatasetFault>(dir / "short.ygi") == DatasetFault::kCountMismatch);

        bytes = good;
        bytes[8] = 3;
        testing::write_bytes(dir / "count.ygi", bytes);
        CHECK(fault_of<DatasetFault>(dir / "count.ygi") == DatasetFault::kCountMismatch);

        // NaN in the first reference pixel of record 1.
        bytes = good;
        const float nan = std::numeric_limits<float>::quiet_NaN();
        std::memcpy(bytes.data() + kHeader + kRecord, &nan, 4);
        testing::write_bytes(dir / "nan.ygi", bytes);
        CHECK(fault_of<DatasetFault>(dir / "nan.ygi") == DatasetFault::kCorruptRecord);

        // Target pixel above one.
        bytes = good;
        const float two = 2.0f;
        std::memcpy(bytes.data() + kHeader + 4 * 2 * 64 * 64, &two, 4);
        testing::write_bytes(dir / "range.ygi", bytes);
        CHECK(fault_of<DatasetFault>(dir / "range.ygi") == DatasetFault::kCorruptRecord);

        CHECK_THROWS_AS(DatasetReader(dir / "absent.ygi"), Error);
    }

    TEST_CASE("speckle normalization") {
        RealImage img(2, 1.0);
        img.values = {2, 4, 6, 4};
        const auto n = normalize_speckle(img);
        CHECK(n.values == std::vector<double>{0.0, 0.5, 1.0, 0.5});
        CHECK(normalize_speckle(n).values == n.values);

        std::mt19937_64 rng(1);
        std::uniform_real_distribution<double> u(0, 5);
        RealImage r(16, 1.0);
        for (auto& v : r.values) v = u(rng);
        auto scaled = r;
        for (auto& v : scaled.values) v = 3.5 * v + 2.0;
        const auto a = normalize_speckle(r), b = normalize_speckle(scaled);
        for (size_t i = 0; i < a.size(); ++i) CHECK(a.values[i] == doctest::Approx(b.values[i]).epsilon(1e-12));

        RealImage flat(4, 1.0, 0.3);
        try {
            normalize_speckle(flat);
            FAIL("constant image accepted");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::kDegenerate);
        }
    }
}
