#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "ygi/error.hpp"
#include "ygi/image.hpp"
#include "ygi/optics.hpp"

namespace ygi {

// Physical side length of a digit sample.
inline constexpr double kSampleExtent = 1e-3;

// ---- IDX input ------------------------------------------------------------

enum class IdxFault { kBadMagic, kTruncated, kBadDimensions };

class IdxError : public Error {
public:
    IdxError(IdxFault fault, const std::string& what)
        : Error(fault == IdxFault::kTruncated ? ErrorCode::kCorrupt : ErrorCode::kFormat, what),
          fault_(fault) {}
    IdxFault fault() const noexcept { return fault_; }

private:
    IdxFault fault_;
};

// Reads an IDX3 unsigned-byte image file (magic 0x00000803) of 28x28 images.
// Pixels are divided by 255; the pitch is chosen so 28 pixels span 1 mm.
std::vector<SampleImage> load_idx_images(const std::filesystem::path& path);

// Reads an IDX1 unsigned-byte label file (magic 0x00000801).
std::vector<int> load_idx_labels(const std::filesystem::path& path);

// ---- seeds ----------------------------------------------------------------

// Static illumination: one fixed source realization per base seed, so every
// sample and every regeneration sees the same speckle (deterministic forward
// operator). Dynamic illumination: a fresh realization per (sample, repetition).
std::uint64_t derive_seed(std::uint64_t base_seed, std::int64_t sample_id, std::uint64_t repetition,
                          IlluminationMode mode);

// ---- dataset file ---------------------------------------------------------

inline constexpr char kDatasetMagic[4] = {'Y', 'G', 'I', '1'};
inline constexpr std::uint32_t kDatasetVersion = 1;

struct DatasetHeader {
    std::uint32_t version = kDatasetVersion;
    std::uint64_t record_count = 0;
    std::uint32_t detector_n = 0;
    std::uint32_t target_n = 0;
    IlluminationMode mode = IlluminationMode::kDynamic;
    std::uint64_t base_seed = 0;
    OpticalConfig optics;
};

struct DatasetRecord {
    IntensityImage reference;
    IntensityImage test;
    SampleImage target;
    std::uint64_t seed = 0;
    std::int64_t sample_id = 0;
};

struct IndexedSample {
    std::int64_t sample_id = 0;
    SampleImage image;
};

// Writes one record per sample, in input order. Identical arguments produce
// byte-identical files. `repetition` only matters in dynamic mode.
DatasetHeader generate_dataset(const std::vector<IndexedSample>& samples, const OpticalConfig& config,
                               IlluminationMode mode, std::uint64_t base_seed,
                               const std::filesystem::path& out_path, std::uint64_t repetition = 0,
                               int workers = 0);

enum class DatasetFault { kBadMagic, kBadVersion, kCountMismatch, kCorruptRecord };

class DatasetError : public Error {
public:
    DatasetError(DatasetFault fault, const std::string& what)
        : Error(fault == DatasetFault::kBadMagic || fault == DatasetFault::kBadVersion ? ErrorCode::kFormat
                                                                                        : ErrorCode::kCorrupt,
                what),
          fault_(fault) {}
    DatasetFault fault() const noexcept { return fault_; }

private:
    DatasetFault fault_;
};

// Streams records from a dataset file without loading the whole corpus.
class DatasetReader {
public:
    explicit DatasetReader(const std::filesystem::path& path);

    const DatasetHeader& header() const { return header_; }
    // Returns false once every record has been read.
    bool next(DatasetRecord& record);
    // Reads record `index` directly.
    DatasetRecord at(std::uint64_t index);
    std::uint64_t position() const { return next_index_; }

private:
    void read_record(DatasetRecord& record);

    std::filesystem::path path_;
    std::ifstream in_;
    DatasetHeader header_;
    std::uint64_t next_index_ = 0;
    std::streamoff data_offset_ = 0;
    std::vector<float> buffer_;
};

std::vector<DatasetRecord> read_all(const std::filesystem::path& path);

// Per-image affine min-max map onto [0, 1].
RealImage normalize_speckle(const RealImage& image);

}  // namespace ygi
