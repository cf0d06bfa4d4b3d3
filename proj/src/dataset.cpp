#include "ygi/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <sstream>
#include <thread>

#include "binary_io.hpp"
#include "ygi/random.hpp"

namespace ygi {
namespace {

constexpr std::uint32_t kIdxImageMagic = 0x00000803;
constexpr std::uint32_t kIdxLabelMagic = 0x00000801;
constexpr int kDigitSize = 28;
constexpr size_t kHeaderBytes = 96;

std::vector<unsigned char> slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open '" + path.string() + "'");
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw io_error("read failed for '" + path.string() + "'");
    return bytes;
}

std::uint32_t big_endian_u32(const unsigned char* p) {
    return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) | p[3];
}

size_t record_bytes(const DatasetHeader& h) {
    return 4 * (2 * static_cast<size_t>(h.detector_n) * h.detector_n + static_cast<size_t>(h.target_n) * h.target_n) +
           16;
}

std::vector<unsigned char> encode_header(const DatasetHeader& h) {
    std::vector<unsigned char> out;
    binary::put_bytes(out, kDatasetMagic, 4);
    binary::put<std::uint32_t>(out, h.version);
    binary::put<std::uint64_t>(out, h.record_count);
    binary::put<std::uint32_t>(out, h.detector_n);
    binary::put<std::uint32_t>(out, h.target_n);
    binary::put<std::uint32_t>(out, static_cast<std::uint32_t>(h.mode));
    binary::put<std::uint64_t>(out, h.base_seed);
    const OpticalConfig& o = h.optics;
    for (double v : {o.wavelength, o.d1, o.d2, o.source_diameter, o.sim_pitch, o.detector_pitch}) {
        binary::put<double>(out, v);
    }
    binary::put<std::uint32_t>(out, static_cast<std::uint32_t>(o.sim_grid_n));
    binary::put<std::uint32_t>(out, static_cast<std::uint32_t>(o.detector_n));
    binary::put<std::uint32_t>(out, static_cast<std::uint32_t>(o.pad_factor));
    return out;
}

void encode_record(std::vector<unsigned char>& out, const DatasetRecord& r) {
    binary::put_floats<double>(out, r.reference.values);
    binary::put_floats<double>(out, r.test.values);
    binary::put_floats<double>(out, r.target.values);
    binary::put<std::uint64_t>(out, r.seed);
    binary::put<std::int64_t>(out, r.sample_id);
}

}  // namespace

std::vector<SampleImage> load_idx_images(const std::filesystem::path& path) {
    const auto bytes = slurp(path);
    const std::string where = " in '" + path.string() + "'";
    if (bytes.size() < 16) throw IdxError(IdxFault::kTruncated, "IDX header truncated" + where);
    const std::uint32_t magic = big_endian_u32(bytes.data());
    if (magic != kIdxImageMagic) {
        std::ostringstream os;
        os << "bad IDX3 magic 0x" << std::hex << magic << where;
        throw IdxError(IdxFault::kBadMagic, os.str());
    }
    const std::uint32_t count = big_endian_u32(bytes.data() + 4);
    const std::uint32_t rows = big_endian_u32(bytes.data() + 8);
    const std::uint32_t cols = big_endian_u32(bytes.data() + 12);
    if (rows != kDigitSize || cols != kDigitSize) {
        std::ostringstream os;
        os << "expected 28x28 images, got " << rows << "x" << cols << where;
        throw IdxError(IdxFault::kBadDimensions, os.str());
    }
    const size_t pixels = static_cast<size_t>(rows) * cols;
    if (bytes.size() - 16 < static_cast<size_t>(count) * pixels) {
        std::ostringstream os;
        os << "IDX payload truncated: header declares " << count << " images" << where;
        throw IdxError(IdxFault::kTruncated, os.str());
    }
    std::vector<SampleImage> images;
    images.reserve(count);
    const double pitch = kSampleExtent / kDigitSize;
    for (std::uint32_t i = 0; i < count; ++i) {
        SampleImage img(kDigitSize, pitch);
        const unsigned char* src = bytes.data() + 16 + i * pixels;
        for (size_t p = 0; p < pixels; ++p) img.values[p] = src[p] / 255.0;
        images.push_back(std::move(img));
    }
    return images;
}

std::vector<int> load_idx_labels(const std::filesystem::path& path) {
    const auto bytes = slurp(path);
    const std::string where = " in '" + path.string() + "'";
    if (bytes.size() < 8) throw IdxError(IdxFault::kTruncated, "IDX header truncated" + where);
    if (big_endian_u32(bytes.data()) != kIdxLabelMagic) throw IdxError(IdxFault::kBadMagic, "bad IDX1 magic" + where);
    const std::uint32_t count = big_endian_u32(bytes.data() + 4);
    if (bytes.size() - 8 < count) throw IdxError(IdxFault::kTruncated, "IDX label payload truncated" + where);
    return std::vector<int>(bytes.begin() + 8, bytes.begin() + 8 + count);
}

std::uint64_t derive_seed(std::uint64_t base_seed, std::int64_t sample_id, std::uint64_t repetition,
                          IlluminationMode mode) {
    constexpr std::uint64_t kStaticTag = 0x5354415449430000ULL;   // "STATIC"
    constexpr std::uint64_t kDynamicTag = 0x44594e414d494300ULL;  // "DYNAMIC"
    if (mode == IlluminationMode::kStatic) return splitmix64(splitmix64(base_seed ^ kStaticTag));
    std::uint64_t h = splitmix64(base_seed ^ kDynamicTag);
    h = splitmix64(h ^ static_cast<std::uint64_t>(sample_id));
    return splitmix64(h ^ repetition);
}

DatasetHeader generate_dataset(const std::vector<IndexedSample>& samples, const OpticalConfig& config,
                               IlluminationMode mode, std::uint64_t base_seed,
                               const std::filesystem::path& out_path, std::uint64_t repetition, int workers) {
    if (samples.empty()) throw argument_error("generate_dataset: no samples");
    config.validate();
    const int target_n = samples.front().image.n;
    for (const auto& s : samples) {
        if (s.image.n != target_n) throw shape_error("generate_dataset: samples differ in size");
    }

    DatasetHeader header;
    header.record_count = samples.size();
    header.detector_n = static_cast<std::uint32_t>(config.detector_n);
    header.target_n = static_cast<std::uint32_t>(target_n);
    header.mode = mode;
    header.base_seed = base_seed;
    header.optics = config;

    std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot create dataset '" + out_path.string() + "'");
    const auto head = encode_header(header);
    out.write(reinterpret_cast<const char*>(head.data()), static_cast<std::streamsize>(head.size()));

    if (workers <= 0) workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    auto simulate = [&](size_t i) {
        const IndexedSample& s = samples[i];
        DatasetRecord r;
        r.seed = derive_seed(base_seed, s.sample_id, repetition, mode);
        r.sample_id = s.sample_id;
        SpecklePair pair = simulate_pair(s.image, config, r.seed);
        r.reference = std::move(pair.reference);
        r.test = std::move(pair.test);
        r.target = s.image;
        return r;
    };

    // Records are simulated in blocks across workers and written in sample order.
    const size_t block = static_cast<size_t>(workers) * 8;
    std::vector<unsigned char> bytes;
    for (size_t begin = 0; begin < samples.size(); begin += block) {
        const size_t end = std::min(samples.size(), begin + block);
        std::vector<DatasetRecord> records(end - begin);
        if (workers == 1) {
            for (size_t i = begin; i < end; ++i) records[i - begin] = simulate(i);
        } else {
            std::vector<std::future<void>> jobs;
            for (int w = 0; w < workers; ++w) {
                jobs.push_back(std::async(std::launch::async, [&, w] {
                    for (size_t i = begin + w; i < end; i += workers) records[i - begin] = simulate(i);
                }));
            }
            for (auto& j : jobs) j.get();
        }
        bytes.clear();
        for (const auto& r : records) encode_record(bytes, r);
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw io_error("write failed for dataset '" + out_path.string() + "'");
    }
    out.close();
    if (!out) throw io_error("close failed for dataset '" + out_path.string() + "'");
    return header;
}

DatasetReader::DatasetReader(const std::filesystem::path& path) : path_(path), in_(path, std::ios::binary) {
    if (!in_) throw io_error("cannot open dataset '" + path.string() + "'");
    const std::string where = " in '" + path.string() + "'";
    std::vector<unsigned char> head(kHeaderBytes);
    in_.read(reinterpret_cast<char*>(head.data()), static_cast<std::streamsize>(head.size()));
    if (in_.gcount() >= 4 && !std::equal(head.begin(), head.begin() + 4, kDatasetMagic)) {
        throw DatasetError(DatasetFault::kBadMagic, "not a YGI1 dataset (bad magic)" + where);
    }
    if (in_.gcount() != static_cast<std::streamsize>(kHeaderBytes)) {
        if (in_.gcount() < 4) throw DatasetError(DatasetFault::kBadMagic, "not a YGI1 dataset (too short)" + where);
        throw DatasetError(DatasetFault::kCountMismatch, "dataset header truncated" + where);
    }
    binary::Reader r(head);
    r.get<std::uint32_t>();  // magic, checked above
    header_.version = r.get<std::uint32_t>();
    if (header_.version != kDatasetVersion) {
        throw DatasetError(DatasetFault::kBadVersion,
                           "unsupported dataset version " + std::to_string(header_.version) + where);
    }
    header_.record_count = r.get<std::uint64_t>();
    header_.detector_n = r.get<std::uint32_t>();
    header_.target_n = r.get<std::uint32_t>();
    const auto mode = r.get<std::uint32_t>();
    if (mode > 1) throw DatasetError(DatasetFault::kCorruptRecord, "invalid illumination mode in header" + where);
    header_.mode = static_cast<IlluminationMode>(mode);
    header_.base_seed = r.get<std::uint64_t>();
    OpticalConfig& o = header_.optics;
    o.wavelength = r.get<double>();
    o.d1 = r.get<double>();
    o.d2 = r.get<double>();
    o.source_diameter = r.get<double>();
    o.sim_pitch = r.get<double>();
    o.detector_pitch = r.get<double>();
    o.sim_grid_n = static_cast<int>(r.get<std::uint32_t>());
    o.detector_n = static_cast<int>(r.get<std::uint32_t>());
    o.pad_factor = static_cast<int>(r.get<std::uint32_t>());
    if (header_.detector_n == 0 || header_.target_n == 0 || header_.detector_n > 4096 || header_.target_n > 4096) {
        throw DatasetError(DatasetFault::kCorruptRecord, "implausible image sizes in header" + where);
    }

    data_offset_ = static_cast<std::streamoff>(kHeaderBytes);
    in_.seekg(0, std::ios::end);
    const auto file_size = static_cast<std::uint64_t>(in_.tellg());
    in_.seekg(data_offset_);
    const std::uint64_t payload = file_size - kHeaderBytes;
    const std::uint64_t rec = record_bytes(header_);
    if (payload != header_.record_count * rec) {
        std::ostringstream os;
        os << "header declares " << header_.record_count << " records but payload holds " << payload / rec
           << (payload % rec ? " and a partial record" : "") << where;
        throw DatasetError(DatasetFault::kCountMismatch, os.str());
    }
    buffer_.resize((rec - 16) / 4);
}

void DatasetReader::read_record(DatasetRecord& record) {
    const size_t dn = header_.detector_n, tn = header_.target_n;
    in_.read(reinterpret_cast<char*>(buffer_.data()), static_cast<std::streamsize>(buffer_.size() * 4));
    unsigned char tail[16];
    in_.read(reinterpret_cast<char*>(tail), 16);
    if (!in_) throw io_error("read failed in dataset '" + path_.string() + "'");

    const auto fail = [&](const char* what) {
        throw DatasetError(DatasetFault::kCorruptRecord, std::string("record ") + std::to_string(next_index_) +
                                                             ": " + what + " in '" + path_.string() + "'");
    };
    // Decode little-endian floats independent of host order.
    binary::Reader floats({reinterpret_cast<const unsigned char*>(buffer_.data()), buffer_.size() * 4});
    auto fill = [&](RealImage& img, size_t n, double pitch, bool unit_range) {
        img = RealImage(static_cast<int>(n), pitch);
        for (auto& v : img.values) {
            v = floats.get<float>();
            if (!std::isfinite(v) || v < 0.0 || (unit_range && v > 1.0)) fail("value out of range");
        }
    };
    fill(record.reference, dn, header_.optics.detector_pitch, false);
    fill(record.test, dn, header_.optics.detector_pitch, false);
    fill(record.target, tn, kSampleExtent / static_cast<double>(tn), true);
    binary::Reader t({tail, 16});
    record.seed = t.get<std::uint64_t>();
    record.sample_id = t.get<std::int64_t>();
    ++next_index_;
}

bool DatasetReader::next(DatasetRecord& record) {
    if (next_index_ >= header_.record_count) return false;
    read_record(record);
    return true;
}

DatasetRecord DatasetReader::at(std::uint64_t index) {
    if (index >= header_.record_count) throw argument_error("dataset index out of range");
    in_.clear();
    in_.seekg(data_offset_ + static_cast<std::streamoff>(index * record_bytes(header_)));
    next_index_ = index;
    DatasetRecord record;
    read_record(record);
    return record;
}

std::vector<DatasetRecord> read_all(const std::filesystem::path& path) {
    DatasetReader reader(path);
    std::vector<DatasetRecord> records;
    records.reserve(reader.header().record_count);
    DatasetRecord r;
    while (reader.next(r)) records.push_back(std::move(r));
    return records;
}

RealImage normalize_speckle(const RealImage& image) {
    if (image.values.empty()) throw argument_error("normalize_speckle: empty image");
    const auto [lo, hi] = std::minmax_element(image.values.begin(), image.values.end());
    const double min = *lo, max = *hi;
    if (!(max > min)) throw degenerate_error("normalize_speckle: constant image");
    RealImage out(image.n, image.pitch);
    const double scale = 1.0 / (max - min);
    for (size_t i = 0; i < image.size(); ++i) out.values[i] = (image.values[i] - min) * scale;
    return out;
}

}  // namespace ygi
