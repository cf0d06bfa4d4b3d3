#pragma once

// Little-endian encoding helpers shared by the dataset and checkpoint formats.

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

namespace ygi::binary {

template <typename T>
    requires std::is_arithmetic_v<T>
void put(std::vector<unsigned char>& out, T value) {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                                 std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint8_t>>;
    static_assert(sizeof(T) == sizeof(U));
    const U bits = std::bit_cast<U>(value);
    for (size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<unsigned char>(bits >> (8 * i)));
}

inline void put_bytes(std::vector<unsigned char>& out, const void* data, size_t size) {
    const auto* p = static_cast<const unsigned char*>(data);
    out.insert(out.end(), p, p + size);
}

inline void put_string(std::vector<unsigned char>& out, const std::string& s) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
    put_bytes(out, s.data(), s.size());
}

template <typename T>
void put_floats(std::vector<unsigned char>& out, std::span<const T> values) {
    for (T v : values) put<float>(out, static_cast<float>(v));
}

// Cursor over a byte buffer; `ok()` turns false on the first overrun and stays false.
class Reader {
public:
    explicit Reader(std::span<const unsigned char> bytes) : bytes_(bytes) {}

    template <typename T>
        requires std::is_arithmetic_v<T>
    T get() {
        using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                                     std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint8_t>>;
        if (!take(sizeof(U))) return T{};
        U bits = 0;
        for (size_t i = 0; i < sizeof(U); ++i) bits |= static_cast<U>(bytes_[pos_ - sizeof(U) + i]) << (8 * i);
        return std::bit_cast<T>(bits);
    }

    bool get_bytes(void* dst, size_t size) {
        if (!take(size)) return false;
        std::memcpy(dst, bytes_.data() + pos_ - size, size);
        return true;
    }

    std::string get_string(size_t max_len = 1 << 20) {
        const auto len = get<std::uint32_t>();
        if (len > max_len || !take(len)) {
            ok_ = false;
            return {};
        }
        return std::string(reinterpret_cast<const char*>(bytes_.data() + pos_ - len), len);
    }

    bool ok() const { return ok_; }
    size_t remaining() const { return bytes_.size() - pos_; }
    size_t position() const { return pos_; }

private:
    bool take(size_t n) {
        if (!ok_ || bytes_.size() - pos_ < n) {
            ok_ = false;
            return false;
        }
        pos_ += n;
        return true;
    }

    std::span<const unsigned char> bytes_;
    size_t pos_ = 0;
    bool ok_ = true;
};

// FNV-1a, 64-bit.
inline std::uint64_t fnv1a(std::span<const unsigned char> bytes, std::uint64_t hash = 0xcbf29ce484222325ULL) {
    for (unsigned char b : bytes) {
        hash ^= b;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

}  // namespace ygi::binary
