#pragma once

#include <stdexcept>
#include <string>

namespace ygi {

// Mirrors ygi_status in ygi.h; the C boundary translates one into the other.
enum class ErrorCode {
    kConfig = 1,
    kIo = 2,
    kFormat = 3,
    kCorrupt = 4,
    kNumeric = 5,
    kShape = 6,
    kDegenerate = 7,
    kArgument = 8,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

inline Error config_error(const std::string& what) { return {ErrorCode::kConfig, what}; }
inline Error io_error(const std::string& what) { return {ErrorCode::kIo, what}; }
inline Error format_error(const std::string& what) { return {ErrorCode::kFormat, what}; }
inline Error corrupt_error(const std::string& what) { return {ErrorCode::kCorrupt, what}; }
inline Error numeric_error(const std::string& what) { return {ErrorCode::kNumeric, what}; }
inline Error shape_error(const std::string& what) { return {ErrorCode::kShape, what}; }
inline Error degenerate_error(const std::string& what) { return {ErrorCode::kDegenerate, what}; }
inline Error argument_error(const std::string& what) { return {ErrorCode::kArgument, what}; }

}  // namespace ygi
