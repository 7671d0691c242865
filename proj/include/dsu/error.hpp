#pragma once

#include <stdexcept>
#include <string>

namespace dsu {

// Exit-code mapping for the CLI: usage=1, data=2, numeric=3.
struct UsageError : std::runtime_error {
    explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

enum class DecodeErrorKind {
    MalformedHeader,
    UnsupportedBitDepth,
    DimensionMismatch,
    UnsupportedColorType,
    BadChecksum,
};

// Image decode failures keep a machine-checkable kind so callers can tell
// a truncated file from a 16-bit one.
struct DecodeError : DataError {
    DecodeErrorKind kind;
    DecodeError(DecodeErrorKind k, const std::string& msg) : DataError(msg), kind(k) {}
};

} // namespace dsu
