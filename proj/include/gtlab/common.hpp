#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace gtlab {

inline constexpr int kSchemaVersion = 1;

// Error taxonomy. Everything the library throws derives from Error so the CLI
// can map failures onto its exit codes in one place.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed caller input: shape mismatches, bad ranges, contract violations.
struct UsageError : Error {
    explicit UsageError(const std::string& msg) : Error(msg) {}
};

// Broken data files or schema violations in datasets/checkpoints/configs.
struct DataError : Error {
    explicit DataError(const std::string& msg) : Error(msg) {}
};

// Numerical breakdown (non-finite values, domain errors).
struct NumericError : Error {
    explicit NumericError(const std::string& msg) : Error(msg) {}
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw UsageError(msg);
}

// FNV-1a, used for substream derivation and dataset checksums.
inline std::uint64_t fnv1a64(const void* data, std::size_t len,
                             std::uint64_t seed = 0xcbf29ce484222325ull) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::uint64_t fnv1a64(const std::string& s,
                             std::uint64_t seed = 0xcbf29ce484222325ull) {
    return fnv1a64(s.data(), s.size(), seed);
}

}  // namespace gtlab
