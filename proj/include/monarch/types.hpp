#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace monarch {

using Cycle = uint64_t;

inline constexpr double kCpuClockHz = 3.2e9;
inline constexpr double kSecondsPerYear = 365.0 * 24 * 3600;

/// A 64-byte memory block. Word s holds bits s*64 .. s*64+63 of the block and
/// maps onto the s-th subarray of a diagonal set.
using Block = std::array<uint64_t, 8>;

inline constexpr unsigned kBlockBytes = 64;
inline constexpr unsigned kSlices = 8;
inline constexpr uint64_t kAllOnes = ~uint64_t{0};

inline constexpr Block zero_block() { return Block{}; }
inline constexpr Block full_mask() {
    return Block{kAllOnes, kAllOnes, kAllOnes, kAllOnes,
                 kAllOnes, kAllOnes, kAllOnes, kAllOnes};
}

/// Byte-granular mask covering [offset, offset + size) of a block.
Block byte_mask(unsigned offset, unsigned size);

/// Low `width` bits set (width <= 64).
inline constexpr uint64_t low_bits(unsigned width) {
    return width >= 64 ? kAllOnes : ((uint64_t{1} << width) - 1);
}

class MonarchError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Out-of-range coordinates, unaligned addresses, unmapped regions.
class AddressError : public MonarchError {
public:
    using MonarchError::MonarchError;
};

/// Sensing-mode or port-mode mismatch (e.g. a read on a bank prepared for search).
class ModeError : public MonarchError {
public:
    using MonarchError::MonarchError;
};

/// No sensing window for the given device parameters.
class MarginError : public MonarchError {
public:
    using MonarchError::MonarchError;
};

class ConfigError : public MonarchError {
public:
    using MonarchError::MonarchError;
};

class AllocationError : public MonarchError {
public:
    using MonarchError::MonarchError;
};

class EstimationError : public MonarchError {
public:
    using MonarchError::MonarchError;
};

}  // namespace monarch
