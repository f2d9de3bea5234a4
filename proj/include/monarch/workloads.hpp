#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "monarch/port.hpp"

namespace monarch {

/// 64-bit Murmur3 finalizer.
constexpr uint64_t fmix64(uint64_t k) {
    k ^= k >> 33;
    k *= 0xff51afd7ed558ccdull;
    k ^= k >> 33;
    k *= 0xc4ceb9fe1a85ec53ull;
    k ^= k >> 33;
    return k;
}

/// Uniform double in [0, 1) from the top 53 bits of one draw.
inline double unit_double(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Zipfian ranks in [0, n) with rank 0 the most popular (Gray et al.
/// closed-form sampler, as used by YCSB).
class ZipfGenerator {
public:
    ZipfGenerator(uint64_t n, double skew);

    uint64_t sample(std::mt19937_64& rng) const;

    uint64_t n() const { return n_; }
    double skew() const { return theta_; }

    /// Probability of rank r, for oracle comparisons.
    double probability(uint64_t r) const;

private:
    uint64_t n_;
    double theta_;
    double zetan_;
    double alpha_;
    double eta_;
};

enum class KvOp { Read, Write };

struct KvRequest {
    KvOp op;
    uint64_t rank;  // read: zipfian rank among the live keys; write: unused
};

/// YCSB-style operation stream over a growing key population.
class ZipfStream {
public:
    ZipfStream(uint64_t universe, double skew, double read_fraction, uint64_t seed);

    KvRequest next();

    double read_fraction() const { return read_fraction_; }

private:
    ZipfGenerator zipf_;
    double read_fraction_;
    std::mt19937_64 rng_;
};

/// Byte helpers for sub-block fields inside a Block (little-endian).
uint64_t get_bytes(const Block& b, unsigned offset, unsigned size);
void put_bytes(Block& b, unsigned offset, uint64_t value, unsigned size);

/// Issues a `size`-byte read at `addr` and returns the field value.
uint64_t read_field(Core& core, uint64_t addr, unsigned size);
/// Issues a `size`-byte write of `value` at `addr`.
void write_field(Core& core, uint64_t addr, uint64_t value, unsigned size);

}  // namespace monarch
