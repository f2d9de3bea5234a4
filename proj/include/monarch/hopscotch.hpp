#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "monarch/workloads.hpp"

namespace monarch {

struct HashTableConfig {
    unsigned log2_size = 17;
    unsigned window = 64;     // 32, 64 or 128 buckets
    double read_pct = 95.0;
    double density = 0.5;     // load factor reached before the measured phase
    uint64_t ops = 100'000;   // measured operations
    double zipf_skew = 0.99;

    uint64_t buckets() const { return uint64_t{1} << log2_size; }
    unsigned metadata_bytes() const { return window / 8; }
    void validate() const;
};

enum class HashPath {
    Baseline,  // metadata bitmap then bucket reads, all in ordinary memory
    Monarch,   // keys in flat-CAM, values in flat-RAM, metadata in main memory
};

/// Hopscotch hash table with 64-bit keys and values. Key 0 marks an empty
/// bucket. The table image lives in simulated memory: every lookup answer is
/// decoded from memory responses, and inserts emit the reads and writes the
/// algorithm performs. With no core attached the table runs host-side only.
class HopscotchTable {
public:
    HopscotchTable(Core* core, HashPath path, unsigned log2_size, unsigned window);

    std::optional<uint64_t> lookup(uint64_t key);

    /// Inserts or updates; returns the number of rehashes the insert caused.
    unsigned insert(uint64_t key, uint64_t value);

    uint64_t home(uint64_t key) const { return fmix64(key) & (capacity() - 1); }
    uint64_t capacity() const { return keys_.size(); }
    uint64_t size() const { return count_; }
    double load() const { return static_cast<double>(count_) / static_cast<double>(capacity()); }
    unsigned window() const { return window_; }
    uint64_t rehashes() const { return rehashes_; }

    /// Every stored key sits within `window` buckets of its home and the
    /// hop bitmaps agree with the bucket contents.
    bool check_invariant() const;

    /// Host-side view of bucket `i` (0 when empty).
    uint64_t key_at(uint64_t i) const { return keys_[i]; }

    /// Places `key` with a trial insert; false when the table would have to
    /// grow. Host-side only, used to measure the reachable density.
    bool try_place(uint64_t key, uint64_t value);

private:
    using Hop = std::array<uint64_t, 2>;  // up to 128 offsets

    uint64_t wrap(uint64_t i) const { return i & (capacity() - 1); }
    uint64_t dist(uint64_t from, uint64_t to) const { return wrap(to - from); }
    static bool hop_bit(const Hop& h, unsigned o) { return (h[o / 64] >> (o % 64)) & 1; }
    static void set_hop(Hop& h, unsigned o, bool v);

    void allocate(unsigned log2_size);
    std::optional<uint64_t> host_find(uint64_t key) const;
    std::optional<uint64_t> baseline_lookup(uint64_t key);
    std::optional<uint64_t> monarch_lookup(uint64_t key);

    // Memory-emitting primitives; no-ops without a core.
    uint64_t mem_read_key(uint64_t bucket);
    uint64_t mem_read_value(uint64_t bucket);
    void mem_write_bucket(uint64_t bucket, uint64_t key, uint64_t value);
    Hop mem_read_hop(uint64_t bucket);
    void mem_write_hop(uint64_t bucket);
    void mem_probe(uint64_t bucket, uint64_t& occ_block);
    void mem_write_occupancy(uint64_t bucket);
    void mem_write_region(uint64_t base, uint64_t bytes, const std::vector<uint8_t>& image);

    bool place(uint64_t key, uint64_t value, bool emit);
    void rehash();

    Core* core_;
    HashPath path_;
    unsigned window_;
    std::vector<uint64_t> keys_;
    std::vector<uint64_t> values_;
    std::vector<Hop> hops_;
    uint64_t count_ = 0;
    uint64_t rehashes_ = 0;

    // Simulated addresses.
    uint64_t bucket_base_ = 0;  // baseline: 16-byte key/value buckets
    uint64_t key_base_ = 0;     // Monarch: 8-byte keys in flat-CAM
    uint64_t value_base_ = 0;   // Monarch: 8-byte values in flat-RAM
    uint64_t meta_base_ = 0;    // hop bitmaps, window/8 bytes per bucket
    uint64_t occ_base_ = 0;     // Monarch: one occupancy bit per bucket
    Allocation cam_;
    std::optional<uint64_t> key_loaded_;
};

/// Largest load factor reached by inserting fresh keys into a table of
/// 2^log2_size buckets before the first insert that would force a rehash.
double max_density_before_rehash(unsigned log2_size, unsigned window, uint64_t seed);

struct HashingResult {
    uint64_t lookups = 0;
    uint64_t lookup_hits = 0;
    uint64_t inserts = 0;
    uint64_t rehashes = 0;
    uint64_t answer_digest = 0;  // order-sensitive digest of every lookup answer
    bool invariant_ok = true;
};

/// Fills a table to the configured density, then runs the zipfian mix.
HashingResult run_hashing(Core& core, HashPath path, const HashTableConfig& cfg, uint64_t seed);

}  // namespace monarch
