#pragma once

#include <cstdint>
#include <iosfwd>
#include <list>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "monarch/types.hpp"

namespace monarch {

enum class Op { Read, Write, Search, Key, Mask, Match };

std::string op_name(Op op);
Op op_from_name(const std::string& s);

struct Request {
    Cycle cycle = 0;
    Op op = Op::Read;
    uint64_t addr = 0;
    uint32_t size = kBlockBytes;
    bool critical = true;
    Block data{};
};

enum class Source { L3, InPackage, MainMemory, Register };

struct Response {
    Cycle done = 0;
    Block data{};
    Source source = Source::MainMemory;
    std::optional<uint64_t> match;  // MATCH reads: lowest matching index
    Block match_vector{};           // MATCH reads: every matching index
    bool stalled = false;
};

/// Request trace lines: `cycle op address size critical`, op one of
/// R W S KEY MASK MATCH, critical 0 or 1.
void write_request_trace(std::ostream& os, const std::vector<Request>& reqs);
std::vector<Request> read_request_trace(std::istream& is);

/// Named counters in a fixed (sorted) order.
class Stats {
public:
    void add(const std::string& key, double v = 1.0) { values_[key] += v; }
    void set(const std::string& key, double v) { values_[key] = v; }
    double get(const std::string& key) const;
    uint64_t count(const std::string& key) const { return static_cast<uint64_t>(get(key)); }
    bool has(const std::string& key) const { return values_.count(key) > 0; }
    const std::map<std::string, double>& values() const { return values_; }

    /// `name,value` lines, values printed with at most 6 decimals.
    std::string to_csv() const;

private:
    std::map<std::string, double> values_;
};

std::string format_value(double v);

inline uint64_t block_of(uint64_t addr) { return addr / kBlockBytes; }

/// Sparse block store, zero by default.
class BlockStore {
public:
    Block read(uint64_t block) const;
    void write(uint64_t block, const Block& data, const Block& mask = full_mask());
    const std::unordered_map<uint64_t, Block>& blocks() const { return blocks_; }

private:
    std::unordered_map<uint64_t, Block> blocks_;
};

/// Timing of a banked memory in CPU cycles.
struct MemTiming {
    Cycle tRCD = 44;
    Cycle tCAS = 44;
    Cycle tBL = 10;
    Cycle tRP = 44;
    Cycle tCWD = 61;
    Cycle tWR = 4;
    Cycle tCCD = 16;
    unsigned channels = 2;
    unsigned banks = 8;       // per channel
    unsigned row_blocks = 128;  // blocks per row buffer
    bool row_buffer = true;   // false: every access pays tRCD, never tRP
    bool ideal = false;       // no activate or precharge cost at all

    static MemTiming ddr4();
    static MemTiming in_package_dram();
    static MemTiming in_package_dram_ideal();
    static MemTiming cmos_sram();
    static MemTiming rram();
};

/// Open-page banked memory: per-bank row buffers, channel column spacing.
class TimedMemory {
public:
    explicit TimedMemory(MemTiming t = MemTiming::ddr4());

    /// Completion cycle of a block access arriving at `at`.
    Cycle access(uint64_t block, bool write, Cycle at);

    const MemTiming& timing() const { return t_; }
    uint64_t activates() const { return activates_; }
    uint64_t row_hits() const { return row_hits_; }

private:
    struct Bank {
        std::optional<uint64_t> open_row;
        Cycle ready = 0;
    };
    MemTiming t_;
    std::vector<Bank> banks_;
    std::vector<std::optional<Cycle>> last_col_;
    uint64_t activates_ = 0;
    uint64_t row_hits_ = 0;
};

/// Off-chip main memory: timing plus the functional image.
class MainMemory {
public:
    explicit MainMemory(MemTiming t = MemTiming::ddr4()) : timing_(t) {}

    Cycle read(uint64_t block, Cycle at, Block& out);
    Cycle write(uint64_t block, const Block& data, Cycle at);

    BlockStore& store() { return store_; }
    const BlockStore& store() const { return store_; }
    uint64_t reads() const { return reads_; }
    uint64_t writes() const { return writes_; }

private:
    TimedMemory timing_;
    BlockStore store_;
    uint64_t reads_ = 0;
    uint64_t writes_ = 0;
};

struct L3Config {
    uint64_t bytes = 8ull << 20;
    unsigned ways = 16;
    Cycle hit_latency = 40;

    unsigned sets() const { return static_cast<unsigned>(bytes / kBlockBytes / ways); }
};

struct L3Eviction {
    uint64_t block = 0;
    Block data{};
    bool dirty = false;
    bool read = false;
};

/// Set-associative LRU cache holding data plus a dirty (D) and a
/// read-after-install (R) flag per block.
class L3Model {
public:
    explicit L3Model(L3Config cfg = {});

    /// Data of a resident block with LRU promotion; sets R on reads and D on
    /// writes. nullptr on a miss.
    Block* touch(uint64_t block, bool write);

    /// Installs a block with D and R cleared; returns the LRU victim if the
    /// set was full.
    std::optional<L3Eviction> install(uint64_t block, const Block& data);

    bool contains(uint64_t block) const;
    std::optional<Block> peek(uint64_t block) const;
    std::optional<std::pair<bool, bool>> flags(uint64_t block) const;  // (D, R)

    /// Removes every block, dirty ones first returned in address order.
    std::vector<L3Eviction> drain();

    const L3Config& config() const { return cfg_; }

private:
    struct Line {
        uint64_t block;
        Block data;
        bool dirty = false;
        bool read = false;
    };
    using Set = std::list<Line>;  // front is most recent
    Set& set_of(uint64_t block) { return sets_[block % sets_.size()]; }
    const Set& set_of(uint64_t block) const { return sets_[block % sets_.size()]; }

    L3Config cfg_;
    std::vector<Set> sets_;
};

}  // namespace monarch
