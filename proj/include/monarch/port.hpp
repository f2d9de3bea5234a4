#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "monarch/memsys.hpp"
#include "monarch/timing.hpp"

namespace monarch {

inline constexpr uint64_t kMainMemoryBytes = 32ull << 30;
inline constexpr uint64_t kInPackageBase = 1ull << 44;
inline constexpr uint64_t kRegisterBase = 1ull << 45;
inline constexpr uint64_t kKeyRegister = kRegisterBase;
inline constexpr uint64_t kMaskRegister = kRegisterBase + kBlockBytes;
inline constexpr uint64_t kMatchRegister = kRegisterBase + 2 * kBlockBytes;

inline bool is_in_package(uint64_t addr) { return addr >= kInPackageBase && addr < kRegisterBase; }
inline bool is_register(uint64_t addr) { return addr >= kRegisterBase; }

enum class AllocKind {
    Main,     // malloc: cacheable main memory
    FlatRam,  // flat_RAM_malloc
    FlatCam,  // flat_CAM_malloc
    Hbm,      // HBM_malloc
};

std::string alloc_name(AllocKind k);

struct Allocation {
    uint64_t base = 0;
    uint64_t size = 0;
    AllocKind kind = AllocKind::Main;
    bool cacheable = true;
    uint64_t key_ptr = 0;  // flat_CAM_malloc only
    uint64_t mask_ptr = 0;
    uint64_t match_ptr = 0;

    uint64_t end() const { return base + size; }
};

/// Bump allocator over one address range; a failed request leaves it as is.
class RegionAllocator {
public:
    RegionAllocator() = default;
    RegionAllocator(uint64_t base, uint64_t capacity) : base_(base), capacity_(capacity) {}

    uint64_t allocate(uint64_t bytes, uint64_t align = 4096);
    uint64_t used() const { return next_; }
    uint64_t capacity() const { return capacity_; }
    uint64_t base() const { return base_; }

private:
    uint64_t base_ = 0;
    uint64_t capacity_ = 0;
    uint64_t next_ = 0;
};

/// What a workload sees of a memory configuration.
class MemoryPort {
public:
    virtual ~MemoryPort() = default;

    virtual Allocation alloc(AllocKind kind, uint64_t bytes) = 0;
    virtual Response access(const Request& req) = 0;

    /// Drains caches so the main-memory image is final; returns the cycle.
    virtual Cycle finish(Cycle now) = 0;

    virtual Stats stats() const = 0;
    virtual std::string name() const = 0;

    /// Value of a block as the program would observe it.
    virtual Block observe(uint64_t addr) const = 0;
};

/// In-order front end: a critical request blocks the next issue until it
/// completes, a non-critical one only takes an issue slot.
class Core {
public:
    explicit Core(MemoryPort& port) : port_(port) {}

    Response issue(Request r);
    Response read(uint64_t addr, bool critical = true);
    Response write(uint64_t addr, const Block& data, bool critical = false);
    void compute(Cycle cycles) { now_ += cycles; }

    Cycle now() const { return now_; }
    uint64_t requests() const { return requests_; }
    uint64_t requests(Op op) const { return by_op_[static_cast<size_t>(op)]; }
    MemoryPort& port() { return port_; }

private:
    MemoryPort& port_;
    Cycle now_ = 0;
    uint64_t requests_ = 0;
    std::array<uint64_t, 6> by_op_{};
};

/// Below-L3 answer for a block fetch.
struct Fetch {
    Cycle done = 0;
    Block data{};
    Source source = Source::MainMemory;
};

/// Shared front half of every configuration: an L3 with D/R flags in front of
/// a configuration-specific in-package level and the off-chip main memory.
class CachedSystem : public MemoryPort {
public:
    Block observe(uint64_t addr) const override;

    L3Model& l3() { return l3_; }
    MainMemory& main_memory() { return mm_; }
    const MainMemory& main_memory() const { return mm_; }

protected:
    CachedSystem(const L3Config& l3, const MemTiming& mm) : l3_(l3), mm_(mm) {}

    /// Read or write of a cacheable block through the L3.
    Response cached_access(const Request& r);

    /// Evicts every L3 block through evicted(); returns the last cycle.
    Cycle drain_l3(Cycle now);

    virtual Fetch fetch(uint64_t block, Cycle at) = 0;
    virtual Cycle evicted(const L3Eviction& ev, Cycle at) = 0;
    virtual std::optional<Block> peek_below(uint64_t block) const = 0;
    virtual bool uncached(uint64_t addr) const = 0;
    virtual Block observe_uncached(uint64_t addr) const = 0;

    /// Common counters: requests, L3, main memory, read conservation.
    void export_common(Stats& s) const;
    void count_request(const Request& r);
    void count_read_source(Source s);

    L3Model l3_;
    MainMemory mm_;
    Stats counters_;
};

/// Replays a request trace through `port` and returns its stats with the
/// total cycle count.
Stats replay_trace(MemoryPort& port, const std::vector<Request>& trace);

/// Deterministic payload for trace-driven writes.
Block synthetic_payload(uint64_t addr, Cycle cycle);

}  // namespace monarch
