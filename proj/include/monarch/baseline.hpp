#pragma once

#include <list>
#include <string>
#include <vector>

#include "monarch/port.hpp"
#include "monarch/vault.hpp"

namespace monarch {

enum class BaselineKind { DramCache, DramCacheIdeal, HbmScratchpad, SramStack, RramFlat };

std::string baseline_name(BaselineKind k);
BaselineKind baseline_from_name(const std::string& s);

struct BaselineConfig {
    BaselineKind kind = BaselineKind::DramCache;
    L3Config l3;
    MemTiming main_memory = MemTiming::ddr4();
    uint64_t dram_cache_bytes = 4ull << 30;
    unsigned dram_cache_ways = 32;
    double refresh_tax = 0.0;  // fractional latency added to DRAM-cache accesses
    uint64_t scratch_bytes = 0;  // 0 selects the capacity of the kind

    uint64_t scratch_capacity() const;
    MemTiming in_package_timing() const;
};

/// Conventional configurations: an in-package DRAM cache below the L3, or an
/// in-package scratchpad (HBM, SRAM, plain RRAM) addressed through
/// HBM_malloc / flat_RAM_malloc. Scratchpad bytes beyond the capacity spill
/// to main memory.
class BaselineSystem : public CachedSystem {
public:
    explicit BaselineSystem(const BaselineConfig& cfg);

    Allocation alloc(AllocKind kind, uint64_t bytes) override;
    Response access(const Request& req) override;
    Cycle finish(Cycle now) override;
    Stats stats() const override;
    std::string name() const override { return baseline_name(cfg_.kind); }

    const BaselineConfig& config() const { return cfg_; }

protected:
    Fetch fetch(uint64_t block, Cycle at) override;
    Cycle evicted(const L3Eviction& ev, Cycle at) override;
    std::optional<Block> peek_below(uint64_t block) const override;
    bool uncached(uint64_t addr) const override;
    Block observe_uncached(uint64_t addr) const override;

private:
    struct Line {
        uint64_t block;
        bool dirty;
        Block data;
    };
    bool has_cache() const {
        return cfg_.kind == BaselineKind::DramCache || cfg_.kind == BaselineKind::DramCacheIdeal;
    }
    Cycle dram(uint64_t set, unsigned way, bool write, Cycle at);
    Cycle cache_fill(uint64_t block, const Block& data, bool dirty, Cycle at);

    BaselineConfig cfg_;
    TimedMemory inpkg_;
    BlockStore scratch_;
    std::vector<std::list<Line>> sets_;  // DRAM cache, front is most recent
    RegionAllocator main_alloc_;
    RegionAllocator scratch_alloc_;
    uint64_t inpkg_reads_ = 0;
    uint64_t inpkg_writes_ = 0;
    uint64_t tag_accesses_ = 0;
};

/// Serves `trace` through a fresh baseline of the given kind.
Stats run_baseline(BaselineKind kind, const std::vector<Request>& trace,
                   BaselineConfig cfg = {});

}  // namespace monarch
