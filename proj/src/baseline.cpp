#include "monarch/baseline.hpp"

#include <algorithm>
#include <cmath>

namespace monarch {

std::string baseline_name(BaselineKind k) {
    switch (k) {
        case BaselineKind::DramCache: return "dram-cache";
        case BaselineKind::DramCacheIdeal: return "dram-cache-ideal";
        case BaselineKind::HbmScratchpad: return "hbm-scratchpad";
        case BaselineKind::SramStack: return "sram-stack";
        case BaselineKind::RramFlat: return "rram-flat";
    }
    return "?";
}

BaselineKind baseline_from_name(const std::string& s) {
    for (BaselineKind k : {BaselineKind::DramCache, BaselineKind::DramCacheIdeal,
                           BaselineKind::HbmScratchpad, BaselineKind::SramStack,
                           BaselineKind::RramFlat}) {
        if (baseline_name(k) == s) return k;
    }
    throw ConfigError("unknown baseline '" + s + "'");
}

uint64_t BaselineConfig::scratch_capacity() const {
    if (scratch_bytes) return scratch_bytes;
    switch (kind) {
        case BaselineKind::HbmScratchpad: return 4ull << 30;
        case BaselineKind::SramStack: return 73'280'000ull;  // 73.28MB
        case BaselineKind::RramFlat: return 8ull << 30;
        default: return 0;
    }
}

MemTiming BaselineConfig::in_package_timing() const {
    switch (kind) {
        case BaselineKind::DramCacheIdeal: return MemTiming::in_package_dram_ideal();
        case BaselineKind::SramStack: return MemTiming::cmos_sram();
        case BaselineKind::RramFlat: return MemTiming::rram();
        default: return MemTiming::in_package_dram();
    }
}

BaselineSystem::BaselineSystem(const BaselineConfig& cfg)
    : CachedSystem(cfg.l3, cfg.main_memory),
      cfg_(cfg),
      inpkg_(cfg.in_package_timing()),
      main_alloc_(1ull << 20, kMainMemoryBytes - (1ull << 20)),
      scratch_alloc_(kInPackageBase, kRegisterBase - kInPackageBase) {
    if (has_cache()) {
        if (cfg.dram_cache_ways == 0) throw ConfigError("DRAM cache needs at least one way");
        const uint64_t sets = cfg.dram_cache_bytes / kBlockBytes / cfg.dram_cache_ways;
        if (sets == 0) throw ConfigError("DRAM cache smaller than one set");
        sets_.resize(sets);
    }
    if (cfg.refresh_tax < 0.0) throw ConfigError("refresh tax must be non-negative");
}

Allocation BaselineSystem::alloc(AllocKind kind, uint64_t bytes) {
    Allocation a;
    a.kind = kind;
    a.size = bytes;
    switch (kind) {
        case AllocKind::Main:
            a.base = main_alloc_.allocate(bytes);
            return a;
        case AllocKind::FlatCam:
            throw AllocationError(name() + " has no content-addressable memory");
        case AllocKind::FlatRam:
        case AllocKind::Hbm:
            if (has_cache()) {
                // No scratchpad: the region lives in cached main memory.
                a.base = main_alloc_.allocate(bytes);
                return a;
            }
            a.base = scratch_alloc_.allocate(bytes);
            a.cacheable = false;
            return a;
    }
    throw AllocationError("unknown allocation kind");
}

bool BaselineSystem::uncached(uint64_t addr) const {
    return is_in_package(addr) && !has_cache() && addr - kInPackageBase < cfg_.scratch_capacity();
}

Block BaselineSystem::observe_uncached(uint64_t addr) const {
    return scratch_.read(block_of(addr - kInPackageBase));
}

Cycle BaselineSystem::dram(uint64_t set, unsigned way, bool write, Cycle at) {
    const Cycle done = inpkg_.access(set * cfg_.dram_cache_ways + way, write, at);
    const double extra = std::ceil(static_cast<double>(done - at) * cfg_.refresh_tax);
    write ? ++inpkg_writes_ : ++inpkg_reads_;
    return done + static_cast<Cycle>(extra);
}

Cycle BaselineSystem::cache_fill(uint64_t block, const Block& data, bool dirty, Cycle at) {
    const uint64_t si = block % sets_.size();
    auto& set = sets_[si];
    Cycle t = at;
    if (set.size() >= cfg_.dram_cache_ways) {
        const Line& v = set.back();
        if (v.dirty) t = mm_.write(v.block, v.data, t);
        set.pop_back();
    }
    set.push_front(Line{block, dirty, data});
    return dram(si, static_cast<unsigned>(set.size() - 1), true, t);
}

Fetch BaselineSystem::fetch(uint64_t block, Cycle at) {
    Fetch f;
    if (!has_cache()) {
        f.done = mm_.read(block, at, f.data);
        f.source = Source::MainMemory;
        return f;
    }
    const uint64_t si = block % sets_.size();
    auto& set = sets_[si];
    ++tag_accesses_;
    Cycle t = dram(si, 0, false, at);  // tag probe
    for (auto it = set.begin(); it != set.end(); ++it) {
        if (it->block == block) {
            set.splice(set.begin(), set, it);
            f.data = set.front().data;
            f.done = dram(si, 1, false, t);
            f.source = Source::InPackage;
            return f;
        }
    }
    f.done = mm_.read(block, t, f.data);
    f.source = Source::MainMemory;
    cache_fill(block, f.data, false, f.done);
    return f;
}

Cycle BaselineSystem::evicted(const L3Eviction& ev, Cycle at) {
    if (!ev.dirty) return at;
    if (!has_cache()) return mm_.write(ev.block, ev.data, at);
    const uint64_t si = ev.block % sets_.size();
    auto& set = sets_[si];
    ++tag_accesses_;
    const Cycle t = dram(si, 0, false, at);
    for (auto it = set.begin(); it != set.end(); ++it) {
        if (it->block == ev.block) {
            it->data = ev.data;
            it->dirty = true;
            set.splice(set.begin(), set, it);
            return dram(si, 1, true, t);
        }
    }
    return cache_fill(ev.block, ev.data, true, t);
}

std::optional<Block> BaselineSystem::peek_below(uint64_t block) const {
    if (!has_cache()) return std::nullopt;
    for (const Line& l : sets_[block % sets_.size()]) {
        if (l.block == block) return l.data;
    }
    return std::nullopt;
}

Response BaselineSystem::access(const Request& req) {
    count_request(req);
    if (is_register(req.addr) || req.op == Op::Key || req.op == Op::Mask ||
        req.op == Op::Match || req.op == Op::Search) {
        throw ModeError(name() + " cannot serve " + op_name(req.op) + " requests");
    }
    if (!uncached(req.addr)) return cached_access(req);

    const uint64_t off = req.addr - kInPackageBase;
    const unsigned in_block = static_cast<unsigned>(off % kBlockBytes);
    if (req.size == 0 || in_block + req.size > kBlockBytes) {
        throw AddressError("request crosses a block boundary");
    }
    const uint64_t b = block_of(off);
    Response r;
    r.source = Source::InPackage;
    if (req.op == Op::Write) {
        scratch_.write(b, req.data, byte_mask(in_block, req.size));
        ++inpkg_writes_;
        r.done = inpkg_.access(b, true, req.cycle);
    } else {
        r.data = scratch_.read(b);
        ++inpkg_reads_;
        count_read_source(Source::InPackage);
        r.done = inpkg_.access(b, false, req.cycle);
    }
    return r;
}

Cycle BaselineSystem::finish(Cycle now) {
    Cycle t = drain_l3(now);
    for (auto& set : sets_) {
        for (Line& l : set) {
            if (l.dirty) {
                t = std::max(t, mm_.write(l.block, l.data, now));
                l.dirty = false;
            }
        }
    }
    return t;
}

Stats BaselineSystem::stats() const {
    Stats s;
    export_common(s);
    VaultStats{}.export_to(s, "monarch.");
    s.set("inpkg.reads", static_cast<double>(inpkg_reads_));
    s.set("inpkg.writes", static_cast<double>(inpkg_writes_));
    s.set("inpkg.tag_accesses", static_cast<double>(tag_accesses_));
    s.set("inpkg.activates", static_cast<double>(inpkg_.activates()));
    for (const char* k : {"xam.read_cmds", "xam.write_cmds", "xam.search_cmds", "xam.key_loads",
                          "xam.prepares", "xam.activates", "rotations", "energy_nj"}) {
        s.set(k, 0.0);
    }
    return s;
}

Stats run_baseline(BaselineKind kind, const std::vector<Request>& trace, BaselineConfig cfg) {
    cfg.kind = kind;
    BaselineSystem sys(cfg);
    return replay_trace(sys, trace);
}

}  // namespace monarch
