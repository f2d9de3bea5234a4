#include "monarch/port.hpp"

#include <algorithm>

namespace monarch {

std::string alloc_name(AllocKind k) {
    switch (k) {
        case AllocKind::Main: return "malloc";
        case AllocKind::FlatRam: return "flat_RAM_malloc";
        case AllocKind::FlatCam: return "flat_CAM_malloc";
        case AllocKind::Hbm: return "HBM_malloc";
    }
    return "?";
}

uint64_t RegionAllocator::allocate(uint64_t bytes, uint64_t align) {
    if (bytes == 0) throw AllocationError("zero-byte allocation");
    const uint64_t start = (next_ + align - 1) / align * align;
    if (start > capacity_ || bytes > capacity_ - start) {
        throw AllocationError("allocation of " + std::to_string(bytes) + " bytes exceeds capacity (" +
                              std::to_string(capacity_ - std::min(capacity_, next_)) + " left)");
    }
    next_ = start + bytes;
    return base_ + start;
}

Response Core::issue(Request r) {
    r.cycle = std::max(r.cycle, now_);
    const Response resp = port_.access(r);
    ++requests_;
    ++by_op_[static_cast<size_t>(r.op)];
    now_ = r.critical ? std::max(r.cycle + 1, resp.done) : r.cycle + 1;
    return resp;
}

Response Core::read(uint64_t addr, bool critical) {
    Request r;
    r.op = Op::Read;
    r.addr = addr;
    r.critical = critical;
    return issue(r);
}

Response Core::write(uint64_t addr, const Block& data, bool critical) {
    Request r;
    r.op = Op::Write;
    r.addr = addr;
    r.data = data;
    r.critical = critical;
    return issue(r);
}

Block synthetic_payload(uint64_t addr, Cycle cycle) {
    Block b{};
    uint64_t x = addr * 0x9E3779B97F4A7C15ull ^ (cycle + 0x632BE59BD9B4E019ull);
    for (auto& w : b) {
        x ^= x >> 33;
        x *= 0xFF51AFD7ED558CCDull;
        x ^= x >> 33;
        w = x;
    }
    return b;
}

Stats replay_trace(MemoryPort& port, const std::vector<Request>& trace) {
    Core core(port);
    for (Request r : trace) {
        if (r.op == Op::Write || r.op == Op::Key || r.op == Op::Mask) {
            r.data = synthetic_payload(r.addr, r.cycle);
        }
        core.issue(r);
    }
    const Cycle end = port.finish(core.now());
    Stats s = port.stats();
    s.set("cycles", static_cast<double>(core.now()));
    s.set("cycles_with_drain", static_cast<double>(end));
    return s;
}

void CachedSystem::count_request(const Request& r) {
    counters_.add("requests");
    counters_.add("requests." + op_name(r.op));
}

void CachedSystem::count_read_source(Source s) {
    if (s == Source::L3 || s == Source::Register) return;
    counters_.add("reads_served");
    if (s == Source::InPackage) {
        counters_.add("reads_hit_inpackage");
    } else {
        counters_.add("reads_main_memory");
    }
}

Response CachedSystem::cached_access(const Request& r) {
    const uint64_t block = block_of(r.addr);
    const unsigned offset = static_cast<unsigned>(r.addr % kBlockBytes);
    if (r.size == 0 || offset + r.size > kBlockBytes) {
        throw AddressError("request crosses a block boundary");
    }
    const bool write = r.op == Op::Write;
    Response resp;
    Cycle t = r.cycle;
    if (Block* line = l3_.touch(block, write)) {
        counters_.add(write ? "l3.write_hits" : "l3.hits");
        if (write) {
            const Block m = byte_mask(offset, r.size);
            for (unsigned s = 0; s < kSlices; ++s) (*line)[s] = ((*line)[s] & ~m[s]) | (r.data[s] & m[s]);
        }
        resp.data = *line;
        resp.done = t + l3_.config().hit_latency;
        resp.source = Source::L3;
        return resp;
    }
    counters_.add("l3.misses");
    Fetch f = fetch(block, t + l3_.config().hit_latency);
    if (write) {
        counters_.add("write_fills");
        counters_.add(f.source == Source::InPackage ? "write_fills_inpackage" : "write_fills_main_memory");
    } else {
        count_read_source(f.source);
    }
    if (auto ev = l3_.install(block, f.data)) {
        counters_.add("l3.evictions");
        if (ev->dirty) counters_.add("l3.dirty_evictions");
        evicted(*ev, f.done);
    }
    // The fill itself is not a read after installation, so R stays clear.
    resp.data = f.data;
    if (write) {
        Block* line = l3_.touch(block, true);
        const Block m = byte_mask(offset, r.size);
        for (unsigned s = 0; s < kSlices; ++s) (*line)[s] = ((*line)[s] & ~m[s]) | (r.data[s] & m[s]);
        resp.data = *line;
    }
    resp.done = f.done;
    resp.source = f.source;
    return resp;
}

Cycle CachedSystem::drain_l3(Cycle now) {
    Cycle t = now;
    for (const L3Eviction& ev : l3_.drain()) {
        t = std::max(t, evicted(ev, t));
    }
    return t;
}

Block CachedSystem::observe(uint64_t addr) const {
    if (uncached(addr)) return observe_uncached(addr);
    const uint64_t block = block_of(addr);
    if (auto b = l3_.peek(block)) return *b;
    if (auto b = peek_below(block)) return *b;
    return mm_.store().read(block);
}

void CachedSystem::export_common(Stats& s) const {
    for (const char* k : {"requests", "requests.R", "requests.W", "requests.S", "requests.KEY",
                          "requests.MASK", "requests.MATCH", "l3.hits", "l3.write_hits",
                          "l3.misses", "l3.evictions", "l3.dirty_evictions",
                          "reads_served", "reads_hit_inpackage", "reads_main_memory",
                          "write_fills", "write_fills_inpackage", "write_fills_main_memory"}) {
        s.set(k, counters_.get(k));
    }
    s.set("mm.reads", static_cast<double>(mm_.reads()));
    s.set("mm.writes", static_cast<double>(mm_.writes()));
}

}  // namespace monarch
