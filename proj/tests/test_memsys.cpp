#include <doctest.h>

#include <random>
#include <sstream>

#include "monarch/baseline.hpp"
#include "monarch/system.hpp"
#include "oracles.hpp"

using namespace monarch;

namespace {

std::vector<Request> random_trace(uint64_t seed, size_t n, uint64_t base, uint64_t span_blocks,
                                  double write_frac) {
    std::mt19937_64 rng(seed);
    std::vector<Request> out;
    Cycle c = 0;
    for (size_t i = 0; i < n; ++i) {
        Request r;
        c += rng() % 4;
        r.cycle = c;
        r.addr = base + (rng() % span_blocks) * 64;
        r.op = std::uniform_real_distribution<>(0, 1)(rng) < write_frac ? Op::Write : Op::Read;
        r.critical = r.op == Op::Read;
        if (r.op == Op::Write) r.data = synthetic_payload(r.addr, c);
        out.push_back(r);
    }
    return out;
}

}  // namespace

TEST_CASE("closed-bank and open-row read latencies") {
    TimedMemory m(MemTiming::ddr4());
    CHECK(m.access(0, false, 0) == 44 + 44 + 10);
    CHECK(m.access(1 * 2 * 8, false, 1000) - 1000 == 44 + 10);  // same channel, bank and row
    const MemTiming t = MemTiming::ddr4();
    const uint64_t other_row = uint64_t{t.channels} * t.banks * t.row_blocks;
    CHECK(m.access(other_row, false, 2000) - 2000 == 44 + 44 + 44 + 10);
}

TEST_CASE("ideal timing has no activate or precharge") {
    TimedMemory m(MemTiming::in_package_dram_ideal());
    const MemTiming t = m.timing();
    CHECK(m.access(0, false, 0) == t.tCAS + t.tBL);
    CHECK(m.access(999999, false, 100) == 100 + t.tCAS + t.tBL);
    CHECK(m.activates() == 0);
}

TEST_CASE("main memory returns the last written value") {
    MainMemory mm;
    Block out;
    mm.read(7, 0, out);
    CHECK(out == Block{});
    mm.write(7, Block{1, 2, 3}, 0);
    mm.read(7, 500, out);
    CHECK(out == Block{1, 2, 3});
    CHECK(mm.reads() == 2);
    CHECK(mm.writes() == 1);
}

TEST_CASE("L3 flag rules") {
    L3Config cfg;
    cfg.bytes = 64 * 2;
    cfg.ways = 2;  // one set of two ways
    L3Model l3(cfg);
    l3.install(10, Block{});
    CHECK(l3.flags(10) == std::make_pair(false, false));
    l3.touch(10, false);
    CHECK(l3.flags(10) == std::make_pair(false, true));
    l3.install(11, Block{});
    l3.touch(11, true);
    CHECK(l3.flags(11) == std::make_pair(true, false));
    // 10 is now LRU.
    auto ev = l3.install(12, Block{});
    REQUIRE(ev);
    CHECK(ev->block == 10);
    CHECK_FALSE(ev->dirty);
    CHECK(ev->read);
    ev = l3.install(13, Block{});
    REQUIRE(ev);
    CHECK(ev->block == 11);
    CHECK(ev->dirty);
    CHECK_FALSE(ev->read);
}

TEST_CASE("L3 matches a reference LRU on random traces") {
    L3Config cfg;
    cfg.bytes = 64 * 64;
    cfg.ways = 4;
    L3Model l3(cfg);
    oracle::LruCache ref(cfg.sets(), cfg.ways);
    std::mt19937_64 rng(71);
    for (int i = 0; i < 100000; ++i) {
        const uint64_t b = rng() % 300;
        const bool w = rng() % 3 == 0;
        oracle::LruCache::Evicted e;
        const bool hit = ref.access(b, w, &e);
        if (l3.touch(b, w)) {
            REQUIRE(hit);
            continue;
        }
        REQUIRE_FALSE(hit);
        const auto ev = l3.install(b, Block{});
        REQUIRE(ev.has_value() == e.valid);
        if (ev) {
            REQUIRE(ev->block == e.block);
            REQUIRE(ev->dirty == e.dirty);
            REQUIRE(ev->read == e.read);
        }
        if (w) l3.touch(b, true);
    }
}

TEST_CASE("a read miss fill does not count as a read after installation") {
    BaselineConfig cfg;
    cfg.kind = BaselineKind::DramCache;
    BaselineSystem sys(cfg);
    Request r;
    r.addr = 1 << 20;
    sys.access(r);
    CHECK(sys.l3().flags(block_of(r.addr)) == std::make_pair(false, false));
    sys.access(r);
    CHECK(sys.l3().flags(block_of(r.addr)) == std::make_pair(false, true));
}

TEST_CASE("ideal DRAM cache is never slower") {
    const auto trace = random_trace(72, 30000, 1 << 20, 400000, 0.3);
    BaselineConfig cfg;
    cfg.l3.bytes = 256 * 1024;
    cfg.dram_cache_bytes = 8 << 20;
    const Stats real = run_baseline(BaselineKind::DramCache, trace, cfg);
    const Stats ideal = run_baseline(BaselineKind::DramCacheIdeal, trace, cfg);
    CHECK(ideal.get("cycles") <= real.get("cycles"));
    CHECK(ideal.get("reads_hit_inpackage") == real.get("reads_hit_inpackage"));
}

TEST_CASE("a fitting HBM scratchpad never touches main memory") {
    BaselineConfig cfg;
    cfg.kind = BaselineKind::HbmScratchpad;
    BaselineSystem sys(cfg);
    const Allocation a = sys.alloc(AllocKind::Hbm, 1 << 20);
    CHECK_FALSE(a.cacheable);
    const auto trace = random_trace(73, 20000, a.base, a.size / 64, 0.4);
    const Stats s = replay_trace(sys, trace);
    CHECK(s.count("mm.reads") == 0);
    CHECK(s.count("mm.writes") == 0);
    CHECK(s.count("reads_main_memory") == 0);
    CHECK(s.count("reads_hit_inpackage") == s.count("reads_served"));
}

TEST_CASE("an SRAM stack past its capacity spills and slows down") {
    auto run = [](uint64_t span_bytes) {
        BaselineConfig cfg;
        cfg.kind = BaselineKind::SramStack;
        cfg.l3.bytes = 1 << 20;
        BaselineSystem sys(cfg);
        const Allocation a = sys.alloc(AllocKind::Hbm, span_bytes);
        std::mt19937_64 rng(74);
        std::vector<Request> trace;
        for (int i = 0; i < 40000; ++i) {
            Request r;
            r.cycle = i;
            r.addr = a.base + (rng() % (span_bytes / 4096)) * 4096;
            trace.push_back(r);
        }
        return replay_trace(sys, trace);
    };
    const Stats fit = run(60'000'000);
    const Stats spill = run(146'560'000);  // twice the 73.28MB stack
    CHECK(fit.count("reads_main_memory") == 0);
    CHECK(spill.count("reads_main_memory") > 0);
    CHECK(spill.get("cycles") > fit.get("cycles"));
}

TEST_CASE("every configuration yields the same memory image and conserves reads") {
    const auto trace = random_trace(75, 30000, 1 << 20, 20000, 0.35);
    std::vector<std::unique_ptr<MemoryPort>> ports;
    for (BaselineKind k : {BaselineKind::DramCache, BaselineKind::DramCacheIdeal,
                           BaselineKind::HbmScratchpad, BaselineKind::SramStack,
                           BaselineKind::RramFlat}) {
        BaselineConfig cfg;
        cfg.kind = k;
        cfg.l3.bytes = 128 * 1024;
        cfg.dram_cache_bytes = 256 * 1024;
        ports.push_back(std::make_unique<BaselineSystem>(cfg));
    }
    MonarchConfig mc;
    mc.vaults = 2;
    mc.banks = 8;
    mc.cam_banks = 1;
    mc.supersets = 2;
    mc.l3.bytes = 128 * 1024;
    ports.push_back(std::make_unique<MonarchSystem>(mc));
    mc.cache.rotation = false;
    ports.push_back(std::make_unique<MonarchSystem>(mc));

    oracle::FlatImage image;
    for (const auto& r : trace) {
        if (r.op != Op::Write) continue;
        for (unsigned b = 0; b < 64; ++b) image.write(r.addr + b, static_cast<uint8_t>(r.data[b / 8] >> (8 * (b % 8))));
    }
    for (auto& p : ports) {
        const Stats s = replay_trace(*p, trace);
        CHECK(s.get("reads_served") == s.get("reads_hit_inpackage") + s.get("reads_main_memory"));
        CHECK(s.count("reads_served") + s.count("l3.hits") == s.count("requests.R"));
        auto* cs = dynamic_cast<CachedSystem*>(p.get());
        REQUIRE(cs);
        for (const auto& [addr, v] : image.bytes()) {
            const Block b = cs->main_memory().store().read(addr / 64);
            REQUIRE(static_cast<uint8_t>(b[(addr % 64) / 8] >> (8 * (addr % 8))) == v);
        }
    }
}

TEST_CASE("baseline and Monarch stats share one schema") {
    const auto trace = random_trace(76, 2000, 1 << 20, 5000, 0.3);
    MonarchConfig mc;
    mc.vaults = 1;
    mc.banks = 4;
    mc.cam_banks = 1;
    mc.supersets = 1;
    MonarchSystem m(mc);
    const Stats ms = replay_trace(m, trace);
    for (BaselineKind k : {BaselineKind::DramCache, BaselineKind::SramStack}) {
        BaselineConfig cfg;
        cfg.kind = k;
        cfg.dram_cache_bytes = 1 << 20;
        const Stats bs = run_baseline(k, trace, cfg);
        for (const auto& [key, v] : ms.values()) CHECK_MESSAGE(bs.has(key), key);
        for (const auto& [key, v] : bs.values()) CHECK_MESSAGE(ms.has(key), key);
    }
}

TEST_CASE("baseline kinds by name and unsupported requests") {
    for (BaselineKind k : {BaselineKind::DramCache, BaselineKind::DramCacheIdeal,
                           BaselineKind::HbmScratchpad, BaselineKind::SramStack,
                           BaselineKind::RramFlat}) {
        CHECK(baseline_from_name(baseline_name(k)) == k);
    }
    CHECK_THROWS_AS(baseline_from_name("tape"), ConfigError);
    BaselineSystem sys{BaselineConfig{}};
    Request r;
    r.op = Op::Match;
    r.addr = 1 << 20;
    CHECK_THROWS_AS(sys.access(r), ModeError);
    CHECK_THROWS_AS(sys.alloc(AllocKind::FlatCam, 64), AllocationError);
}

TEST_CASE("request trace text roundtrip") {
    const auto trace = random_trace(77, 50, 1 << 20, 100, 0.5);
    std::stringstream ss;
    write_request_trace(ss, trace);
    const auto back = read_request_trace(ss);
    REQUIRE(back.size() == trace.size());
    for (size_t i = 0; i < trace.size(); ++i) {
        CHECK(back[i].cycle == trace[i].cycle);
        CHECK(back[i].op == trace[i].op);
        CHECK(back[i].addr == trace[i].addr);
        CHECK(back[i].critical == trace[i].critical);
    }
    std::stringstream bad("12 X 64 64 1\n");
    CHECK_THROWS(read_request_trace(bad));
}
