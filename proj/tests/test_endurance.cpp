#include <doctest.h>

#include <random>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "monarch/endurance.hpp"
#include "oracles.hpp"

using namespace monarch;

namespace {

// Uniform wear: every cell of every array is written `w` times per epoch.
SupersetWear uniform_wear(unsigned v, unsigned b, unsigned s, uint64_t w) {
    SupersetWear x;
    x.vault = v;
    x.bank = b;
    x.superset = s;
    x.rows.fill(64 * w);
    x.cols.fill(w);
    x.cell_writes = 64ull * 4096 * w;
    return x;
}

SnapshotFile make_file(const Geometry& g, uint64_t n_w) {
    SnapshotFile f;
    f.geometry = g;
    f.device.n_w = n_w;
    return f;
}

}  // namespace

TEST_CASE("write and superset counters") {
    WearMonitor m(Geometry{1, 4, 4});
    m.record_write(3, false);
    CHECK(m.counters().write_count == 1);
    CHECK(m.counters().superset_count == 1);
    for (int i = 0; i < 99; ++i) m.record_write(3, false);
    CHECK(m.counters().write_count == 100);
    CHECK(m.counters().superset_count == 1);
    CHECK(m.counters().dirty_count == 0);
    m.record_write(3, true);
    m.record_write(3, true);
    CHECK(m.counters().dirty_count == 1);
    CHECK(m.swt(3).written);
    CHECK(m.swt(3).dirty);
    CHECK_FALSE(m.swt(2).written);
}

TEST_CASE("counters equal a set-based oracle on random streams") {
    const Geometry g{2, 8, 16};
    WearLimits lim;
    lim.wc_limit = UINT64_MAX;
    lim.dc_limit = UINT64_MAX;
    WearMonitor m(g, lim);
    std::mt19937_64 rng(61);
    std::unordered_set<uint64_t> written, dirty;
    uint64_t writes = 0;
    for (int i = 0; i < 20000; ++i) {
        const uint64_t ss = rng() % g.superset_count();
        const bool d = rng() % 4 == 0;
        m.record_write(ss, d);
        ++writes;
        written.insert(ss);
        if (d) dirty.insert(ss);
        if (m.rotate_due()) break;  // WR may fire; stop comparing there
    }
    CHECK(m.counters().write_count == writes);
    CHECK(m.counters().superset_count == written.size());
    CHECK(m.counters().dirty_count == dirty.size());
}

TEST_CASE("WR flag by leading-bit position") {
    CHECK(wr_flag(WearCounters{1'048'576, 2'048, 0}));
    CHECK_FALSE(wr_flag(WearCounters{511, 1, 0}));
    CHECK(wr_flag(WearCounters{512, 1, 0}));
    CHECK_FALSE(wr_flag(WearCounters{0, 0, 0}));
    std::mt19937_64 rng(62);
    for (int i = 0; i < 10000; ++i) {
        const uint64_t s = 1 + rng() % 100000;
        const uint64_t w = s + rng() % (s * 2000);
        CHECK(wr_flag(WearCounters{w, s, 0}) == (oracle::msb(w) >= oracle::msb(s) + 9));
        CHECK(msb_index(w) == oracle::msb(w));
    }
}

TEST_CASE("dirty limit raises the rotate signal on its own") {
    const Geometry g{8, 64, 256};
    WearMonitor m(g);
    // Many supersets, one write each, so WR never fires.
    for (uint64_t s = 0; s < 8191; ++s) m.record_write(s, true);
    CHECK_FALSE(wr_flag(m.counters()));
    CHECK_FALSE(m.rotate_due());
    m.record_write(8191, true);
    CHECK(m.rotate_due());
    const auto dirty = m.maybe_rotate();
    REQUIRE(dirty);
    CHECK(dirty->size() == 8192);
    CHECK(std::is_sorted(dirty->begin(), dirty->end()));
    CHECK(m.counters().write_count == 0);
    CHECK(m.counters().dirty_count == 0);
    CHECK_FALSE(m.swt(5).written);
    CHECK(m.rotations() == 1);
    CHECK_FALSE(m.maybe_rotate());
}

TEST_CASE("write limit raises the rotate signal") {
    WearLimits lim;
    lim.wc_limit = 1000;
    WearMonitor m(Geometry{1, 64, 256}, lim);
    for (uint64_t i = 0; i < 999; ++i) m.record_write(i % 700, false);
    CHECK_FALSE(m.rotate_due());
    m.record_write(0, false);
    CHECK(m.rotate_due());
}

TEST_CASE("offset accumulation") {
    const Geometry g{8, 64, 256};
    const AddressOffsets o3 = offsets_after(3, g);
    CHECK(o3.bank_off == 3);
    CHECK(o3.set_off == 1);
    CHECK(o3.superset_off == 21);
    CHECK(o3.vault_off == 0);
    const AddressOffsets o8 = offsets_after(8, g);
    CHECK(o8.vault_off == 5);
    AddressOffsets step;
    for (int i = 0; i < 8; ++i) step = advance(step, g);
    CHECK(step == o8);
    WearLimits lim;
    lim.wc_limit = 1;
    WearMonitor m(g, lim);
    for (int i = 0; i < 3; ++i) {
        m.record_write(0, false);
        m.maybe_rotate();
    }
    CHECK(m.offsets() == o3);
}

TEST_CASE("remap identity, bijection and inverse") {
    const Geometry g{2, 4, 4};
    const PhysicalAddress a{1, 2, 3, 4, 5, 6};
    CHECK(remap(a, AddressOffsets{}, g) == a);
    for (uint64_t rot = 0; rot < 40; ++rot) {
        const AddressOffsets o = offsets_after(rot, g);
        std::set<std::tuple<unsigned, unsigned, unsigned, unsigned>> seen;
        for (unsigned v = 0; v < g.vaults; ++v)
            for (unsigned b = 0; b < g.banks; ++b)
                for (unsigned s = 0; s < g.supersets; ++s)
                    for (unsigned set = 0; set < 8; ++set) {
                        const PhysicalAddress p{v, b, s, set, 7, 9};
                        const PhysicalAddress q = remap(p, o, g);
                        CHECK(q.row == 7);
                        CHECK(q.col == 9);
                        seen.emplace(q.vault, q.bank, q.superset, q.set);
                        REQUIRE(unmap(q, o, g) == p);
                    }
        REQUIRE(seen.size() == g.vaults * g.banks * g.supersets * 8u);
    }
}

TEST_CASE("k single-step remaps compose to the accumulated offsets") {
    const Geometry g{8, 16, 32};
    std::mt19937_64 rng(63);
    for (int trial = 0; trial < 50; ++trial) {
        const uint64_t k = rng() % 40;
        PhysicalAddress p{unsigned(rng() % 8), unsigned(rng() % 16), unsigned(rng() % 32),
                          unsigned(rng() % 8), 0, 0};
        const PhysicalAddress direct = remap(p, offsets_after(k, g), g);
        for (uint64_t i = 1; i <= k; ++i) {
            AddressOffsets step{1, 3, i % 8 == 0 ? 5u : 0u, 7, 0};
            p = remap(p, step, g);
        }
        CHECK(p == direct);
    }
}

TEST_CASE("odd steps visit every residue of power-of-two dimensions") {
    const Geometry g{8, 64, 256};
    std::set<unsigned> banks, sets, supersets, vaults;
    for (uint64_t r = 0; r < rotation_period(g); ++r) {
        const AddressOffsets o = offsets_after(r, g);
        banks.insert(o.bank_off);
        sets.insert(o.set_off);
        supersets.insert(o.superset_off);
        vaults.insert(o.vault_off);
    }
    CHECK(banks.size() == 64);
    CHECK(sets.size() == 8);
    CHECK(supersets.size() == 256);
    CHECK(vaults.size() == 8);
    CHECK(offsets_after(rotation_period(g), g) == AddressOffsets{});
}

TEST_CASE("uniform wear reaches the ideal bound") {
    const Geometry g{2, 2, 4};
    SnapshotFile f = make_file(g, 1'000'000);
    for (uint64_t e = 0; e < 3; ++e) {
        WearSnapshot s{e, 0.5, {}};
        for (unsigned v = 0; v < 2; ++v)
            for (unsigned b = 0; b < 2; ++b)
                for (unsigned ss = 0; ss < 4; ++ss) s.supersets.push_back(uniform_wear(v, b, ss, 7));
        f.epochs.push_back(s);
    }
    const double ideal = 1e6 * 0.5 / 7.0;  // n_W per cell over 7 writes per half second
    for (bool rot : {false, true}) {
        const LifetimeReport r = estimate_lifetime(f, LifetimeOptions{rot, true});
        CHECK(r.ideal_seconds == doctest::Approx(ideal).epsilon(1e-9));
        CHECK(r.seconds == doctest::Approx(r.ideal_seconds).epsilon(0.01));
    }
}

TEST_CASE("hot superset without rotation wears at the hot-cell rate") {
    const Geometry g{2, 2, 4};
    SnapshotFile f = make_file(g, 100'000);
    SupersetWear hot{};
    hot.vault = 1;
    hot.bank = 0;
    hot.superset = 2;
    hot.rows.fill(10);
    hot.cols.fill(3);
    hot.rows[5] = 40;
    hot.cols[9] = 25;
    hot.cell_writes = 1000;
    f.epochs.push_back(WearSnapshot{0, 2.0, {hot}});
    const LifetimeReport no = estimate_lifetime(f, LifetimeOptions{false, false});
    // Hottest cell: min(rows[5], cols[9]) = 25 writes per 2 s.
    CHECK(no.seconds == doctest::Approx(100'000.0 / 25.0 * 2.0).epsilon(1e-9));
    CHECK(no.limiting.vault == 1);
    CHECK(no.limiting.superset == 2);
    CHECK(no.limiting.row == 5);
    CHECK(no.limiting.col == 9);

    const LifetimeReport yes = estimate_lifetime(f, LifetimeOptions{true, true});
    CHECK(yes.seconds > no.seconds);
    CHECK(yes.seconds <= yes.ideal_seconds * 1.0000001);
    CHECK(yes.ideal_seconds == doctest::Approx(100'000.0 * g.cells() / 500.0));
}

TEST_CASE("parallel and serial estimates agree") {
    const Geometry g{2, 4, 8};
    SnapshotFile f = make_file(g, 5'000'000);
    std::mt19937_64 rng(64);
    for (uint64_t e = 0; e < 5; ++e) {
        WearSnapshot s{e, 0.1 + 0.01 * e, {}};
        for (int k = 0; k < 6; ++k) {
            SupersetWear w{};
            w.vault = rng() % 2;
            w.bank = rng() % 4;
            w.superset = rng() % 8;
            for (auto& x : w.rows) x = rng() % 500;
            for (auto& x : w.cols) x = rng() % 500;
            w.cell_writes = 12345;
            s.supersets.push_back(w);
        }
        f.epochs.push_back(s);
    }
    for (bool rot : {false, true}) {
        const LifetimeReport a = estimate_lifetime(f, LifetimeOptions{rot, false});
        const LifetimeReport b = estimate_lifetime(f, LifetimeOptions{rot, true});
        CHECK(a.seconds == b.seconds);
        CHECK(a.limiting == b.limiting);
    }
}

TEST_CASE("estimator errors") {
    SnapshotFile f = make_file(Geometry{1, 1, 1}, 10);
    CHECK_THROWS_AS(estimate_lifetime(f), EstimationError);
    SupersetWear w{};
    w.bank = 3;
    f.epochs.push_back(WearSnapshot{0, 1.0, {w}});
    CHECK_THROWS_AS(estimate_lifetime(f), EstimationError);
}

TEST_CASE("snapshot files roundtrip") {
    SnapshotFile f = make_file(Geometry{2, 4, 8}, 777);
    f.device.r_low = 123e3;
    f.epochs.push_back(WearSnapshot{0, 0.25, {uniform_wear(1, 3, 7, 2)}});
    f.epochs.push_back(WearSnapshot{1, 0.5, {}});
    std::stringstream ss;
    write_snapshots(ss, f);
    const SnapshotFile back = read_snapshots(ss);
    CHECK(back.geometry.banks == 4);
    CHECK(back.device.n_w == 777);
    CHECK(back.device.r_low == doctest::Approx(123e3));
    REQUIRE(back.epochs.size() == 2);
    REQUIRE(back.epochs[0].supersets.size() == 1);
    CHECK(back.epochs[0].supersets[0].rows == f.epochs[0].supersets[0].rows);
    CHECK(back.epochs[0].supersets[0].cols == f.epochs[0].supersets[0].cols);
    CHECK(back.epochs[0].supersets[0].cell_writes == f.epochs[0].supersets[0].cell_writes);
    CHECK(back.epochs[1].seconds == 0.5);
}

TEST_CASE("recorder deltas bound every cell") {
    Superset ss;
    std::mt19937_64 rng(65);
    oracle::CellMatrix ref(64, 64);  // cells of the array at grid (0, 0)
    WearRecorder rec(Geometry{1, 1, 1});
    for (int epoch = 0; epoch < 2; ++epoch) {
        ref = oracle::CellMatrix(64, 64);
        for (int i = 0; i < 300; ++i) {
            const bool col = rng() % 2;
            ss.set_port_mode(col ? PortMode::ColumnIn : PortMode::RowIn);
            const unsigned idx = rng() % 8;  // concentrate on few rows/columns
            Block d, m;
            for (auto& x : d) x = rng();
            for (auto& x : m) x = rng() % 3 ? kAllOnes : rng();
            ss.write_block({0, idx, idx}, d, m);
            if (col) ref.write_col(idx, d[0], m[0]); else ref.write_row(idx, d[0], m[0]);
        }
        const SupersetWear w = rec.delta(0, ss, PhysicalAddress{});
        for (unsigned r = 0; r < 64; ++r)
            for (unsigned c = 0; c < 64; ++c) REQUIRE(ref.writes[r * 64 + c] <= std::min(w.rows[r], w.cols[c]));
    }
}
