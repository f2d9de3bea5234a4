#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>
#include <unordered_map>

#include "monarch/experiment.hpp"
#include "monarch/hopscotch.hpp"
#include "monarch/string_match.hpp"

using namespace monarch;

namespace {

MonarchConfig flat_config() {
    MonarchConfig c;
    c.layout = Layout::Flat;
    c.vaults = 2;
    c.cam_vaults = 1;
    c.banks = 4;
    c.supersets = 4;
    c.granularity = MatchGranularity::Element;
    return c;
}

BaselineConfig hbm_config() {
    BaselineConfig c;
    c.kind = BaselineKind::HbmScratchpad;
    return c;
}

// Keys whose home bucket is `home` in a table of 2^log2 buckets.
std::vector<uint64_t> colliding_keys(unsigned log2, uint64_t home, size_t n, uint64_t start = 1) {
    std::vector<uint64_t> out;
    const uint64_t mask = (uint64_t{1} << log2) - 1;
    for (uint64_t k = start; out.size() < n; ++k) {
        if ((fmix64(k) & mask) == home) out.push_back(k);
    }
    return out;
}

// Naive substring scan.
std::vector<uint64_t> find_all(const std::string& text, const std::string& p) {
    std::vector<uint64_t> out;
    for (size_t i = 0; i + p.size() <= text.size(); ++i) {
        if (text.compare(i, p.size(), p) == 0) out.push_back(i);
    }
    return out;
}

}  // namespace

TEST_CASE("zipf stream honours the read mix and is deterministic") {
    for (double rf : {1.0, 0.95, 0.75}) {
        ZipfStream a(10000, 0.99, rf, 5), b(10000, 0.99, rf, 5);
        uint64_t reads = 0;
        const uint64_t n = 100000;
        for (uint64_t i = 0; i < n; ++i) {
            const KvRequest x = a.next(), y = b.next();
            REQUIRE(x.op == y.op);
            REQUIRE(x.rank == y.rank);
            reads += x.op == KvOp::Read;
        }
        CHECK(std::abs(static_cast<double>(reads) / n - rf) <= 0.005);
    }
}

TEST_CASE("zipf probabilities follow the power law") {
    const ZipfGenerator z(1000, 0.99);
    double sum = 0;
    for (uint64_t r = 0; r < 1000; ++r) sum += z.probability(r);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(z.probability(0) / z.probability(9) == doctest::Approx(std::pow(10.0, 0.99)).epsilon(1e-9));
    std::mt19937_64 rng(3);
    std::vector<uint64_t> hist(1000, 0);
    const int n = 200000;
    for (int i = 0; i < n; ++i) ++hist[z.sample(rng)];
    // The closed-form sampler is exact for the two head ranks and approximate below.
    for (uint64_t r = 0; r < 2; ++r) {
        const double want = z.probability(r) * n;
        CHECK(std::abs(hist[r] - want) < 5 * std::sqrt(want));
    }
}

TEST_CASE("insert into an empty table lands at the home bucket") {
    HopscotchTable t(nullptr, HashPath::Baseline, 8, 32);
    t.insert(77, 1);
    CHECK(t.key_at(t.home(77)) == 77);
    CHECK(t.lookup(77) == 1u);
    CHECK_FALSE(t.lookup(78).has_value());
    CHECK_THROWS_AS(t.lookup(0), ConfigError);
    CHECK_THROWS_AS(HopscotchTable(nullptr, HashPath::Baseline, 4, 32), ConfigError);
}

TEST_CASE("insert then lookup agrees in both paths") {
    for (HashPath path : {HashPath::Baseline, HashPath::Monarch}) {
        std::unique_ptr<MemoryPort> port;
        if (path == HashPath::Monarch) {
            port = std::make_unique<MonarchSystem>(flat_config());
        } else {
            port = std::make_unique<BaselineSystem>(hbm_config());
        }
        Core core(*port);
        HopscotchTable t(&core, path, 10, 64);
        for (uint64_t k = 1; k <= 300; ++k) t.insert(k * 7919, k);
        for (uint64_t k = 1; k <= 300; ++k) REQUIRE(t.lookup(k * 7919) == k);
        CHECK_FALSE(t.lookup(5).has_value());
        t.insert(7919, 999);
        CHECK(t.lookup(7919) == 999u);
        CHECK(t.size() == 300);
        CHECK(t.check_invariant());
    }
}

TEST_CASE("a collision chain forces a displacement and keeps the invariant") {
    // One key homed at 0, then buckets 1..40 each hold a key homed there. A
    // second key homed at 0 finds bucket 41 free, which lies outside its
    // window, so the key homed at 10 moves to 41 and frees bucket 10.
    HopscotchTable t(nullptr, HashPath::Baseline, 8, 32);
    const uint64_t first = colliding_keys(8, 0, 1)[0];
    t.insert(first, 1);
    std::vector<uint64_t> fillers;
    for (uint64_t h = 1; h <= 40; ++h) {
        fillers.push_back(colliding_keys(8, h, 1)[0]);
        t.insert(fillers.back(), h);
        REQUIRE(t.key_at(h) == fillers.back());
    }
    const uint64_t second = colliding_keys(8, 0, 2)[1];
    CHECK(t.insert(second, 2) == 0);
    CHECK(t.capacity() == 256);
    CHECK(t.key_at(10) == second);
    CHECK(t.key_at(41) == fillers[9]);
    CHECK(t.check_invariant());
    CHECK(t.lookup(first) == 1u);
    CHECK(t.lookup(second) == 2u);
    for (uint64_t h = 1; h <= 40; ++h) CHECK(t.lookup(fillers[h - 1]) == h);
    for (uint64_t i = 0; i < t.capacity(); ++i) {
        const uint64_t k = t.key_at(i);
        if (k) CHECK(((i - t.home(k)) & (t.capacity() - 1)) < 32);
    }
}

TEST_CASE("a full window forces a rehash that preserves every entry") {
    HopscotchTable t(nullptr, HashPath::Baseline, 8, 32);
    const auto keys = colliding_keys(8, 5, 33);
    unsigned rehashes = 0;
    for (uint64_t k : keys) rehashes += t.insert(k, k + 1);
    CHECK(rehashes >= 1);
    CHECK(t.capacity() >= 512);
    for (uint64_t k : keys) CHECK(t.lookup(k) == k + 1);
    CHECK(t.check_invariant());
}

TEST_CASE("reachable density grows with the window") {
    double prev = 0;
    for (unsigned w : {32u, 64u, 128u}) {
        double mean = 0;
        for (uint64_t seed = 1; seed <= 4; ++seed) mean += max_density_before_rehash(14, w, seed) / 4;
        CHECK(mean > prev);
        prev = mean;
    }
    CHECK(prev > 0.9);
}

TEST_CASE("lookups match a hash-map oracle over a long zipfian mix") {
    std::unique_ptr<MemoryPort> port = std::make_unique<MonarchSystem>(flat_config());
    Core core(*port);
    HopscotchTable t(&core, HashPath::Monarch, 9, 64);
    HopscotchTable host(nullptr, HashPath::Baseline, 9, 64);
    std::unordered_map<uint64_t, uint64_t> ref;
    std::vector<uint64_t> keys;
    ZipfStream s(4096, 0.99, 0.9, 11);
    std::mt19937_64 rng(12);
    for (int i = 0; i < 200000; ++i) {
        const KvRequest r = s.next();
        if (r.op == KvOp::Write || keys.empty()) {
            const uint64_t k = (rng() % 3000) + 1;
            const uint64_t v = rng();
            if (!ref.count(k)) keys.push_back(k);
            ref[k] = v;
            t.insert(k, v);
            host.insert(k, v);
            continue;
        }
        // Probe both live and absent keys.
        const uint64_t k = r.rank % 2 ? keys[r.rank % keys.size()] : 3001 + r.rank;
        const auto it = ref.find(k);
        const auto got = t.lookup(k);
        REQUIRE(got.has_value() == (it != ref.end()));
        if (got) REQUIRE(*got == it->second);
        REQUIRE(host.lookup(k) == got);
    }
    CHECK(t.check_invariant());
}

TEST_CASE("absent-key lookups over a full window need far fewer requests on Monarch") {
    const unsigned log2 = 12, window = 128;
    const auto keys = colliding_keys(log2, 100, window + 1);
    uint64_t counts[2] = {};
    int idx = 0;
    for (HashPath path : {HashPath::Baseline, HashPath::Monarch}) {
        std::unique_ptr<MemoryPort> port;
        if (path == HashPath::Monarch) {
            port = std::make_unique<MonarchSystem>(flat_config());
        } else {
            port = std::make_unique<BaselineSystem>(hbm_config());
        }
        Core core(*port);
        HopscotchTable t(&core, path, log2, window);
        for (unsigned i = 0; i < window; ++i) t.insert(keys[i], i);
        REQUIRE(t.capacity() == (1u << log2));
        const uint64_t before = core.requests();
        CHECK_FALSE(t.lookup(keys[window]).has_value());
        counts[idx++] = core.requests() - before;
    }
    // Baseline: one metadata read plus every bucket in the window.
    CHECK(counts[0] == 1 + window);
    CHECK(counts[0] >= 32 * counts[1]);
}

TEST_CASE("string corpus encoding") {
    const StringCorpus c = StringCorpus::encode("abc def");
    CHECK(c.encoded_bytes() == 8 * 7);
    CHECK(c.words[0] == (uint64_t{'a'} | uint64_t{'b'} << 8 | uint64_t{'c'} << 16 | uint64_t{' '} << 24 |
                         uint64_t{'d'} << 32 | uint64_t{'e'} << 40 | uint64_t{'f'} << 48));
    CHECK(c.words[4] == (uint64_t{'d'} | uint64_t{'e'} << 8 | uint64_t{'f'} << 16));
    const auto w = encode_words("abc def");
    REQUIRE(w.size() == 2);
    CHECK(w[0] == (uint64_t{'a'} | uint64_t{'b'} << 8 | uint64_t{'c'} << 16));
    CHECK(w[1] == (uint64_t{'d'} | uint64_t{'e'} << 8 | uint64_t{'f'} << 16));
    CHECK(encode_words("  abcdefghij  x").size() == 3);
}

TEST_CASE("string match agrees across paths and with a naive scan") {
    std::string text = synthetic_corpus(64 * 1024, 4);
    text.replace(1000, 7, "monarch");
    text.replace(40000, 11, "needleinhay");
    const StringCorpus corpus = StringCorpus::encode(text);
    const std::vector<std::string> patterns{"monarch", "ab", "needleinhay", "zzzzzzzzzzzzz"};

    MonarchSystem mon(flat_config());
    Core mc(mon);
    const StringMatchResult m = string_match_monarch(mc, corpus, patterns);
    BaselineSystem base(hbm_config());
    Core bc(base);
    const StringMatchResult b = string_match_baseline(bc, corpus, patterns);
    const StringMatchResult bp = string_match_baseline(bc, corpus, patterns, kernels::Policy::Parallel);

    for (size_t i = 0; i < patterns.size(); ++i) {
        const auto want = find_all(text, patterns[i]);
        CHECK(m.positions[i] == want);
        CHECK(b.positions[i] == want);
        CHECK(bp.positions[i] == want);
    }
    CHECK(m.positions[0] == std::vector<uint64_t>{1000});
    CHECK(m.positions[2] == std::vector<uint64_t>{40000});

    // One search per 4KB set of the encoded corpus, per pattern.
    const uint64_t sets = (corpus.encoded_bytes() + 4095) / 4096;
    CHECK(m.searches == sets * patterns.size());
    CHECK(m.max_search_bytes == 4096);
    // The baseline streams 64 bytes per request; a search covers 4KB of
    // encoded text, that is 512 raw bytes.
    CHECK(b.search_requests == (text.size() + 63) / 64);
    CHECK(static_cast<double>(b.search_requests) / static_cast<double>(sets) ==
          doctest::Approx(512.0 / 64.0).epsilon(0.01));
}

TEST_CASE("config parse errors carry the line number") {
    try {
        Config::parse("[run]\nworkload = hashing\nthis line is bad\n", "x.cfg");
        FAIL("no error");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("x.cfg:3") != std::string::npos);
    }
    const Config c = Config::parse("[hashing]\nwindow = many\n", "y.cfg");
    try {
        Experiment::from_config(c);
        FAIL("no error");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("y.cfg:2") != std::string::npos);
    }
}

namespace {

Config small_hashing(const std::string& memory) {
    Config c = Config::parse(
        "[run]\nworkload = hashing\nseed = 3\n"
        "[monarch]\nlayout = flat\nvaults = 2\ncam_vaults = 1\nbanks = 4\nsupersets = 4\n"
        "[hashing]\nlog2_size = 10\nwindow = 32\nread_pct = 75\ndensity = 0.5\nops = 3000\n");
    c.set("run", "memory", memory);
    return c;
}

}  // namespace

TEST_CASE("experiments are deterministic and answers are memory-independent") {
    const RunOutput a = run_experiment(small_hashing("monarch"));
    const RunOutput b = run_experiment(small_hashing("monarch"));
    CHECK(a.csv == b.csv);
    const RunOutput h = run_experiment(small_hashing("hbm-scratchpad"));
    CHECK(h.stats.get("workload.digest") == a.stats.get("workload.digest"));
    CHECK(h.stats.get("workload.lookup_hits") == a.stats.get("workload.lookup_hits"));
    CHECK(a.stats.get("workload.invariant_ok") == 1.0);
}

TEST_CASE("reported energy equals op counts times per-op constants") {
    const RunOutput r = run_experiment(small_hashing("monarch"));
    const double want = r.stats.get("xam.read_cmds") * 0.0215 + r.stats.get("xam.write_cmds") * 0.652 +
                        r.stats.get("xam.search_cmds") * 0.0263;
    CHECK(r.stats.get("energy_nj") == doctest::Approx(want).epsilon(1e-12));
    CHECK(r.stats.get("xam.search_cmds") > 0);
}

TEST_CASE("an unbound write window is never slower than M = 3") {
    Config c = Config::parse(
        "[run]\nworkload = hashing\nseed = 5\nmemory = monarch\n"
        "[monarch]\nlayout = flat\nvaults = 2\ncam_vaults = 1\nbanks = 1\nsupersets = 2\n"
        "t_life_years = 3\n"
        "[device]\nn_w = 1000\n"
        "[hashing]\nlog2_size = 9\nwindow = 32\nread_pct = 0\ndensity = 0.25\nops = 2000\n");
    c.set("monarch", "M", "3");
    const RunOutput bound = run_experiment(c);
    c.set("monarch", "M", "0");
    const RunOutput unbound = run_experiment(c);
    CHECK(unbound.stats.get("cycles") <= bound.stats.get("cycles"));
    CHECK(bound.stats.get("monarch.stalls") > 0);
    CHECK(bound.stats.get("workload.digest") == unbound.stats.get("workload.digest"));
}

TEST_CASE("a sweep emits one row per grid point") {
    Config c = small_hashing("hbm-scratchpad");
    c.set("hashing", "read_pct", "95");
    c.set("hashing", "ops", "500");
    c.set("sweep", "hashing.window", "32, 64, 128");
    c.set("sweep", "hashing.log2_size", "9, 10");
    const std::string csv = run_sweep(c);
    std::vector<std::string> lines;
    std::stringstream ss(csv);
    for (std::string l; std::getline(ss, l);) lines.push_back(l);
    REQUIRE(lines.size() == 1 + 6);
    CHECK(lines[0].rfind("hashing.log2_size,hashing.window,", 0) == 0);
    CHECK(lines[1].rfind("9,32,", 0) == 0);
    CHECK(lines[6].rfind("10,128,", 0) == 0);
    c.set("sweep", "bogus", "1");
    CHECK_THROWS_AS(run_sweep(c), ConfigError);
}
