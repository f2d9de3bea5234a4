#include <doctest.h>

#include <algorithm>
#include <random>

#include "monarch/kernels.hpp"
#include "monarch/string_match.hpp"
#include "oracles.hpp"

using namespace monarch;
using kernels::Policy;

TEST_CASE("parallel search equals serial and brute force") {
    std::mt19937_64 rng(21);
    std::vector<XamArray> arrays(300);
    std::vector<std::vector<uint64_t>> cols(arrays.size(), std::vector<uint64_t>(kArrayDim, 0));
    for (size_t i = 0; i < arrays.size(); ++i) {
        for (unsigned r = 0; r < kArrayDim; ++r) {
            // Few distinct values so that matches actually occur.
            const uint64_t row = rng() % 4 == 0 ? 0 : rng();
            arrays[i].write_row(r, row, kAllOnes);
            for (unsigned c = 0; c < kArrayDim; ++c) cols[i][c] |= ((row >> c) & 1) << r;
        }
        arrays[i].set_sense_ref(SenseRef::Search);
    }
    std::vector<kernels::SearchQuery> queries;
    for (size_t i = 0; i < arrays.size(); ++i) {
        const uint64_t key = rng() % 2 ? cols[i][rng() % kArrayDim] : rng();
        queries.push_back({key, rng() % 3 ? rng() : 0});
    }
    const auto s = kernels::search_arrays(arrays, queries, Policy::Serial);
    const auto p = kernels::search_arrays(arrays, queries, Policy::Parallel);
    CHECK(s == p);
    for (size_t i = 0; i < arrays.size(); ++i) {
        REQUIRE(s[i] == oracle::masked_matches(cols[i], queries[i].key, queries[i].mask));
    }
    // A single query is broadcast.
    const std::vector<kernels::SearchQuery> one{queries[0]};
    const auto b = kernels::search_arrays(arrays, one, Policy::Parallel);
    for (size_t i = 0; i < arrays.size(); ++i) {
        REQUIRE(b[i] == oracle::masked_matches(cols[i], one[0].key, one[0].mask));
    }
}

TEST_CASE("parallel wear accumulation equals serial and the per-cell bound") {
    std::mt19937_64 rng(22);
    std::vector<SupersetWear> w(40);
    for (size_t i = 0; i < w.size(); ++i) {
        w[i].superset = static_cast<unsigned>(i);
        for (unsigned k = 0; k < kArrayDim; ++k) {
            w[i].rows[k] = rng() % 500;
            w[i].cols[k] = rng() % 500;
        }
    }
    std::vector<std::vector<const SupersetWear*>> groups(17);
    for (size_t g = 0; g < groups.size(); ++g) {
        for (size_t j = 0; j < 1 + g % 4; ++j) groups[g].push_back(&w[(g * 3 + j) % w.size()]);
    }
    std::vector<std::vector<double>> so, po;
    const kernels::CellMax sm = kernels::accumulate_wear(groups, so, Policy::Serial);
    const kernels::CellMax pm = kernels::accumulate_wear(groups, po, Policy::Parallel);
    CHECK(so == po);
    CHECK(sm.value == pm.value);
    CHECK(sm.group == pm.group);
    CHECK(sm.cell == pm.cell);

    double best = -1;
    size_t bg = 0, bc = 0;
    for (size_t g = 0; g < groups.size(); ++g) {
        for (unsigned r = 0; r < kArrayDim; ++r) {
            for (unsigned c = 0; c < kArrayDim; ++c) {
                double v = 0;
                for (const SupersetWear* x : groups[g]) v += static_cast<double>(std::min(x->rows[r], x->cols[c]));
                REQUIRE(so[g][r * kArrayDim + c] == v);
                if (v > best) {
                    best = v;
                    bg = g;
                    bc = r * kArrayDim + c;
                }
            }
        }
    }
    CHECK(sm.value == best);
    CHECK(sm.group == bg);
    CHECK(sm.cell == bc);
}

TEST_CASE("parallel substring scan equals serial and a naive scan") {
    std::string text = synthetic_corpus(300000, 8);
    text += "abcabcabc";
    for (const std::string p : {"abc", "a", "zq", "abcabc", "nonexistentpattern"}) {
        std::vector<size_t> want;
        for (size_t i = 0; i + p.size() <= text.size(); ++i) {
            if (text.compare(i, p.size(), p) == 0) want.push_back(i);
        }
        CHECK(kernels::scan_matches(text, p, Policy::Serial) == want);
        CHECK(kernels::scan_matches(text, p, Policy::Parallel) == want);
    }
    CHECK(kernels::scan_matches("aaaa", "aa", Policy::Parallel) == std::vector<size_t>{0, 1, 2});
    CHECK(kernels::scan_matches("ab", "abc", Policy::Serial).empty());
}
