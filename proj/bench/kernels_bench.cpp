#include <random>

#include <benchmark/benchmark.h>

#include "monarch/kernels.hpp"
#include "monarch/string_match.hpp"

using namespace monarch;
using kernels::Policy;

namespace {

std::vector<XamArray> random_arrays(size_t n, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<XamArray> arrays(n);
    for (auto& a : arrays) {
        for (unsigned r = 0; r < kArrayDim; ++r) a.write_row(r, rng(), kAllOnes);
        a.set_sense_ref(SenseRef::Search);
    }
    return arrays;
}

std::vector<SupersetWear> random_wear(size_t n, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<SupersetWear> w(n);
    for (size_t i = 0; i < n; ++i) {
        w[i].superset = static_cast<unsigned>(i);
        for (unsigned k = 0; k < kArrayDim; ++k) {
            w[i].rows[k] = rng() % 1000;
            w[i].cols[k] = rng() % 1000;
        }
    }
    return w;
}

void search(benchmark::State& st, Policy p) {
    const auto arrays = random_arrays(static_cast<size_t>(st.range(0)), 7);
    const std::vector<kernels::SearchQuery> q{{0x0123456789abcdefull, 0xffff0000ffff0000ull}};
    for (auto _ : st) benchmark::DoNotOptimize(kernels::search_arrays(arrays, q, p));
    st.SetItemsProcessed(st.iterations() * st.range(0));
}

void wear(benchmark::State& st, Policy p) {
    const auto w = random_wear(static_cast<size_t>(st.range(0)), 11);
    std::vector<std::vector<const SupersetWear*>> groups(w.size());
    for (size_t i = 0; i < w.size(); ++i) groups[i] = {&w[i], &w[(i + 1) % w.size()]};
    std::vector<std::vector<double>> out;
    for (auto _ : st) benchmark::DoNotOptimize(kernels::accumulate_wear(groups, out, p));
    st.SetItemsProcessed(st.iterations() * st.range(0));
}

void scan(benchmark::State& st, Policy p) {
    const std::string text = synthetic_corpus(static_cast<uint64_t>(st.range(0)), 3);
    for (auto _ : st) benchmark::DoNotOptimize(kernels::scan_matches(text, "abc", p));
    st.SetBytesProcessed(st.iterations() * st.range(0));
}

}  // namespace

BENCHMARK_CAPTURE(search, serial, Policy::Serial)->Arg(1 << 12)->Arg(1 << 15);
BENCHMARK_CAPTURE(search, parallel, Policy::Parallel)->Arg(1 << 12)->Arg(1 << 15);
BENCHMARK_CAPTURE(wear, serial, Policy::Serial)->Arg(1 << 8)->Arg(1 << 12);
BENCHMARK_CAPTURE(wear, parallel, Policy::Parallel)->Arg(1 << 8)->Arg(1 << 12);
BENCHMARK_CAPTURE(scan, serial, Policy::Serial)->Arg(1 << 20)->Arg(1 << 24);
BENCHMARK_CAPTURE(scan, parallel, Policy::Parallel)->Arg(1 << 20)->Arg(1 << 24);

BENCHMARK_MAIN();
