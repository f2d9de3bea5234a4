#include "monarch/kernels.hpp"

#include <algorithm>
#include <cstring>

#include <omp.h>

namespace monarch::kernels {

namespace {

const SearchQuery& query_for(const std::vector<SearchQuery>& q, size_t i) {
    return q.size() == 1 ? q[0] : q[i];
}

void check_queries(size_t arrays, const std::vector<SearchQuery>& q) {
    if (q.empty() || (q.size() != 1 && q.size() != arrays)) {
        throw MonarchError("search_arrays: need one query or one per array");
    }
}

bool better(const CellMax& a, const CellMax& b) {
    if (a.value != b.value) return a.value > b.value;
    if (a.group != b.group) return a.group < b.group;
    return a.cell < b.cell;
}

CellMax sum_group(const std::vector<const SupersetWear*>& recs, std::vector<double>& cells,
                  size_t g) {
    cells.assign(kCellsPerArray, 0.0);
    for (const SupersetWear* w : recs) {
        add_wear_bound(*w, 1.0, cells.data());
    }
    CellMax m{0.0, g, 0};
    for (size_t c = 0; c < kCellsPerArray; ++c) {
        if (cells[c] > m.value) {
            m.value = cells[c];
            m.cell = c;
        }
    }
    return m;
}

}  // namespace

std::vector<uint64_t> search_arrays(const std::vector<XamArray>& arrays,
                                    const std::vector<SearchQuery>& queries, Policy policy) {
    check_queries(arrays.size(), queries);
    std::vector<uint64_t> out(arrays.size());
    const auto n = static_cast<std::ptrdiff_t>(arrays.size());
    if (policy == Policy::Serial) {
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            const auto& q = query_for(queries, i);
            out[i] = arrays[i].search_columns(q.key, q.mask);
        }
        return out;
    }
    // Mode errors are rethrown outside the parallel region.
    bool mode_error = false;
#pragma omp parallel for schedule(static) reduction(|| : mode_error)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        if (arrays[i].sense_ref() != SenseRef::Search) {
            mode_error = true;
            continue;
        }
        const auto& q = query_for(queries, i);
        out[i] = arrays[i].search_columns(q.key, q.mask);
    }
    if (mode_error) {
        throw ModeError("search_arrays: array not in search sensing mode");
    }
    return out;
}

void add_wear_bound(const SupersetWear& w, double scale, double* cells) {
    for (unsigned r = 0; r < kArrayDim; ++r) {
        const uint64_t rv = w.rows[r];
        if (rv == 0) continue;
        double* row = cells + size_t{r} * kArrayDim;
        for (unsigned c = 0; c < kArrayDim; ++c) {
            row[c] += static_cast<double>(std::min(rv, w.cols[c])) * scale;
        }
    }
}

CellMax accumulate_wear(const std::vector<std::vector<const SupersetWear*>>& groups,
                        std::vector<std::vector<double>>& out, Policy policy) {
    out.resize(groups.size());
    CellMax best;
    if (policy == Policy::Serial) {
        for (size_t g = 0; g < groups.size(); ++g) {
            CellMax m = sum_group(groups[g], out[g], g);
            if (better(m, best)) best = m;
        }
        return best;
    }
    std::vector<CellMax> per_group(groups.size());
    const auto n = static_cast<std::ptrdiff_t>(groups.size());
#pragma omp parallel for schedule(dynamic, 4)
    for (std::ptrdiff_t g = 0; g < n; ++g) {
        per_group[g] = sum_group(groups[g], out[g], static_cast<size_t>(g));
    }
    for (const auto& m : per_group) {
        if (better(m, best)) best = m;
    }
    return best;
}

std::vector<size_t> scan_matches(std::string_view text, std::string_view pattern, Policy policy) {
    std::vector<size_t> hits;
    if (pattern.empty() || pattern.size() > text.size()) {
        return hits;
    }
    const size_t last = text.size() - pattern.size();
    auto scan = [&](size_t from, size_t to, std::vector<size_t>& acc) {
        for (size_t i = from; i < to; ++i) {
            if (text[i] == pattern[0] &&
                std::memcmp(text.data() + i, pattern.data(), pattern.size()) == 0) {
                acc.push_back(i);
            }
        }
    };
    if (policy == Policy::Serial) {
        scan(0, last + 1, hits);
        return hits;
    }
    const int threads = omp_get_max_threads();
    std::vector<std::vector<size_t>> parts(threads);
#pragma omp parallel num_threads(threads)
    {
        const int t = omp_get_thread_num();
        const int nt = omp_get_num_threads();
        const size_t span = last + 1;
        const size_t from = span * t / nt;
        const size_t to = span * (t + 1) / nt;
        scan(from, to, parts[t]);
    }
    for (auto& p : parts) {
        hits.insert(hits.end(), p.begin(), p.end());
    }
    return hits;
}

}  // namespace monarch::kernels
