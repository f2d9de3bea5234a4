#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "monarch/endurance.hpp"
#include "monarch/xam.hpp"

namespace monarch::kernels {

/// Every kernel has a serial reference and an OpenMP version that must agree
/// bit for bit.
enum class Policy { Serial, Parallel };

struct SearchQuery {
    uint64_t key = 0;
    uint64_t mask = 0;
};

/// Match lines of `arrays[i]` against `queries[i]` (or `queries[0]` when a
/// single query is given). Arrays must be in the search sensing mode.
std::vector<uint64_t> search_arrays(const std::vector<XamArray>& arrays,
                                    const std::vector<SearchQuery>& queries, Policy policy);

inline constexpr size_t kCellsPerArray = size_t{kArrayDim} * kArrayDim;

/// Adds min(rows[r], cols[c]) * scale to cells[r * 64 + c].
void add_wear_bound(const SupersetWear& w, double scale, double* cells);

struct CellMax {
    double value = 0.0;
    size_t group = 0;
    size_t cell = 0;
};

/// For each group g: out[g] = sum of the per-cell bounds of its records. Returns
/// the largest cell (ties resolve to the lowest group, then lowest cell).
CellMax accumulate_wear(const std::vector<std::vector<const SupersetWear*>>& groups,
                        std::vector<std::vector<double>>& out, Policy policy);

/// Start offsets of every occurrence of `pattern` in `text`, ascending.
std::vector<size_t> scan_matches(std::string_view text, std::string_view pattern, Policy policy);

}  // namespace monarch::kernels
