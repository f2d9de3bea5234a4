#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "monarch/types.hpp"
#include "monarch/xam.hpp"

namespace monarch {

inline constexpr unsigned kGridDim = 8;
inline constexpr unsigned kSetsPerSuperset = 8;
inline constexpr unsigned kArrayDim = 64;
inline constexpr unsigned kBlocksPerSet = 64;
inline constexpr unsigned kBlocksPerSuperset = kSetsPerSuperset * kBlocksPerSet;

/// Port selector orientation.
enum class PortMode { RowIn, ColumnIn };

struct GridCoord {
    unsigned row;
    unsigned col;
    bool operator==(const GridCoord&) const = default;
};

/// Diagonal set id of the subarray at grid (i, j).
constexpr unsigned set_of(unsigned i, unsigned j) {
    return (j + kGridDim - i) % kGridDim;
}

/// The 8 subarrays of a set, in slice order (slice s sits on grid row s).
std::array<GridCoord, kGridDim> select_set(unsigned set_id);

/// Where a block lives inside a superset. ColumnIn blocks occupy column
/// `block_col` of every subarray in the set; RowIn blocks occupy row `row`.
struct BlockLocation {
    unsigned set = 0;
    unsigned block_col = 0;
    unsigned row = 0;
};

struct SetSearchResult {
    std::array<uint64_t, kSlices> slice_matches{};  // per-subarray match lines
    uint64_t block_matches = 0;                     // AND across the slices
};

/// An 8x8 group of 64x64 XAM arrays with shared data/key/mask buffers.
class Superset {
public:
    Superset();

    PortMode port_mode() const { return port_; }
    void set_port_mode(PortMode m) { port_ = m; }
    void toggle_port_mode() {
        port_ = port_ == PortMode::RowIn ? PortMode::ColumnIn : PortMode::RowIn;
    }

    SenseRef sense() const { return sense_; }
    void set_sense(SenseRef s);

    WriteReport write_block(const BlockLocation& loc, const Block& data, const Block& mask);
    Block read_block(const BlockLocation& loc) const;

    /// Searches every subarray of the set against its slice of the key/mask
    /// buffers.
    SetSearchResult search_set(unsigned set_id) const;

    /// Row-address-decoded buffer load. In RowIn with the search reference an
    /// even row fills the key buffer and an odd row fills the mask buffer;
    /// otherwise the payload is an ordinary row write into `set_id`.
    WriteReport load_key_mask(unsigned set_id, unsigned row_address, const Block& payload);

    const Block& key_buffer() const { return key_buf_; }
    const Block& mask_buffer() const { return mask_buf_; }
    const Block& data_buffer() const { return data_buf_; }

    const XamArray& array(unsigned grid_row, unsigned grid_col) const {
        return arrays_[grid_row * kGridDim + grid_col];
    }
    const XamArray& slice_array(unsigned set_id, unsigned slice) const;

    uint64_t total_writes() const;

private:
    XamArray& slice_array_mut(unsigned set_id, unsigned slice);
    static void check(const BlockLocation& loc);

    std::vector<XamArray> arrays_;
    PortMode port_ = PortMode::RowIn;
    SenseRef sense_ = SenseRef::Read;
    Block data_buf_{};
    Block key_buf_{};
    Block mask_buf_{};
};

}  // namespace monarch
