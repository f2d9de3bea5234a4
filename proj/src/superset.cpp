#include "monarch/superset.hpp"

#include <string>

namespace monarch {

std::array<GridCoord, kGridDim> select_set(unsigned set_id) {
    if (set_id >= kSetsPerSuperset) {
        throw AddressError("set id " + std::to_string(set_id) + " out of range");
    }
    std::array<GridCoord, kGridDim> out{};
    for (unsigned i = 0; i < kGridDim; ++i) {
        out[i] = GridCoord{i, (set_id + i) % kGridDim};
    }
    return out;
}

Superset::Superset() : arrays_(kGridDim * kGridDim, XamArray(kArrayDim, kArrayDim)) {}

void Superset::set_sense(SenseRef s) {
    sense_ = s;
    for (auto& a : arrays_) {
        a.set_sense_ref(s);
    }
}

const XamArray& Superset::slice_array(unsigned set_id, unsigned slice) const {
    const unsigned col = (set_id + slice) % kGridDim;
    return arrays_[slice * kGridDim + col];
}

XamArray& Superset::slice_array_mut(unsigned set_id, unsigned slice) {
    const unsigned col = (set_id + slice) % kGridDim;
    return arrays_[slice * kGridDim + col];
}

void Superset::check(const BlockLocation& loc) {
    if (loc.set >= kSetsPerSuperset || loc.block_col >= kBlocksPerSet || loc.row >= kArrayDim) {
        throw AddressError("block location out of range");
    }
}

WriteReport Superset::write_block(const BlockLocation& loc, const Block& data,
                                  const Block& mask) {
    check(loc);
    if (port_ == PortMode::RowIn && sense_ == SenseRef::Search) {
        throw ModeError("RowIn blocks in CAM mode go to the key/mask buffers, not the arrays");
    }
    data_buf_ = data;
    WriteReport rep;
    for (unsigned s = 0; s < kSlices; ++s) {
        XamArray& a = slice_array_mut(loc.set, s);
        if (port_ == PortMode::ColumnIn) {
            rep += a.write_column(loc.block_col, data[s], mask[s]);
        } else {
            rep += a.write_row(loc.row, data[s], mask[s]);
        }
    }
    return rep;
}

Block Superset::read_block(const BlockLocation& loc) const {
    check(loc);
    if (sense_ != SenseRef::Read) {
        throw ModeError("block read from a superset prepared for search");
    }
    Block out{};
    for (unsigned s = 0; s < kSlices; ++s) {
        const XamArray& a = slice_array(loc.set, s);
        out[s] = port_ == PortMode::ColumnIn ? a.column_bits(loc.block_col) : a.read_row(loc.row);
    }
    return out;
}

SetSearchResult Superset::search_set(unsigned set_id) const {
    if (set_id >= kSetsPerSuperset) {
        throw AddressError("set id out of range");
    }
    SetSearchResult res;
    res.block_matches = kAllOnes;
    for (unsigned s = 0; s < kSlices; ++s) {
        res.slice_matches[s] = slice_array(set_id, s).search_columns(key_buf_[s], mask_buf_[s]);
        res.block_matches &= res.slice_matches[s];
    }
    return res;
}

WriteReport Superset::load_key_mask(unsigned set_id, unsigned row_address, const Block& payload) {
    if (port_ == PortMode::RowIn && sense_ == SenseRef::Search) {
        if (row_address % 2 == 0) {
            key_buf_ = payload;
        } else {
            mask_buf_ = payload;
        }
        return {};
    }
    return write_block(BlockLocation{set_id, 0, row_address}, payload, full_mask());
}

uint64_t Superset::total_writes() const {
    uint64_t t = 0;
    for (const auto& a : arrays_) {
        t += a.total_writes();
    }
    return t;
}

}  // namespace monarch
