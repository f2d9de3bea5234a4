#include "monarch/xam.hpp"

#include <bit>
#include <string>

namespace monarch {

Block byte_mask(unsigned offset, unsigned size) {
    if (offset + size > kBlockBytes) {
        throw AddressError("byte range exceeds a 64-byte block");
    }
    Block m{};
    for (unsigned b = offset; b < offset + size; ++b) {
        m[b / 8] |= uint64_t{0xFF} << (8 * (b % 8));
    }
    return m;
}

void DeviceParams::validate() const {
    if (!(r_low > 0.0) || !(r_low < r_high)) {
        throw MarginError("device parameters need 0 < r_low < r_high");
    }
    if (n_w < 1) {
        throw ConfigError("write endurance must be at least 1");
    }
}

XamArray::XamArray(unsigned rows, unsigned cols)
    : rows_(rows),
      cols_(cols),
      row_mask_(low_bits(rows)),
      col_mask_(low_bits(cols)),
      bits_(rows, 0),
      full_row_writes_(rows, 0),
      full_col_writes_(cols, 0),
      row_touch_(rows, 0),
      col_touch_(cols, 0) {
    if (rows == 0 || cols == 0 || rows > 64 || cols > 64) {
        throw ConfigError("XAM arrays are 1..64 rows by 1..64 columns");
    }
}

void XamArray::check_row(unsigned row) const {
    if (row >= rows_) {
        throw AddressError("XAM row " + std::to_string(row) + " out of range");
    }
}

void XamArray::check_col(unsigned col) const {
    if (col >= cols_) {
        throw AddressError("XAM column " + std::to_string(col) + " out of range");
    }
}

uint32_t& XamArray::partial(unsigned row, unsigned col) {
    if (partial_writes_.empty()) {
        partial_writes_.assign(size_t{rows_} * cols_, 0);
    }
    return partial_writes_[size_t{row} * cols_ + col];
}

WriteReport XamArray::write_row(unsigned row, uint64_t data, uint64_t mask) {
    check_row(row);
    if (mask & ~col_mask_) {
        throw AddressError("row write mask wider than the array");
    }
    WriteReport rep;
    if (mask == 0) {
        return rep;
    }
    const uint64_t ones = data & mask;
    rep.ones_programmed = static_cast<uint32_t>(std::popcount(ones));
    rep.zeros_programmed = static_cast<uint32_t>(std::popcount(mask & ~data));
    rep.cells_programmed = rep.ones_programmed + rep.zeros_programmed;
    bits_[row] = (bits_[row] & ~mask) | ones;

    if (mask == col_mask_) {
        ++full_row_writes_[row];
    } else {
        for (uint64_t m = mask; m; m &= m - 1) {
            ++partial(row, static_cast<unsigned>(std::countr_zero(m)));
        }
    }
    ++row_touch_[row];
    for (uint64_t m = mask; m; m &= m - 1) {
        ++col_touch_[std::countr_zero(m)];
    }
    total_writes_ += rep.cells_programmed;
    return rep;
}

WriteReport XamArray::write_column(unsigned col, uint64_t data, uint64_t mask) {
    check_col(col);
    if (mask & ~row_mask_) {
        throw AddressError("column write mask taller than the array");
    }
    WriteReport rep;
    if (mask == 0) {
        return rep;
    }
    rep.ones_programmed = static_cast<uint32_t>(std::popcount(data & mask));
    rep.zeros_programmed = static_cast<uint32_t>(std::popcount(mask & ~data));
    rep.cells_programmed = rep.ones_programmed + rep.zeros_programmed;
    const uint64_t cbit = uint64_t{1} << col;
    for (uint64_t m = mask; m; m &= m - 1) {
        const unsigned r = static_cast<unsigned>(std::countr_zero(m));
        if ((data >> r) & 1) {
            bits_[r] |= cbit;
        } else {
            bits_[r] &= ~cbit;
        }
        ++row_touch_[r];
    }
    if (mask == row_mask_) {
        ++full_col_writes_[col];
    } else {
        for (uint64_t m = mask; m; m &= m - 1) {
            ++partial(static_cast<unsigned>(std::countr_zero(m)), col);
        }
    }
    ++col_touch_[col];
    total_writes_ += rep.cells_programmed;
    return rep;
}

uint64_t XamArray::read_row(unsigned row) const {
    if (sense_ != SenseRef::Read) {
        throw ModeError("row read on an array sensing with the search reference");
    }
    check_row(row);
    return bits_[row];
}

uint64_t XamArray::search_columns(uint64_t key, uint64_t mask) const {
    if (sense_ != SenseRef::Search) {
        throw ModeError("search on an array sensing with the read reference");
    }
    if (mask & ~row_mask_) {
        throw AddressError("search mask taller than the array");
    }
    uint64_t mismatch = 0;
    for (uint64_t m = mask; m; m &= m - 1) {
        const unsigned r = static_cast<unsigned>(std::countr_zero(m));
        const uint64_t want = ((key >> r) & 1) ? col_mask_ : 0;
        mismatch |= bits_[r] ^ want;
    }
    return ~mismatch & col_mask_;
}

bool XamArray::bit(unsigned row, unsigned col) const {
    check_row(row);
    check_col(col);
    return (bits_[row] >> col) & 1;
}

uint64_t XamArray::row_bits(unsigned row) const {
    check_row(row);
    return bits_[row];
}

uint64_t XamArray::column_bits(unsigned col) const {
    check_col(col);
    uint64_t out = 0;
    for (unsigned r = 0; r < rows_; ++r) {
        out |= ((bits_[r] >> col) & 1) << r;
    }
    return out;
}

uint64_t XamArray::writes(unsigned row, unsigned col) const {
    check_row(row);
    check_col(col);
    uint64_t w = full_row_writes_[row] + full_col_writes_[col];
    if (!partial_writes_.empty()) {
        w += partial_writes_[size_t{row} * cols_ + col];
    }
    return w;
}

double read_line_voltage(bool bit, const DeviceParams& p) {
    const double lo = p.r_low;
    const double hi = p.r_high;
    return bit ? hi / (lo + hi) * p.v_read : lo / (lo + hi) * p.v_read;
}

double search_line_voltage(unsigned active, unsigned mismatches, const DeviceParams& p) {
    // A matching cell ties its low resistor to V_R and its high resistor to
    // ground; a mismatching cell does the opposite.
    const double g_lo = 1.0 / p.r_low;
    const double g_hi = 1.0 / p.r_high;
    const double matches = static_cast<double>(active - mismatches);
    const double num = matches * g_lo + static_cast<double>(mismatches) * g_hi;
    const double den = static_cast<double>(active) * (g_lo + g_hi);
    return num / den * p.v_read;
}

uint64_t SensingReport::thresholded() const {
    uint64_t out = 0;
    for (size_t c = 0; c < column_volts.size(); ++c) {
        if (column_volts[c] > ref_search) {
            out |= uint64_t{1} << c;
        }
    }
    return out;
}

SensingReport sensing_margin(const XamArray& array, uint64_t key, uint64_t mask,
                             const DeviceParams& params) {
    params.validate();
    mask &= low_bits(array.rows());
    SensingReport rep;
    rep.active_rows = static_cast<unsigned>(std::popcount(mask));
    if (rep.active_rows == 0) {
        throw MarginError("sensing needs at least one selected row");
    }
    rep.all_match_volts = search_line_voltage(rep.active_rows, 0, params);
    rep.single_mismatch_volts = search_line_voltage(rep.active_rows, 1, params);
    if (!(rep.all_match_volts > rep.single_mismatch_volts)) {
        throw MarginError("no sensing window between match and single mismatch");
    }
    rep.ref_search = 0.5 * (rep.all_match_volts + rep.single_mismatch_volts);
    rep.column_volts.resize(array.cols());
    for (unsigned c = 0; c < array.cols(); ++c) {
        const uint64_t diff = (array.column_bits(c) ^ key) & mask;
        rep.column_volts[c] = search_line_voltage(
            rep.active_rows, static_cast<unsigned>(std::popcount(diff)), params);
    }
    return rep;
}

}  // namespace monarch
