#pragma once

#include <cstdint>
#include <vector>

#include "monarch/types.hpp"

namespace monarch {

/// Sensing reference applied by the array's sense amplifiers.
enum class SenseRef { Read, Search };

/// Resistive device constants. Defaults follow the in-package RRAM configuration.
struct DeviceParams {
    double r_low = 300e3;
    double r_high = 1e9;
    double v_read = 1.0;
    uint64_t n_w = 100'000'000;

    void validate() const;
};

struct WriteReport {
    uint32_t cells_programmed = 0;
    uint32_t zeros_programmed = 0;  // first write phase
    uint32_t ones_programmed = 0;   // second write phase

    WriteReport& operator+=(const WriteReport& o) {
        cells_programmed += o.cells_programmed;
        zeros_programmed += o.zeros_programmed;
        ones_programmed += o.ones_programmed;
        return *this;
    }
};

/// A crosspoint array of differential 2R cells (at most 64x64).
///
/// Every masked cell of a row or column write is one endurance event, whether
/// or not its bit changes: both resistors see the write voltage. Reads and
/// searches are free. Row i of the storage holds bit c at position c, so a
/// column search is a handful of word operations over the masked rows.
///
/// Write counts are kept exactly but compactly: full-width writes bump a
/// per-row or per-column counter, partial-mask writes fall back to a lazily
/// allocated per-cell table.
class XamArray {
public:
    explicit XamArray(unsigned rows = 64, unsigned cols = 64);

    unsigned rows() const { return rows_; }
    unsigned cols() const { return cols_; }

    SenseRef sense_ref() const { return sense_; }
    void set_sense_ref(SenseRef s) { sense_ = s; }

    WriteReport write_row(unsigned row, uint64_t data, uint64_t mask);
    WriteReport write_column(unsigned col, uint64_t data, uint64_t mask);

    /// Requires SenseRef::Read.
    uint64_t read_row(unsigned row) const;

    /// Match lines: bit c set iff column c equals `key` on every row selected
    /// by `mask`. Requires SenseRef::Search.
    uint64_t search_columns(uint64_t key, uint64_t mask) const;

    // Functional peeks for the controller model and tests; no mode checks.
    bool bit(unsigned row, unsigned col) const;
    uint64_t row_bits(unsigned row) const;
    uint64_t column_bits(unsigned col) const;

    uint64_t writes(unsigned row, unsigned col) const;
    uint64_t total_writes() const { return total_writes_; }

    /// Number of write operations that programmed at least one cell of the
    /// row (column). Per-cell writes never exceed min(row_touches, col_touches).
    uint64_t row_touches(unsigned row) const { return row_touch_[row]; }
    uint64_t col_touches(unsigned col) const { return col_touch_[col]; }

private:
    void check_row(unsigned row) const;
    void check_col(unsigned col) const;
    uint32_t& partial(unsigned row, unsigned col);

    unsigned rows_;
    unsigned cols_;
    uint64_t row_mask_;
    uint64_t col_mask_;
    SenseRef sense_ = SenseRef::Read;
    std::vector<uint64_t> bits_;  // one word per row
    std::vector<uint64_t> full_row_writes_;
    std::vector<uint64_t> full_col_writes_;
    std::vector<uint32_t> partial_writes_;  // rows*cols, allocated on demand
    std::vector<uint64_t> row_touch_;
    std::vector<uint64_t> col_touch_;
    uint64_t total_writes_ = 0;
};

/// Line voltage developed by one cell during a row read.
double read_line_voltage(bool bit, const DeviceParams& p);

/// Ref_R, the read reference (half the read voltage).
inline double read_reference(const DeviceParams& p) { return p.v_read / 2.0; }

/// Analog view of a masked column search.
struct SensingReport {
    std::vector<double> column_volts;
    unsigned active_rows = 0;
    double all_match_volts = 0.0;
    double single_mismatch_volts = 0.0;
    double ref_search = 0.0;  // midpoint of the sensing window

    /// Columns whose voltage exceeds ref_search.
    uint64_t thresholded() const;
};

/// Voltage of a search line with `active` selected rows, `mismatches` of which
/// disagree with the key. Each selected cell is a pair of conductances tied to
/// V_R and ground, so the line settles at the conductance-weighted average.
double search_line_voltage(unsigned active, unsigned mismatches, const DeviceParams& p);

SensingReport sensing_margin(const XamArray& array, uint64_t key, uint64_t mask,
                             const DeviceParams& params);

}  // namespace monarch
