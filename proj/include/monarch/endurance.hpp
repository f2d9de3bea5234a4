#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "monarch/geometry.hpp"
#include "monarch/superset.hpp"
#include "monarch/xam.hpp"

namespace monarch {

struct SwtEntry {
    bool written = false;  // W
    bool dirty = false;    // D
};

struct WearCounters {
    uint64_t write_count = 0;
    uint64_t superset_count = 0;
    uint64_t dirty_count = 0;
};

struct WearLimits {
    uint64_t wc_limit = uint64_t{1} << 22;
    uint64_t dc_limit = 8192;
};

/// Index of the most significant set bit, or -1 for zero.
int msb_index(uint64_t x);

/// Set when the write counter is at least 512x the superset counter, judged
/// by leading-bit position alone.
bool wr_flag(const WearCounters& c);

/// Superset write table plus the three counters that raise the rotate signal.
class WearMonitor {
public:
    explicit WearMonitor(const Geometry& g, WearLimits limits = {});

    void record_write(uint64_t superset_id, bool makes_dirty);

    bool rotate_due() const;

    /// On a rotate signal: returns the dirty supersets (ascending), resets the
    /// table and counters, and advances the offsets.
    std::optional<std::vector<uint64_t>> maybe_rotate();

    const WearCounters& counters() const { return counters_; }
    const AddressOffsets& offsets() const { return offsets_; }
    const WearLimits& limits() const { return limits_; }
    uint64_t rotations() const { return rotations_; }
    SwtEntry swt(uint64_t superset_id) const;

private:
    Geometry geom_;
    WearLimits limits_;
    WearCounters counters_;
    AddressOffsets offsets_;
    uint64_t rotations_ = 0;
    std::unordered_map<uint64_t, SwtEntry> swt_;
};

/// Row and column write histograms of one superset over one epoch. Each entry
/// is the maximum over the superset's 64 arrays, so every array's cells are
/// bounded by min(rows[r], cols[c]).
struct SupersetWear {
    unsigned vault = 0;
    unsigned bank = 0;
    unsigned superset = 0;
    uint64_t cell_writes = 0;  // exact programmed-cell count over the epoch
    std::array<uint64_t, kArrayDim> rows{};
    std::array<uint64_t, kArrayDim> cols{};
};

struct WearSnapshot {
    uint64_t epoch = 0;
    double seconds = 0.0;  // wall time covered by the epoch
    std::vector<SupersetWear> supersets;  // logical coordinates
};

struct SnapshotFile {
    Geometry geometry;
    DeviceParams device;
    std::vector<WearSnapshot> epochs;
};

void write_snapshots(std::ostream& os, const SnapshotFile& f);
SnapshotFile read_snapshots(std::istream& is);

/// Turns cumulative per-array counters into per-epoch snapshots.
class WearRecorder {
public:
    explicit WearRecorder(const Geometry& g) : geom_(g) {}

    /// Records the wear accumulated by `ss` since its previous snapshot.
    /// `logical` is the superset's address under the offsets of the epoch.
    SupersetWear delta(uint64_t physical_id, const Superset& ss, const PhysicalAddress& logical);

private:
    struct Prev {
        std::vector<uint64_t> rows;  // 64 arrays x 64
        std::vector<uint64_t> cols;
        uint64_t total = 0;
    };
    Geometry geom_;
    std::unordered_map<uint64_t, Prev> prev_;
};

struct LifetimeOptions {
    bool rotation = true;
    bool parallel = true;
    uint64_t max_replay_epochs = uint64_t{1} << 24;
};

struct LifetimeReport {
    double seconds = std::numeric_limits<double>::infinity();
    double ideal_seconds = std::numeric_limits<double>::infinity();
    PhysicalAddress limiting;  // vault/bank/superset plus row/col of the limiting cell
    uint64_t replay_epochs = 0;
    double replay_period_seconds = 0.0;

    double years() const { return seconds / kSecondsPerYear; }
    double ideal_years() const { return ideal_seconds / kSecondsPerYear; }
};

/// Replays the recorded epochs end to end, advancing the rotary offsets every
/// epoch, until some cell reaches the endurance limit.
LifetimeReport estimate_lifetime(const SnapshotFile& snapshots, const LifetimeOptions& opt = {});

}  // namespace monarch
