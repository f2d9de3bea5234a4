#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "monarch/endurance.hpp"
#include "monarch/geometry.hpp"
#include "monarch/memsys.hpp"
#include "monarch/superset.hpp"
#include "monarch/timing.hpp"

namespace monarch {

class Stats;

enum class VaultMode { FlatRAM, FlatCAM, Cache };

std::string vault_mode_name(VaultMode m);

struct VaultConfig {
    VaultMode mode = VaultMode::FlatRAM;
    unsigned banks = 64;
    unsigned supersets = 256;
    unsigned cam_banks = 4;  // cache mode: tag banks at the top of the vault

    unsigned ram_banks() const { return mode == VaultMode::Cache ? banks - cam_banks : banks; }
    /// Blocks addressable as data.
    uint64_t data_blocks() const { return uint64_t{ram_banks()} * supersets * kBlocksPerSuperset; }
    /// Cache mode: tags the CAM partition can hold (two per CAM column).
    uint64_t tag_capacity() const {
        return uint64_t{cam_banks} * supersets * kSetsPerSuperset * 2 * kBlocksPerSuperset;
    }
    uint64_t bytes() const { return uint64_t{banks} * supersets * kBlocksPerSuperset * kBlockBytes; }

    void validate() const;
};

struct VaultStats {
    uint64_t reads = 0;
    uint64_t writes = 0;
    uint64_t stalls = 0;
    uint64_t stall_cycles = 0;
    uint64_t window_lookups = 0;
    uint64_t window_misses = 0;
    // flat-CAM
    uint64_t key_writes = 0;
    uint64_t mask_writes = 0;
    uint64_t key_mask_loads = 0;
    uint64_t searches = 0;
    uint64_t match_reuses = 0;
    uint64_t match_without_key = 0;
    // cache
    uint64_t hits = 0;
    uint64_t misses = 0;
    uint64_t bypasses = 0;
    uint64_t installs = 0;
    uint64_t updates = 0;
    uint64_t forwards = 0;
    uint64_t drops = 0;
    uint64_t invalidations = 0;
    uint64_t writebacks = 0;
    uint64_t replacements = 0;
    uint64_t locks = 0;
    uint64_t remap_cycles = 0;
    uint64_t data_block_writes = 0;
    uint64_t tag_writes = 0;

    VaultStats& operator+=(const VaultStats& o);
    void export_to(Stats& s, const std::string& prefix) const;
};

/// State shared by all vault controllers: the functional supersets (created
/// on first touch), the command scheduler and the write-window tracker.
class VaultCore {
public:
    VaultCore(unsigned id, const VaultConfig& cfg, const TimingParams& t, bool keep_trace);

    unsigned id() const { return id_; }
    const VaultConfig& config() const { return cfg_; }

    /// Superset with its sensing and port modes synced to the scheduler.
    Superset& superset(unsigned bank, unsigned ss);
    const Superset* find(unsigned bank, unsigned ss) const;

    /// Issues the Prepare/Activate needed to reach the requested modes.
    /// `sense` may be omitted when either sensing reference will do.
    Superset& ensure(unsigned bank, unsigned ss, std::optional<SenseRef> sense, PortMode port,
                     Cycle at);

    IssueResult issue(CommandKind k, const CommandAddress& a, Cycle at);

    /// Admits a block write under the tMWW window, stalling until the next
    /// window when the budget is spent. Returns the cycle the write issues;
    /// modes must already be set, and nothing else may issue before it.
    Cycle admit_blocking(unsigned bank, unsigned ss, Cycle at);

    uint64_t local_id(unsigned bank, unsigned ss) const { return uint64_t{bank} * cfg_.supersets + ss; }

    Scheduler& scheduler() { return sched_; }
    const Scheduler& scheduler() const { return sched_; }
    WindowTracker& window() { return window_; }
    void set_window(const WindowConfig& w) { window_ = WindowTracker(w); }
    VaultStats& stats() { return stats_; }
    const VaultStats& stats() const { return stats_; }

    /// (bank, superset) pairs in ascending order.
    std::vector<std::pair<unsigned, unsigned>> touched() const;

private:
    unsigned id_;
    VaultConfig cfg_;
    Scheduler sched_;
    WindowTracker window_;
    VaultStats stats_;
    std::unordered_map<uint64_t, std::unique_ptr<Superset>> supersets_;
};

/// Data location of a flat-mode block: consecutive blocks fill one set
/// (rows in RAM mode, columns in CAM mode), then the next set, superset, bank.
struct FlatLocation {
    unsigned bank = 0;
    unsigned superset = 0;
    unsigned set = 0;
    unsigned index = 0;
};

FlatLocation decompose_flat(uint64_t vault_offset, const VaultConfig& cfg);

struct VaultAccess {
    Cycle done = 0;
    Block data{};
    bool stalled = false;
};

/// Flat-RAM controller: every block lives in RowIn RAM mode.
class FlatRamVault {
public:
    explicit FlatRamVault(VaultCore& core) : core_(core) {}

    VaultAccess read(uint64_t offset, Cycle at);
    VaultAccess write(uint64_t offset, const Block& data, const Block& mask, Cycle at);

    VaultCore& core() { return core_; }

private:
    VaultCore& core_;
};

/// Key/mask/match register file shared by the flat-CAM vaults.
struct MatchRegisters {
    Block key{};
    Block mask{};
    uint64_t key_version = 0;
    uint64_t mask_version = 0;
    bool key_written = false;
    std::optional<uint64_t> match;
};

enum class MatchGranularity {
    Block,    // index of the lowest fully matching block of the set
    Element,  // index of the lowest matching 64-bit word (column * 8 + slice)
};

struct MatchResult {
    Cycle done = 0;
    std::optional<uint64_t> index;
    Block vector{};         // bit i set iff index i matches
    bool searched = false;  // false when an earlier result was reused
    bool no_key = false;    // no key written yet
};

/// Flat-CAM controller: data in ColumnIn, searches in ColumnIn CAM, key/mask
/// loads in RowIn CAM.
class FlatCamVault {
public:
    FlatCamVault(VaultCore& core, MatchRegisters& regs, MatchGranularity g)
        : core_(core), regs_(regs), gran_(g) {}

    VaultAccess write(uint64_t offset, const Block& data, const Block& mask, Cycle at);

    /// Reads a stored block back through 64 row reads in RAM sensing.
    VaultAccess read(uint64_t offset, Cycle at);

    /// Searches the set holding `offset` with the current key and mask.
    MatchResult match(uint64_t offset, Cycle at);

    VaultCore& core() { return core_; }
    MatchGranularity granularity() const { return gran_; }

private:
    struct Loaded {
        uint64_t key_version;
        uint64_t mask_version;
    };
    struct LastSearch {
        uint64_t set_key;
        uint64_t key_version;
        uint64_t mask_version;
        uint64_t data_version;
        MatchResult result;
    };

    VaultCore& core_;
    MatchRegisters& regs_;
    MatchGranularity gran_;
    std::unordered_map<uint64_t, Loaded> loaded_;          // per superset
    std::unordered_map<uint64_t, uint64_t> data_version_;  // per set
    std::optional<LastSearch> last_;
};

// ---------------------------------------------------------------- cache mode

struct CamAddress {
    unsigned vault = 0;
    unsigned bank = 0;  // absolute bank inside the vault (in the CAM partition)
    unsigned superset = 0;
    unsigned set = 0;
    unsigned key_id = 0;  // which 32-bit half of a CAM column

    bool operator==(const CamAddress&) const = default;
};

struct CacheMapping {
    unsigned vault = 0;
    unsigned ram_bank = 0;
    unsigned superset = 0;
    uint32_t tag = 0;
    CamAddress cam;

    bool operator==(const CacheMapping&) const = default;
};

inline constexpr unsigned kTagBits = 30;

/// 30-bit tag, valid bit 30, dirty bit 31.
struct CacheTagEntry {
    uint32_t tag = 0;
    bool valid = false;
    bool dirty = false;

    uint32_t pack() const;
    static CacheTagEntry unpack(uint32_t word);
};

/// Splits a block-aligned physical address. The block index is interleaved
/// across vaults, then supersets, then RAM banks; the rest is the tag. The
/// CAM bank, set and key id come from the RAM bank (key id from its upper
/// bit). `offsets` applies rotary remapping to the RAM coordinates.
CacheMapping map_cache_address(uint64_t paddr, unsigned vaults, const VaultConfig& cfg,
                               const AddressOffsets* offsets = nullptr);

/// Inverse of map_cache_address for a stored entry.
uint64_t unmap_cache_address(unsigned vault, unsigned ram_bank, unsigned superset, uint32_t tag,
                             unsigned vaults, const VaultConfig& cfg,
                             const AddressOffsets* offsets = nullptr);

enum class DrClass { InstallOrUpdate, Forward, InstallReadOnly, Drop };

DrClass classify_eviction(bool dirty, bool read);
std::string dr_class_name(DrClass c);

struct CacheOptions {
    bool rotation = true;
    bool always_install = false;  // comparison policy: install every eviction
    WearLimits limits;
    bool keep_replacement_log = false;
    bool record_snapshots = false;
};

struct ReplacementEvent {
    unsigned vault = 0;
    uint64_t seq = 0;   // replacement number within the vault
    uint64_t slot = 0;  // CAM group and way
};

struct CacheLookup {
    bool hit = false;
    bool bypassed = false;
    Cycle done = 0;
    Block data{};
};

enum class InstallOutcome { Installed, Updated, Forwarded, Dropped, Invalidated };

struct InstallResult {
    DrClass cls = DrClass::Drop;
    InstallOutcome outcome = InstallOutcome::Dropped;
    Cycle done = 0;
};

/// Hardware-managed 512-way cache spread over the cache-mode vaults. Each
/// (vault, RAM bank, superset) is one cache set; its 512 tags sit in one CAM
/// set half, way w at slice w / 64, column w % 64, with the data block at set
/// w / 64, row w % 64 of the RAM superset.
class MonarchCache {
public:
    MonarchCache(std::vector<VaultCore*> vaults, MainMemory& mm, const CacheOptions& opt,
                 const DeviceParams& device);

    /// Read lookup on an L3 miss; misses do not allocate.
    CacheLookup lookup(uint64_t block, Cycle at);

    /// Applies the D/R rules to a block evicted from L3.
    InstallResult on_l3_evict(const L3Eviction& ev, Cycle at);

    /// Writes every dirty block back to main memory (contents stay valid).
    Cycle flush(Cycle at);

    /// Functional probe without timing or state change.
    std::optional<Block> peek(uint64_t block) const;
    std::optional<CacheTagEntry> peek_tag(uint64_t block) const;

    /// Closes the current wear epoch at `now`.
    void close_epoch(Cycle now);
    const SnapshotFile& snapshots() const { return snapshots_; }

    const std::vector<ReplacementEvent>& replacement_log() const { return replacements_; }
    const WearMonitor& monitor() const { return monitor_; }
    Geometry geometry() const;
    const VaultConfig& config() const { return cfg_; }
    unsigned vaults() const { return static_cast<unsigned>(vaults_.size()); }

private:
    struct Group {
        CamAddress cam;
        unsigned ram_bank;
        unsigned superset;
    };

    const AddressOffsets* offsets() const { return opt_.rotation ? &monitor_.offsets() : nullptr; }
    Group group_of(const CacheMapping& m) const;
    static uint64_t group_key(const CamAddress& c);

    std::optional<unsigned> search(VaultCore& v, const CacheMapping& m, Cycle& t);
    unsigned choose_way(VaultCore& v, const Group& g, Cycle& t);
    uint32_t read_tag_rows(VaultCore& v, const CamAddress& c, unsigned way, Cycle& t);
    void write_tag(VaultCore& v, const CamAddress& c, unsigned way, const CacheTagEntry& e,
                   uint32_t field_mask, Cycle& t);
    Block read_data(VaultCore& v, unsigned bank, unsigned ss, unsigned way, Cycle& t);
    void write_data(VaultCore& v, unsigned bank, unsigned ss, unsigned way, const Block& data,
                    bool makes_dirty, Cycle& t);
    void writeback_group(VaultCore& v, const Group& g, bool invalidate, Cycle& t);
    bool locked(VaultCore& v, unsigned bank, unsigned ss, Cycle t) const;
    void lock(VaultCore& v, const Group& g, Cycle until, Cycle& t);
    void note_write(VaultCore& v, unsigned bank, unsigned ss, bool makes_dirty);
    Cycle rotate_if_due(Cycle t);
    std::optional<uint32_t> stored_word(const VaultCore& v, const CamAddress& c,
                                        unsigned way) const;

    std::vector<VaultCore*> vaults_;
    VaultConfig cfg_;
    MainMemory& mm_;
    CacheOptions opt_;
    WearMonitor monitor_;
    std::vector<unsigned> counters_;  // per-vault 9-bit replacement counters
    std::vector<uint64_t> replacement_seq_;
    std::vector<ReplacementEvent> replacements_;
    std::map<uint64_t, Group> populated_;  // CAM groups holding tags
    std::map<uint64_t, Cycle> locks_;      // RAM superset -> lock expiry
    bool rotate_pending_ = false;

    WearRecorder recorder_;
    SnapshotFile snapshots_;
    Cycle epoch_start_ = 0;
};

}  // namespace monarch
