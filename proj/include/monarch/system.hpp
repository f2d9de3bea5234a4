#pragma once

#include <memory>
#include <string>
#include <vector>

#include "monarch/port.hpp"
#include "monarch/vault.hpp"

namespace monarch {

enum class Layout {
    Flat,   // vaults [0, cam_vaults) flat-CAM, the rest flat-RAM
    Cache,  // every vault is a hardware-managed cache vault
};

std::string layout_name(Layout l);
Layout layout_from_name(const std::string& s);

struct MonarchConfig {
    Layout layout = Layout::Cache;
    unsigned vaults = 8;
    unsigned banks = 64;
    unsigned supersets = 256;
    unsigned cam_banks = 4;   // cache layout
    unsigned cam_vaults = 4;  // flat layout
    MatchGranularity granularity = MatchGranularity::Element;
    TimingParams timing;
    DeviceParams device;
    L3Config l3;
    MemTiming main_memory = MemTiming::ddr4();
    CacheOptions cache;
    bool keep_command_trace = false;

    VaultConfig vault_config(unsigned vault) const;
    void validate() const;
};

/// Per-operation energy of a 2R XAM building block, nJ.
inline constexpr double kReadEnergyNj = 0.0215;
inline constexpr double kWriteEnergyNj = 0.652;
inline constexpr double kSearchEnergyNj = 0.0263;

/// Monarch stack behind an L3. Flat vaults are addressed directly in the
/// in-package range and bypass the L3; cache vaults sit below it.
class MonarchSystem : public CachedSystem {
public:
    explicit MonarchSystem(const MonarchConfig& cfg);

    Allocation alloc(AllocKind kind, uint64_t bytes) override;
    Response access(const Request& req) override;
    Cycle finish(Cycle now) override;
    Stats stats() const override;
    std::string name() const override;

    const MonarchConfig& config() const { return cfg_; }
    unsigned vault_count() const { return static_cast<unsigned>(cores_.size()); }
    VaultCore& vault(unsigned v) { return *cores_.at(v); }
    const VaultCore& vault(unsigned v) const { return *cores_.at(v); }
    MonarchCache* cache() { return cache_.get(); }
    const MonarchCache* cache() const { return cache_.get(); }
    const MatchRegisters& registers() const { return regs_; }

    /// Vault commands of every vault, vault by vault.
    std::vector<CommandRecord> command_trace() const;

    /// Wear epochs; in the flat layout one epoch is closed by finish().
    SnapshotFile snapshots() const;

    /// Start of vault `v` in the in-package address range.
    uint64_t vault_base(unsigned v) const;

protected:
    Fetch fetch(uint64_t block, Cycle at) override;
    Cycle evicted(const L3Eviction& ev, Cycle at) override;
    std::optional<Block> peek_below(uint64_t block) const override;
    bool uncached(uint64_t addr) const override;
    Block observe_uncached(uint64_t addr) const override;

private:
    struct Target {
        unsigned vault;
        uint64_t offset;
    };
    Target locate(uint64_t addr) const;
    Response register_access(const Request& req);
    Response flat_access(const Request& req);
    double energy_nj() const;
    void close_flat_epoch(Cycle now);

    MonarchConfig cfg_;
    std::vector<std::unique_ptr<VaultCore>> cores_;
    std::vector<std::unique_ptr<FlatRamVault>> ram_;
    std::vector<std::unique_ptr<FlatCamVault>> cam_;
    std::unique_ptr<MonarchCache> cache_;
    MatchRegisters regs_;
    RegionAllocator main_alloc_;
    RegionAllocator ram_alloc_;
    RegionAllocator cam_alloc_;
    SnapshotFile flat_snapshots_;
    Cycle last_done_ = 0;
    bool finished_ = false;
};

}  // namespace monarch
