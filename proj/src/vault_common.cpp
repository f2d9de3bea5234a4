#include <algorithm>

#include "monarch/memsys.hpp"
#include "monarch/vault.hpp"

namespace monarch {

std::string vault_mode_name(VaultMode m) {
    switch (m) {
        case VaultMode::FlatRAM: return "flat-ram";
        case VaultMode::FlatCAM: return "flat-cam";
        case VaultMode::Cache: return "cache";
    }
    return "?";
}

void VaultConfig::validate() const {
    if (banks == 0 || supersets == 0) {
        throw ConfigError("vault needs at least one bank and one superset");
    }
    if (mode != VaultMode::Cache) return;
    if (cam_banks == 0 || cam_banks >= banks) {
        throw ConfigError("cache mode needs between 1 and banks-1 CAM banks");
    }
    if (tag_capacity() < data_blocks()) {
        throw ConfigError("cache partition of " + std::to_string(ram_banks()) + " RAM and " +
                          std::to_string(cam_banks) + " CAM banks cannot tag every data block");
    }
}

VaultStats& VaultStats::operator+=(const VaultStats& o) {
    reads += o.reads;
    writes += o.writes;
    stalls += o.stalls;
    stall_cycles += o.stall_cycles;
    window_lookups += o.window_lookups;
    window_misses += o.window_misses;
    key_writes += o.key_writes;
    mask_writes += o.mask_writes;
    key_mask_loads += o.key_mask_loads;
    searches += o.searches;
    match_reuses += o.match_reuses;
    match_without_key += o.match_without_key;
    hits += o.hits;
    misses += o.misses;
    bypasses += o.bypasses;
    installs += o.installs;
    updates += o.updates;
    forwards += o.forwards;
    drops += o.drops;
    invalidations += o.invalidations;
    writebacks += o.writebacks;
    replacements += o.replacements;
    locks += o.locks;
    remap_cycles += o.remap_cycles;
    data_block_writes += o.data_block_writes;
    tag_writes += o.tag_writes;
    return *this;
}

void VaultStats::export_to(Stats& s, const std::string& p) const {
    s.set(p + "reads", reads);
    s.set(p + "writes", writes);
    s.set(p + "stalls", stalls);
    s.set(p + "stall_cycles", stall_cycles);
    s.set(p + "window_lookups", window_lookups);
    s.set(p + "window_misses", window_misses);
    s.set(p + "key_writes", key_writes);
    s.set(p + "mask_writes", mask_writes);
    s.set(p + "key_mask_loads", key_mask_loads);
    s.set(p + "searches", searches);
    s.set(p + "match_reuses", match_reuses);
    s.set(p + "match_without_key", match_without_key);
    s.set(p + "hits", hits);
    s.set(p + "misses", misses);
    s.set(p + "bypasses", bypasses);
    s.set(p + "installs", installs);
    s.set(p + "updates", updates);
    s.set(p + "forwards", forwards);
    s.set(p + "drops", drops);
    s.set(p + "invalidations", invalidations);
    s.set(p + "writebacks", writebacks);
    s.set(p + "replacements", replacements);
    s.set(p + "locks", locks);
    s.set(p + "remap_cycles", remap_cycles);
    s.set(p + "data_block_writes", data_block_writes);
    s.set(p + "tag_writes", tag_writes);
}

VaultCore::VaultCore(unsigned id, const VaultConfig& cfg, const TimingParams& t, bool keep_trace)
    : id_(id), cfg_(cfg), sched_(t, id, cfg.banks, keep_trace) {
    cfg_.validate();
    t.validate();
    if (t.window_bound()) {
        WindowConfig w;
        w.tmww = t.tMWW;
        w.m = t.M;
        window_ = WindowTracker(w);
    }
}

Superset& VaultCore::superset(unsigned bank, unsigned ss) {
    if (bank >= cfg_.banks || ss >= cfg_.supersets) {
        throw AddressError("superset (" + std::to_string(bank) + ", " + std::to_string(ss) +
                           ") outside vault " + std::to_string(id_));
    }
    auto& slot = supersets_[local_id(bank, ss)];
    if (!slot) slot = std::make_unique<Superset>();
    slot->set_port_mode(sched_.port_mode(bank, ss));
    if (slot->sense() != sched_.bank_sense(bank)) slot->set_sense(sched_.bank_sense(bank));
    return *slot;
}

const Superset* VaultCore::find(unsigned bank, unsigned ss) const {
    auto it = supersets_.find(local_id(bank, ss));
    return it == supersets_.end() ? nullptr : it->second.get();
}

Superset& VaultCore::ensure(unsigned bank, unsigned ss, std::optional<SenseRef> sense,
                            PortMode port, Cycle at) {
    CommandAddress a{id_, bank, ss, 0, 0, 0};
    if (sense && sched_.bank_sense(bank) != *sense) {
        sched_.issue(Command{CommandKind::Prepare, a, at});
    }
    if (sched_.port_mode(bank, ss) != port) {
        sched_.issue(Command{CommandKind::Activate, a, at});
    }
    return superset(bank, ss);
}

IssueResult VaultCore::issue(CommandKind k, const CommandAddress& a, Cycle at) {
    CommandAddress full = a;
    full.vault = id_;
    return sched_.issue(Command{k, full, at});
}

Cycle VaultCore::admit_blocking(unsigned bank, unsigned ss, Cycle at) {
    if (!window_.config().bound()) return at;
    const uint64_t id = local_id(bank, ss);
    const uint64_t misses_before = window_.misses();
    Cycle t = at + window_.lookup(id);
    ++stats_.window_lookups;
    if (window_.misses() != misses_before) ++stats_.window_misses;
    for (;;) {
        // The budget is charged in the window where the write really issues.
        t = sched_.write_ready(bank, ss, t);
        const WindowDecision d = window_.charge(id, t);
        if (d.allowed) return t;
        ++stats_.stalls;
        stats_.stall_cycles += d.block_until - t;
        t = d.block_until;
    }
}

std::vector<std::pair<unsigned, unsigned>> VaultCore::touched() const {
    std::vector<std::pair<unsigned, unsigned>> out;
    out.reserve(supersets_.size());
    for (const auto& [id, ptr] : supersets_) {
        out.emplace_back(static_cast<unsigned>(id / cfg_.supersets),
                         static_cast<unsigned>(id % cfg_.supersets));
    }
    std::sort(out.begin(), out.end());
    return out;
}

FlatLocation decompose_flat(uint64_t vault_offset, const VaultConfig& cfg) {
    if (vault_offset % kBlockBytes != 0) {
        throw AddressError("flat access at unaligned offset " + std::to_string(vault_offset));
    }
    uint64_t b = vault_offset / kBlockBytes;
    if (b >= cfg.data_blocks()) {
        throw AddressError("flat access beyond the vault");
    }
    FlatLocation loc;
    loc.index = static_cast<unsigned>(b % kBlocksPerSet);
    b /= kBlocksPerSet;
    loc.set = static_cast<unsigned>(b % kSetsPerSuperset);
    b /= kSetsPerSuperset;
    loc.superset = static_cast<unsigned>(b % cfg.supersets);
    loc.bank = static_cast<unsigned>(b / cfg.supersets);
    return loc;
}

}  // namespace monarch
