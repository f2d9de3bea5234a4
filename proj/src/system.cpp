#include "monarch/system.hpp"

#include <algorithm>

namespace monarch {

std::string layout_name(Layout l) { return l == Layout::Flat ? "flat" : "cache"; }

Layout layout_from_name(const std::string& s) {
    if (s == "flat") return Layout::Flat;
    if (s == "cache") return Layout::Cache;
    throw ConfigError("unknown layout '" + s + "' (expected flat or cache)");
}

VaultConfig MonarchConfig::vault_config(unsigned vault) const {
    VaultConfig v;
    v.banks = banks;
    v.supersets = supersets;
    v.cam_banks = cam_banks;
    if (layout == Layout::Cache) {
        v.mode = VaultMode::Cache;
    } else {
        v.mode = vault < cam_vaults ? VaultMode::FlatCAM : VaultMode::FlatRAM;
    }
    return v;
}

void MonarchConfig::validate() const {
    if (vaults == 0) throw ConfigError("Monarch needs at least one vault");
    if (layout == Layout::Flat && cam_vaults > vaults) {
        throw ConfigError("more flat-CAM vaults than vaults");
    }
    for (unsigned v = 0; v < vaults; ++v) vault_config(v).validate();
    timing.validate();
    device.validate();
}

MonarchSystem::MonarchSystem(const MonarchConfig& cfg)
    : CachedSystem(cfg.l3, cfg.main_memory),
      cfg_(cfg),
      main_alloc_(1ull << 20, kMainMemoryBytes - (1ull << 20)) {
    cfg_.validate();
    std::vector<VaultCore*> cache_vaults;
    for (unsigned v = 0; v < cfg_.vaults; ++v) {
        cores_.push_back(std::make_unique<VaultCore>(v, cfg_.vault_config(v), cfg_.timing,
                                                     cfg_.keep_command_trace));
        VaultCore& core = *cores_.back();
        switch (core.config().mode) {
            case VaultMode::FlatRAM:
                ram_.push_back(std::make_unique<FlatRamVault>(core));
                cam_.emplace_back();
                break;
            case VaultMode::FlatCAM:
                cam_.push_back(std::make_unique<FlatCamVault>(core, regs_, cfg_.granularity));
                ram_.emplace_back();
                break;
            case VaultMode::Cache:
                cache_vaults.push_back(&core);
                break;
        }
    }
    if (cfg_.layout == Layout::Cache) {
        cache_ = std::make_unique<MonarchCache>(cache_vaults, mm_, cfg_.cache, cfg_.device);
    } else {
        const uint64_t vb = cfg_.vault_config(0).data_blocks() * kBlockBytes;
        cam_alloc_ = RegionAllocator(vault_base(0), vb * cfg_.cam_vaults);
        ram_alloc_ = RegionAllocator(vault_base(cfg_.cam_vaults), vb * (cfg_.vaults - cfg_.cam_vaults));
        flat_snapshots_.geometry = Geometry{cfg_.vaults, cfg_.banks, cfg_.supersets};
        flat_snapshots_.device = cfg_.device;
    }
}

std::string MonarchSystem::name() const {
    std::string n = "monarch-" + layout_name(cfg_.layout);
    if (cfg_.timing.window_bound()) n += "-m" + std::to_string(cfg_.timing.M);
    return n;
}

uint64_t MonarchSystem::vault_base(unsigned v) const {
    return kInPackageBase + uint64_t{v} * cfg_.vault_config(0).data_blocks() * kBlockBytes;
}

Allocation MonarchSystem::alloc(AllocKind kind, uint64_t bytes) {
    Allocation a;
    a.kind = kind;
    a.size = bytes;
    if (kind == AllocKind::Main) {
        a.base = main_alloc_.allocate(bytes);
        return a;
    }
    if (cfg_.layout == Layout::Cache) {
        if (kind == AllocKind::Hbm) {
            a.base = main_alloc_.allocate(bytes);
            return a;
        }
        throw AllocationError(alloc_name(kind) + " needs flat vaults; every vault is in cache mode");
    }
    a.cacheable = false;
    if (kind == AllocKind::FlatCam) {
        a.base = cam_alloc_.allocate(bytes);
        a.key_ptr = kKeyRegister;
        a.mask_ptr = kMaskRegister;
        a.match_ptr = kMatchRegister;
    } else {
        a.base = ram_alloc_.allocate(bytes);
    }
    return a;
}

MonarchSystem::Target MonarchSystem::locate(uint64_t addr) const {
    if (cfg_.layout != Layout::Flat || !is_in_package(addr)) {
        throw AddressError("address " + std::to_string(addr) + " is not in a flat vault");
    }
    const uint64_t vb = cfg_.vault_config(0).data_blocks() * kBlockBytes;
    const uint64_t off = addr - kInPackageBase;
    const uint64_t v = off / vb;
    if (v >= cfg_.vaults) throw AddressError("address " + std::to_string(addr) + " beyond the stack");
    return Target{static_cast<unsigned>(v), off % vb};
}

bool MonarchSystem::uncached(uint64_t addr) const { return is_in_package(addr); }

Block MonarchSystem::observe_uncached(uint64_t addr) const {
    const Target t = locate(addr - addr % kBlockBytes);
    const VaultCore& core = *cores_[t.vault];
    const FlatLocation loc = decompose_flat(t.offset, core.config());
    const Superset* ss = core.find(loc.bank, loc.superset);
    if (!ss) return Block{};
    Block out{};
    for (unsigned s = 0; s < kSlices; ++s) {
        const XamArray& a = ss->slice_array(loc.set, s);
        out[s] = core.config().mode == VaultMode::FlatCAM ? a.column_bits(loc.index)
                                                          : a.row_bits(loc.index);
    }
    return out;
}

Response MonarchSystem::register_access(const Request& req) {
    if (cfg_.layout != Layout::Flat || cfg_.cam_vaults == 0) {
        throw ModeError("no flat-CAM vault holds the key, mask and match registers");
    }
    Response r;
    r.source = Source::Register;
    r.done = req.cycle + 1;
    const uint64_t reg = req.addr - req.addr % kBlockBytes;
    const bool write = req.op == Op::Write || req.op == Op::Key || req.op == Op::Mask;
    if (write) {
        const bool key = req.op == Op::Key || (req.op == Op::Write && reg == kKeyRegister);
        const bool mask = req.op == Op::Mask || (req.op == Op::Write && reg == kMaskRegister);
        if (key) {
            regs_.key = req.data;
            ++regs_.key_version;
            regs_.key_written = true;
            counters_.add("registers.key_writes");
        } else if (mask) {
            regs_.mask = req.data;
            ++regs_.mask_version;
            counters_.add("registers.mask_writes");
        } else {
            throw AddressError("the match register is read-only");
        }
        return r;
    }
    if (reg != kMatchRegister) throw AddressError("key and mask registers are write-only");
    r.data[0] = regs_.match ? *regs_.match : kAllOnes;
    r.match = regs_.match;
    counters_.add("registers.match_reads");
    return r;
}

Response MonarchSystem::flat_access(const Request& req) {
    const unsigned in_block = static_cast<unsigned>(req.addr % kBlockBytes);
    if (req.size == 0 || in_block + req.size > kBlockBytes) {
        throw AddressError("request crosses a block boundary");
    }
    const Target tg = locate(req.addr - in_block);
    Response r;
    r.source = Source::InPackage;
    if (req.op == Op::Match || req.op == Op::Search) {
        if (!cam_[tg.vault]) throw ModeError("search issued to a flat-RAM vault");
        const MatchResult m = cam_[tg.vault]->match(tg.offset, req.cycle);
        r.done = m.done;
        r.match = m.index;
        r.match_vector = m.vector;
        r.data[0] = m.index ? *m.index : kAllOnes;
        return r;
    }
    const bool write = req.op == Op::Write;
    if (!write && req.op != Op::Read) throw ModeError(op_name(req.op) + " sent to a data address");
    VaultAccess a;
    if (cam_[tg.vault]) {
        a = write ? cam_[tg.vault]->write(tg.offset, req.data, byte_mask(in_block, req.size), req.cycle)
                  : cam_[tg.vault]->read(tg.offset, req.cycle);
    } else {
        a = write ? ram_[tg.vault]->write(tg.offset, req.data, byte_mask(in_block, req.size), req.cycle)
                  : ram_[tg.vault]->read(tg.offset, req.cycle);
    }
    if (!write) count_read_source(Source::InPackage);
    r.done = a.done;
    r.data = a.data;
    r.stalled = a.stalled;
    return r;
}

Response MonarchSystem::access(const Request& req) {
    count_request(req);
    Response r;
    if (is_register(req.addr) || req.op == Op::Key || req.op == Op::Mask) {
        r = register_access(req);
    } else if (is_in_package(req.addr)) {
        r = flat_access(req);
    } else if (req.op != Op::Read && req.op != Op::Write) {
        throw ModeError(op_name(req.op) + " needs a flat-CAM address");
    } else {
        r = cached_access(req);
    }
    last_done_ = std::max(last_done_, r.done);
    return r;
}

Fetch MonarchSystem::fetch(uint64_t block, Cycle at) {
    Fetch f;
    Cycle t = at;
    if (cache_) {
        const CacheLookup l = cache_->lookup(block, at);
        if (l.hit) {
            f.done = l.done;
            f.data = l.data;
            f.source = Source::InPackage;
            return f;
        }
        t = l.done;
    }
    f.done = mm_.read(block, t, f.data);
    f.source = Source::MainMemory;
    return f;
}

Cycle MonarchSystem::evicted(const L3Eviction& ev, Cycle at) {
    if (cache_) return cache_->on_l3_evict(ev, at).done;
    return ev.dirty ? mm_.write(ev.block, ev.data, at) : at;
}

std::optional<Block> MonarchSystem::peek_below(uint64_t block) const {
    if (!cache_) return std::nullopt;
    return cache_->peek(block);
}

void MonarchSystem::close_flat_epoch(Cycle now) {
    const Geometry& g = flat_snapshots_.geometry;
    Cycle end = now;
    const Cycle w = cfg_.timing.window_bound() ? cfg_.timing.tMWW : 0;
    if (w) end = (end + w - 1) / w * w;  // the budget holds per whole window
    WearRecorder rec(g);
    WearSnapshot snap;
    snap.epoch = 0;
    snap.seconds = static_cast<double>(end) / kCpuClockHz;
    for (const auto& core : cores_) {
        for (const auto& [bank, ss] : core->touched()) {
            const PhysicalAddress p{core->id(), bank, ss, 0, 0, 0};
            SupersetWear sw = rec.delta(superset_index(core->id(), bank, ss, g),
                                        *core->find(bank, ss), p);
            if (sw.cell_writes > 0) snap.supersets.push_back(sw);
        }
    }
    flat_snapshots_.epochs.push_back(std::move(snap));
}

Cycle MonarchSystem::finish(Cycle now) {
    // Posted writes may still be completing after the core's clock.
    Cycle t = std::max(drain_l3(now), last_done_);
    if (cache_) {
        t = std::max(t, cache_->flush(t));
        if (!finished_) cache_->close_epoch(t);
    } else if (!finished_) {
        close_flat_epoch(t);
    }
    finished_ = true;
    return t;
}

SnapshotFile MonarchSystem::snapshots() const {
    return cache_ ? cache_->snapshots() : flat_snapshots_;
}

std::vector<CommandRecord> MonarchSystem::command_trace() const {
    std::vector<CommandRecord> out;
    for (const auto& c : cores_) {
        const auto& t = c->scheduler().trace();
        out.insert(out.end(), t.begin(), t.end());
    }
    return out;
}

double MonarchSystem::energy_nj() const {
    uint64_t r = 0, w = 0, s = 0;
    for (const auto& c : cores_) {
        r += c->scheduler().count(CommandKind::Read);
        w += c->scheduler().count(CommandKind::Write);
        s += c->scheduler().count(CommandKind::Search);
    }
    return static_cast<double>(r) * kReadEnergyNj + static_cast<double>(w) * kWriteEnergyNj +
           static_cast<double>(s) * kSearchEnergyNj;
}

Stats MonarchSystem::stats() const {
    Stats s;
    export_common(s);
    VaultStats total;
    uint64_t cmds[6] = {};
    for (const auto& c : cores_) {
        total += c->stats();
        for (CommandKind k : {CommandKind::Prepare, CommandKind::Activate, CommandKind::Read,
                              CommandKind::Search, CommandKind::Write, CommandKind::KeyLoad}) {
            cmds[static_cast<size_t>(k)] += c->scheduler().count(k);
        }
    }
    total.export_to(s, "monarch.");
    auto n = [&](CommandKind k) { return static_cast<double>(cmds[static_cast<size_t>(k)]); };
    s.set("xam.prepares", n(CommandKind::Prepare));
    s.set("xam.activates", n(CommandKind::Activate));
    s.set("xam.read_cmds", n(CommandKind::Read));
    s.set("xam.search_cmds", n(CommandKind::Search));
    s.set("xam.write_cmds", n(CommandKind::Write));
    s.set("xam.key_loads", n(CommandKind::KeyLoad));
    s.set("inpkg.reads", static_cast<double>(total.reads + total.hits));
    s.set("inpkg.writes", static_cast<double>(total.data_block_writes));
    s.set("inpkg.tag_accesses", static_cast<double>(total.searches));
    s.set("inpkg.activates", n(CommandKind::Activate));
    s.set("rotations", cache_ ? static_cast<double>(cache_->monitor().rotations()) : 0.0);
    s.set("energy_nj", energy_nj());
    return s;
}

}  // namespace monarch
