#include <algorithm>
#include <bit>

#include "monarch/vault.hpp"

namespace monarch {

namespace {

constexpr unsigned kHalfRows = 32;
constexpr unsigned kValidBit = 30;
constexpr unsigned kDirtyBit = 31;
constexpr uint32_t kTagMask = (1u << kTagBits) - 1;
constexpr uint32_t kValidMask = 1u << kValidBit;
constexpr uint32_t kDirtyMask = 1u << kDirtyBit;

Geometry ram_geometry(unsigned vaults, const VaultConfig& cfg) {
    return Geometry{vaults, cfg.ram_banks(), cfg.supersets};
}

CamAddress cam_for(unsigned vault, unsigned ram_bank, unsigned superset, unsigned set_off,
                   const VaultConfig& cfg) {
    CamAddress c;
    c.vault = vault;
    c.bank = cfg.ram_banks() + (ram_bank >> 4);
    c.superset = superset;
    c.set = ((ram_bank & 7u) + set_off) % kSetsPerSuperset;
    c.key_id = (ram_bank >> 3) & 1u;
    return c;
}

unsigned row_of(const CamAddress& c, unsigned bit) { return c.key_id * kHalfRows + bit; }

unsigned lowest_way(const Block& bits) {
    for (unsigned s = 0; s < kSlices; ++s) {
        if (bits[s]) return s * 64 + static_cast<unsigned>(std::countr_zero(bits[s]));
    }
    return kBlocksPerSuperset;
}

}  // namespace

uint32_t CacheTagEntry::pack() const {
    return (tag & kTagMask) | (valid ? kValidMask : 0u) | (dirty ? kDirtyMask : 0u);
}

CacheTagEntry CacheTagEntry::unpack(uint32_t w) {
    return CacheTagEntry{w & kTagMask, (w & kValidMask) != 0, (w & kDirtyMask) != 0};
}

CacheMapping map_cache_address(uint64_t paddr, unsigned vaults, const VaultConfig& cfg,
                               const AddressOffsets* offsets) {
    if (paddr % kBlockBytes != 0) {
        throw AddressError("cache access at unaligned address " + std::to_string(paddr));
    }
    if (vaults == 0) throw ConfigError("cache mode needs at least one vault");
    uint64_t b = paddr / kBlockBytes;
    CacheMapping m;
    m.vault = static_cast<unsigned>(b % vaults);
    b /= vaults;
    m.superset = static_cast<unsigned>(b % cfg.supersets);
    b /= cfg.supersets;
    m.ram_bank = static_cast<unsigned>(b % cfg.ram_banks());
    b /= cfg.ram_banks();
    if (b > kTagMask) {
        throw AddressError("address " + std::to_string(paddr) + " exceeds the 30-bit tag range");
    }
    m.tag = static_cast<uint32_t>(b);
    unsigned set_off = 0;
    if (offsets) {
        const Geometry g = ram_geometry(vaults, cfg);
        PhysicalAddress p{m.vault, m.ram_bank, m.superset, 0, 0, 0};
        p = remap(p, *offsets, g);
        m.vault = p.vault;
        m.ram_bank = p.bank;
        m.superset = p.superset;
        set_off = offsets->set_off;
    }
    m.cam = cam_for(m.vault, m.ram_bank, m.superset, set_off, cfg);
    return m;
}

uint64_t unmap_cache_address(unsigned vault, unsigned ram_bank, unsigned superset, uint32_t tag,
                             unsigned vaults, const VaultConfig& cfg,
                             const AddressOffsets* offsets) {
    PhysicalAddress p{vault, ram_bank, superset, 0, 0, 0};
    if (offsets) p = unmap(p, *offsets, ram_geometry(vaults, cfg));
    const uint64_t b =
        ((uint64_t{tag} * cfg.ram_banks() + p.bank) * cfg.supersets + p.superset) * vaults + p.vault;
    return b * kBlockBytes;
}

DrClass classify_eviction(bool dirty, bool read) {
    if (dirty && read) return DrClass::InstallOrUpdate;
    if (dirty) return DrClass::Forward;
    if (read) return DrClass::InstallReadOnly;
    return DrClass::Drop;
}

std::string dr_class_name(DrClass c) {
    switch (c) {
        case DrClass::InstallOrUpdate: return "install-or-update";
        case DrClass::Forward: return "forward";
        case DrClass::InstallReadOnly: return "install-read-only";
        case DrClass::Drop: return "drop";
    }
    return "?";
}

MonarchCache::MonarchCache(std::vector<VaultCore*> vaults, MainMemory& mm,
                           const CacheOptions& opt, const DeviceParams& device)
    : vaults_(std::move(vaults)),
      cfg_(vaults_.empty() ? VaultConfig{} : vaults_.front()->config()),
      mm_(mm),
      opt_(opt),
      monitor_(ram_geometry(static_cast<unsigned>(vaults_.size()), cfg_), opt.limits),
      counters_(vaults_.size(), 0),
      replacement_seq_(vaults_.size(), 0),
      recorder_(ram_geometry(static_cast<unsigned>(vaults_.size()), cfg_)) {
    if (vaults_.empty()) throw ConfigError("cache mode needs at least one vault");
    for (size_t i = 0; i < vaults_.size(); ++i) {
        if (vaults_[i]->config().mode != VaultMode::Cache || vaults_[i]->id() != i) {
            throw ConfigError("cache vaults must be cache-mode vaults numbered from zero");
        }
    }
    snapshots_.geometry = geometry();
    snapshots_.device = device;
}

Geometry MonarchCache::geometry() const { return ram_geometry(vaults(), cfg_); }

MonarchCache::Group MonarchCache::group_of(const CacheMapping& m) const {
    return Group{m.cam, m.ram_bank, m.superset};
}

uint64_t MonarchCache::group_key(const CamAddress& c) {
    return (((uint64_t{c.vault} << 8 | c.bank) << 24 | c.superset) << 4 | c.set) << 1 | c.key_id;
}

bool MonarchCache::locked(VaultCore& v, unsigned bank, unsigned ss, Cycle t) const {
    auto it = locks_.find((uint64_t{v.id()} << 40) | v.local_id(bank, ss));
    return it != locks_.end() && t < it->second;
}

void MonarchCache::note_write(VaultCore& v, unsigned bank, unsigned ss, bool makes_dirty) {
    const Geometry g{vaults(), cfg_.banks, cfg_.supersets};
    monitor_.record_write(superset_index(v.id(), bank, ss, g), makes_dirty);
    if (opt_.rotation && monitor_.rotate_due()) rotate_pending_ = true;
}

std::optional<unsigned> MonarchCache::search(VaultCore& v, const CacheMapping& m, Cycle& t) {
    const CamAddress& c = m.cam;
    const unsigned shift = 32 * c.key_id;
    const uint64_t key_word = uint64_t{m.tag | kValidMask} << shift;
    const uint64_t mask_word = uint64_t{kTagMask | kValidMask} << shift;
    Block key, mask;
    key.fill(key_word);
    mask.fill(mask_word);

    Superset& probe = v.superset(c.bank, c.superset);
    if (probe.key_buffer() != key || probe.mask_buffer() != mask) {
        const bool mask_stale = probe.mask_buffer() != mask;
        const bool key_stale = probe.key_buffer() != key;
        Superset& ss = v.ensure(c.bank, c.superset, SenseRef::Search, PortMode::RowIn, t);
        if (key_stale) {
            v.issue(CommandKind::KeyLoad, {0, c.bank, c.superset, c.set, 0, 0}, t);
            ss.load_key_mask(c.set, 0, key);
        }
        if (mask_stale) {
            v.issue(CommandKind::KeyLoad, {0, c.bank, c.superset, c.set, 1, 0}, t);
            ss.load_key_mask(c.set, 1, mask);
        }
        ++v.stats().key_mask_loads;
    }
    Superset& ss = v.ensure(c.bank, c.superset, SenseRef::Search, PortMode::ColumnIn, t);
    t = v.issue(CommandKind::Search, {0, c.bank, c.superset, c.set, 0, 0}, t).completion;
    ++v.stats().searches;
    const SetSearchResult r = ss.search_set(c.set);
    Block lines{};
    for (unsigned s = 0; s < kSlices; ++s) lines[s] = r.slice_matches[s];
    const unsigned way = lowest_way(lines);
    if (way == kBlocksPerSuperset) return std::nullopt;
    return way;
}

Block MonarchCache::read_data(VaultCore& v, unsigned bank, unsigned ss_id, unsigned way,
                              Cycle& t) {
    const unsigned set = way / 64, row = way % 64;
    Superset& ss = v.ensure(bank, ss_id, SenseRef::Read, PortMode::RowIn, t);
    t = v.issue(CommandKind::Read, {0, bank, ss_id, set, row, 0}, t).completion;
    ++v.stats().reads;
    return ss.read_block(BlockLocation{set, 0, row});
}

void MonarchCache::write_data(VaultCore& v, unsigned bank, unsigned ss_id, unsigned way,
                              const Block& data, bool makes_dirty, Cycle& t) {
    const unsigned set = way / 64, row = way % 64;
    Superset& ss = v.ensure(bank, ss_id, SenseRef::Read, PortMode::RowIn, t);
    t = v.issue(CommandKind::Write, {0, bank, ss_id, set, row, 0}, t).completion;
    ss.write_block(BlockLocation{set, 0, row}, data, full_mask());
    ++v.stats().writes;
    ++v.stats().data_block_writes;
    note_write(v, bank, ss_id, makes_dirty);
}

void MonarchCache::write_tag(VaultCore& v, const CamAddress& c, unsigned way,
                             const CacheTagEntry& e, uint32_t field_mask, Cycle& t) {
    const unsigned slice = way / 64, col = way % 64;
    const unsigned shift = 32 * c.key_id;
    Block data{}, mask{};
    data[slice] = uint64_t{e.pack()} << shift;
    mask[slice] = uint64_t{field_mask} << shift;
    Superset& ss = v.ensure(c.bank, c.superset, std::nullopt, PortMode::ColumnIn, t);
    t = v.issue(CommandKind::Write, {0, c.bank, c.superset, c.set, 0, col}, t).completion;
    ss.write_block(BlockLocation{c.set, col, 0}, data, mask);
    ++v.stats().tag_writes;
    note_write(v, c.bank, c.superset, false);
}

uint32_t MonarchCache::read_tag_rows(VaultCore& v, const CamAddress& c, unsigned way, Cycle& t) {
    const unsigned slice = way / 64, col = way % 64;
    Superset& ss = v.ensure(c.bank, c.superset, SenseRef::Read, PortMode::RowIn, t);
    uint32_t tag = 0;
    Cycle done = t;
    for (unsigned bit = 0; bit < kTagBits; ++bit) {
        const unsigned row = row_of(c, bit);
        done = v.issue(CommandKind::Read, {0, c.bank, c.superset, c.set, row, 0}, t).completion;
        const Block b = ss.read_block(BlockLocation{c.set, 0, row});
        tag |= static_cast<uint32_t>((b[slice] >> col) & 1u) << bit;
    }
    t = done;
    return tag;
}

std::optional<uint32_t> MonarchCache::stored_word(const VaultCore& v, const CamAddress& c,
                                                  unsigned way) const {
    const Superset* ss = v.find(c.bank, c.superset);
    if (!ss) return std::nullopt;
    const uint64_t col = ss->slice_array(c.set, way / 64).column_bits(way % 64);
    return static_cast<uint32_t>(col >> (32 * c.key_id));
}

unsigned MonarchCache::choose_way(VaultCore& v, const Group& g, Cycle& t) {
    const CamAddress& c = g.cam;
    Superset& ss = v.ensure(c.bank, c.superset, SenseRef::Read, PortMode::RowIn, t);
    const unsigned valid_row = row_of(c, kValidBit);
    t = v.issue(CommandKind::Read, {0, c.bank, c.superset, c.set, valid_row, 0}, t).completion;
    const Block valid = ss.read_block(BlockLocation{c.set, 0, valid_row});
    Block invalid{};
    for (unsigned s = 0; s < kSlices; ++s) invalid[s] = ~valid[s];
    const unsigned free_way = lowest_way(invalid);
    if (free_way < kBlocksPerSuperset) return free_way;

    const unsigned dirty_row = row_of(c, kDirtyBit);
    t = v.issue(CommandKind::Read, {0, c.bank, c.superset, c.set, dirty_row, 0}, t).completion;
    const Block dirty = ss.read_block(BlockLocation{c.set, 0, dirty_row});

    const size_t vi = static_cast<size_t>(
        std::find(vaults_.begin(), vaults_.end(), &v) - vaults_.begin());
    const unsigned way = counters_[vi];
    counters_[vi] = (counters_[vi] + 1) % kBlocksPerSuperset;
    ++v.stats().replacements;
    const uint64_t seq = replacement_seq_[vi]++;
    if (opt_.keep_replacement_log) {
        replacements_.push_back(
            ReplacementEvent{v.id(), seq, group_key(c) * kBlocksPerSuperset + way});
    }
    if ((dirty[way / 64] >> (way % 64)) & 1u) {
        const uint32_t tag = read_tag_rows(v, c, way, t);
        const Block data = read_data(v, g.ram_bank, g.superset, way, t);
        const uint64_t addr = unmap_cache_address(c.vault, g.ram_bank, g.superset, tag, vaults(),
                                                  cfg_, offsets());
        t = mm_.write(block_of(addr), data, t);
        ++v.stats().writebacks;
    }
    return way;
}

void MonarchCache::writeback_group(VaultCore& v, const Group& g, bool invalidate, Cycle& t) {
    const CamAddress& c = g.cam;
    Superset& ss = v.ensure(c.bank, c.superset, SenseRef::Read, PortMode::RowIn, t);
    const unsigned valid_row = row_of(c, kValidBit);
    const unsigned dirty_row = row_of(c, kDirtyBit);
    t = v.issue(CommandKind::Read, {0, c.bank, c.superset, c.set, valid_row, 0}, t).completion;
    t = v.issue(CommandKind::Read, {0, c.bank, c.superset, c.set, dirty_row, 0}, t).completion;
    const Block valid = ss.read_block(BlockLocation{c.set, 0, valid_row});
    const Block dirty = ss.read_block(BlockLocation{c.set, 0, dirty_row});
    for (unsigned way = 0; way < kBlocksPerSuperset; ++way) {
        const unsigned s = way / 64, col = way % 64;
        if (!((valid[s] & dirty[s]) >> col & 1u)) continue;
        const uint32_t tag = read_tag_rows(v, c, way, t);
        const Block data = read_data(v, g.ram_bank, g.superset, way, t);
        const uint64_t addr =
            unmap_cache_address(c.vault, g.ram_bank, g.superset, tag, vaults(), cfg_, offsets());
        t = mm_.write(block_of(addr), data, t);
        ++v.stats().writebacks;
        if (!invalidate) {
            write_tag(v, c, way, CacheTagEntry{tag, true, false}, kDirtyMask, t);
        }
    }
    if (invalidate) {
        // One row write clears the valid bit of all 512 ways.
        Superset& s2 = v.ensure(c.bank, c.superset, SenseRef::Read, PortMode::RowIn, t);
        t = v.issue(CommandKind::Write, {0, c.bank, c.superset, c.set, valid_row, 0}, t).completion;
        s2.write_block(BlockLocation{c.set, 0, valid_row}, Block{}, full_mask());
        ++v.stats().tag_writes;
        note_write(v, c.bank, c.superset, false);
    }
}

void MonarchCache::lock(VaultCore& v, const Group& g, Cycle until, Cycle& t) {
    locks_[(uint64_t{v.id()} << 40) | v.local_id(g.ram_bank, g.superset)] = until;
    ++v.stats().locks;
    writeback_group(v, g, false, t);
}

Cycle MonarchCache::rotate_if_due(Cycle t) {
    if (!rotate_pending_) return t;
    rotate_pending_ = false;
    close_epoch(t);
    for (const auto& [key, g] : populated_) {
        writeback_group(*vaults_[g.cam.vault], g, true, t);
    }
    populated_.clear();
    locks_.clear();
    // The flush above may itself have counted writes; the rotate resets them.
    monitor_.maybe_rotate();
    rotate_pending_ = false;
    epoch_start_ = t;
    return t;
}

CacheLookup MonarchCache::lookup(uint64_t block, Cycle at) {
    CacheLookup res;
    const CacheMapping m =
        map_cache_address(block * kBlockBytes, vaults(), cfg_, offsets());
    VaultCore& v = *vaults_[m.vault];
    Cycle t = at;
    if (opt_.rotation) {
        ++t;
        ++v.stats().remap_cycles;
    }
    if (locked(v, m.ram_bank, m.superset, t)) {
        ++v.stats().bypasses;
        ++v.stats().misses;
        res.bypassed = true;
        res.done = t;
        return res;
    }
    const std::optional<unsigned> way = search(v, m, t);
    if (!way) {
        ++v.stats().misses;
        res.done = t;
        return res;
    }
    ++v.stats().hits;
    res.hit = true;
    res.data = read_data(v, m.ram_bank, m.superset, *way, t);
    res.done = t;
    return res;
}

InstallResult MonarchCache::on_l3_evict(const L3Eviction& ev, Cycle at) {
    InstallResult res;
    res.cls = classify_eviction(ev.dirty, ev.read);
    const CacheMapping m = map_cache_address(ev.block * kBlockBytes, vaults(), cfg_, offsets());
    VaultCore& v = *vaults_[m.vault];
    const Group g = group_of(m);
    Cycle t = at;
    if (opt_.rotation) {
        ++t;
        ++v.stats().remap_cycles;
    }
    auto finish = [&](InstallOutcome o) {
        res.outcome = o;
        res.done = rotate_if_due(t);
        return res;
    };
    const bool install = opt_.always_install || res.cls == DrClass::InstallOrUpdate ||
                         res.cls == DrClass::InstallReadOnly;
    if (!install && !ev.dirty) {
        ++v.stats().drops;
        return finish(InstallOutcome::Dropped);
    }

    // Tag searches and tag writes are never gated by the write window.
    const std::optional<unsigned> present = search(v, m, t);
    auto forward = [&]() {
        t = mm_.write(ev.block, ev.data, t);
        ++v.stats().forwards;
        if (present) {
            write_tag(v, m.cam, *present, CacheTagEntry{m.tag, false, false}, kValidMask, t);
            ++v.stats().invalidations;
        }
        return finish(present ? InstallOutcome::Invalidated : InstallOutcome::Forwarded);
    };
    if (!install) return forward();
    if (present && !ev.dirty) {
        ++v.stats().drops;  // Monarch already holds this exact data
        return finish(InstallOutcome::Dropped);
    }

    bool admitted = !locked(v, m.ram_bank, m.superset, t);
    if (admitted) {
        const WindowDecision d = v.window().admit(v.local_id(m.ram_bank, m.superset), t);
        if (v.window().config().bound()) {
            ++v.stats().window_lookups;
            t += d.lookup_penalty;
        }
        if (!d.allowed) {
            lock(v, g, d.block_until, t);
            admitted = false;
        }
    }
    if (!admitted) {
        if (ev.dirty) return forward();
        ++v.stats().drops;
        return finish(InstallOutcome::Dropped);
    }

    if (present) {
        write_data(v, m.ram_bank, m.superset, *present, ev.data, true, t);
        const std::optional<uint32_t> word = stored_word(v, m.cam, *present);
        if (!word || !CacheTagEntry::unpack(*word).dirty) {
            write_tag(v, m.cam, *present, CacheTagEntry{m.tag, true, true}, kDirtyMask, t);
        }
        ++v.stats().updates;
        return finish(InstallOutcome::Updated);
    }

    const unsigned way = choose_way(v, g, t);
    write_data(v, m.ram_bank, m.superset, way, ev.data, ev.dirty, t);
    write_tag(v, m.cam, way, CacheTagEntry{m.tag, true, ev.dirty}, ~0u, t);
    populated_.emplace(group_key(m.cam), g);
    ++v.stats().installs;
    return finish(InstallOutcome::Installed);
}

Cycle MonarchCache::flush(Cycle at) {
    Cycle t = at;
    for (const auto& [key, g] : populated_) {
        writeback_group(*vaults_[g.cam.vault], g, false, t);
    }
    return t;
}

std::optional<CacheTagEntry> MonarchCache::peek_tag(uint64_t block) const {
    const CacheMapping m = map_cache_address(block * kBlockBytes, vaults(), cfg_, offsets());
    const VaultCore& v = *vaults_[m.vault];
    for (unsigned way = 0; way < kBlocksPerSuperset; ++way) {
        const auto w = stored_word(v, m.cam, way);
        if (!w) return std::nullopt;
        const CacheTagEntry e = CacheTagEntry::unpack(*w);
        if (e.valid && e.tag == m.tag) return e;
    }
    return std::nullopt;
}

std::optional<Block> MonarchCache::peek(uint64_t block) const {
    const CacheMapping m = map_cache_address(block * kBlockBytes, vaults(), cfg_, offsets());
    const VaultCore& v = *vaults_[m.vault];
    for (unsigned way = 0; way < kBlocksPerSuperset; ++way) {
        const auto w = stored_word(v, m.cam, way);
        if (!w) return std::nullopt;
        const CacheTagEntry e = CacheTagEntry::unpack(*w);
        if (!(e.valid && e.tag == m.tag)) continue;
        const Superset* ss = v.find(m.ram_bank, m.superset);
        if (!ss) return Block{};
        Block out{};
        for (unsigned s = 0; s < kSlices; ++s) {
            out[s] = ss->slice_array(way / 64, s).row_bits(way % 64);
        }
        return out;
    }
    return std::nullopt;
}

void MonarchCache::close_epoch(Cycle now) {
    if (!opt_.record_snapshots) return;
    WearSnapshot snap;
    snap.epoch = snapshots_.epochs.size();
    snap.seconds = static_cast<double>(now - epoch_start_) / kCpuClockHz;
    const Geometry g = geometry();
    const AddressOffsets o = opt_.rotation ? monitor_.offsets() : AddressOffsets{};
    for (VaultCore* v : vaults_) {
        for (const auto& [bank, ss] : v->touched()) {
            if (bank >= cfg_.ram_banks()) continue;
            const PhysicalAddress phys{v->id(), bank, ss, 0, 0, 0};
            const PhysicalAddress logical = unmap(phys, o, g);
            SupersetWear w = recorder_.delta(superset_index(v->id(), bank, ss, g),
                                             *v->find(bank, ss), logical);
            if (w.cell_writes > 0) snap.supersets.push_back(w);
        }
    }
    snapshots_.epochs.push_back(std::move(snap));
    epoch_start_ = now;
}

}  // namespace monarch
