#include <bit>

#include "monarch/vault.hpp"

namespace monarch {

namespace {

uint64_t set_key(const FlatLocation& loc, const VaultConfig& cfg) {
    return (uint64_t{loc.bank} * cfg.supersets + loc.superset) * kSetsPerSuperset + loc.set;
}

}  // namespace

VaultAccess FlatCamVault::write(uint64_t offset, const Block& data, const Block& mask, Cycle at) {
    const FlatLocation loc = decompose_flat(offset, core_.config());
    Superset& ss = core_.ensure(loc.bank, loc.superset, std::nullopt, PortMode::ColumnIn, at);
    const uint64_t stalls = core_.stats().stalls;
    const Cycle t = core_.admit_blocking(loc.bank, loc.superset, at);
    const IssueResult r =
        core_.issue(CommandKind::Write, {0, loc.bank, loc.superset, loc.set, 0, loc.index}, t);
    ss.write_block(BlockLocation{loc.set, loc.index, 0}, data, mask);
    ++data_version_[set_key(loc, core_.config())];
    ++core_.stats().writes;
    ++core_.stats().data_block_writes;
    return VaultAccess{r.completion, {}, core_.stats().stalls != stalls};
}

VaultAccess FlatCamVault::read(uint64_t offset, Cycle at) {
    const FlatLocation loc = decompose_flat(offset, core_.config());
    Superset& ss = core_.ensure(loc.bank, loc.superset, SenseRef::Read, PortMode::RowIn, at);
    Cycle done = at;
    for (unsigned row = 0; row < kArrayDim; ++row) {
        done = core_.issue(CommandKind::Read, {0, loc.bank, loc.superset, loc.set, row, 0}, at)
                   .completion;
    }
    Block out{};
    for (unsigned s = 0; s < kSlices; ++s) {
        out[s] = ss.slice_array(loc.set, s).column_bits(loc.index);
    }
    ++core_.stats().reads;
    return VaultAccess{done, out, false};
}

MatchResult FlatCamVault::match(uint64_t offset, Cycle at) {
    const FlatLocation loc = decompose_flat(offset, core_.config());
    const uint64_t sk = set_key(loc, core_.config());
    MatchResult res;
    res.done = at;
    if (!regs_.key_written) {
        ++core_.stats().match_without_key;
        res.no_key = true;
        regs_.match.reset();
        return res;
    }
    const uint64_t dv = data_version_[sk];
    if (last_ && last_->set_key == sk && last_->key_version == regs_.key_version &&
        last_->mask_version == regs_.mask_version && last_->data_version == dv) {
        ++core_.stats().match_reuses;
        res = last_->result;
        res.done = at;
        res.searched = false;
        regs_.match = res.index;
        return res;
    }

    const uint64_t ss_id = core_.local_id(loc.bank, loc.superset);
    auto it = loaded_.find(ss_id);
    if (it == loaded_.end() || it->second.key_version != regs_.key_version ||
        it->second.mask_version != regs_.mask_version) {
        Superset& ss = core_.ensure(loc.bank, loc.superset, SenseRef::Search, PortMode::RowIn, at);
        core_.issue(CommandKind::KeyLoad, {0, loc.bank, loc.superset, loc.set, 0, 0}, at);
        ss.load_key_mask(loc.set, 0, regs_.key);
        core_.issue(CommandKind::KeyLoad, {0, loc.bank, loc.superset, loc.set, 1, 0}, at);
        ss.load_key_mask(loc.set, 1, regs_.mask);
        loaded_[ss_id] = Loaded{regs_.key_version, regs_.mask_version};
        ++core_.stats().key_mask_loads;
    }
    Superset& ss = core_.ensure(loc.bank, loc.superset, SenseRef::Search, PortMode::ColumnIn, at);
    const IssueResult r =
        core_.issue(CommandKind::Search, {0, loc.bank, loc.superset, loc.set, 0, 0}, at);
    ++core_.stats().searches;
    const SetSearchResult found = ss.search_set(loc.set);

    res.done = r.completion;
    res.searched = true;
    if (gran_ == MatchGranularity::Block) {
        res.vector[0] = found.block_matches;
        if (found.block_matches) res.index = std::countr_zero(found.block_matches);
    } else {
        for (unsigned c = 0; c < kBlocksPerSet; ++c) {
            for (unsigned s = 0; s < kSlices; ++s) {
                if ((found.slice_matches[s] >> c) & 1) {
                    const unsigned e = c * kSlices + s;
                    res.vector[e / 64] |= uint64_t{1} << (e % 64);
                    if (!res.index) res.index = e;
                }
            }
        }
    }
    regs_.match = res.index;
    last_ = LastSearch{sk, regs_.key_version, regs_.mask_version, dv, res};
    return res;
}

}  // namespace monarch
