#include "monarch/vault.hpp"

namespace monarch {

VaultAccess FlatRamVault::read(uint64_t offset, Cycle at) {
    const FlatLocation loc = decompose_flat(offset, core_.config());
    Superset& ss = core_.ensure(loc.bank, loc.superset, SenseRef::Read, PortMode::RowIn, at);
    const IssueResult r =
        core_.issue(CommandKind::Read, {0, loc.bank, loc.superset, loc.set, loc.index, 0}, at);
    ++core_.stats().reads;
    return VaultAccess{r.completion, ss.read_block(BlockLocation{loc.set, 0, loc.index}), false};
}

VaultAccess FlatRamVault::write(uint64_t offset, const Block& data, const Block& mask, Cycle at) {
    const FlatLocation loc = decompose_flat(offset, core_.config());
    Superset& ss = core_.ensure(loc.bank, loc.superset, SenseRef::Read, PortMode::RowIn, at);
    const uint64_t stalls = core_.stats().stalls;
    const Cycle t = core_.admit_blocking(loc.bank, loc.superset, at);
    const IssueResult r =
        core_.issue(CommandKind::Write, {0, loc.bank, loc.superset, loc.set, loc.index, 0}, t);
    ss.write_block(BlockLocation{loc.set, 0, loc.index}, data, mask);
    ++core_.stats().writes;
    ++core_.stats().data_block_writes;
    return VaultAccess{r.completion, {}, core_.stats().stalls != stalls};
}

}  // namespace monarch
