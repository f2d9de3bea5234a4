#include "monarch/geometry.hpp"

namespace monarch {

void Geometry::validate() const {
    if (vaults == 0 || banks == 0 || supersets == 0) {
        throw ConfigError("geometry dimensions must be positive");
    }
}

AddressOffsets advance(const AddressOffsets& o, const Geometry& g) {
    AddressOffsets n = o;
    n.bank_off = (o.bank_off + kBankStep) % g.banks;
    n.set_off = (o.set_off + kSetStep) % kSetsPerSuperset;
    n.superset_off = (o.superset_off + kSupersetStep) % g.supersets;
    n.vault_rotate_pending = o.vault_rotate_pending + 1;
    if (n.vault_rotate_pending == kVaultStepEvery) {
        n.vault_rotate_pending = 0;
        n.vault_off = (o.vault_off + kVaultStep) % g.vaults;
    }
    return n;
}

AddressOffsets offsets_after(uint64_t rotations, const Geometry& g) {
    AddressOffsets o;
    o.bank_off = static_cast<unsigned>((rotations * kBankStep) % g.banks);
    o.set_off = static_cast<unsigned>((rotations * kSetStep) % kSetsPerSuperset);
    o.superset_off = static_cast<unsigned>((rotations * kSupersetStep) % g.supersets);
    o.vault_off = static_cast<unsigned>(((rotations / kVaultStepEvery) * kVaultStep) % g.vaults);
    o.vault_rotate_pending = static_cast<unsigned>(rotations % kVaultStepEvery);
    return o;
}

PhysicalAddress remap(const PhysicalAddress& a, const AddressOffsets& o, const Geometry& g) {
    PhysicalAddress r = a;
    r.vault = (a.vault + o.vault_off) % g.vaults;
    r.bank = (a.bank + o.bank_off) % g.banks;
    r.superset = (a.superset + o.superset_off) % g.supersets;
    r.set = (a.set + o.set_off) % kSetsPerSuperset;
    return r;
}

PhysicalAddress unmap(const PhysicalAddress& a, const AddressOffsets& o, const Geometry& g) {
    PhysicalAddress r = a;
    r.vault = (a.vault + g.vaults - o.vault_off % g.vaults) % g.vaults;
    r.bank = (a.bank + g.banks - o.bank_off % g.banks) % g.banks;
    r.superset = (a.superset + g.supersets - o.superset_off % g.supersets) % g.supersets;
    r.set = (a.set + kSetsPerSuperset - o.set_off % kSetsPerSuperset) % kSetsPerSuperset;
    return r;
}

uint64_t rotation_period(const Geometry& g) {
    const AddressOffsets zero{};
    AddressOffsets o = advance(zero, g);
    uint64_t n = 1;
    // Bounded by lcm(banks, 8, supersets, 8 * vaults).
    while (!(o == zero)) {
        o = advance(o, g);
        ++n;
    }
    return n;
}

}  // namespace monarch
