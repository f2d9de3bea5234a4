#pragma once

#include <cstdint>

#include "monarch/superset.hpp"
#include "monarch/types.hpp"

namespace monarch {

/// Stack geometry. The defaults describe the 8GB stack; desk-scale runs
/// shrink banks and supersets.
struct Geometry {
    unsigned vaults = 8;
    unsigned banks = 64;
    unsigned supersets = 256;

    uint64_t supersets_per_vault() const { return uint64_t{banks} * supersets; }
    uint64_t superset_count() const { return uint64_t{vaults} * supersets_per_vault(); }
    uint64_t blocks_per_vault() const { return supersets_per_vault() * kBlocksPerSuperset; }
    uint64_t vault_bytes() const { return blocks_per_vault() * kBlockBytes; }
    uint64_t bytes() const { return vault_bytes() * vaults; }
    uint64_t cells() const {
        return superset_count() * kGridDim * kGridDim * kArrayDim * kArrayDim;
    }

    void validate() const;
};

/// Decomposed location of a block in the stack.
struct PhysicalAddress {
    unsigned vault = 0;
    unsigned bank = 0;
    unsigned superset = 0;
    unsigned set = 0;
    unsigned row = 0;
    unsigned col = 0;

    bool operator==(const PhysicalAddress&) const = default;
};

/// Rotary wear-leveling offsets.
struct AddressOffsets {
    unsigned bank_off = 0;
    unsigned set_off = 0;
    unsigned vault_off = 0;
    unsigned superset_off = 0;
    unsigned vault_rotate_pending = 0;  // rotates since the last vault step (0..7)

    bool operator==(const AddressOffsets&) const = default;
};

inline constexpr unsigned kBankStep = 1;
inline constexpr unsigned kSetStep = 3;
inline constexpr unsigned kVaultStep = 5;
inline constexpr unsigned kSupersetStep = 7;
inline constexpr unsigned kVaultStepEvery = 8;

/// One rotation: bank+1, set+3, superset+7, and vault+5 on every 8th rotate.
AddressOffsets advance(const AddressOffsets& o, const Geometry& g);

/// Offsets after `n` rotations from zero.
AddressOffsets offsets_after(uint64_t rotations, const Geometry& g);

PhysicalAddress remap(const PhysicalAddress& a, const AddressOffsets& o, const Geometry& g);
PhysicalAddress unmap(const PhysicalAddress& a, const AddressOffsets& o, const Geometry& g);

/// Linear superset index, vault-major.
inline uint64_t superset_index(unsigned vault, unsigned bank, unsigned superset,
                               const Geometry& g) {
    return (uint64_t{vault} * g.banks + bank) * g.supersets + superset;
}

/// Number of rotations after which the offset registers return to zero.
uint64_t rotation_period(const Geometry& g);

}  // namespace monarch
