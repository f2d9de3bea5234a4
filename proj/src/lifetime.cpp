#include <cmath>
#include <numeric>
#include <unordered_map>

#include "monarch/endurance.hpp"
#include "monarch/kernels.hpp"

namespace monarch {

namespace {

struct Placement {
    std::vector<PhysicalAddress> where;        // per group
    std::unordered_map<uint64_t, size_t> ids;  // physical superset index -> group

    size_t group(const PhysicalAddress& a, const Geometry& g) {
        const uint64_t key = superset_index(a.vault, a.bank, a.superset, g);
        auto [it, fresh] = ids.try_emplace(key, where.size());
        if (fresh) where.push_back(a);
        return it->second;
    }
};

PhysicalAddress physical_of(const SupersetWear& w, uint64_t t, bool rotation, const Geometry& g) {
    PhysicalAddress a;
    a.vault = w.vault;
    a.bank = w.bank;
    a.superset = w.superset;
    return rotation ? remap(a, offsets_after(t, g), g) : a;
}

void check_snapshots(const SnapshotFile& f) {
    if (f.epochs.empty()) {
        throw EstimationError("no epochs recorded");
    }
    f.geometry.validate();
    f.device.validate();
    for (const auto& e : f.epochs) {
        if (!(e.seconds >= 0.0) || !std::isfinite(e.seconds)) {
            throw EstimationError("epoch " + std::to_string(e.epoch) + " has invalid duration");
        }
        for (const auto& s : e.supersets) {
            if (s.vault >= f.geometry.vaults || s.bank >= f.geometry.banks ||
                s.superset >= f.geometry.supersets) {
                throw EstimationError("epoch " + std::to_string(e.epoch) +
                                      " names a superset outside the geometry");
            }
        }
    }
}

}  // namespace

LifetimeReport estimate_lifetime(const SnapshotFile& f, const LifetimeOptions& opt) {
    check_snapshots(f);
    const Geometry& g = f.geometry;
    const uint64_t epochs = f.epochs.size();
    const uint64_t period = opt.rotation ? std::lcm(epochs, rotation_period(g)) : epochs;
    if (period > opt.max_replay_epochs) {
        throw EstimationError("replay period of " + std::to_string(period) +
                              " epochs exceeds the configured limit");
    }

    LifetimeReport rep;
    rep.replay_epochs = period;

    double pass_seconds = 0.0;
    double pass_cells = 0.0;
    for (const auto& e : f.epochs) {
        pass_seconds += e.seconds;
        for (const auto& s : e.supersets) pass_cells += static_cast<double>(s.cell_writes);
    }
    rep.replay_period_seconds = pass_seconds * static_cast<double>(period / epochs);
    if (pass_cells > 0.0) {
        if (pass_seconds <= 0.0) {
            throw EstimationError("writes recorded over zero elapsed time");
        }
        const double rate = pass_cells / pass_seconds;
        rep.ideal_seconds = static_cast<double>(f.device.n_w) * static_cast<double>(g.cells()) / rate;
    }

    // Wear of one full superperiod, per physical superset.
    Placement place;
    std::vector<std::vector<const SupersetWear*>> groups;
    for (uint64_t t = 0; t < period; ++t) {
        for (const auto& s : f.epochs[t % epochs].supersets) {
            const size_t gi = place.group(physical_of(s, t, opt.rotation, g), g);
            if (gi == groups.size()) groups.emplace_back();
            groups[gi].push_back(&s);
        }
    }
    std::vector<std::vector<double>> totals;
    const auto policy = opt.parallel ? kernels::Policy::Parallel : kernels::Policy::Serial;
    const kernels::CellMax peak = kernels::accumulate_wear(groups, totals, policy);
    if (peak.value <= 0.0) {
        return rep;  // nothing ever wears out
    }

    const double n_w = static_cast<double>(f.device.n_w);
    double q = std::floor(n_w / peak.value);
    if (q * peak.value >= n_w) q -= 1.0;
    if (q < 0.0) q = 0.0;
    for (auto& cells : totals) {
        for (double& c : cells) c *= q;
    }

    // Walk the next superperiod epoch by epoch until the first cell crosses.
    double elapsed = q * rep.replay_period_seconds;
    for (uint64_t t = 0; t < period; ++t) {
        const WearSnapshot& e = f.epochs[t % epochs];
        double best = std::numeric_limits<double>::infinity();
        size_t best_group = 0;
        size_t best_cell = 0;
        for (const auto& s : e.supersets) {
            const size_t gi = place.group(physical_of(s, t, opt.rotation, g), g);
            std::vector<double>& cells = totals[gi];
            for (unsigned r = 0; r < kArrayDim; ++r) {
                for (unsigned c = 0; c < kArrayDim; ++c) {
                    const double b = static_cast<double>(std::min(s.rows[r], s.cols[c]));
                    if (b <= 0.0) continue;
                    double& cur = cells[size_t{r} * kArrayDim + c];
                    if (cur + b >= n_w) {
                        const double when = e.seconds * (n_w - cur) / b;
                        if (when < best) {
                            best = when;
                            best_group = gi;
                            best_cell = size_t{r} * kArrayDim + c;
                        }
                    }
                    cur += b;
                }
            }
        }
        if (std::isfinite(best)) {
            rep.seconds = elapsed + best;
            rep.limiting = place.where[best_group];
            rep.limiting.row = static_cast<unsigned>(best_cell / kArrayDim);
            rep.limiting.col = static_cast<unsigned>(best_cell % kArrayDim);
            return rep;
        }
        elapsed += e.seconds;
    }
    throw EstimationError("replay ended without reaching the endurance limit");
}

}  // namespace monarch
