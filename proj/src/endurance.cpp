#include "monarch/endurance.hpp"

#include <algorithm>
#include <bit>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace monarch {

int msb_index(uint64_t x) { return x == 0 ? -1 : std::bit_width(x) - 1; }

bool wr_flag(const WearCounters& c) {
    if (c.write_count == 0 || c.superset_count == 0) {
        return false;
    }
    return msb_index(c.write_count) >= msb_index(c.superset_count) + 9;
}

WearMonitor::WearMonitor(const Geometry& g, WearLimits limits) : geom_(g), limits_(limits) {}

void WearMonitor::record_write(uint64_t superset_id, bool makes_dirty) {
    ++counters_.write_count;
    SwtEntry& e = swt_[superset_id];
    if (!e.written) {
        e.written = true;
        ++counters_.superset_count;
    }
    if (makes_dirty && !e.dirty) {
        e.dirty = true;
        ++counters_.dirty_count;
    }
}

bool WearMonitor::rotate_due() const {
    return wr_flag(counters_) || counters_.write_count >= limits_.wc_limit ||
           counters_.dirty_count >= limits_.dc_limit;
}

std::optional<std::vector<uint64_t>> WearMonitor::maybe_rotate() {
    if (!rotate_due()) {
        return std::nullopt;
    }
    std::vector<uint64_t> dirty;
    for (const auto& [id, e] : swt_) {
        if (e.dirty) {
            dirty.push_back(id);
        }
    }
    std::sort(dirty.begin(), dirty.end());
    swt_.clear();
    counters_ = {};
    offsets_ = advance(offsets_, geom_);
    ++rotations_;
    return dirty;
}

SwtEntry WearMonitor::swt(uint64_t superset_id) const {
    auto it = swt_.find(superset_id);
    return it == swt_.end() ? SwtEntry{} : it->second;
}

SupersetWear WearRecorder::delta(uint64_t physical_id, const Superset& ss,
                                 const PhysicalAddress& logical) {
    constexpr size_t kArrays = kGridDim * kGridDim;
    Prev& p = prev_[physical_id];
    if (p.rows.empty()) {
        p.rows.assign(kArrays * kArrayDim, 0);
        p.cols.assign(kArrays * kArrayDim, 0);
    }
    SupersetWear w;
    w.vault = logical.vault;
    w.bank = logical.bank;
    w.superset = logical.superset;
    for (unsigned i = 0; i < kGridDim; ++i) {
        for (unsigned j = 0; j < kGridDim; ++j) {
            const XamArray& a = ss.array(i, j);
            const size_t base = (size_t{i} * kGridDim + j) * kArrayDim;
            for (unsigned k = 0; k < kArrayDim; ++k) {
                const uint64_t r = a.row_touches(k);
                const uint64_t c = a.col_touches(k);
                w.rows[k] = std::max(w.rows[k], r - p.rows[base + k]);
                w.cols[k] = std::max(w.cols[k], c - p.cols[base + k]);
                p.rows[base + k] = r;
                p.cols[base + k] = c;
            }
        }
    }
    const uint64_t total = ss.total_writes();
    w.cell_writes = total - p.total;
    p.total = total;
    return w;
}

void write_snapshots(std::ostream& os, const SnapshotFile& f) {
    os << "# monarch wear snapshots v1\n";
    os << "geometry vaults=" << f.geometry.vaults << " banks=" << f.geometry.banks
       << " supersets=" << f.geometry.supersets << '\n';
    os << std::setprecision(17);
    os << "device r_low=" << f.device.r_low << " r_high=" << f.device.r_high
       << " v_read=" << f.device.v_read << " n_w=" << f.device.n_w << '\n';
    for (const auto& e : f.epochs) {
        os << "epoch " << e.epoch << ' ' << e.seconds << ' ' << e.supersets.size() << '\n';
        for (const auto& s : e.supersets) {
            os << "ss " << s.vault << ' ' << s.bank << ' ' << s.superset << ' ' << s.cell_writes;
            for (auto r : s.rows) os << ' ' << r;
            for (auto c : s.cols) os << ' ' << c;
            os << '\n';
        }
    }
}

namespace {

std::string kv_value(const std::string& token, const std::string& key, size_t line) {
    const std::string prefix = key + "=";
    if (token.rfind(prefix, 0) != 0) {
        throw EstimationError("snapshot line " + std::to_string(line) + ": expected " + key);
    }
    return token.substr(prefix.size());
}

}  // namespace

SnapshotFile read_snapshots(std::istream& is) {
    SnapshotFile f;
    std::string line;
    size_t lineno = 0;
    bool have_geom = false;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') {
            continue;
        }
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag == "geometry") {
            std::string v, b, s;
            ls >> v >> b >> s;
            f.geometry.vaults = static_cast<unsigned>(std::stoul(kv_value(v, "vaults", lineno)));
            f.geometry.banks = static_cast<unsigned>(std::stoul(kv_value(b, "banks", lineno)));
            f.geometry.supersets =
                static_cast<unsigned>(std::stoul(kv_value(s, "supersets", lineno)));
            f.geometry.validate();
            have_geom = true;
        } else if (tag == "device") {
            std::string lo, hi, vr, nw;
            ls >> lo >> hi >> vr >> nw;
            f.device.r_low = std::stod(kv_value(lo, "r_low", lineno));
            f.device.r_high = std::stod(kv_value(hi, "r_high", lineno));
            f.device.v_read = std::stod(kv_value(vr, "v_read", lineno));
            f.device.n_w = static_cast<uint64_t>(std::stod(kv_value(nw, "n_w", lineno)));
        } else if (tag == "epoch") {
            WearSnapshot e;
            size_t n = 0;
            if (!(ls >> e.epoch >> e.seconds >> n)) {
                throw EstimationError("snapshot line " + std::to_string(lineno) +
                                      ": malformed epoch header");
            }
            e.supersets.reserve(n);
            f.epochs.push_back(std::move(e));
        } else if (tag == "ss") {
            if (f.epochs.empty()) {
                throw EstimationError("snapshot line " + std::to_string(lineno) +
                                      ": superset record before any epoch");
            }
            SupersetWear s;
            ls >> s.vault >> s.bank >> s.superset >> s.cell_writes;
            for (auto& r : s.rows) ls >> r;
            for (auto& c : s.cols) ls >> c;
            if (!ls) {
                throw EstimationError("snapshot line " + std::to_string(lineno) +
                                      ": truncated superset record");
            }
            f.epochs.back().supersets.push_back(s);
        } else {
            throw EstimationError("snapshot line " + std::to_string(lineno) + ": unknown record '" +
                                  tag + "'");
        }
    }
    if (!have_geom) {
        throw EstimationError("snapshot file has no geometry header");
    }
    return f;
}

}  // namespace monarch
