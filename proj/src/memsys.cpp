#include "monarch/memsys.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace monarch {

std::string op_name(Op op) {
    switch (op) {
        case Op::Read: return "R";
        case Op::Write: return "W";
        case Op::Search: return "S";
        case Op::Key: return "KEY";
        case Op::Mask: return "MASK";
        case Op::Match: return "MATCH";
    }
    return "?";
}

Op op_from_name(const std::string& s) {
    if (s == "R") return Op::Read;
    if (s == "W") return Op::Write;
    if (s == "S") return Op::Search;
    if (s == "KEY") return Op::Key;
    if (s == "MASK") return Op::Mask;
    if (s == "MATCH") return Op::Match;
    throw ConfigError("unknown request op '" + s + "'");
}

void write_request_trace(std::ostream& os, const std::vector<Request>& reqs) {
    for (const auto& r : reqs) {
        os << r.cycle << ' ' << op_name(r.op) << ' ' << r.addr << ' ' << r.size << ' '
           << (r.critical ? 1 : 0) << '\n';
    }
}

std::vector<Request> read_request_trace(std::istream& is) {
    std::vector<Request> out;
    std::string line;
    size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        Request r;
        std::string op;
        int crit = 1;
        if (!(ls >> r.cycle >> op >> r.addr >> r.size >> crit)) {
            throw ConfigError("request trace line " + std::to_string(lineno) + " is malformed");
        }
        r.op = op_from_name(op);
        r.critical = crit != 0;
        out.push_back(r);
    }
    return out;
}

double Stats::get(const std::string& key) const {
    auto it = values_.find(key);
    return it == values_.end() ? 0.0 : it->second;
}

std::string format_value(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (v == std::floor(v) && std::fabs(v) < 9.0e15) {
        return std::to_string(static_cast<int64_t>(v));
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::string Stats::to_csv() const {
    std::string out = "counter,value\n";
    for (const auto& [k, v] : values_) {
        out += k + "," + format_value(v) + "\n";
    }
    return out;
}

Block BlockStore::read(uint64_t block) const {
    auto it = blocks_.find(block);
    return it == blocks_.end() ? Block{} : it->second;
}

void BlockStore::write(uint64_t block, const Block& data, const Block& mask) {
    Block& b = blocks_[block];
    for (unsigned s = 0; s < kSlices; ++s) {
        b[s] = (b[s] & ~mask[s]) | (data[s] & mask[s]);
    }
}

MemTiming MemTiming::ddr4() { return {}; }

MemTiming MemTiming::in_package_dram() {
    MemTiming t;
    t.tBL = 4;
    t.channels = 8;  // one per vault
    t.banks = 8;
    return t;
}

MemTiming MemTiming::in_package_dram_ideal() {
    MemTiming t = in_package_dram();
    t.ideal = true;
    return t;
}

MemTiming MemTiming::cmos_sram() {
    MemTiming t;
    t.tRCD = 4;
    t.tCAS = 4;
    t.tBL = 4;
    t.tRP = 8;
    t.tCWD = 4;
    t.tWR = 3;
    t.tCCD = 1;
    t.channels = 8;
    t.banks = 8;
    t.row_buffer = false;
    return t;
}

MemTiming MemTiming::rram() {
    MemTiming t = cmos_sram();
    t.tWR = 162;
    return t;
}

TimedMemory::TimedMemory(MemTiming t)
    : t_(t), banks_(size_t{t.channels} * t.banks), last_col_(t.channels) {
    if (t.channels == 0 || t.banks == 0 || t.row_blocks == 0) {
        throw ConfigError("memory timing needs channels, banks and row size");
    }
}

Cycle TimedMemory::access(uint64_t block, bool write, Cycle at) {
    const unsigned ch = static_cast<unsigned>(block % t_.channels);
    const uint64_t rest = block / t_.channels;
    const unsigned bk = static_cast<unsigned>(rest % t_.banks);
    const uint64_t row = rest / t_.banks / t_.row_blocks;
    Bank& b = banks_[size_t{ch} * t_.banks + bk];

    Cycle t = std::max(at, b.ready);
    Cycle prep = 0;
    if (!t_.ideal) {
        if (!t_.row_buffer) {
            prep = t_.tRCD;
            ++activates_;
        } else if (b.open_row && *b.open_row == row) {
            ++row_hits_;
        } else {
            prep = (b.open_row ? t_.tRP : 0) + t_.tRCD;
            ++activates_;
        }
    }
    b.open_row = row;
    Cycle col = t + prep;
    if (last_col_[ch]) col = std::max(col, *last_col_[ch] + t_.tCCD);
    last_col_[ch] = col;
    const Cycle done = write ? col + t_.tCWD + t_.tBL + t_.tWR : col + t_.tCAS + t_.tBL;
    b.ready = done;
    return done;
}

Cycle MainMemory::read(uint64_t block, Cycle at, Block& out) {
    ++reads_;
    out = store_.read(block);
    return timing_.access(block, false, at);
}

Cycle MainMemory::write(uint64_t block, const Block& data, Cycle at) {
    ++writes_;
    store_.write(block, data);
    return timing_.access(block, true, at);
}

L3Model::L3Model(L3Config cfg) : cfg_(cfg) {
    if (cfg.ways == 0 || cfg.sets() == 0) {
        throw ConfigError("L3 needs at least one set and one way");
    }
    sets_.resize(cfg.sets());
}

Block* L3Model::touch(uint64_t block, bool write) {
    Set& s = set_of(block);
    for (auto it = s.begin(); it != s.end(); ++it) {
        if (it->block == block) {
            s.splice(s.begin(), s, it);
            Line& l = s.front();
            if (write) {
                l.dirty = true;
            } else {
                l.read = true;
            }
            return &l.data;
        }
    }
    return nullptr;
}

std::optional<L3Eviction> L3Model::install(uint64_t block, const Block& data) {
    Set& s = set_of(block);
    std::optional<L3Eviction> ev;
    if (s.size() >= cfg_.ways) {
        const Line& v = s.back();
        ev = L3Eviction{v.block, v.data, v.dirty, v.read};
        s.pop_back();
    }
    s.push_front(Line{block, data, false, false});
    return ev;
}

bool L3Model::contains(uint64_t block) const {
    const Set& s = set_of(block);
    return std::any_of(s.begin(), s.end(), [&](const Line& l) { return l.block == block; });
}

std::optional<Block> L3Model::peek(uint64_t block) const {
    for (const Line& l : set_of(block)) {
        if (l.block == block) return l.data;
    }
    return std::nullopt;
}

std::optional<std::pair<bool, bool>> L3Model::flags(uint64_t block) const {
    for (const Line& l : set_of(block)) {
        if (l.block == block) return std::make_pair(l.dirty, l.read);
    }
    return std::nullopt;
}

std::vector<L3Eviction> L3Model::drain() {
    std::vector<L3Eviction> out;
    for (auto& s : sets_) {
        for (const Line& l : s) out.push_back(L3Eviction{l.block, l.data, l.dirty, l.read});
        s.clear();
    }
    std::sort(out.begin(), out.end(), [](const L3Eviction& a, const L3Eviction& b) {
        if (a.dirty != b.dirty) return a.dirty;
        return a.block < b.block;
    });
    return out;
}

}  // namespace monarch
