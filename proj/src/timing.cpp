#include "monarch/timing.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "monarch/config.hpp"

namespace monarch {

namespace {

struct Field {
    const char* name;
    Cycle TimingParams::*member;
};

constexpr Field kFields[] = {
    {"tRP", &TimingParams::tRP},         {"tRAS", &TimingParams::tRAS},
    {"tRCD", &TimingParams::tRCD},       {"tCAS", &TimingParams::tCAS},
    {"tCWD", &TimingParams::tCWD},       {"tCCD_R", &TimingParams::tCCD_R},
    {"tWRITE", &TimingParams::tWRITE},   {"tCCD_W", &TimingParams::tCCD_W},
    {"tRTP", &TimingParams::tRTP},       {"tRRD", &TimingParams::tRRD},
    {"tBURST", &TimingParams::tBURST},   {"tMWW", &TimingParams::tMWW},
};

uint64_t parse_count(const std::string& name, const std::string& v) {
    try {
        size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size() || d < 0 || d != std::floor(d)) {
            throw ConfigError("");
        }
        return static_cast<uint64_t>(d);
    } catch (const std::exception&) {
        throw ConfigError("timing parameter " + name + ": expected a non-negative integer, got '" +
                          v + "'");
    }
}

}  // namespace

TimingParams TimingParams::from_pairs(const std::map<std::string, std::string>& kv) {
    return from_pairs(kv, TimingParams{});
}

TimingParams TimingParams::from_pairs(const std::map<std::string, std::string>& kv,
                                      TimingParams base) {
    for (const auto& [k, v] : kv) {
        bool known = false;
        for (const auto& f : kFields) {
            if (k == f.name) {
                base.*(f.member) = parse_count(k, v);
                known = true;
            }
        }
        if (k == "M") {
            base.M = parse_count(k, v);
            known = true;
        }
        if (!known) {
            throw ConfigError("unknown timing parameter '" + k + "'");
        }
    }
    base.validate();
    return base;
}

TimingParams TimingParams::load(const std::string& path) {
    const Config cfg = Config::load(path);
    TimingParams t = from_pairs(cfg.section(""));
    if (cfg.has_section("timing")) {
        t = from_pairs(cfg.section("timing"), t);
    }
    return t;
}

std::map<std::string, std::string> TimingParams::to_pairs() const {
    std::map<std::string, std::string> out;
    for (const auto& f : kFields) {
        out[f.name] = std::to_string(this->*(f.member));
    }
    out["M"] = std::to_string(M);
    return out;
}

void TimingParams::validate() const {
    if (tRCD != tRAS) {
        throw ConfigError("tRCD must equal tRAS");
    }
    if (tRRD != tRTP) {
        throw ConfigError("tRRD must equal tRTP");
    }
    if ((tMWW == 0) != (M == 0)) {
        throw ConfigError("tMWW and M must be both zero (unbound) or both positive");
    }
}

double derive_tmww_seconds(double t_life_s, double n_w, uint64_t m) {
    if (!(t_life_s > 0) || !(n_w > 0) || m == 0) {
        throw ConfigError("tMWW needs a positive lifetime, endurance and write count");
    }
    return static_cast<double>(m) * t_life_s / n_w;
}

Cycle derive_tmww(double t_life_s, double n_w, uint64_t m, double f_clk) {
    if (!(f_clk > 0)) {
        throw ConfigError("clock frequency must be positive");
    }
    const double cycles = derive_tmww_seconds(t_life_s, n_w, m) * f_clk;
    return static_cast<Cycle>(std::ceil(cycles - 1e-9));
}

char kind_code(CommandKind k) {
    switch (k) {
        case CommandKind::Prepare: return 'P';
        case CommandKind::Activate: return 'A';
        case CommandKind::Read: return 'R';
        case CommandKind::Search: return 'S';
        case CommandKind::Write: return 'W';
        case CommandKind::KeyLoad: return 'K';
    }
    return '?';
}

CommandKind kind_from_code(char c) {
    switch (c) {
        case 'P': return CommandKind::Prepare;
        case 'A': return CommandKind::Activate;
        case 'R': return CommandKind::Read;
        case 'S': return CommandKind::Search;
        case 'W': return CommandKind::Write;
        case 'K': return CommandKind::KeyLoad;
        default: break;
    }
    throw ConfigError(std::string("unknown command kind '") + c + "'");
}

Scheduler::Scheduler(const TimingParams& t, unsigned vault_id, unsigned banks, bool keep_trace)
    : t_(t), vault_(vault_id), keep_trace_(keep_trace), banks_(banks) {}

Scheduler::SupersetState& Scheduler::superset(unsigned bank, unsigned ss) {
    return supersets_[(uint64_t{bank} << 32) | ss];
}

Cycle Scheduler::column_ready(CommandKind k, const BankState& bank, const SupersetState& ss,
                              Cycle t) const {
    t = std::max({t, bank.mode_ready, ss.act_ready, ss.write_busy});
    if (last_col_) t = std::max(t, *last_col_ + t_.tCCD_R);
    if (k == CommandKind::Write) {
        t = std::max(t, ss.busy_until);
        if (bank.last_write) t = std::max(t, *bank.last_write + t_.tCCD_W);
    }
    return t;
}

Cycle Scheduler::write_ready(unsigned bank, unsigned ss, Cycle at) const {
    if (bank >= banks_.size()) throw AddressError("write to bank " + std::to_string(bank) + " beyond the vault");
    auto it = supersets_.find((uint64_t{bank} << 32) | ss);
    const SupersetState fresh;
    return column_ready(CommandKind::Write, banks_[bank], it == supersets_.end() ? fresh : it->second, at);
}

PortMode Scheduler::port_mode(unsigned bank, unsigned ss) const {
    auto it = supersets_.find((uint64_t{bank} << 32) | ss);
    return it == supersets_.end() ? PortMode::RowIn : it->second.port;
}

IssueResult Scheduler::issue(const Command& cmd) {
    if (cmd.addr.bank >= banks_.size()) {
        throw AddressError("command to bank " + std::to_string(cmd.addr.bank) +
                           " beyond the vault");
    }
    BankState& bank = banks_[cmd.addr.bank];
    Cycle t = cmd.issue_cycle;
    Cycle done = 0;

    switch (cmd.kind) {
        case CommandKind::Prepare: {
            t = std::max(t, bank.busy_until);
            done = t + t_.tRP;
            bank.sense = bank.sense == SenseRef::Read ? SenseRef::Search : SenseRef::Read;
            bank.mode_ready = done;
            bank.busy_until = done;
            break;
        }
        case CommandKind::Activate: {
            SupersetState& ss = superset(cmd.addr.bank, cmd.addr.superset);
            t = std::max({t, bank.mode_ready, ss.busy_until});
            if (last_act_) {
                t = std::max(t, *last_act_ + t_.tRRD);
            }
            done = t + t_.tRAS;
            ss.port = ss.port == PortMode::RowIn ? PortMode::ColumnIn : PortMode::RowIn;
            ss.act_ready = done;
            ss.busy_until = std::max(ss.busy_until, done);
            bank.busy_until = std::max(bank.busy_until, done);
            last_act_ = t;
            break;
        }
        case CommandKind::Read:
        case CommandKind::Search:
        case CommandKind::KeyLoad:
        case CommandKind::Write: {
            SupersetState& ss = superset(cmd.addr.bank, cmd.addr.superset);
            const bool cam = bank.sense == SenseRef::Search;
            if (cmd.kind == CommandKind::Read && cam) {
                throw ModeError("read issued to a bank in CAM mode");
            }
            if (cmd.kind == CommandKind::Search && !cam) {
                throw ModeError("search issued to a bank in RAM mode");
            }
            if (cmd.kind == CommandKind::KeyLoad && !(cam && ss.port == PortMode::RowIn)) {
                throw ModeError("key/mask load needs a RowIn superset in a CAM bank");
            }
            if (cmd.kind == CommandKind::Write && cam && ss.port == PortMode::RowIn) {
                throw ModeError("array write to a RowIn superset in a CAM bank");
            }
            t = column_ready(cmd.kind, bank, ss, t);
            if (cmd.kind == CommandKind::Write) {
                done = t + t_.tCWD + t_.tWRITE;
                bank.last_write = t;
                ss.write_busy = done;
            } else if (cmd.kind == CommandKind::KeyLoad) {
                done = t + t_.tCWD + t_.tRTP;
            } else {
                done = t + t_.tCAS + t_.tBURST;
            }
            ss.busy_until = std::max(ss.busy_until, done);
            bank.busy_until = std::max(bank.busy_until, done);
            last_col_ = t;
            break;
        }
    }

    ++counts_[static_cast<size_t>(cmd.kind)];
    if (keep_trace_) {
        CommandAddress a = cmd.addr;
        a.vault = vault_;
        trace_.push_back(CommandRecord{t, cmd.kind, a});
    }
    return IssueResult{t, done};
}

void write_trace(std::ostream& os, const std::vector<CommandRecord>& trace) {
    for (const auto& r : trace) {
        os << r.cycle << ' ' << kind_code(r.kind) << ' ' << r.addr.vault << ' ' << r.addr.bank
           << ' ' << r.addr.superset << ' ' << r.addr.set << ' ' << r.addr.row << ' '
           << r.addr.col << '\n';
    }
}

std::vector<CommandRecord> read_trace(std::istream& is) {
    std::vector<CommandRecord> out;
    std::string line;
    size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') {
            continue;
        }
        std::istringstream ls(line);
        CommandRecord r{};
        std::string kind;
        if (!(ls >> r.cycle >> kind >> r.addr.vault >> r.addr.bank >> r.addr.superset >>
              r.addr.set >> r.addr.row >> r.addr.col) ||
            kind.size() != 1) {
            throw ConfigError("command trace line " + std::to_string(lineno) + " is malformed");
        }
        r.kind = kind_from_code(kind[0]);
        out.push_back(r);
    }
    return out;
}

WindowTracker::WindowTracker(WindowConfig cfg) : cfg_(cfg) {}

Cycle WindowTracker::touch_buffer(uint64_t superset) {
    ++lookups_;
    if (cfg_.buffer_entries == 0) {
        ++misses_;
        return cfg_.miss_penalty;
    }
    auto it = lru_pos_.find(superset);
    if (it != lru_pos_.end()) {
        lru_.splice(lru_.begin(), lru_, it->second);
        return 0;
    }
    ++misses_;
    lru_.push_front(superset);
    lru_pos_[superset] = lru_.begin();
    if (lru_.size() > cfg_.buffer_entries) {
        lru_pos_.erase(lru_.back());
        lru_.pop_back();
    }
    return cfg_.miss_penalty;
}

WindowDecision WindowTracker::peek(uint64_t superset, Cycle now) const {
    WindowDecision d;
    if (!cfg_.bound()) {
        return d;
    }
    const uint64_t window = now / cfg_.tmww;
    auto it = counters_.find(superset);
    const uint64_t used = (it != counters_.end() && it->second.window == window) ? it->second.count : 0;
    if (used >= budget()) {
        d.allowed = false;
        d.block_until = (window + 1) * cfg_.tmww;
    }
    return d;
}

WindowDecision WindowTracker::admit(uint64_t superset, Cycle now) {
    if (!cfg_.bound()) {
        return {};
    }
    const Cycle penalty = touch_buffer(superset);
    WindowDecision d = charge(superset, now);
    d.lookup_penalty = penalty;
    return d;
}

WindowDecision WindowTracker::charge(uint64_t superset, Cycle now) {
    if (!cfg_.bound()) {
        return {};
    }
    WindowDecision d = peek(superset, now);
    if (!d.allowed) {
        return d;
    }
    Counter& c = counters_[superset];
    const uint64_t window = now / cfg_.tmww;
    if (c.window != window) {
        c.window = window;
        c.count = 0;
    }
    ++c.count;
    if (cfg_.keep_log) {
        log_.emplace_back(superset, now);
    }
    return d;
}

}  // namespace monarch
