#pragma once

#include <cstdint>
#include <iosfwd>
#include <list>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "monarch/superset.hpp"
#include "monarch/types.hpp"
#include "monarch/xam.hpp"

namespace monarch {

/// Interface timing in CPU cycles. Defaults are the in-package RRAM values;
/// tWRITE is taken equal to the configured tWR.
struct TimingParams {
    Cycle tRP = 8;
    Cycle tRAS = 4;
    Cycle tRCD = 4;
    Cycle tCAS = 4;
    Cycle tCWD = 4;
    Cycle tCCD_R = 1;
    Cycle tWRITE = 162;
    Cycle tCCD_W = 162;
    Cycle tRTP = 1;
    Cycle tRRD = 1;
    Cycle tBURST = 4;
    Cycle tMWW = 0;  // 0 disables the write window
    uint64_t M = 0;

    static TimingParams monarch_rram() { return {}; }

    /// Parses `name=value` pairs; names match the fields exactly.
    static TimingParams from_pairs(const std::map<std::string, std::string>& kv);
    static TimingParams from_pairs(const std::map<std::string, std::string>& kv,
                                   TimingParams base);
    static TimingParams load(const std::string& path);
    std::map<std::string, std::string> to_pairs() const;

    void validate() const;
    bool window_bound() const { return tMWW > 0 && M > 0; }
};

/// Width of the write window for `m` writes per block while guaranteeing
/// `t_life_s` seconds with `n_w` endurance, in seconds.
double derive_tmww_seconds(double t_life_s, double n_w, uint64_t m);

/// Same window in clock cycles, rounded up.
Cycle derive_tmww(double t_life_s, double n_w, uint64_t m, double f_clk = kCpuClockHz);

enum class CommandKind {
    Prepare,   // P: toggle a bank between RAM and CAM sensing
    Activate,  // A: toggle a superset's port selector
    Read,      // R: row read with the read reference
    Search,    // S: a read issued to a bank in CAM mode
    Write,     // W: array write
    KeyLoad,   // K: write routed to the key/mask buffers (RowIn, CAM)
};

char kind_code(CommandKind k);
CommandKind kind_from_code(char c);

struct CommandAddress {
    unsigned vault = 0;
    unsigned bank = 0;
    unsigned superset = 0;
    unsigned set = 0;
    unsigned row = 0;
    unsigned col = 0;
};

struct Command {
    CommandKind kind;
    CommandAddress addr;
    Cycle issue_cycle = 0;  // earliest cycle the controller wants it issued
};

struct CommandRecord {
    Cycle cycle;
    CommandKind kind;
    CommandAddress addr;
};

struct IssueResult {
    Cycle accepted;
    Cycle completion;
};

/// Per-vault command scheduler. Issues in order at the earliest legal cycle
/// and applies mode toggles. Rules, all in cycles:
///   P  after every in-flight command of the bank has completed; done at +tRP
///   A  after the bank's last P completes, the superset is idle, and tRRD after
///      the previous A in the vault; done at +tRAS
///   R/S/K/W  after the superset's A (tRCD) and the bank's P; column commands
///      in a vault are spaced by tCCD_R; writes to a bank are spaced by tCCD_W
///   R/S done at +tCAS+tBURST, W at +tCWD+tWRITE, K at +tCWD+tRTP
class Scheduler {
public:
    Scheduler(const TimingParams& t, unsigned vault_id, unsigned banks, bool keep_trace = false);

    IssueResult issue(const Command& cmd);

    /// Cycle at which a Write to (bank, superset) requested at `at` would
    /// issue, without issuing it.
    Cycle write_ready(unsigned bank, unsigned superset, Cycle at) const;

    SenseRef bank_sense(unsigned bank) const { return banks_.at(bank).sense; }
    PortMode port_mode(unsigned bank, unsigned superset) const;

    const std::vector<CommandRecord>& trace() const { return trace_; }
    uint64_t count(CommandKind k) const { return counts_[static_cast<size_t>(k)]; }
    const TimingParams& timing() const { return t_; }

private:
    struct BankState {
        SenseRef sense = SenseRef::Read;
        Cycle mode_ready = 0;
        Cycle busy_until = 0;
        std::optional<Cycle> last_write;
    };
    struct SupersetState {
        PortMode port = PortMode::RowIn;
        Cycle act_ready = 0;
        Cycle busy_until = 0;
        Cycle write_busy = 0;
    };

    SupersetState& superset(unsigned bank, unsigned ss);
    Cycle column_ready(CommandKind k, const BankState& bank, const SupersetState& ss, Cycle t) const;

    TimingParams t_;
    unsigned vault_;
    bool keep_trace_;
    std::vector<BankState> banks_;
    std::unordered_map<uint64_t, SupersetState> supersets_;
    std::optional<Cycle> last_col_;
    std::optional<Cycle> last_act_;
    std::vector<CommandRecord> trace_;
    std::array<uint64_t, 6> counts_{};
};

void write_trace(std::ostream& os, const std::vector<CommandRecord>& trace);
std::vector<CommandRecord> read_trace(std::istream& is);

struct TraceViolation {
    size_t line;
    std::string what;
};

/// Replays a command trace against the timing rules and the mode rules,
/// independently of the scheduler. Records of different vaults may be
/// interleaved; each vault is checked in its own order.
std::vector<TraceViolation> validate_trace(const std::vector<CommandRecord>& trace,
                                           const TimingParams& t);

struct WindowConfig {
    Cycle tmww = 0;
    uint64_t m = 0;
    size_t buffer_entries = 512;
    Cycle miss_penalty = 98;  // one main-memory read for a counter fetch
    bool keep_log = false;

    bool bound() const { return tmww > 0 && m > 0; }
};

struct WindowDecision {
    bool allowed = true;
    Cycle block_until = 0;
    Cycle lookup_penalty = 0;
};

/// Tumbling tMWW windows tracked per superset, with counters living in main
/// memory behind a small LRU buffer.
class WindowTracker {
public:
    explicit WindowTracker(WindowConfig cfg = {});

    /// Admits and counts a block write if the superset has budget left in the
    /// window containing `now`.
    WindowDecision admit(uint64_t superset, Cycle now);

    /// Decision without counting.
    WindowDecision peek(uint64_t superset, Cycle now) const;

    /// Counter-buffer lookup alone; returns the miss penalty.
    Cycle lookup(uint64_t superset) { return cfg_.bound() ? touch_buffer(superset) : 0; }

    /// Budget decision at `now`, counting the write when allowed. Times must
    /// not decrease for a given superset.
    WindowDecision charge(uint64_t superset, Cycle now);

    uint64_t budget() const { return kBlocksPerSuperset * cfg_.m; }
    const WindowConfig& config() const { return cfg_; }
    uint64_t lookups() const { return lookups_; }
    uint64_t misses() const { return misses_; }
    const std::vector<std::pair<uint64_t, Cycle>>& log() const { return log_; }

private:
    struct Counter {
        uint64_t window = 0;
        uint64_t count = 0;
    };
    Cycle touch_buffer(uint64_t superset);

    WindowConfig cfg_;
    std::unordered_map<uint64_t, Counter> counters_;
    std::list<uint64_t> lru_;
    std::unordered_map<uint64_t, std::list<uint64_t>::iterator> lru_pos_;
    uint64_t lookups_ = 0;
    uint64_t misses_ = 0;
    std::vector<std::pair<uint64_t, Cycle>> log_;
};

}  // namespace monarch
