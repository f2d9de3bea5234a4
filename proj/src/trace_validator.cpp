#include <map>
#include <optional>
#include <string>
#include <tuple>

#include "monarch/timing.hpp"

namespace monarch {

namespace {

// Validator-side view of the device. Kept deliberately separate from the
// scheduler: it only checks lower bounds, it never computes issue cycles.
struct VBank {
    bool cam = false;
    Cycle prep_done = 0;
    Cycle last_done = 0;  // completion of the latest command in the bank
    std::optional<Cycle> last_write_issue;
    bool prep_pending_use = false;  // a P with no later command in the bank
};

struct VSuperset {
    bool column_in = false;
    Cycle act_done = 0;
    Cycle last_done = 0;
    Cycle write_done = 0;
    bool act_pending_use = false;
};

struct VVault {
    std::map<unsigned, VBank> banks;
    std::map<std::pair<unsigned, unsigned>, VSuperset> supersets;
    std::optional<Cycle> last_column;
    std::optional<Cycle> last_activate;
    std::optional<Cycle> last_cycle;
};

}  // namespace

std::vector<TraceViolation> validate_trace(const std::vector<CommandRecord>& trace,
                                           const TimingParams& t) {
    std::vector<TraceViolation> bad;
    std::map<unsigned, VVault> vaults;

    for (size_t i = 0; i < trace.size(); ++i) {
        const CommandRecord& r = trace[i];
        VVault& v = vaults[r.addr.vault];
        VBank& b = v.banks[r.addr.bank];
        VSuperset& s = v.supersets[{r.addr.bank, r.addr.superset}];
        const Cycle c = r.cycle;
        auto fail = [&](const std::string& what) {
            bad.push_back({i + 1, std::string(1, kind_code(r.kind)) + " @" + std::to_string(c) +
                                      ": " + what});
        };
        auto need = [&](Cycle bound, const char* rule) {
            if (c < bound) {
                fail(std::string(rule) + " needs cycle >= " + std::to_string(bound));
            }
        };

        switch (r.kind) {
            case CommandKind::Prepare:
                need(b.last_done, "prepare after bank idle");
                if (b.prep_pending_use) {
                    fail("back-to-back prepare with no intervening access");
                }
                b.cam = !b.cam;
                b.prep_done = c + t.tRP;
                b.last_done = std::max(b.last_done, b.prep_done);
                b.prep_pending_use = true;
                break;
            case CommandKind::Activate:
                need(b.prep_done, "activate after tRP");
                need(s.last_done, "activate after superset idle");
                if (v.last_activate) {
                    need(*v.last_activate + t.tRRD, "tRRD");
                }
                if (s.act_pending_use) {
                    fail("back-to-back activate with no intervening access");
                }
                s.column_in = !s.column_in;
                s.act_done = c + t.tRAS;
                s.last_done = std::max(s.last_done, s.act_done);
                b.last_done = std::max(b.last_done, s.act_done);
                s.act_pending_use = true;
                b.prep_pending_use = false;
                v.last_activate = c;
                break;
            default: {
                need(b.prep_done, "column command after tRP");
                need(s.act_done, "column command after tRCD");
                need(s.write_done, "superset write completion");
                if (v.last_column) {
                    need(*v.last_column + t.tCCD_R, "tCCD_R");
                }
                Cycle done = 0;
                if (r.kind == CommandKind::Read) {
                    if (b.cam) fail("read reached a bank sensing for search");
                    done = c + t.tCAS + t.tBURST;
                } else if (r.kind == CommandKind::Search) {
                    if (!b.cam) fail("search reached a bank sensing for read");
                    done = c + t.tCAS + t.tBURST;
                } else if (r.kind == CommandKind::KeyLoad) {
                    if (!b.cam || s.column_in) fail("key/mask load outside RowIn CAM");
                    done = c + t.tCWD + t.tRTP;
                } else {
                    if (b.cam && !s.column_in) fail("array write in RowIn CAM");
                    need(s.last_done, "write after superset idle");
                    if (b.last_write_issue) {
                        need(*b.last_write_issue + t.tCCD_W, "tCCD_W");
                    }
                    done = c + t.tCWD + t.tWRITE;
                    b.last_write_issue = c;
                    s.write_done = done;
                }
                s.last_done = std::max(s.last_done, done);
                b.last_done = std::max(b.last_done, done);
                s.act_pending_use = false;
                b.prep_pending_use = false;
                v.last_column = c;
                break;
            }
        }
        v.last_cycle = c;
    }
    return bad;
}

}  // namespace monarch
