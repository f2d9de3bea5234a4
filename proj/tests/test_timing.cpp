#include <doctest.h>

#include <random>
#include <sstream>

#include "monarch/timing.hpp"

using namespace monarch;

namespace {

Command cmd(CommandKind k, unsigned bank, unsigned ss, Cycle at, unsigned set = 0) {
    Command c{k, {}, at};
    c.addr.bank = bank;
    c.addr.superset = ss;
    c.addr.set = set;
    return c;
}

}  // namespace

TEST_CASE("prepare, activate, search completes after the summed chain") {
    const TimingParams t;
    Scheduler s(t, 0, 4, true);
    const IssueResult p = s.issue(cmd(CommandKind::Prepare, 0, 0, 0));
    const IssueResult a = s.issue(cmd(CommandKind::Activate, 0, 0, 0));
    const IssueResult r = s.issue(cmd(CommandKind::Search, 0, 0, 0));
    CHECK(p.accepted == 0);
    CHECK(a.accepted == t.tRP);
    CHECK(r.accepted == t.tRP + t.tRAS);
    CHECK(r.completion == 8 + 4 + 4 + 4);
    CHECK(validate_trace(s.trace(), t).empty());
}

TEST_CASE("activate then read in RAM mode") {
    const TimingParams t;
    Scheduler s(t, 0, 4);
    s.issue(cmd(CommandKind::Activate, 1, 0, 0));
    s.issue(cmd(CommandKind::Activate, 1, 0, 0));  // back to RowIn
    const IssueResult r = s.issue(cmd(CommandKind::Read, 1, 0, 0));
    CHECK(r.completion == r.accepted + t.tCAS + t.tBURST);
}

TEST_CASE("back-to-back reads are spaced by tCCD_R") {
    const TimingParams t;
    Scheduler s(t, 0, 2);
    const IssueResult r1 = s.issue(cmd(CommandKind::Read, 0, 0, 10));
    const IssueResult r2 = s.issue(cmd(CommandKind::Read, 0, 0, 10));
    CHECK(r1.accepted == 10);
    CHECK(r2.accepted - r1.accepted == t.tCCD_R);
    CHECK(t.tCCD_R == 1);
}

TEST_CASE("write completion and spacing") {
    const TimingParams t;
    Scheduler s(t, 0, 2);
    const IssueResult w1 = s.issue(cmd(CommandKind::Write, 0, 0, 0));
    CHECK(w1.completion == t.tCWD + t.tWRITE);
    const IssueResult w2 = s.issue(cmd(CommandKind::Write, 0, 1, 0));
    CHECK(w2.accepted - w1.accepted >= t.tCCD_W);
    // A write to the other bank is not held by the first bank's write spacing.
    const IssueResult w3 = s.issue(cmd(CommandKind::Write, 1, 0, 0));
    CHECK(w3.accepted < w2.accepted + t.tCCD_W);
}

TEST_CASE("mode toggles and mode errors") {
    Scheduler s(TimingParams{}, 0, 2);
    CHECK(s.bank_sense(0) == SenseRef::Read);
    CHECK(s.port_mode(0, 3) == PortMode::RowIn);
    CHECK_THROWS_AS(s.issue(cmd(CommandKind::Search, 0, 0, 0)), ModeError);
    s.issue(cmd(CommandKind::Prepare, 0, 0, 0));
    CHECK(s.bank_sense(0) == SenseRef::Search);
    CHECK_THROWS_AS(s.issue(cmd(CommandKind::Read, 0, 0, 0)), ModeError);
    s.issue(cmd(CommandKind::KeyLoad, 0, 3, 0));
    CHECK_THROWS_AS(s.issue(cmd(CommandKind::Write, 0, 3, 0)), ModeError);
    s.issue(cmd(CommandKind::Activate, 0, 3, 0));
    CHECK(s.port_mode(0, 3) == PortMode::ColumnIn);
    CHECK_THROWS_AS(s.issue(cmd(CommandKind::KeyLoad, 0, 3, 0)), ModeError);
    CHECK_THROWS_AS(s.issue(cmd(CommandKind::Read, 5, 0, 0)), AddressError);
}

TEST_CASE("key load costs tCWD plus tRTP") {
    const TimingParams t;
    Scheduler s(t, 0, 1);
    s.issue(cmd(CommandKind::Prepare, 0, 0, 0));
    const IssueResult k = s.issue(cmd(CommandKind::KeyLoad, 0, 0, 0));
    CHECK(k.completion - k.accepted == t.tCWD + t.tRTP);
}

TEST_CASE("random legal streams always validate") {
    const TimingParams t;
    std::mt19937_64 rng(9);
    Scheduler s(t, 2, 4, true);
    Cycle now = 0;
    // A controller never toggles a mode twice without using it in between.
    bool prep_unused[4] = {}, act_unused[4][3] = {};
    for (int i = 0; i < 5000; ++i) {
        const unsigned bank = rng() % 4, ss = rng() % 3;
        const bool cam = s.bank_sense(bank) == SenseRef::Search;
        const bool row_in = s.port_mode(bank, ss) == PortMode::RowIn;
        const CommandKind access = cam ? (row_in ? CommandKind::KeyLoad : CommandKind::Search)
                                       : (rng() % 2 ? CommandKind::Read : CommandKind::Write);
        CommandKind k = access;
        const unsigned pick = rng() % 6;
        if (pick == 0 && !prep_unused[bank]) k = CommandKind::Prepare;
        if (pick == 1 && !act_unused[bank][ss]) k = CommandKind::Activate;
        if (k == CommandKind::Prepare) {
            prep_unused[bank] = true;
        } else if (k == CommandKind::Activate) {
            act_unused[bank][ss] = true;
            prep_unused[bank] = false;
        } else {
            act_unused[bank][ss] = false;
            prep_unused[bank] = false;
        }
        now += rng() % 20;
        s.issue(cmd(k, bank, ss, now, rng() % 8));
    }
    const auto v = validate_trace(s.trace(), t);
    CHECK(v.empty());
}

TEST_CASE("the validator rejects hand-made violations") {
    const TimingParams t;
    auto rec = [](Cycle c, CommandKind k, unsigned bank) {
        CommandRecord r{c, k, {}};
        r.addr.bank = bank;
        return r;
    };
    // Search before the prepare has completed.
    CHECK_FALSE(validate_trace({rec(0, CommandKind::Prepare, 0), rec(5, CommandKind::Activate, 0)}, t).empty());
    // Two reads in the same cycle.
    CHECK_FALSE(validate_trace({rec(0, CommandKind::Read, 0), rec(0, CommandKind::Read, 1)}, t).empty());
    // Read to a bank in CAM mode.
    CHECK_FALSE(validate_trace({rec(0, CommandKind::Prepare, 0), rec(20, CommandKind::Read, 0)}, t).empty());
    // Writes to one bank closer than tCCD_W.
    CHECK_FALSE(validate_trace({rec(0, CommandKind::Write, 0), rec(100, CommandKind::Write, 0)}, t).empty());
    CHECK(validate_trace({rec(0, CommandKind::Write, 0), rec(1, CommandKind::Write, 1)}, t).empty());
}

TEST_CASE("trace text roundtrip") {
    Scheduler s(TimingParams{}, 3, 2, true);
    s.issue(cmd(CommandKind::Prepare, 1, 0, 0));
    s.issue(cmd(CommandKind::KeyLoad, 1, 2, 0, 5));
    std::stringstream ss;
    write_trace(ss, s.trace());
    CHECK(ss.str().substr(0, 16) == "0 P 3 1 0 0 0 0\n");
    const auto back = read_trace(ss);
    REQUIRE(back.size() == 2);
    CHECK(back[1].kind == CommandKind::KeyLoad);
    CHECK(back[1].addr.vault == 3);
    CHECK(back[1].addr.set == 5);
    CHECK(back[1].cycle == s.trace()[1].cycle);
}

TEST_CASE("timing file pairs") {
    TimingParams t = TimingParams::from_pairs({{"tWRITE", "200"}, {"tCCD_W", "200"}});
    CHECK(t.tWRITE == 200);
    CHECK(t.tRP == 8);
    CHECK(TimingParams::from_pairs(t.to_pairs()).tWRITE == 200);
    CHECK_THROWS_AS(TimingParams::from_pairs({{"tBOGUS", "1"}}), ConfigError);
    TimingParams bad;
    bad.tRCD = 5;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("write window derivation") {
    const double three_years = 94.6e6;
    CHECK(derive_tmww_seconds(three_years, 1e8, 1) == doctest::Approx(0.946).epsilon(1e-9));
    CHECK(derive_tmww(three_years, 1e8, 1) == static_cast<Cycle>(std::ceil(0.946 * 3.2e9 - 1e-6)));
    CHECK_THROWS_AS(derive_tmww(three_years, 1e8, 0), ConfigError);
    const double ten_years = 10 * 365.0 * 24 * 3600;
    const double want = 3.0 * ten_years * 3.2e9 / 1e8;
    CHECK(static_cast<double>(derive_tmww(ten_years, 1e8, 3)) == doctest::Approx(want).epsilon(1e-9));
    CHECK(want == doctest::Approx(3.03e10).epsilon(0.002));
}

TEST_CASE("window budget is 512 M per superset") {
    WindowConfig w;
    w.tmww = 1'000'000;
    w.m = 3;
    WindowTracker tr(w);
    for (unsigned i = 1; i <= 1536; ++i) REQUIRE(tr.admit(7, 100).allowed);
    const WindowDecision d = tr.admit(7, 100);
    CHECK_FALSE(d.allowed);
    CHECK(d.block_until == 1'000'000);
    CHECK(tr.admit(8, 100).allowed);  // independent budget
    CHECK(tr.admit(7, 1'000'000).allowed);  // next window
}

TEST_CASE("interleaved supersets keep separate budgets") {
    WindowConfig w;
    w.tmww = 50;
    w.m = 1;
    WindowTracker tr(w);
    for (unsigned i = 0; i < 512; ++i) {
        REQUIRE(tr.admit(1, 0).allowed);
        REQUIRE(tr.admit(2, 0).allowed);
    }
    CHECK_FALSE(tr.admit(1, 10).allowed);
    CHECK_FALSE(tr.admit(2, 10).allowed);
}

TEST_CASE("counter buffer misses charge a main-memory read") {
    WindowConfig w;
    w.tmww = 1000;
    w.m = 1;
    w.buffer_entries = 2;
    WindowTracker tr(w);
    CHECK(tr.admit(1, 0).lookup_penalty == w.miss_penalty);
    CHECK(tr.admit(1, 0).lookup_penalty == 0);
    tr.admit(2, 0);
    tr.admit(3, 0);  // evicts 1
    CHECK(tr.admit(1, 0).lookup_penalty == w.miss_penalty);
    CHECK(tr.misses() == 4);
    CHECK(tr.lookups() == 5);
}

TEST_CASE("unbound windows never block") {
    WindowTracker tr;
    for (int i = 0; i < 5000; ++i) REQUIRE(tr.admit(0, 0).allowed);
    CHECK(tr.lookups() == 0);
}
