#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "monarch/experiment.hpp"

namespace fs = std::filesystem;
using namespace monarch;

namespace {

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + p.string() + "'");
    out << text;
}

int cmd_run(const std::string& config, const std::string& out_dir) {
    const Config cfg = Config::load(config);
    const RunOutput r = run_experiment(cfg);
    fs::create_directories(out_dir);
    write_text(fs::path(out_dir) / "stats.csv", r.csv);
    write_text(fs::path(out_dir) / "manifest.json", r.manifest);
    if (!r.commands.empty()) {
        std::ofstream t(fs::path(out_dir) / "commands.trace");
        write_trace(t, r.commands);
        std::ofstream tp(fs::path(out_dir) / "timing.cfg");
        for (const auto& [k, v] : r.timing.to_pairs()) tp << k << " = " << v << "\n";
    }
    if (r.has_snapshots) {
        std::ofstream s(fs::path(out_dir) / "wear.snap");
        write_snapshots(s, r.snapshots);
    }
    std::cout << r.csv;
    return 0;
}

int cmd_validate(const std::string& trace_path, const std::string& timing_path) {
    const TimingParams t = timing_path.empty() ? TimingParams{} : TimingParams::load(timing_path);
    std::ifstream in(trace_path);
    if (!in) throw ConfigError("cannot open '" + trace_path + "'");
    const auto trace = read_trace(in);
    const auto violations = validate_trace(trace, t);
    for (const auto& v : violations) std::cout << "line " << v.line << ": " << v.what << "\n";
    std::cout << trace.size() << " commands, " << violations.size() << " violations\n";
    return violations.empty() ? 0 : 1;
}

int cmd_lifetime(const std::string& snap_path, bool rotation, bool serial) {
    std::ifstream in(snap_path);
    if (!in) throw ConfigError("cannot open '" + snap_path + "'");
    const SnapshotFile f = read_snapshots(in);
    LifetimeOptions opt;
    opt.rotation = rotation;
    opt.parallel = !serial;
    const LifetimeReport r = estimate_lifetime(f, opt);
    std::cout << "lifetime_years," << format_value(r.years()) << "\n"
              << "ideal_years," << format_value(r.ideal_years()) << "\n"
              << "limiting_vault," << r.limiting.vault << "\n"
              << "limiting_bank," << r.limiting.bank << "\n"
              << "limiting_superset," << r.limiting.superset << "\n"
              << "limiting_row," << r.limiting.row << "\n"
              << "limiting_col," << r.limiting.col << "\n"
              << "replay_epochs," << r.replay_epochs << "\n";
    return 0;
}

int cmd_sweep(const std::string& config, const std::string& out_dir) {
    const Config cfg = Config::load(config);
    if (sweep_axes(cfg).empty()) throw ConfigError(config + ": no [sweep] section");
    const std::string csv = run_sweep(cfg);
    fs::create_directories(out_dir);
    write_text(fs::path(out_dir) / "sweep.csv", csv);
    write_text(fs::path(out_dir) / "manifest.json",
               run_manifest(cfg, Experiment::from_config(cfg)));
    std::cout << csv;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monarch stacked-memory simulator"};
    app.require_subcommand(1);

    std::string config, out_dir = "results", trace, timing, snap;
    bool no_rotation = false, serial = false;

    auto* run = app.add_subcommand("run", "run one experiment config");
    run->add_option("config", config, "experiment config")->required()->check(CLI::ExistingFile);
    run->add_option("-o,--out", out_dir, "results directory");

    auto* val = app.add_subcommand("validate-trace", "check a command trace against the timing rules");
    val->add_option("trace", trace, "command trace")->required()->check(CLI::ExistingFile);
    val->add_option("-t,--timing", timing, "timing parameters file")->check(CLI::ExistingFile);

    auto* life = app.add_subcommand("estimate-lifetime", "replay wear snapshots to end of life");
    life->add_option("snapshots", snap, "snapshot file")->required()->check(CLI::ExistingFile);
    life->add_flag("--no-rotation", no_rotation, "replay without rotary offsets");
    life->add_flag("--serial", serial, "use the serial reference kernel");

    auto* sweep = app.add_subcommand("sweep", "run the [sweep] grid of a config");
    sweep->add_option("config", config, "experiment config")->required()->check(CLI::ExistingFile);
    sweep->add_option("-o,--out", out_dir, "results directory");

    CLI11_PARSE(app, argc, argv);
    try {
        if (*run) return cmd_run(config, out_dir);
        if (*val) return cmd_validate(trace, timing);
        if (*life) return cmd_lifetime(snap, !no_rotation, serial);
        if (*sweep) return cmd_sweep(config, out_dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
