#pragma once

#include <memory>
#include <string>
#include <vector>

#include "monarch/baseline.hpp"
#include "monarch/config.hpp"
#include "monarch/hopscotch.hpp"
#include "monarch/string_match.hpp"
#include "monarch/system.hpp"

namespace monarch {

inline constexpr const char* kVersion = "1.0.0";

struct StringConfig {
    uint64_t corpus_bytes = 1 << 20;
    std::string corpus_path;  // optional text file instead of the synthetic corpus
    std::vector<std::string> patterns{"monarch", "abc", "xyzzy", "the"};
};

/// A parsed experiment file. Sections:
///   [run]      workload = hashing|string|trace, memory = monarch|<baseline>, seed
///   [monarch]  layout, vaults, banks, supersets, cam_banks, cam_vaults,
///              granularity, M, t_life_years, rotation, always_install,
///              wc_limit, dc_limit, record_snapshots, keep_trace
///   [timing]   interface timing overrides
///   [device]   r_low, r_high, v_read, n_w
///   [l3]       bytes, ways, hit_latency
///   [baseline] dram_cache_bytes, dram_cache_ways, refresh_tax, scratch_bytes
///   [hashing]  log2_size, window, read_pct, density, ops, zipf_skew, path
///   [string]   corpus_bytes, corpus, patterns
///   [trace]    path
///   [sweep]    section.key = v1, v2, ...
struct Experiment {
    std::string workload = "hashing";
    std::string memory = "monarch";
    uint64_t seed = 1;
    MonarchConfig monarch;
    BaselineConfig baseline;
    HashTableConfig hashing;
    std::string hash_path = "auto";
    StringConfig string;
    std::string trace_path;

    static Experiment from_config(const Config& cfg);
    bool is_monarch() const { return memory == "monarch"; }
};

struct RunOutput {
    Stats stats;
    std::string csv;
    std::string manifest;  // JSON
    std::vector<CommandRecord> commands;
    TimingParams timing;
    SnapshotFile snapshots;
    bool has_snapshots = false;
};

std::unique_ptr<MemoryPort> make_port(const Experiment& e);

RunOutput run_experiment(const Config& cfg);

/// Run manifest: config hash, seed, version, resolved memory and workload.
std::string run_manifest(const Config& cfg, const Experiment& e);

struct SweepAxis {
    std::string section;
    std::string key;
    std::vector<std::string> values;
};

std::vector<SweepAxis> sweep_axes(const Config& cfg);

/// Runs every point of the [sweep] grid (first axis slowest) and returns one
/// CSV with the axis values followed by every counter.
std::string run_sweep(const Config& cfg, std::vector<RunOutput>* runs = nullptr);

}  // namespace monarch
