#include "monarch/experiment.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace monarch {

namespace {

unsigned get_unsigned(const Config& c, const std::string& s, const std::string& k, unsigned fb) {
    return static_cast<unsigned>(c.get_uint(s, k, fb));
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

Experiment Experiment::from_config(const Config& cfg) {
    Experiment e;
    e.workload = cfg.get("run", "workload", e.workload);
    e.memory = cfg.get("run", "memory", e.memory);
    e.seed = cfg.get_uint("run", "seed", e.seed);
    if (e.workload != "hashing" && e.workload != "string" && e.workload != "trace") {
        throw ConfigError(cfg.origin() + ": run.workload must be hashing, string or trace");
    }

    MonarchConfig& m = e.monarch;
    m.layout = layout_from_name(cfg.get("monarch", "layout", layout_name(m.layout)));
    m.vaults = get_unsigned(cfg, "monarch", "vaults", m.vaults);
    m.banks = get_unsigned(cfg, "monarch", "banks", m.banks);
    m.supersets = get_unsigned(cfg, "monarch", "supersets", m.supersets);
    m.cam_banks = get_unsigned(cfg, "monarch", "cam_banks", m.cam_banks);
    m.cam_vaults = get_unsigned(cfg, "monarch", "cam_vaults", m.cam_vaults);
    const std::string gran = cfg.get("monarch", "granularity", "element");
    if (gran == "element") {
        m.granularity = MatchGranularity::Element;
    } else if (gran == "block") {
        m.granularity = MatchGranularity::Block;
    } else {
        throw ConfigError(cfg.origin() + ": monarch.granularity must be element or block");
    }
    m.device.r_low = cfg.get_double("device", "r_low", m.device.r_low);
    m.device.r_high = cfg.get_double("device", "r_high", m.device.r_high);
    m.device.v_read = cfg.get_double("device", "v_read", m.device.v_read);
    m.device.n_w = cfg.get_uint("device", "n_w", m.device.n_w);

    if (cfg.has_section("timing")) m.timing = TimingParams::from_pairs(cfg.section("timing"));
    m.timing.M = cfg.get_uint("monarch", "M", m.timing.M);
    if (m.timing.M > 0 && m.timing.tMWW == 0) {
        const double years = cfg.get_double("monarch", "t_life_years", 3.0);
        m.timing.tMWW = derive_tmww(years * kSecondsPerYear, static_cast<double>(m.device.n_w),
                                    m.timing.M);
    }
    m.cache.rotation = cfg.get_bool("monarch", "rotation", m.cache.rotation);
    m.cache.always_install = cfg.get_bool("monarch", "always_install", m.cache.always_install);
    m.cache.limits.wc_limit = cfg.get_uint("monarch", "wc_limit", m.cache.limits.wc_limit);
    m.cache.limits.dc_limit = cfg.get_uint("monarch", "dc_limit", m.cache.limits.dc_limit);
    m.cache.record_snapshots = cfg.get_bool("monarch", "record_snapshots", false);
    m.cache.keep_replacement_log = cfg.get_bool("monarch", "keep_replacement_log", false);
    m.keep_command_trace = cfg.get_bool("monarch", "keep_trace", false);

    L3Config l3;
    l3.bytes = cfg.get_uint("l3", "bytes", l3.bytes);
    l3.ways = get_unsigned(cfg, "l3", "ways", l3.ways);
    l3.hit_latency = cfg.get_uint("l3", "hit_latency", l3.hit_latency);
    m.l3 = l3;
    e.baseline.l3 = l3;

    BaselineConfig& b = e.baseline;
    b.dram_cache_bytes = cfg.get_uint("baseline", "dram_cache_bytes", b.dram_cache_bytes);
    b.dram_cache_ways = get_unsigned(cfg, "baseline", "dram_cache_ways", b.dram_cache_ways);
    b.refresh_tax = cfg.get_double("baseline", "refresh_tax", b.refresh_tax);
    b.scratch_bytes = cfg.get_uint("baseline", "scratch_bytes", b.scratch_bytes);
    if (!e.is_monarch()) b.kind = baseline_from_name(e.memory);

    HashTableConfig& h = e.hashing;
    h.log2_size = get_unsigned(cfg, "hashing", "log2_size", h.log2_size);
    h.window = get_unsigned(cfg, "hashing", "window", h.window);
    h.read_pct = cfg.get_double("hashing", "read_pct", h.read_pct);
    h.density = cfg.get_double("hashing", "density", h.density);
    h.ops = cfg.get_uint("hashing", "ops", h.ops);
    h.zipf_skew = cfg.get_double("hashing", "zipf_skew", h.zipf_skew);
    e.hash_path = cfg.get("hashing", "path", e.hash_path);
    if (e.hash_path != "auto" && e.hash_path != "baseline" && e.hash_path != "monarch") {
        throw ConfigError(cfg.origin() + ": hashing.path must be auto, baseline or monarch");
    }
    if (e.workload == "hashing") h.validate();

    e.string.corpus_bytes = cfg.get_uint("string", "corpus_bytes", e.string.corpus_bytes);
    e.string.corpus_path = cfg.get("string", "corpus", "");
    if (cfg.has("string", "patterns")) e.string.patterns = split_list(cfg.get("string", "patterns", ""));

    e.trace_path = cfg.get("trace", "path", "");
    if (e.workload == "trace" && e.trace_path.empty()) {
        throw ConfigError(cfg.origin() + ": trace workload needs trace.path");
    }
    if (e.is_monarch()) m.validate();
    return e;
}

std::unique_ptr<MemoryPort> make_port(const Experiment& e) {
    if (e.is_monarch()) return std::make_unique<MonarchSystem>(e.monarch);
    return std::make_unique<BaselineSystem>(e.baseline);
}

std::string run_manifest(const Config& cfg, const Experiment& e) {
    char hash[17];
    std::snprintf(hash, sizeof hash, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(cfg.canonical())));
    nlohmann::ordered_json j;
    j["config_hash"] = hash;
    j["seed"] = e.seed;
    j["version"] = kVersion;
    j["workload"] = e.workload;
    j["memory"] = e.memory;
    if (e.is_monarch()) {
        j["layout"] = layout_name(e.monarch.layout);
        j["M"] = e.monarch.timing.M;
        j["tMWW_cycles"] = e.monarch.timing.tMWW;
    }
    j["compiler"] = __VERSION__;
    return j.dump(2) + "\n";
}

RunOutput run_experiment(const Config& cfg) {
    const Experiment e = Experiment::from_config(cfg);
    RunOutput out;
    std::unique_ptr<MemoryPort> port = make_port(e);
    auto* mon = dynamic_cast<MonarchSystem*>(port.get());
    const bool monarch_flat = mon && e.monarch.layout == Layout::Flat;

    if (e.workload == "trace") {
        std::ifstream in(e.trace_path);
        if (!in) throw ConfigError("cannot open trace '" + e.trace_path + "'");
        out.stats = replay_trace(*port, read_request_trace(in));
    } else {
        Core core(*port);
        Stats w;
        if (e.workload == "hashing") {
            HashPath path = monarch_flat ? HashPath::Monarch : HashPath::Baseline;
            if (e.hash_path == "baseline") path = HashPath::Baseline;
            if (e.hash_path == "monarch") path = HashPath::Monarch;
            const HashingResult r = run_hashing(core, path, e.hashing, e.seed);
            w.set("workload.lookups", static_cast<double>(r.lookups));
            w.set("workload.lookup_hits", static_cast<double>(r.lookup_hits));
            w.set("workload.inserts", static_cast<double>(r.inserts));
            w.set("workload.rehashes", static_cast<double>(r.rehashes));
            w.set("workload.digest", static_cast<double>(r.answer_digest & 0xffffffffu));
            w.set("workload.invariant_ok", r.invariant_ok ? 1.0 : 0.0);
        } else {
            const std::string text = e.string.corpus_path.empty()
                                         ? synthetic_corpus(e.string.corpus_bytes, e.seed)
                                         : read_file(e.string.corpus_path);
            const StringCorpus corpus = StringCorpus::encode(text);
            const StringMatchResult r = monarch_flat
                                            ? string_match_monarch(core, corpus, e.string.patterns)
                                            : string_match_baseline(core, corpus, e.string.patterns);
            uint64_t matches = 0, digest = 0;
            for (const auto& p : r.positions) {
                matches += p.size();
                for (uint64_t pos : p) digest = fmix64(digest ^ pos);
            }
            w.set("workload.matches", static_cast<double>(matches));
            w.set("workload.digest", static_cast<double>(digest & 0xffffffffu));
            w.set("workload.load_requests", static_cast<double>(r.load_requests));
            w.set("workload.search_requests", static_cast<double>(r.search_requests));
            w.set("workload.searches", static_cast<double>(r.searches));
        }
        const Cycle end = port->finish(core.now());
        out.stats = port->stats();
        for (const auto& [k, v] : w.values()) out.stats.set(k, v);
        out.stats.set("cycles", static_cast<double>(core.now()));
        out.stats.set("cycles_with_drain", static_cast<double>(end));
    }

    if (mon) {
        out.commands = mon->command_trace();
        out.snapshots = mon->snapshots();
        out.has_snapshots = !out.snapshots.epochs.empty();
    }
    out.timing = e.monarch.timing;
    out.csv = out.stats.to_csv();
    out.manifest = run_manifest(cfg, e);
    return out;
}

std::vector<SweepAxis> sweep_axes(const Config& cfg) {
    std::vector<SweepAxis> axes;
    if (!cfg.has_section("sweep")) return axes;
    for (const auto& [name, values] : cfg.section("sweep")) {
        const auto dot = name.find('.');
        if (dot == std::string::npos || dot == 0 || dot + 1 == name.size()) {
            throw ConfigError(cfg.origin() + ": sweep axis '" + name + "' must be section.key");
        }
        SweepAxis a{name.substr(0, dot), name.substr(dot + 1), split_list(values)};
        if (a.values.empty()) throw ConfigError(cfg.origin() + ": sweep axis '" + name + "' is empty");
        axes.push_back(std::move(a));
    }
    return axes;
}

std::string run_sweep(const Config& cfg, std::vector<RunOutput>* runs) {
    const std::vector<SweepAxis> axes = sweep_axes(cfg);
    std::vector<size_t> idx(axes.size(), 0);
    std::string csv;
    bool header = false;
    for (;;) {
        Config point = cfg;
        std::string row;
        for (size_t a = 0; a < axes.size(); ++a) {
            point.set(axes[a].section, axes[a].key, axes[a].values[idx[a]]);
            row += axes[a].values[idx[a]] + ",";
        }
        RunOutput r = run_experiment(point);
        if (!header) {
            for (const auto& a : axes) csv += a.section + "." + a.key + ",";
            std::string names;
            for (const auto& [k, v] : r.stats.values()) names += k + ",";
            names.pop_back();
            csv += names + "\n";
            header = true;
        }
        std::string vals;
        for (const auto& [k, v] : r.stats.values()) vals += format_value(v) + ",";
        vals.pop_back();
        csv += row + vals + "\n";
        if (runs) runs->push_back(std::move(r));

        size_t a = axes.size();
        while (a > 0) {
            --a;
            if (++idx[a] < axes[a].values.size()) break;
            idx[a] = 0;
            if (a == 0) return csv;
        }
        if (axes.empty()) return csv;
    }
}

}  // namespace monarch
