#include "cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include "relaynet/config.hpp"
#include "relaynet/grouping.hpp"
#include "relaynet/harness.hpp"
#include "relaynet/scenario.hpp"
#include "relaynet/solver.hpp"

namespace relaynet::cli {
namespace {

struct Common {
    std::string config;
    std::vector<std::string> sets;
    std::string out = "-";
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::string grouping = "ocga";
    std::vector<std::string> algorithms;
};

std::pair<std::string, std::string> split_pair(const std::string& text, const char* flag) {
    const auto eq = text.find('=');
    if (eq == std::string::npos || eq == 0) throw InputError(std::string(flag) + " expects key=value, got '" + text + "'");
    return {text.substr(0, eq), text.substr(eq + 1)};
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

GroupingAlgorithm parse_grouping(const std::string& s) {
    std::string k;
    for (char c : s) k += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (k == "esga") return GroupingAlgorithm::ESGA;
    if (k == "ocga") return GroupingAlgorithm::OCGA;
    throw InputError("unknown grouping algorithm '" + s + "'");
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    throw InputError("bad boolean for " + key + ": '" + v + "'");
}

int parse_int(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    int x = 0;
    try {
        x = std::stoi(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != v.size() || v.empty()) throw InputError("bad integer for " + key + ": '" + v + "'");
    return x;
}

// Config and sweep settings after --config, --set and the dedicated flags.
struct Setup {
    ScenarioConfig cfg = ScenarioConfig::table1();
    SweepSpec spec;
};

Setup make_setup(const Common& c) {
    Setup s;
    if (!c.config.empty()) s.cfg = load_config(c.config);
    s.spec.grouping = parse_grouping(c.grouping);
    for (const auto& kv : c.sets) {
        const auto [key, value] = split_pair(kv, "--set");
        if (is_config_key(key)) set_field(s.cfg, key, value);
        else if (key == "samples") s.spec.samples = parse_int(key, value);
        else if (key == "workers") s.spec.workers = parse_int(key, value);
        else if (key == "grouping") s.spec.grouping = parse_grouping(value);
        else if (key == "reference") s.spec.reference = parse_bool(key, value);
        else throw InputError("unknown key '" + key + "'");
    }
    if (c.seed) s.cfg.rng_seed = *c.seed;
    if (c.workers) s.spec.workers = *c.workers;
    s.spec.seed = s.cfg.rng_seed;
    if (!c.algorithms.empty()) {
        s.spec.algorithms.clear();
        for (const auto& a : c.algorithms) s.spec.algorithms.push_back(parse_algorithm(a));
    }
    s.cfg.validate();
    return s;
}

// Writes to the --out target; "-" is the caller's stream.
class Sink {
  public:
    Sink(const std::string& path, std::ostream& fallback) : os_(&fallback) {
        if (path != "-" && !path.empty()) {
            file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
            if (!*file_) throw ConfigError("cannot open output file '" + path + "'");
            os_ = file_.get();
        }
    }
    std::ostream& get() { return *os_; }
    void finish() {
        os_->flush();
        if (!*os_) throw ConfigError("write failed");
    }

  private:
    std::unique_ptr<std::ofstream> file_;
    std::ostream* os_;
};

void add_common(CLI::App* cmd, Common& c, bool algorithms) {
    cmd->add_option("--config", c.config, "Config file (key = value lines)");
    cmd->add_option("--set", c.sets, "Override one field, key=value (repeatable)");
    cmd->add_option("--out", c.out, "Output file, '-' for stdout");
    cmd->add_option("--seed", c.seed, "Root seed");
    cmd->add_option("--workers", c.workers, "Worker threads")->check(CLI::PositiveNumber);
    cmd->add_option("--grouping", c.grouping, "Grouping algorithm: esga or ocga");
    if (algorithms) cmd->add_option("--algorithm", c.algorithms, "sem, esem or rgepa (repeatable)");
}

int do_solve(const Common& c, bool trace, std::ostream& out, std::ostream& err) {
    const Setup s = make_setup(c);
    if (s.spec.algorithms.size() != 1 && !c.algorithms.empty())
        throw InputError("--algorithm: solve takes exactly one algorithm");
    const Algorithm algo = c.algorithms.empty() ? Algorithm::SEM : s.spec.algorithms.front();
    const ScenarioConfig& cfg = s.cfg;
    const Topology topo = generate_topology(cfg, cfg.rng_seed);
    const ChannelSet ch = sample_channels(cfg, topo, cfg.rng_seed);
    const GroupSet gs = build_group_sets(ch, cfg, s.spec.grouping);
    SolveOptions opt;
    opt.keep_trace = trace;
    SolveResult r;
    switch (algo) {
    case Algorithm::SEM: r = solve_sem(cfg, gs.per_subcarrier, opt); break;
    case Algorithm::ESEM: r = solve_esem(cfg, gs.per_subcarrier, opt); break;
    case Algorithm::RGEPA: r = rg_epa(cfg, gs.per_subcarrier, cfg.rng_seed); break;
    }
    Sink sink(c.out, out);
    sink.get() << to_json(r, trace) << '\n';
    sink.finish();
    if (!r.converged) {
        err << "solver did not converge within " << cfg.max_iterations << " iterations\n";
        return kRuntime;
    }
    return kOk;
}

int do_sweep(const Common& c, const std::vector<std::string>& axes, std::optional<int> samples, bool reference,
             const std::string& records, std::ostream& out, std::ostream& err) {
    Setup s = make_setup(c);
    for (const auto& a : axes) {
        const auto [name, values] = split_pair(a, "--axis");
        s.spec.axes.push_back({name, split_list(values)});
    }
    if (samples) s.spec.samples = *samples;
    if (reference) s.spec.reference = true;
    s.spec.keep_records = !records.empty();
    s.spec.validate();

    const SweepResult r = run_sweep(s.spec, s.cfg);
    Sink sink(c.out, out);
    write_csv(sink.get(), r);
    sink.finish();
    if (!records.empty()) {
        Sink rec(records, out);
        write_jsonl(rec.get(), r);
        rec.finish();
    }

    int solves = 0, converged = 0;
    for (const auto& row : r.rows) {
        if (row.count == 0 && row.failures > 0) {
            err << "every sample failed at one grid point (group budget exceeded)\n";
            return kRuntime;
        }
        if (row.algorithm == Algorithm::RGEPA) continue;
        solves += row.count;
        converged += static_cast<int>(row.converged_fraction * row.count + 0.5);
    }
    if (solves > 0 && 2 * converged < solves) {
        err << "only " << converged << " of " << solves << " solves converged\n";
        return kRuntime;
    }
    return kOk;
}

int do_compare(const Common& c, const std::string& alphas, std::optional<int> samples, std::ostream& out) {
    const Setup s = make_setup(c);
    std::vector<double> a;
    for (const auto& v : split_list(alphas)) {
        ScenarioConfig probe = s.cfg;
        set_field(probe, "alpha", v);
        a.push_back(probe.alpha);
    }
    if (a.empty()) throw InputError("--alphas: no values");
    const int n = samples ? *samples : s.spec.samples;
    if (n < 1) throw InputError("--samples must be at least 1");
    const auto rows = compare_grouping(s.cfg, a, n, s.spec.seed, s.spec.workers);
    Sink sink(c.out, out);
    write_comparison_csv(sink.get(), rows);
    sink.finish();
    return kOk;
}

int do_dump(const Common& c, int subcarrier, std::ostream& out) {
    const Setup s = make_setup(c);
    const ScenarioConfig& cfg = s.cfg;
    if (subcarrier < 0 || subcarrier >= cfg.N)
        throw InputError("--subcarrier must be in [0, " + std::to_string(cfg.N - 1) + "]");
    const Topology topo = generate_topology(cfg, cfg.rng_seed);
    const ChannelSet ch = sample_channels(cfg, topo, cfg.rng_seed);
    const CandidateSet cs = enumerate_smcs(ch, cfg, subcarrier);
    const auto groups = s.spec.grouping == GroupingAlgorithm::ESGA ? esga(cs, cfg.alpha, cfg.esga_budget)
                                                                   : ocga(cs, cfg.alpha);
    const GroupTable table = materialize(cs, groups, cfg);
    Sink sink(c.out, out);
    sink.get() << dump_groups_json(cs, table, cfg, subcarrier) << '\n';
    sink.finish();
    return kOk;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Multi-relay MIMO-OFDMA resource allocation"};
    app.name("relaynet");
    app.require_subcommand(1);

    Common solve_c, sweep_c, cmp_c, dump_c;
    bool no_trace = false;
    std::vector<std::string> axes;
    std::optional<int> sweep_samples, cmp_samples;
    bool reference = false;
    std::string records;
    std::string alphas = "0.1,0.2,0.3,0.4,0.5";
    int subcarrier = 0;

    auto* solve = app.add_subcommand("solve", "Solve one channel realization");
    add_common(solve, solve_c, true);
    solve->add_flag("--no-trace", no_trace, "Omit the dual trace");

    auto* sweep = app.add_subcommand("sweep", "Monte Carlo sweep over a parameter grid");
    add_common(sweep, sweep_c, true);
    sweep->add_option("--axis", axes, "Swept field, name=v1,v2,... (repeatable)");
    sweep->add_option("--samples", sweep_samples, "Samples per grid point");
    sweep->add_flag("--reference", reference, "Also solve on the other grouping for the optimality gap");
    sweep->add_option("--records", records, "Per-sample JSON lines file");

    auto* cmp = app.add_subcommand("compare-grouping", "OCGA against ESGA over alpha");
    add_common(cmp, cmp_c, false);
    cmp->add_option("--alphas", alphas, "Comma-separated alpha values");
    cmp->add_option("--samples", cmp_samples, "Samples per alpha");

    auto* dump = app.add_subcommand("dump-groups", "Candidates and groups of one subcarrier block");
    add_common(dump, dump_c, false);
    dump->add_option("--subcarrier", subcarrier, "Subcarrier block index");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? kOk : kUsage;
    }

    try {
        if (*solve) return do_solve(solve_c, !no_trace, out, err);
        if (*sweep) return do_sweep(sweep_c, axes, sweep_samples, reference, records, out, err);
        if (*cmp) return do_compare(cmp_c, alphas, cmp_samples, out);
        return do_dump(dump_c, subcarrier, out);
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        err << "failure: " << e.what() << '\n';
        return kRuntime;
    }
}

} // namespace relaynet::cli
