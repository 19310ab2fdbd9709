#include "relaynet/harness.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <ostream>
#include <thread>

#include <json.hpp>

#include "relaynet/rng.hpp"
#include "relaynet/scenario.hpp"

namespace relaynet {

namespace {

constexpr std::uint64_t kSampleStream = 0x73616d70ULL;

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

// Config text with the fields the grouping never reads reset, so grid points
// that differ only in budgets or the power model share one group set.
std::string grouping_key(ScenarioConfig cfg) {
    const ScenarioConfig d;
    cfg.P_max_B = d.P_max_B;
    cfg.P_max_R = d.P_max_R;
    cfg.P_C_B = d.P_C_B;
    cfg.P_C_R = d.P_C_R;
    cfg.xi_B = d.xi_B;
    cfg.xi_R = d.xi_R;
    cfg.epsilon = d.epsilon;
    cfg.max_iterations = d.max_iterations;
    cfg.initial_price = d.initial_price;
    return format_config(cfg);
}

SolveResult run_algorithm(Algorithm a, const ScenarioConfig& cfg, const GroupSet& gs, std::uint64_t seed,
                          std::vector<long> start = {}) {
    SolveOptions opt;
    opt.keep_trace = false;
    opt.start = std::move(start);
    switch (a) {
    case Algorithm::SEM: return solve_sem(cfg, gs.per_subcarrier, opt);
    case Algorithm::ESEM: return solve_esem(cfg, gs.per_subcarrier, opt);
    case Algorithm::RGEPA: return rg_epa(cfg, gs.per_subcarrier, seed);
    }
    throw InputError("unknown algorithm");
}

// Selection of `r` carried over to the group tables of `to`.
std::vector<long> carry_over(const SolveResult& r, const GroupSet& from, const GroupSet& to) {
    std::vector<long> sel(r.subcarriers.size(), -1);
    for (std::size_t n = 0; n < sel.size(); ++n) {
        const long j = r.subcarriers[n].group;
        if (j >= 0)
            sel[n] = find_covering_group(to.per_subcarrier[n], from.per_subcarrier[n], static_cast<std::size_t>(j));
    }
    return sel;
}

double objective(Algorithm a, double se, double ese) { return a == Algorithm::ESEM ? ese : se; }

void run_parallel(std::size_t tasks, int workers, const std::function<void(std::size_t)>& fn) {
    const auto w = static_cast<std::size_t>(std::max(1, workers));
    if (w == 1 || tasks <= 1) {
        for (std::size_t i = 0; i < tasks; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex mu;
    std::exception_ptr err;
    std::size_t err_task = tasks;
    auto body = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= tasks) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(mu);
                if (i < err_task) {
                    err_task = i;
                    err = std::current_exception();
                }
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t k = 0; k < std::min(w, tasks); ++k) pool.emplace_back(body);
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

} // namespace

void SweepSpec::validate() const {
    if (samples < 1) throw InputError("samples must be at least 1");
    if (algorithms.empty()) throw InputError("at least one algorithm is required");
    for (const auto& a : axes) {
        if (!is_config_key(a.name)) throw InputError("unknown sweep axis '" + a.name + "'");
        if (a.values.empty()) throw InputError("sweep axis '" + a.name + "' has no values");
    }
}

std::uint64_t sample_seed(std::uint64_t root, int sample) {
    return derive_seed(root, kSampleStream, static_cast<std::uint64_t>(sample));
}

std::vector<ScenarioConfig> expand_grid(const SweepSpec& spec, const ScenarioConfig& base,
                                        std::vector<std::vector<std::string>>* labels) {
    std::vector<ScenarioConfig> out;
    std::vector<std::vector<std::string>> names;
    std::vector<std::size_t> idx(spec.axes.size(), 0);
    for (;;) {
        ScenarioConfig cfg = base;
        std::vector<std::string> lab;
        bool antennas = false;
        for (std::size_t a = 0; a < spec.axes.size(); ++a) {
            const auto& axis = spec.axes[a];
            set_field(cfg, axis.name, axis.values[idx[a]]);
            lab.push_back(axis.values[idx[a]]);
            antennas = antennas || axis.name == "N_B" || axis.name == "N_R";
        }
        if (antennas) cfg.apply_power_model();
        cfg.validate();
        out.push_back(cfg);
        names.push_back(std::move(lab));
        // Odometer increment, last axis fastest.
        std::size_t a = spec.axes.size();
        while (a > 0 && ++idx[a - 1] == spec.axes[a - 1].values.size()) idx[--a] = 0;
        if (a == 0) break;
    }
    if (labels) *labels = std::move(names);
    return out;
}

double slackness(const SolveResult& r, const ScenarioConfig& cfg) {
    double s = std::abs(r.duals.lambda_t1 * (cfg.P_max_B - r.used.bs_t1) / cfg.P_max_B);
    s = std::max(s, std::abs(r.duals.lambda_t2 * (cfg.P_max_B - r.used.bs_t2) / cfg.P_max_B));
    for (std::size_t m = 0; m < r.duals.nu.size() && m < r.used.rn.size(); ++m)
        s = std::max(s, std::abs(r.duals.nu[m] * (cfg.P_max_R - r.used.rn[m]) / cfg.P_max_R));
    return s;
}

double overshoot(const SolveResult& r, const ScenarioConfig& cfg) {
    double o = std::max(0.0, (r.used.bs_t1 - cfg.P_max_B) / cfg.P_max_B);
    o = std::max(o, (r.used.bs_t2 - cfg.P_max_B) / cfg.P_max_B);
    for (double u : r.used.rn) o = std::max(o, (u - cfg.P_max_R) / cfg.P_max_R);
    return o;
}

double mean_of(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double s = 0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double standard_error(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double ss = 0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

std::vector<PointSummary> summarize(const SweepSpec& spec, const std::vector<std::vector<std::string>>& labels,
                                    const std::vector<SampleRecord>& records) {
    const std::size_t A = spec.algorithms.size();
    const auto S = static_cast<std::size_t>(spec.samples);
    std::vector<PointSummary> rows;
    for (std::size_t p = 0; p < labels.size(); ++p) {
        for (std::size_t a = 0; a < A; ++a) {
            PointSummary row;
            row.axis_values = labels[p];
            row.algorithm = spec.algorithms[a];
            std::vector<double> se, ese, groups, groups_ref, obj_ref, iters, conv;
            for (std::size_t s = 0; s < S; ++s) {
                const SampleRecord& r = records[(p * S + s) * A + a];
                if (r.failed) {
                    ++row.failures;
                    continue;
                }
                se.push_back(r.se);
                ese.push_back(r.ese);
                groups.push_back(r.groups);
                groups_ref.push_back(r.groups_ref);
                obj_ref.push_back(objective(r.algorithm, r.se_ref, r.ese_ref));
                iters.push_back(r.iterations);
                conv.push_back(r.converged ? 1.0 : 0.0);
            }
            row.count = static_cast<int>(se.size());
            row.mean_se = mean_of(se);
            row.se_se = standard_error(se);
            row.mean_ese = mean_of(ese);
            row.se_ese = standard_error(ese);
            row.mean_iterations = mean_of(iters);
            row.converged_fraction = mean_of(conv);
            if (spec.grouping == GroupingAlgorithm::ESGA) {
                row.mean_groups_esga = mean_of(groups);
                if (spec.reference) row.mean_groups_ocga = mean_of(groups_ref);
                row.has_gap = true;
                row.gap = 0.0;
            } else {
                row.mean_groups_ocga = mean_of(groups);
                if (spec.reference) {
                    row.mean_groups_esga = mean_of(groups_ref);
                    const double ref = mean_of(obj_ref);
                    const double own = objective(row.algorithm, row.mean_se, row.mean_ese);
                    row.has_gap = ref > 0;
                    row.gap = ref > 0 ? own / ref - 1.0 : 0.0;
                }
            }
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

SweepResult run_sweep(const SweepSpec& spec, const ScenarioConfig& base) {
    spec.validate();
    std::vector<std::vector<std::string>> labels;
    const std::vector<ScenarioConfig> points = expand_grid(spec, base, &labels);

    std::vector<std::vector<std::size_t>> classes;
    std::map<std::string, std::size_t> class_of;
    for (std::size_t p = 0; p < points.size(); ++p) {
        const auto [it, fresh] = class_of.emplace(grouping_key(points[p]), classes.size());
        if (fresh) classes.emplace_back();
        classes[it->second].push_back(p);
    }

    const std::size_t A = spec.algorithms.size();
    const auto S = static_cast<std::size_t>(spec.samples);
    std::vector<SampleRecord> records(points.size() * S * A);

    const bool other = spec.reference;
    const GroupingAlgorithm other_algo =
        spec.grouping == GroupingAlgorithm::ESGA ? GroupingAlgorithm::OCGA : GroupingAlgorithm::ESGA;

    run_parallel(classes.size() * S, spec.workers, [&](std::size_t task) {
        const auto& cls = classes[task / S];
        const int s = static_cast<int>(task % S);
        const std::uint64_t seed = sample_seed(spec.seed, s);
        const ScenarioConfig& cfg0 = points[cls.front()];
        const Topology topo = generate_topology(cfg0, seed);
        const ChannelSet ch = sample_channels(cfg0, topo, seed);

        bool failed = false;
        GroupSet main, ref;
        try {
            main = build_group_sets(ch, cfg0, spec.grouping);
            if (other) ref = build_group_sets(ch, cfg0, other_algo);
        } catch (const GroupBudgetError&) {
            failed = true;
        }

        for (std::size_t p : cls) {
            const ScenarioConfig& cfg = points[p];
            for (std::size_t a = 0; a < A; ++a) {
                SampleRecord& r = records[(p * S + static_cast<std::size_t>(s)) * A + a];
                r.point = p;
                r.sample = s;
                r.seed = seed;
                r.algorithm = spec.algorithms[a];
                r.failed = failed;
                if (failed) continue;
                // The exhaustive side also starts from the other side's allocation.
                const bool ref_first = other && spec.grouping == GroupingAlgorithm::ESGA;
                SolveResult rr;
                if (ref_first) rr = run_algorithm(r.algorithm, cfg, ref, seed);
                const SolveResult res = run_algorithm(r.algorithm, cfg, main, seed,
                                                      ref_first ? carry_over(rr, ref, main) : std::vector<long>{});
                if (other && !ref_first) rr = run_algorithm(r.algorithm, cfg, ref, seed, carry_over(res, main, ref));
                r.se = res.se;
                r.ese = res.ese;
                r.iterations = res.iterations;
                r.converged = res.converged;
                r.groups = main.mean_groups();
                r.slackness = slackness(res, cfg);
                r.overshoot = overshoot(res, cfg);
                if (other) {
                    r.groups_ref = ref.mean_groups();
                    r.se_ref = rr.se;
                    r.ese_ref = rr.ese;
                }
            }
        }
    });

    SweepResult out;
    for (const auto& a : spec.axes) out.axis_names.push_back(a.name);
    out.grouping = spec.grouping;
    out.rows = summarize(spec, labels, records);
    if (spec.keep_records) out.records = std::move(records);
    return out;
}

std::vector<GroupingComparison> compare_grouping(const ScenarioConfig& base, const std::vector<double>& alphas,
                                                 int samples, std::uint64_t seed, int workers) {
    SweepSpec spec;
    SweepAxis axis{"alpha", {}};
    for (double a : alphas) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", a);
        axis.values.emplace_back(buf);
    }
    spec.axes.push_back(std::move(axis));
    spec.samples = samples;
    spec.algorithms = {Algorithm::SEM};
    spec.grouping = GroupingAlgorithm::OCGA;
    spec.reference = true;
    spec.seed = seed;
    spec.workers = workers;
    const SweepResult r = run_sweep(spec, base);
    std::vector<GroupingComparison> out;
    for (std::size_t i = 0; i < r.rows.size(); ++i) {
        const auto& row = r.rows[i];
        GroupingComparison c;
        c.alpha = alphas[i];
        c.count = row.count;
        c.failures = row.failures;
        c.gap = row.gap;
        c.mean_groups_esga = row.mean_groups_esga;
        c.mean_groups_ocga = row.mean_groups_ocga;
        c.count_ratio = row.mean_groups_esga > 0 ? row.mean_groups_ocga / row.mean_groups_esga : 0.0;
        out.push_back(c);
    }
    return out;
}

void write_csv(std::ostream& os, const SweepResult& r) {
    for (const auto& n : r.axis_names) os << n << ',';
    os << "algorithm,grouping,mean_SE,se_SE,mean_ESE,se_ESE,mean_groups_ESGA,mean_groups_OCGA,gap,failures,samples,"
          "mean_iterations,converged_fraction\n";
    for (const auto& row : r.rows) {
        for (const auto& v : row.axis_values) os << num(parse_quantity(v)) << ',';
        os << to_string(row.algorithm) << ',' << to_string(r.grouping) << ',' << num(row.mean_se) << ','
           << num(row.se_se) << ',' << num(row.mean_ese) << ',' << num(row.se_ese) << ',';
        os << (row.mean_groups_esga >= 0 ? num(row.mean_groups_esga) : "") << ',';
        os << (row.mean_groups_ocga >= 0 ? num(row.mean_groups_ocga) : "") << ',';
        os << (row.has_gap ? num(row.gap) : "") << ',' << row.failures << ',' << row.count << ','
           << num(row.mean_iterations) << ',' << num(row.converged_fraction) << '\n';
    }
}

void write_jsonl(std::ostream& os, const SweepResult& r) {
    for (const auto& rec : r.records) {
        nlohmann::ordered_json j;
        j["point"] = rec.point;
        j["sample"] = rec.sample;
        j["seed"] = rec.seed;
        j["algorithm"] = to_string(rec.algorithm);
        j["failed"] = rec.failed;
        j["SE"] = rec.se;
        j["ESE"] = rec.ese;
        j["iterations"] = rec.iterations;
        j["converged"] = rec.converged;
        j["groups"] = rec.groups;
        j["groups_ref"] = rec.groups_ref;
        j["SE_ref"] = rec.se_ref;
        j["ESE_ref"] = rec.ese_ref;
        j["slackness"] = rec.slackness;
        j["overshoot"] = rec.overshoot;
        os << j.dump() << '\n';
    }
}

void write_comparison_csv(std::ostream& os, const std::vector<GroupingComparison>& c) {
    os << "alpha,samples,failures,mean_groups_ESGA,mean_groups_OCGA,count_ratio,gap\n";
    for (const auto& x : c)
        os << num(x.alpha) << ',' << x.count << ',' << x.failures << ',' << num(x.mean_groups_esga) << ','
           << num(x.mean_groups_ocga) << ',' << num(x.count_ratio) << ',' << num(x.gap) << '\n';
}

} // namespace relaynet
