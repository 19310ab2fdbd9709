#include "relaynet/solver.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <tuple>

#include "relaynet/rng.hpp"

namespace relaynet {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLn2 = std::numbers::ln2;

constexpr double kMaxStep = 2.0;
constexpr double kMinStep = 1e-12;
constexpr double kGrow = 1.5;
constexpr int kGrowAfter = 10;
constexpr double kStickyTol = 1e-8; // bits per subcarrier block
constexpr int kMinIterations = 10;
constexpr int kCalmIterations = 3;
constexpr std::size_t kPolishCandidates = 64;
constexpr int kBisectSteps = 400;
constexpr int kDinkelbachSteps = 60;
constexpr int kRestarts = 8;
constexpr double kLevelScales[] = {0.0625, 0.25, 4.0, 16.0};

double level_of(double xi, double mu, double price) {
    const double den = (xi * mu + 2.0 * price) * kLn2;
    return den > 0 ? 1.0 / den : kInf;
}

double price_of(double level, double cap, double xi, double mu) {
    if (level >= cap) return 0.0;
    return std::max(0.0, (1.0 / (level * kLn2) - xi * mu) / 2.0);
}

// Keeps water levels finite while mu is zero: the level never exceeds
// 1e12 budgets.
double price_floor(double pmax) { return 1.0 / (2.0 * kLn2 * 1e12 * pmax); }

double direct_power(double g, double L) { return std::max(0.0, L - 1.0 / g); }

double relay_x(const RelayGain& r, double L1, double Lm) {
    return std::max(0.0, std::min(r.g_br * L1, r.g_ru * Lm) - 1.0);
}

double rate(double g, double p) { return 0.5 * std::log2(1.0 + g * p); }

// log2 gains of one table, laid out per group.
struct LogTable {
    struct Relay {
        double lbr, lru;
        int rn;
    };
    std::vector<std::uint32_t> o1{0}, o2{0}, orl{0};
    std::vector<double> l1, l2;
    std::vector<Relay> rl;

    std::size_t size() const { return o1.size() - 1; }
};

LogTable make_logs(const GroupTable& t) {
    LogTable lt;
    for (std::size_t j = 0; j < t.size(); ++j) {
        for (double g : t.t1(j)) lt.l1.push_back(std::log2(g));
        for (double g : t.t2(j)) lt.l2.push_back(std::log2(g));
        for (const auto& r : t.relay(j)) lt.rl.push_back({std::log2(r.g_br), std::log2(r.g_ru), r.rn});
        lt.o1.push_back(static_cast<std::uint32_t>(lt.l1.size()));
        lt.o2.push_back(static_cast<std::uint32_t>(lt.l2.size()));
        lt.orl.push_back(static_cast<std::uint32_t>(lt.rl.size()));
    }
    return lt;
}

struct LogLevels {
    double a1, a2;
    std::vector<double> ar;
};

LogLevels log_levels(const WaterLevels& L) {
    LogLevels a{std::log2(L.t1), std::log2(L.t2), {}};
    for (double x : L.rn) a.ar.push_back(std::log2(x));
    return a;
}

double score(const LogTable& lt, std::size_t j, const LogLevels& a) {
    double s = 0;
    for (auto k = lt.o1[j]; k < lt.o1[j + 1]; ++k) s += std::max(0.0, lt.l1[k] + a.a1);
    for (auto k = lt.o2[j]; k < lt.o2[j + 1]; ++k) s += std::max(0.0, lt.l2[k] + a.a2);
    for (auto k = lt.orl[j]; k < lt.orl[j + 1]; ++k) {
        const auto& r = lt.rl[k];
        s += std::max(0.0, std::min(r.lbr + a.a1, r.lru + a.ar[static_cast<std::size_t>(r.rn)]));
    }
    return 0.5 * s;
}

void add_use(PowerUse& u, const GroupTable& table, std::size_t j, const GroupPowers& p) {
    for (double x : p.t1) u.bs_t1 += x;
    for (double x : p.br) u.bs_t1 += x;
    for (double x : p.t2) u.bs_t2 += x;
    const auto rl = table.relay(j);
    for (std::size_t e = 0; e < rl.size(); ++e) u.rn[static_cast<std::size_t>(rl[e].rn)] += p.ru[e];
}

void step_price(double& p, PriceStep& st, double used, double pmax, double xi, double mu, double t, int iteration,
                StepRule rule, double restart) {
    if (rule == StepRule::Adaptive) {
        const double g = (used - pmax) / pmax;
        const int dir = g > 0 ? 1 : (g < 0 ? -1 : 0);
        if (dir == 0) {
            st.run = 0;
        } else if (p == 0.0) {
            if (dir > 0) {
                p = restart;
                st = PriceStep{};
                st.dir = dir;
            }
        } else {
            if (st.dir != 0 && dir != st.dir) {
                st.step = std::max(0.5 * st.step, kMinStep);
                st.run = 0;
            } else if (++st.run >= kGrowAfter) {
                st.step = std::min(st.step * kGrow, kMaxStep);
            }
            st.dir = dir;
            p *= std::exp(dir * st.step);
        }
    } else {
        const double delta = (1.0 / pmax) / std::sqrt(static_cast<double>(iteration));
        st.step = delta;
        p = std::max(0.0, p + delta * t * (used - pmax));
    }
    if (mu > 0) {
        if (2.0 * p < 1e-12 * xi * mu) p = 0.0;
    } else {
        p = std::max(p, price_floor(pmax));
    }
}

// ---- Fixed-selection recovery ---------------------------------------------

struct Flat {
    std::vector<double> g1, g2;
    std::vector<std::vector<RelayGain>> by_rn;
    bool has_relay = false;
};

Flat flatten(Groups groups, std::span<const long> sel, int M) {
    Flat f;
    f.by_rn.resize(static_cast<std::size_t>(M));
    for (std::size_t n = 0; n < groups.size(); ++n) {
        if (sel[n] < 0) continue;
        const auto j = static_cast<std::size_t>(sel[n]);
        for (double g : groups[n].t1(j)) f.g1.push_back(g);
        for (double g : groups[n].t2(j)) f.g2.push_back(g);
        for (const auto& r : groups[n].relay(j)) {
            f.by_rn[static_cast<std::size_t>(r.rn)].push_back(r);
            f.has_relay = true;
        }
    }
    return f;
}

// Level with sum [L - 1/g]+ = budget, capped.
double fill_level(const std::vector<double>& gains, double budget, double cap) {
    if (gains.empty()) return cap;
    std::vector<double> inv;
    inv.reserve(gains.size());
    for (double g : gains) inv.push_back(1.0 / g);
    std::sort(inv.begin(), inv.end());
    if (std::isfinite(cap)) {
        double s = 0;
        for (double v : inv) s += std::max(0.0, cap - v);
        if (s <= budget) return cap;
    }
    double prefix = 0;
    double L = 0;
    for (std::size_t k = 1; k <= inv.size(); ++k) {
        prefix += inv[k - 1];
        L = (budget + prefix) / static_cast<double>(k);
        if (k == inv.size() || L <= inv[k]) break;
    }
    return std::min(L, cap);
}

// Largest x in [0, top] with f(x) <= budget, assuming f(0) <= budget < f(top)
// (top may be infinite).
double bisect(const std::function<double(double)>& f, double budget, double top) {
    double lo = 0, hi = top;
    if (!std::isfinite(hi)) {
        hi = 1.0;
        while (f(hi) <= budget) {
            lo = hi;
            hi *= 2.0;
        }
    }
    for (int it = 0; it < kBisectSteps; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (f(mid) <= budget)
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

double relay_use_rn(const std::vector<RelayGain>& rel, double L1, double Lm) {
    double s = 0;
    for (const auto& r : rel) s += relay_x(r, L1, Lm) / r.g_ru;
    return s;
}

// RN level spending `budget`. Each pair uses clamp(Lm - 1/g_ru, 0, (g_br L1 - 1)/g_ru),
// so the total is piecewise linear in Lm and is inverted directly.
double relay_level(const std::vector<RelayGain>& rel, double L1, double budget, double cap) {
    if (rel.empty()) return cap;
    std::vector<std::pair<double, int>> events;
    double sat = 0;
    for (const auto& r : rel) {
        sat = std::max(sat, r.g_br * L1 / r.g_ru);
        if (r.g_br * L1 <= 1.0) continue;
        events.emplace_back(1.0 / r.g_ru, 1);
        events.emplace_back(r.g_br * L1 / r.g_ru, -1);
    }
    const double top = std::min(cap, sat);
    if (relay_use_rn(rel, L1, top) <= budget) return cap;
    std::sort(events.begin(), events.end());
    double x = 0, used = 0;
    int slope = 0;
    for (const auto& [at, delta] : events) {
        const double next = used + slope * (at - x);
        if (slope > 0 && next >= budget) return std::min(top, x + (budget - used) / slope);
        x = at;
        used = next;
        slope += delta;
    }
    return top;
}

double bs_t1_use(const Flat& f, const ScenarioConfig& cfg, double L1, double capR) {
    double s = 0;
    for (double g : f.g1) s += direct_power(g, L1);
    for (const auto& rel : f.by_rn) {
        if (rel.empty()) continue;
        const double Lm = relay_level(rel, L1, cfg.P_max_R, capR);
        for (const auto& r : rel) s += relay_x(r, L1, Lm) / r.g_br;
    }
    return s;
}

WaterLevels levels_for(const Flat& f, const ScenarioConfig& cfg, double mu) {
    const double capB = mu > 0 ? 1.0 / (cfg.xi_B * mu * kLn2) : kInf;
    const double capR = mu > 0 ? 1.0 / (cfg.xi_R * mu * kLn2) : kInf;
    WaterLevels L;
    L.t2 = fill_level(f.g2, cfg.P_max_B, capB);
    if (f.g1.empty() && !f.has_relay) {
        L.t1 = capB;
    } else if (bs_t1_use(f, cfg, capB, capR) <= cfg.P_max_B) {
        L.t1 = capB;
    } else {
        L.t1 = bisect([&](double L1) { return bs_t1_use(f, cfg, L1, capR); }, cfg.P_max_B, capB);
    }
    L.rn.resize(f.by_rn.size());
    for (std::size_t m = 0; m < f.by_rn.size(); ++m) L.rn[m] = relay_level(f.by_rn[m], L.t1, cfg.P_max_R, capR);
    return L;
}

struct FlatValue {
    double rate = 0;
    double p_total = 0;
};

FlatValue flat_value(const Flat& f, const ScenarioConfig& cfg, const WaterLevels& L) {
    FlatValue v;
    PowerUse u;
    u.rn.assign(f.by_rn.size(), 0.0);
    for (double g : f.g1) {
        const double p = direct_power(g, L.t1);
        u.bs_t1 += p;
        v.rate += rate(g, p);
    }
    for (double g : f.g2) {
        const double p = direct_power(g, L.t2);
        u.bs_t2 += p;
        v.rate += rate(g, p);
    }
    for (std::size_t m = 0; m < f.by_rn.size(); ++m) {
        for (const auto& r : f.by_rn[m]) {
            const double x = relay_x(r, L.t1, L.rn[m]);
            u.bs_t1 += x / r.g_br;
            u.rn[m] += x / r.g_ru;
            v.rate += 0.5 * std::log2(1.0 + x);
        }
    }
    v.p_total = total_power(u, cfg);
    return v;
}

struct Recovery {
    WaterLevels L;
    double mu = 0;
    double value = -1;
    double rate = 0;
    double p_total = 0;
};

Recovery recover(const Flat& f, const ScenarioConfig& cfg, bool fractional) {
    Recovery best;
    best.L = levels_for(f, cfg, 0.0);
    const FlatValue v0 = flat_value(f, cfg, best.L);
    best.rate = v0.rate;
    best.p_total = v0.p_total;
    if (!fractional) {
        best.value = v0.rate;
        return best;
    }
    best.value = v0.rate / v0.p_total;
    double mu = best.value;
    for (int it = 0; it < kDinkelbachSteps && mu > 0; ++it) {
        const WaterLevels L = levels_for(f, cfg, mu);
        const FlatValue v = flat_value(f, cfg, L);
        const double r = v.rate / v.p_total;
        if (r > best.value) {
            best.value = r;
            best.L = L;
            best.mu = mu;
            best.rate = v.rate;
            best.p_total = v.p_total;
        }
        if (std::abs(r - mu) <= 1e-15 * r) break;
        mu = r;
    }
    return best;
}

// Per-watt prices of a Lagrangian relaxation at objective weight eta
// (0 for the rate sum): the levels are capped at 1 / (xi * eta * ln 2) and any
// remaining gap to the level is carried by a budget price.
struct Relaxation {
    double c1 = 0, c2 = 0;
    std::vector<double> crn;
    double constant = 0; // budget and circuit terms
};

Relaxation relaxation(const WaterLevels& L, double eta, const ScenarioConfig& cfg) {
    auto coeff = [&](double level, double xi, double& c, double& price, double pmax, double& constant) {
        const double floor = 0.5 * xi * eta;
        c = std::isfinite(level) ? std::max(floor, 1.0 / (2.0 * level * kLn2)) : floor;
        price = c - floor;
        constant += price * pmax;
    };
    Relaxation r;
    double price = 0;
    coeff(L.t1, cfg.xi_B, r.c1, price, cfg.P_max_B, r.constant);
    coeff(L.t2, cfg.xi_B, r.c2, price, cfg.P_max_B, r.constant);
    r.crn.resize(L.rn.size());
    for (std::size_t m = 0; m < L.rn.size(); ++m) coeff(L.rn[m], cfg.xi_R, r.crn[m], price, cfg.P_max_R, r.constant);
    r.constant -= eta * (cfg.P_C_B + cfg.M * cfg.P_C_R);
    return r;
}

// max over p >= 0 of 0.5 log2(1 + g p) - c p.
double direct_term(double g, double c) {
    if (c <= 0) return kInf;
    const double gL = g / (2.0 * c * kLn2);
    return gL > 1.0 ? 0.5 * std::log2(gL) - 0.5 * (1.0 - 1.0 / gL) / kLn2 : 0.0;
}

// Relaxed value of one group: an upper bound on what it can add.
double group_bound(const GroupTable& t, std::size_t j, const Relaxation& r) {
    double s = 0;
    for (double g : t.t1(j)) s += direct_term(g, r.c1);
    for (double g : t.t2(j)) s += direct_term(g, r.c2);
    for (const auto& x : t.relay(j)) {
        // Both hops carry the same SNR x: cost per unit of x is c1/g_br + cm/g_ru.
        const double k = r.c1 / x.g_br + r.crn[static_cast<std::size_t>(x.rn)] / x.g_ru;
        s += direct_term(1.0, k);
    }
    return s;
}

DualState duals_from_levels(const WaterLevels& L, double mu, const ScenarioConfig& cfg) {
    const double capB = mu > 0 ? 1.0 / (cfg.xi_B * mu * kLn2) : kInf;
    const double capR = mu > 0 ? 1.0 / (cfg.xi_R * mu * kLn2) : kInf;
    DualState d;
    d.mu = mu;
    d.lambda_t1 = price_of(L.t1, capB, cfg.xi_B, mu);
    d.lambda_t2 = price_of(L.t2, capB, cfg.xi_B, mu);
    for (double Lm : L.rn) d.nu.push_back(price_of(Lm, capR, cfg.xi_R, mu));
    d.step_nu.resize(d.nu.size());
    return d;
}

using PowerFn = std::function<GroupPowers(std::size_t n, std::size_t j)>;

SolveResult build_result(const ScenarioConfig& cfg, Groups groups, std::span<const long> sel, const PowerFn& powers) {
    SolveResult r;
    r.used.rn.assign(static_cast<std::size_t>(cfg.M), 0.0);
    r.subcarriers.resize(groups.size());
    for (std::size_t n = 0; n < groups.size(); ++n) {
        auto& sc = r.subcarriers[n];
        sc.group = sel[n];
        if (sel[n] < 0) continue;
        const auto j = static_cast<std::size_t>(sel[n]);
        const GroupTable& table = groups[n];
        sc.members = table.members(j);
        const GroupPowers p = powers(n, j);
        const GroupRates c = group_rates(table, j, p);
        add_use(r.used, table, j, p);
        const auto t1 = table.t1(j);
        const auto t2 = table.t2(j);
        const auto rl = table.relay(j);
        for (std::size_t e = 0; e < t1.size(); ++e)
            sc.smcs.push_back({"direct-T1", -1, t1[e], 0.0, p.t1[e], 0.0, c.t1[e]});
        for (std::size_t e = 0; e < t2.size(); ++e)
            sc.smcs.push_back({"direct-T2", -1, 0.0, t2[e], 0.0, p.t2[e], c.t2[e]});
        for (std::size_t e = 0; e < rl.size(); ++e)
            sc.smcs.push_back({"relay-pair", rl[e].rn, rl[e].g_br, rl[e].g_ru, p.br[e], p.ru[e], c.relay[e]});
        sc.rate = c.sum;
        r.rate_sum += c.sum;
    }
    r.p_total = total_power(r.used, cfg);
    r.t = 1.0 / r.p_total;
    r.se = groups.empty() ? 0.0 : r.rate_sum / static_cast<double>(groups.size());
    r.ese = r.rate_sum / r.p_total;
    return r;
}

void check_groups(const ScenarioConfig& cfg, Groups groups) {
    if (static_cast<int>(groups.size()) != cfg.N)
        throw InputError("expected " + std::to_string(cfg.N) + " group tables, got " + std::to_string(groups.size()));
}

// Per-subcarrier argmax at the given levels; the current group is kept unless
// another one is strictly better.
std::vector<long> propose(const std::vector<LogTable>& logs, const LogLevels& a, const std::vector<long>& cur,
                          std::vector<double>* gain) {
    std::vector<long> next(cur);
    if (gain) gain->assign(cur.size(), 0.0);
    for (std::size_t n = 0; n < logs.size(); ++n) {
        const auto& lt = logs[n];
        if (lt.size() == 0) continue;
        std::size_t best = cur[n] >= 0 ? static_cast<std::size_t>(cur[n]) : 0;
        const double base = cur[n] >= 0 ? score(lt, best, a) : -kInf;
        double best_s = cur[n] >= 0 ? base : score(lt, 0, a);
        for (std::size_t j = 0; j < lt.size(); ++j) {
            const double s = score(lt, j, a);
            if (s > best_s) {
                best_s = s;
                best = j;
            }
        }
        next[n] = static_cast<long>(best);
        if (gain) (*gain)[n] = best_s - base;
    }
    return next;
}

struct Ascent {
    std::vector<long> sel;
    Recovery cur;
    int iterations = 0;
    bool converged = false;
};

// Alternates exact price recovery for the current selection with the
// per-subcarrier argmax at the recovered levels. A new selection is kept only
// when it raises the objective; otherwise single-subcarrier moves are tried.
Ascent ascend(const ScenarioConfig& cfg, Groups groups, const std::vector<LogTable>& logs, std::vector<long> sel,
              bool fractional, int first_iteration, int max_iterations,
              const std::function<void(int, const Recovery&)>& record) {
    const std::size_t N = groups.size();
    auto evaluate = [&](const std::vector<long>& s) { return recover(flatten(groups, s, cfg.M), cfg, fractional); };
    Ascent out;
    out.cur = evaluate(sel);
    int it = first_iteration;
    record(it, out.cur);
    while (it < max_iterations) {
        std::vector<double> gain;
        const std::vector<long> next = propose(logs, log_levels(out.cur.L), sel, &gain);
        const double bar = out.cur.value + 1e-13 * std::abs(out.cur.value);
        Recovery rc;
        bool moved = false;
        if (next != sel) {
            rc = evaluate(next);
            moved = rc.value > bar;
        }
        if (moved) {
            sel = next;
        } else if (next != sel) {
            // Single-subcarrier moves, largest score gain first.
            std::vector<std::size_t> order;
            for (std::size_t n = 0; n < N; ++n)
                if (next[n] != sel[n]) order.push_back(n);
            std::stable_sort(order.begin(), order.end(),
                             [&](std::size_t x, std::size_t y) { return gain[x] > gain[y]; });
            for (std::size_t n : order) {
                std::vector<long> trial = sel;
                trial[n] = next[n];
                rc = evaluate(trial);
                if (rc.value > bar) {
                    sel = std::move(trial);
                    moved = true;
                    break;
                }
            }
        }
        if (!moved) {
            // Every single-group change whose relaxed gain can still beat the
            // current value, best bound first.
            const double eta = fractional ? out.cur.value : 0.0;
            const Relaxation rx = relaxation(out.cur.L, eta, cfg);
            std::vector<std::vector<double>> bound(N);
            double total = rx.constant;
            for (std::size_t n = 0; n < N; ++n) {
                bound[n].resize(groups[n].size());
                for (std::size_t j = 0; j < groups[n].size(); ++j) bound[n][j] = group_bound(groups[n], j, rx);
                if (sel[n] >= 0) total += bound[n][static_cast<std::size_t>(sel[n])];
            }
            const double need = (fractional ? 0.0 : out.cur.value) - total;
            const double slack = 1e-9 * (1.0 + std::abs(out.cur.value));
            std::vector<std::tuple<double, std::size_t, std::size_t>> moves;
            for (std::size_t n = 0; n < N; ++n) {
                const double here = sel[n] >= 0 ? bound[n][static_cast<std::size_t>(sel[n])] : 0.0;
                for (std::size_t j = 0; j < groups[n].size(); ++j) {
                    if (static_cast<long>(j) == sel[n] || j == static_cast<std::size_t>(next[n])) continue;
                    const double d = bound[n][j] - here;
                    if (d > need - slack) moves.emplace_back(-d, n, j);
                }
            }
            std::sort(moves.begin(), moves.end());
            for (const auto& [d, n, j] : moves) {
                std::vector<long> trial = sel;
                trial[n] = static_cast<long>(j);
                rc = evaluate(trial);
                if (rc.value > bar) {
                    sel = std::move(trial);
                    moved = true;
                    break;
                }
            }
        }
        if (!moved) {
            out.converged = true;
            break;
        }
        ++it;
        out.cur = rc;
        record(it, out.cur);
    }
    out.sel = std::move(sel);
    out.iterations = it;
    return out;
}

SolveResult solve_exact(const ScenarioConfig& cfg, Groups groups, const SolveOptions& opt, bool fractional) {
    const std::size_t N = groups.size();
    std::vector<LogTable> logs;
    logs.reserve(N);
    for (const auto& t : groups) logs.push_back(make_logs(t));

    std::vector<TraceEntry> trace;
    auto record = [&](int it, const Recovery& rc) {
        if (!opt.keep_trace) return;
        const DualState d = duals_from_levels(rc.L, rc.mu, cfg);
        const double objective = fractional ? rc.rate / rc.p_total : rc.rate;
        trace.push_back({it, d.lambda_t1, d.lambda_t2, d.nu, d.mu, objective});
    };

    const std::vector<long> start =
        propose(logs, log_levels(water_levels(DualState::initial(cfg), cfg)), std::vector<long>(N, -1), nullptr);
    // The fractional solve starts with mu held at zero, settles there, then
    // releases mu from that selection.
    Ascent a = ascend(cfg, groups, logs, start, false, 1, cfg.max_iterations, record);
    if (!opt.start.empty()) {
        if (opt.start.size() != N) throw InputError("start selection needs one entry per subcarrier block");
        std::vector<long> alt = start;
        for (std::size_t n = 0; n < N; ++n) {
            const long j = opt.start[n];
            if (j >= static_cast<long>(groups[n].size())) throw InputError("start selection out of range");
            if (j >= 0) alt[n] = j;
        }
        if (alt != start) {
            std::vector<TraceEntry> kept;
            std::swap(kept, trace);
            Ascent b = ascend(cfg, groups, logs, std::move(alt), false, 1, cfg.max_iterations, record);
            if (b.cur.value > a.cur.value) a = std::move(b);
            else trace = std::move(kept);
        }
    }
    // Restarts from the argmax at rescaled levels of the rate optimum.
    {
        std::set<std::vector<long>> tried{start, a.sel};
        for (double k : kLevelScales) {
            WaterLevels L = a.cur.L;
            L.t1 *= k;
            L.t2 *= k;
            for (double& x : L.rn) x *= k;
            const std::vector<long> alt = propose(logs, log_levels(L), std::vector<long>(N, -1), nullptr);
            if (!tried.insert(alt).second) continue;
            std::vector<TraceEntry> kept = trace;
            Ascent b = ascend(cfg, groups, logs, alt, false, a.iterations + 1, cfg.max_iterations, record);
            tried.insert(b.sel);
            if (b.cur.value > a.cur.value) {
                b.converged = b.converged && a.converged;
                a = std::move(b);
            } else {
                trace = std::move(kept);
            }
        }
    }
    if (fractional) {
        const bool settled = a.converged;
        a = ascend(cfg, groups, logs, std::move(a.sel), true, a.iterations + 1, cfg.max_iterations, record);
        // Restarts from the argmax with every budget price at zero and mu at
        // the best efficiency so far, while that keeps improving.
        std::set<std::vector<long>> tried{a.sel};
        for (int r = 0; r < kRestarts; ++r) {
            DualState capped;
            capped.mu = a.cur.value;
            capped.nu.assign(static_cast<std::size_t>(cfg.M), 0.0);
            const std::vector<long> alt =
                propose(logs, log_levels(water_levels(capped, cfg)), std::vector<long>(N, -1), nullptr);
            if (!tried.insert(alt).second) break;
            std::vector<TraceEntry> kept = trace;
            Ascent b = ascend(cfg, groups, logs, alt, true, a.iterations + 1, cfg.max_iterations, record);
            tried.insert(b.sel);
            if (b.cur.value <= a.cur.value) {
                trace = std::move(kept);
                break;
            }
            a = std::move(b);
        }
        a.converged = a.converged && settled;
    }

    SolveResult r = evaluate_selection(cfg, groups, a.sel, a.cur.L);
    r.duals = duals_from_levels(a.cur.L, a.cur.mu, cfg);
    r.algorithm = fractional ? Algorithm::ESEM : Algorithm::SEM;
    r.iterations = a.iterations;
    r.converged = a.converged;
    r.trace = std::move(trace);
    return r;
}

SolveResult solve_impl(const ScenarioConfig& cfg, Groups groups, const SolveOptions& opt, bool fractional) {
    cfg.validate();
    check_groups(cfg, groups);
    if (opt.rule == StepRule::Exact) return solve_exact(cfg, groups, opt, fractional);
    const std::size_t N = groups.size();
    const auto M = static_cast<std::size_t>(cfg.M);

    std::vector<LogTable> logs;
    logs.reserve(N);
    for (const auto& t : groups) logs.push_back(make_logs(t));

    DualState d = DualState::initial(cfg);
    std::vector<long> sel(N, -1);
    std::map<std::vector<long>, int> last_seen;
    std::vector<TraceEntry> trace;
    double eta_prev = 0;
    int calm = 0;
    int it = 0;
    int clamps = 0;
    bool converged = false;

    for (it = 1; it <= cfg.max_iterations; ++it) {
        const WaterLevels L = water_levels(d, cfg);
        const LogLevels a = log_levels(L);
        PowerUse used;
        used.rn.assign(M, 0.0);
        double C = 0;
        for (std::size_t n = 0; n < N; ++n) {
            const auto& lt = logs[n];
            if (lt.size() == 0) continue;
            std::size_t best = 0;
            double best_s = score(lt, 0, a);
            for (std::size_t j = 1; j < lt.size(); ++j) {
                const double s = score(lt, j, a);
                if (s > best_s) {
                    best_s = s;
                    best = j;
                }
            }
            // Near-ties keep the previous choice so the loop settles at kinks.
            if (sel[n] >= 0 && static_cast<std::size_t>(sel[n]) != best &&
                best_s - score(lt, static_cast<std::size_t>(sel[n]), a) <= kStickyTol)
                best = static_cast<std::size_t>(sel[n]);
            sel[n] = static_cast<long>(best);
            const GroupPowers p = waterfill_levels(L, groups[n], best);
            add_use(used, groups[n], best, p);
            C += group_rates(groups[n], best, p).sum;
        }
        last_seen[sel] = it;

        const double t = fractional ? compute_t(used, cfg) : 1.0;
        const double eta = t * C;
        if (opt.keep_trace) trace.push_back({it, d.lambda_t1, d.lambda_t2, d.nu, d.mu, eta});

        calm = (it > 1 && std::abs(eta - eta_prev) < cfg.epsilon) ? calm + 1 : 0;
        eta_prev = eta;
        if (calm >= kCalmIterations && it >= kMinIterations) {
            converged = true;
            break;
        }
        d = update_duals(d, used, t, C, cfg, it, fractional, opt.rule);
        if (d.mu_clamped) ++clamps;
    }
    const int iterations = std::min(it, cfg.max_iterations);

    // Candidate selections: distinct ones seen in the second half, newest first.
    std::vector<std::pair<int, const std::vector<long>*>> recent;
    for (const auto& [s, when] : last_seen)
        if (2 * when > iterations) recent.emplace_back(when, &s);
    std::sort(recent.begin(), recent.end(), [](const auto& x, const auto& y) { return x.first > y.first; });
    if (recent.size() > kPolishCandidates) recent.resize(kPolishCandidates);

    SolveResult r;
    if (opt.polish && !recent.empty()) {
        Recovery best;
        const std::vector<long>* best_sel = nullptr;
        for (const auto& [when, s] : recent) {
            const Recovery rc = recover(flatten(groups, *s, cfg.M), cfg, fractional);
            if (best_sel == nullptr || rc.value > best.value) {
                best = rc;
                best_sel = s;
            }
        }
        r = evaluate_selection(cfg, groups, *best_sel, best.L);
        r.duals = duals_from_levels(best.L, best.mu, cfg);
    } else {
        r = evaluate_selection(cfg, groups, sel, water_levels(d, cfg));
        r.duals = d;
    }
    r.algorithm = fractional ? Algorithm::ESEM : Algorithm::SEM;
    r.iterations = iterations;
    r.converged = converged;
    r.mu_clamps = clamps;
    r.trace = std::move(trace);
    return r;
}

} // namespace

const char* to_string(Algorithm a) {
    switch (a) {
    case Algorithm::SEM: return "SEM";
    case Algorithm::ESEM: return "ESEM";
    case Algorithm::RGEPA: return "RG-EPA";
    }
    return "?";
}

Algorithm parse_algorithm(const std::string& s) {
    std::string k;
    for (char c : s)
        if (c != '-' && c != '_') k += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (k == "sem") return Algorithm::SEM;
    if (k == "esem") return Algorithm::ESEM;
    if (k == "rgepa") return Algorithm::RGEPA;
    throw InputError("unknown algorithm '" + s + "'");
}

DualState DualState::initial(const ScenarioConfig& cfg) {
    DualState d;
    d.lambda_t1 = d.lambda_t2 = cfg.initial_price;
    d.nu.assign(static_cast<std::size_t>(cfg.M), cfg.initial_price);
    d.step_nu.resize(static_cast<std::size_t>(cfg.M));
    d.mu = 0;
    return d;
}

WaterLevels water_levels(const DualState& d, const ScenarioConfig& cfg) {
    WaterLevels L;
    L.t1 = level_of(cfg.xi_B, d.mu, d.lambda_t1);
    L.t2 = level_of(cfg.xi_B, d.mu, d.lambda_t2);
    for (double nu : d.nu) L.rn.push_back(level_of(cfg.xi_R, d.mu, nu));
    return L;
}

GroupPowers waterfill_levels(const WaterLevels& L, const GroupTable& table, std::size_t j) {
    GroupPowers p;
    for (double g : table.t1(j)) p.t1.push_back(direct_power(g, L.t1));
    for (double g : table.t2(j)) p.t2.push_back(direct_power(g, L.t2));
    for (const auto& r : table.relay(j)) {
        const double Lm = L.rn.at(static_cast<std::size_t>(r.rn));
        const double br = direct_power(r.g_br, L.t1);
        const double ru = direct_power(r.g_ru, Lm);
        // Neither hop carries more than the other can forward.
        p.br.push_back(std::min(br, r.g_ru / r.g_br * ru));
        p.ru.push_back(std::min(ru, r.g_br / r.g_ru * br));
    }
    return p;
}

GroupPowers waterfill_primal(const DualState& d, const GroupTable& table, std::size_t j, const ScenarioConfig& cfg) {
    GroupPowers p = waterfill_levels(water_levels(d, cfg), table, j);
    auto bad = [](const std::vector<double>& v) {
        return std::any_of(v.begin(), v.end(), [](double x) { return !std::isfinite(x); });
    };
    if (bad(p.t1) || bad(p.t2) || bad(p.br) || bad(p.ru))
        throw ConfigError("unbounded water level: at least one positive price is required");
    return p;
}

GroupRates group_rates(const GroupTable& table, std::size_t j, const GroupPowers& p) {
    GroupRates c;
    const auto t1 = table.t1(j);
    const auto t2 = table.t2(j);
    const auto rl = table.relay(j);
    for (std::size_t e = 0; e < t1.size(); ++e) c.t1.push_back(rate(t1[e], p.t1[e]));
    for (std::size_t e = 0; e < t2.size(); ++e) c.t2.push_back(rate(t2[e], p.t2[e]));
    for (std::size_t e = 0; e < rl.size(); ++e)
        c.relay.push_back(std::min(rate(rl[e].g_br, p.br[e]), rate(rl[e].g_ru, p.ru[e])));
    for (double x : c.t1) c.sum += x;
    for (double x : c.t2) c.sum += x;
    for (double x : c.relay) c.sum += x;
    return c;
}

std::size_t select_group(const WaterLevels& L, const GroupTable& table) {
    if (table.empty()) throw InputError("no groups on this subcarrier block");
    std::size_t best = 0;
    double best_sum = group_rates(table, 0, waterfill_levels(L, table, 0)).sum;
    for (std::size_t j = 1; j < table.size(); ++j) {
        const double s = group_rates(table, j, waterfill_levels(L, table, j)).sum;
        if (s > best_sum) {
            best_sum = s;
            best = j;
        }
    }
    return best;
}

std::size_t select_group(const DualState& d, const GroupTable& table, const ScenarioConfig& cfg) {
    return select_group(water_levels(d, cfg), table);
}

double total_power(const PowerUse& p, const ScenarioConfig& cfg) {
    double rn = 0;
    for (double x : p.rn) rn += x;
    return cfg.P_C_B + cfg.M * cfg.P_C_R + 0.5 * (cfg.xi_B * (p.bs_t1 + p.bs_t2) + cfg.xi_R * rn);
}

double compute_t(const PowerUse& p, const ScenarioConfig& cfg) { return 1.0 / total_power(p, cfg); }

DualState update_duals(const DualState& d, const PowerUse& used, double t, double rate_sum, const ScenarioConfig& cfg,
                       int iteration, bool fractional, StepRule rule) {
    if (rule == StepRule::Exact) throw InputError("the exact step needs the selection; use solve_sem or solve_esem");
    DualState n = d;
    n.mu_clamped = false;
    if (fractional) {
        double v = rate_sum + d.lambda_t1 * (cfg.P_max_B - used.bs_t1) + d.lambda_t2 * (cfg.P_max_B - used.bs_t2);
        for (std::size_t m = 0; m < d.nu.size(); ++m) v += d.nu[m] * (cfg.P_max_R - used.rn[m]);
        v *= t;
        n.mu_clamped = v < 0;
        const double target = std::max(0.0, v);
        // Full step while mu moves one way; halved weight after each reversal
        // so the fixed-point iteration cannot 2-cycle at a selection kink.
        PriceStep& w = n.step_mu;
        const int dir = target > d.mu ? 1 : (target < d.mu ? -1 : 0);
        if (dir != 0) {
            if (w.dir != 0 && dir != w.dir) {
                w.step = std::max(0.5 * w.step, kMinStep);
                w.run = 0;
            } else if (++w.run >= kGrowAfter) {
                w.step = std::min(w.step * kGrow, 1.0);
            }
            w.dir = dir;
        }
        n.mu = d.mu + w.step * (target - d.mu);
    } else {
        n.mu = 0;
    }
    step_price(n.lambda_t1, n.step_t1, used.bs_t1, cfg.P_max_B, cfg.xi_B, n.mu, t, iteration, rule,
               cfg.initial_price);
    step_price(n.lambda_t2, n.step_t2, used.bs_t2, cfg.P_max_B, cfg.xi_B, n.mu, t, iteration, rule,
               cfg.initial_price);
    n.step_nu.resize(n.nu.size());
    for (std::size_t m = 0; m < n.nu.size(); ++m)
        step_price(n.nu[m], n.step_nu[m], used.rn.at(m), cfg.P_max_R, cfg.xi_R, n.mu, t, iteration, rule,
                   cfg.initial_price);
    return n;
}

SolveResult evaluate_selection(const ScenarioConfig& cfg, Groups groups, std::span<const long> selection,
                               const WaterLevels& L) {
    if (selection.size() != groups.size()) throw InputError("selection size does not match the group tables");
    return build_result(cfg, groups, selection,
                        [&](std::size_t n, std::size_t j) { return waterfill_levels(L, groups[n], j); });
}

SolveResult solve_sem(const ScenarioConfig& cfg, Groups groups, const SolveOptions& opt) {
    return solve_impl(cfg, groups, opt, false);
}

SolveResult solve_esem(const ScenarioConfig& cfg, Groups groups, const SolveOptions& opt) {
    return solve_impl(cfg, groups, opt, !opt.pin_mu_and_t);
}

SolveResult rg_epa(const ScenarioConfig& cfg, Groups groups, std::uint64_t seed) {
    cfg.validate();
    check_groups(cfg, groups);
    Engine eng(derive_seed(seed, kRandomGroup));
    std::vector<long> sel(groups.size(), -1);
    std::size_t c1 = 0, c2 = 0;
    std::vector<std::size_t> cr(static_cast<std::size_t>(cfg.M), 0);
    for (std::size_t n = 0; n < groups.size(); ++n) {
        if (groups[n].empty()) continue;
        const auto j = static_cast<std::size_t>(eng() % groups[n].size());
        sel[n] = static_cast<long>(j);
        c1 += groups[n].t1(j).size() + groups[n].relay(j).size();
        c2 += groups[n].t2(j).size();
        for (const auto& r : groups[n].relay(j)) ++cr[static_cast<std::size_t>(r.rn)];
    }
    const double p1 = c1 ? cfg.P_max_B / static_cast<double>(c1) : 0.0;
    const double p2 = c2 ? cfg.P_max_B / static_cast<double>(c2) : 0.0;
    SolveResult r = build_result(cfg, groups, sel, [&](std::size_t n, std::size_t j) {
        GroupPowers p;
        p.t1.assign(groups[n].t1(j).size(), p1);
        p.t2.assign(groups[n].t2(j).size(), p2);
        for (const auto& rl : groups[n].relay(j)) {
            p.br.push_back(p1);
            p.ru.push_back(cfg.P_max_R / static_cast<double>(cr[static_cast<std::size_t>(rl.rn)]));
        }
        return p;
    });
    r.algorithm = Algorithm::RGEPA;
    r.converged = true;
    r.duals.nu.assign(static_cast<std::size_t>(cfg.M), 0.0);
    r.duals.step_nu.resize(static_cast<std::size_t>(cfg.M));
    return r;
}

} // namespace relaynet
