#include "relaynet/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

namespace relaynet {

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

double parse_number(const std::string& text) {
    const std::string t = trim(text);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
        throw InputError("not a number: '" + text + "'");
    }
    return v;
}

template <typename T = long long>
T parse_integer(const std::string& text) {
    const std::string t = trim(text);
    T v = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
        throw InputError("not an integer: '" + text + "'");
    }
    return v;
}

struct Field {
    const char* name;
    std::function<void(ScenarioConfig&, const std::string&)> set;
    std::function<std::string(const ScenarioConfig&)> get;
};

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

template <typename T>
Field int_field(const char* name, T ScenarioConfig::*member) {
    return {name,
            [member, name](ScenarioConfig& c, const std::string& v) {
                if constexpr (std::is_same_v<T, std::uint64_t>) {
                    if (trim(v).rfind('-', 0) == 0) throw InputError(std::string(name) + " must be non-negative");
                    c.*member = parse_integer<std::uint64_t>(v);
                } else {
                    c.*member = static_cast<T>(parse_integer(v));
                }
            },
            [member](const ScenarioConfig& c) { return std::to_string(c.*member); }};
}

Field real_field(const char* name, double ScenarioConfig::*member) {
    return {name, [member](ScenarioConfig& c, const std::string& v) { c.*member = parse_quantity(v); },
            [member](const ScenarioConfig& c) { return fmt(c.*member); }};
}

const std::vector<Field>& fields() {
    static const std::vector<Field> f = {
        int_field("M", &ScenarioConfig::M),
        int_field("K", &ScenarioConfig::K),
        int_field("N", &ScenarioConfig::N),
        int_field("N_B", &ScenarioConfig::N_B),
        int_field("N_R", &ScenarioConfig::N_R),
        int_field("N_U", &ScenarioConfig::N_U),
        real_field("W", &ScenarioConfig::W),
        real_field("cell_radius", &ScenarioConfig::cell_radius),
        real_field("D_r", &ScenarioConfig::D_r),
        real_field("P_max_B", &ScenarioConfig::P_max_B),
        real_field("P_max_R", &ScenarioConfig::P_max_R),
        real_field("P_C_B", &ScenarioConfig::P_C_B),
        real_field("P_C_R", &ScenarioConfig::P_C_R),
        real_field("xi_B", &ScenarioConfig::xi_B),
        real_field("xi_R", &ScenarioConfig::xi_R),
        real_field("N0", &ScenarioConfig::N0),
        real_field("delta_gamma", &ScenarioConfig::delta_gamma),
        real_field("alpha", &ScenarioConfig::alpha),
        real_field("epsilon", &ScenarioConfig::epsilon),
        int_field("rng_seed", &ScenarioConfig::rng_seed),
        real_field("ue_min_distance", &ScenarioConfig::ue_min_distance),
        real_field("nlos_a", &ScenarioConfig::nlos_a),
        real_field("nlos_b", &ScenarioConfig::nlos_b),
        real_field("los_a", &ScenarioConfig::los_a),
        real_field("los_b", &ScenarioConfig::los_b),
        int_field("max_iterations", &ScenarioConfig::max_iterations),
        real_field("initial_price", &ScenarioConfig::initial_price),
        real_field("esga_budget", &ScenarioConfig::esga_budget),
        int_field("jd_max_sweeps", &ScenarioConfig::jd_max_sweeps),
        real_field("jd_tol", &ScenarioConfig::jd_tol),
        real_field("zf_cond_max", &ScenarioConfig::zf_cond_max),
    };
    return f;
}

const Field* find_field(const std::string& key) {
    for (const auto& f : fields())
        if (key == f.name) return &f;
    return nullptr;
}

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

} // namespace

double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
double watt_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }
double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double parse_quantity(const std::string& text) {
    std::string t = trim(text);
    // Unit suffixes, longest first so "dBm/Hz" wins over "Hz".
    static const std::vector<std::pair<std::string, std::function<double(double)>>> units = {
        {"dbm/hz", [](double v) { return dbm_to_watt(v); }},
        {"w/hz", [](double v) { return v; }},
        {"dbm", [](double v) { return dbm_to_watt(v); }},
        {"mhz", [](double v) { return v * 1e6; }},
        {"khz", [](double v) { return v * 1e3; }},
        {"hz", [](double v) { return v; }},
        {"db", [](double v) { return db_to_linear(v); }},
        {"mw", [](double v) { return v * 1e-3; }},
        {"km", [](double v) { return v * 1e3; }},
        {"w", [](double v) { return v; }},
        {"m", [](double v) { return v; }},
    };
    const std::string lt = lower(t);
    for (const auto& [suffix, conv] : units) {
        if (ends_with(lt, suffix)) {
            std::string num = trim(t.substr(0, t.size() - suffix.size()));
            if (num.empty()) break;
            // "1e3" style numbers never end in a letter, so a remaining
            // alphabetic tail means the suffix was not a unit.
            if (std::isalpha(static_cast<unsigned char>(num.back()))) break;
            return conv(parse_number(num));
        }
    }
    return parse_number(t);
}

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k;
        for (const auto& f : fields()) k.emplace_back(f.name);
        return k;
    }();
    return keys;
}

bool is_config_key(const std::string& key) { return find_field(key) != nullptr; }

void set_field(ScenarioConfig& cfg, const std::string& key, const std::string& value) {
    const Field* f = find_field(key);
    if (!f) throw InputError("unknown config key '" + key + "'");
    try {
        f->set(cfg, value);
    } catch (const InputError& e) {
        throw InputError("bad value for '" + key + "': " + e.what());
    }
}

ScenarioConfig ScenarioConfig::table1() {
    ScenarioConfig c;
    c.apply_power_model();
    return c;
}

void ScenarioConfig::apply_power_model() {
    P_C_B = 32.306 * N_B;
    P_C_R = 21.874 * N_R;
    xi_B = 3.24 * N_B;
    xi_R = 4.04 * N_R;
}

void ScenarioConfig::validate() const {
    auto need = [](bool ok, const char* what) {
        if (!ok) throw InputError(std::string("invalid config: ") + what);
    };
    need(M >= 0, "M >= 0");
    need(K >= 1, "K >= 1");
    need(N >= 1, "N >= 1");
    need(N_B >= 1 && N_R >= 1 && N_U >= 1, "antenna counts >= 1");
    need(M <= 30, "M <= 30");
    need(W > 0, "W > 0");
    need(cell_radius > 0, "cell_radius > 0");
    need(D_r > 0 && D_r < 1, "0 < D_r < 1");
    need(P_max_B > 0 && P_max_R > 0, "P_max_B, P_max_R > 0");
    need(P_C_B > 0 && P_C_R > 0, "P_C_B, P_C_R > 0");
    need(xi_B > 1 && xi_R > 1, "xi_B, xi_R > 1");
    need(N0 > 0, "N0 > 0");
    need(delta_gamma >= 1, "delta_gamma >= 1");
    need(alpha >= 0 && alpha <= 1, "0 <= alpha <= 1");
    need(epsilon > 0, "epsilon > 0");
    need(ue_min_distance >= 0 && ue_min_distance < cell_radius, "0 <= ue_min_distance < cell_radius");
    need(nlos_b > 0 && los_b > 0, "path-loss slopes > 0");
    need(max_iterations >= 1, "max_iterations >= 1");
    need(initial_price > 0, "initial_price > 0");
    need(esga_budget >= 1, "esga_budget >= 1");
    need(jd_max_sweeps >= 1 && jd_tol > 0, "joint-diagonalization limits");
    need(zf_cond_max > 1, "zf_cond_max > 1");
}

ScenarioConfig parse_config(const std::string& text, ScenarioConfig base) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    bool power_explicit[4] = {false, false, false, false};
    bool antennas_changed = false;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw InputError("line " + std::to_string(lineno) + ": expected key = value");
        }
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        set_field(base, key, value);
        if (key == "P_C_B") power_explicit[0] = true;
        if (key == "P_C_R") power_explicit[1] = true;
        if (key == "xi_B") power_explicit[2] = true;
        if (key == "xi_R") power_explicit[3] = true;
        if (key == "N_B" || key == "N_R") antennas_changed = true;
    }
    if (antennas_changed) {
        ScenarioConfig scaled = base;
        scaled.apply_power_model();
        if (!power_explicit[0]) base.P_C_B = scaled.P_C_B;
        if (!power_explicit[1]) base.P_C_R = scaled.P_C_R;
        if (!power_explicit[2]) base.xi_B = scaled.xi_B;
        if (!power_explicit[3]) base.xi_R = scaled.xi_R;
    }
    return base;
}

ScenarioConfig load_config(const std::string& path, ScenarioConfig base) {
    std::ifstream f(path);
    if (!f) throw InputError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str(), std::move(base));
}

std::string format_config(const ScenarioConfig& cfg) {
    std::string out;
    for (const auto& f : fields()) {
        out += f.name;
        out += " = ";
        out += f.get(cfg);
        out += '\n';
    }
    return out;
}

} // namespace relaynet
