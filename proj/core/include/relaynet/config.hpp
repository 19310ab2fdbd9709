#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace relaynet {

/// Raised for malformed input: bad config values, unknown keys, bad vectors.
class InputError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when a run cannot proceed with the given configuration.
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct ScenarioConfig {
    int M = 2;
    int K = 2;
    int N = 6;
    int N_B = 4;
    int N_R = 4;
    int N_U = 2;

    double W = 180e3;           // Hz
    double cell_radius = 750.0; // m
    double D_r = 0.5;

    double P_max_B = 0.1;   // W
    double P_max_R = 0.01;  // W
    double P_C_B = 32.306 * 4;
    double P_C_R = 21.874 * 4;
    double xi_B = 3.24 * 4;
    double xi_R = 4.04 * 4;

    double N0 = 3.9810717055349565e-21; // W/Hz, -174 dBm/Hz
    double delta_gamma = 1.0;
    double alpha = 0.1;
    double epsilon = 1e-6;
    std::uint64_t rng_seed = 1;

    // Geometry and propagation.
    double ue_min_distance = 35.0;  // m
    double nlos_a = 128.1;
    double nlos_b = 37.6;
    double los_a = 100.7;
    double los_b = 23.5;

    // Numerical knobs.
    int max_iterations = 5000;
    double initial_price = 1e-3;
    double esga_budget = 1e6;
    int jd_max_sweeps = 200;
    double jd_tol = 1e-10;
    double zf_cond_max = 1e8;

    /// Throws InputError naming the first violated invariant.
    void validate() const;

    /// Table I defaults with the antenna-scaled power model recomputed.
    static ScenarioConfig table1();

    /// Recompute P_C_B, P_C_R, xi_B, xi_R from the antenna counts.
    void apply_power_model();
};

/// Names accepted by set_field / the config file.
const std::vector<std::string>& config_keys();
bool is_config_key(const std::string& key);

/// Set one field from text. Accepts unit suffixes: dBm, dB, dBm/Hz, W, mW,
/// W/Hz, Hz, kHz, MHz, m, km. Throws InputError for unknown keys or bad values.
void set_field(ScenarioConfig& cfg, const std::string& key, const std::string& value);

/// Flat key = value document; '#' starts a comment.
ScenarioConfig parse_config(const std::string& text, ScenarioConfig base = ScenarioConfig::table1());
ScenarioConfig load_config(const std::string& path, ScenarioConfig base = ScenarioConfig::table1());

/// Inverse of parse_config: every field in linear units.
std::string format_config(const ScenarioConfig& cfg);

double dbm_to_watt(double dbm);
double watt_to_dbm(double w);
double db_to_linear(double db);

/// Parse a quantity with optional unit suffix into base SI units.
double parse_quantity(const std::string& text);

} // namespace relaynet
