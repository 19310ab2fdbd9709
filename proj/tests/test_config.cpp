#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "relaynet/config.hpp"

using namespace relaynet;

TEST(Quantity, UnitSuffixes) {
    EXPECT_DOUBLE_EQ(parse_quantity("20 dBm"), 0.1);
    EXPECT_DOUBLE_EQ(parse_quantity("0dBm"), 1e-3);
    EXPECT_DOUBLE_EQ(parse_quantity("30 dB"), 1000.0);
    EXPECT_DOUBLE_EQ(parse_quantity("180 kHz"), 180e3);
    EXPECT_DOUBLE_EQ(parse_quantity("1.75 km"), 1750.0);
    EXPECT_DOUBLE_EQ(parse_quantity("250 mW"), 0.25);
    EXPECT_DOUBLE_EQ(parse_quantity("2.5"), 2.5);
    // -174 dBm/Hz = 10^(-20.4) W/Hz
    EXPECT_NEAR(parse_quantity("-174 dBm/Hz") / std::pow(10.0, -20.4), 1.0, 1e-12);
}

TEST(Quantity, RejectsGarbage) {
    EXPECT_THROW(parse_quantity(""), InputError);
    EXPECT_THROW(parse_quantity("abc"), InputError);
    EXPECT_THROW(parse_quantity("3 furlongs"), InputError);
}

TEST(Quantity, DbmRoundTrip) {
    for (double dbm = -30; dbm <= 60; dbm += 7.5) EXPECT_NEAR(watt_to_dbm(dbm_to_watt(dbm)), dbm, 1e-12);
    EXPECT_DOUBLE_EQ(db_to_linear(0.0), 1.0);
}

TEST(Config, TableOneDefaults) {
    const ScenarioConfig c = ScenarioConfig::table1();
    EXPECT_EQ(c.N_B, 4);
    EXPECT_EQ(c.N_R, 4);
    EXPECT_EQ(c.N_U, 2);
    EXPECT_DOUBLE_EQ(c.W, 180e3);
    EXPECT_DOUBLE_EQ(c.D_r, 0.5);
    EXPECT_DOUBLE_EQ(c.delta_gamma, 1.0);
    EXPECT_DOUBLE_EQ(c.epsilon, 1e-6);
    EXPECT_NEAR(c.P_C_B, 32.306 * 4, 1e-12);
    EXPECT_NEAR(c.P_C_R, 21.874 * 4, 1e-12);
    EXPECT_NO_THROW(c.validate());
}

TEST(Config, PowerModelFollowsAntennas) {
    ScenarioConfig c = ScenarioConfig::table1();
    c.N_B = 8;
    c.N_R = 2;
    c.apply_power_model();
    EXPECT_NEAR(c.P_C_B, 32.306 * 8, 1e-12);
    EXPECT_NEAR(c.P_C_R, 21.874 * 2, 1e-12);
    EXPECT_GT(c.xi_B, 1.0);
    EXPECT_GT(c.xi_R, 1.0);
}

TEST(Config, ValidationNamesTheField) {
    auto fails = [](const char* key, const char* value) {
        ScenarioConfig c = ScenarioConfig::table1();
        set_field(c, key, value);
        try {
            c.validate();
        } catch (const InputError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    EXPECT_NE(fails("K", "0").find("K"), std::string::npos);
    EXPECT_NE(fails("alpha", "1.5").find("alpha"), std::string::npos);
    EXPECT_NE(fails("D_r", "1").find("D_r"), std::string::npos);
    EXPECT_NE(fails("xi_B", "1").find("xi_B"), std::string::npos);
    EXPECT_EQ(fails("M", "0"), "");
}

TEST(Config, UnknownKeyRejected) {
    ScenarioConfig c;
    EXPECT_THROW(set_field(c, "foo", "1"), InputError);
    EXPECT_FALSE(is_config_key("foo"));
    EXPECT_TRUE(is_config_key("P_max_B"));
    EXPECT_THROW(parse_config("foo = 1\n"), InputError);
    EXPECT_THROW(parse_config("M 2\n"), InputError);
}

TEST(Config, FileParsing) {
    const ScenarioConfig c = parse_config("# comment\nM = 4\nP_max_B = 30 dBm  # trailing\n\ncell_radius = 1.25 km\n");
    EXPECT_EQ(c.M, 4);
    EXPECT_DOUBLE_EQ(c.P_max_B, 1.0);
    EXPECT_DOUBLE_EQ(c.cell_radius, 1250.0);
}

TEST(Config, FormatParseRoundTrip) {
    std::mt19937_64 eng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 50; ++i) {
        ScenarioConfig c = ScenarioConfig::table1();
        c.M = static_cast<int>(eng() % 5);
        c.K = 1 + static_cast<int>(eng() % 10);
        c.alpha = u(eng);
        c.P_max_B = std::pow(10.0, -3 + 6 * u(eng));
        c.cell_radius = 500 + 2000 * u(eng);
        c.rng_seed = eng();
        const ScenarioConfig d = parse_config(format_config(c));
        EXPECT_EQ(format_config(d), format_config(c));
        EXPECT_EQ(d.rng_seed, c.rng_seed);
        EXPECT_EQ(d.alpha, c.alpha);
    }
}
