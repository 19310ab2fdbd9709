#pragma once

#include <complex>
#include <random>

#include "relaynet/config.hpp"
#include "relaynet/grouping.hpp"
#include "relaynet/scenario.hpp"

namespace relaynet::test {

inline CMatrix random_matrix(std::mt19937_64& eng, int rows, int cols) {
    std::normal_distribution<double> g(0.0, 1.0);
    CMatrix H(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) H(r, c) = cd(g(eng), g(eng));
    return H;
}

inline CMatrix random_psd(std::mt19937_64& eng, int n) {
    const CMatrix H = random_matrix(eng, n, n + 2);
    return H * H.adjoint();
}

/// Table I scenario with a few overrides as key=value pairs.
inline ScenarioConfig scenario(std::initializer_list<std::pair<const char*, const char*>> sets = {}) {
    ScenarioConfig c = ScenarioConfig::table1();
    for (const auto& [k, v] : sets) set_field(c, k, v);
    c.validate();
    return c;
}

inline GroupSet groups_for(const ScenarioConfig& cfg, std::uint64_t seed,
                           GroupingAlgorithm algo = GroupingAlgorithm::OCGA) {
    const Topology topo = generate_topology(cfg, seed);
    const ChannelSet ch = sample_channels(cfg, topo, seed);
    return build_group_sets(ch, cfg, algo);
}

} // namespace relaynet::test
