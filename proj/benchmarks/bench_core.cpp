#include <benchmark/benchmark.h>

#include "relaynet/grouping.hpp"
#include "relaynet/scenario.hpp"
#include "relaynet/solver.hpp"

using namespace relaynet;

namespace {

ScenarioConfig config(int K, int M) {
    ScenarioConfig c = ScenarioConfig::table1();
    c.K = K;
    c.M = M;
    return c;
}

ChannelSet channels(const ScenarioConfig& c, std::uint64_t seed) {
    return sample_channels(c, generate_topology(c, seed), seed);
}

} // namespace

static void BM_Enumerate(benchmark::State& state) {
    const ScenarioConfig c = config(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
    const ChannelSet ch = channels(c, 1);
    for (auto _ : state) benchmark::DoNotOptimize(enumerate_smcs(ch, c, 0));
}
BENCHMARK(BM_Enumerate)->Args({2, 2})->Args({10, 2})->Args({2, 4})->Unit(benchmark::kMillisecond);

static void BM_Grouping(benchmark::State& state) {
    const ScenarioConfig c = config(2, 2);
    const auto algo = state.range(0) ? GroupingAlgorithm::ESGA : GroupingAlgorithm::OCGA;
    const ChannelSet ch = channels(c, 2);
    const CandidateSet cs = enumerate_smcs(ch, c, 0);
    for (auto _ : state) {
        auto groups = algo == GroupingAlgorithm::ESGA ? esga(cs, c.alpha) : ocga(cs, c.alpha);
        benchmark::DoNotOptimize(groups.data());
    }
    state.SetLabel(to_string(algo));
}
BENCHMARK(BM_Grouping)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

static void BM_Solve(benchmark::State& state) {
    const ScenarioConfig c = config(static_cast<int>(state.range(1)), 2);
    const GroupSet gs = build_group_sets(channels(c, 3), c, GroupingAlgorithm::OCGA);
    SolveOptions opt;
    opt.keep_trace = false;
    for (auto _ : state) {
        const SolveResult r = state.range(0) ? solve_esem(c, gs.per_subcarrier, opt) : solve_sem(c, gs.per_subcarrier, opt);
        benchmark::DoNotOptimize(r.se);
    }
    state.SetLabel(state.range(0) ? "ESEM" : "SEM");
    state.counters["groups"] = gs.mean_groups();
}
BENCHMARK(BM_Solve)->Args({0, 2})->Args({1, 2})->Args({0, 10})->Args({1, 10})->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
