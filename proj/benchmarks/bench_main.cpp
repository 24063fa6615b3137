#include <benchmark/benchmark.h>

#include "looptree/bounds.hpp"
#include "looptree/cluster.hpp"
#include "looptree/loops.hpp"

using namespace looptree;

namespace {

void BM_SampleLinks(benchmark::State& state)
{
    const Tree t = regular_tree(static_cast<std::uint32_t>(state.range(0)), 3);
    RandomStream rng(1);
    const ModelParams p{2.0, 1.0, 0.5};
    for (auto _ : state) benchmark::DoNotOptimize(sample_links(t, p, rng));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(t.edge_count()));
}
BENCHMARK(BM_SampleLinks)->Arg(3)->Arg(10);

void BM_BuildLoops(benchmark::State& state)
{
    const Tree t = regular_tree(static_cast<std::uint32_t>(state.range(0)), 3);
    RandomStream rng(2);
    const auto config = sample_links(t, ModelParams{2.0, 1.0, 0.5}, rng);
    LoopBuilder builder;
    for (auto _ : state) benchmark::DoNotOptimize(builder.build(t, config).loop_count());
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(config.total_links()));
}
BENCHMARK(BM_BuildLoops)->Arg(3)->Arg(10);

void BM_TiltedSample(benchmark::State& state)
{
    const Tree t = regular_tree(24, 4);
    const EdgeProposal q(ModelParams{2.0, 1.0 / 24.0, 0.5}, ProposalKind::tilted);
    LinkConfig config(t.edge_count());
    RandomStream rng(3);
    for (auto _ : state) benchmark::DoNotOptimize(q.sample(config, rng));
}
BENCHMARK(BM_TiltedSample);

void BM_ClusterDraw(benchmark::State& state)
{
    const std::uint32_t d = 24, depth = 8;
    const double beta = static_cast<double>(state.range(0)) / d;
    ClusterSampler sampler(d, ModelParams{2.0, beta, 0.5}, ProposalKind::tilted, 1'000'000);
    const std::vector<double> log_g(depth, -0.69);
    RandomStream rng(4);
    for (auto _ : state) benchmark::DoNotOptimize(sampler.draw(depth, log_g, rng));
}
BENCHMARK(BM_ClusterDraw)->Arg(1)->Arg(3);

void BM_QTilde(benchmark::State& state)
{
    const auto dist = OffspringDistribution::poisson(50.0);
    const ModelParams p{2.0, 0.05, 0.5};
    const auto method = state.range(0) ? MomentMethod::series : MomentMethod::automatic;
    for (auto _ : state) benchmark::DoNotOptimize(q_tilde(dist, p, method));
}
BENCHMARK(BM_QTilde)->Arg(0)->Arg(1);

} // namespace

BENCHMARK_MAIN();
