#include <benchmark/benchmark.h>

#include <memory>
#include <random>

#include "shearop/network.hpp"
#include "shearop/parallel.hpp"
#include "shearop/pde.hpp"
#include "shearop/spectral.hpp"
#include "shearop/train.hpp"

using namespace shearop;

namespace {

FeatureField random_features(const Grid2D& g, int c, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> d;
    FeatureField f(g, c);
    for (double& v : f.values) v = d(rng);
    return f;
}

ModelConfig model(Arch arch) {
    ModelConfig c;
    c.arch = arch;
    return c;
}

void BM_SnoSpectralReference(benchmark::State& st) {
    const Grid2D g = Grid2D::square(static_cast<int>(st.range(0)), 0.0, 1.0);
    const ModelParams p = init_params(model(Arch::sno), 1);
    const auto bank = cached_windows(g, p.config.frame);
    const FeatureField u = random_features(g, 8, 2);
    for (auto _ : st) benchmark::DoNotOptimize(reference::sno_spectral_forward(u, p.layers[0].sno, *bank));
}

void BM_SnoSpectralParallel(benchmark::State& st) {
    const Grid2D g = Grid2D::square(static_cast<int>(st.range(0)), 0.0, 1.0);
    const ModelParams p = init_params(model(Arch::sno), 1);
    const auto bank = cached_windows(g, p.config.frame);
    const FeatureField u = random_features(g, 8, 2);
    for (auto _ : st) benchmark::DoNotOptimize(sno_spectral_forward(u, p.layers[0].sno, *bank));
}

void BM_FnoSpectralReference(benchmark::State& st) {
    const Grid2D g = Grid2D::square(static_cast<int>(st.range(0)), 0.0, 1.0);
    const ModelParams p = init_params(model(Arch::fno), 1);
    const FeatureField u = random_features(g, 8, 2);
    for (auto _ : st) benchmark::DoNotOptimize(reference::fno_spectral_forward(u, p.layers[0].fno));
}

void BM_FnoSpectralParallel(benchmark::State& st) {
    const Grid2D g = Grid2D::square(static_cast<int>(st.range(0)), 0.0, 1.0);
    const ModelParams p = init_params(model(Arch::fno), 1);
    const FeatureField u = random_features(g, 8, 2);
    for (auto _ : st) benchmark::DoNotOptimize(fno_spectral_forward(u, p.layers[0].fno));
}

// one mini-batch of 32 forward/backward passes, samples serial or fanned out
void batch_gradient(benchmark::State& st, Arch arch, bool parallel) {
    const BenchmarkSpec spec = default_spec(BenchmarkId::bent_ridge_advect, 64);
    static const Dataset d = generate_dataset(spec);
    auto ev = std::make_shared<const Evaluator>(init_params(model(arch), 3), d.grid);
    std::vector<std::size_t> pairs(32);
    for (std::size_t i = 0; i < pairs.size(); ++i) pairs[i] = i;
    ModelParams grad = zero_params(ev->params().config);
    for (auto _ : st) {
        grad.set_zero();
        benchmark::DoNotOptimize(batch_loss(*ev, d, pairs, &grad, parallel));
    }
}

void BM_SnoBatchSerial(benchmark::State& st) { batch_gradient(st, Arch::sno, false); }
void BM_SnoBatchParallel(benchmark::State& st) { batch_gradient(st, Arch::sno, true); }
void BM_FnoBatchSerial(benchmark::State& st) { batch_gradient(st, Arch::fno, false); }
void BM_FnoBatchParallel(benchmark::State& st) { batch_gradient(st, Arch::fno, true); }

}  // namespace

BENCHMARK(BM_SnoSpectralReference)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SnoSpectralParallel)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FnoSpectralReference)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FnoSpectralParallel)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SnoBatchSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SnoBatchParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FnoBatchSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FnoBatchParallel)->Unit(benchmark::kMillisecond);

int main(int argc, char** argv) {
    init_threads();
    benchmark::Initialize(&argc, argv);
    if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
    benchmark::RunSpecifiedBenchmarks();
    benchmark::Shutdown();
    return 0;
}
