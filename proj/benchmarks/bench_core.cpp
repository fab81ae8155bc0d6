#include <benchmark/benchmark.h>

#include <random>

#include "ultrav/cpd.hpp"
#include "ultrav/linalg.hpp"
#include "ultrav/synth.hpp"
#include "ultrav/unmixing.hpp"

using namespace ultrav;

namespace {

Tensor4 random_tensor4(Index a, Index b, Index c, Index d) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Tensor4 t({a, b, c, d});
    for (double& v : t.data()) v = u(rng);
    return t;
}

std::array<Eigen::MatrixXd, 4> random_factors(const Tensor4& t, Index rank) {
    std::array<Eigen::MatrixXd, 4> f;
    for (std::size_t m = 0; m < 4; ++m) f[m] = Eigen::MatrixXd::Random(t.dim(m), rank).cwiseAbs();
    return f;
}

const SceneTruth& scene() {
    static const SceneTruth t = [] {
        SceneSpec s;
        s.n1 = s.n2 = 30;
        s.library = synthetic_library(100, 3, 11);
        s.variability = MultiplicativeVariability{0.2};
        s.seed = 1;
        return generate_scene(s);
    }();
    return t;
}

} // namespace

// Endmember-sized tensor, one mode per run.
void BM_Mttkrp(benchmark::State& state) {
    const Tensor4 t = random_tensor4(40, 40, 100, 3);
    const auto f = random_factors(t, 4);
    const auto mode = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(mttkrp(t, f, mode));
}
BENCHMARK(BM_Mttkrp)->DenseRange(0, 3)->Unit(benchmark::kMillisecond);

void BM_CpdSweep(benchmark::State& state) {
    const Tensor4 t = random_tensor4(40, 40, 100, 3);
    AlsOptions o;
    o.max_sweeps = 1;
    const auto rank = static_cast<Index>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(cpd_als(t, rank, o));
}
BENCHMARK(BM_CpdSweep)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_FclsSolve(benchmark::State& state) {
    const Index r = state.range(0);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Eigen::MatrixXd m(224, r);
    for (Index j = 0; j < r; ++j) {
        for (Index i = 0; i < 224; ++i) m(i, j) = u(rng);
    }
    const Eigen::VectorXd y = m * Eigen::VectorXd::Constant(r, 1.0 / static_cast<double>(r)) +
                              0.01 * Eigen::VectorXd::Random(224);
    const Eigen::VectorXd q = Eigen::VectorXd::Constant(r, 1.0 / static_cast<double>(r));
    for (auto _ : state) benchmark::DoNotOptimize(fcls_solve(m, y, 0.1, q));
}
BENCHMARK(BM_FclsSolve)->Arg(3)->Arg(6)->Arg(10);

void BM_UltraVIteration(benchmark::State& state) {
    const SceneTruth& t = scene();
    const Eigen::MatrixXd lib = synthetic_library(100, 3, 11);
    UnmixConfig cfg;
    cfg.max_outer_iters = 1;
    for (auto _ : state) benchmark::DoNotOptimize(ultra_v(t.cube, lib, cfg));
}
BENCHMARK(BM_UltraVIteration)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
