#include <benchmark/benchmark.h>

#include <random>

#include "lo/constructions.hpp"
#include "lo/inverse.hpp"

using namespace lo;

namespace {

// Points near a rank-2 progression with a little rational noise.
std::vector<QVec> near_progression(std::size_t count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> c1(-3, 3), c2(-2, 2), noise(-4, 4);
    std::vector<QVec> pts;
    for (std::size_t i = 0; i < count; ++i)
        pts.push_back({Rational(c1(rng)) + Rational(c2(rng)) * Rational(1, 3) + Rational(noise(rng), 200)});
    for (auto& p : pts) p[0].canonicalize();
    return pts;
}

void fit_linear(benchmark::State& state) {
    const auto pts = near_progression(static_cast<std::size_t>(state.range(0)), 17);
    FitParams fp;
    fp.beta = Rational(1, 20);
    fp.m_max = 6;
    fp.size_cap = 200;
    for (auto _ : state) benchmark::DoNotOptimize(fit_gap_linear(pts, fp));
}
BENCHMARK(fit_linear)->DenseRange(6, 12, 3)->Unit(benchmark::kMillisecond);

void quadratic_pipeline(benchmark::State& state) {
    const std::size_t n = 6;
    const auto inst = build_rank_one_instance(n, {1, 1, 1, -1, -1, -1},
                                              CoeffVector(1, std::vector<QVec>(n, QVec{Rational(1)})), Rational(0), 1,
                                              std::uint64_t{1} << 24);
    const auto& a = std::get<CoeffMatrix>(inst.coefficients);
    PipelineParams pp;
    pp.fit.beta = Rational(1, 2);
    pp.subset_mode = Sampled{2026, static_cast<std::uint64_t>(state.range(0))};
    for (auto _ : state) benchmark::DoNotOptimize(quadratic_certificate(a, bernoulli_lazy(1), pp));
}
BENCHMARK(quadratic_pipeline)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace
