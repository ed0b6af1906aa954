#include <benchmark/benchmark.h>

#include <random>

#include "lo/decoupling.hpp"
#include "lo/parallel.hpp"
#include "lo/smallball.hpp"

using namespace lo;

namespace {

constexpr std::uint64_t kBudget = std::uint64_t{1} << 32;

std::vector<QVec> random_entries(std::size_t count, std::uint64_t seed, int range) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick(-range, range);
    std::vector<QVec> e;
    for (std::size_t i = 0; i < count; ++i) e.push_back({Rational(pick(rng))});
    return e;
}

CoeffMatrix random_symmetric(std::size_t n, std::uint64_t seed) {
    auto raw = random_entries(n * n, seed, 3);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j) raw[i * n + j] = raw[j * n + i];
    return CoeffMatrix(n, 1, std::move(raw));
}

void linear_all_ones(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const SmallBallQuery q{Rational(0), LinearForm{CoeffVector(1, std::vector<QVec>(n, QVec{Rational(1)}))},
                           SupOverCenter{}, bernoulli_lazy(1), std::nullopt};
    for (auto _ : state) benchmark::DoNotOptimize(rho_linear_exact(q, kBudget));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(linear_all_ones)->DenseRange(10, 22, 4)->Unit(benchmark::kMillisecond);

void linear_random(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const SmallBallQuery q{Rational(1, 2), LinearForm{CoeffVector(1, random_entries(n, 7, 50))}, SupOverCenter{},
                           bernoulli_lazy(1), std::nullopt};
    for (auto _ : state) benchmark::DoNotOptimize(rho_linear_exact(q, kBudget));
}
BENCHMARK(linear_random)->DenseRange(10, 22, 4)->Unit(benchmark::kMillisecond);

void quadratic_random(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const SmallBallQuery q{Rational(1), QuadraticForm{random_symmetric(n, 11), CoeffVector(1, std::vector<QVec>(n, QVec{Rational(0)}))},
                           SupOverCenter{}, bernoulli_lazy(1), std::nullopt};
    for (auto _ : state) benchmark::DoNotOptimize(rho_quadratic_exact(q, kBudget));
}
BENCHMARK(quadratic_random)->DenseRange(8, 16, 4)->Unit(benchmark::kMillisecond);

void bilinear_random(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const SmallBallQuery q{Rational(1), BilinearForm{CoeffMatrix(n, 1, random_entries(n * n, 5, 3))}, SupOverCenter{},
                           bernoulli_lazy(1), std::nullopt};
    for (auto _ : state) benchmark::DoNotOptimize(rho_bilinear_exact(q, kBudget));
}
BENCHMARK(bilinear_random)->DenseRange(4, 8, 2)->Unit(benchmark::kMillisecond);

// Thread scaling of the quadratic engine at a fixed size.
void quadratic_threads(benchmark::State& state) {
    set_thread_count(static_cast<std::size_t>(state.range(0)));
    const SmallBallQuery q{Rational(1), QuadraticForm{random_symmetric(16, 3), CoeffVector(1, std::vector<QVec>(16, QVec{Rational(0)}))},
                           SupOverCenter{}, bernoulli_lazy(1), std::nullopt};
    for (auto _ : state) benchmark::DoNotOptimize(rho_quadratic_exact(q, kBudget));
    set_thread_count(0);
}
BENCHMARK(quadratic_threads)->RangeMultiplier(2)->Range(1, 8)->Unit(benchmark::kMillisecond)->UseRealTime();

void decoupling(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const CoeffMatrix a = random_symmetric(n, 13);
    DecouplingParams p;
    p.beta = Rational(1, 2);
    p.xi = bernoulli_lazy(1);
    p.budget = kBudget;
    const SubsetMask u = SubsetMask::parse(n, "0,2,4");
    for (auto _ : state) benchmark::DoNotOptimize(decoupling_check(a, u, p));
}
BENCHMARK(decoupling)->DenseRange(6, 8, 2)->Unit(benchmark::kMillisecond);

}  // namespace
