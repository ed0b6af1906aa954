#include <doctest.h>

#include <random>

#include "lo/constructions.hpp"
#include "lo/error.hpp"
#include "oracles.hpp"

using namespace lo;

namespace {

constexpr std::uint64_t kBudget = 1u << 20;

Gap line(std::int64_t g, std::int64_t k) { return Gap::symmetric_gap(1, {{Rational(static_cast<long>(g))}}, {k}); }

std::vector<std::vector<Rational>> scalar_rows(const CoeffMatrix& a) {
    std::vector<std::vector<Rational>> out(a.size(), std::vector<Rational>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a.size(); ++j) out[i][j] = a.at(i, j)[0];
    return out;
}

// Independent sup over centres for d = 1 instances.
Rational oracle_rho(const StructuredInstance& inst) {
    if (inst.kind == InstanceKind::linear_gap) {
        std::vector<Rational> a;
        for (const auto& e : std::get<CoeffVector>(inst.coefficients).entries()) a.push_back(e[0]);
        return oracle::sup_over_midpoints(oracle::linear_samples(a, oracle::bernoulli()), inst.claimed_beta);
    }
    const auto& m = std::get<CoeffMatrix>(inst.coefficients);
    std::vector<Rational> b(m.size());
    return oracle::sup_over_midpoints(oracle::quadratic_samples(scalar_rows(m), b, oracle::bernoulli()),
                                      inst.claimed_beta);
}

void check_closeness(const StructuredInstance& inst) {
    const Rational d2 = inst.perturbation * inst.perturbation;
    if (const auto* v = std::get_if<CoeffVector>(&inst.coefficients)) {
        for (std::size_t i = 0; i < v->size(); ++i) CHECK(dist2((*v)[i], inst.hidden.values[i]) <= d2);
    } else {
        const auto& m = std::get<CoeffMatrix>(inst.coefficients);
        CHECK(m.is_symmetric());
        for (std::size_t i = 0; i < m.size(); ++i)
            for (std::size_t j = 0; j < m.size(); ++j)
                CHECK(dist2(m.at(i, j), inst.hidden.values[i * m.size() + j]) <= d2);
    }
}

}  // namespace

TEST_CASE("linear GAP instances") {
    auto inst = build_linear_gap_instance(4, line(1, 2), Rational(0), 1, kBudget);
    CHECK(inst.claimed_rho_lower == Rational(1, 17));
    CHECK(inst.claimed_beta == 0);
    CHECK(oracle_rho(inst) >= Rational(1, 17));
    CHECK(certify_instance(inst, kBudget).holds);

    auto zero = build_linear_gap_instance(5, Gap::singleton({Rational(0)}), Rational(0), 3, kBudget);
    CHECK(certify_instance(zero, kBudget).sup->value == 1);

    auto pert = build_linear_gap_instance(4, line(1, 2), Rational(1, 100), 2, kBudget);
    CHECK(pert.claimed_beta == Rational(1, 25));
    CHECK(oracle_rho(pert) >= Rational(1, 17));
    check_closeness(pert);
}

TEST_CASE("quadratic GAP instances") {
    auto inst = build_quadratic_gap_instance(3, line(1, 1), Rational(0), 1, kBudget);
    CHECK(inst.claimed_rho_lower == Rational(1, 19));
    CHECK(oracle_rho(inst) >= Rational(1, 19));
    auto zero = build_quadratic_gap_instance(3, Gap::singleton({Rational(0)}), Rational(0), 1, kBudget);
    CHECK(certify_instance(zero, kBudget).sup->value == 1);
    auto pert = build_quadratic_gap_instance(3, line(1, 1), Rational(1, 1000), 4, kBudget);
    CHECK(pert.claimed_beta == Rational(9, 1000));
    CHECK(oracle_rho(pert) >= Rational(1, 19));
    check_closeness(pert);
}

TEST_CASE("rank-one instances") {
    auto b4 = CoeffVector::scalars({Rational(2), Rational(-1), Rational(1, 3), Rational(5)});
    auto inst = build_rank_one_instance(4, {1, 1, -1, -1}, b4, Rational(0), 1, kBudget);
    CHECK(inst.claimed_rho_lower == Rational(3, 8));
    CHECK(oracle_rho(inst) >= Rational(3, 8));

    auto zero = build_rank_one_instance(4, {0, 0, 0, 0}, b4, Rational(0), 1, kBudget);
    CHECK(certify_instance(zero, kBudget).sup->value == 1);

    auto two = build_rank_one_instance(2, {1, 1}, CoeffVector::scalars({Rational(1), Rational(1)}), Rational(0), 1,
                                       kBudget);
    CHECK(two.claimed_rho_lower == Rational(1, 2));
    CHECK(oracle_rho(two) >= Rational(1, 2));

    CHECK_THROWS_AS(build_rank_one_instance(3, {1, 1, 1}, CoeffVector::scalars({1, 1, 1}), Rational(0), 1, kBudget),
                    InfeasibleK);
}

TEST_CASE("mixed instances") {
    auto q = line(1, 1);
    auto plain = build_quadratic_gap_instance(4, q, Rational(0), 9, kBudget);
    auto empty = build_mixed_instance(4, q, {}, {}, Rational(0), 9, kBudget);
    CHECK(empty.coefficients == plain.coefficients);
    CHECK(empty.claimed_rho_lower == plain.claimed_rho_lower);

    std::vector<CoeffVector> b{CoeffVector::scalars({Rational(1), Rational(2), Rational(3), Rational(4)})};
    auto ro = build_rank_one_instance(4, {1, 1, -1, -1}, b[0], Rational(0), 9, kBudget);
    auto mixed0 = build_mixed_instance(4, Gap::singleton({Rational(0)}), {{1, 1, -1, -1}}, b, Rational(0), 9, kBudget);
    CHECK(mixed0.coefficients == ro.coefficients);
    CHECK(mixed0.claimed_rho_lower == ro.claimed_rho_lower);

    auto m = build_mixed_instance(4, q, {{1, 1, -1, -1}}, b, Rational(0), 5, kBudget);
    CHECK(m.claimed_rho_lower == Rational(3, 8) * Rational(1, 33));
    CHECK(oracle_rho(m) >= m.claimed_rho_lower);
}

TEST_CASE("kernel probability") {
    CHECK(kernel_probability({{1, 1, -1, -1}}, 4, kBudget) == Rational(3, 8));
    CHECK(kernel_probability({{1, 1, 0, 0}, {0, 0, 1, 1}}, 4, kBudget) == Rational(1, 4));
    CHECK(kernel_probability({}, 4, kBudget) == 1);
    CHECK(kernel_probability({{2, 1}}, 2, kBudget) == 0);
}

TEST_CASE("property: pigeonhole bounds hold on seeded instances, d = 1 and d = 2") {
    std::mt19937_64 rng(77);
    const Gap q1 = Gap::symmetric_gap(1, {{Rational(1)}, {Rational(7)}}, {1, 1});
    const Gap q2 = Gap::symmetric_gap(2, {{Rational(1), Rational(0)}, {Rational(1, 2), Rational(3)}}, {1, 1});
    for (int t = 0; t < 24; ++t) {
        const Rational delta = t % 2 ? Rational(1, 100) : Rational(0);
        const Gap& q = t % 3 == 0 ? q2 : q1;
        const std::size_t n = 3 + rng() % 3;
        std::vector<StructuredInstance> insts;
        insts.push_back(build_linear_gap_instance(n, q, delta, rng(), kBudget));
        insts.push_back(build_quadratic_gap_instance(std::min<std::size_t>(n, 4), q, delta, rng(), kBudget));
        std::vector<std::int64_t> k(n, 0);
        k[0] = 1;
        k[1] = -1;
        std::vector<QVec> bv(n, zero_vec(q.ambient_dim()));
        for (auto& v : bv)
            for (auto& c : v) c = Rational(static_cast<long>(rng() % 7) - 3);
        CoeffVector b(q.ambient_dim(), bv);
        insts.push_back(build_rank_one_instance(n, k, b, delta, rng(), kBudget));
        const std::size_t nm = std::min<std::size_t>(n, 4);
        std::vector<std::int64_t> km(k.begin(), k.begin() + static_cast<std::ptrdiff_t>(nm));
        std::vector<QVec> bm(bv.begin(), bv.begin() + static_cast<std::ptrdiff_t>(nm));
        insts.push_back(build_mixed_instance(nm, q, {km}, {CoeffVector(q.ambient_dim(), bm)}, delta, rng(), kBudget));
        for (const auto& inst : insts) {
            auto check = certify_instance(inst, kBudget);
            CHECK(check.holds);
            check_closeness(inst);
            if (inst.dim() == 1) CHECK(check.sup->value >= inst.claimed_rho_lower);
        }
    }
}

TEST_CASE("construction is deterministic in the seed") {
    auto a = build_quadratic_gap_instance(4, line(1, 2), Rational(1, 10), 42, kBudget);
    auto b = build_quadratic_gap_instance(4, line(1, 2), Rational(1, 10), 42, kBudget);
    CHECK(a.coefficients == b.coefficients);
    CHECK(a.hidden == b.hidden);
}

TEST_CASE("construction input validation") {
    CHECK_THROWS_AS(build_linear_gap_instance(4, Gap::symmetric_gap(1, {{Rational(1)}, {Rational(3)}}, {2, 2}),
                                              Rational(0), 1, kBudget),
                    NotProper);
    CHECK_THROWS_AS(build_quadratic_gap_instance(8, line(1, 100), Rational(0), 1, 1000), BudgetExceeded);
    CHECK_THROWS_AS(build_linear_gap_instance(3, line(1, 1), Rational(-1), 1, kBudget), InvalidParameter);
}
