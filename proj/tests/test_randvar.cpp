#include <doctest.h>

#include <random>

#include "lo/error.hpp"
#include "lo/randvar.hpp"

using namespace lo;

namespace {

DiscreteDist bernoulli() { return bernoulli_lazy(Rational(1)); }

Rational total(const DiscreteDist& d) {
    Rational t = 0;
    for (const auto& a : d.atoms()) t += a.mass;
    return t;
}

DiscreteDist random_dist(std::mt19937_64& rng) {
    const std::size_t k = 1 + rng() % 4;
    std::vector<long> w(k);
    long sum = 0;
    for (auto& x : w) sum += (x = 1 + static_cast<long>(rng() % 5));
    std::vector<Atom> atoms;
    for (std::size_t i = 0; i < k; ++i)
        atoms.push_back({make_rational(static_cast<long>(rng() % 9) - 4, 1 + static_cast<long>(rng() % 2)), make_rational(w[i], sum)});
    return DiscreteDist(atoms);
}

}  // namespace

TEST_CASE("bernoulli_lazy") {
    CHECK(bernoulli().atoms() == std::vector<Atom>{{Rational(-1), Rational(1, 2)}, {Rational(1), Rational(1, 2)}});
    auto half = bernoulli_lazy(Rational(1, 2));
    CHECK(half.atoms() == std::vector<Atom>{{Rational(-1), Rational(1, 4)},
                                            {Rational(0), Rational(1, 2)},
                                            {Rational(1), Rational(1, 4)}});
    CHECK_THROWS_AS(bernoulli_lazy(Rational(2)), InvalidParameter);
    CHECK_THROWS_AS(bernoulli_lazy(Rational(0)), InvalidParameter);
}

TEST_CASE("distribution validation") {
    CHECK_THROWS_AS(DiscreteDist({{Rational(0), Rational(1, 2)}}), InvalidParameter);
    CHECK_THROWS_AS(DiscreteDist({{Rational(0), Rational(3, 2)}, {Rational(1), Rational(-1, 2)}}), InvalidParameter);
    DiscreteDist merged({{Rational(1), Rational(1, 4)}, {Rational(1), Rational(1, 4)}, {Rational(0), Rational(1, 2)}});
    CHECK(merged.support_size() == 2);
    CHECK(merged.mass_at(Rational(1)) == Rational(1, 2));
}

TEST_CASE("symmetrize") {
    // 2x2 convolution table of {-1,1} with itself.
    auto s = symmetrize(bernoulli());
    CHECK(s.atoms() == std::vector<Atom>{{Rational(-2), Rational(1, 4)},
                                         {Rational(0), Rational(1, 2)},
                                         {Rational(2), Rational(1, 4)}});
    CHECK(symmetrize(DiscreteDist::point_mass(Rational(5))) == DiscreteDist::point_mass(Rational(0)));
    // 3x3 table for eta^(1/2).
    auto e = symmetrize(bernoulli_lazy(Rational(1, 2)));
    CHECK(e.atoms() == std::vector<Atom>{{Rational(-2), Rational(1, 16)},
                                         {Rational(-1), Rational(1, 4)},
                                         {Rational(0), Rational(3, 8)},
                                         {Rational(1), Rational(1, 4)},
                                         {Rational(2), Rational(1, 16)}});
}

TEST_CASE("lazy_product") {
    auto z = lazy_product(symmetrize(bernoulli()), Rational(1, 2));
    CHECK(z.atoms() == std::vector<Atom>{{Rational(-2), Rational(1, 8)},
                                         {Rational(0), Rational(3, 4)},
                                         {Rational(2), Rational(1, 8)}});
    auto zero = DiscreteDist::point_mass(Rational(0));
    CHECK(lazy_product(zero, Rational(1, 3)) == zero);
    auto sym = symmetrize(bernoulli_lazy(Rational(1, 3)));
    CHECK(lazy_product(sym, Rational(1)) == sym);
    CHECK_THROWS_AS(lazy_product(sym, Rational(3, 2)), InvalidParameter);
}

TEST_CASE("check_condition") {
    ConditionParams p{Rational(1), Rational(2), Rational(1, 2)};
    auto b = check_condition(bernoulli(), p);
    CHECK(b.probability == Rational(1, 2));
    CHECK(b.satisfied);
    // 2 mu (1 - mu) + mu^2 / 2 at mu = 1/2.
    auto e = check_condition(bernoulli_lazy(Rational(1, 2)), p);
    CHECK(e.probability == Rational(5, 8));
    CHECK(e.satisfied);
    auto pm = check_condition(DiscreteDist::point_mass(Rational(3)), p);
    CHECK(pm.probability == 0);
    CHECK_FALSE(pm.satisfied);
    CHECK_THROWS_AS(check_condition(bernoulli(), {Rational(2), Rational(1), Rational(1, 2)}), InvalidParameter);
}

TEST_CASE("property: derived distributions keep unit mass and symmetry") {
    std::mt19937_64 rng(5);
    ConditionParams p{Rational(1, 2), Rational(3), Rational(1, 4)};
    for (int t = 0; t < 100; ++t) {
        auto xi = random_dist(rng);
        auto s = symmetrize(xi);
        CHECK(total(s) == 1);
        for (const auto& a : s.atoms()) CHECK(s.mass_at(-a.value) == a.mass);

        Rational mu = make_rational(1 + static_cast<long>(rng() % 4), 4);
        auto lp = lazy_product(s, mu);
        CHECK(total(lp) == 1);
        CHECK(lp.mass_at(Rational(0)) == (1 - mu) + mu * s.mass_at(Rational(0)));

        // Brute-force double sum over atom pairs.
        Rational brute = 0;
        for (const auto& a : xi.atoms())
            for (const auto& b : xi.atoms()) {
                Rational d = abs(a.value - b.value);
                if (p.c1 <= d && d <= p.c2) brute += a.mass * b.mass;
            }
        CHECK(check_condition(xi, p).probability == brute);
    }
}
