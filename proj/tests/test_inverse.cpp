#include <doctest.h>

#include <algorithm>
#include <random>

#include "lo/constructions.hpp"
#include "lo/error.hpp"
#include "lo/inverse.hpp"
#include "lo/parallel.hpp"
#include "oracles.hpp"

using namespace lo;

namespace {

constexpr std::uint64_t kBudget = 1u << 20;

std::vector<QVec> scalars(const std::vector<Rational>& v) {
    std::vector<QVec> out;
    for (const auto& x : v) out.push_back({x});
    return out;
}

FitParams small_params(const Rational& beta) {
    FitParams p;
    p.beta = beta;
    p.r_max = 2;
    p.p_max = 2;
    p.m_max = 4;
    p.k_max = 2;
    p.size_cap = 25;
    return p;
}

// Best (coverage, rank, volume) over the same candidate family, by listing every GAP element.
struct OracleFit {
    std::size_t coverage = 0, rank = 0;
    std::uint64_t volume = 0;
};

std::size_t oracle_coverage(const std::vector<Rational>& pts, const std::vector<Rational>& steps,
                            const std::vector<std::int64_t>& dims, const Rational& beta) {
    std::vector<Rational> elems{Rational(0)};
    for (std::size_t l = 0; l < steps.size(); ++l) {
        std::vector<Rational> next;
        for (const auto& e : elems)
            for (std::int64_t k = -dims[l]; k <= dims[l]; ++k) next.push_back(e + Rational(static_cast<long>(k)) * steps[l]);
        elems = next;
    }
    // properness: all box points distinct
    auto sorted = elems;
    for (auto& e : sorted) e.canonicalize();
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) return 0;
    std::size_t c = 0;
    for (const auto& p : pts)
        if (std::any_of(elems.begin(), elems.end(), [&](const Rational& e) { return abs(p - e) <= beta; })) ++c;
    return c;
}

OracleFit oracle_fit(const std::vector<Rational>& pts, const FitParams& fp) {
    OracleFit best;
    auto consider = [&](std::size_t c, std::size_t r, std::uint64_t v) {
        if (c > best.coverage || (c == best.coverage && (r < best.rank || (r == best.rank && v < best.volume))))
            best = {c, r, v};
    };
    consider(oracle_coverage(pts, {}, {}, fp.beta), 0, 1);
    for (std::int64_t p = 1; p <= fp.p_max; ++p)
        for (std::int64_t m1 = 1; m1 <= fp.m_max; ++m1) {
            const Rational g1 = fp.beta * make_rational(m1, p);
            for (std::int64_t k1 = 1; k1 <= fp.k_max; ++k1) {
                consider(oracle_coverage(pts, {g1}, {k1}, fp.beta), 1, 2 * k1 + 1);
                for (std::int64_t m2 = m1 + 1; m2 <= fp.m_max; ++m2)
                    for (std::int64_t k2 = 1; k2 <= fp.k_max; ++k2) {
                        const std::uint64_t v = (2 * k1 + 1) * (2 * k2 + 1);
                        if (v > fp.size_cap) continue;
                        consider(oracle_coverage(pts, {g1, fp.beta * make_rational(m2, p)}, {k1, k2}, fp.beta), 2, v);
                    }
            }
        }
    return best;
}

void check_fit_valid(const std::vector<QVec>& pts, const GapFit& fit, const Rational& beta) {
    CHECK(fit.gap.symmetric());
    CHECK(is_proper(fit.gap, 1u << 20));
    CHECK(fit.covered.size() == fit.assignments.size());
    for (const auto& [i, q] : fit.assignments) {
        CHECK(dist2(q.value, pts[i]) <= beta * beta);
        CHECK(fit.gap.value_at(q.coords) == q.value);
    }
}

CoeffMatrix rank_one(const std::vector<long>& k, const std::vector<long>& c) {
    std::vector<std::vector<Rational>> a(k.size(), std::vector<Rational>(c.size()));
    for (std::size_t i = 0; i < k.size(); ++i)
        for (std::size_t j = 0; j < c.size(); ++j) a[i][j] = Rational(k[i] * c[j]);
    return CoeffMatrix::scalars(a);
}

DiscreteDist bernoulli() { return bernoulli_lazy(Rational(1)); }

}  // namespace

TEST_CASE("size floor helpers") {
    CHECK(floor_power(16, Rational(1, 2)) == 4);
    CHECK(floor_power(15, Rational(1, 2)) == 3);
    CHECK(floor_power(8, Rational(1, 3)) == 2);
    CHECK(floor_power(7, Rational(0)) == 1);
    CHECK(floor_power(1000, Rational(3, 2)) == 31622);
    CHECK(meets_size_floor(9, 3, Rational(1, 2)));   // 6 <= 2*3
    CHECK(!meets_size_floor(9, 2, Rational(1, 2)));  // 7 > 6
    CHECK(meets_size_floor(4, 4, Rational(0)));
}

TEST_CASE("fit_gap_linear examples") {
    FitParams p;
    p.beta = Rational(1, 10);
    auto pts = scalars({Rational(1, 10), Rational(105, 100), Rational(202, 100), Rational(298, 100)});
    auto fit = fit_gap_linear(pts, p);
    REQUIRE(fit);
    CHECK(fit->gap.rank() == 1);
    CHECK(fit->gap.generators()[0] == QVec{Rational(1)});
    CHECK(fit->gap.upper_bounds() == Coords{3});
    CHECK(fit->covered == std::vector<std::size_t>{0, 1, 2, 3});
    check_fit_valid(pts, *fit, p.beta);

    auto zero = fit_gap_linear(std::vector<QVec>(5, QVec{Rational(0), Rational(0)}), p);
    REQUIRE(zero);
    CHECK(zero->gap.rank() == 0);
    CHECK(zero->covered.size() == 5);
}

TEST_CASE("fit_gap_linear rejects bad input") {
    FitParams p;
    p.beta = 1;
    CHECK_THROWS_AS(fit_gap_linear({}, p), InvalidParameter);
    CHECK_THROWS_AS(fit_gap_linear({{Rational(1)}, {Rational(1), Rational(2)}}, p), SizeMismatch);
    p.n_prime = 3;
    CHECK_THROWS_AS(fit_gap_linear(scalars({1, 2, 3}), p), InvalidParameter);
    p.n_prime.reset();
    p.m_max = 2000;
    p.max_candidates = 1000;
    CHECK_THROWS_AS(fit_gap_linear(scalars({1, 2, 3}), p), SearchSpaceExceeded);
}

TEST_CASE("fit_gap_linear returns nothing below the coverage floor") {
    FitParams p = small_params(Rational(1, 100));
    p.n_prime = 0;
    // 1, sqrt2-ish, pi-ish: no small GAP with these steps reaches all three.
    CHECK(!fit_gap_linear(scalars({Rational(1), Rational(141, 100), Rational(314, 100), Rational(5, 7)}), p));
}

TEST_CASE("property: fit_gap_linear agrees with a brute-force oracle") {
    std::mt19937_64 rng(31);
    for (int t = 0; t < 120; ++t) {
        const Rational beta = make_rational(1 + static_cast<long>(rng() % 4), 4);
        FitParams fp = small_params(beta);
        const std::size_t n = 2 + rng() % 5;
        fp.n_prime = rng() % n;
        std::vector<Rational> pts(n);
        for (auto& x : pts) x = make_rational(static_cast<long>(rng() % 41) - 20, 1 + static_cast<long>(rng() % 4));
        auto fit = fit_gap_linear(scalars(pts), fp);
        auto want = oracle_fit(pts, fp);
        if (want.coverage < n - *fp.n_prime) {
            CHECK(!fit);
            continue;
        }
        REQUIRE(fit);
        CHECK(fit->covered.size() == want.coverage);
        CHECK(fit->gap.rank() == want.rank);
        CHECK(gap_volume(fit->gap) == want.volume);
        check_fit_valid(scalars(pts), *fit, beta);
    }
}

TEST_CASE("property: fit_gap_linear is permutation and scale invariant") {
    std::mt19937_64 rng(77);
    for (int t = 0; t < 60; ++t) {
        FitParams fp = small_params(Rational(1, 2));
        const std::size_t n = 3 + rng() % 4;
        std::vector<QVec> pts(n);
        for (auto& x : pts) x = {make_rational(static_cast<long>(rng() % 25) - 12, 2), make_rational(static_cast<long>(rng() % 5) - 2, 1)};
        fp.n_prime = n - 1;
        auto base = fit_gap_linear(pts, fp);
        REQUIRE(base);

        std::vector<std::size_t> perm(n);
        for (std::size_t i = 0; i < n; ++i) perm[i] = i;
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<QVec> shuffled(n);
        for (std::size_t i = 0; i < n; ++i) shuffled[i] = pts[perm[i]];
        auto moved = fit_gap_linear(shuffled, fp);
        REQUIRE(moved);
        CHECK(moved->gap == base->gap);
        std::vector<std::size_t> mapped;
        for (auto i : moved->covered) mapped.push_back(perm[i]);
        std::sort(mapped.begin(), mapped.end());
        CHECK(mapped == base->covered);

        const Rational lambda = make_rational(3 + static_cast<long>(rng() % 5), 7);
        FitParams sp = fp;
        sp.beta = fp.beta * lambda;
        std::vector<QVec> scaled;
        for (const auto& x : pts) scaled.push_back(scale(x, lambda));
        auto s = fit_gap_linear(scaled, sp);
        REQUIRE(s);
        CHECK(s->covered == base->covered);
        CHECK(s->gap.upper_bounds() == base->gap.upper_bounds());
        for (std::size_t l = 0; l < s->gap.rank(); ++l)
            CHECK(s->gap.generators()[l] == scale(base->gap.generators()[l], lambda));
        for (const auto& [i, q] : s->assignments) CHECK(q.coords == base->assignments.at(i).coords);
    }
}

TEST_CASE("planted linear GAP instances are recovered") {
    const Gap q = Gap::symmetric_gap(1, {{Rational(1)}, {Rational(1, 4)}}, {2, 1});
    int full = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto inst = build_linear_gap_instance(6, q, Rational(1, 20), seed, kBudget);
        FitParams fp;
        fp.beta = Rational(1, 10);
        std::vector<QVec> pts = std::get<CoeffVector>(inst.coefficients).entries();
        auto fit = fit_gap_linear(pts, fp);
        REQUIRE(fit);
        CHECK(fit->covered.size() >= pts.size() - floor_power(pts.size(), fp.epsilon));
        if (fit->covered.size() == pts.size() && fit->gap.rank() <= q.rank()) ++full;
        check_fit_valid(pts, *fit, fp.beta);
    }
    CHECK(full == 20);
}

TEST_CASE("fit cache returns identical results") {
    FitCache cache;
    FitParams fp = small_params(Rational(1, 2));
    auto pts = scalars({1, 2, 3});
    auto a = cache.fit(pts, fp);
    auto b = cache.fit(pts, fp);
    CHECK(cache.hits() == 1);
    CHECK(cache.misses() == 1);
    REQUIRE(a);
    CHECK(a->gap == b->gap);
}

TEST_CASE("classify_good") {
    const auto xi = bernoulli();
    CHECK(classify_good(CoeffMatrix::zeros(3, 1), {1, -1, 1}, Rational(1), Rational(0), xi, kBudget));
    auto a = rank_one({1, 2, 1}, {1, 1, 0});
    // a_i . y = 0 for every i when y_1 = -y_2.
    CHECK(classify_good(a, {1, -1, 1}, Rational(1), Rational(0), xi, kBudget));
    // a . y = (2, 4, 2): every value of x1 + 2 x2 + x3 has mass at most 1/4.
    CHECK(classify_good(a, {1, 1, 0}, Rational(1), Rational(0), xi, kBudget));
    CHECK(!classify_good(a, {1, 1, 0}, Rational(5, 4), Rational(0), xi, kBudget));
    CHECK_THROWS_AS(classify_good(a, {1, 1}, Rational(1), Rational(0), xi, kBudget), SizeMismatch);
}

TEST_CASE("bilinear certificate for A = 0 is trivial") {
    PipelineParams p;
    p.fit.beta = Rational(1, 2);
    auto res = bilinear_certificate(CoeffMatrix::zeros(4, 1), bernoulli(), bernoulli(), p);
    CHECK(res.certificate.k == 1);
    CHECK(res.certificate.pivot_rows.empty());
    CHECK(res.certificate.surviving == std::vector<std::size_t>{0, 1, 2, 3});
    CHECK(res.trace.good_mass == 1);
    auto v = verify_certificate(CoeffMatrix::zeros(4, 1), res.certificate, verification_law(bernoulli()), p.fit.beta,
                                kBudget);
    for (const auto& [i, prob] : v) CHECK(prob == 1);
}

TEST_CASE("bilinear certificate on a rank-one matrix") {
    const auto a = rank_one({1, 2, 1, -1}, {1, 1, 2, 1});
    PipelineParams p;
    // Small enough that the winning fits represent every a_i . y exactly.
    p.fit.beta = Rational(1, 4);
    auto res = bilinear_certificate(a, bernoulli(), bernoulli(), p);
    const auto& cert = res.certificate;
    CHECK(cert.k != 0);
    CHECK(cert.k == determinant(res.trace.common_coeff_matrix));
    CHECK(cert.surviving.size() >= 3);
    auto v = verify_certificate(a, cert, verification_law(bernoulli()), p.fit.beta, kBudget);
    for (auto i : cert.surviving) {
        CHECK(v.at(i) == 1);
        for (const auto& e : combined_row(a, cert, i)) CHECK(is_zero(e));
    }
    // Every recorded identity holds on its supporting y.
    for (const auto& row : res.trace.rows) {
        if (!cert.row_coeffs.count(row.row)) continue;
        CHECK(row.verified);
    }
}

TEST_CASE("good y carry at least 3 rho / 4 of the mass") {
    const auto xi = bernoulli();
    for (const auto& a : {rank_one({1, 2, 1, -1}, {1, 1, 2, 1}), rank_one({1, 1, 1, 1}, {1, -1, 1, 3}),
                          CoeffMatrix::scalars({{1, 0, 2, 1}, {0, 1, 1, 0}, {2, 1, 0, 1}, {1, 0, 1, 1}})}) {
        PipelineParams p;
        p.fit.beta = Rational(1, 2);
        PipelineTrace tr;
        try {
            tr = bilinear_certificate(a, xi, xi, p).trace;
        } catch (const NoSpanningTuple&) {
            continue;
        } catch (const CoverageFloorMissed&) {
            continue;
        }
        CHECK(4 * tr.good_mass >= 3 * tr.rho);
        // independent count of good y
        std::vector<std::vector<Rational>> rows(4, std::vector<Rational>(4));
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = 0; j < 4; ++j) rows[i][j] = a.at(i, j)[0];
        Rational good = 0;
        oracle::for_each_outcome(oracle::bernoulli(), 4, [&](const std::vector<Rational>& y, const Rational& m) {
            std::vector<Rational> proj(4);
            for (std::size_t i = 0; i < 4; ++i)
                for (std::size_t j = 0; j < 4; ++j) proj[i] += rows[i][j] * y[j];
            if (4 * oracle::sup_over_midpoints(oracle::linear_samples(proj, oracle::bernoulli()), p.fit.beta) >=
                tr.rho)
                good += m;
        });
        CHECK(good == tr.good_mass);
    }
}

TEST_CASE("bilinear pipeline is deterministic and thread invariant") {
    const auto a = rank_one({1, 2, 1, -1}, {1, 1, 2, 1});
    PipelineParams p;
    p.fit.beta = Rational(1, 2);
    p.y_mode = Sampled{9, 64};
    set_thread_count(1);
    auto one = bilinear_certificate(a, bernoulli(), bernoulli(), p);
    set_thread_count(4);
    auto four = bilinear_certificate(a, bernoulli(), bernoulli(), p);
    set_thread_count(0);
    CHECK(one.certificate == four.certificate);
    CHECK(one.trace.good_mass == four.trace.good_mass);
    CHECK(one.trace.total_mass == 1);
}

TEST_CASE("bilinear pipeline failure classes") {
    PipelineParams p;
    p.fit.beta = Rational(1, 2);
    p.rho = Rational(5);  // nothing reaches rho / 4 > 1
    CHECK_THROWS_AS(bilinear_certificate(CoeffMatrix::zeros(2, 1), bernoulli(), bernoulli(), p), NoGoodVectors);
}

TEST_CASE("quadratic certificate for A = 0 is trivial") {
    PipelineParams p;
    p.fit.beta = Rational(1, 2);
    auto res = quadratic_certificate(CoeffMatrix::zeros(3, 1), bernoulli(), p);
    CHECK(res.certificate.k == 1);
    CHECK(res.certificate.pivot_rows.empty());
    CHECK(res.certificate.surviving.size() == 3);
    CHECK(res.trace.consensus_subsets == 8);
    CHECK_THROWS_AS(quadratic_certificate(CoeffMatrix::scalars({{0, 1}, {2, 0}}), bernoulli(), p), NotSymmetric);
}

TEST_CASE("quadratic certificate on a planted rank-one-sum instance") {
    auto inst = build_rank_one_instance(6, {1, 1, 1, -1, -1, -1}, CoeffVector::scalars({1, 1, 1, 1, 1, 1}),
                                        Rational(0), 0, kBudget);
    const auto& a = std::get<CoeffMatrix>(inst.coefficients);
    PipelineParams p;
    p.fit.beta = Rational(1, 2);
    p.subset_mode = Sampled{5, 24};
    auto res = quadratic_certificate(a, bernoulli(), p);
    CHECK(res.certificate.k != 0);
    CHECK(res.certificate.surviving.size() >= 4);
    auto v = verify_certificate(a, res.certificate, verification_law(bernoulli()), p.fit.beta, kBudget);
    for (const auto& [i, prob] : v) CHECK(prob >= Rational(1, 4));
}

TEST_CASE("verify_certificate") {
    auto a = CoeffMatrix::scalars({{1, 1}, {1, 1}});
    StructureCertificate cert;
    cert.k = 1;
    cert.pivot_rows = {0};
    cert.row_coeffs[1] = {Integer(-1)};
    cert.surviving = {1};
    auto v = verify_certificate(a, cert, verification_law(bernoulli()), Rational(0), kBudget);
    CHECK(v.at(1) == 1);

    cert.row_coeffs[1] = {Integer(0)};
    v = verify_certificate(a, cert, verification_law(bernoulli()), Rational(0), kBudget);
    // P(z1 + z2 = 0) with z uniform-lazy: 0 w.p. 3/4, +-1 w.p. 1/8 each.
    CHECK(v.at(1) == Rational(9, 16) + Rational(2, 64));
    cert.surviving = {0};
    CHECK_THROWS_AS(verify_certificate(a, cert, bernoulli(), Rational(0), kBudget), InvalidParameter);
}
