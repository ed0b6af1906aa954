#include "lo/decoupling.hpp"

#include <mpfr.h>

#include <bit>
#include <sstream>

#include "lo/error.hpp"

namespace lo {

namespace {

constexpr mpfr_prec_t kPrecision = 128;

class Mpfr {
  public:
    Mpfr() { mpfr_init2(v_, kPrecision); }
    ~Mpfr() { mpfr_clear(v_); }
    Mpfr(const Mpfr&) = delete;
    Mpfr& operator=(const Mpfr&) = delete;
    mpfr_ptr get() { return v_; }

    Rational to_rational() {
        Rational r;
        mpfr_get_q(r.get_mpq_t(), v_);
        return r;
    }

  private:
    mpfr_t v_;
};

std::uint64_t full_mask(std::size_t n) { return n == 64 ? ~0ull : ((1ull << n) - 1); }

}  // namespace

SubsetMask::SubsetMask(std::size_t size, std::uint64_t members) : n(size), bits(members) {
    if (size > 64) throw InvalidParameter("subset masks support n <= 64");
    if (members & ~full_mask(size)) throw InvalidParameter("subset member out of range");
}

SubsetMask SubsetMask::from_indices(std::size_t size, const std::vector<std::size_t>& members) {
    std::uint64_t bits = 0;
    for (auto i : members) {
        if (i >= size || i >= 64) throw InvalidParameter("subset member out of range");
        bits |= 1ull << i;
    }
    return SubsetMask(size, bits);
}

SubsetMask SubsetMask::parse(std::size_t size, const std::string& text) {
    if (text.rfind("0b", 0) == 0) {
        std::uint64_t bits = 0;
        if (text.size() == 2 || text.size() > 66) throw InvalidParameter("bad binary subset '" + text + "'");
        for (std::size_t k = 2; k < text.size(); ++k) {
            if (text[k] != '0' && text[k] != '1') throw InvalidParameter("bad binary subset '" + text + "'");
            bits = (bits << 1) | static_cast<std::uint64_t>(text[k] - '0');
        }
        return SubsetMask(size, bits);
    }
    if (text.find(',') != std::string::npos || text.empty()) {
        std::vector<std::size_t> idx;
        std::stringstream ss(text);
        std::string part;
        while (std::getline(ss, part, ',')) {
            try {
                std::size_t pos = 0;
                idx.push_back(std::stoul(part, &pos));
                if (pos != part.size()) throw std::invalid_argument(part);
            } catch (const std::exception&) {
                throw InvalidParameter("bad subset index '" + part + "'");
            }
        }
        return from_indices(size, idx);
    }
    try {
        std::size_t pos = 0;
        auto bits = std::stoull(text, &pos);
        if (pos != text.size()) throw std::invalid_argument(text);
        return SubsetMask(size, bits);
    } catch (const InvalidParameter&) {
        throw;
    } catch (const std::exception&) {
        throw InvalidParameter("bad subset '" + text + "'");
    }
}

SubsetMask SubsetMask::complement() const { return SubsetMask(n, ~bits & full_mask(n)); }

std::size_t SubsetMask::count() const { return static_cast<std::size_t>(std::popcount(bits)); }

CoeffMatrix mask_matrix(const CoeffMatrix& a, const SubsetMask& u) {
    if (u.n != a.size()) throw SizeMismatch("subset size does not match the matrix");
    if (!a.is_symmetric()) throw NotSymmetric("mask_matrix needs a symmetric matrix");
    CoeffMatrix out = CoeffMatrix::zeros(a.size(), a.dim());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a.size(); ++j)
            if (u.contains(i) != u.contains(j)) out.at(i, j) = a.at(i, j);
    return out;
}

Rational decoupling_constant_lower(std::size_t dim, unsigned exp_pi_multiple) {
    Mpfr pi, base, power, e, out;
    mpfr_const_pi(pi.get(), MPFR_RNDD);
    mpfr_mul_ui(base.get(), pi.get(), 2, MPFR_RNDD);
    // (2 pi)^{7d/2}: base >= 1 and a positive exponent, so rounding down is monotone.
    mpfr_pow_ui(power.get(), base.get(), static_cast<unsigned long>(7 * dim), MPFR_RNDD);
    mpfr_sqrt(power.get(), power.get(), MPFR_RNDD);
    mpfr_mul_ui(e.get(), pi.get(), exp_pi_multiple, MPFR_RNDD);
    mpfr_exp(e.get(), e.get(), MPFR_RNDD);
    mpfr_mul(out.get(), power.get(), e.get(), MPFR_RNDD);
    return out.to_rational();
}

Rational log_lower(std::uint64_t n) {
    if (n == 0) throw InvalidParameter("log of zero");
    if (n == 1) return Rational(0);
    Mpfr x;
    mpfr_set_ui(x.get(), static_cast<unsigned long>(n), MPFR_RNDD);
    mpfr_log(x.get(), x.get(), MPFR_RNDD);
    return x.to_rational();
}

namespace {

Rational sqrt_lower(const Rational& x) {
    Mpfr v;
    mpfr_set_q(v.get(), x.get_mpq_t(), MPFR_RNDD);
    mpfr_sqrt(v.get(), v.get(), MPFR_RNDD);
    return v.to_rational();
}

Rational mass_within(const ValueLaw& law, const Rational& radius_sq) {
    Rational m = 0;
    for (const auto& [v, p] : law)
        if (norm2(v) <= radius_sq) m += p;
    return m;
}

Rational floor_upper(const Rational& rho, const Rational& constant_lower) {
    Rational f = pow(rho, 8) / (2 * constant_lower);
    f.canonicalize();
    return f;
}

}  // namespace

DecouplingReport decoupling_check(const CoeffMatrix& a, const SubsetMask& u, const DecouplingParams& p) {
    const std::size_t n = a.size(), dim = a.dim();
    if (p.beta < 0) throw InvalidParameter("beta must be non-negative");
    if (p.c_log < 0) throw InvalidParameter("c_log must be non-negative");
    if (u.n != n) throw SizeMismatch("subset size does not match the matrix");
    if (!a.is_symmetric()) throw NotSymmetric("decoupling needs a symmetric matrix");

    DecouplingReport rep;
    if (p.condition) rep.condition = check_condition(p.xi, *p.condition);

    const CoeffVector b = p.b ? *p.b : CoeffVector::zeros(n, dim);
    SmallBallQuery lhs{p.beta, QuadraticForm{a, b}, p.center, p.xi, std::nullopt};
    auto est = rho_quadratic_exact(lhs, p.budget);
    rep.lhs_rho = est.value;
    rep.lhs_center = est.witness_center;

    const DiscreteDist sym = symmetrize(p.xi);
    const std::uint64_t side = outcome_count(sym.support_size(), n);
    if (side != 0 && side > p.budget / side) throw BudgetExceeded("decoupling right-hand side exceeds budget");
    const ValueLaw law = bilinear_law(mask_matrix(a, u), sym, sym);

    const Rational log_n = log_lower(n);
    auto tau_sq = [&](const Rational& c) {
        Rational t = c * c * p.beta * p.beta * log_n;
        t.canonicalize();
        return t;
    };
    rep.tau_squared = tau_sq(p.c_log);
    rep.tau = sqrt_lower(rep.tau_squared);
    rep.rhs_prob = mass_within(law, rep.tau_squared);

    rep.constant_floor = floor_upper(rep.lhs_rho, decoupling_constant_lower(dim, 4));
    rep.constant_floor_8pi = floor_upper(rep.lhs_rho, decoupling_constant_lower(dim, 8));
    rep.verdict = rep.rhs_prob >= rep.constant_floor;
    rep.verdict_8pi = rep.rhs_prob >= rep.constant_floor_8pi;

    std::vector<Rational> candidates{Rational(0)};
    for (int k = -8; k <= 16; ++k)
        candidates.push_back(k < 0 ? Rational(1, 1ul << -k) : Rational(static_cast<long>(1ul << k)));
    for (const auto& c : candidates)
        if (mass_within(law, tau_sq(c)) >= rep.constant_floor) {
            rep.min_c_log = c;
            break;
        }
    return rep;
}

}  // namespace lo
