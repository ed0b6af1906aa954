#pragma once
// Bipartite masking of a quadratic form and an exact numerical check of the
// decoupling inequality
//   P_{v,w}(|sum A_U(ij) v_i w_j| <= tau) >= rho^8 / (2 (2 pi)^{7d/2} e^{4 pi}),
// with v, w iid copies of xi - xi' and tau = c_log * beta * sqrt(ln n).

#include <cstdint>
#include <optional>
#include <string>

#include "lo/randvar.hpp"
#include "lo/smallball.hpp"

namespace lo {

/// Subset of {0, ..., n-1}; bit i set means i is a member. n <= 64.
struct SubsetMask {
    std::size_t n = 0;
    std::uint64_t bits = 0;

    SubsetMask() = default;
    SubsetMask(std::size_t size, std::uint64_t members);
    static SubsetMask from_indices(std::size_t size, const std::vector<std::size_t>& members);
    /// Accepts "0b0101" (bit i = last-but-i character), decimal, or "1,3" style lists.
    static SubsetMask parse(std::size_t size, const std::string& text);

    bool contains(std::size_t i) const { return (bits >> i) & 1u; }
    SubsetMask complement() const;
    std::size_t count() const;

    friend bool operator==(const SubsetMask&, const SubsetMask&) = default;
};

/// A_U(ij) = a_ij when exactly one of i, j lies in U, else 0.
CoeffMatrix mask_matrix(const CoeffMatrix& a, const SubsetMask& u);

struct DecouplingParams {
    Rational beta;
    DiscreteDist xi = DiscreteDist::point_mass(Rational(0));
    std::optional<CoeffVector> b;          // zeros when absent
    CenterMode center = SupOverCenter{};
    Rational c_log = 1;
    std::optional<ConditionParams> condition;
    std::uint64_t budget = 1u << 24;
};

struct DecouplingReport {
    Rational lhs_rho;
    QVec lhs_center;
    Rational rhs_prob;
    /// Certified lower bounds on tau^2 and tau.
    Rational tau_squared;
    Rational tau;
    /// Certified upper bounds on the two candidate floors (e^{4 pi} and e^{8 pi}).
    Rational constant_floor;
    Rational constant_floor_8pi;
    bool verdict = false;
    bool verdict_8pi = false;
    /// Smallest c_log in {0} U {2^k : -8 <= k <= 16} whose verdict is true.
    std::optional<Rational> min_c_log;
    std::optional<ConditionCheck> condition;
};

DecouplingReport decoupling_check(const CoeffMatrix& a, const SubsetMask& u, const DecouplingParams& p);

/// Certified lower bound on (2 pi)^{7d/2} e^{k pi}.
Rational decoupling_constant_lower(std::size_t dim, unsigned exp_pi_multiple);

/// Certified lower bound on ln n.
Rational log_lower(std::uint64_t n);

}  // namespace lo
