#pragma once
// Finite-support real random variables with exact rational masses.

#include <vector>

#include "lo/rational.hpp"

namespace lo {

struct Atom {
    Rational value;
    Rational mass;

    friend bool operator==(const Atom&, const Atom&) = default;
};

/// Atoms sorted by value, values distinct, masses positive and summing to 1.
class DiscreteDist {
  public:
    /// Merges repeated values, drops zero masses, sorts. Throws
    /// InvalidParameter on negative masses or a total other than 1.
    explicit DiscreteDist(std::vector<Atom> atoms);

    static DiscreteDist point_mass(const Rational& value);

    const std::vector<Atom>& atoms() const { return atoms_; }
    std::size_t support_size() const { return atoms_.size(); }
    /// Mass at `value` (0 if not an atom).
    Rational mass_at(const Rational& value) const;

    friend bool operator==(const DiscreteDist&, const DiscreteDist&) = default;

  private:
    std::vector<Atom> atoms_;
};

struct ConditionParams {
    Rational c1, c2, c3;
};

struct ConditionCheck {
    Rational probability;
    bool satisfied = false;
};

/// eta^(mu): +-1 with probability mu/2 each, 0 with probability 1 - mu.
DiscreteDist bernoulli_lazy(const Rational& mu);

/// Law of xi - xi' for an independent copy xi'.
DiscreteDist symmetrize(const DiscreteDist& xi);

/// Law of eta^(mu) * Z for Z ~ zeta independent of eta^(mu).
DiscreteDist lazy_product(const DiscreteDist& zeta, const Rational& mu);

/// Law of c * X.
DiscreteDist scale(const DiscreteDist& xi, const Rational& c);

/// P(c1 <= |xi - xi'| <= c2) and whether it reaches c3.
ConditionCheck check_condition(const DiscreteDist& xi, const ConditionParams& p);

}  // namespace lo
