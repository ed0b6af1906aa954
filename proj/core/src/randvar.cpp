#include "lo/randvar.hpp"

#include <map>

#include "lo/error.hpp"

namespace lo {

DiscreteDist::DiscreteDist(std::vector<Atom> atoms) {
    std::map<Rational, Rational> merged;
    Rational total = 0;
    for (auto& a : atoms) {
        if (a.mass < 0) throw InvalidParameter("negative atom mass " + to_string(a.mass));
        total += a.mass;
        if (a.mass == 0) continue;
        merged[a.value] += a.mass;
    }
    if (total != 1) throw InvalidParameter("atom masses sum to " + to_string(total) + ", not 1");
    atoms_.reserve(merged.size());
    for (auto& [v, m] : merged) atoms_.push_back({v, m});
}

DiscreteDist DiscreteDist::point_mass(const Rational& value) { return DiscreteDist({{value, Rational(1)}}); }

Rational DiscreteDist::mass_at(const Rational& value) const {
    for (const auto& a : atoms_)
        if (a.value == value) return a.mass;
    return 0;
}

DiscreteDist bernoulli_lazy(const Rational& mu) {
    if (mu <= 0 || mu > 1) throw InvalidParameter("lazy Bernoulli parameter must lie in (0,1], got " + to_string(mu));
    Rational half = mu / 2;
    return DiscreteDist({{Rational(-1), half}, {Rational(0), Rational(1) - mu}, {Rational(1), half}});
}

DiscreteDist symmetrize(const DiscreteDist& xi) {
    std::vector<Atom> out;
    out.reserve(xi.support_size() * xi.support_size());
    for (const auto& a : xi.atoms())
        for (const auto& b : xi.atoms()) out.push_back({a.value - b.value, a.mass * b.mass});
    return DiscreteDist(std::move(out));
}

DiscreteDist lazy_product(const DiscreteDist& zeta, const Rational& mu) {
    DiscreteDist eta = bernoulli_lazy(mu);
    std::vector<Atom> out;
    for (const auto& e : eta.atoms())
        for (const auto& z : zeta.atoms()) out.push_back({e.value * z.value, e.mass * z.mass});
    return DiscreteDist(std::move(out));
}

DiscreteDist scale(const DiscreteDist& xi, const Rational& c) {
    std::vector<Atom> out;
    for (const auto& a : xi.atoms()) out.push_back({a.value * c, a.mass});
    return DiscreteDist(std::move(out));
}

ConditionCheck check_condition(const DiscreteDist& xi, const ConditionParams& p) {
    if (!(0 < p.c1 && p.c1 < p.c2) || !(0 < p.c3 && p.c3 <= 1))
        throw InvalidParameter("condition parameters need 0 < c1 < c2 and 0 < c3 <= 1");
    Rational prob = 0;
    const DiscreteDist diff = symmetrize(xi);
    for (const auto& a : diff.atoms()) {
        Rational m = abs(a.value);
        if (p.c1 <= m && m <= p.c2) prob += a.mass;
    }
    return {prob, prob >= p.c3};
}

}  // namespace lo
