#include "lo/constructions.hpp"

#include <random>

#include "lo/error.hpp"

namespace lo {

const char* to_string(InstanceKind kind) {
    switch (kind) {
        case InstanceKind::linear_gap: return "ex1.1";
        case InstanceKind::quadratic_gap: return "ex1.4";
        case InstanceKind::rank_one: return "ex1.5";
        case InstanceKind::mixed: return "ex1.6";
    }
    return "?";
}

InstanceKind parse_instance_kind(const std::string& text) {
    if (text == "ex1.1" || text == "linear_gap") return InstanceKind::linear_gap;
    if (text == "ex1.4" || text == "quadratic_gap") return InstanceKind::quadratic_gap;
    if (text == "ex1.5" || text == "rank_one") return InstanceKind::rank_one;
    if (text == "ex1.6" || text == "mixed") return InstanceKind::mixed;
    throw InvalidParameter("unknown instance kind '" + text + "'");
}

std::size_t StructuredInstance::size() const {
    return std::visit([](const auto& c) { return c.size(); }, coefficients);
}

std::size_t StructuredInstance::dim() const {
    return std::visit([](const auto& c) { return c.dim(); }, coefficients);
}

namespace {

const DiscreteDist& bernoulli() {
    static const DiscreteDist d = bernoulli_lazy(Rational(1));
    return d;
}

// Index draw by plain modulo so streams agree across standard libraries.
std::size_t draw(std::mt19937_64& rng, std::size_t count) { return static_cast<std::size_t>(rng() % count); }

std::vector<std::vector<std::int64_t>> lattice_ball(std::size_t dim, std::int64_t radius) {
    std::vector<std::vector<std::int64_t>> out;
    std::vector<std::int64_t> z(dim, -radius);
    while (true) {
        std::int64_t n2 = 0;
        for (auto c : z) n2 += c * c;
        if (n2 <= radius * radius) out.push_back(z);
        std::size_t i = dim;
        while (i > 0 && z[i - 1] == radius) z[--i] = -radius;
        if (i == 0) return out;
        ++z[i - 1];
    }
}

class Perturber {
  public:
    Perturber(std::size_t dim, const Rational& delta) : delta_(delta), points_(lattice_ball(dim, kPerturbationLattice)) {
        if (delta < 0) throw InvalidParameter("perturbation must be non-negative");
    }
    QVec operator()(const QVec& v, std::mt19937_64& rng) const {
        if (delta_ == 0) return v;
        const auto& z = points_[draw(rng, points_.size())];
        QVec out = v;
        for (std::size_t c = 0; c < out.size(); ++c)
            out[c] += delta_ * Rational(static_cast<long>(z[c])) / Rational(static_cast<long>(kPerturbationLattice));
        return out;
    }

  private:
    Rational delta_;
    std::vector<std::vector<std::int64_t>> points_;
};

Rational inverse_volume(const Gap& q, std::int64_t m, std::uint64_t budget) {
    Gap dq = dilate(q, m);
    std::uint64_t vol = gap_volume(dq);
    if (vol > budget) throw BudgetExceeded("dilated GAP volume " + std::to_string(vol) + " exceeds budget");
    Rational r(Integer(1), Integer(std::to_string(vol), 10));
    r.canonicalize();
    return r;
}

void require_gap(const Gap& q, std::uint64_t budget) {
    if (!q.symmetric()) throw NotSymmetric("planted GAP must be symmetric");
    if (gap_volume(q) > budget) throw BudgetExceeded("planted GAP volume exceeds budget");
    if (!is_proper(q, budget)) throw NotProper("planted GAP must be proper");
}

std::vector<QVec> draw_symmetric_gap_values(std::size_t n, const std::vector<GapPoint>& pts, std::mt19937_64& rng) {
    std::vector<QVec> v(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) v[i * n + j] = v[j * n + i] = pts[draw(rng, pts.size())].value;
    return v;
}

CoeffMatrix perturb_symmetric(std::size_t n, std::size_t dim, const std::vector<QVec>& values, const Rational& delta,
                              std::mt19937_64& rng) {
    Perturber perturb(dim, delta);
    std::vector<QVec> a(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) a[i * n + j] = a[j * n + i] = perturb(values[i * n + j], rng);
    return CoeffMatrix(n, dim, std::move(a));
}

// q_ij += sum_s k_si b_sj + k_sj b_si
void add_rank_part(std::vector<QVec>& values, std::size_t n, const IntMatrix& k, const std::vector<CoeffVector>& b) {
    for (std::size_t s = 0; s < k.size(); ++s)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                add_scaled(values[i * n + j], b[s][j], Rational(static_cast<long>(k[s][i])));
                add_scaled(values[i * n + j], b[s][i], Rational(static_cast<long>(k[s][j])));
            }
}

void check_rank_inputs(std::size_t n, std::size_t dim, const IntMatrix& k, const std::vector<CoeffVector>& b) {
    if (k.size() != b.size()) throw SizeMismatch("need one b row per k row");
    for (std::size_t s = 0; s < k.size(); ++s) {
        if (k[s].size() != n || b[s].size() != n) throw SizeMismatch("k and b rows must have length n");
        if (b[s].dim() != dim) throw SizeMismatch("b rows must match the ambient dimension");
    }
}

}  // namespace

Rational kernel_probability(const IntMatrix& k, std::size_t n, std::uint64_t budget) {
    if (k.empty()) return Rational(1);
    if (outcome_count(2, n) > budget) throw BudgetExceeded("kernel probability enumeration exceeds budget");
    std::vector<QVec> coeffs(n, zero_vec(k.size()));
    for (std::size_t s = 0; s < k.size(); ++s) {
        if (k[s].size() != n) throw SizeMismatch("k rows must have length n");
        for (std::size_t i = 0; i < n; ++i) coeffs[i][s] = Rational(static_cast<long>(k[s][i]));
    }
    auto law = linear_law(coeffs, k.size(), bernoulli());
    auto it = law.find(zero_vec(k.size()));
    return it == law.end() ? Rational(0) : it->second;
}

StructuredInstance build_linear_gap_instance(std::size_t n, const Gap& q, const Rational& delta, std::uint64_t seed,
                                             std::uint64_t budget) {
    if (n == 0) throw InvalidParameter("n must be positive");
    require_gap(q, budget);
    StructuredInstance inst{InstanceKind::linear_gap, CoeffVector::zeros(n, q.ambient_dim()), q, delta, {}, 0, 0, seed};
    inst.claimed_rho_lower = inverse_volume(q, static_cast<std::int64_t>(n), budget);
    inst.claimed_beta = delta * static_cast<long>(n);

    std::mt19937_64 rng(seed);
    const auto pts = gap_enumerate(q, budget);
    Perturber perturb(q.ambient_dim(), delta);
    std::vector<QVec> a;
    for (std::size_t i = 0; i < n; ++i) inst.hidden.values.push_back(pts[draw(rng, pts.size())].value);
    for (std::size_t i = 0; i < n; ++i) a.push_back(perturb(inst.hidden.values[i], rng));
    inst.coefficients = CoeffVector(q.ambient_dim(), std::move(a));
    return inst;
}

StructuredInstance build_quadratic_gap_instance(std::size_t n, const Gap& q, const Rational& delta,
                                                std::uint64_t seed, std::uint64_t budget) {
    if (n == 0) throw InvalidParameter("n must be positive");
    require_gap(q, budget);
    const auto m = static_cast<std::int64_t>(n * n);
    StructuredInstance inst{InstanceKind::quadratic_gap, CoeffMatrix::zeros(n, q.ambient_dim()), q, delta, {}, 0, 0, seed};
    inst.claimed_rho_lower = inverse_volume(q, m, budget);
    inst.claimed_beta = delta * static_cast<long>(m);

    std::mt19937_64 rng(seed);
    inst.hidden.gap_part = draw_symmetric_gap_values(n, gap_enumerate(q, budget), rng);
    inst.hidden.values = inst.hidden.gap_part;
    inst.coefficients = perturb_symmetric(n, q.ambient_dim(), inst.hidden.values, delta, rng);
    return inst;
}

StructuredInstance build_rank_one_instance(std::size_t n, const std::vector<std::int64_t>& k, const CoeffVector& b,
                                           const Rational& delta, std::uint64_t seed, std::uint64_t budget) {
    if (n == 0) throw InvalidParameter("n must be positive");
    const std::size_t dim = b.dim();
    IntMatrix kk{k};
    check_rank_inputs(n, dim, kk, {b});
    Rational p = kernel_probability(kk, n, budget);
    if (p == 0) throw InfeasibleK("sum k_i x_i never vanishes for Bernoulli x");

    StructuredInstance inst{InstanceKind::rank_one, CoeffMatrix::zeros(n, dim), std::nullopt, delta, {}, 0, p, seed};
    inst.claimed_beta = delta * static_cast<long>(n * n);
    inst.hidden.k = kk;
    inst.hidden.b = {b.entries()};
    inst.hidden.values.assign(n * n, zero_vec(dim));
    inst.hidden.gap_part = inst.hidden.values;
    add_rank_part(inst.hidden.values, n, kk, {b});

    std::mt19937_64 rng(seed);
    inst.coefficients = perturb_symmetric(n, dim, inst.hidden.values, delta, rng);
    return inst;
}

StructuredInstance build_mixed_instance(std::size_t n, const Gap& q, const IntMatrix& k,
                                        const std::vector<CoeffVector>& b, const Rational& delta, std::uint64_t seed,
                                        std::uint64_t budget) {
    if (n == 0) throw InvalidParameter("n must be positive");
    require_gap(q, budget);
    const std::size_t dim = q.ambient_dim();
    check_rank_inputs(n, dim, k, b);
    Rational p = kernel_probability(k, n, budget);
    if (p == 0) throw InfeasibleK("the rows of k have no common Bernoulli kernel vector");

    const auto m = static_cast<std::int64_t>(n * n);
    StructuredInstance inst{InstanceKind::mixed, CoeffMatrix::zeros(n, dim), q, delta, {}, 0, 0, seed};
    inst.claimed_rho_lower = p * inverse_volume(q, m, budget);
    inst.claimed_beta = delta * static_cast<long>(m);
    inst.hidden.k = k;
    for (const auto& row : b) inst.hidden.b.push_back(row.entries());

    std::mt19937_64 rng(seed);
    inst.hidden.gap_part = draw_symmetric_gap_values(n, gap_enumerate(q, budget), rng);
    inst.hidden.values = inst.hidden.gap_part;
    add_rank_part(inst.hidden.values, n, k, b);
    inst.coefficients = perturb_symmetric(n, dim, inst.hidden.values, delta, rng);
    return inst;
}

InstanceCheck certify_instance(const StructuredInstance& inst, std::uint64_t budget) {
    const std::size_t n = inst.size(), dim = inst.dim();
    if (outcome_count(2, n) > budget) throw BudgetExceeded("instance check exceeds enumeration budget");
    ValueLaw planted;
    Form form = LinearForm{CoeffVector::zeros(n, dim)};
    if (inst.kind == InstanceKind::linear_gap) {
        planted = linear_law(inst.hidden.values, dim, bernoulli());
        form = LinearForm{std::get<CoeffVector>(inst.coefficients)};
    } else {
        planted = quadratic_law(CoeffMatrix(n, dim, inst.hidden.values), CoeffVector::zeros(n, dim), bernoulli());
        form = QuadraticForm{std::get<CoeffMatrix>(inst.coefficients), CoeffVector::zeros(n, dim)};
    }
    InstanceCheck out;
    Rational heaviest = -1;
    for (const auto& [v, m] : planted)
        if (m > heaviest) {
            heaviest = m;
            out.witness_center = v;
        }
    SmallBallQuery q{inst.claimed_beta, form, FixedCenter{out.witness_center}, bernoulli(), std::nullopt};
    out.witness_mass = rho_exact(q, budget).value;
    if (dim == 1) {
        q.center = SupOverCenter{};
        out.sup = rho_exact(q, budget);
    }
    out.holds = out.witness_mass >= inst.claimed_rho_lower;
    return out;
}

}  // namespace lo
