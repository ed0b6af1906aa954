#include "lo/smallball.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "lo/error.hpp"
#include "lo/parallel.hpp"

namespace lo {

CoeffVector::CoeffVector(std::size_t dim, std::vector<QVec> entries) : dim_(dim), entries_(std::move(entries)) {
    if (dim_ == 0) throw InvalidParameter("coefficient dimension must be positive");
    for (const auto& e : entries_)
        if (e.size() != dim_) throw SizeMismatch("coefficient entry has wrong dimension");
}

CoeffVector CoeffVector::scalars(const std::vector<Rational>& values) {
    std::vector<QVec> e;
    e.reserve(values.size());
    for (const auto& v : values) e.push_back({v});
    return CoeffVector(1, std::move(e));
}

CoeffVector CoeffVector::zeros(std::size_t n, std::size_t dim) {
    return CoeffVector(dim, std::vector<QVec>(n, zero_vec(dim)));
}

CoeffMatrix::CoeffMatrix(std::size_t n, std::size_t dim, std::vector<QVec> entries)
    : n_(n), dim_(dim), entries_(std::move(entries)) {
    if (dim_ == 0) throw InvalidParameter("coefficient dimension must be positive");
    if (entries_.size() != n_ * n_) throw SizeMismatch("matrix needs n*n entries");
    for (const auto& e : entries_)
        if (e.size() != dim_) throw SizeMismatch("matrix entry has wrong dimension");
}

CoeffMatrix CoeffMatrix::zeros(std::size_t n, std::size_t dim) {
    return CoeffMatrix(n, dim, std::vector<QVec>(n * n, zero_vec(dim)));
}

CoeffMatrix CoeffMatrix::scalars(const std::vector<std::vector<Rational>>& rows) {
    const std::size_t n = rows.size();
    std::vector<QVec> e;
    e.reserve(n * n);
    for (const auto& r : rows) {
        if (r.size() != n) throw SizeMismatch("matrix rows must have length n");
        for (const auto& v : r) e.push_back({v});
    }
    return CoeffMatrix(n, 1, std::move(e));
}

bool CoeffMatrix::is_symmetric() const {
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = i + 1; j < n_; ++j)
            if (at(i, j) != at(j, i)) return false;
    return true;
}

std::vector<QVec> CoeffMatrix::row(std::size_t i) const {
    return {entries_.begin() + static_cast<std::ptrdiff_t>(i * n_),
            entries_.begin() + static_cast<std::ptrdiff_t>((i + 1) * n_)};
}

QVec CoeffMatrix::row_dot(std::size_t i, const std::vector<Rational>& y) const {
    if (y.size() != n_) throw SizeMismatch("row_dot argument has wrong length");
    QVec s = zero_vec(dim_);
    for (std::size_t j = 0; j < n_; ++j) add_scaled(s, at(i, j), y[j]);
    return s;
}

std::uint64_t outcome_count(std::size_t support, std::size_t n) {
    constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
    std::uint64_t c = 1;
    for (std::size_t i = 0; i < n; ++i) {
        if (support != 0 && c > kMax / support) return kMax;
        c *= support;
    }
    return c;
}

namespace {

void require_budget(std::uint64_t outcomes, std::uint64_t budget, const char* what) {
    if (outcomes > budget)
        throw BudgetExceeded(std::string(what) + ": " + std::to_string(outcomes) + " outcomes exceed budget " +
                             std::to_string(budget));
}

void merge_into(ValueLaw& dst, const ValueLaw& src, const Rational& weight) {
    for (const auto& [v, m] : src) dst[v] += m * weight;
}

// One convolution step: law of (S + c * X).
ValueLaw convolve_step(const std::vector<std::pair<QVec, Rational>>& cur, std::size_t begin, std::size_t end,
                       const QVec& c, const DiscreteDist& xi) {
    ValueLaw next;
    std::vector<QVec> shifts;
    shifts.reserve(xi.support_size());
    for (const auto& atom : xi.atoms()) shifts.push_back(scale(c, atom.value));
    for (std::size_t i = begin; i < end; ++i) {
        const auto& [v, m] = cur[i];
        for (std::size_t a = 0; a < shifts.size(); ++a) next[add(v, shifts[a])] += m * xi.atoms()[a].mass;
    }
    return next;
}

ValueLaw linear_law_impl(const std::vector<QVec>& coeffs, std::size_t dim, const DiscreteDist& xi, bool parallel) {
    constexpr std::size_t kParallelFloor = 2048;
    ValueLaw law{{zero_vec(dim), Rational(1)}};
    for (const auto& c : coeffs) {
        if (c.size() != dim) throw SizeMismatch("coefficient has wrong dimension");
        if (is_zero(c)) continue;
        std::vector<std::pair<QVec, Rational>> cur(law.begin(), law.end());
        const std::size_t workers = parallel ? thread_count() : 1;
        if (workers <= 1 || cur.size() < kParallelFloor) {
            law = convolve_step(cur, 0, cur.size(), c, xi);
            continue;
        }
        const std::size_t chunks = workers * 4;
        std::vector<ValueLaw> parts(chunks);
        parallel_for(chunks, [&](std::size_t k) {
            std::size_t b = cur.size() * k / chunks, e = cur.size() * (k + 1) / chunks;
            parts[k] = convolve_step(cur, b, e, c, xi);
        });
        law.clear();
        for (const auto& p : parts) merge_into(law, p, Rational(1));
    }
    return law;
}

// Mixed-radix decode of an outcome index (first variable slowest).
std::vector<std::size_t> decode(std::uint64_t index, std::size_t n, std::size_t radix) {
    std::vector<std::size_t> digits(n);
    for (std::size_t i = n; i > 0; --i) {
        digits[i - 1] = static_cast<std::size_t>(index % radix);
        index /= radix;
    }
    return digits;
}

struct QuadraticWalker {
    const CoeffMatrix& a;
    const CoeffVector& b;
    const DiscreteDist& xi;
    std::size_t n, dim;
    std::vector<QVec> sym;  // a_ij + a_ji, row-major

    QuadraticWalker(const CoeffMatrix& a_, const CoeffVector& b_, const DiscreteDist& xi_)
        : a(a_), b(b_), xi(xi_), n(a_.size()), dim(a_.dim()) {
        sym.resize(n * n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) sym[i * n + j] = add(a.at(i, j), a.at(j, i));
    }

    // linear[j] holds b_j + sum over assigned i of (a_ij + a_ji) x_i.
    void walk(std::size_t k, const QVec& value, const Rational& mass, std::vector<QVec>& linear,
              ValueLaw& out) const {
        if (k == n) {
            out[value] += mass;
            return;
        }
        for (const auto& atom : xi.atoms()) {
            const Rational& x = atom.value;
            QVec v = value;
            add_scaled(v, a.at(k, k), x * x);
            add_scaled(v, linear[k], x);
            if (x != 0)
                for (std::size_t j = k + 1; j < n; ++j) add_scaled(linear[j], sym[k * n + j], x);
            walk(k + 1, v, mass * atom.mass, linear, out);
            if (x != 0)
                for (std::size_t j = k + 1; j < n; ++j) add_scaled(linear[j], sym[k * n + j], Rational(-x));
        }
    }

    ValueLaw run_prefix(const std::vector<std::size_t>& prefix) const {
        std::vector<QVec> linear = b.entries();
        QVec value = zero_vec(dim);
        Rational mass = 1;
        for (std::size_t k = 0; k < prefix.size(); ++k) {
            const auto& atom = xi.atoms()[prefix[k]];
            const Rational& x = atom.value;
            add_scaled(value, a.at(k, k), x * x);
            add_scaled(value, linear[k], x);
            for (std::size_t j = k + 1; j < n; ++j) add_scaled(linear[j], sym[k * n + j], x);
            mass *= atom.mass;
        }
        ValueLaw out;
        walk(prefix.size(), value, mass, linear, out);
        return out;
    }
};

}  // namespace

ValueLaw linear_law(const std::vector<QVec>& coeffs, std::size_t dim, const DiscreteDist& xi) {
    return linear_law_impl(coeffs, dim, xi, true);
}

ValueLaw quadratic_law(const CoeffMatrix& a, const CoeffVector& b, const DiscreteDist& xi) {
    if (b.size() != a.size() || b.dim() != a.dim()) throw SizeMismatch("quadratic form shift has wrong shape");
    QuadraticWalker walker(a, b, xi);
    const std::size_t n = a.size();
    const std::size_t s = xi.support_size();
    // Split on a prefix long enough to give every worker several items.
    const std::size_t workers = thread_count();
    std::size_t t = 0;
    std::uint64_t items = 1;
    while (t < n && items < workers * 8) {
        items *= s;
        ++t;
    }
    if (workers <= 1) {
        t = 0;
        items = 1;
    }
    std::vector<ValueLaw> parts(items);
    parallel_for(items, [&](std::size_t idx) { parts[idx] = walker.run_prefix(decode(idx, t, s)); });
    ValueLaw law;
    for (const auto& p : parts) merge_into(law, p, Rational(1));
    return law;
}

ValueLaw bilinear_law(const CoeffMatrix& a, const DiscreteDist& x, const DiscreteDist& y) {
    const std::size_t n = a.size();
    const std::size_t s = y.support_size();
    const std::uint64_t total = outcome_count(s, n);
    const std::size_t chunks = std::max<std::size_t>(1, std::min<std::uint64_t>(total, thread_count() * 8));
    std::vector<ValueLaw> parts(chunks);
    parallel_for(chunks, [&](std::size_t k) {
        std::uint64_t b = total * k / chunks, e = total * (k + 1) / chunks;
        ValueLaw acc;
        for (std::uint64_t idx = b; idx < e; ++idx) {
            auto digits = decode(idx, n, s);
            std::vector<Rational> yv(n);
            Rational mass = 1;
            for (std::size_t j = 0; j < n; ++j) {
                yv[j] = y.atoms()[digits[j]].value;
                mass *= y.atoms()[digits[j]].mass;
            }
            std::vector<QVec> coeffs(n);
            for (std::size_t i = 0; i < n; ++i) coeffs[i] = a.row_dot(i, yv);
            merge_into(acc, linear_law_impl(coeffs, a.dim(), x, false), mass);
        }
        parts[k] = std::move(acc);
    });
    ValueLaw law;
    for (const auto& p : parts) merge_into(law, p, Rational(1));
    return law;
}

Rational ball_mass(const ValueLaw& law, const QVec& center, const Rational& beta) {
    Rational r2 = beta * beta;
    Rational m = 0;
    for (const auto& [v, p] : law)
        if (dist2(v, center) <= r2) m += p;
    return m;
}

BallSup sup_ball_mass(const ValueLaw& law, const Rational& beta) {
    if (beta < 0) throw InvalidParameter("beta must be non-negative");
    if (law.empty()) throw InvalidParameter("empty law");
    const std::size_t dim = law.begin()->first.size();
    BallSup out;
    if (dim == 1) {
        // Optimal window [v_l, v_l + 2 beta] starts at an atom.
        std::vector<std::pair<Rational, Rational>> pts;
        pts.reserve(law.size());
        for (const auto& [v, m] : law) pts.emplace_back(v[0], m);
        Rational width = 2 * beta, window = 0, best = -1;
        std::size_t r = 0, best_l = 0;
        for (std::size_t l = 0; l < pts.size(); ++l) {
            while (r < pts.size() && pts[r].first - pts[l].first <= width) window += pts[r++].second;
            if (window > best) {
                best = window;
                best_l = l;
            }
            window -= pts[l].second;
        }
        out.lower = out.upper = best;
        out.exact = true;
        out.center = {pts[best_l].first + beta};
        return out;
    }
    // A beta-ball holding any atom c lies inside B(c, 2 beta).
    Rational best_lo = -1, best_hi = -1;
    for (const auto& [c, m0] : law) {
        Rational lo = ball_mass(law, c, beta);
        Rational hi = ball_mass(law, c, 2 * beta);
        if (lo > best_lo) {
            best_lo = lo;
            out.center = c;
        }
        if (hi > best_hi) best_hi = hi;
    }
    out.lower = best_lo;
    out.upper = best_hi;
    out.exact = best_lo == best_hi;
    return out;
}

namespace {

SmallBallEstimate finish(const ValueLaw& law, const SmallBallQuery& q) {
    SmallBallEstimate est;
    if (const auto* fixed = std::get_if<FixedCenter>(&q.center)) {
        est.kind = EstimateKind::exact;
        est.value = est.lower = est.upper = ball_mass(law, fixed->center, q.beta);
        est.witness_center = fixed->center;
        return est;
    }
    BallSup sup = sup_ball_mass(law, q.beta);
    est.kind = sup.exact ? EstimateKind::exact : EstimateKind::exact_bracket;
    est.value = sup.lower;
    est.lower = sup.lower;
    est.upper = sup.upper;
    est.witness_center = sup.center;
    return est;
}

void check_beta(const SmallBallQuery& q) {
    if (q.beta < 0) throw InvalidParameter("beta must be non-negative");
}

std::size_t form_dim(const Form& f) {
    return std::visit(
        [](const auto& form) -> std::size_t {
            using T = std::decay_t<decltype(form)>;
            if constexpr (std::is_same_v<T, LinearForm>)
                return form.a.dim();
            else
                return form.a.dim();
        },
        f);
}

void check_center(const SmallBallQuery& q) {
    if (const auto* fixed = std::get_if<FixedCenter>(&q.center))
        if (fixed->center.size() != form_dim(q.form)) throw SizeMismatch("centre has wrong dimension");
}

}  // namespace

SmallBallEstimate rho_linear_exact(const SmallBallQuery& q, std::uint64_t budget) {
    const auto* f = std::get_if<LinearForm>(&q.form);
    if (!f) throw InvalidParameter("rho_linear_exact needs a linear form");
    check_beta(q);
    check_center(q);
    require_budget(outcome_count(q.dist.support_size(), f->a.size()), budget, "linear enumeration");
    return finish(linear_law(f->a.entries(), f->a.dim(), q.dist), q);
}

SmallBallEstimate rho_quadratic_exact(const SmallBallQuery& q, std::uint64_t budget) {
    const auto* f = std::get_if<QuadraticForm>(&q.form);
    if (!f) throw InvalidParameter("rho_quadratic_exact needs a quadratic form");
    check_beta(q);
    check_center(q);
    require_budget(outcome_count(q.dist.support_size(), f->a.size()), budget, "quadratic enumeration");
    return finish(quadratic_law(f->a, f->b, q.dist), q);
}

SmallBallEstimate rho_bilinear_exact(const SmallBallQuery& q, std::uint64_t budget) {
    const auto* f = std::get_if<BilinearForm>(&q.form);
    if (!f) throw InvalidParameter("rho_bilinear_exact needs a bilinear form");
    check_beta(q);
    check_center(q);
    const DiscreteDist& y = q.second_dist ? *q.second_dist : q.dist;
    const std::size_t n = f->a.size();
    std::uint64_t ox = outcome_count(q.dist.support_size(), n), oy = outcome_count(y.support_size(), n);
    std::uint64_t total = (oy != 0 && ox > std::numeric_limits<std::uint64_t>::max() / oy)
                              ? std::numeric_limits<std::uint64_t>::max()
                              : ox * oy;
    require_budget(total, budget, "bilinear enumeration");
    return finish(bilinear_law(f->a, q.dist, y), q);
}

SmallBallEstimate rho_exact(const SmallBallQuery& q, std::uint64_t budget) {
    if (std::holds_alternative<LinearForm>(q.form)) return rho_linear_exact(q, budget);
    if (std::holds_alternative<BilinearForm>(q.form)) return rho_bilinear_exact(q, budget);
    return rho_quadratic_exact(q, budget);
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

namespace {

class AtomSampler {
  public:
    explicit AtomSampler(const DiscreteDist& d) : dist_(d) {
        double acc = 0;
        for (const auto& a : d.atoms()) {
            acc += a.mass.get_d();
            cdf_.push_back(acc);
        }
    }
    const Rational& draw(std::mt19937_64& rng) const {
        double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
        std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
        return dist_.atoms()[i].value;
    }

  private:
    const DiscreteDist& dist_;
    std::vector<double> cdf_;
};

}  // namespace

SmallBallEstimate rho_monte_carlo(const SmallBallQuery& q, std::uint64_t samples, std::uint64_t seed,
                                  const std::vector<QVec>& center_grid) {
    if (samples == 0) throw InvalidParameter("Monte Carlo needs at least one sample");
    check_beta(q);
    check_center(q);
    const bool sup = std::holds_alternative<SupOverCenter>(q.center);
    if (sup && center_grid.empty()) throw EmptyCenterGrid("sup-over-centre Monte Carlo needs a centre grid");
    const std::size_t dim = form_dim(q.form);
    std::vector<QVec> centers = sup ? center_grid : std::vector<QVec>{std::get<FixedCenter>(q.center).center};
    for (const auto& c : centers)
        if (c.size() != dim) throw SizeMismatch("grid centre has wrong dimension");

    const DiscreteDist& ydist = q.second_dist ? *q.second_dist : q.dist;
    AtomSampler xs(q.dist), ys(ydist);
    const Rational r2 = q.beta * q.beta;

    auto sample_value = [&](std::mt19937_64& rng) -> QVec {
        return std::visit(
            [&](const auto& form) -> QVec {
                using T = std::decay_t<decltype(form)>;
                QVec v = zero_vec(dim);
                if constexpr (std::is_same_v<T, LinearForm>) {
                    for (std::size_t i = 0; i < form.a.size(); ++i) add_scaled(v, form.a[i], xs.draw(rng));
                } else if constexpr (std::is_same_v<T, BilinearForm>) {
                    const std::size_t n = form.a.size();
                    std::vector<Rational> x(n), y(n);
                    for (auto& t : x) t = xs.draw(rng);
                    for (auto& t : y) t = ys.draw(rng);
                    for (std::size_t i = 0; i < n; ++i)
                        if (x[i] != 0)
                            for (std::size_t j = 0; j < n; ++j) add_scaled(v, form.a.at(i, j), x[i] * y[j]);
                } else {
                    const std::size_t n = form.a.size();
                    std::vector<Rational> x(n);
                    for (auto& t : x) t = xs.draw(rng);
                    for (std::size_t i = 0; i < n; ++i) {
                        if (x[i] == 0) continue;
                        for (std::size_t j = 0; j < n; ++j) add_scaled(v, form.a.at(i, j), x[i] * x[j]);
                        add_scaled(v, form.b[i], x[i]);
                    }
                }
                return v;
            },
            q.form);
    };

    const std::uint64_t blocks = (samples + kMonteCarloBlock - 1) / kMonteCarloBlock;
    std::vector<std::vector<std::uint64_t>> hits(blocks, std::vector<std::uint64_t>(centers.size(), 0));
    parallel_for(blocks, [&](std::size_t b) {
        std::mt19937_64 rng(splitmix64(seed + b * 0x9E3779B97F4A7C15ull));
        std::uint64_t count = std::min<std::uint64_t>(kMonteCarloBlock, samples - b * kMonteCarloBlock);
        for (std::uint64_t s = 0; s < count; ++s) {
            QVec v = sample_value(rng);
            for (std::size_t c = 0; c < centers.size(); ++c)
                if (dist2(v, centers[c]) <= r2) ++hits[b][c];
        }
    });

    std::size_t best = 0;
    std::vector<std::uint64_t> totals(centers.size(), 0);
    for (const auto& h : hits)
        for (std::size_t c = 0; c < centers.size(); ++c) totals[c] += h[c];
    for (std::size_t c = 1; c < centers.size(); ++c)
        if (totals[c] > totals[best]) best = c;

    SmallBallEstimate est;
    est.kind = EstimateKind::monte_carlo;
    est.samples = samples;
    est.seed = seed;
    est.value = Rational(Integer(std::to_string(totals[best]), 10), Integer(std::to_string(samples), 10));
    est.value.canonicalize();
    est.lower = est.upper = est.value;
    est.witness_center = centers[best];
    const double p = est.value.get_d();
    const double half = 1.959963984540054 * std::sqrt(p * (1 - p) / static_cast<double>(samples));
    est.ci_low = std::max(0.0, p - half);
    est.ci_high = std::min(1.0, p + half);
    return est;
}

}  // namespace lo
