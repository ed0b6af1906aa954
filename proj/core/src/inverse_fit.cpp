#include <algorithm>
#include <functional>
#include <mutex>
#include <numeric>

#include "lo/error.hpp"
#include "lo/inverse.hpp"

namespace lo {

namespace {

using i128 = __int128;

Integer ipow(const Integer& base, unsigned long e) {
    Integer out;
    mpz_pow_ui(out.get_mpz_t(), base.get_mpz_t(), e);
    return out;
}

// Splits e = p/q >= 0 into (p, q).
std::pair<unsigned long, unsigned long> exponent_parts(const Rational& e) {
    Rational c = e;
    c.canonicalize();
    if (c < 0) throw InvalidParameter("exponent must be non-negative");
    if (!c.get_num().fits_ulong_p() || !c.get_den().fits_ulong_p() || c.get_num() > 64 * c.get_den())
        throw InvalidParameter("exponent out of range");
    return {c.get_num().get_ui(), c.get_den().get_ui()};
}

// Nearest integer to num / den (den > 0).
std::int64_t nearest(i128 num, i128 den) {
    i128 a = 2 * num + den, b = 2 * den;
    i128 q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return static_cast<std::int64_t>(q);
}

std::int64_t nearest(const Rational& num, const Rational& den) {
    Rational x = num / den + Rational(1, 2);
    x.canonicalize();
    Integer f = floor_of(x);
    if (f > Integer(INT64_MAX / 2)) return INT64_MAX / 2;
    if (f < Integer(INT64_MIN / 2)) return INT64_MIN / 2;
    return f.get_si();
}

template <class T>
T from_i64(std::int64_t v) {
    if constexpr (std::is_same_v<T, Rational>)
        return Rational(static_cast<long>(v));
    else
        return static_cast<T>(v);
}

template <class T>
T dotv(const std::vector<T>& a, const std::vector<T>& b) {
    T s = 0;
    for (std::size_t c = 0; c < a.size(); ++c) s += a[c] * b[c];
    return s;
}

// Points within sqrt(thr2) of the symmetric GAP spanned by gens with half-widths dims.
template <class T>
struct Coverage {
    const std::vector<std::vector<T>>& pts;
    T thr2;

    bool covers(const std::vector<T>& p, const std::vector<std::vector<T>>& gens, const std::vector<T>& gg,
                const Coords& dims) const {
        const std::size_t r = gens.size();
        if (r == 0) return dotv(p, p) <= thr2;
        const std::size_t d = p.size();
        Coords k(r - 1);
        for (std::size_t l = 0; l + 1 < r; ++l) k[l] = -dims[l];
        std::vector<T> res(d);
        const auto& g = gens[r - 1];
        const std::int64_t kl = dims[r - 1];
        while (true) {
            for (std::size_t c = 0; c < d; ++c) {
                T v = p[c];
                for (std::size_t l = 0; l + 1 < r; ++l) v -= from_i64<T>(k[l]) * gens[l][c];
                res[c] = v;
            }
            const T rg = dotv(res, g);
            std::int64_t t = nearest(rg, gg[r - 1]);
            t = std::clamp<std::int64_t>(t, -kl, kl);
            const T tt = from_i64<T>(t);
            if (dotv(res, res) - 2 * tt * rg + tt * tt * gg[r - 1] <= thr2) return true;
            std::size_t l = r - 1;
            while (l > 0) {
                --l;
                if (k[l] < dims[l]) {
                    ++k[l];
                    for (std::size_t m = l + 1; m + 1 < r; ++m) k[m] = -dims[m];
                    goto next;
                }
                if (l == 0) return false;
            }
            return false;
        next:;
        }
    }

    // Counts covered points; gives up (returning a value below target) once target is out of reach.
    std::size_t count(const std::vector<std::vector<T>>& gens, const Coords& dims, std::size_t target) const {
        std::vector<T> gg(gens.size());
        for (std::size_t l = 0; l < gens.size(); ++l) gg[l] = dotv(gens[l], gens[l]);
        std::size_t covered = 0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (covers(pts[i], gens, gg, dims)) ++covered;
            if (covered + (pts.size() - i - 1) < target) return covered;
        }
        return covered;
    }
};

struct Best {
    std::size_t coverage = 0;
    std::size_t rank = 0;
    std::uint64_t volume = 0;
    std::vector<QVec> steps;  // in units of beta
    Coords dims;
    bool found = false;
};

// Tie-break on everything but coverage: smaller rank, volume, steps, dims.
bool tie_less(std::size_t rank, std::uint64_t volume, const std::vector<QVec>& steps, const Coords& dims,
              const Best& b) {
    if (rank != b.rank) return rank < b.rank;
    if (volume != b.volume) return volume < b.volume;
    if (steps != b.steps) return steps < b.steps;
    return dims < b.dims;
}

std::vector<Coords> step_numerators(std::size_t d, std::int64_t m_max) {
    std::vector<Coords> out;
    Coords m(d, -m_max);
    while (true) {
        auto first = std::find_if(m.begin(), m.end(), [](std::int64_t v) { return v != 0; });
        if (first != m.end() && *first > 0) out.push_back(m);
        std::size_t c = d;
        while (c > 0) {
            --c;
            if (m[c] < m_max) {
                ++m[c];
                for (std::size_t e = c + 1; e < d; ++e) m[e] = -m_max;
                break;
            }
            if (c == 0) return out;
        }
    }
}

void dims_tuples(std::size_t r, std::int64_t k_max, std::uint64_t cap, Coords& cur, std::uint64_t vol,
                 std::vector<std::pair<Coords, std::uint64_t>>& out) {
    if (cur.size() == r) {
        out.emplace_back(cur, vol);
        return;
    }
    for (std::int64_t k = 1; k <= k_max; ++k) {
        const std::uint64_t side = static_cast<std::uint64_t>(2 * k + 1);
        if (vol > cap / side) break;
        cur.push_back(k);
        dims_tuples(r, k_max, cap, cur, vol * side, out);
        cur.pop_back();
    }
}

Integer binomial(std::size_t n, std::size_t k) {
    Integer out;
    mpz_bin_uiui(out.get_mpz_t(), n, k);
    return out;
}

// Exact problem data scaled to integers when the magnitudes allow.
struct Scaled {
    bool ok = false;
    std::vector<std::vector<i128>> pts;
    i128 unit = 0;  // beta / lcm(1..p_max), scaled
    i128 thr2 = 0;
};

Scaled scale_to_integers(const std::vector<QVec>& points, const Rational& beta, std::int64_t lcm_p,
                         const FitParams& fp) {
    Scaled s;
    Rational unit = beta / Rational(static_cast<long>(lcm_p));
    unit.canonicalize();
    Integer den = unit.get_den();
    for (const auto& p : points)
        for (const auto& c : p) mpz_lcm(den.get_mpz_t(), den.get_mpz_t(), c.get_den().get_mpz_t());
    const Integer limit = Integer(1) << 48;
    auto conv = [&](const Rational& x, i128& out) {
        Integer v = x.get_num() * (den / x.get_den());
        if (abs(v) >= limit) return false;
        out = static_cast<i128>(v.get_si());
        return true;
    };
    if (!conv(unit, s.unit)) return s;
    const Integer reach = Integer(static_cast<long>(s.unit)) * lcm_p * fp.m_max *
                          (fp.k_max * static_cast<long>(fp.r_max) + 1);
    if (reach >= limit) return s;
    s.pts.resize(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        s.pts[i].resize(points[i].size());
        for (std::size_t c = 0; c < points[i].size(); ++c)
            if (!conv(points[i][c], s.pts[i][c])) return s;
    }
    s.thr2 = s.unit * lcm_p * s.unit * lcm_p;
    s.ok = true;
    return s;
}

template <class T>
void search(const Coverage<T>& cov, const std::vector<Coords>& numerators, std::size_t d, const FitParams& fp,
            std::int64_t lcm_p, const std::function<std::vector<T>(const Coords&, std::int64_t)>& step_of,
            std::size_t target, Best& best) {
    const std::size_t n = cov.pts.size();
    for (std::size_t r = 1; r <= fp.r_max; ++r) {
        if (best.found && best.coverage == n) return;
        std::vector<std::pair<Coords, std::uint64_t>> dims_list;
        Coords cur;
        dims_tuples(r, fp.k_max, fp.size_cap, cur, 1, dims_list);
        if (dims_list.empty()) continue;
        for (std::int64_t p = 1; p <= fp.p_max; ++p) {
            std::vector<std::size_t> idx(r);
            std::iota(idx.begin(), idx.end(), 0);
            if (numerators.size() < r) break;
            while (true) {
                Integer g = p;
                for (auto j : idx)
                    for (auto v : numerators[j]) mpz_gcd_ui(g.get_mpz_t(), g.get_mpz_t(), std::abs(v));
                if (g == 1) {
                    std::vector<std::vector<T>> gens;
                    std::vector<QVec> steps;
                    for (auto j : idx) {
                        gens.push_back(step_of(numerators[j], lcm_p / p));
                        QVec st(d);
                        for (std::size_t c = 0; c < d; ++c) st[c] = make_rational(numerators[j][c], p);
                        steps.push_back(std::move(st));
                    }
                    for (const auto& [dims, vol] : dims_list) {
                        const bool wins_tie = !best.found || tie_less(r, vol, steps, dims, best);
                        std::size_t need = best.found ? best.coverage + (wins_tie ? 0 : 1) : target;
                        need = std::max(need, target);
                        if (need > n) continue;
                        const std::size_t got = cov.count(gens, dims, need);
                        if (got < need) continue;
                        std::vector<QVec> gen_values;
                        for (const auto& st : steps) gen_values.push_back(scale(st, fp.beta));
                        if (!is_proper(Gap::symmetric_gap(d, gen_values, dims), fp.size_cap)) continue;
                        best = Best{got, r, vol, steps, dims, true};
                    }
                }
                std::size_t pos = r;
                while (pos > 0) {
                    --pos;
                    if (idx[pos] < numerators.size() - r + pos) {
                        ++idx[pos];
                        for (std::size_t q = pos + 1; q < r; ++q) idx[q] = idx[q - 1] + 1;
                        goto advanced;
                    }
                }
                break;
            advanced:;
            }
        }
    }
}

}  // namespace

std::uint64_t floor_power(std::uint64_t n, const Rational& e) {
    auto [p, q] = exponent_parts(e);
    const Integer target = ipow(Integer(static_cast<unsigned long>(n)), p);
    // largest m with m^q <= n^p
    std::uint64_t lo = 0, hi = 1;
    while (ipow(Integer(static_cast<unsigned long>(hi)), q) <= target) {
        lo = hi;
        if (hi > (UINT64_MAX >> 2)) break;
        hi *= 2;
    }
    while (hi - lo > 1) {
        std::uint64_t mid = lo + (hi - lo) / 2;
        if (ipow(Integer(static_cast<unsigned long>(mid)), q) <= target)
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

bool meets_size_floor(std::uint64_t n, std::uint64_t m, const Rational& e) {
    if (m >= n) return true;
    auto [p, q] = exponent_parts(e);
    const Integer gap = static_cast<unsigned long>(n - m);
    return ipow(gap, q) <= ipow(Integer(2), q) * ipow(Integer(static_cast<unsigned long>(n)), p);
}

std::optional<GapFit> fit_gap_linear(const std::vector<QVec>& points, const FitParams& fp) {
    if (points.empty()) throw InvalidParameter("fit_gap_linear needs at least one point");
    const std::size_t d = points[0].size();
    for (const auto& p : points)
        if (p.size() != d) throw SizeMismatch("points have different dimensions");
    if (fp.beta < 0) throw InvalidParameter("beta must be non-negative");
    if (fp.p_max < 1 || fp.m_max < 1 || fp.k_max < 1 || fp.size_cap < 1)
        throw InvalidParameter("fit bounds must be positive");
    const std::size_t n = points.size();
    std::size_t n_prime = fp.n_prime ? *fp.n_prime : std::min<std::uint64_t>(floor_power(n, fp.epsilon), n - 1);
    if (n_prime >= n) throw InvalidParameter("n_prime must be smaller than the number of points");
    const std::size_t target = n - n_prime;

    const Gap zero_gap = Gap::symmetric_gap(d, {}, {});
    auto finish = [&](const Gap& gap) {
        GapFit fit{gap, {}, {}};
        for (std::size_t i = 0; i < n; ++i)
            if (auto q = closest_element(gap, points[i], fp.beta, fp.size_cap)) {
                fit.covered.push_back(i);
                fit.assignments.emplace(i, *q);
            }
        return fit;
    };

    Best best;
    {
        std::size_t c = 0;
        const Rational b2 = fp.beta * fp.beta;
        for (const auto& p : points)
            if (norm2(p) <= b2) ++c;
        if (c == n) return finish(zero_gap);
        if (c >= target) best = Best{c, 0, 1, {}, {}, true};
    }
    if (fp.beta == 0 || fp.r_max == 0) {
        if (!best.found) return std::nullopt;
        return finish(zero_gap);
    }

    const auto numerators = step_numerators(d, fp.m_max);
    Integer total = 0;
    for (std::size_t r = 1; r <= fp.r_max; ++r) {
        std::vector<std::pair<Coords, std::uint64_t>> dl;
        Coords cur;
        dims_tuples(r, fp.k_max, fp.size_cap, cur, 1, dl);
        total += binomial(numerators.size(), r) * fp.p_max * static_cast<unsigned long>(dl.size());
    }
    if (total > Integer(static_cast<unsigned long>(fp.max_candidates)))
        throw SearchSpaceExceeded("GAP search has " + total.get_str() + " candidates");

    std::int64_t lcm_p = 1;
    for (std::int64_t p = 2; p <= fp.p_max; ++p) lcm_p = std::lcm(lcm_p, p);

    Scaled s = scale_to_integers(points, fp.beta, lcm_p, fp);
    if (s.ok) {
        Coverage<i128> cov{s.pts, s.thr2};
        std::function<std::vector<i128>(const Coords&, std::int64_t)> step = [&](const Coords& m, std::int64_t mult) {
            std::vector<i128> g(m.size());
            for (std::size_t c = 0; c < m.size(); ++c) g[c] = static_cast<i128>(m[c]) * mult * s.unit;
            return g;
        };
        search(cov, numerators, d, fp, lcm_p, step, target, best);
    } else {
        const Rational unit = fp.beta / Rational(static_cast<long>(lcm_p));
        Coverage<Rational> cov{points, fp.beta * fp.beta};
        std::function<std::vector<Rational>(const Coords&, std::int64_t)> step = [&](const Coords& m,
                                                                                   std::int64_t mult) {
            std::vector<Rational> g(m.size());
            for (std::size_t c = 0; c < m.size(); ++c) {
                g[c] = Rational(static_cast<long>(m[c] * mult)) * unit;
                g[c].canonicalize();
            }
            return g;
        };
        search(cov, numerators, d, fp, lcm_p, step, target, best);
    }
    if (!best.found) return std::nullopt;
    std::vector<QVec> gens;
    for (const auto& st : best.steps) gens.push_back(scale(st, fp.beta));
    return finish(Gap::symmetric_gap(d, gens, best.dims));
}

struct FitCache::Impl {
    std::mutex mu;
    std::map<std::pair<std::vector<QVec>, Rational>, std::optional<GapFit>> memo;
    std::size_t hits = 0, misses = 0;
};

FitCache::FitCache() : impl_(std::make_unique<Impl>()) {}
FitCache::~FitCache() = default;

std::optional<GapFit> FitCache::fit(const std::vector<QVec>& points, const FitParams& params) {
    auto key = std::make_pair(points, params.beta);
    {
        std::lock_guard lock(impl_->mu);
        auto it = impl_->memo.find(key);
        if (it != impl_->memo.end()) {
            ++impl_->hits;
            return it->second;
        }
        ++impl_->misses;
    }
    auto result = fit_gap_linear(points, params);
    std::lock_guard lock(impl_->mu);
    impl_->memo.emplace(std::move(key), result);
    return result;
}

std::size_t FitCache::hits() const {
    std::lock_guard lock(impl_->mu);
    return impl_->hits;
}

std::size_t FitCache::misses() const {
    std::lock_guard lock(impl_->mu);
    return impl_->misses;
}

bool classify_good(const CoeffMatrix& a, const std::vector<Rational>& y, const Rational& rho, const Rational& beta,
                   const DiscreteDist& xi, std::uint64_t budget) {
    if (y.size() != a.size()) throw SizeMismatch("y length does not match the matrix");
    std::vector<QVec> proj(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) proj[i] = a.row_dot(i, y);
    SmallBallQuery q{beta, LinearForm{CoeffVector(a.dim(), std::move(proj))}, SupOverCenter{}, xi, std::nullopt};
    return 4 * rho_linear_exact(q, budget).value >= rho;
}

}  // namespace lo
