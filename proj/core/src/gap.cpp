#include "lo/gap.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>

#include "lo/error.hpp"

namespace lo {

Gap::Gap(std::size_t ambient_dim, QVec offset, std::vector<QVec> generators, Coords lower, Coords upper,
         bool symmetric)
    : dim_(ambient_dim),
      offset_(std::move(offset)),
      gens_(std::move(generators)),
      lower_(std::move(lower)),
      upper_(std::move(upper)),
      symmetric_(symmetric) {
    if (dim_ == 0) throw InvalidParameter("GAP ambient dimension must be positive");
    if (offset_.size() != dim_) throw InvalidParameter("GAP offset has wrong dimension");
    for (const auto& g : gens_)
        if (g.size() != dim_) throw InvalidParameter("GAP generator has wrong dimension");
    if (lower_.size() != gens_.size() || upper_.size() != gens_.size())
        throw InvalidParameter("GAP bounds do not match its rank");
    for (std::size_t i = 0; i < gens_.size(); ++i)
        if (lower_[i] > upper_[i]) throw InvalidParameter("GAP lower bound exceeds upper bound");
    if (symmetric_) {
        if (!is_zero(offset_)) throw InvalidParameter("symmetric GAP must have zero offset");
        for (std::size_t i = 0; i < gens_.size(); ++i)
            if (lower_[i] != -upper_[i]) throw InvalidParameter("symmetric GAP needs bounds -K..K");
    }
}

Gap Gap::symmetric_gap(std::size_t ambient_dim, std::vector<QVec> generators, Coords dims) {
    Coords lower(dims.size());
    for (std::size_t i = 0; i < dims.size(); ++i) lower[i] = -dims[i];
    return Gap(ambient_dim, zero_vec(ambient_dim), std::move(generators), std::move(lower), std::move(dims), true);
}

Gap Gap::singleton(QVec point) {
    const std::size_t d = point.size();
    const bool sym = is_zero(point);
    return Gap(d, std::move(point), {}, {}, {}, sym);
}

bool Gap::in_box(const Coords& k) const {
    if (k.size() != gens_.size()) return false;
    for (std::size_t i = 0; i < k.size(); ++i)
        if (k[i] < lower_[i] || k[i] > upper_[i]) return false;
    return true;
}

QVec Gap::value_at(const Coords& k) const {
    if (k.size() != gens_.size()) throw SizeMismatch("coordinate tuple does not match GAP rank");
    QVec v = offset_;
    for (std::size_t i = 0; i < k.size(); ++i) add_scaled(v, gens_[i], Rational(static_cast<long>(k[i])));
    return v;
}

std::uint64_t gap_volume(const Gap& q) {
    constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
    std::uint64_t vol = 1;
    for (std::size_t i = 0; i < q.rank(); ++i) {
        auto side = static_cast<std::uint64_t>(q.upper_bounds()[i] - q.lower_bounds()[i]) + 1;
        if (vol > kMax / side) return kMax;
        vol *= side;
    }
    return vol;
}

namespace {

void require_cap(const Gap& q, std::uint64_t cap) {
    if (gap_volume(q) > cap)
        throw VolumeExceedsCap("GAP volume " + std::to_string(gap_volume(q)) + " exceeds cap " +
                               std::to_string(cap));
}

// Visits box points in lexicographic order (first coordinate slowest) with
// the value maintained incrementally. Stops early if visit returns false.
template <class Visit>
void walk_box(const Gap& q, Visit&& visit) {
    const std::size_t r = q.rank();
    Coords k = q.lower_bounds();
    QVec value = q.value_at(k);
    while (true) {
        if (!visit(static_cast<const Coords&>(k), static_cast<const QVec&>(value))) return;
        std::size_t i = r;
        while (i > 0) {
            --i;
            if (k[i] < q.upper_bounds()[i]) {
                ++k[i];
                add_scaled(value, q.generators()[i], Rational(1));
                break;
            }
            add_scaled(value, q.generators()[i], Rational(static_cast<long>(q.lower_bounds()[i] - k[i])));
            k[i] = q.lower_bounds()[i];
            if (i == 0) return;
        }
        if (r == 0) return;
    }
}

bool generators_independent(const Gap& q) { return rank(q.generators(), q.ambient_dim()) == q.rank(); }

}  // namespace

std::vector<GapPoint> gap_enumerate(const Gap& q, std::uint64_t cap) {
    require_cap(q, cap);
    std::vector<GapPoint> out;
    out.reserve(gap_volume(q));
    walk_box(q, [&](const Coords& k, const QVec& v) {
        out.push_back({k, v});
        return true;
    });
    return out;
}

std::optional<std::pair<Coords, Coords>> find_collision(const Gap& q, std::uint64_t cap) {
    require_cap(q, cap);
    std::map<QVec, Coords> seen;
    std::optional<std::pair<Coords, Coords>> hit;
    walk_box(q, [&](const Coords& k, const QVec& v) {
        auto [it, inserted] = seen.emplace(v, k);
        if (!inserted) {
            hit.emplace(it->second, k);
            return false;
        }
        return true;
    });
    return hit;
}

bool is_proper(const Gap& q, std::uint64_t cap) {
    require_cap(q, cap);
    if (generators_independent(q)) return true;
    return !find_collision(q, cap).has_value();
}

std::optional<GapPoint> closest_element(const Gap& q, const QVec& a, const Rational& delta, std::uint64_t cap) {
    if (a.size() != q.ambient_dim()) throw SizeMismatch("query vector has wrong dimension");
    if (delta < 0) throw InvalidParameter("closeness radius must be non-negative");
    require_cap(q, cap);
    std::optional<GapPoint> best;
    Rational best_d2;
    walk_box(q, [&](const Coords& k, const QVec& v) {
        Rational d2 = dist2(a, v);
        if (!best || d2 < best_d2) {
            best = GapPoint{k, v};
            best_d2 = d2;
        }
        return true;
    });
    if (best && best_d2 <= delta * delta) return best;
    return std::nullopt;
}

Gap dilate(const Gap& q, std::int64_t m) {
    if (!q.symmetric()) throw NotSymmetric("dilate requires a symmetric GAP");
    if (m <= 0) throw InvalidParameter("dilation factor must be positive");
    Coords dims = q.upper_bounds();
    for (auto& k : dims) {
        if (k != 0 && m > std::numeric_limits<std::int64_t>::max() / k)
            throw InvalidParameter("dilated bound overflows int64");
        k *= m;
    }
    return Gap::symmetric_gap(q.ambient_dim(), q.generators(), std::move(dims));
}

bool spans(const Gap& q, const std::vector<GapPoint>& points) {
    QMatrix rows;
    rows.reserve(points.size());
    for (const auto& p : points) {
        if (!q.in_box(p.coords)) throw PointOutsideBox("point coordinates lie outside the GAP box");
        QVec row(p.coords.size());
        for (std::size_t i = 0; i < row.size(); ++i) row[i] = Rational(static_cast<long>(p.coords[i]));
        rows.push_back(std::move(row));
    }
    return rank(rows, q.rank()) == q.rank();
}

namespace {

void check_points(const Gap& q, const std::vector<GapPoint>& points) {
    for (const auto& p : points) {
        if (!q.in_box(p.coords)) throw PointOutsideBox("point coordinates lie outside the GAP box");
        if (q.value_at(p.coords) != p.value) throw InvalidParameter("point value does not match its coordinates");
    }
}

Rational volume_ratio(const Gap& out, const Gap& in) {
    Rational r(Integer(std::to_string(gap_volume(out)), 10), Integer(std::to_string(gap_volume(in)), 10));
    r.canonicalize();
    return r;
}

std::int64_t checked_bound(const Integer& b) {
    if (!b.fits_slong_p()) throw VolumeExceedsCap("properized GAP bound overflows int64");
    return static_cast<std::int64_t>(b.get_si());
}

// One properization step: the generators satisfy sum alpha_i g_i = 0 with
// alpha primitive. Complete alpha to a unimodular W (alpha^T W = e_1^T);
// then values k^T G = (k^T W)(W^{-1} G) and row 1 of W^{-1} G vanishes.
Gap eliminate_generator_relation(const Gap& q, const ZVec& alpha, std::vector<GapPoint>& points) {
    const std::size_t r = q.rank();
    const std::size_t d = q.ambient_dim();
    auto [w, w_inv] = unimodular_to_unit(alpha);

    std::vector<QVec> gens;
    Coords dims;
    for (std::size_t h = 1; h < r; ++h) {
        QVec g = zero_vec(d);
        Integer bound = 0;
        for (std::size_t i = 0; i < r; ++i) {
            add_scaled(g, q.generators()[i], Rational(w_inv[h][i]));
            bound += abs(w[i][h]) * Integer(static_cast<long>(q.upper_bounds()[i]));
        }
        gens.push_back(std::move(g));
        dims.push_back(checked_bound(bound));
    }
    for (auto& p : points) {
        Coords nk;
        for (std::size_t h = 1; h < r; ++h) {
            Integer c = 0;
            for (std::size_t i = 0; i < r; ++i) c += Integer(static_cast<long>(p.coords[i])) * w[i][h];
            nk.push_back(to_int64(c));
        }
        p.coords = std::move(nk);
    }
    return Gap::symmetric_gap(d, std::move(gens), std::move(dims));
}

Gap properize_in_place(Gap q, std::vector<GapPoint>& points, std::uint64_t cap, std::size_t& eliminations) {
    while (q.rank() > 0) {
        if (generators_independent(q)) break;
        auto hit = find_collision(q, cap);
        if (!hit) break;
        QVec diff(q.rank());
        for (std::size_t i = 0; i < q.rank(); ++i)
            diff[i] = Rational(static_cast<long>(hit->first[i] - hit->second[i]));
        q = eliminate_generator_relation(q, primitive(diff), points);
        ++eliminations;
    }
    return q;
}

}  // namespace

RankReduction properize(const Gap& q, const std::vector<GapPoint>& points, std::uint64_t cap) {
    if (!q.symmetric()) throw NotSymmetric("properize requires a symmetric GAP");
    check_points(q, points);
    std::vector<GapPoint> pts = points;
    std::size_t elim = 0;
    Gap out = properize_in_place(q, pts, cap, elim);
    Rational ratio = volume_ratio(out, q);
    return RankReduction{std::move(out), std::move(pts), ratio, elim};
}

RankReduction rank_reduce(const Gap& q, const std::vector<GapPoint>& points, std::uint64_t cap) {
    if (!q.symmetric()) throw NotSymmetric("rank_reduce requires a symmetric GAP");
    check_points(q, points);
    if (!is_proper(q, cap)) throw NotProper("rank_reduce requires a proper GAP");

    const std::size_t d = q.ambient_dim();
    const bool degenerate = std::all_of(points.begin(), points.end(), [](const GapPoint& p) {
        return std::all_of(p.coords.begin(), p.coords.end(), [](std::int64_t c) { return c == 0; });
    });
    if (degenerate) {
        Gap zero = Gap::singleton(zero_vec(d));
        std::vector<GapPoint> pts;
        for (const auto& p : points) pts.push_back({{}, p.value});
        Rational ratio = volume_ratio(zero, q);
        return RankReduction{std::move(zero), std::move(pts), ratio, q.rank()};
    }

    Gap cur = q;
    std::vector<GapPoint> pts = points;
    std::size_t elim = 0;
    while (!spans(cur, pts)) {
        const std::size_t r = cur.rank();
        QMatrix rows;
        for (const auto& p : pts) {
            QVec row(r);
            for (std::size_t i = 0; i < r; ++i) row[i] = Rational(static_cast<long>(p.coords[i]));
            rows.push_back(std::move(row));
        }
        ZMatrix basis = integer_nullspace(rows, r);
        // Smallest max-norm relation, ties lexicographic.
        const ZVec* alpha = &basis.front();
        for (const auto& b : basis) {
            Integer mb = max_abs(b), ma = max_abs(*alpha);
            if (mb < ma || (mb == ma && b < *alpha)) alpha = &b;
        }
        std::size_t j = r;
        for (std::size_t i = r; i > 0; --i)
            if ((*alpha)[i - 1] != 0) {
                j = i - 1;
                break;
            }
        // g_j = alpha_j * w, g_i' = g_i - alpha_i * w; coordinates other than j are unchanged
        // because sum alpha_i k_i = 0 on every point.
        QVec w = scale(cur.generators()[j], Rational(1) / Rational((*alpha)[j]));
        std::vector<QVec> gens;
        Coords dims;
        for (std::size_t i = 0; i < r; ++i) {
            if (i == j) continue;
            QVec g = cur.generators()[i];
            add_scaled(g, w, Rational(-(*alpha)[i]));
            gens.push_back(std::move(g));
            dims.push_back(cur.upper_bounds()[i]);
        }
        for (auto& p : pts) p.coords.erase(p.coords.begin() + static_cast<std::ptrdiff_t>(j));
        cur = Gap::symmetric_gap(d, std::move(gens), std::move(dims));
        ++elim;
        cur = properize_in_place(std::move(cur), pts, cap, elim);
    }

    for (const auto& p : pts)
        if (cur.value_at(p.coords) != p.value) throw std::logic_error("rank_reduce lost a point");

    Rational ratio = volume_ratio(cur, q);
    return RankReduction{std::move(cur), std::move(pts), ratio, elim};
}

}  // namespace lo
