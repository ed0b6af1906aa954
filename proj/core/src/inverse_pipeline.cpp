#include <algorithm>
#include <random>

#include "lo/error.hpp"
#include "lo/inverse.hpp"
#include "lo/parallel.hpp"

namespace lo {

namespace {

Integer ipow(const Integer& base, unsigned long e) {
    Integer out;
    mpz_pow_ui(out.get_mpz_t(), base.get_mpz_t(), e);
    return out;
}

// x >= n^{-B} for rational B = p/q >= 0, i.e. x^q n^p >= 1.
bool at_least_inverse_power(const Rational& x, std::uint64_t n, const Rational& b) {
    Rational c = b;
    c.canonicalize();
    if (c < 0) throw InvalidParameter("B must be non-negative");
    if (x <= 0) return false;
    const unsigned long p = c.get_num().get_ui(), q = c.get_den().get_ui();
    return pow(x, static_cast<unsigned>(q)) * Rational(ipow(Integer(static_cast<unsigned long>(n)), p)) >= 1;
}

// Smallest C >= 1 with n^C >= every bound; 64 when none works.
unsigned exponent_covering(std::uint64_t n, const std::vector<Integer>& bounds) {
    Integer m = 1;
    for (const auto& b : bounds)
        if (abs(b) > m) m = abs(b);
    if (n <= 1) return 1;
    Integer p = static_cast<unsigned long>(n);
    for (unsigned c = 1; c < 64; ++c, p *= static_cast<unsigned long>(n))
        if (p >= m) return c;
    return 64;
}

struct WeightedY {
    std::vector<Rational> y;
    Rational mass;
};

// Exact uniform draw from the atoms of d using 53 random bits.
const Rational& draw_exact(const DiscreteDist& d, std::mt19937_64& rng) {
    Rational u(static_cast<unsigned long>(rng() >> 11));
    u /= Rational(Integer(1) << 53);
    Rational acc = 0;
    for (const auto& a : d.atoms()) {
        acc += a.mass;
        if (u < acc) return a.value;
    }
    return d.atoms().back().value;
}

std::vector<WeightedY> y_population(const DiscreteDist& dist, std::size_t n, const SampleMode& mode,
                                    std::uint64_t budget) {
    std::vector<WeightedY> out;
    const auto& atoms = dist.atoms();
    const std::uint64_t total = outcome_count(atoms.size(), n);
    if (std::holds_alternative<Exhaustive>(mode)) {
        if (total > budget) throw BudgetExceeded("y enumeration exceeds budget");
        std::vector<std::size_t> idx(n, 0);
        while (true) {
            WeightedY w{std::vector<Rational>(n), Rational(1)};
            for (std::size_t i = 0; i < n; ++i) {
                w.y[i] = atoms[idx[i]].value;
                w.mass *= atoms[idx[i]].mass;
            }
            w.mass.canonicalize();
            out.push_back(std::move(w));
            std::size_t i = n;
            while (i > 0 && idx[i - 1] + 1 == atoms.size()) idx[--i] = 0;
            if (i == 0) break;
            ++idx[i - 1];
        }
        return out;
    }
    const auto& s = std::get<Sampled>(mode);
    if (s.count == 0) throw InvalidParameter("sample count must be positive");
    std::mt19937_64 rng(splitmix64(s.seed));
    std::map<std::vector<Rational>, std::uint64_t> counts;
    for (std::uint64_t t = 0; t < s.count; ++t) {
        std::vector<Rational> y(n);
        for (auto& v : y) v = draw_exact(dist, rng);
        ++counts[y];
    }
    for (auto& [y, c] : counts)
        out.push_back({y, make_rational(static_cast<std::int64_t>(c), static_cast<std::int64_t>(s.count))});
    return out;
}

ZVec coords_of(const GapPoint& p) {
    ZVec v;
    for (auto c : p.coords) v.emplace_back(static_cast<long>(c));
    return v;
}

// Lexicographically smallest tuple of covered indices whose coordinates span Z^r.
std::vector<std::size_t> spanning_tuple(const GapFit& fit) {
    const std::size_t r = fit.gap.rank();
    std::vector<std::size_t> tuple;
    QMatrix rows;
    for (const auto& [i, pt] : fit.assignments) {
        if (tuple.size() == r) break;
        rows.push_back(to_qvec(coords_of(pt)));
        if (rank(rows, r) == rows.size())
            tuple.push_back(i);
        else
            rows.pop_back();
    }
    return tuple;
}

ZMatrix replace_row(ZMatrix c, std::size_t j, const ZVec& v) {
    c[j] = v;
    return c;
}

QVec combined_dot(const CoeffMatrix& a, const Integer& k, const std::vector<std::size_t>& pivots,
                  const std::vector<Integer>& coeffs, std::size_t row, const std::vector<Rational>& y) {
    QVec v = scale(a.row_dot(row, y), Rational(k));
    for (std::size_t j = 0; j < pivots.size(); ++j) add_scaled(v, a.row_dot(pivots[j], y), Rational(coeffs[j]));
    return v;
}

Integer coefficient_weight(const Integer& k, const std::vector<Integer>& coeffs) {
    Integer w = abs(k);
    for (const auto& c : coeffs) w += abs(c);
    return w;
}

template <class Key>
typename std::map<Key, Rational>::const_iterator heaviest(const std::map<Key, Rational>& votes) {
    auto best = votes.begin();
    for (auto it = votes.begin(); it != votes.end(); ++it)
        if (it->second > best->second) best = it;
    return best;
}

void validate_pipeline(const CoeffMatrix& a, const PipelineParams& p) {
    if (a.size() == 0) throw InvalidParameter("matrix must be nonempty");
    if (p.fit.beta < 0) throw InvalidParameter("beta must be non-negative");
    if (p.budget == 0) throw InvalidParameter("budget must be positive");
}

}  // namespace

DiscreteDist verification_law(const DiscreteDist& xi) { return lazy_product(symmetrize(xi), Rational(1, 2)); }

CertificateResult bilinear_certificate(const CoeffMatrix& a, const DiscreteDist& x_dist, const DiscreteDist& y_dist,
                                       const PipelineParams& params, FitCache* cache) {
    validate_pipeline(a, params);
    const std::size_t n = a.size();
    const Rational& beta = params.fit.beta;
    FitCache local;
    FitCache& fits = cache ? *cache : local;

    CertificateResult out;
    PipelineTrace& tr = out.trace;
    if (params.rho) {
        tr.rho = *params.rho;
    } else {
        SmallBallQuery q{beta, BilinearForm{a}, SupOverCenter{}, x_dist, y_dist};
        tr.rho = rho_bilinear_exact(q, params.budget).value;
    }
    tr.hypothesis_met = at_least_inverse_power(tr.rho, n, params.fit.B);

    const auto ys = y_population(y_dist, n, params.y_mode, params.budget);
    struct Slot {
        bool good = false;
        std::optional<GapFit> fit;
        std::vector<std::size_t> tuple;
        ZMatrix coeffs;
    };
    std::vector<Slot> slots(ys.size());
    parallel_for(ys.size(), [&](std::size_t t) {
        Slot& s = slots[t];
        s.good = classify_good(a, ys[t].y, tr.rho, beta, x_dist, params.budget);
        if (!s.good) return;
        std::vector<QVec> pts(n);
        for (std::size_t i = 0; i < n; ++i) pts[i] = a.row_dot(i, ys[t].y);
        auto fit = fits.fit(pts, params.fit);
        if (!fit) return;
        std::vector<GapPoint> covered;
        for (const auto& [i, pt] : fit->assignments) covered.push_back(pt);
        auto red = rank_reduce(fit->gap, covered, params.fit.reduce_cap);
        GapFit reduced{red.gap, fit->covered, {}};
        std::size_t c = 0;
        for (const auto& [i, pt] : fit->assignments) reduced.assignments.emplace(i, red.points[c++]);
        s.tuple = spanning_tuple(reduced);
        for (auto i : s.tuple) s.coeffs.push_back(coords_of(reduced.assignments.at(i)));
        s.fit = std::move(reduced);
    });

    tr.total_mass = 0;
    tr.good_mass = 0;
    for (std::size_t t = 0; t < ys.size(); ++t) {
        tr.total_mass += ys[t].mass;
        if (!slots[t].good) continue;
        tr.good_mass += ys[t].mass;
        if (!slots[t].fit) {
            ++tr.good_without_fit;
            continue;
        }
        // spanning_tuple always reaches the rank because rank_reduce output is spanned
        if (slots[t].tuple.size() != slots[t].fit->gap.rank()) continue;
        tr.good_vectors.push_back(
            GoodVector{ys[t].y, ys[t].mass, std::move(slots[t].fit), slots[t].tuple, slots[t].coeffs});
    }
    tr.total_mass.canonicalize();
    tr.good_mass.canonicalize();
    if (tr.good_mass == 0) throw NoGoodVectors("no y passed the rho/4 test");
    if (tr.good_vectors.empty()) throw NoSpanningTuple("no good y admitted a GAP fit");

    std::map<std::vector<std::size_t>, Rational> tuple_votes;
    for (const auto& g : tr.good_vectors) tuple_votes[g.tuple] += g.mass;
    tr.common_tuple = heaviest(tuple_votes)->first;
    tr.tuple_mass = heaviest(tuple_votes)->second;

    std::map<ZMatrix, Rational> coeff_votes;
    for (const auto& g : tr.good_vectors)
        if (g.tuple == tr.common_tuple) coeff_votes[g.coeffs] += g.mass;
    tr.common_coeff_matrix = heaviest(coeff_votes)->first;
    tr.coeff_mass = heaviest(coeff_votes)->second;
    tr.tuple_mass.canonicalize();
    tr.coeff_mass.canonicalize();

    const std::size_t r = tr.common_tuple.size();
    StructureCertificate& cert = out.certificate;
    cert.k = determinant(tr.common_coeff_matrix);
    if (cert.k == 0) throw NoSpanningTuple("common coefficient matrix is singular");
    cert.pivot_rows = tr.common_tuple;

    std::vector<std::size_t> g2;
    for (std::size_t t = 0; t < tr.good_vectors.size(); ++t)
        if (tr.good_vectors[t].tuple == tr.common_tuple && tr.good_vectors[t].coeffs == tr.common_coeff_matrix)
            g2.push_back(t);

    std::vector<Integer> weights{cert.k};
    Integer radius = 0;
    for (std::size_t i = 0; i < n; ++i) {
        RowIdentity row;
        row.row = i;
        std::map<std::vector<Integer>, Rational> votes;
        std::map<std::vector<Integer>, std::vector<std::size_t>> support;
        for (auto t : g2) {
            const auto& g = tr.good_vectors[t];
            auto it = g.fit->assignments.find(i);
            if (it == g.fit->assignments.end()) continue;
            row.covered_mass += g.mass;
            const ZVec v = coords_of(it->second);
            std::vector<Integer> ks(r);
            for (std::size_t j = 0; j < r; ++j) ks[j] = -determinant(replace_row(tr.common_coeff_matrix, j, v));
            votes[ks] += g.mass;
            support[ks].push_back(t);
        }
        row.covered_mass.canonicalize();
        if (!votes.empty()) {
            auto win = heaviest(votes);
            row.coeffs = win->first;
            row.support_mass = win->second;
            row.support_mass.canonicalize();
            row.support = support[win->first];
            const Integer w = coefficient_weight(cert.k, row.coeffs);
            const Rational limit = Rational(w) * Rational(w) * beta * beta;
            row.verified = std::all_of(row.support.begin(), row.support.end(), [&](std::size_t t) {
                return norm2(combined_dot(a, cert.k, cert.pivot_rows, row.coeffs, i, tr.good_vectors[t].y)) <= limit;
            });
            if (row.verified && 2 * row.support_mass >= tr.coeff_mass) {
                cert.surviving.push_back(i);
                cert.row_coeffs[i] = row.coeffs;
                weights.insert(weights.end(), row.coeffs.begin(), row.coeffs.end());
                radius = std::max(radius, w);
            }
        }
        tr.rows.push_back(std::move(row));
    }
    if (!meets_size_floor(n, cert.surviving.size(), params.fit.epsilon))
        throw CoverageFloorMissed(std::to_string(cert.surviving.size()) + " of " + std::to_string(n) +
                                  " rows survived");
    cert.radius_factor = Rational(radius);
    weights.push_back(radius);
    cert.bound_exponent = exponent_covering(n, weights);
    return out;
}

CertificateResult quadratic_certificate(const CoeffMatrix& a, const DiscreteDist& xi, const PipelineParams& params) {
    validate_pipeline(a, params);
    if (!a.is_symmetric()) throw NotSymmetric("quadratic_certificate needs a symmetric matrix");
    const std::size_t n = a.size();
    if (n > 63) throw InvalidParameter("quadratic_certificate supports n <= 63");
    const Rational& beta = params.fit.beta;

    CertificateResult out;
    PipelineTrace& tr = out.trace;
    if (params.rho) {
        tr.rho = *params.rho;
    } else {
        SmallBallQuery q{beta, QuadraticForm{a, CoeffVector::zeros(n, a.dim())}, SupOverCenter{}, xi, std::nullopt};
        tr.rho = rho_quadratic_exact(q, params.budget).value;
    }
    tr.hypothesis_met = at_least_inverse_power(tr.rho, n, params.fit.B);

    std::vector<std::uint64_t> subsets;
    SampleMode mode = params.subset_mode;
    if (std::holds_alternative<Exhaustive>(mode) && n >= 12) mode = Sampled{0, 256};
    if (std::holds_alternative<Exhaustive>(mode)) {
        for (std::uint64_t u = 0; u < (1ull << n); ++u) subsets.push_back(u);
    } else {
        const auto& s = std::get<Sampled>(mode);
        if (s.count == 0) throw InvalidParameter("subset count must be positive");
        std::mt19937_64 rng(splitmix64(s.seed ^ 0x5bd1e995ull));
        for (std::uint64_t t = 0; t < s.count; ++t) subsets.push_back(rng() & ((1ull << n) - 1));
    }

    const DiscreteDist sym = symmetrize(xi);
    PipelineParams sub = params;
    sub.rho.reset();
    FitCache cache;
    std::vector<StructureCertificate> certs(subsets.size());
    for (std::size_t s = 0; s < subsets.size(); ++s) {
        SubsetVote vote;
        vote.subset = subsets[s];
        try {
            auto res = bilinear_certificate(mask_matrix(a, SubsetMask(n, subsets[s])), sym, sym, sub, &cache);
            vote.certified = true;
            vote.pivots = res.certificate.pivot_rows;
            vote.k = res.certificate.k;
            certs[s] = std::move(res.certificate);
        } catch (const Error& e) {
            if (e.exit_code() != ExitCode::consensus) throw;
            vote.failure = e.class_name();
        }
        tr.subset_votes.push_back(std::move(vote));
    }

    std::map<std::pair<std::vector<std::size_t>, Integer>, Rational> votes;
    for (const auto& v : tr.subset_votes)
        if (v.certified) votes[{v.pivots, v.k}] += 1;
    if (votes.empty()) throw InsufficientSubsetConsensus("no subset produced a certificate");
    const auto winner = heaviest(votes)->first;
    std::vector<std::size_t> chosen;
    for (std::size_t s = 0; s < subsets.size(); ++s)
        if (tr.subset_votes[s].certified && tr.subset_votes[s].pivots == winner.first &&
            tr.subset_votes[s].k == winner.second)
            chosen.push_back(s);
    tr.consensus_subsets = chosen.size();
    const Rational share = make_rational(static_cast<std::int64_t>(chosen.size()),
                                         static_cast<std::int64_t>(subsets.size()));
    const bool enough = params.min_subset_fraction ? share >= *params.min_subset_fraction
                                                   : at_least_inverse_power(share, n, params.fit.B);
    if (!enough)
        throw InsufficientSubsetConsensus(std::to_string(chosen.size()) + " of " + std::to_string(subsets.size()) +
                                          " subsets agree");

    StructureCertificate& cert = out.certificate;
    cert.k = winner.second;
    cert.pivot_rows = winner.first;
    std::vector<Integer> weights{cert.k};
    Integer radius = 0;
    for (std::size_t i = 0; i < n; ++i) {
        RowIdentity row;
        row.row = i;
        std::map<std::vector<Integer>, Rational> row_votes;
        std::map<std::vector<Integer>, std::vector<std::size_t>> support;
        for (auto s : chosen) {
            auto it = certs[s].row_coeffs.find(i);
            if (it == certs[s].row_coeffs.end()) continue;
            row.covered_mass += 1;
            // A pivot on the other side of U from row i enters the symmetric identity with flipped sign.
            const SubsetMask u(n, subsets[s]);
            std::vector<Integer> ks = it->second;
            for (std::size_t j = 0; j < ks.size(); ++j)
                if (u.contains(cert.pivot_rows[j]) != u.contains(i)) ks[j] = -ks[j];
            row_votes[ks] += 1;
            support[ks].push_back(s);
        }
        if (2 * row.covered_mass >= Rational(static_cast<long>(chosen.size())) && !row_votes.empty()) {
            auto win = heaviest(row_votes);
            row.coeffs = win->first;
            row.support_mass = win->second;
            row.support = support[win->first];
            row.verified = true;
            cert.surviving.push_back(i);
            cert.row_coeffs[i] = row.coeffs;
            weights.insert(weights.end(), row.coeffs.begin(), row.coeffs.end());
            radius = std::max<Integer>(radius, 2 * coefficient_weight(cert.k, row.coeffs));
        }
        tr.rows.push_back(std::move(row));
    }
    if (!meets_size_floor(n, cert.surviving.size(), params.fit.epsilon))
        throw CoverageFloorMissed(std::to_string(cert.surviving.size()) + " of " + std::to_string(n) +
                                  " rows survived");
    cert.radius_factor = Rational(radius);
    weights.push_back(radius);
    cert.bound_exponent = exponent_covering(n, weights);
    return out;
}

std::vector<QVec> combined_row(const CoeffMatrix& a, const StructureCertificate& cert, std::size_t row) {
    auto it = cert.row_coeffs.find(row);
    if (it == cert.row_coeffs.end()) throw InvalidParameter("row " + std::to_string(row) + " is not certified");
    if (it->second.size() != cert.pivot_rows.size()) throw SizeMismatch("coefficient count differs from pivots");
    const std::size_t n = a.size();
    std::vector<QVec> out(n);
    for (std::size_t c = 0; c < n; ++c) {
        QVec v = scale(a.at(row, c), Rational(cert.k));
        for (std::size_t j = 0; j < cert.pivot_rows.size(); ++j) {
            if (cert.pivot_rows[j] >= n) throw InvalidParameter("pivot row out of range");
            add_scaled(v, a.at(cert.pivot_rows[j], c), Rational(it->second[j]));
        }
        out[c] = std::move(v);
    }
    return out;
}

std::map<std::size_t, Rational> verify_certificate(const CoeffMatrix& a, const StructureCertificate& cert,
                                                   const DiscreteDist& z_dist, const Rational& beta,
                                                   std::uint64_t budget) {
    if (cert.k == 0) throw InvalidParameter("certificate k must be nonzero");
    if (beta < 0) throw InvalidParameter("beta must be non-negative");
    Rational radius = beta * Rational(ipow(Integer(static_cast<unsigned long>(a.size())), cert.bound_exponent));
    radius.canonicalize();
    std::map<std::size_t, Rational> out;
    for (auto i : cert.surviving) {
        if (i >= a.size()) throw InvalidParameter("surviving row out of range");
        SmallBallQuery q{radius, LinearForm{CoeffVector(a.dim(), combined_row(a, cert, i))},
                         FixedCenter{zero_vec(a.dim())}, z_dist, std::nullopt};
        out[i] = rho_linear_exact(q, budget).value;
    }
    return out;
}

}  // namespace lo
