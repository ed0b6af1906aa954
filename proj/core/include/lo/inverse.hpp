#pragma once
// Inverse pipelines: bounded GAP fitting for linear forms, and structure
// certificates for bilinear and quadratic forms whose small-ball
// probability is large.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "lo/decoupling.hpp"
#include "lo/gap.hpp"
#include "lo/linalg.hpp"
#include "lo/smallball.hpp"

namespace lo {

struct FitParams {
    Rational beta;
    std::size_t r_max = 2;
    std::int64_t p_max = 2;
    std::int64_t m_max = 16;
    std::int64_t k_max = 3;
    std::uint64_t size_cap = 1000;
    /// Points allowed to stay uncovered; floor(n^epsilon) when absent.
    std::optional<std::size_t> n_prime;
    Rational B = 2;
    Rational epsilon = Rational(1, 2);
    std::uint64_t max_candidates = 50'000'000;
    /// Volume cap for enumeration inside rank reduction.
    std::uint64_t reduce_cap = 1'000'000;
};

struct GapFit {
    Gap gap;
    std::vector<std::size_t> covered;
    std::map<std::size_t, GapPoint> assignments;
};

/// floor(n^e) for rational e >= 0.
std::uint64_t floor_power(std::uint64_t n, const Rational& e);
/// n - m <= 2 n^e, evaluated exactly.
bool meets_size_floor(std::uint64_t n, std::uint64_t m, const Rational& e);

/// Bounded exhaustive search for a proper symmetric GAP with steps beta * m / p
/// covering the most points within distance beta.
std::optional<GapFit> fit_gap_linear(const std::vector<QVec>& points, const FitParams& params);

/// Thread-safe memo of fit results keyed by the point list.
class FitCache {
  public:
    FitCache();
    ~FitCache();
    std::optional<GapFit> fit(const std::vector<QVec>& points, const FitParams& params);
    std::size_t hits() const;
    std::size_t misses() const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// sup_a P_x(|sum_i x_i (a_i . y) - a| <= beta) >= rho / 4.
bool classify_good(const CoeffMatrix& a, const std::vector<Rational>& y, const Rational& rho, const Rational& beta,
                   const DiscreteDist& xi, std::uint64_t budget);

struct Exhaustive {};
struct Sampled {
    std::uint64_t seed = 0;
    std::uint64_t count = 256;
};
using SampleMode = std::variant<Exhaustive, Sampled>;

struct PipelineParams {
    FitParams fit;  // fit.beta is the pipeline's beta
    std::uint64_t budget = 1u << 24;
    /// Hypothesis witness; computed exactly when absent.
    std::optional<Rational> rho;
    SampleMode y_mode = Exhaustive{};
    /// Quadratic only; exhaustive defaults to sampling 256 subsets when n >= 12.
    SampleMode subset_mode = Exhaustive{};
    /// Quadratic only: the winning (I_0, k) must hold on at least this fraction of subsets.
    std::optional<Rational> min_subset_fraction;
};

struct StructureCertificate {
    Integer k = 1;
    std::vector<std::size_t> pivot_rows;
    std::map<std::size_t, std::vector<Integer>> row_coeffs;
    std::vector<std::size_t> surviving;
    unsigned bound_exponent = 1;
    /// Radius multiplier the construction guarantees: threshold = radius_factor * beta <= beta * n^C.
    Rational radius_factor = 1;

    friend bool operator==(const StructureCertificate&, const StructureCertificate&) = default;
};

struct GoodVector {
    std::vector<Rational> y;
    Rational mass;
    std::optional<GapFit> fit;  // after rank reduction
    std::vector<std::size_t> tuple;
    ZMatrix coeffs;             // coords of the tuple points
};

struct RowIdentity {
    std::size_t row = 0;
    std::vector<Integer> coeffs;
    Rational covered_mass;   // mass of y in G'' with the row covered
    Rational support_mass;   // mass of the winning identity
    std::vector<std::size_t> support;  // indices into good_vectors
    bool verified = false;
};

struct SubsetVote {
    std::uint64_t subset = 0;
    bool certified = false;
    std::string failure;
    std::vector<std::size_t> pivots;
    Integer k = 0;
};

struct PipelineTrace {
    Rational rho;
    bool hypothesis_met = false;  // rho >= n^-B
    Rational total_mass;          // mass of the y sample
    Rational good_mass;
    std::size_t good_without_fit = 0;
    std::vector<GoodVector> good_vectors;
    std::vector<std::size_t> common_tuple;
    ZMatrix common_coeff_matrix;
    Rational tuple_mass;   // G'
    Rational coeff_mass;   // G''
    std::vector<RowIdentity> rows;
    std::vector<SubsetVote> subset_votes;
    std::size_t consensus_subsets = 0;
};

struct CertificateResult {
    StructureCertificate certificate;
    PipelineTrace trace;
};

/// Runs the bilinear argument with x ~ x_dist and y ~ y_dist.
CertificateResult bilinear_certificate(const CoeffMatrix& a, const DiscreteDist& x_dist, const DiscreteDist& y_dist,
                                       const PipelineParams& params, FitCache* cache = nullptr);

/// Runs the bilinear argument on every masked matrix A_U with xi - xi' inputs
/// and combines the subset certificates.
CertificateResult quadratic_certificate(const CoeffMatrix& a, const DiscreteDist& xi, const PipelineParams& params);

/// k * row_i + sum_j k_ij * row_{i_j}.
std::vector<QVec> combined_row(const CoeffMatrix& a, const StructureCertificate& cert, std::size_t row);

/// Exact P_z(|z . combined_row(i)| <= beta * n^C) for each surviving row.
std::map<std::size_t, Rational> verify_certificate(const CoeffMatrix& a, const StructureCertificate& cert,
                                                   const DiscreteDist& z_dist, const Rational& beta,
                                                   std::uint64_t budget);

/// Law of eta^(1/2) (xi - xi'), the verification input.
DiscreteDist verification_law(const DiscreteDist& xi);

}  // namespace lo
