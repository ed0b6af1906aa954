#pragma once
// Small-ball probabilities of linear, bilinear and quadratic forms.
//
// The exact engines compute the full law of the form's value (a map from
// value to rational mass) and then take the heaviest ball. In d = 1 the
// supremum over centers is exact (sliding window of width 2*beta); in d >= 2
// it is bracketed between the best atom-centred beta-ball and the best
// atom-centred 2*beta-ball.

#include <cstdint>
#include <map>
#include <optional>
#include <variant>
#include <vector>

#include "lo/randvar.hpp"
#include "lo/rational.hpp"

namespace lo {

class CoeffVector {
  public:
    CoeffVector(std::size_t dim, std::vector<QVec> entries);
    /// d = 1 convenience.
    static CoeffVector scalars(const std::vector<Rational>& values);
    static CoeffVector zeros(std::size_t n, std::size_t dim);

    std::size_t dim() const { return dim_; }
    std::size_t size() const { return entries_.size(); }
    const QVec& operator[](std::size_t i) const { return entries_[i]; }
    const std::vector<QVec>& entries() const { return entries_; }

    friend bool operator==(const CoeffVector&, const CoeffVector&) = default;

  private:
    std::size_t dim_;
    std::vector<QVec> entries_;
};

/// n x n array of vectors in Q^d, row-major.
class CoeffMatrix {
  public:
    CoeffMatrix(std::size_t n, std::size_t dim, std::vector<QVec> entries);
    static CoeffMatrix zeros(std::size_t n, std::size_t dim);
    /// d = 1 convenience; `rows` must be square.
    static CoeffMatrix scalars(const std::vector<std::vector<Rational>>& rows);

    std::size_t size() const { return n_; }
    std::size_t dim() const { return dim_; }
    const QVec& at(std::size_t i, std::size_t j) const { return entries_[i * n_ + j]; }
    QVec& at(std::size_t i, std::size_t j) { return entries_[i * n_ + j]; }
    bool is_symmetric() const;
    std::vector<QVec> row(std::size_t i) const;
    /// sum_j a_ij * y_j for scalar y.
    QVec row_dot(std::size_t i, const std::vector<Rational>& y) const;

    friend bool operator==(const CoeffMatrix&, const CoeffMatrix&) = default;

  private:
    std::size_t n_;
    std::size_t dim_;
    std::vector<QVec> entries_;
};

struct LinearForm {
    CoeffVector a;
};
struct BilinearForm {
    CoeffMatrix a;
};
struct QuadraticForm {
    CoeffMatrix a;
    CoeffVector b;  // the shift witness; zeros by default
};
using Form = std::variant<LinearForm, BilinearForm, QuadraticForm>;

struct SupOverCenter {};
struct FixedCenter {
    QVec center;
};
using CenterMode = std::variant<SupOverCenter, FixedCenter>;

struct SmallBallQuery {
    Rational beta;
    Form form;
    CenterMode center = SupOverCenter{};
    DiscreteDist dist = DiscreteDist::point_mass(Rational(0));
    /// Law of the second argument of a bilinear form; defaults to `dist`.
    std::optional<DiscreteDist> second_dist;
};

enum class EstimateKind { exact, exact_bracket, monte_carlo };

struct SmallBallEstimate {
    EstimateKind kind = EstimateKind::exact;
    /// Exact value; the lower end for a bracket; hits/samples for Monte Carlo.
    Rational value;
    Rational lower, upper;
    /// Monte Carlo only.
    double ci_low = 0, ci_high = 0;
    std::uint64_t samples = 0;
    std::uint64_t seed = 0;
    /// A centre attaining `value` (exact and bracket modes).
    QVec witness_center;
};

/// Exact law of a random vector: value -> mass, masses summing to 1.
using ValueLaw = std::map<QVec, Rational>;

/// Saturating |support|^n.
std::uint64_t outcome_count(std::size_t support, std::size_t n);

ValueLaw linear_law(const std::vector<QVec>& coeffs, std::size_t dim, const DiscreteDist& xi);
ValueLaw quadratic_law(const CoeffMatrix& a, const CoeffVector& b, const DiscreteDist& xi);
ValueLaw bilinear_law(const CoeffMatrix& a, const DiscreteDist& x, const DiscreteDist& y);

/// Mass of the closed ball B(center, beta).
Rational ball_mass(const ValueLaw& law, const QVec& center, const Rational& beta);

struct BallSup {
    Rational lower, upper;  // equal when exact
    bool exact = true;
    QVec center;            // attains `lower`
};
BallSup sup_ball_mass(const ValueLaw& law, const Rational& beta);

/// Throw BudgetExceeded when the outcome space exceeds `budget`.
SmallBallEstimate rho_linear_exact(const SmallBallQuery& q, std::uint64_t budget);
SmallBallEstimate rho_quadratic_exact(const SmallBallQuery& q, std::uint64_t budget);
SmallBallEstimate rho_bilinear_exact(const SmallBallQuery& q, std::uint64_t budget);
/// Dispatches on the form.
SmallBallEstimate rho_exact(const SmallBallQuery& q, std::uint64_t budget);

/// Seeded Monte Carlo estimate. Samples are drawn in blocks of
/// kMonteCarloBlock; block b uses an mt19937_64 seeded with
/// splitmix64(seed + b * 0x9E3779B97F4A7C15), so the result depends only on
/// (seed, samples). Sup mode maximises over `center_grid` (a lower-bound
/// estimate) and throws EmptyCenterGrid if the grid is empty.
inline constexpr std::uint64_t kMonteCarloBlock = 4096;
SmallBallEstimate rho_monte_carlo(const SmallBallQuery& q, std::uint64_t samples, std::uint64_t seed,
                                  const std::vector<QVec>& center_grid);

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace lo
