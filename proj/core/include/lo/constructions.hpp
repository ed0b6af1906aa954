#pragma once
// Planted structured instances with pigeonhole lower bounds on their
// small-ball probability. All instances assume Bernoulli (+-1) inputs.

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "lo/gap.hpp"
#include "lo/smallball.hpp"

namespace lo {

enum class InstanceKind { linear_gap, quadratic_gap, rank_one, mixed };

const char* to_string(InstanceKind kind);
InstanceKind parse_instance_kind(const std::string& text);

using IntMatrix = std::vector<std::vector<std::int64_t>>;

/// The unperturbed data an instance was built from.
struct PlantedData {
    std::vector<QVec> values;     // q_i, or q_ij row-major
    std::vector<QVec> gap_part;   // q'_ij (quadratic kinds)
    IntMatrix k;                  // r rows of length n
    std::vector<std::vector<QVec>> b;  // r rows of length n

    friend bool operator==(const PlantedData&, const PlantedData&) = default;
};

struct StructuredInstance {
    InstanceKind kind = InstanceKind::linear_gap;
    std::variant<CoeffVector, CoeffMatrix> coefficients;
    std::optional<Gap> gap;
    Rational perturbation;
    PlantedData hidden;
    Rational claimed_beta;
    Rational claimed_rho_lower;
    std::uint64_t seed = 0;

    std::size_t size() const;
    std::size_t dim() const;
};

/// Integer lattice radius used for perturbations: offsets are delta * z / L
/// with z integer and |z| <= L.
inline constexpr std::int64_t kPerturbationLattice = 8;

StructuredInstance build_linear_gap_instance(std::size_t n, const Gap& q, const Rational& delta,
                                             std::uint64_t seed, std::uint64_t budget);
StructuredInstance build_quadratic_gap_instance(std::size_t n, const Gap& q, const Rational& delta,
                                                std::uint64_t seed, std::uint64_t budget);
StructuredInstance build_rank_one_instance(std::size_t n, const std::vector<std::int64_t>& k, const CoeffVector& b,
                                           const Rational& delta, std::uint64_t seed, std::uint64_t budget);
StructuredInstance build_mixed_instance(std::size_t n, const Gap& q, const IntMatrix& k,
                                        const std::vector<CoeffVector>& b, const Rational& delta, std::uint64_t seed,
                                        std::uint64_t budget);

/// P_x(sum_i k_si x_i = 0 for every row s) for Bernoulli x.
Rational kernel_probability(const IntMatrix& k, std::size_t n, std::uint64_t budget);

struct InstanceCheck {
    QVec witness_center;     // heaviest value of the planted form
    Rational witness_mass;   // P(|form - witness_center| <= claimed_beta)
    std::optional<SmallBallEstimate> sup;  // exact sup over centres when d = 1
    bool holds = false;      // witness_mass >= claimed_rho_lower
};

/// Exact check of the claimed lower bound at radius claimed_beta.
InstanceCheck certify_instance(const StructuredInstance& inst, std::uint64_t budget);

}  // namespace lo
