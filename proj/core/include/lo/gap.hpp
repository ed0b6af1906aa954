#pragma once
// Generalized arithmetic progressions (GAPs) in Q^d.
//
// A GAP is the image of the integer box prod_i [lower_i, upper_i] under
// k -> offset + sum_i k_i * g_i. All geometry here is exact; properness and
// span tests are equality-sensitive so no floating point is involved.

#include <cstdint>
#include <optional>
#include <vector>

#include "lo/linalg.hpp"
#include "lo/rational.hpp"

namespace lo {

using Coords = std::vector<std::int64_t>;

struct GapPoint {
    Coords coords;
    QVec value;

    friend bool operator==(const GapPoint&, const GapPoint&) = default;
};

class Gap {
  public:
    /// General GAP. Throws InvalidParameter if the shapes disagree, a lower
    /// bound exceeds its upper bound, or `symmetric` is set on a GAP that is
    /// not symmetric.
    Gap(std::size_t ambient_dim, QVec offset, std::vector<QVec> generators, Coords lower, Coords upper,
        bool symmetric);

    /// Symmetric GAP {sum k_i g_i : |k_i| <= dims_i}.
    static Gap symmetric_gap(std::size_t ambient_dim, std::vector<QVec> generators, Coords dims);

    /// Rank-0 GAP {point}.
    static Gap singleton(QVec point);

    std::size_t ambient_dim() const { return dim_; }
    std::size_t rank() const { return gens_.size(); }
    const QVec& offset() const { return offset_; }
    const std::vector<QVec>& generators() const { return gens_; }
    const Coords& lower_bounds() const { return lower_; }
    const Coords& upper_bounds() const { return upper_; }
    bool symmetric() const { return symmetric_; }

    bool in_box(const Coords& k) const;
    /// offset + sum k_i g_i; coords need not lie in the box.
    QVec value_at(const Coords& k) const;

    friend bool operator==(const Gap&, const Gap&) = default;

  private:
    std::size_t dim_;
    QVec offset_;
    std::vector<QVec> gens_;
    Coords lower_;
    Coords upper_;
    bool symmetric_;
};

/// Box cardinality prod (K'_i - K_i + 1); saturates at UINT64_MAX.
std::uint64_t gap_volume(const Gap& q);

/// Every box point in lexicographic coordinate order.
/// Throws VolumeExceedsCap when gap_volume(q) > cap.
std::vector<GapPoint> gap_enumerate(const Gap& q, std::uint64_t cap);

/// True iff the box-to-value map is injective.
bool is_proper(const Gap& q, std::uint64_t cap);

/// First pair of distinct coordinate tuples (in enumeration order) that map to
/// the same value, if any.
std::optional<std::pair<Coords, Coords>> find_collision(const Gap& q, std::uint64_t cap);

/// Nearest GAP element to `a` if its distance is at most delta; ties go to the
/// lexicographically smallest coordinates.
std::optional<GapPoint> closest_element(const Gap& q, const QVec& a, const Rational& delta,
                                        std::uint64_t cap);

/// Scales every dimension of a symmetric GAP by m. Throws NotSymmetric.
Gap dilate(const Gap& q, std::int64_t m);

/// True iff the coordinates of `points` have full rank in Z^rank(q).
/// Throws PointOutsideBox if a point's coordinates leave the box.
bool spans(const Gap& q, const std::vector<GapPoint>& points);

struct RankReduction {
    Gap gap;
    /// The input values, re-expressed in `gap`'s coordinates (same order).
    std::vector<GapPoint> points;
    /// gap_volume(output) / gap_volume(input).
    Rational blowup;
    /// Generator eliminations performed (span steps plus properization steps).
    std::size_t eliminations = 0;
};

/// Replaces q by a proper symmetric GAP of rank <= rank(q) that contains
/// every input point and is spanned by them.
/// Throws NotSymmetric / NotProper on bad input, PointOutsideBox, and
/// VolumeExceedsCap if a properness check would exceed `cap`.
RankReduction rank_reduce(const Gap& q, const std::vector<GapPoint>& points, std::uint64_t cap);

/// Makes a symmetric GAP proper by eliminating generators along integer
/// relations found from colliding box points. The output contains every
/// element of the input. `points` are re-expressed alongside.
RankReduction properize(const Gap& q, const std::vector<GapPoint>& points, std::uint64_t cap);

}  // namespace lo
