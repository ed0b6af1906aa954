#pragma once
// Small exact linear algebra over Q and Z used by the GAP code and the
// certificate pipelines. Matrices are row-major vectors of rows.

#include <cstdint>
#include <vector>

#include "lo/rational.hpp"

namespace lo {

using QMatrix = std::vector<QVec>;
using ZVec = std::vector<Integer>;
using ZMatrix = std::vector<ZVec>;

/// Rank over Q. `cols` is needed when `rows` is empty.
std::size_t rank(const QMatrix& rows, std::size_t cols);

/// Basis of {x : rows * x = 0}, each vector scaled to a primitive integer
/// vector whose first nonzero entry is positive.
ZMatrix integer_nullspace(const QMatrix& rows, std::size_t cols);

/// Scales a rational vector to the primitive integer vector on the same ray
/// (positive multiple). Zero stays zero.
ZVec primitive(const QVec& v);

Integer max_abs(const ZVec& v);

/// Exact integer determinant (fraction-free elimination). det of 0x0 is 1.
Integer determinant(ZMatrix m);

/// For a primitive integer vector a (gcd 1), a unimodular W with
/// a^T W = e_1^T together with its inverse.
struct UnimodularPair {
    ZMatrix w;
    ZMatrix w_inv;
};
UnimodularPair unimodular_to_unit(const ZVec& a);

QVec to_qvec(const ZVec& v);
ZVec to_zvec(const std::vector<std::int64_t>& v);

}  // namespace lo
