#pragma once

#include <array>
#include <cstdint>

#include "odeco/types.hpp"

namespace odeco {

/// The quadratic forms c_i(u) = u^T A_i u vanishing on odeco tensors, in
/// monomial coordinates.
///
/// Built numerically: random odeco tensors are sampled, each contributes
/// the row vec(u u^T) (upper triangle, off-diagonals scaled by sqrt 2) to a
/// moment matrix, and the forms are an orthonormal basis of its null space.
/// The basis is orthonormal in the Frobenius inner product, so sum_i c_i^2
/// does not depend on the sampling seed.
class OdecoQuadrics {
 public:
  static constexpr int kCount = 27;
  static constexpr int kPacked = 120;
  using Packed = Eigen::Matrix<double, kCount, kPacked>;

  /// Shared instance built once with the default seed.
  static const OdecoQuadrics& instance();

  /// Throws Error unless the null space has dimension exactly 27.
  static OdecoQuadrics build(int samples, std::uint64_t seed);

  /// A_i as a symmetric 15x15 matrix.
  Mat15 matrix(int i) const;

  std::array<double, kCount> residuals(const Vec15& u) const;

  /// sum_i c_i(u)^2.
  double squared_sum(const Vec15& u) const;
  /// sum_i c_i(u)^2 and its gradient with respect to u.
  double squared_sum(const Vec15& u, Vec15& gradient) const;

  /// Singular values of the moment matrix just inside and outside the
  /// null space (relative to the largest); useful to judge the cut.
  double last_kept_singular_value() const { return last_kept_; }
  double largest_null_singular_value() const { return largest_null_; }

 private:
  OdecoQuadrics() = default;
  Packed forms_;
  double last_kept_ = 0;
  double largest_null_ = 0;
};

}  // namespace odeco
