#pragma once

#include <array>
#include <random>

#include "odeco/basis.hpp"
#include "odeco/types.hpp"

namespace odeco {

/// Symmetric 4th-order tensor on R^3 stored as real spherical-harmonic
/// coefficients (bands 0, 2, 4; ordering documented in basis.hpp).
/// Inner products and distances are Euclidean on the coefficients.
class ShTensor {
 public:
  ShTensor() : q_(Vec15::Zero()) {}
  explicit ShTensor(const Vec15& q) : q_(q) {}

  const Vec15& coeffs() const { return q_; }
  Vec15& coeffs() { return q_; }
  double operator[](int i) const { return q_[i]; }

  double band0() const { return q_[basis::kBand0]; }
  auto band2() const { return q_.segment<5>(basis::kBand2Begin); }
  auto band4() const { return q_.segment<9>(basis::kBand4Begin); }

  double norm() const { return q_.norm(); }

  /// p_T(x) = T . x^4.
  double evaluate(const Vec3& x) const { return basis::eval_sh(x).dot(q_); }

  ShTensor operator+(const ShTensor& o) const { return ShTensor(q_ + o.q_); }
  ShTensor operator-(const ShTensor& o) const { return ShTensor(q_ - o.q_); }
  ShTensor operator*(double s) const { return ShTensor(q_ * s); }
  friend ShTensor operator*(double s, const ShTensor& t) { return t * s; }

 private:
  Vec15 q_;
};

inline double distance(const ShTensor& a, const ShTensor& b) { return (a.coeffs() - b.coeffs()).norm(); }

/// The same tensor as coefficients u_{ijk} of x^i y^j z^k.
class MonomialTensor {
 public:
  MonomialTensor() : u_(Vec15::Zero()) {}
  explicit MonomialTensor(const Vec15& u) : u_(u) {}

  const Vec15& coeffs() const { return u_; }
  Vec15& coeffs() { return u_; }
  double operator[](int i) const { return u_[i]; }

  double evaluate(const Vec3& x) const { return basis::eval_monomials(x).dot(u_); }

 private:
  Vec15 u_;
};

/// Orthogonal frame with per-axis sizes: T = sum_m lambda_m axis_m^{x4}.
/// Axes are the columns of `axes`.
struct Frame {
  Vec3 eigenvalues = Vec3::Ones();
  Mat3 axes = Mat3::Identity();

  Vec3 axis(int m) const { return axes.col(m); }
  /// Some eigenvalue is not strictly positive.
  bool degenerate() const { return (eigenvalues.array() <= 0.0).any(); }
};

/// M_ij = T_ijkk.
struct SecondOrderPart {
  Mat3 matrix = Mat3::Zero();
};

/// Full Cartesian form, entry (a,b,c,d) at a*27 + b*9 + c*3 + d.
using CartesianTensor = std::array<double, 81>;

ShTensor monomial_to_sh(const MonomialTensor& t);
MonomialTensor sh_to_monomial(const ShTensor& q);

CartesianTensor to_cartesian(const MonomialTensor& t);
CartesianTensor to_cartesian(const ShTensor& q);
/// Symmetrizes before reading off monomial coefficients.
MonomialTensor from_cartesian(const CartesianTensor& t);

ShTensor from_frame(const Frame& f);

SecondOrderPart second_order_part(const ShTensor& q);

/// Contracts T once with M^p and symmetrizes; on odeco input the result has
/// eigenvalues lambda_m^{p+1} and the same eigenvectors.
/// Throws NonInvertibleSecondOrderPart for p < 0 when |det M| < 1e-12 (tr M / 3)^3.
ShTensor rescale_powers(const ShTensor& q, int p);

/// Scale-relative singularity test shared by rescale_powers and the energy.
bool is_near_singular(const Mat3& m);

/// c_i(sh_to_monomial(q)) for the 27 odeco quadrics.
std::array<double, 27> odeco_residuals(const ShTensor& q);

/// Frame nearest to q (in coefficient distance) among the candidates
/// generated from the eigendecomposition of the second-order part. The
/// result may be degenerate(); callers decide how to handle that.
Frame recover_frame(const ShTensor& q);

/// 15x15 matrix D with rotate_sh(q, R) = D q.
Mat15 sh_rotation_matrix(const Mat3& rotation);

/// p_out(x) = p_q(R^T x). Throws NotARotation.
ShTensor rotate_sh(const ShTensor& q, const Mat3& rotation);

/// Uniformly distributed rotation.
Mat3 random_rotation(std::mt19937_64& rng);

}  // namespace odeco
