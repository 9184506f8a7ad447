#include "odeco/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/QR>

#include "odeco/errors.hpp"
#include "odeco/quadrics.hpp"

namespace odeco {

namespace {

// Monomial index of each of the 81 Cartesian entries.
const std::array<int, 81>& cartesian_to_monomial() {
  static const std::array<int, 81> table = [] {
    std::array<int, 81> t{};
    for (int e = 0; e < 81; ++e) {
      int cnt[3] = {0, 0, 0};
      int rest = e;
      for (int k = 0; k < 4; ++k) {
        ++cnt[rest % 3];
        rest /= 3;
      }
      t[e] = basis::monomial_index(cnt[0], cnt[1], cnt[2]);
    }
    return t;
  }();
  return table;
}

Vec15 rank_one_monomials(const Vec3& a) {
  // (a . x)^4 = sum multinomial * a1^i a2^j a3^k x^i y^j z^k
  Vec15 u;
  const auto& ex = basis::monomial_exponents();
  for (int n = 0; n < 15; ++n)
    u[n] = basis::multinomial(n) * std::pow(a[0], ex[n].x) * std::pow(a[1], ex[n].y) * std::pow(a[2], ex[n].z);
  return u;
}

ShTensor rank_one(const Vec3& a) { return ShTensor(basis::monomial_to_sh_matrix() * rank_one_monomials(a)); }

// T . x^3 (a vector), from the Cartesian form.
Vec3 contract3(const CartesianTensor& t, const Vec3& x) {
  Vec3 r = Vec3::Zero();
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      for (int c = 0; c < 3; ++c) {
        const double xyz = x[a] * x[b] * x[c];
        const int base = a * 27 + b * 9 + c * 3;
        r[0] += t[base + 0] * xyz;
        r[1] += t[base + 1] * xyz;
        r[2] += t[base + 2] * xyz;
      }
  return r;
}

// Least-squares sizes for fixed axes: argmin_lambda || q - sum lambda_m axis_m^4 ||.
Vec3 fit_sizes(const ShTensor& q, const Mat3& axes) {
  std::array<Vec15, 3> b;
  for (int m = 0; m < 3; ++m) b[m] = rank_one(axes.col(m)).coeffs();
  Mat3 gram;
  Vec3 rhs;
  for (int m = 0; m < 3; ++m) {
    rhs[m] = b[m].dot(q.coeffs());
    for (int n = 0; n < 3; ++n) gram(m, n) = b[m].dot(b[n]);
  }
  return gram.ldlt().solve(rhs);
}

// Rotates the pair of columns (i, j) of `axes` within their span to the
// angle maximizing p(c_i) + p(c_j). That sum only carries the 4-fold
// Fourier mode of p restricted to the plane, so the optimum is closed-form.
Mat3 align_pair(const ShTensor& q, Mat3 axes, int i, int j) {
  const Vec3 e1 = axes.col(i);
  const Vec3 e2 = axes.col(j);
  constexpr int kSamples = 16;
  double a4 = 0, b4 = 0;
  for (int k = 0; k < kSamples; ++k) {
    const double th = 2.0 * std::numbers::pi * k / kSamples;
    const double p = q.evaluate(std::cos(th) * e1 + std::sin(th) * e2);
    a4 += p * std::cos(4 * th);
    b4 += p * std::sin(4 * th);
  }
  const double th = 0.25 * std::atan2(b4, a4);
  axes.col(i) = std::cos(th) * e1 + std::sin(th) * e2;
  axes.col(j) = -std::sin(th) * e1 + std::cos(th) * e2;
  return axes;
}

// Maximizer of p on the sphere by shifted symmetric power iteration from a
// fixed set of starts.
Vec3 dominant_direction(const ShTensor& q) {
  const CartesianTensor t = to_cartesian(q);
  double shift = 0;
  for (double v : t) shift += v * v;
  shift = std::sqrt(shift) + 1e-300;

  static const std::array<Vec3, 13> starts = [] {
    std::array<Vec3, 13> s;
    int n = 0;
    s[n++] = Vec3(1, 0, 0);
    s[n++] = Vec3(0, 1, 0);
    s[n++] = Vec3(0, 0, 1);
    s[n++] = Vec3(1, 1, 0).normalized();
    s[n++] = Vec3(1, -1, 0).normalized();
    s[n++] = Vec3(1, 0, 1).normalized();
    s[n++] = Vec3(1, 0, -1).normalized();
    s[n++] = Vec3(0, 1, 1).normalized();
    s[n++] = Vec3(0, 1, -1).normalized();
    s[n++] = Vec3(1, 1, 1).normalized();
    s[n++] = Vec3(1, 1, -1).normalized();
    s[n++] = Vec3(1, -1, 1).normalized();
    s[n++] = Vec3(-1, 1, 1).normalized();
    return s;
  }();

  Vec3 best = starts[0];
  double best_p = -std::numeric_limits<double>::infinity();
  for (const Vec3& s : starts) {
    Vec3 x = s;
    for (int it = 0; it < 300; ++it) {
      Vec3 next = (contract3(t, x) + shift * x).normalized();
      const double change = (next - x).norm();
      x = next;
      if (change < 1e-15) break;
    }
    const double p = q.evaluate(x);
    if (p > best_p) {
      best_p = p;
      best = x;
    }
  }
  return best;
}

Mat3 complete_basis(const Vec3& a) {
  const Vec3 helper = std::abs(a[0]) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  const Vec3 b = (helper - helper.dot(a) * a).normalized();
  Mat3 m;
  m.col(0) = a;
  m.col(1) = b;
  m.col(2) = a.cross(b);
  return m;
}

}  // namespace

ShTensor monomial_to_sh(const MonomialTensor& t) { return ShTensor(basis::monomial_to_sh_matrix() * t.coeffs()); }

MonomialTensor sh_to_monomial(const ShTensor& q) { return MonomialTensor(basis::sh_to_monomial_matrix() * q.coeffs()); }

CartesianTensor to_cartesian(const MonomialTensor& t) {
  const auto& idx = cartesian_to_monomial();
  CartesianTensor out{};
  for (int e = 0; e < 81; ++e) out[e] = t[idx[e]] / basis::multinomial(idx[e]);
  return out;
}

CartesianTensor to_cartesian(const ShTensor& q) { return to_cartesian(sh_to_monomial(q)); }

MonomialTensor from_cartesian(const CartesianTensor& t) {
  const auto& idx = cartesian_to_monomial();
  Vec15 u = Vec15::Zero();
  for (int e = 0; e < 81; ++e) u[idx[e]] += t[e];
  return MonomialTensor(u);
}

ShTensor from_frame(const Frame& f) {
  Vec15 u = Vec15::Zero();
  for (int m = 0; m < 3; ++m) u += f.eigenvalues[m] * rank_one_monomials(f.axes.col(m));
  return ShTensor(basis::monomial_to_sh_matrix() * u);
}

SecondOrderPart second_order_part(const ShTensor& q) {
  const CartesianTensor t = to_cartesian(q);
  SecondOrderPart out;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0;
      for (int k = 0; k < 3; ++k) s += t[i * 27 + j * 9 + k * 3 + k];
      out.matrix(i, j) = s;
    }
  return out;
}

bool is_near_singular(const Mat3& m) {
  const double scale = m.trace() / 3.0;
  return std::abs(m.determinant()) < 1e-12 * std::abs(scale * scale * scale) || scale == 0.0;
}

ShTensor rescale_powers(const ShTensor& q, int p) {
  if (p == 0) return q;
  const Mat3 m = second_order_part(q).matrix;
  if (p < 0 && is_near_singular(m))
    throw NonInvertibleSecondOrderPart("rescale_powers: second-order part is numerically singular");

  Eigen::SelfAdjointEigenSolver<Mat3> eig(m);
  const Vec3 powered = eig.eigenvalues().array().pow(static_cast<double>(p));
  const Mat3 mp = eig.eigenvectors() * powered.asDiagonal() * eig.eigenvectors().transpose();

  const CartesianTensor t = to_cartesian(q);
  CartesianTensor out{};
  for (int abc = 0; abc < 27; ++abc)
    for (int d = 0; d < 3; ++d) {
      double s = 0;
      for (int e = 0; e < 3; ++e) s += t[abc * 3 + e] * mp(e, d);
      out[abc * 3 + d] = s;
    }
  // Symmetrize: from_cartesian sums all permutations of an index multiset.
  Vec15 u = from_cartesian(out).coeffs();
  return ShTensor(basis::monomial_to_sh_matrix() * u);
}

std::array<double, 27> odeco_residuals(const ShTensor& q) {
  return OdecoQuadrics::instance().residuals(sh_to_monomial(q).coeffs());
}

Frame recover_frame(const ShTensor& q) {
  const Mat3 m = second_order_part(q).matrix;
  Eigen::SelfAdjointEigenSolver<Mat3> eig(m);

  std::vector<Mat3> candidates;
  Mat3 base = eig.eigenvectors();
  if (base.determinant() < 0) base.col(2) *= -1.0;
  candidates.push_back(base);

  // Within a degenerate eigenspace the matrix carries no orientation; the
  // quartic part does. Rotating every eigenvector pair by the quartic
  // optimum covers 2D degeneracies, the power-iteration candidate covers
  // the fully isotropic case.
  candidates.push_back(align_pair(q, base, 0, 1));
  candidates.push_back(align_pair(q, base, 1, 2));
  candidates.push_back(align_pair(q, base, 0, 2));
  candidates.push_back(align_pair(q, complete_basis(dominant_direction(q)), 1, 2));

  Frame best;
  double best_dist = std::numeric_limits<double>::infinity();
  for (const Mat3& axes : candidates) {
    Frame f;
    f.axes = axes;
    f.eigenvalues = fit_sizes(q, axes);
    const double d = distance(from_frame(f), q);
    if (d < best_dist - 1e-14 * (1.0 + q.norm())) {
      best_dist = d;
      best = f;
    }
  }
  return best;
}

Mat15 sh_rotation_matrix(const Mat3& rotation) {
  struct Samples {
    std::vector<Vec3> points;
    Eigen::MatrixXd pinv;  // 15 x K
  };
  static const Samples samples = [] {
    Samples s;
    constexpr int kPoints = 40;
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    Eigen::MatrixXd y(kPoints, 15);
    for (int k = 0; k < kPoints; ++k) {
      const double z = 1.0 - 2.0 * (k + 0.5) / kPoints;
      const double r = std::sqrt(1.0 - z * z);
      const Vec3 x(r * std::cos(golden * k), r * std::sin(golden * k), z);
      s.points.push_back(x);
      y.row(k) = basis::eval_sh(x).transpose();
    }
    s.pinv = y.completeOrthogonalDecomposition().pseudoInverse();
    return s;
  }();

  Eigen::MatrixXd rotated(samples.points.size(), 15);
  for (std::size_t k = 0; k < samples.points.size(); ++k)
    rotated.row(static_cast<Eigen::Index>(k)) = basis::eval_sh(rotation.transpose() * samples.points[k]).transpose();
  return samples.pinv * rotated;
}

ShTensor rotate_sh(const ShTensor& q, const Mat3& rotation) {
  if ((rotation.transpose() * rotation - Mat3::Identity()).norm() > 1e-8 || rotation.determinant() < 0)
    throw NotARotation("rotate_sh: matrix is not a proper rotation");
  return ShTensor(sh_rotation_matrix(rotation) * q.coeffs());
}

Mat3 random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::Quaterniond quat(normal(rng), normal(rng), normal(rng), normal(rng));
  quat.normalize();
  return quat.toRotationMatrix();
}

}  // namespace odeco
