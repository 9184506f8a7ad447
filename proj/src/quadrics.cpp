#include "odeco/quadrics.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/SVD>

#include "odeco/errors.hpp"
#include "odeco/tensor.hpp"

namespace odeco {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

struct PairTable {
  std::array<std::array<int, 2>, 120> pairs{};
  PairTable() {
    int n = 0;
    for (int a = 0; a < 15; ++a)
      for (int b = a; b < 15; ++b) pairs[n++] = {a, b};
  }
};

const PairTable& pair_table() {
  static const PairTable t;
  return t;
}

Eigen::Matrix<double, 120, 1> lift(const Vec15& u) {
  Eigen::Matrix<double, 120, 1> phi;
  const auto& pt = pair_table();
  for (int n = 0; n < 120; ++n) {
    const int a = pt.pairs[n][0];
    const int b = pt.pairs[n][1];
    phi[n] = (a == b) ? u[a] * u[a] : kSqrt2 * u[a] * u[b];
  }
  return phi;
}

}  // namespace

OdecoQuadrics OdecoQuadrics::build(int samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  Eigen::MatrixXd moments(samples, kPacked);
  for (int s = 0; s < samples; ++s) {
    Frame f;
    f.axes = random_rotation(rng);
    f.eigenvalues = Vec3(normal(rng), normal(rng), normal(rng));
    moments.row(s) = lift(sh_to_monomial(from_frame(f)).coeffs()).transpose();
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(moments, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double cut = 1e-9 * sv[0];
  int rank = 0;
  while (rank < sv.size() && sv[rank] > cut) ++rank;
  const int nullity = kPacked - rank;
  if (nullity != kCount) {
    std::ostringstream msg;
    msg << "odeco quadrics: expected a 27-dimensional space of quadrics, found " << nullity;
    throw Error(msg.str());
  }

  OdecoQuadrics out;
  out.forms_ = svd.matrixV().rightCols(kCount).transpose();
  out.last_kept_ = sv[rank - 1] / sv[0];
  out.largest_null_ = (rank < sv.size()) ? sv[rank] / sv[0] : 0.0;
  return out;
}

const OdecoQuadrics& OdecoQuadrics::instance() {
  static const OdecoQuadrics q = build(2000, 0x0dec0ULL);
  return q;
}

Mat15 OdecoQuadrics::matrix(int i) const {
  Mat15 a = Mat15::Zero();
  const auto& pt = pair_table();
  for (int n = 0; n < kPacked; ++n) {
    const int r = pt.pairs[n][0];
    const int c = pt.pairs[n][1];
    if (r == c) {
      a(r, r) = forms_(i, n);
    } else {
      a(r, c) = a(c, r) = forms_(i, n) / kSqrt2;
    }
  }
  return a;
}

std::array<double, OdecoQuadrics::kCount> OdecoQuadrics::residuals(const Vec15& u) const {
  const Eigen::Matrix<double, kCount, 1> c = forms_ * lift(u);
  std::array<double, kCount> out{};
  for (int i = 0; i < kCount; ++i) out[i] = c[i];
  return out;
}

double OdecoQuadrics::squared_sum(const Vec15& u) const { return (forms_ * lift(u)).squaredNorm(); }

double OdecoQuadrics::squared_sum(const Vec15& u, Vec15& gradient) const {
  const Eigen::Matrix<double, kCount, 1> c = forms_ * lift(u);
  const Eigen::Matrix<double, kPacked, 1> g_phi = 2.0 * (forms_.transpose() * c);
  gradient.setZero();
  const auto& pt = pair_table();
  for (int n = 0; n < kPacked; ++n) {
    const int a = pt.pairs[n][0];
    const int b = pt.pairs[n][1];
    if (a == b) {
      gradient[a] += 2.0 * g_phi[n] * u[a];
    } else {
      gradient[a] += kSqrt2 * g_phi[n] * u[b];
      gradient[b] += kSqrt2 * g_phi[n] * u[a];
    }
  }
  return c.squaredNorm();
}

}  // namespace odeco
