#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>

#include "odeco/errors.hpp"
#include "odeco/quadrics.hpp"
#include "odeco/tensor.hpp"
#include "support/sphere_quadrature.hpp"

using namespace odeco;

namespace {

Frame make_frame(const Vec3& lambda, const Mat3& axes) {
  Frame f;
  f.eigenvalues = lambda;
  f.axes = axes;
  return f;
}

Frame random_frame(std::mt19937_64& rng, double lo = 0.5, double hi = 3.0) {
  std::uniform_real_distribution<double> size(lo, hi);
  return make_frame(Vec3(size(rng), size(rng), size(rng)), random_rotation(rng));
}

Mat3 axis_rotation(const Vec3& axis, double angle) { return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix(); }

// Sum_m lambda_m (u_m . x)^4, evaluated directly.
double frame_polynomial(const Frame& f, const Vec3& x) {
  double s = 0;
  for (int m = 0; m < 3; ++m) s += f.eigenvalues[m] * std::pow(f.axis(m).dot(x), 4);
  return s;
}

// Matches recovered eigenpairs to the reference up to sign and permutation.
// Returns the largest axis misalignment (1 - |cos|) and size error.
std::pair<double, double> frame_mismatch(const Frame& ref, const Frame& got) {
  double axis_err = 0, size_err = 0;
  for (int m = 0; m < 3; ++m) {
    int best = 0;
    double best_dot = -1;
    for (int k = 0; k < 3; ++k) {
      const double d = std::abs(ref.axis(m).dot(got.axis(k)));
      if (d > best_dot) {
        best_dot = d;
        best = k;
      }
    }
    axis_err = std::max(axis_err, 1.0 - best_dot);
    size_err = std::max(size_err, std::abs(ref.eigenvalues[m] - got.eigenvalues[best]));
  }
  return {axis_err, size_err};
}

}  // namespace

TEST_CASE("basis: spherical harmonics are orthonormal under sphere quadrature") {
  const auto rule = testing::sphere_rule(6);
  Mat15 gram = Mat15::Zero();
  for (const auto& p : rule) {
    const Vec15 y = basis::eval_sh(p.x);
    gram += p.weight * y * y.transpose();
  }
  CHECK((gram - Mat15::Identity()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("basis: monomial index matches exponent table") {
  const auto& ex = basis::monomial_exponents();
  for (int n = 0; n < 15; ++n) CHECK(basis::monomial_index(ex[n].x, ex[n].y, ex[n].z) == n);
  CHECK(basis::multinomial(basis::monomial_index(2, 1, 1)) == doctest::Approx(12.0));
  CHECK(basis::multinomial(basis::monomial_index(4, 0, 0)) == doctest::Approx(1.0));
}

TEST_CASE("monomial_to_sh") {
  SUBCASE("isotropic odeco tensor has no band-2 content") {
    Vec15 u = Vec15::Zero();
    u[basis::monomial_index(4, 0, 0)] = 1;
    u[basis::monomial_index(0, 4, 0)] = 1;
    u[basis::monomial_index(0, 0, 4)] = 1;
    const ShTensor q = monomial_to_sh(MonomialTensor(u));
    CHECK(q.band2().norm() < 1e-14);
    CHECK(std::abs(q.band0()) > 0.1);
    CHECK(q.band4().norm() > 0.1);
  }
  SUBCASE("zero maps to zero") { CHECK(monomial_to_sh(MonomialTensor()).norm() == 0.0); }
  SUBCASE("Parseval: sphere integral of p^2 equals ||q||^2") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> normal;
    const auto rule = testing::sphere_rule(6);
    for (int trial = 0; trial < 20; ++trial) {
      Vec15 u;
      for (int i = 0; i < 15; ++i) u[i] = normal(rng);
      const MonomialTensor t(u);
      double integral = 0;
      for (const auto& p : rule) integral += p.weight * std::pow(t.evaluate(p.x), 2);
      const double q2 = monomial_to_sh(t).coeffs().squaredNorm();
      CHECK(std::abs(integral - q2) < 1e-6 * q2);
    }
  }
}

TEST_CASE("sh_to_monomial") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal;
  SUBCASE("round trip is the identity") {
    for (int trial = 0; trial < 100; ++trial) {
      Vec15 u;
      for (int i = 0; i < 15; ++i) u[i] = normal(rng);
      const Vec15 back = sh_to_monomial(monomial_to_sh(MonomialTensor(u))).coeffs();
      CHECK((back - u).norm() < 1e-12 * u.norm());
    }
  }
  SUBCASE("zero maps to zero") { CHECK(sh_to_monomial(ShTensor()).coeffs().norm() == 0.0); }
  SUBCASE("axis frame expands to x^4 + y^4 + z^4") {
    const Vec15 u = sh_to_monomial(from_frame(Frame{})).coeffs();
    Vec15 expected = Vec15::Zero();
    expected[basis::monomial_index(4, 0, 0)] = 1;
    expected[basis::monomial_index(0, 4, 0)] = 1;
    expected[basis::monomial_index(0, 0, 4)] = 1;
    CHECK((u - expected).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("random frame matches direct evaluation of sum lambda (u.x)^4") {
    for (int trial = 0; trial < 20; ++trial) {
      const Frame f = random_frame(rng);
      const MonomialTensor t = sh_to_monomial(from_frame(f));
      for (int k = 0; k < 10; ++k) {
        const Vec3 x = Vec3(normal(rng), normal(rng), normal(rng));
        CHECK(t.evaluate(x) == doctest::Approx(frame_polynomial(f, x)).epsilon(1e-11));
      }
    }
  }
}

TEST_CASE("from_frame") {
  SUBCASE("unit axis frame is isotropic") { CHECK(from_frame(Frame{}).band2().norm() < 1e-14); }
  SUBCASE("quarter turns about an axis leave the tensor unchanged") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 10; ++trial) {
      const Frame f = random_frame(rng);
      for (int m = 0; m < 3; ++m) {
        Frame g = f;
        g.axes = axis_rotation(f.axis(m), std::numbers::pi / 2) * f.axes;
        // the rotated frame permutes the two other axes; sizes move with them
        const int a = (m + 1) % 3, b = (m + 2) % 3;
        std::swap(g.eigenvalues[a], g.eigenvalues[b]);
        CHECK(distance(from_frame(f), from_frame(g)) < 1e-12);
      }
    }
  }
  SUBCASE("sign and permutation invariance") {
    std::mt19937_64 rng(5);
    const Frame f = random_frame(rng);
    Frame g;
    g.axes.col(0) = -f.axis(2);
    g.axes.col(1) = f.axis(0);
    g.axes.col(2) = -f.axis(1);
    g.eigenvalues = Vec3(f.eigenvalues[2], f.eigenvalues[0], f.eigenvalues[1]);
    CHECK(distance(from_frame(f), from_frame(g)) < 1e-12);
  }
  SUBCASE("point values for lambda = (1,2,3) on the axes") {
    const ShTensor q = from_frame(make_frame(Vec3(1, 2, 3), Mat3::Identity()));
    CHECK(q.evaluate(Vec3::UnitY()) == doctest::Approx(2.0).epsilon(1e-13));
    CHECK(q.evaluate(Vec3(1, 1, 0).normalized()) == doctest::Approx(3.0 / 4.0).epsilon(1e-13));
  }
}

TEST_CASE("second_order_part") {
  SUBCASE("axis frame gives diag(lambda)") {
    const Mat3 m = second_order_part(from_frame(make_frame(Vec3(1, 2, 3), Mat3::Identity()))).matrix;
    CHECK((m - Vec3(1, 2, 3).asDiagonal().toDenseMatrix()).cwiseAbs().maxCoeff() < 1e-13);
  }
  SUBCASE("zero tensor gives zero") { CHECK(second_order_part(ShTensor()).matrix.norm() == 0.0); }
  SUBCASE("eigenvalues of M match the construction") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 50; ++trial) {
      const Frame f = random_frame(rng);
      const Mat3 m = second_order_part(from_frame(f)).matrix;
      Eigen::SelfAdjointEigenSolver<Mat3> eig(m);
      Vec3 expected = f.eigenvalues;
      std::sort(expected.data(), expected.data() + 3);
      CHECK((eig.eigenvalues() - expected).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
  SUBCASE("rotation equivariance M(rotate(q,R)) = R M(q) R^T") {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> normal;
    for (int trial = 0; trial < 20; ++trial) {
      Vec15 v;
      for (int i = 0; i < 15; ++i) v[i] = normal(rng);
      const ShTensor q(v);
      const Mat3 r = random_rotation(rng);
      const Mat3 lhs = second_order_part(rotate_sh(q, r)).matrix;
      const Mat3 rhs = r * second_order_part(q).matrix * r.transpose();
      CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-9);
    }
  }
}

TEST_CASE("rescale_powers") {
  std::mt19937_64 rng(19);
  SUBCASE("p = 0 is the identity") {
    const ShTensor q = from_frame(random_frame(rng));
    CHECK(distance(rescale_powers(q, 0), q) == 0.0);
  }
  SUBCASE("p = -1 turns a uniform frame octahedral") {
    const Mat3 r = random_rotation(rng);
    const ShTensor q = from_frame(make_frame(Vec3(2, 2, 2), r));
    CHECK(distance(rescale_powers(q, -1), from_frame(make_frame(Vec3::Ones(), r))) < 1e-12);
  }
  SUBCASE("p = -2 inverts sizes") {
    const Mat3 r = random_rotation(rng);
    const Frame f = make_frame(Vec3(1, 2, 4), r);
    const Frame got = recover_frame(rescale_powers(from_frame(f), -2));
    const auto [axis_err, size_err] = frame_mismatch(make_frame(Vec3(1, 0.5, 0.25), r), got);
    CHECK(axis_err < 1e-10);
    CHECK(size_err < 1e-10);
  }
  SUBCASE("singular second-order part is rejected for negative powers") {
    const ShTensor q = from_frame(make_frame(Vec3(1, 1, 0), Mat3::Identity()));
    CHECK_THROWS_AS(rescale_powers(q, -1), NonInvertibleSecondOrderPart);
    CHECK_NOTHROW(rescale_powers(q, 1));
  }
}

TEST_CASE("odeco quadrics") {
  const auto& quadrics = OdecoQuadrics::instance();
  SUBCASE("moment matrix has a clear 27-dimensional null space") {
    CHECK(quadrics.last_kept_singular_value() > 1e-6);
    CHECK(quadrics.largest_null_singular_value() < 1e-12);
  }
  SUBCASE("forms are symmetric with unit Frobenius norm") {
    for (int i = 0; i < OdecoQuadrics::kCount; ++i) {
      const Mat15 a = quadrics.matrix(i);
      CHECK((a - a.transpose()).norm() == 0.0);
      CHECK(a.norm() == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
  SUBCASE("sum of squares does not depend on the sampling seed") {
    const OdecoQuadrics other = OdecoQuadrics::build(2500, 99);
    std::mt19937_64 rng(23);
    std::normal_distribution<double> normal;
    for (int trial = 0; trial < 10; ++trial) {
      Vec15 u;
      for (int i = 0; i < 15; ++i) u[i] = normal(rng);
      CHECK(other.squared_sum(u) == doctest::Approx(quadrics.squared_sum(u)).epsilon(1e-9));
    }
  }
  SUBCASE("gradient of the sum of squares matches finite differences") {
    std::mt19937_64 rng(29);
    std::normal_distribution<double> normal;
    Vec15 u;
    for (int i = 0; i < 15; ++i) u[i] = normal(rng);
    Vec15 g;
    quadrics.squared_sum(u, g);
    for (int i = 0; i < 15; ++i) {
      Vec15 up = u, dn = u;
      const double h = 1e-6;
      up[i] += h;
      dn[i] -= h;
      const double fd = (quadrics.squared_sum(up) - quadrics.squared_sum(dn)) / (2 * h);
      CHECK(std::abs(fd - g[i]) < 1e-6 * (1 + std::abs(fd)));
    }
  }
}

TEST_CASE("odeco_residuals") {
  SUBCASE("vanish on 1000 random frames") {
    std::mt19937_64 rng(31);
    double worst = 0;
    for (int trial = 0; trial < 1000; ++trial) {
      for (double c : odeco_residuals(from_frame(random_frame(rng)))) worst = std::max(worst, std::abs(c));
    }
    CHECK(worst < 1e-10);
  }
  SUBCASE("x^4 + x^2 y^2 is not odeco") {
    Vec15 u = Vec15::Zero();
    u[basis::monomial_index(4, 0, 0)] = 1;
    u[basis::monomial_index(2, 2, 0)] = 1;
    double worst = 0;
    for (double c : odeco_residuals(monomial_to_sh(MonomialTensor(u)))) worst = std::max(worst, std::abs(c));
    CHECK(worst > 1e-3);
  }
  SUBCASE("residuals are quadratic in q") {
    Vec15 u = Vec15::Zero();
    u[basis::monomial_index(4, 0, 0)] = 1;
    u[basis::monomial_index(2, 1, 1)] = 0.7;
    const ShTensor q = monomial_to_sh(MonomialTensor(u));
    const auto r1 = odeco_residuals(q);
    const auto r2 = odeco_residuals(q * 2.0);
    for (int i = 0; i < 27; ++i) CHECK(r2[i] == doctest::Approx(4 * r1[i]).epsilon(1e-12));
  }
}

TEST_CASE("band interpretation") {
  // ||q_2||^2 = C2 sum_m (lambda_{m+1} - lambda_m)^2 and q_0 = C0 sum lambda
  std::mt19937_64 rng(37);
  std::vector<double> c2, c0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Frame f = random_frame(rng);
    const ShTensor q = from_frame(f);
    const Vec3& l = f.eigenvalues;
    const double spread = std::pow(l[1] - l[0], 2) + std::pow(l[2] - l[1], 2) + std::pow(l[0] - l[2], 2);
    c2.push_back(q.band2().squaredNorm() / spread);
    c0.push_back(q.band0() / l.sum());
  }
  auto cv = [](const std::vector<double>& v) {
    double mean = 0, var = 0;
    for (double x : v) mean += x;
    mean /= v.size();
    for (double x : v) var += (x - mean) * (x - mean);
    return std::sqrt(var / v.size()) / std::abs(mean);
  };
  CHECK(cv(c2) < 1e-8);
  CHECK(cv(c0) < 1e-12);
  // Sphere average of (u.x)^4 is 1/5, Y_0^0 = 1/(2 sqrt(pi)).
  CHECK(c0.front() == doctest::Approx(4 * std::numbers::pi / 5 / (2 * std::sqrt(std::numbers::pi))).epsilon(1e-12));
}

TEST_CASE("recover_frame") {
  SUBCASE("round trip over random rotations with distinct sizes") {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 100; ++trial) {
      const Frame f = make_frame(Vec3(1, 2, 3), random_rotation(rng));
      const Frame got = recover_frame(from_frame(f));
      const auto [axis_err, size_err] = frame_mismatch(f, got);
      CHECK(axis_err < 1e-8);
      CHECK(size_err < 1e-8);
      CHECK((got.axes.transpose() * got.axes - Mat3::Identity()).norm() < 1e-8);
      CHECK_FALSE(got.degenerate());
    }
  }
  SUBCASE("isotropic tensors are reproduced") {
    std::mt19937_64 rng(43);
    for (int trial = 0; trial < 50; ++trial) {
      const ShTensor q = from_frame(make_frame(Vec3::Ones(), random_rotation(rng)));
      const Frame got = recover_frame(q);
      CHECK((got.eigenvalues - Vec3::Ones()).norm() < 1e-8);
      CHECK(distance(from_frame(got), q) < 1e-8);
    }
  }
  SUBCASE("two equal sizes in a random orientation") {
    std::mt19937_64 rng(47);
    for (int trial = 0; trial < 50; ++trial) {
      const Frame f = make_frame(Vec3(1, 2, 2), random_rotation(rng));
      const Frame got = recover_frame(from_frame(f));
      const auto [axis_err, size_err] = frame_mismatch(f, got);
      CHECK(axis_err < 1e-8);
      CHECK(size_err < 1e-8);
    }
  }
  SUBCASE("small perturbations move the frame proportionally") {
    std::mt19937_64 rng(53);
    std::normal_distribution<double> normal;
    double worst_ratio = 0;
    for (int trial = 0; trial < 50; ++trial) {
      const Frame f = make_frame(Vec3(1, 1.5, 2.5), random_rotation(rng));
      Vec15 noise;
      for (int i = 0; i < 15; ++i) noise[i] = normal(rng);
      noise *= 1e-3 / noise.norm();
      const Frame got = recover_frame(ShTensor(from_frame(f).coeffs() + noise));
      const auto [axis_err, size_err] = frame_mismatch(f, got);
      worst_ratio = std::max({worst_ratio, std::sqrt(2 * axis_err) / 1e-3, size_err / 1e-3});
    }
    CHECK(worst_ratio < 20.0);
  }
  SUBCASE("negative sizes are flagged") {
    const Frame got = recover_frame(from_frame(make_frame(Vec3(1, -0.5, 2), Mat3::Identity())));
    CHECK(got.degenerate());
  }
}

TEST_CASE("rotate_sh") {
  std::mt19937_64 rng(59);
  SUBCASE("identity rotation") {
    const ShTensor q = from_frame(random_frame(rng));
    CHECK(distance(rotate_sh(q, Mat3::Identity()), q) < 1e-12);
  }
  SUBCASE("equivariance with from_frame") {
    for (int trial = 0; trial < 20; ++trial) {
      const Frame f = random_frame(rng);
      const Mat3 r = random_rotation(rng);
      Frame g = f;
      g.axes = r * f.axes;
      CHECK(distance(rotate_sh(from_frame(f), r), from_frame(g)) < 1e-9);
    }
  }
  SUBCASE("quarter turn about z fixes z-aligned tensors with equal tangential sizes") {
    const ShTensor q = from_frame(make_frame(Vec3(1.7, 1.7, 0.6), Mat3::Identity()));
    CHECK(distance(rotate_sh(q, axis_rotation(Vec3::UnitZ(), std::numbers::pi / 2)), q) < 1e-12);
    const ShTensor aniso = from_frame(make_frame(Vec3(1.0, 1.7, 0.6), Mat3::Identity()));
    CHECK(distance(rotate_sh(aniso, axis_rotation(Vec3::UnitZ(), std::numbers::pi / 2)), aniso) > 1e-3);
  }
  SUBCASE("composition law") {
    const Mat3 r1 = random_rotation(rng), r2 = random_rotation(rng);
    CHECK((sh_rotation_matrix(r1) * sh_rotation_matrix(r2) - sh_rotation_matrix(r1 * r2)).norm() < 1e-10);
  }
  SUBCASE("rejects non-rotations") {
    Mat3 m = Mat3::Identity();
    m(0, 0) = -1;
    CHECK_THROWS_AS(rotate_sh(ShTensor(), m), NotARotation);
    CHECK_THROWS_AS(rotate_sh(ShTensor(), 1.01 * Mat3::Identity()), NotARotation);
  }
}
