#include "odeco/basis.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/LU>

namespace odeco::basis {

namespace {

// Dense polynomial in x, y, z with per-variable degree <= 4.
struct Poly {
  double c[5][5][5] = {};

  static Poly monomial(double coef, int i, int j, int k) {
    Poly p;
    p.c[i][j][k] = coef;
    return p;
  }
  Poly operator+(const Poly& o) const {
    Poly r = *this;
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j)
        for (int k = 0; k < 5; ++k) r.c[i][j][k] += o.c[i][j][k];
    return r;
  }
  Poly operator*(double s) const {
    Poly r = *this;
    for (auto& a : r.c)
      for (auto& b : a)
        for (auto& v : b) v *= s;
    return r;
  }
  Poly operator-(const Poly& o) const { return *this + o * -1.0; }
  Poly operator*(const Poly& o) const {
    Poly r;
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j)
        for (int k = 0; k < 5; ++k) {
          if (c[i][j][k] == 0.0) continue;
          for (int a = 0; a + i < 5; ++a)
            for (int b = 0; b + j < 5; ++b)
              for (int d = 0; d + k < 5; ++d) r.c[i + a][j + b][k + d] += c[i][j][k] * o.c[a][b][d];
        }
    return r;
  }
};

const Poly X = Poly::monomial(1, 1, 0, 0);
const Poly Y = Poly::monomial(1, 0, 1, 0);
const Poly Z = Poly::monomial(1, 0, 0, 1);
const Poly ONE = Poly::monomial(1, 0, 0, 0);

Vec15 to_monomials(const Poly& p) {
  Vec15 u;
  const auto& ex = monomial_exponents();
  for (int n = 0; n < 15; ++n) u[n] = p.c[ex[n].x][ex[n].y][ex[n].z];
  return u;
}

Mat15 build_sh_to_monomial() {
  const double pi = std::numbers::pi;
  const Poly r2 = X * X + Y * Y + Z * Z;
  const Poly r4 = r2 * r2;
  const Poly x2my2 = X * X - Y * Y;

  std::array<Poly, 15> y;
  y[0] = r4 * (0.5 / std::sqrt(pi));

  const double c2 = 0.5 * std::sqrt(15.0 / pi);
  y[1] = X * Y * r2 * c2;
  y[2] = Y * Z * r2 * c2;
  y[3] = (Z * Z * 3.0 - r2) * r2 * (0.25 * std::sqrt(5.0 / pi));
  y[4] = X * Z * r2 * c2;
  y[5] = x2my2 * r2 * (0.25 * std::sqrt(15.0 / pi));

  y[6] = X * Y * x2my2 * (0.75 * std::sqrt(35.0 / pi));
  y[7] = (X * X * 3.0 - Y * Y) * Y * Z * (0.75 * std::sqrt(35.0 / (2.0 * pi)));
  y[8] = X * Y * (Z * Z * 7.0 - r2) * (0.75 * std::sqrt(5.0 / pi));
  y[9] = Y * Z * (Z * Z * 7.0 - r2 * 3.0) * (0.75 * std::sqrt(5.0 / (2.0 * pi)));
  y[10] = (Z * Z * Z * Z * 35.0 - Z * Z * r2 * 30.0 + r4 * 3.0) * (3.0 / 16.0 / std::sqrt(pi));
  y[11] = X * Z * (Z * Z * 7.0 - r2 * 3.0) * (0.75 * std::sqrt(5.0 / (2.0 * pi)));
  y[12] = x2my2 * (Z * Z * 7.0 - r2) * (0.375 * std::sqrt(5.0 / pi));
  y[13] = (X * X - Y * Y * 3.0) * X * Z * (0.75 * std::sqrt(35.0 / (2.0 * pi)));
  y[14] = (X * X * (X * X - Y * Y * 3.0) - Y * Y * (X * X * 3.0 - Y * Y)) *
          (3.0 / 16.0 * std::sqrt(35.0 / pi));

  Mat15 s;
  for (int j = 0; j < 15; ++j) s.col(j) = to_monomials(y[j]);
  return s;
}

}  // namespace

const std::array<Exponent, 15>& monomial_exponents() {
  static const std::array<Exponent, 15> table = [] {
    std::array<Exponent, 15> t{};
    int n = 0;
    for (int i = 4; i >= 0; --i)
      for (int j = 4 - i; j >= 0; --j) t[n++] = {i, j, 4 - i - j};
    return t;
  }();
  return table;
}

int monomial_index(int i, int j, int /*k*/) {
  // Rows with x-exponent i start after all rows with larger x-exponent.
  int offset = 0;
  for (int a = 4; a > i; --a) offset += 5 - a;
  return offset + (4 - i - j);
}

double multinomial(int idx) {
  static const std::array<double, 15> table = [] {
    auto fact = [](int n) {
      double f = 1;
      for (int i = 2; i <= n; ++i) f *= i;
      return f;
    };
    std::array<double, 15> t{};
    const auto& ex = monomial_exponents();
    for (int n = 0; n < 15; ++n) t[n] = 24.0 / (fact(ex[n].x) * fact(ex[n].y) * fact(ex[n].z));
    return t;
  }();
  return table[idx];
}

const Mat15& sh_to_monomial_matrix() {
  static const Mat15 s = build_sh_to_monomial();
  return s;
}

const Mat15& monomial_to_sh_matrix() {
  static const Mat15 inv = sh_to_monomial_matrix().fullPivLu().inverse();
  return inv;
}

Vec15 eval_monomials(const Vec3& x) {
  const auto& ex = monomial_exponents();
  double px[5] = {1, x[0], x[0] * x[0], x[0] * x[0] * x[0], 0};
  double py[5] = {1, x[1], x[1] * x[1], x[1] * x[1] * x[1], 0};
  double pz[5] = {1, x[2], x[2] * x[2], x[2] * x[2] * x[2], 0};
  px[4] = px[2] * px[2];
  py[4] = py[2] * py[2];
  pz[4] = pz[2] * pz[2];
  Vec15 m;
  for (int n = 0; n < 15; ++n) m[n] = px[ex[n].x] * py[ex[n].y] * pz[ex[n].z];
  return m;
}

Vec15 eval_sh(const Vec3& x) { return sh_to_monomial_matrix().transpose() * eval_monomials(x); }

}  // namespace odeco::basis
