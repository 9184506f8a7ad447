#include "odeco/energy.hpp"

#include <cmath>
#include <mutex>

#include "odeco/errors.hpp"
#include "odeco/parallel.hpp"
#include "odeco/quadrics.hpp"
#include "odeco/tensor.hpp"

namespace odeco {

namespace {

constexpr double kTikhonov = 1e-10;

struct Tables {
  std::array<int, 81> monomial;         // monomial slot of each Cartesian entry
  std::array<double, 81> inv_multinomial;
  Eigen::Matrix<double, 9, 15> second;  // vec(M) = L q, column-major
};

const Tables& tables() {
  static const Tables t = [] {
    Tables out;
    for (int e = 0; e < 81; ++e) {
      int cnt[3] = {0, 0, 0};
      for (int k = 0, rest = e; k < 4; ++k, rest /= 3) ++cnt[rest % 3];
      out.monomial[e] = basis::monomial_index(cnt[0], cnt[1], cnt[2]);
      out.inv_multinomial[e] = 1.0 / basis::multinomial(out.monomial[e]);
    }
    Eigen::Matrix<double, 81, 15> cartesian;
    for (int e = 0; e < 81; ++e)
      cartesian.row(e) = basis::sh_to_monomial_matrix().row(out.monomial[e]) * out.inv_multinomial[e];
    out.second.setZero();
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) out.second.row(i + 3 * j) += cartesian.row(i * 27 + j * 9 + 4 * k);
    return out;
  }();
  return t;
}

Mat3 second_order(const Vec15& q) {
  const Eigen::Matrix<double, 9, 1> m = tables().second * q;
  return Eigen::Map<const Mat3>(m.data());
}

struct TriangleResult {
  std::array<double, 5> terms{};  // curl, odeco, area, angle, smooth
  Eigen::Matrix<double, 15, 3> grad = Eigen::Matrix<double, 15, 3>::Zero();
  EnergyCounters counters;
};

}  // namespace

EnergyCounters& EnergyCounters::operator+=(const EnergyCounters& o) {
  regularized += o.regularized;
  singular += o.singular;
  nonpositive_det += o.nonpositive_det;
  zero_tensor += o.zero_tensor;
  return *this;
}

CurlDensity curl_density(const Vec15& q, const CoeffGradient& grad_q, const Vec3& n, bool with_gradient) {
  const auto& tb = tables();
  const Mat15& sm = basis::sh_to_monomial_matrix();
  const Vec15 u = sm * q;
  const Eigen::Matrix<double, 15, 3> du = sm * grad_q;
  Eigen::Matrix<double, 81, 1> t;
  Eigen::Matrix<double, 81, 3> dt;
  for (int e = 0; e < 81; ++e) {
    t[e] = u[tb.monomial[e]] * tb.inv_multinomial[e];
    dt.row(e) = du.row(tb.monomial[e]) * tb.inv_multinomial[e];
  }

  Mat3 m;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m(i, j) = t[i * 27 + j * 9] + t[i * 27 + j * 9 + 4] + t[i * 27 + j * 9 + 8];

  // W_ab = eps_{jab} n_j
  Mat3 w;
  w << 0, n[2], -n[1], -n[2], 0, n[0], n[1], -n[0], 0;

  std::array<double, 27> c;
  Vec3 r = Vec3::Zero();
  for (int k = 0; k < 27; ++k) {
    double s = 0;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) s += w(a, b) * dt(k * 3 + b, a);
    c[k] = s;
    r += s * t.segment<3>(k * 3);
  }

  CurlDensity out;
  Mat3 mr = m;
  if (is_near_singular(m)) {
    out.regularized = true;
    mr += kTikhonov * m.trace() / 3.0 * Mat3::Identity();
    if (is_near_singular(mr)) {
      out.singular = true;
      out.value = kPenalty;
      return out;
    }
  }
  const Mat3 p = mr.inverse();
  const Mat3 nn = p * p;
  const Vec3 s = nn * r;
  out.value = s.squaredNorm();
  if (!with_gradient) return out;

  const Vec3 gs = 2.0 * s;
  const Vec3 gr = nn.transpose() * gs;
  const Mat3 gn = gs * r.transpose();
  const Mat3 gp = gn * p.transpose() + p.transpose() * gn;
  Mat3 gm = -p.transpose() * gp * p.transpose();
  if (out.regularized) gm += kTikhonov / 3.0 * gm.trace() * Mat3::Identity();

  Eigen::Matrix<double, 81, 1> gt = Eigen::Matrix<double, 81, 1>::Zero();
  Eigen::Matrix<double, 81, 3> gdt;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) gt[i * 27 + j * 9 + 4 * k] += gm(i, j);
  for (int k = 0; k < 27; ++k) {
    gt.segment<3>(k * 3) += c[k] * gr;
    const double gc = t.segment<3>(k * 3).dot(gr);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) gdt(k * 3 + b, a) = w(a, b) * gc;
  }
  Vec15 gu = Vec15::Zero();
  Eigen::Matrix<double, 15, 3> gdu = Eigen::Matrix<double, 15, 3>::Zero();
  for (int e = 0; e < 81; ++e) {
    gu[tb.monomial[e]] += gt[e] * tb.inv_multinomial[e];
    gdu.row(tb.monomial[e]) += gdt.row(e) * tb.inv_multinomial[e];
  }
  out.d_q = sm.transpose() * gu;
  out.d_grad = sm.transpose() * gdu;
  return out;
}

bool normalized_odeco_penalty(const Vec15& q, double& value, Vec15* gradient) {
  const double n2 = q.squaredNorm();
  if (!(std::sqrt(n2) >= 1e-12)) {
    value = kPenalty;
    if (gradient) gradient->setZero();
    return false;
  }
  const Mat15& sm = basis::sh_to_monomial_matrix();
  const Vec15 u = sm * q;
  const auto& quadrics = OdecoQuadrics::instance();
  const double n4 = n2 * n2;
  if (!gradient) {
    value = quadrics.squared_sum(u) / n4;
    return true;
  }
  Vec15 gu;
  const double phi = quadrics.squared_sum(u, gu);
  value = phi / n4;
  *gradient = sm.transpose() * gu / n4 - 4.0 * value / n2 * q;
  return true;
}

EnergyEvaluator::EnergyEvaluator(const SurfaceMesh& mesh, EnergyWeights weights, EnergyMode mode,
                                 EnergyOptions options)
    : mesh_(mesh), weights_(weights), mode_(mode), options_(options) {
  if (weights.odeco < 0 || weights.area < 0 || weights.angle < 0 || !(weights.target_area > 0))
    throw Error("energy weights must be non-negative and the target area positive");
}

void EnergyEvaluator::ensure_isotropy() const {
  if (!isotropy_.empty()) return;
  static const AffineConstraint canonical = build_isotropy(Vec3::UnitZ());
  std::vector<AffineConstraint> built(mesh_.num_triangles());
  parallel_for(mesh_.num_triangles(), [&](int begin, int end) {
    for (int t = begin; t < end; ++t) built[t] = rotate_constraint(canonical, rotation_to(mesh_.face_normal(t)));
  });
  isotropy_ = std::move(built);
}

double EnergyEvaluator::assemble(const FieldState& s, const Active& active, const EnergyWeights& w, VecX* gradient,
                                 EnergyTerms* terms, EnergyCounters* counters) const {
  if (s.size() != 15L * mesh_.num_vertices()) throw Error("field state has the wrong length");
  if (active.angle) ensure_isotropy();

  const auto& rule = QuadratureRule::gauss3();
  const bool want_grad = gradient != nullptr;
  const int nt = mesh_.num_triangles();
  std::vector<TriangleResult> results(nt);

  parallel_for(nt, [&](int begin, int end) {
    for (int t = begin; t < end; ++t) {
      TriangleResult& res = results[t];
      const auto& tri = mesh_.triangle(t);
      const double jac = mesh_.jacobian(t);
      const Vec3& n = mesh_.face_normal(t);
      Eigen::Matrix<double, 15, 3> qv;
      Mat3 psi;  // rows: shape-function gradients
      for (int i = 0; i < 3; ++i) {
        qv.col(i) = vertex_coeffs(s, tri[i]);
        psi.row(i) = mesh_.element(t).gradients[i].transpose();
      }
      const CoeffGradient g = qv * psi;
      CoeffGradient gg = CoeffGradient::Zero();
      const double measure = options_.divide_by_jacobian ? 1.0 : jac;

      for (int k = 0; k < 3; ++k) {
        const Vec3& bary = rule.barycentric[k];
        const double wk = rule.weights[k];
        const Vec15 q = qv * bary;

        if (active.curl) {
          const CurlDensity h = curl_density(q, g, n, want_grad);
          res.counters.regularized += h.regularized;
          res.counters.singular += h.singular;
          res.terms[0] += wk * jac * h.value;
          if (want_grad && !h.singular) {
            res.grad.noalias() += (wk * jac) * h.d_q * bary.transpose();
            gg += (wk * jac) * h.d_grad;
          }
        }
        if (active.odeco) {
          double v;
          Vec15 dv;
          if (!normalized_odeco_penalty(q, v, want_grad ? &dv : nullptr)) ++res.counters.zero_tensor;
          res.terms[1] += wk * measure * v;
          if (want_grad) res.grad.noalias() += (w.odeco * wk * measure) * dv * bary.transpose();
        }
        if (active.area) {
          const Mat3 m = second_order(q);
          const double det = m.determinant();
          if (!(det > 0)) {
            ++res.counters.nonpositive_det;
            res.terms[2] += wk * measure * kPenalty;
          } else {
            const double l = std::log(w.target_area * det);
            res.terms[2] += wk * measure * l * l;
            if (want_grad) {
              const Mat3 gm = 2.0 * l * m.inverse().transpose();
              const Vec15 dq = tables().second.transpose() * Eigen::Map<const Eigen::Matrix<double, 9, 1>>(gm.data());
              res.grad.noalias() += (w.area * wk * measure) * dq * bary.transpose();
            }
          }
        }
        if (active.angle) {
          const AffineConstraint& iso = isotropy_[t];
          const VecX r = iso.residual(q);
          res.terms[3] += wk * measure * r.squaredNorm();
          if (want_grad) res.grad.noalias() += (2.0 * w.angle * wk * measure) * (iso.A.transpose() * r) * bary.transpose();
        }
      }
      if (active.smooth) {
        // constant integrand: 0.5 |grad q|^2 over the triangle
        const double sm = options_.divide_smoothness ? 0.5 : 0.5 * jac;
        res.terms[4] = sm * 0.5 * g.squaredNorm();
        if (want_grad) gg += sm * g;
      }
      if (want_grad) res.grad.noalias() += gg * psi.transpose();
    }
  });

  std::array<std::vector<double>, 5> columns;
  for (auto& col : columns) col.resize(nt);
  EnergyCounters total_counters;
  for (int t = 0; t < nt; ++t) {
    for (int j = 0; j < 5; ++j) columns[j][t] = results[t].terms[j];
    total_counters += results[t].counters;
  }
  EnergyTerms out;
  out.curl = pairwise_sum(columns[0]);
  out.odeco = pairwise_sum(columns[1]);
  out.area = pairwise_sum(columns[2]);
  out.angle = pairwise_sum(columns[3]);
  out.smooth = pairwise_sum(columns[4]);
  out.total = (active.curl ? out.curl : 0.0) + (active.odeco ? w.odeco * out.odeco : 0.0) +
              (active.area ? w.area * out.area : 0.0) + (active.angle ? w.angle * out.angle : 0.0) +
              (active.smooth ? out.smooth : 0.0);

  if (want_grad) {
    gradient->setZero(s.size());
    for (int t = 0; t < nt; ++t) {
      const auto& tri = mesh_.triangle(t);
      for (int i = 0; i < 3; ++i) gradient->segment<15>(15L * tri[i]) += results[t].grad.col(i);
    }
    if (!gradient->allFinite()) throw NaNEnergy("non-finite gradient");
  }
  if (!std::isfinite(out.total)) throw NaNEnergy("non-finite energy");
  if (terms) *terms = out;
  if (counters) *counters = total_counters;
  return out.total;
}

double EnergyEvaluator::evaluate(const FieldState& s, VecX* gradient, EnergyTerms* terms,
                                 EnergyCounters* counters) const {
  Active active{};
  if (mode_ == EnergyMode::Init) {
    active = {false, weights_.odeco > 0, false, false, true};
  } else {
    active = {true, weights_.odeco > 0, weights_.area > 0, weights_.angle > 0, false};
  }
  return assemble(s, active, weights_, gradient, terms, counters);
}

EnergyTerms EnergyEvaluator::breakdown(const FieldState& s, EnergyCounters* counters) const {
  EnergyTerms terms;
  assemble(s, {true, true, true, true, true}, weights_, nullptr, &terms, counters);
  return terms;
}

namespace {

double single_term(const FieldState& s, const SurfaceMesh& m, double EnergyTerms::*field, EnergyWeights w = {},
                   EnergyOptions o = {}) {
  return EnergyEvaluator(m, w, EnergyMode::Main, o).breakdown(s).*field;
}

}  // namespace

double curl_energy(const FieldState& s, const SurfaceMesh& m) { return single_term(s, m, &EnergyTerms::curl); }
double odeco_penalty(const FieldState& s, const SurfaceMesh& m) { return single_term(s, m, &EnergyTerms::odeco); }
double area_distortion(const FieldState& s, const SurfaceMesh& m, double target_area) {
  EnergyWeights w;
  w.target_area = target_area;
  return single_term(s, m, &EnergyTerms::area, w);
}
double angle_distortion(const FieldState& s, const SurfaceMesh& m) { return single_term(s, m, &EnergyTerms::angle); }
double smoothness(const FieldState& s, const SurfaceMesh& m, const EnergyOptions& options) {
  return single_term(s, m, &EnergyTerms::smooth, {}, options);
}

double total_energy_and_gradient(const FieldState& s, const SurfaceMesh& m, const EnergyWeights& w, EnergyMode mode,
                                 VecX& gradient) {
  return EnergyEvaluator(m, w, mode).evaluate(s, &gradient);
}

}  // namespace odeco
