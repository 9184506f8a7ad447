#include "odeco/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "odeco/parallel.hpp"
#include "odeco/tensor.hpp"

namespace odeco {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kQuarter = kPi / 2;

// Wraps to (-pi/4, pi/4].
double wrap_quarter(double a) {
  double r = std::remainder(a, kQuarter);
  if (r <= -kQuarter / 2) r += kQuarter;
  return r;
}

double corner_angle(const SurfaceMesh& m, int t, int v) {
  const auto& tri = m.triangle(t);
  const int c = tri[0] == v ? 0 : (tri[1] == v ? 1 : 2);
  const Vec3 a = m.vertex(tri[(c + 1) % 3]) - m.vertex(v);
  const Vec3 b = m.vertex(tri[(c + 2) % 3]) - m.vertex(v);
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

// Angle of the face's u axis measured from edge e, counter-clockwise about n_T.
double angle_to_edge(const FaceFrameField& f, const SurfaceMesh& m, int t, int e) {
  const auto [a, b] = m.edge(e);
  const Vec3 d = (m.vertex(b) - m.vertex(a)).normalized();
  const Vec3 u = f.u[t].normalized();
  return std::atan2(d.cross(u).dot(m.face_normal(t)), d.dot(u));
}

}  // namespace

double vertex_angle_sum(const SurfaceMesh& m, int v) {
  double s = 0;
  for (int t : m.vertex_fan(v)) s += corner_angle(m, t, v);
  return s;
}

FaceFrameField recover_field(const FieldState& s, const SurfaceMesh& m) {
  const int nt = m.num_triangles();
  FaceFrameField f;
  f.u.resize(nt);
  f.v.resize(nt);
  f.normal_axis.resize(nt);
  f.normal_size.resize(nt);
  f.skew_deg.resize(nt);
  f.degenerate.assign(nt, 0);

  parallel_for(nt, [&](int begin, int end) {
    for (int t = begin; t < end; ++t) {
      const auto& tri = m.triangle(t);
      const Vec15 q = (vertex_coeffs(s, tri[0]) + vertex_coeffs(s, tri[1]) + vertex_coeffs(s, tri[2])) / 3.0;
      const Frame fr = recover_frame(ShTensor(q));
      const Vec3& n = m.face_normal(t);
      int k = 0;
      for (int j = 1; j < 3; ++j)
        if (std::abs(fr.axis(j).dot(n)) > std::abs(fr.axis(k).dot(n))) k = j;
      const int i1 = (k + 1) % 3, i2 = (k + 2) % 3;
      const Vec3 a = fr.axis(i1) - fr.axis(i1).dot(n) * n;
      const Vec3 b = fr.axis(i2) - fr.axis(i2).dot(n) * n;

      f.normal_axis[t] = fr.axis(k).dot(n) < 0 ? Vec3(-fr.axis(k)) : fr.axis(k);
      f.normal_size[t] = fr.eigenvalues[k];
      f.degenerate[t] = fr.degenerate() || a.norm() < 1e-6 || b.norm() < 1e-6;
      const double cosang = f.degenerate[t] ? 0.0 : std::abs(a.normalized().dot(b.normalized()));
      f.skew_deg[t] = 90.0 - std::acos(std::min(1.0, cosang)) * 180.0 / kPi;

      const Vec3 ud = a.norm() > 0 ? a.normalized() : n.unitOrthogonal();
      f.u[t] = fr.eigenvalues[i1] * ud;
      f.v[t] = fr.eigenvalues[i2] * n.cross(ud);
    }
  });
  compute_matchings_and_indices(f, m);
  return f;
}

int matching_across(const FaceFrameField& f, const SurfaceMesh& m, int e, int from) {
  const auto faces = m.edge_faces(e);
  if (faces[1] < 0 || f.degenerate[faces[0]] || f.degenerate[faces[1]]) return -1;
  if (from != faces[0] && from != faces[1]) return -1;
  const int to = from == faces[0] ? faces[1] : faces[0];
  const double delta = angle_to_edge(f, m, to, e) - angle_to_edge(f, m, from, e);
  const long r = std::lround((delta - wrap_quarter(delta)) / kQuarter);
  return static_cast<int>(((r % 4) + 4) % 4);
}

void compute_matchings_and_indices(FaceFrameField& f, const SurfaceMesh& m) {
  const int ne = m.num_edges();
  f.matching.assign(ne, -1);
  f.jump.assign(ne, 0.0);
  f.ambiguous_edges.clear();
  for (int e = 0; e < ne; ++e) {
    const auto faces = m.edge_faces(e);
    if (faces[1] < 0 || f.degenerate[faces[0]] || f.degenerate[faces[1]]) continue;
    const double delta = angle_to_edge(f, m, faces[1], e) - angle_to_edge(f, m, faces[0], e);
    const double w = wrap_quarter(delta);
    if (std::abs(std::abs(w) - kQuarter / 2) < 1e-9) f.ambiguous_edges.push_back(e);
    f.jump[e] = w;
    f.matching[e] = matching_across(f, m, e, faces[0]);
  }

  const int nv = m.num_vertices();
  f.index.assign(nv, 0);
  f.indexed.assign(nv, 0);
  for (int v = 0; v < nv; ++v) {
    const auto& fan = m.vertex_fan(v);
    if (fan.empty()) continue;
    bool ok = true;
    double jumps = 0, angles = 0;
    const int crossings = m.is_boundary_vertex(v) ? static_cast<int>(fan.size()) - 1 : static_cast<int>(fan.size());
    for (std::size_t k = 0; k < fan.size(); ++k) {
      const int t = fan[k];
      ok = ok && !f.degenerate[t];
      angles += corner_angle(m, t, v);
      if (static_cast<int>(k) >= crossings) continue;
      const auto& tri = m.triangle(t);
      const int c = tri[0] == v ? 0 : (tri[1] == v ? 1 : 2);
      const int e = m.find_edge(v, tri[(c + 2) % 3]);
      if (f.matching[e] < 0) {
        ok = false;
        continue;
      }
      jumps += m.edge_faces(e)[0] == t ? f.jump[e] : -f.jump[e];
    }
    if (!ok) continue;
    f.indexed[v] = 1;
    if (m.is_boundary_vertex(v)) {
      f.index[v] = static_cast<int>(std::lround((jumps - angles) / kQuarter) + std::lround(angles / kQuarter));
    } else {
      f.index[v] = static_cast<int>(std::lround((jumps + 2 * kPi - angles) / kQuarter));
    }
  }
}

MetricsReport field_metrics(const FaceFrameField& f, const FieldState& s, const SurfaceMesh& m, double target_area) {
  MetricsReport r;
  const int nt = m.num_triangles();
  std::vector<double> curl(nt), area(nt), angle(nt);
  parallel_for(nt, [&](int begin, int end) {
    for (int t = begin; t < end; ++t) {
      const auto& tri = m.triangle(t);
      Eigen::Matrix<double, 15, 3> qv;
      Mat3 psi;
      for (int i = 0; i < 3; ++i) {
        qv.col(i) = vertex_coeffs(s, tri[i]);
        psi.row(i) = m.element(t).gradients[i].transpose();
      }
      curl[t] = curl_density(qv.rowwise().mean(), qv * psi, m.face_normal(t), false).value;
      const double lu = f.u[t].norm(), lv = f.v[t].norm();
      if (f.degenerate[t] || lu <= 0 || lv <= 0) {
        area[t] = angle[t] = 0;
        continue;
      }
      area[t] = std::pow(std::log(1.0 / (lu * lv * target_area)), 2);
      angle[t] = std::pow(std::log(std::max(lu, lv) / std::min(lu, lv)), 2);
    }
  });
  int good = 0;
  for (int t = 0; t < nt; ++t) {
    if (f.degenerate[t]) {
      ++r.degenerate_faces;
      continue;
    }
    ++good;
    r.max_skew_deg = std::max(r.max_skew_deg, f.skew_deg[t]);
  }
  std::vector<double> skew_ok, area_ok, angle_ok;
  for (int t = 0; t < nt; ++t) {
    if (f.degenerate[t]) continue;
    skew_ok.push_back(f.skew_deg[t]);
    area_ok.push_back(area[t]);
    angle_ok.push_back(angle[t]);
  }
  if (good > 0) {
    r.mean_skew_deg = pairwise_sum(skew_ok) / good;
    r.mean_area_distortion = pairwise_sum(area_ok) / good;
    r.mean_angle_distortion = pairwise_sum(angle_ok) / good;
  }
  if (nt > 0) {
    r.mean_curl = pairwise_sum(curl) / nt;
    r.max_curl = *std::max_element(curl.begin(), curl.end());
    std::vector<double> sorted = curl;
    std::nth_element(sorted.begin(), sorted.begin() + nt / 2, sorted.end());
    r.median_curl = sorted[nt / 2];
  }

  for (int v = 0; v < m.num_vertices(); ++v) {
    if (!f.indexed[v]) {
      ++r.unindexed;
      continue;
    }
    const int k = f.index[v];
    if (m.is_boundary_vertex(v) || m.is_corner(v)) {
      if (k != 0 && !m.is_corner(v)) ++r.boundary_defects;
      continue;
    }
    r.index_sum += k;
    if (k == 1) {
      ++r.n3;
    } else if (k == -1) {
      ++r.n5;
    } else if (k != 0) {
      ++r.other_singular;
    }
  }
  return r;
}

}  // namespace odeco
