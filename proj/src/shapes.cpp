#include "odeco/shapes.hpp"

#include <cmath>
#include <map>
#include <numbers>

namespace odeco::shapes {

namespace {

using Tri = SurfaceMesh::Triangle;
constexpr double kPi = std::numbers::pi;

void add_quad(std::vector<Tri>& tris, int a, int b, int c, int d) {
  // a-b-c-d counter-clockwise
  tris.push_back({a, b, c});
  tris.push_back({a, c, d});
}

}  // namespace

SurfaceMesh rectangle(int nx, int ny, double width, double height) {
  std::vector<Vec3> v;
  std::vector<Tri> t;
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) v.emplace_back(width * i / nx, height * j / ny, 0.0);
  auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) add_quad(t, id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
  return SurfaceMesh(std::move(v), std::move(t));
}

SurfaceMesh annulus(double inner, double outer, int radial, int angular) {
  std::vector<Vec3> v;
  std::vector<Tri> t;
  for (int i = 0; i <= radial; ++i) {
    const double r = inner + (outer - inner) * i / radial;
    for (int k = 0; k < angular; ++k) {
      const double a = 2 * kPi * k / angular;
      v.emplace_back(r * std::cos(a), r * std::sin(a), 0.0);
    }
  }
  auto id = [angular](int i, int k) { return i * angular + (k % angular); };
  for (int i = 0; i < radial; ++i)
    for (int k = 0; k < angular; ++k) add_quad(t, id(i, k), id(i + 1, k), id(i + 1, k + 1), id(i, k + 1));
  return SurfaceMesh(std::move(v), std::move(t));
}

SurfaceMesh disk(double radius, int rings, int angular) {
  std::vector<Vec3> v{Vec3::Zero()};
  std::vector<Tri> t;
  for (int i = 1; i <= rings; ++i) {
    const double r = radius * i / rings;
    for (int k = 0; k < angular; ++k) {
      const double a = 2 * kPi * k / angular;
      v.emplace_back(r * std::cos(a), r * std::sin(a), 0.0);
    }
  }
  auto id = [angular](int i, int k) { return 1 + (i - 1) * angular + (k % angular); };
  for (int k = 0; k < angular; ++k) t.push_back({0, id(1, k), id(1, k + 1)});
  for (int i = 1; i < rings; ++i)
    for (int k = 0; k < angular; ++k) add_quad(t, id(i, k), id(i + 1, k), id(i + 1, k + 1), id(i, k + 1));
  return SurfaceMesh(std::move(v), std::move(t));
}

SurfaceMesh icosphere(int level, double radius) {
  const double p = (1 + std::sqrt(5.0)) / 2;
  std::vector<Vec3> v = {{-1, p, 0}, {1, p, 0}, {-1, -p, 0}, {1, -p, 0}, {0, -1, p}, {0, 1, p},
                         {0, -1, -p}, {0, 1, -p}, {p, 0, -1}, {p, 0, 1}, {-p, 0, -1}, {-p, 0, 1}};
  for (auto& x : v) x.normalize();
  std::vector<Tri> t = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
                        {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
                        {3, 8, 9},  {4, 9, 5},  {2, 4, 11}, {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
  for (int l = 0; l < level; ++l) {
    std::map<std::pair<int, int>, int> mid;
    auto midpoint = [&](int a, int b) {
      const auto k = std::minmax(a, b);
      auto it = mid.find(k);
      if (it != mid.end()) return it->second;
      v.push_back((v[a] + v[b]).normalized());
      const int id = static_cast<int>(v.size()) - 1;
      mid.emplace(k, id);
      return id;
    };
    std::vector<Tri> next;
    next.reserve(t.size() * 4);
    for (const auto& f : t) {
      const int a = midpoint(f[0], f[1]), b = midpoint(f[1], f[2]), c = midpoint(f[2], f[0]);
      next.push_back({f[0], a, c});
      next.push_back({f[1], b, a});
      next.push_back({f[2], c, b});
      next.push_back({a, b, c});
    }
    t = std::move(next);
  }
  for (auto& x : v) x *= radius;
  return SurfaceMesh(std::move(v), std::move(t));
}

SurfaceMesh torus(double major, double minor, int nu, int nv) {
  std::vector<Vec3> v;
  std::vector<Tri> t;
  for (int i = 0; i < nu; ++i) {
    const double a = 2 * kPi * i / nu;
    for (int j = 0; j < nv; ++j) {
      const double b = 2 * kPi * j / nv;
      const double r = major + minor * std::cos(b);
      v.emplace_back(r * std::cos(a), r * std::sin(a), minor * std::sin(b));
    }
  }
  auto id = [nu, nv](int i, int j) { return (i % nu) * nv + (j % nv); };
  for (int i = 0; i < nu; ++i)
    for (int j = 0; j < nv; ++j) add_quad(t, id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
  return SurfaceMesh(std::move(v), std::move(t));
}

SurfaceMesh cube(int n, double size) {
  std::vector<Vec3> v;
  std::vector<Tri> t;
  std::map<std::array<long, 3>, int> ids;
  auto vertex = [&](const Vec3& x) {
    const std::array<long, 3> k = {std::lround(x[0] * n / size), std::lround(x[1] * n / size),
                                   std::lround(x[2] * n / size)};
    auto [it, inserted] = ids.emplace(k, static_cast<int>(v.size()));
    if (inserted) v.push_back(x);
    return it->second;
  };
  // origin, two in-plane directions with (du x dv) pointing outward
  const std::array<std::array<Vec3, 3>, 6> faces = {{
      {Vec3(0, 0, 0), Vec3(0, 1, 0), Vec3(1, 0, 0)},  // z = 0
      {Vec3(0, 0, 1), Vec3(1, 0, 0), Vec3(0, 1, 0)},  // z = 1
      {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 0, 1)},  // y = 0
      {Vec3(0, 1, 0), Vec3(0, 0, 1), Vec3(1, 0, 0)},  // y = 1
      {Vec3(0, 0, 0), Vec3(0, 0, 1), Vec3(0, 1, 0)},  // x = 0
      {Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)},  // x = 1
  }};
  for (const auto& f : faces) {
    auto at = [&](int i, int j) { return vertex(size * (f[0] + f[1] * i / double(n) + f[2] * j / double(n))); };
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) add_quad(t, at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1));
  }
  return SurfaceMesh(std::move(v), std::move(t));
}

SurfaceMesh cylinder(double radius, double height, int angular, int axial, int cap_rings) {
  std::vector<Vec3> v;
  std::vector<Tri> t;
  auto ring_point = [&](double r, int k, double z) {
    const double a = 2 * kPi * k / angular;
    return Vec3(r * std::cos(a), r * std::sin(a), z);
  };
  // side rings 0..axial
  for (int i = 0; i <= axial; ++i)
    for (int k = 0; k < angular; ++k) v.push_back(ring_point(radius, k, height * i / axial));
  auto side = [&](int i, int k) { return i * angular + (k % angular); };
  for (int i = 0; i < axial; ++i)
    for (int k = 0; k < angular; ++k) add_quad(t, side(i, k), side(i, k + 1), side(i + 1, k + 1), side(i + 1, k));

  // caps: inner rings shrinking to a center vertex
  for (int cap = 0; cap < 2; ++cap) {
    const double z = cap == 0 ? 0.0 : height;
    const int outer_ring = cap == 0 ? 0 : axial;
    std::vector<int> prev(angular);
    for (int k = 0; k < angular; ++k) prev[k] = side(outer_ring, k);
    for (int r = 1; r < cap_rings; ++r) {
      std::vector<int> cur(angular);
      for (int k = 0; k < angular; ++k) {
        cur[k] = static_cast<int>(v.size());
        v.push_back(ring_point(radius * (cap_rings - r) / cap_rings, k, z));
      }
      for (int k = 0; k < angular; ++k) {
        const int k1 = (k + 1) % angular;
        if (cap == 0) {
          add_quad(t, prev[k], cur[k], cur[k1], prev[k1]);
        } else {
          add_quad(t, prev[k], prev[k1], cur[k1], cur[k]);
        }
      }
      prev = std::move(cur);
    }
    const int center = static_cast<int>(v.size());
    v.emplace_back(0.0, 0.0, z);
    for (int k = 0; k < angular; ++k) {
      const int k1 = (k + 1) % angular;
      if (cap == 0) {
        t.push_back({prev[k], center, prev[k1]});
      } else {
        t.push_back({prev[k], prev[k1], center});
      }
    }
  }
  return SurfaceMesh(std::move(v), std::move(t));
}

}  // namespace odeco::shapes
