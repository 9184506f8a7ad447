#include "odeco/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <fstream>
#include <numbers>
#include <sstream>
#include <unordered_map>

#include "odeco/errors.hpp"
#include "odeco/parallel.hpp"

namespace odeco {

namespace {

std::uint64_t key(int a, int b) { return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b); }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double clamp_unit(double x) { return std::clamp(x, -1.0, 1.0); }

}  // namespace

const QuadratureRule& QuadratureRule::gauss3() {
  static const QuadratureRule rule = [] {
    QuadratureRule r;
    const double pts[3][2] = {{1.0 / 6, 1.0 / 6}, {2.0 / 3, 1.0 / 6}, {1.0 / 6, 2.0 / 3}};
    for (int k = 0; k < 3; ++k) {
      const double s = pts[k][0], t = pts[k][1];
      r.barycentric[k] = Vec3(1 - s - t, s, t);
      r.weights[k] = 1.0 / 6;
    }
    return r;
  }();
  return rule;
}

SurfaceMesh::SurfaceMesh(std::vector<Vec3> vertices, std::vector<Triangle> triangles)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)) {
  const int nv = num_vertices();
  for (int t = 0; t < num_triangles(); ++t)
    for (int v : triangles_[t])
      if (v < 0 || v >= nv)
        throw ParseError("triangle " + std::to_string(t) + " references missing vertex " + std::to_string(v));
  build_geometry();
  build_topology();
  build_fans();

  feature_edge_.assign(edges_.size(), 0);
  feature_vertex_.assign(nv, 0);
  corner_.assign(nv, 0);
  feature_tangents_.assign(nv, Vec3::Zero());
  sizing_.assign(nv, 1.0);
}

void SurfaceMesh::build_geometry() {
  const double diag = bounding_box_diagonal();
  const double eps = 1e-14 * diag * diag;
  const int nt = num_triangles();
  face_normals_.resize(nt);
  jacobians_.resize(nt);
  elements_.resize(nt);
  vertex_normals_.assign(vertices_.size(), Vec3::Zero());

  std::vector<int> degenerate;
  for (int t = 0; t < nt; ++t) {
    const auto& tri = triangles_[t];
    if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2]) {
      degenerate.push_back(t);
      continue;
    }
    const Vec3& x0 = vertices_[tri[0]];
    const Vec3& x1 = vertices_[tri[1]];
    const Vec3& x2 = vertices_[tri[2]];
    const Vec3 cross = (x1 - x0).cross(x2 - x0);
    const double j = cross.norm();
    if (!(j > 2.0 * eps)) {
      degenerate.push_back(t);
      continue;
    }
    const Vec3 n = cross / j;
    face_normals_[t] = n;
    jacobians_[t] = j;
    const std::array<const Vec3*, 3> x = {&x0, &x1, &x2};
    for (int i = 0; i < 3; ++i) elements_[t].gradients[i] = n.cross(*x[(i + 2) % 3] - *x[(i + 1) % 3]) / j;
    for (int v : tri) vertex_normals_[v] += cross;
  }
  if (!degenerate.empty()) {
    std::ostringstream msg;
    msg << degenerate.size() << " degenerate triangle(s), first: " << degenerate.front();
    throw DegenerateTriangle(msg.str(), degenerate);
  }
  for (auto& n : vertex_normals_) {
    const double len = n.norm();
    if (len > 0) n /= len;
  }
}

void SurfaceMesh::build_topology() {
  std::unordered_map<std::uint64_t, int> undirected;
  std::unordered_map<std::uint64_t, int> directed;
  undirected.reserve(triangles_.size() * 2);
  directed.reserve(triangles_.size() * 3);
  std::vector<std::pair<int, int>> bad;

  face_edges_.resize(triangles_.size());
  vertex_edges_.assign(vertices_.size(), {});
  for (int t = 0; t < num_triangles(); ++t) {
    const auto& tri = triangles_[t];
    for (int i = 0; i < 3; ++i) {
      const int a = tri[i], b = tri[(i + 1) % 3];
      if (!directed.emplace(key(a, b), t).second) bad.emplace_back(std::min(a, b), std::max(a, b));
      const auto k = key(std::min(a, b), std::max(a, b));
      auto [it, inserted] = undirected.emplace(k, static_cast<int>(edges_.size()));
      if (inserted) {
        edges_.push_back({std::min(a, b), std::max(a, b)});
        edge_faces_.push_back({t, -1});
        vertex_edges_[a].emplace_back(b, it->second);
        vertex_edges_[b].emplace_back(a, it->second);
      } else {
        auto& faces = edge_faces_[it->second];
        if (faces[1] >= 0) {
          bad.emplace_back(std::min(a, b), std::max(a, b));
        } else {
          faces[1] = t;
        }
      }
      face_edges_[t][i] = it->second;
    }
  }
  if (!bad.empty()) {
    std::sort(bad.begin(), bad.end());
    bad.erase(std::unique(bad.begin(), bad.end()), bad.end());
    std::ostringstream msg;
    msg << "non-manifold or inconsistently oriented edges:";
    for (std::size_t i = 0; i < std::min<std::size_t>(bad.size(), 10); ++i)
      msg << " (" << bad[i].first << "," << bad[i].second << ")";
    if (bad.size() > 10) msg << " ...";
    throw NonManifoldMesh(msg.str(), bad);
  }

  boundary_vertex_.assign(vertices_.size(), 0);
  for (int e = 0; e < num_edges(); ++e)
    if (edge_faces_[e][1] < 0) boundary_vertex_[edges_[e][0]] = boundary_vertex_[edges_[e][1]] = 1;
}

int SurfaceMesh::find_edge(int a, int b) const {
  for (const auto& [other, e] : vertex_edges_[a])
    if (other == b) return e;
  return -1;
}

int SurfaceMesh::face_with_directed_edge(int a, int b) const {
  const int e = find_edge(a, b);
  if (e < 0) return -1;
  for (int f : edge_faces_[e]) {
    if (f < 0) continue;
    const auto& tri = triangles_[f];
    for (int i = 0; i < 3; ++i)
      if (tri[i] == a && tri[(i + 1) % 3] == b) return f;
  }
  return -1;
}

void SurfaceMesh::build_fans() {
  std::vector<std::vector<int>> incident(vertices_.size());
  for (int t = 0; t < num_triangles(); ++t)
    for (int v : triangles_[t]) incident[v].push_back(t);

  auto corner_of = [this](int t, int v) {
    const auto& tri = triangles_[t];
    return tri[0] == v ? 0 : (tri[1] == v ? 1 : 2);
  };

  fans_.assign(vertices_.size(), {});
  std::vector<int> bad_vertices;
  for (int v = 0; v < num_vertices(); ++v) {
    if (incident[v].empty()) continue;
    int start = incident[v].front();
    if (boundary_vertex_[v]) {
      for (int t : incident[v]) {
        const int b = triangles_[t][(corner_of(t, v) + 1) % 3];
        if (face_with_directed_edge(b, v) < 0) {
          start = t;
          break;
        }
      }
    }
    auto& fan = fans_[v];
    int t = start;
    while (t >= 0 && fan.size() <= incident[v].size()) {
      fan.push_back(t);
      const int c = triangles_[t][(corner_of(t, v) + 2) % 3];
      t = face_with_directed_edge(v, c);
      if (t == start) break;
    }
    if (fan.size() != incident[v].size()) bad_vertices.push_back(v);
  }
  if (!bad_vertices.empty()) {
    std::vector<std::pair<int, int>> edges;
    for (int v : bad_vertices)
      for (const auto& [other, e] : vertex_edges_[v]) edges.emplace_back(std::min(v, other), std::max(v, other));
    throw NonManifoldMesh("non-manifold vertex " + std::to_string(bad_vertices.front()), edges);
  }
}

double SurfaceMesh::total_area() const {
  std::vector<double> a(jacobians_.size());
  for (std::size_t t = 0; t < a.size(); ++t) a[t] = 0.5 * jacobians_[t];
  return pairwise_sum(a);
}

double SurfaceMesh::bounding_box_diagonal() const {
  if (vertices_.empty()) return 0;
  Vec3 lo = vertices_.front(), hi = vertices_.front();
  for (const auto& v : vertices_) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  return (hi - lo).norm();
}

int SurfaceMesh::num_feature_edges() const { return static_cast<int>(std::count(feature_edge_.begin(), feature_edge_.end(), 1)); }
int SurfaceMesh::num_corners() const { return static_cast<int>(std::count(corner_.begin(), corner_.end(), 1)); }

void SurfaceMesh::set_features(const std::vector<int>& feature_edges, const std::vector<int>& corners,
                               double turn_threshold_deg) {
  const int nv = num_vertices();
  feature_edge_.assign(edges_.size(), 0);
  feature_vertex_.assign(nv, 0);
  corner_.assign(nv, 0);
  feature_tangents_.assign(nv, Vec3::Zero());
  for (int e : feature_edges) feature_edge_.at(e) = 1;

  std::vector<std::vector<int>> neighbors(nv);
  for (int e = 0; e < num_edges(); ++e) {
    if (!feature_edge_[e]) continue;
    const auto [a, b] = edges_[e];
    neighbors[a].push_back(b);
    neighbors[b].push_back(a);
    feature_vertex_[a] = feature_vertex_[b] = 1;
  }
  for (int c : corners) corner_.at(c) = 1;

  const double cos_threshold = std::cos(turn_threshold_deg * std::numbers::pi / 180.0);
  for (int v = 0; v < nv; ++v) {
    const auto& nb = neighbors[v];
    if (nb.empty()) continue;
    if (nb.size() >= 3) {
      corner_[v] = 1;
    } else if (nb.size() == 2) {
      const Vec3 d1 = (vertices_[v] - vertices_[nb[0]]).normalized();
      const Vec3 d2 = (vertices_[nb[1]] - vertices_[v]).normalized();
      if (clamp_unit(d1.dot(d2)) < cos_threshold) corner_[v] = 1;
      feature_tangents_[v] = (d1 + d2).normalized();
    } else {
      feature_tangents_[v] = (vertices_[nb[0]] - vertices_[v]).normalized();
    }
    if (corner_[v]) feature_tangents_[v].setZero();
  }

  // Orient tangents consistently along each curve; signs are irrelevant
  // downstream but a consistent choice keeps exported data readable.
  std::vector<char> visited(nv, 0);
  for (int s = 0; s < nv; ++s) {
    if (visited[s] || !feature_vertex_[s] || corner_[s]) continue;
    std::deque<int> queue{s};
    visited[s] = 1;
    while (!queue.empty()) {
      const int v = queue.front();
      queue.pop_front();
      for (int w : neighbors[v]) {
        if (visited[w] || corner_[w]) continue;
        if (feature_tangents_[w].dot(feature_tangents_[v]) < 0) feature_tangents_[w] *= -1.0;
        visited[w] = 1;
        queue.push_back(w);
      }
    }
  }
}

SurfaceMesh parse_obj(const std::string& text) {
  std::vector<Vec3> vertices;
  std::vector<SurfaceMesh::Triangle> triangles;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      Vec3 p;
      if (!(ls >> p[0] >> p[1] >> p[2])) throw ParseError("obj line " + std::to_string(line_no) + ": bad vertex");
      vertices.push_back(p);
    } else if (tag == "f") {
      std::vector<int> idx;
      std::string tok;
      while (ls >> tok) {
        int i = 0;
        try {
          i = std::stoi(tok.substr(0, tok.find('/')));
        } catch (const std::exception&) {
          throw ParseError("obj line " + std::to_string(line_no) + ": bad face index '" + tok + "'");
        }
        idx.push_back(i < 0 ? static_cast<int>(vertices.size()) + i : i - 1);
      }
      if (idx.size() != 3)
        throw ParseError("obj line " + std::to_string(line_no) + ": only triangles are supported");
      triangles.push_back({idx[0], idx[1], idx[2]});
    }
  }
  if (triangles.empty()) throw ParseError("obj: no triangles");
  return SurfaceMesh(std::move(vertices), std::move(triangles));
}

SurfaceMesh parse_vtk(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.find("vtk") == std::string::npos) throw ParseError("vtk: missing header");
  std::getline(in, line);  // title
  std::string token;
  if (!(in >> token) || token != "ASCII") throw ParseError("vtk: only ASCII files are supported");
  if (!(in >> token) || token != "DATASET" || !(in >> token) || token != "POLYDATA")
    throw ParseError("vtk: expected DATASET POLYDATA");

  std::vector<Vec3> vertices;
  std::vector<SurfaceMesh::Triangle> triangles;
  while (in >> token) {
    if (token == "POINTS") {
      long n = 0;
      std::string type;
      if (!(in >> n >> type) || n < 0) throw ParseError("vtk: bad POINTS header");
      vertices.resize(n);
      for (long i = 0; i < n; ++i)
        if (!(in >> vertices[i][0] >> vertices[i][1] >> vertices[i][2])) throw ParseError("vtk: truncated POINTS");
    } else if (token == "POLYGONS") {
      long n = 0, size = 0;
      if (!(in >> n >> size)) throw ParseError("vtk: bad POLYGONS header");
      for (long i = 0; i < n; ++i) {
        int count = 0;
        if (!(in >> count)) throw ParseError("vtk: truncated POLYGONS");
        if (count != 3) throw ParseError("vtk: only triangles are supported");
        SurfaceMesh::Triangle t;
        if (!(in >> t[0] >> t[1] >> t[2])) throw ParseError("vtk: truncated POLYGONS");
        triangles.push_back(t);
      }
    } else if (token == "POINT_DATA" || token == "CELL_DATA") {
      break;
    } else {
      throw ParseError("vtk: unsupported section '" + token + "'");
    }
  }
  if (triangles.empty()) throw ParseError("vtk: no triangles");
  return SurfaceMesh(std::move(vertices), std::move(triangles));
}

SurfaceMesh load_mesh(const std::string& path, MeshFormat format) {
  if (format == MeshFormat::Auto) {
    const auto dot = path.rfind('.');
    const std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
    if (ext == "obj" || ext == "OBJ") {
      format = MeshFormat::Obj;
    } else if (ext == "vtk" || ext == "VTK") {
      format = MeshFormat::Vtk;
    } else {
      throw ParseError("cannot infer mesh format of '" + path + "'");
    }
  }
  const std::string text = read_file(path);
  return format == MeshFormat::Obj ? parse_obj(text) : parse_vtk(text);
}

void write_obj(const SurfaceMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out.precision(17);
  for (const auto& v : mesh.vertices()) out << "v " << v[0] << ' ' << v[1] << ' ' << v[2] << '\n';
  for (const auto& t : mesh.triangles()) out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
}

SurfaceMesh detect_features(const SurfaceMesh& mesh, double dihedral_threshold_deg) {
  const double cos_threshold = std::cos(dihedral_threshold_deg * std::numbers::pi / 180.0);
  std::vector<int> features;
  for (int e = 0; e < mesh.num_edges(); ++e) {
    const auto f = mesh.edge_faces(e);
    if (f[1] < 0 || mesh.face_normal(f[0]).dot(mesh.face_normal(f[1])) < cos_threshold) features.push_back(e);
  }
  SurfaceMesh out = mesh;
  out.set_features(features, {}, dihedral_threshold_deg);
  return out;
}

SurfaceMesh parse_features(const SurfaceMesh& mesh, const std::string& text, double turn_threshold_deg) {
  std::vector<int> features, corners;
  std::vector<std::pair<int, double>> sizes;
  for (int e = 0; e < mesh.num_edges(); ++e)
    if (mesh.is_boundary_edge(e)) features.push_back(e);

  auto check_vertex = [&](int v, int line_no) {
    if (v < 0 || v >= mesh.num_vertices())
      throw ParseError("features line " + std::to_string(line_no) + ": vertex " + std::to_string(v) + " out of range");
  };
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    if (tag == "e") {
      int a, b;
      if (!(ls >> a >> b)) throw ParseError("features line " + std::to_string(line_no) + ": expected 'e v0 v1'");
      check_vertex(a, line_no);
      check_vertex(b, line_no);
      const int e = mesh.find_edge(a, b);
      if (e < 0) throw ParseError("features line " + std::to_string(line_no) + ": no such edge");
      features.push_back(e);
    } else if (tag == "c") {
      int v;
      if (!(ls >> v)) throw ParseError("features line " + std::to_string(line_no) + ": expected 'c v'");
      check_vertex(v, line_no);
      corners.push_back(v);
    } else if (tag == "s") {
      int v;
      double value;
      if (!(ls >> v >> value) || !(value > 0))
        throw ParseError("features line " + std::to_string(line_no) + ": expected 's v value' with value > 0");
      check_vertex(v, line_no);
      sizes.emplace_back(v, value);
    } else {
      throw ParseError("features line " + std::to_string(line_no) + ": unknown record '" + tag + "'");
    }
  }
  std::sort(features.begin(), features.end());
  features.erase(std::unique(features.begin(), features.end()), features.end());

  SurfaceMesh out = mesh;
  out.set_features(features, corners, turn_threshold_deg);
  for (const auto& [v, value] : sizes) out.set_sizing(v, value);
  return out;
}

SurfaceMesh load_features(const SurfaceMesh& mesh, const std::string& path, double turn_threshold_deg) {
  return parse_features(mesh, read_file(path), turn_threshold_deg);
}

double integrate(const SurfaceMesh& mesh, const std::function<double(const QuadraturePoint&)>& f) {
  const auto& rule = QuadratureRule::gauss3();
  std::vector<double> per_triangle(mesh.num_triangles());
  parallel_for(mesh.num_triangles(), [&](int begin, int end) {
    for (int t = begin; t < end; ++t) {
      const auto& tri = mesh.triangle(t);
      double s = 0;
      for (int k = 0; k < 3; ++k) {
        const Vec3& b = rule.barycentric[k];
        QuadraturePoint p{t, k, b, b[0] * mesh.vertex(tri[0]) + b[1] * mesh.vertex(tri[1]) + b[2] * mesh.vertex(tri[2])};
        s += rule.weights[k] * f(p);
      }
      per_triangle[t] = s * mesh.jacobian(t);
    }
  });
  return pairwise_sum(per_triangle);
}

}  // namespace odeco
