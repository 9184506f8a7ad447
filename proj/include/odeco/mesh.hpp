#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "odeco/types.hpp"

namespace odeco {

enum class MeshFormat { Auto, Obj, Vtk };

/// Per-triangle linear shape-function gradients; they lie in the triangle
/// plane and sum to zero.
struct P1Element {
  std::array<Vec3, 3> gradients;
};

/// Three-point rule on the reference triangle {(s,t): s,t >= 0, s+t <= 1};
/// weights sum to the reference area 1/2, exact up to total degree 2.
struct QuadratureRule {
  std::array<Vec3, 3> barycentric;  // weights of the three triangle vertices
  std::array<double, 3> weights;

  static const QuadratureRule& gauss3();
};

/// Immutable oriented triangle mesh with the per-triangle geometry used by
/// the energies, edge topology and feature annotations.
class SurfaceMesh {
 public:
  using Triangle = std::array<int, 3>;

  /// Validates and precomputes geometry. Throws DegenerateTriangle or
  /// NonManifoldMesh.
  SurfaceMesh(std::vector<Vec3> vertices, std::vector<Triangle> triangles);

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_triangles() const { return static_cast<int>(triangles_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }

  const std::vector<Vec3>& vertices() const { return vertices_; }
  const std::vector<Triangle>& triangles() const { return triangles_; }
  const Vec3& vertex(int v) const { return vertices_[v]; }
  const Triangle& triangle(int t) const { return triangles_[t]; }

  const Vec3& face_normal(int t) const { return face_normals_[t]; }
  /// Determinant of the reference-to-triangle map: twice the area.
  double jacobian(int t) const { return jacobians_[t]; }
  double area(int t) const { return 0.5 * jacobians_[t]; }
  const P1Element& element(int t) const { return elements_[t]; }
  /// Area-weighted average of incident face normals.
  const Vec3& vertex_normal(int v) const { return vertex_normals_[v]; }

  /// Undirected edges (a < b) with their one or two incident triangles.
  const std::array<int, 2>& edge(int e) const { return edges_[e]; }
  const std::array<int, 2>& edge_faces(int e) const { return edge_faces_[e]; }
  bool is_boundary_edge(int e) const { return edge_faces_[e][1] < 0; }
  /// Edge index of the undirected edge {a, b}, or -1.
  int find_edge(int a, int b) const;
  /// Triangle containing the directed edge a -> b, or -1.
  int face_with_directed_edge(int a, int b) const;
  bool is_boundary_vertex(int v) const { return boundary_vertex_[v] != 0; }

  /// Incident triangles in counter-clockwise order. For boundary vertices
  /// the fan starts at the face whose outgoing edge lies on the boundary.
  const std::vector<int>& vertex_fan(int v) const { return fans_[v]; }

  int euler_characteristic() const { return num_vertices() - num_edges() + num_triangles(); }
  double total_area() const;
  double bounding_box_diagonal() const;

  /// Feature annotations.
  bool is_feature_edge(int e) const { return feature_edge_[e] != 0; }
  bool is_feature_vertex(int v) const { return feature_vertex_[v] != 0; }
  bool is_corner(int v) const { return corner_[v] != 0; }
  const Vec3& feature_tangent(int v) const { return feature_tangents_[v]; }
  double sizing(int v) const { return sizing_[v]; }
  int num_feature_edges() const;
  int num_corners() const;

  /// Replaces the feature set; derives feature vertices, corners and
  /// tangents. Corners are the union of `corners` and vertices with three or
  /// more feature edges or a turn sharper than `turn_threshold_deg`.
  void set_features(const std::vector<int>& feature_edges, const std::vector<int>& corners,
                    double turn_threshold_deg);
  void set_sizing(int v, double value) { sizing_[v] = value; }

 private:
  void build_topology();
  void build_geometry();
  void build_fans();

  std::vector<Vec3> vertices_;
  std::vector<Triangle> triangles_;
  std::vector<Vec3> face_normals_;
  std::vector<double> jacobians_;
  std::vector<P1Element> elements_;
  std::vector<Vec3> vertex_normals_;

  std::vector<std::array<int, 2>> edges_;
  std::vector<std::array<int, 2>> edge_faces_;
  std::vector<std::vector<std::pair<int, int>>> vertex_edges_;  // (other vertex, edge)
  std::vector<std::array<int, 3>> face_edges_;
  std::vector<char> boundary_vertex_;
  std::vector<std::vector<int>> fans_;

  std::vector<char> feature_edge_;
  std::vector<char> feature_vertex_;
  std::vector<char> corner_;
  std::vector<Vec3> feature_tangents_;
  std::vector<double> sizing_;
};

/// Reads an OBJ (v/f records, triangles only) or legacy ASCII VTK POLYDATA
/// file. Throws ParseError, NonManifoldMesh, DegenerateTriangle.
SurfaceMesh load_mesh(const std::string& path, MeshFormat format = MeshFormat::Auto);
SurfaceMesh parse_obj(const std::string& text);
SurfaceMesh parse_vtk(const std::string& text);
void write_obj(const SurfaceMesh& mesh, const std::string& path);

/// Marks boundary edges and edges whose dihedral angle exceeds the
/// threshold as features, then derives corners and tangents.
SurfaceMesh detect_features(const SurfaceMesh& mesh, double dihedral_threshold_deg = 30.0);

/// Feature file: `e v0 v1` feature edge, `c v` corner, `s v value` sizing
/// (0-based indices, `#` comments). Boundary edges are always features.
SurfaceMesh load_features(const SurfaceMesh& mesh, const std::string& path, double turn_threshold_deg = 30.0);
SurfaceMesh parse_features(const SurfaceMesh& mesh, const std::string& text, double turn_threshold_deg = 30.0);

/// Quadrature point k of triangle t.
struct QuadraturePoint {
  int triangle;
  int index;
  Vec3 barycentric;
  Vec3 position;
};

/// sum_T sum_k w_k f(point) J_T, evaluated per triangle in parallel and
/// reduced pairwise in triangle order.
double integrate(const SurfaceMesh& mesh, const std::function<double(const QuadraturePoint&)>& f);

}  // namespace odeco
