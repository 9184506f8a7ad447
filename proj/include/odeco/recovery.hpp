#pragma once

#include <vector>

#include "odeco/energy.hpp"
#include "odeco/mesh.hpp"

namespace odeco {

/// Per-face frames G_t = [grad u | grad v] (tangential, scaled by the
/// tangential eigenvalues), edge matchings and vertex indices.
struct FaceFrameField {
  std::vector<Vec3> u, v;
  std::vector<Vec3> normal_axis;      // recovered axis closest to n_T, unit
  std::vector<double> normal_size;    // its eigenvalue
  std::vector<double> skew_deg;       // |90 - angle| between the tangential projections
  std::vector<char> degenerate;

  /// r in {0..3} for interior edges (frame of edge_faces[1] is the frame of
  /// edge_faces[0] turned by r quarter turns), -1 on boundary edges or next
  /// to degenerate faces.
  std::vector<int> matching;
  /// Signed in-plane frame jump across each interior edge after removing the
  /// matching, in (-pi/4, pi/4].
  std::vector<double> jump;
  /// Index numerator (denominator 4) and whether the vertex could be indexed.
  std::vector<int> index;
  std::vector<char> indexed;
  std::vector<int> ambiguous_edges;
};

FaceFrameField recover_field(const FieldState& s, const SurfaceMesh& m);

/// Fills matching, jump, index and indexed. Interior vertices use the
/// one-ring jumps plus the angle defect; boundary vertices measure the
/// frame turning against the boundary, relative to the nearest multiple
/// of a quarter turn of the corner angle.
void compute_matchings_and_indices(FaceFrameField& f, const SurfaceMesh& m);

/// Quarter turns taking the frame of face `from` to the frame of the other
/// face across interior edge e; -1 if undefined.
int matching_across(const FaceFrameField& f, const SurfaceMesh& m, int e, int from);

struct MetricsReport {
  int n3 = 0;  // interior index +1/4
  int n5 = 0;  // interior index -1/4
  int other_singular = 0;
  int boundary_defects = 0;
  int unindexed = 0;
  int index_sum = 0;  // numerators over interior vertices
  int degenerate_faces = 0;
  double mean_skew_deg = 0, max_skew_deg = 0;
  double mean_area_distortion = 0;   // log^2(quad area / A_0)
  double mean_angle_distortion = 0;  // log^2(lambda_max / lambda_min)
  double mean_curl = 0, max_curl = 0, median_curl = 0;
};

MetricsReport field_metrics(const FaceFrameField& f, const FieldState& s, const SurfaceMesh& m, double target_area);

/// Interior angle sum and corner angles of a vertex fan.
double vertex_angle_sum(const SurfaceMesh& m, int v);

}  // namespace odeco
