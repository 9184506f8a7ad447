#pragma once

#include "odeco/mesh.hpp"

// Procedural test meshes. All are consistently oriented with outward (or +z)
// normals.
namespace odeco::shapes {

/// [0, width] x [0, height] in the z = 0 plane, nx x ny cells split into
/// two triangles each.
SurfaceMesh rectangle(int nx, int ny, double width = 1.0, double height = 1.0);

/// Planar annulus around the origin with radial and angular resolution.
SurfaceMesh annulus(double inner, double outer, int radial, int angular);

/// Planar disk around the origin: a center vertex and `rings` rings of
/// `angular` vertices.
SurfaceMesh disk(double radius, int rings, int angular);

/// Unit sphere by repeated 4:1 subdivision of an icosahedron
/// (20 * 4^level triangles).
SurfaceMesh icosphere(int level, double radius = 1.0);

/// Torus with major radius R and minor radius r, nu x nv quads.
SurfaceMesh torus(double major, double minor, int nu, int nv);

/// Axis-aligned cube [0, size]^3, each face split into n x n quads.
SurfaceMesh cube(int n, double size = 1.0);

/// Closed cylinder of the given radius and height along z with flat caps.
SurfaceMesh cylinder(double radius, double height, int angular, int axial, int cap_rings);

}  // namespace odeco::shapes
