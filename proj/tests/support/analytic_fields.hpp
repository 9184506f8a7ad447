#pragma once

#include <functional>

#include "odeco/energy.hpp"
#include "odeco/mesh.hpp"
#include "odeco/tensor.hpp"

namespace odeco::testing {

/// A planar frame field given by its two gradient vectors U = l_u u and
/// V = l_v v (orthogonal, in the z = 0 plane) and their scalar curls.
struct PlanarField {
  std::function<Vec3(const Vec3&)> U;
  std::function<Vec3(const Vec3&)> V;
  std::function<double(const Vec3&)> curl_U;
  std::function<double(const Vec3&)> curl_V;
};

/// u = log r, v = theta: curl free away from the origin.
PlanarField polar_field();

/// Rotating, size-varying frame with non-zero curls.
PlanarField twisted_field();

/// Frame ((|U|, U/|U|), (|V|, V/|V|), (1, e_z)) as a tensor.
Vec15 field_tensor(const PlanarField& f, const Vec3& x);

/// In-plane spatial gradient of field_tensor by a fourth-order central
/// difference stencil.
CoeffGradient field_tensor_gradient(const PlanarField& f, const Vec3& x, double h = 1e-4);

/// (curl U . n / |U|)^2 + (curl V . n / |V|)^2.
double direct_curl_density(const PlanarField& f, const Vec3& x);

/// Vertex samples of the field.
FieldState sample_field(const PlanarField& f, const SurfaceMesh& m);

}  // namespace odeco::testing
