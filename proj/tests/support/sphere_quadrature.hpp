#pragma once

#include <vector>

#include "odeco/types.hpp"

namespace odeco::testing {

struct SpherePoint {
  Vec3 x;
  double weight;
};

/// Gauss-Legendre in cos(theta) times a uniform rule in phi. Exact for
/// spherical polynomials of degree <= 2 * n - 1.
std::vector<SpherePoint> sphere_rule(int n);

}  // namespace odeco::testing
