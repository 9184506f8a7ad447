#pragma once

// Fixed coordinate systems for degree-4 homogeneous polynomials in three
// variables (equivalently, fully symmetric 4th-order tensors on R^3).
//
// Monomial ordering (index : exponents of x, y, z):
//   0:(4,0,0)  1:(3,1,0)  2:(3,0,1)  3:(2,2,0)  4:(2,1,1)
//   5:(2,0,2)  6:(1,3,0)  7:(1,2,1)  8:(1,1,2)  9:(1,0,3)
//  10:(0,4,0) 11:(0,3,1) 12:(0,2,2) 13:(0,1,3) 14:(0,0,4)
//
// Spherical-harmonic ordering: real, orthonormal harmonics on the unit
// sphere without the Condon-Shortley phase,
//   0: Y_0^0
//   1..5:  Y_2^m, m = -2..2
//   6..14: Y_4^m, m = -4..4
// Band-2 and band-0 harmonics are lifted to degree 4 by multiplying with
// powers of r^2 = x^2 + y^2 + z^2, so they agree with Y_l^m on the sphere.

#include <array>

#include "odeco/types.hpp"

namespace odeco::basis {

struct Exponent {
  int x, y, z;
};

/// Exponent triple of each monomial coefficient.
const std::array<Exponent, 15>& monomial_exponents();

/// Index of x^i y^j z^k in the monomial ordering; i + j + k must be 4.
int monomial_index(int i, int j, int k);

/// 4! / (i! j! k!) for monomial `idx`.
double multinomial(int idx);

/// Columns are the SH basis functions expanded in monomials: u = S q.
const Mat15& sh_to_monomial_matrix();
const Mat15& monomial_to_sh_matrix();

/// Values of the 15 SH basis functions at a unit vector.
Vec15 eval_sh(const Vec3& x);

/// Values of the 15 monomials at x.
Vec15 eval_monomials(const Vec3& x);

inline constexpr int kBand0 = 0;
inline constexpr int kBand2Begin = 1;
inline constexpr int kBand4Begin = 6;

}  // namespace odeco::basis
