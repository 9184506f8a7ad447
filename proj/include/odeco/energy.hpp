#pragma once

#include <vector>

#include "odeco/constraints.hpp"
#include "odeco/mesh.hpp"
#include "odeco/types.hpp"

namespace odeco {

/// Spatial gradient of the coefficients: column a holds d q / d x_a.
using CoeffGradient = Eigen::Matrix<double, 15, 3>;

/// Per-vertex coefficients stacked as q_0, q_1, ... (length 15 V).
using FieldState = VecX;

inline Vec15 vertex_coeffs(const FieldState& s, int v) { return s.segment<15>(15 * static_cast<Eigen::Index>(v)); }

struct EnergyWeights {
  double odeco = 1.0;
  double area = 0.0;
  double angle = 0.0;
  /// Target quad area.
  double target_area = 1.0;
};

enum class EnergyMode {
  Init,  // smoothness + odeco penalty
  Main,  // curl + odeco penalty + area + angle
};

struct EnergyOptions {
  /// Divide the odeco, area and angle integrands by the triangle Jacobian.
  bool divide_by_jacobian = true;
  /// Apply the same division to the smoothness energy.
  bool divide_smoothness = false;
};

/// Value returned in place of a term that cannot be evaluated (singular
/// second-order part, vanishing tensor, non-positive determinant).
inline constexpr double kPenalty = 1e10;

struct EnergyTerms {
  double total = 0;
  double curl = 0;
  double odeco = 0;
  double area = 0;
  double angle = 0;
  double smooth = 0;
};

struct EnergyCounters {
  long regularized = 0;     // near-singular M floored before inversion
  long singular = 0;        // M still singular after the floor
  long nonpositive_det = 0;
  long zero_tensor = 0;

  EnergyCounters& operator+=(const EnergyCounters& o);
};

/// h at one point together with its derivatives.
struct CurlDensity {
  double value = 0;
  Vec15 d_q = Vec15::Zero();
  CoeffGradient d_grad = CoeffGradient::Zero();
  bool regularized = false;
  bool singular = false;
};

/// Normalized integrability density h = |M^-2 R|^2 with
/// R_e = sum_k T_{k e} (curl T_k . n), k running over the 27 leading
/// index triples of the Cartesian tensor.
CurlDensity curl_density(const Vec15& q, const CoeffGradient& grad_q, const Vec3& n, bool with_gradient = true);

/// sum_i c_i(q/|q|)^2 and its gradient; returns false when |q| < 1e-12.
bool normalized_odeco_penalty(const Vec15& q, double& value, Vec15* gradient);

/// Assembles the objective over a mesh. Per-triangle contributions are
/// computed in parallel and reduced in triangle order, so results do not
/// depend on the thread count.
class EnergyEvaluator {
 public:
  EnergyEvaluator(const SurfaceMesh& mesh, EnergyWeights weights, EnergyMode mode, EnergyOptions options = {});

  /// Weighted objective; fills `gradient` (length 15 V) when non-null.
  double evaluate(const FieldState& s, VecX* gradient = nullptr, EnergyTerms* terms = nullptr,
                  EnergyCounters* counters = nullptr) const;

  /// Every term, unweighted, regardless of mode and weights.
  EnergyTerms breakdown(const FieldState& s, EnergyCounters* counters = nullptr) const;

  const SurfaceMesh& mesh() const { return mesh_; }
  const EnergyWeights& weights() const { return weights_; }
  EnergyMode mode() const { return mode_; }

 private:
  struct Active {
    bool curl, odeco, area, angle, smooth;
  };
  double assemble(const FieldState& s, const Active& active, const EnergyWeights& w, VecX* gradient,
                  EnergyTerms* terms, EnergyCounters* counters) const;
  void ensure_isotropy() const;

  const SurfaceMesh& mesh_;
  EnergyWeights weights_;
  EnergyMode mode_;
  EnergyOptions options_;
  mutable std::vector<AffineConstraint> isotropy_;  // per triangle, built on demand
};

/// Convenience wrappers evaluating single unweighted terms.
double curl_energy(const FieldState& s, const SurfaceMesh& m);
double odeco_penalty(const FieldState& s, const SurfaceMesh& m);
double area_distortion(const FieldState& s, const SurfaceMesh& m, double target_area);
double angle_distortion(const FieldState& s, const SurfaceMesh& m);
double smoothness(const FieldState& s, const SurfaceMesh& m, const EnergyOptions& options = {});

/// Value and gradient of the init or main objective.
double total_energy_and_gradient(const FieldState& s, const SurfaceMesh& m, const EnergyWeights& w, EnergyMode mode,
                                 VecX& gradient);

}  // namespace odeco
