#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "odeco/constraints.hpp"
#include "odeco/energy.hpp"
#include "odeco/mesh.hpp"

namespace odeco {

struct IterationRecord {
  std::string stage;
  int iteration = 0;
  EnergyTerms terms;
  double step = 0;
  double wall_ms = 0;
};

struct SolverConfig {
  int lbfgs_history = 8;
  int max_iterations = 1000;
  int init_max_iterations = 500;
  /// Stop once the relative improvement stays below this for `window`
  /// consecutive iterations.
  double rel_improvement_tol = 1e-5;
  int window = 5;
  /// Also stop when the projected gradient or the energy itself is this small.
  double gradient_tol = 1e-12;
  double energy_floor = 1e-14;
  double armijo_c1 = 1e-4;
  double backtrack = 0.5;
  int max_line_search = 40;
  int reproject_every = 50;

  EnergyWeights init_weights{1.0, 0.0, 0.0, 1.0};
  EnergyWeights weights{10.0, 0.1, 0.0, 1.0};
  EnergyOptions energy_options;
  std::uint64_t seed = 0;

  /// Per-iteration CSV log; empty disables it.
  std::string log_path;
  /// When false, wall-clock fields are reported as 0 so logs are reproducible.
  bool timing = true;
  std::function<void(const IterationRecord&)> observer;
};

struct SolveReport {
  int iterations = 0;
  EnergyTerms final_terms;
  double wall_seconds = 0;
  double max_constraint_residual = 0;
  EnergyCounters counters;
  bool converged = false;
  /// The line search failed even along the steepest-descent direction;
  /// the best iterate is returned.
  bool line_search_failed = false;
  std::vector<double> energies;  // accepted iterates, starting value first
};

/// One affine constraint per vertex.
class FieldConstraints {
 public:
  /// Alignment to the vertex normal (unit sizing) or to the feature tangent
  /// (vertex sizing); corners are free.
  static FieldConstraints main_stage(const SurfaceMesh& m, ConstraintCache& cache);
  /// Octahedral and unit-sized alignment; falls back to alignment alone
  /// where the two do not meet numerically.
  static FieldConstraints init_stage(const SurfaceMesh& m, ConstraintCache& cache);

  const AffineConstraint& at(int v) const { return *per_vertex_[v]; }
  int size() const { return static_cast<int>(per_vertex_.size()); }
  int fallbacks() const { return fallbacks_; }

  void project_state(FieldState& s) const;
  void project_gradient(VecX& g) const;
  /// max over vertices of |A q + b|_inf.
  double max_residual(const FieldState& s) const;

 private:
  std::vector<std::shared_ptr<const AffineConstraint>> per_vertex_;
  int fallbacks_ = 0;
};

/// Projected L-BFGS with Armijo backtracking on a fixed objective. `x` must
/// be feasible on entry and stays feasible.
SolveReport minimize(FieldState& x, const EnergyEvaluator& energy, const FieldConstraints& constraints,
                     const SolverConfig& cfg, const std::string& stage);

/// Unit frame per vertex aligned with the normal (or feature tangent) and a
/// seed-dependent global reference direction; feasible for init_stage.
FieldState initial_guess(const SurfaceMesh& m, const FieldConstraints& init, std::uint64_t seed);

/// Smooth octahedral field, then projected onto the main-stage constraints.
FieldState initialize(const SurfaceMesh& m, const SolverConfig& cfg, SolveReport* report = nullptr,
                      ConstraintCache* cache = nullptr);

/// Main integrable solve from a feasible state.
std::pair<FieldState, SolveReport> solve_integrable(const FieldState& s0, const SurfaceMesh& m,
                                                    const SolverConfig& cfg, ConstraintCache* cache = nullptr);

}  // namespace odeco
