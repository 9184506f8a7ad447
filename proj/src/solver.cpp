#include "odeco/solver.hpp"

#include <chrono>
#include <cmath>
#include <deque>
#include <filesystem>
#include <fstream>
#include <random>

#include "odeco/errors.hpp"
#include "odeco/tensor.hpp"

namespace odeco {

namespace {

using Clock = std::chrono::steady_clock;

struct CurvaturePair {
  VecX s, y;
  double rho;
};

// H * g by the two-loop recursion, H0 = gamma I.
VecX two_loop(const std::deque<CurvaturePair>& history, const VecX& g) {
  VecX q = g;
  std::vector<double> alpha(history.size());
  for (int i = static_cast<int>(history.size()) - 1; i >= 0; --i) {
    alpha[i] = history[i].rho * history[i].s.dot(q);
    q -= alpha[i] * history[i].y;
  }
  if (!history.empty()) {
    const auto& last = history.back();
    q *= last.s.dot(last.y) / last.y.squaredNorm();
  }
  for (std::size_t i = 0; i < history.size(); ++i) {
    const double beta = history[i].rho * history[i].y.dot(q);
    q += (alpha[i] - beta) * history[i].s;
  }
  return q;
}

Vec3 perpendicular_to(const Vec3& axis, const Vec3& preferred) {
  Vec3 p = preferred - preferred.dot(axis) * axis;
  if (p.norm() < 1e-3) {
    const Vec3 other = std::abs(axis.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
    p = other - other.dot(axis) * axis;
  }
  return p.normalized();
}

class CsvLog {
 public:
  explicit CsvLog(const std::string& path) {
    if (path.empty()) return;
    const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
    out_.open(path, std::ios::app);
    if (!out_) throw IoError("cannot write log '" + path + "'");
    out_.precision(17);
    if (fresh) out_ << "stage,iteration,energy,curl,odeco,area,angle,smooth,step,wall_ms\n";
  }
  void write(const IterationRecord& r) {
    if (!out_.is_open()) return;
    out_ << r.stage << ',' << r.iteration << ',' << r.terms.total << ',' << r.terms.curl << ',' << r.terms.odeco << ','
         << r.terms.area << ',' << r.terms.angle << ',' << r.terms.smooth << ',' << r.step << ',' << r.wall_ms << '\n';
  }

 private:
  std::ofstream out_;
};

}  // namespace

FieldConstraints FieldConstraints::main_stage(const SurfaceMesh& m, ConstraintCache& cache) {
  FieldConstraints fc;
  fc.per_vertex_.resize(m.num_vertices());
  const auto free = std::make_shared<const AffineConstraint>(corner_free());
  for (int v = 0; v < m.num_vertices(); ++v) {
    if (m.is_corner(v)) {
      fc.per_vertex_[v] = free;
    } else if (m.is_feature_vertex(v)) {
      fc.per_vertex_[v] = cache.feature_alignment(m.feature_tangent(v), m.sizing(v));
    } else {
      fc.per_vertex_[v] = cache.alignment(m.vertex_normal(v), 1.0);
    }
  }
  return fc;
}

FieldConstraints FieldConstraints::init_stage(const SurfaceMesh& m, ConstraintCache& cache) {
  FieldConstraints fc;
  fc.per_vertex_.resize(m.num_vertices());
  const auto octa = cache.octahedral();
  for (int v = 0; v < m.num_vertices(); ++v) {
    if (m.is_corner(v)) {
      fc.per_vertex_[v] = octa;
      continue;
    }
    const auto align = m.is_feature_vertex(v) ? cache.feature_alignment(m.feature_tangent(v), 1.0)
                                              : cache.alignment(m.vertex_normal(v), 1.0);
    auto both = intersect(*octa, *align);
    if (both) {
      fc.per_vertex_[v] = std::make_shared<const AffineConstraint>(std::move(*both));
    } else {
      fc.per_vertex_[v] = align;
      ++fc.fallbacks_;
    }
  }
  return fc;
}

void FieldConstraints::project_state(FieldState& s) const {
  for (int v = 0; v < size(); ++v) s.segment<15>(15L * v) = per_vertex_[v]->project(s.segment<15>(15L * v));
}

void FieldConstraints::project_gradient(VecX& g) const {
  for (int v = 0; v < size(); ++v) g.segment<15>(15L * v) = odeco::project_gradient(g.segment<15>(15L * v), *per_vertex_[v]);
}

double FieldConstraints::max_residual(const FieldState& s) const {
  double worst = 0;
  for (int v = 0; v < size(); ++v) {
    if (per_vertex_[v]->rows() == 0) continue;
    worst = std::max(worst, per_vertex_[v]->residual(s.segment<15>(15L * v)).cwiseAbs().maxCoeff());
  }
  return worst;
}

SolveReport minimize(FieldState& x, const EnergyEvaluator& energy, const FieldConstraints& constraints,
                     const SolverConfig& cfg, const std::string& stage) {
  if (cfg.lbfgs_history < 1 || !(cfg.rel_improvement_tol > 0) || cfg.window < 1)
    throw Error("invalid solver configuration");
  const auto start = Clock::now();
  auto elapsed_ms = [&] {
    return cfg.timing ? std::chrono::duration<double, std::milli>(Clock::now() - start).count() : 0.0;
  };
  CsvLog log(cfg.log_path);

  SolveReport report;
  EnergyTerms terms;
  VecX g;
  double f = energy.evaluate(x, &g, &terms, &report.counters);
  constraints.project_gradient(g);
  report.energies.push_back(f);

  auto emit = [&](int it, double step) {
    IterationRecord r{stage, it, terms, step, elapsed_ms()};
    log.write(r);
    if (cfg.observer) cfg.observer(r);
  };
  emit(0, 0.0);

  std::deque<CurvaturePair> history;
  int quiet = 0;
  int it = 0;
  while (it < cfg.max_iterations) {
    if (g.lpNorm<Eigen::Infinity>() < cfg.gradient_tol || f <= cfg.energy_floor) {
      report.converged = true;
      break;
    }
    VecX d = -two_loop(history, g);
    constraints.project_gradient(d);
    double slope = g.dot(d);
    if (!(slope < 0)) {
      history.clear();
      d = -g;
      slope = -g.squaredNorm();
    }
    double alpha = history.empty() ? std::min(1.0, 1.0 / g.lpNorm<Eigen::Infinity>()) : 1.0;

    bool accepted = false;
    FieldState xn;
    VecX gn;
    EnergyTerms tn;
    EnergyCounters cn;
    double fn = f;
    for (int trial = 0; trial < cfg.max_line_search; ++trial) {
      xn = x + alpha * d;
      fn = energy.evaluate(xn, &gn, &tn, &cn);
      if (fn <= f + cfg.armijo_c1 * alpha * slope) {
        accepted = true;
        break;
      }
      alpha *= cfg.backtrack;
    }
    if (!accepted) {
      if (!history.empty()) {
        history.clear();
        continue;
      }
      report.line_search_failed = true;
      report.converged = true;  // no descent left at working precision
      break;
    }
    ++it;
    constraints.project_gradient(gn);

    CurvaturePair pair{xn - x, gn - g, 0.0};
    const double sy = pair.s.dot(pair.y);
    if (sy > 1e-12 * pair.s.norm() * pair.y.norm()) {
      pair.rho = 1.0 / sy;
      history.push_back(std::move(pair));
      if (static_cast<int>(history.size()) > cfg.lbfgs_history) history.pop_front();
    }

    const double rel = (f - fn) / std::max(std::abs(f), 1e-300);
    x = std::move(xn);
    g = std::move(gn);
    f = fn;
    terms = tn;
    report.counters = cn;

    if (cfg.reproject_every > 0 && it % cfg.reproject_every == 0) {
      constraints.project_state(x);
      f = energy.evaluate(x, &g, &terms, &report.counters);
      constraints.project_gradient(g);
    }
    report.energies.push_back(f);
    emit(it, alpha);

    quiet = rel < cfg.rel_improvement_tol ? quiet + 1 : 0;
    if (quiet >= cfg.window) {
      report.converged = true;
      break;
    }
  }
  if (!std::isfinite(f)) throw NaNEnergy("energy became non-finite during '" + stage + "'");
  report.iterations = it;
  report.final_terms = terms;
  report.max_constraint_residual = constraints.max_residual(x);
  report.wall_seconds = elapsed_ms() / 1000.0;
  return report;
}

FieldState initial_guess(const SurfaceMesh& m, const FieldConstraints& init, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Vec3 reference = random_rotation(rng).col(0);
  FieldState s(15L * m.num_vertices());
  for (int v = 0; v < m.num_vertices(); ++v) {
    const Vec3 first = m.is_feature_vertex(v) && !m.is_corner(v) ? m.feature_tangent(v) : m.vertex_normal(v);
    const Vec3 preferred = m.is_feature_vertex(v) && !m.is_corner(v) ? m.vertex_normal(v) : reference;
    Frame f;
    f.axes.col(0) = first;
    f.axes.col(1) = perpendicular_to(first, preferred);
    f.axes.col(2) = first.cross(f.axes.col(1));
    s.segment<15>(15L * v) = init.at(v).project(from_frame(f).coeffs());
  }
  return s;
}

FieldState initialize(const SurfaceMesh& m, const SolverConfig& cfg, SolveReport* report, ConstraintCache* cache) {
  ConstraintCache local;
  ConstraintCache& c = cache ? *cache : local;
  const auto init = FieldConstraints::init_stage(m, c);
  FieldState x = initial_guess(m, init, cfg.seed);

  SolverConfig stage_cfg = cfg;
  stage_cfg.max_iterations = cfg.init_max_iterations;
  const EnergyEvaluator energy(m, cfg.init_weights, EnergyMode::Init, cfg.energy_options);
  SolveReport r = minimize(x, energy, init, stage_cfg, "init");
  if (r.max_constraint_residual > 1e-8) {
    int worst = 0;
    double value = 0;
    for (int v = 0; v < m.num_vertices(); ++v) {
      if (init.at(v).rows() == 0) continue;
      const double res = init.at(v).residual(vertex_coeffs(x, v)).cwiseAbs().maxCoeff();
      if (res > value) value = res, worst = v;
    }
    throw ConstraintInfeasible("initialization left vertex " + std::to_string(worst) + " infeasible", worst);
  }
  FieldConstraints::main_stage(m, c).project_state(x);
  if (report) *report = r;
  return x;
}

std::pair<FieldState, SolveReport> solve_integrable(const FieldState& s0, const SurfaceMesh& m,
                                                    const SolverConfig& cfg, ConstraintCache* cache) {
  if (s0.size() != 15L * m.num_vertices()) throw Error("field state has the wrong length");
  ConstraintCache local;
  ConstraintCache& c = cache ? *cache : local;
  const auto constraints = FieldConstraints::main_stage(m, c);
  FieldState x = s0;
  constraints.project_state(x);
  const EnergyEvaluator energy(m, cfg.weights, EnergyMode::Main, cfg.energy_options);
  SolveReport r = minimize(x, energy, constraints, cfg, "main");
  return {std::move(x), r};
}

}  // namespace odeco
