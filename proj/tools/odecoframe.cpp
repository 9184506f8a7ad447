// Command-line front end: run, init-only, metrics, check.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "odeco/constraints.hpp"
#include "odeco/energy.hpp"
#include "odeco/errors.hpp"
#include "odeco/parallel.hpp"
#include "odeco/pipeline.hpp"
#include "odeco/tensor.hpp"

using namespace odeco;

namespace {

// Raw option values by config key; only the ones given on the command line
// are applied on top of the config file.
struct Flags {
  std::map<std::string, std::string> values;
  std::string config_path;
  bool no_timing = false;
  bool quiet = false;
  int verbose = 0;
};

void add_pipeline_options(CLI::App* cmd, Flags& f) {
  struct Opt {
    const char* name;
    const char* key;
    const char* help;
  };
  static const Opt opts[] = {
      {"--mesh,-m", "mesh", "input triangle mesh (.obj or .vtk)"},
      {"--format", "format", "mesh format: auto, obj, vtk"},
      {"--features", "features", "feature file (e a b / c v / s v value lines)"},
      {"--mode", "mode", "area, area-smooth, angle, sizing-only, custom"},
      {"--kappa-odeco", "kappa_odeco", "odeco penalty weight"},
      {"--kappa-area", "kappa_area", "area distortion weight"},
      {"--kappa-angle", "kappa_angle", "angle distortion weight"},
      {"--target-area", "target_area", "target quad area A_0"},
      {"--dihedral-threshold", "dihedral_threshold", "feature detection threshold in degrees"},
      {"--seed", "seed", "random seed"},
      {"--threads", "threads", "worker threads (0: all cores; 1: bitwise reproducible)"},
      {"--output,-o", "output_dir", "output directory (default $ODECO_OUTPUT_DIR or odeco_out)"},
      {"--max-iterations", "max_iterations", "main-stage iteration cap"},
      {"--init-max-iterations", "init_max_iterations", "init-stage iteration cap"},
  };
  for (const Opt& o : opts) cmd->add_option(o.name, f.values[o.key], o.help);
  cmd->add_option("--config,-c", f.config_path, "key = value configuration file");
  cmd->add_flag("--no-timing", f.no_timing, "write zero wall-clock times so all outputs are reproducible");
  cmd->add_flag("--quiet,-q", f.quiet, "no progress output");
  cmd->add_flag("--verbose,-v", f.verbose, "more progress output (repeatable)");
}

RunConfig resolve_config(const CLI::App* cmd, const Flags& f) {
  RunConfig cfg;
  cfg.output_dir = default_output_dir();
  if (!f.config_path.empty()) apply_config_file(cfg, f.config_path);
  for (const auto& [key, value] : f.values) {
    std::string opt = "--" + key;
    for (char& c : opt)
      if (c == '_') c = '-';
    if (key == "mesh") opt = "--mesh";
    if (key == "output_dir") opt = "--output";
    if (cmd->count(opt) > 0) apply_config_value(cfg, key, value);
  }
  if (f.no_timing) cfg.timing = false;
  if (f.quiet) cfg.verbosity = 0;
  cfg.verbosity += f.verbose;
  return cfg;
}

void print_summary(const PipelineResult& r, const RunConfig& cfg) {
  if (cfg.verbosity < 1) return;
  const MetricsReport& m = r.metrics;
  std::cerr << "mesh: " << r.mesh.num_vertices() << " vertices, " << r.mesh.num_triangles() << " triangles, "
            << r.mesh.num_feature_edges() << " feature edges, " << r.mesh.num_corners() << " corners\n";
  std::cerr << "init: " << r.init.iterations << " iterations, smooth " << r.init.final_terms.smooth
            << (r.init.converged ? "" : " (iteration cap)") << "\n";
  if (r.ran_main)
    std::cerr << "main: " << r.main.iterations << " iterations, E " << r.main.final_terms.total << ", H "
              << r.main.final_terms.curl << ", odeco " << r.main.final_terms.odeco
              << (r.main.converged ? "" : " (iteration cap)") << "\n";
  std::cerr << "singularities: n3 " << m.n3 << ", n5 " << m.n5 << ", other " << m.other_singular
            << ", boundary defects " << m.boundary_defects << "\n";
}

int cmd_run(const CLI::App* cmd, const Flags& f, bool init_only) {
  RunConfig cfg = resolve_config(cmd, f);
  if (cfg.verbosity >= 2) std::cerr << "output: " << cfg.output_dir << "\n";
  const PipelineResult r = run_pipeline(cfg, init_only);
  export_all(r, cfg, cfg.output_dir);
  print_summary(r, cfg);
  return exit_code(r);
}

int cmd_metrics(const CLI::App* cmd, const Flags& f, const std::string& state_dir) {
  RunConfig cfg = resolve_config(cmd, f);
  set_num_threads(cfg.threads);
  const std::filesystem::path d(state_dir);
  PipelineResult r{load_configured_mesh(cfg), {}, {}, {}, {}, {}, false, false};
  r.state = read_field((d / "field.bin").string(), (d / "field.json").string());
  if (r.state.size() != 15L * r.mesh.num_vertices())
    throw ParseError(state_dir + ": field has " + std::to_string(r.state.size() / 15) + " vertices, mesh has " +
                     std::to_string(r.mesh.num_vertices()));
  r.field = recover_field(r.state, r.mesh);
  r.metrics = field_metrics(r.field, r.state, r.mesh, cfg.target_area);
  const std::string json = metrics_json(r, cfg);
  if (cmd->count("--output") > 0) {
    std::filesystem::create_directories(cfg.output_dir);
    std::ofstream((std::filesystem::path(cfg.output_dir) / "metrics.json").string()) << json;
  } else {
    std::cout << json;
  }
  return 0;
}

// Property oracles on a user mesh.
int cmd_check(const CLI::App* cmd, const Flags& f) {
  RunConfig cfg = resolve_config(cmd, f);
  set_num_threads(cfg.threads);
  const SurfaceMesh m = load_configured_mesh(cfg);
  int failures = 0;
  auto report = [&](const std::string& name, bool ok, const std::string& detail) {
    std::cout << (ok ? "PASS " : "FAIL ") << name << ": " << detail << "\n";
    failures += ok ? 0 : 1;
  };
  auto fmt = [](double x) {
    std::ostringstream s;
    s << x;
    return s.str();
  };

  // P1 gradients reproduce the tangential part of a linear function.
  {
    const Vec3 a(0.3, -1.1, 0.7);
    double worst = 0;
    for (int t = 0; t < m.num_triangles(); ++t) {
      const auto& tri = m.triangle(t);
      Vec3 g = Vec3::Zero();
      for (int i = 0; i < 3; ++i) g += a.dot(m.vertex(tri[i])) * m.element(t).gradients[i];
      const Vec3& n = m.face_normal(t);
      const Vec3 exact = a - a.dot(n) * n;
      worst = std::max(worst, (g - exact).norm() / a.norm());
    }
    report("p1-linear-reproduction", worst < 1e-8, "max rel error " + fmt(worst));
  }
  // Quadrature integrates constants and linear functions exactly.
  {
    const double area = integrate(m, [](const QuadraturePoint&) { return 1.0; });
    double tri_area = 0;
    for (int t = 0; t < m.num_triangles(); ++t) tri_area += m.area(t);
    const double lin = integrate(m, [](const QuadraturePoint& p) { return p.position.x(); });
    double lin_exact = 0;
    for (int t = 0; t < m.num_triangles(); ++t) {
      const auto& tri = m.triangle(t);
      lin_exact += m.area(t) * (m.vertex(tri[0]).x() + m.vertex(tri[1]).x() + m.vertex(tri[2]).x()) / 3.0;
    }
    const double err = std::abs(area - tri_area) / tri_area + std::abs(lin - lin_exact) / (std::abs(lin_exact) + tri_area);
    report("quadrature-exactness", err < 1e-12, "rel error " + fmt(err));
  }
  std::mt19937_64 rng(cfg.seed + 17);
  // Frame round trip and odeco residuals on random frames.
  {
    std::uniform_real_distribution<double> size(0.5, 2.0);
    double worst_q = 0, worst_res = 0;
    for (int k = 0; k < 100; ++k) {
      Frame fr;
      fr.axes = random_rotation(rng);
      fr.eigenvalues = Vec3(size(rng), size(rng), size(rng));
      const ShTensor q = from_frame(fr);
      worst_q = std::max(worst_q, distance(from_frame(recover_frame(q)), q) / q.norm());
      for (double r : odeco_residuals(q)) worst_res = std::max(worst_res, std::abs(r));
    }
    report("frame-round-trip", worst_q < 1e-8, "max rel error " + fmt(worst_q));
    report("odeco-residuals", worst_res < 1e-10, "max residual " + fmt(worst_res));
  }
  // Every vertex constraint holds for its defining family and rejects a perturbation.
  ConstraintCache cache;
  const FieldConstraints main = FieldConstraints::main_stage(m, cache);
  {
    std::uniform_real_distribution<double> angle(0, 2 * std::numbers::pi), size(0.5, 2.0);
    double worst = 0, weakest = 1e300;
    for (int v = 0; v < m.num_vertices(); ++v) {
      if (m.is_corner(v)) continue;
      const bool feature = m.is_feature_vertex(v);
      const Vec3 d = feature ? m.feature_tangent(v) : m.vertex_normal(v);
      const Mat3 r = rotation_to(d);
      const double th = angle(rng);
      Frame fr;
      fr.axes.col(0) = d;
      fr.axes.col(1) = std::cos(th) * r.col(0) + std::sin(th) * r.col(1);
      fr.axes.col(2) = d.cross(fr.axes.col(1));
      fr.eigenvalues = Vec3(feature ? m.sizing(v) : 1.0, size(rng), size(rng));
      const Vec15 q = from_frame(fr).coeffs();
      worst = std::max(worst, main.at(v).residual(q).lpNorm<Eigen::Infinity>());
      fr.eigenvalues[0] *= 1.1;
      weakest = std::min(weakest, main.at(v).residual(from_frame(fr).coeffs()).lpNorm<Eigen::Infinity>());
    }
    report("constraint-families", worst < 1e-9, "max residual " + fmt(worst));
    report("constraint-perturbation", weakest > 1e-3, "min violation " + fmt(weakest));
  }
  // Analytic gradient against central differences at a perturbed feasible state.
  {
    const EnergyEvaluator e(m, cfg.weights(), EnergyMode::Main);
    FieldState s = initial_guess(m, FieldConstraints::init_stage(m, cache), cfg.seed);
    main.project_state(s);
    std::normal_distribution<double> noise(0, 0.05);
    VecX dir(s.size());
    for (auto& x : dir) x = noise(rng);
    main.project_gradient(dir);
    s += dir;
    VecX g;
    e.evaluate(s, &g);
    std::uniform_int_distribution<Eigen::Index> pick(0, s.size() - 1);
    double worst = 0;
    for (int k = 0; k < 15; ++k) {
      const Eigen::Index i = pick(rng);
      const double h = 1e-6 * std::max(1.0, std::abs(s[i]));
      FieldState sp = s, sm = s;
      sp[i] += h;
      sm[i] -= h;
      const double fd = (e.evaluate(sp) - e.evaluate(sm)) / (2 * h);
      worst = std::max(worst, std::abs(fd - g[i]) / std::max({std::abs(fd), std::abs(g[i]), 1e-6}));
    }
    report("energy-gradient", worst < 1e-5, "max rel error " + fmt(worst));
  }
  // Poincare-Hopf on closed meshes for the smooth init field.
  bool closed = true;
  for (int e = 0; e < m.num_edges(); ++e) closed = closed && !m.is_boundary_edge(e);
  if (closed) {
    SolverConfig sc = cfg.solver_config();
    sc.timing = false;
    const FieldState s = initialize(m, sc, nullptr, &cache);
    const FaceFrameField fld = recover_field(s, m);
    const MetricsReport mr = field_metrics(fld, s, m, cfg.target_area);
    const bool ok = mr.degenerate_faces == 0 && mr.unindexed == 0 && mr.index_sum == 4 * m.euler_characteristic();
    report("poincare-hopf", ok,
           "index sum " + std::to_string(mr.index_sum) + "/4, chi " + std::to_string(m.euler_characteristic()));
  }
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Integrable odeco frame fields on triangle meshes"};
  app.require_subcommand(1);

  Flags run_flags, init_flags, metrics_flags, check_flags;
  std::string state_dir;
  auto* run = app.add_subcommand("run", "initialize, solve, recover frames and write all outputs");
  add_pipeline_options(run, run_flags);
  auto* init = app.add_subcommand("init-only", "smooth octahedral initialization only");
  add_pipeline_options(init, init_flags);
  auto* metrics = app.add_subcommand("metrics", "recompute metrics from an exported field");
  add_pipeline_options(metrics, metrics_flags);
  metrics->add_option("--state,-s", state_dir, "directory holding field.bin and field.json")->required();
  auto* check = app.add_subcommand("check", "run property oracles on a mesh");
  add_pipeline_options(check, check_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  const CLI::App* active = app.get_subcommands().front();
  const Flags& flags = active == run ? run_flags : active == init ? init_flags : active == metrics ? metrics_flags : check_flags;
  const std::string mesh = flags.values.count("mesh") ? flags.values.at("mesh") : std::string();
  try {
    if (active == run) return cmd_run(run, run_flags, false);
    if (active == init) return cmd_run(init, init_flags, true);
    if (active == metrics) return cmd_metrics(metrics, metrics_flags, state_dir);
    return cmd_check(check, check_flags);
  } catch (const NonManifoldMesh& e) {
    std::cerr << "error: " << mesh << ": NonManifoldMesh: " << e.what() << "\n";
    for (const auto& [a, b] : e.edges()) std::cerr << "  edge " << a << " " << b << "\n";
  } catch (const DegenerateTriangle& e) {
    std::cerr << "error: " << mesh << ": DegenerateTriangle: " << e.what() << "\n";
    for (int t : e.triangles()) std::cerr << "  triangle " << t << "\n";
  } catch (const ConstraintInfeasible& e) {
    std::cerr << "error: " << mesh << ": ConstraintInfeasible at vertex " << e.vertex() << ": " << e.what() << "\n";
  } catch (const Error& e) {
    std::cerr << "error: " << (mesh.empty() ? "" : mesh + ": ") << e.what() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
  }
  return 1;
}
