#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "odeco/mesh.hpp"
#include "odeco/recovery.hpp"
#include "odeco/solver.hpp"

namespace odeco {

/// Main-stage weight presets:
///   area        {10, 0.1, 0}     CAD models, area distortion
///   area-smooth {10, 0.1, 1e-4}  smooth models, area plus a little angle
///   angle       {1, 0, 0.01}
///   sizing-only {1, 0, 0}
///   custom      {1, 0, 0} plus explicit overrides
enum class Mode { Area, AreaSmooth, Angle, SizingOnly, Custom };

Mode parse_mode(const std::string& name);
std::string to_string(Mode mode);
EnergyWeights preset_weights(Mode mode);

struct RunConfig {
  std::string mesh_path;
  MeshFormat format = MeshFormat::Auto;
  std::string features_path;  // empty: detect from dihedral angles and boundary
  Mode mode = Mode::SizingOnly;
  std::optional<double> kappa_odeco, kappa_area, kappa_angle;
  double target_area = 1.0;
  double dihedral_threshold_deg = 30.0;
  std::uint64_t seed = 0;
  int threads = 0;  // 0: all logical cores
  std::string output_dir;
  int verbosity = 1;
  int max_iterations = 1000;
  int init_max_iterations = 500;
  bool timing = true;

  /// Preset for the mode with explicit overrides applied.
  EnergyWeights weights() const;
  SolverConfig solver_config() const;
};

/// Parses `key = value` lines ('#' starts a comment) into `cfg`. Unknown
/// keys and malformed values raise ConfigError with the line number.
void apply_config_text(RunConfig& cfg, const std::string& text, const std::string& origin = "<config>");
void apply_config_file(RunConfig& cfg, const std::string& path);
/// Sets one key; shared by the config file and command-line overrides.
void apply_config_value(RunConfig& cfg, const std::string& key, const std::string& value);

/// Output directory from the environment (ODECO_OUTPUT_DIR) or "odeco_out".
std::string default_output_dir();

/// Loads the mesh and its features (file or detection).
SurfaceMesh load_configured_mesh(const RunConfig& cfg);

struct PipelineResult {
  SurfaceMesh mesh;
  FieldState state;
  FaceFrameField field;
  MetricsReport metrics;
  SolveReport init;
  SolveReport main;
  bool ran_init = false;
  bool ran_main = false;
};

/// init -> (solve) -> recover -> metrics. Writes nothing.
PipelineResult run_pipeline(const RunConfig& cfg, bool init_only = false);

/// 0 on convergence, 2 when an iteration cap was hit.
int exit_code(const PipelineResult& r);

/// Writes frames.txt, field.bin, field.json, singularities.txt,
/// metrics.json into `dir` (created if needed).
void export_all(const PipelineResult& r, const RunConfig& cfg, const std::string& dir);

/// `t ux uy uz vx vy vz` per triangle, shortest round-trip decimal form.
void write_frames(const FaceFrameField& f, const std::string& path);
/// Little-endian float64, 15 values per vertex, plus a JSON sidecar.
void write_field(const FieldState& s, const std::string& bin_path, const std::string& json_path);
FieldState read_field(const std::string& bin_path, const std::string& json_path);
/// `v index_numerator` for every indexed non-corner vertex with non-zero index.
void write_singularities(const FaceFrameField& f, const SurfaceMesh& m, const std::string& path);
std::string metrics_json(const PipelineResult& r, const RunConfig& cfg);

}  // namespace odeco
