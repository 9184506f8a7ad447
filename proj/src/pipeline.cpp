#include "odeco/pipeline.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "odeco/errors.hpp"
#include "odeco/parallel.hpp"

namespace odeco {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  double out = 0;
  const char* end = value.data() + value.size();
  const auto [p, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || p != end || !std::isfinite(out))
    throw ConfigError("'" + key + "': expected a number, got '" + value + "'");
  return out;
}

long long parse_int(const std::string& key, const std::string& value) {
  long long out = 0;
  const char* end = value.data() + value.size();
  const auto [p, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || p != end) throw ConfigError("'" + key + "': expected an integer, got '" + value + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  throw ConfigError("'" + key + "': expected true or false, got '" + value + "'");
}

void append_double(std::string& out, double x) {
  char buf[32];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
  out.append(buf, p);
}

std::ofstream open_out(const std::string& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path + "'");
  return out;
}

}  // namespace

Mode parse_mode(const std::string& name) {
  if (name == "area") return Mode::Area;
  if (name == "area-smooth") return Mode::AreaSmooth;
  if (name == "angle") return Mode::Angle;
  if (name == "sizing-only") return Mode::SizingOnly;
  if (name == "custom") return Mode::Custom;
  throw ConfigError("unknown mode '" + name + "' (area, area-smooth, angle, sizing-only, custom)");
}

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::Area: return "area";
    case Mode::AreaSmooth: return "area-smooth";
    case Mode::Angle: return "angle";
    case Mode::SizingOnly: return "sizing-only";
    case Mode::Custom: return "custom";
  }
  return "?";
}

EnergyWeights preset_weights(Mode mode) {
  switch (mode) {
    case Mode::Area: return {10.0, 0.1, 0.0, 1.0};
    case Mode::AreaSmooth: return {10.0, 0.1, 1e-4, 1.0};
    case Mode::Angle: return {1.0, 0.0, 0.01, 1.0};
    case Mode::SizingOnly:
    case Mode::Custom: return {1.0, 0.0, 0.0, 1.0};
  }
  return {};
}

EnergyWeights RunConfig::weights() const {
  EnergyWeights w = preset_weights(mode);
  if (kappa_odeco) w.odeco = *kappa_odeco;
  if (kappa_area) w.area = *kappa_area;
  if (kappa_angle) w.angle = *kappa_angle;
  w.target_area = target_area;
  if (w.odeco < 0 || w.area < 0 || w.angle < 0) throw ConfigError("weights must be non-negative");
  if (!(w.target_area > 0)) throw ConfigError("target_area must be positive");
  return w;
}

SolverConfig RunConfig::solver_config() const {
  SolverConfig s;
  s.weights = weights();
  s.seed = seed;
  s.max_iterations = max_iterations;
  s.init_max_iterations = init_max_iterations;
  s.timing = timing;
  return s;
}

void apply_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "mesh") {
    cfg.mesh_path = value;
  } else if (key == "format") {
    if (value == "obj") cfg.format = MeshFormat::Obj;
    else if (value == "vtk") cfg.format = MeshFormat::Vtk;
    else if (value == "auto") cfg.format = MeshFormat::Auto;
    else throw ConfigError("'format': expected obj, vtk or auto, got '" + value + "'");
  } else if (key == "features") {
    cfg.features_path = value;
  } else if (key == "mode") {
    cfg.mode = parse_mode(value);
  } else if (key == "kappa_odeco") {
    cfg.kappa_odeco = parse_double(key, value);
  } else if (key == "kappa_area") {
    cfg.kappa_area = parse_double(key, value);
  } else if (key == "kappa_angle") {
    cfg.kappa_angle = parse_double(key, value);
  } else if (key == "target_area") {
    cfg.target_area = parse_double(key, value);
  } else if (key == "dihedral_threshold") {
    cfg.dihedral_threshold_deg = parse_double(key, value);
  } else if (key == "seed") {
    cfg.seed = static_cast<std::uint64_t>(parse_int(key, value));
  } else if (key == "threads") {
    cfg.threads = static_cast<int>(parse_int(key, value));
    if (cfg.threads < 0) throw ConfigError("'threads' must be 0 (all cores) or positive");
  } else if (key == "output_dir") {
    cfg.output_dir = value;
  } else if (key == "verbosity") {
    cfg.verbosity = static_cast<int>(parse_int(key, value));
  } else if (key == "max_iterations") {
    cfg.max_iterations = static_cast<int>(parse_int(key, value));
    if (cfg.max_iterations < 0) throw ConfigError("'max_iterations' must not be negative");
  } else if (key == "init_max_iterations") {
    cfg.init_max_iterations = static_cast<int>(parse_int(key, value));
    if (cfg.init_max_iterations < 0) throw ConfigError("'init_max_iterations' must not be negative");
  } else if (key == "timing") {
    cfg.timing = parse_bool(key, value);
  } else {
    throw ConfigError("unknown key '" + key + "'");
  }
}

void apply_config_text(RunConfig& cfg, const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    try {
      apply_config_value(cfg, trim(line.substr(0, eq)), value);
    } catch (const ConfigError& e) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

void apply_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  apply_config_text(cfg, ss.str(), path);
}

std::string default_output_dir() {
  const char* env = std::getenv("ODECO_OUTPUT_DIR");
  return env && *env ? std::string(env) : std::string("odeco_out");
}

SurfaceMesh load_configured_mesh(const RunConfig& cfg) {
  if (cfg.mesh_path.empty()) throw ConfigError("no input mesh given");
  SurfaceMesh m = load_mesh(cfg.mesh_path, cfg.format);
  if (!cfg.features_path.empty()) return load_features(m, cfg.features_path, cfg.dihedral_threshold_deg);
  return detect_features(m, cfg.dihedral_threshold_deg);
}

PipelineResult run_pipeline(const RunConfig& cfg, bool init_only) {
  set_num_threads(cfg.threads);
  PipelineResult r{load_configured_mesh(cfg), {}, {}, {}, {}, {}, false, false};
  SolverConfig sc = cfg.solver_config();
  if (!cfg.output_dir.empty()) {
    std::filesystem::create_directories(cfg.output_dir);
    sc.log_path = (std::filesystem::path(cfg.output_dir) / "iterations.csv").string();
    std::filesystem::remove(sc.log_path);
  }
  ConstraintCache cache;
  r.state = initialize(r.mesh, sc, &r.init, &cache);
  r.ran_init = true;
  if (!init_only) {
    auto [s, rep] = solve_integrable(r.state, r.mesh, sc, &cache);
    r.state = std::move(s);
    r.main = std::move(rep);
    r.ran_main = true;
  }
  r.field = recover_field(r.state, r.mesh);
  r.metrics = field_metrics(r.field, r.state, r.mesh, cfg.target_area);
  return r;
}

int exit_code(const PipelineResult& r) {
  const SolveReport& last = r.ran_main ? r.main : r.init;
  return last.converged ? 0 : 2;
}

void write_frames(const FaceFrameField& f, const std::string& path) {
  std::string out;
  for (std::size_t t = 0; t < f.u.size(); ++t) {
    out += std::to_string(t);
    for (const Vec3* w : {&f.u[t], &f.v[t]})
      for (int k = 0; k < 3; ++k) {
        out += ' ';
        append_double(out, (*w)[k]);
      }
    out += '\n';
  }
  open_out(path) << out;
}

void write_field(const FieldState& s, const std::string& bin_path, const std::string& json_path) {
  static_assert(std::endian::native == std::endian::little, "field export assumes a little-endian host");
  if (s.size() % 15 != 0) throw Error("field state size is not a multiple of 15");
  {
    auto out = open_out(bin_path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(s.data()), static_cast<std::streamsize>(sizeof(double) * s.size()));
    if (!out) throw IoError("failed writing '" + bin_path + "'");
  }
  nlohmann::ordered_json j;
  j["vertex_count"] = s.size() / 15;
  j["basis"] = "real-SH l=0,2,4";
  j["ordering"] =
      "per vertex 15 float64 little-endian: [Y00, Y2-2..Y22, Y4-4..Y44], orthonormal real SH without "
      "Condon-Shortley phase";
  j["dtype"] = "float64";
  j["byte_order"] = "little";
  open_out(json_path) << j.dump(2) << '\n';
}

FieldState read_field(const std::string& bin_path, const std::string& json_path) {
  std::ifstream js(json_path);
  if (!js) throw IoError("cannot read '" + json_path + "'");
  nlohmann::json j;
  try {
    js >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(json_path + ": " + e.what());
  }
  if (!j.contains("vertex_count") || !j["vertex_count"].is_number_integer())
    throw ParseError(json_path + ": missing vertex_count");
  if (j.value("basis", "") != "real-SH l=0,2,4") throw ParseError(json_path + ": unsupported basis");
  const long long nv = j["vertex_count"].get<long long>();
  std::ifstream in(bin_path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + bin_path + "'");
  in.seekg(0, std::ios::end);
  const auto bytes = static_cast<long long>(in.tellg());
  if (bytes != nv * 15 * static_cast<long long>(sizeof(double)))
    throw ParseError(bin_path + ": expected " + std::to_string(nv * 15 * sizeof(double)) + " bytes, found " +
                     std::to_string(bytes));
  in.seekg(0);
  FieldState s(15 * nv);
  in.read(reinterpret_cast<char*>(s.data()), bytes);
  if (!in) throw IoError("failed reading '" + bin_path + "'");
  return s;
}

void write_singularities(const FaceFrameField& f, const SurfaceMesh& m, const std::string& path) {
  // Corners carry their turning in the index; they are not reported.
  std::string out;
  for (int v = 0; v < m.num_vertices(); ++v)
    if (f.indexed[v] && f.index[v] != 0 && !m.is_corner(v)) out += std::to_string(v) + ' ' + std::to_string(f.index[v]) + '\n';
  open_out(path) << out;
}

std::string metrics_json(const PipelineResult& r, const RunConfig& cfg) {
  const MetricsReport& m = r.metrics;
  const EnergyWeights w = cfg.weights();
  nlohmann::ordered_json j;
  j["mesh"] = cfg.mesh_path;
  j["vertices"] = r.mesh.num_vertices();
  j["triangles"] = r.mesh.num_triangles();
  j["euler_characteristic"] = r.mesh.euler_characteristic();
  j["feature_edges"] = r.mesh.num_feature_edges();
  j["corners"] = r.mesh.num_corners();
  j["mode"] = to_string(cfg.mode);
  j["weights"] = {{"kappa_odeco", w.odeco}, {"kappa_area", w.area}, {"kappa_angle", w.angle}, {"target_area", w.target_area}};
  j["seed"] = cfg.seed;
  j["n3"] = m.n3;
  j["n5"] = m.n5;
  j["other_singular"] = m.other_singular;
  j["boundary_defects"] = m.boundary_defects;
  j["unindexed_vertices"] = m.unindexed;
  j["interior_index_sum_quarters"] = m.index_sum;
  j["degenerate_faces"] = m.degenerate_faces;
  j["skew_proxy_deg"] = {{"mean", m.mean_skew_deg}, {"max", m.max_skew_deg}};
  j["mean_area_distortion"] = m.mean_area_distortion;
  j["mean_angle_distortion"] = m.mean_angle_distortion;
  j["curl"] = {{"mean", m.mean_curl}, {"median", m.median_curl}, {"max", m.max_curl}};

  auto stage = [](const SolveReport& s) {
    nlohmann::ordered_json o;
    o["iterations"] = s.iterations;
    o["converged"] = s.converged;
    o["line_search_failed"] = s.line_search_failed;
    o["energy"] = {{"total", s.final_terms.total}, {"curl", s.final_terms.curl},   {"odeco", s.final_terms.odeco},
                   {"area", s.final_terms.area},   {"angle", s.final_terms.angle}, {"smooth", s.final_terms.smooth}};
    o["max_constraint_residual"] = s.max_constraint_residual;
    o["warnings"] = {{"regularized_second_order_part", s.counters.regularized},
                     {"singular_second_order_part", s.counters.singular},
                     {"nonpositive_determinant", s.counters.nonpositive_det},
                     {"zero_tensor", s.counters.zero_tensor}};
    o["wall_seconds"] = s.wall_seconds;
    return o;
  };
  if (r.ran_init) j["init"] = stage(r.init);
  if (r.ran_main) j["main"] = stage(r.main);
  if (r.ran_init) j["exit_code"] = exit_code(r);
  return j.dump(2) + "\n";
}

void export_all(const PipelineResult& r, const RunConfig& cfg, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());
  const fs::path d(dir);
  write_frames(r.field, (d / "frames.txt").string());
  write_field(r.state, (d / "field.bin").string(), (d / "field.json").string());
  write_singularities(r.field, r.mesh, (d / "singularities.txt").string());
  open_out((d / "metrics.json").string()) << metrics_json(r, cfg);
}

}  // namespace odeco
