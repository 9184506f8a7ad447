#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "odeco/energy.hpp"
#include "odeco/errors.hpp"
#include "odeco/mesh.hpp"
#include "odeco/parallel.hpp"
#include "odeco/pipeline.hpp"
#include "odeco/recovery.hpp"
#include "odeco/shapes.hpp"
#include "odeco/tensor.hpp"

namespace py = pybind11;
using namespace odeco;

namespace {

using RowMatX3 = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;
using RowMatX3i = Eigen::Matrix<int, Eigen::Dynamic, 3, Eigen::RowMajor>;

SurfaceMesh mesh_from_arrays(const RowMatX3& v, const RowMatX3i& f) {
  std::vector<Vec3> verts(v.rows());
  for (Eigen::Index i = 0; i < v.rows(); ++i) verts[i] = v.row(i).transpose();
  std::vector<SurfaceMesh::Triangle> tris(f.rows());
  for (Eigen::Index i = 0; i < f.rows(); ++i) tris[i] = {f(i, 0), f(i, 1), f(i, 2)};
  return SurfaceMesh(std::move(verts), std::move(tris));
}

RowMatX3 stack(const std::vector<Vec3>& xs) {
  RowMatX3 out(xs.size(), 3);
  for (std::size_t i = 0; i < xs.size(); ++i) out.row(i) = xs[i].transpose();
  return out;
}

Eigen::Matrix<double, Eigen::Dynamic, 15, Eigen::RowMajor> state_matrix(const FieldState& s) {
  return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, 15, Eigen::RowMajor>>(s.data(), s.size() / 15, 15);
}

FieldState state_vector(const Eigen::Ref<const Eigen::Matrix<double, Eigen::Dynamic, 15, Eigen::RowMajor>>& q) {
  return Eigen::Map<const VecX>(q.data(), q.size());
}

py::dict terms_dict(const EnergyTerms& t) {
  py::dict d;
  d["total"] = t.total;
  d["curl"] = t.curl;
  d["odeco"] = t.odeco;
  d["area"] = t.area;
  d["angle"] = t.angle;
  d["smooth"] = t.smooth;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Integrable odeco frame fields on triangle meshes";

  auto base = py::register_exception<Error>(m, "OdecoError", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<NonManifoldMesh>(m, "NonManifoldMesh", base.ptr());
  py::register_exception<DegenerateTriangle>(m, "DegenerateTriangle", base.ptr());
  py::register_exception<ConstraintInfeasible>(m, "ConstraintInfeasible", base.ptr());
  py::register_exception<NotARotation>(m, "NotARotation", base.ptr());
  py::register_exception<NaNEnergy>(m, "NaNEnergy", base.ptr());

  m.def("set_num_threads", &set_num_threads, py::arg("n"));

  py::class_<SurfaceMesh>(m, "Mesh")
      .def(py::init(&mesh_from_arrays), py::arg("vertices"), py::arg("triangles"))
      .def_property_readonly("num_vertices", &SurfaceMesh::num_vertices)
      .def_property_readonly("num_triangles", &SurfaceMesh::num_triangles)
      .def_property_readonly("num_edges", &SurfaceMesh::num_edges)
      .def_property_readonly("euler_characteristic", &SurfaceMesh::euler_characteristic)
      .def_property_readonly("vertices", [](const SurfaceMesh& s) { return stack(s.vertices()); })
      .def_property_readonly("triangles",
                             [](const SurfaceMesh& s) {
                               RowMatX3i out(s.num_triangles(), 3);
                               for (int t = 0; t < s.num_triangles(); ++t)
                                 for (int k = 0; k < 3; ++k) out(t, k) = s.triangle(t)[k];
                               return out;
                             })
      .def_property_readonly("face_normals",
                             [](const SurfaceMesh& s) {
                               std::vector<Vec3> n(s.num_triangles());
                               for (int t = 0; t < s.num_triangles(); ++t) n[t] = s.face_normal(t);
                               return stack(n);
                             })
      .def_property_readonly("vertex_normals",
                             [](const SurfaceMesh& s) {
                               std::vector<Vec3> n(s.num_vertices());
                               for (int v = 0; v < s.num_vertices(); ++v) n[v] = s.vertex_normal(v);
                               return stack(n);
                             })
      .def_property_readonly("total_area", &SurfaceMesh::total_area)
      .def_property_readonly("num_feature_edges", &SurfaceMesh::num_feature_edges)
      .def_property_readonly("corners",
                             [](const SurfaceMesh& s) {
                               std::vector<int> c;
                               for (int v = 0; v < s.num_vertices(); ++v)
                                 if (s.is_corner(v)) c.push_back(v);
                               return c;
                             })
      .def("is_feature_vertex", &SurfaceMesh::is_feature_vertex)
      .def("sizing", &SurfaceMesh::sizing)
      .def("set_sizing", &SurfaceMesh::set_sizing, py::arg("vertex"), py::arg("value"))
      .def("__repr__", [](const SurfaceMesh& s) {
        return "<Mesh " + std::to_string(s.num_vertices()) + " vertices, " + std::to_string(s.num_triangles()) +
               " triangles>";
      });

  m.def("load_mesh", [](const std::string& p) { return load_mesh(p); }, py::arg("path"));
  m.def("write_obj", &write_obj, py::arg("mesh"), py::arg("path"));
  m.def("detect_features", &detect_features, py::arg("mesh"), py::arg("dihedral_threshold_deg") = 30.0);
  m.def("load_features", &load_features, py::arg("mesh"), py::arg("path"), py::arg("turn_threshold_deg") = 30.0);

  auto sh = m.def_submodule("shapes", "Procedural test meshes");
  sh.def("rectangle", &shapes::rectangle, py::arg("nx"), py::arg("ny"), py::arg("width") = 1.0,
         py::arg("height") = 1.0);
  sh.def("annulus", &shapes::annulus, py::arg("inner"), py::arg("outer"), py::arg("radial"), py::arg("angular"));
  sh.def("disk", &shapes::disk, py::arg("radius"), py::arg("rings"), py::arg("angular"));
  sh.def("icosphere", &shapes::icosphere, py::arg("level"), py::arg("radius") = 1.0);
  sh.def("torus", &shapes::torus, py::arg("major"), py::arg("minor"), py::arg("nu"), py::arg("nv"));
  sh.def("cube", &shapes::cube, py::arg("n"), py::arg("size") = 1.0);
  sh.def("cylinder", &shapes::cylinder, py::arg("radius"), py::arg("height"), py::arg("angular"), py::arg("axial"),
         py::arg("cap_rings"));

  m.def(
      "from_frame",
      [](const Mat3& axes, const Vec3& eigenvalues) {
        Frame f;
        f.axes = axes;
        f.eigenvalues = eigenvalues;
        return Vec15(from_frame(f).coeffs());
      },
      py::arg("axes"), py::arg("eigenvalues"), "SH coefficients of sum_m lambda_m a_m^4; axes are columns.");
  m.def(
      "recover_frame",
      [](const Vec15& q) {
        const Frame f = recover_frame(ShTensor(q));
        return py::make_tuple(Mat3(f.axes), Vec3(f.eigenvalues));
      },
      py::arg("q"), "(axes, eigenvalues) of the nearest frame; axes are columns.");
  m.def(
      "rotate_sh", [](const Vec15& q, const Mat3& r) { return Vec15(rotate_sh(ShTensor(q), r).coeffs()); },
      py::arg("q"), py::arg("rotation"));
  m.def(
      "odeco_residuals", [](const Vec15& q) { return odeco_residuals(ShTensor(q)); }, py::arg("q"));
  m.def(
      "evaluate", [](const Vec15& q, const Vec3& x) { return ShTensor(q).evaluate(x); }, py::arg("q"),
      py::arg("x"), "Degree-4 polynomial value at a point.");

  py::class_<EnergyWeights>(m, "EnergyWeights")
      .def(py::init([](double odeco, double area, double angle, double target_area) {
             return EnergyWeights{odeco, area, angle, target_area};
           }),
           py::arg("odeco") = 1.0, py::arg("area") = 0.0, py::arg("angle") = 0.0, py::arg("target_area") = 1.0)
      .def_readwrite("odeco", &EnergyWeights::odeco)
      .def_readwrite("area", &EnergyWeights::area)
      .def_readwrite("angle", &EnergyWeights::angle)
      .def_readwrite("target_area", &EnergyWeights::target_area);

  m.def(
      "energy",
      [](const SurfaceMesh& mesh, const Eigen::Ref<const Eigen::Matrix<double, Eigen::Dynamic, 15, Eigen::RowMajor>>& q,
         const EnergyWeights& w, const std::string& mode) {
        if (q.rows() != mesh.num_vertices()) throw Error("state must have one row per vertex");
        const EnergyEvaluator e(mesh, w, mode == "init" ? EnergyMode::Init : EnergyMode::Main);
        VecX g;
        EnergyTerms terms;
        const double value = e.evaluate(state_vector(q), &g, &terms);
        return py::make_tuple(value, state_matrix(g), terms_dict(terms));
      },
      py::arg("mesh"), py::arg("state"), py::arg("weights") = EnergyWeights{}, py::arg("mode") = "main",
      "(energy, gradient, terms) for a (V, 15) coefficient array.");

  py::class_<RunConfig>(m, "RunConfig")
      .def(py::init<>())
      .def_readwrite("mesh_path", &RunConfig::mesh_path)
      .def_readwrite("features_path", &RunConfig::features_path)
      .def_property(
          "mode", [](const RunConfig& c) { return to_string(c.mode); },
          [](RunConfig& c, const std::string& s) { c.mode = parse_mode(s); })
      .def_readwrite("kappa_odeco", &RunConfig::kappa_odeco)
      .def_readwrite("kappa_area", &RunConfig::kappa_area)
      .def_readwrite("kappa_angle", &RunConfig::kappa_angle)
      .def_readwrite("target_area", &RunConfig::target_area)
      .def_readwrite("dihedral_threshold_deg", &RunConfig::dihedral_threshold_deg)
      .def_readwrite("seed", &RunConfig::seed)
      .def_readwrite("threads", &RunConfig::threads)
      .def_readwrite("output_dir", &RunConfig::output_dir)
      .def_readwrite("max_iterations", &RunConfig::max_iterations)
      .def_readwrite("init_max_iterations", &RunConfig::init_max_iterations)
      .def_readwrite("timing", &RunConfig::timing)
      .def("apply_text", [](RunConfig& c, const std::string& text) { apply_config_text(c, text); })
      .def_property_readonly("weights", &RunConfig::weights);

  py::class_<PipelineResult>(m, "PipelineResult")
      .def_property_readonly("mesh", [](const PipelineResult& r) { return r.mesh; })
      .def_property_readonly("state", [](const PipelineResult& r) { return state_matrix(r.state); })
      .def_property_readonly("u", [](const PipelineResult& r) { return stack(r.field.u); })
      .def_property_readonly("v", [](const PipelineResult& r) { return stack(r.field.v); })
      .def_property_readonly("index", [](const PipelineResult& r) { return r.field.index; })
      .def_property_readonly("exit_code", [](const PipelineResult& r) { return exit_code(r); })
      .def("metrics_json", [](const PipelineResult& r, const RunConfig& c) { return metrics_json(r, c); })
      .def("export", [](const PipelineResult& r, const RunConfig& c, const std::string& dir) { export_all(r, c, dir); });

  m.def("run_pipeline", &run_pipeline, py::arg("config"), py::arg("init_only") = false,
        py::call_guard<py::gil_scoped_release>());

  m.def(
      "read_field",
      [](const std::string& bin, const std::string& json) { return state_matrix(read_field(bin, json)); },
      py::arg("bin_path"), py::arg("json_path"));
}
