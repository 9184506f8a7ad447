import json
import os
from pathlib import Path

import numpy as np
import pytest

import odecoframe as of

DATA = Path(os.environ.get("ODECO_DATA_DIR", Path(__file__).resolve().parents[2] / "data"))


def test_shapes_and_mesh_properties():
    m = of.shapes.rectangle(4, 3)
    assert m.num_vertices == 20
    assert m.num_triangles == 24
    assert m.euler_characteristic == 1
    assert m.vertices.shape == (20, 3)
    assert m.triangles.shape == (24, 3)
    assert np.allclose(m.face_normals, [0, 0, 1])
    assert of.shapes.icosphere(2).euler_characteristic == 2
    assert of.shapes.torus(2.0, 0.7, 12, 8).euler_characteristic == 0


def test_mesh_from_arrays():
    v = np.array([[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0]], dtype=float)
    f = np.array([[0, 1, 2], [0, 2, 3]], dtype=np.int32)
    m = of.Mesh(v, f)
    assert m.num_edges == 5
    assert m.total_area == pytest.approx(1.0)


def test_frame_round_trip():
    rng = np.random.default_rng(3)
    q_axes, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    if np.linalg.det(q_axes) < 0:
        q_axes[:, 0] *= -1
    lam = np.array([1.0, 1.7, 2.4])
    q = of.from_frame(q_axes, lam)
    assert q.shape == (15,)
    assert max(abs(c) for c in of.odeco_residuals(q)) < 1e-10
    axes, sizes = of.recover_frame(q)
    assert np.allclose(of.from_frame(axes, sizes), q, atol=1e-9)
    # the tensor evaluates to sum lambda (a . x)^4
    x = np.array([0.3, -0.5, 0.8])
    assert of.evaluate(q, x) == pytest.approx(np.sum(lam * (q_axes.T @ x) ** 4))


def test_rotation_rejects_reflections():
    with pytest.raises(of.NotARotation):
        of.rotate_sh(np.zeros(15), np.diag([1.0, 1.0, -1.0]))


def test_energy_on_constant_field():
    m = of.shapes.rectangle(3, 3)
    q = of.from_frame(np.eye(3), np.ones(3))
    state = np.tile(q, (m.num_vertices, 1))
    value, grad, terms = of.energy(m, state, of.EnergyWeights(odeco=1.0))
    assert grad.shape == state.shape
    assert terms["curl"] == 0.0
    assert value < 1e-20


def test_run_square(tmp_path):
    result, metrics = of.run(DATA / "square.obj", mode="sizing-only", output_dir=tmp_path, threads=1)
    assert result.exit_code == 0
    assert metrics["n3"] == 0 and metrics["n5"] == 0
    assert (tmp_path / "singularities.txt").read_text() == ""
    assert len((tmp_path / "frames.txt").read_text().splitlines()) == result.mesh.num_triangles
    back = of.read_field(str(tmp_path / "field.bin"), str(tmp_path / "field.json"))
    assert back.tobytes() == result.state.tobytes()
    sidecar = json.loads((tmp_path / "field.json").read_text())
    assert sidecar["vertex_count"] == result.mesh.num_vertices
    assert np.allclose(np.linalg.norm(result.u, axis=1), 1.0, atol=1e-6)


def test_errors_surface_as_exceptions(tmp_path):
    with pytest.raises(of.NonManifoldMesh):
        of.load_mesh(str(DATA / "broken_nonmanifold.obj"))
    with pytest.raises(of.IoError):
        of.load_mesh(str(tmp_path / "missing.obj"))
    with pytest.raises(of.ConfigError):
        of.run(DATA / "square.obj", kappa_sideways=1)
    assert issubclass(of.NonManifoldMesh, of.OdecoError)
