"""Integrable odeco frame fields on triangle meshes."""

import json

from ._core import (
    ConfigError,
    ConstraintInfeasible,
    DegenerateTriangle,
    EnergyWeights,
    IoError,
    Mesh,
    NaNEnergy,
    NonManifoldMesh,
    NotARotation,
    OdecoError,
    ParseError,
    PipelineResult,
    RunConfig,
    detect_features,
    energy,
    evaluate,
    from_frame,
    load_features,
    load_mesh,
    odeco_residuals,
    read_field,
    recover_frame,
    rotate_sh,
    run_pipeline,
    set_num_threads,
    shapes,
    write_obj,
)

__version__ = "0.1.0"


def run(mesh_path, mode="sizing-only", output_dir="", init_only=False, **overrides):
    """Run the pipeline on a mesh file and return (result, metrics dict).

    Keyword overrides use the config-file keys, e.g. kappa_angle=0.01.
    """
    cfg = RunConfig()
    cfg.mesh_path = str(mesh_path)
    cfg.mode = mode
    cfg.output_dir = str(output_dir)
    if overrides:
        cfg.apply_text("\n".join(f"{k} = {v}" for k, v in overrides.items()))
    result = run_pipeline(cfg, init_only)
    if output_dir:
        result.export(cfg, str(output_dir))
    return result, json.loads(result.metrics_json(cfg))
