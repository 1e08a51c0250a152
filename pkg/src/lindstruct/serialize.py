"""JSON report builders and a minimal schema check for them.

Every report is a JSON object whose ``schema`` field names its kind and
version, e.g. ``"lindstruct.structure/1"``.
"""
from __future__ import annotations

import math

import numpy as np

from .linop import complex_to_json, matrix_to_json

SCHEMA_VERSION = 1

# required top-level keys and their JSON types per report kind
SCHEMAS = {
    "validation": {"ok": bool, "dim": int, "hermiticity_defect": float, "trace_defect": float,
                   "choi_min_eigenvalue": float, "warnings": list},
    "spectrum": {"dim": int, "eigenvalues": list, "clusters": list, "kernel_dim": int, "gap": float,
                 "paths": list},
    "structure": {"dim": int, "levels": list, "p0": list, "intertwiners": list, "dephasing_classes": list,
                  "commutant_dim": int, "stationary": dict, "defects": dict, "warnings": list},
    "trajectory": {"times": list, "states": list, "monitors": list},
    "asymptotics": {"dim": int, "classes": list, "decomposition_defect": float, "check_time": float,
                    "check_residual": float},
    "series": {"order": int, "sigmas": list, "alphas": list, "residuals": list, "warnings": list},
    "corpus": {"passed": bool, "fixtures": list},
}


def schema_id(kind: str) -> str:
    return f"lindstruct.{kind}/{SCHEMA_VERSION}"


def _num(x) -> float | None:
    x = float(x)
    return x if math.isfinite(x) else None


def wrap(kind: str, body: dict) -> dict:
    return {"schema": schema_id(kind), **body}


def check_report(obj) -> str:
    """Raise ValueError unless ``obj`` is a well-formed report; return its kind."""
    if not isinstance(obj, dict) or not isinstance(obj.get("schema"), str):
        raise ValueError("report must be an object with a 'schema' string")
    sid = obj["schema"]
    if not sid.startswith("lindstruct.") or "/" not in sid:
        raise ValueError(f"unrecognised schema id {sid!r}")
    kind, version = sid[len("lindstruct."):].split("/", 1)
    if kind not in SCHEMAS:
        raise ValueError(f"unknown report kind {kind!r}")
    if version != str(SCHEMA_VERSION):
        raise ValueError(f"unsupported schema version {version!r}")
    for key, typ in SCHEMAS[kind].items():
        if key not in obj:
            raise ValueError(f"{kind} report lacks {key!r}")
        val = obj[key]
        if typ is float:
            ok = val is None or (isinstance(val, (int, float)) and not isinstance(val, bool))
        elif typ is int:
            ok = isinstance(val, int) and not isinstance(val, bool)
        else:
            ok = isinstance(val, typ)
        if not ok:
            raise ValueError(f"{kind} report field {key!r} has type {type(val).__name__}")
    return kind


def validation_report(v) -> dict:
    return wrap("validation", v.to_dict())


def spectrum_report(sd) -> dict:
    from .spectral import classify_paths

    return wrap("spectrum", {
        "dim": sd.dim,
        "eigenvalues": [complex_to_json(z) for z in sd.eigenvalues],
        "clusters": [{"value": complex_to_json(mean), "multiplicity": int(len(idx)), "jordan_defect": int(dfx)}
                     for (mean, idx), dfx in zip(sd.clusters, sd.jordan_defects)],
        "kernel_dim": sd.kernel_dim(),
        "gap": _num(sd.gap()),
        "paths": [p.value for p in classify_paths(sd)],
    })


def structure_report(rep) -> dict:
    st = rep.stationary
    return wrap("structure", {
        "dim": rep.dim,
        "p0": matrix_to_json(rep.p0),
        "levels": [[{"rank": b.rank, "projector": matrix_to_json(b.projector)} for b in lev] for lev in rep.levels],
        "intertwiners": [{"i": it.i, "j": it.j, "energy_shift": it.energy_shift,
                          "eigenvalue": complex_to_json(it.eigenvalue), "defect": it.defect,
                          "u": matrix_to_json(it.u)} for it in rep.intertwiners],
        "dephasing_classes": [{"members": list(c.members), "energies": [float(e) for e in c.energies],
                               "inner_dim": c.inner_dim, "consistency_defect": c.consistency_defect}
                              for c in rep.dephasing_classes],
        "commutant_dim": rep.commutant_dim,
        "restricted_commutant_dim": rep.restricted_commutant_dim,
        "enclosures": [matrix_to_json(p) for p in rep.enclosure_projectors],
        "stationary": {
            "states": [matrix_to_json(x) for x in st.basis_states],
            "phase_relations": [matrix_to_json(x) for x in st.phase_relations],
            "phase_pairs": [list(p) for p in st.phase_pairs],
            "invariant_observables": [matrix_to_json(a) for a in st.invariant_observables],
            "split_defect": st.split_defect,
        },
        "defects": {k: _num(v) for k, v in rep.defects.items()},
        "warnings": list(rep.warnings),
    })


def trajectory_report(traj) -> dict:
    from .dynamics import trajectory_to_json

    return wrap("trajectory", trajectory_to_json(traj))


def asymptotics_report(form) -> dict:
    return wrap("asymptotics", {
        "dim": form.dim,
        "classes": [{"weight": c.weight, "members": list(c.members),
                     "relations": matrix_to_json(c.relations),
                     "energies": [float(np.real(x)) for x in np.diag(c.hamiltonian)],
                     "inner_state": matrix_to_json(c.inner_state)} for c in form.classes],
        "decomposition_defect": form.decomposition_defect,
        "check_time": form.check_time,
        "check_residual": form.check_residual,
    })


def series_report(series) -> dict:
    from .perturbation import series_to_json

    return wrap("series", series_to_json(series))


def corpus_report(report) -> dict:
    return wrap("corpus", {
        "passed": report.passed,
        "fixtures": [{"name": r.name, "passed": r.passed, "error": r.error,
                      "checks": [{"key": c.key, "passed": c.passed, "defect": _num(c.defect),
                                  "tol": c.tol, "detail": c.detail} for c in r.checks]}
                     for r in report.results],
    })
