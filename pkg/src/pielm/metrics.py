"""Error metrics against oracle fields and the run report structure."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from pielm.oracles import OracleField


class MetricError(ValueError):
    """Probe points fall outside the oracle grid."""


def rmse(pred, ref) -> float:
    pred = np.asarray(pred, dtype=float)
    ref = np.asarray(ref, dtype=float)
    return float(np.sqrt(np.mean((pred - ref) ** 2)))


def relative_l2(pred, ref) -> float:
    pred = np.asarray(pred, dtype=float)
    ref = np.asarray(ref, dtype=float)
    denom = np.linalg.norm(ref)
    return float(np.linalg.norm(pred - ref) / max(denom, np.finfo(float).eps))


def interpolate_oracle(oracle: OracleField, name: str, points) -> np.ndarray:
    """Bilinear interpolation of an oracle field onto probe points (x, y)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if (
        pts[:, 0].min() < oracle.x[0] - 1e-12
        or pts[:, 0].max() > oracle.x[-1] + 1e-12
        or pts[:, 1].min() < oracle.y[0] - 1e-12
        or pts[:, 1].max() > oracle.y[-1] + 1e-12
    ):
        raise MetricError("probe points outside the oracle grid")
    interp = RegularGridInterpolator(
        (oracle.y, oracle.x), oracle.values[name], method="linear"
    )
    return interp(np.column_stack([pts[:, 1], pts[:, 0]]))


def compare_to_oracle(pred: dict, oracle: OracleField, points) -> dict:
    """Per-field RMSE and relative L2 of predictions against the oracle.

    ``pred`` maps field names (must exist in the oracle) to values at the
    probe points.
    """
    out = {}
    for name, values in pred.items():
        ref = interpolate_oracle(oracle, name, points)
        out[name] = {"rmse": rmse(values, ref), "relative_l2": relative_l2(values, ref)}
    return out


@dataclass
class MetricsReport:
    """Structured result of a case run.

    ``wall_clock`` is volatile and serialized separately so the metrics file
    is byte-identical across re-runs with the same config and seed.
    """

    case: str
    seed: int
    field_errors: dict = field(default_factory=dict)
    scalars: dict = field(default_factory=dict)
    centerlines: dict = field(default_factory=dict)
    lsq_summary: dict = field(default_factory=dict)
    wall_clock: dict = field(default_factory=dict)

    def validate(self) -> None:
        for name, errors in self.field_errors.items():
            for metric, value in errors.items():
                if not np.isfinite(value):
                    raise ValueError(f"non-finite metric {name}.{metric}")
                if metric == "rmse" and value < 0:
                    raise ValueError(f"negative RMSE for {name}")
        for name, value in self.scalars.items():
            if isinstance(value, float) and not np.isfinite(value):
                raise ValueError(f"non-finite scalar metric {name}")

    def metrics_json(self) -> str:
        """Deterministic serialization (excludes wall-clock timings)."""
        self.validate()
        payload = {
            "case": self.case,
            "seed": self.seed,
            "field_errors": self.field_errors,
            "scalars": self.scalars,
            "centerlines": self.centerlines,
            "lsq_summary": self.lsq_summary,
        }
        return json.dumps(payload, sort_keys=True, indent=2, default=_jsonify)

    def timing_json(self) -> str:
        return json.dumps({"wall_clock": self.wall_clock}, sort_keys=True, indent=2, default=_jsonify)


def _jsonify(obj):
    if isinstance(obj, np.ndarray):
        return [float(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(f"cannot serialize {type(obj).__name__}")
