"""Sampled curve container with CSV/JSON serialization.

A CurveTable is one sampled function (height density or exceedance) together
with the geometry, dimension and shape parameters that produced it.  CSV
output is the two-column `x,value` format with shortest-round-trip float
formatting, so files re-read to the exact binary values.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from . import euclid, sphere


@dataclass
class CurveTable:
    geometry: str            # "euclidean" | "sphere"
    dim: int
    params: dict
    xs: np.ndarray
    values: np.ndarray
    kind: str                # "density" | "exceedance"
    validity: str = "proved"
    label: str = ""

    def __post_init__(self):
        self.xs = np.asarray(self.xs, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.geometry not in ("euclidean", "sphere"):
            raise DomainError(f"unknown geometry {self.geometry!r}")
        if self.kind not in ("density", "exceedance"):
            raise DomainError(f"unknown curve kind {self.kind!r}")
        if self.xs.ndim != 1 or self.xs.shape != self.values.shape:
            raise DomainError("xs and values must be 1-D and the same length")
        if np.any(np.diff(self.xs) <= 0.0):
            raise DomainError("xs must be strictly increasing")
        if self.kind == "density" and np.any(self.values < -1e-12):
            raise DomainError("density values must be nonnegative")
        if self.kind == "exceedance":
            if np.any(self.values < -1e-12) or np.any(self.values > 1.0 + 1e-12):
                raise DomainError("exceedance values must lie in [0, 1]")
            if np.any(np.diff(self.values) > 1e-12):
                raise DomainError("exceedance values must be nonincreasing")

    def to_csv(self, stream):
        stream.write("x,value\n")
        for x, v in zip(self.xs.tolist(), self.values.tolist()):
            stream.write(f"{x!r},{v!r}\n")

    def to_json_dict(self) -> dict:
        out = {
            "geometry": self.geometry,
            "dim": self.dim,
            "params": {k: float(v) for k, v in sorted(self.params.items())},
            "kind": self.kind,
            "validity": self.validity,
            "xs": [float(v) for v in self.xs],
            "values": [float(v) for v in self.values],
        }
        return out

    def to_json(self, stream):
        json.dump(self.to_json_dict(), stream, indent=2, sort_keys=True)
        stream.write("\n")


def grid_from_range(start: float, stop: float, step: float) -> np.ndarray:
    if not (step > 0.0) or not math.isfinite(step):
        raise DomainError(f"step must be positive, got {step}")
    if not (stop > start):
        raise DomainError(f"need stop > start, got {start}..{stop}")
    count = int(round((stop - start) / step))
    xs = start + step * np.arange(count + 1)
    return xs[xs <= stop + 1e-12 * max(1.0, abs(stop))]


def euclidean_curve(dim: int, model: euclid.EuclideanModel, xs, kind: str) -> CurveTable:
    if kind == "density":
        values = euclid.height_density(model, xs)
    else:
        values = euclid.exceedance_curve(model, xs)
    return CurveTable(
        geometry="euclidean",
        dim=dim,
        params={"kappa": model.kappa, "rho1": model.rho1, "rho2": model.rho2},
        xs=xs,
        values=values,
        kind=kind,
        validity=model.validity,
        label=f"N={dim}, kappa={model.kappa:g}",
    )


def sphere_curve(dim: int, model: sphere.SphereModel, xs, kind: str) -> CurveTable:
    if kind == "density":
        values = sphere.height_density(model, xs)
    else:
        values = sphere.exceedance_curve(model, xs)
    return CurveTable(
        geometry="sphere",
        dim=dim,
        params={"kappa1": model.kappa1, "kappa2": model.kappa2, "c1": model.c1, "c2": model.c2},
        xs=xs,
        values=values,
        kind=kind,
        validity=model.validity,
        label=f"N={dim}, kappa1={model.kappa1:g}, kappa2={model.kappa2:g}",
    )


# Parameter sets behind the two standard curve-sweep presets.
PRESET_FIG1 = [(dim, kappa) for dim in (1, 2, 3) for kappa in (1.0, 0.5, 0.1)]
PRESET_FIG2 = [(dim, k1, k2) for dim in (1, 2, 3) for (k1, k2) in ((1.0, 2.0), (1.0, 1.0), (0.1, 0.1))]


def preset_curves(name: str, kind: str, xs) -> list[CurveTable]:
    if name == "fig1":
        return [
            euclidean_curve(dim, euclid.EuclideanModel.from_kappa(dim, kappa), xs, kind)
            for dim, kappa in PRESET_FIG1
        ]
    if name == "fig2":
        return [
            sphere_curve(dim, sphere.SphereModel.from_kappas(dim, k1, k2), xs, kind)
            for dim, k1, k2 in PRESET_FIG2
        ]
    raise DomainError(f"unknown preset {name!r} (expected fig1 or fig2)")
