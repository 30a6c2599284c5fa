"""Temperature sweeps of the rate ratio, seeded noise, and curve I/O.

Curves are exchanged as CSV (``t,gamma_ratio`` columns) or JSON
(``{"metadata": ..., "samples": [[t, ratio], ...]}``). Both render floats
with Python's shortest round-trip ``repr`` so export/import is lossless and
byte-reproducible.

Noise uses NumPy's PCG64 bit generator seeded with the given integer and
draws standard normals in index order.
"""

from __future__ import annotations

import csv
import dataclasses
import enum
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .physics import (
    ALPHA_DEFAULT,
    BrokenPhaseLaw,
    PhaseScenario,
    PhysicalConstants,
    SymmetricPhaseLaw,
    gamma_ratio,
    gamma_ratio_higgs,
    gap_temperature,
    mass_ratio,
    pole_location,
)

__all__ = [
    "TemperatureGrid",
    "RateCurve",
    "NoiseSpec",
    "linear_grid",
    "scenario_grid",
    "sweep_broken",
    "sweep_full",
    "add_noise",
    "gap_edge",
    "export_curve",
    "import_curve",
    "write_curve",
    "read_curve",
    "fig2_curves",
    "fig4_scenario",
    "fig4_grid",
    "summarize",
    "POLE_MARGIN",
]

POLE_MARGIN = 1.05


@dataclass(frozen=True)
class TemperatureGrid:
    """Strictly monotone reduced temperatures, never containing ``t = 0``."""

    points: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.points, dtype=float).copy()
        p.setflags(write=False)
        object.__setattr__(self, "points", p)
        if p.ndim != 1:
            raise ValueError("grid must be one-dimensional")
        if not np.all(np.isfinite(p)):
            raise ValueError("grid points must be finite")
        if np.any(p == 0):
            raise ValueError("grid must exclude the critical point t = 0")
        if p.size > 1:
            d = np.diff(p)
            if not (np.all(d > 0) or np.all(d < 0)):
                raise ValueError("grid must be strictly monotone")

    def __len__(self):
        return self.points.size

    def __iter__(self):
        return iter(self.points.tolist())


def linear_grid(start: float, stop: float, num: int) -> TemperatureGrid:
    return TemperatureGrid(np.linspace(start, stop, int(num)))


def scenario_grid(
    scenario: PhaseScenario,
    n_broken: int = 200,
    n_symmetric: int = 200,
    t_max_broken: float = 1.0,
    t_max_symmetric: float = 1.0,
    t_min_broken: float = 1e-3,
) -> TemperatureGrid:
    """Increasing grid over both phases.

    The symmetric side is log-spaced and starts at ``1.05 |t*|`` so default
    runs stay clear of the pole guard.
    """
    tstar = pole_location(scenario.symmetric, scenario.constants.alpha)
    sym_lo = max(POLE_MARGIN * tstar, 1e-12)
    if sym_lo >= t_max_symmetric:
        raise ValueError(
            f"pole window |t| < {sym_lo:.6g} swallows the symmetric range up to {t_max_symmetric}"
        )
    sym = -np.geomspace(t_max_symmetric, sym_lo, n_symmetric)
    brk = np.linspace(t_min_broken, t_max_broken, n_broken)
    return TemperatureGrid(np.concatenate([sym, brk]))


def _jsonable(obj):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: _jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


@dataclass(eq=False)
class RateCurve:
    """Sampled ``(t, Gamma/Gamma0)`` pairs plus free-form metadata."""

    t: np.ndarray
    ratio: np.ndarray
    metadata: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float).reshape(-1)
        self.ratio = np.asarray(self.ratio, dtype=float).reshape(-1)
        if self.t.shape != self.ratio.shape:
            raise ValueError("t and ratio must have the same length")
        if not (np.all(np.isfinite(self.t)) and np.all(np.isfinite(self.ratio))):
            raise ValueError("curve samples must be finite")
        if np.any(self.ratio < 0):
            raise ValueError("rate ratios must be >= 0")
        self.metadata = _jsonable(dict(self.metadata))

    def __len__(self):
        return self.t.size

    def __eq__(self, other):
        if not isinstance(other, RateCurve):
            return NotImplemented
        return (
            np.array_equal(self.t, other.t)
            and np.array_equal(self.ratio, other.ratio)
            and self.metadata == other.metadata
        )

    @property
    def samples(self) -> list[tuple[float, float]]:
        return list(zip(self.t.tolist(), self.ratio.tolist()))

    def broken(self) -> "RateCurve":
        """Sub-curve with ``t > 0``."""
        m = self.t > 0
        return RateCurve(self.t[m], self.ratio[m], self.metadata)

    def symmetric(self) -> "RateCurve":
        """Sub-curve with ``t < 0``."""
        m = self.t < 0
        return RateCurve(self.t[m], self.ratio[m], self.metadata)


@dataclass(frozen=True)
class NoiseSpec:
    sigma_rel: float
    seed: int = 0
    floor_at_zero: bool = True

    def __post_init__(self):
        if not self.sigma_rel >= 0:
            raise ValueError(f"sigma_rel must be >= 0, got {self.sigma_rel!r}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


def sweep_broken(grid: TemperatureGrid | Sequence[float], law: BrokenPhaseLaw) -> RateCurve:
    """Broken-phase rate ratio at every grid point (all ``t > 0``)."""
    ts = np.asarray(getattr(grid, "points", grid), dtype=float)
    ratios = [gamma_ratio_higgs(mass_ratio(t, law)) for t in ts.tolist()]
    meta = {"phase": "broken", "broken": law}
    return RateCurve(ts, ratios, meta)


def sweep_full(grid: TemperatureGrid | Sequence[float], scenario: PhaseScenario) -> RateCurve:
    """Rate ratio across both phases; raises ``PoleReached`` inside the guard."""
    ts = np.asarray(getattr(grid, "points", grid), dtype=float)
    ratios = [gamma_ratio(t, scenario) for t in ts.tolist()]
    meta = {
        "phase": "both",
        "broken": scenario.broken,
        "symmetric": scenario.symmetric,
        "alpha": scenario.constants.alpha,
        "pole_t": -pole_location(scenario.symmetric, scenario.constants.alpha),
    }
    tg = gap_temperature(scenario.broken)
    if tg is not None:
        meta["gap_t"] = tg
    return RateCurve(ts, ratios, meta)


def add_noise(curve: RateCurve, noise: NoiseSpec) -> RateCurve:
    """Multiplicative Gaussian noise ``r * (1 + sigma * g)``, deterministic in the seed."""
    if noise.sigma_rel == 0:
        return RateCurve(curve.t.copy(), curve.ratio.copy(), curve.metadata)
    rng = np.random.Generator(np.random.PCG64(int(noise.seed)))
    g = rng.standard_normal(len(curve))
    noisy = curve.ratio * (1.0 + noise.sigma_rel * g)
    if noise.floor_at_zero:
        noisy = np.maximum(noisy, 0.0)
    else:
        # negative rates are unphysical; refuse instead of silently clipping
        if np.any(noisy < 0):
            raise ValueError("noise drove a rate negative; use floor_at_zero")
    meta = dict(curve.metadata)
    meta["noise"] = noise
    return RateCurve(curve.t.copy(), noisy, meta)


def gap_edge(curve: RateCurve) -> float | None:
    """Smallest ``t > 0`` where the sampled ratio is exactly zero."""
    m = (curve.t > 0) & (curve.ratio == 0)
    if not np.any(m):
        return None
    return float(curve.t[m].min())


# --- serialization -----------------------------------------------------------

def _to_csv(curve: RateCurve) -> str:
    lines = ["t,gamma_ratio"]
    lines.extend(f"{t!r},{r!r}" for t, r in curve.samples)
    return "\n".join(lines) + "\n"


def _to_json(curve: RateCurve) -> str:
    doc = {"metadata": curve.metadata, "samples": [[t, r] for t, r in curve.samples]}
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), allow_nan=False) + "\n"


def export_curve(curve: RateCurve, fmt: str = "csv") -> bytes:
    """Serialize to UTF-8 bytes; CSV carries samples only, JSON also metadata."""
    fmt = fmt.lower()
    if fmt == "csv":
        return _to_csv(curve).encode("utf-8")
    if fmt == "json":
        return _to_json(curve).encode("utf-8")
    raise ValueError(f"unknown curve format {fmt!r}")


def import_curve(data: bytes | str, fmt: str = "csv") -> RateCurve:
    """Inverse of :func:`export_curve`. Raises ``ValueError`` on malformed input."""
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    fmt = fmt.lower()
    if fmt == "csv":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows:
            raise ValueError("empty CSV: missing header")
        header = [h.strip() for h in rows[0]]
        if header[:2] != ["t", "gamma_ratio"]:
            raise ValueError(f"unexpected CSV header {rows[0]!r}")
        body = [r for r in rows[1:] if r]
        try:
            t = [float(r[0]) for r in body]
            ratio = [float(r[1]) for r in body]
        except (IndexError, ValueError) as exc:
            raise ValueError(f"malformed CSV row: {exc}") from exc
        return RateCurve(t, ratio)
    if fmt == "json":
        try:
            doc = json.loads(text)
            samples = doc["samples"]
            meta = doc.get("metadata", {})
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise ValueError(f"malformed curve JSON: {exc}") from exc
        t = [float(s[0]) for s in samples]
        ratio = [float(s[1]) for s in samples]
        return RateCurve(t, ratio, meta)
    raise ValueError(f"unknown curve format {fmt!r}")


def _fmt_from_path(path) -> str:
    suffix = Path(path).suffix.lower().lstrip(".")
    if suffix not in ("csv", "json"):
        raise ValueError(f"cannot infer curve format from {str(path)!r}")
    return suffix


def write_curve(curve: RateCurve, path, fmt: str | None = None) -> None:
    Path(path).write_bytes(export_curve(curve, fmt or _fmt_from_path(path)))


def read_curve(path, fmt: str | None = None) -> RateCurve:
    return import_curve(Path(path).read_bytes(), fmt or _fmt_from_path(path))


# --- figure presets ----------------------------------------------------------

FIG2_BETAS = {"1/2": 0.5, "1/4": 0.25, "1/8": 0.125}


def fig2_curves(x0: float = 1.0, num: int = 99) -> dict[str, RateCurve]:
    """Broken-phase curves for the three textbook exponents on ``t in [0.01, 0.99]``.

    ``x0 = 1`` is an illustrative amplitude, not a measured one.
    """
    grid = linear_grid(0.01, 0.99, num)
    return {label: sweep_broken(grid, BrokenPhaseLaw(x0, beta)) for label, beta in FIG2_BETAS.items()}


def fig4_scenario(alpha: float = ALPHA_DEFAULT) -> PhaseScenario:
    """Mean-field mass law with ``x0 = 2`` and ``xi = xi0 exp(10/|t|)``.

    ``x0 = 2`` is chosen so the zero-emission window (``t >= 1/4``) shows up.
    """
    return PhaseScenario(
        broken=BrokenPhaseLaw(x0=2.0, beta=0.5),
        symmetric=SymmetricPhaseLaw.exponential(delta=10.0),
        constants=PhysicalConstants(alpha=alpha),
    )


def fig4_grid(scenario: PhaseScenario | None = None, n: int = 200) -> TemperatureGrid:
    return scenario_grid(scenario or fig4_scenario(), n_broken=n, n_symmetric=n)


def summarize(curve: RateCurve) -> dict[str, Any]:
    """Counts, gap edge and pole location for console summaries."""
    out = {
        "points": len(curve),
        "broken_points": int(np.sum(curve.t > 0)),
        "symmetric_points": int(np.sum(curve.t < 0)),
        "gap_edge_t": gap_edge(curve),
    }
    if "pole_t" in curve.metadata:
        out["pole_t"] = curve.metadata["pole_t"]
    if "gap_t" in curve.metadata:
        out["gap_t"] = curve.metadata["gap_t"]
    if len(curve):
        out["ratio_min"] = float(curve.ratio.min())
        out["ratio_max"] = float(curve.ratio.max())
    return {k: (None if isinstance(v, float) and not math.isfinite(v) else v) for k, v in out.items()}
