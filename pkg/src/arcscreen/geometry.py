"""Open-arc geometry: arclength parameterizations and validity checks."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

__all__ = [
    "GeometryError",
    "ArcParameterization",
    "make_segment",
    "make_semicircle",
    "arc_chord_constant",
]

_VALIDATION_GRID = 2048
_UNIT_SPEED_TOL = 1e-10
_DEGENERATE_TOL = 1e-8


class GeometryError(ValueError):
    """Invalid arc geometry (not unit speed, self-intersecting, or cuspy)."""


@dataclass(frozen=True)
class ArcParameterization:
    """Smooth arclength map X: [a, b] -> R^2 describing an open arc.

    `position` and `tangent` must be vectorized: given s of shape (n,),
    they return arrays of shape (n, 2).  `chord_ratio`, if supplied, is a
    numerically stable evaluation of |X(s) - X(t)| / |s - t| (used by the
    kernel splitting; a generic fallback from positions is used otherwise).
    `flat` marks arcs whose chord ratio is identically 1 (straight lines),
    for which the smooth remainder kernel vanishes exactly.
    """

    name: str
    a: float
    b: float
    position: Callable[[np.ndarray], np.ndarray]
    tangent: Callable[[np.ndarray], np.ndarray]
    chord_ratio: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None
    flat: bool = False
    strict: bool = field(default=True, repr=False)

    def __post_init__(self):
        if not self.b > self.a:
            raise GeometryError("arc domain must satisfy a < b")
        if self.strict:
            grid = np.linspace(self.a, self.b, _VALIDATION_GRID)
            speed = np.linalg.norm(self.tangent(grid), axis=-1)
            worst = float(np.max(np.abs(speed - 1.0)))
            if worst > _UNIT_SPEED_TOL:
                raise GeometryError(
                    f"arc '{self.name}' is not arclength-parameterized: "
                    f"max ||X'(s)| - 1| = {worst:.3e}")
            _min_chord_ratio(self, grid)  # raises on degenerate geometry

    @property
    def length(self) -> float:
        return self.b - self.a

    def chord_over_param(self, s: np.ndarray, t: np.ndarray) -> np.ndarray:
        """|X(s) - X(t)| / |s - t|, stable near (and defined on) the diagonal."""
        s = np.asarray(s, dtype=float)
        t = np.asarray(t, dtype=float)
        if self.chord_ratio is not None:
            return self.chord_ratio(s, t)
        s, t = np.broadcast_arrays(s, t)
        d = np.abs(s - t)
        chord = np.linalg.norm(self.position(s) - self.position(t), axis=-1)
        tiny = d < 1e-13 * self.length
        # unit speed: the ratio tends to 1 on the diagonal
        return np.where(tiny, 1.0, chord / np.where(tiny, 1.0, d))


def _min_chord_ratio(arc: ArcParameterization, grid: np.ndarray) -> float:
    pts = arc.position(grid)
    n = len(grid)
    best = np.inf
    chunk = 256
    for i0 in range(0, n, chunk):
        i1 = min(i0 + chunk, n)
        dx = pts[i0:i1, None, :] - pts[None, :, :]
        ds = np.abs(grid[i0:i1, None] - grid[None, :])
        with np.errstate(invalid="ignore", divide="ignore"):
            ratio = np.linalg.norm(dx, axis=-1) / ds
        ratio[~np.isfinite(ratio)] = np.inf
        best = min(best, float(ratio.min()))
    if best < _DEGENERATE_TOL:
        raise GeometryError(
            f"degenerate geometry: arc '{arc.name}' has arc-chord constant "
            f"{best:.3e} < {_DEGENERATE_TOL:g} (self-intersection or cusp)")
    return best


def arc_chord_constant(arc: ArcParameterization, n_samples: int) -> float:
    """min over sampled s != t of |X(s) - X(t)| / |s - t|.

    A lower-bound estimator of the arc-chord constant; raises GeometryError
    if the sampled minimum indicates degenerate geometry.
    """
    if n_samples < 2:
        raise ValueError("n_samples must be at least 2")
    grid = np.linspace(arc.a, arc.b, n_samples)
    return _min_chord_ratio(arc, grid)


def make_segment() -> ArcParameterization:
    """The straight segment {(s, 0) : s in (-1, 1)}."""

    def position(s):
        s = np.asarray(s, dtype=float)
        return np.stack([s, np.zeros_like(s)], axis=-1)

    def tangent(s):
        s = np.asarray(s, dtype=float)
        return np.stack([np.ones_like(s), np.zeros_like(s)], axis=-1)

    return ArcParameterization(
        name="segment", a=-1.0, b=1.0, position=position, tangent=tangent,
        chord_ratio=lambda s, t: np.ones(np.broadcast(s, t).shape),
        flat=True)


def make_semicircle() -> ArcParameterization:
    """The semicircle {(cos s, sin s) : s in (0, pi)}."""

    def position(s):
        s = np.asarray(s, dtype=float)
        return np.stack([np.cos(s), np.sin(s)], axis=-1)

    def tangent(s):
        s = np.asarray(s, dtype=float)
        return np.stack([-np.sin(s), np.cos(s)], axis=-1)

    def chord_ratio(s, t):
        # |X(s)-X(t)| = 2|sin((s-t)/2)|, so the ratio is sinc((s-t)/(2 pi))
        u = np.asarray(s, dtype=float) - np.asarray(t, dtype=float)
        return np.abs(np.sinc(u / (2.0 * np.pi)))

    return ArcParameterization(
        name="semicircle", a=0.0, b=np.pi, position=position, tangent=tangent,
        chord_ratio=chord_ratio)
