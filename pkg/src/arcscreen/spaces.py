"""Finite element spaces: partitions, hat functions, cutoff, and the
endpoint singular enrichment functions d^q * phi(d)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

__all__ = [
    "Partition",
    "build_uniform_partition",
    "cutoff_eta",
    "cutoff_phi",
    "cutoff_phi_prime",
    "EnrichedSpace",
    "prolong",
]


@dataclass(frozen=True)
class Partition:
    """Strictly increasing nodes x_0 < ... < x_N spanning [a, b]."""

    nodes: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        object.__setattr__(self, "nodes", nodes)
        widths = np.diff(nodes)
        if len(nodes) < 2 or np.any(widths <= 0.0):
            raise ValueError("partition nodes must be strictly increasing")
        if widths.max() > 2.0 * widths.min() * (1.0 + 1e-12):
            raise ValueError(
                "partition is not quasi-uniform: max/min element ratio "
                f"{widths.max() / widths.min():.3f} > 2")

    @property
    def a(self) -> float:
        return float(self.nodes[0])

    @property
    def b(self) -> float:
        return float(self.nodes[-1])

    @property
    def n_elements(self) -> int:
        return len(self.nodes) - 1

    @property
    def h(self) -> float:
        return float(np.max(np.diff(self.nodes)))

    @property
    def is_uniform(self) -> bool:
        w = np.diff(self.nodes)
        return bool(np.max(w) - np.min(w) <= 1e-12 * np.max(w))


def build_uniform_partition(domain: Tuple[float, float], N: int) -> Partition:
    """N+1 equispaced nodes on the domain; N >= 4 (enrichment supports
    must fit inside the first/last quarter of the arc)."""
    a, b = float(domain[0]), float(domain[1])
    if N < 4:
        raise ValueError(f"N must be at least 4, got {N}")
    return Partition(np.linspace(a, b, N + 1))


# ---------------------------------------------------------------------------
# cutoff function
# ---------------------------------------------------------------------------

def _bump(t: np.ndarray) -> np.ndarray:
    """exp(-1/t) for t > 0, extended by 0."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0.0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def cutoff_eta(t):
    """eta(t) = b(t) / (b(t) + b(1-t)): smooth ramp, 0 for t<=0, 1 for t>=1."""
    scalar = np.ndim(t) == 0
    t = np.atleast_1d(np.asarray(t, dtype=float))
    bt = _bump(t)
    b1t = _bump(1.0 - t)
    out = np.where(t >= 1.0, 1.0, 0.0)
    mid = (t > 0.0) & (t < 1.0)
    out[mid] = bt[mid] / (bt[mid] + b1t[mid])
    return float(out[0]) if scalar else out


def cutoff_phi(x):
    """Smooth cutoff: phi = 1 for x <= 1/8, phi = 0 for x >= 1/4,
    monotone nonincreasing in between (phi(x) = eta(2 - 8x))."""
    return cutoff_eta(2.0 - 8.0 * np.asarray(x, dtype=float))


def _eta_prime(t: np.ndarray) -> np.ndarray:
    t = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.zeros_like(t)
    mid = (t > 0.0) & (t < 1.0)
    tm = t[mid]
    bt = np.exp(-1.0 / tm)
    b1t = np.exp(-1.0 / (1.0 - tm))
    dbt = bt / tm ** 2
    db1t = b1t / (1.0 - tm) ** 2
    denom = (bt + b1t) ** 2
    out[mid] = (dbt * b1t + bt * db1t) / denom
    return out


def cutoff_phi_prime(x):
    """Analytic derivative of cutoff_phi."""
    scalar = np.ndim(x) == 0
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = -8.0 * _eta_prime(2.0 - 8.0 * x)
    return float(out[0]) if scalar else out


# ---------------------------------------------------------------------------
# enriched space
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EnrichedSpace:
    """Hat functions on a partition, optionally enriched with the two
    endpoint singular functions (c d)^q phi(c d).

    The distance d from the owning endpoint is rescaled by c = 2/(b-a) so
    the cutoff support occupies the same fraction of any domain as it does
    on (-1, 1); the two enrichment supports are disjoint for every domain.
    """

    partition: Partition
    kind: str = "standard"  # "standard" | "enriched"
    q: float = 0.0  # enrichment exponent: 3/2 (U-space) or -1/2 (psi-space)
    left: bool = True
    right: bool = True

    def __post_init__(self):
        if self.kind not in ("standard", "enriched"):
            raise ValueError(f"unknown space kind {self.kind!r}")
        if self.kind == "enriched" and self.q not in (1.5, -0.5):
            raise ValueError("enrichment exponent must be 3/2 or -1/2")

    @property
    def a(self) -> float:
        return self.partition.a

    @property
    def b(self) -> float:
        return self.partition.b

    @property
    def n_hats(self) -> int:
        return self.partition.n_elements + 1

    @property
    def n_singular(self) -> int:
        if self.kind != "enriched":
            return 0
        return int(self.left) + int(self.right)

    @property
    def dim(self) -> int:
        return self.n_hats + self.n_singular

    @property
    def scale(self) -> float:
        """Distance rescaling c = 2/(b-a)."""
        return 2.0 / (self.b - self.a)

    @property
    def support_raw(self) -> float:
        """Raw-distance extent of the enrichment support: c*d < 1/4."""
        return (self.b - self.a) / 8.0

    @property
    def plateau_raw(self) -> float:
        """Raw-distance extent of the cutoff plateau: c*d <= 1/8."""
        return (self.b - self.a) / 16.0

    def singular_sides(self):
        """Enabled singular basis entries as (index, side) pairs."""
        out = []
        idx = self.n_hats
        if self.kind == "enriched":
            if self.left:
                out.append((idx, "left"))
                idx += 1
            if self.right:
                out.append((idx, "right"))
        return out

    # -- evaluation ---------------------------------------------------------

    def _check_domain(self, s: np.ndarray):
        tol = 1e-12 * (self.b - self.a)
        if np.any(s < self.a - tol) or np.any(s > self.b + tol):
            raise ValueError("evaluation point outside the arc domain")

    def _hat(self, i: int, s: np.ndarray, deriv: int) -> np.ndarray:
        nodes = self.partition.nodes
        out = np.zeros_like(s)
        if i > 0:
            x0, x1 = nodes[i - 1], nodes[i]
            m = (s >= x0) & (s <= x1)
            out[m] = (s[m] - x0) / (x1 - x0) if deriv == 0 else 1.0 / (x1 - x0)
        if i < len(nodes) - 1:
            x1, x2 = nodes[i], nodes[i + 1]
            m = (s >= x1 if i == 0 else s > x1) & (s <= x2)
            out[m] = (x2 - s[m]) / (x2 - x1) if deriv == 0 else -1.0 / (x2 - x1)
        return out

    def singular_distance(self, side: str, s: np.ndarray) -> np.ndarray:
        """Raw parameter distance from the owning endpoint."""
        return s - self.a if side == "left" else self.b - s

    def singular_value(self, side: str, s: np.ndarray, deriv: int = 0):
        """Evaluate (c d)^q phi(c d) or its s-derivative at points s."""
        s = np.atleast_1d(np.asarray(s, dtype=float))
        d = self.singular_distance(side, s)
        c = self.scale
        x = c * d
        q = self.q
        if deriv == 0:
            if q < 0.0 and np.any(x <= 0.0):
                raise ValueError(
                    "singular function with negative exponent evaluated at "
                    "its endpoint")
            inside = x < 0.25
            out = np.zeros_like(x)
            xi = x[inside]
            out[inside] = np.where(xi > 0.0, xi, 1.0) ** q * cutoff_phi(xi)
            if q > 0.0:
                out[inside & (x <= 0.0)] = 0.0
            return out
        if q < 0.0:
            raise ValueError(
                "derivative of the exponent -1/2 singular function is not "
                "integrable and is never assembled")
        # d/ds [(c d)^q phi(c d)] = sign * c * [q x^{q-1} phi + x^q phi'](x)
        sign = 1.0 if side == "left" else -1.0
        inside = (x > 0.0) & (x < 0.25)
        out = np.zeros_like(x)
        xi = x[inside]
        out[inside] = sign * c * (q * xi ** (q - 1.0) * cutoff_phi(xi)
                                  + xi ** q * cutoff_phi_prime(xi))
        return out

    def eval_basis(self, index: int, s, derivative_order: int = 0):
        """Evaluate basis function `index` (hats first, then left/right
        singular) or its first derivative at points s."""
        if derivative_order not in (0, 1):
            raise ValueError("derivative_order must be 0 or 1")
        s_arr = np.atleast_1d(np.asarray(s, dtype=float))
        self._check_domain(s_arr)
        if not 0 <= index < self.dim:
            raise IndexError(f"basis index {index} out of range for dim {self.dim}")
        if index < self.n_hats:
            out = self._hat(index, s_arr, derivative_order)
        else:
            side = dict(self.singular_sides())[index]
            out = self.singular_value(side, s_arr, derivative_order)
        return out if np.ndim(s) else float(out[0])

    def eval_function(self, coeffs: np.ndarray, s, derivative_order: int = 0):
        """Evaluate the function represented by `coeffs` at points s."""
        coeffs = np.asarray(coeffs, dtype=float)
        if len(coeffs) != self.dim:
            raise ValueError("coefficient vector has wrong length")
        s_arr = np.atleast_1d(np.asarray(s, dtype=float))
        self._check_domain(s_arr)
        nodes = self.partition.nodes
        if derivative_order == 0:
            out = np.interp(s_arr, nodes, coeffs[: self.n_hats])
        else:
            slopes = np.diff(coeffs[: self.n_hats]) / np.diff(nodes)
            idx = np.clip(np.searchsorted(nodes, s_arr, side="right") - 1,
                          0, len(slopes) - 1)
            out = slopes[idx]
        for idx, side in self.singular_sides():
            if coeffs[idx] != 0.0:
                out = out + coeffs[idx] * self.singular_value(
                    side, s_arr, derivative_order)
        return out if np.ndim(s) else float(out[0])


def prolong(coarse_space: EnrichedSpace, coeffs: np.ndarray,
            fine_space: EnrichedSpace) -> np.ndarray:
    """Coefficients of the same function on the nested (halved) fine mesh.

    Hat coefficients are nodally interpolated (exact for piecewise linear
    on nested meshes); singular coefficients are copied unchanged since the
    enrichment functions do not depend on the mesh.
    """
    if (coarse_space.kind, coarse_space.q, coarse_space.left,
            coarse_space.right) != (fine_space.kind, fine_space.q,
                                    fine_space.left, fine_space.right):
        raise ValueError("prolongation requires identical space structure")
    cn = coarse_space.partition.nodes
    fn = fine_space.partition.nodes
    if len(fn) != 2 * len(cn) - 1 or np.max(np.abs(fn[::2] - cn)) > 1e-12 * (
            cn[-1] - cn[0]):
        raise ValueError("fine partition is not the nested refinement of "
                         "the coarse partition")
    coeffs = np.asarray(coeffs, dtype=float)
    out = np.empty(fine_space.dim)
    nc = coarse_space.n_hats
    out[: fine_space.n_hats : 2] = coeffs[:nc]
    out[1: fine_space.n_hats : 2] = 0.5 * (coeffs[: nc - 1] + coeffs[1:nc])
    out[fine_space.n_hats:] = coeffs[nc:]
    return out
