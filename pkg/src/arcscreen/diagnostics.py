"""Convergence studies, compatibility checks, exponent fits, and
independent analytic oracles that validate the assembled operators."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple

import numpy as np

from arcscreen.assembly import ProblemSpec
from arcscreen.quadrature import (
    HALF_INV_2PI,
    _gauss_1d,
    adaptive_integrate,
    int_log_weight,
)
from arcscreen.solver import Solution
from arcscreen.spaces import cutoff_phi, prolong

__all__ = [
    "ConvergenceRecord",
    "convergence_table",
    "write_convergence_csv",
    "read_convergence_csv",
    "energy_norm_diff",
    "compatibility_residual",
    "fit_edge_exponent",
    "chebyshev_oracle_check",
    "fourier_multiplier_check",
]


@dataclass(frozen=True)
class ConvergenceRecord:
    """One refinement level: element count, energy-norm difference to the
    next coarser level, and the successive convergence order (absent at the
    first level; rounded to 2 decimals)."""

    N: int
    error: float
    order: Optional[float] = None


def convergence_table(levels: Sequence[Tuple[int, float]]) -> List[ConvergenceRecord]:
    """Fill convergence orders log2(error_coarse / error_fine) for a
    sequence of (N, error) pairs ordered coarse to fine."""
    if len(levels) < 1:
        raise ValueError("convergence table needs at least one level")
    records = []
    prev_err = None
    for N, err in levels:
        if not err > 0.0:
            raise ValueError(f"errors must be strictly positive, got {err}")
        order = None
        if prev_err is not None:
            order = round(float(np.log2(prev_err / err)), 2)
        records.append(ConvergenceRecord(N=int(N), error=float(err), order=order))
        prev_err = err
    return records


def write_convergence_csv(records: Sequence[ConvergenceRecord], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["N", "error", "order"])
        for r in records:
            w.writerow([r.N, f"{r.error:.12e}",
                        "" if r.order is None else f"{r.order:.2f}"])


def read_convergence_csv(path) -> List[ConvergenceRecord]:
    out = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            order = row["order"]
            out.append(ConvergenceRecord(
                N=int(row["N"]), error=float(row["error"]),
                order=None if order == "" else float(order)))
    return out


def energy_norm_diff(fine: Solution, coarse: Solution) -> float:
    """Energy-norm difference |u_fine - u_coarse|_a on nested meshes.

    The coarse solution is prolonged exactly to the fine mesh; for the
    coefficient difference e the cross terms of a(e, e) cancel, leaving the
    symmetric quadratic form e_U' A e_U + e_psi' V e_psi in the fine-mesh
    blocks.
    """
    fsys = fine.system
    csys = coarse.system
    if csys.spec.method != fsys.spec.method:
        raise ValueError("energy_norm_diff requires the same method on both levels")
    eU = prolong(csys.u_space, coarse.U, fsys.u_space) - fine.U
    ep = prolong(csys.psi_space, coarse.psi, fsys.psi_space) - fine.psi
    val = float(eU @ (fsys.A @ eU) + ep @ (fsys.V @ ep))
    if val < -1e-10:
        raise RuntimeError(
            f"energy quadratic form is negative ({val:.3e}); the assembled "
            "blocks are inconsistent")
    return float(np.sqrt(max(val, 0.0)))


@lru_cache(maxsize=None)
def _psi_sing_integral(a: float, b: float) -> float:
    """∫ of the psi enrichment factor (c d)^{-1/2} phi(c d) over its support,
    computed once by the adaptive oracle in sqrt-distance coordinates."""
    c = 2.0 / (b - a)
    st = np.sqrt((b - a) / 8.0)
    return adaptive_integrate(
        lambda sig: 2.0 * c ** -0.5 * cutoff_phi(c * sig ** 2), 0.0, st,
        tol=1e-13)


def compatibility_residual(sol: Solution, spec: ProblemSpec) -> float:
    """∫ psi_h ds − (∫ f ds + g_L + g_R).

    Vanishes to solver precision by the Galerkin identity with test
    function (1, 0): constants lie in the U test space.
    """
    space = sol.system.psi_space
    nodes = space.partition.nodes
    w = np.zeros(space.n_hats)
    h = np.diff(nodes)
    w[:-1] += 0.5 * h
    w[1:] += 0.5 * h
    total = float(w @ sol.psi[: space.n_hats])
    if space.n_singular:
        sing_int = _psi_sing_integral(space.a, space.b)
        for idx, _ in space.singular_sides():
            total += sol.psi[idx] * sing_int
    return total - spec.compatibility_target


def fit_edge_exponent(sol: Solution, endpoint: str, field: str,
                      window: Optional[Tuple[float, float]] = None,
                      n_samples: int = 32) -> float:
    """Least-squares slope of log|value| vs log(distance) near an endpoint.

    For psi the value is the density itself; for U it is the deviation from
    the endpoint nodal value of the hat part.  The default window is
    (h, 1/16) in parameter units, inside the cutoff plateau and above the
    mesh scale.
    """
    if endpoint not in ("left", "right"):
        raise ValueError("endpoint must be 'left' or 'right'")
    if field not in ("U", "psi"):
        raise ValueError("field must be 'U' or 'psi'")
    system = sol.system
    space = system.u_space if field == "U" else system.psi_space
    if window is None:
        window = (space.partition.h, 1.0 / 16.0)
    d_min, d_max = window
    if not 0.0 < d_min < d_max:
        raise ValueError("window must satisfy 0 < d_min < d_max")
    if d_max > space.plateau_raw * (1.0 + 1e-12):
        raise ValueError(
            f"window upper edge {d_max:g} exceeds the cutoff plateau "
            f"{space.plateau_raw:g}; the fit would see the cutoff decay")
    d = np.geomspace(d_min, d_max, n_samples)
    s = space.a + d if endpoint == "left" else space.b - d
    if field == "psi":
        vals = sol.eval_psi(s)
    else:
        limit = sol.U[0] if endpoint == "left" else sol.U[space.n_hats - 1]
        vals = sol.eval_U(s) - limit
    amax = float(np.max(np.abs(vals)))
    if amax < 1e-12:
        raise ValueError(
            f"field {field} has magnitude {amax:.2e} < 1e-12 in the window; "
            "no singular content to fit")
    mask = np.abs(vals) > 0.0
    slope = np.polyfit(np.log(d[mask]), np.log(np.abs(vals[mask])), 1)[0]
    return float(slope)


def _smooth_panels_integral(f, a: float, b: float, n_panels: int = 12,
                            order: int = 24) -> float:
    edges = np.linspace(a, b, n_panels + 1)
    return sum(_gauss_1d(f, edges[i], edges[i + 1], order)
               for i in range(n_panels))


def chebyshev_oracle_check(n_points: int = 50) -> float:
    """Max deviation of (V_S rho)(s) from (log 2)/2 on the segment for the
    density rho(t) = (1 - t^2)^{-1/2}.

    With t = cos(theta) the integral becomes ∫_0^pi log|s - cos(theta)|
    d(theta); the kernel splits into an exact log-weight part and a smooth
    ratio log(|cos(theta) - cos(theta0)| / |theta - theta0|).
    """
    s_pts = np.linspace(-1.0, 1.0, n_points + 2)[1:-1]
    worst = 0.0
    target = 0.5 * np.log(2.0)
    for s in s_pts:
        th0 = float(np.arccos(s))

        def ratio_log(th):
            th = np.asarray(th, dtype=float)
            u = th - th0
            # |cos(th) - cos(th0)| / |u| = 2 |sin((th+th0)/2)| * |sin(u/2)/u|
            fac1 = 2.0 * np.abs(np.sin(0.5 * (th + th0)))
            fac2 = np.abs(np.sinc(u / (2.0 * np.pi)))
            return np.log(0.5 * fac1 * fac2)

        log_part = (int_log_weight(lambda v: np.ones_like(v), th0)
                    + int_log_weight(lambda v: np.ones_like(v), np.pi - th0))
        smooth_part = _smooth_panels_integral(ratio_log, 0.0, np.pi)
        value = -HALF_INV_2PI * (log_part + smooth_part)
        worst = max(worst, abs(value - target))
    return worst


def fourier_multiplier_check(K: int) -> Tuple[float, float]:
    """Check the log-kernel operator's Fourier symbol on the torus.

    The operator with kernel -(1/2pi) log|2 sin((s-t)/2)| acts diagonally
    on e^{ikt} with multiplier 0 for k=0 and 1/(2|k|) otherwise.  Returns
    (worst relative error for 1 <= |k| <= K, absolute error at k=0).
    """
    if not 1 <= K <= 32:
        raise ValueError(f"mode count K must be in [1, 32], got {K}")

    def multiplier(k: int) -> float:
        # m_k = -(1/pi) int_0^pi log(2 sin(u/2)) cos(k u) du
        def smooth_part_integrand(u):
            # log(2 sin(u/2) / u) * cos(k u), smooth and even at u = 0
            u = np.asarray(u, dtype=float)
            return np.log(np.abs(np.sinc(u / (2.0 * np.pi)))) * np.cos(k * u)

        # the log-weight rule only resolves ~one oscillation period; put the
        # singular piece on [0, c] and the smooth log tail on fine panels
        c = np.pi if k == 0 else min(np.pi, 2.0 * np.pi / k)
        log_part = int_log_weight(lambda u: np.cos(k * u), c)
        if c < np.pi:
            log_part += _smooth_panels_integral(
                lambda u: np.cos(k * u) * np.log(u), c, np.pi,
                n_panels=max(4, 2 * k))
        smooth_part = _smooth_panels_integral(smooth_part_integrand, 0.0, np.pi,
                                              n_panels=max(12, 2 * abs(k)))
        return -(log_part + smooth_part) / np.pi

    abs_k0 = abs(multiplier(0) - 0.0)
    worst_rel = 0.0
    for k in range(1, K + 1):
        target = 1.0 / (2.0 * k)
        worst_rel = max(worst_rel, abs(multiplier(k) - target) / target)
    return worst_rel, abs_k0
