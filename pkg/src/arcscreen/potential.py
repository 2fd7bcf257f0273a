"""Off-arc evaluation of the single-layer potential generated by the
solved density, plus field grids and the normal-derivative jump check."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.optimize import minimize_scalar

from arcscreen.assembly import _Side, _psi_sing_factor, _tau_edges
from arcscreen.geometry import ArcParameterization
from arcscreen.quadrature import HALF_INV_2PI, _gauss_1d, _graded_panels, \
    _leggauss, gauss_jacobi, int_log_weight
from arcscreen.solver import Solution
from arcscreen.spaces import cutoff_phi

__all__ = ["FieldGrid", "eval_potential", "potential_of_density",
           "potential_on_arc", "field_grid", "write_field_csv", "jump_check"]


@dataclass
class FieldGrid:
    """Rectangular sample grid of the exterior potential.

    Points closer to the arc than `eps_excl` are masked (u = nan) rather
    than evaluated: the kernel is near-singular there and plotted values
    would be quadrature artifacts.
    """

    x: np.ndarray        # (ny, nx)
    y: np.ndarray        # (ny, nx)
    u: np.ndarray        # (ny, nx), nan where masked
    masked: np.ndarray   # (ny, nx) bool
    eps_excl: float


_ARC_SAMPLE_CACHE: dict = {}


def _arc_samples(arc: ArcParameterization, n: int = 8192):
    key = (id(arc), n)
    if key not in _ARC_SAMPLE_CACHE:
        s = np.linspace(arc.a, arc.b, n)
        _ARC_SAMPLE_CACHE[key] = (s, arc.position(s))
    return _ARC_SAMPLE_CACHE[key]


def _distance_to_arc(arc: ArcParameterization, point) -> Tuple[float, float]:
    """(distance, nearest parameter), refined from a dense sample."""
    s, pts = _arc_samples(arc)
    d2 = np.sum((pts - np.asarray(point, dtype=float)) ** 2, axis=1)
    k = int(np.argmin(d2))
    lo = s[max(k - 1, 0)]
    hi = s[min(k + 1, len(s) - 1)]
    if hi > lo:
        res = minimize_scalar(
            lambda t: float(np.sum((arc.position(np.atleast_1d(t))[0]
                                    - point) ** 2)),
            bounds=(lo, hi), method="bounded",
            options={"xatol": 1e-14 * arc.length})
        if res.fun < d2[k]:
            return float(np.sqrt(res.fun)), float(res.x)
    return float(np.sqrt(d2[k])), float(s[k])


def _hat_part_integral(sol: Solution, point: np.ndarray, dist: float,
                       s_near: float, n: int = 16) -> float:
    """∫ (piecewise-linear part of psi_h)(t) log|x - X(t)| dt."""
    space = sol.system.psi_space
    nodes = space.partition.nodes
    geom = sol.system.spec.arc
    coeffs = sol.psi[: space.n_hats]
    x01, w01 = _leggauss(n)
    x01 = 0.5 * (x01 + 1.0)
    w01 = 0.5 * w01

    d0 = nodes[:-1]
    d1 = nodes[1:]
    widths = d1 - d0
    # elements whose parameter range is close to the nearest parameter need
    # graded subdivision; the rest are handled in one batched tensor rule
    near = (np.minimum(np.abs(d0 - s_near), np.abs(d1 - s_near))
            < 2.0 * widths + 2.0 * dist) & (dist < 2.0 * np.max(widths))

    total = 0.0
    far = ~near
    if np.any(far):
        tq = d0[far, None] + widths[far, None] * x01[None, :]
        wq = widths[far, None] * w01[None, :]
        vals = np.interp(tq, nodes, coeffs)
        r = np.linalg.norm(geom.position(tq.ravel()).reshape(*tq.shape, 2)
                           - point, axis=-1)
        total += float(np.sum(wq * vals * np.log(r)))
    for k in np.nonzero(near)[0]:
        toward = d0[k] if abs(d0[k] - s_near) < abs(d1[k] - s_near) else d1[k]
        if d0[k] < s_near < d1[k]:
            pieces = [(d0[k], s_near, s_near), (s_near, d1[k], s_near)]
        else:
            pieces = [(d0[k], d1[k], toward)]
        for lo, hi, tw in pieces:
            if hi <= lo:
                continue
            for p0, p1 in _graded_panels(lo, hi, toward=tw,
                                         scale=max(dist, 1e-14)):
                tq = p0 + (p1 - p0) * x01
                wq = (p1 - p0) * w01
                vals = np.interp(tq, nodes, coeffs)
                r = np.linalg.norm(geom.position(tq) - point, axis=-1)
                total += float(np.sum(wq * vals * np.log(r)))
    return total


def _sing_part_integral(sol: Solution, point: np.ndarray, n: int = 32) -> float:
    """∫ (singular part of psi_h)(t) log|x - X(t)| dt via Gauss-Jacobi on
    the plateau plus smooth panels across the cutoff transition."""
    space = sol.system.psi_space
    if space.n_singular == 0:
        return 0.0
    geom = sol.system.spec.arc
    c = space.scale
    P = space.plateau_raw
    edges = _tau_edges(space) ** 2  # raw-distance panel edges
    total = 0.0
    for idx, side_name in space.singular_sides():
        coef = sol.psi[idx]
        if coef == 0.0:
            continue
        side = _Side(space.partition, side_name)

        def kern(d):
            r = np.linalg.norm(geom.position(side.param_of(d)) - point,
                               axis=-1)
            return np.log(r)

        # plateau: weight d^{-1/2} exactly, remaining factor smooth
        rule = gauss_jacobi(n, 0.0, -0.5, 0.0, P)
        val = float(np.dot(rule.weights,
                           c ** -0.5 * kern(rule.nodes)))
        # transition: integrand smooth (d bounded away from 0)
        for a_d, b_d in zip(edges[1:-1], edges[2:]):
            val += _gauss_1d(
                lambda d: (c * d) ** -0.5 * cutoff_phi(c * d) * kern(d),
                a_d, b_d, n)
        total += coef * val
    return total


def eval_potential(sol: Solution, point, eps_excl: Optional[float] = None) -> float:
    """u(x) = -(1/2pi) ∫ log|x - X(t)| psi_h(t) dt at a point off the arc."""
    geom = sol.system.spec.arc
    point = np.asarray(point, dtype=float)
    if eps_excl is None:
        eps_excl = 1e-3 * geom.length
    dist, s_near = _distance_to_arc(geom, point)
    if dist < eps_excl:
        raise ValueError(
            f"evaluation point {tuple(point)} is {dist:.3e} from the arc, "
            f"closer than the exclusion distance {eps_excl:.3e}")
    total = _hat_part_integral(sol, point, dist, s_near)
    total += _sing_part_integral(sol, point)
    return -HALF_INV_2PI * total


def potential_of_density(arc: ArcParameterization, density, point,
                         eps_excl: Optional[float] = None,
                         n_panels: int = 64, order: int = 20) -> float:
    """Potential of an arbitrary smooth density callable (off-arc points)."""
    point = np.asarray(point, dtype=float)
    if eps_excl is None:
        eps_excl = 1e-3 * arc.length
    dist, s_near = _distance_to_arc(arc, point)
    if dist < eps_excl:
        raise ValueError(
            f"evaluation point {tuple(point)} is {dist:.3e} from the arc, "
            f"closer than the exclusion distance {eps_excl:.3e}")
    edges = np.linspace(arc.a, arc.b, n_panels + 1)
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        scale = max(dist, 1e-14)
        toward = lo if abs(lo - s_near) < abs(hi - s_near) else hi
        for p0, p1 in _graded_panels(lo, hi, toward=toward, scale=scale):
            total += _gauss_1d(
                lambda t: density(t) * np.log(
                    np.linalg.norm(arc.position(t) - point, axis=-1)),
                p0, p1, order)
    return -HALF_INV_2PI * total


def potential_on_arc(arc: ArcParameterization, density, s0: float,
                     order: int = 24) -> float:
    """Limit value of the potential at the on-arc point X(s0) for a smooth
    density (the integral is proper: the log singularity is integrable).

    Splits log|X(s0) - X(t)| = log|t - s0| + log(chord/parameter ratio);
    the first factor is handled by the exact log-weight rule.
    """
    if not arc.a < s0 < arc.b:
        raise ValueError("on-arc evaluation requires an interior parameter")
    log_part = int_log_weight(lambda v: density(s0 - v), s0 - arc.a, order) \
        + int_log_weight(lambda v: density(s0 + v), arc.b - s0, order)
    smooth = 0.0
    edges = np.linspace(arc.a, arc.b, 17)
    for lo, hi in zip(edges[:-1], edges[1:]):
        smooth += _gauss_1d(
            lambda t: density(t) * np.log(arc.chord_over_param(t, s0)),
            lo, hi, order)
    return -HALF_INV_2PI * (log_part + smooth)


def field_grid(sol: Solution, box: Tuple[float, float, float, float],
               resolution: Tuple[int, int],
               eps_excl: Optional[float] = None) -> FieldGrid:
    """Evaluate the potential on a rectangular grid, masking points within
    the exclusion distance of the arc.  Row-major over (y, x)."""
    geom = sol.system.spec.arc
    if eps_excl is None:
        eps_excl = 1e-3 * geom.length
    x_min, x_max, y_min, y_max = box
    nx, ny = resolution
    if nx < 1 or ny < 1 or x_max <= x_min or y_max <= y_min:
        raise ValueError("invalid field grid box or resolution")
    xs = np.linspace(x_min, x_max, nx)
    ys = np.linspace(y_min, y_max, ny)
    X, Y = np.meshgrid(xs, ys)
    u = np.full_like(X, np.nan)
    masked = np.zeros(X.shape, dtype=bool)
    for i in range(ny):
        for j in range(nx):
            p = np.array([X[i, j], Y[i, j]])
            dist, _ = _distance_to_arc(geom, p)
            if dist < eps_excl:
                masked[i, j] = True
            else:
                u[i, j] = eval_potential(sol, p, eps_excl)
    return FieldGrid(x=X, y=Y, u=u, masked=masked, eps_excl=float(eps_excl))


def write_field_csv(grid: FieldGrid, path) -> None:
    """CSV export: header x,y,u,masked; one row per point, row-major."""
    with open(path, "w") as fh:
        fh.write("x,y,u,masked\n")
        ny, nx = grid.x.shape
        for i in range(ny):
            for j in range(nx):
                uval = "" if grid.masked[i, j] else f"{grid.u[i, j]:.12e}"
                fh.write(f"{grid.x[i, j]:.12e},{grid.y[i, j]:.12e},"
                         f"{uval},{int(grid.masked[i, j])}\n")


def jump_check(sol: Solution, s: float, delta: float) -> Tuple[float, float]:
    """Numerical jump of the normal derivative of the potential across the
    arc at X(s), compared against the density value psi_h(s).

    Returns (numeric jump, psi_h(s)).  Gradients are approximated by
    central differences with step delta/4 at the offset points X(s) +/-
    delta * normal.
    """
    geom = sol.system.spec.arc
    eps_excl = 1e-3 * geom.length
    if delta < eps_excl:
        raise ValueError(f"offset delta {delta:g} is below the exclusion "
                         f"distance {eps_excl:g}")
    if min(s - geom.a, geom.b - s) < 4.0 * delta:
        raise ValueError("jump evaluation point must be at parameter "
                         "distance >= 4*delta from both endpoints")
    x0 = geom.position(np.atleast_1d(s))[0]
    tx, ty = geom.tangent(np.atleast_1d(s))[0]
    normal = np.array([-ty, tx])
    step = 0.25 * delta
    # the FD stencil around x0 +/- delta*n reaches down to distance
    # 3*delta/4 from the arc; relax the inner guard accordingly
    eps_inner = min(eps_excl, 0.5 * delta)

    def grad_u(p):
        gx = (eval_potential(sol, p + [step, 0.0], eps_inner)
              - eval_potential(sol, p - [step, 0.0], eps_inner)) / (2 * step)
        gy = (eval_potential(sol, p + [0.0, step], eps_inner)
              - eval_potential(sol, p - [0.0, step], eps_inner)) / (2 * step)
        return np.array([gx, gy])

    jump = float(normal @ (grad_u(x0 - delta * normal)
                           - grad_u(x0 + delta * normal)))
    return jump, float(sol.eval_psi(s))
