"""Numerical integration for the log-kernel Galerkin method.

Provides Gauss-Legendre and Gauss-Jacobi rules, a moment-constructed
log-weight rule on (0,1), an independent adaptive oracle, and the
double-integral routines for pairing basis functions against the
weakly singular kernel log|s-t| and against smooth remainder kernels.

Integrand callables are expected to be vectorized (ndarray -> ndarray).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
import heapq

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.special import roots_jacobi

__all__ = [
    "QuadratureError",
    "QuadratureRule",
    "gauss_legendre",
    "gauss_jacobi",
    "log_rule",
    "adaptive_integrate",
    "adaptive_integrate_2d",
    "int_log_weight",
    "integrate_log_vs_point",
    "Panel",
    "double_log_integral",
    "galerkin_log_pair",
    "galerkin_smooth_pair",
]

HALF_INV_2PI = 1.0 / (2.0 * np.pi)  # the kernel prefactor 1/(2*pi)


class QuadratureError(RuntimeError):
    """Raised when an integration routine cannot meet its tolerance."""

    def __init__(self, message, estimate=None, error_estimate=None):
        super().__init__(message)
        self.estimate = estimate
        self.error_estimate = error_estimate


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray
    interval: tuple

    def integrate(self, f):
        return float(np.dot(self.weights, f(self.nodes)))


@lru_cache(maxsize=None)
def _leggauss(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(n: int, a: float = -1.0, b: float = 1.0) -> QuadratureRule:
    """Gauss-Legendre rule with n nodes mapped to [a, b]."""
    if not 1 <= n <= 64:
        raise ValueError(f"gauss_legendre order must be in [1, 64], got {n}")
    x, w = _leggauss(n)
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    return QuadratureRule(mid + half * x, half * w, (a, b))


def gauss_jacobi(n: int, alpha: float, beta: float,
                 a: float = -1.0, b: float = 1.0) -> QuadratureRule:
    """Gauss-Jacobi rule: sum w_i f(x_i) ~ int_a^b (b-x)^alpha (x-a)^beta f(x) dx.

    On the reference interval [-1, 1] this is the classical rule for the
    weight (1-x)^alpha (1+x)^beta.
    """
    if not 1 <= n <= 64:
        raise ValueError(f"gauss_jacobi order must be in [1, 64], got {n}")
    if alpha <= -1.0 or beta <= -1.0:
        raise ValueError("Jacobi weight exponents must exceed -1")
    x, w = roots_jacobi(n, alpha, beta)
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    return QuadratureRule(mid + half * x, half ** (alpha + beta + 1.0) * w, (a, b))


# ---------------------------------------------------------------------------
# log-weight rule on (0, 1):  sum w_i f(x_i) ~ int_0^1 f(v) (-log v) dv
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def log_rule(n: int = 24):
    """Gaussian rule for the weight -log(v) on (0, 1).

    Built by the moment/recurrence (Golub-Welsch style) construction from
    the exact moments int_0^1 v^k (-log v) dv = 1/(k+1)^2.  The moment
    problem is ill-conditioned in double precision, so the three-term
    recurrence coefficients are computed in high-precision arithmetic.
    """
    if not 1 <= n <= 48:
        raise ValueError(f"log_rule order must be in [1, 48], got {n}")
    from mpmath import mp, mpf

    with mp.workdps(40 + 6 * n):
        m = [mpf(1) / mpf((l + 1) ** 2) for l in range(2 * n)]
        alpha = [m[1] / m[0]] if n >= 1 else []
        beta = [m[0]]
        sig_prev = [mpf(0)] * (2 * n)
        sig_cur = list(m)
        for k in range(1, n):
            sig_new = [mpf(0)] * (2 * n)
            for l in range(k, 2 * n - k):
                sig_new[l] = (sig_cur[l + 1] - alpha[k - 1] * sig_cur[l]
                              - beta[k - 1] * sig_prev[l])
            alpha.append(sig_new[k + 1] / sig_new[k] - sig_cur[k] / sig_cur[k - 1])
            beta.append(sig_new[k] / sig_cur[k - 1])
            sig_prev, sig_cur = sig_cur, sig_new
        d = np.array([float(a) for a in alpha])
        e = np.array([float(mp.sqrt(b)) for b in beta[1:]])
    vals, vecs = eigh_tridiagonal(d, e)
    nodes = vals
    weights = float(beta[0]) * vecs[0, :] ** 2
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def int_log_weight(f, c: float, n: int = 24) -> float:
    """int_0^c f(z) log(z) dz for smooth f, with the log weight handled exactly."""
    if c <= 0.0:
        return 0.0
    xg, wg = _leggauss(n)
    zg = 0.5 * c * (xg + 1.0)
    smooth = 0.5 * c * np.dot(wg, f(zg))
    xl, wl = log_rule(n)
    logpart = c * np.dot(wl, f(c * xl))
    return float(np.log(c) * smooth - logpart)


def integrate_log_vs_point(f, a: float, b: float, s0: float, n: int = 24) -> float:
    """int_a^b f(t) log|t - s0| dt with f smooth on [a, b].

    s0 may lie inside, on the boundary of, or outside [a, b].
    """
    if a >= b:
        return 0.0
    if a < s0 < b:
        left = int_log_weight(lambda v: f(s0 - v), s0 - a, n)
        right = int_log_weight(lambda v: f(s0 + v), b - s0, n)
        return left + right
    # s0 at an endpoint or outside: the kernel is smooth inside, possibly
    # sharp near the closer endpoint.
    if s0 <= a:
        if s0 == a:
            return int_log_weight(lambda v: f(a + v), b - a, n)
        gap = a - s0
        total = 0.0
        for p0, p1 in _graded_panels(a, b, toward=a, scale=gap):
            total += _gauss_1d(lambda t: f(t) * np.log(t - s0), p0, p1, n)
        return total
    if s0 == b:
        return int_log_weight(lambda v: f(b - v), b - a, n)
    gap = s0 - b
    total = 0.0
    for p0, p1 in _graded_panels(a, b, toward=b, scale=gap):
        total += _gauss_1d(lambda t: f(t) * np.log(s0 - t), p0, p1, n)
    return total


def _gauss_1d(f, a, b, n=16):
    x, w = _leggauss(n)
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    return half * float(np.dot(w, f(mid + half * x)))


def _graded_panels(a, b, toward, scale, ratio=3.0, cap=48):
    """Partition [a, b] into panels growing geometrically away from `toward`.

    The first panel at the `toward` end has width ~scale, so an integrand
    whose smoothness scale at distance d from `toward` is ~(scale + d) is
    well resolved by a fixed-order rule on every panel.
    """
    length = b - a
    scale = min(max(scale, length * 1e-15), length)
    if scale >= 0.5 * length:
        return [(a, b)]
    widths = []
    w, total = scale, 0.0
    while total + w < length and len(widths) < cap:
        widths.append(w)
        total += w
        w *= ratio
    panels = []
    if toward == a:
        lo = a
        for w in widths:
            panels.append((lo, lo + w))
            lo += w
        panels.append((lo, b))
    else:
        hi = b
        for w in widths:
            panels.append((hi - w, hi))
            hi -= w
        panels.append((a, hi))
        panels.reverse()
    return panels


# ---------------------------------------------------------------------------
# adaptive oracle
# ---------------------------------------------------------------------------

def adaptive_integrate(f, a: float, b: float, tol: float = 1e-10,
                       max_panels: int = 8000, atol: float = None) -> float:
    """Adaptive bisection with an embedded higher-order Gauss pair.

    Integrable endpoint singularities (algebraic or log) are admissible;
    the bisection grades toward them automatically.  Raises
    QuadratureError (carrying the achieved estimate) at the panel cap.
    `atol` (default: tol) is the absolute error floor, needed when the
    integral itself vanishes by symmetry.
    """
    if atol is None:
        atol = tol
    def local(lo, hi):
        coarse = _gauss_1d(f, lo, hi, 10)
        fine = _gauss_1d(f, lo, hi, 20)
        return fine, abs(fine - coarse)

    val, err = local(a, b)
    heap = [(-err, a, b, val, err)]
    total, total_err = val, err
    n_panels = 1
    while total_err > max(tol * abs(total), atol) and heap:
        if n_panels >= max_panels:
            raise QuadratureError(
                f"adaptive_integrate: no convergence within {max_panels} panels "
                f"(estimate {total:.16e}, error estimate {total_err:.3e})",
                estimate=total, error_estimate=total_err)
        _, lo, hi, v, e = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        v1, e1 = local(lo, mid)
        v2, e2 = local(mid, hi)
        total += (v1 + v2) - v
        total_err += (e1 + e2) - e
        heapq.heappush(heap, (-e1, lo, mid, v1, e1))
        heapq.heappush(heap, (-e2, mid, hi, v2, e2))
        n_panels += 1
    return total


def adaptive_integrate_2d(f2, a1, b1, a2, b2, tol=1e-9):
    """Nested adaptive double integral (test oracle; f2(s, t) scalar in s)."""
    def outer(svals):
        out = np.empty_like(np.asarray(svals, dtype=float))
        flat = out.ravel()
        for i, s in enumerate(np.asarray(svals, dtype=float).ravel()):
            flat[i] = adaptive_integrate(lambda t: f2(s, t), a2, b2, tol=0.1 * tol)
        return out
    return adaptive_integrate(outer, a1, b1, tol=tol)


# ---------------------------------------------------------------------------
# panelized double integrals against log|s-t| and smooth kernels
# ---------------------------------------------------------------------------
#
# A basis factor is described as a list of panels (a, b, f) with f smooth on
# [a, b].  Singular enrichment factors are fed through these routines only
# after the square-root substitution that renders them smooth (see assembly).

Panel = tuple  # (a: float, b: float, f: callable)


def _diag_log_pair(F, G, a, b, n=24):
    """∬_{[a,b]^2} F(s) G(t) log|s-t| dt ds via Duffy-style triangle splits."""
    B0 = b - a
    if B0 <= 0.0:
        return 0.0
    xg, wg = _leggauss(n)
    xg01 = 0.5 * (xg + 1.0)
    wg01 = 0.5 * wg
    xl, wl = log_rule(n)

    def triangle(P, Q):
        # int_a^b P(s) int_a^s Q(t) log(s-t) dt ds
        def inner_factors(z):
            # returns (S1, S2) with the inner integral = z log z S1 - z S2
            s = a + z
            tg = s[:, None] - z[:, None] * xg01[None, :]
            S1 = Q(tg) @ wg01  # int_0^1 Q(s - z w) dw
            tl = s[:, None] - z[:, None] * xl[None, :]
            S2 = Q(tl) @ wl
            return S1, S2

        # outer integral: int_0^B0 [z log z P S1 - z P S2] dz
        zg = B0 * xg01
        zl = B0 * xl
        S1g, S2g = inner_factors(zg)
        S1l, _ = inner_factors(zl)
        Pg = P(a + zg)
        Pl = P(a + zl)
        # int_0^B0 phi(z) log z dz with phi(z) = z P(a+z) S1(z)
        phi_g = zg * Pg * S1g
        phi_l = zl * Pl * S1l
        term1 = np.log(B0) * B0 * np.dot(wg01, phi_g) - B0 * np.dot(wl, phi_l)
        term2 = B0 * np.dot(wg01, zg * Pg * S2g)
        return term1 - term2

    return triangle(F, G) + triangle(G, F)


def _corner00_log(F, A, G, B, n=24, m_gauss=16):
    """∬_{[0,A]x[0,B]} F(u) G(v) log(u+v) du dv (singular only at the origin)."""
    if A <= 0.0 or B <= 0.0:
        return 0.0
    m = min(A, B)
    xg, wg = _leggauss(n)
    xg01 = 0.5 * (xg + 1.0)
    wg01 = 0.5 * wg
    log1p_x = np.log1p(xg01)

    def triangle(P, Q):
        # region {u < v} of [0,m]^2 with u = v*w:
        # int_0^m v Q(v) [log v * A1(v) + A2(v)] dv
        def A1A2(v):
            uu = v[:, None] * xg01[None, :]
            Pu = P(uu)
            return Pu @ wg01, (Pu * log1p_x[None, :]) @ wg01

        xl, wl = log_rule(n)
        vg = m * xg01
        vl = m * xl
        A1g, A2g = A1A2(vg)
        A1l, _ = A1A2(vl)
        t_log = np.log(m) * m * np.dot(wg01, vg * Q(vg) * A1g) \
            - m * np.dot(wl, vl * Q(vl) * A1l)
        t_smooth = m * np.dot(wg01, vg * Q(vg) * A2g)
        return t_log + t_smooth

    total = triangle(F, G) + triangle(G, F)
    # remaining rectangle where one variable exceeds m
    if A > m:
        for p0, p1 in _graded_panels(m, A, toward=m, scale=m):
            total += _tensor_pair(F, (p0, p1), G, (0.0, B),
                                  lambda u, v: np.log(u + v), m_gauss)
    elif B > m:
        for p0, p1 in _graded_panels(m, B, toward=m, scale=m):
            total += _tensor_pair(G, (p0, p1), F, (0.0, A),
                                  lambda v, u: np.log(u + v), m_gauss)
    return total


def _tensor_pair(F, I1, G, I2, kernel, n=16):
    """Plain tensor Gauss for ∬ F(s) G(t) kernel(s, t)."""
    a1, b1 = I1
    a2, b2 = I2
    if b1 <= a1 or b2 <= a2:
        return 0.0
    x, w = _leggauss(n)
    s = 0.5 * (a1 + b1) + 0.5 * (b1 - a1) * x
    t = 0.5 * (a2 + b2) + 0.5 * (b2 - a2) * x
    ws = 0.5 * (b1 - a1) * w * F(s)
    wt = 0.5 * (b2 - a2) * w * G(t)
    K = kernel(s[:, None], t[None, :])
    return float(ws @ K @ wt)


def _disjoint_log_pair(F, I1, G, I2, n=20):
    """∬ F G log|s-t| for intervals with disjoint interiors (gap >= 0)."""
    a1, b1 = I1
    a2, b2 = I2
    if b1 <= a2:
        gap = a2 - b1
        left, right = (F, I1), (G, I2)
    else:
        gap = a1 - b2
        left, right = (G, I2), (F, I1)
    len1 = I1[1] - I1[0]
    len2 = I2[1] - I2[0]
    span = max(len1, len2)
    if gap <= 1e-13 * span:
        # touching: genuine log singularity at the shared corner
        (P, (pa, pb)), (Q, (qa, qb)) = left, right
        c = 0.5 * (pb + qa)
        return _corner00_log(lambda u: P(c - u), c - pa,
                             lambda v: Q(c + v), qb - c, n=24)
    kernel = lambda s, t: np.log(np.abs(s - t))
    if gap >= 0.5 * span:
        return _tensor_pair(F, I1, G, I2, kernel, n)
    # near-disjoint: grade both intervals toward the facing ends
    (P, (pa, pb)), (Q, (qa, qb)) = left, right
    total = 0.0
    for p0, p1 in _graded_panels(pa, pb, toward=pb, scale=gap):
        for q0, q1 in _graded_panels(qa, qb, toward=qa, scale=gap):
            dist = q0 - p1
            size = max(p1 - p0, q1 - q0)
            order = 20 if size > dist else 24
            total += _tensor_pair(P, (p0, p1), Q, (q0, q1), kernel, min(order, 24))
    return total


def _align_panels(panels_f, panels_g):
    """Split both panel lists at the union of breakpoints so any two panels
    are either identical in span or have disjoint interiors."""
    pts = []
    for a, b, _ in list(panels_f) + list(panels_g):
        if b <= a:
            raise ValueError("empty panel")
        pts.extend((a, b))
    pts = np.array(sorted(pts))
    span = pts[-1] - pts[0]
    merged = [pts[0]]
    for p in pts[1:]:
        if p - merged[-1] > 1e-9 * span:
            merged.append(p)
    merged = np.array(merged)

    def snap(x):
        return int(np.argmin(np.abs(merged - x)))

    def refine(panels):
        out = []
        for a, b, f in panels:
            ia, ib = snap(a), snap(b)
            for k in range(ia, ib):
                out.append((k, k + 1, f))
        return out

    return refine(panels_f), refine(panels_g), merged


def double_log_integral(panels_f, panels_g) -> float:
    """∬ F(s) G(t) log|s-t| dt ds for panelized smooth factors F, G."""
    pf, pg, bp = _align_panels(panels_f, panels_g)
    total = 0.0
    for ia, ib, F in pf:
        for ja, jb, G in pg:
            A = (bp[ia], bp[ib])
            B = (bp[ja], bp[jb])
            if ia == ja and ib == jb:
                total += _diag_log_pair(F, G, A[0], A[1])
            else:
                total += _disjoint_log_pair(F, A, G, B)
    return total


def galerkin_log_pair(panels_i, panels_j) -> float:
    """∬ b_i(s) * (-1/2pi) log|s-t| * b_j(t) dt ds for panelized factors."""
    return -HALF_INV_2PI * double_log_integral(panels_i, panels_j)


def galerkin_smooth_pair(panels_i, panels_j, remainder_kernel, n=16,
                         subdiv=4) -> float:
    """Tensor quadrature of a smooth kernel (e.g. the chord/parameter
    remainder r(s,t)) against a panelized basis pair.

    The kernel callable must be finite on the diagonal (the analytic limit
    r(s,s) = 0 for arclength arcs is the caller's responsibility).
    """
    total = 0.0
    for a1, b1, F in panels_i:
        for a2, b2, G in panels_j:
            e1 = np.linspace(a1, b1, subdiv + 1)
            e2 = np.linspace(a2, b2, subdiv + 1)
            for i in range(subdiv):
                for j in range(subdiv):
                    total += _tensor_pair(F, (e1[i], e1[i + 1]),
                                          G, (e2[j], e2[j + 1]),
                                          remainder_kernel, n)
    return total
