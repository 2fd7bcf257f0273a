"""End-to-end acceptance checks.

Each test covers one acceptance criterion at its stated tolerance and
prints one summary line per checked quantity.  Two checks measure known
limitations and are expected to fail; docs/limitations.md (and the test
docstrings below) explain why the implemented behaviour is nevertheless
the faithful one.
"""

import numpy as np
import pytest

from arcscreen.assembly import assemble_system
from arcscreen.diagnostics import (
    chebyshev_oracle_check,
    compatibility_residual,
    convergence_table,
    energy_norm_diff,
    fit_edge_exponent,
    fourier_multiplier_check,
)
from arcscreen.potential import eval_potential, jump_check
from arcscreen.quadrature import _diag_log_pair, adaptive_integrate, log_rule
from arcscreen.solver import Solution
from tests.conftest import make_spec

N_LIST = (32, 64, 128, 256, 512, 1024)

# published reference magnitudes for the energy-difference tables
# (coarsest tabulated level N = 128)
REFERENCE_ERR = {
    ("ex1", "standard"): 8.12e-2,
    ("ex1", "enriched"): 1.45e-2,
    ("ex2", "standard"): 1.60e-2,
    ("ex2", "enriched"): 7.27e-3,
}

_TABLES = {}


def _table(store, example, method):
    key = (example, method)
    if key not in _TABLES:
        sols = store.sweep(example, method, N_LIST)
        levels = [(N_LIST[k], energy_norm_diff(sols[k][0], sols[k - 1][0]))
                  for k in range(1, len(N_LIST))]
        _TABLES[key] = convergence_table(levels)
    return _TABLES[key]


def _check(name, ok, detail):
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    return ok


def _convergence_criterion(store, example, order_ranges):
    ok = True
    for method, (lo, hi) in order_ranges.items():
        records = _table(store, example, method)
        orders = [r.order for r in records[1:]]  # levels 128 ... 1024
        ok &= _check(
            f"{example} {method} orders in [{lo}, {hi}]",
            all(lo <= o <= hi for o in orders), orders)
        err = records[1].error  # N = 128
        ref = REFERENCE_ERR[(example, method)]
        ok &= _check(
            f"{example} {method} N=128 error within 1.5x of {ref:.3g}",
            ref / 1.5 <= err <= ref * 1.5, f"{err:.4e}")
    return ok


def test_table1_segment_convergence(store):
    ok = _convergence_criterion(
        store, "ex1",
        {"standard": (0.45, 0.60), "enriched": (0.85, 1.00)})
    orders = [r.order for r in _table(store, "ex1", "enriched")[1:]]
    trend = np.polyfit(range(len(orders)), orders, 1)[0]
    ok &= _check("ex1 enriched order trend nondecreasing toward 1",
                 trend >= -0.01 and orders[-1] >= 0.9,
                 f"slope {trend:+.3f}, final {orders[-1]}")
    assert ok


def test_table2_semicircle_convergence(store):
    assert _convergence_criterion(
        store, "ex2",
        {"standard": (0.50, 0.70), "enriched": (0.95, 1.03)})


def test_quadrature_oracles():
    nodes, weights = log_rule(24)
    worst = max(abs(float(np.dot(weights, nodes ** k)) - 1 / (k + 1) ** 2)
                for k in range(11))
    ok = _check("log-weight moments k<=10 vs 1/(k+1)^2", worst <= 1e-12,
                f"{worst:.2e}")

    val = adaptive_integrate(lambda t: np.log(np.abs(t)), -1.0, 1.0,
                             tol=1e-12)
    ok &= _check("integral of log|t| over [-1,1] vs -2",
                 abs(val + 2.0) <= 1e-10, f"{abs(val + 2.0):.2e}")

    cheb = chebyshev_oracle_check()
    ok &= _check("Chebyshev single-layer identity", cheb <= 1e-8,
                 f"{cheb:.2e}")

    one = lambda t: np.ones_like(t)
    dval = _diag_log_pair(one, one, 0.0, 1.0)
    ok &= _check("double log integral on the unit square vs -3/2",
                 abs(dval + 1.5) <= 1e-9, f"{abs(dval + 1.5):.2e}")
    assert ok


def test_fourier_multipliers():
    rel, k0 = fourier_multiplier_check(8)
    ok = _check("torus log-kernel multipliers |k|<=8 vs 1/(2|k|)",
                rel <= 1e-6, f"rel {rel:.2e}")
    ok &= _check("torus log-kernel multiplier k=0 vs 0", k0 <= 1e-6,
                 f"abs {k0:.2e}")
    assert ok


def test_structural_invariants(store):
    ok = True
    worst_sym = 0.0
    worst_compat = 0.0
    for example in ("ex1", "ex2"):
        for method in ("standard", "enriched"):
            for N in N_LIST:
                sol, spec = store.solution(example, method, N)
                V = sol.system.V
                worst_sym = max(worst_sym, float(np.max(np.abs(V - V.T))))
                worst_compat = max(worst_compat,
                                   abs(compatibility_residual(sol, spec)))
    ok &= _check("V-block symmetry on every solved level",
                 worst_sym <= 1e-10, f"{worst_sym:.2e}")
    ok &= _check("discrete compatibility on every solved level",
                 worst_compat <= 1e-8, f"{worst_compat:.2e}")

    spec = make_spec("ex1", "enriched", 16)
    plain = assemble_system(spec)
    forced = assemble_system(spec, force_smooth=True)
    dev = float(np.max(np.abs(plain.V - forced.V)))
    ok &= _check("flat-arc smooth-remainder block identically zero",
                 dev <= 1e-13, f"{dev:.2e}")

    worst_mirror = 0.0
    for method in ("standard", "enriched"):
        for N in (64, 256):
            sol, _ = store.solution("ex1", method, N)
            n = sol.system.u_space.n_hats
            for vec in (sol.U, sol.psi):
                worst_mirror = max(worst_mirror, float(np.max(np.abs(
                    vec[:n] - vec[:n][::-1]))))
                if len(vec) > n:  # left/right singular coefficients swap
                    worst_mirror = max(worst_mirror,
                                       abs(vec[n] - vec[n + 1]))
    ok &= _check("segment mirror symmetry of coefficients",
                 worst_mirror <= 1e-8, f"{worst_mirror:.2e}")
    assert ok


def test_edge_exponents_synthetic(store):
    sol, _ = store.solution("ex1", "enriched", 64)
    system = sol.system
    ok = True
    for field, space, expected in (("psi", system.psi_space, -0.5),
                                   ("U", system.u_space, 1.5)):
        coeffs = np.zeros(space.dim)
        coeffs[space.n_hats] = 3.0
        fake = Solution(
            system=system,
            U=coeffs if field == "U" else np.zeros(system.u_space.dim),
            psi=coeffs if field == "psi" else np.zeros(system.psi_space.dim),
            residual_norm=0.0, condition=1.0)
        slope = fit_edge_exponent(fake, "left", field, window=(1e-4, 1e-2))
        ok &= _check(f"synthetic {field} profile fit vs {expected}",
                     abs(slope - expected) <= 1e-6,
                     f"{slope:.8f}")
    assert ok


def _exponent_criterion(store, example):
    sol, _ = store.solution(example, "enriched", 512)
    ok = True
    for field, lo, hi in (("psi", -0.55, -0.45), ("U", 1.4, 1.6)):
        for side in ("left", "right"):
            slope = fit_edge_exponent(sol, side, field)
            ok &= _check(
                f"{example} {field} {side} edge exponent in [{lo}, {hi}]",
                lo <= slope <= hi, f"{slope:.4f}")
    return ok


def test_edge_exponents_semicircle(store):
    assert _exponent_criterion(store, "ex2")


def test_edge_exponents_segment(store):
    """Expected failure; see docs/limitations.md.

    The segment example has nonzero endpoint flux, so the surface solution
    behaves like (distance)^1 at the edges and the linear term dominates the
    (distance)^{3/2} part throughout the fit window; the density fit is
    similarly biased by its smooth part, which partially cancels the
    singular part over the default window.  Both fits converge to the
    predicted exponents only as the window shrinks toward the edge.
    """
    assert _exponent_criterion(store, "ex1")


def test_far_field_decay(store):
    """Expected failure; see docs/limitations.md.

    The compatibility condition forces the density to have zero mean and
    the segment solution is symmetric, so monopole and dipole far-field
    terms both vanish.  The leading behaviour is quadrupole (~1/R^2) and
    the measured doubling ratio is 4, not the ~2 of a dipole field.
    """
    sol, _ = store.solution("ex1", "enriched", 512)
    near = abs(eval_potential(sol, np.array([0.0, 100.0])))
    far = abs(eval_potential(sol, np.array([0.0, 200.0])))
    ratio = near / far
    assert _check("far-field doubling ratio |u(100)|/|u(200)| in [1.8, 2.2]",
                  1.8 <= ratio <= 2.2, f"{ratio:.4f}")


def test_normal_derivative_jump(store):
    sol, _ = store.solution("ex1", "enriched", 512)
    devs = []
    for delta in (1e-2, 5e-3, 2.5e-3):
        jump, psi_val = jump_check(sol, 0.0, delta)
        devs.append(abs(jump - psi_val) / abs(psi_val))
    ok = _check("jump vs density at s=0, delta=1e-2 within 5%",
                devs[0] <= 0.05, f"{devs[0]:.2%}")
    ok &= _check("jump agreement improves under delta-halving",
                 devs[2] < devs[1] < devs[0],
                 " -> ".join(f"{d:.2%}" for d in devs))
    assert ok


def test_harmonicity(store):
    sol, _ = store.solution("ex1", "enriched", 512)
    p = np.array([0.4, 0.75])
    step = 5e-3
    center = eval_potential(sol, p)
    stencil = sum(eval_potential(sol, p + step * np.array(d))
                  for d in ((1, 0), (-1, 0), (0, 1), (0, -1)))
    residual = abs(stencil - 4.0 * center) / step ** 2
    assert _check("five-point Laplacian residual at distance >= 0.5",
                  residual <= 1e-5, f"{residual:.2e}")
