"""Shared fixtures: solved problems and full sweeps are expensive, so they
are computed once per session and reused across test modules."""

import numpy as np
import pytest

from arcscreen.assembly import ProblemSpec, assemble_system
from arcscreen.cli import example_problem
from arcscreen.solver import solve


def make_spec(example: str, method: str, N: int) -> ProblemSpec:
    arc, f, g_left, g_right = example_problem(example)
    return ProblemSpec(arc=arc, f=f, g_left=g_left, g_right=g_right,
                       method=method, N=N)


class SweepStore:
    """Lazily solved levels keyed by (example, method, N), with hat-block
    caches shared between methods on the same mesh."""

    def __init__(self):
        self._solutions = {}
        self._hat_caches = {}

    def solution(self, example: str, method: str, N: int):
        key = (example, method, N)
        if key not in self._solutions:
            spec = make_spec(example, method, N)
            cache = self._hat_caches.setdefault((example, N), {})
            system = assemble_system(spec, hat_cache=cache)
            self._solutions[key] = (solve(system), spec)
        return self._solutions[key]

    def sweep(self, example: str, method: str, n_list):
        return [self.solution(example, method, N) for N in n_list]


@pytest.fixture(scope="session")
def store():
    return SweepStore()


@pytest.fixture(scope="session")
def ex1_enriched_64(store):
    return store.solution("ex1", "enriched", 64)


@pytest.fixture(scope="session")
def ex1_standard_64(store):
    return store.solution("ex1", "standard", 64)
