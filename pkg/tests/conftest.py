"""Shared fixtures and random-structure generators for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from scmasim.codebook import CodebookSet, build_codebook_set
from scmasim.signature import load_signature
from scmasim.spa import GenericFactorGraph, LocalFunction

# Pass/fail lines collected by the acceptance tests; printed after the run so
# a plain `pytest -v` shows the report despite output capture.
ACCEPTANCE_REPORT: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_REPORT:
        terminalreporter.section("acceptance report")
        for line in ACCEPTANCE_REPORT:
            terminalreporter.write_line(line)


# The bundled 4x6 signature, spelled out so tests do not depend on the loader.
PATTERN_46 = np.array(
    [
        [1, 1, 1, 0, 0, 0],
        [1, 0, 0, 1, 1, 0],
        [0, 1, 0, 1, 0, 1],
        [0, 0, 1, 0, 1, 1],
    ],
    dtype=np.uint8,
)


@pytest.fixture(scope="session")
def cbs46() -> CodebookSet:
    return build_codebook_set(load_signature("builtin46"), 4)


@pytest.fixture(scope="session")
def cbs46_raw() -> CodebookSet:
    return build_codebook_set(load_signature("builtin46"), 4, normalize=False)


def random_tree_graph(rng: np.random.Generator) -> GenericFactorGraph:
    """A random cycle-free factor graph: <= 8 variables, alphabets <= 4.

    Built incrementally so the bipartite graph stays a tree: every new
    function node adopts exactly one already-attached variable plus one or
    two fresh ones. Degree-1 factors are sprinkled on top (they never
    create cycles).
    """
    n_v = int(rng.integers(1, 9))
    alphas = [int(a) for a in rng.integers(2, 5, size=n_v)]
    scopes: list[list[int]] = []
    attached = 1
    while attached < n_v:
        fresh = int(rng.integers(1, min(2, n_v - attached) + 1))
        anchor = int(rng.integers(0, attached))
        scopes.append([anchor] + list(range(attached, attached + fresh)))
        attached += fresh
    for v in range(n_v):
        if rng.random() < 0.4:
            scopes.append([v])
    if not scopes:
        scopes.append([0])
    functions = []
    for scope in scopes:
        scope = [int(v) for v in rng.permutation(scope)]
        shape = tuple(alphas[v] for v in scope)
        functions.append(LocalFunction(tuple(scope), rng.uniform(0.1, 1.0, size=shape)))
    return GenericFactorGraph(alphas, functions)


def four_variable_chain_graph(rng: np.random.Generator) -> GenericFactorGraph:
    """The walkthrough topology: factors over (v0), (v1,v2) and (v0,v2,v3)."""
    a = [int(x) for x in rng.integers(2, 5, size=4)]
    return GenericFactorGraph(
        a,
        [
            LocalFunction((0,), rng.uniform(0.1, 1.0, size=(a[0],))),
            LocalFunction((1, 2), rng.uniform(0.1, 1.0, size=(a[1], a[2]))),
            LocalFunction((0, 2, 3), rng.uniform(0.1, 1.0, size=(a[0], a[2], a[3]))),
        ],
    )


def random_regular_signature(rng: np.random.Generator, K: int, J: int, dv: int, df: int) -> np.ndarray:
    """A uniform-weight binary K x J matrix via stub matching with rejection."""
    if K * df != J * dv:
        raise ValueError("K*df must equal J*dv")
    row_stubs = np.repeat(np.arange(K), df)
    col_stubs = np.repeat(np.arange(J), dv)
    for _ in range(500):
        pairs = set(zip(row_stubs.tolist(), col_stubs[rng.permutation(col_stubs.size)].tolist()))
        if len(pairs) == row_stubs.size:
            out = np.zeros((K, J), dtype=np.uint8)
            for r, c in pairs:
                out[r, c] = 1
            return out
    raise RuntimeError(f"no simple ({K},{J},{dv},{df}) matrix found")
