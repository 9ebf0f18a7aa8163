"""Signature matrices: validation, mapping matrices, factor graph, phase rotations.

A signature matrix is a binary K x J pattern with K resource elements as rows
and J users as columns. Every column has exactly dv ones (the resources a user
occupies) and every row exactly df ones (the users colliding on a resource),
which makes the edge count K * df = J * dv. The overload factor is J / K.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import EmptyMatrix, LatinAssignmentInfeasible, NonUniformWeights

# Built-in 4x6 pattern: 6 users on 4 resources, dv=2, df=3, overload 1.5.
_BUILTIN = {
    "builtin46": (
        "1 1 1 0 0 0",
        "1 0 0 1 1 0",
        "0 1 0 1 0 1",
        "0 0 1 0 1 1",
    ),
}

_LATIN_STEP_BUDGET = 1_000_000


@dataclass(frozen=True)
class SignatureParams:
    """Dimensions and degrees of a validated signature matrix.

    K: resource elements (rows). J: users (columns). dv: resources per user
    (column weight). df: users per resource (row weight).
    """

    K: int
    J: int
    dv: int
    df: int

    @property
    def overloading(self) -> float:
        return self.J / self.K


@dataclass(frozen=True)
class FactorGraph:
    """Bipartite adjacency of a signature matrix.

    fn_neighbors[k] lists the users on resource k, vn_neighbors[j] the
    resources of user j. Users and resources are numbered from 1 here, the
    convention used throughout the printed interfaces.
    """

    fn_count: int
    vn_count: int
    fn_neighbors: tuple[tuple[int, ...], ...]
    vn_neighbors: tuple[tuple[int, ...], ...]


def _as_matrix(matrix) -> np.ndarray:
    arr = np.asarray(matrix)
    if arr.ndim != 2:
        raise EmptyMatrix(f"signature matrix must be 2-D, got shape {arr.shape}")
    if arr.size == 0:
        raise EmptyMatrix("signature matrix has no entries")
    vals = np.unique(arr)
    if not np.isin(vals, (0, 1)).all():
        raise ValueError(f"signature matrix entries must be 0 or 1, got {vals}")
    return arr.astype(np.uint8)


def validate_signature(matrix) -> SignatureParams:
    """Check a binary matrix for uniform positive weights and return its parameters.

    Raises EmptyMatrix for a matrix with no rows or columns, NonUniformWeights
    when column weights or row weights differ or are zero.
    """
    arr = _as_matrix(matrix)
    K, J = arr.shape
    col_w = arr.sum(axis=0)
    row_w = arr.sum(axis=1)
    if col_w.min() != col_w.max():
        raise NonUniformWeights(f"column weights vary: {sorted(set(col_w.tolist()))}")
    if row_w.min() != row_w.max():
        raise NonUniformWeights(f"row weights vary: {sorted(set(row_w.tolist()))}")
    dv = int(col_w[0])
    df = int(row_w[0])
    if dv == 0 or df == 0:
        raise NonUniformWeights("weights must be positive (all-zero matrix)")
    return SignatureParams(K=K, J=J, dv=dv, df=df)


def mapping_matrices(matrix) -> list[np.ndarray]:
    """Per-user K x dv binary selection matrices.

    Column c of user j's matrix is the standard basis vector for the c-th
    occupied resource of user j, resources taken in increasing order, so the
    matrix lifts a dv-dimensional point onto the user's resource rows.
    """
    arr = _as_matrix(matrix)
    params = validate_signature(arr)
    out = []
    for j in range(params.J):
        rows = np.nonzero(arr[:, j])[0]
        V = np.zeros((params.K, params.dv), dtype=np.uint8)
        V[rows, np.arange(params.dv)] = 1
        out.append(V)
    return out


def factor_graph(matrix) -> FactorGraph:
    """Bipartite graph of a signature matrix with 1-based user/resource ids."""
    arr = _as_matrix(matrix)
    validate_signature(arr)
    K, J = arr.shape
    fn = tuple(tuple(int(j) + 1 for j in np.nonzero(arr[k])[0]) for k in range(K))
    vn = tuple(tuple(int(k) + 1 for k in np.nonzero(arr[:, j])[0]) for j in range(J))
    return FactorGraph(fn_count=K, vn_count=J, fn_neighbors=fn, vn_neighbors=vn)


def latin_phase_assignment(matrix) -> np.ndarray:
    """Assign rotation phases to the nonzeros of a signature matrix.

    Each nonzero receives one of df rotation indices u in {0, ..., df-1},
    realized as exp(i*pi*u / (dv*df)), such that indices repeat in no row and
    no column (a Latin-style constraint). The search is backtracking over
    nonzeros in row-major order; at the p-th nonzero of row r (both 0-based)
    candidate indices are tried starting from (p + r) mod df and cycling
    upward, which keeps rotations maximally spread across resources.

    Returns a K x J complex matrix, zero where the signature is zero.
    Raises LatinAssignmentInfeasible when no assignment exists (for instance
    whenever dv > df) or the search budget is exhausted.
    """
    arr = _as_matrix(matrix)
    params = validate_signature(arr)
    if params.dv > params.df:
        raise LatinAssignmentInfeasible(
            f"a column needs {params.dv} distinct indices but only {params.df} exist"
        )
    df = params.df
    positions = []
    for r in range(params.K):
        for p, c in enumerate(np.nonzero(arr[r])[0]):
            positions.append((r, int(c), (p + r) % df))
    row_used = [set() for _ in range(params.K)]
    col_used = [set() for _ in range(params.J)]
    chosen = [-1] * len(positions)
    tried = [0] * len(positions)
    i = 0
    steps = 0
    while 0 <= i < len(positions):
        steps += 1
        if steps > _LATIN_STEP_BUDGET:
            raise LatinAssignmentInfeasible("search budget exhausted")
        r, c, start = positions[i]
        if chosen[i] >= 0:
            row_used[r].discard(chosen[i])
            col_used[c].discard(chosen[i])
            chosen[i] = -1
        found = False
        while tried[i] < df:
            v = (start + tried[i]) % df
            tried[i] += 1
            if v not in row_used[r] and v not in col_used[c]:
                chosen[i] = v
                row_used[r].add(v)
                col_used[c].add(v)
                found = True
                break
        if found:
            i += 1
        else:
            tried[i] = 0
            i -= 1
    if i < 0:
        raise LatinAssignmentInfeasible("no row/column-distinct assignment exists")

    phases = np.zeros((params.K, params.J), dtype=np.complex128)
    rot = np.exp(1j * np.pi * np.arange(df) / (params.dv * params.df))
    for (r, c, _), v in zip(positions, chosen):
        phases[r, c] = rot[v]
    return phases


def load_signature(source) -> np.ndarray:
    """Load a signature matrix from a text file or a builtin name.

    The file format is one header line "K J" followed by K rows of J
    space-separated 0/1 entries. The name "builtin46" selects the bundled
    4x6 pattern.
    """
    if isinstance(source, str) and source in _BUILTIN:
        lines = _BUILTIN[source]
        arr = np.array([[int(t) for t in line.split()] for line in lines])
        validate_signature(arr)
        return arr.astype(np.uint8)
    path = Path(source)
    raw = [ln.strip() for ln in path.read_text().splitlines()]
    rows = [ln for ln in raw if ln and not ln.startswith("#")]
    if not rows:
        raise EmptyMatrix(f"{path}: no content")
    header = rows[0].split()
    if len(header) != 2:
        raise ValueError(f"{path}: header must be 'K J', got {rows[0]!r}")
    K, J = int(header[0]), int(header[1])
    if len(rows) - 1 != K:
        raise ValueError(f"{path}: expected {K} matrix rows, found {len(rows) - 1}")
    mat = []
    for ln in rows[1:]:
        toks = ln.split()
        if len(toks) != J:
            raise ValueError(f"{path}: expected {J} entries per row, got {len(toks)}")
        mat.append([int(t) for t in toks])
    arr = np.array(mat)
    validate_signature(arr)
    return arr.astype(np.uint8)
