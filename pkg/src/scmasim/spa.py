"""Generic sum-product message passing on discrete factor graphs.

Variable nodes carry finite alphabets; each local function holds a dense
nonnegative table over its scope. Messages live on directed edges: a
function-to-variable message marginalizes the table against the other
incoming messages, a variable-to-function message is the normalized product
of the other functions' messages. On a cycle-free graph one tree-scheduled
pass yields exact marginals; on general graphs a flooding schedule iterates
to (approximate) convergence. A brute-force enumerator provides the
ground truth for small graphs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatch,
    EdgeNotFound,
    ScheduleInfeasible,
    StateSpaceTooLarge,
    ZeroBelief,
)

SCHEDULES = ("tree", "flooding")


@dataclass(frozen=True)
class LocalFunction:
    """A factor: nonnegative table over the variables in scope (0-based ids)."""

    scope: tuple[int, ...]
    table: np.ndarray


class GenericFactorGraph:
    """Bipartite graph of variable nodes and local functions.

    alphabet_sizes gives |A_v| per variable; functions hold their scopes and
    tables. Variables may appear in any number of scopes, including none.
    """

    def __init__(self, alphabet_sizes, functions):
        self.alphabet_sizes = tuple(int(a) for a in alphabet_sizes)
        if any(a < 1 for a in self.alphabet_sizes):
            raise DimensionMismatch("alphabet sizes must be >= 1")
        self.functions = []
        for f in functions:
            scope = tuple(int(v) for v in f.scope)
            table = np.asarray(f.table, dtype=np.float64)
            if len(scope) != len(set(scope)):
                raise DimensionMismatch(f"scope {scope} repeats a variable")
            if any(not 0 <= v < len(self.alphabet_sizes) for v in scope):
                raise DimensionMismatch(f"scope {scope} references an unknown variable")
            want = tuple(self.alphabet_sizes[v] for v in scope)
            if table.shape != want:
                raise DimensionMismatch(f"table shape {table.shape} != alphabets {want}")
            if (table < 0).any() or not np.isfinite(table).all():
                raise ValueError("tables must be finite and nonnegative")
            self.functions.append(LocalFunction(scope=scope, table=table))
        self.vn_count = len(self.alphabet_sizes)
        self.fn_count = len(self.functions)
        self.vn_neighbors = [[] for _ in range(self.vn_count)]
        for k, f in enumerate(self.functions):
            for v in f.scope:
                self.vn_neighbors[v].append(k)


@dataclass
class MessageState:
    """Directed-edge messages, keyed (function, variable)."""

    fn_to_vn: dict = field(default_factory=dict)
    vn_to_fn: dict = field(default_factory=dict)


def _require_edge(graph: GenericFactorGraph, k: int, j: int) -> None:
    if not 0 <= k < graph.fn_count or j not in graph.functions[k].scope:
        raise EdgeNotFound(f"no edge between function {k} and variable {j}")


def fn_to_vn_update(graph: GenericFactorGraph, state: MessageState, k: int, j: int) -> np.ndarray:
    """Message from function k to variable j.

    Sums the table over all scope variables except j, each weighted by its
    current variable-to-function message (uniform-equivalent all-ones when a
    message has not arrived yet). Unnormalized by design.
    """
    _require_edge(graph, k, j)
    f = graph.functions[k]
    letters = "abcdefghijklmnopqrstuvwxyz"
    if len(f.scope) > len(letters):
        raise DimensionMismatch("scope too large for message update")
    operands = [f.table]
    subs = [letters[: len(f.scope)]]
    target = letters[f.scope.index(j)]
    for pos, v in enumerate(f.scope):
        if v == j:
            continue
        msg = state.vn_to_fn.get((v, k))
        if msg is None:
            msg = np.ones(graph.alphabet_sizes[v])
        operands.append(np.asarray(msg, dtype=np.float64))
        subs.append(letters[pos])
    out = np.einsum(",".join(subs) + "->" + target, *operands)
    state.fn_to_vn[(k, j)] = out
    return out


def vn_to_fn_update(graph: GenericFactorGraph, state: MessageState, j: int, k: int) -> np.ndarray:
    """Message from variable j to function k.

    Product of the messages from j's other neighboring functions, normalized
    to sum 1. A leaf variable sends the uniform distribution. Each incoming
    factor is scaled by its maximum first so that long products cannot
    underflow; a genuinely all-zero product raises ZeroBelief.
    """
    _require_edge(graph, k, j)
    out = np.ones(graph.alphabet_sizes[j], dtype=np.float64)
    for other in graph.vn_neighbors[j]:
        if other == k:
            continue
        msg = state.fn_to_vn.get((other, j))
        if msg is None:
            continue
        msg = np.asarray(msg, dtype=np.float64)
        peak = msg.max()
        if peak <= 0:
            raise ZeroBelief(f"message from function {other} to variable {j} is all zero")
        out *= msg / peak
    total = out.sum()
    if total <= 0:
        raise ZeroBelief(f"variable {j} has contradictory incoming messages")
    out /= total
    state.vn_to_fn[(j, k)] = out
    return out


def _marginals(graph: GenericFactorGraph, state: MessageState) -> list[np.ndarray]:
    out = []
    for j in range(graph.vn_count):
        bel = np.ones(graph.alphabet_sizes[j], dtype=np.float64)
        for k in graph.vn_neighbors[j]:
            msg = state.fn_to_vn.get((k, j))
            if msg is None:
                continue
            peak = np.max(msg)
            if peak <= 0:
                raise ZeroBelief(f"function {k} sends zero belief to variable {j}")
            bel *= np.asarray(msg) / peak
        total = bel.sum()
        if total <= 0:
            raise ZeroBelief(f"variable {j} has zero total belief")
        out.append(bel / total)
    return out


@dataclass(frozen=True)
class SpaResult:
    """Marginals plus schedule bookkeeping.

    rounds (tree schedule only) lists, per round, the directed messages
    fired, as ("fn_to_vn", k, j) or ("vn_to_fn", j, k) tuples. iterations is
    the number of flooding sweeps actually run (0 for the tree schedule).
    """

    marginals: list[np.ndarray]
    schedule: str
    iterations: int
    rounds: tuple | None = None


def _run_tree(graph: GenericFactorGraph) -> SpaResult:
    state = MessageState()
    # Directed edges; one fires once all other edges into its source are done.
    fn_edges = {(k, v) for k, f in enumerate(graph.functions) for v in f.scope}
    vn_edges = {(v, k) for (k, v) in fn_edges}
    fired_fn: set = set()
    fired_vn: set = set()
    rounds = []
    total = len(fn_edges) + len(vn_edges)
    while len(fired_fn) + len(fired_vn) < total:
        ready_fn = [
            (k, j)
            for (k, j) in sorted(fn_edges - fired_fn)
            if all((v, k) in fired_vn for v in graph.functions[k].scope if v != j)
        ]
        ready_vn = [
            (j, k)
            for (j, k) in sorted(vn_edges - fired_vn)
            if all((l, j) in fired_fn for l in graph.vn_neighbors[j] if l != k)
        ]
        if not ready_fn and not ready_vn:
            raise ScheduleInfeasible("graph has a cycle; tree schedule cannot complete")
        this_round = []
        for k, j in ready_fn:
            fn_to_vn_update(graph, state, k, j)
            this_round.append(("fn_to_vn", k, j))
        for j, k in ready_vn:
            vn_to_fn_update(graph, state, j, k)
            this_round.append(("vn_to_fn", j, k))
        fired_fn.update((k, j) for (k, j) in ready_fn)
        fired_vn.update((j, k) for (j, k) in ready_vn)
        rounds.append(tuple(this_round))
    return SpaResult(
        marginals=_marginals(graph, state),
        schedule="tree",
        iterations=0,
        rounds=tuple(rounds),
    )


def _run_flooding(graph: GenericFactorGraph, max_iters: int, epsilon: float) -> SpaResult:
    state = MessageState()
    for k, f in enumerate(graph.functions):
        for v in f.scope:
            state.vn_to_fn[(v, k)] = np.full(graph.alphabet_sizes[v], 1.0 / graph.alphabet_sizes[v])
    iters = 0
    for it in range(max_iters):
        iters = it + 1
        prev = {e: m.copy() for e, m in state.vn_to_fn.items()}
        # All function messages read the previous variable messages.
        snapshot = MessageState(fn_to_vn=state.fn_to_vn, vn_to_fn=prev)
        for k, f in enumerate(graph.functions):
            for v in f.scope:
                fn_to_vn_update(graph, snapshot, k, v)
        state.fn_to_vn = snapshot.fn_to_vn
        for j in range(graph.vn_count):
            for k in graph.vn_neighbors[j]:
                vn_to_fn_update(graph, state, j, k)
        delta = max(
            (np.abs(state.vn_to_fn[e] - prev[e]).max() for e in prev),
            default=0.0,
        )
        if delta < epsilon:
            break
    return SpaResult(marginals=_marginals(graph, state), schedule="flooding", iterations=iters)


def run_spa(
    graph: GenericFactorGraph,
    schedule: str = "tree",
    max_iters: int = 50,
    epsilon: float = 1e-6,
) -> SpaResult:
    """Run sum-product with the given schedule and return per-variable marginals.

    The tree schedule fires each directed message exactly once, as soon as
    its source has heard from all its other neighbors; it raises
    ScheduleInfeasible on cyclic graphs. Flooding sweeps all function
    messages (reading the previous iteration's variable messages), then all
    variable messages, until the variable messages move less than epsilon in
    the max norm or max_iters is reached.
    """
    if schedule == "tree":
        return _run_tree(graph)
    if schedule == "flooding":
        if max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        return _run_flooding(graph, max_iters, epsilon)
    raise ValueError(f"unknown schedule {schedule!r}, expected one of {SCHEDULES}")


def brute_force_marginals(graph: GenericFactorGraph, cap: int = 2**20) -> list[np.ndarray]:
    """Exact marginals by enumerating the full joint table.

    The joint has prod(alphabet_sizes) states; StateSpaceTooLarge is raised
    beyond cap. Intended as the reference for testing message passing.
    """
    total = 1
    for a in graph.alphabet_sizes:
        total *= a
        if total > cap:
            raise StateSpaceTooLarge(f"joint state space exceeds cap {cap}")
    joint = np.ones(graph.alphabet_sizes, dtype=np.float64)
    for f in graph.functions:
        order = np.argsort(f.scope)
        table = np.transpose(f.table, order)
        shape = [1] * graph.vn_count
        for v in f.scope:
            shape[v] = graph.alphabet_sizes[v]
        joint = joint * table.reshape(shape)
    z = joint.sum()
    if z <= 0:
        raise ZeroBelief("joint distribution has zero mass")
    out = []
    for j in range(graph.vn_count):
        axes = tuple(a for a in range(graph.vn_count) if a != j)
        marg = joint.sum(axis=axes)
        out.append(marg / marg.sum())
    return out
