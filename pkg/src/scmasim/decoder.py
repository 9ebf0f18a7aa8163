"""Multiuser detection: iterative message passing and an exact enumeration oracle.

All three detectors start from per-resource likelihood tables: for resource k
the table scores every combination of the df colliding users' codewords
against the observation y_k. The iterative detectors exchange messages on the
resource/user graph, in the probability domain (sum-product) or the log
domain with max replacing the sum (max-log). The oracle enumerates the full
joint space, which is exact but exponential in J.

Everything is vectorized over a leading batch axis; the single-frame entry
points are the batch-of-one case, so there is exactly one code path.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .codebook import CodebookSet
from .errors import (
    ConfigInvalid,
    DimensionMismatch,
    StateSpaceTooLarge,
    ZeroBelief,
    ZeroNoiseVariance,
)
from .spa import GenericFactorGraph, LocalFunction, run_spa

DOMAINS = ("probability", "log")
ALGORITHMS = ("spa", "maxlog", "map-oracle")
ORACLE_STATE_CAP = 2**20


@dataclass(frozen=True)
class DecoderConfig:
    """Iteration budget, stop threshold, codeword priors, message domain.

    epsilon == 0 disables the early stop so exactly n_iter iterations run.
    prior is None (uniform), one length-M vector shared by all users, or a
    (J, M) matrix; rows must sum to 1 within 1e-12.
    """

    n_iter: int = 10
    epsilon: float = 1e-6
    prior: np.ndarray | None = None
    domain: str = "probability"


@dataclass(frozen=True)
class DecodeResult:
    """Per-user outputs of one decoded frame.

    beliefs is (J, M): a distribution per user for probability-domain
    decoders, unnormalized log scores for max-log. bit_llrs is (J, log2 M),
    positive favoring bit 0; hard_bits follows sign(llr) with ties to 0.
    hard_indices are 1-based codeword indices (argmax belief, lowest index
    on ties). iterations_used is 0 for the oracle.
    """

    beliefs: np.ndarray
    bit_llrs: np.ndarray
    hard_bits: np.ndarray
    hard_indices: np.ndarray
    iterations_used: int


@dataclass(frozen=True)
class BlockDecodeResult:
    """Batched decode outputs; leading axis is the frame within the block."""

    beliefs: np.ndarray
    bit_llrs: np.ndarray
    hard_bits: np.ndarray
    hard_indices: np.ndarray
    iterations: np.ndarray


@dataclass(frozen=True)
class LikelihoodTables:
    """Per-resource observation scores.

    tables has shape (K,) + (M,)*df; axis s of table k indexes the codeword
    of the s-th user on resource k (users in increasing order). domain is
    "probability" (entries exp(-|r|^2/N0)) or "log" (the exponent itself).
    """

    tables: np.ndarray
    domain: str


@dataclass(frozen=True)
class SystemIndex:
    """Index arrays tying users, resources, and codeword values together.

    fn_users[k] lists the users on resource k (0-based, ascending) and
    vn_res[j] the resources of user j; fn_slot and vn_slot are the positions
    of each edge as seen from the opposite endpoint, so messages can be
    gathered with one advanced-indexing step. re_codewords[k, s] holds the
    M codeword values user fn_users[k, s] places on resource k. group0[i]
    flags the codewords whose i-th bit (most significant first) is 0.
    """

    K: int
    J: int
    M: int
    dv: int
    df: int
    n_bits: int
    fn_users: np.ndarray
    vn_res: np.ndarray
    fn_slot: np.ndarray
    vn_slot: np.ndarray
    re_codewords: np.ndarray
    group0: np.ndarray


def system_index(cbs: CodebookSet) -> SystemIndex:
    """Build the gather indices and codeword tensors for one codebook set."""
    p = cbs.params
    F = cbs.signature
    fn_users = np.zeros((p.K, p.df), dtype=np.intp)
    vn_res = np.zeros((p.J, p.dv), dtype=np.intp)
    for k in range(p.K):
        fn_users[k] = np.nonzero(F[k])[0]
    for j in range(p.J):
        vn_res[j] = np.nonzero(F[:, j])[0]
    fn_slot = np.zeros((p.K, p.df), dtype=np.intp)
    vn_slot = np.zeros((p.J, p.dv), dtype=np.intp)
    for k in range(p.K):
        for s, j in enumerate(fn_users[k]):
            fn_slot[k, s] = int(np.nonzero(vn_res[j] == k)[0][0])
    for j in range(p.J):
        for u, k in enumerate(vn_res[j]):
            vn_slot[j, u] = int(np.nonzero(fn_users[k] == j)[0][0])
    re_codewords = np.zeros((p.K, p.df, cbs.M), dtype=np.complex128)
    for k in range(p.K):
        for s, j in enumerate(fn_users[k]):
            re_codewords[k, s] = cbs.codebooks[j, k]
    b = cbs.bits_per_codeword
    m_idx = np.arange(cbs.M)
    group0 = np.stack([((m_idx >> (b - 1 - i)) & 1) == 0 for i in range(b)])
    return SystemIndex(
        K=p.K, J=p.J, M=cbs.M, dv=p.dv, df=p.df, n_bits=b,
        fn_users=fn_users, vn_res=vn_res, fn_slot=fn_slot, vn_slot=vn_slot,
        re_codewords=re_codewords, group0=group0,
    )


def _check_frames(y, H, sys: SystemIndex, n0: float):
    y = np.asarray(y, dtype=np.complex128)
    H = np.asarray(H, dtype=np.complex128)
    if y.ndim != 2 or y.shape[1] != sys.K:
        raise DimensionMismatch(f"y must be (frames, {sys.K}), got {y.shape}")
    if H.shape != (y.shape[0], sys.K, sys.J):
        raise DimensionMismatch(f"H must be ({y.shape[0]}, {sys.K}, {sys.J}), got {H.shape}")
    if not n0 > 0:
        raise ZeroNoiseVariance(f"noise variance must be > 0, got {n0}")
    return y, H


def _log_tables_block(y, H, sys: SystemIndex, n0: float) -> np.ndarray:
    """Log-domain tables for a block: shape (frames, K) + (M,)*df."""
    nf = y.shape[0]
    h = H[:, np.arange(sys.K)[:, None], sys.fn_users]  # (frames, K, df)
    total = np.zeros((nf, sys.K) + (1,) * sys.df, dtype=np.complex128)
    for s in range(sys.df):
        contrib = h[:, :, s, None] * sys.re_codewords[None, :, s, :]  # (frames, K, M)
        shape = (nf, sys.K) + (1,) * s + (sys.M,) + (1,) * (sys.df - 1 - s)
        total = total + contrib.reshape(shape)
    resid = y.reshape((nf, sys.K) + (1,) * sys.df) - total
    return -(resid.real**2 + resid.imag**2) / n0


def build_likelihood_tables(y, H, cbs: CodebookSet, n0: float, domain: str = "probability") -> LikelihoodTables:
    """Per-resource likelihood tables for a single frame.

    y is length K, H is K x J. In the probability domain each entry is
    exp(-|y_k - sum of the df users' contributions|^2 / n0); the log domain
    returns the exponent itself.
    """
    if domain not in DOMAINS:
        raise ValueError(f"unknown domain {domain!r}, expected one of {DOMAINS}")
    sys = system_index(cbs)
    y2, H2 = _check_frames(np.asarray(y)[None, :], np.asarray(H)[None, :, :], sys, n0)
    t = _log_tables_block(y2, H2, sys, n0)[0]
    return LikelihoodTables(tables=t if domain == "log" else np.exp(t), domain=domain)


def _prior_matrix(prior, sys: SystemIndex) -> np.ndarray:
    if prior is None:
        return np.full((sys.J, sys.M), 1.0 / sys.M)
    arr = np.asarray(prior, dtype=np.float64)
    if arr.ndim == 1:
        arr = np.tile(arr, (sys.J, 1))
    if arr.shape != (sys.J, sys.M):
        raise ConfigInvalid(f"prior must be ({sys.M},) or ({sys.J}, {sys.M}), got {arr.shape}")
    if (arr < 0).any() or np.abs(arr.sum(axis=1) - 1.0).max() > 1e-12:
        raise ConfigInvalid("prior rows must be nonnegative and sum to 1 within 1e-12")
    return arr


def _reduce_last(tensor: np.ndarray, log: bool) -> np.ndarray:
    """Reduce the trailing axis by pairwise halving.

    numpy's max-reduction over a short contiguous axis is several times
    slower than elementwise maximum on strided views; halving makes the sum
    and max paths cost the same.
    """
    while tensor.shape[-1] > 1:
        n = tensor.shape[-1]
        if n % 2:
            head, rest = tensor[..., :1], tensor[..., 1:]
            tensor = np.maximum(head, rest.max(axis=-1, keepdims=True)) if log else head + rest.sum(axis=-1, keepdims=True)
            break
        a, b = tensor[..., ::2], tensor[..., 1::2]
        tensor = np.maximum(a, b) if log else a + b
    return tensor[..., 0]


def _contract_top(tensor: np.ndarray, msg: np.ndarray, log: bool) -> np.ndarray:
    """Contract the highest (trailing) slot axis against msg (frames, K, M)."""
    mv = msg.reshape(msg.shape[:2] + (1,) * (tensor.ndim - 3) + (msg.shape[2],))
    return _reduce_last(tensor + mv if log else tensor * mv, log)


def _contract_bottom(tensor: np.ndarray, msg: np.ndarray, log: bool) -> np.ndarray:
    """Contract the lowest slot axis (axis 2) against msg (frames, K, M)."""
    mv = msg.reshape(msg.shape[:2] + (msg.shape[2],) + (1,) * (tensor.ndim - 3))
    out = tensor + mv if log else tensor * mv
    while out.shape[2] > 1:  # same halving rationale as _reduce_last
        if out.shape[2] % 2:
            head, rest = out[:, :, :1], out[:, :, 1:]
            red = rest.max(axis=2, keepdims=True) if log else rest.sum(axis=2, keepdims=True)
            out = np.maximum(head, red) if log else head + red
            break
        a, b = out[:, :, ::2], out[:, :, 1::2]
        out = np.maximum(a, b) if log else a + b
    return out[:, :, 0]


def _fn_messages(tables: np.ndarray, V: np.ndarray, log: bool) -> np.ndarray:
    """All df resource-to-user messages of every resource at once.

    tables is (frames, K) + (M,)*df, V the incoming user messages
    (frames, K, df, M). The suffix chain suf[t] holds the table with slots
    above t already contracted, shared across targets; each target then
    contracts its lower slots in ascending order. Returns (frames, K, df, M).
    """
    df = V.shape[2]
    suf = [None] * df
    suf[df - 1] = tables
    for t in range(df - 2, -1, -1):
        suf[t] = _contract_top(suf[t + 1], V[:, :, t + 1, :], log)
    out = np.empty((tables.shape[0], tables.shape[1], df, V.shape[3]))
    for t in range(df):
        cur = suf[t]
        for s in range(t):
            cur = _contract_bottom(cur, V[:, :, s, :], log)
        out[:, :, t, :] = cur
    return out


def _extrinsic(W: np.ndarray, log: bool) -> np.ndarray:
    """Leave-one-out combination along the slot axis of (frames, J, dv, M)."""
    dv = W.shape[2]
    if dv == 1:
        return np.zeros_like(W) if log else np.ones_like(W)
    if dv == 2:
        return W[:, :, ::-1, :]
    acc = np.cumsum if log else np.cumprod
    pref = np.zeros_like(W) if log else np.ones_like(W)
    suf = np.zeros_like(W) if log else np.ones_like(W)
    pref[:, :, 1:, :] = acc(W[:, :, :-1, :], axis=2)
    suf[:, :, :-1, :] = acc(W[:, :, :0:-1, :], axis=2)[:, :, ::-1, :]
    return (pref + suf) if log else (pref * suf)


def _iterate_block(y, H, sys: SystemIndex, n0: float, cfg: DecoderConfig, log: bool):
    """Shared sum-product / max-log iteration loop over a block of frames.

    Returns (beliefs, iterations) with beliefs (frames, J, M): normalized
    distributions for sum-product, raw log scores for max-log.
    """
    nf = y.shape[0]
    prior = _prior_matrix(cfg.prior, sys)
    tables = _log_tables_block(y, H, sys, n0)
    if log:
        with np.errstate(divide="ignore"):
            prior_b = np.log(prior)[None, :, :]
    else:
        tables = np.exp(tables)
        prior_b = prior[None, :, :]

    shape_v2f = (nf, sys.J, sys.dv, sys.M)
    v2f = np.full(shape_v2f, np.log(1.0 / sys.M) if log else 1.0 / sys.M)

    beliefs = None
    frozen = np.zeros(nf, dtype=bool)
    frozen_beliefs = np.zeros((nf, sys.J, sys.M))
    iterations = np.full(nf, cfg.n_iter, dtype=np.int64)
    for it in range(1, cfg.n_iter + 1):
        V = v2f[:, sys.fn_users, sys.fn_slot, :]  # (frames, K, df, M)
        f2v = _fn_messages(tables, V, log)
        if not log:
            tot = f2v.sum(axis=3, keepdims=True)
            bad = tot[..., 0] <= 0
            if bad.any():
                frame = int(np.argwhere(bad)[0][0])
                raise ZeroBelief(f"all-zero resource message in frame {frame}")
            f2v = f2v / tot

        W = f2v[:, sys.vn_res, sys.vn_slot, :]  # (frames, J, dv, M)
        ext = _extrinsic(W, log)
        if log:
            v2f = prior_b[:, :, None, :] + ext
            new_beliefs = prior_b + W.sum(axis=2)
            if cfg.epsilon > 0:  # convergence metric: shift-invariant log scores
                metric = new_beliefs - new_beliefs.max(axis=2, keepdims=True)
        else:
            v2f = prior_b[:, :, None, :] * ext
            tot = v2f.sum(axis=3, keepdims=True)
            bad = tot[..., 0] <= 0
            if bad.any():
                frame = int(np.argwhere(bad)[0][0])
                raise ZeroBelief(f"contradictory evidence for a user in frame {frame}")
            v2f = v2f / tot
            new_beliefs = prior_b * W.prod(axis=2)
            tot = new_beliefs.sum(axis=2, keepdims=True)
            bad = tot[..., 0] <= 0
            if bad.any():
                frame = int(np.argwhere(bad)[0][0])
                raise ZeroBelief(f"zero total belief in frame {frame}")
            new_beliefs = new_beliefs / tot
            metric = new_beliefs

        if cfg.epsilon > 0:
            if beliefs is not None:
                delta = np.abs(metric - prev_metric).max(axis=(1, 2))
                newly = (~frozen) & (delta < cfg.epsilon)
                if newly.any():
                    frozen_beliefs[newly] = new_beliefs[newly]
                    iterations[newly] = it
                    frozen[newly] = True
                if frozen.all():
                    beliefs = new_beliefs
                    break
            prev_metric = metric
        beliefs = new_beliefs

    out = np.where(frozen[:, None, None], frozen_beliefs, beliefs)
    return out, iterations


def _bit_llrs(beliefs: np.ndarray, sys: SystemIndex, log: bool) -> np.ndarray:
    """Bit LLRs from beliefs, positive favoring bit 0."""
    nf = beliefs.shape[0]
    llr = np.zeros((nf, sys.J, sys.n_bits))
    with np.errstate(divide="ignore"):
        for i in range(sys.n_bits):
            g0 = beliefs[:, :, sys.group0[i]]
            g1 = beliefs[:, :, ~sys.group0[i]]
            if log:
                llr[:, :, i] = g0.max(axis=2) - g1.max(axis=2)
            else:
                llr[:, :, i] = np.log(g0.sum(axis=2)) - np.log(g1.sum(axis=2))
    return llr


def _finish_block(beliefs, iterations, sys: SystemIndex, log: bool) -> BlockDecodeResult:
    llrs = _bit_llrs(beliefs, sys, log)
    hard_bits = (llrs < 0).astype(np.uint8)
    hard_indices = beliefs.argmax(axis=2) + 1
    return BlockDecodeResult(
        beliefs=beliefs,
        bit_llrs=llrs,
        hard_bits=hard_bits,
        hard_indices=hard_indices,
        iterations=iterations,
    )


def _logsumexp(a: np.ndarray, axis) -> np.ndarray:
    m = np.max(a, axis=axis, keepdims=True)
    safe = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(divide="ignore"):
        out = np.log(np.sum(np.exp(a - safe), axis=axis)) + np.squeeze(safe, axis=axis)
    return np.where(np.isfinite(np.squeeze(m, axis=axis)), out, np.squeeze(m, axis=axis))


def _oracle_block(y, H, sys: SystemIndex, n0: float, prior, cap: int) -> BlockDecodeResult:
    if sys.M**sys.J > cap:
        raise StateSpaceTooLarge(f"{sys.M}**{sys.J} joint states exceed cap {cap}")
    nf = y.shape[0]
    prior_m = _prior_matrix(prior, sys)
    tables = _log_tables_block(y, H, sys, n0)
    joint = np.zeros((nf,) + (sys.M,) * sys.J)
    with np.errstate(divide="ignore"):
        log_prior = np.log(prior_m)
    for j in range(sys.J):
        shape = (1,) + (1,) * j + (sys.M,) + (1,) * (sys.J - 1 - j)
        joint = joint + log_prior[j].reshape(shape)
    for k in range(sys.K):
        # Table slot s belongs to user fn_users[k, s]; users ascend, so the
        # slot order matches the joint's axis order directly.
        shape = [nf] + [1] * sys.J
        for s in range(sys.df):
            shape[1 + int(sys.fn_users[k, s])] = sys.M
        t = tables[:, k]
        joint = joint + t.reshape(shape)
    log_marg = np.zeros((nf, sys.J, sys.M))
    for j in range(sys.J):
        axes = tuple(1 + a for a in range(sys.J) if a != j)
        log_marg[:, j, :] = _logsumexp(joint, axes)
    log_z = _logsumexp(log_marg[:, 0, :], axis=1)
    if not np.isfinite(log_z).all():
        frame = int(np.argwhere(~np.isfinite(log_z))[0][0])
        raise ZeroBelief(f"zero joint likelihood in frame {frame}")
    beliefs = np.exp(log_marg - log_z[:, None, None])
    llrs = np.zeros((nf, sys.J, sys.n_bits))
    for i in range(sys.n_bits):
        llrs[:, :, i] = _logsumexp(log_marg[:, :, sys.group0[i]], axis=2) - _logsumexp(
            log_marg[:, :, ~sys.group0[i]], axis=2
        )
    hard_bits = (llrs < 0).astype(np.uint8)
    hard_indices = log_marg.argmax(axis=2) + 1
    return BlockDecodeResult(
        beliefs=beliefs,
        bit_llrs=llrs,
        hard_bits=hard_bits,
        hard_indices=hard_indices,
        iterations=np.zeros(nf, dtype=np.int64),
    )


def decode_frames(
    y,
    H,
    cbs: CodebookSet,
    n0: float,
    cfg: DecoderConfig | None = None,
    algorithm: str = "spa",
    sys: SystemIndex | None = None,
) -> BlockDecodeResult:
    """Decode a block of frames; y is (frames, K), H is (frames, K, J).

    algorithm selects sum-product ("spa"), max-log ("maxlog"), or the exact
    enumeration oracle ("map-oracle"). Frames are independent: results do
    not depend on how frames are grouped into blocks.
    """
    if algorithm not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algorithm!r}, expected one of {ALGORITHMS}")
    cfg = cfg or DecoderConfig(domain="log" if algorithm == "maxlog" else "probability")
    sys = sys or system_index(cbs)
    y, H = _check_frames(y, H, sys, n0)
    if algorithm == "map-oracle":
        return _oracle_block(y, H, sys, n0, cfg.prior, ORACLE_STATE_CAP)
    log = algorithm == "maxlog"
    want = "log" if log else "probability"
    if cfg.domain != want:
        raise ConfigInvalid(f"{algorithm} runs in the {want} domain, config says {cfg.domain!r}")
    if cfg.n_iter < 1:
        raise ConfigInvalid("n_iter must be >= 1")
    beliefs, iterations = _iterate_block(y, H, sys, n0, cfg, log)
    return _finish_block(beliefs, iterations, sys, log)


def _single(result: BlockDecodeResult) -> DecodeResult:
    return DecodeResult(
        beliefs=result.beliefs[0],
        bit_llrs=result.bit_llrs[0],
        hard_bits=result.hard_bits[0],
        hard_indices=result.hard_indices[0],
        iterations_used=int(result.iterations[0]),
    )


def spa_decode(y, H, cbs: CodebookSet, n0: float, cfg: DecoderConfig | None = None) -> DecodeResult:
    """Sum-product decode of one frame (y length K, H of shape K x J)."""
    cfg = cfg or DecoderConfig()
    return _single(decode_frames(np.asarray(y)[None], np.asarray(H)[None], cbs, n0, cfg, "spa"))


def maxlog_decode(y, H, cbs: CodebookSet, n0: float, cfg: DecoderConfig | None = None) -> DecodeResult:
    """Max-log decode of one frame; beliefs come back as raw log scores."""
    cfg = cfg or DecoderConfig(domain="log")
    return _single(decode_frames(np.asarray(y)[None], np.asarray(H)[None], cbs, n0, cfg, "maxlog"))


def map_oracle_decode(y, H, cbs: CodebookSet, n0: float, prior=None) -> DecodeResult:
    """Exact joint-enumeration decode of one frame.

    Marginals are exact, so this is the reference the iterative decoders are
    judged against; cost grows as M**J.
    """
    cfg = DecoderConfig(prior=prior)
    return _single(decode_frames(np.asarray(y)[None], np.asarray(H)[None], cbs, n0, cfg, "map-oracle"))


def generic_reference_beliefs(y, H, cbs: CodebookSet, n0: float, cfg: DecoderConfig | None = None) -> np.ndarray:
    """Beliefs via the generic engine, for cross-checking the fast decoder.

    Builds the explicit factor graph (K likelihood functions plus one
    degree-1 prior function per user) and floods it for cfg.n_iter sweeps
    with the same stop threshold. Returns normalized (J, M) beliefs.
    """
    cfg = cfg or DecoderConfig()
    sys = system_index(cbs)
    t = build_likelihood_tables(y, H, cbs, n0, "probability")
    prior = _prior_matrix(cfg.prior, sys)
    funcs = [
        LocalFunction(scope=tuple(int(u) for u in sys.fn_users[k]), table=t.tables[k])
        for k in range(sys.K)
    ]
    funcs += [LocalFunction(scope=(j,), table=prior[j]) for j in range(sys.J)]
    graph = GenericFactorGraph([sys.M] * sys.J, funcs)
    res = run_spa(graph, schedule="flooding", max_iters=cfg.n_iter, epsilon=cfg.epsilon)
    return np.stack(res.marginals)
