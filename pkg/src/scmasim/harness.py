"""Monte-Carlo BER/FER harness and the orthogonal-access baseline.

Frames are simulated in fixed-size blocks; each frame owns a counter-based
random stream keyed by (seed, frame index), so every noise level, decoder,
and worker count sees exactly the same bits, channels, and noise shapes.
Stopping is checked only at block boundaries and blocks commit in frame
order, which makes every count in the output independent of --workers.
Decode time is measured around the decode call alone.
"""

from __future__ import annotations

import json
import time
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .codebook import CodebookSet, build_codebook_set
from .decoder import DecoderConfig, decode_frames, system_index
from .errors import ConfigInvalid
from .signature import load_signature
from .transceiver import complex_randn, draw_channel, ebn0_db_to_n0

SCMA_DECODERS = ("spa", "maxlog", "map-oracle")
CSV_HEADER = "decoder,M,channel,ebn0_db,frames,bits,bit_errors,frame_errors,ber,fer,elapsed_s,iters_mean"
OMA_BLOCK = 4096
_DRAWS_PER_FRAME = 2**40


@dataclass(frozen=True)
class SimConfig:
    """One sweep: a decoder, a channel, and an Eb/N0 grid with stop rules."""

    signature: str = "builtin46"
    m: int = 4
    channel: str = "rayleigh"
    decoder: str = "spa"
    ebn0_db: tuple[float, ...] = (0.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 14.0, 16.0)
    min_bit_errors: int = 200
    max_frames: int = 1_000_000
    n_iter: int = 10
    epsilon: float = 1e-6
    seed: int = 0
    workers: int = 1
    out: str | None = None
    format: str = "csv"
    timing: str = "wall"


@dataclass(frozen=True)
class BerRecord:
    """One measured point; field names match the CSV columns."""

    decoder: str
    M: int
    channel: str
    ebn0_db: float
    frames: int
    bits: int
    bit_errors: int
    frame_errors: int
    ber: float
    fer: float
    elapsed_s: float
    iters_mean: float


def frame_rng(seed: int, frame_index: int) -> np.random.Generator:
    """Independent, reproducible random stream for one frame.

    A Philox counter stream advanced to a disjoint window per frame; the
    stream depends only on (seed, frame_index), never on worker layout.
    """
    bg = np.random.Philox(seed)
    bg.advance(frame_index * _DRAWS_PER_FRAME)
    return np.random.Generator(bg)


def parse_ebn0_grid(text: str) -> tuple[float, ...]:
    """Parse "start:step:stop" (inclusive), a comma list, or a single value."""
    text = text.strip()
    try:
        if ":" in text:
            parts = [float(t) for t in text.split(":")]
            if len(parts) != 3:
                raise ValueError
            start, step, stop = parts
            if step <= 0 or stop < start:
                raise ValueError
            n = int(np.floor((stop - start) / step + 1e-9)) + 1
            return tuple(start + i * step for i in range(n))
        if "," in text:
            return tuple(float(t) for t in text.split(","))
        return (float(text),)
    except ValueError:
        raise ConfigInvalid(f"cannot parse Eb/N0 grid {text!r}") from None


def load_config_file(path) -> dict[str, str]:
    """Read key=value lines; '#' starts a comment, blank lines are skipped."""
    out: dict[str, str] = {}
    for ln in Path(path).read_text().splitlines():
        ln = ln.split("#", 1)[0].strip()
        if not ln:
            continue
        if "=" not in ln:
            raise ConfigInvalid(f"config line {ln!r} is not key=value")
        key, val = ln.split("=", 1)
        out[key.strip().replace("-", "_")] = val.strip()
    return out


def validate_config(cfg: SimConfig) -> SimConfig:
    if cfg.decoder not in SCMA_DECODERS:
        raise ConfigInvalid(f"decoder must be one of {SCMA_DECODERS}, got {cfg.decoder!r}")
    if cfg.channel not in ("awgn", "rayleigh"):
        raise ConfigInvalid(f"channel must be awgn or rayleigh, got {cfg.channel!r}")
    if not cfg.ebn0_db:
        raise ConfigInvalid("Eb/N0 grid is empty")
    if cfg.min_bit_errors < 1:
        raise ConfigInvalid("min_bit_errors must be >= 1")
    if cfg.max_frames < 1:
        raise ConfigInvalid("max_frames must be >= 1")
    if cfg.n_iter < 1:
        raise ConfigInvalid("n_iter must be >= 1")
    if cfg.epsilon < 0:
        raise ConfigInvalid("epsilon must be >= 0")
    if cfg.workers < 1:
        raise ConfigInvalid("workers must be >= 1")
    if cfg.timing not in ("wall", "none"):
        raise ConfigInvalid(f"timing must be wall or none, got {cfg.timing!r}")
    if cfg.format not in ("csv", "json"):
        raise ConfigInvalid(f"format must be csv or json, got {cfg.format!r}")
    return cfg


def _block_frames(K: int, M: int, df: int) -> int:
    """Frames per block, a pure function of the system dimensions."""
    return int(np.clip(2**20 // (K * M**df), 16, 512))


def _generate_block(seed, start, count, channel, cbs, sys):
    """Bits, channels, received vectors for frames [start, start+count).

    Reproduces exactly the per-frame draw order of the transceiver module:
    bits, then channel gains, then the unit-variance noise shape.
    """
    J, K, b = sys.J, sys.K, sys.n_bits
    bits = np.zeros((count, J, b), dtype=np.uint8)
    H = np.zeros((count, K, J), dtype=np.complex128)
    Z = np.zeros((count, K), dtype=np.complex128)
    for i in range(count):
        rng = frame_rng(seed, start + i)
        bits[i] = rng.integers(0, 2, size=(J, b))
        H[i] = draw_channel(channel, K, J, rng)
        Z[i] = complex_randn(K, rng)
    weights = 1 << np.arange(b - 1, -1, -1)
    idx0 = (bits * weights).sum(axis=2)
    cw = cbs.codebooks[np.arange(J)[None, :], :, idx0]  # (count, J, K)
    clean = np.einsum("nkj,njk->nk", H, cw)
    return bits, H, clean, Z


def _run_block(seed, start, count, channel, n0, cbs, sys, cfg: DecoderConfig, algorithm):
    """Decode one block; returns (bit_errors, frame_errors, iters_sum, elapsed_s)."""
    bits, H, clean, Z = _generate_block(seed, start, count, channel, cbs, sys)
    y = clean + np.sqrt(n0) * Z
    t0 = time.perf_counter()
    res = decode_frames(y, H, cbs, n0, cfg, algorithm, sys=sys)
    elapsed = time.perf_counter() - t0
    wrong = res.hard_bits != bits
    bit_errors = int(wrong.sum())
    frame_errors = int(wrong.any(axis=(1, 2)).sum())
    return bit_errors, frame_errors, int(res.iterations.sum()), elapsed


_WORKER_STATE: dict = {}


def _worker_init(cbs, channel, seed, cfg, algorithm):
    _WORKER_STATE["args"] = (cbs, system_index(cbs), channel, seed, cfg, algorithm)


def _worker_task(n0, start, count):
    cbs, sys, channel, seed, cfg, algorithm = _WORKER_STATE["args"]
    return _run_block(seed, start, count, channel, n0, cbs, sys, cfg, algorithm)


def _sweep_point(cfg: SimConfig, n0, cbs, sys, dcfg, pool):
    block = _block_frames(sys.K, sys.M, sys.df)
    frames = bits_seen = bit_errors = frame_errors = iters_sum = 0
    elapsed = 0.0

    def partition():
        start = 0
        while start < cfg.max_frames:
            n = min(block, cfg.max_frames - start)
            yield start, n
            start += n

    if pool is None:
        for start, n in partition():
            r = _run_block(cfg.seed, start, n, cfg.channel, n0, cbs, sys, dcfg, cfg.decoder)
            bit_errors += r[0]
            frame_errors += r[1]
            iters_sum += r[2]
            elapsed += r[3]
            frames += n
            if bit_errors >= cfg.min_bit_errors:
                break
    else:
        parts = partition()
        inflight: deque = deque()
        stopped = False
        while True:
            while not stopped and len(inflight) < cfg.workers + 1:
                nxt = next(parts, None)
                if nxt is None:
                    break
                inflight.append((nxt[1], pool.submit(_worker_task, n0, nxt[0], nxt[1])))
            if not inflight:
                break
            n, fut = inflight.popleft()
            r = fut.result()
            if stopped:
                continue
            bit_errors += r[0]
            frame_errors += r[1]
            iters_sum += r[2]
            elapsed += r[3]
            frames += n
            if bit_errors >= cfg.min_bit_errors:
                stopped = True

    bits_seen = frames * sys.J * sys.n_bits
    return frames, bits_seen, bit_errors, frame_errors, iters_sum, elapsed


def run_sweep(cfg: SimConfig, cbs: CodebookSet | None = None) -> list[BerRecord]:
    """Simulate one decoder over the Eb/N0 grid and return one record per point.

    Per point, blocks of frames are decoded until min_bit_errors is reached
    or max_frames have been spent. A frame is in error when any of its bits
    is. elapsed_s covers decoding only; timing="none" zeroes it for
    byte-stable output.
    """
    validate_config(cfg)
    if cbs is None:
        cbs = build_codebook_set(load_signature(cfg.signature), cfg.m)
    sys = system_index(cbs)
    es = float(np.mean(np.abs(cbs.codebooks[0]) ** 2) * sys.K)
    domain = "log" if cfg.decoder == "maxlog" else "probability"
    dcfg = DecoderConfig(n_iter=cfg.n_iter, epsilon=cfg.epsilon, domain=domain)
    pool = None
    records = []
    try:
        if cfg.workers > 1:
            pool = ProcessPoolExecutor(
                max_workers=cfg.workers,
                initializer=_worker_init,
                initargs=(cbs, cfg.channel, cfg.seed, dcfg, cfg.decoder),
            )
        for point in cfg.ebn0_db:
            n0 = ebn0_db_to_n0(point, sys.n_bits, es)
            frames, bits_seen, bit_errors, frame_errors, iters_sum, elapsed = _sweep_point(
                cfg, n0, cbs, sys, dcfg, pool
            )
            records.append(
                BerRecord(
                    decoder=cfg.decoder,
                    M=cfg.m,
                    channel=cfg.channel,
                    ebn0_db=float(point),
                    frames=frames,
                    bits=bits_seen,
                    bit_errors=bit_errors,
                    frame_errors=frame_errors,
                    ber=bit_errors / bits_seen,
                    fer=frame_errors / frames,
                    elapsed_s=elapsed if cfg.timing == "wall" else 0.0,
                    iters_mean=iters_sum / frames,
                )
            )
    finally:
        if pool is not None:
            pool.shutdown(cancel_futures=True)
    return records


def gray_qam_constellation(m: int) -> np.ndarray:
    """Unit-energy square QAM with Gray mapping on each axis.

    Index bits split into halves; the high half selects the in-phase level,
    the low half the quadrature level, each through a Gray code so that
    neighboring levels differ in one bit.
    """
    b = int(np.log2(m))
    if 2**b != m or b % 2 != 0:
        raise ConfigInvalid(f"square QAM needs M = 4**p, got {m}")
    side = 1 << (b // 2)
    level_of_pattern = np.zeros(side, dtype=np.int64)
    for level in range(side):
        level_of_pattern[level ^ (level >> 1)] = level
    amps = 2 * np.arange(side) - (side - 1)
    const = np.zeros(m, dtype=np.complex128)
    for idx in range(m):
        hi, lo = idx >> (b // 2), idx & (side - 1)
        const[idx] = amps[level_of_pattern[hi]] + 1j * amps[level_of_pattern[lo]]
    return const / np.sqrt(np.mean(np.abs(const) ** 2))


def _oma_block(seed, start, count, const, L, n0):
    """Simulate one block of QAM symbols over L Rayleigh branches with MRC."""
    m = const.size
    b = int(np.log2(m))
    bits = np.zeros((count, b), dtype=np.uint8)
    h = np.zeros((count, L), dtype=np.complex128)
    z = np.zeros((count, L), dtype=np.complex128)
    for i in range(count):
        rng = frame_rng(seed, start + i)
        bits[i] = rng.integers(0, 2, size=b)
        h[i] = complex_randn(L, rng)
        z[i] = complex_randn(L, rng)
    weights = 1 << np.arange(b - 1, -1, -1)
    idx = (bits * weights).sum(axis=1)
    y = h * const[idx][:, None] + np.sqrt(n0) * z
    t0 = time.perf_counter()
    r = (np.conj(h) * y).sum(axis=1)
    g = (np.abs(h) ** 2).sum(axis=1)
    score = g[:, None] * (np.abs(const) ** 2)[None, :] - 2 * np.real(
        np.conj(const)[None, :] * r[:, None]
    )
    dec = score.argmin(axis=1)
    dec_bits = ((dec[:, None] >> np.arange(b - 1, -1, -1)[None, :]) & 1).astype(np.uint8)
    elapsed = time.perf_counter() - t0
    wrong = dec_bits != bits
    return int(wrong.sum()), int(wrong.any(axis=1).sum()), elapsed


def oma_baseline(
    diversity: int,
    m: int,
    ebn0_db,
    seed: int = 0,
    min_bit_errors: int = 200,
    max_frames: int = 1_000_000,
    timing: str = "wall",
) -> list[BerRecord]:
    """Gray QAM over `diversity` i.i.d. Rayleigh branches with MRC + ML.

    One frame is one symbol of log2(M) bits. Counting and stopping mirror
    run_sweep: blocks commit in order until min_bit_errors or max_frames.
    """
    if diversity < 1:
        raise ConfigInvalid("diversity must be >= 1")
    const = gray_qam_constellation(m)
    b = int(np.log2(m))
    records = []
    for point in tuple(ebn0_db):
        n0 = ebn0_db_to_n0(point, b, 1.0)
        frames = bit_errors = frame_errors = 0
        elapsed = 0.0
        start = 0
        while start < max_frames and bit_errors < min_bit_errors:
            n = min(OMA_BLOCK, max_frames - start)
            be, fe, el = _oma_block(seed, start, n, const, diversity, n0)
            bit_errors += be
            frame_errors += fe
            elapsed += el
            start += n
            frames += n
        records.append(
            BerRecord(
                decoder=f"oma-l{diversity}",
                M=m,
                channel="rayleigh",
                ebn0_db=float(point),
                frames=frames,
                bits=frames * b,
                bit_errors=bit_errors,
                frame_errors=frame_errors,
                ber=bit_errors / (frames * b),
                fer=frame_errors / frames,
                elapsed_s=elapsed if timing == "wall" else 0.0,
                iters_mean=0.0,
            )
        )
    return records


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def records_to_csv(records) -> str:
    lines = [CSV_HEADER]
    for r in records:
        lines.append(
            f"{r.decoder},{r.M},{r.channel},{_fmt(r.ebn0_db)},{r.frames},{r.bits},"
            f"{r.bit_errors},{r.frame_errors},{_fmt(r.ber)},{_fmt(r.fer)},"
            f"{_fmt(r.elapsed_s)},{_fmt(r.iters_mean)}"
        )
    return "\n".join(lines) + "\n"


def records_to_json(records) -> str:
    out = []
    for r in records:
        out.append(
            {
                "decoder": r.decoder,
                "M": r.M,
                "channel": r.channel,
                "ebn0_db": float(_fmt(r.ebn0_db)),
                "frames": r.frames,
                "bits": r.bits,
                "bit_errors": r.bit_errors,
                "frame_errors": r.frame_errors,
                "ber": float(_fmt(r.ber)),
                "fer": float(_fmt(r.fer)),
                "elapsed_s": float(_fmt(r.elapsed_s)),
                "iters_mean": float(_fmt(r.iters_mean)),
            }
        )
    return json.dumps(out, indent=2) + "\n"


def emit_results(records, fmt: str = "csv", path=None) -> str:
    """Serialize records; write to path when given. Returns the text."""
    if fmt == "csv":
        text = records_to_csv(records)
    elif fmt == "json":
        text = records_to_json(records)
    else:
        raise ConfigInvalid(f"format must be csv or json, got {fmt!r}")
    if path is not None:
        Path(path).write_text(text)
    return text


def load_records(path) -> list[BerRecord]:
    """Read records back from a CSV or JSON file written by emit_results."""
    p = Path(path)
    text = p.read_text()
    rows: list[dict] = []
    if text.lstrip().startswith("["):
        rows = json.loads(text)
    else:
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines or lines[0] != CSV_HEADER:
            raise ConfigInvalid(f"{p}: missing expected CSV header")
        cols = CSV_HEADER.split(",")
        for ln in lines[1:]:
            vals = ln.split(",")
            if len(vals) != len(cols):
                raise ConfigInvalid(f"{p}: bad row {ln!r}")
            rows.append(dict(zip(cols, vals)))
    out = []
    for row in rows:
        out.append(
            BerRecord(
                decoder=str(row["decoder"]),
                M=int(row["M"]),
                channel=str(row["channel"]),
                ebn0_db=float(row["ebn0_db"]),
                frames=int(row["frames"]),
                bits=int(row["bits"]),
                bit_errors=int(row["bit_errors"]),
                frame_errors=int(row["frame_errors"]),
                ber=float(row["ber"]),
                fer=float(row["fer"]),
                elapsed_s=float(row["elapsed_s"]),
                iters_mean=float(row["iters_mean"]),
            )
        )
    return out
