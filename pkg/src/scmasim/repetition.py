"""Length-3 repetition code over BPSK: the warm-up for soft decisions.

One bit is repeated three times, mapped 0 -> +1 and 1 -> -1, and sent over a
real AWGN channel with per-sample variance sigma^2. The hard path slices each
sample and majority-votes; the soft path combines the three samples into one
log-likelihood ratio, positive favoring bit 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import LengthMismatch

BLOCK_LENGTH = 3


@dataclass(frozen=True)
class HardDecodeResult:
    """Sliced bits, the majority codeword, and the decoded information bit."""

    sliced: tuple[int, int, int]
    codeword: tuple[int, int, int]
    bit: int


def modulate(bit: int) -> np.ndarray:
    """BPSK codeword for one information bit: 0 -> (+1,+1,+1), 1 -> (-1,-1,-1)."""
    if bit not in (0, 1):
        raise ValueError(f"bit must be 0 or 1, got {bit!r}")
    return np.full(BLOCK_LENGTH, 1.0 - 2.0 * bit)


def hard_decode(samples) -> HardDecodeResult:
    """Slice each sample (positive -> 0) and take the majority codeword.

    The two valid codewords are 000 and 111; majority voting picks the one
    at smaller Hamming distance from the sliced triple.
    """
    y = np.asarray(samples, dtype=np.float64).ravel()
    if y.size != BLOCK_LENGTH:
        raise LengthMismatch(f"expected {BLOCK_LENGTH} samples, got {y.size}")
    sliced = tuple(0 if v > 0 else 1 for v in y)
    bit = 1 if sum(sliced) >= 2 else 0
    return HardDecodeResult(sliced=sliced, codeword=(bit,) * 3, bit=bit)


def soft_llr(samples, sigma2: float) -> float:
    """Soft-decision statistic for the block: (y1 + y2 + y3) / (2 * sigma^2).

    Proportional to the block log-likelihood ratio of the two codewords
    under AWGN (the positive scale factor does not change any decision);
    positive favors bit 0, so the decoded bit is 1 when the value is
    negative.
    """
    y = np.asarray(samples, dtype=np.float64).ravel()
    if y.size != BLOCK_LENGTH:
        raise LengthMismatch(f"expected {BLOCK_LENGTH} samples, got {y.size}")
    if not sigma2 > 0:
        raise ValueError(f"sigma2 must be > 0, got {sigma2}")
    return float(y.sum() / (2.0 * sigma2))


def decision_table() -> list[tuple[tuple[int, int, int], tuple[int, int, int], int]]:
    """All eight sliced triples with their majority codeword and decoded bit.

    Rows are grouped by outcome: first the four triples that decode to 0,
    then the four that decode to 1, each group in ascending binary order.
    """
    triples = [(a, b, c) for a in (0, 1) for b in (0, 1) for c in (0, 1)]
    rows = []
    for target in (0, 1):
        for d in triples:
            bit = 1 if sum(d) >= 2 else 0
            if bit == target:
                rows.append((d, (bit,) * 3, bit))
    return rows
