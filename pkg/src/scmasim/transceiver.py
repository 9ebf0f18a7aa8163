"""Bit mapping, encoding, and the uplink channel.

One frame carries log2(M) fresh bits per user. Each user's bits select a
codeword column; the receiver sees the superposition of all users' codewords,
each multiplied element-wise by that user's channel gains, plus circularly
symmetric complex Gaussian noise of total variance N_0 per resource element.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .codebook import CodebookSet
from .errors import DimensionMismatch, LengthMismatch, ZeroNoiseVariance

CHANNEL_MODES = ("awgn", "rayleigh")


@dataclass(frozen=True)
class TransmitFrame:
    """Codewords of one frame; codewords[j] is user j's K-dim column."""

    codewords: np.ndarray
    bits: np.ndarray
    indices: np.ndarray


@dataclass(frozen=True)
class ReceivedVector:
    y: np.ndarray
    noise_variance: float


def bits_to_index(bits, m: int | None = None) -> int:
    """Map a bit vector to a 1-based codeword index, first bit most significant.

    [0,0] -> 1, [0,1] -> 2, [1,0] -> 3, [1,1] -> 4. With m given, the bit
    count must be log2(m).
    """
    arr = np.asarray(bits).ravel()
    if arr.size == 0:
        raise LengthMismatch("empty bit vector")
    if m is not None and (1 << arr.size) != m:
        raise LengthMismatch(f"{arr.size} bits cannot address {m} codewords")
    val = 0
    for b in arr:
        if b not in (0, 1):
            raise ValueError(f"bits must be 0 or 1, got {b!r}")
        val = (val << 1) | int(b)
    return val + 1


def index_to_bits(index: int, n_bits: int) -> np.ndarray:
    """Inverse of bits_to_index: 1-based index to its bit vector."""
    if not 1 <= index <= (1 << n_bits):
        raise LengthMismatch(f"index {index} outside 1..{1 << n_bits}")
    v = index - 1
    return np.array([(v >> (n_bits - 1 - i)) & 1 for i in range(n_bits)], dtype=np.uint8)


def encode(bits, cbs: CodebookSet) -> TransmitFrame:
    """Select every user's codeword column from its bits.

    bits has shape (J, log2(M)). The returned codewords array is (J, K),
    sparse on each user's occupied resources.
    """
    arr = np.asarray(bits)
    p = cbs.params
    b = cbs.bits_per_codeword
    if arr.shape != (p.J, b):
        raise LengthMismatch(f"bits must have shape ({p.J}, {b}), got {arr.shape}")
    idx = np.array([bits_to_index(arr[j], cbs.M) for j in range(p.J)])
    codewords = cbs.codebooks[np.arange(p.J), :, idx - 1]
    return TransmitFrame(codewords=codewords, bits=arr.astype(np.uint8), indices=idx)


def complex_randn(shape, rng: np.random.Generator) -> np.ndarray:
    """Unit-variance circularly symmetric complex Gaussian draws."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def draw_channel(mode: str, K: int, J: int, rng: np.random.Generator) -> np.ndarray:
    """Per-user channel gains, one K x J matrix constant over a frame.

    awgn gives unit gains; rayleigh draws i.i.d. complex Gaussian entries
    with unit mean-square magnitude.
    """
    if mode == "awgn":
        return np.ones((K, J), dtype=np.complex128)
    if mode == "rayleigh":
        return complex_randn((K, J), rng)
    raise ValueError(f"unknown channel mode {mode!r}, expected one of {CHANNEL_MODES}")


def transmit(frame: TransmitFrame, channel: np.ndarray, n0: float, rng: np.random.Generator) -> ReceivedVector:
    """Superpose all users through the channel and add complex noise.

    y_k sums h_{k,j} * codeword_j[k] over users, plus noise of total variance
    n0 per resource (n0/2 in each real part). The unit-variance noise shape
    is drawn even when n0 = 0 so that runs at different noise levels off one
    seed see identical noise directions.
    """
    channel = np.asarray(channel)
    J, K = frame.codewords.shape
    if channel.shape != (K, J):
        raise DimensionMismatch(f"channel must be ({K}, {J}), got {channel.shape}")
    if n0 < 0:
        raise ZeroNoiseVariance(f"noise variance must be >= 0, got {n0}")
    clean = np.einsum("kj,jk->k", channel, frame.codewords)
    z = complex_randn(K, rng)
    return ReceivedVector(y=clean + np.sqrt(n0) * z, noise_variance=float(n0))


def ebn0_db_to_n0(ebn0_db: float, bits_per_codeword: int, es: float = 1.0) -> float:
    """Noise variance for a given Eb/N0 in dB.

    Es is the average codeword energy (1 for normalized codebooks), so
    Eb = Es / log2(M) and N_0 = Eb * 10**(-EbN0_dB/10).
    """
    if bits_per_codeword < 1:
        raise ValueError("bits_per_codeword must be >= 1")
    eb = es / bits_per_codeword
    return eb / (10.0 ** (ebn0_db / 10.0))
