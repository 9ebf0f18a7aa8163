"""Sparse codebook construction from a signature matrix.

The construction runs in four steps: a real lattice base vector, per-dimension
phase rotations that spread points in the complex plane, an interleave of the
even dimensions that decorrelates colliding users, and per-user operators that
combine resource-dependent rotations with the user's mapping matrix. The
result is one K x M codebook per user whose columns are sparse codewords
supported exactly on the user's occupied resources.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DimensionMismatch, InvalidM
from .signature import (
    SignatureParams,
    latin_phase_assignment,
    mapping_matrices,
    validate_signature,
)

# Exhaustive superposition audits are skipped above this many joint states.
UNIQUE_AUDIT_LIMIT = 65536


@dataclass(frozen=True)
class CodebookSet:
    """Codebooks for every user of one system.

    codebooks has shape (J, K, M); codebooks[j] is user j's K x M matrix
    (0-based user position, codeword columns indexed 0..M-1 internally while
    printed codeword indices run 1..M). unique_decodable is None when the
    audit was skipped because M**J exceeds UNIQUE_AUDIT_LIMIT.
    """

    codebooks: np.ndarray
    signature: np.ndarray
    params: SignatureParams
    M: int
    normalized: bool
    unique_decodable: bool | None

    @property
    def bits_per_codeword(self) -> int:
        return int(np.log2(self.M))


def _check_m(m: int) -> int:
    if not isinstance(m, (int, np.integer)) or m < 2 or (m & (m - 1)) != 0:
        raise InvalidM(f"codebook size must be a power of two >= 2, got {m!r}")
    return int(m)


def base_vector(m: int) -> np.ndarray:
    """M points of a uniform lattice on the diagonal line re = im.

    Entry i (1-based) is (2i - 1 - M) * (1 + 1j): odd integers from -(M-1)
    to M-1, scaled onto the diagonal.
    """
    m = _check_m(m)
    return (2 * np.arange(1, m + 1) - 1 - m) * (1 + 1j)


def rotate_dimensions(base: np.ndarray, dv: int) -> np.ndarray:
    """Stack dv copies of the base vector, row d rotated by (d-1)pi/d.

    Row 1 keeps the base orientation; row d (1-based) is multiplied by
    exp(1j*(d-1)*pi/d), so for dv = 2 the second row lands on the
    anti-diagonal. Returns a dv x M complex matrix.
    """
    if dv < 1:
        raise DimensionMismatch(f"dv must be >= 1, got {dv}")
    base = np.asarray(base, dtype=np.complex128)
    d = np.arange(1, dv + 1)
    return np.exp(1j * (d - 1) * np.pi / d)[:, None] * base[None, :]


def interleave_even_dimensions(mother: np.ndarray) -> np.ndarray:
    """Permute the columns of every even row, evens then odds.

    With columns numbered 1..M, each even-numbered row is reordered to
    (2, 4, ..., 1, 3, ...); odd rows pass through. This breaks the symmetry
    between users that share resources.
    """
    mother = np.asarray(mother, dtype=np.complex128)
    if mother.ndim != 2:
        raise DimensionMismatch(f"expected a 2-D matrix, got shape {mother.shape}")
    m = mother.shape[1]
    perm = np.concatenate([np.arange(1, m, 2), np.arange(0, m, 2)])
    out = mother.copy()
    out[1::2] = out[1::2][:, perm]
    return out


def user_operator(phases: np.ndarray, user: int) -> np.ndarray:
    """Rotation factors for one user, a length-dv complex vector.

    phases is the K x J matrix from latin_phase_assignment; user is the
    0-based column. The factors are the column's nonzeros in increasing
    resource order, one per occupied resource.
    """
    col = np.asarray(phases)[:, user]
    return col[col != 0]


def build_codebook(mapping: np.ndarray, operator: np.ndarray, mother: np.ndarray) -> np.ndarray:
    """Lift the rotated mother constellation onto K rows.

    mapping is K x dv, operator length dv, mother dv x M. Row r of the result
    carries operator[c] * mother[c] where c is the column mapping row r, and
    zeros on unoccupied rows.
    """
    mapping = np.asarray(mapping)
    operator = np.asarray(operator, dtype=np.complex128)
    mother = np.asarray(mother, dtype=np.complex128)
    if mapping.ndim != 2 or mother.ndim != 2 or operator.ndim != 1:
        raise DimensionMismatch("mapping and mother must be 2-D, operator 1-D")
    dv = mapping.shape[1]
    if operator.shape[0] != dv or mother.shape[0] != dv:
        raise DimensionMismatch(
            f"need {dv} rotation factors and mother rows, got "
            f"{operator.shape[0]} and {mother.shape[0]}"
        )
    return mapping.astype(np.complex128) @ (operator[:, None] * mother)


def unique_decodability(codebooks: np.ndarray, limit: int = UNIQUE_AUDIT_LIMIT) -> bool | None:
    """Exhaustively check that all M**J codeword superpositions are distinct.

    Sums are quantized to a 1e-9 grid before comparison. Returns None without
    computing when M**J exceeds limit.
    """
    codebooks = np.asarray(codebooks)
    J, K, m = codebooks.shape
    total = m**J
    if total > limit:
        return None
    sums = np.zeros((1, K), dtype=np.complex128)
    for j in range(J):
        # (S, K) + (m, 1, K) -> (m*S, K): prepend user j's choices
        sums = (sums[None, :, :] + codebooks[j].T[:, None, :]).reshape(-1, K)
    q = np.round(np.column_stack([sums.real, sums.imag]) / 1e-9).astype(np.int64)
    return len(np.unique(q, axis=0)) == total


def build_codebook_set(matrix, m: int, normalize: bool = True) -> CodebookSet:
    """Construct the full codebook set for a signature matrix.

    With normalize on (the default), a single real scale is applied to every
    codebook so that the average codeword energy per user equals 1; the scale
    is shared so relative geometry is untouched. The superposition audit runs
    whenever M**J is within UNIQUE_AUDIT_LIMIT.
    """
    arr = np.asarray(matrix)
    params = validate_signature(arr)
    m = _check_m(m)
    mother = interleave_even_dimensions(rotate_dimensions(base_vector(m), params.dv))
    phases = latin_phase_assignment(arr)
    maps = mapping_matrices(arr)
    books = np.stack(
        [build_codebook(maps[j], user_operator(phases, j), mother) for j in range(params.J)]
    )
    if normalize:
        energy = float(np.mean(np.abs(books[0]) ** 2) * params.K)
        books = books / np.sqrt(energy)
    return CodebookSet(
        codebooks=books,
        signature=arr.astype(np.uint8),
        params=params,
        M=m,
        normalized=bool(normalize),
        unique_decodable=unique_decodability(books),
    )


def export_codebooks(cbs: CodebookSet, path) -> None:
    """Write a codebook set to a plain-text file.

    Line 1 is "K J M dv df"; then for each user K rows of M "re,im" pairs,
    17 significant digits, which round-trips float64 exactly.
    """
    p = cbs.params
    lines = [f"{p.K} {p.J} {cbs.M} {p.dv} {p.df}"]
    for j in range(p.J):
        for k in range(p.K):
            row = cbs.codebooks[j, k]
            lines.append(" ".join(f"{z.real:.17g},{z.imag:.17g}" for z in row))
    Path(path).write_text("\n".join(lines) + "\n")


def import_codebooks(path) -> CodebookSet:
    """Read a codebook set written by export_codebooks.

    The signature matrix is recovered from the codeword supports; the
    normalized flag reflects whether per-user average energy is 1 within
    1e-9.
    """
    raw = [ln.strip() for ln in Path(path).read_text().splitlines()]
    rows = [ln for ln in raw if ln]
    header = rows[0].split()
    if len(header) != 5:
        raise ValueError(f"{path}: header must be 'K J M dv df', got {rows[0]!r}")
    K, J, m, dv, df = (int(t) for t in header)
    if len(rows) - 1 != J * K:
        raise ValueError(f"{path}: expected {J * K} codebook rows, found {len(rows) - 1}")
    books = np.zeros((J, K, m), dtype=np.complex128)
    for j in range(J):
        for k in range(K):
            toks = rows[1 + j * K + k].split()
            if len(toks) != m:
                raise ValueError(f"{path}: expected {m} entries per row, got {len(toks)}")
            for c, tok in enumerate(toks):
                re, im = tok.split(",")
                books[j, k, c] = complex(float(re), float(im))
    signature = (np.abs(books).sum(axis=2) > 0).astype(np.uint8).T
    params = validate_signature(signature)
    if params.dv != dv or params.df != df:
        raise ValueError(
            f"{path}: header weights ({dv},{df}) disagree with supports "
            f"({params.dv},{params.df})"
        )
    energy = float(np.mean(np.abs(books) ** 2, axis=(1, 2)).max() * K)
    return CodebookSet(
        codebooks=books,
        signature=signature,
        params=params,
        M=m,
        normalized=abs(energy - 1.0) <= 1e-9,
        unique_decodable=unique_decodability(books),
    )
