"""Sparse parity-check codes: alist I/O, regular-code generation, systematic
encoding, and probability-domain sum-product updates.

Bit messages are stored as ``(p0, p1)`` pairs in float64 arrays of shape
``(..., 2)``. The numba kernels in this module are shared with the joint
demapper-decoder in :mod:`dqpsk_jdd.jdd`.
"""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Literal, NamedTuple, Sequence

import numpy as np
from numba import njit

logger = logging.getLogger(__name__)

#: Clamp applied to bit probabilities before any product.
EPS = 1e-12
_TINY = 1e-200
_HUGE = 1e200


class AlistError(ValueError):
    """Malformed alist text. ``lineno`` is 1-based (0 when not line specific)."""

    def __init__(self, message: str, lineno: int = 0):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {message}" if lineno else message)


# ---------------------------------------------------------------------------
# Parity-check matrix
# ---------------------------------------------------------------------------


class TannerEdges(NamedTuple):
    """Flat edge arrays for the kernels.

    Edges are numbered in row-major order; ``edge_col[row_ptr[i]:row_ptr[i+1]]``
    are the columns of check ``i``, and ``col_edge[col_ptr[j]:col_ptr[j+1]]``
    the edge ids attached to bit ``j``.
    """

    row_ptr: np.ndarray
    edge_col: np.ndarray
    edge_row: np.ndarray
    col_ptr: np.ndarray
    col_edge: np.ndarray


@dataclass(frozen=True)
class ParityCheckMatrix:
    """Binary ``M x N`` parity-check matrix stored as per-row column sets.

    ``rows[i]`` is the sorted tuple of columns ``j`` with ``H[i, j] = 1``.
    The matrix is immutable; derived structures (column adjacency, edge
    arrays, systematic encoder) are computed lazily and cached.

    Odd ``n_cols`` is accepted here; the modulation layer is what requires an
    even codeword length.
    """

    n_cols: int
    rows: tuple[tuple[int, ...], ...]
    _fingerprint: str = field(default="", compare=False, repr=False)

    def __post_init__(self):
        if self.n_cols < 1:
            raise ValueError("n_cols must be positive")
        rows = tuple(tuple(sorted(int(j) for j in r)) for r in self.rows)
        for i, r in enumerate(rows):
            if len(set(r)) != len(r):
                raise ValueError(f"row {i} has duplicate column indices")
            if r and (r[0] < 0 or r[-1] >= self.n_cols):
                raise ValueError(f"row {i} has a column index out of range")
        object.__setattr__(self, "rows", rows)

    @classmethod
    def from_dense(cls, h) -> ParityCheckMatrix:
        h = np.asarray(h)
        if h.ndim != 2:
            raise ValueError("dense parity-check matrix must be 2-D")
        return cls(h.shape[1], tuple(tuple(np.flatnonzero(row % 2)) for row in h))

    @classmethod
    def uncoded(cls, n: int) -> ParityCheckMatrix:
        """Matrix with no parity checks (``M = 0``): every word is a codeword."""
        return cls(n, ())

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    @property
    def n_edges(self) -> int:
        return sum(len(r) for r in self.rows)

    @cached_property
    def cols(self) -> tuple[tuple[int, ...], ...]:
        cols: list[list[int]] = [[] for _ in range(self.n_cols)]
        for i, r in enumerate(self.rows):
            for j in r:
                cols[j].append(i)
        return tuple(tuple(c) for c in cols)

    def to_dense(self) -> np.ndarray:
        h = np.zeros((self.n_rows, self.n_cols), dtype=np.uint8)
        for i, r in enumerate(self.rows):
            h[i, list(r)] = 1
        return h

    @cached_property
    def edges(self) -> TannerEdges:
        row_len = np.array([len(r) for r in self.rows], dtype=np.int64)
        row_ptr = np.zeros(self.n_rows + 1, dtype=np.int64)
        np.cumsum(row_len, out=row_ptr[1:])
        edge_col = np.array([j for r in self.rows for j in r], dtype=np.int64)
        edge_row = np.repeat(np.arange(self.n_rows, dtype=np.int64), row_len)
        order = np.argsort(edge_col, kind="stable")
        col_ptr = np.zeros(self.n_cols + 1, dtype=np.int64)
        np.cumsum(np.bincount(edge_col, minlength=self.n_cols), out=col_ptr[1:])
        return TannerEdges(row_ptr, edge_col, edge_row, col_ptr, order.astype(np.int64))

    @cached_property
    def encoder(self) -> SystematicEncoder:
        return SystematicEncoder(self)

    @property
    def rank(self) -> int:
        return self.encoder.rank

    @property
    def k(self) -> int:
        """Number of information bits, ``N - rank(H)``."""
        return self.encoder.k

    @property
    def rate(self) -> float:
        return self.k / self.n_cols

    @cached_property
    def fingerprint(self) -> str:
        """SHA-256 of the canonical alist text."""
        return hashlib.sha256(emit_alist(self).encode()).hexdigest()

    def column_degrees(self) -> np.ndarray:
        return np.diff(self.edges.col_ptr)

    def row_degrees(self) -> np.ndarray:
        return np.diff(self.edges.row_ptr)


# ---------------------------------------------------------------------------
# alist I/O
# ---------------------------------------------------------------------------


def _ints(line: str, lineno: int) -> list[int]:
    try:
        return [int(tok) for tok in line.split()]
    except ValueError:
        raise AlistError(f"non-integer token in {line.strip()!r}", lineno) from None


def load_alist(text: str) -> ParityCheckMatrix:
    """Parse MacKay alist text.

    Zero entries in the index lists are padding and ignored. Raises
    :class:`AlistError` on malformed counts, out-of-range indices, degree
    mismatches, or column lists that are not the transpose of the row lists.
    """
    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()

    def line(idx: int) -> list[int]:
        if idx >= len(lines):
            raise AlistError("unexpected end of input", len(lines))
        return _ints(lines[idx], idx + 1)

    def counted(idx: int, count: int) -> list[int]:
        vals = line(idx)
        if len(vals) != count:
            raise AlistError(f"expected {count} integers, got {len(vals)}", idx + 1)
        return vals

    n, m = counted(0, 2)
    if n < 1 or m < 0:
        raise AlistError(f"invalid dimensions N={n} M={m}", 1)
    max_col, max_row = counted(1, 2)
    col_deg = counted(2, n)
    row_deg = counted(3, m)
    if max(col_deg) != max_col:
        raise AlistError(f"max column degree {max_col} != {max(col_deg)}", 2)
    if max(row_deg, default=0) != max_row:
        raise AlistError(f"max row degree {max_row} != {max(row_deg, default=0)}", 2)
    if sum(col_deg) != sum(row_deg):
        raise AlistError("column and row degree totals differ", 4)

    def adjacency(first: int, degrees: list[int], limit: int, what: str) -> list[list[int]]:
        out = []
        for t, deg in enumerate(degrees):
            idx = [v for v in line(first + t) if v != 0]
            no = first + t + 1
            if len(idx) != deg:
                raise AlistError(f"{what} declares degree {deg} but lists {len(idx)} entries", no)
            if any(v < 1 or v > limit for v in idx):
                raise AlistError(f"{what} index out of range 1..{limit}", no)
            if len(set(idx)) != len(idx):
                raise AlistError(f"duplicate index in {what}", no)
            out.append(sorted(v - 1 for v in idx))
        return out

    col_lists = adjacency(4, col_deg, m, "column")
    row_lists = adjacency(4 + n, row_deg, n, "row")
    if len(lines) > 4 + n + m:
        raise AlistError("trailing content after the row lists", 5 + n + m)
    transposed: list[list[int]] = [[] for _ in range(m)]
    for j, rows in enumerate(col_lists):
        for i in rows:
            transposed[i].append(j)
    for i, (a, b) in enumerate(zip(transposed, row_lists)):
        if a != b:
            raise AlistError(f"row {i + 1} is inconsistent with the column lists", 5 + n + i)
    return ParityCheckMatrix(n, tuple(tuple(r) for r in row_lists))


def read_alist(path: str | Path) -> ParityCheckMatrix:
    return load_alist(Path(path).read_text())


def emit_alist(h: ParityCheckMatrix) -> str:
    """Canonical alist text (no zero padding)."""
    col_deg = [len(c) for c in h.cols]
    row_deg = [len(r) for r in h.rows]
    out = [
        f"{h.n_cols} {h.n_rows}",
        f"{max(col_deg, default=0)} {max(row_deg, default=0)}",
        " ".join(map(str, col_deg)),
        " ".join(map(str, row_deg)),
    ]
    out += [" ".join(str(i + 1) for i in c) for c in h.cols]
    out += [" ".join(str(j + 1) for j in r) for r in h.rows]
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# Regular code generation
# ---------------------------------------------------------------------------


def generate_regular_code(
    n: int,
    col_weight: int,
    row_weight: int,
    seed: int,
    balanced: bool = False,
    max_passes: int = 30,
    tries: int = 200,
) -> ParityCheckMatrix:
    """Random ``(col_weight, row_weight)``-regular parity-check matrix.

    Edges come from a random socket matching; parallel edges and 4-cycles are
    then removed by degree-preserving edge swaps. Removing parallel edges is
    mandatory, removing 4-cycles is best effort (a warning is logged if some
    survive ``max_passes``).

    With ``balanced=True`` the divisibility requirement is dropped:
    ``M = ceil(n * col_weight / row_weight)`` and the sockets are spread so
    that row degrees differ by at most one (``row_weight`` and
    ``row_weight - 1`` whenever the shortfall is below ``M``). Column degrees
    stay exactly ``col_weight``.
    """
    if min(n, col_weight, row_weight) < 1:
        raise ValueError("n, col_weight and row_weight must be positive")
    n_sockets = n * col_weight
    if n_sockets % row_weight and not balanced:
        raise ValueError(
            f"n*col_weight = {n_sockets} is not divisible by row_weight = {row_weight}"
        )
    m = -(-n_sockets // row_weight)
    if m >= n:
        raise ValueError(f"infeasible degrees: M = {m} >= N = {n}")
    if row_weight > n or col_weight > m:
        raise ValueError("infeasible degrees: weight exceeds matrix dimension")
    q, rem = divmod(n_sockets, m)
    row_deg = np.full(m, q + 1)
    row_deg[: m - rem] = q

    rng = np.random.default_rng(seed)
    e_row = np.repeat(np.arange(m), row_deg)
    rng.shuffle(e_row)
    e_col = np.repeat(np.arange(n), col_weight)
    n_edges = e_row.size

    # multiset adjacency so parallel edges are representable while repairing
    row_adj: list[dict[int, int]] = [dict() for _ in range(m)]
    col_adj: list[dict[int, int]] = [dict() for _ in range(n)]

    def add(r, c):
        row_adj[r][c] = row_adj[r].get(c, 0) + 1
        col_adj[c][r] = col_adj[c].get(r, 0) + 1

    def remove(r, c):
        for adj, a, b in ((row_adj, r, c), (col_adj, c, r)):
            if adj[a][b] == 1:
                del adj[a][b]
            else:
                adj[a][b] -= 1

    for r, c in zip(e_row, e_col):
        add(int(r), int(c))

    def parallel(r, c) -> bool:
        return row_adj[r][c] > 1

    def bad(r, c) -> bool:
        if row_adj[r][c] > 1:
            return True
        cols_r = row_adj[r].keys()
        for r2 in col_adj[c]:
            if r2 != r and len(cols_r & row_adj[r2].keys()) > 1:
                return True
        return False

    def repair(is_bad) -> None:
        for _ in range(max_passes):
            bad_edges = [e for e in range(n_edges) if is_bad(int(e_row[e]), int(e_col[e]))]
            if not bad_edges:
                return
            for e in bad_edges:
                r1, c1 = int(e_row[e]), int(e_col[e])
                if not is_bad(r1, c1):
                    continue
                for _ in range(tries):
                    f = int(rng.integers(n_edges))
                    r2, c2 = int(e_row[f]), int(e_col[f])
                    # never create a parallel edge
                    if r2 == r1 or c2 == c1 or c2 in row_adj[r1] or c1 in row_adj[r2]:
                        continue
                    remove(r1, c1)
                    remove(r2, c2)
                    add(r1, c2)
                    add(r2, c1)
                    if not is_bad(r1, c2) and not is_bad(r2, c1):
                        e_row[e], e_row[f] = r1, r2
                        e_col[e], e_col[f] = c2, c1
                        break
                    remove(r1, c2)
                    remove(r2, c1)
                    add(r1, c1)
                    add(r2, c2)

    # parallel edges first (mandatory), then 4-cycles (best effort)
    repair(parallel)
    if any(v > 1 for adj in row_adj for v in adj.values()):
        raise ValueError("could not remove parallel edges; degrees too dense for n")
    repair(bad)
    left = sum(bad(int(r), int(c)) for r, c in zip(e_row, e_col))
    if left:
        logger.warning("%d edges still lie on 4-cycles after %d passes", left, max_passes)
    return ParityCheckMatrix(n, tuple(tuple(sorted(adj)) for adj in row_adj))


# ---------------------------------------------------------------------------
# GF(2) systematic encoding
# ---------------------------------------------------------------------------


def _pack_words(bits: np.ndarray) -> np.ndarray:
    """Pack the last axis of a 0/1 array into little-endian uint64 words."""
    packed = np.packbits(bits.astype(np.uint8, copy=False), axis=-1, bitorder="little")
    pad = (-packed.shape[-1]) % 8
    if pad:
        packed = np.concatenate(
            [packed, np.zeros(packed.shape[:-1] + (pad,), dtype=np.uint8)], axis=-1
        )
    return np.ascontiguousarray(packed).view("<u8")


class SystematicEncoder:
    """Encoder derived once from ``H`` by Gaussian elimination over GF(2).

    After elimination ``H`` is row-equivalent to ``[A | I]`` under the column
    permutation ``info_cols + parity_cols``. Information bits are placed at
    ``info_cols`` and parity bits are ``A @ b mod 2``.

    A rank-deficient ``H`` is accepted: ``k = N - rank`` and a warning is
    logged.
    """

    def __init__(self, h: ParityCheckMatrix):
        n = h.n_cols
        words = _pack_words(h.to_dense()) if h.n_rows else np.zeros((0, (n + 63) // 64), "<u8")
        words = words.copy()
        pivots: list[int] = []
        r = 0
        for j in range(n - 1, -1, -1):
            if r == words.shape[0]:
                break
            w, b = j >> 6, np.uint64(j & 63)
            col = ((words[:, w] >> b) & np.uint64(1)).astype(bool)
            cand = np.flatnonzero(col[r:])
            if cand.size == 0:
                continue
            p = r + cand[0]
            if p != r:
                words[[r, p]] = words[[p, r]]
                col[[r, p]] = col[[p, r]]
            col[r] = False
            words[col] ^= words[r]
            pivots.append(j)
            r += 1

        self.n = n
        self.rank = len(pivots)
        self.k = n - self.rank
        self.parity_cols = np.array(pivots, dtype=np.int64)
        is_pivot = np.zeros(n, dtype=bool)
        is_pivot[self.parity_cols] = True
        self.info_cols = np.flatnonzero(~is_pivot)
        if self.rank < h.n_rows:
            logger.warning(
                "parity-check matrix is rank deficient (rank %d < M = %d); K = %d",
                self.rank, h.n_rows, self.k,
            )
        reduced = np.unpackbits(
            words[: self.rank].view(np.uint8), axis=1, count=n, bitorder="little"
        )
        self._a = _pack_words(reduced[:, self.info_cols])

    @property
    def permutation(self) -> np.ndarray:
        """Column order ``info_cols + parity_cols`` giving the ``[A | I]`` form."""
        return np.concatenate([self.info_cols, self.parity_cols])

    def encode(self, b) -> np.ndarray:
        """Encode information bits; accepts shape ``(K,)`` or ``(batch, K)``."""
        b = np.asarray(b, dtype=np.uint8)
        if b.shape[-1] != self.k:
            raise ValueError(f"expected {self.k} information bits, got {b.shape[-1]}")
        c = np.zeros(b.shape[:-1] + (self.n,), dtype=np.uint8)
        c[..., self.info_cols] = b
        if self.rank:
            bw = _pack_words(b)[..., None, :]
            parity = np.bitwise_count(self._a & bw).sum(axis=-1) & 1
            c[..., self.parity_cols] = parity
        return c

    def extract(self, c) -> np.ndarray:
        """Information bits of a codeword (or of hard decisions)."""
        return np.asarray(c)[..., self.info_cols]


def encode(h: ParityCheckMatrix, b) -> np.ndarray:
    return h.encoder.encode(b)


def syndrome(h: ParityCheckMatrix, hard_bits) -> tuple[bool, int]:
    """Return ``(is_zero, failing_rows)`` for a hard-decision word."""
    x = np.asarray(hard_bits)
    if x.shape != (h.n_cols,):
        raise ValueError(f"expected {h.n_cols} bits, got shape {x.shape}")
    if h.n_rows == 0:
        return True, 0
    e = h.edges
    parity = np.bincount(e.edge_row, weights=x[e.edge_col] & 1, minlength=h.n_rows)
    failing = int(np.count_nonzero(parity.astype(np.int64) & 1))
    return failing == 0, failing


# ---------------------------------------------------------------------------
# Sum-product kernels
# ---------------------------------------------------------------------------


@njit(cache=True, error_model="numpy", inline="always")
def _clamp(p):
    return min(max(p, EPS), 1.0 - EPS)


@njit(cache=True, error_model="numpy")
def _check_pass(v2c, c2v, row_ptr):
    """Check updates for every row: tanh rule via prefix/suffix products."""
    for i in range(row_ptr.shape[0] - 1):
        lo = row_ptr[i]
        hi = row_ptr[i + 1]
        prefix = 1.0
        for e in range(lo, hi):
            c2v[e, 0] = prefix
            prefix *= 1.0 - 2.0 * _clamp(v2c[e, 1])
        suffix = 1.0
        for e in range(hi - 1, lo - 1, -1):
            t = c2v[e, 0] * suffix
            c2v[e, 0] = 0.5 * (1.0 + t)
            c2v[e, 1] = 0.5 * (1.0 - t)
            suffix *= 1.0 - 2.0 * _clamp(v2c[e, 1])


@njit(cache=True, error_model="numpy")
def _variable_pass(prior, c2v, col_ptr, col_edge, v2c, app, ext):
    """Variable updates for every bit.

    For bit ``j`` writes the outgoing messages ``v2c`` on edges
    ``col_edge[col_ptr[j]:col_ptr[j+1]]``, the normalised APP (prior times all
    incoming) into ``app[j]`` and the normalised product of the incoming check
    messages alone into ``ext[j]``. Returns the number of zero-sum fallbacks.
    """
    bad = 0
    for j in range(prior.shape[0]):
        lo = col_ptr[j]
        hi = col_ptr[j + 1]
        a0 = _clamp(prior[j, 0])
        a1 = _clamp(prior[j, 1])
        x0 = 1.0
        x1 = 1.0
        for t in range(lo, hi):
            e = col_edge[t]
            v2c[e, 0] = a0
            v2c[e, 1] = a1
            q0 = _clamp(c2v[e, 0])
            q1 = _clamp(c2v[e, 1])
            a0 *= q0
            a1 *= q1
            x0 *= q0
            x1 *= q1
            # clamped factors can only underflow after ~16 edges
            if a0 < _TINY and a1 < _TINY:
                a0 *= _HUGE
                a1 *= _HUGE
            if x0 < _TINY and x1 < _TINY:
                x0 *= _HUGE
                x1 *= _HUGE
        s = a0 + a1
        app[j, 0] = a0 / s
        app[j, 1] = a1 / s
        s = x0 + x1
        ext[j, 0] = x0 / s
        ext[j, 1] = x1 / s
        s0 = 1.0
        s1 = 1.0
        for t in range(hi - 1, lo - 1, -1):
            e = col_edge[t]
            y0 = v2c[e, 0] * s0
            y1 = v2c[e, 1] * s1
            s = y0 + y1
            if s > 0.0 and s < np.inf:
                v2c[e, 0] = y0 / s
                v2c[e, 1] = y1 / s
            else:
                v2c[e, 0] = 0.5
                v2c[e, 1] = 0.5
                bad += 1
            s0 *= _clamp(c2v[e, 0])
            s1 *= _clamp(c2v[e, 1])
            if s0 < _TINY and s1 < _TINY:
                s0 *= _HUGE
                s1 *= _HUGE
    return bad


@njit(cache=True, error_model="numpy")
def _app_pass(prior, c2v, col_ptr, col_edge, app, ext, hard):
    """APP, check-only extrinsic and hard decision for every bit."""
    for j in range(prior.shape[0]):
        a0 = _clamp(prior[j, 0])
        a1 = _clamp(prior[j, 1])
        x0 = 1.0
        x1 = 1.0
        for t in range(col_ptr[j], col_ptr[j + 1]):
            e = col_edge[t]
            q0 = _clamp(c2v[e, 0])
            q1 = _clamp(c2v[e, 1])
            x0 *= q0
            x1 *= q1
            if x0 < _TINY and x1 < _TINY:
                x0 *= _HUGE
                x1 *= _HUGE
        s = x0 + x1
        x0 /= s
        x1 /= s
        ext[j, 0] = x0
        ext[j, 1] = x1
        a0 *= x0
        a1 *= x1
        s = a0 + a1
        app[j, 0] = a0 / s
        app[j, 1] = a1 / s
        hard[j] = 1 if a1 > a0 else 0


@njit(cache=True, error_model="numpy")
def _ldpc_iteration(prior, row_ptr, col_ptr, col_edge, v2c, c2v, app, ext, hard):
    """One flooding iteration: variable pass, check pass, then APP pass."""
    bad = _variable_pass(prior, c2v, col_ptr, col_edge, v2c, app, ext)
    _check_pass(v2c, c2v, row_ptr)
    _app_pass(prior, c2v, col_ptr, col_edge, app, ext, hard)
    return bad


@njit(cache=True, error_model="numpy")
def _syndrome_zero(hard, row_ptr, edge_col):
    m = row_ptr.shape[0] - 1
    for i in range(m):
        acc = 0
        for e in range(row_ptr[i], row_ptr[i + 1]):
            acc ^= hard[edge_col[e]]
        if acc:
            return False
    return True


@njit(cache=True, error_model="numpy")
def _spa_decode(prior, row_ptr, edge_col, col_ptr, col_edge, max_iter, early_stop, app, hard):
    n_edges = edge_col.shape[0]
    v2c = np.full((n_edges, 2), 0.5)
    c2v = np.full((n_edges, 2), 0.5)
    ext = np.empty_like(app)
    bad = 0
    ok = False
    it = 0
    for it in range(1, max_iter + 1):
        bad += _ldpc_iteration(prior, row_ptr, col_ptr, col_edge, v2c, c2v, app, ext, hard)
        ok = _syndrome_zero(hard, row_ptr, edge_col)
        if ok and early_stop:
            break
    return it, ok, bad


# ---------------------------------------------------------------------------
# Public API
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DecoderConfig:
    """Iterative decoder settings.

    One iteration of the joint decoder is one differential-chain update plus
    one LDPC flooding iteration; for the standalone LDPC decoder it is one
    flooding iteration.
    """

    max_iterations: int = 20
    early_stop: bool = True
    schedule: Literal["chain", "flood"] = "chain"

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.schedule not in ("chain", "flood"):
            raise ValueError(f"unknown schedule {self.schedule!r}")


@dataclass
class DecodeResult:
    hard_bits: np.ndarray
    converged: bool
    iterations: int
    bit_app: np.ndarray
    fallbacks: int = 0
    symbol_app: np.ndarray | None = None


@dataclass
class SpaStats:
    """Counts zero-product fallbacks in the public update functions."""

    fallbacks: int = 0


def _as_messages(msgs) -> np.ndarray:
    a = np.array(msgs, dtype=np.float64).reshape(-1, 2)
    return a / a.sum(axis=1, keepdims=True)


def check_node_update(incoming: Sequence) -> np.ndarray:
    """Extrinsic check-node messages for a single parity check.

    ``incoming`` holds one ``(p0, p1)`` per edge (degree >= 2). Row ``e`` of
    the result is computed from all incoming messages except edge ``e``.
    """
    v2c = _as_messages(incoming)
    if v2c.shape[0] < 2:
        raise ValueError("check degree must be at least 2")
    c2v = np.empty_like(v2c)
    _check_pass(v2c, c2v, np.array([0, v2c.shape[0]]))
    return c2v


def variable_node_update(prior, incoming: Sequence, stats: SpaStats | None = None):
    """Variable-node messages for one bit.

    Returns ``(outgoing, app)``: ``outgoing[e]`` is the normalised product of
    the prior and every incoming message except ``e``; ``app`` includes all.
    """
    c2v = _as_messages(incoming)
    d = c2v.shape[0]
    v2c = np.empty_like(c2v)
    app = np.empty((1, 2))
    ext = np.empty((1, 2))
    bad = _variable_pass(_as_messages(prior), c2v, np.array([0, d]), np.arange(d), v2c, app, ext)
    if stats is not None:
        stats.fallbacks += bad
    return v2c, app[0]


def spa_decode(h: ParityCheckMatrix, priors, config: DecoderConfig = DecoderConfig()) -> DecodeResult:
    """Standalone sum-product decoding from fixed per-bit priors ``(N, 2)``."""
    prior = np.ascontiguousarray(priors, dtype=np.float64)
    if prior.shape != (h.n_cols, 2):
        raise ValueError(f"priors must have shape ({h.n_cols}, 2), got {prior.shape}")
    e = h.edges
    app = np.empty_like(prior)
    hard = np.empty(h.n_cols, dtype=np.uint8)
    it, ok, bad = _spa_decode(
        prior, e.row_ptr, e.edge_col, e.col_ptr, e.col_edge,
        config.max_iterations, config.early_stop, app, hard,
    )
    return DecodeResult(hard, bool(ok), int(it), app, int(bad))
