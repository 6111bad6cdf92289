"""Brute-force references for the message-passing code.

Everything here is written by direct enumeration and deliberately shares no
code with the decoders: the phase rule is re-derived from
``(m - n + 2mn) mod 4`` and likelihoods use the full complex Gaussian density
including its ``1 / (pi N0)`` prefactor. Only tiny instances are supported.
"""

from __future__ import annotations

import itertools
from typing import Literal

import numpy as np

MAX_BITS = 16


def phase_of_bits(m: int, n: int) -> int:
    return (m - n + 2 * m * n) % 4


def point(l: int) -> complex:
    return complex(np.exp(0.5j * np.pi * l))


def likelihood(r: complex, l: int, n0: float) -> float:
    """Complex Gaussian density of ``r`` around phase ``l``."""
    return float(np.exp(-abs(r - point(l)) ** 2 / n0) / (np.pi * n0))


def _weights_over_words(rows, n: int, r, n0: float, differential: bool):
    words = np.array(list(itertools.product((0, 1), repeat=n)), dtype=np.int64)
    keep = np.ones(len(words), dtype=bool)
    for row in rows:
        keep &= words[:, list(row)].sum(axis=1) % 2 == 0
    words = words[keep]
    s = (words[:, 0::2] - words[:, 1::2] + 2 * words[:, 0::2] * words[:, 1::2]) % 4
    d = np.cumsum(s, axis=1) % 4 if differential else s
    pts = np.exp(0.5j * np.pi * d)
    loglik = -(np.abs(np.asarray(r)[None, :] - pts) ** 2).sum(axis=1) / n0
    w = np.exp(loglik - loglik.max())
    return words, d, w / w.sum()


def exact_bit_posteriors(code, r, n0: float, differential: bool = True) -> np.ndarray:
    """Exact ``P(c_j | r)`` for every bit by enumerating all ``2^N`` words.

    ``code`` is a :class:`~dqpsk_jdd.ldpc.ParityCheckMatrix` (only ``rows`` and
    ``n_cols`` are read). Returns shape ``(N, 2)``.
    """
    n = code.n_cols
    if n > MAX_BITS:
        raise ValueError(f"instance too large for enumeration: N = {n} > {MAX_BITS}")
    words, _, w = _weights_over_words(code.rows, n, r, n0, differential)
    p1 = (w[:, None] * words).sum(axis=0)
    return np.stack([1.0 - p1, p1], axis=1)


def exact_symbol_posteriors(code, r, n0: float) -> np.ndarray:
    """Exact ``P(d_k | r)`` for the differentially encoded symbols, shape ``(N/2, 4)``."""
    n = code.n_cols
    if n > MAX_BITS:
        raise ValueError(f"instance too large for enumeration: N = {n} > {MAX_BITS}")
    _, d, w = _weights_over_words(code.rows, n, r, n0, True)
    out = np.zeros((n // 2, 4))
    for l in range(4):
        out[:, l] = (w[:, None] * (d == l)).sum(axis=0)
    return out


def exact_factor_marginal(
    pm, pn, d_prev, d_curr, target: Literal["d_prev", "d_curr", "first", "second"]
) -> np.ndarray:
    """Marginalise the merged mapping/differential factor onto one edge.

    Sums over all 64 configurations of ``(d_prev, d_curr, m, n)`` that satisfy
    ``d_curr = d_prev + phase_of_bits(m, n)``, weighting by every incoming
    message except the target's own.
    """
    inputs = {"first": pm, "second": pn, "d_prev": d_prev, "d_curr": d_curr}
    size = 4 if target.startswith("d_") else 2
    out = np.zeros(size)
    for a, b, m, n in itertools.product(range(4), range(4), range(2), range(2)):
        if b != (a + phase_of_bits(m, n)) % 4:
            continue
        values = {"d_prev": a, "d_curr": b, "first": m, "second": n}
        w = 1.0
        for name, msg in inputs.items():
            if name != target:
                w *= msg[values[name]]
        out[values[target]] += w
    return out / out.sum()


def exact_check_marginal(incoming_p1, target: int) -> float:
    """``P(bit_target = 1)`` from an even-parity check given the other bits' ``p(1)``."""
    others = [p for i, p in enumerate(incoming_p1) if i != target]
    total = 0.0
    for bits in itertools.product((0, 1), repeat=len(others)):
        if sum(bits) % 2 == 1:
            w = 1.0
            for b, p in zip(bits, others):
                w *= p if b else 1.0 - p
            total += w
    return total


def exact_channel_message(r: complex, n0: float) -> np.ndarray:
    q = np.array([likelihood(r, l, n0) for l in range(4)])
    return q / q.sum()


def exact_differential_bits(r_prev: complex | None, r_curr: complex, n0: float) -> np.ndarray:
    """Bit posteriors of one differential symbol from two received samples.

    Enumerates the 16 ``(d_prev, d_curr)`` pairs; ``r_prev=None`` means the
    previous symbol is the known reference phase 0. Returns ``(2, 2)`` rows
    for the first and second bit.
    """
    s_post = np.zeros(4)
    for a in range(4):
        la = (1.0 if a == 0 else 0.0) if r_prev is None else likelihood(r_prev, a, n0)
        for b in range(4):
            s_post[(b - a) % 4] += la * likelihood(r_curr, b, n0)
    return _bits_from_phase_posterior(s_post)


def exact_coherent_bits(r: complex, n0: float) -> np.ndarray:
    return _bits_from_phase_posterior(np.array([likelihood(r, l, n0) for l in range(4)]))


def _bits_from_phase_posterior(q) -> np.ndarray:
    out = np.zeros((2, 2))
    for m, n in itertools.product(range(2), range(2)):
        w = q[phase_of_bits(m, n)]
        out[0, m] += w
        out[1, n] += w
    return out / out.sum(axis=1, keepdims=True)
