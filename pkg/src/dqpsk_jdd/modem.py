"""Gray QPSK mapping, differential encoding and the AWGN channel.

Symbols are phase indices ``l`` in ``{0, 1, 2, 3}`` standing for
``exp(1j * pi * l / 2)``; all phase arithmetic is integer arithmetic mod 4.
Complex values only appear at the channel boundary.

Bit pairs map to phases through ``DELTA[m, n] = (m - n + 2*m*n) mod 4`` where
``m`` is the first bit of the pair and ``n`` the second.
"""

from __future__ import annotations

import numpy as np

#: Phase index for each (first bit, second bit) pair.
DELTA = np.array([[0, 3], [1, 2]], dtype=np.int64)

#: Bit pair for each phase index (inverse of ``DELTA``).
DELTA_INV = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=np.uint8)

#: Unit-energy constellation, exact values (no trigonometric rounding).
CONSTELLATION = np.array([1.0, 1.0j, -1.0, -1.0j], dtype=np.complex128)


def map_gray(c) -> np.ndarray:
    """Map a codeword of even length to ``len(c) // 2`` phase indices."""
    c = np.asarray(c, dtype=np.int64)
    if c.shape[-1] % 2:
        raise ValueError("codeword length must be even")
    return DELTA[c[..., 0::2] & 1, c[..., 1::2] & 1]


def demap_gray(s) -> np.ndarray:
    """Inverse of :func:`map_gray`."""
    s = np.asarray(s, dtype=np.int64) & 3
    return DELTA_INV[s].reshape(s.shape[:-1] + (-1,))


def differential_encode(s) -> np.ndarray:
    """``d_k = d_{k-1} + s_k (mod 4)`` with the reference ``d_0 = 0`` excluded."""
    s = np.asarray(s, dtype=np.int64)
    return np.cumsum(s, axis=-1) & 3


def differential_decode(d) -> np.ndarray:
    """``s_k = d_k - d_{k-1} (mod 4)`` with ``d_0 = 0``."""
    d = np.asarray(d, dtype=np.int64)
    return np.diff(d, axis=-1, prepend=0) & 3


def modulate(d) -> np.ndarray:
    return CONSTELLATION[np.asarray(d, dtype=np.int64) & 3]


def awgn(d, n0: float, rng: np.random.Generator) -> np.ndarray:
    """Transmit phase indices ``d`` over complex AWGN of total variance ``n0``.

    Each quadrature gets variance ``n0 / 2``. Noise is drawn as one
    ``standard_normal((..., 2))`` call so a given generator state always
    yields the same block.
    """
    if n0 < 0:
        raise ValueError("n0 must be non-negative")
    x = modulate(d)
    if n0 == 0:
        return x
    w = rng.standard_normal(x.shape + (2,))
    return x + np.sqrt(n0 / 2) * (w[..., 0] + 1j * w[..., 1])


def hard_phase(r) -> np.ndarray:
    """Nearest constellation point (phase index) for each received sample."""
    r = np.asarray(r)
    return np.argmin(np.abs(r[..., None] - CONSTELLATION) ** 2, axis=-1)


def ebno_to_n0(ebno_db: float, rate: float) -> float:
    """Complex noise variance for unit-energy symbols carrying 2 coded bits.

    ``Eb/N0 = 1 / (2 * rate * N0)`` with ``Eb`` the energy per information bit.
    """
    if not 0 < rate <= 1:
        raise ValueError(f"rate must lie in (0, 1], got {rate}")
    return 1.0 / (2.0 * rate * 10.0 ** (ebno_db / 10.0))
