"""Comparison receivers: serial demapper + LDPC, and coherent Gray QPSK."""

from __future__ import annotations

import numpy as np

from .jdd import channel_message
from .ldpc import DecodeResult, DecoderConfig, ParityCheckMatrix, spa_decode
from .modem import DELTA

# _SHIFT[l, delta] = (l + delta) mod 4
_SHIFT = (np.arange(4)[:, None] + np.arange(4)[None, :]) % 4


def _symbol_to_bits(q: np.ndarray) -> np.ndarray:
    """Marginalise per-symbol phase posteriors ``(K, 4)`` to bit messages ``(2K, 2)``."""
    first = np.stack([q[:, DELTA[v]].sum(axis=1) for v in (0, 1)], axis=1)
    second = np.stack([q[:, DELTA[:, v]].sum(axis=1) for v in (0, 1)], axis=1)
    out = np.empty((2 * q.shape[0], 2))
    out[0::2] = first / first.sum(axis=1, keepdims=True)
    out[1::2] = second / second.sum(axis=1, keepdims=True)
    return out


def differential_symbol_posterior(r, n0: float) -> np.ndarray:
    """``P(s_k | r_{k-1}, r_k)`` for every symbol, shape ``(K, 4)``.

    The first symbol pairs with the known reference phase 0 instead of a
    received sample.
    """
    lik = channel_message(np.atleast_1d(r), n0)
    prev = np.vstack([np.eye(4)[:1], lik[:-1]])
    post = np.einsum("kl,kld->kd", prev, lik[:, _SHIFT])
    return post / post.sum(axis=1, keepdims=True)


def sca_demap(r, n0: float) -> np.ndarray:
    """One-shot soft differential demapper; bit messages of shape ``(N, 2)``."""
    return _symbol_to_bits(differential_symbol_posterior(r, n0))


def qpsk_optimal_demap(r, n0: float) -> np.ndarray:
    """Exact bit marginals for coherent (non-differential) Gray QPSK."""
    return _symbol_to_bits(channel_message(np.atleast_1d(r), n0))


def sca_decode(
    r, n0: float, code: ParityCheckMatrix, config: DecoderConfig = DecoderConfig()
) -> DecodeResult:
    """Serial architecture: :func:`sca_demap` once, then standalone LDPC SPA."""
    return spa_decode(code, sca_demap(r, n0), config)


def qpsk_decode(
    r, n0: float, code: ParityCheckMatrix, config: DecoderConfig = DecoderConfig()
) -> DecodeResult:
    return spa_decode(code, qpsk_optimal_demap(r, n0), config)
