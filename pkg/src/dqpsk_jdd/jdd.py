"""Joint demapper-decoder for differentially encoded Gray QPSK.

Sum-product message passing on one factor graph that holds both the LDPC
code and the differential modulator. Per symbol ``k`` the graph has

* a channel factor ``rho_k`` attached to the transmitted symbol ``d_k``,
* the symbol variable ``d_k`` (4-ary),
* a merged mapping/differential factor ``psi_k`` tying ``d_{k-1}``, ``d_k``
  and the coded bits ``c[2k]`` (``m``) and ``c[2k+1]`` (``n``) through
  ``d_k = d_{k-1} + DELTA[m, n] (mod 4)``.

``d_{-1}`` (the reference symbol) is known to be phase 0, so ``psi_0`` sees a
constant delta message on that side. The last symbol has no right-hand
``psi`` and receives a uniform message there.

Message arrays per symbol (all shape ``(n_symbols, 4)``):

``alpha[k]``  ``d_{k-1} -> psi_k``
``beta[k]``   ``d_k -> psi_k``
``fwd[k]``    ``psi_k -> d_k``
``bwd[k]``    ``psi_{k+1} -> d_k`` (uniform for the last symbol)
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Literal

import numpy as np
from numba import njit

from .ldpc import DecodeResult, DecoderConfig, ParityCheckMatrix, _ldpc_iteration, _syndrome_zero
from .modem import CONSTELLATION, DELTA

__all__ = [
    "DecoderConfig",
    "DecodeResult",
    "JointDecoder",
    "channel_message",
    "decode",
    "psi_to_bit",
    "psi_to_symbol",
    "symbol_variable_update",
    "write_soft_trace",
]


def channel_message(r, n0: float) -> np.ndarray:
    """Normalised channel likelihoods over the four phases, shape ``(..., 4)``.

    ``q(l)`` is proportional to ``exp(-|r - e^{j pi l / 2}|^2 / n0)``; the
    largest exponent is subtracted first so the result never underflows to
    all zeros.
    """
    if n0 <= 0:
        raise ValueError("n0 must be positive")
    r = np.asarray(r, dtype=np.complex128)
    logits = -np.abs(r[..., None] - CONSTELLATION) ** 2 / n0
    logits -= logits.max(axis=-1, keepdims=True)
    q = np.exp(logits)
    return q / q.sum(axis=-1, keepdims=True)


# ---------------------------------------------------------------------------
# Node kernels
# ---------------------------------------------------------------------------


@njit(cache=True, error_model="numpy", inline="always")
def _normalize_row(x, k):
    s = x[k, 0] + x[k, 1] + x[k, 2] + x[k, 3]
    if s > 0.0 and s < np.inf:
        for l in range(4):
            x[k, l] /= s
        return 0
    for l in range(4):
        x[k, l] = 0.25
    return 1


@njit(cache=True, error_model="numpy", inline="always")
def _psi_to_symbol(bits, k, d_in, i, to_next, out, o):
    """psi_k -> d message written to ``out[o]`` from ``d_in[i]``.

    ``bits[2k]``, ``bits[2k+1]`` are the incoming bit messages; ``to_next``
    selects the target ``d_k`` (else ``d_{k-1}``).
    """
    for l in range(4):
        out[o, l] = 0.0
    for m in range(2):
        for n in range(2):
            w = bits[2 * k, m] * bits[2 * k + 1, n]
            delta = DELTA[m, n]
            for l in range(4):
                if to_next:
                    out[o, l] += w * d_in[i, (l - delta + 4) & 3]
                else:
                    out[o, l] += w * d_in[i, (l + delta) & 3]
    return _normalize_row(out, o)


@njit(cache=True, error_model="numpy", inline="always")
def _normalize_pair(x, j):
    s = x[j, 0] + x[j, 1]
    if s > 0.0 and s < np.inf:
        x[j, 0] /= s
        x[j, 1] /= s
        return 0
    x[j, 0] = 0.5
    x[j, 1] = 0.5
    return 1


@njit(cache=True, error_model="numpy", inline="always")
def _psi_to_bits(bits, k, d_prev, d_curr, out):
    """psi_k -> bit messages written to ``out[2k]`` and ``out[2k+1]``.

    ``d_prev[k]`` is the message from ``d_{k-1}`` and ``d_curr[k]`` the one
    from ``d_k``.
    """
    t0 = 0.0
    t1 = 0.0
    t2 = 0.0
    t3 = 0.0
    for l in range(4):
        a = d_prev[k, l]
        t0 += a * d_curr[k, l]
        t1 += a * d_curr[k, (l + 1) & 3]
        t2 += a * d_curr[k, (l + 2) & 3]
        t3 += a * d_curr[k, (l + 3) & 3]
    t = (t0, t1, t2, t3)
    j = 2 * k
    for v in range(2):
        out[j, v] = t[DELTA[v, 0]] * bits[j + 1, 0] + t[DELTA[v, 1]] * bits[j + 1, 1]
        out[j + 1, v] = t[DELTA[0, v]] * bits[j, 0] + t[DELTA[1, v]] * bits[j, 1]
    return _normalize_pair(out, j) + _normalize_pair(out, j + 1)


@njit(cache=True, error_model="numpy", inline="always")
def _product_into(a, i, b, k, out, o):
    for l in range(4):
        out[o, l] = a[i, l] * b[k, l]
    return _normalize_row(out, o)


@njit(cache=True, error_model="numpy")
def _set_reference(alpha):
    for l in range(4):
        alpha[0, l] = 0.0
    alpha[0, 0] = 1.0


@njit(cache=True, error_model="numpy")
def _symbol_pass(rho, fwd, bwd, alpha, beta):
    """All ``d -> psi`` messages from the current ``psi -> d`` messages."""
    bad = 0
    _set_reference(alpha)
    for k in range(rho.shape[0]):
        if k > 0:
            bad += _product_into(rho, k - 1, fwd, k - 1, alpha, k)
        bad += _product_into(rho, k, bwd, k, beta, k)
    return bad


@njit(cache=True, error_model="numpy")
def _chain_sweep(rho, c2psi, alpha, beta, fwd, bwd):
    """Forward then backward pass along the differential chain."""
    ns = rho.shape[0]
    bad = 0
    _set_reference(alpha)
    for k in range(ns):
        if k > 0:
            bad += _product_into(rho, k - 1, fwd, k - 1, alpha, k)
        bad += _psi_to_symbol(c2psi, k, alpha, k, True, fwd, k)
    for l in range(4):
        bwd[ns - 1, l] = 0.25
    for k in range(ns - 1, -1, -1):
        bad += _product_into(rho, k, bwd, k, beta, k)
        if k > 0:
            bad += _psi_to_symbol(c2psi, k, beta, k, False, bwd, k - 1)
    return bad


@njit(cache=True, error_model="numpy")
def _flood_step(rho, c2psi, alpha, beta, fwd, bwd):
    """Every psi node fires from the previous d->psi messages, then every d node."""
    bad = 0
    for k in range(rho.shape[0]):
        bad += _psi_to_symbol(c2psi, k, alpha, k, True, fwd, k)
        if k > 0:
            bad += _psi_to_symbol(c2psi, k, beta, k, False, bwd, k - 1)
    return bad + _symbol_pass(rho, fwd, bwd, alpha, beta)


@njit(cache=True, error_model="numpy")
def _psi_to_bits_all(alpha, beta, c2psi, psi2c):
    bad = 0
    for k in range(alpha.shape[0]):
        bad += _psi_to_bits(c2psi, k, alpha, beta, psi2c)
    return bad


@njit(cache=True, error_model="numpy")
def _initial_sweep(rho, c2psi, alpha, beta, fwd, bwd, flooding):
    fwd[:] = 0.25
    bwd[:] = 0.25
    if flooding:
        return _symbol_pass(rho, fwd, bwd, alpha, beta)
    return _chain_sweep(rho, c2psi, alpha, beta, fwd, bwd)


@njit(cache=True, error_model="numpy")
def _jdd_decode(
    rho, row_ptr, edge_col, col_ptr, col_edge, max_iter, early_stop, flooding, app, hard, sym_app
):
    ns = rho.shape[0]
    n = 2 * ns
    n_edges = edge_col.shape[0]
    alpha = np.empty((ns, 4))
    beta = np.empty((ns, 4))
    fwd = np.empty((ns, 4))
    bwd = np.empty((ns, 4))
    c2psi = np.full((n, 2), 0.5)
    psi2c = np.empty((n, 2))
    v2c = np.full((n_edges, 2), 0.5)
    c2v = np.full((n_edges, 2), 0.5)

    bad = _initial_sweep(rho, c2psi, alpha, beta, fwd, bwd, flooding)
    ok = False
    it = 0
    for it in range(1, max_iter + 1):
        bad += _psi_to_bits_all(alpha, beta, c2psi, psi2c)
        bad += _ldpc_iteration(psi2c, row_ptr, col_ptr, col_edge, v2c, c2v, app, c2psi, hard)
        ok = _syndrome_zero(hard, row_ptr, edge_col)
        if flooding:
            bad += _flood_step(rho, c2psi, alpha, beta, fwd, bwd)
        else:
            bad += _chain_sweep(rho, c2psi, alpha, beta, fwd, bwd)
        if ok and early_stop:
            break
    for k in range(ns):
        for l in range(4):
            sym_app[k, l] = rho[k, l] * fwd[k, l] * bwd[k, l]
        bad += _normalize_row(sym_app, k)
    return it, ok, bad


@njit(cache=True, error_model="numpy")
def _first_sweep_bits(rho, flooding, psi2c):
    ns = rho.shape[0]
    alpha = np.empty((ns, 4))
    beta = np.empty((ns, 4))
    fwd = np.empty((ns, 4))
    bwd = np.empty((ns, 4))
    c2psi = np.full((2 * ns, 2), 0.5)
    bad = _initial_sweep(rho, c2psi, alpha, beta, fwd, bwd, flooding)
    return bad + _psi_to_bits_all(alpha, beta, c2psi, psi2c)


# ---------------------------------------------------------------------------
# Public single-node operations
# ---------------------------------------------------------------------------


def _vec(x, size: int) -> np.ndarray:
    a = np.array(x, dtype=np.float64)
    if a.shape != (size,):
        raise ValueError(f"expected a length-{size} message, got shape {a.shape}")
    return (a / a.sum())[None, :]


def psi_to_symbol(
    bit_msgs, d_in, direction: Literal["next", "prev"] = "next"
) -> np.ndarray:
    """Message from ``psi_k`` to ``d_k`` (``"next"``) or ``d_{k-1}`` (``"prev"``).

    ``bit_msgs`` is ``(msg for c[2k], msg for c[2k+1])`` and ``d_in`` the
    incoming message from the symbol on the opposite side.
    """
    if direction not in ("next", "prev"):
        raise ValueError(f"direction must be 'next' or 'prev', got {direction!r}")
    pm, pn = bit_msgs
    bits = np.vstack([_vec(pm, 2), _vec(pn, 2)])
    out = np.empty((1, 4))
    _psi_to_symbol(bits, 0, _vec(d_in, 4), 0, direction == "next", out, 0)
    return out[0]


def psi_to_bit(
    other_bit, d_prev_in, d_curr_in, which: Literal["first", "second"]
) -> np.ndarray:
    """Message from ``psi_k`` to one of its two bits.

    ``which="first"`` targets ``c[2k]`` (the ``m`` bit) and ``other_bit`` is
    the message from ``c[2k+1]``; ``"second"`` is the converse.
    """
    if which not in ("first", "second"):
        raise ValueError(f"which must be 'first' or 'second', got {which!r}")
    other = _vec(other_bit, 2)
    uniform = np.full((1, 2), 0.5)
    bits = np.vstack([uniform, other] if which == "first" else [other, uniform])
    out = np.empty((2, 2))
    _psi_to_bits(bits, 0, _vec(d_prev_in, 4), _vec(d_curr_in, 4), out)
    return out[0] if which == "first" else out[1]


def symbol_variable_update(rho_msg, psi_left_in=None, psi_right_in=None):
    """Messages leaving ``d_k``.

    Returns ``(to_psi_left, to_psi_right, app, fallbacks)``. A missing
    neighbour (``None``) contributes a uniform message.
    """
    rho = _vec(rho_msg, 4)
    left = np.full((1, 4), 0.25) if psi_left_in is None else _vec(psi_left_in, 4)
    right = np.full((1, 4), 0.25) if psi_right_in is None else _vec(psi_right_in, 4)
    out = np.empty((3, 4))
    bad = _product_into(rho, 0, right, 0, out, 0)
    bad += _product_into(rho, 0, left, 0, out, 1)
    bad += _product_into(rho * left, 0, right, 0, out, 2)
    return out[0], out[1], out[2], bad


# ---------------------------------------------------------------------------
# Decoder
# ---------------------------------------------------------------------------


class JointDecoder:
    """Joint demapper-decoder bound to one parity-check matrix.

    The topology is shared and immutable; every :meth:`decode` call allocates
    its own message buffers, so one instance may serve many frames.

    Schedule per iteration: psi -> bit messages, one LDPC flooding iteration
    with those as priors, bit -> psi messages (product of the check
    messages), then a differential-chain update (full forward/backward sweep,
    or a single parallel step for ``schedule="flood"``). Before the first
    iteration the chain is updated once with uniform bit messages.
    """

    def __init__(self, code: ParityCheckMatrix, config: DecoderConfig = DecoderConfig()):
        if code.n_cols % 2:
            raise ValueError("joint decoding needs an even codeword length")
        self.code = code
        self.config = config
        self.n_symbols = code.n_cols // 2

    def psi_degrees(self) -> np.ndarray:
        """Neighbour count of each ``psi_k``; the first lacks the known ``d_{-1}``."""
        deg = np.full(self.n_symbols, 4)
        deg[0] = 3
        return deg

    def _rho(self, r, n0: float) -> np.ndarray:
        r = np.asarray(r, dtype=np.complex128)
        if r.shape != (self.n_symbols,):
            raise ValueError(f"expected {self.n_symbols} received samples, got shape {r.shape}")
        return np.ascontiguousarray(channel_message(r, n0))

    def decode(self, r, n0: float) -> DecodeResult:
        rho = self._rho(r, n0)
        e = self.code.edges
        cfg = self.config
        app = np.empty((self.code.n_cols, 2))
        hard = np.empty(self.code.n_cols, dtype=np.uint8)
        sym_app = np.empty((self.n_symbols, 4))
        it, ok, bad = _jdd_decode(
            rho, e.row_ptr, e.edge_col, e.col_ptr, e.col_edge,
            cfg.max_iterations, cfg.early_stop, cfg.schedule == "flood", app, hard, sym_app,
        )
        return DecodeResult(hard, bool(ok), int(it), app, int(bad), sym_app)

    def initial_bit_messages(self, r, n0: float) -> np.ndarray:
        """psi -> bit messages after the first chain update, before any check feedback."""
        rho = self._rho(r, n0)
        out = np.empty((self.code.n_cols, 2))
        _first_sweep_bits(rho, self.config.schedule == "flood", out)
        return out


def decode(
    code: ParityCheckMatrix, r, n0: float, config: DecoderConfig = DecoderConfig()
) -> DecodeResult:
    return JointDecoder(code, config).decode(r, n0)


def write_soft_trace(path: str | Path, result: DecodeResult) -> None:
    """Dump per-bit and per-symbol APPs as CSV (``kind,index,p0..p3``)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["kind", "index", "p0", "p1", "p2", "p3"])
        for j, (p0, p1) in enumerate(result.bit_app):
            w.writerow(["bit", j, repr(float(p0)), repr(float(p1)), "", ""])
        if result.symbol_app is not None:
            for k, q in enumerate(result.symbol_app):
                w.writerow(["symbol", k, *(repr(float(x)) for x in q)])
