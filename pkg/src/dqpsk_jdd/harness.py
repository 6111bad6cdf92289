"""Monte Carlo BER engine.

Every frame draws its data and noise from its own generator keyed by
``(seed, frame_index)``, so a point's counts depend only on the
configuration, never on the worker count or on scheduling order. A point is
the shortest prefix of frames ``0, 1, 2, ...`` that reaches the error target
(or ``max_frames``).
"""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Literal, NamedTuple

import numpy as np
from scipy.stats import binomtest

from . import baselines
from .jdd import JointDecoder
from .ldpc import DecodeResult, DecoderConfig, ParityCheckMatrix, spa_decode
from .modem import awgn, differential_encode, ebno_to_n0, map_gray

logger = logging.getLogger(__name__)

DecoderKind = Literal["jdd", "sca", "qpsk"]


@dataclass(frozen=True)
class SweepConfig:
    ebno_start_db: float
    ebno_stop_db: float
    ebno_step_db: float = 0.25
    min_bit_errors: int = 1000
    max_frames: int = 10**7
    decoder: DecoderKind = "jdd"
    iterations: int = 20
    seed: int = 0
    workers: int = 1
    schedule: Literal["chain", "flood"] = "chain"
    #: what ``min_bit_errors`` counts: bit errors or frame errors
    stop_on: Literal["bit", "frame"] = "bit"
    #: bits over which errors are counted
    count_bits: Literal["info", "coded"] = "info"
    chunk_frames: int = 32
    #: end the sweep after the first point whose BER falls below this value
    stop_ber: float | None = None

    def __post_init__(self):
        if self.ebno_start_db > self.ebno_stop_db:
            raise ValueError("ebno_start_db must not exceed ebno_stop_db")
        if self.ebno_step_db <= 0:
            raise ValueError("ebno_step_db must be positive")
        if self.min_bit_errors < 1:
            raise ValueError("min_bit_errors must be >= 1")
        if self.max_frames < 1 or self.workers < 1 or self.chunk_frames < 1:
            raise ValueError("max_frames, workers and chunk_frames must be >= 1")
        if self.decoder not in ("jdd", "sca", "qpsk"):
            raise ValueError(f"unknown decoder {self.decoder!r}")

    def grid(self) -> np.ndarray:
        count = int(math.floor((self.ebno_stop_db - self.ebno_start_db) / self.ebno_step_db + 1e-9)) + 1
        return np.round(self.ebno_start_db + self.ebno_step_db * np.arange(count), 10)

    def decoder_config(self) -> DecoderConfig:
        return DecoderConfig(max_iterations=self.iterations, schedule=self.schedule)


@dataclass
class BerPoint:
    ebno_db: float
    frames: int
    bit_errors: int
    frame_errors: int
    ber: float
    fer: float
    avg_iterations: float
    wall_time_s: float = field(default=0.0, compare=False)
    truncated: bool = False
    bits_per_frame: int = 0

    def counts(self) -> tuple:
        """Everything except wall time; equal for reproduced runs."""
        d = asdict(self)
        d.pop("wall_time_s")
        return tuple(d.values())


class FrameOutcome(NamedTuple):
    bit_errors: int
    frame_error: bool
    iterations: int


class FrameSimulator:
    """Transmit chain plus one receiver, for one code.

    ``decoder`` selects the receiver: ``"jdd"`` (joint, differential),
    ``"sca"`` (serial, differential) or ``"qpsk"`` (coherent, no differential
    encoding).
    """

    def __init__(
        self,
        code: ParityCheckMatrix,
        decoder: DecoderKind = "jdd",
        config: DecoderConfig = DecoderConfig(),
        count_bits: Literal["info", "coded"] = "info",
    ):
        if code.n_cols % 2:
            raise ValueError("codeword length must be even for QPSK")
        self.code = code
        self.decoder = decoder
        self.config = config
        self.count_bits = count_bits
        self.differential = decoder != "qpsk"
        self._joint = JointDecoder(code, config) if decoder == "jdd" else None

    @property
    def bits_per_frame(self) -> int:
        return self.code.k if self.count_bits == "info" else self.code.n_cols

    def n0(self, ebno_db: float) -> float:
        return ebno_to_n0(ebno_db, self.code.rate)

    def transmit(self, seed: int, frame_index: int, n0: float):
        """Return ``(info_bits, codeword, received)`` for one frame."""
        rng = np.random.default_rng([seed, frame_index])
        b = rng.integers(0, 2, self.code.k, dtype=np.uint8)
        c = self.code.encoder.encode(b)
        sym = map_gray(c)
        if self.differential:
            sym = differential_encode(sym)
        return b, c, awgn(sym, n0, rng)

    def decode(self, r, n0: float) -> DecodeResult:
        if self.decoder == "jdd":
            return self._joint.decode(r, n0)
        if self.decoder == "sca":
            priors = baselines.sca_demap(r, n0)
        else:
            priors = baselines.qpsk_optimal_demap(r, n0)
        return spa_decode(self.code, priors, self.config)

    def run_frame(self, seed: int, frame_index: int, n0: float) -> FrameOutcome:
        b, c, r = self.transmit(seed, frame_index, n0)
        res = self.decode(r, n0)
        if self.count_bits == "info":
            errors = int(np.count_nonzero(self.code.encoder.extract(res.hard_bits) != b))
        else:
            errors = int(np.count_nonzero(res.hard_bits != c))
        return FrameOutcome(errors, errors > 0, res.iterations)

    def run_frames(self, seed: int, first: int, count: int, n0: float) -> list[FrameOutcome]:
        return [self.run_frame(seed, i, n0) for i in range(first, first + count)]


# worker-process state, set by _init_worker
_worker_sim: FrameSimulator | None = None


def _init_worker(code, decoder, config, count_bits):
    global _worker_sim
    _worker_sim = FrameSimulator(code, decoder, config, count_bits)


def _worker_frames(seed, first, count, n0):
    return _worker_sim.run_frames(seed, first, count, n0)


def _simulator_for(cfg: SweepConfig, code: ParityCheckMatrix) -> FrameSimulator:
    return FrameSimulator(code, cfg.decoder, cfg.decoder_config(), cfg.count_bits)


def run_point(
    cfg: SweepConfig,
    ebno_db: float,
    code: ParityCheckMatrix,
    sim: FrameSimulator | None = None,
    pool: ProcessPoolExecutor | None = None,
) -> BerPoint:
    """Simulate frames at one Eb/N0 until the error target or ``max_frames``.

    The noise power handed to the receiver is the exact value used by the
    channel.
    """
    sim = sim or _simulator_for(cfg, code)
    n0 = sim.n0(ebno_db)
    t0 = time.perf_counter()
    frames = bit_err = frame_err = iters = 0
    done = False
    while not done:
        span = min(cfg.chunk_frames * cfg.workers, cfg.max_frames - frames)
        if pool is None:
            outcomes = sim.run_frames(cfg.seed, frames, span, n0)
        else:
            share = -(-span // cfg.workers)
            starts = range(frames, frames + span, share)
            futures = [
                pool.submit(_worker_frames, cfg.seed, s, min(share, frames + span - s), n0)
                for s in starts
            ]
            outcomes = [o for f in futures for o in f.result()]
        for o in outcomes:
            frames += 1
            bit_err += o.bit_errors
            frame_err += o.frame_error
            iters += o.iterations
            counted = bit_err if cfg.stop_on == "bit" else frame_err
            if counted >= cfg.min_bit_errors or frames >= cfg.max_frames:
                done = True
                break
        logger.info(
            "Eb/N0 %.2f dB: %d frames, %d bit errors, BER %.3e",
            ebno_db, frames, bit_err, bit_err / (frames * sim.bits_per_frame),
        )
    counted = bit_err if cfg.stop_on == "bit" else frame_err
    n_bits = frames * sim.bits_per_frame
    return BerPoint(
        ebno_db=float(ebno_db),
        frames=frames,
        bit_errors=bit_err,
        frame_errors=frame_err,
        ber=bit_err / n_bits,
        fer=frame_err / frames,
        avg_iterations=iters / frames,
        wall_time_s=time.perf_counter() - t0,
        truncated=counted < cfg.min_bit_errors,
        bits_per_frame=sim.bits_per_frame,
    )


def run_sweep(cfg: SweepConfig, code: ParityCheckMatrix) -> list[BerPoint]:
    """Run :func:`run_point` over the configured Eb/N0 grid."""
    sim = _simulator_for(cfg, code)
    pool = None
    if cfg.workers > 1:
        pool = ProcessPoolExecutor(
            cfg.workers,
            initializer=_init_worker,
            initargs=(code, cfg.decoder, cfg.decoder_config(), cfg.count_bits),
        )
    points: list[BerPoint] = []
    try:
        for ebno in cfg.grid():
            p = run_point(cfg, float(ebno), code, sim, pool)
            if points and p.ber > points[-1].ber:
                logger.warning(
                    "BER rose from %.3e to %.3e between %.2f and %.2f dB",
                    points[-1].ber, p.ber, points[-1].ebno_db, p.ebno_db,
                )
            points.append(p)
            if cfg.stop_ber is not None and p.ber < cfg.stop_ber:
                break
    finally:
        if pool is not None:
            pool.shutdown()
    return points


def confidence_interval(p: BerPoint, level: float = 0.95) -> tuple[float, float]:
    """Wilson score interval for the BER.

    Bits are treated as independent Bernoulli trials, which understates the
    width for bursty decoder errors.
    """
    if p.frames <= 0:
        raise ValueError("point has no frames")
    ci = binomtest(p.bit_errors, p.frames * p.bits_per_frame).proportion_ci(
        confidence_level=level, method="wilson"
    )
    return float(ci.low), float(ci.high)
