"""Command-line front end: run BER sweeps, write CSV + manifest, compare curves."""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import logging
import math
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Sequence

from . import __version__
from .harness import BerPoint, FrameSimulator, SweepConfig, run_sweep
from .jdd import write_soft_trace
from .ldpc import ParityCheckMatrix, generate_regular_code, read_alist

logger = logging.getLogger("dqpsk_jdd")

CSV_FIELDS = ("ebno_db", "ber", "fer", "bit_errors", "frame_errors", "frames", "avg_iterations", "truncated")


# ---------------------------------------------------------------------------
# Results files
# ---------------------------------------------------------------------------


def write_curve(points: Iterable[BerPoint], fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for p in points:
        w.writerow([
            repr(p.ebno_db), repr(p.ber), repr(p.fer), p.bit_errors, p.frame_errors,
            p.frames, repr(p.avg_iterations), int(p.truncated),
        ])


def read_curve(path: str | Path) -> list[BerPoint]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if rows and set(CSV_FIELDS) - set(rows[0]):
        raise ValueError(f"{path}: missing columns {sorted(set(CSV_FIELDS) - set(rows[0]))}")
    return [
        BerPoint(
            ebno_db=float(r["ebno_db"]), frames=int(r["frames"]), bit_errors=int(r["bit_errors"]),
            frame_errors=int(r["frame_errors"]), ber=float(r["ber"]), fer=float(r["fer"]),
            avg_iterations=float(r["avg_iterations"]), truncated=bool(int(r["truncated"])),
        )
        for r in rows
    ]


def ebno_at_ber(curve: Sequence, target_ber: float) -> float:
    """Eb/N0 where the curve crosses ``target_ber``, interpolated linearly in
    (dB, log10 BER). ``curve`` holds :class:`BerPoint` or ``(ebno_db, ber)``
    pairs. Zero-BER points cannot be placed on a log axis and are ignored.
    """
    pts = sorted(
        (p.ebno_db, p.ber) if isinstance(p, BerPoint) else (float(p[0]), float(p[1]))
        for p in curve
    )
    pts = [(x, y) for x, y in pts if y > 0]
    lt = math.log10(target_ber)
    for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
        if y0 >= target_ber >= y1:
            l0, l1 = math.log10(y0), math.log10(y1)
            if l0 == l1:
                return x0
            return x0 + (lt - l0) * (x1 - x0) / (l1 - l0)
    raise ValueError(f"curve does not bracket BER {target_ber:g}")


def gap_at_ber(curve_a: Sequence, curve_b: Sequence, target_ber: float) -> float:
    """Extra Eb/N0 (dB) curve ``a`` needs over curve ``b`` at ``target_ber``."""
    return ebno_at_ber(curve_a, target_ber) - ebno_at_ber(curve_b, target_ber)


PLOT_TEMPLATE = '''\
"""BER versus Eb/N0; generated by dqpsk-jdd. Run with: python {name}"""
import csv

import matplotlib.pyplot as plt

CURVES = {curves!r}

fig, ax = plt.subplots(figsize=(6, 4.5))
for label, path in CURVES:
    with open(path, newline="") as fh:
        rows = [r for r in csv.DictReader(fh) if float(r["ber"]) > 0]
    ax.semilogy([float(r["ebno_db"]) for r in rows], [float(r["ber"]) for r in rows],
                marker="o", label=label)
ax.set_xlabel("Eb/N0 [dB]")
ax.set_ylabel("BER")
ax.grid(True, which="both", alpha=0.4)
ax.legend()
fig.tight_layout()
fig.savefig({png!r}, dpi=150)
'''


def write_plot_script(path: str | Path, curves: Sequence[tuple[str, str]]) -> None:
    path = Path(path)
    png = str(path.with_suffix(".png"))
    path.write_text(PLOT_TEMPLATE.format(name=path.name, curves=list(curves), png=png))


# ---------------------------------------------------------------------------
# Code construction and manifests
# ---------------------------------------------------------------------------


def parse_code_gen(text: str, default_seed: int) -> dict:
    fields = {"seed": default_seed}
    for item in text.split(","):
        key, sep, value = item.partition("=")
        key = key.strip()
        if not sep or key not in ("n", "wc", "wr", "seed"):
            raise ValueError(f"bad --code-gen item {item!r}; expected n=..,wc=..,wr=..[,seed=..]")
        fields[key] = int(value)
    missing = {"n", "wc", "wr"} - fields.keys()
    if missing:
        raise ValueError(f"--code-gen is missing {', '.join(sorted(missing))}")
    return fields


def build_code(source: dict) -> ParityCheckMatrix:
    if source["source"] == "alist":
        return read_alist(source["path"])
    return generate_regular_code(source["n"], source["wc"], source["wr"], source["seed"], balanced=True)


def parse_ebno(text: str) -> tuple[float, float, float]:
    parts = [float(x) for x in text.split(":")]
    if len(parts) == 1:
        return parts[0], parts[0], 1.0
    if len(parts) == 3:
        return parts[0], parts[1], parts[2]
    raise ValueError(f"bad --ebno {text!r}; expected start:stop:step or a single value")


def make_manifest(cfg: SweepConfig, code_source: dict, code: ParityCheckMatrix) -> dict:
    return {
        "tool": "dqpsk-jdd",
        "version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "seed": cfg.seed,
        "config": dataclasses.asdict(cfg),
        "code": code_source,
        "code_fingerprint": code.fingerprint,
        "code_shape": [code.n_rows, code.n_cols],
        "code_k": code.k,
    }


def config_from_manifest(manifest: dict, workers: int | None = None) -> SweepConfig:
    cfg = dict(manifest["config"])
    if workers is not None:
        cfg["workers"] = workers
    return SweepConfig(**cfg)


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="dqpsk-jdd",
        description="BER sweeps for joint demapping/decoding of LDPC-coded DQPSK and its baselines.",
    )
    p.add_argument("--decoder", choices=("jdd", "sca", "qpsk"), default="jdd")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--code", metavar="ALIST", help="parity-check matrix in alist format")
    src.add_argument("--code-gen", metavar="n=..,wc=..,wr=..", help="generate a column-regular code")
    p.add_argument("--ebno", metavar="START:STOP:STEP", help="Eb/N0 grid in dB")
    p.add_argument("--iters", type=int, default=20)
    p.add_argument("--min-errors", type=int, default=1000)
    p.add_argument("--max-frames", type=int, default=10**7)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=None, help="worker processes (default 1)")
    p.add_argument("--schedule", choices=("chain", "flood"), default="chain")
    p.add_argument("--stop-on", choices=("bit", "frame"), default="bit",
                   help="whether --min-errors counts bit or frame errors")
    p.add_argument("--stop-ber", type=float, default=None,
                   help="end the sweep after the first point below this BER")
    p.add_argument("--out", metavar="PATH", help="results CSV (default: standard output)")
    p.add_argument("--manifest", metavar="PATH", help="manifest path (default: OUT.manifest.json)")
    p.add_argument("--replay", metavar="MANIFEST", help="re-run the sweep recorded in a manifest")
    p.add_argument("--plot-script", metavar="PATH", help="write a matplotlib script for the curves")
    p.add_argument("--trace", metavar="PATH",
                   help="with -v, dump joint-decoder soft outputs of frame 0 of each point (CSV)")
    p.add_argument("--compare", nargs=2, metavar=("A.csv", "B.csv"),
                   help="print the Eb/N0 gap of curve A over curve B")
    p.add_argument("--target-ber", type=float, default=1e-4)
    p.add_argument("-v", "--verbose", action="count", default=0)
    return p


def _compare(args) -> int:
    a, b = (read_curve(path) for path in args.compare)
    gap = gap_at_ber(a, b, args.target_ber)
    print(f"gap at BER {args.target_ber:g}: {gap:.3f} dB ({args.compare[0]} vs {args.compare[1]})")
    if args.plot_script:
        write_plot_script(args.plot_script, [(Path(x).stem, x) for x in args.compare])
    return 0


def _dump_traces(path: str, cfg: SweepConfig, code: ParityCheckMatrix, points: list[BerPoint]) -> None:
    sim = FrameSimulator(code, "jdd", cfg.decoder_config(), cfg.count_bits)
    base = Path(path)
    for p in points:
        n0 = sim.n0(p.ebno_db)
        _, _, r = sim.transmit(cfg.seed, 0, n0)
        target = base.with_name(f"{base.stem}_{p.ebno_db:g}dB{base.suffix or '.csv'}")
        write_soft_trace(target, sim.decode(r, n0))


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        if args.compare:
            return _compare(args)
        if args.replay:
            manifest = json.loads(Path(args.replay).read_text())
            cfg = config_from_manifest(manifest, args.workers)
            code_source = manifest["code"]
            code = build_code(code_source)
            if code.fingerprint != manifest["code_fingerprint"]:
                raise ValueError("code fingerprint differs from the manifest")
        else:
            if not args.ebno:
                parser.error("--ebno is required unless --compare or --replay is given")
            if args.code:
                code_source = {"source": "alist", "path": str(Path(args.code).resolve())}
            elif args.code_gen:
                code_source = {"source": "generated", **parse_code_gen(args.code_gen, args.seed)}
            else:
                parser.error("one of --code or --code-gen is required")
            code = build_code(code_source)
            start, stop, step = parse_ebno(args.ebno)
            cfg = SweepConfig(
                ebno_start_db=start, ebno_stop_db=stop, ebno_step_db=step,
                min_bit_errors=args.min_errors, max_frames=args.max_frames,
                decoder=args.decoder, iterations=args.iters, seed=args.seed,
                workers=args.workers or 1, schedule=args.schedule, stop_on=args.stop_on,
                stop_ber=args.stop_ber,
            )
        logger.info("code %dx%d, K=%d, rate %.4f", code.n_rows, code.n_cols, code.k, code.rate)
        points = run_sweep(cfg, code)
    except (OSError, ValueError) as exc:
        print(f"dqpsk-jdd: error: {exc}", file=sys.stderr)
        return 1

    buf = io.StringIO()
    write_curve(points, buf)
    if args.out:
        Path(args.out).write_text(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    manifest_path = args.manifest or (f"{args.out}.manifest.json" if args.out else None)
    if manifest_path:
        Path(manifest_path).write_text(json.dumps(make_manifest(cfg, code_source, code), indent=2) + "\n")
    if args.plot_script and args.out:
        write_plot_script(args.plot_script, [(cfg.decoder, args.out)])
    if args.trace and args.verbose:
        _dump_traces(args.trace, cfg, code, points)
    return 0


if __name__ == "__main__":
    sys.exit(main())
