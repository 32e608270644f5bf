"""Command-line driver: ``srhpitch {track,eval,mix,batch}``."""
from __future__ import annotations

import argparse
import logging
import sys

from . import io
from .batch import run_batch
from .evaluation import NoiseSpec, UncertainPolicy, evaluate, mix_noise
from .tracker import SpectrumSource, TrackerConfig, track

logger = logging.getLogger("srhpitch")


def _add_tracker_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--source", choices=[s.value for s in SpectrumSource], default="residual")
    p.add_argument("--theta", type=float, default=None,
                   help="voicing threshold (default 0.07 for residual, 0.18 for speech)")
    p.add_argument("--f0-min", type=float, default=50.0)
    p.add_argument("--f0-max", type=float, default=400.0)
    p.add_argument("--nharm", type=int, default=5)
    p.add_argument("--lpc-order", type=int, default=12)
    p.add_argument("--frame-ms", type=float, default=100.0)
    p.add_argument("--hop-ms", type=float, default=10.0)


def _config(args) -> TrackerConfig:
    return TrackerConfig(
        f0_min=args.f0_min, f0_max=args.f0_max, n_harm=args.nharm, theta=args.theta,
        frame_length_ms=args.frame_ms, hop_ms=args.hop_ms, lpc_order=args.lpc_order,
        source=args.source,
    )


def cmd_track(args) -> int:
    result = track(io.read_wav(args.wav), _config(args))
    if args.out:
        io.write_track(result, args.out)
    else:
        sys.stdout.write(io.format_track(result))
    return 0


def cmd_eval(args) -> int:
    rep = evaluate(io.read_track(args.track), io.read_truth(args.truth), args.uncertain)
    fpe = "" if rep.fpe_pct is None else f"{rep.fpe_pct:.4f}"
    print("vde,gpe,fpe,ffe,n_frames,n_voicing_errors,n_both_voiced,n_gross_errors,n_dropped")
    print(f"{rep.vde_pct:.4f},{rep.gpe_pct:.4f},{fpe},{rep.ffe_pct:.4f},{rep.n_frames},"
          f"{rep.n_voicing_errors},{rep.n_both_voiced},{rep.n_gross_errors},{rep.n_dropped}")
    return 0


def cmd_mix(args) -> int:
    mixed = mix_noise(io.read_wav(args.speech), NoiseSpec(io.read_wav(args.noise), args.snr_db, args.offset))
    io.write_wav(args.out, mixed)
    return 0


def cmd_batch(args) -> int:
    result = run_batch(io.read_manifest(args.manifest), jobs=args.jobs)
    for r in result.files:
        if r.error:
            print(f"FAILED {r.name}: {r.error}", file=sys.stderr)
    print(f"metrics written to {result.metrics_path}")
    return 0 if result.ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="srhpitch", description="SRH pitch tracking and evaluation")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("track", help="track pitch of a WAV file")
    p.add_argument("wav")
    p.add_argument("--out", help="output CSV (default: stdout)")
    _add_tracker_args(p)
    p.set_defaults(func=cmd_track)

    p = sub.add_parser("eval", help="score a track CSV against a reference file")
    p.add_argument("track")
    p.add_argument("truth")
    p.add_argument("--uncertain", choices=[u.value for u in UncertainPolicy], default="unvoiced")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("mix", help="add noise to speech at a given SNR")
    p.add_argument("speech")
    p.add_argument("noise")
    p.add_argument("--snr-db", type=float, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--offset", type=int, default=0, help="start sample in the noise file")
    p.set_defaults(func=cmd_mix)

    p = sub.add_parser("batch", help="run a manifest of files")
    p.add_argument("manifest")
    p.add_argument("--jobs", type=int, default=None)
    p.set_defaults(func=cmd_batch)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
