"""Command-line entry points: paint, opcount, spectral, train, sample, serve.

Exit codes: 0 success, 1 invalid arguments (usage to stderr), 2 runtime
failure (message to stderr).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from pathlib import Path

import numpy as np

from ..canvas import (
    encode_png,
    load_image,
    load_mask,
    rasterize,
    save_image,
    spec_from_json,
)
from ..sampler import (
    CompositionInput,
    ResampleConfig,
    build_resample_plan,
    count_ops,
    paint,
    unconditional_sample,
)
from ..schedule import GaussianNoiseSource, linear_beta_schedule
from ..spectral import (
    corruption_profile,
    expected_noise_spectrum,
    profile_summary_json,
    profile_to_csv,
    radial_power_spectrum,
    render_heat_table,
    sampled_noise_spectrum,
)
from .denoisers import resolve_denoiser

PRESET_STRATEGIES = ("all", "start:150", "stop:100", "none")


class CliParser(argparse.ArgumentParser):
    """argparse variant that exits 1 (not 2) on bad arguments."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def build_parser() -> CliParser:
    parser = CliParser(prog="diffpaint", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=CliParser)

    p = sub.add_parser("paint", help="fill the unknown region of a landmark canvas")
    p.add_argument("--spec", help="composition JSON document")
    p.add_argument("--image", help="known-canvas PNG (alternative to --spec)")
    p.add_argument("--mask", help="keep-mask PNG companion to --image")
    p.add_argument("--strategy", default="stop:100",
                   help="none | all | start:<t> | stop:<t>")
    p.add_argument("--lambda", dest="lam", type=int, default=10, help="jump length")
    p.add_argument("--repeats", type=int, default=10, help="resample repetitions")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--timesteps", type=int, default=250, help="schedule length T")
    p.add_argument("--denoiser", default="flat",
                   help="flat[:sigma] | gmm:<json> | <weights file>")
    p.add_argument("--known-noise-index", choices=["t-1", "t"], default="t-1")
    p.add_argument("--no-clamp", action="store_true", help="disable x0 clamping")
    p.add_argument("--out", required=True, help="output PNG path")
    p.add_argument("--report", help="op-count JSON path")
    p.add_argument("--manifest", help="manifest JSON path (default: <out>.manifest.json)")
    p.add_argument("--snapshots", type=int, default=0, metavar="K",
                   help="save a snapshot PNG every K denoise ops next to --out")

    p = sub.add_parser("opcount", help="closed-form operation counts per strategy")
    p.add_argument("--strategy", help="print one strategy (default: all four presets)")
    p.add_argument("--lambda", dest="lam", type=int, default=10)
    p.add_argument("--repeats", type=int, default=10)
    p.add_argument("--timesteps", type=int, default=250)

    p = sub.add_parser("spectral", help="per-band corruption profile of an image")
    p.add_argument("--image", required=True)
    p.add_argument("--bands", type=int, default=16)
    p.add_argument("--timesteps", type=int, default=250)
    p.add_argument("--noise", choices=["analytic", "sampled"], default="analytic")
    p.add_argument("--csv", help="write (band, t, snr) rows here")
    p.add_argument("--summary", help="write crossover JSON summary here")

    p = sub.add_parser("train", help="train the toy denoiser")
    p.add_argument("--dataset", default="builtin:two_shapes",
                   help="directory of PNGs or builtin:two_shapes[:n]")
    p.add_argument("--size", type=int, default=32)
    p.add_argument("--epochs", type=int, default=30)
    p.add_argument("--batch-size", type=int, default=64)
    p.add_argument("--lr", type=float, default=2e-3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--timesteps", type=int, default=250)
    p.add_argument("--out", required=True, help="weights file path")

    p = sub.add_parser("sample", help="unconditional ancestral samples")
    p.add_argument("--denoiser", required=True)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--timesteps", type=int, default=250)
    p.add_argument("--shape", help="HxW[xC] when the denoiser does not fix one")
    p.add_argument("--out-dir", required=True)

    p = sub.add_parser("serve", help="run the HTTP job service")
    p.add_argument("--host", default=None)
    p.add_argument("--port", type=int, default=None)
    p.add_argument("--store", default=None, help="job store directory")
    p.add_argument("--denoiser", default="flat", help="default denoiser for jobs")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--frontend", default=None, help="static UI bundle directory")
    return parser


def _load_composition(args) -> CompositionInput:
    if args.spec:
        spec = spec_from_json(Path(args.spec).read_text(), base_dir=Path(args.spec).parent)
        return rasterize(spec)
    if args.image and args.mask:
        image = load_image(args.image)
        mask2d = load_mask(args.mask, expected_shape=image.shape[:2])
        mask = np.repeat(mask2d[:, :, None], image.shape[2], axis=2)
        return CompositionInput(known=image, mask=mask)
    raise SystemExit(_usage_error("paint needs --spec or both --image and --mask"))


def _usage_error(message: str) -> int:
    print("usage: diffpaint paint (--spec SPEC | --image PNG --mask PNG) --out PNG [...]",
          file=sys.stderr)
    print(f"diffpaint: error: {message}", file=sys.stderr)
    return 1


def cmd_paint(args) -> int:
    comp = _load_composition(args)
    for warning in comp.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    schedule = linear_beta_schedule(args.timesteps)
    config = ResampleConfig(lam=args.lam, repeats=args.repeats, strategy=args.strategy)
    plan = build_resample_plan(config, schedule.T)
    denoiser = resolve_denoiser(args.denoiser, schedule, comp.known.shape)
    rng = GaussianNoiseSource(args.seed, 0)

    out_path = Path(args.out)
    snapshots_dir = out_path.parent

    def on_snapshot(snap):
        save_image(snap.image, snapshots_dir / f"{out_path.stem}.snapshot{snap.op_index}.png")

    result = paint(
        comp,
        denoiser,
        schedule,
        plan,
        rng,
        clamp_x0=not args.no_clamp,
        known_noise_index=args.known_noise_index,
        snapshot_every=args.snapshots,
        on_snapshot=on_snapshot if args.snapshots else None,
    )

    png = encode_png(result.image)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_bytes(png)
    if args.report:
        Path(args.report).write_text(json.dumps(result.ops.to_dict(), indent=2))
    manifest_path = Path(args.manifest) if args.manifest else out_path.with_suffix(
        out_path.suffix + ".manifest.json"
    )
    manifest = {
        "seed": args.seed,
        "config": {
            "strategy": args.strategy,
            "lambda": args.lam,
            "repeats": args.repeats,
            "T": args.timesteps,
            "known_noise_index": args.known_noise_index,
            "clamp_x0": not args.no_clamp,
        },
        "schedule_digest": schedule.digest(),
        "denoiser_digest": denoiser.digest(),
        "ops": result.ops.to_dict(),
        "result_sha256": hashlib.sha256(png).hexdigest(),
    }
    manifest_path.write_text(json.dumps(manifest, indent=2))
    print(f"wrote {out_path} ({result.ops.n_total} ops)")
    return 0


def cmd_opcount(args) -> int:
    strategies = [args.strategy] if args.strategy else list(PRESET_STRATEGIES)
    for strategy in strategies:
        config = ResampleConfig(lam=args.lam, repeats=args.repeats, strategy=strategy)
        ops = count_ops(build_resample_plan(config, args.timesteps))
        print(f"{strategy}: {ops.n_dn}, {ops.n_fwd}, {ops.n_total}")
    return 0


def cmd_spectral(args) -> int:
    image = load_image(args.image)
    schedule = linear_beta_schedule(args.timesteps)
    spectrum = radial_power_spectrum(image, n_bands=args.bands)
    h, w = image.shape[:2]
    if args.noise == "analytic":
        noise = expected_noise_spectrum(h, w, n_bands=args.bands)
    else:
        noise = sampled_noise_spectrum(h, w, n_bands=args.bands)
    profile = corruption_profile(spectrum, schedule, noise)
    if args.csv:
        Path(args.csv).write_text(profile_to_csv(profile))
    if args.summary:
        Path(args.summary).write_text(profile_summary_json(profile))
    print(render_heat_table(profile), end="")
    return 0


def cmd_train(args) -> int:
    from ..toy import ToyTrainConfig, make_two_shape_dataset, train_toy_denoiser

    if args.dataset.startswith("builtin:two_shapes"):
        parts = args.dataset.split(":")
        n = int(parts[2]) if len(parts) > 2 else 256
        data = make_two_shape_dataset(n, size=args.size, seed=args.seed)
    else:
        paths = sorted(Path(args.dataset).glob("*.png"))
        if not paths:
            print(f"diffpaint: error: no PNGs found in {args.dataset}", file=sys.stderr)
            return 1
        data = np.stack([load_image(p) for p in paths])
    schedule = linear_beta_schedule(args.timesteps)
    config = ToyTrainConfig(
        epochs=args.epochs, batch_size=args.batch_size, lr=args.lr, seed=args.seed
    )
    denoiser = train_toy_denoiser(data, schedule, config)
    denoiser.save(args.out)
    tail = denoiser.loss_history[-20:]
    print(f"trained on {len(data)} images; final loss {sum(tail) / len(tail):.4f}")
    print(f"wrote {args.out}")
    return 0


def cmd_sample(args) -> int:
    schedule = linear_beta_schedule(args.timesteps)
    shape: tuple[int, ...] | None = None
    if args.shape:
        shape = tuple(int(v) for v in args.shape.lower().split("x"))
    denoiser = resolve_denoiser(args.denoiser, schedule, shape or (32, 32, 1))
    rng = GaussianNoiseSource(args.seed, 0)
    images = unconditional_sample(denoiser, schedule, rng, args.n, shape)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for i, img in enumerate(images):
        save_image(img, out_dir / f"sample{i}.png")
    print(f"wrote {args.n} samples to {out_dir}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .app import create_app
    from .jobs import JobManager, JobStore

    store_dir = args.store or os.environ.get("DIFFPAINT_STORE", "./diffpaint-store")
    addr = os.environ.get("DIFFPAINT_ADDR", "127.0.0.1:8000")
    env_host, _, env_port = addr.partition(":")
    host = args.host or env_host or "127.0.0.1"
    port = args.port or int(env_port or 8000)

    manager = JobManager(
        JobStore(store_dir), max_workers=args.workers, default_denoiser=args.denoiser
    )
    frontend = args.frontend or os.environ.get("DIFFPAINT_FRONTEND")
    app = create_app(manager, frontend_dir=frontend)
    uvicorn.run(app, host=host, port=port, log_level="warning")
    return 0


COMMANDS = {
    "paint": cmd_paint,
    "opcount": cmd_opcount,
    "spectral": cmd_spectral,
    "train": cmd_train,
    "sample": cmd_sample,
    "serve": cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except SystemExit as exc:
        return int(exc.code or 0)
    except BrokenPipeError:
        return 0
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"diffpaint: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
