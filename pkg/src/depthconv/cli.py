"""Command-line interface.

Subcommands:

* convert   one depth image -> one grayscale image
* batch     convert every record of an association file
* evaluate  ATE / RPE between two trajectory files
* synth     render an analytic depth image (plane or sphere)

The sensor model is always read from a key = value config file (see
fileio.read_model_config); conversion methods are named ``ba:<direction>``
or ``flexion:<n|angle|normalized>``.
"""

import argparse
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import fileio, trajectory
from .bearing import BaDirection, ba_image
from .errors import DepthConvError, MetricError
from .filtering import median_filter
from .flexion import FlexionVariant, flexion_image
from .geometry import depth_to_point_grid
from .synth import render_plane, render_sphere

EXIT_FAILURE = 1
EXIT_USAGE = 2


class _UsageError(Exception):
    """Bad invocation or configuration; maps to exit status 2."""


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BrokenPipeError:
        return EXIT_FAILURE


def build_parser():
    parser = argparse.ArgumentParser(
        prog="depthconv",
        description="Convert depth images to bearing-angle / flexion grayscale "
                    "images and evaluate trajectories.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("convert", help="convert a single depth image")
    p.add_argument("--input", required=True, help="depth image (16-bit PNG, or ASCII .txt dump)")
    p.add_argument("--model", required=True, help="sensor model config file")
    p.add_argument("--method", required=True,
                   help="ba:<horizontal|vertical|diagonal|antidiagonal> or "
                        "flexion:<odd n|angle|normalized>")
    p.add_argument("--output", required=True, help="output image (.png or .pgm)")
    _add_pipeline_flags(p)
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("batch", help="convert every record of an association file")
    p.add_argument("--association", required=True, help="association file")
    p.add_argument("--model", required=True, help="sensor model config file")
    p.add_argument("--method", required=True, help="conversion method (see convert)")
    p.add_argument("--out-dir", required=True, help="output directory")
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                   help="worker threads (default: available parallelism)")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--strict", dest="strict", action="store_true", default=True,
                      help="exit nonzero if any frame fails (default)")
    mode.add_argument("--lenient", dest="strict", action="store_false",
                      help="log per-frame failures but exit 0")
    _add_pipeline_flags(p)
    p.set_defaults(func=cmd_batch)

    p = sub.add_parser("evaluate", help="score an estimated trajectory against ground truth")
    p.add_argument("--est", required=True, help="estimated trajectory file")
    p.add_argument("--gt", required=True, help="ground-truth trajectory file")
    p.add_argument("--metric", required=True, choices=["ate", "rpe"])
    p.add_argument("--max-dt", type=float, default=0.02,
                   help="association tolerance in seconds (default 0.02)")
    p.add_argument("--delta", type=int, default=1,
                   help="RPE step in frames (default 1)")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("synth", help="render an analytic depth image")
    p.add_argument("--model", required=True, help="sensor model config file")
    p.add_argument("--plane", metavar="NX,NY,NZ,OFFSET",
                   help="plane normal and offset in meters")
    p.add_argument("--sphere", metavar="CX,CY,CZ,RADIUS",
                   help="sphere center and radius in meters")
    p.add_argument("--noise-sigma", type=float, default=0.0,
                   help="additive Gaussian depth noise (meters)")
    p.add_argument("--seed", type=int, default=0, help="noise seed")
    p.add_argument("--depth-scale", type=float, default=None,
                   help="override the model config's 16-bit codes per meter")
    p.add_argument("--output", required=True, help="output 16-bit depth PNG")
    p.set_defaults(func=cmd_synth)

    return parser


def _add_pipeline_flags(p):
    p.add_argument("--filter-window", default="3", metavar="W[xH]",
                   help="median pre-filter window, e.g. 3 or 3x5; 1 disables (default 3)")
    p.add_argument("--depth-scale", type=float, default=None,
                   help="override the model config's 16-bit codes per meter")
    p.add_argument("--bits", type=int, default=8, help="output color depth (default 8)")
    p.add_argument("--full-range", action="store_true",
                   help="map flexion values from [-1, 1] instead of clamping negatives")
    p.add_argument("--txt-interpretation", choices=["ray", "z"], default="ray",
                   help="meaning of ASCII depth dumps: distance along the ray "
                        "(default) or orthographic Z")


def _fail(message, code=EXIT_FAILURE):
    print(f"depthconv: error: {message}", file=sys.stderr)
    return code


def _load_model(path, scale_override=None):
    try:
        model, depth_scale = fileio.read_model_config(path)
    except FileNotFoundError:
        raise _UsageError(f"model config not found: {path}")
    except (DepthConvError, OSError) as exc:
        raise _UsageError(f"cannot load model config {path}: {exc}")
    if scale_override is not None:
        if scale_override <= 0:
            raise _UsageError(f"--depth-scale must be positive, got {scale_override}")
        depth_scale = scale_override
    return model, depth_scale


def _parse_method(spec):
    kind, _, arg = spec.partition(":")
    try:
        if kind == "ba" and arg:
            return "ba", BaDirection.parse(arg)
        if kind == "flexion" and arg:
            return "flexion", FlexionVariant.parse(arg)
    except (ValueError, DepthConvError) as exc:
        raise _UsageError(str(exc))
    raise _UsageError(f"unknown method {spec!r} (expected ba:<dir> or flexion:<n|variant>)")


def _parse_window(spec):
    try:
        if "x" in spec:
            w, h = (int(part) for part in spec.split("x", 1))
        else:
            w = h = int(spec)
    except ValueError:
        raise _UsageError(f"bad filter window {spec!r} (expected W or WxH)")
    return w, h


def _read_depth(path, model, depth_scale, args):
    if str(path).lower().endswith(".txt"):
        return fileio.read_depth_txt(path, model, interpretation=args.txt_interpretation)
    return fileio.read_depth_png(path, depth_scale=depth_scale, kind=model.kind)


def _convert_one(path, model, depth_scale, method, args):
    """Full pipeline for one frame; returns (GrayImage, stage timings)."""
    kind, detail = method
    window_w, window_h = _parse_window(args.filter_window)
    stages = {}
    t0 = time.perf_counter()
    img = _read_depth(path, model, depth_scale, args)
    stages["read"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    img = median_filter(img, window_w, window_h)
    stages["filter"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    grid = depth_to_point_grid(img, model)
    stages["grid"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    if kind == "ba":
        gray = ba_image(grid, detail, bits=args.bits)
    else:
        gray = flexion_image(grid, detail, bits=args.bits, full_range=args.full_range)
    stages["convert"] = time.perf_counter() - t0
    return gray, stages


def cmd_convert(args):
    try:
        model, depth_scale = _load_model(args.model, args.depth_scale)
        method = _parse_method(args.method)
    except _UsageError as exc:
        return _fail(str(exc), EXIT_USAGE)
    try:
        gray, stages = _convert_one(args.input, model, depth_scale, method, args)
        t0 = time.perf_counter()
        fileio.write_gray(gray, args.output)
        stages["write"] = time.perf_counter() - t0
    except _UsageError as exc:
        return _fail(str(exc), EXIT_USAGE)
    except FileNotFoundError as exc:
        return _fail(f"cannot read {exc.filename}")
    except (DepthConvError, OSError) as exc:
        return _fail(str(exc))
    total = sum(stages.values())
    parts = " ".join(f"{name}={dt * 1e3:.1f}ms" for name, dt in stages.items())
    print(f"timing {parts} total={total * 1e3:.1f}ms")
    return 0


def cmd_batch(args):
    try:
        model, depth_scale = _load_model(args.model, args.depth_scale)
        method = _parse_method(args.method)
        _parse_window(args.filter_window)
    except _UsageError as exc:
        return _fail(str(exc), EXIT_USAGE)
    try:
        records = fileio.read_association(args.association, lenient=not args.strict)
    except FileNotFoundError:
        return _fail(f"association file not found: {args.association}", EXIT_USAGE)
    except DepthConvError as exc:
        return _fail(str(exc), EXIT_USAGE)

    os.makedirs(args.out_dir, exist_ok=True)
    base = os.path.dirname(os.path.abspath(args.association))

    def work(record):
        src = os.path.join(base, record.depth_path)
        dst = os.path.join(args.out_dir, f"{record.raw_t}.png")
        gray, _ = _convert_one(src, model, depth_scale, method, args)
        fileio.write_gray(gray, dst)
        return dst

    started = time.perf_counter()
    failures = []
    threads = max(1, args.threads)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [(record, pool.submit(work, record)) for record in records]
        for record, future in futures:
            try:
                future.result()
            except (DepthConvError, OSError) as exc:
                failures.append((record, exc))
                print(f"depthconv: frame {record.raw_t}: {exc}", file=sys.stderr)
    elapsed = time.perf_counter() - started
    converted = len(records) - len(failures)
    print(f"converted={converted} failed={len(failures)} elapsed={elapsed:.2f}s")
    if failures and args.strict:
        return EXIT_FAILURE
    return 0


def cmd_evaluate(args):
    try:
        est = fileio.read_trajectory(args.est)
        gt = fileio.read_trajectory(args.gt)
    except FileNotFoundError as exc:
        return _fail(f"trajectory file not found: {exc.filename}", EXIT_USAGE)
    except DepthConvError as exc:
        return _fail(str(exc), EXIT_USAGE)
    try:
        if args.metric == "ate":
            stats = trajectory.ate_statistics(est, gt, max_dt=args.max_dt)
            key = "ate_rmse_m"
        else:
            stats = trajectory.rpe_statistics(est, gt, delta=args.delta, max_dt=args.max_dt)
            key = "rpe_mean_m"
    except (MetricError, ValueError) as exc:
        return _fail(f"no associations usable for {args.metric}: {exc}")
    print(f"{key}={stats['value']:.9f}")
    for name in ("rmse", "mean", "median", "p95", "max"):
        print(f"{args.metric}_{name}_m={stats[name]:.9f}")
    print(f"{args.metric}_pairs={stats['count']}")
    return 0


def _parse_floats(spec, count, what):
    parts = spec.split(",")
    if len(parts) != count:
        raise _UsageError(f"{what} needs {count} comma-separated numbers, got {spec!r}")
    try:
        return [float(p) for p in parts]
    except ValueError:
        raise _UsageError(f"bad {what} {spec!r}")


def cmd_synth(args):
    try:
        model, depth_scale = _load_model(args.model, args.depth_scale)
        if (args.plane is None) == (args.sphere is None):
            raise _UsageError("exactly one of --plane or --sphere is required")
        if args.plane:
            nx, ny, nz, offset = _parse_floats(args.plane, 4, "--plane")
            img = render_plane(model, np.array([nx, ny, nz]), offset,
                               noise_sigma=args.noise_sigma, seed=args.seed)
        else:
            cx, cy, cz, radius = _parse_floats(args.sphere, 4, "--sphere")
            img = render_sphere(model, np.array([cx, cy, cz]), radius,
                                noise_sigma=args.noise_sigma, seed=args.seed)
    except _UsageError as exc:
        return _fail(str(exc), EXIT_USAGE)
    except DepthConvError as exc:
        return _fail(str(exc))
    try:
        fileio.write_depth_png(img, args.output, depth_scale=depth_scale)
    except (DepthConvError, OSError) as exc:
        return _fail(str(exc))
    valid = int(img.valid.sum())
    print(f"wrote {args.output} ({img.width}x{img.height}, {valid} valid pixels)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
