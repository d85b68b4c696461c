"""Command-line interface: ``spd-bench`` with subcommands.

Subcommands: ``calibrate`` (print a noise scale), ``privatize`` (one matrix
from a text file), ``synthetic-bench`` and ``image-bench`` (experiment
harness with CSV/SVG output), ``descriptor`` (image to descriptor matrix).

Flags may also come from a config file of ``key = value`` lines passed with
``--config``; explicit command-line flags win over the file.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .descriptors import DescriptorParams, covariance_descriptor, load_pnm
from .errors import SpdPrivacyError
from .geometry import SpdMatrix
from .harness import (
    MECHANISMS,
    ExperimentSpec,
    emit_csv,
    render_csv,
    run_image,
    run_synthetic,
)
from .mechanisms import (
    PrivacyBudget,
    Sensitivity,
    SensitivityKind,
    calibrate_analytic,
    calibrate_classical,
    extrinsic_gaussian,
    riemannian_laplace,
    sensitivity_extrinsic,
    sensitivity_frechet_le,
    tangent_gaussian,
)
from .plotting import emit_plot
from .sampling import RngState


def _parse_float_list(text: str) -> tuple[float, ...]:
    return tuple(float(tok) for tok in text.split(",") if tok.strip())


def load_config(path: str | Path) -> dict[str, str]:
    """Parse a flat ``key = value`` config file; '#' starts a comment."""
    values: dict[str, str] = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SpdPrivacyError(f"config line without '=': {raw!r}")
        key, value = line.split("=", 1)
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def _apply_config(args: argparse.Namespace, argv_tokens: list[str]) -> None:
    """Fill args from the config file; explicit command-line flags win."""
    explicit = {
        tok[2:].split("=", 1)[0].replace("-", "_")
        for tok in argv_tokens
        if tok.startswith("--")
    }
    for key, value in load_config(args.config).items():
        if key == "config":
            continue
        if not hasattr(args, key):
            raise SpdPrivacyError(f"unknown config key {key!r}")
        if key in explicit:
            continue
        current = getattr(args, key)
        if isinstance(current, bool):
            setattr(args, key, value.lower() in ("1", "true", "yes", "on"))
        elif isinstance(current, int):
            setattr(args, key, int(value))
        elif isinstance(current, float):
            setattr(args, key, float(value))
        else:
            setattr(args, key, value)


def read_matrix(path: str | Path) -> np.ndarray:
    """Read a k x k matrix: k lines of k comma- or whitespace-separated
    decimals."""
    rows = []
    for raw in Path(path).read_text().splitlines():
        line = raw.replace(",", " ").strip()
        if not line:
            continue
        rows.append([float(tok) for tok in line.split()])
    if not rows:
        raise SpdPrivacyError(f"no matrix data in {path}")
    return np.array(rows, dtype=float)


def format_matrix(mat: np.ndarray) -> str:
    return "\n".join(" ".join(repr(float(v)) for v in row) for row in mat)


def _cmd_calibrate(args: argparse.Namespace) -> int:
    budget = PrivacyBudget(epsilon=args.eps, delta=args.delta)
    sens = Sensitivity(value=args.sensitivity, kind=SensitivityKind.LOG_EUCLIDEAN)
    if args.flavor == "classical":
        sigma = calibrate_classical(sens, budget)
    else:
        sigma = calibrate_analytic(sens, budget)
    print(f"{sigma:.12g}")
    return 0


def _cmd_privatize(args: argparse.Namespace) -> int:
    summary = SpdMatrix(read_matrix(args.matrix))
    radius = args.r
    if args.mechanism == "extrinsic_analytic":
        sens = sensitivity_extrinsic(args.n, radius)
    else:
        sens = sensitivity_frechet_le(args.n, radius)
    budget = PrivacyBudget(epsilon=args.eps, delta=args.delta)
    rng = RngState(args.seed)
    if args.mechanism == "tangent_classical":
        out = tangent_gaussian(rng, summary, calibrate_classical(sens, budget))
        mat = out.entries
    elif args.mechanism == "tangent_analytic":
        out = tangent_gaussian(rng, summary, calibrate_analytic(sens, budget))
        mat = out.entries
    elif args.mechanism == "extrinsic_analytic":
        out = extrinsic_gaussian(rng, summary, calibrate_analytic(sens, budget))
        mat = out.entries
    else:
        draw = riemannian_laplace(
            rng, summary, sens.value / args.eps, burn_in=args.burn_in
        )
        if draw.warning:
            print(f"warning: {draw.warning}", file=sys.stderr)
        mat = draw.sample.entries
    print(format_matrix(mat))
    return 0


def _spec_from_args(args: argparse.Namespace, kind: str) -> ExperimentSpec:
    return ExperimentSpec(
        kind=kind,
        mechanism=args.mechanism,
        epsilon_grid=_parse_float_list(args.eps),
        delta_grid=_parse_float_list(args.delta),
        n=args.n,
        r=args.r,
        k=args.k,
        trials=args.trials,
        seed=args.seed,
        burn_in=args.burn_in,
        image_dir=getattr(args, "images", None),
        eta=getattr(args, "eta", 1e-6),
        resample_data=getattr(args, "resample_data", False),
        measured_radius=getattr(args, "measured_radius", False),
        record_timing=getattr(args, "timing", False),
    )


def _emit(records, args) -> None:
    if args.out_csv:
        emit_csv(records, args.out_csv)
    if args.out_plot:
        emit_plot(records, args.out_plot)
    if not args.out_csv and not args.out_plot:
        sys.stdout.write(render_csv(records))


def _cmd_synthetic(args: argparse.Namespace) -> int:
    spec = _spec_from_args(args, "synthetic")
    _emit(run_synthetic(spec, threads=args.threads), args)
    return 0


def _cmd_image(args: argparse.Namespace) -> int:
    spec = _spec_from_args(args, "image")
    _emit(run_image(spec, threads=args.threads), args)
    return 0


def _cmd_descriptor(args: argparse.Namespace) -> int:
    image = load_pnm(args.image)
    descriptor = covariance_descriptor(image, DescriptorParams(eta=args.eta))
    print(format_matrix(descriptor.entries))
    return 0


def _add_budget_flags(sub: argparse.ArgumentParser, grid: bool) -> None:
    if grid:
        sub.add_argument("--eps", default="0.1", help="comma-separated epsilon grid")
        sub.add_argument("--delta", default="1e-6", help="comma-separated delta grid")
    else:
        sub.add_argument("--eps", type=float, required=True)
        sub.add_argument("--delta", type=float, required=True)


def _add_bench_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--mechanism", choices=MECHANISMS, default="tangent_analytic")
    sub.add_argument("--trials", type=int, default=10)
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--n", type=int, default=500)
    sub.add_argument("--r", type=float, default=0.25)
    sub.add_argument("--k", type=int, default=2)
    sub.add_argument("--burn-in", type=int, default=50000, dest="burn_in")
    sub.add_argument("--threads", type=int, default=1)
    sub.add_argument("--out-csv", default=None, dest="out_csv")
    sub.add_argument("--out-plot", default=None, dest="out_plot")
    sub.add_argument("--timing", action="store_true", help="record real wall times")
    sub.add_argument("--config", default=None, help="key = value defaults file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spd-bench",
        description="Differentially private Fréchet means on SPD matrices.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    cal = subs.add_parser("calibrate", help="print the calibrated noise scale")
    cal.add_argument("--sensitivity", type=float, required=True)
    _add_budget_flags(cal, grid=False)
    cal.add_argument("--flavor", choices=("classical", "analytic"), required=True)
    cal.set_defaults(func=_cmd_calibrate)

    priv = subs.add_parser("privatize", help="privatize one matrix from a file")
    priv.add_argument("--matrix", required=True, help="text file, one row per line")
    priv.add_argument("--mechanism", choices=MECHANISMS, default="tangent_analytic")
    _add_budget_flags(priv, grid=False)
    priv.add_argument("--n", type=int, required=True, help="dataset size behind the summary")
    priv.add_argument("--r", type=float, required=True, help="geodesic ball radius of the data")
    priv.add_argument("--seed", type=int, default=0)
    priv.add_argument("--burn-in", type=int, default=50000, dest="burn_in")
    priv.set_defaults(func=_cmd_privatize)

    syn = subs.add_parser("synthetic-bench", help="synthetic-data experiment grid")
    _add_budget_flags(syn, grid=True)
    _add_bench_flags(syn)
    syn.add_argument("--resample-data", action="store_true", dest="resample_data")
    syn.add_argument("--measured-radius", action="store_true", dest="measured_radius")
    syn.set_defaults(func=_cmd_synthetic)

    img = subs.add_parser("image-bench", help="covariance-descriptor experiment grid")
    _add_budget_flags(img, grid=True)
    _add_bench_flags(img)
    img.add_argument("--images", required=True, help="directory of PGM/PPM files")
    img.add_argument("--eta", type=float, default=1e-6)
    img.set_defaults(func=_cmd_image)

    desc = subs.add_parser("descriptor", help="print an image's covariance descriptor")
    desc.add_argument("--image", required=True)
    desc.add_argument("--eta", type=float, default=1e-6)
    desc.set_defaults(func=_cmd_descriptor)

    return parser


def main(argv: list[str] | None = None) -> int:
    tokens = list(sys.argv[1:]) if argv is None else list(argv)
    parser = build_parser()
    args = parser.parse_args(tokens)
    try:
        if getattr(args, "config", None) is not None:
            _apply_config(args, tokens)
        return args.func(args)
    except SpdPrivacyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
