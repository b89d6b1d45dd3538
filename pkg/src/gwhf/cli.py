"""Command line: ``gwhf <subcommand>``.

Exit status 0 on success, 2 for configuration errors, 3 for numerical
failures (unresolved zeros, unconverged quadrature, contour defects).
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import subprocess
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .chaos import (chaos_coefficients, hyperuniformity_verdict, integral_g, q22_variance,
                    two_point_chaos_density, _kernel_ab, _check_kernel)
from .experiments import EnsembleSpec, run_zero_ensemble
from .kernels import covariance_matrix, kernel_from_spec, validate_assumptions
from .polynomials import rational_to_str
from .report import csv_with_header, svg_from_summary_csv
from .sampler import (Grid, MeanSpec, QuadratureError, Signal, TruncationError, evaluate_gwhf,
                      required_truncation, sample_gef, stft_window)
from .statistics import fit_growth_exponent, summarize, summary_to_csv
from .zeros import ContourError, Disk, ZeroFindingError, classify_critical_points, find_zeros

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


class ConfigError(ValueError):
    pass


class NumericalFailure(RuntimeError):
    pass


def version_string() -> str:
    try:
        out = subprocess.run(["git", "describe", "--always", "--tags"], capture_output=True, text=True,
                             cwd=Path(__file__).resolve().parent, timeout=5)
        if out.returncode == 0 and out.stdout.strip():
            return f"{__version__}+g{out.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return __version__


@dataclass
class ExperimentConfig:
    kernel: str = "gauss"
    mean: str = "none"
    radii: list[float] = field(default_factory=lambda: [float(r) for r in range(2, 13)])
    realizations: int = 100
    seed: int = 0
    step: float = 0.05
    modes: list[str] = field(default_factory=lambda: ["charged"])
    center_mean: bool = False
    r_min: float = 4.0
    r_max: float = 12.0
    window: str = "gauss"
    signal: str = "none"
    out: str = "gwhf_out"

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        data = json.loads(text)
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    def validate(self) -> None:
        if self.realizations < 2:
            raise ConfigError("realizations must be at least 2")
        if self.step <= 0:
            raise ConfigError("grid step must be positive")
        if not self.radii or any(r <= 0 for r in self.radii):
            raise ConfigError("radii must be positive")
        for m in self.modes:
            if m not in ("charged", "uncharged", "saddle", "max"):
                raise ConfigError(f"unknown mode {m!r}")


def _pure_order(spec: str) -> int:
    k = kernel_from_spec(spec)
    n = k.pure_order
    if n is None:
        raise ConfigError(f"kernel {spec!r} is not pure-type; only gauss and laguerre:n can be sampled")
    return n


def _meta(cfg: ExperimentConfig | dict, **extra) -> dict:
    conf = json.loads(cfg.to_json()) if isinstance(cfg, ExperimentConfig) else cfg
    return {"config": conf, "seed": conf.get("seed"), "version": version_string(), **extra}


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _run_counts(cfg: ExperimentConfig, n: int, mean: MeanSpec, modes: list[str]) -> dict:
    spec = EnsembleSpec(n, mean, tuple(sorted(cfg.radii)), cfg.realizations, cfg.seed, cfg.step,
                        tuple(modes))
    res = run_zero_ensemble(spec)
    if res.unresolved:
        raise NumericalFailure(f"{res.unresolved} unresolved zero cells")
    out = {}
    for m, table in res.tables.items():
        centre = None
        if cfg.center_mean and m == "charged" and mean.kind == "none":
            # known first intensity 1/pi for charged zeros
            centre = [r * r for r in table.radii]
        s = summarize(table, seed=cfg.seed, center_mean=centre)
        fit = None
        try:
            fit = fit_growth_exponent(s, cfg.r_min, cfg.r_max).to_dict()
        except ValueError as exc:
            fit = {"error": str(exc)}
        out[m] = (table, s, fit)
    out["_flagged"] = res.flagged
    out["_critical"] = res.critical_points
    return out


def _emit_varscan(cfg: ExperimentConfig, results: dict, prefix: str, title: str, extra: dict) -> dict:
    out = Path(cfg.out)
    summaries = [v for k, v in results.items() if not k.startswith("_")]
    body = "".join(summary_to_csv(s) if i == 0 else summary_to_csv(s).split("\n", 1)[1]
                   for i, (_, s, _) in enumerate(summaries))
    csv_text = csv_with_header(body, _meta(cfg, **extra))
    _write(out / f"{prefix}.csv", csv_text)
    counts_lines = ["realization,mode," + ",".join(f"R={r:g}" for r in sorted(cfg.radii))]
    for m, v in results.items():
        if m.startswith("_"):
            continue
        for i, row in enumerate(v[0].counts):
            counts_lines.append(f"{i},{m}," + ",".join(str(int(c)) for c in row))
    _write(out / f"{prefix}_counts.csv", csv_with_header("\n".join(counts_lines) + "\n", _meta(cfg, **extra)))
    _write(out / f"{prefix}.svg", svg_from_summary_csv(csv_text, title))
    summary = {"meta": _meta(cfg, **extra),
               "fits": {m: v[2] for m, v in results.items() if not m.startswith("_")},
               "centered": {m: v[1].centered for m, v in results.items() if not m.startswith("_")},
               "warnings": {m: list(v[1].warnings) for m, v in results.items() if not m.startswith("_")}}
    if "_flagged" in results and any(m in ("saddle", "max") for m in results):
        summary["hessian_flagged"] = results["_flagged"]
        summary["critical_points"] = results["_critical"]
    _write(out / f"{prefix}.json", json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return summary


def cmd_varscan(cfg: ExperimentConfig) -> dict:
    cfg.validate()
    n = _pure_order(cfg.kernel)
    mean = MeanSpec.parse(cfg.mean)
    results = _run_counts(cfg, n, mean, cfg.modes)
    return _emit_varscan(cfg, results, "varscan", f"{cfg.kernel}, mean {mean.tag}", {})


def cmd_spectrogram(cfg: ExperimentConfig) -> dict:
    cfg.validate()
    n = stft_window(cfg.window)
    mean = MeanSpec() if cfg.signal == "none" else MeanSpec.parse("signal:" + cfg.signal)
    modes = ["charged", "uncharged"] + (["max"] if n == 0 else [])
    results = _run_counts(cfg, n, mean, modes)
    return _emit_varscan(cfg, results, "spectrogram", f"STFT, {cfg.window} window, signal {cfg.signal}",
                         {"window": cfg.window})


def cmd_chaos(kernel: str, order: int, emit_g: bool, emit_table: bool, q22: float | None,
              q22_realizations: int, seed: int) -> dict:
    k = kernel_from_spec(kernel)
    try:
        _check_kernel(k)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if order != 2:
        raise ConfigError("only the second-order chaos density is implemented")
    a, b = _kernel_ab(k)
    d = two_point_chaos_density(k, order)
    verdict = hyperuniformity_verdict(k)
    report = {"kernel": k.spec, "a": rational_to_str(a), "b": rational_to_str(b),
              "integral_g": rational_to_str(integral_g(d)),
              "planar_integral": f"{rational_to_str(integral_g(d))}*pi",
              "verdict": verdict.to_dict(), "version": version_string()}
    if emit_table:
        report["c_table"] = chaos_coefficients(a, b, order).to_dict()["entries"]
    if emit_g:
        report["g"] = d.to_dict()
    if q22 is not None:
        report["q22"] = q22_variance(k.pure_order, q22, q22_realizations, seed).to_dict()
    return report


def cmd_sample(args) -> dict:
    n = _pure_order(args.kernel)
    grid = Grid.disk(args.radius, args.step)
    K = args.truncation or required_truncation(grid.max_radius)
    field_ = evaluate_gwhf(sample_gef(K, args.seed, args.index), n, MeanSpec.parse(args.mean), grid)
    text = field_.to_json()
    if args.out:
        _write(Path(args.out), text + "\n")
    else:
        sys.stdout.write(text + "\n")
    return {}


def cmd_zeros(args) -> str:
    n = _pure_order(args.kernel)
    grid = Grid.disk(args.radius + 2, args.step)
    K = required_truncation(grid.max_radius)
    mean = MeanSpec.parse(args.mean)
    field_ = evaluate_gwhf(sample_gef(K, args.seed, args.index), n, mean, grid, derivatives=False)
    window = Disk(0j, args.radius)
    if args.critical:
        if n != 0:
            raise ConfigError("--critical needs the gauss kernel")
        zs = classify_critical_points(field_, window)
    else:
        zs = find_zeros(field_, window)
    if zs.unresolved:
        raise NumericalFailure(f"{zs.unresolved} unresolved zero cells")
    meta = {"kernel": args.kernel, "mean": mean.tag, "seed": args.seed, "index": args.index,
            "step": args.step, "radius": args.radius, "dedup_radius": zs.dedup_radius,
            "version": version_string()}
    text = csv_with_header(zs.to_csv(), meta)
    if args.out:
        _write(Path(args.out), text)
    else:
        sys.stdout.write(text)
    return text


def cmd_validate_kernel(spec: str, radius: float, step: float) -> dict:
    k = kernel_from_spec(spec)
    rep = validate_assumptions(k, radius, step)
    cm = covariance_matrix(k)
    return {"kernel": k.spec, "laplacian_at_zero": rational_to_str(k.laplacian_at_zero),
            "covariance_diagonal": [rational_to_str(x) for x in cm.diagonal],
            "covariance_is_diagonal": cm.is_diagonal(),
            "normalization_ok": rep.normalization_ok, "strict_bound_margin": rep.strict_bound_margin,
            "decay_constants": list(rep.decay_constants),
            "positive_semidefinite_ok": rep.positive_semidefinite_ok,
            "min_gram_eigenvalue": rep.min_gram_eigenvalue, "ok": rep.ok, "notes": rep.notes}


def _config_from_args(args) -> ExperimentConfig:
    cfg = ExperimentConfig.from_json(Path(args.config).read_text()) if args.config else ExperimentConfig()
    for name in ("kernel", "mean", "realizations", "seed", "step", "out", "r_min", "r_max",
                 "window", "signal"):
        v = getattr(args, name, None)
        if v is not None:
            setattr(cfg, name, v)
    if getattr(args, "radii", None):
        cfg.radii = _parse_radii(args.radii)
    if getattr(args, "modes", None):
        cfg.modes = args.modes.split(",")
    if getattr(args, "center_mean", False):
        cfg.center_mean = True
    return cfg


def _parse_radii(text: str) -> list[float]:
    """``2:12:1`` (inclusive range) or ``2,3,5``."""
    if ":" in text:
        a, b, s = (float(x) for x in text.split(":"))
        return [float(x) for x in np.round(np.arange(a, b + s / 2, s), 10)]
    return [float(x) for x in text.split(",")]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gwhf", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sample", help="sample one field and write it as JSON")
    s.add_argument("--kernel", default="gauss")
    s.add_argument("--mean", default="none", help="none | constant:<c> | coherent:<w> | signal:<kind>[:A:t0:f:rate]")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--index", type=int, default=0)
    s.add_argument("--radius", type=float, default=4.0)
    s.add_argument("--step", type=float, default=0.05)
    s.add_argument("--truncation", type=int)
    s.add_argument("--out")

    z = sub.add_parser("zeros", help="zeros (or critical points) of one field as CSV")
    z.add_argument("--kernel", default="gauss")
    z.add_argument("--mean", default="none")
    z.add_argument("--seed", type=int, default=0)
    z.add_argument("--index", type=int, default=0)
    z.add_argument("--radius", type=float, default=6.0)
    z.add_argument("--step", type=float, default=0.05)
    z.add_argument("--critical", action="store_true", help="classify critical points of |F| instead")
    z.add_argument("--out")

    for name, helptext in (("varscan", "count statistics over an ensemble"),
                           ("spectrogram", "zeros and maxima of noisy STFT fields")):
        v = sub.add_parser(name, help=helptext)
        v.add_argument("--config", help="ExperimentConfig JSON; flags override it")
        v.add_argument("--realizations", type=int)
        v.add_argument("--seed", type=int)
        v.add_argument("--step", type=float)
        v.add_argument("--radii", help="start:stop:step or comma list")
        v.add_argument("--r-min", dest="r_min", type=float)
        v.add_argument("--r-max", dest="r_max", type=float)
        v.add_argument("--out", help="output directory")
        if name == "varscan":
            v.add_argument("--kernel")
            v.add_argument("--mean")
            v.add_argument("--modes", help="comma list of charged,uncharged,saddle,max")
            v.add_argument("--center-mean", dest="center_mean", action="store_true")
        else:
            v.add_argument("--window", choices=["gauss", "hermite1"])
            v.add_argument("--signal", help="none | <kind>[:A:t0:f:rate]")

    c = sub.add_parser("chaos", help="exact second-chaos report")
    c.add_argument("--kernel", default="laguerre:1")
    c.add_argument("--order", type=int, default=2)
    c.add_argument("--emit-g", action="store_true")
    c.add_argument("--emit-table", action="store_true")
    c.add_argument("--q22", type=float, metavar="R")
    c.add_argument("--q22-realizations", type=int, default=0)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--out")

    k = sub.add_parser("validate-kernel", help="check kernel assumptions numerically")
    k.add_argument("--kernel", required=True)
    k.add_argument("--radius", type=float, default=8.0)
    k.add_argument("--step", type=float, default=0.1)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "sample":
            cmd_sample(args)
        elif args.command == "zeros":
            cmd_zeros(args)
        elif args.command in ("varscan", "spectrogram"):
            cfg = _config_from_args(args)
            res = cmd_varscan(cfg) if args.command == "varscan" else cmd_spectrogram(cfg)
            print(json.dumps(res["fits"], indent=2, sort_keys=True))
        elif args.command == "chaos":
            rep = cmd_chaos(args.kernel, args.order, args.emit_g, args.emit_table, args.q22,
                            args.q22_realizations, args.seed)
            text = json.dumps(rep, indent=2, sort_keys=True) + "\n"
            if args.out:
                _write(Path(args.out), text)
            sys.stdout.write(text)
        elif args.command == "validate-kernel":
            print(json.dumps(cmd_validate_kernel(args.kernel, args.radius, args.step), indent=2))
    except (ConfigError, TruncationError, json.JSONDecodeError, FileNotFoundError) as exc:
        print(f"gwhf: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalFailure, QuadratureError, ZeroFindingError, ContourError) as exc:
        print(f"gwhf: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"gwhf: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return 0


if __name__ == "__main__":
    sys.exit(main())
