"""Command-line entry point.

Subcommands:
  optimize   one (architecture, N, K) instance over its deployments
  sweep-n    sweep antenna counts across architectures
  sweep-k    sweep device counts across architectures
  nearfield  sweep the deployment area and report near-field probabilities
  plotdata   re-aggregate existing result CSVs into per-group means

Exit codes: 0 success, 1 configuration error, 2 every instance failed in
the solver, 3 I/O error.  The environment variable MAWET_THREADS caps BLAS
parallelism (0 or unset leaves the library default).
"""

from __future__ import annotations

import argparse
import json
import os
import sys


class ConfigError(ValueError):
    pass


def _apply_thread_cap():
    cap = os.environ.get("MAWET_THREADS", "0")
    try:
        n = int(cap)
    except ValueError:
        raise ConfigError("MAWET_THREADS must be an integer, got "
                          "{!r}".format(cap))
    if n < 0:
        raise ConfigError("MAWET_THREADS must be >= 0")
    if n > 0:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                    "MKL_NUM_THREADS"):
            os.environ.setdefault(var, str(n))


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(
            "expected comma-separated integers, got {!r}".format(text))


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(
            "expected comma-separated numbers, got {!r}".format(text))


def _arch_list(text: str) -> tuple[str, ...]:
    return tuple(a.strip() for a in text.split(","))


def _add_common(p: argparse.ArgumentParser, seed_required: bool):
    p.add_argument("--config", help="flat JSON config file")
    p.add_argument("--seed", type=int, required=seed_required)
    p.add_argument("--arch", type=_arch_list,
                   help="comma-separated subset of ima,uma,ula,ura")
    p.add_argument("--n", type=_int_list, help="antenna counts")
    p.add_argument("--k", type=_int_list, help="device counts")
    p.add_argument("--deployments", type=int)
    p.add_argument("--freq", type=float, help="carrier frequency in Hz")
    p.add_argument("--kappa", type=float)
    p.add_argument("--side-l", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--az", type=float)
    p.add_argument("--p-th", type=float)
    p.add_argument("--sdp-tol", type=float)
    p.add_argument("--rand-count", type=int)
    p.add_argument("--pso-particles", type=int)
    p.add_argument("--pso-iterations", type=int)
    p.add_argument("--out", help="output CSV path")


_FLAG_TO_FIELD = {
    "seed": "seed", "arch": "architecture", "n": "n_antennas",
    "k": "n_devices", "deployments": "n_deployments", "freq": "freq_hz",
    "kappa": "kappa", "side_l": "side_l", "delta": "delta", "az": "a_z",
    "p_th": "p_th", "sdp_tol": "sdp_tolerance",
    "rand_count": "randomization_count", "pso_particles": "pso_particles",
    "pso_iterations": "pso_iterations",
}


def load_config(path: str | None, overrides: dict):
    """Build an ExperimentConfig from an optional flat JSON file plus CLI
    overrides; unknown file keys are rejected."""
    from dataclasses import fields

    from .experiments import ExperimentConfig

    values: dict = {}
    if path is not None:
        try:
            with open(path, encoding="utf-8") as f:
                doc = json.load(f)
        except OSError as exc:
            raise ConfigError("cannot read config {}: {}".format(path, exc))
        except json.JSONDecodeError as exc:
            raise ConfigError("invalid JSON in {}: {}".format(path, exc))
        if not isinstance(doc, dict):
            raise ConfigError("config file must hold a flat object")
        known = {f.name for f in fields(ExperimentConfig)}
        for key, val in doc.items():
            if key not in known:
                raise ConfigError("unknown config key {!r}".format(key))
            values[key] = val
    values.update(overrides)
    try:
        return ExperimentConfig(**values)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc))


def _overrides_from(args: argparse.Namespace) -> dict:
    out = {}
    for flag, fname in _FLAG_TO_FIELD.items():
        val = getattr(args, flag, None)
        if val is not None:
            out[fname] = val
    return out


def _finish(records, config, args) -> int:
    from .experiments import mean_power, write_results

    if all(not r.succeeded for r in records):
        for r in records:
            print("failed: {} N={} K={} deployment={}: {}".format(
                r.architecture, r.n_antennas, r.n_devices,
                r.deployment_index, r.error), file=sys.stderr)
        return 2
    if args.out:
        try:
            write_results(records, args.out, config)
        except OSError as exc:
            print(str(exc), file=sys.stderr)
            return 3
    for arch in config.architecture:
        for n in config.n_antennas:
            for k in config.n_devices:
                m = mean_power(records, architecture=arch, n_antennas=n,
                               n_devices=k)
                print("{} N={} K={}: mean p_T = {:.6g} W".format(
                    arch, n, k, m))
    return 0


def _run_sweep(args) -> int:
    from .experiments import sweep

    config = load_config(args.config, _overrides_from(args))
    records = sweep(config)
    return _finish(records, config, args)


def cmd_optimize(args) -> int:
    return _run_sweep(args)


def cmd_sweep_n(args) -> int:
    if args.n is None and args.config is None:
        args.n = (4, 9, 16)
    if args.arch is None and args.config is None:
        args.arch = ("ima", "uma", "ula", "ura")
    return _run_sweep(args)


def cmd_sweep_k(args) -> int:
    if args.k is None and args.config is None:
        args.k = (1, 2, 3)
    if args.arch is None and args.config is None:
        args.arch = ("ima", "uma", "ula", "ura")
    return _run_sweep(args)


def cmd_nearfield(args) -> int:
    from .experiments import nearfield_probability, sweep

    base = load_config(args.config, _overrides_from(args))
    records = []
    config = base
    for side in args.area:
        from dataclasses import replace
        config = replace(base, a_x=float(side), a_y=float(side))
        records.extend(sweep(config))
    rc = _finish(records, config, args)
    if rc != 0:
        return rc
    for row in nearfield_probability(records):
        print("{architecture} N={n_antennas} a_x={a_x}: "
              "P(near-field) = {probability:.4f}".format(**row))
    return 0


def cmd_plotdata(args) -> int:
    from .experiments import read_results

    import numpy as np

    rows = []
    for path in args.inputs:
        try:
            rows.extend(read_results(path))
        except OSError as exc:
            print("cannot read {}: {}".format(path, exc), file=sys.stderr)
            return 3
        except ValueError as exc:
            print(str(exc), file=sys.stderr)
            return 1
    groups: dict[tuple, list] = {}
    for row in rows:
        groups.setdefault((row["arch"], row["N"], row["K"], row["ax"]),
                          []).append(row)
    lines = ["arch,N,K,ax,mean_p_T_watts,std_p_T_watts,mean_nf_fraction"]
    for (arch, n, k, ax), grp in sorted(groups.items()):
        p = np.array([g["p_T_watts"] for g in grp])
        p = p[np.isfinite(p)]
        nf = np.array([g["nf_fraction"] for g in grp])
        lines.append("{},{},{},{:.17g},{:.17g},{:.17g},{:.17g}".format(
            arch, n, k, ax,
            p.mean() if p.size else float("nan"),
            p.std() if p.size else float("nan"), nf.mean()))
    text = "\n".join(lines) + "\n"
    if args.out:
        try:
            with open(args.out, "w", encoding="utf-8", newline="\n") as f:
                f.write(text)
        except OSError as exc:
            print(str(exc), file=sys.stderr)
            return 3
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mawet",
        description="Transmit-power experiments for movable-antenna "
                    "wireless energy transfer")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("optimize", help="run one configuration")
    _add_common(p, seed_required=False)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("sweep-n", help="sweep antenna counts")
    _add_common(p, seed_required=True)
    p.set_defaults(func=cmd_sweep_n)

    p = sub.add_parser("sweep-k", help="sweep device counts")
    _add_common(p, seed_required=True)
    p.set_defaults(func=cmd_sweep_k)

    p = sub.add_parser("nearfield", help="sweep the deployment area")
    _add_common(p, seed_required=True)
    p.add_argument("--area", type=_float_list, default=(2.0, 8.0, 16.0),
                   help="comma-separated a_x = a_y values in meters")
    p.set_defaults(func=cmd_nearfield)

    p = sub.add_parser("plotdata", help="aggregate result CSVs")
    p.add_argument("--in", dest="inputs", nargs="+", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_plotdata)

    return parser


def main(argv=None) -> int:
    try:
        _apply_thread_cap()
        args = build_parser().parse_args(argv)
        return args.func(args)
    except ConfigError as exc:
        print("config error: {}".format(exc), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
