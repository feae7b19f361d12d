"""Command-line front end: experiment dispatch and CSV/JSON result emission.

Every output file starts with a metadata block holding the full run
configuration, so any result can be reproduced byte-identically by replaying
the recorded flags.  CSV bodies use a fixed column set and a fixed 12
significant digit float format; fields that do not apply to a run are left
empty.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from dataclasses import asdict, dataclass, fields

from . import __version__
from .entropy import DistanceKind, EntropyKind, shannon, tsallis
from .inequality import QuadrangleSettings
from .quantum import NoisyStateParams, NumericalCorruptionError
from .search import (
    CriticalVisibilityResult,
    MonotonicityError,
    OptimizerConfig,
    SweepRow,
    critical_visibility,
    metric_audit,
    minimize_violation,
    sweep_beta,
    sweep_q,
    triangle_counterexample,
)

OUTDIR_ENV = "ENTBELL_OUTDIR"

CSV_COLUMNS = (
    "q",
    "beta",
    "visibility",
    "metric",
    "entropy",
    "min_violation",
    "v_c",
    "restarts",
    "seed",
    "evals",
)

TSIRELSON_MIN = 2.0 - 2.0 * math.sqrt(2.0)


@dataclass(frozen=True)
class RunConfig:
    """Flat, fully defaulted record of one CLI invocation."""

    command: str = ""
    beta: float = 1.0
    visibility: float = 1.0
    metric: str = "d1"
    entropy: str = "shannon"
    q: float = 2.0
    q_min: float = 1.0
    q_max: float = 5.0
    q_step: float = 0.1
    mode: str = "vc"
    beta_grid: str = "0,0.25,0.5,0.75,1"
    trials: int = 100000
    samples: int = 10000
    v_precision: float = 1e-3
    seed: int = 0
    restarts: int = 200
    max_evals: int = 5000
    tol: float = 1e-8
    workers: int = 1
    output: str = ""

    def optimizer(self) -> OptimizerConfig:
        return OptimizerConfig(
            restarts=self.restarts,
            max_evals_per_restart=self.max_evals,
            objective_tolerance=self.tol,
            seed=self.seed,
            parallel_workers=self.workers,
        )

    def entropy_kind(self) -> EntropyKind:
        if self.entropy == "shannon":
            return shannon()
        if self.entropy == "tsallis":
            return tsallis(self.q)
        if self.entropy == "renyi":
            return EntropyKind("renyi", self.q)
        raise ValueError(f"unknown entropy {self.entropy!r}")

    def distance_kind(self) -> DistanceKind:
        return DistanceKind(self.metric)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return "%.12g" % value
    return str(value)


def _metadata_lines(config: RunConfig) -> list[str]:
    lines = [f"# entbell_version={__version__}"]
    for f in fields(config):
        lines.append(f"# {f.name}={_fmt(getattr(config, f.name))}")
    return lines


def _output_base(config: RunConfig) -> str:
    if config.output:
        return config.output
    outdir = os.environ.get(OUTDIR_ENV, ".")
    return os.path.join(outdir, config.command)


def _write_text(path: str, text: str) -> None:
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def write_csv(path: str, config: RunConfig, rows: list[SweepRow]) -> None:
    lines = _metadata_lines(config)
    lines.append(",".join(CSV_COLUMNS))
    for row in rows:
        lines.append(
            ",".join(
                _fmt(getattr(row, column)) for column in CSV_COLUMNS
            )
        )
    _write_text(path, "\n".join(lines) + "\n")


def write_json(path: str, config: RunConfig, result: dict) -> None:
    doc = {
        "metadata": {"entbell_version": __version__, **asdict(config)},
        "result": result,
    }
    _write_text(path, json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _settings_doc(settings: QuadrangleSettings) -> dict:
    doc = {}
    for name, s in zip(("a", "a_prime", "b", "b_prime"), settings.as_tuple()):
        doc[name] = {
            "pairs": [[p, q, phi, omega] for p, q, phi, omega in s.mz_params],
            "alphas": list(s.alphas),
        }
    return doc


def _vc_row(result: CriticalVisibilityResult, config: RunConfig) -> SweepRow:
    return SweepRow(
        q=result.q,
        beta=result.beta,
        visibility=None,
        metric=result.dkind.value,
        entropy=result.ekind.family,
        min_violation=None,
        v_c=result.v_c,
        restarts=config.restarts,
        seed=config.seed,
        evals=result.evals_used,
    )


def _cmd_violate(config: RunConfig) -> int:
    params = NoisyStateParams(beta=config.beta, visibility=config.visibility)
    res = minimize_violation(
        params, config.distance_kind(), config.entropy_kind(), config.optimizer()
    )
    rep = res.best_report
    print(f"metric={config.metric} entropy={config.entropy_kind().label()} "
          f"beta={_fmt(config.beta)} visibility={_fmt(config.visibility)}")
    print(f"d(A,B)   = {_fmt(rep.d_ab)}")
    print(f"d(B,A')  = {_fmt(rep.d_ba_prime)}")
    print(f"d(A',B') = {_fmt(rep.d_a_prime_b_prime)}")
    print(f"d(A,B')  = {_fmt(rep.d_ab_prime)}")
    print(f"L = {_fmt(rep.lhs)}  R = {_fmt(rep.rhs)}")
    print(f"min violation (R - L) = {_fmt(res.best_violation)}")
    print(f"violated = {res.violated}  evals = {res.evals_used}")
    write_json(
        _output_base(config) + ".json",
        config,
        {
            "violation": res.best_violation,
            "lhs": rep.lhs,
            "rhs": rep.rhs,
            "distances": {
                "d_ab": rep.d_ab,
                "d_ba_prime": rep.d_ba_prime,
                "d_a_prime_b_prime": rep.d_a_prime_b_prime,
                "d_ab_prime": rep.d_ab_prime,
            },
            "violated": res.violated,
            "evals_used": res.evals_used,
            "restart_index_of_best": res.restart_index_of_best,
            "best_settings": _settings_doc(res.best_settings),
        },
    )
    return 0


def _cmd_vc(config: RunConfig) -> int:
    res = critical_visibility(
        config.beta,
        config.distance_kind(),
        config.entropy_kind(),
        config.optimizer(),
        v_precision=config.v_precision,
    )
    if res.v_c is None:
        print(f"no violation at visibility 1 (min violation "
              f"{_fmt(res.violation_at_v1)}); v_c undefined")
    else:
        print(f"v_c = {_fmt(res.v_c)} +- {_fmt(res.bracket_width)} "
              f"(bracket [{_fmt(res.v_lo)}, {_fmt(res.v_hi)}])")
        print(f"violation at v1 = {_fmt(res.violation_at_v1)}; "
              f"certificates: {_fmt(res.violation_at_lo)} at v_lo, "
              f"{_fmt(res.violation_at_hi)} at v_hi")
    print(f"evals = {res.evals_used}")
    base = _output_base(config)
    write_csv(base + ".csv", config, [_vc_row(res, config)])
    write_json(
        base + ".json",
        config,
        {
            "v_c": res.v_c,
            "bracket_width": res.bracket_width,
            "v_lo": res.v_lo,
            "v_hi": res.v_hi,
            "violated_at_v1": res.violated_at_v1,
            "violation_at_v1": res.violation_at_v1,
            "violation_at_lo": res.violation_at_lo,
            "violation_at_hi": res.violation_at_hi,
            "grid": [list(point) for point in res.grid],
            "evals_used": res.evals_used,
            "best_settings": None
            if res.best_settings is None
            else _settings_doc(res.best_settings),
        },
    )
    return 0


def _q_grid(config: RunConfig) -> list[float]:
    if config.q_step <= 0.0:
        raise ValueError("q-step must be > 0")
    count = int(round((config.q_max - config.q_min) / config.q_step)) + 1
    grid = [round(config.q_min + k * config.q_step, 10) for k in range(count)]
    return [q for q in grid if q <= config.q_max + 1e-9]


def _cmd_sweep_q(config: RunConfig) -> int:
    rows = sweep_q(
        config.beta,
        config.distance_kind(),
        _q_grid(config),
        config.mode,
        config.optimizer(),
        visibility=config.visibility,
        v_precision=config.v_precision,
    )
    for row in rows:
        quantity = (
            f"min_violation={_fmt(row.min_violation)}"
            if config.mode == "fixed-v"
            else f"v_c={_fmt(row.v_c)}"
        )
        print(f"q={_fmt(row.q)} {quantity}")
    write_csv(_output_base(config) + ".csv", config, rows)
    return 0


def _cmd_sweep_beta(config: RunConfig) -> int:
    grid = [float(b) for b in config.beta_grid.split(",") if b.strip() != ""]
    rows = sweep_beta(
        grid,
        config.distance_kind(),
        config.entropy_kind(),
        config.optimizer(),
        mode=config.mode,
        visibility=config.visibility,
        v_precision=config.v_precision,
    )
    for row in rows:
        quantity = (
            f"min_violation={_fmt(row.min_violation)}"
            if config.mode == "fixed-v"
            else f"v_c={_fmt(row.v_c)}"
        )
        print(f"beta={_fmt(row.beta)} {quantity}")
    write_csv(_output_base(config) + ".csv", config, rows)
    return 0


def _cmd_chsh_sanity(config: RunConfig) -> int:
    params = NoisyStateParams(beta=1.0, visibility=1.0, dim=2)
    started = time.perf_counter()
    res = minimize_violation(
        params, DistanceKind.COVARIANCE, shannon(), config.optimizer()
    )
    elapsed = time.perf_counter() - started
    gap = abs(res.best_violation - TSIRELSON_MIN)
    print(f"min violation = {_fmt(res.best_violation)}")
    print(f"|min - (2 - 2*sqrt(2))| = {_fmt(gap)}")
    print(f"evals = {res.evals_used}  elapsed_s = {elapsed:.3f}")
    write_json(
        _output_base(config) + ".json",
        config,
        {
            "min_violation": res.best_violation,
            "tsirelson_min": TSIRELSON_MIN,
            "gap": gap,
            "evals_used": res.evals_used,
            "best_settings": _settings_doc(res.best_settings),
        },
    )
    return 0


def _cmd_renyi_check(config: RunConfig) -> int:
    kind = config.entropy_kind()
    found = triangle_counterexample(kind, config.trials, config.seed)
    if found is None:
        print(f"none found ({config.trials} trials, {kind.label()})")
        result = {"found": False, "trials": config.trials}
    else:
        print(f"counterexample at trial {found.trial_index} ({kind.label()}):")
        print(f"d(X,Y) = {_fmt(found.d_xy)}")
        print(f"d(Y,Z) = {_fmt(found.d_yz)}")
        print(f"d(X,Z) = {_fmt(found.d_xz)}  slack = {_fmt(found.slack)}")
        print("p(x,y,z) =")
        for layer in found.distribution:
            for line in layer:
                print("  " + " ".join(_fmt(v) for v in line))
        result = {
            "found": True,
            "trial_index": found.trial_index,
            "d_xy": found.d_xy,
            "d_yz": found.d_yz,
            "d_xz": found.d_xz,
            "slack": found.slack,
            "distribution": found.distribution.tolist(),
        }
    write_json(_output_base(config) + ".json", config, result)
    return 0


def _cmd_metric_audit(config: RunConfig) -> int:
    rows = metric_audit(config.samples, config.seed)
    print(f"{'metric':8} {'entropy':16} {'worst_slack':>14} {'min_dist':>14} "
          f"{'sym_defect':>12}")
    doc = []
    for row in rows:
        print(
            f"{row.dkind.value:8} {row.ekind.label():16} "
            f"{row.worst_triangle_slack:14.6e} {row.min_distance:14.6e} "
            f"{row.worst_symmetry_defect:12.3e}"
        )
        doc.append(
            {
                "metric": row.dkind.value,
                "entropy": row.ekind.family,
                "q": row.ekind.q,
                "samples": row.samples,
                "worst_triangle_slack": row.worst_triangle_slack,
                "min_distance": row.min_distance,
                "worst_symmetry_defect": row.worst_symmetry_defect,
            }
        )
    write_json(_output_base(config) + ".json", config, {"rows": doc})
    return 0


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=RunConfig.seed)
    parser.add_argument("--restarts", type=int, default=RunConfig.restarts)
    parser.add_argument("--max-evals", type=int, default=RunConfig.max_evals,
                        dest="max_evals")
    parser.add_argument("--tol", type=float, default=RunConfig.tol)
    parser.add_argument("--workers", type=int, default=RunConfig.workers)
    parser.add_argument("--output", type=str, default=RunConfig.output,
                        help="output base path (extension appended per format)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="entbell",
        description="Entropic quadrangle Bell tests for noisy qutrit pairs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("violate", help="minimize the violation at fixed state")
    p.add_argument("--beta", type=float, default=RunConfig.beta)
    p.add_argument("--visibility", type=float, default=RunConfig.visibility)
    p.add_argument("--metric", choices=["d1", "d1n", "d2", "d2n"], default="d1")
    p.add_argument("--entropy", choices=["shannon", "tsallis"], default="shannon")
    p.add_argument("--q", type=float, default=RunConfig.q)
    _add_common(p)

    p = sub.add_parser("vc", help="critical visibility by bisection")
    p.add_argument("--beta", type=float, default=RunConfig.beta)
    p.add_argument("--metric", choices=["d1", "d1n", "d2", "d2n"], default="d1")
    p.add_argument("--entropy", choices=["shannon", "tsallis"], default="shannon")
    p.add_argument("--q", type=float, default=RunConfig.q)
    p.add_argument("--v-precision", type=float, default=RunConfig.v_precision,
                   dest="v_precision")
    _add_common(p)

    p = sub.add_parser("sweep-q", help="sweep the Tsallis parameter")
    p.add_argument("--beta", type=float, default=RunConfig.beta)
    p.add_argument("--metric", choices=["d1", "d1n", "d2", "d2n"], default="d1")
    p.add_argument("--q-min", type=float, default=RunConfig.q_min, dest="q_min")
    p.add_argument("--q-max", type=float, default=RunConfig.q_max, dest="q_max")
    p.add_argument("--q-step", type=float, default=RunConfig.q_step, dest="q_step")
    p.add_argument("--mode", choices=["fixed-v", "vc"], default="vc")
    p.add_argument("--visibility", type=float, default=RunConfig.visibility)
    p.add_argument("--v-precision", type=float, default=RunConfig.v_precision,
                   dest="v_precision")
    _add_common(p)

    p = sub.add_parser("sweep-beta", help="sweep the pure-state weight")
    p.add_argument("--beta-grid", type=str, default=RunConfig.beta_grid,
                   dest="beta_grid")
    p.add_argument("--metric", choices=["d1", "d1n", "d2", "d2n"], default="d1")
    p.add_argument("--entropy", choices=["shannon", "tsallis"], default="shannon")
    p.add_argument("--q", type=float, default=RunConfig.q)
    p.add_argument("--mode", choices=["fixed-v", "vc"], default="fixed-v")
    p.add_argument("--visibility", type=float, default=RunConfig.visibility)
    p.add_argument("--v-precision", type=float, default=RunConfig.v_precision,
                   dest="v_precision")
    _add_common(p)

    p = sub.add_parser("chsh-sanity", help="qubit covariance-distance anchor run")
    _add_common(p)
    p.set_defaults(restarts=50)

    p = sub.add_parser("renyi-check", help="triangle-inequality counterexample search")
    p.add_argument("--q", type=float, default=RunConfig.q)
    p.add_argument("--trials", type=int, default=RunConfig.trials)
    p.add_argument("--entropy", choices=["renyi", "tsallis"], default="renyi")
    _add_common(p)

    p = sub.add_parser("metric-audit", help="empirical metric-axiom audit")
    p.add_argument("--samples", type=int, default=RunConfig.samples)
    _add_common(p)

    return parser


_HANDLERS = {
    "violate": _cmd_violate,
    "vc": _cmd_vc,
    "sweep-q": _cmd_sweep_q,
    "sweep-beta": _cmd_sweep_beta,
    "chsh-sanity": _cmd_chsh_sanity,
    "renyi-check": _cmd_renyi_check,
    "metric-audit": _cmd_metric_audit,
}


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    values = {f.name: getattr(args, f.name) for f in fields(RunConfig)
              if hasattr(args, f.name)}
    return RunConfig(**values)


def run_command(argv: "list[str] | None" = None) -> int:
    """Parse ``argv`` and execute one command.

    Returns 0 on success, 2 on argument errors and 3 on numerical-corruption
    or monotonicity failures.
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        config = _config_from_args(args)
        return _HANDLERS[args.command](config)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (NumericalCorruptionError, MonotonicityError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3


def main() -> None:
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
