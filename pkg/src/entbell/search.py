"""Seeded global search for quadrangle violations and critical visibilities.

The violation is minimized over all measurement phases (phi, omega) of the
four settings, with the diagonal output phases fixed to zero because they
provably never change outcome statistics.  Each restart of the multi-start
Nelder-Mead descent draws its start point from a random stream derived only
from (master seed, restart index), so results are bitwise reproducible and
independent of how restarts are scheduled across workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from .entropy import (
    ENTROPIC_DISTANCES,
    DistanceKind,
    EntropyKind,
    batch_entropic_distance,
    shannon,
    tsallis,
)
from .inequality import (
    VIOLATION_EPS,
    QuadrangleReport,
    QuadrangleSettings,
    evaluate_quadrangle,
)
from .linalg import PhaseSettings
from .quantum import NoisyStateParams, make_state

FRESH_SIMPLEX_STEP = 0.6
WARM_SIMPLEX_STEP = 0.05

_DIST_ID = {
    DistanceKind.D1: _kernels.DIST_D1,
    DistanceKind.D1_NORM: _kernels.DIST_D1N,
    DistanceKind.D2: _kernels.DIST_D2,
    DistanceKind.D2_NORM: _kernels.DIST_D2N,
    DistanceKind.COVARIANCE: _kernels.DIST_COV,
}

# Dirichlet concentrations cycled through when sampling random tripartite
# distributions: spread-out tables plus increasingly sparse ones, where
# triangle-inequality failures of non-metric distance candidates live.
TRIPARTITE_CONCENTRATIONS = (1.0, 0.5, 0.2, 0.1)


class MonotonicityError(RuntimeError):
    """The sign of the best violation is not monotone in the visibility."""


@dataclass(frozen=True)
class OptimizerConfig:
    """Budget and reproducibility knobs of the multi-start search."""

    restarts: int = 200
    max_evals_per_restart: int = 5000
    objective_tolerance: float = 1e-8
    seed: int = 0
    parallel_workers: int = 1

    def __post_init__(self) -> None:
        if self.restarts < 1:
            raise ValueError(f"restarts must be >= 1, got {self.restarts}")
        if self.max_evals_per_restart < 1:
            raise ValueError("max_evals_per_restart must be >= 1")
        if self.objective_tolerance <= 0.0:
            raise ValueError("objective_tolerance must be > 0")
        if self.seed < 0:
            raise ValueError("seed must be a nonnegative integer")
        if self.parallel_workers < 1:
            raise ValueError("parallel_workers must be >= 1")


@dataclass(frozen=True)
class OptimizationResult:
    """Best violation found across all restarts, with its certificate.

    ``best_violation`` is the plain-numpy re-evaluation of the quadrangle at
    ``best_settings``; the compiled search path agrees with it to well below
    1e-12.  ``restart_history`` holds each restart's final value in restart
    order (fresh restarts first, then warm starts).
    """

    best_violation: float
    best_settings: QuadrangleSettings
    best_report: QuadrangleReport
    evals_used: int
    restart_index_of_best: int
    seed: int
    restart_history: tuple[float, ...]

    @property
    def violated(self) -> bool:
        return self.best_violation < -VIOLATION_EPS


@dataclass(frozen=True)
class CriticalVisibilityResult:
    """Outcome of the bisection for the smallest visibility with violation.

    ``v_c`` is the midpoint of the final bracket [v_lo, v_hi] and
    ``bracket_width`` its half-width, so the stored certificates satisfy
    violation(v_c + bracket_width) < -eps <= violation(v_c - bracket_width).
    ``v_c`` is None when even visibility 1 shows no violation.
    """

    beta: float
    dkind: DistanceKind
    ekind: EntropyKind
    violated_at_v1: bool
    violation_at_v1: float
    v_c: float | None = None
    bracket_width: float | None = None
    v_lo: float | None = None
    v_hi: float | None = None
    violation_at_lo: float | None = None
    violation_at_hi: float | None = None
    best_settings: QuadrangleSettings | None = None
    grid: tuple[tuple[float, float], ...] = ()
    evals_used: int = 0

    @property
    def q(self) -> float | None:
        return self.ekind.q if self.ekind.family == "tsallis" else None


@dataclass(frozen=True)
class SweepRow:
    """One output row of a parameter sweep; mirrors the CSV schema."""

    q: float | None
    beta: float
    visibility: float | None
    metric: str
    entropy: str
    min_violation: float | None
    v_c: float | None
    restarts: int
    seed: int
    evals: int


@dataclass(frozen=True)
class TriangleCounterexample:
    """A sampled tripartite distribution whose pairwise distances break the
    triangle inequality d(X,Z) <= d(X,Y) + d(Y,Z)."""

    trial_index: int
    distribution: np.ndarray
    d_xy: float
    d_yz: float
    d_xz: float

    @property
    def slack(self) -> float:
        return self.d_xz - self.d_xy - self.d_yz


@dataclass(frozen=True)
class MetricAuditRow:
    """Worst observed deviations from the metric axioms for one distance."""

    dkind: DistanceKind
    ekind: EntropyKind
    samples: int
    worst_triangle_slack: float
    min_distance: float
    worst_symmetry_defect: float


def _validate_kinds(dkind: DistanceKind, ekind: EntropyKind, dim: int) -> None:
    if dkind is DistanceKind.COVARIANCE and dim != 2:
        raise ValueError("covariance distance requires local dimension 2")
    if ekind.family == "renyi":
        raise ValueError(
            "renyi entropy is not a valid metric base; it is admitted only in "
            "the triangle-counterexample search"
        )


def settings_from_vector(dim: int, x: np.ndarray) -> QuadrangleSettings:
    """Unpack a flat angle vector into the four settings (a, a', b, b')."""
    na = dim * (dim - 1)
    if x.size != 4 * na:
        raise ValueError(f"angle vector must have {4 * na} entries, got {x.size}")
    parts = []
    for s in range(4):
        seg = x[s * na:(s + 1) * na]
        pairs = [(seg[2 * k], seg[2 * k + 1]) for k in range(na // 2)]
        parts.append(PhaseSettings.from_pairs(dim, pairs))
    return QuadrangleSettings(*parts)


def vector_from_settings(settings: QuadrangleSettings) -> np.ndarray:
    """Inverse of :func:`settings_from_vector` (angles come out folded)."""
    return np.concatenate([s.angle_vector() for s in settings.as_tuple()])


def _restart_start(seed: int, index: int, nvars: int) -> np.ndarray:
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(index,)))
    return rng.uniform(0.0, 2.0 * math.pi, nvars)


def minimize_violation(
    state_params: NoisyStateParams,
    dkind: DistanceKind,
    ekind: EntropyKind,
    config: OptimizerConfig,
    warm_starts: tuple[QuadrangleSettings, ...] = (),
) -> OptimizationResult:
    """Multi-start derivative-free minimization of the quadrangle violation.

    The search space is the 4 settings x d(d-1)/2 mode pairs x (phi, omega)
    angles; output phases are pinned to zero.  ``warm_starts`` appends local
    descents from the given settings after the fresh restarts (their restart
    indices continue the count), which bisection uses to carry incumbents
    between probes.  Returns the best result across all descents; the
    reported value is re-evaluated through the plain-numpy path.
    """
    d = state_params.dim
    _validate_kinds(dkind, ekind, d)
    coeffs = state_params.schmidt_coefficients()
    nvars = 4 * d * (d - 1)
    dist_id = _DIST_ID[dkind]
    is_shannon = dkind is DistanceKind.COVARIANCE or ekind.effectively_shannon
    q = float(ekind.q)
    vis = float(state_params.visibility)
    fatol = config.objective_tolerance
    max_evals = config.max_evals_per_restart

    tasks: list[tuple[int, np.ndarray, float]] = [
        (i, _restart_start(config.seed, i, nvars), FRESH_SIMPLEX_STEP)
        for i in range(config.restarts)
    ]
    for j, warm in enumerate(warm_starts):
        if warm.dim != d:
            raise ValueError("warm start dimension does not match the state")
        tasks.append((config.restarts + j, vector_from_settings(warm), WARM_SIMPLEX_STEP))

    def run(task: tuple[int, np.ndarray, float]):
        index, x0, step = task
        x, f, evals = _kernels.run_descent(
            x0, d, coeffs, vis, dist_id, q, is_shannon, step, fatol, max_evals
        )
        return index, x, f, evals

    if config.parallel_workers > 1:
        with ThreadPoolExecutor(max_workers=config.parallel_workers) as pool:
            outcomes = list(pool.map(run, tasks))
    else:
        outcomes = [run(t) for t in tasks]

    outcomes.sort(key=lambda r: r[0])
    best_index, best_x, _, _ = min(outcomes, key=lambda r: (r[2], r[0]))
    evals_used = sum(r[3] for r in outcomes)
    history = tuple(r[2] for r in outcomes)

    best_settings = settings_from_vector(d, best_x)
    report = evaluate_quadrangle(make_state(state_params), best_settings, dkind, ekind)
    return OptimizationResult(
        best_violation=float(report.violation),
        best_settings=best_settings,
        best_report=report,
        evals_used=evals_used,
        restart_index_of_best=best_index,
        seed=config.seed,
        restart_history=history,
    )


def _violation_at(
    state_params: NoisyStateParams,
    settings: QuadrangleSettings,
    dkind: DistanceKind,
    ekind: EntropyKind,
) -> float:
    return float(
        evaluate_quadrangle(make_state(state_params), settings, dkind, ekind).violation
    )


VISIBILITY_GRID = tuple(round(0.1 * k, 1) for k in range(11))


def critical_visibility(
    beta: float,
    dkind: DistanceKind,
    ekind: EntropyKind,
    config: OptimizerConfig,
    v_precision: float = 1e-3,
    dim: int = 3,
    warm_starts: tuple[QuadrangleSettings, ...] = (),
) -> CriticalVisibilityResult:
    """Bisect the visibility for the onset of violation.

    The bracket starts at [0, 1]; each probe runs the full multi-start search
    at the probe visibility, warm-started from the incumbent best settings.
    Sign-monotonicity of the best violation in V is assumed and cross-checked
    on an 11-point visibility grid (probed with a tenth of the restart budget
    plus the incumbents); an inconsistent sign raises
    :class:`MonotonicityError` instead of returning a silently wrong value.
    """
    if v_precision <= 0.0:
        raise ValueError("v_precision must be > 0")

    probes: dict[float, OptimizationResult] = {}
    evals = 0

    def probe(vis: float, cfg: OptimizerConfig, warm: tuple[QuadrangleSettings, ...]):
        nonlocal evals
        params = NoisyStateParams(beta=beta, visibility=vis, dim=dim)
        res = minimize_violation(params, dkind, ekind, cfg, warm_starts=warm)
        evals += res.evals_used
        probes[vis] = res
        return res

    res_v1 = probe(1.0, config, warm_starts)
    if not res_v1.violated:
        return CriticalVisibilityResult(
            beta=beta,
            dkind=dkind,
            ekind=ekind,
            violated_at_v1=False,
            violation_at_v1=res_v1.best_violation,
            evals_used=evals,
        )

    incumbent = res_v1
    res_v0 = probe(0.0, config, (incumbent.best_settings,))
    if res_v0.violated:
        raise MonotonicityError(
            f"violation {res_v0.best_violation} found at visibility 0; "
            "the searched state family cannot violate there"
        )

    lo, hi = 0.0, 1.0
    cert_lo, cert_hi = res_v0, res_v1
    while hi - lo > v_precision:
        mid = 0.5 * (lo + hi)
        res = probe(mid, config, (incumbent.best_settings,))
        if res.violated:
            hi, cert_hi, incumbent = mid, res, res
        else:
            lo, cert_lo = mid, res

    grid_cfg = replace(config, restarts=max(4, config.restarts // 10))
    grid_warm = (cert_hi.best_settings, cert_lo.best_settings)
    grid_points: list[tuple[float, float]] = []
    params_of = lambda v: NoisyStateParams(beta=beta, visibility=v, dim=dim)  # noqa: E731
    for v in VISIBILITY_GRID:
        if v in probes:
            value = probes[v].best_violation
        else:
            # The incumbent evaluated at v already certifies a violation;
            # only run the reduced search when it does not.
            value = _violation_at(params_of(v), cert_hi.best_settings, dkind, ekind)
            if value >= -VIOLATION_EPS:
                value = probe(v, grid_cfg, grid_warm).best_violation
        grid_points.append((v, value))
        violated = value < -VIOLATION_EPS
        if violated and v <= lo:
            raise MonotonicityError(
                f"grid scan found violation {value} at visibility {v} <= {lo}, "
                f"inconsistent with the bisection bracket [{lo}, {hi}]"
            )
        if not violated and v >= hi:
            raise MonotonicityError(
                f"grid scan found no violation at visibility {v} >= {hi}, "
                f"inconsistent with the bisection bracket [{lo}, {hi}]"
            )

    return CriticalVisibilityResult(
        beta=beta,
        dkind=dkind,
        ekind=ekind,
        violated_at_v1=True,
        violation_at_v1=res_v1.best_violation,
        v_c=0.5 * (lo + hi),
        bracket_width=0.5 * (hi - lo),
        v_lo=lo,
        v_hi=hi,
        violation_at_lo=cert_lo.best_violation,
        violation_at_hi=cert_hi.best_violation,
        best_settings=cert_hi.best_settings,
        grid=tuple(grid_points),
        evals_used=evals,
    )


SWEEP_MODES = ("fixed-v", "vc")


def _entropy_for_q(q: float) -> EntropyKind:
    return tsallis(q)


def sweep_q(
    beta: float,
    dkind: DistanceKind,
    q_grid: "list[float] | tuple[float, ...] | np.ndarray",
    mode: str,
    config: OptimizerConfig,
    visibility: float = 1.0,
    v_precision: float = 1e-3,
) -> list[SweepRow]:
    """One row per Tsallis parameter q: violation at fixed V, or V_c.

    Rows are computed in grid order and each row's search is warm-started
    from the previous row's best settings (the optimum moves continuously in
    q).  A row at q = 1 is additionally recomputed with the Shannon entropy
    under the same seed and warm starts; the two must agree to 1e-6.
    """
    if mode not in SWEEP_MODES:
        raise ValueError(f"mode must be one of {SWEEP_MODES}, got {mode!r}")
    qs = [float(q) for q in q_grid]
    if qs != sorted(qs):
        raise ValueError("q_grid must be sorted ascending")
    if qs and qs[0] < 1.0:
        raise ValueError("q_grid entries must be >= 1")

    rows: list[SweepRow] = []
    warm: tuple[QuadrangleSettings, ...] = ()
    for q in qs:
        ekind = _entropy_for_q(q)
        if mode == "fixed-v":
            params = NoisyStateParams(beta=beta, visibility=visibility)
            res = minimize_violation(params, dkind, ekind, config, warm_starts=warm)
            if abs(q - 1.0) < 1e-9:
                check = minimize_violation(params, dkind, shannon(), config, warm_starts=warm)
                if abs(check.best_violation - res.best_violation) > 1e-6:
                    raise RuntimeError(
                        f"q=1 row {res.best_violation} disagrees with the Shannon "
                        f"run {check.best_violation}"
                    )
            if res.best_settings is not None:
                warm = (res.best_settings,)
            rows.append(
                SweepRow(
                    q=q,
                    beta=beta,
                    visibility=visibility,
                    metric=dkind.value,
                    entropy="tsallis",
                    min_violation=res.best_violation,
                    v_c=None,
                    restarts=config.restarts,
                    seed=config.seed,
                    evals=res.evals_used,
                )
            )
        else:
            res = critical_visibility(
                beta, dkind, ekind, config, v_precision=v_precision, warm_starts=warm
            )
            if abs(q - 1.0) < 1e-9:
                check = critical_visibility(
                    beta, dkind, shannon(), config, v_precision=v_precision, warm_starts=warm
                )
                same = (res.v_c is None and check.v_c is None) or (
                    res.v_c is not None
                    and check.v_c is not None
                    and abs(res.v_c - check.v_c) <= 1e-6
                )
                if not same:
                    raise RuntimeError(
                        f"q=1 V_c row {res.v_c} disagrees with the Shannon run {check.v_c}"
                    )
            if res.best_settings is not None:
                warm = (res.best_settings,)
            rows.append(
                SweepRow(
                    q=q,
                    beta=beta,
                    visibility=None,
                    metric=dkind.value,
                    entropy="tsallis",
                    min_violation=None,
                    v_c=res.v_c,
                    restarts=config.restarts,
                    seed=config.seed,
                    evals=res.evals_used,
                )
            )
    return rows


def sweep_beta(
    beta_grid: "list[float] | tuple[float, ...] | np.ndarray",
    dkind: DistanceKind,
    ekind: EntropyKind,
    config: OptimizerConfig,
    mode: str = "fixed-v",
    visibility: float = 1.0,
    v_precision: float = 1e-3,
) -> list[SweepRow]:
    """One row per pure-state weight beta, at fixed visibility or as V_c."""
    if mode not in SWEEP_MODES:
        raise ValueError(f"mode must be one of {SWEEP_MODES}, got {mode!r}")
    q = ekind.q if ekind.family == "tsallis" else None
    rows: list[SweepRow] = []
    warm: tuple[QuadrangleSettings, ...] = ()
    for beta in (float(b) for b in beta_grid):
        if mode == "fixed-v":
            params = NoisyStateParams(beta=beta, visibility=visibility)
            res = minimize_violation(params, dkind, ekind, config, warm_starts=warm)
            if res.best_settings is not None:
                warm = (res.best_settings,)
            rows.append(
                SweepRow(
                    q=q,
                    beta=beta,
                    visibility=visibility,
                    metric=dkind.value,
                    entropy=ekind.family,
                    min_violation=res.best_violation,
                    v_c=None,
                    restarts=config.restarts,
                    seed=config.seed,
                    evals=res.evals_used,
                )
            )
        else:
            res = critical_visibility(
                beta, dkind, ekind, config, v_precision=v_precision, warm_starts=warm
            )
            if res.best_settings is not None:
                warm = (res.best_settings,)
            rows.append(
                SweepRow(
                    q=q,
                    beta=beta,
                    visibility=None,
                    metric=dkind.value,
                    entropy=ekind.family,
                    min_violation=None,
                    v_c=res.v_c,
                    restarts=config.restarts,
                    seed=config.seed,
                    evals=res.evals_used,
                )
            )
    return rows


def sample_tripartite(rng: np.random.Generator, count: int, start_index: int = 0) -> np.ndarray:
    """Draw ``count`` random 3x3x3 distributions, one per trial index.

    Trial i uses a flat Dirichlet with concentration
    TRIPARTITE_CONCENTRATIONS[i % len(...)], realized as normalized gamma
    variates so a whole batch comes from one vectorized draw.
    """
    cycle = np.asarray(TRIPARTITE_CONCENTRATIONS)
    alphas = cycle[(start_index + np.arange(count)) % len(cycle)]
    g = rng.gamma(np.repeat(alphas, 27).reshape(count, 27), 1.0)
    g /= g.sum(axis=1, keepdims=True)
    return g.reshape(count, 3, 3, 3)


def _pairwise_marginals(p3: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    return p3.sum(axis=-1), p3.sum(axis=-3), p3.sum(axis=-2)


def triangle_counterexample(
    ekind: EntropyKind,
    trials: int,
    seed: int,
    dkind: DistanceKind = DistanceKind.D1,
    chunk: int = 4096,
) -> TriangleCounterexample | None:
    """Search random tripartite distributions for a triangle-inequality break.

    Distances are computed with ``dkind`` under ``ekind`` on the three
    pairwise marginals of the same tripartite distribution; the first trial
    with d(X,Z) > d(X,Y) + d(Y,Z) + 1e-9 is returned.  ``None`` means the
    search was exhausted, not that no counterexample exists.
    """
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    done = 0
    while done < trials:
        n = min(chunk, trials - done)
        p3 = sample_tripartite(rng, n, start_index=done)
        pxy, pyz, pxz = _pairwise_marginals(p3)
        d_xy = batch_entropic_distance(pxy, dkind, ekind)
        d_yz = batch_entropic_distance(pyz, dkind, ekind)
        d_xz = batch_entropic_distance(pxz, dkind, ekind)
        slack = d_xz - d_xy - d_yz
        hits = np.nonzero(slack > 1e-9)[0]
        if hits.size:
            i = int(hits[0])
            return TriangleCounterexample(
                trial_index=done + i,
                distribution=p3[i],
                d_xy=float(d_xy[i]),
                d_yz=float(d_yz[i]),
                d_xz=float(d_xz[i]),
            )
        done += n
    return None


def renyi_triangle_counterexample(
    q: float, trials: int, seed: int
) -> TriangleCounterexample | None:
    """Triangle-inequality counterexample search for the Renyi-based distance."""
    return triangle_counterexample(EntropyKind("renyi", float(q)), trials, seed)


AUDIT_ENTROPIES = (
    shannon(),
    tsallis(1.0),
    tsallis(1.5),
    tsallis(2.0),
    tsallis(3.0),
    tsallis(5.0),
)


def metric_audit(
    samples: int,
    seed: int,
    dkinds: tuple[DistanceKind, ...] = ENTROPIC_DISTANCES,
    ekinds: tuple[EntropyKind, ...] = AUDIT_ENTROPIES,
) -> list[MetricAuditRow]:
    """Empirical audit of the metric axioms on random tripartite distributions.

    For every (distance, entropy) combination the triangle inequality is
    checked with each of X, Y, Z as the middle variable, non-negativity as
    the smallest distance seen, and symmetry as the largest change under
    transposing a joint table.
    """
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    p3 = sample_tripartite(rng, samples)
    marginals = _pairwise_marginals(p3)
    rows = []
    for ekind in ekinds:
        for dkind in dkinds:
            d_xy, d_yz, d_xz = (
                batch_entropic_distance(m, dkind, ekind) for m in marginals
            )
            slack = min(
                float((d_xy + d_yz - d_xz).min()),
                float((d_xy + d_xz - d_yz).min()),
                float((d_yz + d_xz - d_xy).min()),
            )
            lowest = min(float(d.min()) for d in (d_xy, d_yz, d_xz))
            sym = max(
                float(
                    np.abs(
                        batch_entropic_distance(m.swapaxes(-1, -2), dkind, ekind) - d
                    ).max()
                )
                for m, d in zip(marginals, (d_xy, d_yz, d_xz))
            )
            rows.append(
                MetricAuditRow(
                    dkind=dkind,
                    ekind=ekind,
                    samples=samples,
                    worst_triangle_slack=slack,
                    min_distance=lowest,
                    worst_symmetry_defect=sym,
                )
            )
    return rows
