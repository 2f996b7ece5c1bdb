"""Monte Carlo classification of invariant sets by stability and visibility.

Every definition involved quantifies over whole neighbourhoods and infinite
time.  Here a neighbourhood is a finite seeded sample at each delta of a
ladder, and infinite time is a finite horizon with a transient cut.  The
verdicts are therefore empirical evidence stamped with the horizon and
sample sizes used, never proofs.
"""

from __future__ import annotations

import enum
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .analysis.geometry import NetworkGeometry, _visits
from .integrator import IntegratorOptions, Termination, Trajectory, integrate
from .models import NetworkModel


class VisibilityError(RuntimeError):
    pass


class TrajectoryTooShort(VisibilityError):
    pass


class BatchFailed(VisibilityError):
    pass


class Exclusions(enum.Enum):
    NONE = "none"
    INVARIANT_SUBSPACES = "invariant-subspaces"


class Mode(enum.Enum):
    ASYMPTOTICALLY_VISIBLE = "AsymptoticallyVisible"
    LYAPUNOV_VISIBLE = "LyapunovVisible"
    QUASI_VISIBLE = "QuasiVisible"
    VISIBLE = "Visible"
    NOT_VISIBLE = "NotVisible"


class Prefix(enum.Enum):
    PLAIN = "plain"
    ALMOST = "almost"
    ESSENTIALLY = "essentially"
    FRAGMENTARILY = "fragmentarily"
    NONE = "none"


# strongest first
MODE_ORDER = (Mode.ASYMPTOTICALLY_VISIBLE, Mode.LYAPUNOV_VISIBLE, Mode.QUASI_VISIBLE, Mode.VISIBLE)
PREFIX_ORDER = (Prefix.PLAIN, Prefix.ALMOST, Prefix.ESSENTIALLY, Prefix.FRAGMENTARILY, Prefix.NONE)


@dataclass(frozen=True)
class VisibilityConfig:
    delta_ladder: tuple[float, ...] = (1e-2, 1e-3, 1e-4)
    epsilon: float = 0.05
    samples_per_delta: int = 200
    t_max: float = 5000.0
    transient_T: float = 500.0
    recurrence_count: int = 2
    exclusions: Exclusions = Exclusions.INVARIANT_SUBSPACES
    rng_seed: int = 0
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    tail_fraction: float = 0.2
    essential_level: float = 0.95
    workers: int | None = None

    def __post_init__(self):
        ladder = tuple(float(d) for d in self.delta_ladder)
        object.__setattr__(self, "delta_ladder", ladder)
        if len(ladder) < 2:
            raise ValueError("delta_ladder needs at least two values")
        if any(d <= 0 for d in ladder) or any(b >= a for a, b in zip(ladder, ladder[1:])):
            raise ValueError("delta_ladder must be positive and strictly decreasing")
        if not self.epsilon > max(ladder):
            raise ValueError("epsilon must exceed every delta so samples start inside it")
        if not 0 < self.transient_T < self.t_max:
            raise ValueError("need 0 < transient_T < t_max")
        if self.recurrence_count < 2:
            raise ValueError("recurrence_count must be >= 2")
        if self.samples_per_delta < 1:
            raise ValueError("samples_per_delta must be >= 1")
        if not 0 <= self.rng_seed < 2**64:
            raise ValueError("rng_seed must be an unsigned 64-bit integer")

    def integrator_options(self) -> IntegratorOptions:
        return IntegratorOptions(rel_tol=self.rel_tol, abs_tol=self.abs_tol, t_max=self.t_max)


@dataclass
class TrajectoryVerdict:
    covered_elements: set[str]
    stayed_within_epsilon: bool
    returned_within_epsilon: bool
    converged: bool
    escaped: bool
    omega_estimate: set[str]
    max_distance: float = float("nan")
    tail_distance: float = float("nan")
    log_transverse_tail: float = float("nan")
    log_transverse_early: float = float("nan")

    def modes(self, target: NetworkGeometry) -> dict[Mode, bool]:
        everything = set(target.element_ids)
        coverage = self.covered_elements >= everything
        return {
            Mode.ASYMPTOTICALLY_VISIBLE: coverage and self.stayed_within_epsilon and self.converged,
            Mode.LYAPUNOV_VISIBLE: coverage and self.stayed_within_epsilon,
            Mode.QUASI_VISIBLE: self.converged and self.omega_estimate >= everything,
            Mode.VISIBLE: coverage and self.returned_within_epsilon,
        }


def sample_neighborhood(
    g: NetworkGeometry,
    delta: float,
    K: int,
    exclusions: Exclusions = Exclusions.INVARIANT_SUBSPACES,
    seed: int = 0,
    orthant: bool = True,
    max_rounds: int = 1000,
) -> np.ndarray:
    """K points x with 0 < d(x, g) < delta.

    Offsets from arclength-uniform base points have log-uniform magnitude in
    [delta/100, delta] and uniform direction.  With the invariant-subspace
    exclusion every coordinate is strictly positive; in the orthant negative
    coordinates are always rejected.
    """
    if delta <= 0 or K < 1:
        raise ValueError("need delta > 0 and K >= 1")
    rng = np.random.default_rng(seed)
    n = g.n
    out: list[np.ndarray] = []
    have = 0
    for _ in range(max_rounds):
        batch = max(4 * (K - have), 64)
        base = g.sample_base_points(rng, batch)
        direction = rng.standard_normal((batch, n))
        direction /= np.linalg.norm(direction, axis=1)[:, None]
        radius = delta * 10.0 ** rng.uniform(-2.0, 0.0, size=batch)
        x = base + radius[:, None] * direction
        ok = np.ones(batch, dtype=bool)
        if exclusions is Exclusions.INVARIANT_SUBSPACES:
            ok &= np.all(x > 0, axis=1)
        elif orthant:
            ok &= np.all(x >= 0, axis=1)
        x = x[ok]
        if len(x):
            d = g.distances(x)
            x = x[(d > 0) & (d < delta)]
        out.append(x)
        have += len(x)
        if have >= K:
            return np.vstack(out)[:K]
    raise VisibilityError(f"could not draw {K} points within {delta} of {g.name}")


def _tail_start(times: np.ndarray, transient_T: float, fraction: float) -> int:
    return int(np.floor(len(times) * (1.0 - fraction)))


def classify_trajectory(traj: Trajectory, target: NetworkGeometry, cfg: VisibilityConfig
                        ) -> TrajectoryVerdict:
    eps = cfg.epsilon
    escaped = traj.termination is Termination.ESCAPE
    t_end = float(traj.times[-1])
    if not escaped and t_end < 2 * cfg.transient_T:
        raise TrajectoryTooShort(f"run ends at t={t_end}, need >= {2 * cfg.transient_T}")
    n = len(traj.times)
    post = traj.times > cfg.transient_T
    first_post = int(np.argmax(post)) if post.any() else n
    tail = max(_tail_start(traj.times, cfg.transient_T, cfg.tail_fraction), first_post)
    d_all, d_post, tail_d = target.suffix_max_distances(traj.states, [0, first_post, tail])
    stayed = bool(not escaped and d_all < eps)
    returned = bool(not escaped and post.any() and d_post < eps)

    path = np.ascontiguousarray(traj.states[max(first_post - 1, 0):])
    covered = _covered(target, path, eps, cfg.recurrence_count)

    omega = _covered(target, np.ascontiguousarray(traj.states[max(tail - 1, 0):]), eps, 1)

    tail_d = float(tail_d) if tail < n else float("inf")
    # decay is judged on the log transverse distance: the polyline distance
    # bottoms out at its chord error long before the orbit stops approaching
    n_post = n - first_post
    early_end = first_post + max(int(n_post * cfg.tail_fraction), 1)
    converged = False
    log_tail = log_early = float("nan")
    if returned and tail < n and early_end <= tail:
        lt = target.log_transverse(traj.log_abs())
        log_tail = float(lt[tail:].max())
        log_early = float(lt[first_post:early_end].max())
        converged = bool(tail_d < eps / 10 and log_tail < log_early - math.log(2.0))
    return TrajectoryVerdict(covered, stayed, returned, converged, escaped, omega,
                             float(d_all), tail_d, log_tail, log_early)


def _covered(target: NetworkGeometry, path: np.ndarray, eps: float, times: int) -> set[str]:
    if len(path) < 2:
        return set()
    out = set()
    for element, pts in target.coverage_targets(eps / 2).items():
        counts = _visits(np.ascontiguousarray(pts), path, eps)
        if np.all(counts >= times):
            out.add(element)
    return out


@dataclass
class SampleRecord:
    delta: float
    index: int
    x0: list[float]
    modes: dict[str, bool] = field(default_factory=dict)
    verdict: TrajectoryVerdict | None = None
    error: str | None = None


def _workers(cfg: VisibilityConfig) -> int:
    if cfg.workers:
        return max(1, cfg.workers)
    env = os.environ.get("HETNET_THREADS")
    cap = int(env) if env and env.isdigit() and int(env) > 0 else (os.cpu_count() or 1)
    return max(1, min(cap, os.cpu_count() or 1))


def _sample_seed(cfg: VisibilityConfig, level: int) -> int:
    return int(np.random.SeedSequence([cfg.rng_seed, level]).generate_state(1, dtype=np.uint64)[0])


def run_samples(m: NetworkModel, target: NetworkGeometry, cfg: VisibilityConfig
                ) -> list[SampleRecord]:
    jobs: list[SampleRecord] = []
    for level, delta in enumerate(cfg.delta_ladder):
        pts = sample_neighborhood(target, delta, cfg.samples_per_delta, cfg.exclusions,
                                  _sample_seed(cfg, level), m.orthant_restricted)
        jobs.extend(SampleRecord(delta, i, [float(v) for v in p]) for i, p in enumerate(pts))
    opts = cfg.integrator_options()

    def work(rec: SampleRecord) -> SampleRecord:
        try:
            traj = integrate(m, np.array(rec.x0), opts)
            v = classify_trajectory(traj, target, cfg)
            rec.verdict = v
            rec.modes = {k.value: bool(b) for k, b in v.modes(target).items()}
        except Exception as exc:  # one bad sample must not sink the batch
            rec.error = f"{type(exc).__name__}: {exc}"
        return rec

    workers = _workers(cfg)
    if workers == 1:
        done = [work(r) for r in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            done = list(pool.map(work, jobs))
    if all(r.error for r in done):
        raise BatchFailed(f"all {len(done)} trajectories failed; first: {done[0].error}")
    return done


def _fractions(records: list[SampleRecord], cfg: VisibilityConfig, key) -> dict[float, float]:
    out = {}
    for delta in cfg.delta_ladder:
        ok = [r for r in records if r.delta == delta and r.error is None]
        out[delta] = (sum(1 for r in ok if key(r)) / len(ok)) if ok else 0.0
    return out


def _by_shrinking_delta(fractions: dict[float, float]) -> list[float]:
    return [fractions[d] for d in sorted(fractions, reverse=True)]


def is_full(fractions: dict[float, float]) -> bool:
    """Every sample good at the smallest delta, never worse as delta shrinks.

    The definitions ask for *some* delta-neighbourhood, and near a cycle the
    excursion past a saddle grows like the square root of the entry distance,
    so the largest rungs can legitimately fall short for a fixed epsilon.
    """
    return is_essential(fractions, 1.0)


def is_essential(fractions: dict[float, float], level: float = 0.95) -> bool:
    """Positive everywhere, non-decreasing as delta shrinks and reaching
    ``level`` at the smallest."""
    ordered = _by_shrinking_delta(fractions)
    return (is_fragmentary(fractions) and ordered[-1] >= level
            and all(b >= a for a, b in zip(ordered, ordered[1:])))


def is_fragmentary(fractions: dict[float, float]) -> bool:
    return all(f > 0.0 for f in fractions.values())


def prefix_for(fractions: dict[float, float], exclusions: Exclusions, level: float = 0.95
               ) -> Prefix:
    if is_full(fractions):
        return Prefix.PLAIN if exclusions is Exclusions.NONE else Prefix.ALMOST
    if is_essential(fractions, level):
        return Prefix.ESSENTIALLY
    if is_fragmentary(fractions):
        return Prefix.FRAGMENTARILY
    return Prefix.NONE


@dataclass
class VisibilityVerdict:
    target: str
    mode: Mode
    prefix: Prefix
    fraction_per_delta: dict[float, float]
    mode_fractions: dict[str, dict[float, float]]
    mode_prefixes: dict[str, str]
    stability_modes: dict[str, bool]
    evidence: list[dict]
    config: VisibilityConfig
    failures: int = 0

    @property
    def summary(self) -> str:
        if self.mode is Mode.NOT_VISIBLE:
            return f"{self.target}: NotVisible"
        return f"{self.target}: {self.mode.value} ({self.prefix.value})"

    def to_dict(self) -> dict:
        cfg = asdict(self.config)
        cfg["exclusions"] = self.config.exclusions.value
        cfg["delta_ladder"] = list(self.config.delta_ladder)
        return {
            "target": self.target,
            "mode": self.mode.value,
            "prefix": self.prefix.value,
            "fractions": {repr(d): f for d, f in self.fraction_per_delta.items()},
            "mode_fractions": {m: {repr(d): f for d, f in fr.items()}
                               for m, fr in self.mode_fractions.items()},
            "mode_prefixes": self.mode_prefixes,
            "stability": self.stability_modes,
            "seed": self.config.rng_seed,
            "horizon": self.config.t_max,
            "tolerances": {"rel_tol": self.config.rel_tol, "abs_tol": self.config.abs_tol},
            "config": cfg,
            "failures": self.failures,
            "note": "empirical Monte Carlo estimate over a finite horizon, not a proof",
            "trajectories": self.evidence,
        }


def choose_mode(prefixes: dict[Mode, Prefix]) -> tuple[Mode, Prefix]:
    """Best prefix first, then the strongest mode holding with it."""
    best = min((prefixes[m] for m in MODE_ORDER), key=PREFIX_ORDER.index)
    if best is Prefix.NONE:
        return Mode.NOT_VISIBLE, Prefix.NONE
    return next(m for m in MODE_ORDER if prefixes[m] is best), best


def _stability_flags(records: list[SampleRecord], cfg: VisibilityConfig) -> dict[str, bool]:
    ok = [r for r in records if r.error is None]
    fas = _fractions(records, cfg, lambda r: r.verdict.converged and r.verdict.stayed_within_epsilon)
    return {
        "lyapunov_consistent": bool(ok) and all(r.verdict.stayed_within_epsilon for r in ok),
        "quasi_asymptotic_consistent": bool(ok) and all(r.verdict.converged for r in ok),
        "fas_consistent": is_fragmentary(fas),
    }


def _evidence(records: list[SampleRecord]) -> list[dict]:
    rows = []
    for r in records:
        row = {"delta": r.delta, "index": r.index, "x0": r.x0}
        if r.error:
            row["error"] = r.error
        else:
            v = r.verdict
            row.update(
                modes=r.modes,
                stayed=v.stayed_within_epsilon,
                returned=v.returned_within_epsilon,
                converged=v.converged,
                escaped=v.escaped,
                covered=sorted(v.covered_elements),
                omega=sorted(v.omega_estimate),
                max_distance=v.max_distance,
                tail_distance=v.tail_distance,
                log_transverse_tail=v.log_transverse_tail,
                log_transverse_early=v.log_transverse_early,
            )
        rows.append(row)
    return rows


def verdict_from_records(records: list[SampleRecord], target: NetworkGeometry,
                         cfg: VisibilityConfig) -> VisibilityVerdict:
    mode_fractions = {m: _fractions(records, cfg, lambda r, m=m: r.modes[m.value])
                      for m in MODE_ORDER}
    prefixes = {m: prefix_for(f, cfg.exclusions, cfg.essential_level)
                for m, f in mode_fractions.items()}
    mode, prefix = choose_mode(prefixes)
    chosen = mode_fractions[mode] if mode in mode_fractions else {d: 0.0 for d in cfg.delta_ladder}
    return VisibilityVerdict(
        target=target.name,
        mode=mode,
        prefix=prefix,
        fraction_per_delta=chosen,
        mode_fractions={m.value: f for m, f in mode_fractions.items()},
        mode_prefixes={m.value: p.value for m, p in prefixes.items()},
        stability_modes=_stability_flags(records, cfg),
        evidence=_evidence(records),
        config=cfg,
        failures=sum(1 for r in records if r.error),
    )


def visibility_verdict(m: NetworkModel, g: NetworkGeometry, X, cfg: VisibilityConfig | None = None
                       ) -> VisibilityVerdict:
    """Classify the target set X (a sub-geometry of g, or a list of its
    element ids) from seeded samples of its delta-neighbourhoods."""
    cfg = cfg or VisibilityConfig()
    target = X if isinstance(X, NetworkGeometry) else g.subset(X)
    if not target.element_ids:
        raise ValueError("target set is empty")
    records = run_samples(m, target, cfg)
    return verdict_from_records(records, target, cfg)


@dataclass
class StabilityReport:
    target: str
    lyapunov_consistent: bool
    quasi_asymptotic_consistent: bool
    fas_consistent: bool
    fas_fractions: dict[float, float]
    note: str = "empirical, not a proof"


def stability_report(m: NetworkModel, g: NetworkGeometry, X, cfg: VisibilityConfig | None = None,
                     records: list[SampleRecord] | None = None) -> StabilityReport:
    cfg = cfg or VisibilityConfig()
    target = X if isinstance(X, NetworkGeometry) else g.subset(X)
    if records is None:
        records = run_samples(m, target, cfg)
    flags = _stability_flags(records, cfg)
    fas = _fractions(records, cfg, lambda r: r.verdict.converged and r.verdict.stayed_within_epsilon)
    return StabilityReport(target.name, flags["lyapunov_consistent"],
                           flags["quasi_asymptotic_consistent"], flags["fas_consistent"], fas)
