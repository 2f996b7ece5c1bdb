"""hetnet command line.

Exit codes: 0 success, 1 usage or parse error, 2 numerical failure,
3 partial batch failure.
"""

from __future__ import annotations

import argparse
import hashlib
import shutil
import sys
import tempfile
from pathlib import Path

import numpy as np

from .analysis.geometry import (
    GH_EDGES,
    KS_EDGES,
    RPSSL_EDGES,
    NetworkGeometry,
    build_network_geometry,
    default_edges,
    pentacle_project,
)
from .analysis.indices import (
    NU_LABELS_3,
    NU_LABELS_4,
    predict_ks_regime,
    rho_gh,
    stability_indices,
)
from .analysis.itinerary import (
    Itinerary,
    NoEvents,
    TooFewEpisodes,
    classify_edges,
    cycle_signature,
    extract_itinerary,
    loop_durations,
)
from .export import (
    MalformedTable,
    events_report,
    read_numeric_table,
    write_itinerary,
    write_json,
    write_pentacle,
    write_trajectory,
)
from .integrator import IntegrationError, IntegratorOptions, integrate_with_equilibrium_events
from .models import (
    PRESET_PARAMS,
    GHParams,
    KSParams,
    ModelError,
    NetworkModel,
    RPSSLParams,
    resolve_preset_id,
)
from .scenario import (
    AnalysisSpec,
    Scenario,
    ScenarioError,
    VisibilitySpec,
    load_scenario,
    preset_scenario,
)
from .visibility import (
    BatchFailed,
    Exclusions,
    VisibilityConfig,
    VisibilityError,
    run_samples,
    sample_neighborhood,
    stability_report,
    verdict_from_records,
)

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_PARTIAL = 0, 1, 2, 3

RPSSL_PATTERNS = {
    "rpssl-a": "AAAAA",
    "rpssl-b": "AAB",
    "rpssl-c": "AABBB",
    "rpssl-d": "aperiodic, interior excursions",
}


class UsageError(Exception):
    pass


class StageError(Exception):
    def __init__(self, stage: str, exc: Exception):
        super().__init__(f"{stage} failed: {exc}")
        self.stage = stage
        self.cause = exc


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------- helpers

def network_edges(m: NetworkModel) -> list[tuple[int, int]]:
    family = (m.name or "").split("-")[0]
    return {"gh": GH_EDGES, "ks": KS_EDGES, "rpssl": RPSSL_EDGES}.get(family) or default_edges(m)


def resolve_target(g: NetworkGeometry, spec: str) -> NetworkGeometry:
    """``network``, a cycle as digits or ``cycle:1,2,4``, or a comma list of
    element ids such as ``xi1,1->2``."""
    spec = spec.strip()
    if spec in ("network", "all"):
        return g.subset(g.element_ids, name="network")
    if spec.startswith("cycle:"):
        return g.cycle([int(v) for v in spec[6:].split(",")])
    if spec.isdigit():
        return g.cycle([int(c) for c in spec])
    return g.subset([s.strip() for s in spec.split(",")])


def regime_line(preset: str) -> str:
    p = PRESET_PARAMS[preset]
    if isinstance(p, GHParams):
        r = rho_gh(p)
        if abs(r - 1.0) <= 1e-9:
            what = "resonant: family of periodic orbits"
        elif r > 1:
            what = "asymptotically stable (restricted orthant)"
        else:
            what = "not asymptotically stable"
        return f"rho_123={r:.4f}; {what}"
    if isinstance(p, KSParams):
        rep = predict_ks_regime(p)
        extra = f", switching {rep.switching}" if rep.switching else ""
        return f"rho_123={rep.rho_123:.4f} rho_124={rep.rho_124:.4f}; {rep.regime.value}{extra}"
    if isinstance(p, RPSSLParams):
        return f"omnicycle {RPSSL_PATTERNS.get(preset, '?')}"
    return ""


def _provenance(sc: Scenario) -> dict:
    return {"scenario": sc.digest(), "seed": sc.seed}


def _scenario_from_args(args) -> Scenario:
    if getattr(args, "scenario", None):
        sc = load_scenario(args.scenario)
    elif getattr(args, "preset", None):
        sc = preset_scenario(args.preset)
    else:
        raise UsageError("give --preset or --scenario")
    if getattr(args, "seed", None) is not None:
        sc.seed = args.seed
    if getattr(args, "tmax", None) is not None:
        sc.integrator.t_max = args.tmax
    if getattr(args, "log", None) is not None:
        sc.integrator.log_mode = args.log
    if getattr(args, "out", None):
        sc.output = args.out
    return sc


class _Staging:
    """Collect outputs in a scratch directory and move them into place only
    when every stage succeeded."""

    def __init__(self, out: str):
        self.out = Path(out)

    def __enter__(self) -> Path:
        self.out.parent.mkdir(parents=True, exist_ok=True)
        self.tmp = Path(tempfile.mkdtemp(prefix=".hetnet-", dir=self.out.parent))
        return self.tmp

    def __exit__(self, exc_type, exc, tb):
        if exc_type is None:
            self.out.mkdir(parents=True, exist_ok=True)
            for item in sorted(self.tmp.rglob("*")):
                target = self.out / item.relative_to(self.tmp)
                if item.is_dir():
                    target.mkdir(parents=True, exist_ok=True)
                else:
                    shutil.move(str(item), str(target))
        shutil.rmtree(self.tmp, ignore_errors=True)
        return False


def _stage(name, fn, *a, **kw):
    try:
        return fn(*a, **kw)
    except (StageError, UsageError):
        raise
    except Exception as exc:
        raise StageError(name, exc) from exc


# ---------------------------------------------------------------- commands

def cmd_presets(args) -> int:
    for key in PRESET_PARAMS:
        p = PRESET_PARAMS[key]
        family = type(p).__name__.replace("Params", "")
        values = ", ".join(f"{k}={v:g}" for k, v in vars(p).items())
        print(f"{key:12s} [{family}, published parameter set] {values}")
        print(f"{'':12s} {regime_line(key)}")
    return EXIT_OK


def indices_report(p) -> dict:
    if isinstance(p, RPSSLParams):
        raise UsageError("no closed-form indices for the RPSSL family")
    si = stability_indices(p)
    out = {"rho": si.rho_values, "resonance": si.resonance_flags}
    if isinstance(p, KSParams):
        rep = predict_ks_regime(p)
        out.update(nu=rep.nu, nu_signs=rep.nu_signs, regime=rep.regime.value,
                   switching=rep.switching, note=rep.note)
    else:
        out["regime"] = regime_line_for_gh(si.rho_values["123"])
    return out


def regime_line_for_gh(r: float) -> str:
    if abs(r - 1.0) <= 1e-9:
        return "resonant: family of periodic orbits"
    return "asymptotically stable (restricted orthant)" if r > 1 else "not asymptotically stable"


def cmd_indices(args) -> int:
    if args.params:
        p = _params_from_string(args.params)
        name = "custom"
    else:
        if not args.preset:
            raise UsageError("give --preset or --params")
        name = resolve_preset_id(args.preset)
        p = PRESET_PARAMS[name]
    rep = indices_report(p)
    print(f"{name}:")
    for k, v in rep["rho"].items():
        flag = "  (resonance)" if rep["resonance"][k] else ""
        print(f"  rho_{k} = {v:.4f}{flag}")
    if "nu" in rep:
        for k in NU_LABELS_4 + NU_LABELS_3:
            v = rep["nu"][k]
            mark = "  <-- negative" if v < 0 else ""
            print(f"  nu_{k} = {v:+.6f}{mark}")
        sw = f" (switching {rep['switching']})" if rep["switching"] else ""
        print(f"  regime: {rep['regime']}{sw}")
        if rep["note"]:
            print(f"  note: {rep['note']}")
    else:
        print(f"  regime: {rep['regime']}")
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        write_json(Path(args.out) / "indices.json", {"target": name, **rep})
    return EXIT_OK


def _params_from_string(text: str):
    kv = {}
    for part in text.split(","):
        if "=" not in part:
            raise UsageError(f"expected key=value, got {part!r}")
        k, v = part.split("=", 1)
        kv[k.strip()] = float(v)
    for cls in (GHParams, KSParams):
        if set(kv) == set(cls.__dataclass_fields__):
            return cls(**kv)
    raise UsageError("parameters must name every GH or every KS coefficient")


def _initial_points(sc: Scenario, m: NetworkModel) -> list[np.ndarray]:
    spec = sc.initial.sample
    if spec is None:
        return [sc.initial_state(m)]
    g = build_network_geometry(m, network_edges(m))
    target = resolve_target(g, spec.target)
    pts = sample_neighborhood(target, spec.delta, spec.count, seed=sc.seed,
                              orthant=m.orthant_restricted)
    return list(pts)


def simulate(sc: Scenario, dest: Path) -> dict:
    m = _stage("model", sc.model.build)
    ana = sc.analysis or AnalysisSpec()
    ig = sc.integrator
    opts = _stage("integrator options", IntegratorOptions, rel_tol=ig.rel_tol, abs_tol=ig.abs_tol,
                  t_max=sc.t_max(), log_mode=ig.log_mode, max_step=ig.max_step)
    points = _stage("initial conditions", _initial_points, sc, m)
    summary = {"scenario": sc.digest(), "seed": sc.seed, "model": m.name, "runs": []}
    for k, x0 in enumerate(points):
        suffix = "" if len(points) == 1 else f"_{k}"
        traj = _stage("integration", integrate_with_equilibrium_events, m, x0, opts, ig.eta)
        traj.label = f"{m.name}{suffix}"
        run = {"x0": x0, "events": events_report(traj)}
        write_trajectory(dest / f"trajectory{suffix}.csv", traj)
        if ana.itinerary:
            try:
                it = extract_itinerary(traj, ana.min_duration)
                it = classify_edges(it, traj, m)
            except NoEvents:
                it = Itinerary([], [], traj.label)
            write_itinerary(dest / f"itinerary{suffix}.csv", it)
            run["itinerary"] = [e.name for e in it.episodes]
            run["edge_labels"] = it.label_string()
            run["edge_period"] = cycle_signature(it.label_string()[-60:])
            if ana.ratios:
                try:
                    d = loop_durations(it)
                    run["loop_durations"] = d
                    run["loop_ratios"] = d[1:] / d[:-1] if len(d) > 1 else []
                except TooFewEpisodes:
                    run["loop_durations"] = []
        proj = None
        if ana.pentacle and m.n == 5:
            proj = pentacle_project(traj.states)
            write_pentacle(dest / f"pentacle{suffix}.csv", traj.times, proj)
        if ana.plots:
            from .plotting import plot_pentacle, plot_timeseries

            (dest / "plots").mkdir(exist_ok=True)
            prov = _provenance(sc)
            plot_timeseries(traj.times, traj.states, dest / "plots" / f"timeseries{suffix}.svg",
                            log=True, provenance=prov, title=traj.label)
            plot_timeseries(traj.times, traj.states,
                            dest / "plots" / f"timeseries_linear{suffix}.svg",
                            log=False, provenance=prov, title=traj.label)
            if proj is not None:
                plot_pentacle(traj.times, proj, dest / "plots" / f"pentacle{suffix}.svg",
                              transient=min(500.0, 0.1 * opts.t_max), provenance=prov,
                              title=traj.label)
        summary["runs"].append(run)
    if ana.indices and sc.model.preset:
        p = PRESET_PARAMS[resolve_preset_id(sc.model.preset)]
        if not isinstance(p, RPSSLParams):
            summary["indices"] = indices_report(p)
    write_json(dest / "report.json", summary)
    return summary


def cmd_simulate(args) -> int:
    sc = _scenario_from_args(args)
    with _Staging(sc.output) as dest:
        summary = simulate(sc, dest)
    for run in summary["runs"]:
        labels = run.get("edge_labels", "")
        seq = " ".join(run.get("itinerary", [])[-12:])
        print(f"{run['events']['label']}: t_end={run['events']['t_end']:g} "
              f"episodes={len(run.get('itinerary', []))} tail: {seq} {labels[-20:]}")
    print(f"wrote {sc.output}")
    return EXIT_OK


def visibility_config(sc: Scenario, args=None) -> VisibilityConfig:
    v = sc.visibility or VisibilitySpec()
    ladder = tuple(v.delta_ladder)
    eps = v.epsilon
    samples = v.samples_per_delta
    if args is not None:
        if args.delta:
            ladder = tuple(float(s) for s in args.delta.split(","))
        if args.epsilon is not None:
            eps = args.epsilon
        if args.samples is not None:
            samples = args.samples
    ig = sc.integrator
    return VisibilityConfig(
        delta_ladder=ladder, epsilon=eps, samples_per_delta=samples,
        t_max=args.tmax if args is not None and args.tmax else v.t_max,
        transient_T=v.transient_T, recurrence_count=v.recurrence_count,
        exclusions=Exclusions(v.exclusions), rng_seed=sc.seed,
        rel_tol=ig.rel_tol, abs_tol=ig.abs_tol,
    )


def classify(sc: Scenario, cfg: VisibilityConfig, dest: Path) -> tuple[list[dict], int]:
    m = _stage("model", sc.model.build)
    g = _stage("network geometry", build_network_geometry, m, network_edges(m))
    targets = (sc.visibility or VisibilitySpec()).targets
    reports, failures = [], 0
    for spec in targets:
        target = _stage("target", resolve_target, g, spec)
        records = _stage("sampling", run_samples, m, target, cfg)
        verdict = verdict_from_records(records, target, cfg)
        stab = stability_report(m, g, target, cfg, records=records)
        failures += verdict.failures
        d = verdict.to_dict()
        d["target_spec"] = spec
        d["stability_report"] = vars(stab)
        d["summary"] = verdict.summary
        reports.append(d)
    write_json(dest / "verdict.json", {"scenario": sc.digest(), "model": m.name,
                                        "verdicts": reports})
    return reports, failures


def cmd_classify(args) -> int:
    sc = _scenario_from_args(args)
    if args.target:
        sc.visibility = sc.visibility or VisibilitySpec()
        sc.visibility.targets = list(args.target)
    try:
        cfg = visibility_config(sc, args)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    with _Staging(sc.output) as dest:
        reports, failures = classify(sc, cfg, dest)
    for r in reports:
        sr = r["stability_report"]
        extra = " [f.a.s.-consistent]" if sr["fas_consistent"] else ""
        print(f"{r['target_spec']}: {r['summary'].split(': ', 1)[1]}{extra}")
    if failures:
        print(f"{failures} trajectories failed; see verdict.json", file=sys.stderr)
        return EXIT_PARTIAL
    return EXIT_OK


def cmd_plot(args) -> int:
    from .plotting import plot_pentacle, plot_timeseries

    if not args.trajectory and not args.pentacle:
        raise UsageError("give --trajectory and/or --pentacle")
    out = Path(args.out or "plots")
    prov_base = {"seed": args.seed} if args.seed is not None else {}
    jobs = []
    if args.trajectory:
        header, data = read_numeric_table(args.trajectory)
        if header[0] != "t" or len(header) < 2:
            raise MalformedTable(f"{args.trajectory}: expected header t,x1,...")
        jobs.append(("timeseries", args.trajectory, data))
    if args.pentacle:
        header, data = read_numeric_table(args.pentacle)
        if header != ["t", "y1", "y2"]:
            raise MalformedTable(f"{args.pentacle}: expected header t,y1,y2")
        jobs.append(("pentacle", args.pentacle, data))
    with _Staging(str(out)) as dest:
        for kind, src, data in jobs:
            prov = dict(prov_base, source=Path(src).name,
                        sha256=hashlib.sha256(Path(src).read_bytes()).hexdigest()[:16])
            if kind == "timeseries":
                log = True if args.log is None else args.log
                name = "timeseries.svg" if log else "timeseries_linear.svg"
                plot_timeseries(data[:, 0], data[:, 1:], dest / name, log=log, provenance=prov)
            else:
                plot_pentacle(data[:, 0], data[:, 1:], dest / "pentacle.svg",
                              transient=args.transient, provenance=prov)
    print(f"wrote {out}")
    return EXIT_OK


# ---------------------------------------------------------------- parser

def _u64(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _add_common(p, scenario=True):
    p.add_argument("--preset", help="built-in parameter set, e.g. gh or ks-b")
    if scenario:
        p.add_argument("--scenario", help="scenario file (YAML)")
    p.add_argument("--seed", type=_u64)
    p.add_argument("--out", help="output directory")
    p.add_argument("--tmax", type=float)
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--log", dest="log", action="store_true", default=None)
    mode.add_argument("--linear", dest="log", action="store_false")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="hetnet", description="Heteroclinic network simulation and classification.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("presets", help="list built-in parameter sets")

    p = sub.add_parser("indices", help="rho and nu stability indices")
    p.add_argument("--preset")
    p.add_argument("--params", help="comma list key=value naming every coefficient")
    p.add_argument("--out")

    p = sub.add_parser("simulate", help="integrate one scenario and write tables")
    _add_common(p)

    p = sub.add_parser("classify", help="Monte Carlo stability and visibility verdicts")
    _add_common(p)
    p.add_argument("--target", action="append",
                   help="network, a cycle like 124, or element ids; repeatable")
    p.add_argument("--delta", help="comma separated delta ladder")
    p.add_argument("--epsilon", type=float)
    p.add_argument("--samples", type=int, help="samples per delta")

    p = sub.add_parser("plot", help="render stored tables as SVG")
    p.add_argument("--trajectory")
    p.add_argument("--pentacle")
    p.add_argument("--transient", type=float, default=0.0)
    p.add_argument("--out")
    p.add_argument("--seed", type=_u64)
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--log", dest="log", action="store_true", default=None)
    mode.add_argument("--linear", dest="log", action="store_false")
    return ap


COMMANDS = {
    "presets": cmd_presets,
    "indices": cmd_indices,
    "simulate": cmd_simulate,
    "classify": cmd_classify,
    "plot": cmd_plot,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ScenarioError, KeyError, MalformedTable, FileNotFoundError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"hetnet: error: {msg}", file=sys.stderr)
        return EXIT_USAGE
    except StageError as exc:
        if isinstance(exc.cause, (ScenarioError, ModelError, KeyError, FileNotFoundError)):
            print(f"hetnet: error in {exc.stage}: {exc.cause}", file=sys.stderr)
            return EXIT_USAGE
        print(f"hetnet: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except BatchFailed as exc:
        print(f"hetnet: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (IntegrationError, VisibilityError, ModelError, FloatingPointError) as exc:
        print(f"hetnet: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
