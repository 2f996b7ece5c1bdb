"""The eleven reference visibility classifications and a cached runner.

A full run (K = 200 samples per delta, eleven targets) takes a while, so results
are stored as JSON next to a key built from the configuration and a hash of
the package sources.  Any code change invalidates the cache.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import asdict, dataclass
from pathlib import Path

from .analysis import GH_EDGES, KS_EDGES, build_network_geometry
from .models import preset_model
from .visibility import Mode, Prefix, VisibilityConfig, visibility_verdict


@dataclass(frozen=True)
class GoldenCase:
    preset: str
    target: str  # cycle digits, or "network"
    mode: Mode
    prefix: Prefix | None = None  # None: any prefix accepted

    @property
    def key(self) -> str:
        return f"{self.preset}:{self.target}"

    def matches(self, mode: str, prefix: str) -> bool:
        if mode != self.mode.value:
            return False
        return self.prefix is None or prefix == self.prefix.value

    @property
    def expected(self) -> str:
        return self.mode.value + (f" ({self.prefix.value})" if self.prefix else "")


A, L, Q, V, N = (Mode.ASYMPTOTICALLY_VISIBLE, Mode.LYAPUNOV_VISIBLE, Mode.QUASI_VISIBLE,
                 Mode.VISIBLE, Mode.NOT_VISIBLE)

GOLDEN_CASES = (
    GoldenCase("gh", "123", A, Prefix.ALMOST),
    GoldenCase("gh-resonant", "123", L),
    GoldenCase("ks-a", "123", A, Prefix.FRAGMENTARILY),
    GoldenCase("ks-a", "124", A, Prefix.FRAGMENTARILY),
    GoldenCase("ks-a", "network", N, Prefix.NONE),
    GoldenCase("ks-b", "124", Q),
    GoldenCase("ks-b", "123", N, Prefix.NONE),
    GoldenCase("ks-c", "123", A, Prefix.FRAGMENTARILY),
    GoldenCase("ks-c", "124", L, Prefix.FRAGMENTARILY),
    GoldenCase("ks-d", "123", N, Prefix.NONE),
    GoldenCase("ks-d", "124", V, Prefix.FRAGMENTARILY),
)


def source_hash() -> str:
    h = hashlib.sha256()
    for path in sorted(Path(__file__).parent.rglob("*.py")):
        h.update(path.relative_to(Path(__file__).parent).as_posix().encode())
        h.update(path.read_bytes())
    return h.hexdigest()[:16]


def _config_dict(cfg: VisibilityConfig) -> dict:
    d = asdict(cfg)
    d["exclusions"] = cfg.exclusions.value
    d.pop("workers", None)
    return d


def run_case(case: GoldenCase, cfg: VisibilityConfig) -> dict:
    m = preset_model(case.preset)
    g = build_network_geometry(m, GH_EDGES if case.preset.startswith("gh") else KS_EDGES)
    X = g.subset(g.element_ids, name="network") if case.target == "network" else \
        g.cycle([int(c) for c in case.target])
    t0 = time.perf_counter()
    v = visibility_verdict(m, g, X, cfg)
    return {
        "mode": v.mode.value,
        "prefix": v.prefix.value,
        "mode_fractions": {k: {str(d): f for d, f in fr.items()} for k, fr in v.mode_fractions.items()},
        "mode_prefixes": v.mode_prefixes,
        "stability_modes": v.stability_modes,
        "failures": v.failures,
        "seconds": round(time.perf_counter() - t0, 1),
    }


def run_golden(cfg: VisibilityConfig, cache: Path | None = None, cases=GOLDEN_CASES,
               log=None) -> dict[str, dict]:
    """Verdict summaries per case key, reusing ``cache`` when its key matches."""
    # round-trip so tuples compare equal to the lists read back from disk
    key = json.loads(json.dumps({"config": _config_dict(cfg), "source": source_hash()}))
    stored = {}
    if cache is not None and Path(cache).exists():
        data = json.loads(Path(cache).read_text())
        if data.get("key") == key:
            stored = data["results"]
    results = {}
    for case in cases:
        if case.key not in stored:
            stored[case.key] = run_case(case, cfg)
            if log:
                r = stored[case.key]
                log(f"{case.key}: {r['mode']} ({r['prefix']}) in {r['seconds']} s")
            if cache is not None:
                Path(cache).parent.mkdir(parents=True, exist_ok=True)
                Path(cache).write_text(json.dumps({"key": key, "results": stored}, indent=1))
        results[case.key] = stored[case.key]
    return results
