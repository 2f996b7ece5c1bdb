import json

from hetnet import golden
from hetnet.golden import GOLDEN_CASES, GoldenCase, run_golden
from hetnet.visibility import Mode, Prefix, VisibilityConfig


def test_case_matching():
    c = GoldenCase("gh", "123", Mode.ASYMPTOTICALLY_VISIBLE, Prefix.ALMOST)
    assert c.matches("AsymptoticallyVisible", "almost")
    assert not c.matches("AsymptoticallyVisible", "fragmentarily")
    assert GoldenCase("gh", "123", Mode.LYAPUNOV_VISIBLE).matches("LyapunovVisible", "plain")
    assert len({c.key for c in GOLDEN_CASES}) == len(GOLDEN_CASES)


def test_cache_is_reused(tmp_path, monkeypatch):
    calls = []

    def fake(case, cfg):
        calls.append(case.key)
        return {"mode": "NotVisible", "prefix": "none"}

    monkeypatch.setattr(golden, "run_case", fake)
    cfg = VisibilityConfig(samples_per_delta=3, delta_ladder=(1e-2, 1e-3))
    cache = tmp_path / "g.json"
    cases = GOLDEN_CASES[:2]
    first = run_golden(cfg, cache, cases)
    assert calls == [c.key for c in cases]
    second = run_golden(cfg, cache, cases)
    assert second == first and len(calls) == 2
    # a different configuration must not reuse the stored results
    run_golden(VisibilityConfig(samples_per_delta=4, delta_ladder=(1e-2, 1e-3)), cache, cases)
    assert len(calls) == 4
    assert json.loads(cache.read_text())["key"]["config"]["samples_per_delta"] == 4
