import numpy as np
import pytest

from hetnet.integrator import IntegratorOptions, Termination, Trajectory, integrate
from hetnet.visibility import (
    Exclusions,
    Mode,
    Prefix,
    SampleRecord,
    TrajectoryTooShort,
    TrajectoryVerdict,
    VisibilityConfig,
    choose_mode,
    classify_trajectory,
    prefix_for,
    sample_neighborhood,
    verdict_from_records,
    visibility_verdict,
)

CFG = VisibilityConfig()


def test_config_validation():
    with pytest.raises(ValueError):
        VisibilityConfig(delta_ladder=(1e-3, 1e-2))
    with pytest.raises(ValueError):
        VisibilityConfig(delta_ladder=(1e-2,))
    with pytest.raises(ValueError):
        VisibilityConfig(epsilon=0.005)
    with pytest.raises(ValueError):
        VisibilityConfig(recurrence_count=1)
    with pytest.raises(ValueError):
        VisibilityConfig(transient_T=6000)


def test_sample_neighborhood(gh_geometry):
    pts = sample_neighborhood(gh_geometry, 0.01, 100, seed=1)
    assert pts.shape == (100, 3)
    d = gh_geometry.distances(pts)
    assert np.all((d > 0) & (d < 0.01))
    assert np.all(pts > 0)
    offsets = np.sort(d)
    assert offsets[0] < 1e-3  # log-uniform magnitudes reach well below delta
    with pytest.raises(ValueError):
        sample_neighborhood(gh_geometry, 0.0, 10)


def test_ks_b_switcher_converges_to_124_without_staying(ks_b, ks_b_geometry):
    tr = integrate(ks_b, np.array([0.01, 1.0, 0.01, 1e-18]), IntegratorOptions(t_max=5000))
    v = classify_trajectory(tr, ks_b_geometry.cycle([1, 2, 4]), CFG)
    assert v.converged
    assert not v.stayed_within_epsilon
    assert v.covered_elements == set(ks_b_geometry.cycle([1, 2, 4]).element_ids)


def test_gh_resonance_stays_without_converging(gh_resonant_geometry):
    from hetnet.models import preset_model

    m = preset_model("gh-resonant")
    x0 = sample_neighborhood(gh_resonant_geometry, 1e-4, 1, seed=2)[0]
    tr = integrate(m, x0, IntegratorOptions(t_max=5000))
    v = classify_trajectory(tr, gh_resonant_geometry, CFG)
    assert v.stayed_within_epsilon
    assert not v.converged
    assert v.modes(gh_resonant_geometry)[Mode.LYAPUNOV_VISIBLE]


def test_short_trajectory_rejected(gh, gh_geometry):
    tr = integrate(gh, np.array([0.7, 0.1, 0.05]), IntegratorOptions(t_max=600))
    with pytest.raises(TrajectoryTooShort):
        classify_trajectory(tr, gh_geometry, CFG)


def test_escape_flags(gh_geometry):
    times = np.linspace(0, 10, 5)
    states = np.tile([1.0, 0.0, 0.0], (5, 1))
    tr = Trajectory(times, states, Termination.ESCAPE, 1e-10)
    v = classify_trajectory(tr, gh_geometry, CFG)
    assert v.escaped and not v.stayed_within_epsilon and not v.converged


def _record(delta, modes):
    r = SampleRecord(delta, 0, [0.0])
    r.modes = {m.value: modes.get(m, False) for m in Mode if m is not Mode.NOT_VISIBLE}
    r.verdict = TrajectoryVerdict(set(), False, False, False, False, set())
    return r


def test_prefixes():
    none = Exclusions.NONE
    sub = Exclusions.INVARIANT_SUBSPACES
    assert prefix_for({1e-2: 1.0, 1e-3: 1.0}, none) is Prefix.PLAIN
    assert prefix_for({1e-2: 1.0, 1e-3: 1.0}, sub) is Prefix.ALMOST
    assert prefix_for({1e-2: 0.9, 1e-3: 1.0}, sub) is Prefix.ALMOST
    assert prefix_for({1e-2: 0.9, 1e-3: 0.96}, sub) is Prefix.ESSENTIALLY
    assert prefix_for({1e-2: 0.9, 1e-3: 0.5}, sub) is Prefix.FRAGMENTARILY
    assert prefix_for({1e-2: 0.9, 1e-3: 0.0}, sub) is Prefix.NONE


def _verdict(records):
    from hetnet.analysis.geometry import NetworkGeometry
    from hetnet.models import equilibrium, make_generic_model

    g = NetworkGeometry((equilibrium(make_generic_model(np.zeros((3, 3))), 1),), {}, "x")
    return verdict_from_records(records, g, VisibilityConfig(delta_ladder=(1e-2, 1e-3)))


A_ALL = {Mode.ASYMPTOTICALLY_VISIBLE: True, Mode.LYAPUNOV_VISIBLE: True,
         Mode.QUASI_VISIBLE: True, Mode.VISIBLE: True}


def test_best_prefix_beats_stronger_mode():
    q = {Mode.QUASI_VISIBLE: True, Mode.VISIBLE: True}
    v = _verdict([_record(d, A_ALL if i % 2 else q) for d in (1e-2, 1e-3) for i in range(4)])
    assert (v.mode, v.prefix) == (Mode.QUASI_VISIBLE, Prefix.ALMOST)
    assert v.mode_prefixes["AsymptoticallyVisible"] == "fragmentarily"


def test_strongest_mode_among_equal_prefixes():
    v = _verdict([_record(d, A_ALL if i % 2 else {}) for d in (1e-2, 1e-3) for i in range(4)])
    assert (v.mode, v.prefix) == (Mode.ASYMPTOTICALLY_VISIBLE, Prefix.FRAGMENTARILY)


def test_not_visible_when_nothing_holds():
    prefixes = {m: Prefix.NONE for m in Mode if m is not Mode.NOT_VISIBLE}
    assert choose_mode(prefixes) == (Mode.NOT_VISIBLE, Prefix.NONE)


def test_small_batch_is_deterministic(gh, gh_geometry):
    cfg = VisibilityConfig(samples_per_delta=2, t_max=1200, delta_ladder=(1e-3, 1e-4), rng_seed=9)
    a = visibility_verdict(gh, gh_geometry, ["1->2", "2->3", "3->1"], cfg)
    b = visibility_verdict(gh, gh_geometry, ["1->2", "2->3", "3->1"], cfg)
    assert a.to_dict() == b.to_dict()
    assert a.mode is Mode.ASYMPTOTICALLY_VISIBLE
    assert a.stability_modes["quasi_asymptotic_consistent"]
