import numpy as np
import pytest

from hetnet.analysis.itinerary import (
    Episode,
    Itinerary,
    NoEvents,
    TooFewEpisodes,
    WrongDimension,
    classify_edges,
    cycle_signature,
    extract_itinerary,
    loop_durations,
    residence_ratios,
    rpssl_edge_type,
)
from hetnet.integrator import Event, IntegratorOptions, Termination, Trajectory, integrate_with_equilibrium_events


def fake_traj(events, t_end=10.0, n=3):
    times = np.linspace(0, t_end, 11)
    return Trajectory(times, np.zeros((11, n)), Termination.TIME_LIMIT, 1e-10, events=events)


def test_extract_and_merge_grazes():
    ev = [Event("enter", 0.0, 1), Event("exit", 2.0, 1),
          Event("enter", 2.1, 1), Event("exit", 3.0, 1),  # same ball again: merged
          Event("enter", 4.0, 2), Event("exit", 4.1, 2),  # graze: dropped
          Event("enter", 5.0, 3)]
    it = extract_itinerary(fake_traj(ev), min_duration=0.5)
    assert it.sequence == [1, 3]
    assert it.episodes[0] == Episode(1, 0.0, 3.0)
    assert it.episodes[-1].t_exit == 10.0


def test_no_events():
    with pytest.raises(NoEvents):
        extract_itinerary(fake_traj([]))


def test_loop_durations_and_ratios():
    eps = [Episode(j, t, t + 0.5) for j, t in zip([1, 2, 3] * 4, np.cumsum([1, 1, 1, 2, 2, 2, 4, 4, 4, 8, 8, 8]))]
    it = Itinerary(eps)
    np.testing.assert_allclose(loop_durations(it, anchor=1), [4, 8, 16])
    np.testing.assert_allclose(residence_ratios(it, anchor=1), [2, 2])
    with pytest.raises(TooFewEpisodes):
        loop_durations(Itinerary(eps[:2]))


def test_cycle_signature():
    assert cycle_signature("AABBBAABBB") == 5
    assert cycle_signature("AAAAA") == 1
    assert cycle_signature("AABAABAAB") == 3
    assert cycle_signature("AABBBAAB") is None  # fewer than two full periods
    assert cycle_signature("ABBBAAIBBBBAABBBB") is None


def test_rpssl_edge_types():
    assert rpssl_edge_type(0, 1) == "A"
    assert rpssl_edge_type(0, 3) == "B"
    assert rpssl_edge_type(4, 0) == "A"
    assert rpssl_edge_type(0, 2) == "Other"


def test_ab_labels_need_five_dimensions(gh):
    tr = integrate_with_equilibrium_events(gh, np.array([0.7, 0.1, 0.05]), IntegratorOptions(t_max=100))
    it = extract_itinerary(tr)
    with pytest.raises(WrongDimension):
        classify_edges(it, tr, ab_labels=True)
    labelled = classify_edges(it, tr, gh)
    assert len(labelled.edge_labels) == len(it.episodes) - 1
    assert set(labelled.edge_labels) <= {"Other", "Interior"}


def test_gh_itinerary_cycles(gh):
    tr = integrate_with_equilibrium_events(gh, np.array([0.7, 0.1, 0.05]), IntegratorOptions(t_max=300))
    seq = extract_itinerary(tr).sequence
    tail = seq[-9:]
    assert all((b - a) % 3 == 1 for a, b in zip(tail, tail[1:]))
