from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from ..integrator import Trajectory
from ..models import NetworkModel
from .geometry import WrongDimension


class ItineraryError(ValueError):
    pass


class NoEvents(ItineraryError):
    pass


class TooFewEpisodes(ItineraryError):
    pass


EDGE_LABELS = ("A", "B", "Interior", "Other")


@dataclass(frozen=True)
class Episode:
    equilibrium: int  # signed 1-based axis index: -2 means -xi2
    t_enter: float
    t_exit: float

    @property
    def duration(self) -> float:
        return self.t_exit - self.t_enter

    @property
    def name(self) -> str:
        return f"{'-' if self.equilibrium < 0 else ''}xi{abs(self.equilibrium)}"


@dataclass
class Itinerary:
    episodes: list[Episode]
    edge_labels: list[str] = field(default_factory=list)
    source: str = ""

    @property
    def sequence(self) -> list[int]:
        return [e.equilibrium for e in self.episodes]

    def edges(self) -> list[tuple[int, int]]:
        seq = self.sequence
        return list(zip(seq[:-1], seq[1:]))

    def label_string(self) -> str:
        return "".join("I" if lab == "Interior" else "O" if lab == "Other" else lab
                       for lab in self.edge_labels)

    def after(self, t: float) -> "Itinerary":
        keep = [i for i, e in enumerate(self.episodes) if e.t_enter >= t]
        eps = [self.episodes[i] for i in keep]
        labels = []
        if self.edge_labels and keep:
            labels = self.edge_labels[keep[0]: keep[0] + len(eps) - 1]
        return Itinerary(eps, labels, self.source)


def extract_itinerary(traj: Trajectory, min_duration: float = 0.5) -> Itinerary:
    if not traj.events:
        raise NoEvents("trajectory carries no equilibrium events")
    t_end = float(traj.times[-1])
    open_: dict[int, float] = {}
    raw: list[Episode] = []
    for ev in traj.events:
        key = ev.equilibrium * ev.sign
        if ev.kind == "enter":
            open_[key] = ev.time
        elif key in open_:
            raw.append(Episode(key, open_.pop(key), ev.time))
    for key, t0 in open_.items():
        if t_end > t0:
            raw.append(Episode(key, t0, t_end))
    raw.sort(key=lambda e: e.t_enter)
    episodes: list[Episode] = []
    for ep in raw:
        if ep.duration < min_duration:
            continue
        if episodes and episodes[-1].equilibrium == ep.equilibrium:
            # a graze outside the ball split one visit in two
            episodes[-1] = Episode(ep.equilibrium, episodes[-1].t_enter, ep.t_exit)
        else:
            episodes.append(ep)
    return Itinerary(episodes, source=traj.label)


def rpssl_edge_type(i: int, j: int, n: int = 5) -> str:
    if (j - i) % n == 1:
        return "A"
    if (j - i) % n == n - 2:
        return "B"
    return "Other"


def classify_edges(
    it: Itinerary,
    traj: Trajectory,
    m: NetworkModel | None = None,
    interior_threshold: float = 0.05,
    ab_labels: bool | None = None,
) -> Itinerary:
    """Label each transition between consecutive episodes.

    A/B typing is used for five-dimensional models.  A transition is marked
    Interior when at least three coordinates simultaneously exceed
    ``interior_threshold`` somewhere between the two episodes.
    """
    n = traj.n if m is None else m.n
    if ab_labels is None:
        ab_labels = n == 5
    if ab_labels and n != 5:
        raise WrongDimension("A/B edge types need a five-dimensional model")
    big = (np.abs(traj.states) > interior_threshold).sum(axis=1) >= 3
    labels = []
    for prev, nxt in zip(it.episodes[:-1], it.episodes[1:]):
        lo = np.searchsorted(traj.times, prev.t_exit, side="left")
        hi = np.searchsorted(traj.times, nxt.t_enter, side="right")
        if hi > lo and big[lo:hi].any():
            labels.append("Interior")
        elif ab_labels:
            labels.append(rpssl_edge_type(abs(prev.equilibrium) - 1, abs(nxt.equilibrium) - 1))
        else:
            labels.append("Other")
    return Itinerary(list(it.episodes), labels, it.source)


def loop_durations(it: Itinerary, anchor: int | None = None) -> np.ndarray:
    """Times between successive entries to the anchor equilibrium."""
    if len(it.episodes) < 3:
        raise TooFewEpisodes(f"need at least 3 episodes, got {len(it.episodes)}")
    if anchor is None:
        counts = Counter(it.sequence)
        anchor = max(counts, key=lambda k: (counts[k], -abs(k)))
    starts = np.array([e.t_enter for e in it.episodes if e.equilibrium == anchor])
    return np.diff(starts)


def residence_ratios(it: Itinerary, anchor: int | None = None) -> np.ndarray:
    d = loop_durations(it, anchor)
    if len(d) < 2:
        raise TooFewEpisodes("need at least two complete loops for a ratio")
    return d[1:] / d[:-1]


def cycle_signature(labels, max_period: int = 20) -> int | None:
    """Smallest period p <= max_period with labels[i] == labels[i + p]
    throughout and at least two full repetitions, or None."""
    labels = list(labels)
    for p in range(1, max_period + 1):
        if len(labels) < 2 * p:
            break
        if all(labels[i] == labels[i + p] for i in range(len(labels) - p)):
            return p
    return None


def to_rows(it: Itinerary) -> list[tuple]:
    rows = []
    for i, ep in enumerate(it.episodes):
        label = it.edge_labels[i] if i < len(it.edge_labels) else ""
        rows.append((i, ep.name, ep.t_enter, ep.t_exit, label))
    return rows
