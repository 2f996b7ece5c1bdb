"""Polyline approximations of heteroclinic networks and distance queries."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numba
import numpy as np
from scipy.special import logsumexp

from ..integrator import NoConnection, connection_polyline
from ..models import Equilibrium, NetworkModel, equilibrium


class WrongDimension(ValueError):
    pass


@numba.njit(cache=True, nogil=True)
def _seg_dist2(p, a, b):
    n = p.shape[0]
    ab2 = 0.0
    ap_ab = 0.0
    for i in range(n):
        d = b[i] - a[i]
        ab2 += d * d
        ap_ab += (p[i] - a[i]) * d
    s = 0.0
    if ab2 > 0.0:
        s = min(1.0, max(0.0, ap_ab / ab2))
    acc = 0.0
    for i in range(n):
        q = p[i] - (a[i] + s * (b[i] - a[i]))
        acc += q * q
    return acc


@numba.njit(cache=True, nogil=True)
def _min_dist(points, seg_a, seg_b, nodes):
    m = points.shape[0]
    out = np.empty(m)
    for r in range(m):
        best = np.inf
        p = points[r]
        for s in range(seg_a.shape[0]):
            d = _seg_dist2(p, seg_a[s], seg_b[s])
            if d < best:
                best = d
        for s in range(nodes.shape[0]):
            acc = 0.0
            for i in range(p.shape[0]):
                q = p[i] - nodes[s, i]
                acc += q * q
            if acc < best:
                best = acc
        out[r] = math.sqrt(best)
    return out


@numba.njit(cache=True, nogil=True)
def _visits(targets, path, eps):
    """For every target point, the number of separate approaches of the path
    (as a chain of segments) to within eps.

    A segment at distance d > eps from the target rules out the next d - eps
    of arclength, so far-away stretches are skipped by bisection on the
    cumulative arclength.
    """
    nt = targets.shape[0]
    nseg = path.shape[0] - 1
    counts = np.zeros(nt, dtype=np.int64)
    if nseg < 1:
        return counts
    cum = np.zeros(path.shape[0])
    for s in range(nseg):
        acc = 0.0
        for i in range(path.shape[1]):
            q = path[s + 1, i] - path[s, i]
            acc += q * q
        cum[s + 1] = cum[s] + math.sqrt(acc)
    eps2 = eps * eps
    for t in range(nt):
        inside = False
        s = 0
        while s < nseg:
            d2 = _seg_dist2(targets[t], path[s], path[s + 1])
            near = d2 < eps2
            if near and not inside:
                counts[t] += 1
            inside = near
            nxt = s + 1
            if not near:
                reach = cum[s + 1] + math.sqrt(d2) - eps
                far = np.searchsorted(cum, reach, side="right") - 1
                if far > nxt:
                    nxt = far
            s = nxt
    return counts


_CHUNK = 16


def _chunk_spheres(seg_a, seg_b, size=_CHUNK):
    """Bounding sphere of each run of ``size`` consecutive segments."""
    nseg = len(seg_a)
    starts = np.arange(0, nseg, size)
    centres = np.empty((len(starts), seg_a.shape[1]))
    radii = np.empty(len(starts))
    for c, s in enumerate(starts):
        ends = np.vstack([seg_a[s:s + size], seg_b[s:s + size]])
        centres[c] = ends.mean(axis=0)
        radii[c] = np.linalg.norm(ends - centres[c], axis=1).max()
    return np.ascontiguousarray(centres), radii


@numba.njit(cache=True, nogil=True)
def _nearest2(p, seg_a, seg_b, nodes, centres, radii, size, lb):
    """Squared distance from ``p`` and the index of the closest segment
    (-1 - k for node k).  Chunks are visited by increasing sphere lower
    bound and the scan stops once no chunk can beat the best."""
    nseg = seg_a.shape[0]
    best = np.inf
    arg = -1
    for s in range(nodes.shape[0]):
        acc = 0.0
        for i in range(p.shape[0]):
            q = p[i] - nodes[s, i]
            acc += q * q
        if acc < best:
            best = acc
            arg = -1 - s
    for c in range(centres.shape[0]):
        acc = 0.0
        for i in range(p.shape[0]):
            q = p[i] - centres[c, i]
            acc += q * q
        lb[c] = math.sqrt(acc) - radii[c]
    for c in np.argsort(lb):
        if lb[c] > 0.0 and lb[c] * lb[c] >= best:
            break
        for s in range(c * size, min((c + 1) * size, nseg)):
            d = _seg_dist2(p, seg_a[s], seg_b[s])
            if d < best:
                best = d
                arg = s
    return best, arg


@numba.njit(cache=True, nogil=True)
def _element_dist2(p, arg, seg_a, seg_b, nodes):
    if arg >= 0:
        return _seg_dist2(p, seg_a[arg], seg_b[arg])
    acc = 0.0
    for i in range(p.shape[0]):
        q = p[i] - nodes[-1 - arg, i]
        acc += q * q
    return acc


@numba.njit(cache=True, nogil=True)
def _min_dist_pruned(points, seg_a, seg_b, nodes, centres, radii, size):
    out = np.empty(points.shape[0])
    lb = np.empty(centres.shape[0])
    for r in range(points.shape[0]):
        best, _ = _nearest2(points[r], seg_a, seg_b, nodes, centres, radii, size, lb)
        out[r] = math.sqrt(best)
    return out


@numba.njit(cache=True, nogil=True)
def _suffix_max_dist(points, starts, seg_a, seg_b, nodes, centres, radii, size):
    """max distance over points[s:] for each s in ``starts`` (ascending).

    Walks backwards keeping the running maximum.  The element nearest to the
    last exactly measured point bounds the next distance from above, so a
    point is only measured when that bound could raise the maximum."""
    m = points.shape[0]
    out = np.full(starts.shape[0], -np.inf)
    lb = np.empty(centres.shape[0])
    run = -np.inf
    arg = 0
    have = False
    k = starts.shape[0] - 1
    while k >= 0 and starts[k] >= m:
        k -= 1
    for r in range(m - 1, -1, -1):
        p = points[r]
        if not have or _element_dist2(p, arg, seg_a, seg_b, nodes) > run:
            d2, arg = _nearest2(p, seg_a, seg_b, nodes, centres, radii, size, lb)
            have = True
            if d2 > run:
                run = d2
        while k >= 0 and starts[k] == r:
            out[k] = run
            k -= 1
    for i in range(out.shape[0]):
        out[i] = math.sqrt(out[i]) if out[i] >= 0.0 else out[i]
    return out


def edge_id(i: int, j: int) -> str:
    return f"{i}->{j}"


@dataclass(frozen=True)
class NetworkGeometry:
    equilibria: tuple[Equilibrium, ...]
    polylines: dict[str, np.ndarray] = field(repr=False)
    name: str = ""

    def __post_init__(self):
        segs_a, segs_b = [], []
        for poly in self.polylines.values():
            poly = _thin(poly)
            segs_a.append(poly[:-1])
            segs_b.append(poly[1:])
        n = self.n
        a = np.ascontiguousarray(np.vstack(segs_a)) if segs_a else np.zeros((0, n))
        b = np.ascontiguousarray(np.vstack(segs_b)) if segs_b else np.zeros((0, n))
        nodes = np.array([e.coordinates for e in self.equilibria], dtype=float).reshape(-1, n)
        object.__setattr__(self, "_seg_a", a)
        object.__setattr__(self, "_seg_b", b)
        object.__setattr__(self, "_nodes", np.ascontiguousarray(nodes))
        centres, radii = _chunk_spheres(a, b)
        object.__setattr__(self, "_centres", centres)
        object.__setattr__(self, "_radii", radii)

    @property
    def n(self) -> int:
        if self.equilibria:
            return len(self.equilibria[0].coordinates)
        return next(iter(self.polylines.values())).shape[1]

    @property
    def element_ids(self) -> list[str]:
        return [e.label for e in self.equilibria] + list(self.polylines)

    @property
    def edges(self) -> list[tuple[int, int]]:
        return [tuple(int(v) for v in k.split("->")) for k in self.polylines]

    def subset(self, elements, name: str = "") -> "NetworkGeometry":
        """Sub-geometry holding the listed equilibria labels ("xi1") and edge
        ids ("1->2").  Edge endpoints are included automatically."""
        elements = list(elements)
        polys = {k: v for k, v in self.polylines.items() if k in elements}
        missing = [e for e in elements
                   if e not in polys and e not in {q.label for q in self.equilibria}]
        if missing:
            raise KeyError(f"unknown network elements: {missing}")
        wanted = {e for e in elements if e.startswith(("xi", "-xi"))}
        for k in polys:
            i, j = k.split("->")
            wanted.update({f"xi{i}", f"xi{j}"})
        eqs = tuple(e for e in self.equilibria if e.label in wanted)
        return NetworkGeometry(eqs, polys, name or "+".join(elements))

    def cycle(self, nodes, name: str = "") -> "NetworkGeometry":
        nodes = list(nodes)
        ids = [edge_id(a, b) for a, b in zip(nodes, nodes[1:] + nodes[:1])]
        return self.subset(ids, name or "-".join(f"xi{v}" for v in nodes))

    def distances(self, points) -> np.ndarray:
        pts = np.ascontiguousarray(np.atleast_2d(np.asarray(points, dtype=float)))
        return _min_dist_pruned(pts, self._seg_a, self._seg_b, self._nodes,
                                self._centres, self._radii, _CHUNK)

    def suffix_max_distances(self, points, starts) -> np.ndarray:
        """``[distances(points[s:]).max() for s in starts]``, -inf for empty
        suffixes, without measuring every point."""
        pts = np.ascontiguousarray(np.atleast_2d(np.asarray(points, dtype=float)))
        starts = np.asarray(starts, dtype=np.int64)
        order = np.argsort(starts, kind="stable")
        res = _suffix_max_dist(pts, np.ascontiguousarray(starts[order]), self._seg_a,
                               self._seg_b, self._nodes, self._centres, self._radii, _CHUNK)
        out = np.empty_like(res)
        out[order] = res
        return out

    def log_transverse(self, log_abs: np.ndarray) -> np.ndarray:
        """ln of the distance to the union of the coordinate planes that carry
        the stored edges, from ln|x| rows.  Unlike the polyline distance this
        has no discretisation floor and does not underflow."""
        log_abs = np.atleast_2d(log_abs)
        if not self.polylines:
            return np.log(self.distances(np.exp(log_abs)))
        n = log_abs.shape[1]
        best = np.full(len(log_abs), -np.inf)
        for k, (i, j) in enumerate(self.edges):
            off = [c for c in range(n) if c not in (i - 1, j - 1)]
            val = 0.5 * logsumexp(2.0 * log_abs[:, off], axis=1)
            best = val if k == 0 else np.minimum(best, val)
        return best

    def coverage_targets(self, spacing: float) -> dict[str, np.ndarray]:
        """Equilibria plus polyline points resampled at roughly ``spacing``."""
        out = {e.label: np.asarray(e.coordinates, dtype=float)[None, :] for e in self.equilibria}
        for k, poly in self.polylines.items():
            out[k] = resample(poly, spacing)
        return out

    def sample_base_points(self, rng: np.random.Generator, count: int) -> np.ndarray:
        """Points drawn uniformly by arclength over the stored set."""
        pieces = [np.linalg.norm(self._seg_b - self._seg_a, axis=1)]
        lengths = pieces[0]
        total = lengths.sum()
        if total == 0:
            idx = rng.integers(0, len(self._nodes), size=count)
            return self._nodes[idx].copy()
        cdf = np.cumsum(lengths) / total
        u = rng.random(count)
        seg = np.minimum(np.searchsorted(cdf, u, side="right"), len(lengths) - 1)
        frac = rng.random(count)
        return self._seg_a[seg] + frac[:, None] * (self._seg_b[seg] - self._seg_a[seg])


def _thin(poly: np.ndarray, ratio: float = 0.25) -> np.ndarray:
    """Drop vertices closer than ``ratio`` times the longest segment to the
    last kept one.  Integration leaves runs of tiny steps near equilibria,
    which would otherwise crowd the nearest-neighbour candidates."""
    if len(poly) < 3:
        return poly
    min_len = ratio * float(np.linalg.norm(np.diff(poly, axis=0), axis=1).max())
    keep = [0]
    for i in range(1, len(poly) - 1):
        if np.linalg.norm(poly[i] - poly[keep[-1]]) >= min_len:
            keep.append(i)
    keep.append(len(poly) - 1)
    return poly[keep]


def resample(poly: np.ndarray, spacing: float) -> np.ndarray:
    seg = np.linalg.norm(np.diff(poly, axis=0), axis=1)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    total = s[-1]
    if total == 0:
        return poly[:1].copy()
    k = max(int(math.ceil(total / spacing)), 1)
    grid = np.linspace(0.0, total, k + 1)
    return np.column_stack([np.interp(grid, s, poly[:, i]) for i in range(poly.shape[1])])


def distance_to_network(x, g: NetworkGeometry) -> float:
    return float(g.distances(np.asarray(x, dtype=float)[None, :])[0])


def build_network_geometry(
    m: NetworkModel, edges, seed_offset: float = 1e-6, spacing: float = 0.01, name: str = ""
) -> NetworkGeometry:
    """Equilibria and in-plane connecting orbits for the requested directed
    edges, given as 1-based index pairs."""
    edges = [tuple(int(v) for v in e) for e in edges]
    nodes = sorted({v for e in edges for v in e})
    eqs = {j: equilibrium(m, j) for j in nodes}
    polys = {}
    for i, j in edges:
        try:
            polys[edge_id(i, j)] = connection_polyline(m, eqs[i], eqs[j], seed_offset, spacing=spacing)
        except NoConnection as exc:
            raise NoConnection(f"edge {edge_id(i, j)}: {exc}") from exc
    return NetworkGeometry(tuple(eqs[j] for j in nodes), polys, name or m.name)


GH_EDGES = [(1, 2), (2, 3), (3, 1)]
KS_EDGES = [(1, 2), (2, 3), (3, 1), (2, 4), (4, 1)]
RPSSL_A_EDGES = [(j, j % 5 + 1) for j in range(1, 6)]
RPSSL_B_EDGES = [(j, (j - 3) % 5 + 1) for j in range(1, 6)]
RPSSL_EDGES = RPSSL_A_EDGES + RPSSL_B_EDGES


def default_edges(m: NetworkModel) -> list[tuple[int, int]]:
    """All directed edges (i, j) whose plane carries a connection: expanding
    at xi_i towards x_j and contracting at xi_j in x_i."""
    out = []
    for i in range(m.n):
        for j in range(m.n):
            if i != j and m.a[i, j] > 0 and m.a[j, i] < 0:
                out.append((i + 1, j + 1))
    return out


_ANGLES = 2.0 * np.pi * np.arange(1, 6) / 5.0
PENTACLE = np.vstack([np.cos(_ANGLES), np.sin(_ANGLES)])


def pentacle_project(x) -> np.ndarray:
    """Project 5-vectors onto the plane with xi_j at angle 2 pi j / 5.

    Accepts one state or an array of states (last axis of length 5).  xi_5
    lands on (1, 0) and xi_1 on (cos 72deg, sin 72deg).
    """
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != 5:
        raise WrongDimension(f"pentacle projection needs 5 coordinates, got {x.shape[-1]}")
    return x @ PENTACLE.T
