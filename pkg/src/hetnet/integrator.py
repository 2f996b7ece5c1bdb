"""Dormand-Prince 5(4) integration of network flows.

Orthant-restricted and sign-carrying cubic runs are integrated in log
coordinates u_j = ln|x_j|, where the field becomes
u_j' = 1 - chi + sum_k a[k, j] x_k^2.  Components that start at exactly zero
are frozen and never touched by the stepper, so invariant subspaces are kept
exactly.  Trajectories near heteroclinic cycles reach |x_j| ~ 1e-300 and far
below; in log coordinates this costs nothing.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numba
import numpy as np

from .models import Equilibrium, NetworkModel, vector_field


class IntegrationError(RuntimeError):
    pass


class InadmissibleInitialCondition(IntegrationError):
    pass


class NoConnection(IntegrationError):
    pass


class Termination(enum.Enum):
    TIME_LIMIT = "time-limit"
    STEP_UNDERFLOW = "step-underflow"
    ESCAPE = "escape"
    USER_STOP = "user-stop"


_STATUS = {
    0: Termination.TIME_LIMIT,
    1: Termination.STEP_UNDERFLOW,
    2: Termination.ESCAPE,
    3: Termination.USER_STOP,
}


@dataclass(frozen=True)
class IntegratorOptions:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    t_max: float = 500.0
    log_mode: bool = True
    floor: float = 1e-300
    max_steps: int = 2_000_000
    escape_radius: float = 10.0
    max_step: float = 2.0

    def __post_init__(self):
        for name in ("rel_tol", "abs_tol"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ValueError(f"{name} must lie in (0, 1), got {v}")
        if not self.t_max > 0:
            raise ValueError("t_max must be positive")
        if not 0.0 < self.floor < 1e-10:
            raise ValueError("floor must lie in (0, 1e-10)")
        if self.max_steps < 1 or self.escape_radius <= 0 or self.max_step <= 0:
            raise ValueError("max_steps, escape_radius and max_step must be positive")


@dataclass(frozen=True)
class Event:
    kind: str  # "enter" | "exit"
    time: float
    equilibrium: int  # 1-based axis index
    sign: int = 1


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    termination: Termination
    tolerance_used: float
    log_states: np.ndarray | None = field(default=None, repr=False)
    events: list[Event] = field(default_factory=list)
    label: str = ""

    @property
    def n(self) -> int:
        return self.states.shape[1]

    def __len__(self) -> int:
        return len(self.times)

    def log_abs(self) -> np.ndarray:
        """ln|x| per stored state, kept finite far below the float range when
        the run used log coordinates.  Components frozen at zero give -inf."""
        if self.log_states is not None:
            return np.where(self.states[0] == 0.0, -np.inf, self.log_states)
        with np.errstate(divide="ignore"):
            return np.log(np.abs(self.states))


# Dormand-Prince coefficients
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = np.zeros((7, 7))
_A[1, 0] = 1 / 5
_A[2, :2] = [3 / 40, 9 / 40]
_A[3, :3] = [44 / 45, -56 / 15, 32 / 9]
_A[4, :4] = [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]
_A[5, :5] = [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]
_A[6, :6] = [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]
_B = _A[6].copy()
_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])


@numba.njit(cache=True, nogil=True)
def _rhs(y, a, cubic, logmode, active, out):
    n = y.shape[0]
    sq = np.empty(n)
    chi = 0.0
    for k in range(n):
        if not active[k]:
            sq[k] = 0.0
        elif logmode:
            sq[k] = math.exp(2.0 * y[k]) if cubic else math.exp(y[k])
        else:
            sq[k] = y[k] * y[k] if cubic else y[k]
        chi += sq[k]
    for j in range(n):
        if not active[j]:
            out[j] = 0.0
            continue
        g = 1.0 - chi
        for k in range(n):
            g += a[k, j] * sq[k]
        out[j] = g if logmode else y[j] * g


@numba.njit(cache=True, nogil=True)
def _stages(y, h, a, cubic, logmode, active, k1, K, A, B, E, ynew, err):
    n = y.shape[0]
    tmp = np.empty(n)
    for i in range(n):
        K[0, i] = k1[i]
    for s in range(1, 7):
        for i in range(n):
            acc = 0.0
            for r in range(s):
                acc += A[s, r] * K[r, i]
            tmp[i] = y[i] + h * acc
        kout = np.empty(n)
        _rhs(tmp, a, cubic, logmode, active, kout)
        for i in range(n):
            K[s, i] = kout[i]
    for i in range(n):
        ynew[i] = tmp[i]  # stage 7 argument is the 5th-order solution
        acc = 0.0
        for s in range(7):
            acc += E[s] * K[s, i]
        err[i] = h * acc


@numba.njit(cache=True, nogil=True)
def _single_step(y, h, a, cubic, logmode, active, A, B, E):
    n = y.shape[0]
    k1 = np.empty(n)
    _rhs(y, a, cubic, logmode, active, k1)
    K = np.empty((7, n))
    ynew = np.empty(n)
    err = np.empty(n)
    _stages(y, h, a, cubic, logmode, active, k1, K, A, B, E, ynew, err)
    return ynew


@numba.njit(cache=True, nogil=True)
def _integrate(y0, a, cubic, logmode, active, t_max, rtol, atol, max_steps,
               escape_log, h_max, A, B, E):
    n = y0.shape[0]
    cap = 1024
    ts = np.empty(cap)
    ys = np.empty((cap, n))
    ts[0] = 0.0
    ys[0, :] = y0
    count = 1
    y = y0.copy()
    t = 0.0
    k1 = np.empty(n)
    _rhs(y, a, cubic, logmode, active, k1)
    K = np.empty((7, n))
    ynew = np.empty(n)
    err = np.empty(n)
    nactive = 0
    for i in range(n):
        if active[i]:
            nactive += 1
    if nactive == 0:
        nactive = 1

    # initial step (Hairer)
    d0 = 0.0
    d1 = 0.0
    for i in range(n):
        if active[i]:
            sc = atol + rtol * abs(y[i])
            d0 += (y[i] / sc) ** 2
            d1 += (k1[i] / sc) ** 2
    d0 = math.sqrt(d0 / nactive)
    d1 = math.sqrt(d1 / nactive)
    if d0 < 1e-5 or d1 < 1e-5:
        h = 1e-6
    else:
        h = 0.01 * d0 / d1
    h = min(h, h_max, t_max)
    facold = 1e-4
    status = 0
    steps = 0
    reject = False
    while t < t_max:
        if steps >= max_steps:
            status = 3
            break
        if h < 16.0 * 2.220446049250313e-16 * max(abs(t), 1.0):
            status = 1
            break
        last = False
        if t + h >= t_max:
            h = t_max - t
            last = True
        _stages(y, h, a, cubic, logmode, active, k1, K, A, B, E, ynew, err)
        steps += 1
        e2 = 0.0
        for i in range(n):
            if active[i]:
                sc = atol + rtol * max(abs(y[i]), abs(ynew[i]))
                e2 += (err[i] / sc) ** 2
        errn = math.sqrt(e2 / nactive)
        if not math.isfinite(errn):
            h *= 0.1
            reject = True
            continue
        fac11 = errn ** 0.17
        fac = fac11 / facold ** 0.04
        fac = max(0.1, min(5.0, fac / 0.9))
        if errn <= 1.0:
            facold = max(errn, 1e-4)
            t = t_max if last else t + h
            for i in range(n):
                y[i] = ynew[i]
                k1[i] = K[6, i]
            if count >= cap:
                cap *= 2
                ts2 = np.empty(cap)
                ys2 = np.empty((cap, n))
                ts2[:count] = ts[:count]
                ys2[:count, :] = ys[:count, :]
                ts = ts2
                ys = ys2
            ts[count] = t
            ys[count, :] = y
            count += 1
            hnew = h / fac
            if reject:
                hnew = min(hnew, h)
            reject = False
            h = min(hnew, h_max)
            big = 0.0
            for i in range(n):
                if active[i]:
                    v = y[i] if logmode else math.log(abs(y[i])) if y[i] != 0.0 else -1e300
                    big = max(big, v)
            if big > escape_log:
                status = 2
                break
        else:
            h = h / min(5.0, fac11 / 0.9)
            reject = True
    return ts[:count].copy(), ys[:count].copy(), status


def _admissible(m: NetworkModel, x0: np.ndarray) -> None:
    if x0.shape != (m.n,):
        raise InadmissibleInitialCondition(f"initial condition must have shape ({m.n},)")
    if not np.all(np.isfinite(x0)):
        raise InadmissibleInitialCondition("initial condition must be finite")
    if m.orthant_restricted and np.any(x0 < 0):
        raise InadmissibleInitialCondition("orthant-restricted model needs x0 >= 0")


@dataclass
class _Setup:
    y0: np.ndarray
    active: np.ndarray
    signs: np.ndarray
    logmode: bool


def _setup(m: NetworkModel, x0: np.ndarray, opts: IntegratorOptions) -> _Setup:
    x0 = np.asarray(x0, dtype=float)
    _admissible(m, x0)
    active = x0 != 0.0
    logmode = bool(opts.log_mode) and (m.is_cubic or m.orthant_restricted)
    signs = np.where(x0 < 0, -1.0, 1.0)
    if logmode:
        y0 = np.zeros(m.n)
        y0[active] = np.log(np.abs(x0[active]))
    else:
        y0 = x0.copy()
    return _Setup(y0, active, signs, logmode)


def _to_states(ys: np.ndarray, s: _Setup) -> np.ndarray:
    if not s.logmode:
        return ys
    with np.errstate(under="ignore"):
        x = np.where(s.active, s.signs * np.exp(ys), 0.0)
    return x


class Stepper:
    """Single RK steps from stored states, used for event localisation and
    polyline refinement."""

    def __init__(self, m: NetworkModel, s: _Setup):
        self.m = m
        self.s = s

    def step(self, y: np.ndarray, h: float) -> np.ndarray:
        return _single_step(np.ascontiguousarray(y, dtype=float), float(h), self.m.a,
                            self.m.is_cubic, self.s.logmode, self.s.active, _A, _B, _E)

    def to_x(self, y: np.ndarray) -> np.ndarray:
        return _to_states(y[None, :], self.s)[0]


def _run(m: NetworkModel, x0, opts: IntegratorOptions):
    s = _setup(m, x0, opts)
    ts, ys, status = _integrate(
        s.y0, np.ascontiguousarray(m.a), m.is_cubic, s.logmode, s.active,
        float(opts.t_max), float(opts.rel_tol), float(opts.abs_tol), int(opts.max_steps),
        math.log(opts.escape_radius), float(opts.max_step), _A, _B, _E,
    )
    return s, ts, ys, _STATUS[status]


def integrate(m: NetworkModel, x0, opts: IntegratorOptions | None = None) -> Trajectory:
    opts = opts or IntegratorOptions()
    s, ts, ys, term = _run(m, x0, opts)
    return Trajectory(
        times=ts,
        states=_to_states(ys, s),
        termination=term,
        tolerance_used=opts.rel_tol,
        log_states=ys if s.logmode else None,
    )


def _distance_rows(states: np.ndarray, xi: np.ndarray) -> np.ndarray:
    return np.linalg.norm(states - xi, axis=1)


def integrate_with_equilibrium_events(
    m: NetworkModel, x0, opts: IntegratorOptions | None = None, eta: float = 0.2,
    time_tol: float = 1e-6,
) -> Trajectory:
    """Integrate and record Enter/Exit crossings of the eta-balls around the
    axis equilibria, each localised by bisection to ``time_tol``."""
    if not 0.0 < eta < 0.5:
        raise ValueError("eta must lie in (0, 0.5)")
    from .models import equilibria

    opts = opts or IntegratorOptions()
    s, ts, ys, term = _run(m, x0, opts)
    states = _to_states(ys, s)
    stepper = Stepper(m, s)
    events: list[tuple[float, int, Event]] = []
    for eq in equilibria(m):
        d = _distance_rows(states, eq.coordinates) - eta
        inside = d < 0
        if inside[0]:
            events.append((0.0, 0, Event("enter", 0.0, eq.index, eq.sign)))
        flips = np.nonzero(inside[1:] != inside[:-1])[0]
        for i in flips:
            t_cross = _bisect(stepper, ys[i], ts[i], ts[i + 1], eq.coordinates, eta,
                              bool(inside[i]), time_tol)
            kind = "exit" if inside[i] else "enter"
            events.append((t_cross, i + 1, Event(kind, t_cross, eq.index, eq.sign)))
    events.sort(key=lambda e: (e[0], e[1], e[2].kind == "enter"))
    return Trajectory(ts, states, term, opts.rel_tol, ys if s.logmode else None,
                      [e[2] for e in events])


def _bisect(stepper: Stepper, y_left, t_left, t_right, xi, eta, was_inside, tol):
    lo, hi = 0.0, t_right - t_left
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        x = stepper.to_x(stepper.step(y_left, mid))
        inside = np.linalg.norm(x - xi) < eta
        if inside == was_inside:
            lo = mid
        else:
            hi = mid
    return t_left + 0.5 * (lo + hi)


def connection_polyline(
    m: NetworkModel,
    from_eq: Equilibrium,
    to_eq: Equilibrium,
    seed_offset: float = 1e-6,
    t_max: float = 2000.0,
    spacing: float = 0.01,
    rel_tol: float = 1e-10,
) -> np.ndarray:
    """Connecting orbit from ``from_eq`` to ``to_eq`` inside their coordinate
    plane, as a polyline with vertices at most ``spacing`` apart."""
    i, k = from_eq.index - 1, to_eq.index - 1
    if i == k:
        raise NoConnection("an equilibrium does not connect to itself")
    if m.a[i, k] <= 0:
        raise NoConnection(
            f"{from_eq.label} has no expanding eigenvalue towards {to_eq.label} "
            f"(eigenvalue {m.a[i, k]:+g})"
        )
    x0 = np.array(from_eq.coordinates, dtype=float)
    x0[k] = to_eq.sign * seed_offset
    opts = IntegratorOptions(rel_tol=rel_tol, abs_tol=1e-12, t_max=t_max, max_step=0.5)
    s, ts, ys, _ = _run(m, x0, opts)
    states = _to_states(ys, s)
    d = _distance_rows(states, to_eq.coordinates)
    hit = np.nonzero(d < 10 * seed_offset)[0]
    if len(hit) == 0:
        raise NoConnection(f"{from_eq.label} -> {to_eq.label}: no approach within t_max={t_max}")
    end = hit[0]
    stepper = Stepper(m, s)
    pts = [states[0]]
    for r in range(end):
        gap = np.linalg.norm(states[r + 1] - states[r])
        if gap > spacing:
            pieces = int(math.ceil(gap / spacing)) + 1
            h = (ts[r + 1] - ts[r]) / pieces
            for q in range(1, pieces):
                pts.append(stepper.to_x(stepper.step(ys[r], q * h)))
        pts.append(states[r + 1])
    poly = np.array(pts)
    return poly


def check_zero_preservation(traj: Trajectory, x0) -> bool:
    zero = np.asarray(x0) == 0.0
    return bool(np.all(traj.states[:, zero] == 0.0))


def field_along(m: NetworkModel, traj: Trajectory) -> np.ndarray:
    return np.array([vector_field(m, x) for x in traj.states])
