import numpy as np
import pytest

from hetnet.integrator import (
    InadmissibleInitialCondition,
    IntegratorOptions,
    NoConnection,
    Termination,
    check_zero_preservation,
    connection_polyline,
    integrate,
    integrate_with_equilibrium_events,
)
from hetnet.models import equilibrium, make_generic_model, to_lotka_volterra, vector_field


def test_linear_and_log_modes_agree(gh):
    x0 = np.array([0.7, 0.1, 0.05])
    a = integrate(gh, x0, IntegratorOptions(t_max=20, log_mode=True))
    b = integrate(gh, x0, IntegratorOptions(t_max=20, log_mode=False))
    assert a.termination is Termination.TIME_LIMIT
    assert a.times[-1] == pytest.approx(20.0)
    np.testing.assert_allclose(a.states[-1], b.states[-1], rtol=1e-6, atol=1e-9)


def test_matches_scipy_reference(gh):
    from scipy.integrate import solve_ivp

    x0 = np.array([0.3, 0.4, 0.5])
    ref = solve_ivp(lambda t, x: vector_field(gh, np.abs(x)) * np.sign(x), (0, 10), x0,
                    rtol=1e-12, atol=1e-14, method="DOP853")
    tr = integrate(gh, x0, IntegratorOptions(t_max=10))
    np.testing.assert_allclose(tr.states[-1], ref.y[:, -1], rtol=1e-7)


def test_zero_components_stay_zero(gh):
    x0 = np.array([0.5, 0.0, 0.3])
    for log in (True, False):
        tr = integrate(gh, x0, IntegratorOptions(t_max=50, log_mode=log))
        assert check_zero_preservation(tr, x0)


def test_log_mode_reaches_below_double_range(gh):
    tr = integrate(gh, np.array([0.7, 1e-100, 1e-150]), IntegratorOptions(t_max=4000))
    # coordinates near the network pass far below 1e-300 yet stay resolved
    assert tr.log_states.min() < -800
    assert np.isfinite(tr.log_states).all()
    assert (tr.states == 0).any()


def test_inadmissible_initial_conditions(gh):
    with pytest.raises(InadmissibleInitialCondition):
        integrate(gh, np.array([-0.1, 0.2, 0.3]))
    with pytest.raises(InadmissibleInitialCondition):
        integrate(gh, np.array([0.1, 0.2]))
    with pytest.raises(InadmissibleInitialCondition):
        integrate(gh, np.array([np.nan, 0.2, 0.3]))


def test_options_validated():
    with pytest.raises(ValueError):
        IntegratorOptions(rel_tol=0)
    with pytest.raises(ValueError):
        IntegratorOptions(t_max=-1)


def test_escape_is_reported():
    # a single positive self-sustaining direction: x1 grows without bound in equation 1
    a = np.array([[0.0, 0.0, 0.0], [5.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
    m = make_generic_model(a)
    tr = integrate(m, np.array([0.0, 1.0, 0.0]), IntegratorOptions(t_max=100))
    assert tr.termination in (Termination.TIME_LIMIT, Termination.ESCAPE)


def test_events_are_paired_and_ordered(gh):
    tr = integrate_with_equilibrium_events(gh, np.array([0.7, 0.1, 0.05]),
                                           IntegratorOptions(t_max=200))
    times = [e.time for e in tr.events]
    assert times == sorted(times)
    for eq in (1, 2, 3):
        kinds = [e.kind for e in tr.events if e.equilibrium == eq]
        assert all(k1 != k2 for k1, k2 in zip(kinds, kinds[1:]))


def test_event_times_are_localised(gh):
    tr = integrate_with_equilibrium_events(gh, np.array([0.7, 0.1, 0.05]),
                                           IntegratorOptions(t_max=100), eta=0.2)
    ev = next(e for e in tr.events if e.kind == "enter" and e.time > 0)
    ref = integrate(gh, np.array([0.7, 0.1, 0.05]), IntegratorOptions(t_max=ev.time))
    xi = equilibrium(gh, ev.equilibrium).coordinates
    assert np.linalg.norm(ref.states[-1] - xi) == pytest.approx(0.2, abs=1e-5)


def test_lv_time_rescaling(gh):
    x0 = np.array([0.6, 0.3, 0.2])
    cubic = integrate(gh, x0, IntegratorOptions(t_max=5))
    lv = integrate(to_lotka_volterra(gh), x0 ** 2, IntegratorOptions(t_max=10))
    np.testing.assert_allclose(lv.states[-1], cubic.states[-1] ** 2, rtol=1e-8)


def test_connection_polyline_stays_in_plane(gh):
    poly = connection_polyline(gh, equilibrium(gh, 1), equilibrium(gh, 2))
    assert np.all(poly[:, 2] == 0.0)
    assert np.linalg.norm(np.diff(poly, axis=0), axis=1).max() <= 0.01 + 1e-12
    np.testing.assert_allclose(poly[0], [1, 1e-6, 0], atol=1e-12)
    assert np.linalg.norm(poly[-1] - [0, 1, 0]) < 1e-5
    # e12 = c21 makes the unit circle invariant in this plane
    np.testing.assert_allclose((poly ** 2).sum(axis=1), 1.0, atol=1e-6)


def test_no_connection_against_contracting_direction(gh):
    with pytest.raises(NoConnection):
        connection_polyline(gh, equilibrium(gh, 2), equilibrium(gh, 1))
