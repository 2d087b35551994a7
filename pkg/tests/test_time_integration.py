import numpy as np
import pytest

from ncdg.acoustic_dg import NonFiniteStateError
from ncdg.mesh import Material, build_rect_mesh
from ncdg.time_integration import (RK4, RKC84, advance, cfl_timestep, get_scheme, integrate,
                                   integrate_discretization)


def order_conditions(a, b, c):
    return {
        "b": (b.sum(), 1.0),
        "bc": (b @ c, 1 / 2),
        "bc2": (b @ c ** 2, 1 / 3),
        "bac": (b @ a @ c, 1 / 6),
        "bc3": (b @ c ** 3, 1 / 4),
        "bcac": (b @ (c * (a @ c)), 1 / 8),
        "bac2": (b @ a @ c ** 2, 1 / 12),
        "baac": (b @ a @ a @ c, 1 / 24),
    }


@pytest.mark.parametrize("cond", ["b", "bc", "bc2", "bac", "bc3", "bcac", "bac2", "baac"])
def test_low_storage_scheme_is_fourth_order(cond):
    got, want = order_conditions(*RKC84.butcher())[cond]
    assert abs(got - want) < 1e-12


def test_stage_times_match_tableau():
    a, _, c = RKC84.butcher()
    assert np.allclose(c, RKC84.C, atol=1e-12)
    assert RKC84.stages == 8 and RKC84.A[0] == 0.0


@pytest.mark.parametrize("scheme, offsets", [
    (RKC84, RKC84.C), (RK4, (0.0, 0.5, 0.5, 1.0))])
def test_right_hand_side_called_at_stage_times(scheme, offsets):
    seen = []
    advance(lambda t, y: seen.append(t) or np.zeros_like(y), 1.0, np.zeros(3), 0.1, scheme)
    assert np.allclose(seen, 1.0 + 0.1 * np.asarray(offsets), atol=1e-15)


@pytest.mark.parametrize("scheme", [RKC84, RK4])
def test_zero_rate_is_exact(scheme):
    y0 = np.arange(6.0)
    _, y, _ = integrate(lambda t, y: np.zeros_like(y), y0, 0.0, 1.0, 0.13, scheme)
    assert np.array_equal(y, y0)


@pytest.mark.parametrize("scheme", [RKC84, RK4])
def test_decay_step_bounded_and_accurate(scheme):
    # one step of y' = lambda y with lambda dt = -0.1
    y = advance(lambda t, y: -y, 0.0, np.ones(3), 0.1, scheme)
    assert np.all(np.abs(y) <= 1.0)
    assert np.allclose(y, np.exp(-0.1), atol=1e-7)


@pytest.mark.parametrize("scheme", [RKC84, RK4])
def test_observed_order_four(scheme):
    f = lambda t, y: -y + np.cos(t)  # noqa: E731
    exact = lambda t: 0.5 * (np.sin(t) + np.cos(t)) + 0.5 * np.exp(-t)  # noqa: E731
    errs = []
    for dt in (0.2, 0.1, 0.05):
        _, y, _ = integrate(f, np.array([1.0]), 0.0, 2.0, dt, scheme)
        errs.append(abs(y[0] - exact(2.0)))
    rates = np.log2(np.array(errs[:-1]) / errs[1:])
    assert np.all(np.abs(rates - 4.0) < 0.3)


def test_end_time_hit_exactly_and_callback_cadence():
    calls = []
    t, y, n = integrate(lambda t, y: np.ones_like(y), np.zeros(1), 0.0, 1.0, 0.3,
                        callback=lambda s, t, y: calls.append((s, t)), every=2)
    assert n == 4 and t == 1.0
    assert np.isclose(y[0], 1.0, atol=1e-14)
    assert np.allclose(calls, [(0, 0.0), (2, 0.6), (4, 1.0)], rtol=0, atol=1e-15)


def test_exact_multiple_does_not_add_a_step():
    _, _, n = integrate(lambda t, y: y, np.zeros(1), 0.0, 1.0, 0.1)
    assert n == 10


def test_invalid_arguments():
    with pytest.raises(ValueError):
        integrate(lambda t, y: y, np.zeros(1), 0.0, 1.0, 0.0)
    with pytest.raises(ValueError):
        integrate(lambda t, y: y, np.zeros(1), 1.0, 0.0, 0.1)
    with pytest.raises(ValueError):
        get_scheme("euler")
    assert get_scheme("RK4") is RK4


def test_non_finite_state_reports_element_and_step():
    E, n = 4, 2

    def f(t, y):
        r = np.zeros_like(y)
        if t > 0.25:
            r[E * n + 2 * n + 1] = np.nan  # u_x block, element 2
        return r

    with pytest.raises(NonFiniteStateError) as info:
        integrate(f, np.zeros(3 * E * n), 0.0, 1.0, 0.1, n_elements=E)
    assert info.value.element == 2
    assert info.value.step == 3


@pytest.mark.parametrize("k, courant, expected", [
    (1, 0.2, 0.025), (4, 0.2, 0.003125), (3, 0.5, 0.5 / 3 ** 1.5 * 0.125)])
def test_cfl_timestep(k, courant, expected):
    mesh = build_rect_mesh((0, 0, 1, 1), 4, 4, Material(1.0, 2.0))
    assert np.isclose(cfl_timestep(mesh, k, courant), expected, rtol=1e-14)


def test_cfl_rejects_non_positive_courant():
    with pytest.raises(ValueError):
        cfl_timestep(build_rect_mesh((0, 0, 1, 1), 1, 1), 1, 0.0)


def test_integrate_discretization_conserves_with_rigid_walls():
    from ncdg.acoustic_dg import Discretization
    from ncdg.mesh import Admittance, BoundarySpec

    disc = Discretization(build_rect_mesh((0, 0, 1, 1), 2, 2), 2, BoundarySpec({"*": Admittance(0.0)}))
    state = disc.interpolate(lambda x, t: np.full(len(x), 2.0))
    out, n = integrate_discretization(disc, state, 0.01)
    assert out.t == 0.01 and n > 0
    assert np.allclose(out.p, 2.0, atol=1e-12)
