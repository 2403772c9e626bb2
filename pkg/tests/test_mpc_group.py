import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from mpcquant.mpc_group import (
    MpcParameters,
    RefineNeeded,
    ZeroCrossingError,
    central_mul,
    epsilon,
    eta,
    identity,
    mp_lift_loop,
    winding_number,
)
from mpcquant.scenarios import polar_frame, polar_frame_constant
from mpcquant.symplectic_core import (
    det_c,
    from_complex,
    random_hamiltonian_matrix,
    random_symplectic,
)


def random_closed_loop(n, rng, windings, samples=512):
    """Closed symplectic loop with ``det_c`` winding ``sum(windings)``.

    A contractible deformation ``expm(sin(t) X)`` multiplies a unitary loop
    ``V diag(e^{i m_j t}) V^*`` and a fixed symplectic base point.
    """
    t = np.linspace(0.0, 2 * np.pi, samples + 1)
    X = random_hamiltonian_matrix(n, rng, 0.3)
    V, _ = np.linalg.qr(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
    base = random_symplectic(n, rng, 0.3)
    phases = np.exp(1j * np.outer(t, windings))
    U = np.einsum("ij,tj,kj->tik", V, phases, V.conj())
    g = np.array([expm(np.sin(s) * X) for s in t]) @ from_complex(U) @ base
    g[-1] = g[0]
    return t, g


def test_parameters_validate_eta_modulus():
    g = polar_frame([2.0], 0.3)
    K = polar_frame_constant([2.0])
    a = MpcParameters(g, np.exp(-0.15j) / np.sqrt(K))
    assert abs(eta(a) - 1) < 1e-12
    with pytest.raises(ValueError):
        MpcParameters(g, 1.0)
    with pytest.raises(ValueError):
        MpcParameters(np.diag([2.0, 1.0]), 1.0)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_polar_lift_has_trivial_eta(n):
    s0 = 0.5 * np.arange(1, n + 1)
    K = polar_frame_constant(s0)
    for tau in np.linspace(0, 2 * np.pi, 7):
        a = MpcParameters(polar_frame(s0, tau), np.exp(-1j * n * tau / 2) / np.sqrt(K))
        assert abs(eta(a) - 1) < 1e-12


def test_epsilon_and_central_mul():
    assert epsilon(1).mu == -1 and epsilon(2).mu == 1
    a = central_mul(identity(2), np.exp(0.7j))
    assert eta(a) == pytest.approx(np.exp(1.4j))
    with pytest.raises(ValueError):
        central_mul(identity(1), 2.0)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 3), st.floats(-np.pi, np.pi))
def test_central_element_eta_is_lambda_squared(n, phi):
    lam = np.exp(1j * phi)
    a = central_mul(identity(n), lam)
    assert abs(eta(a) - lam ** 2) < 1e-12


@pytest.mark.parametrize("n", [1, 2, 3])
def test_polar_loop_winding_and_parity(n):
    s0 = 0.5 * np.arange(1, n + 1)
    t = np.linspace(0, 2 * np.pi, 65)
    G = polar_frame(s0, t)
    assert winding_number(det_c(G)) == n
    lift = mp_lift_loop(G, t)
    assert lift.end_parity == (-1) ** n
    assert lift.winding == n


@settings(max_examples=30, deadline=None)
@given(st.integers(-5, 5), st.floats(0.1, 10.0))
def test_winding_of_circle(m, radius):
    t = np.linspace(0, 2 * np.pi, 257)
    assert winding_number(radius * np.exp(1j * m * t)) == m


def test_winding_guards():
    t = np.linspace(0, 2 * np.pi, 5)
    with pytest.raises(RefineNeeded):
        winding_number(np.exp(3j * t))
    with pytest.raises(ZeroCrossingError):
        winding_number(np.array([1.0, 0.0, 1.0]))
    with pytest.raises(ValueError):
        winding_number(np.array([1.0, 1j]))


def test_lift_refines_with_resampler():
    def sample(k):
        t = np.linspace(0, 2 * np.pi, 4 * 2 ** k + 1)
        return polar_frame([0.5, 1.0, 1.5], t), t

    g, t = sample(0)
    with pytest.raises(RefineNeeded):
        mp_lift_loop(g, t)
    assert mp_lift_loop(g, t, resample=sample).end_parity == -1


def test_lift_rejects_open_path():
    g = polar_frame([0.5], np.linspace(0, np.pi, 33))
    with pytest.raises(ValueError):
        mp_lift_loop(g)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 3), st.data())
def test_lift_parity_matches_winding(seed, n, data):
    m = data.draw(st.lists(st.integers(-3, 3), min_size=n, max_size=n))
    rng = np.random.default_rng(seed)
    t, g = random_closed_loop(n, rng, m)
    lift = mp_lift_loop(g, t)
    assert lift.winding == sum(m)
    assert lift.end_parity == (-1) ** sum(m)
    # mu^2 Det_C stays constant along the continued lift
    c = lift.mu_samples ** 2 * det_c(g)
    assert np.allclose(c, c[0], atol=1e-9)
