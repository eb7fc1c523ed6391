"""Closed-form evolution against a direct Fourier-integral oracle.

The oracle never touches the package's algebra: it evaluates the
defining integrals

    fhat(xi) = int f(x) e^{-2 pi i x xi} dx
    u(t, x)  = int fhat(xi) e^{-4 pi^2 i |xi|^2 t} e^{2 pi i x xi} dxi

as plain trapezoid sums on wide fine lattices.  For these analytic,
rapidly decaying integrands the trapezoid rule is accurate to far below
the asserted tolerances (aliasing images sit 60+ units away).
"""

import numpy as np
import pytest

from smoothing_lab.errors import InvalidParameterError, OriginError
from smoothing_lab.model import WavePacket, l2_norm_sq, packet_sum
from smoothing_lab.propagator import (GaussianState, difference_state,
                                      dispersive_approx, evolve_analytic,
                                      fourier_state, gradient_split,
                                      state_from_datum)

F_1D = packet_sum([WavePacket(1.0, 1.0, [0.2], [0.3]),
                   WavePacket(0.5j, 1.5, [-0.4], [-0.2])])

_HX = 1.0 / 64
_X_NODES = np.arange(-16.0, 16.0, _HX)
_HXI = 1.0 / 64
_XI_NODES = np.arange(-12.0, 12.0, _HXI)


def datum_values(f, x):
    x = np.asarray(x, dtype=float)
    total = np.zeros(x.shape, dtype=complex)
    for p in f.packets:
        total += p.amplitude * np.exp(
            -p.width * (x - p.center[0]) ** 2 + 2j * np.pi * p.momentum[0] * x)
    return total


def oracle_transform(f, xi):
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    kernel = np.exp(-2j * np.pi * np.outer(xi, _X_NODES))
    return kernel @ datum_values(f, _X_NODES) * _HX


def oracle_evolution(f, t, x):
    fhat = oracle_transform(f, _XI_NODES)
    phase = np.exp(-4j * np.pi**2 * _XI_NODES**2 * t
                   + 2j * np.pi * x * _XI_NODES)
    return np.sum(fhat * phase) * _HXI


def test_state_from_datum_matches_definition():
    st = state_from_datum(F_1D)
    x = np.linspace(-3.0, 3.0, 17)[:, None]
    np.testing.assert_allclose(st.values(x), datum_values(F_1D, x[:, 0]),
                               rtol=0, atol=1e-14)
    assert st.t == 0.0


@pytest.mark.parametrize("t", [0.15, 0.9])
def test_evolve_analytic_against_fourier_oracle(t):
    st = evolve_analytic(F_1D, t)
    assert st.t == t
    for x in (-1.3, 0.0, 0.7, 2.1):
        expect = oracle_evolution(F_1D, t, x)
        got = st.values(np.array([[x]]))[0]
        assert abs(got - expect) <= 1e-9


def test_fourier_state_against_oracle():
    sh = fourier_state(F_1D)
    for xi in (-1.0, -0.2, 0.0, 0.4, 1.5):
        expect = oracle_transform(F_1D, xi)[0]
        got = sh.values(np.array([[xi]]))[0]
        assert abs(got - expect) <= 1e-10


def test_fourier_state_plancherel():
    sh = fourier_state(F_1D)
    assert sh.mass().real == pytest.approx(l2_norm_sq(F_1D), rel=1e-12)


def test_mass_conserved_under_evolution():
    base = l2_norm_sq(F_1D)
    for t in (-2.0, 0.4, 7.0):
        assert evolve_analytic(F_1D, t).mass().real == pytest.approx(base, rel=1e-13)


def test_time_reversal():
    # u(-t; f) = conj(u(t; conj-datum)), conj-datum flipping momenta
    f_conj = packet_sum([
        WavePacket(np.conj(p.amplitude), p.width, p.center, -p.momentum)
        for p in F_1D.packets
    ])
    x = np.linspace(-4.0, 4.0, 23)[:, None]
    a = evolve_analytic(F_1D, -0.8).values(x)
    b = np.conj(evolve_analytic(f_conj, 0.8).values(x))
    np.testing.assert_allclose(a, b, rtol=0, atol=1e-12)


def test_values_and_gradient_consistent():
    st = evolve_analytic(F_1D, 0.6)
    x = np.array([[0.5], [-1.2], [2.0]])
    vals, grad = st.values_and_gradient(x)
    np.testing.assert_allclose(vals, st.values(x), rtol=1e-14)
    h = 1e-6
    fd = (st.values(x + h) - st.values(x - h)) / (2 * h)
    np.testing.assert_allclose(grad[:, 0], fd, rtol=3e-9, atol=1e-12)


def test_gradient_split_reassembles_gradient():
    f2 = packet_sum([WavePacket(1.0, 1.0, [0.3, -0.2], [0.2, 0.1]),
                     WavePacket(0.7j, 1.4, [-0.4, 0.1], [-0.1, 0.3])])
    st = evolve_analytic(f2, 0.5)
    rng = np.random.default_rng(3)
    x = rng.normal(size=(9, 2))
    _, grad = st.values_and_gradient(x)
    ur, tau_sq = gradient_split(st, x)
    full = np.sum(np.abs(grad) ** 2, axis=-1)
    np.testing.assert_allclose(np.abs(ur) ** 2 + tau_sq, full, rtol=1e-12)
    # radial part is the projection of the gradient on x/|x|
    rhat = x / np.linalg.norm(x, axis=-1, keepdims=True)
    proj = np.sum(grad * rhat, axis=-1)
    np.testing.assert_allclose(ur, proj, rtol=1e-12)


def test_gradient_split_origin_guard():
    st = state_from_datum(F_1D)
    with pytest.raises(OriginError):
        gradient_split(st, np.zeros((1, 1)))


@pytest.mark.parametrize("t", [0.7, 5.0, -3.0])
def test_dispersive_approx_against_direct_formula(t):
    # stationary-phase form, assembled from the numerically transformed datum
    st = dispersive_approx(F_1D, t)
    for x in (-2.0, 0.3, 4.0):
        fhat = oracle_transform(F_1D, x / (4 * np.pi * t))[0]
        expect = (
            np.exp(-1j * np.sign(t) * np.pi / 4)
            * (4 * np.pi * abs(t)) ** -0.5
            * np.exp(1j * x**2 / (4 * t))
            * fhat
        )
        got = st.values(np.array([[x]]))[0]
        assert abs(got - expect) <= 1e-10 * max(abs(expect), 1.0)


def test_dispersive_approx_rejects_t_zero():
    with pytest.raises(InvalidParameterError):
        dispersive_approx(F_1D, 0.0)


def test_difference_state_mass_expansion():
    a = evolve_analytic(F_1D, 1.3)
    b = dispersive_approx(F_1D, 1.3)
    d = difference_state(a, b)
    expect = a.mass() + b.mass() - 2 * a.inner(b).real
    assert d.mass().real == pytest.approx(expect.real, rel=1e-12)


def test_dispersive_error_decays_like_inverse_time():
    errs = []
    for t in (4.0, 16.0, 64.0):
        d = difference_state(evolve_analytic(F_1D, t), dispersive_approx(F_1D, t))
        errs.append(np.sqrt(max(d.mass().real, 0.0)))
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.2)
    assert errs[1] / errs[2] == pytest.approx(4.0, rel=0.2)


def test_gaussian_state_validation():
    with pytest.raises(InvalidParameterError):
        GaussianState(1, np.array([1.0 + 0j]), np.array([-0.1 + 1j]),
                      np.zeros((1, 1)), np.zeros((1, 1)))
