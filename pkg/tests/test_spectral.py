"""Grid transform tests.

The closed-form Gaussian transform (fourier_state) is the oracle for the
discrete path: with a box wide enough that both the field and its spectrum
decay below machine precision before the edge, the phased DFT should match
the continuum transform pointwise.  The remaining tests pin the discrete
invariants that hold exactly (Parseval, roundtrip, unimodular evolution)
and the failure modes (aliasing on input and on output).
"""

import numpy as np
import pytest

from smoothing_lab import (
    AliasingError,
    GridField,
    InvalidParameterError,
    QuadraturePlan,
    SpectrumField,
    evolve_analytic,
    evolve_spectral,
    forward_transform,
    fourier_state,
    grid_l2_sq,
    hs_norm_sq,
    inverse_transform,
    l2_norm_sq,
    packet,
    packet_sum,
    rel_l2_diff,
    sample_datum,
    sample_state,
)

F_1D = packet_sum([
    packet(1.0, 1.0, [0.3], [0.25]),
    packet(0.4 - 0.7j, 2.5, [-0.6], [-0.4]),
])

ODD_1D = packet_sum([
    packet(1.0, 1.0, [0.8], [0.0]),
    packet(-1.0, 1.0, [-0.8], [0.0]),
])


def conj_field(g: GridField) -> GridField:
    return GridField(g.n, g.L, g.N, np.conj(g.samples), t=g.t)


def test_forward_transform_matches_closed_form():
    g = sample_datum(F_1D, L=16.0, N=512)
    sf = forward_transform(g)
    ghat = fourier_state(F_1D)
    exact = ghat.values(sf.axis()[:, None])
    assert np.max(np.abs(sf.values - exact)) < 1e-13


def test_forward_transform_matches_closed_form_2d():
    f = packet_sum([packet(1.0, 1.0, [0.3, -0.2], [0.25, 0.1])])
    g = sample_datum(f, L=12.0, N=128)
    sf = forward_transform(g)
    ax = sf.axis()
    xi = np.stack(np.meshgrid(ax, ax, indexing="ij"), axis=-1)
    exact = fourier_state(f).values(xi)
    assert np.max(np.abs(sf.values - exact)) < 1e-13


def test_parseval_exact_on_grid():
    g = sample_datum(F_1D, L=16.0, N=512)
    sf = forward_transform(g)
    spec_mass = float((np.abs(sf.values) ** 2).sum() * sf.dxi**sf.n)
    assert spec_mass == pytest.approx(grid_l2_sq(g), rel=1e-13)


def test_roundtrip_is_identity():
    g = sample_datum(F_1D, L=16.0, N=512, t=0.3)
    back = inverse_transform(forward_transform(g))
    assert rel_l2_diff(g, back) < 1e-13
    assert back.t == g.t


def test_spectral_evolution_group_law():
    g = sample_datum(F_1D, L=48.0, N=2048)
    one = evolve_spectral(evolve_spectral(g, 0.4), 0.35)
    two = evolve_spectral(g, 0.75)
    assert rel_l2_diff(one, two) < 1e-12
    assert one.t == pytest.approx(0.75, abs=0.0)


def test_spectral_evolution_conserves_mass():
    g = sample_datum(F_1D, L=48.0, N=2048)
    out = evolve_spectral(g, 0.6)
    assert grid_l2_sq(out) == pytest.approx(grid_l2_sq(g), rel=1e-13)


def test_spectral_time_reversal():
    # conjugating the datum conjugates the backward flow
    g = sample_datum(F_1D, L=48.0, N=2048)
    fwd = evolve_spectral(conj_field(g), 0.5)
    bwd = evolve_spectral(g, -0.5)
    assert rel_l2_diff(fwd, conj_field(bwd)) < 1e-12


def test_grid_evolution_cross_checks_analytic():
    # one fixed box; the wide sweep lives in the acceptance suite
    f = F_1D
    g0 = sample_datum(f, L=80.0, N=8192)
    moved = evolve_spectral(g0, 0.7)
    exact = sample_state(evolve_analytic(f, 0.7), L=80.0, N=8192)
    assert rel_l2_diff(moved, exact) < 1e-8


def test_forward_transform_rejects_wrapped_input():
    wide = packet_sum([packet(1.0, 0.01, [0.0], [0.0])])
    g = sample_datum(wide, L=8.0, N=256)
    with pytest.raises(AliasingError) as exc:
        forward_transform(g)
    assert exc.value.fraction > exc.value.threshold


def test_spectral_evolution_rejects_spread_output():
    narrow = packet_sum([packet(1.0, 50.0, [0.0], [0.0])])
    g = sample_datum(narrow, L=8.0, N=512)
    with pytest.raises(AliasingError):
        evolve_spectral(g, 5.0)


def test_hs_norm_packet_vs_grid():
    # odd datum: fhat vanishes at 0, so the |xi| kink carries no weight
    val_packet = hs_norm_sq(ODD_1D, 0.5)
    sf = forward_transform(sample_datum(ODD_1D, L=80.0, N=8192))
    val_grid = hs_norm_sq(sf, 0.5)
    assert val_grid == pytest.approx(val_packet, rel=1e-6)


def test_hs_norm_zero_order_is_mass():
    assert hs_norm_sq(F_1D, 0.0) == pytest.approx(l2_norm_sq(F_1D), rel=1e-10)
    sf = forward_transform(sample_datum(F_1D, L=16.0, N=512))
    g = sample_datum(F_1D, L=16.0, N=512)
    assert hs_norm_sq(sf, 0.0) == pytest.approx(grid_l2_sq(g), rel=1e-13)


def test_half_derivative_norm_of_unit_gaussian():
    # int |xi| exp(-2 pi^2 xi^2 / a) (pi/a)^(1/2) dxi = 1/(2 pi) for every a
    for a in (0.5, 1.0, 3.0):
        f = packet_sum([packet(1.0, a, [0.0])])
        assert hs_norm_sq(f, 0.5) == pytest.approx(1.0 / (2.0 * np.pi), rel=1e-8)


def test_hs_norm_rejects_nonintegrable_order():
    with pytest.raises(InvalidParameterError):
        hs_norm_sq(F_1D, -0.5)
    sf = forward_transform(sample_datum(F_1D, L=16.0, N=512))
    with pytest.raises(InvalidParameterError):
        hs_norm_sq(sf, -0.5)


def test_hs_norm_rejects_other_types():
    with pytest.raises(InvalidParameterError):
        hs_norm_sq(np.zeros(4), 0.5)


def test_spectrum_field_shape_guard():
    with pytest.raises(InvalidParameterError):
        SpectrumField(2, 8.0, 64, np.zeros(64, dtype=complex))


def test_sample_state_slab_path_matches_direct():
    f = packet_sum([packet(1.0, 1.0, [0.3, -0.2], [0.25, 0.1])])
    st = evolve_analytic(f, 0.2)
    g = sample_state(st, L=10.0, N=64)
    ax = g.axis()
    pts = np.stack(np.meshgrid(ax, ax, indexing="ij"), axis=-1)
    assert np.max(np.abs(g.samples - st.values(pts))) < 1e-14


def test_rel_l2_diff_layout_guard():
    a = sample_datum(F_1D, L=16.0, N=512)
    b = sample_datum(F_1D, L=16.0, N=256)
    with pytest.raises(InvalidParameterError):
        rel_l2_diff(a, b)
