import numpy as np
import pytest

from catwalk.lattice import (
    COIN_DOWN,
    COIN_SYMMETRIC,
    COIN_UP,
    CoinState,
    DensityOperator,
    LatticeError,
    PureState,
    StateError,
    fidelity,
    fidelity_with_density,
    gaussian_momentum_state,
    gaussian_position_state,
    localized_state,
    make_lattice,
    recommended_size,
    to_momentum,
    to_position,
    walker_to_momentum,
)


def test_lattice_sites_and_momenta():
    lat = make_lattice(8)
    assert lat.sites.tolist() == [-4, -3, -2, -1, 0, 1, 2, 3]
    np.testing.assert_allclose(lat.momenta, 2 * np.pi * np.arange(-4, 4) / 8)
    assert np.all(np.diff(lat.momenta) > 0)


@pytest.mark.parametrize("n", [3, 7, 0, -4, 2])
def test_lattice_rejects_bad_sizes(n):
    with pytest.raises(LatticeError):
        make_lattice(n)


def test_recommended_size_rule():
    n = recommended_size(150, 10.0)
    assert n % 2 == 0
    assert n >= 2 * 150 + 8 * 10


def test_coin_state_normalization():
    with pytest.raises(StateError):
        CoinState(1.0, 1.0)
    chi = CoinState.from_vector([3.0, 4.0])
    np.testing.assert_allclose(chi.as_array(), [0.6, 0.8])


def test_localized_state_delta():
    lat = make_lattice(16)
    psi = localized_state(lat, 3, COIN_UP)
    prob = np.abs(psi.amplitudes) ** 2
    assert prob[3 + 8, 0] == pytest.approx(1.0)
    assert prob.sum() == pytest.approx(1.0)
    with pytest.raises(StateError):
        localized_state(lat, 8, COIN_UP)


def test_pure_state_rejects_unnormalized():
    lat = make_lattice(8)
    amp = np.ones((8, 2), dtype=complex)
    with pytest.raises(StateError):
        PureState(lat, amp)


def test_gaussian_moments():
    lat = make_lattice(256)
    psi = gaussian_position_state(lat, 10.0, COIN_SYMMETRIC)
    prob = np.sum(np.abs(psi.amplitudes) ** 2, axis=1)
    mu = prob @ lat.sites
    sig = np.sqrt(prob @ (lat.sites - mu) ** 2)
    assert abs(mu) < 1e-10
    assert sig == pytest.approx(10.0, rel=0.02)


def test_gaussian_requires_room():
    lat = make_lattice(16)
    with pytest.raises(StateError):
        gaussian_position_state(lat, 10.0, COIN_UP)


def test_k0_shifts_momentum_mean():
    lat = make_lattice(256)
    k0 = np.pi / 8
    psi = gaussian_position_state(lat, 10.0, COIN_SYMMETRIC, k0=k0)
    tilde = to_momentum(psi)
    prob = np.sum(np.abs(tilde.amplitudes) ** 2, axis=1)
    assert prob @ lat.momenta == pytest.approx(k0, abs=1e-3)


def test_dft_round_trip_and_unitarity():
    rng = np.random.default_rng(7)
    lat = make_lattice(32)
    amp = rng.normal(size=(32, 2)) + 1j * rng.normal(size=(32, 2))
    amp /= np.linalg.norm(amp)
    psi = PureState(lat, amp)
    back = to_position(to_momentum(psi))
    np.testing.assert_allclose(back.amplitudes, amp, atol=1e-13)
    assert to_momentum(psi).norm() == pytest.approx(1.0)


def test_dft_matches_dense_matrix():
    lat = make_lattice(8)
    n = 8
    f = np.exp(1j * np.outer(lat.momenta, lat.sites)) / np.sqrt(n)
    rng = np.random.default_rng(3)
    amp = rng.normal(size=(n, 2)) + 1j * rng.normal(size=(n, 2))
    amp /= np.linalg.norm(amp)
    psi = PureState(lat, amp)
    np.testing.assert_allclose(to_momentum(psi).amplitudes, f @ amp, atol=1e-13)
    np.testing.assert_allclose(
        walker_to_momentum(lat, amp[:, 0]), f @ amp[:, 0], atol=1e-13
    )


def test_gaussian_momentum_state_width():
    lat = make_lattice(512)
    delta = 0.05
    psi = to_position(gaussian_momentum_state(lat, delta, COIN_UP))
    prob = np.sum(np.abs(psi.amplitudes) ** 2, axis=1)
    sig = np.sqrt(prob @ lat.sites**2 - (prob @ lat.sites) ** 2)
    assert sig == pytest.approx(1.0 / (2 * delta), rel=0.05)


def test_fidelity_basics():
    lat = make_lattice(16)
    a = localized_state(lat, 0, COIN_UP)
    b = localized_state(lat, 0, COIN_DOWN)
    assert fidelity(a, a) == pytest.approx(1.0)
    assert fidelity(a, b) == pytest.approx(0.0)
    with pytest.raises(StateError):
        fidelity(a, to_momentum(b))
    with pytest.raises(LatticeError):
        fidelity(a, localized_state(make_lattice(8), 0, COIN_UP))


def test_density_operator_checks():
    lat = make_lattice(8)
    psi = localized_state(lat, 0, COIN_SYMMETRIC)
    rho = DensityOperator.from_pure(psi)
    assert rho.matrix.shape == (8, 2, 8, 2)
    assert np.trace(rho.as_2d).real == pytest.approx(1.0)
    assert rho.min_eigenvalue() == pytest.approx(0.0, abs=1e-12)
    assert fidelity_with_density(psi, rho) == pytest.approx(1.0)
    with pytest.raises(StateError):
        DensityOperator(lat, np.eye(16, dtype=complex))  # trace 8
    bad = rho.as_2d.copy()
    bad[0, 1] = 1.0
    with pytest.raises(StateError):
        DensityOperator(lat, bad)


def test_density_accepts_flat_layout():
    lat = make_lattice(8)
    psi = gaussian_position_state(lat, 1.0, COIN_SYMMETRIC)
    rho = DensityOperator.from_pure(psi)
    again = DensityOperator(lat, rho.as_2d)
    np.testing.assert_allclose(again.matrix, rho.matrix)
