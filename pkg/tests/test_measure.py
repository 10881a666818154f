import numpy as np
import pytest

from conftest import random_alpha
from mopuc.errors import BadSample, MomentOrderTooHigh, NotNormalizable, RadiusTooLarge
from mopuc.linalg import dagger
from mopuc.measure import (
    caratheodory_eval,
    entropy_K,
    entropy_reference,
    flip_measure,
    grid_angles,
    lambda0,
    lambda_g,
    make_measure,
    moment,
    moments,
)
from mopuc.opuc import bernstein_szego_measure
from oracles import entropy_reference_quad, scalar_single_density, scalar_single_lhs


def test_constant_density_is_lambda0():
    mu = make_measure(np.ones(64), dim=2)
    np.testing.assert_array_equal(mu.density, lambda0(2, 64).density)
    np.testing.assert_allclose(moment(mu, 0), np.eye(2))
    np.testing.assert_allclose(moment(mu, 1), 0, atol=1e-16)


@pytest.mark.parametrize("M", [8, 16, 1024])
def test_lambda1_normalizes_exactly(M):
    mu = make_measure(1 - np.cos(grid_angles(M)))
    assert abs(mu.total_mass()[0, 0] - 1) < 1e-14


def test_mixed_measure_with_atom():
    mu = make_measure(0.5 * np.ones(32), atoms=[(0.0, 0.5)], dim=2)
    np.testing.assert_allclose(mu.total_mass(), np.eye(2), atol=1e-15)
    # the atom contributes 0.5 to every moment
    np.testing.assert_allclose(moment(mu, 3), 0.5 * np.eye(2), atol=1e-15)


def test_make_measure_errors():
    with pytest.raises(NotNormalizable):
        make_measure(2 * np.ones(16))
    with pytest.raises(BadSample):
        make_measure(np.r_[-1.0, np.ones(15)])
    with pytest.raises(ValueError):
        make_measure(np.ones(12))


def test_renormalize_conjugates_by_inverse_root(rng):
    M, p = 64, 2
    X = rng.standard_normal((p, p)) + 1j * rng.standard_normal((p, p))
    S = X @ dagger(X) + np.eye(p)
    mu = make_measure(np.broadcast_to(S, (M, p, p)), renormalize=True)
    np.testing.assert_allclose(mu.total_mass(), np.eye(p), atol=1e-12)
    assert np.all(np.linalg.eigvalsh(mu.density) > 0)
    with pytest.raises(NotNormalizable):
        make_measure(np.zeros((M, p, p)), renormalize=True)


def test_lambda1_first_moment():
    mu = lambda_g(1.0, 1, 256)
    assert moment(mu, 1)[0, 0] == pytest.approx(-0.5, abs=1e-15)


def test_single_coefficient_moments(bs_half):
    theta = grid_angles(4096)
    series = scalar_single_density(0.5, theta)
    np.testing.assert_allclose(bs_half.density[:, 0, 0].real, series, rtol=1e-12)
    c = moments(bs_half, 6)[:, 0, 0]
    np.testing.assert_allclose(c, 0.5 ** np.arange(7), atol=1e-14)


def test_moment_hermitian_symmetry(rng):
    mu = bernstein_szego_measure(random_alpha(rng, 3, 4), 256)
    for n in range(0, 65):
        np.testing.assert_allclose(moment(mu, -n), dagger(moment(mu, n)), atol=1e-12)
    with pytest.raises(MomentOrderTooHigh):
        moment(mu, 65)


def test_entropy_reference_examples():
    assert entropy_reference(0) == 0.0
    assert entropy_reference(1) == pytest.approx(1 - np.log(2), abs=1e-15)
    assert entropy_reference(1) == pytest.approx(0.3068528, abs=1e-7)
    assert entropy_reference(0.6) == pytest.approx(0.2 + np.log(0.9), abs=1e-15)
    assert entropy_reference(0.6) == pytest.approx(0.0946395, abs=1e-7)


@pytest.mark.parametrize("g", [-0.999, -0.6, -0.3, 0.0, 0.3, 0.6, 0.999])
def test_entropy_reference_matches_quadrature(g):
    assert abs(entropy_reference(g) - entropy_reference_quad(g)) < 1e-8
    # also against the rectangle rule on 2^14 nodes
    u = 1 - g * np.cos(grid_angles(2**14))
    assert abs(entropy_reference(g) - np.mean(u * np.log(u))) < 1e-8


def test_entropy_K_examples(bs_half):
    assert entropy_K(0.0, lambda0(2)) == pytest.approx(0.0, abs=1e-15)
    assert entropy_K(1.0, lambda0(2)) == pytest.approx(2 * (1 - np.log(2)), abs=1e-8)
    assert entropy_K(1.0, lambda0(2)) == pytest.approx(0.6137056, abs=1e-7)
    expected = (1 - np.log(2)) - scalar_single_lhs(0.5, 1.0)
    assert entropy_K(1.0, bs_half) == pytest.approx(expected, abs=1e-8)
    assert entropy_K(1.0, bs_half) == pytest.approx(1.0945349, abs=1e-7)


def test_entropy_K_degenerate_density_is_infinite():
    d = np.ones(64)
    d[:32] = 0.0
    d[32:] = 2.0
    assert entropy_K(0.0, make_measure(d)) == np.inf
    # one clamped node out of 256 stays under the floor fraction
    d = np.ones(256)
    d[0], d[1] = 0.0, 2.0
    assert np.isfinite(entropy_K(0.0, make_measure(d)))


def test_entropy_ignores_atoms():
    mu = make_measure(0.5 * np.ones(64), atoms=[(1.0, 0.5)])
    assert entropy_K(0.0, mu) == pytest.approx(-np.log(0.5), abs=1e-15)


@pytest.mark.parametrize("seed", range(5))
def test_entropy_nonnegative(seed):
    r = np.random.default_rng(seed)
    mu = bernstein_szego_measure(random_alpha(r, 2, 3), 1024)
    for g in (-1, -0.4, 0, 0.5, 1):
        assert entropy_K(g, mu) >= -1e-8


def test_flip_examples(rng):
    np.testing.assert_array_equal(flip_measure(lambda0(2, 64)).density, lambda0(2, 64).density)
    flipped = flip_measure(lambda_g(1.0, 1, 128))
    np.testing.assert_allclose(flipped.density, lambda_g(-1.0, 1, 128).density, atol=1e-15)
    mu = make_measure(bernstein_szego_measure(random_alpha(rng, 2, 3), 64).density * 0.5,
                      atoms=[(0.25, 0.5)], dim=2)
    twice = flip_measure(flip_measure(mu))
    np.testing.assert_array_equal(twice.density, mu.density)
    assert twice.atoms[0].theta == pytest.approx(0.25, abs=1e-15)


def test_caratheodory_examples(bs_half, rng):
    z = np.array([0.0, 0.3, -0.5j, 0.9 * np.exp(1j)])
    np.testing.assert_allclose(caratheodory_eval(lambda0(2), z), np.broadcast_to(np.eye(2), (4, 2, 2)), atol=1e-14)
    mu = bernstein_szego_measure(random_alpha(rng, 3, 4), 1024)
    np.testing.assert_allclose(caratheodory_eval(mu, 0.0), np.eye(3), atol=1e-10)
    F = caratheodory_eval(bs_half, 0.3)[0, 0]
    assert F == pytest.approx(1 + 2 * 0.15 / 0.85, abs=1e-12)
    assert F.real == pytest.approx(1.3529412, abs=1e-7)
    with pytest.raises(RadiusTooLarge):
        caratheodory_eval(bs_half, 0.995)


def test_caratheodory_matches_moment_series(rng):
    M = 512
    mu = make_measure(bernstein_szego_measure(random_alpha(rng, 2, 3), M).density * 0.7,
                      atoms=[(2.0, 0.3)], dim=2)
    c = moments(mu, M // 4)
    for z in (0.2 + 0.1j, -0.6j, 0.95, 0.99 * np.exp(2j)):
        series = np.eye(2) + 2 * sum(c[n] * z**n for n in range(1, M // 4 + 1))
        bound = 2 * abs(z) ** (M // 4 + 1) / (1 - abs(z))
        F = caratheodory_eval(mu, z)
        assert np.max(np.abs(F - series)) <= bound + 1e-12
        herm = 0.5 * (F + dagger(F))
        assert np.linalg.eigvalsh(herm).min() >= -1e-12
