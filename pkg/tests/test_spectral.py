import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from qwsearch.errors import DegenerateSpectrumError
from qwsearch.graph import generate_lcd, hub_node
from qwsearch.spectral import basis_state, eigendecompose, evolve, leading_eigenvector, overlap

from helpers import complete, star, two_components
from oracles import random_state, random_symmetric, rk4


# ---------------------------------------------------------------- eigendecompose


def test_pauli_x_spectrum():
    d = eigendecompose(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert d.values.tolist() == pytest.approx([-1.0, 1.0])


def test_identity_spectrum_and_basis():
    d = eigendecompose(np.eye(5))
    assert d.values == pytest.approx(np.ones(5))
    assert np.allclose(d.vectors.T @ d.vectors, np.eye(5), atol=1e-12)


@pytest.mark.parametrize("n", [2, 5, 16])
def test_complete_graph_spectrum(n):
    d = eigendecompose(complete(n).adjacency)
    assert d.values[-1] == pytest.approx(n - 1)
    assert d.values[:-1] == pytest.approx(-np.ones(n - 1))


@pytest.mark.parametrize("seed", range(5))
def test_reconstruction_and_orthonormality(seed):
    m = random_symmetric(30, seed)
    d = eigendecompose(m)
    assert np.all(np.diff(d.values) >= 0)
    assert np.abs(d.reconstruct() - m).max() <= 1e-8 * np.abs(m).max()
    assert np.abs(d.vectors.T @ d.vectors - np.eye(30)).max() <= 1e-10


def test_decomposition_is_read_only():
    d = eigendecompose(np.eye(3))
    with pytest.raises(ValueError):
        d.values[0] = 2.0


@pytest.mark.parametrize(
    "bad",
    [np.array([[0.0, 1.0], [0.5, 0.0]]), np.ones((2, 3)), np.array([[np.nan, 0.0], [0.0, 1.0]])],
)
def test_rejects_non_symmetric_or_non_finite(bad):
    with pytest.raises(ValueError):
        eigendecompose(bad)


@settings(max_examples=40, deadline=None)
@given(
    arrays(np.float64, (6, 6), elements=st.floats(-5, 5)),
    st.floats(-10, 10),
)
def test_spectral_shift(x, c):
    m = (x + x.T) / 2
    d = eigendecompose(m)
    shifted = eigendecompose(m + c * np.eye(6))
    assert shifted.values == pytest.approx(d.values + c, abs=1e-9)
    # projectors onto well separated eigenvalues are phase independent
    gaps = np.diff(d.values)
    for k in range(6):
        left = gaps[k - 1] if k > 0 else np.inf
        right = gaps[k] if k < 5 else np.inf
        if min(left, right) > 1e-3:
            p0 = np.outer(d.vectors[:, k], d.vectors[:, k])
            p1 = np.outer(shifted.vectors[:, k], shifted.vectors[:, k])
            assert np.abs(p0 - p1).max() < 1e-6


# ---------------------------------------------------------------- leading eigenvector


@pytest.mark.parametrize("n", [3, 8, 20])
def test_complete_graph_perron_vector_is_uniform(n):
    lam, v = leading_eigenvector(complete(n).adjacency)
    assert lam == pytest.approx(n - 1)
    assert v == pytest.approx(np.full(n, 1 / math.sqrt(n)))


@pytest.mark.parametrize("leaves", [1, 4, 9, 25])
def test_star_leading_eigenvalue(leaves):
    lam, v = leading_eigenvector(star(leaves).adjacency)
    assert lam == pytest.approx(math.sqrt(leaves))
    assert v[0] == pytest.approx(1 / math.sqrt(2))


def test_perron_vector_agrees_with_power_iteration():
    a = generate_lcd(300, 3, seed=5).adjacency
    lam, v = leading_eigenvector(a)
    # shift by the largest degree so the iteration converges to the top eigenvalue
    b = a + a.sum(axis=1).max() * np.eye(a.shape[0])
    x = np.ones(a.shape[0])
    for _ in range(20_000):
        x = b @ x
        x /= np.linalg.norm(x)
    assert np.abs(x - v).max() < 1e-8
    assert x @ a @ x == pytest.approx(lam, rel=1e-12)


def test_lcd_perron_vector_localises_on_hub():
    g = generate_lcd(1000, 10, seed=0)
    lam, v = leading_eigenvector(g.adjacency)
    assert v.min() >= -1e-12
    assert int(np.argmax(v)) == hub_node(g)
    # weight concentrates on the largest degrees
    top = np.argsort(g.degree)[::-1][:20]
    assert (v[top] ** 2).sum() > 20 / 1000 * 5


def test_disconnected_graph_is_degenerate():
    with pytest.raises(DegenerateSpectrumError):
        leading_eigenvector(two_components(4).adjacency)


@settings(max_examples=30, deadline=None)
@given(st.integers(5, 200), st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_perron_positivity(n, m, seed):
    g = generate_lcd(n, m, seed)
    try:
        lam, v = leading_eigenvector(g.adjacency)
    except DegenerateSpectrumError:
        assert not g.is_connected
        return
    assert v.min() >= -1e-12
    assert np.linalg.norm(v) == pytest.approx(1.0, abs=1e-12)


# ---------------------------------------------------------------- evolve and overlap


def test_evolve_at_zero_is_identity():
    d = eigendecompose(random_symmetric(8, 1))
    psi = random_state(8, 2)
    assert np.abs(evolve(d, psi, 0.0) - psi).max() <= 1e-12


@pytest.mark.parametrize("gamma", [0.3, 1.0, 2.5])
def test_single_edge_rabi_oscillation(gamma):
    d = eigendecompose(-gamma * np.array([[0.0, 1.0], [1.0, 0.0]]))
    for t in np.linspace(0, 5, 11):
        psi = evolve(d, basis_state(2, 0), t)
        assert abs(psi[1]) ** 2 == pytest.approx(math.sin(gamma * t) ** 2, abs=1e-12)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_evolve_matches_runge_kutta(seed):
    h = random_symmetric(8, seed)
    psi = random_state(8, seed + 100)
    exact = evolve(eigendecompose(h), psi, 1.7)
    assert np.abs(exact - rk4(h, psi, 1.7, 4000)).max() < 1e-6


def test_evolve_dimension_mismatch():
    d = eigendecompose(np.eye(3))
    with pytest.raises(ValueError):
        evolve(d, np.ones(4), 1.0)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000), st.floats(0, 50), st.floats(0, 50))
def test_unitarity_and_composition(seed, t1, t2):
    d = eigendecompose(random_symmetric(7, seed))
    psi = random_state(7, seed + 1)
    a = evolve(d, psi, t1)
    assert np.linalg.norm(a) == pytest.approx(1.0, abs=1e-10)
    assert np.abs(evolve(d, a, t2) - evolve(d, psi, t1 + t2)).max() < 1e-9


def test_overlap_examples():
    x = random_state(6, 3)
    assert overlap(x, x) == pytest.approx(1.0)
    assert overlap(basis_state(4, 0), basis_state(4, 2)) == 0
    _, v = leading_eigenvector(complete(4).adjacency)
    assert overlap(v, basis_state(4, 1)) == pytest.approx(0.5)


def test_overlap_conjugates_left_argument():
    a = np.array([1j, 0.0])
    b = np.array([1.0, 0.0])
    assert overlap(a, b) == pytest.approx(-1j)
    with pytest.raises(ValueError):
        overlap(a, np.ones(3))
