from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lapzeta.errors import EmptySpectrum, ZeroEigenvalue
from lapzeta.spectra import (BoundaryCondition, LatticeSpec, axis_eigenvalues,
                             dirichlet_free_logdet_relation, interior_count_identity, logdet_exact,
                             product_spectrum, volume_vectors)


def path_matrix(n, bc):
    """Dense 1-d Laplacian used as an independent eigenvalue oracle."""
    if bc == "dirichlet":
        m = n - 1
        A = 2 * np.eye(m) - np.eye(m, k=1) - np.eye(m, k=-1)
        return A
    if bc == "free":
        A = 2 * np.eye(n) - np.eye(n, k=1) - np.eye(n, k=-1)
        A[0, 0] = A[-1, -1] = 1
        if n == 1:
            A[0, 0] = 0
        return A
    A = 2 * np.eye(n) - np.roll(np.eye(n), 1, axis=1) - np.roll(np.eye(n), -1, axis=1)
    if n == 1:
        A = np.zeros((1, 1))
    if n == 2:
        A = np.array([[2.0, -2.0], [-2.0, 2.0]])
    return A


def kron_sum(mats):
    out = mats[0]
    for M in mats[1:]:
        out = np.kron(out, np.eye(M.shape[0])) + np.kron(np.eye(out.shape[0]), M)
    return out


@pytest.mark.parametrize("n,bc,expected", [
    (2, "dirichlet", [2.0]),
    (3, "dirichlet", [1.0, 3.0]),
    (3, "periodic", [0.0, 3.0, 3.0]),
    (1, "dirichlet", []),
])
def test_axis_examples(n, bc, expected):
    np.testing.assert_allclose(axis_eigenvalues(n, bc).expanded(), expected, atol=1e-15)


@pytest.mark.parametrize("bc", ["dirichlet", "free", "periodic"])
@pytest.mark.parametrize("n", [2, 3, 5, 8])
def test_axis_matches_dense_matrix(n, bc):
    ours = axis_eigenvalues(n, bc).expanded()
    ref = np.linalg.eigvalsh(path_matrix(n, bc))
    np.testing.assert_allclose(ours, np.sort(ref), atol=1e-12)


@pytest.mark.parametrize("sizes,bc", [((3, 4), "dirichlet"), ((3, 3, 2), "free"), ((4, 3), "periodic"),
                                      ((5, 2, 3), "dirichlet")])
def test_product_matches_kronecker_sum(sizes, bc):
    ours = product_spectrum(LatticeSpec(sizes, bc)).expanded()
    ref = np.linalg.eigvalsh(kron_sum([path_matrix(n, bc) for n in sizes]))
    np.testing.assert_allclose(ours, np.sort(ref), atol=1e-11)


def test_product_examples():
    np.testing.assert_allclose(product_spectrum(LatticeSpec((2, 2))).expanded(), [4.0], rtol=1e-15)
    np.testing.assert_allclose(product_spectrum(LatticeSpec((3, 3))).expanded(), [2, 4, 4, 6], atol=1e-14)
    np.testing.assert_allclose(product_spectrum(LatticeSpec((2,), "periodic", 1.0)).expanded(), [1, 5])


def test_rescale_multiplies_by_u_squared():
    base = product_spectrum(LatticeSpec((4, 3))).expanded()
    scaled = product_spectrum(LatticeSpec((4, 3), rescale=3.0)).expanded()
    np.testing.assert_allclose(scaled, 9 * base, rtol=1e-15)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(1, 12), min_size=1, max_size=4),
       st.sampled_from(list(BoundaryCondition)))
def test_multiplicity_count(sizes, bc):
    spec = product_spectrum(LatticeSpec(tuple(sizes), bc))
    expected = math.prod(n - 1 for n in sizes) if bc is BoundaryCondition.DIRICHLET else math.prod(sizes)
    assert spec.total_count == expected
    if expected and expected < 5000:
        vals, mult = spec.to_arrays()
        assert int(mult.sum()) == expected
        assert np.all(vals >= 0)


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 500))
def test_dirichlet_spectrum_symmetric_about_two(n):
    vals = np.sort(axis_eigenvalues(n, "dirichlet").expanded())
    # 4 sin^2(pi q / 2n) and 4 - 4 sin^2(pi (n-q) / 2n) agree only to rounding
    np.testing.assert_allclose(vals, np.sort(4.0 - vals), rtol=0, atol=8 * np.finfo(float).eps)


def test_logdet_examples():
    assert logdet_exact(LatticeSpec((3,))) == pytest.approx(math.log(3), rel=1e-15)
    assert logdet_exact(LatticeSpec((3,), "periodic"), exclude_zero_modes=True) == pytest.approx(math.log(9), rel=1e-15)
    assert logdet_exact(LatticeSpec((2,), "periodic", 1.0)) == pytest.approx(math.log(5), rel=1e-15)
    assert logdet_exact(LatticeSpec((1, 5))) == 0.0


def test_logdet_errors():
    with pytest.raises(ZeroEigenvalue):
        logdet_exact(LatticeSpec((2, 2), "periodic"))
    with pytest.raises(EmptySpectrum):
        logdet_exact(LatticeSpec((1,), "periodic"), exclude_zero_modes=True)


@pytest.mark.parametrize("n", [2, 17, 256, 1000, 4096])
def test_path_and_cycle_determinants(n):
    assert math.exp(logdet_exact(LatticeSpec((n,)))) == pytest.approx(n, rel=1e-12)
    cyc = math.exp(logdet_exact(LatticeSpec((n,), "periodic"), exclude_zero_modes=True))
    assert cyc == pytest.approx(n * n, rel=1e-12)


def test_logdet_against_dense_slogdet():
    A = kron_sum([path_matrix(n, "dirichlet") for n in (5, 4, 3)])
    sign, ref = np.linalg.slogdet(A)
    assert sign == 1
    assert logdet_exact(LatticeSpec((5, 4, 3))) == pytest.approx(ref, rel=1e-13)


def test_thread_count_and_blocking_do_not_change_bits():
    spec = LatticeSpec((37, 41, 23), mass_squared=0.3)
    from lapzeta.spectra import product_spectrum as ps
    ref = logdet_exact(spec, workers=1, block_size=1024)
    for w in (2, 3, 8):
        assert logdet_exact(spec, workers=w, block_size=1024) == ref
    assert ps(spec, 1024).n_blocks > 8


def test_streaming_order_matches_materialized():
    spec = product_spectrum(LatticeSpec((4, 5, 3), "free"), block_size=7)
    streamed = sorted(v for v, m in spec for _ in range(m))
    np.testing.assert_array_equal(streamed, spec.expanded())


def test_volume_vector_examples():
    V = volume_vectors([5])
    assert V.values == (Fraction(1, 2), Fraction(5))
    n1, n2 = 6, 7
    V = volume_vectors([n1, n2])
    assert V.values == (Fraction(1, 4), Fraction(n1 + n2, 2), Fraction(n1 * n2))
    W = volume_vectors([1.0, 1.0, 1.0])
    assert W.as_floats() == [1 / 8, 3 / 4, 3 / 2, 1.0]


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(1, 20), min_size=1, max_size=5))
def test_interior_count_identity_exact(sizes):
    lhs, rhs = interior_count_identity(sizes)
    assert Fraction(lhs) == rhs
    V = volume_vectors(sizes)
    assert V[0] == Fraction(1, 2 ** len(sizes))
    assert V[len(sizes)] == math.prod(sizes)
    assert all(v > 0 for v in V.values)


@pytest.mark.parametrize("d,n", [(1, 4), (2, 3), (2, 2), (3, 4), (2, 7)])
def test_dirichlet_free_relation_holds_with_zero_mode_excluded(d, n):
    lhs, rhs = dirichlet_free_logdet_relation([n] * d, "exclude")
    assert rhs == pytest.approx(lhs, abs=1e-12)


@pytest.mark.parametrize("d,n", [(1, 4), (2, 3)])
def test_dirichlet_free_relation_fails_with_infinitesimal_mass(d, n):
    # the shifted zero modes leave -(-1)^d log(eps) behind
    eps = 1e-8
    lhs, rhs = dirichlet_free_logdet_relation([n] * d, "mass", epsilon=eps)
    assert rhs - lhs == pytest.approx(-((-1) ** d) * math.log(eps), rel=1e-5)
