import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.linalg import expm

from dicke_dispersive.errors import CutoffTooSmall, IndexOutOfRange
from dicke_dispersive.hilbert import (
    SpinBosonBasis,
    as_half_integer,
    as_twice,
    basis_state,
    boson_operators,
    displacement_operator,
    from_jz_coordinates,
    is_hermitian,
    is_unitary,
    jz_basis_state,
    jz_eigenbasis,
    spin_operators,
    to_jz_coordinates,
)

twice_j_values = st.integers(min_value=1, max_value=40)  # J up to 20


def comm(a, b):
    return a @ b - b @ a


def test_half_integer_parsing():
    assert as_twice(3) == 6
    assert as_twice("3/2") == 3
    assert as_twice(2.5) == 5
    assert as_half_integer(Fraction(1, 2)) == Fraction(1, 2)
    with pytest.raises(ValueError):
        as_twice(1.3)
    with pytest.raises(ValueError):
        as_twice("1/3")


def test_canonical_index_example():
    basis = SpinBosonBasis.from_j(1, 2)
    psi = basis_state(basis, 0, 0)
    assert basis.dim == 9
    assert np.flatnonzero(psi).tolist() == [3]
    assert psi[3] == 1


@given(twice_j=st.integers(0, 9), n_max=st.integers(0, 12))
def test_index_is_bijective(twice_j, n_max):
    basis = SpinBosonBasis(twice_j, n_max)
    seen = set()
    for twice_m in range(-twice_j, twice_j + 1, 2):
        for n in range(n_max + 1):
            idx = basis.index(Fraction(twice_m, 2), n)
            assert basis.label(idx) == (Fraction(twice_m, 2), n)
            assert basis.m_of_index[idx] == twice_m / 2 and basis.n_of_index[idx] == n
            seen.add(idx)
    assert seen == set(range(basis.dim))


def test_index_errors():
    basis = SpinBosonBasis.from_j(1, 3)
    with pytest.raises(IndexOutOfRange):
        basis.index("1/2", 0)  # wrong parity
    with pytest.raises(IndexOutOfRange):
        basis.index(2, 0)
    with pytest.raises(IndexOutOfRange):
        basis.index(0, 4)
    with pytest.raises(IndexOutOfRange):
        basis.label(basis.dim)
    with pytest.raises(IndexOutOfRange):
        basis_state(basis, 0, -1)
    with pytest.raises(ValueError):
        SpinBosonBasis(-1, 3)


def test_spin_half_is_pauli_over_two():
    s = spin_operators("1/2")
    np.testing.assert_allclose(s.jx, np.diag([-0.5, 0.5]))
    np.testing.assert_allclose(s.jz, 0.5 * np.array([[0, 1], [1, 0]]))
    np.testing.assert_allclose(s.jy, 0.5 * np.array([[0, -1j], [1j, 0]]))
    for op in (s.jx, s.jy, s.jz):
        np.testing.assert_allclose(op @ op, 0.25 * np.eye(2), atol=1e-15)


@given(twice_j_values)
def test_angular_momentum_algebra(twice_j):
    s = spin_operators(Fraction(twice_j, 2))
    j = twice_j / 2
    tol = 1e-12
    assert np.max(np.abs(comm(s.jx, s.jy) - 1j * s.jz)) <= tol
    assert np.max(np.abs(comm(s.jy, s.jz) - 1j * s.jx)) <= tol
    assert np.max(np.abs(comm(s.jz, s.jx) - 1j * s.jy)) <= tol
    cas = s.jx @ s.jx + s.jy @ s.jy + s.jz @ s.jz
    assert np.max(np.abs(cas - j * (j + 1) * np.eye(twice_j + 1))) <= tol
    # ladder relations Jx J+- = J+- (Jx +- 1)
    np.testing.assert_allclose(comm(s.jx, s.jplus), s.jplus, atol=tol)
    np.testing.assert_allclose(comm(s.jx, s.jminus), -s.jminus, atol=tol)
    np.testing.assert_array_equal(s.jminus, s.jplus.conj().T)
    np.testing.assert_allclose(s.jplus, s.jz - 1j * s.jy, atol=tol)


def test_spin_two_casimir():
    s = spin_operators(2)
    cas = s.jx @ s.jx + s.jy @ s.jy + s.jz @ s.jz
    np.testing.assert_allclose(cas, 6 * np.eye(5), atol=1e-13)


def test_boson_operators():
    a, adag = boson_operators(1)
    np.testing.assert_array_equal(a, np.array([[0, 1], [0, 0]]))
    a, adag = boson_operators(7)
    np.testing.assert_allclose(np.diag(adag @ a).real, np.arange(8))
    c = a @ adag - adag @ a
    dev = c - np.eye(8)
    assert np.count_nonzero(np.abs(dev) > 1e-14) == 1
    assert dev[7, 7] == pytest.approx(-8)
    with pytest.raises(ValueError):
        boson_operators(0)


def test_displacement_trivial_cases():
    basis = SpinBosonBasis.from_j(1, 14)
    np.testing.assert_array_equal(displacement_operator(basis, lambda m: 0.0), np.eye(basis.dim))
    d = displacement_operator(basis, lambda m: 0.8 * m)
    fd = basis.fock_dim
    mid = slice(fd, 2 * fd)
    np.testing.assert_array_equal(d[mid, mid], np.eye(fd))
    psi = basis_state(basis, 0, 0)
    np.testing.assert_array_equal(d @ psi, psi)


def test_displacement_vacuum_element():
    # brute force: <0| exp(beta (a^dag - a)) |0> = e^{-1/2} at beta = 1
    basis = SpinBosonBasis.from_j("1/2", 100)
    d = displacement_operator(basis, [0.0, 1.0])
    idx = basis.index("1/2", 0)
    assert d[idx, idx].real == pytest.approx(math.exp(-0.5), abs=1e-14)
    a, _ = boson_operators(100)
    np.testing.assert_allclose(d[101:, 101:], expm(a.conj().T - a), atol=1e-12)


@given(st.floats(-2.5, 2.5), st.integers(1, 4))
def test_displacement_unitary(beta, twice_j):
    basis = SpinBosonBasis(twice_j, 60)
    d = displacement_operator(basis, lambda m: beta * m)
    assert is_unitary(d, 1e-10)


def test_displacement_cutoff_check():
    basis = SpinBosonBasis.from_j(2, 10)
    with pytest.raises(CutoffTooSmall) as info:
        displacement_operator(basis, lambda m: 1.5 * m)
    assert info.value.suggested_n_max > 10
    big = SpinBosonBasis.from_j(2, info.value.suggested_n_max)
    assert is_unitary(displacement_operator(big, lambda m: 1.5 * m))
    with pytest.raises(ValueError):
        displacement_operator(basis, [0.0, 1.0])


def test_basis_state_expectations():
    basis = SpinBosonBasis.from_j("3/2", 4)
    s = spin_operators("3/2")
    a, adag = boson_operators(4)
    jx, num = basis.spin_op(s.jx), basis.fock_op(adag @ a)
    for m in ("-3/2", "1/2"):
        for n in (0, 3):
            psi = basis_state(basis, m, n)
            assert (psi.conj() @ jx @ psi).real == pytest.approx(float(Fraction(m)))
            assert (psi.conj() @ num @ psi).real == pytest.approx(n)


@given(twice_j_values)
def test_jz_basis_round_trip(twice_j):
    vals, vecs = jz_eigenbasis(Fraction(twice_j, 2))
    assert is_unitary(vecs, 1e-12)
    np.testing.assert_array_equal(vals, np.arange(-twice_j, twice_j + 1, 2) / 2)
    basis = SpinBosonBasis(twice_j, 2)
    rng = np.random.default_rng(twice_j)
    psi = rng.normal(size=(3, basis.dim)) + 1j * rng.normal(size=(3, basis.dim))
    back = from_jz_coordinates(to_jz_coordinates(psi, basis), basis)
    np.testing.assert_allclose(back, psi, atol=1e-12)


def test_jz_basis_state_is_eigenvector():
    basis = SpinBosonBasis.from_j(2, 3)
    jz = basis.spin_op(spin_operators(2).jz)
    for mz in (-2, 0, 1):
        psi = jz_basis_state(basis, mz, 1)
        np.testing.assert_allclose(jz @ psi, mz * psi, atol=1e-12)
        assert np.linalg.norm(psi) == pytest.approx(1)
    with pytest.raises(IndexOutOfRange):
        jz_basis_state(basis, "1/2", 0)


def test_flags():
    assert is_hermitian(np.array([[1, 1j], [-1j, 2]]))
    assert not is_hermitian(np.array([[0, 1], [0, 0]]))
    assert is_unitary(np.array([[0, 1], [1, 0]]))
