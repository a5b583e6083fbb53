"""Collective spin (x quantization) tensored with a truncated bosonic mode.

Canonical ordering: the spin index is the slow one, so ``|m, n>`` sits at
``(m + J) * (n_max + 1) + n`` with ``m`` running over the Jx eigenvalues
``-J, ..., J`` in ascending order.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Callable, NamedTuple, Sequence, Union

import numpy as np
from scipy.linalg import eigh, expm
from scipy.stats import poisson

from .errors import CutoffTooSmall, IndexOutOfRange

HERMITIAN_TOL = 1e-12
UNITARY_TOL = 1e-10
TAIL_TOL = 1e-10

HalfIntLike = Union[int, float, Fraction, str]


def as_twice(value: HalfIntLike) -> int:
    """Return ``2 * value`` as an exact integer.

    Accepts ints, floats that are exact multiples of 1/2, Fractions and
    strings such as ``"3/2"``.
    """
    twice = 2 * Fraction(value)
    if twice.denominator != 1:
        raise ValueError(f"{value!r} is not an integer or half-integer")
    return int(twice)


def as_half_integer(value: HalfIntLike) -> Fraction:
    return Fraction(as_twice(value), 2)


@dataclass(frozen=True)
class SpinBosonBasis:
    """Product basis ``|m, n>`` with ``m`` the Jx eigenvalue and ``n`` the photon number."""

    twice_j: int
    n_max: int

    def __post_init__(self):
        if self.twice_j < 0:
            raise ValueError("J must be non-negative")
        if self.n_max < 0:
            raise ValueError("n_max must be non-negative")

    @classmethod
    def from_j(cls, J: HalfIntLike, n_max: int) -> "SpinBosonBasis":
        return cls(as_twice(J), int(n_max))

    @property
    def J(self) -> Fraction:
        return Fraction(self.twice_j, 2)

    @property
    def spin_dim(self) -> int:
        return self.twice_j + 1

    @property
    def fock_dim(self) -> int:
        return self.n_max + 1

    @property
    def dim(self) -> int:
        return self.spin_dim * self.fock_dim

    @property
    def is_integer(self) -> bool:
        return self.twice_j % 2 == 0

    @cached_property
    def twice_m_values(self) -> np.ndarray:
        out = np.arange(-self.twice_j, self.twice_j + 1, 2)
        out.flags.writeable = False
        return out

    @cached_property
    def m_values(self) -> np.ndarray:
        out = self.twice_m_values / 2.0
        out.flags.writeable = False
        return out

    @cached_property
    def m_of_index(self) -> np.ndarray:
        """Jx eigenvalue of every canonical index."""
        out = np.repeat(self.m_values, self.fock_dim)
        out.flags.writeable = False
        return out

    @cached_property
    def n_of_index(self) -> np.ndarray:
        """Photon number of every canonical index."""
        out = np.tile(np.arange(self.fock_dim), self.spin_dim)
        out.flags.writeable = False
        return out

    def index(self, m: HalfIntLike, n: int) -> int:
        twice_m = as_twice(m)
        if abs(twice_m) > self.twice_j or (twice_m - self.twice_j) % 2:
            raise IndexOutOfRange(f"m={Fraction(twice_m, 2)} not allowed for J={self.J}")
        if not 0 <= n <= self.n_max:
            raise IndexOutOfRange(f"n={n} outside [0, {self.n_max}]")
        return (twice_m + self.twice_j) // 2 * self.fock_dim + int(n)

    def label(self, index: int) -> tuple[Fraction, int]:
        if not 0 <= index < self.dim:
            raise IndexOutOfRange(f"index {index} outside [0, {self.dim})")
        i_spin, n = divmod(int(index), self.fock_dim)
        return Fraction(2 * i_spin - self.twice_j, 2), n

    def spin_op(self, op: np.ndarray) -> np.ndarray:
        """Lift a spin-factor operator to the full space."""
        return np.kron(op, np.eye(self.fock_dim))

    def fock_op(self, op: np.ndarray) -> np.ndarray:
        """Lift a Fock-factor operator to the full space."""
        return np.kron(np.eye(self.spin_dim), op)


class SpinOperators(NamedTuple):
    jx: np.ndarray
    jy: np.ndarray
    jz: np.ndarray
    jplus: np.ndarray
    jminus: np.ndarray


def spin_operators(J: HalfIntLike) -> SpinOperators:
    """Collective spin matrices in the Jx eigenbasis.

    ``jplus`` raises the Jx eigenvalue by one and ``jminus`` lowers it,
    with ``J+- = Jz -+ i Jy``, so ``Jz = (J+ + J-)/2`` and
    ``Jy = i (J+ - J-)/2``.  With this choice ``[Jx, Jy] = i Jz`` holds
    with the usual sign.
    """
    twice_j = as_twice(J)
    if twice_j < 1:
        raise ValueError("spin operators need J >= 1/2")
    j = twice_j / 2.0
    m = np.arange(-twice_j, twice_j + 1, 2) / 2.0
    dim = twice_j + 1
    jplus = np.zeros((dim, dim), dtype=complex)
    jplus[np.arange(1, dim), np.arange(dim - 1)] = np.sqrt(j * (j + 1) - m[:-1] * (m[:-1] + 1))
    jminus = jplus.conj().T.copy()
    jx = np.diag(m).astype(complex)
    jz = 0.5 * (jplus + jminus)
    jy = 0.5j * (jplus - jminus)
    return SpinOperators(jx, jy, jz, jplus, jminus)


def boson_operators(n_max: int) -> tuple[np.ndarray, np.ndarray]:
    """Truncated annihilation and creation matrices on ``|0>, ..., |n_max>``."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    a = np.diag(np.sqrt(np.arange(1, n_max + 1, dtype=float)), 1).astype(complex)
    return a, a.conj().T.copy()


def displaced_vacuum_tail(beta: float, n_max: int) -> float:
    """Probability weight of the coherent state ``|beta>`` above ``n_max``."""
    return float(poisson.sf(n_max, beta * beta))


def displacement_operator(
    basis: SpinBosonBasis,
    beta_of_m: Callable[[float], float] | Sequence[float],
    check_tail: bool = True,
) -> np.ndarray:
    """Block-diagonal ``exp(Lambda (a^dag - a))`` with ``Lambda = beta(Jx)``.

    ``beta_of_m`` is either a callable of the Jx eigenvalue or a sequence
    with one entry per ``m`` (ascending).
    """
    if callable(beta_of_m):
        betas = np.array([beta_of_m(m) for m in basis.m_values], dtype=float)
    else:
        betas = np.asarray(beta_of_m, dtype=float)
        if betas.shape != (basis.spin_dim,):
            raise ValueError("need one displacement per Jx eigenvalue")
    if not np.all(np.isfinite(betas)):
        raise ValueError("displacement amplitudes must be finite")
    if check_tail:
        worst = float(np.max(np.abs(betas))) if betas.size else 0.0
        tail = displaced_vacuum_tail(worst, basis.n_max)
        if tail >= TAIL_TOL:
            need = int(poisson.isf(TAIL_TOL, worst * worst)) + 1
            raise CutoffTooSmall(
                f"displaced vacuum tail {tail:.2e} above n_max={basis.n_max}", suggested_n_max=need
            )
    a = np.diag(np.sqrt(np.arange(1, basis.fock_dim, dtype=float)), 1)
    gen = a.T - a
    fd = basis.fock_dim
    out = np.zeros((basis.dim, basis.dim), dtype=complex)
    for i, b in enumerate(betas):
        sl = slice(i * fd, (i + 1) * fd)
        out[sl, sl] = np.eye(fd) if b == 0.0 else expm(b * gen)
    return out


def basis_state(basis: SpinBosonBasis, m: HalfIntLike, n: int) -> np.ndarray:
    psi = np.zeros(basis.dim, dtype=complex)
    psi[basis.index(m, n)] = 1.0
    return psi


def jz_eigenbasis(J: HalfIntLike) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and eigenvectors of Jz expressed in the Jx basis.

    Columns are phase-fixed so the largest-magnitude component of each is
    real and positive; the returned matrix is the basis change
    ``|Jz = m_z> -> Jx coordinates``.
    """
    ops = spin_operators(J)
    vals, vecs = eigh(ops.jz)
    for col in range(vecs.shape[1]):
        mag = np.abs(vecs[:, col])
        # first near-maximal entry, so ties do not depend on rounding noise
        k = int(np.argmax(mag > mag.max() - 1e-9))
        vecs[:, col] *= np.exp(-1j * np.angle(vecs[k, col]))
    return np.round(vals * 2) / 2, vecs


def jz_basis_state(basis: SpinBosonBasis, mz: HalfIntLike, n: int) -> np.ndarray:
    """``|Jz = mz, n>`` in canonical (Jx) coordinates."""
    twice_mz = as_twice(mz)
    if abs(twice_mz) > basis.twice_j or (twice_mz - basis.twice_j) % 2:
        raise IndexOutOfRange(f"mz={Fraction(twice_mz, 2)} not allowed for J={basis.J}")
    if not 0 <= n <= basis.n_max:
        raise IndexOutOfRange(f"n={n} outside [0, {basis.n_max}]")
    _, vecs = jz_eigenbasis(basis.J)
    spin = vecs[:, (twice_mz + basis.twice_j) // 2]
    fock = np.zeros(basis.fock_dim)
    fock[n] = 1.0
    return np.kron(spin, fock)


def to_jz_coordinates(states: np.ndarray, basis: SpinBosonBasis) -> np.ndarray:
    """Re-express state vectors (last axis canonical) in the ``|Jz, n>`` basis."""
    _, vecs = jz_eigenbasis(basis.J)
    u = np.kron(vecs.conj().T, np.eye(basis.fock_dim))
    return states @ u.T


def from_jz_coordinates(states: np.ndarray, basis: SpinBosonBasis) -> np.ndarray:
    _, vecs = jz_eigenbasis(basis.J)
    u = np.kron(vecs, np.eye(basis.fock_dim))
    return states @ u.T


def is_hermitian(op: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    return float(np.max(np.abs(op - op.conj().T), initial=0.0)) <= tol


def is_unitary(op: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    eye = np.eye(op.shape[0])
    return float(np.max(np.abs(op.conj().T @ op - eye), initial=0.0)) <= tol
