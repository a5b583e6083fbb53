"""Dicke Hamiltonian, its displaced and interaction-picture forms, and the
first-order effective Hamiltonians of the two dispersive regimes.

All operators live on :class:`SpinBosonBasis` (Jx eigenbasis tensored with
Fock states).  Frequencies are in the same units as ``omega``.
"""
from __future__ import annotations

import dataclasses
import math
import warnings
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import cached_property

import numpy as np
from scipy.linalg import expm

from .coefficients import displacement_elements, omega_table
from .errors import CutoffTooSmall, NonHermitian, NotHalfInteger, NotInteger, OffResonance
from .hilbert import (
    HERMITIAN_TOL,
    SpinBosonBasis,
    as_half_integer,
    boson_operators,
    displacement_operator,
    spin_operators,
)

CUTOFF_TAIL_TOL = 1e-14


class Frame(str, Enum):
    LAB = "lab"
    DISPLACED = "displaced"
    H2 = "interaction_h2"
    H3 = "interaction_h3"
    EFFECTIVE_DSC = "effective_dsc"
    EFFECTIVE_HALF_INTEGER = "effective_half_integer"
    EFFECTIVE_LMG = "effective_lmg"


@dataclass(frozen=True)
class ModelConfig:
    """Physical parameters plus the numerical controls of one run.

    ``n_init`` is the largest photon number present in the initial state;
    it only enters the cutoff check.
    """

    omega0: float
    g: float
    J: Fraction
    n_max: int
    omega: float = 1.0
    frame: Frame = Frame.LAB
    n_init: int = 0
    resonance_tol: float = 1e-9

    def __post_init__(self):
        object.__setattr__(self, "J", as_half_integer(self.J))
        object.__setattr__(self, "frame", Frame(self.frame))
        if not self.omega > 0:
            raise ValueError("omega must be positive")
        if self.omega0 < 0 or self.g < 0:
            raise ValueError("omega0 and g must be non-negative")
        if self.J < Fraction(1, 2):
            raise ValueError("J must be at least 1/2")
        if self.n_max < 1:
            raise ValueError("n_max must be >= 1")

    def replace(self, **changes) -> "ModelConfig":
        return dataclasses.replace(self, **changes)

    @property
    def twice_j(self) -> int:
        return int(2 * self.J)

    @property
    def beta(self) -> float:
        """Displacement per unit Jx, g/omega."""
        return self.g / self.omega

    @property
    def chi(self) -> float:
        """Strength g^2/omega of the Jx^2 term."""
        return self.g * self.g / self.omega

    @property
    def coupling_ratio(self) -> float:
        return (self.g / self.omega) ** 2

    @property
    def nearest_k(self) -> int:
        return int(round(self.coupling_ratio))

    def is_resonant(self, k: int | None = None) -> bool:
        k = self.nearest_k if k is None else k
        return k >= 1 and abs(self.coupling_ratio - k) <= self.resonance_tol

    @cached_property
    def basis(self) -> SpinBosonBasis:
        return SpinBosonBasis(self.twice_j, self.n_max)

    def as_dict(self) -> dict:
        return {
            "omega": self.omega,
            "omega0": self.omega0,
            "g": self.g,
            "J": str(self.J),
            "n_max": self.n_max,
            "frame": self.frame.value,
            "n_init": self.n_init,
            "resonance_tol": self.resonance_tol,
        }


# ---------------------------------------------------------------------------
# cutoff handling
# ---------------------------------------------------------------------------


def displaced_fock_distribution(n_fock: int, alpha: float, n_top: int) -> np.ndarray:
    """Photon distribution ``|<n| exp(alpha (a - a^dag)) |n_fock>|^2`` for ``n <= n_top``."""
    out = np.zeros(n_top + 1)
    for n in range(min(n_fock, n_top) + 1):
        out[n] = displacement_elements(n, n_fock - n, alpha)[n] ** 2
    for n in range(n_fock + 1, n_top + 1):
        out[n] = displacement_elements(n_fock, n - n_fock, alpha)[n_fock] ** 2
    return out


def chain_top_photon(cfg: ModelConfig, n_start: int | None = None) -> int:
    """Highest photon number a resonance chain started at ``n_start`` (default ``n_init``) can reach."""
    n_start = cfg.n_init if n_start is None else n_start
    k = cfg.nearest_k
    if k < 1:
        return n_start
    # k (m^2 - m_min^2) at m = J; exact in twice-units
    tj = cfg.twice_j
    m_min_sq4 = 0 if tj % 2 == 0 else 1
    return n_start + k * (tj * tj - m_min_sq4) // 4


def _displaced_quantile(n_fock: int, alpha: float, tol: float) -> int:
    """Smallest ``n`` with less than ``tol`` of ``D(alpha)|n_fock>`` above it."""
    if alpha == 0.0:
        return n_fock
    r = math.sqrt(n_fock) + alpha
    search = int(r * r + 25 * r + 60)
    p = displaced_fock_distribution(n_fock, alpha, search)
    tail = np.cumsum(p[::-1])[::-1]  # tail[n] = weight at photon numbers >= n
    above = np.append(tail[1:], 0.0)  # weight strictly above n
    return int(np.nonzero(above < tol)[0][0])


def required_cutoff(cfg: ModelConfig, tol: float = CUTOFF_TAIL_TOL, spread_initial: bool = False) -> int:
    """Smallest ``n_max`` for which the worst-case displaced chain state leaks < ``tol``.

    The worst case is the top of the chain, Fock state ``chain_top_photon``,
    carried to the lab frame by the largest displacement ``(g/omega) J``.
    This assumes the initial spin state lives on ``m = 0`` (or ``+-1/2``),
    where the dressing is trivial.  Other initial spin states are dressed
    on entry as well; ``spread_initial=True`` first widens ``n_init`` by
    that displacement.
    """
    alpha = cfg.beta * float(cfg.J)
    n_start = _displaced_quantile(cfg.n_init, alpha, tol) if spread_initial else cfg.n_init
    n_top = chain_top_photon(cfg, n_start)
    return max(_displaced_quantile(n_top, alpha, tol), n_top, 1)


def check_cutoff(cfg: ModelConfig, spread_initial: bool = False) -> None:
    need = required_cutoff(cfg, spread_initial=spread_initial)
    if cfg.n_max < need:
        raise CutoffTooSmall(
            f"n_max={cfg.n_max} too small for J={cfg.J}, g={cfg.g:g}, n_init={cfg.n_init}; "
            f"need n_max >= {need}",
            suggested_n_max=need,
        )


# ---------------------------------------------------------------------------
# static builders
# ---------------------------------------------------------------------------


def _assert_hermitian(op: np.ndarray, name: str) -> np.ndarray:
    err = float(np.max(np.abs(op - op.conj().T), initial=0.0))
    if err > HERMITIAN_TOL:
        raise NonHermitian(f"{name} fails hermiticity by {err:.2e}")
    return op


def _x0(cfg: ModelConfig) -> np.ndarray:
    """Truncated ``exp(beta (a - a^dag))`` on the Fock factor."""
    a, adag = boson_operators(cfg.n_max)
    return expm(cfg.beta * (a - adag))


def build_dicke(cfg: ModelConfig, check: bool = True) -> np.ndarray:
    """``omega0 Jz + omega a^dag a + g Jx (a + a^dag)``."""
    if check:
        check_cutoff(cfg)
    basis = cfg.basis
    s = spin_operators(cfg.J)
    a, adag = boson_operators(cfg.n_max)
    h = (
        cfg.omega0 * basis.spin_op(s.jz)
        + cfg.omega * basis.fock_op(adag @ a)
        + cfg.g * np.kron(s.jx, a + adag)
    )
    return _assert_hermitian(h, "Dicke Hamiltonian")


def frame_displacement(cfg: ModelConfig) -> np.ndarray:
    """Unitary ``D = exp((g/omega) Jx (a - a^dag))`` with ``D^dag H D`` the displaced Hamiltonian.

    The lab-frame propagator factorises as ``U_H = D U_displaced D^dag``.
    """
    return displacement_operator(cfg.basis, lambda m: -cfg.beta * m)


def _coupling_block(cfg: ModelConfig) -> np.ndarray:
    # (omega0/2) (X0 J- + h.c.)
    s = spin_operators(cfg.J)
    lower = np.kron(s.jminus, _x0(cfg))
    return 0.5 * cfg.omega0 * (lower + lower.conj().T)


def build_displaced(cfg: ModelConfig, check: bool = True) -> np.ndarray:
    """``(omega0/2)(e^{beta(a - a^dag)} J- + h.c.) + omega a^dag a - (g^2/omega) Jx^2``."""
    if check:
        check_cutoff(cfg)
    basis = cfg.basis
    diag = cfg.omega * basis.n_of_index - cfg.chi * basis.m_of_index**2
    h = _coupling_block(cfg) + np.diag(diag)
    return _assert_hermitian(h, "displaced Hamiltonian")


@dataclass(frozen=True)
class TimeDependentOperator:
    """``H(t) = diag(u) C diag(u)^* + diag(static)`` with ``u = exp(i t rates)``.

    The constant hermitian block ``C`` is shared; each evaluation only
    applies phases.
    """

    coupling: np.ndarray
    rates: np.ndarray
    static: np.ndarray
    mode_period: float

    @property
    def dim(self) -> int:
        return self.coupling.shape[0]

    def __call__(self, t: float) -> np.ndarray:
        u = np.exp(1j * t * self.rates)
        return u[:, None] * self.coupling * u.conj()[None, :] + np.diag(self.static)

    def matvec(self, t: float, v: np.ndarray) -> np.ndarray:
        u = np.exp(1j * t * self.rates)
        return u * (self.coupling @ (u.conj() * v)) + self.static * v

    def combination(self, times, weights) -> np.ndarray:
        """Dense ``sum_i w_i H(t_i)``."""
        u = np.exp(1j * np.outer(self.rates, times))
        # sum_i w_i u_i u_i^dag as one rank-len(times) product
        out = self.coupling * ((u * np.asarray(weights)) @ u.conj().T)
        out[np.diag_indices_from(out)] += sum(weights) * self.static
        return out


def build_h2(cfg: ModelConfig, check: bool = True) -> TimeDependentOperator:
    """Displaced Hamiltonian in the interaction picture of ``omega a^dag a``."""
    if check:
        check_cutoff(cfg)
    basis = cfg.basis
    return TimeDependentOperator(
        coupling=_assert_hermitian(_coupling_block(cfg), "H2 coupling"),
        rates=cfg.omega * basis.n_of_index.astype(float),
        static=-cfg.chi * basis.m_of_index**2,
        mode_period=2 * math.pi / cfg.omega,
    )


def build_h3(cfg: ModelConfig, check: bool = True) -> TimeDependentOperator:
    """H2 moved further into the interaction picture of ``-(g^2/omega) Jx^2``."""
    if check:
        check_cutoff(cfg)
    basis = cfg.basis
    rates = cfg.omega * basis.n_of_index - cfg.chi * basis.m_of_index**2
    return TimeDependentOperator(
        coupling=_assert_hermitian(_coupling_block(cfg), "H3 coupling"),
        rates=rates,
        static=np.zeros(basis.dim),
        mode_period=2 * math.pi / cfg.omega,
    )


# ---------------------------------------------------------------------------
# effective (time-averaged) Hamiltonians
# ---------------------------------------------------------------------------


def _chain_operator(basis: SpinBosonBasis, omega0: float, beta: float, k: int | None) -> np.ndarray:
    """Secular part of the H3 coupling at the resonance ``g^2 = k omega^2``.

    The lowering ``m+1 -> m`` carries the phase ``(2m+1) k omega t``; it
    survives averaging together with the photon harmonic of the same rate,
    ``Delta = (2m+1) k``: ``Omega^Delta a^Delta`` for ``Delta > 0``,
    ``(-1)^|Delta| a^dag^|Delta| Omega^|Delta|`` for ``Delta < 0`` and
    ``Omega^0`` for ``Delta = 0``.  ``k=None`` keeps only ``Delta = 0``
    transitions, which is the off-resonant limit.
    """
    h = np.zeros((basis.dim, basis.dim), dtype=complex)
    j = basis.twice_j / 2.0
    fd = basis.fock_dim
    n_max = basis.n_max
    for i_low, twice_m in enumerate(basis.twice_m_values[:-1]):
        m = twice_m / 2.0
        jm = math.sqrt(j * (j + 1) - m * (m + 1))
        if k is None:
            if twice_m != -1:
                continue
            delta = 0
        else:
            delta = (twice_m + 1) * k
        d = abs(delta)
        if d > n_max:
            continue
        elems = 0.5 * omega0 * jm * displacement_elements(n_max - d, d, beta)
        n = np.arange(n_max - d + 1)
        if delta >= 0:
            rows = i_low * fd + n
            cols = (i_low + 1) * fd + n + d
        else:
            elems = elems * (-1) ** d
            rows = i_low * fd + n + d
            cols = (i_low + 1) * fd + n
        h[rows, cols] = elems
        h[cols, rows] = np.conj(elems)
    return h


def build_effective_dsc(
    cfg: ModelConfig, k: int | None = None, detuned: bool = False
) -> np.ndarray:
    """First-order effective Hamiltonian at the deep-strong-coupling resonance ``g = omega sqrt(k)``.

    With ``detuned=True`` the resonance check is skipped and the residual
    ``-(g^2/omega - k omega) Jx^2`` is kept; that operator then lives in the
    frame rotating with ``omega a^dag a - k omega Jx^2``.
    """
    if cfg.twice_j % 2:
        raise NotInteger(f"J={cfg.J} is half-integer; use build_effective_half_integer")
    k = cfg.nearest_k if k is None else int(k)
    if k < 1:
        raise OffResonance("resonance index k must be >= 1")
    if not detuned and not cfg.is_resonant(k):
        raise OffResonance(
            f"g^2/omega^2 = {cfg.coupling_ratio:.12g} is not within {cfg.resonance_tol:g} of k={k}"
        )
    h = _chain_operator(cfg.basis, cfg.omega0, cfg.beta, k)
    if detuned:
        h += np.diag(-(cfg.chi - k * cfg.omega) * cfg.basis.m_of_index**2)
    return _assert_hermitian(h, "effective DSC Hamiltonian")


def build_effective_half_integer(cfg: ModelConfig, k: int | None = None) -> np.ndarray:
    """Effective Hamiltonian for half-integer J.

    Without ``k`` this is the g-independent ``m = -1/2 <-> +1/2`` exchange
    weighted by ``Omega^0``.  Passing ``k`` at an exact resonance returns
    the full resonant chain operator (which contains that exchange).
    """
    if cfg.twice_j % 2 == 0:
        raise NotHalfInteger(f"J={cfg.J} is an integer; use build_effective_dsc")
    if k is not None and not cfg.is_resonant(k):
        raise OffResonance(f"g^2/omega^2 = {cfg.coupling_ratio:.12g} is not at k={k}")
    h = _chain_operator(cfg.basis, cfg.omega0, cfg.beta, k)
    return _assert_hermitian(h, "effective half-integer Hamiltonian")


def build_effective_lmg(cfg: ModelConfig) -> np.ndarray:
    """Photon-number-dependent LMG Hamiltonian ``omega0 Omega_n^0 Jz - (g^2/omega) Jx^2``."""
    if cfg.beta > 0.3:
        warnings.warn(
            f"g/omega = {cfg.beta:.3g} is not small; the LMG average is outside its regime",
            stacklevel=2,
        )
    s = spin_operators(cfg.J)
    omega_zero = np.diag(omega_table(cfg.n_max, 0, cfg.beta))
    h = cfg.omega0 * np.kron(s.jz, omega_zero) - cfg.chi * cfg.basis.spin_op(s.jx @ s.jx)
    return _assert_hermitian(h.astype(complex), "LMG Hamiltonian")


def effective_model(cfg: ModelConfig, kind: str = "auto") -> tuple[np.ndarray, Frame, int | None]:
    """Pick the effective Hamiltonian for ``cfg``.

    Returns ``(H, frame, k)`` where ``frame`` says which picture the
    operator acts in and ``k`` is the resonance index used (if any).

    ``auto`` chooses LMG when ``g^2 < omega^2/2``; otherwise the resonant
    chain at the nearest ``k`` (detuned when off resonance) for integer
    J, and the half-integer exchange for half-integer J.
    """
    if kind == "auto":
        if cfg.coupling_ratio < 0.5:
            kind = "lmg"
        elif cfg.twice_j % 2:
            kind = "half"
        else:
            kind = "dsc"
    if kind == "lmg":
        return build_effective_lmg(cfg), Frame.EFFECTIVE_LMG, None
    if kind == "half":
        k = cfg.nearest_k if cfg.is_resonant() else None
        return build_effective_half_integer(cfg, k), Frame.EFFECTIVE_HALF_INTEGER, k
    if kind == "dsc":
        k = cfg.nearest_k
        return build_effective_dsc(cfg, k, detuned=not cfg.is_resonant(k)), Frame.EFFECTIVE_DSC, k
    raise ValueError(f"unknown effective model {kind!r}")


__all__ = [
    "Frame",
    "ModelConfig",
    "TimeDependentOperator",
    "build_dicke",
    "build_displaced",
    "build_effective_dsc",
    "build_effective_half_integer",
    "build_effective_lmg",
    "build_h2",
    "build_h3",
    "check_cutoff",
    "chain_top_photon",
    "displaced_fock_distribution",
    "effective_model",
    "frame_displacement",
    "required_cutoff",
]
