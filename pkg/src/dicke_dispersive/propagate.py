"""Time evolution, frame composition and observables.

Static Hamiltonians are propagated by eigendecomposition (or Krylov
stepping for large spaces); time-dependent ones by a fourth-order
commutator-free Magnus scheme whose exponentials are applied with
Lanczos.  Every trajectory carries its own convergence diagnostics.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh, eigh_tridiagonal
from scipy.sparse.linalg import expm_multiply

from .errors import DimensionMismatch, FrameMismatch, NonHermitian, StepTooLarge
from .hamiltonians import Frame, ModelConfig, TimeDependentOperator, frame_displacement
from .hilbert import HERMITIAN_TOL, SpinBosonBasis

DENSE_LIMIT = 4000
NORM_TOL = 1e-9
CONVERGENCE_TOL = 1e-6
DEFAULT_STEPS_PER_PERIOD = 512


@dataclass(frozen=True)
class TimeGrid:
    """Uniform sample times ``t_start .. t_end`` (inclusive)."""

    t_start: float
    t_end: float
    n_samples: int

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValueError("need at least one sample")
        if self.n_samples > 1 and not self.t_end > self.t_start:
            raise ValueError("t_end must exceed t_start")

    @classmethod
    def cycles(cls, n_cycles: float, samples_per_cycle: int = 16, omega: float = 1.0, start_cycles: float = 0.0):
        period = 2 * math.pi / omega
        n = int(round((n_cycles - start_cycles) * samples_per_cycle)) + 1
        return cls(start_cycles * period, n_cycles * period, n)

    @property
    def times(self) -> np.ndarray:
        return np.linspace(self.t_start, self.t_end, self.n_samples)

    @property
    def spacing(self) -> float:
        return (self.t_end - self.t_start) / (self.n_samples - 1) if self.n_samples > 1 else 0.0


@dataclass
class Trajectory:
    """Sampled states (one row per time) and propagation diagnostics."""

    times: np.ndarray
    states: np.ndarray
    diagnostics: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.times)


def _check_state(psi0: np.ndarray, dim: int) -> np.ndarray:
    psi0 = np.asarray(psi0, dtype=complex)
    if psi0.shape != (dim,):
        raise DimensionMismatch(f"state has shape {psi0.shape}, operator dimension is {dim}")
    norm = np.linalg.norm(psi0)
    if abs(norm - 1.0) > 1e-10:
        raise ValueError(f"initial state norm {norm} is not 1")
    return psi0


def norm_drift(states: np.ndarray) -> float:
    return float(np.max(np.abs(np.linalg.norm(states, axis=-1) - 1.0), initial=0.0))


class StaticEvolution:
    """``exp(-i H t)`` for a fixed hermitian ``H``, diagonalised once."""

    def __init__(self, H: np.ndarray, method: str = "auto"):
        H = np.asarray(H)
        if H.ndim != 2 or H.shape[0] != H.shape[1]:
            raise DimensionMismatch("Hamiltonian must be square")
        herm = float(np.max(np.abs(H - H.conj().T), initial=0.0))
        if herm > HERMITIAN_TOL:
            raise NonHermitian(f"Hamiltonian fails hermiticity by {herm:.2e}")
        self.dim = H.shape[0]
        if method == "auto":
            method = "eigh" if self.dim <= DENSE_LIMIT else "krylov"
        self.method = method
        self.H = H
        if method == "eigh":
            real = np.iscomplexobj(H) and not np.any(H.imag)
            self.energies, self.vectors = eigh(H.real if real else H)
        elif method != "krylov":
            raise ValueError(f"unknown method {method!r}")

    def states(self, psi0: np.ndarray, times: np.ndarray, chunk: int = 2048) -> np.ndarray:
        psi0 = _check_state(psi0, self.dim)
        times = np.asarray(times, dtype=float)
        if self.method == "krylov":
            return self._krylov_states(psi0, times)
        coeffs = self.vectors.conj().T @ psi0
        out = np.empty((len(times), self.dim), dtype=complex)
        for start in range(0, len(times), chunk):
            ts = times[start : start + chunk]
            phases = np.exp(-1j * np.outer(ts, self.energies)) * coeffs
            out[start : start + chunk] = phases @ self.vectors.T
        return out

    def overlaps(self, psi0: np.ndarray, ref: np.ndarray, times: np.ndarray, chunk: int = 4096) -> np.ndarray:
        """``<ref| exp(-iHt) |psi0>`` without storing the states."""
        psi0 = _check_state(psi0, self.dim)
        ref = np.asarray(ref, dtype=complex)
        times = np.asarray(times, dtype=float)
        if self.method == "krylov":
            return self._krylov_states(psi0, times) @ ref.conj()
        weights = (ref.conj() @ self.vectors) * (self.vectors.conj().T @ psi0)
        out = np.empty(len(times), dtype=complex)
        for start in range(0, len(times), chunk):
            ts = times[start : start + chunk]
            out[start : start + chunk] = np.exp(-1j * np.outer(ts, self.energies)) @ weights
        return out

    def _krylov_states(self, psi0, times):
        if len(times) == 1:
            return expm_multiply(-1j * self.H * times[0], psi0)[None, :]
        steps = np.diff(times)
        if not np.allclose(steps, steps[0], rtol=1e-12, atol=0):
            raise ValueError("Krylov path needs a uniform time grid")
        return expm_multiply(
            -1j * self.H, psi0, start=times[0], stop=times[-1], num=len(times), endpoint=True
        )


def evolve_static(H: np.ndarray, psi0: np.ndarray, grid: TimeGrid) -> Trajectory:
    """``psi(t) = exp(-iHt) psi0`` on ``grid``."""
    evo = StaticEvolution(H)
    states = evo.states(psi0, grid.times)
    drift = norm_drift(states)
    return Trajectory(grid.times, states, {"method": evo.method, "norm_drift": drift})


def lanczos_expm(matvec, v: np.ndarray, dt: float, tol: float = 1e-14, max_dim: int = 40) -> np.ndarray:
    """Apply ``exp(-i dt H) v`` with ``H`` given by ``matvec``, using a Lanczos basis.

    The basis is grown until the residual estimate falls below
    ``tol * |v|``; full re-orthogonalisation keeps it unitary.
    """
    norm0 = np.linalg.norm(v)
    if norm0 == 0.0:
        return v.copy()
    basis = np.empty((max_dim + 1, v.size), dtype=complex)
    basis[0] = v / norm0
    alphas, betas = [], []
    for j in range(max_dim):
        w = matvec(basis[j])
        alpha = float(np.vdot(basis[j], w).real)
        w = w - alpha * basis[j]
        if j:
            w -= betas[-1] * basis[j - 1]
        w -= basis[: j + 1].T @ (basis[: j + 1].conj() @ w)
        beta = float(np.linalg.norm(w))
        alphas.append(alpha)
        if j:
            evals, evecs = eigh_tridiagonal(np.array(alphas), np.array(betas), check_finite=False)
        else:
            evals, evecs = np.array(alphas), np.ones((1, 1))
        y = evecs @ (np.exp(-1j * dt * evals) * evecs[0].conj())
        if beta * abs(y[-1]) < tol or beta < 1e-300:
            return norm0 * (basis[: j + 1].T @ y)
        betas.append(beta)
        basis[j + 1] = w / beta
    raise StepTooLarge(f"Lanczos did not converge in {max_dim} vectors; reduce the step")


# fourth-order commutator-free Magnus, two exponentials per step
_SQ3 = math.sqrt(3.0)
_CF4_NODES = (0.5 - _SQ3 / 6.0, 0.5 + _SQ3 / 6.0)
_CF4_A = ((3.0 + 2.0 * _SQ3) / 12.0, (3.0 - 2.0 * _SQ3) / 12.0)


def _cf4_step(Hfun: TimeDependentOperator, psi: np.ndarray, t: float, h: float) -> np.ndarray:
    t1 = t + _CF4_NODES[0] * h
    t2 = t + _CF4_NODES[1] * h
    a_big, a_small = _CF4_A
    first = Hfun.combination((t1, t2), (a_big, a_small))
    second = Hfun.combination((t1, t2), (a_small, a_big))
    psi = lanczos_expm(first.dot, psi, h)
    return lanczos_expm(second.dot, psi, h)


def _matvec_of(Hfun):
    if isinstance(Hfun, TimeDependentOperator):
        return Hfun
    return _DenseCallable(Hfun)


class _DenseCallable:
    """Adapter giving a plain ``t -> matrix`` callable a ``matvec``."""

    def __init__(self, fun):
        self.fun = fun
        self.mode_period = getattr(fun, "mode_period", 2 * math.pi)

    def matvec(self, t, v):
        return self.fun(t) @ v

    def combination(self, times, weights):
        return sum(w * self.fun(t) for t, w in zip(times, weights))


def _propagate_fixed(Hfun, psi0: np.ndarray, times: np.ndarray, h_target: float) -> tuple[np.ndarray, float]:
    out = np.empty((len(times), psi0.size), dtype=complex)
    psi = psi0.copy()
    out[0] = psi
    h_used = h_target
    for i in range(1, len(times)):
        span = times[i] - times[i - 1]
        n_sub = max(1, int(math.ceil(span / h_target - 1e-9)))
        h = span / n_sub
        h_used = min(h_used, h)
        t = times[i - 1]
        for s in range(n_sub):
            psi = _cf4_step(Hfun, psi, t + s * h, h)
        out[i] = psi
    return out, h_used


def evolve_timedep(
    Hfun,
    psi0: np.ndarray,
    grid: TimeGrid,
    step: float | None = None,
    tol: float = CONVERGENCE_TOL,
    max_halvings: int = 8,
) -> Trajectory:
    """Propagate under a time-dependent Hamiltonian until step halving converges.

    Starts from ``step`` (default: 1/512 of the mode period), propagates with
    ``h`` and ``h/2`` and accepts the finer run once no sampled amplitude
    moves by ``tol`` or more.
    """
    op = _matvec_of(Hfun)
    psi0 = np.asarray(psi0, dtype=complex)
    if hasattr(op, "dim") and psi0.shape != (op.dim,):
        raise DimensionMismatch(f"state has shape {psi0.shape}, operator dimension is {op.dim}")
    psi0 = _check_state(psi0, psi0.size)
    times = grid.times
    h = step if step is not None else op.mode_period / DEFAULT_STEPS_PER_PERIOD
    coarse, _ = _propagate_fixed(op, psi0, times, h)
    for _ in range(max_halvings):
        fine, h_fine = _propagate_fixed(op, psi0, times, h / 2)
        change = float(np.max(np.abs(fine - coarse)))
        if change < tol:
            duration = max(times[-1] - times[0], 1e-300)
            drift = norm_drift(fine)
            return Trajectory(
                times,
                fine,
                {
                    "method": "cf4-lanczos",
                    "step": h_fine,
                    "halving_change": change,
                    "norm_drift": drift,
                    "norm_drift_per_time": drift / duration,
                },
            )
        coarse, h = fine, h / 2
    raise StepTooLarge(f"no convergence to {tol:g} after {max_halvings} halvings (last change {change:.2e})")


# ---------------------------------------------------------------------------
# frames
# ---------------------------------------------------------------------------


def _frame_rates(cfg: ModelConfig, frame: Frame, k: int | None) -> np.ndarray | None:
    """Diagonal generator ``E`` of the free rotation ``exp(-i E t)`` undone by ``frame``."""
    basis = cfg.basis
    n = basis.n_of_index.astype(float)
    m2 = basis.m_of_index**2
    if frame in (Frame.LAB, Frame.DISPLACED):
        return None
    if frame in (Frame.H2, Frame.EFFECTIVE_LMG):
        return cfg.omega * n
    if frame in (Frame.H3, Frame.EFFECTIVE_HALF_INTEGER):
        return cfg.omega * n - cfg.chi * m2
    if frame is Frame.EFFECTIVE_DSC:
        # detuned chain operators rotate with k*omega instead of g^2/omega
        rate = cfg.chi if k is None else k * cfg.omega
        return cfg.omega * n - rate * m2
    raise FrameMismatch(f"no lab-frame composition for frame {frame!r}")


def inner_initial_state(psi0: np.ndarray, cfg: ModelConfig, frame: Frame) -> np.ndarray:
    """Lab state ``psi0`` expressed in ``frame`` at ``t = 0`` (that is, ``D^dag psi0``)."""
    psi0 = np.asarray(psi0, dtype=complex)
    if psi0.shape != (cfg.basis.dim,):
        raise DimensionMismatch("state does not match the configuration basis")
    if Frame(frame) is Frame.LAB:
        return psi0.copy()
    return frame_displacement(cfg).conj().T @ psi0


def compose_lab_frame(
    states: np.ndarray,
    times: np.ndarray,
    cfg: ModelConfig,
    frame: Frame,
    k: int | None = None,
    displacement: np.ndarray | None = None,
) -> np.ndarray:
    """Map inner-frame states back to the lab: ``D exp(-i E t) psi_inner(t)``.

    ``E`` is ``omega a^dag a`` for the H2 picture (and the LMG average),
    ``omega a^dag a - (g^2/omega) Jx^2`` for the H3 picture and the
    resonant chain operators.  ``D`` is :func:`frame_displacement`.
    """
    frame = Frame(frame)
    states = np.atleast_2d(np.asarray(states, dtype=complex))
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if states.shape[1] != cfg.basis.dim:
        raise DimensionMismatch("states do not match the configuration basis")
    if states.shape[0] != times.shape[0]:
        raise DimensionMismatch("one time per state is required")
    if frame is Frame.LAB:
        return states.copy()
    rates = _frame_rates(cfg, frame, k)
    rotated = states if rates is None else states * np.exp(-1j * np.outer(times, rates))
    d = frame_displacement(cfg) if displacement is None else displacement
    return rotated @ d.T


# ---------------------------------------------------------------------------
# observables
# ---------------------------------------------------------------------------


def survival_probability(states: np.ndarray, psi_ref: np.ndarray) -> np.ndarray:
    """``|<psi_ref|psi(t)>|^2`` for every sampled state."""
    states = np.atleast_2d(states)
    psi_ref = np.asarray(psi_ref)
    if states.shape[1] != psi_ref.shape[0]:
        raise DimensionMismatch("reference state does not match the trajectory")
    return np.clip(np.abs(states @ psi_ref.conj()) ** 2, 0.0, 1.0)


def photon_cdf(states: np.ndarray, basis: SpinBosonBasis, m_max: int) -> np.ndarray:
    """Probability of at most ``m_max`` photons."""
    states = np.atleast_2d(states)
    if states.shape[1] != basis.dim:
        raise DimensionMismatch("states do not match the basis")
    if not 0 <= m_max <= basis.n_max:
        raise ValueError(f"m_max must lie in [0, {basis.n_max}]")
    mask = basis.n_of_index <= m_max
    return np.clip(np.sum(np.abs(states[:, mask]) ** 2, axis=1), 0.0, 1.0)


def photon_distribution(states: np.ndarray, basis: SpinBosonBasis) -> np.ndarray:
    """Photon-number populations, shape ``(n_times, n_max + 1)``."""
    states = np.atleast_2d(states)
    pops = np.abs(states.reshape(states.shape[0], basis.spin_dim, basis.fock_dim)) ** 2
    return pops.sum(axis=1)


def expectation(states: np.ndarray, op: np.ndarray, real: bool = True) -> np.ndarray:
    states = np.atleast_2d(states)
    if states.shape[1] != op.shape[0]:
        raise DimensionMismatch("operator does not match the trajectory")
    values = np.einsum("ti,ti->t", states.conj(), states @ op.T)
    if real:
        herm = float(np.max(np.abs(op - op.conj().T), initial=0.0))
        if herm > HERMITIAN_TOL:
            raise NonHermitian("real-valued expectation needs a hermitian operator")
        return values.real
    return values
