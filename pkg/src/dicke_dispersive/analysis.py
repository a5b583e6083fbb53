"""Closed-form dispersive predictions and scans against exact evolution."""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import get_window

from .hamiltonians import ModelConfig, build_dicke, required_cutoff
from .hilbert import basis_state
from .propagate import StaticEvolution

VALIDITY_LIMIT = 0.1
PMIN_SKIP_FRACTION = 0.01


def _coupling_term(g: float, k: int, omega: float, omega0: float) -> float:
    # 4 w^2 w0^2 (g/w)^{2k} e^{-g^2/w^2} / k!, in log space for large k
    if omega0 == 0.0 or g == 0.0:
        return 0.0
    x = g / omega
    log_val = (
        math.log(4.0) + 2 * math.log(omega) + 2 * math.log(abs(omega0))
        + 2 * k * math.log(abs(x)) - x * x - math.lgamma(k + 1)
    )
    return math.exp(log_val)


def pmin_analytic(g: float, k: int, omega: float = 1.0, omega0: float = 0.01) -> float:
    """Lowest survival probability of ``|Jx=0, n=0>`` near the k-th resonance (J = 1).

    A Lorentzian in ``g^2`` centred on ``k omega^2``.  Without any coupling
    between the two resonant states (``omega0 = 0``) nothing moves and the
    result is 1.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    d = g * g - k * omega * omega
    c = _coupling_term(g, k, omega, omega0)
    if c == 0.0:
        return 1.0
    return d * d / (d * d + c)


def shifted_frequency(detuning: float, coupling: float, omega: float = 1.0) -> float:
    """``(1/2) sqrt(detuning^2 + coupling) / omega`` with ``detuning = g^2 - k omega^2``."""
    return 0.5 * math.sqrt(detuning * detuning + coupling) / omega


def freq_analytic(g: float, k: int, omega: float = 1.0, omega0: float = 0.01) -> float:
    """Shifted oscillation frequency near the k-th resonance, in units of omega.

    ``(1/2) sqrt((g^2 - k w^2)^2 + 4 w^2 w0^2 (g/w)^{2k} e^{-g^2/w^2} / k!) / w``.
    The survival probability itself oscillates at twice this angular
    frequency; :func:`extract_frequency` applies the matching factor.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    return shifted_frequency(g * g - k * omega * omega, _coupling_term(g, k, omega, omega0), omega)


@dataclass(frozen=True)
class ValidityReport:
    ok: bool
    omega0_margin: float
    g_margin: float
    omega0_max: float
    g_max: float
    reading: str

    @property
    def margins(self) -> dict:
        return {"omega0": self.omega0_margin, "g": self.g_margin}


def validity_bounds(J, omega: float = 1.0, omega0: float = 0.0, g: float = 0.0, reading: str = "N") -> ValidityReport:
    """Check ``2 w0 J <= 0.1 w`` and the coupling bound of the weak dispersive regime.

    ``reading="N"`` uses ``(g/w)^2 N^2 <= 0.1`` with ``N = 2J``; ``"J"`` uses
    ``(g/w)^2 J^2 <= 0.1``.  Margins are ratios to the bound, so a margin
    above 1 means the bound is violated.
    """
    J = float(J)
    if reading not in ("N", "J"):
        raise ValueError("reading must be 'N' or 'J'")
    size = 2.0 * J if reading == "N" else J
    omega0_max = math.inf if J == 0 else VALIDITY_LIMIT * omega / (2.0 * J)
    g_max = math.inf if size == 0 else omega * math.sqrt(VALIDITY_LIMIT) / size
    omega0_margin = 2.0 * omega0 * J / (VALIDITY_LIMIT * omega)
    g_margin = (g / omega) ** 2 * size**2 / VALIDITY_LIMIT
    return ValidityReport(omega0_margin <= 1 and g_margin <= 1, omega0_margin, g_margin, omega0_max, g_max, reading)


def g_crit(omega: float, omega0: float, N: int) -> float:
    """Critical coupling ``sqrt(w0 w / N)`` of the superradiant transition."""
    if N < 1:
        raise ValueError("N must be >= 1")
    if omega0 < 0:
        raise ValueError("omega0 must be non-negative")
    return math.sqrt(omega0 * omega / N)


def extract_pmin(p: np.ndarray, skip_fraction: float = PMIN_SKIP_FRACTION) -> float:
    """Minimum of ``p`` ignoring the leading ``skip_fraction`` of samples."""
    p = np.asarray(p, dtype=float)
    start = int(len(p) * skip_fraction)
    return float(np.min(p[start:]))


def extract_frequency(
    times: np.ndarray,
    p: np.ndarray,
    max_angular: float | None = None,
    window: str | None = "hann",
    pad_factor: int = 8,
) -> float:
    """Frequency scale of the dominant slow oscillation of ``p``.

    Spectral peak of the mean-subtracted signal with zero padding and
    parabolic interpolation.  The peak sits at the angular frequency of
    ``p``, which is twice the closed-form frequency, so half of it is
    returned.  ``max_angular`` excludes micromotion.
    """
    times = np.asarray(times, dtype=float)
    p = np.asarray(p, dtype=float)
    dt = times[1] - times[0]
    if not np.allclose(np.diff(times), dt, rtol=1e-9, atol=0):
        raise ValueError("times must be uniform")
    sig = p - p.mean()
    if window:
        sig = sig * get_window(window, len(sig))
    n_fft = pad_factor * len(sig)
    spec = np.abs(np.fft.rfft(sig, n_fft))
    ang = 2 * math.pi * np.fft.rfftfreq(n_fft, dt)
    band = ang > 0
    if max_angular is not None:
        band &= ang < max_angular
    idx = np.flatnonzero(band)
    if idx.size == 0:
        raise ValueError("empty frequency band")
    i = idx[np.argmax(spec[idx])]
    shift = 0.0
    if 0 < i < len(spec) - 1:
        y0, y1, y2 = spec[i - 1], spec[i], spec[i + 1]
        denom = y0 - 2 * y1 + y2
        if denom != 0:
            shift = 0.5 * (y0 - y2) / denom
    return float((ang[i] + shift * (ang[1] - ang[0])) / 2.0)


@dataclass
class ScanResult:
    J: float
    k: int
    g_values: np.ndarray
    p_min_numeric: np.ndarray
    p_min_analytic: np.ndarray
    freq_numeric: np.ndarray
    freq_analytic: np.ndarray
    horizons: np.ndarray = field(default_factory=lambda: np.zeros(0))

    COLUMNS = ("g", "pmin_num", "pmin_ana", "freq_num", "freq_ana")

    def rows(self):
        return zip(self.g_values, self.p_min_numeric, self.p_min_analytic, self.freq_numeric, self.freq_analytic)


def _worker_count(n_tasks: int, threads: int | None) -> int:
    if threads is None:
        env = os.environ.get("DICKE_THREADS")
        threads = int(env) if env else (os.cpu_count() or 1)
    return max(1, min(int(threads), n_tasks))


def _scan_point(cfg: ModelConfig, k: int, horizon_cycles: float, periods: float, samples_per_period: int):
    omega = cfg.omega
    cfg = cfg.replace(n_max=max(cfg.n_max, required_cutoff(cfg)))
    f_pred = freq_analytic(cfg.g, k, omega, cfg.omega0)
    p_period = math.pi / f_pred if f_pred > 0 else math.inf
    horizon = max(horizon_cycles * 2 * math.pi / omega, periods * p_period if math.isfinite(p_period) else 0.0)
    dt = min(p_period / samples_per_period, 2 * math.pi / (8 * omega))
    times = np.arange(0.0, horizon + 0.5 * dt, dt)
    psi0 = basis_state(cfg.basis, 0 if cfg.basis.is_integer else "1/2", 0)
    evo = StaticEvolution(build_dicke(cfg))
    p = np.abs(evo.overlaps(psi0, psi0, times)) ** 2
    freq = extract_frequency(times, p, max_angular=0.5 * omega)
    return extract_pmin(p), freq, horizon


def scan_resonance(
    cfg_base: ModelConfig,
    k: int,
    g_grid,
    horizon_cycles: float = 0.0,
    periods: float = 20.0,
    samples_per_period: int = 64,
    threads: int | None = None,
) -> ScanResult:
    """Exact minimum and oscillation frequency of P(t) over a grid of couplings.

    The horizon is the longer of ``horizon_cycles`` mode periods and
    ``periods`` predicted oscillation periods of P(t).  Grid points run in a
    thread pool capped by ``threads`` or ``DICKE_THREADS``; results keep
    grid order.
    """
    g_grid = np.asarray(list(g_grid), dtype=float)
    cfgs = [cfg_base.replace(g=float(g)) for g in g_grid]
    with ThreadPoolExecutor(_worker_count(len(cfgs), threads)) as pool:
        out = list(pool.map(lambda c: _scan_point(c, k, horizon_cycles, periods, samples_per_period), cfgs))
    om, o0 = cfg_base.omega, cfg_base.omega0
    return ScanResult(
        J=float(cfg_base.J),
        k=int(k),
        g_values=g_grid,
        p_min_numeric=np.array([o[0] for o in out]),
        p_min_analytic=np.array([pmin_analytic(g, k, om, o0) for g in g_grid]),
        freq_numeric=np.array([o[1] for o in out]),
        freq_analytic=np.array([freq_analytic(g, k, om, o0) for g in g_grid]),
        horizons=np.array([o[2] for o in out]),
    )
