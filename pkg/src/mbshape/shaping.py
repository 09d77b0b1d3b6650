"""Maxwell-Boltzmann shaping optimization for a target SNR.

For a fixed amplitude scaling ``delta`` the MB parameter ``nu`` is pinned by
the power constraint ``E[(delta X)**2] = SNR/2``; ``delta`` is then chosen by
golden-section search to maximize the mutual information.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .constellation import (
    NOISE_VAR_1D,
    PamConstellation,
    base_grid,
    db_to_linear,
    mb_pmf,
)
from .infotheory import DEFAULT_NODES, LN2, mi_awgn_2d, mi_nats

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
DELTA_EPS = 1e-6
DELTA_RTOL = 1e-7
TIE_BITS = 1e-12


def _energy(x2: np.ndarray, nu: float) -> float:
    w = np.exp(-nu * (x2 - x2.min()))
    return float(np.dot(w, x2) / w.sum())


def nu_for_power(grid, delta: float, target_energy: float) -> float:
    """MB parameter ``nu >= 0`` such that ``sum P_nu(x) (delta x)**2 == target_energy``.

    The constrained energy decreases strictly in ``nu`` from the uniform-input
    energy towards ``delta**2 * min(x**2)``, so a bracketing root finder is
    sufficient. Raises ``ValueError`` outside that open range; a target equal to
    the uniform energy returns ``0``.
    """
    x2 = np.asarray(grid, dtype=float) ** 2
    if not delta > 0:
        raise ValueError(f"delta must be > 0, got {delta!r}")
    if not target_energy > 0:
        raise ValueError(f"target energy must be > 0, got {target_energy!r}")
    e = target_energy / delta**2
    e_uniform = float(x2.mean())
    e_floor = float(x2.min())
    rel = abs(e - e_uniform) / e_uniform
    if rel <= 1e-12:
        return 0.0
    if e > e_uniform:
        raise ValueError("target energy exceeds the uniform-input energy (delta too small)")
    if e <= e_floor or e_uniform - e_floor <= 0:
        raise ValueError("target energy unattainable: at or below the minimum-level energy")

    hi = 1.0 / (x2.max() - e_floor)
    while _energy(x2, hi) > e:
        hi *= 2.0
        if hi > 1e300:
            raise ValueError("failed to bracket nu")
    nu = brentq(lambda v: _energy(x2, v) - e, 0.0, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    return float(nu)


def golden_section_max(f, lo: float, hi: float, rtol: float = DELTA_RTOL, tie: float = TIE_BITS):
    """Maximize a unimodal ``f`` on ``[lo, hi]``.

    Near-ties (within ``tie``) keep the left bracket, i.e. favour smaller
    arguments. Returns ``(x, f(x))``.
    """
    a, b = lo, hi
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    scale = max(abs(lo), abs(hi))
    while (b - a) > rtol * scale:
        if fc >= fd - tie:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    if fc >= fd - tie:
        return c, fc
    return d, fd


@dataclass(frozen=True, eq=False)
class ShapingSolution:
    """Optimized MB input for one shaping SNR.

    ``constellation`` is the power-constrained (delta-scaled) PAM;
    ``normalized`` is the same PMF on unit per-dimension energy points.
    """

    constellation: PamConstellation
    nu: float
    delta: float
    mi_bits_per_2d: float
    shaping_snr_db: float

    @property
    def normalized(self) -> PamConstellation:
        return self.constellation.normalized()

    @property
    def pmf(self) -> np.ndarray:
        return self.constellation.pmf

    def to_dict(self) -> dict:
        return {
            "m": self.constellation.m,
            "shaping_snr_db": self.shaping_snr_db,
            "nu": self.nu,
            "delta": self.delta,
            "mi_bits_per_2d": self.mi_bits_per_2d,
            "pmf": self.constellation.pmf.tolist(),
            "levels": self.constellation.levels.tolist(),
            "unit_energy_levels": self.normalized.levels.tolist(),
        }


def _mi_2d_bits(levels: np.ndarray, pmf: np.ndarray, nodes: int) -> float:
    return 2.0 * float(mi_nats(levels, pmf, NOISE_VAR_1D, nodes)) / LN2


def optimize_shaping(m: int, shaping_snr_db: float, grid=None, nodes: int = DEFAULT_NODES) -> ShapingSolution:
    """Best MB-shaped ``m``-PAM (per quadrature) for ``Es/N0 = shaping_snr_db``.

    ``grid`` overrides the odd-integer base grid; it must be antisymmetric and
    of power-of-two length.
    """
    if grid is None:
        grid = base_grid(m)
    else:
        grid = np.asarray(grid, dtype=float)
        if len(grid) != m:
            raise ValueError("grid length must equal m")
    target = db_to_linear(shaping_snr_db) / 2.0
    x2 = grid**2
    d_uniform = math.sqrt(target / x2.mean())

    if np.ptp(x2) == 0:
        # single modulus: shaping cannot change anything
        pam = PamConstellation(grid * d_uniform, np.full(m, 1.0 / m))
        return ShapingSolution(pam, 0.0, d_uniform, _mi_2d_bits(pam.levels, pam.pmf, nodes), shaping_snr_db)

    d_max = math.sqrt(target / x2.min())
    lo = d_uniform
    hi = d_max * (1.0 - DELTA_EPS)

    def objective(delta: float) -> float:
        nu = nu_for_power(grid, delta, target)
        return _mi_2d_bits(delta * grid, mb_pmf(grid, nu), nodes)

    delta, _ = golden_section_max(objective, lo, hi)
    # the uniform endpoint is never probed by the interior search
    if objective(lo) >= objective(delta):
        delta = lo
    nu = nu_for_power(grid, delta, target)
    pam = PamConstellation(delta * grid, mb_pmf(grid, nu))
    mi = float(mi_awgn_2d(pam, shaping_snr_db, nodes).mi_bits_per_2d)
    return ShapingSolution(pam, nu, delta, mi, shaping_snr_db)


def shaped_vs_uniform_mi(m: int, snr_db: float, nodes: int = DEFAULT_NODES) -> tuple[float, float]:
    """2D MIs of matched-shaped and uniform ``m**2``-QAM at the same SNR."""
    shaped = optimize_shaping(m, snr_db, nodes=nodes).mi_bits_per_2d
    uniform = mi_awgn_2d(PamConstellation.uniform(m), snr_db, nodes).mi_bits_per_2d
    return shaped, uniform
