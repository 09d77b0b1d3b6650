"""Sensitivity gains: SNR savings of shaped over uniform QAM at equal MI.

A shaped input achieving MI ``I`` at channel SNR ``c`` has gain
``required_snr_uniform(I) - c`` in dB. The shaped PMF may come from a
different (mismatched) shaping SNR; it is always rescaled to the channel's
power constraint, so only its shape is mismatched.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.interpolate import CubicSpline, PchipInterpolator
from scipy.optimize import brentq

from .constellation import NOISE_VAR_1D, PamConstellation, base_grid
from .infotheory import DEFAULT_NODES, LN2, mi_nats
from .shaping import optimize_shaping

SATURATION_BITS = 1e-3
MI_TOL = 1e-9

_TABLE_LO_DB = -30.0
_TABLE_HI_DB = 80.0
_TABLE_STEP_DB = 0.05


def uniform_mi_2d(m: int, snr_db, nodes: int = DEFAULT_NODES) -> np.ndarray:
    """2D MI of uniform ``m**2``-QAM, vectorized over ``snr_db``."""
    return shape_mi_2d(base_grid(m), np.full(m, 1.0 / m), snr_db, nodes)


def shape_mi_2d(grid, pmf, snr_db, nodes: int = DEFAULT_NODES) -> np.ndarray:
    """2D MI of the product QAM with PAM shape ``(grid, pmf)``, power-matched to each SNR."""
    grid = np.asarray(grid, dtype=float)
    pmf = np.asarray(pmf, dtype=float)
    snr = 10.0 ** (np.asarray(snr_db, dtype=float) / 10.0)
    # scaling the levels by k is equivalent to dividing the noise variance by k**2
    energy = float(np.dot(pmf, grid**2))
    noise = NOISE_VAR_1D * energy / (snr / 2.0)
    return 2.0 * mi_nats(grid, pmf, noise, nodes) / LN2


@lru_cache(maxsize=None)
def _uniform_table(m: int, nodes: int):
    snr = np.arange(_TABLE_LO_DB, _TABLE_HI_DB + _TABLE_STEP_DB / 2, _TABLE_STEP_DB)
    mi = uniform_mi_2d(m, snr, nodes)
    # strictly increasing up to where quadrature round-off flattens it
    keep = np.concatenate([[True], np.diff(mi) > 0])
    keep = np.logical_and.accumulate(keep)
    snr, mi = snr[keep], mi[keep]
    return snr, mi, PchipInterpolator(mi, snr), CubicSpline(snr, mi).derivative()


def required_snr_uniform_batch(m: int, targets, nodes: int = DEFAULT_NODES, tol: float = MI_TOL) -> np.ndarray:
    """Inverse of the uniform MI curve, vectorized over ``targets``.

    Newton steps start from an interpolated inverse of a tabulated curve;
    anything left unconverged is finished by bracketed regula falsi.
    Targets outside the tabulated MI range map to ``nan``.
    """
    targets = np.atleast_1d(np.asarray(targets, dtype=float))
    snr_tab, mi_tab, inverse, slope = _uniform_table(m, nodes)
    out = np.full(targets.shape, np.nan)
    ok = (targets > mi_tab[0]) & (targets < mi_tab[-1])
    if not ok.any():
        return out
    t = targets[ok]
    grid = base_grid(m)
    pmf = np.full(m, 1.0 / m)

    x = inverse(t)
    pending = np.arange(t.size)
    for _ in range(4):
        f = shape_mi_2d(grid, pmf, x[pending], nodes) - t[pending]
        pending = pending[np.abs(f) >= tol]
        if pending.size == 0:
            break
        f = f[np.abs(f) >= tol]
        d = slope(x[pending])
        x[pending] = np.clip(x[pending] - f / d, snr_tab[0], snr_tab[-1])
    if pending.size:
        x[pending] = _illinois(grid, pmf, t[pending], snr_tab, mi_tab, nodes, tol)
    out[ok] = x
    return out


def _illinois(grid, pmf, t, snr_tab, mi_tab, nodes, tol):
    k = np.clip(np.searchsorted(mi_tab, t) - 1, 0, len(mi_tab) - 2)
    a, b = snr_tab[k], snr_tab[k + 1]
    fa, fb = mi_tab[k] - t, mi_tab[k + 1] - t
    x = a.copy()
    side = np.zeros(t.shape, dtype=int)
    active = np.ones(t.shape, dtype=bool)
    for _ in range(200):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        xa, xb, ya, yb = a[idx], b[idx], fa[idx], fb[idx]
        xn = (xa * yb - xb * ya) / (yb - ya)
        fn = shape_mi_2d(grid, pmf, xn, nodes) - t[idx]
        x[idx] = xn
        left = np.sign(fn) == np.sign(ya)
        # move the endpoint sharing the sign; halve the one kept twice in a row
        a[idx] = np.where(left, xn, xa)
        fa[idx] = np.where(left, fn, np.where(side[idx] == 1, ya / 2, ya))
        b[idx] = np.where(left, xb, xn)
        fb[idx] = np.where(left, np.where(side[idx] == -1, yb / 2, yb), fn)
        side[idx] = np.where(left, -1, 1)
        done = (np.abs(fn) < tol) | (np.abs(b[idx] - a[idx]) < 1e-13)
        active[idx[done]] = False
    return x


def required_snr_uniform(m: int, target_mi_2d: float, nodes: int = DEFAULT_NODES) -> float:
    """SNR in dB at which uniform ``m**2``-QAM reaches ``target_mi_2d`` bits/2D."""
    cap = 2.0 * math.log2(m)
    if not 0.0 < target_mi_2d < cap:
        raise ValueError(f"target MI must lie in (0, {cap}), got {target_mi_2d!r}")
    snr = float(required_snr_uniform_batch(m, [target_mi_2d], nodes)[0])
    if math.isnan(snr):
        raise ValueError(f"target MI {target_mi_2d!r} too close to saturation to invert")
    return snr


def is_saturated(m: int, channel_snr_db, nodes: int = DEFAULT_NODES):
    """True where uniform MI is within ``SATURATION_BITS`` of ``log2(m**2)``."""
    return uniform_mi_2d(m, channel_snr_db, nodes) >= 2.0 * math.log2(m) - SATURATION_BITS


def gains_for_pmf(m: int, pmf, channel_snr_db, nodes: int = DEFAULT_NODES, saturated=None) -> np.ndarray:
    """Gain in dB of a fixed PAM PMF (on the base grid) over a vector of channel SNRs.

    Saturated channel SNRs give ``nan``. Pass a precomputed ``saturated`` mask
    to skip recomputing it.
    """
    c = np.atleast_1d(np.asarray(channel_snr_db, dtype=float))
    if saturated is None:
        saturated = is_saturated(m, c, nodes)
    gain = np.full(c.shape, np.nan)
    live = ~np.asarray(saturated)
    mi = shape_mi_2d(base_grid(m), pmf, c[live], nodes)
    gain[live] = required_snr_uniform_batch(m, mi, nodes) - c[live]
    return gain


def sensitivity_gain(m: int, channel_snr_db: float, shaping_snr_db: float, nodes: int = DEFAULT_NODES) -> float:
    """Gain in dB of the PMF optimized at ``shaping_snr_db`` when used at ``channel_snr_db``.

    Returns ``nan`` at saturated channel SNRs.
    """
    pmf = optimize_shaping(m, shaping_snr_db, nodes=nodes).pmf
    return float(gains_for_pmf(m, pmf, [channel_snr_db], nodes)[0])


@dataclass(frozen=True, eq=False)
class GainCurve:
    snr_grid_db: np.ndarray
    gain_db: np.ndarray

    @property
    def saturated(self) -> np.ndarray:
        return np.isnan(self.gain_db)

    def peak(self) -> tuple[float, float]:
        """``(snr_db, gain_db)`` at the largest finite gain."""
        i = int(np.nanargmax(self.gain_db))
        return float(self.snr_grid_db[i]), float(self.gain_db[i])

    def rows(self):
        for s, g in zip(self.snr_grid_db, self.gain_db):
            yield float(s), float(g)


def matched_gain_curve(m: int, snr_grid_db, nodes: int = DEFAULT_NODES) -> GainCurve:
    """Gain of matched shaping (PMF optimized at each channel SNR)."""
    snr = np.asarray(snr_grid_db, dtype=float)
    cap = 2.0 * math.log2(m)
    mi = np.array([optimize_shaping(m, float(s), nodes=nodes).mi_bits_per_2d for s in snr])
    gain = np.full(snr.shape, np.nan)
    ok = ~is_saturated(m, snr, nodes) & (mi < cap)
    gain[ok] = required_snr_uniform_batch(m, mi[ok], nodes) - snr[ok]
    return GainCurve(snr, gain)


def curve_crossings(a: GainCurve, b: GainCurve) -> list[float]:
    """SNRs where two gain curves on the same grid cross (linear interpolation)."""
    if not np.array_equal(a.snr_grid_db, b.snr_grid_db):
        raise ValueError("curves must share the SNR grid")
    d = a.gain_db - b.gain_db
    s = a.snr_grid_db
    out = []
    for i in range(len(d) - 1):
        if np.isnan(d[i]) or np.isnan(d[i + 1]):
            continue
        if d[i] == 0:
            out.append(float(s[i]))
        elif d[i] * d[i + 1] < 0:
            out.append(float(s[i] - d[i] * (s[i + 1] - s[i]) / (d[i + 1] - d[i])))
    return out


def matched_snr_for_rate(m: int, rate_2d: float, lo_db: float = -10.0, hi_db: float = 40.0) -> float:
    """SNR in dB at which matched-shaped ``m**2``-QAM reaches ``rate_2d`` bits/2D."""
    f = lambda s: optimize_shaping(m, s).mi_bits_per_2d - rate_2d  # noqa: E731
    return float(brentq(f, lo_db, hi_db, xtol=1e-9))
