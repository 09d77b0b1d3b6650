"""1D PAM and product 2D QAM constellations carrying a probability mass function.

Noise convention used across the package: the complex noise has total
variance ``N0 = 1``, i.e. ``1/2`` per real dimension. An ``M**2``-QAM symbol
at ``SNR = Es/N0`` therefore carries ``SNR/2`` energy per quadrature.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

# per-real-dimension noise variance, fixed by N0 = 1
NOISE_VAR_1D = 0.5

_PMF_FLOOR = np.finfo(float).tiny
_SUM_TOL = 1e-12


def db_to_linear(snr_db: float) -> float:
    if not math.isfinite(snr_db):
        raise ValueError(f"SNR must be finite, got {snr_db!r}")
    return 10.0 ** (snr_db / 10.0)


def linear_to_db(snr: float) -> float:
    if snr <= 0:
        return -math.inf
    return 10.0 * math.log10(snr)


def is_power_of_two(m: int) -> bool:
    return isinstance(m, (int, np.integer)) and m >= 2 and (m & (m - 1)) == 0


def base_grid(m: int) -> np.ndarray:
    """Odd-integer amplitude grid ``[-(m-1), ..., -1, 1, ..., m-1]``."""
    if not is_power_of_two(m):
        raise ValueError(f"constellation size must be a power of two >= 2, got {m!r}")
    return np.arange(-(m - 1), m, 2, dtype=float)


def mb_pmf(grid, nu: float) -> np.ndarray:
    """Maxwell-Boltzmann weights ``exp(-nu x**2)`` over ``grid``, normalized.

    Weights that underflow below the smallest normal double are raised to it
    before normalization, so every probability stays strictly positive.
    """
    x = np.asarray(grid, dtype=float)
    if x.size == 0:
        raise ValueError("grid must be nonempty")
    if not math.isfinite(nu) or nu < 0:
        raise ValueError(f"nu must be finite and >= 0, got {nu!r}")
    # shift by the smallest energy so the largest weight is exactly 1
    e = x * x
    w = np.exp(-nu * (e - e.min()))
    w = np.maximum(w, _PMF_FLOOR)
    return w / w.sum()


def entropy_bits(pmf) -> float:
    p = np.asarray(pmf, dtype=float)
    p = p[p > 0]
    return float(-np.sum(p * np.log2(p)))


@dataclass(frozen=True, eq=False)
class PamConstellation:
    """Ordered real amplitude levels with an attached PMF.

    Arrays are copied and marked read-only on construction.
    """

    levels: np.ndarray
    pmf: np.ndarray

    def __post_init__(self):
        levels = np.array(self.levels, dtype=float)
        pmf = np.array(self.pmf, dtype=float)
        if levels.ndim != 1 or pmf.shape != levels.shape:
            raise ValueError("levels and pmf must be 1D arrays of equal length")
        if not is_power_of_two(len(levels)):
            raise ValueError(f"number of levels must be a power of two >= 2, got {len(levels)}")
        if np.any(np.diff(levels) <= 0):
            raise ValueError("levels must be strictly ascending")
        if np.any(pmf <= 0) or np.any(pmf > 1):
            raise ValueError("pmf entries must lie in (0, 1]")
        if abs(pmf.sum() - 1.0) > _SUM_TOL:
            raise ValueError(f"pmf must sum to 1, sums to {pmf.sum()!r}")
        levels.flags.writeable = False
        pmf.flags.writeable = False
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "pmf", pmf)

    @property
    def m(self) -> int:
        return len(self.levels)

    @classmethod
    def uniform(cls, m: int) -> PamConstellation:
        return cls(base_grid(m), np.full(m, 1.0 / m))

    @classmethod
    def maxwell_boltzmann(cls, m: int, nu: float, delta: float = 1.0) -> PamConstellation:
        grid = base_grid(m)
        return scale(cls(grid, mb_pmf(grid, nu)), delta)

    def is_symmetric(self, tol: float = 1e-12) -> bool:
        return bool(
            np.allclose(self.levels, -self.levels[::-1], rtol=0, atol=tol)
            and np.allclose(self.pmf, self.pmf[::-1], rtol=0, atol=tol)
        )

    def entropy(self) -> float:
        return entropy_bits(self.pmf)

    def normalized(self) -> PamConstellation:
        """Copy rescaled to unit average energy per dimension."""
        return scale(self, 1.0 / math.sqrt(average_energy(self)))

    def to_dict(self) -> dict:
        return {"levels": self.levels.tolist(), "pmf": self.pmf.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> PamConstellation:
        return cls(d["levels"], d["pmf"])

    def to_json(self) -> str:
        # json emits repr() floats, which round-trip exactly
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, s: str) -> PamConstellation:
        return cls.from_dict(json.loads(s))

    def __repr__(self):
        return f"PamConstellation(levels={self.levels.tolist()}, pmf={self.pmf.tolist()})"


def average_energy(c: PamConstellation) -> float:
    return float(np.dot(c.pmf, c.levels**2))


def scale(c: PamConstellation, delta: float) -> PamConstellation:
    if not delta > 0 or not math.isfinite(delta):
        raise ValueError(f"scaling must be finite and > 0, got {delta!r}")
    return PamConstellation(c.levels * delta, c.pmf)


def power_matched(c: PamConstellation, snr_db: float) -> PamConstellation:
    """Rescale ``c`` so that its 2D product meets ``Es/N0 = snr_db`` with ``N0 = 1``."""
    target = db_to_linear(snr_db) / 2.0
    return scale(c, math.sqrt(target / average_energy(c)))


@dataclass(frozen=True, eq=False)
class ShapedQam:
    """``M**2``-QAM built as the Cartesian product of one PAM with itself."""

    pam: PamConstellation

    @property
    def order(self) -> int:
        return self.pam.m**2

    def average_energy(self) -> float:
        return 2.0 * average_energy(self.pam)

    def entropy(self) -> float:
        return 2.0 * self.pam.entropy()

    def points(self) -> np.ndarray:
        """Complex points, in-phase index major."""
        x = self.pam.levels
        return (x[:, None] + 1j * x[None, :]).ravel()

    def pmf(self) -> np.ndarray:
        p = self.pam.pmf
        return np.outer(p, p).ravel()

    def snr_db(self) -> float:
        """Es/N0 in dB under the package noise convention."""
        return linear_to_db(self.average_energy())
