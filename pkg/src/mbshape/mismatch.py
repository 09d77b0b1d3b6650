"""Mismatched shaping: penalty maps over (channel SNR, shaping SNR) and PMF lookup tables.

The penalty of using the PMF optimized at shaping SNR ``s`` on a channel at
SNR ``c`` is ``gain(c, c) - gain(c, s)`` in dB. A lookup table is the smallest
set of shaping SNRs whose below-threshold coverage intervals tile the channel
SNR range; greedy covering from the low end is optimal for intervals.
"""

from __future__ import annotations

import csv
import json
import string
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .constellation import PamConstellation, base_grid
from .gain import gains_for_pmf, is_saturated
from .infotheory import DEFAULT_NODES
from .shaping import optimize_shaping

_GRID_DECIMALS = 10
CANDIDATE_STEP_DB = 0.5


def snr_grid(lo_db: float, hi_db: float, step_db: float) -> np.ndarray:
    """Inclusive grid ``lo, lo+step, ..., hi``; ``hi`` must lie on the grid."""
    if not step_db > 0:
        raise ValueError(f"step must be > 0, got {step_db!r}")
    if hi_db < lo_db:
        raise ValueError(f"need lo <= hi, got {lo_db!r} > {hi_db!r}")
    n = int(round((hi_db - lo_db) / step_db))
    if abs(lo_db + n * step_db - hi_db) > 1e-9 * max(1.0, abs(hi_db)):
        raise ValueError("hi - lo must be a whole number of steps")
    return np.round(lo_db + step_db * np.arange(n + 1), _GRID_DECIMALS)


@dataclass(frozen=True, eq=False)
class GainMap:
    """Penalty matrix indexed ``[channel, shaping]`` on a shared SNR grid.

    ``penalty_db`` is ``nan`` where the channel SNR is saturated (uniform MI
    within 1e-3 bit of ``log2(m**2)``); ``gain_db`` holds the raw gains.
    """

    m: int
    grid_db: np.ndarray
    gain_db: np.ndarray
    pmfs: np.ndarray
    nodes: int = DEFAULT_NODES

    @property
    def channel_grid_db(self) -> np.ndarray:
        return self.grid_db

    @property
    def shaping_grid_db(self) -> np.ndarray:
        return self.grid_db

    @property
    def matched_gain_db(self) -> np.ndarray:
        return np.diag(self.gain_db).copy()

    @property
    def penalty_db(self) -> np.ndarray:
        return self.matched_gain_db[:, None] - self.gain_db

    @property
    def saturated(self) -> np.ndarray:
        """Mask over channel SNRs."""
        return np.isnan(self.matched_gain_db)

    def coverage_penalty(self) -> np.ndarray:
        """Penalty with saturated cells set to zero (shaping is irrelevant there)."""
        p = self.penalty_db
        p[self.saturated, :] = 0.0
        return p

    def index(self, snr_db: float) -> int:
        i = int(np.argmin(np.abs(self.grid_db - snr_db)))
        if abs(self.grid_db[i] - snr_db) > 1e-6:
            raise ValueError(f"{snr_db!r} dB is not on the map grid")
        return i

    def write_matrix_csv(self, path) -> None:
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["channel_snr_db"] + [repr(float(s)) for s in self.grid_db])
            for s, row in zip(self.grid_db, self.penalty_db):
                w.writerow([repr(float(s))] + [_fmt(v) for v in row])

    def write_long_csv(self, path) -> None:
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["channel", "shaping", "penalty"])
            p = self.penalty_db
            for i, c in enumerate(self.grid_db):
                for j, s in enumerate(self.grid_db):
                    w.writerow([repr(float(c)), repr(float(s)), _fmt(p[i, j])])


def _fmt(v: float) -> str:
    return "saturated" if np.isnan(v) else repr(float(v))


def _column(args):
    m, s, grid, nodes, saturated = args
    pmf = optimize_shaping(m, float(s), nodes=nodes).pmf
    return pmf, gains_for_pmf(m, pmf, grid, nodes, saturated)


def build_gain_map(
    m: int,
    lo_db: float,
    hi_db: float,
    step_db: float,
    workers: int = 1,
    nodes: int = DEFAULT_NODES,
) -> GainMap:
    """Dense penalty map on ``snr_grid(lo_db, hi_db, step_db)`` for both axes.

    Each shaping SNR is optimized once; its PMF is then evaluated at every
    channel SNR. Output does not depend on ``workers``.
    """
    grid = snr_grid(lo_db, hi_db, step_db)
    saturated = is_saturated(m, grid, nodes)
    jobs = [(m, s, grid, nodes, saturated) for s in grid]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            cols = list(ex.map(_column, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        cols = [_column(j) for j in jobs]
    pmfs = np.array([c[0] for c in cols])
    gains = np.column_stack([c[1] for c in cols])
    return GainMap(m, grid, gains, pmfs, nodes)


def _coverage_bounds(penalty: np.ndarray, j: int, threshold: float) -> tuple[int, int]:
    ok = penalty[:, j] <= threshold
    lo = hi = j
    while lo > 0 and ok[lo - 1]:
        lo -= 1
    while hi < len(ok) - 1 and ok[hi + 1]:
        hi += 1
    return lo, hi


def coverage_bounds(gmap: GainMap, threshold_db: float) -> np.ndarray:
    """``(n, 2)`` index bounds of every shaping SNR's coverage interval."""
    if not threshold_db > 0:
        raise ValueError(f"threshold must be > 0, got {threshold_db!r}")
    p = gmap.coverage_penalty()
    return np.array([_coverage_bounds(p, j, threshold_db) for j in range(len(gmap.grid_db))])


def coverage_interval(gmap: GainMap, shaping_snr_db: float, threshold_db: float) -> tuple[float, float]:
    """Largest contiguous channel-SNR interval around the diagonal with penalty <= threshold."""
    if not threshold_db > 0:
        raise ValueError(f"threshold must be > 0, got {threshold_db!r}")
    j = gmap.index(shaping_snr_db)
    lo, hi = _coverage_bounds(gmap.coverage_penalty(), j, threshold_db)
    return float(gmap.grid_db[lo]), float(gmap.grid_db[hi])


def greedy_cover(bounds: np.ndarray, candidates=None) -> list[tuple[int, int, int]]:
    """Minimum-cardinality cover of ``0..n-1`` by the given closed index intervals.

    Returns ``(start, end, candidate)`` triples partitioning the range; the
    candidate is the one reaching furthest right among those covering
    ``start``. ``candidates`` optionally masks which intervals may be used.
    """
    n = len(bounds)
    allowed = np.ones(n, dtype=bool) if candidates is None else np.asarray(candidates)
    out = []
    start = 0
    while start < n:
        feasible = np.flatnonzero(allowed & (bounds[:, 0] <= start) & (bounds[:, 1] >= start))
        if feasible.size == 0:
            raise ValueError(f"no candidate covers grid index {start}")
        best = feasible[np.argmax(bounds[feasible, 1])]
        end = int(bounds[best, 1])
        out.append((start, end, int(best)))
        start = end + 1
    return out


def _representative(bounds, penalty, allowed, start: int, end: int, threshold: float) -> int:
    """Candidate covering ``[start, end]`` with the largest SNR margin to its coverage edges.

    Range edges impose no margin constraint. Ties go to the larger penalty
    slack, then to the lower shaping SNR.
    """
    n = len(bounds)
    feasible = np.flatnonzero(allowed & (bounds[:, 0] <= start) & (bounds[:, 1] >= end))
    left = np.where(start == 0, n, start - bounds[feasible, 0])
    right = np.where(end == n - 1, n, bounds[feasible, 1] - end)
    margin = np.minimum(left, right)
    slack = threshold - penalty[start : end + 1, feasible].max(axis=0)
    order = np.lexsort((feasible, -slack, -margin))
    return int(feasible[order[0]])


@dataclass(frozen=True)
class LookupEntry:
    channel_snr_lo_db: float
    channel_snr_hi_db: float
    shaping_snr_db: float
    pmf: tuple[float, ...]
    unit_energy_levels: tuple[float, ...]

    def constellation(self) -> PamConstellation:
        return PamConstellation(self.unit_energy_levels, self.pmf)

    def to_dict(self) -> dict:
        return {
            "channel_snr_lo_db": self.channel_snr_lo_db,
            "channel_snr_hi_db": self.channel_snr_hi_db,
            "shaping_snr_db": self.shaping_snr_db,
            **self.constellation().to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> LookupEntry:
        c = PamConstellation.from_dict(d)
        return cls(
            float(d["channel_snr_lo_db"]),
            float(d["channel_snr_hi_db"]),
            float(d["shaping_snr_db"]),
            tuple(c.pmf.tolist()),
            tuple(c.levels.tolist()),
        )


@dataclass(frozen=True)
class PmfLookupTable:
    threshold_db: float
    entries: tuple[LookupEntry, ...] = field(default_factory=tuple)

    def __len__(self):
        return len(self.entries)

    def lookup(self, channel_snr_db: float) -> LookupEntry:
        for e in self.entries:
            if channel_snr_db <= e.channel_snr_hi_db + 1e-9:
                return e
        return self.entries[-1]

    def to_json(self) -> str:
        rows = []
        for label, e in zip(_labels(len(self.entries)), self.entries):
            rows.append({"input": label, **e.to_dict()})
        return json.dumps(rows, indent=2)

    @classmethod
    def from_json(cls, s: str, threshold_db: float = float("nan")) -> PmfLookupTable:
        return cls(threshold_db, tuple(LookupEntry.from_dict(d) for d in json.loads(s)))


def _labels(n: int) -> list[str]:
    if n <= 26:
        return list(string.ascii_lowercase[:n])
    return [str(i) for i in range(n)]


def candidate_mask(grid_db: np.ndarray, step_db: float | None) -> np.ndarray:
    """Grid points lying on multiples of ``step_db`` (all of them if ``None``)."""
    if step_db is None:
        return np.ones(len(grid_db), dtype=bool)
    if not step_db > 0:
        raise ValueError(f"candidate step must be > 0, got {step_db!r}")
    q = grid_db / step_db
    return np.abs(q - np.round(q)) < 1e-6


def quantize_pmfs(gmap: GainMap, threshold_db: float, candidate_step_db: float | None = CANDIDATE_STEP_DB) -> PmfLookupTable:
    """Minimal PMF lookup table whose intervals tile the map's channel range.

    Shaping SNRs are drawn from grid points on multiples of
    ``candidate_step_db``; ``None`` allows every grid point. Greedy covering
    from the low end picks, at each uncovered channel SNR, the candidate
    reaching furthest up. If the coarse candidates need more entries than
    the full grid would, the full grid is used instead.
    """
    bounds = coverage_bounds(gmap, threshold_db)
    penalty = gmap.coverage_penalty()
    full = greedy_cover(bounds)
    allowed = candidate_mask(gmap.grid_db, candidate_step_db)
    try:
        cover = greedy_cover(bounds, allowed)
    except ValueError:
        cover = None
    if cover is None or len(cover) > len(full):
        allowed = np.ones(len(gmap.grid_db), dtype=bool)
        cover = full
    entries = []
    for start, end, _ in cover:
        j = _representative(bounds, penalty, allowed, start, end, threshold_db)
        pam = PamConstellation(base_grid(gmap.m), gmap.pmfs[j]).normalized()
        entries.append(
            LookupEntry(
                float(gmap.grid_db[start]),
                float(gmap.grid_db[end]),
                float(gmap.grid_db[j]),
                tuple(pam.pmf.tolist()),
                tuple(pam.levels.tolist()),
            )
        )
    return PmfLookupTable(float(threshold_db), tuple(entries))


def assignment_feasible(gmap: GainMap, shaping_snrs_db, threshold_db: float) -> bool:
    """Whether every channel SNR has some listed shaping SNR within ``threshold_db``.

    Each channel SNR may pick any listed shaping SNR whose contiguous coverage
    interval contains it.
    """
    bounds = coverage_bounds(gmap, threshold_db)
    covered = np.zeros(len(gmap.grid_db), dtype=bool)
    for s in shaping_snrs_db:
        lo, hi = bounds[gmap.index(s)]
        covered[lo : hi + 1] = True
    return bool(covered.all())
