"""Reference computations that share no code path with the package."""

import itertools
import math

import numpy as np
from scipy import integrate


def mi_adaptive(levels, pmf, noise_variance):
    """I(X;Y) in bits as h(Y) - h(N), h(Y) by adaptive quadrature over y."""
    x = np.asarray(levels, float)
    p = np.asarray(pmf, float)
    s2 = float(noise_variance)
    s = math.sqrt(s2)
    norm = math.sqrt(2 * math.pi * s2)

    def integrand(y):
        f = float(np.sum(p * np.exp(-((y - x) ** 2) / (2 * s2)))) / norm
        return -f * math.log(f) if f > 0 else 0.0

    lo, hi = x.min() - 12 * s, x.max() + 12 * s
    pts = np.sort(np.concatenate([x, (x[1:] + x[:-1]) / 2]))
    edges = np.concatenate([[lo], pts, [hi]])
    hy = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        v, _ = integrate.quad(integrand, a, b, epsabs=1e-14, epsrel=1e-13, limit=200)
        hy += v
    return (hy - 0.5 * math.log(2 * math.pi * math.e * s2)) / math.log(2)


def nu_bisection(grid, delta, target, iters=200):
    """Plain bisection for the MB parameter meeting a power target."""
    x2 = np.asarray(grid, float) ** 2

    def energy(nu):
        w = np.exp(-nu * x2)
        return delta**2 * np.dot(w, x2) / w.sum()

    lo, hi = 0.0, 1.0
    while energy(hi) > target:
        hi *= 2
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if energy(mid) > target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def covers(intervals, n):
    """Whether closed index intervals cover 0..n-1."""
    covered = np.zeros(n, dtype=bool)
    for lo, hi in intervals:
        covered[lo : hi + 1] = True
    return bool(covered.all())


def exists_cover_of_size(bounds, n, k):
    """Exhaustive search over all k-subsets of distinct candidate intervals."""
    distinct = sorted({(int(a), int(b)) for a, b in bounds})
    if k <= 0:
        return n == 0
    lo = np.array([d[0] for d in distinct])
    hi = np.array([d[1] for d in distinct])
    for combo in itertools.combinations(range(len(distinct)), k):
        c = np.array(combo)
        order = c[np.argsort(lo[c])]
        reach = -1
        ok = True
        for i in order:
            if lo[i] > reach + 1:
                ok = False
                break
            reach = max(reach, hi[i])
        if ok and reach >= n - 1:
            return True
    return False
