"""Brute-force oracles and generators for finite partial metric tables.

Everything here is plain Python loops over indices so it stays
independent of the vectorised code paths under test.
"""
import itertools

import numpy as np


def brute_force_violations(t, tol=0.0):
    """All (axiom, witness) pairs violated by table ``t``."""
    n = len(t)
    out = []
    for x, y in itertools.product(range(n), repeat=2):
        if t[x][y] < -tol or t[x][x] - t[x][y] > tol:
            out.append(("pm2", (x, y)))
        if abs(t[x][y] - t[y][x]) > tol:
            out.append(("pm3", (x, y)))
        if x != y and abs(t[x][x] - t[x][y]) <= tol and abs(t[y][y] - t[x][y]) <= tol:
            out.append(("pm1", (x, y)))
    for x, y, z in itertools.product(range(n), repeat=3):
        if t[x][y] + t[z][z] - t[x][z] - t[z][y] > tol:
            out.append(("pm4", (x, y, z)))
    return out


def is_valid(t):
    return not brute_force_violations(t)


def _shortest_paths(w):
    n = len(w)
    d = [row[:] for row in w]
    for k in range(n):
        for i in range(n):
            for j in range(n):
                if d[i][k] + d[k][j] < d[i][j]:
                    d[i][j] = d[i][k] + d[k][j]
    return d


def _candidate(rng, n):
    # max of integer self-distances plus an integer path metric; half-integer
    # scaling keeps every sum exact in binary floating point
    weights = [int(rng.integers(0, 4)) if rng.random() < 0.7 else 0 for _ in range(n)]
    edges = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            edges[i][j] = edges[j][i] = int(rng.integers(1, 6))
    d = _shortest_paths(edges)
    if rng.random() < 0.5:
        return [[0.5 * (max(weights[i], weights[j]) + d[i][j]) for j in range(n)] for i in range(n)]
    return [[float(max(weights[i], weights[j]) + d[i][j]) for j in range(n)] for i in range(n)]


def random_valid_table(rng, n):
    """Rejection sampler: draw candidates until the brute-force scan accepts one."""
    while True:
        t = _candidate(rng, n)
        if rng.random() < 0.2:
            # occasionally nudge an entry to explore beyond the construction
            i, j = (int(v) for v in rng.integers(0, n, size=2))
            t[i][j] += 0.5
            t[j][i] = t[i][j]
        if is_valid(t):
            return t


def perturb_until_invalid(rng, t):
    """Change one entry ``p(i, j) = p(j, i)`` until the table is rejected.

    Returns the perturbed table and the perturbed index pair.
    """
    n = len(t)
    while True:
        i, j = sorted(int(v) for v in rng.integers(0, n, size=2))
        sign = 1.0 if rng.random() < 0.5 else -1.0
        for step in (0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 64.0):
            bad = [row[:] for row in t]
            bad[i][j] += sign * step
            bad[j][i] = bad[i][j]
            if not is_valid(bad):
                return bad, (i, j)


def exact_orbit(f, x):
    """The full orbit set of ``x`` under the index map ``f``."""
    seen = []
    while x not in seen:
        seen.append(x)
        x = f[x]
    return seen


def exact_diameter(t, f, x, y):
    pts = set(exact_orbit(f, x)) | set(exact_orbit(f, y))
    return max(t[a][b] for a in pts for b in pts)


def fixed_points(f):
    return [x for x in range(len(f)) if f[x] == x]


def random_map(rng, n, sink=None):
    """Random self-map of ``range(n)``, optionally collapsing towards ``sink``."""
    if sink is None:
        return [int(v) for v in rng.integers(0, n, size=n)]
    f = []
    for x in range(n):
        f.append(sink if rng.random() < 0.6 else int(rng.integers(0, n)))
    return f


def as_array(t):
    return np.array(t, dtype=float)
