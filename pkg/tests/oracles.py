"""Independent reference computations used only by tests.

Written in the most literal form possible (plain loops, no shared code with
the package) so they can check the vectorized implementations.
"""

import itertools
from math import factorial


def brute_laplacian_variance(gray, kernel):
    h, w = len(gray), len(gray[0])
    responses = []
    for i in range(1, h - 1):
        for j in range(1, w - 1):
            acc = 0.0
            for di in (-1, 0, 1):
                for dj in (-1, 0, 1):
                    acc += kernel[di + 1][dj + 1] * gray[i + di][j + dj]
            responses.append(acc)
    mean = sum(responses) / len(responses)
    return sum((r - mean) ** 2 for r in responses) / len(responses)


def coalition_value(f, x, background, subset):
    total = 0.0
    for b in background:
        z = [x[j] if j in subset else b[j] for j in range(len(x))]
        total += float(f([z])[0])
    return total / len(background)


def permutation_shapley(f, x, background):
    """Average marginal contribution over all feature orderings."""
    n = len(x)
    cache = {}

    def v(s):
        key = frozenset(s)
        if key not in cache:
            cache[key] = coalition_value(f, x, background, key)
        return cache[key]

    phi = [0.0] * n
    perms = list(itertools.permutations(range(n)))
    for order in perms:
        seen = set()
        for j in order:
            before = v(seen)
            seen = seen | {j}
            phi[j] += v(seen) - before
    return [p / len(perms) for p in phi], v(set())


def subset_shapley(f, x, background):
    """Textbook subset formula with per-subset model calls."""
    n = len(x)
    phi = []
    for i in range(n):
        others = [j for j in range(n) if j != i]
        acc = 0.0
        for k in range(n):
            for s in itertools.combinations(others, k):
                w = factorial(k) * factorial(n - k - 1) / factorial(n)
                acc += w * (coalition_value(f, x, background, set(s) | {i}) - coalition_value(f, x, background, set(s)))
        phi.append(acc)
    return phi


def exhaustive_stump(X, y):
    """Best single split by squared error over every feature and every
    midpoint between distinct sorted values. Returns (sse, feature, threshold)."""
    n, d = len(X), len(X[0])
    best = None
    for j in range(d):
        vals = sorted(set(row[j] for row in X))
        for a, b in zip(vals, vals[1:]):
            t = (a + b) / 2
            left = [y[i] for i in range(n) if X[i][j] <= t]
            right = [y[i] for i in range(n) if X[i][j] > t]
            ml, mr = sum(left) / len(left), sum(right) / len(right)
            sse = sum((v - ml) ** 2 for v in left) + sum((v - mr) ** 2 for v in right)
            if best is None or sse < best[0] - 1e-12:
                best = (sse, j, t)
    return best
