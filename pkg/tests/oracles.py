"""Independent reference computations used to pin expected test values.

These deliberately avoid the library's own code paths: the edit distance is
a memoized recursion rather than the iterative table, and the stats oracle
is a direct loop.
"""

from __future__ import annotations

import math
from functools import lru_cache


def recursive_edit_distance(reference: tuple[str, ...], hypothesis: tuple[str, ...]) -> int:
    @lru_cache(maxsize=None)
    def go(i: int, j: int) -> int:
        if i == len(reference):
            return len(hypothesis) - j
        if j == len(hypothesis):
            return len(reference) - i
        if reference[i] == hypothesis[j]:
            return go(i + 1, j + 1)
        return 1 + min(go(i + 1, j), go(i, j + 1), go(i + 1, j + 1))

    return go(0, 0)


def brute_force_stats(durations: list[float], bucket_width: float = 1.0):
    count = 0
    total = 0.0
    lo = math.inf
    hi = -math.inf
    for d in durations:
        count += 1
        total += d
        lo = min(lo, d)
        hi = max(hi, d)
    upper = max(math.ceil(hi), bucket_width)
    n_buckets = max(1, math.ceil(upper / bucket_width))
    buckets = [0] * n_buckets
    for d in durations:
        buckets[min(int(d // bucket_width), n_buckets - 1)] += 1
    histogram = tuple((i * bucket_width, bucket_width, c) for i, c in enumerate(buckets))
    return count, lo, hi, total / count, histogram
