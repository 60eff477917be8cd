"""Compiled inner loops of the histogram optimizer.

Intervals are runs of *atoms*: every nonempty g-bin is an atom and every
maximal run of empty g-bins is one atom. Only the part of the cost that
depends on the interval structure is handled here:

    kterms(K) + sum_k [h_k ln w_k - lgamma(h_k + 1)]

where ``kterms`` gathers the terms that depend on K alone. Everything else
is constant for a fixed granularization.
"""

import math

import numpy as np
from numba import njit

_LOG_C0 = math.log(2.865064)


@njit(cache=True)
def logstar(k):
    total = _LOG_C0
    term = math.log(k)
    while term > 0.0:
        total += term
        term = math.log(term)
    return total


@njit(cache=True)
def log_binomial(n, k):
    if k == 0 or k == n:
        return 0.0
    return math.lgamma(n + 1.0) - math.lgamma(k + 1.0) - math.lgamma(n - k + 1.0)


@njit(cache=True)
def kterms(K, G, n):
    return logstar(K) + log_binomial(G + K - 1, K - 1) + log_binomial(n + K - 1, K - 1)


@njit(cache=True)
def interval_cost(h, w):
    if h == 0:
        return 0.0
    return h * math.log(w) - math.lgamma(h + 1.0)


@njit(cache=True)
def merge_local_delta(wa, ha, wb, hb):
    out = 0.0
    if ha > 0:
        out += ha * math.log1p(wb / wa)
    if hb > 0:
        out += hb * math.log1p(wa / wb)
    if ha > 0 and hb > 0:
        out -= log_binomial(ha + hb, ha)
    return out


@njit(cache=True)
def _heap_less(keys, ids, i, j):
    if keys[i] < keys[j]:
        return True
    if keys[i] > keys[j]:
        return False
    return ids[i] < ids[j]


@njit(cache=True)
def _heap_swap(keys, ids, vers, i, j):
    keys[i], keys[j] = keys[j], keys[i]
    ids[i], ids[j] = ids[j], ids[i]
    vers[i], vers[j] = vers[j], vers[i]


@njit(cache=True)
def _heap_push(keys, ids, vers, size, key, ident, ver):
    i = size
    keys[i] = key
    ids[i] = ident
    vers[i] = ver
    while i > 0:
        parent = (i - 1) // 2
        if _heap_less(keys, ids, i, parent):
            _heap_swap(keys, ids, vers, i, parent)
            i = parent
        else:
            break
    return size + 1


@njit(cache=True)
def _heap_pop(keys, ids, vers, size):
    size -= 1
    _heap_swap(keys, ids, vers, 0, size)
    i = 0
    while True:
        left = 2 * i + 1
        if left >= size:
            break
        child = left
        right = left + 1
        if right < size and _heap_less(keys, ids, right, left):
            child = right
        if _heap_less(keys, ids, child, i):
            _heap_swap(keys, ids, vers, child, i)
            i = child
        else:
            break
    return size


@njit(cache=True)
def greedy_merge(widths, counts, G, n):
    """Bottom-up merge of adjacent atoms down to a single interval.

    Returns ``(order, best_merges)``: ``order[t]`` is the atom index at which
    the boundary removed by merge ``t`` started the right-hand interval, and
    the cheapest model seen along the path is obtained by applying the first
    ``best_merges`` merges. Equal deltas are resolved towards the lowest left
    atom index; equal path costs towards fewer intervals.
    """
    m = widths.size
    order = np.empty(max(m - 1, 0), dtype=np.int64)
    if m <= 1:
        return order, 0
    w = widths.astype(np.float64).copy()
    h = counts.copy()
    nxt = np.empty(m, dtype=np.int64)
    prv = np.empty(m, dtype=np.int64)
    version = np.zeros(m, dtype=np.int64)
    alive = np.ones(m, dtype=np.bool_)
    for i in range(m):
        nxt[i] = i + 1
        prv[i] = i - 1
    nxt[m - 1] = -1

    cap = 3 * m + 4
    keys = np.empty(cap, dtype=np.float64)
    ids = np.empty(cap, dtype=np.int64)
    vers = np.empty(cap, dtype=np.int64)
    size = 0
    for i in range(m - 1):
        d = merge_local_delta(w[i], h[i], w[i + 1], h[i + 1])
        size = _heap_push(keys, ids, vers, size, d, i, 0)

    cur = 0.0
    best = 0.0
    best_merges = 0
    K = m
    step = 0
    while K > 1:
        d = keys[0]
        a = ids[0]
        ver = vers[0]
        size = _heap_pop(keys, ids, vers, size)
        if not alive[a] or version[a] != ver or nxt[a] < 0:
            continue
        b = nxt[a]
        cur += d + kterms(K - 1, G, n) - kterms(K, G, n)
        K -= 1
        order[step] = b
        step += 1
        if cur <= best:
            best = cur
            best_merges = step
        w[a] += w[b]
        h[a] += h[b]
        alive[b] = False
        c = nxt[b]
        nxt[a] = c
        if c >= 0:
            prv[c] = a
        version[a] += 1
        p = prv[a]
        if p >= 0:
            version[p] += 1
            size = _heap_push(keys, ids, vers, size, merge_local_delta(w[p], h[p], w[a], h[a]), p, version[p])
        if c >= 0:
            size = _heap_push(keys, ids, vers, size, merge_local_delta(w[a], h[a], w[c], h[c]), a, version[a])
    return order, best_merges


@njit(cache=True)
def _seg(W, H, i, j):
    return interval_cost(H[j] - H[i], W[j] - W[i])


@njit(cache=True)
def post_optimize(W, H, starts, G, n, max_sweeps, tol):
    """Hill-climb boundary moves, removals and insertions over atom cuts.

    ``W`` and ``H`` are prefix sums of atom widths and counts; ``starts``
    lists the cut positions including 0 and the atom count. Returns the
    improved cut positions and the number of sweeps performed.
    """
    cuts = starts.copy()
    sweeps = 0
    while sweeps < max_sweeps:
        sweeps += 1
        changed = False
        K = cuts.size - 1

        # moves by one atom, repeated while a boundary keeps improving
        for k in range(1, K):
            while True:
                lo = cuts[k - 1]
                s = cuts[k]
                hi = cuts[k + 1]
                base = _seg(W, H, lo, s) + _seg(W, H, s, hi)
                best_d = -tol
                best_s = s
                if s - 1 > lo:
                    d = _seg(W, H, lo, s - 1) + _seg(W, H, s - 1, hi) - base
                    if d < best_d:
                        best_d = d
                        best_s = s - 1
                if s + 1 < hi:
                    d = _seg(W, H, lo, s + 1) + _seg(W, H, s + 1, hi) - base
                    if d < best_d:
                        best_d = d
                        best_s = s + 1
                if best_s == s:
                    break
                cuts[k] = best_s
                changed = True

        # removals, left to right
        out = np.empty(cuts.size, dtype=np.int64)
        out[0] = cuts[0]
        size = 1
        Kcur = K
        for k in range(1, K):
            p = out[size - 1]
            s = cuts[k]
            q = cuts[k + 1]
            d = (
                _seg(W, H, p, q)
                - _seg(W, H, p, s)
                - _seg(W, H, s, q)
                + kterms(Kcur - 1, G, n)
                - kterms(Kcur, G, n)
            )
            if d < -tol:
                Kcur -= 1
                changed = True
            else:
                out[size] = s
                size += 1
        out[size] = cuts[K]
        size += 1
        cuts = out[:size].copy()

        # insertions: best split inside each interval
        K = cuts.size - 1
        out = np.empty(2 * cuts.size, dtype=np.int64)
        out[0] = cuts[0]
        size = 1
        Kcur = K
        for k in range(K):
            a = cuts[k]
            b = cuts[k + 1]
            if b - a >= 2:
                whole = _seg(W, H, a, b)
                best_d = -tol
                best_c = -1
                gain = kterms(Kcur + 1, G, n) - kterms(Kcur, G, n)
                for c in range(a + 1, b):
                    d = _seg(W, H, a, c) + _seg(W, H, c, b) - whole + gain
                    if d < best_d:
                        best_d = d
                        best_c = c
                if best_c >= 0:
                    out[size] = best_c
                    size += 1
                    Kcur += 1
                    changed = True
            out[size] = b
            size += 1
        cuts = out[:size].copy()

        if not changed:
            break
    return cuts, sweeps


@njit(cache=True)
def structure_cost(W, H, cuts, G, n):
    """Structure-dependent part of the cost for the given cut positions."""
    K = cuts.size - 1
    total = kterms(K, G, n)
    for k in range(K):
        total += _seg(W, H, cuts[k], cuts[k + 1])
    return total
