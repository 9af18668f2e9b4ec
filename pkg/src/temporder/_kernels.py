"""Compiled inner loops for the backward importance sampler.

Graphs arrive as packed uint64 adjacency rows; the present-node set is a
bitmask of the same width. All weights are natural logs.
"""

import math

import numpy as np
from numba import njit

LOCAL_UNIF = 0
HIGH_PROB = 1
ACCEPT_REJECT = 2

_M1 = np.uint64(0x5555555555555555)
_M2 = np.uint64(0x3333333333333333)
_M4 = np.uint64(0x0F0F0F0F0F0F0F0F)
_H01 = np.uint64(0x0101010101010101)


@njit(cache=True, inline="always")
def popcount(x):
    x = x - ((x >> np.uint64(1)) & _M1)
    x = (x & _M2) + ((x >> np.uint64(2)) & _M2)
    x = (x + (x >> np.uint64(4))) & _M4
    return (x * _H01) >> np.uint64(56)


@njit(cache=True)
def path_seed(master, index):
    # splitmix64 of (master, index); numba's legacy RNG takes a 32-bit seed
    z = np.uint64(master) + np.uint64(0x9E3779B97F4A7C15) * np.uint64(index + 1)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    z = z ^ (z >> np.uint64(31))
    return np.uint32(z >> np.uint64(32))


@njit(cache=True, inline="always")
def _xlog(count, logp):
    if count == 0:
        return 0.0
    return count * logp


@njit(cache=True)
def log_w(v, bits, present, alive, n_alive, deg, lp, l1p, lq, l1q, buf):
    """log of sum over present parents u != v of the one-step likelihood."""
    W = bits.shape[1]
    k = n_alive - 1
    dv = 0
    for w in range(W):
        dv += popcount(bits[v, w] & present[w])
    vw = v >> 6
    vb = np.uint64(1) << np.uint64(v & 63)
    top = -math.inf
    cnt = 0
    for i in range(n_alive):
        u = alive[i]
        if u == v:
            continue
        a = 0
        for w in range(W):
            a += popcount(bits[v, w] & bits[u, w] & present[w])
        nu = deg[u]
        if bits[u, vw] & vb:
            nu -= 1
        b = nu - a
        c = dv - a
        rest = k - a - b - c
        t = _xlog(a, lp) + _xlog(b, l1p) + _xlog(c, lq) + _xlog(rest, l1q)
        buf[cnt] = t
        cnt += 1
        if t > top:
            top = t
    if top == -math.inf:
        return -math.inf
    s = 0.0
    for i in range(cnt):
        s += math.exp(buf[i] - top)
    return top + math.log(s) - math.log(k)


@njit(cache=True)
def _step_logs(t, p, r):
    k = t - 1
    q = r / k
    lp = math.log(p) if p > 0 else -math.inf
    l1p = math.log(1.0 - p) if p < 1 else -math.inf
    lq = math.log(q) if q > 0 else -math.inf
    l1q = math.log(1.0 - q) if q < 1 else -math.inf
    return lp, l1p, lq, l1q


@njit(cache=True)
def _blocked(u, younger, present, restricted):
    if not restricted:
        return False
    for w in range(younger.shape[1]):
        if younger[u, w] & present[w]:
            return True
    return False


@njit(cache=True)
def run_paths(bits, present0, is_seed, younger, restricted, p, r, scheme, interior,
              master, start, count, m):
    N, W = bits.shape
    removals = np.empty((count, m), dtype=np.int32)
    logw = np.empty(count, dtype=np.float64)
    buf = np.empty(N, dtype=np.float64)
    cand = np.empty(N, dtype=np.int64)
    clw = np.empty(N, dtype=np.float64)
    for path in range(count):
        np.random.seed(path_seed(master, start + path))
        present = np.zeros(W, dtype=np.uint64)
        alive = np.empty(N, dtype=np.int64)
        n_alive = 0
        for v in range(N):
            if present0[v]:
                present[v >> 6] |= np.uint64(1) << np.uint64(v & 63)
                alive[n_alive] = v
                n_alive += 1
        deg = np.zeros(N, dtype=np.int64)
        for i in range(n_alive):
            u = alive[i]
            d = 0
            for w in range(W):
                d += popcount(bits[u, w] & present[w])
            deg[u] = d
        total = 0.0
        for step in range(m):
            lp, l1p, lq, l1q = _step_logs(n_alive, p, r)
            # candidate set: non-seed, not blocked by training pairs
            nc = 0
            for i in range(n_alive):
                u = alive[i]
                if not is_seed[u] and not _blocked(u, younger, present, restricted):
                    cand[nc] = u
                    nc += 1
            need_all = scheme == HIGH_PROB or not interior
            if need_all:
                kept = 0
                for i in range(nc):
                    lw = log_w(cand[i], bits, present, alive, n_alive, deg, lp, l1p, lq, l1q, buf)
                    if lw > -math.inf:
                        cand[kept] = cand[i]
                        clw[kept] = lw
                        kept += 1
                nc = kept
            if nc == 0:
                raise ValueError("no removable candidate left; training pairs or model are inconsistent")
            if scheme == HIGH_PROB:
                top = -math.inf
                for i in range(nc):
                    if clw[i] > top:
                        top = clw[i]
                s = 0.0
                for i in range(nc):
                    s += math.exp(clw[i] - top)
                x = np.random.random() * s
                pick = nc - 1
                acc = 0.0
                for i in range(nc):
                    acc += math.exp(clw[i] - top)
                    if x < acc:
                        pick = i
                        break
                v = cand[pick]
                total += top + math.log(s)
            elif scheme == LOCAL_UNIF:
                pick = np.random.randint(nc)
                v = cand[pick]
                if need_all:
                    lw = clw[pick]
                else:
                    lw = log_w(v, bits, present, alive, n_alive, deg, lp, l1p, lq, l1q, buf)
                total += lw + math.log(nc)
            else:
                # draw from every present node, accept the first admissible one
                while True:
                    v = alive[np.random.randint(n_alive)]
                    if is_seed[v] or _blocked(v, younger, present, restricted):
                        continue
                    lw = log_w(v, bits, present, alive, n_alive, deg, lp, l1p, lq, l1q, buf)
                    if lw > -math.inf:
                        break
                total += lw + math.log(nc)
            removals[path, step] = v
            # delete v
            present[v >> 6] &= ~(np.uint64(1) << np.uint64(v & 63))
            for w in range(W):
                x = bits[v, w] & present[w]
                while x:
                    low = x & (~x + np.uint64(1))
                    deg[w * 64 + np.int64(popcount(low - np.uint64(1)))] -= 1
                    x ^= low
            for i in range(n_alive):
                if alive[i] == v:
                    alive[i] = alive[n_alive - 1]
                    break
            n_alive -= 1
        logw[path] = total
    return removals, logw


@njit(cache=True)
def accumulate(removals, logw, num, state):
    """Add paths to the self-normalised sums.

    ``num`` and ``state[1]`` (denominator) are stored relative to
    ``exp(state[0])``, the largest log weight seen so far; rescaling happens
    per path so any chunking yields identical floating-point results.
    """
    count, m = removals.shape
    for path in range(count):
        lw = logw[path]
        if lw > state[0]:
            scale = math.exp(state[0] - lw)
            if scale != 1.0:
                num *= scale
                state[1] *= scale
            state[0] = lw
        wt = math.exp(lw - state[0])
        for i in range(m):
            younger = removals[path, i]
            for j in range(i + 1, m):
                num[removals[path, j], younger] += wt
        state[1] += wt


@njit(cache=True)
def accumulate_pairs(removals, logw, us, vs, num, state):
    """Sparse variant: only the listed (u, v) pairs are tracked."""
    count, m = removals.shape
    rank = np.full(removals.max() + 1 if removals.size else 1, -1, dtype=np.int64)
    for path in range(count):
        lw = logw[path]
        if lw > state[0]:
            scale = math.exp(state[0] - lw)
            num *= scale
            state[1] *= scale
            state[0] = lw
        wt = math.exp(lw - state[0])
        for i in range(m):
            rank[removals[path, i]] = i
        for k in range(us.shape[0]):
            ru = rank[us[k]] if us[k] < rank.shape[0] else -1
            rv = rank[vs[k]] if vs[k] < rank.shape[0] else -1
            # u arrived before v iff v was removed first
            if ru >= 0 and rv >= 0 and rv < ru:
                num[k] += wt
        state[1] += wt
