# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot loops in ``_pykernels``; results are identical."""

from libc.stdint cimport uint64_t
from libc.stdlib cimport malloc, free


def trace(succ, pred, dsig):
    cdef Py_ssize_t ndarts = len(succ)
    if len(pred) != ndarts or len(dsig) != ndarts:
        raise ValueError("succ, pred and dsig must have the same length")
    cdef int *s = <int *> malloc(ndarts * sizeof(int))
    cdef int *p = <int *> malloc(ndarts * sizeof(int))
    cdef signed char *sig = <signed char *> malloc(ndarts)
    cdef unsigned char *used = <unsigned char *> malloc(2 * ndarts + 1)
    cdef Py_ssize_t i
    cdef int d0, alt0, d, alt
    faces = []
    try:
        for i in range(ndarts):
            s[i] = succ[i]
            p[i] = pred[i]
            sig[i] = -1 if dsig[i] < 0 else 1
            used[2 * i] = 0
            used[2 * i + 1] = 0
        for alt0 in range(2):
            for d0 in range(ndarts):
                if used[2 * d0 + alt0]:
                    continue
                walk = []
                d = d0
                alt = alt0
                while not used[2 * d + alt]:
                    used[2 * d + alt] = 1
                    if alt:
                        used[2 * s[d]] = 1
                    else:
                        used[2 * p[d] + 1] = 1
                    walk.append(2 * d + alt)
                    if sig[d] < 0:
                        alt ^= 1
                    d = d ^ 1
                    d = p[d] if alt else s[d]
                faces.append(walk)
    finally:
        free(s)
        free(p)
        free(sig)
        free(used)
    return faces


cdef inline uint64_t _splitmix(uint64_t *state) nogil:
    state[0] += 0x9E3779B97F4A7C15ULL
    cdef uint64_t z = state[0]
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef int _orbit(int n, int x, int y, int *fa, int *fb) nogil:
    """Fill up to three facts; return their count or -1 if the corner is invalid."""
    cdef int half = n // 2
    cdef int cnt = 0, k, p = 0, a = x, b = y, fx, fy, na, nb
    for k in range(3):
        if p == 0:
            fx = a
            fy = b
        else:
            fx = b
            fy = a
        if cnt > 0 and fx == fa[0] and fy == fb[0]:
            break
        if a == b or a % half == 0 or b % half == 0:
            return -1
        fa[cnt] = fx
        fb[cnt] = fy
        cnt += 1
        na = (n - b) % n
        nb = ((a - b) % n + n) % n
        p = p ^ (b & 1)
        a = na
        b = nb
    if p != 0 or a != x or b != y:
        return -1
    return cnt


def corner_orbit(int n, int x, int y):
    cdef int fa[3]
    cdef int fb[3]
    cdef int cnt = _orbit(n, x, y, fa, fb)
    if cnt < 0:
        return None
    return [(fa[i], fb[i]) for i in range(cnt)]


cdef struct Search:
    int n
    int m
    int *elems
    int *succ
    int *pred
    int *cand     # m rows of n candidate y values, one row per depth
    uint64_t state
    long long nodes
    long long limit


cdef void _undo(Search *S, int *da, int *db, int cnt) nogil:
    cdef int i
    for i in range(cnt):
        S.succ[da[i]] = -1
        S.pred[db[i]] = -1


cdef int _assign(Search *S, int *fa, int *fb, int cnt, int *da, int *db) nogil:
    """Apply facts; return number newly set, or -1 (nothing changed) on conflict."""
    cdef int i, a, b, c, length, done = 0
    for i in range(cnt):
        a = fa[i]
        b = fb[i]
        if S.succ[a] == b and S.pred[b] == a:
            continue
        if S.succ[a] != -1 or S.pred[b] != -1:
            _undo(S, da, db, done)
            return -1
        S.succ[a] = b
        S.pred[b] = a
        da[done] = a
        db[done] = b
        done += 1
    for i in range(done):
        a = da[i]
        c = db[i]
        length = 1
        while S.succ[c] != -1 and c != a:
            c = S.succ[c]
            length += 1
        if c == a and length < S.m:
            _undo(S, da, db, done)
            return -1
    return done


cdef bint _fits(Search *S, int *fa, int *fb, int cnt) nogil:
    cdef int i, a, b
    for i in range(cnt):
        a = fa[i]
        b = fb[i]
        if (S.succ[a] != -1 and S.succ[a] != b) or (S.pred[b] != -1 and S.pred[b] != a):
            return False
    return True


cdef int _dfs(Search *S, int filled, int depth) nogil:
    cdef int fa[3]
    cdef int fb[3]
    cdef int da[3]
    cdef int db[3]
    cdef int *row = S.cand + depth * S.n
    cdef int *tmp = S.cand + (depth + 1) * S.n
    cdef int best_x = -1, best_len = -1, xi, yi, x, y, cnt, k, i, j, t, res, done
    cdef uint64_t r
    S.nodes += 1
    if S.nodes > S.limit:
        return -1
    if filled == S.m:
        return 1
    for xi in range(S.m):
        x = S.elems[xi]
        if S.succ[x] != -1:
            continue
        k = 0
        for yi in range(S.m):
            y = S.elems[yi]
            if S.pred[y] != -1 or y == x:
                continue
            cnt = _orbit(S.n, x, y, fa, fb)
            if cnt != 3:
                continue
            if _fits(S, fa, fb, cnt):
                tmp[k] = y
                k += 1
        if best_len < 0 or k < best_len:
            best_len = k
            best_x = x
            for i in range(k):
                row[i] = tmp[i]
            if k <= 1:
                break
    i = best_len - 1
    while i > 0:
        r = _splitmix(&S.state)
        j = <int> (r % <uint64_t> (i + 1))
        t = row[i]
        row[i] = row[j]
        row[j] = t
        i -= 1
    for i in range(best_len):
        cnt = _orbit(S.n, best_x, row[i], fa, fb)
        done = _assign(S, fa, fb, cnt, da, db)
        if done < 0:
            continue
        res = _dfs(S, filled + done, depth + 1)
        if res != 0:
            return res
        _undo(S, da, db, done)
    return 0


def corner_search(int n, seeds, rng_seed, long long limit):
    cdef Search S
    cdef int half = n // 2
    cdef int i, v, cnt, status, filled
    cdef int fa[3]
    cdef int fb[3]
    cdef int da[3]
    cdef int db[3]
    elems = [v for v in range(1, n) if v != half]
    S.n = n
    S.m = len(elems)
    S.state = <uint64_t> (rng_seed & 0xFFFFFFFFFFFFFFFF)
    S.nodes = 0
    S.limit = limit
    S.elems = <int *> malloc(S.m * sizeof(int))
    S.succ = <int *> malloc(n * sizeof(int))
    S.pred = <int *> malloc(n * sizeof(int))
    S.cand = <int *> malloc((S.m + 2) * n * sizeof(int))
    try:
        for i in range(S.m):
            S.elems[i] = elems[i]
        for i in range(n):
            S.succ[i] = -1
            S.pred[i] = -1
        for x, y in seeds:
            if not (0 <= x < n and 0 <= y < n):
                raise ValueError(f"seed corner ({x}, {y}) outside Z_{n}")
            cnt = _orbit(n, x, y, fa, fb)
            if cnt < 0 or _assign(&S, fa, fb, cnt, da, db) < 0:
                return 0, None, 0
        filled = 0
        for i in range(S.m):
            if S.succ[S.elems[i]] != -1:
                filled += 1
        with nogil:
            status = _dfs(&S, filled, 0)
        if status != 1:
            return status, None, S.nodes
        v = seeds[0][0] if seeds else elems[0]
        log = [v]
        for i in range(S.m - 1):
            v = S.succ[v]
            log.append(v)
        return 1, log, S.nodes
    finally:
        free(S.elems)
        free(S.succ)
        free(S.pred)
        free(S.cand)
