"""Pure-Python versions of the hot loops; mirrored by ``_ckernels.pyx``."""


def trace(succ, pred, dsig):
    """Face walks of a rotation system given as flat dart arrays.

    A state is ``2 * dart + alt`` (``alt`` = 1 in alternate behavior).  Both
    a state and its reverse are marked when visited, so each face is emitted
    exactly once.
    """
    ndarts = len(succ)
    used = bytearray(2 * ndarts)
    faces = []
    for alt0 in (0, 1):
        for d0 in range(ndarts):
            if used[2 * d0 + alt0]:
                continue
            walk = []
            d, alt = d0, alt0
            while not used[2 * d + alt]:
                used[2 * d + alt] = 1
                # reverse walk leaves along the dart before d in the other behavior
                if alt:
                    used[2 * succ[d]] = 1
                else:
                    used[2 * pred[d] + 1] = 1
                walk.append(2 * d + alt)
                if dsig[d] < 0:
                    alt ^= 1
                d = d ^ 1
                d = pred[d] if alt else succ[d]
            faces.append(walk)
    return faces


_MASK = (1 << 64) - 1


def _splitmix(state):
    state = (state + 0x9E3779B97F4A7C15) & _MASK
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return state, z ^ (z >> 31)


def corner_orbit(n, x, y):
    """Log adjacencies forced by a triangular face at the corner ``x -> y``.

    Returns the list of ``(a, b)`` facts meaning "``b`` follows ``a`` in the
    log", or ``None`` when the orbit is not a closed corner triple (or the
    single corner of a degree-1 vertex).
    """
    half = n // 2
    out = []
    p, a, b = 0, x, y
    for _ in range(3):
        fact = (a, b) if p == 0 else (b, a)
        if out and fact == out[0]:
            break
        if a == b or a % half == 0 or b % half == 0:
            return None
        out.append(fact)
        p, a, b = p ^ (b & 1), (-b) % n, (a - b) % n
    if p != 0 or a != x or b != y:
        return None
    return out


def corner_search(n, seeds, rng_seed, limit):
    """Depth-first search for a triangular log over Z_n.

    ``seeds`` is a list of corners ``(x, y)`` whose orbits are imposed first.
    Returns ``(status, log, nodes)``; status 1 = found, 0 = space exhausted,
    -1 = node limit hit.  ``log`` starts at ``seeds[0][0]`` (or 1).
    """
    half = n // 2
    elems = [v for v in range(1, n) if v != half]
    m = len(elems)
    succ = [-1] * n
    pred = [-1] * n
    state = [rng_seed & _MASK]
    nodes = [0]

    def undo(done):
        for a, b in done:
            succ[a] = -1
            pred[b] = -1

    def assign(facts):
        done = []
        for a, b in facts:
            if succ[a] == b and pred[b] == a:
                continue
            if succ[a] != -1 or pred[b] != -1:
                undo(done)
                return None
            succ[a] = b
            pred[b] = a
            done.append((a, b))
        for a, b in done:
            c, length = b, 1
            while succ[c] != -1 and c != a:
                c = succ[c]
                length += 1
            if c == a and length < m:
                undo(done)
                return None
        return done

    for x, y in seeds:
        if not (0 <= x < n and 0 <= y < n):
            raise ValueError(f"seed corner ({x}, {y}) outside Z_{n}")
        orbit = corner_orbit(n, x, y)
        if orbit is None or assign(orbit) is None:
            return 0, None, 0

    def dfs(filled):
        nodes[0] += 1
        if nodes[0] > limit:
            return -1
        if filled == m:
            return 1
        best = None
        for x in elems:
            if succ[x] != -1:
                continue
            cands = []
            for y in elems:
                if pred[y] != -1 or y == x:
                    continue
                orbit = corner_orbit(n, x, y)
                if orbit is None or len(orbit) != 3:
                    continue
                ok = True
                for a, b in orbit:
                    if (succ[a] != -1 and succ[a] != b) or (pred[b] != -1 and pred[b] != a):
                        ok = False
                        break
                if ok:
                    cands.append(orbit)
            if best is None or len(cands) < len(best):
                best = cands
                if len(cands) <= 1:
                    break
        for i in range(len(best) - 1, 0, -1):
            state[0], r = _splitmix(state[0])
            j = r % (i + 1)
            best[i], best[j] = best[j], best[i]
        for orbit in best:
            done = assign(orbit)
            if done is None:
                continue
            res = dfs(filled + len(done))
            if res != 0:
                return res
            undo(done)
        return 0

    filled = sum(1 for v in elems if succ[v] != -1)
    status = dfs(filled)
    if status != 1:
        return status, None, nodes[0]
    start = seeds[0][0] if seeds else elems[0]
    log = [start]
    while len(log) < m:
        log.append(succ[log[-1]])
    return 1, log, nodes[0]
