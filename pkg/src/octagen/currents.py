"""Current graphs over Z_n, orientable-cascade checks and derived embeddings."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from octagen import kernels
from octagen.rotsys import (
    ALTERNATE,
    NORMAL,
    FaceSet,
    GraphSpec,
    RotationSystem,
    StructureError,
    check_graph_identity,
    flip_vertices,
    trace_faces,
    walk_from,
)


class LogError(ValueError):
    """A log that cannot generate an octahedral derived graph."""


class NotTriangularError(ValueError):
    """A derived rotation system that fails the triangularity check."""

    def __init__(self, message: str, faces: FaceSet | None = None):
        super().__init__(message)
        self.faces = faces


@dataclass(frozen=True)
class Log:
    """Cyclic sequence over Z_n read along a circuit."""

    n: int
    entries: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(int(x) % self.n for x in self.entries))
        if self.n <= 0:
            raise LogError("modulus must be positive")
        if 0 in self.entries:
            raise LogError("log contains 0")

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def covers_octahedral(self) -> bool:
        """Each element of Z_n minus {0, n/2} appears exactly once."""
        if self.n % 2:
            return False
        want = {x for x in range(1, self.n) if x != self.n // 2}
        return len(self.entries) == len(want) and set(self.entries) == want

    def rotated_to(self, first: int) -> "Log":
        k = self.entries.index(first)
        return Log(self.n, self.entries[k:] + self.entries[:k])

    def contains_run(self, run: Sequence[int]) -> bool:
        """True if ``run`` occurs as consecutive entries (cyclically)."""
        m, k = len(self.entries), len(run)
        doubled = self.entries + self.entries[: k - 1]
        return any(doubled[i : i + k] == tuple(run) for i in range(m))

    def __str__(self):
        return "(" + " ".join(map(str, self.entries)) + ")"


# ---------------------------------------------------------------------------
# current graphs


@dataclass(frozen=True, eq=False)
class CurrentGraph:
    """Embedded graph whose darts carry currents in Z_n.

    ``currents[e]`` is the current on the dart from ``ends[e][0]`` to
    ``ends[e][1]``; the reverse dart carries ``-signature[e] * currents[e]``.
    """

    embedding: RotationSystem
    n: int
    currents: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "currents", tuple(c % self.n for c in self.currents))
        if len(self.currents) != self.embedding.edge_count:
            raise StructureError("one current per edge required")
        if any(c == 0 for c in self.currents):
            raise StructureError("currents must be nonzero")

    def dart_current(self, d: int) -> int:
        e = d >> 1
        c = self.currents[e]
        if d & 1:
            return (-self.embedding.signature[e] * c) % self.n
        return c

    def excess(self, v: int) -> int:
        """Sum of currents on the arcs entering ``v``."""
        rs = self.embedding
        total = 0
        for e, (a, b) in enumerate(rs.ends):
            if b == v:
                total += self.dart_current(2 * e)
            if a == v:
                total += self.dart_current(2 * e + 1)
        return total % self.n

    def __eq__(self, other):
        if not isinstance(other, CurrentGraph):
            return NotImplemented
        return self.to_text() == other.to_text()

    def __hash__(self):
        return hash(self.to_text())

    def to_text(self) -> str:
        rs = self.embedding
        lines = ["cascade 1", f"mod {self.n}"]
        for v, rot in enumerate(rs.rotation):
            refs = " ".join(f"{d >> 1}{'-' if d & 1 else '+'}" for d in rot)
            lines.append(f"v {v}: {refs}")
        for e, (a, b) in enumerate(rs.ends):
            lines.append(f"e {e} {a} {b} {self.currents[e]} {rs.signature[e]}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "CurrentGraph":
        return parse_cascade(text)


def _clean(text: str) -> list[str]:
    out = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            out.append(line)
    return out


def parse_cascade(text: str) -> CurrentGraph:
    """Parse the ``cascade 1`` format."""
    lines = _clean(text)
    if not lines or lines[0].split() != ["cascade", "1"]:
        raise StructureError("missing 'cascade 1' header")
    m = re.fullmatch(r"mod\s+(\d+)", lines[1]) if len(lines) > 1 else None
    if not m:
        raise StructureError("missing 'mod <n>' line")
    n = int(m.group(1))
    verts: dict[int, list[int]] = {}
    edges: dict[int, tuple[int, int, int, int]] = {}
    for ln in lines[2:]:
        if ln.startswith("v "):
            mm = re.fullmatch(r"v\s+(\d+)\s*:(.*)", ln)
            if not mm:
                raise StructureError(f"bad vertex line {ln!r}")
            darts = []
            for tok in mm.group(2).split():
                t = re.fullmatch(r"(\d+)([+-])", tok)
                if not t:
                    raise StructureError(f"bad dart reference {tok!r}")
                darts.append(2 * int(t.group(1)) + (t.group(2) == "-"))
            verts[int(mm.group(1))] = darts
        elif ln.startswith("e "):
            toks = ln.split()
            if len(toks) != 6:
                raise StructureError(f"bad edge line {ln!r}")
            e, a, b, c, s = map(int, toks[1:])
            edges[e] = (a, b, c, s)
        else:
            raise StructureError(f"unrecognized line {ln!r}")
    if sorted(edges) != list(range(len(edges))) or sorted(verts) != list(range(len(verts))):
        raise StructureError("vertex and edge ids must be 0..k-1")
    rs = RotationSystem(
        tuple((edges[e][0], edges[e][1]) for e in range(len(edges))),
        tuple(tuple(verts[v]) for v in range(len(verts))),
        tuple(edges[e][3] for e in range(len(edges))),
    )
    return CurrentGraph(rs, n, tuple(edges[e][2] for e in range(len(edges))))


# ---------------------------------------------------------------------------
# cascade verification


@dataclass
class CascadeReport:
    properties: dict[str, bool]
    excess: dict[int, int]
    circuit_count: int
    edge_kind: dict[int, str]
    log: Log | None
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(self.properties.values())

    def failed(self) -> list[str]:
        return [k for k, ok in self.properties.items() if not ok]


def _edge_directions(rs: RotationSystem, walk) -> dict[int, str]:
    """Classify each edge of a one-face embedding as uni- or bidirectional."""
    seen: dict[int, list[int]] = {}
    for d, _ in walk:
        seen.setdefault(d >> 1, []).append(d & 1)
    kinds = {}
    for e in range(rs.edge_count):
        ends = seen.get(e, [])
        if len(ends) != 2:
            kinds[e] = "?"
        else:
            kinds[e] = "bidirectional" if ends[0] != ends[1] else "unidirectional"
    return kinds


def _circuit_log(cg: CurrentGraph, walk) -> Log:
    sig = cg.embedding.signature
    # a twisted edge is read in the behavior reached at its far end
    return Log(cg.n, [b * sig[d >> 1] * cg.dart_current(d) for d, b in walk])


def _pendant_walk(cg: CurrentGraph):
    rs = cg.embedding
    pendants = [v for v in range(rs.vertex_count) if rs.degree(v) == 1]
    if len(pendants) != 1:
        raise LogError(f"expected exactly one degree-1 vertex, found {len(pendants)}")
    d_out = rs.rotation[pendants[0]][0]
    d_in = d_out ^ 1
    # start on the dart entering the pendant so the walk is normal at the pendant
    start_behavior = NORMAL * rs.signature[d_in >> 1]
    return walk_from(rs, d_in, start_behavior)


def extract_log(cg: CurrentGraph) -> Log:
    """Log of the single circuit, oriented to be normal at the degree-1 vertex.

    Entries are the currents of the traversed darts, negated while the walk
    is in alternate behavior; a twisted dart is read in the behavior the
    walk has after crossing it.
    The log starts with the dart entering the degree-1 vertex.
    """
    faces = trace_faces(cg.embedding)
    if faces.F != 1:
        raise LogError(f"current graph has {faces.F} circuits, expected 1")
    return _circuit_log(cg, _pendant_walk(cg))


def verify_cascade(cg: CurrentGraph) -> CascadeReport:
    """Check the orientable-cascade properties C1..C6."""
    rs = cg.embedding
    n = cg.n
    props: dict[str, bool] = {}
    notes = []
    degrees = [rs.degree(v) for v in range(rs.vertex_count)]
    props["C1"] = all(d in (1, 3) for d in degrees)
    if not props["C1"]:
        notes.append(f"degrees {sorted(set(degrees))}")
    faces = trace_faces(rs)
    props["C2"] = faces.F == 1
    excess = {v: cg.excess(v) for v in range(rs.vertex_count)}
    bad3 = [v for v in range(rs.vertex_count) if degrees[v] == 3 and excess[v] != 0]
    props["C3"] = not bad3
    if bad3:
        notes.append(f"Kirchhoff law fails at {bad3}")
    ones = [v for v in range(rs.vertex_count) if degrees[v] == 1]
    props["C4"] = all(excess[v] != 0 and (3 * excess[v]) % n == 0 for v in ones)
    log = None
    kinds: dict[int, str] = {}
    if props["C2"]:
        kinds = _edge_directions(rs, faces.faces[0])
        try:
            walk = _pendant_walk(cg) if len(ones) == 1 else list(faces.faces[0])
        except LogError:
            walk = list(faces.faces[0])
        log = _circuit_log(cg, walk)
        props["C5"] = log.covers_octahedral()
        props["C6"] = all(
            (cg.currents[e] % 2 == 0) == (kinds[e] == "bidirectional") for e in range(rs.edge_count)
        )
    else:
        props["C5"] = False
        props["C6"] = False
        notes.append("C5/C6 need a single circuit")
    return CascadeReport(props, excess, faces.F, kinds, log, notes)


# ---------------------------------------------------------------------------
# derived embeddings


def derive_index1(log: Log) -> RotationSystem:
    """Derived embedding of a one-circuit log by the additivity rule.

    Vertex ``i`` gets the log shifted by ``i``; edges joining an odd and an
    even vertex are twisted, and flipping every odd vertex then yields the
    returned pure rotation system.
    """
    if not log.covers_octahedral():
        raise LogError("log must contain each element of Z_n \\ {0, n/2} exactly once")
    n = log.n
    rows = [[(i + x) % n for x in log.entries] for i in range(n)]
    twisted = [(i, (i + x) % n) for i in range(n) for x in log.entries if x % 2 and i < (i + x) % n]
    rs = RotationSystem.from_neighbors(rows, twisted)
    return flip_vertices(rs, range(1, n, 2))


def derive_index1_twisted(log: Log) -> RotationSystem:
    """Same as :func:`derive_index1` but before the odd vertices are flipped."""
    if not log.covers_octahedral():
        raise LogError("log must contain each element of Z_n \\ {0, n/2} exactly once")
    n = log.n
    rows = [[(i + x) % n for x in log.entries] for i in range(n)]
    twisted = [(i, (i + x) % n) for i in range(n) for x in log.entries if x % 2 and i < (i + x) % n]
    return RotationSystem.from_neighbors(rows, twisted)


def derive_index2(log0: Log, log1: Log) -> RotationSystem:
    """Index-2 derivation: even vertices shift ``log0``, odd vertices ``log1``.

    The result must be triangular; otherwise :class:`NotTriangularError`.
    """
    if log0.n != log1.n or log0.n % 2:
        raise LogError("both logs need the same even modulus")
    n = log0.n
    if len(log0) != n - 2 or len(log1) != n - 2:
        raise LogError(f"index-2 rows must have length {n - 2}")
    rows = [[(i + x) % n for x in (log1 if i % 2 else log0).entries] for i in range(n)]
    try:
        rs = RotationSystem.from_neighbors(rows)
    except StructureError as exc:
        raise LogError(f"rows do not define a graph: {exc}") from exc
    faces = trace_faces(rs)
    if not faces.is_triangular:
        raise NotTriangularError(
            f"index-2 derivation has face lengths {dict(faces.length_multiset())}", faces
        )
    return rs


def is_octahedral_triangulation(rs: RotationSystem) -> bool:
    faces = trace_faces(rs)
    return faces.is_triangular and check_graph_identity(rs, GraphSpec.octahedral(rs.vertex_count)).passed


# ---------------------------------------------------------------------------
# current graph from a log


def _solve_gf2(rows: list[tuple[int, int]], nvars: int):
    """Solve equations ``mask . x = rhs`` over GF(2); free variables = 0."""
    pivots: dict[int, tuple[int, int]] = {}
    for mask, rhs in rows:
        for bit, (pm, pr) in pivots.items():
            if mask >> bit & 1:
                mask ^= pm
                rhs ^= pr
        if mask == 0:
            if rhs:
                return None
            continue
        bit = mask.bit_length() - 1
        for b2, (pm, pr) in list(pivots.items()):
            if pm >> bit & 1:
                pivots[b2] = (pm ^ mask, pr ^ rhs)
        pivots[bit] = (mask, rhs)
    x = [0] * nvars
    for bit, (mask, rhs) in pivots.items():
        # reduced rows: every other variable in the row is free (= 0)
        x[bit] = rhs
    return x


def cascade_from_log(log: Log) -> CurrentGraph:
    """Recover a one-circuit current graph whose log is ``log``.

    Corners of the log are grouped into vertices by the triangle each one
    closes in the derived embedding; each current pair ``{x, -x}`` becomes an
    edge.  Twists and behaviors come from a GF(2) system.  The first corner
    of ``log`` must be the degree-1 vertex.  Raises :class:`LogError` when
    the log does not come from such a current graph.
    """
    n = log.n
    L = list(log.entries)
    m = len(L)
    if not log.covers_octahedral():
        raise LogError("log is not octahedral")
    pos = {x: k for k, x in enumerate(L)}
    # corner k joins entries k and k+1
    vertex_of = [-1] * m
    groups: list[list[int]] = []
    for k in range(m):
        if vertex_of[k] != -1:
            continue
        orbit = kernels.corner_orbit(n, L[k], L[(k + 1) % m])
        if orbit is None:
            raise LogError(f"corner {k} closes no triangle")
        corners = []
        for a, b in orbit:
            j = pos[a]
            if L[(j + 1) % m] != b or vertex_of[j] != -1:
                raise LogError(f"corner {k} is inconsistent with the log")
            corners.append(j)
        for j in corners:
            vertex_of[j] = len(groups)
        groups.append(corners)
    if len(groups[vertex_of[0]]) != 1:
        raise LogError("log must start at the degree-1 vertex")

    def tail(k):
        return vertex_of[(k - 1) % m]

    def head(k):
        return vertex_of[k]

    ends = []
    currents = []
    tail_dart = [0] * m
    head_dart = [0] * m
    kind = []
    first_pos = []
    second_pos = []
    for x in sorted({min(v, n - v) for v in L}):
        p, q = sorted((pos[x], pos[n - x]))
        e = len(ends)
        u, v = tail(p), head(p)
        if u == v:
            raise LogError(f"current {x} would be a loop")
        ends.append((u, v))
        tail_dart[p], head_dart[p] = 2 * e, 2 * e + 1
        if (tail(q), head(q)) == (v, u):
            kind.append("bi")
            tail_dart[q], head_dart[q] = 2 * e + 1, 2 * e
        elif (tail(q), head(q)) == (u, v):
            kind.append("uni")
            tail_dart[q], head_dart[q] = 2 * e, 2 * e + 1
        else:
            raise LogError(f"current {x} does not join a consistent pair of vertices")
        first_pos.append(p)
        second_pos.append(q)
    E = len(ends)
    edge_at = [0] * m
    for k in range(m):
        edge_at[k] = tail_dart[k] >> 1

    # behavior at corner k as an affine form over the twist variables
    forms = [0] * m
    acc = 0
    forms[0] = 0
    for k in range(1, m):
        acc ^= 1 << edge_at[k]
        forms[k] = acc
    eqs: list[tuple[int, int]] = []
    for e in range(E):
        bp, bq = forms[first_pos[e] - 1], forms[second_pos[e] - 1]
        if first_pos[e] == 0:
            bp = forms[m - 1]
        if kind[e] == "bi":
            eqs.append((bp ^ bq ^ (1 << e), 0))
        else:
            eqs.append((bp ^ bq, 1))
    rot_choices = {}
    for gid, corners in enumerate(groups):
        if len(corners) == 1:
            continue
        pairs = [(head_dart[k], tail_dart[(k + 1) % m]) for k in corners]
        valid = []
        for bits in range(8):
            nxt = {}
            for i, (a, d) in enumerate(pairs):
                if bits >> i & 1:
                    a, d = d, a
                nxt[a] = d
            if len(nxt) == 3 and set(nxt.values()) == set(nxt):
                x0 = next(iter(nxt))
                if nxt[nxt[nxt[x0]]] == x0 and nxt[x0] != x0:
                    valid.append(bits)
        if not valid:
            raise LogError(f"vertex {gid} admits no rotation")
        rot_choices[gid] = (pairs, corners)
        b0 = valid[0]
        for i in (1, 2):
            rel = (b0 >> i & 1) ^ (b0 & 1)
            if any(((vb >> i & 1) ^ (vb & 1)) != rel for vb in valid):
                raise LogError(f"vertex {gid} rotation is not determined by relative behavior")
            eqs.append((forms[corners[0]] ^ forms[corners[i]], rel))
    sol = _solve_gf2(eqs, E)
    if sol is None:
        raise LogError("no twist assignment reproduces the log")
    behavior = [0] * m
    acc = 0
    for k in range(1, m):
        acc ^= sol[edge_at[k]]
        behavior[k] = acc
    signature = tuple(-1 if t else 1 for t in sol)
    rotation = []
    for gid, corners in enumerate(groups):
        if len(corners) == 1:
            rotation.append((head_dart[corners[0]],))
            continue
        nxt = {}
        for k in corners:
            a, d = head_dart[k], tail_dart[(k + 1) % m]
            if behavior[k]:
                a, d = d, a
            nxt[a] = d
        start = min(nxt)
        cyc = [start, nxt[start], nxt[nxt[start]]]
        rotation.append(tuple(cyc))
    rs = RotationSystem(tuple(ends), tuple(rotation), signature)
    for e in range(E):
        p = first_pos[e]
        b = behavior[p]
        currents.append(L[p] if b == 0 else (-L[p]) % n)
    cg = CurrentGraph(rs, n, tuple(currents))
    back = extract_log(cg)
    if back.entries != tuple(L):
        raise LogError(f"reconstructed current graph reads back {back}, not {log}")
    return cg


# ---------------------------------------------------------------------------
# log file format and builtins


def format_logs(logs: Sequence[Log]) -> str:
    lines = ["log 1", f"mod {logs[0].n}"]
    lines += ["row " + " ".join(map(str, lg.entries)) for lg in logs]
    return "\n".join(lines) + "\n"


def parse_logs(text: str) -> list[Log]:
    """Parse ``log 1`` text: a ``mod <n>`` line then one or two ``row`` lines."""
    lines = _clean(text)
    if not lines or lines[0].split() != ["log", "1"]:
        raise LogError("missing 'log 1' header")
    m = re.fullmatch(r"mod\s+(\d+)", lines[1]) if len(lines) > 1 else None
    if not m:
        raise LogError("missing 'mod <n>' line")
    n = int(m.group(1))
    rows = []
    for ln in lines[2:]:
        toks = ln.split()
        if toks[0] != "row":
            raise LogError(f"unrecognized line {ln!r}")
        try:
            rows.append(Log(n, [int(t) for t in toks[1:]]))
        except ValueError as exc:
            raise LogError(str(exc)) from exc
    if not rows:
        raise LogError("no rows")
    return rows


BUILTINS = ("z18", "z24-index2")


def _fixture_text(name: str) -> str:
    return resources.files("octagen.fixtures").joinpath(name).read_text()


def builtin_logs(name: str) -> list[Log]:
    if name == "z18":
        return parse_logs(_fixture_text("z18.log"))
    if name == "z24-index2":
        return parse_logs(_fixture_text("z24-index2.log"))
    raise KeyError(f"unknown builtin {name!r}; known: {', '.join(BUILTINS)}")


def builtin_cascade(name: str) -> CurrentGraph:
    if name == "z18":
        return parse_cascade(_fixture_text("z18.cascade"))
    raise KeyError(f"no cascade fixture named {name!r}")


def load_logs(source: str | Path) -> list[Log]:
    """Logs from ``builtin:<name>``, a ``log 1`` file, or a ``cascade 1`` file."""
    src = str(source)
    if src.startswith("builtin:"):
        return builtin_logs(src.split(":", 1)[1])
    text = Path(src).read_text()
    if text.lstrip().startswith("cascade"):
        return [extract_log(parse_cascade(text))]
    return parse_logs(text)


def load_cascade(source: str | Path) -> CurrentGraph:
    src = str(source)
    if src.startswith("builtin:"):
        return builtin_cascade(src.split(":", 1)[1])
    return parse_cascade(Path(src).read_text())


def shift_faces(faces: Iterable[tuple[int, ...]], k: int, n: int) -> set[frozenset]:
    return {frozenset((v + k) % n for v in f) for f in faces}
