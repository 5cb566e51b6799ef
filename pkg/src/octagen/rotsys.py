"""Rotation systems: dart-level cellular embeddings with edge signatures.

A dart is encoded as the integer ``2 * edge + end``; ``end`` is 0 for the
edge's first endpoint and 1 for the second, so ``d ^ 1`` is the partner.
Rotations are read as written in normal behavior and backwards in alternate
behavior; traversing an edge of signature -1 toggles the behavior.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

from octagen import kernels

NORMAL = 1
ALTERNATE = -1

Edge = tuple  # (u, v) or (u, v, slot)


class StructureError(ValueError):
    """A rotation system whose darts do not form a valid incidence structure."""


class EmbeddingError(ValueError):
    """An embedding-level failure: disconnected input, bad genus, missing face."""


def partner(d: int) -> int:
    return d ^ 1


@dataclass(frozen=True, eq=False)
class RotationSystem:
    """Cellular embedding given by per-vertex cyclic dart orders.

    ``ends[e]`` is the endpoint pair of edge ``e``; ``rotation[v]`` lists the
    darts anchored at ``v`` in cyclic order; ``signature[e]`` is +1 or -1.
    Parallel edges and self-loops are allowed.
    """

    ends: tuple[tuple[int, int], ...]
    rotation: tuple[tuple[int, ...], ...]
    signature: tuple[int, ...] = field(default=())

    def __post_init__(self):
        ends = tuple(tuple(p) for p in self.ends)
        rotation = tuple(tuple(r) for r in self.rotation)
        signature = tuple(self.signature) if self.signature else (1,) * len(ends)
        object.__setattr__(self, "ends", ends)
        object.__setattr__(self, "rotation", rotation)
        object.__setattr__(self, "signature", signature)
        self._check()

    def _check(self) -> None:
        n, m = len(self.rotation), len(self.ends)
        if n == 0:
            raise StructureError("rotation system needs at least one vertex")
        if len(self.signature) != m:
            raise StructureError("signature must cover every edge")
        for e, s in enumerate(self.signature):
            if s not in (1, -1):
                raise StructureError(f"edge {e} has signature {s!r}")
        seen = [-1] * (2 * m)
        for v, rot in enumerate(self.rotation):
            for d in rot:
                if not 0 <= d < 2 * m:
                    raise StructureError(f"dart {d} at vertex {v} names no edge")
                if seen[d] != -1:
                    raise StructureError(f"dart {d} appears twice (vertices {seen[d]} and {v})")
                seen[d] = v
        for d, v in enumerate(seen):
            if v == -1:
                raise StructureError(f"dart {d} is missing from every rotation")
            u = self.ends[d >> 1][d & 1]
            if not 0 <= u < n or u != v:
                raise StructureError(f"dart {d} sits at vertex {v} but its edge ends at {u}")

    # -- basic structure -------------------------------------------------

    @property
    def vertex_count(self) -> int:
        return len(self.rotation)

    @property
    def edge_count(self) -> int:
        return len(self.ends)

    @property
    def is_pure(self) -> bool:
        return all(s == 1 for s in self.signature)

    def dart_vertex(self, d: int) -> int:
        return self.ends[d >> 1][d & 1]

    def dart_head(self, d: int) -> int:
        """Vertex at the far end of dart ``d``."""
        return self.ends[d >> 1][(d & 1) ^ 1]

    def degree(self, v: int) -> int:
        return len(self.rotation[v])

    @cached_property
    def _succ_pred(self) -> tuple[list[int], list[int]]:
        succ = [0] * (2 * self.edge_count)
        pred = [0] * (2 * self.edge_count)
        for rot in self.rotation:
            k = len(rot)
            for i, d in enumerate(rot):
                succ[d] = rot[(i + 1) % k]
                pred[d] = rot[(i - 1) % k]
        return succ, pred

    def succ(self, d: int) -> int:
        return self._succ_pred[0][d]

    def pred(self, d: int) -> int:
        return self._succ_pred[1][d]

    def neighbors(self, v: int) -> list[int]:
        return [self.dart_head(d) for d in self.rotation[v]]

    def edge_multiset(self) -> Counter:
        """Counter of unordered endpoint pairs ``(min, max)``."""
        return Counter((min(u, v), max(u, v)) for u, v in self.ends)

    def edge_labels(self) -> list[tuple[int, int, int]]:
        """Canonical ``(u, v, slot)`` label of each edge id.

        Parallel edges between ``u <= v`` get slots 0, 1, ... in order of
        first appearance when scanning rotations vertex by vertex.
        """
        order = {}
        for rot in self.rotation:
            for d in rot:
                order.setdefault(d >> 1, len(order))
        counts: Counter = Counter()
        labels = [None] * self.edge_count
        for e in sorted(range(self.edge_count), key=order.__getitem__):
            u, v = self.ends[e]
            key = (min(u, v), max(u, v))
            labels[e] = (*key, counts[key])
            counts[key] += 1
        return labels

    def find_edge(self, edge: Edge) -> int:
        """Edge id for a ``(u, v)`` or ``(u, v, slot)`` label."""
        u, v, *rest = edge
        slot = rest[0] if rest else 0
        key = (min(u, v), max(u, v), slot)
        for e, lab in enumerate(self.edge_labels()):
            if lab == key:
                return e
        raise KeyError(f"edge {edge!r} not present")

    @cached_property
    def component_count(self) -> int:
        parent = list(range(self.vertex_count))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for u, v in self.ends:
            parent[find(u)] = find(v)
        return len({find(v) for v in range(self.vertex_count)})

    # -- equality is by canonical text -----------------------------------

    def __eq__(self, other):
        if not isinstance(other, RotationSystem):
            return NotImplemented
        return self.to_text() == other.to_text()

    def __hash__(self):
        return hash(self.to_text())

    def __repr__(self):
        return f"RotationSystem(V={self.vertex_count}, E={self.edge_count}, pure={self.is_pure})"

    # -- construction helpers --------------------------------------------

    @classmethod
    def from_neighbors(
        cls,
        rotations: Mapping[int, Sequence[int]] | Sequence[Sequence[int]],
        twisted: Iterable[tuple[int, int]] = (),
    ) -> "RotationSystem":
        """Build a simple-graph rotation system from neighbor cycles."""
        if isinstance(rotations, Mapping):
            n = max(rotations) + 1
            rows = [list(rotations.get(v, ())) for v in range(n)]
        else:
            rows = [list(r) for r in rotations]
        n = len(rows)
        edge_id: dict[tuple[int, int], int] = {}
        ends: list[tuple[int, int]] = []
        rotation = []
        for v, row in enumerate(rows):
            darts = []
            if len(set(row)) != len(row):
                raise StructureError(f"vertex {v} lists a neighbor twice")
            for u in row:
                if not 0 <= u < n or u == v:
                    raise StructureError(f"vertex {v} has invalid neighbor {u}")
                key = (min(u, v), max(u, v))
                if key not in edge_id:
                    edge_id[key] = len(ends)
                    ends.append((v, u))
                e = edge_id[key]
                darts.append(2 * e + (0 if ends[e][0] == v else 1))
            rotation.append(darts)
        for v, row in enumerate(rows):
            for u in row:
                if v not in rows[u]:
                    raise StructureError(f"{u} is in the rotation of {v} but not vice versa")
        sig = [1] * len(ends)
        for u, v in twisted:
            sig[edge_id[(min(u, v), max(u, v))]] = -1
        return cls(tuple(ends), tuple(map(tuple, rotation)), tuple(sig))

    # -- "rotsys 1" text format ------------------------------------------

    def to_text(self) -> str:
        labels = self.edge_labels()
        lines = ["rotsys 1", f"n {self.vertex_count}"]

        def ref(v, d):
            a, b, k = labels[d >> 1]
            other = b if a == v else a
            return f"{other}" if k == 0 else f"{other}#{k}"

        for v, rot in enumerate(self.rotation):
            body = " ".join(ref(v, d) for d in rot)
            lines.append(f"v {v}: {body}" if body else f"v {v}:")
        for e in sorted(range(self.edge_count), key=lambda e: labels[e]):
            if self.signature[e] == -1:
                a, b, k = labels[e]
                lines.append(f"twist {a} {b}" if k == 0 else f"twist {a} {b}#{k}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "RotationSystem":
        return parse_rotsys(text)


_REF = re.compile(r"^(\d+)(?:#(\d+))?$")


def _strip_comment(line: str) -> str:
    # '#' introduces a comment only at line start or after whitespace;
    # the '#' inside a dart reference like 3#1 is kept
    return re.split(r"(?:^|\s)#", line, maxsplit=1)[0].strip()


def parse_rotsys(text: str) -> RotationSystem:
    """Parse the ``rotsys 1`` format. Raises :class:`StructureError`."""
    lines = [_strip_comment(raw) for raw in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines or lines[0].split() != ["rotsys", "1"]:
        raise StructureError("missing 'rotsys 1' header")
    if len(lines) < 2 or not re.fullmatch(r"n\s+\d+", lines[1]):
        raise StructureError("missing 'n <count>' line")
    n = int(lines[1].split()[1])
    rows: list[list[tuple[int, int]] | None] = [None] * n
    twists = []
    for ln in lines[2:]:
        if ln.startswith("v "):
            m = re.fullmatch(r"v\s+(\d+)\s*:(.*)", ln)
            if not m:
                raise StructureError(f"bad vertex line: {ln!r}")
            v = int(m.group(1))
            if not 0 <= v < n or rows[v] is not None:
                raise StructureError(f"vertex {v} out of range or repeated")
            refs = []
            for tok in m.group(2).split():
                mm = _REF.match(tok)
                if not mm:
                    raise StructureError(f"bad dart reference {tok!r}")
                refs.append((int(mm.group(1)), int(mm.group(2) or 0)))
            rows[v] = refs
        elif ln.startswith("twist"):
            toks = ln.split()
            mm = _REF.match(toks[2]) if len(toks) == 3 else None
            if not mm or not toks[1].isdigit():
                raise StructureError(f"bad twist line: {ln!r}")
            twists.append((int(toks[1]), int(mm.group(1)), int(mm.group(2) or 0)))
        else:
            raise StructureError(f"unrecognized line: {ln!r}")
    for v in range(n):
        if rows[v] is None:
            rows[v] = []
    # pair dart references into edges
    ends: list[tuple[int, int]] = []
    pending: dict[tuple[int, int, int], list[int]] = {}
    rotation = []
    label_of: dict[tuple[int, int, int], int] = {}
    for v, refs in enumerate(rows):
        darts = []
        for u, k in refs:
            if not 0 <= u < n:
                raise StructureError(f"vertex {v} references unknown vertex {u}")
            key = (min(u, v), max(u, v), k)
            if key not in label_of:
                label_of[key] = len(ends)
                ends.append((v, u))
                pending[key] = [0]
                darts.append(2 * label_of[key])
            else:
                e = label_of[key]
                used = pending[key]
                if len(used) >= 2:
                    raise StructureError(f"edge {key} referenced more than twice")
                if u == v:
                    end = 1
                else:
                    end = 0 if ends[e][0] == v else 1
                    if end == 0:
                        raise StructureError(f"edge {key} listed twice at vertex {v}")
                used.append(end)
                darts.append(2 * e + end)
        rotation.append(darts)
    for key, used in pending.items():
        if len(used) != 2:
            raise StructureError(f"edge {key} has only one end listed")
    sig = [1] * len(ends)
    for a, b, k in twists:
        key = (min(a, b), max(a, b), k)
        if key not in label_of:
            raise StructureError(f"twist names absent edge {key}")
        sig[label_of[key]] = -1
    return RotationSystem(tuple(ends), tuple(map(tuple, rotation)), tuple(sig))


# ---------------------------------------------------------------------------
# faces


@dataclass(frozen=True)
class FaceSet:
    """Traced boundary walks of a rotation system.

    Each face is a tuple of ``(dart, behavior)`` pairs: the walk leaves along
    ``dart`` while in ``behavior`` (``NORMAL`` or ``ALTERNATE``).
    """

    system: RotationSystem = field(repr=False)
    faces: tuple[tuple[tuple[int, int], ...], ...]

    @property
    def V(self) -> int:
        return self.system.vertex_count

    @property
    def E(self) -> int:
        return self.system.edge_count

    @property
    def F(self) -> int:
        return len(self.faces)

    @property
    def euler_characteristic(self) -> int:
        return self.V - self.E + self.F

    @property
    def genus(self) -> int:
        if self.system.component_count != 1:
            raise EmbeddingError("genus of a disconnected embedding is not defined here")
        return genus_of(self)

    def lengths(self) -> list[int]:
        return [len(f) for f in self.faces]

    def length_multiset(self) -> Counter:
        return Counter(self.lengths())

    @property
    def is_triangular(self) -> bool:
        return all(len(f) == 3 for f in self.faces)

    def vertex_walk(self, face: int) -> tuple[int, ...]:
        rs = self.system
        return tuple(rs.dart_vertex(d) for d, _ in self.faces[face])

    def canonical_walks(self) -> list[tuple[int, ...]]:
        """Vertex walks rotated to their lexicographically least rotation."""
        out = []
        for i in range(self.F):
            w = self.vertex_walk(i)
            out.append(min(w[k:] + w[:k] for k in range(len(w))))
        return out

    def find_face(self, vertices: Sequence[int]) -> int:
        """Index of the face whose vertex walk matches ``vertices`` cyclically.

        Either orientation is accepted. Raises :class:`EmbeddingError` if no
        face, or more than one face, matches.
        """
        target = tuple(vertices)
        k = len(target)
        rotations = {target[i:] + target[:i] for i in range(k)}
        rev = target[::-1]
        rotations |= {rev[i:] + rev[:i] for i in range(k)}
        hits = [i for i in range(self.F) if len(self.faces[i]) == k and self.vertex_walk(i) in rotations]
        if len(hits) != 1:
            raise EmbeddingError(f"face {list(vertices)} found {len(hits)} times")
        return hits[0]


def trace_faces(rs: RotationSystem) -> FaceSet:
    """Trace every face boundary walk of ``rs``.

    Leaving vertex ``v`` along dart ``d`` in behavior ``b``, the walk crosses
    the edge, multiplies ``b`` by the edge signature, and continues with the
    successor (normal) or predecessor (alternate) of the arrival dart.  Each
    face is reported once, in the orientation first met when scanning states
    ``(0, normal), (1, normal), ...`` then the alternate states.
    """
    succ, pred = rs._succ_pred
    dsig = [s for s in rs.signature for _ in (0, 1)]
    raw = kernels.trace(succ, pred, dsig)
    faces = tuple(tuple((code >> 1, ALTERNATE if code & 1 else NORMAL) for code in walk) for walk in raw)
    return FaceSet(rs, faces)


def genus_of(faces: FaceSet) -> int:
    """Orientable genus ``(2 - V + E - F) / 2``; must be an integer."""
    twice = 2 - faces.V + faces.E - faces.F
    if twice % 2 or twice < 0:
        raise EmbeddingError(
            f"V={faces.V}, E={faces.E}, F={faces.F} gives non-integral genus {twice}/2"
        )
    return twice // 2


def is_orientable(rs: RotationSystem) -> bool:
    """True iff some set of vertex flips makes every signature +1."""
    n = rs.vertex_count
    side = [0] * n
    adj: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    for e, (u, v) in enumerate(rs.ends):
        if u == v:
            if rs.signature[e] == -1:
                return False
            continue
        adj[u].append((v, rs.signature[e]))
        adj[v].append((u, rs.signature[e]))
    for root in range(n):
        if side[root]:
            continue
        side[root] = 1
        stack = [root]
        while stack:
            u = stack.pop()
            for v, s in adj[u]:
                want = side[u] * s
                if side[v] == 0:
                    side[v] = want
                    stack.append(v)
                elif side[v] != want:
                    return False
    return True


def flip_vertex(rs: RotationSystem, v: int) -> RotationSystem:
    """Reverse the rotation at ``v`` and negate its non-loop edge signatures."""
    if not 0 <= v < rs.vertex_count:
        raise IndexError(f"vertex {v} out of range")
    rotation = list(rs.rotation)
    rotation[v] = tuple(reversed(rotation[v]))
    sig = list(rs.signature)
    for e, (a, b) in enumerate(rs.ends):
        if (a == v) != (b == v):
            sig[e] = -sig[e]
    return RotationSystem(rs.ends, tuple(rotation), tuple(sig))


def flip_vertices(rs: RotationSystem, vertices: Iterable[int]) -> RotationSystem:
    flips = set(vertices)
    rotation = tuple(tuple(reversed(r)) if v in flips else r for v, r in enumerate(rs.rotation))
    sig = tuple(-s if (a in flips) != (b in flips) else s for s, (a, b) in zip(rs.signature, rs.ends))
    return RotationSystem(rs.ends, rotation, sig)


def remove_edges_by_id(rs: RotationSystem, edge_ids: Iterable[int]) -> RotationSystem:
    """Drop edges by id, renumbering the survivors in order."""
    drop = set(edge_ids)
    keep = [e for e in range(rs.edge_count) if e not in drop]
    new_id = {e: i for i, e in enumerate(keep)}
    rotation = tuple(
        tuple(2 * new_id[d >> 1] + (d & 1) for d in rot if (d >> 1) not in drop) for rot in rs.rotation
    )
    ends = tuple(rs.ends[e] for e in keep)
    sig = tuple(rs.signature[e] for e in keep)
    return RotationSystem(ends, rotation, sig)


def delete_edges(rs: RotationSystem, edges: Iterable[Edge]) -> RotationSystem:
    """Delete edges named by ``(u, v)`` or ``(u, v, slot)`` labels.

    Repeating an unslotted ``(u, v)`` deletes successive parallel copies.
    Raises :class:`KeyError` naming the first label that is not present.
    """
    labels = rs.edge_labels()
    by_pair: dict[tuple[int, int], list[int]] = {}
    for e in sorted(range(rs.edge_count), key=labels.__getitem__):
        by_pair.setdefault(labels[e][:2], []).append(e)
    chosen: list[int] = []
    for edge in edges:
        u, v, *rest = edge
        key = (min(u, v), max(u, v))
        pool = [e for e in by_pair.get(key, []) if e not in chosen]
        if rest:
            pool = [e for e in pool if labels[e][2] == rest[0]]
        if not pool:
            raise KeyError(f"edge {tuple(edge)!r} not present")
        chosen.append(pool[0])
    if not chosen:
        return rs
    return remove_edges_by_id(rs, chosen)


# ---------------------------------------------------------------------------
# graph identity


@dataclass(frozen=True)
class GraphSpec:
    """Target graph: ``Complete``, ``Octahedral`` or ``CompleteMinusMatching``.

    For ``CompleteMinusMatching`` the missing edges may be given explicitly;
    otherwise any matching of size ``t`` is accepted.
    """

    kind: str
    n: int
    t: int = 0
    missing: frozenset | None = None

    def __post_init__(self):
        if self.kind not in ("Complete", "Octahedral", "CompleteMinusMatching"):
            raise ValueError(f"unknown graph kind {self.kind!r}")
        if self.kind == "Octahedral":
            if self.n % 2:
                raise ValueError("octahedral graph needs even n")
            object.__setattr__(self, "t", self.n // 2)
        if self.kind == "Complete":
            object.__setattr__(self, "t", 0)
        if not 0 <= self.t <= self.n // 2:
            raise ValueError(f"matching size {self.t} out of range for n={self.n}")
        if self.missing is not None:
            object.__setattr__(self, "missing", frozenset((min(a, b), max(a, b)) for a, b in self.missing))

    @classmethod
    def complete(cls, n: int) -> "GraphSpec":
        return cls("Complete", n)

    @classmethod
    def octahedral(cls, n: int) -> "GraphSpec":
        return cls("Octahedral", n)

    @classmethod
    def minus_matching(cls, n: int, t: int, missing=None) -> "GraphSpec":
        return cls("CompleteMinusMatching", n, t, None if missing is None else frozenset(missing))

    @property
    def edge_count(self) -> int:
        return self.n * (self.n - 1) // 2 - self.t

    def expected_missing(self) -> frozenset | None:
        if self.kind == "Complete":
            return frozenset()
        if self.kind == "Octahedral":
            h = self.n // 2
            return frozenset((i, i + h) for i in range(h))
        return self.missing

    def __str__(self):
        if self.kind == "Complete":
            return f"K_{self.n}"
        if self.kind == "Octahedral":
            return f"O_{self.n}"
        return f"K({self.n},{self.t})"


@dataclass
class IdentityReport:
    spec: GraphSpec
    simple: bool
    duplicates: list[tuple[int, int]]
    loops: list[int]
    missing: list[tuple[int, int]]
    extra: list[tuple[int, int]]
    problems: list[str]

    @property
    def passed(self) -> bool:
        return not self.problems


def check_graph_identity(rs: RotationSystem, spec: GraphSpec) -> IdentityReport:
    """Compare the underlying graph of ``rs`` against ``spec``."""
    problems = []
    if rs.vertex_count != spec.n:
        problems.append(f"vertex count {rs.vertex_count} != {spec.n}")
    counts = rs.edge_multiset()
    loops = sorted(u for (u, v) in counts if u == v)
    duplicates = sorted(p for p, c in counts.items() if p[0] != p[1] for _ in range(c - 1))
    if loops:
        problems.append(f"{len(loops)} self-loop(s)")
    if duplicates:
        problems.append(f"{len(duplicates)} duplicate edge(s): {duplicates}")
    present = {p for p in counts if p[0] != p[1]}
    everything = {(i, j) for i in range(spec.n) for j in range(i + 1, spec.n)}
    absent = everything - present
    extra = sorted(present - everything)
    expected = spec.expected_missing()
    if expected is not None:
        missing = sorted(absent - expected)
        extra = sorted(set(extra) | (present & expected))
        if missing:
            problems.append(f"{len(missing)} missing edge(s): {missing[:10]}")
        if extra:
            problems.append(f"{len(extra)} extra edge(s): {extra[:10]}")
    else:
        missing = []
        touched = [x for p in absent for x in p]
        if len(absent) != spec.t or len(set(touched)) != len(touched):
            problems.append(f"absent edges {sorted(absent)[:10]} are not a matching of size {spec.t}")
        if extra:
            problems.append(f"{len(extra)} extra edge(s)")
    return IdentityReport(spec, not loops and not duplicates, duplicates, loops, missing, extra, problems)


def absent_pairs(rs: RotationSystem) -> list[tuple[int, int]]:
    """Vertex pairs not joined by any edge."""
    present = set(rs.edge_multiset())
    n = rs.vertex_count
    return [(i, j) for i in range(n) for j in range(i + 1, n) if (i, j) not in present]


def walk_from(rs: RotationSystem, dart: int, behavior: int = NORMAL) -> list[tuple[int, int]]:
    """The single boundary walk starting by leaving along ``dart``."""
    succ, pred = rs._succ_pred
    start = (dart, behavior)
    walk = []
    d, b = start
    while True:
        walk.append((d, b))
        b = b * rs.signature[d >> 1]
        d ^= 1
        d = succ[d] if b == NORMAL else pred[d]
        if (d, b) == start:
            return walk
        if len(walk) > 4 * rs.edge_count:
            raise EmbeddingError("boundary walk did not close")
