"""Handle surgery turning triangular octahedral embeddings into complete ones.

Both handle patterns are built from two local rewrites on pure rotation
systems: :func:`add_tube` glues an antiprism tube between two triangular
faces, and :func:`flip_edge` swaps an edge for the other diagonal of its two
triangles.  Every pipeline step is re-traced from scratch before the next
one runs.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

from octagen.rotsys import (
    NORMAL,
    EmbeddingError,
    GraphSpec,
    RotationSystem,
    check_graph_identity,
    delete_edges,
    trace_faces,
)

log = logging.getLogger(__name__)


class HandleError(EmbeddingError):
    """A handle could not be attached as specified."""


# ---------------------------------------------------------------------------
# local rewrites


def _triangle_from(rs: RotationSystem, d: int) -> tuple[int, int, int]:
    """Darts of the face left along ``d``; must be a triangle."""
    d1 = rs.succ(d ^ 1)
    d2 = rs.succ(d1 ^ 1)
    if rs.succ(d2 ^ 1) != d:
        raise HandleError(f"dart {d} does not bound a triangle")
    return d, d1, d2


def _insert_after(rotation: list[list[int]], v: int, anchor: int, darts: Sequence[int]) -> None:
    row = rotation[v]
    k = row.index(anchor)
    row[k + 1 : k + 1] = list(darts)


def flip_edge(rs: RotationSystem, e: int) -> tuple[RotationSystem, tuple[int, int]]:
    """Replace edge ``e`` by the other diagonal of its two triangles.

    The edge keeps its id.  Returns the new system and the new endpoints.
    """
    if not rs.is_pure:
        raise HandleError("edge flips need a pure rotation system")
    d = 2 * e
    t1 = _triangle_from(rs, d)
    t2 = _triangle_from(rs, d ^ 1)
    if set(t1) & set(t2):
        raise HandleError(f"edge {e} has the same triangle on both sides")
    w = rs.dart_head(t1[1])
    z = rs.dart_head(t2[1])
    if w == z:
        raise HandleError(f"flipping edge {e} would create a loop at {w}")
    rotation = [list(r) for r in rs.rotation]
    u, v = rs.ends[e]
    rotation[u].remove(d)
    rotation[v].remove(d ^ 1)
    _insert_after(rotation, w, t1[1] ^ 1, [d])
    _insert_after(rotation, z, t2[1] ^ 1, [d ^ 1])
    ends = list(rs.ends)
    ends[e] = (w, z)
    return RotationSystem(tuple(ends), tuple(map(tuple, rotation)), rs.signature), (w, z)


def add_tube(
    rs: RotationSystem,
    face1: Sequence[int],
    face2: Sequence[int],
    pairs: Sequence[tuple[int, int]],
) -> tuple[RotationSystem, dict[tuple[int, int], int]]:
    """Attach a handle between two triangular faces.

    The six edges in ``pairs`` (each joining a vertex of ``face1`` to one of
    ``face2``) triangulate the tube.  They must form the antiprism that the
    faces' traced orientations allow; otherwise :class:`HandleError`.
    Returns the new system and a map from each requested pair to its new
    edge id.
    """
    if not rs.is_pure:
        raise HandleError("handles need a pure rotation system")
    faces = trace_faces(rs)
    f1 = faces.faces[faces.find_face(face1)]
    f2 = faces.faces[faces.find_face(face2)]
    if len(f1) != 3 or len(f2) != 3 or any(b != NORMAL for _, b in f1 + f2):
        raise HandleError("handle faces must be normally traced triangles")
    xd = [d for d, _ in f1]
    yd = [d for d, _ in f2]
    xs = [rs.dart_vertex(d) for d in xd]
    ys = [rs.dart_vertex(d) for d in yd]
    if set(xs) & set(ys):
        raise HandleError(f"faces {xs} and {ys} share a vertex")
    want = sorted(tuple(p) for p in pairs)
    offset = None
    for j0 in range(3):
        got = sorted(
            [(xs[k], ys[(j0 - k) % 3]) for k in range(3)] + [(xs[k], ys[(j0 - k + 1) % 3]) for k in range(3)]
        )
        if got == want:
            offset = j0
            break
    if offset is None:
        raise HandleError(f"pairs {want} do not triangulate a tube between {xs} and {ys}")

    def f(k):
        return (offset - k) % 3

    ends = list(rs.ends)
    new_a, new_b = [], []
    for k in range(3):
        new_a.append(len(ends))
        ends.append((xs[k], ys[f(k)]))
        new_b.append(len(ends))
        ends.append((xs[k], ys[(f(k) + 1) % 3]))
    rotation = [list(r) for r in rs.rotation]
    for k in range(3):
        arrival = xd[(k - 1) % 3] ^ 1
        _insert_after(rotation, xs[k], arrival, [2 * new_b[k], 2 * new_a[k]])
    g = {f(k): k for k in range(3)}
    for j in range(3):
        arrival = yd[(j - 1) % 3] ^ 1
        _insert_after(rotation, ys[j], arrival, [2 * new_b[g[(j - 1) % 3]] + 1, 2 * new_a[g[j]] + 1])
    out = RotationSystem(tuple(ends), tuple(map(tuple, rotation)), (1,) * len(ends))
    ids = {}
    for k in range(3):
        ids[(xs[k], ys[f(k)])] = new_a[k]
        ids[(xs[k], ys[(f(k) + 1) % 3])] = new_b[k]
    return out, {tuple(p): ids[tuple(p)] for p in pairs}


def _edge_id(rs: RotationSystem, u: int, v: int) -> int:
    hits = [e for e, (a, b) in enumerate(rs.ends) if {a, b} == {u, v}]
    if len(hits) != 1:
        raise HandleError(f"expected exactly one edge ({u}, {v}), found {len(hits)}")
    return hits[0]


def _pair(u: int, v: int) -> tuple[int, int]:
    return (min(u, v), max(u, v))


# ---------------------------------------------------------------------------
# the two handle patterns


@dataclass(frozen=True)
class HandleSpec6:
    """Handle ``i`` for n = 12s+6, connecting [0,4r,2r] and [r,3r,5r] shifted by 2i."""

    s: int
    i: int
    q: int | None = None
    allow_duplicates: bool | None = None

    def __post_init__(self):
        if self.s < 1 or not 0 <= self.i <= self.s:
            raise ValueError(f"need s >= 1 and 0 <= i <= s, got s={self.s}, i={self.i}")
        if self.q is None:
            object.__setattr__(self, "q", 2 * self.r + 1 if self.s % 2 else 1)
        if self.allow_duplicates is None:
            object.__setattr__(self, "allow_duplicates", self.i == self.s)
        if self.q % self.r != 1 % self.r:
            raise ValueError(f"diagonal base q={self.q} must be 1 mod r={self.r}")

    @property
    def n(self) -> int:
        return 12 * self.s + 6

    @property
    def r(self) -> int:
        return 2 * self.s + 1

    def added_edges(self) -> set[tuple[int, int]]:
        """The six matching edges (j, j+3r) + 2i this handle contributes."""
        n, r, sh = self.n, self.r, 2 * self.i
        return {_pair((j + sh) % n, (j + 3 * r + sh) % n) for j in (0, 1, 2 * r, 2 * r + 1, 4 * r, 4 * r + 1)}


def case6_family_q(s: int) -> int:
    r = 2 * s + 1
    return 2 * r + 1 if s % 2 else 1


def case0_family_abc(s: int) -> tuple[int, int, int] | None:
    """Handle values (a, b, c) for n = 12s, or None when s = 1."""
    if s == 2:
        return (1, 2, 19)
    if s >= 3 and s % 2:
        return (2 * s - 1, 8 * s + 1, 3 * s - 1)
    if s >= 4:
        return (12 * s - 3, 10 * s, 8 * s - 1)
    return None


@dataclass(frozen=True)
class HandleSpec0:
    """Handle ``i`` for n = 12s, connecting [0,4r,2r] and [a,a+2r,a+4r] shifted by 2i."""

    s: int
    i: int
    a: int
    b: int
    c: int

    def __post_init__(self):
        if self.s < 1 or not 0 <= self.i < max(self.s, 1):
            raise ValueError(f"need 0 <= i < s, got s={self.s}, i={self.i}")
        if self.a % 2 == 0:
            raise ValueError(f"anchor a={self.a} must be odd")
        if (self.b + self.c) % 2 == 0:
            raise ValueError(f"b={self.b} and c={self.c} must have opposite parity")

    @classmethod
    def for_family(cls, s: int, i: int) -> "HandleSpec0":
        abc = case0_family_abc(s)
        if abc is None:
            raise ValueError(f"no handle family for s={s}")
        return cls(s, i, *abc)

    @property
    def n(self) -> int:
        return 12 * self.s

    @property
    def r(self) -> int:
        return 2 * self.s

    def added_edges(self) -> set[tuple[int, int]]:
        n, r, sh = self.n, self.r, 2 * self.i
        out = set()
        for base in (self.b, self.c):
            for j in (0, 2 * r, 4 * r):
                out.add(_pair((base + j + sh) % n, (base + 3 * r + j + sh) % n))
        return out


def _relocate_and_flip(
    emb: RotationSystem,
    face1: Sequence[int],
    face2: Sequence[int],
    pairs: Sequence[tuple[int, int]],
    relocated: Sequence[tuple[int, int]],
    allow_duplicates: bool,
    expected_diagonals: set[tuple[int, int]],
) -> tuple[RotationSystem, list[tuple[tuple[int, int], tuple[int, int]]]]:
    n = emb.vertex_count
    originals = [_edge_id(emb, u, v) for u, v in relocated]
    present = set(emb.edge_multiset())
    for u, v in pairs:
        if _pair(u, v) not in set(map(lambda p: _pair(*p), relocated)) and _pair(u, v) in present and not allow_duplicates:
            raise HandleError(f"handle edge ({u}, {v}) already present")
    rs, _ = add_tube(emb, face1, face2, pairs)
    flips = []
    for e, (u, v) in zip(originals, relocated):
        rs, (w, z) = flip_edge(rs, e)
        if (w - z) % n != n // 2:
            raise HandleError(f"flipping ({u}, {v}) gives ({w}, {z}), not a matching edge")
        if not allow_duplicates and sum(1 for p in rs.ends if _pair(*p) == _pair(w, z)) > 1:
            raise HandleError(f"diagonal ({w}, {z}) duplicates an existing edge")
        flips.append(((u, v), _pair(w, z)))
    got = {d for _, d in flips}
    if got != expected_diagonals:
        raise HandleError(f"diagonals {sorted(got)} differ from expected {sorted(expected_diagonals)}")
    return rs, flips


def add_handle_case6(emb: RotationSystem, spec: HandleSpec6) -> RotationSystem:
    """Add handle ``spec.i`` of the n = 12s+6 construction."""
    rs, _ = add_handle_case6_detail(emb, spec)
    return rs


def add_handle_case6_detail(emb: RotationSystem, spec: HandleSpec6):
    n, r, sh = spec.n, spec.r, 2 * spec.i
    if emb.vertex_count != n:
        raise HandleError(f"embedding has {emb.vertex_count} vertices, handle expects {n}")

    def S(*vs):
        return tuple((v + sh) % n for v in vs)

    x0, x1, x2 = S(0, 4 * r, 2 * r)
    y0, y1, y2 = S(r, 3 * r, 5 * r)
    pairs = [(x0, y1), (x0, y0), (x1, y2), (x1, y0), (x2, y1), (x2, y2)]
    relocated = [(x0, y0), (x2, y1), (x1, y2)]
    q = spec.q
    diagonals = {_pair(*S(q, q + 3 * r)), _pair(*S(q + 2 * r, q + 5 * r)), _pair(*S(q + 4 * r, q + r))}
    return _relocate_and_flip(emb, (x0, x1, x2), (y0, y1, y2), pairs, relocated, spec.allow_duplicates, diagonals)


def add_handle_case0(emb: RotationSystem, spec: HandleSpec0) -> RotationSystem:
    """Add handle ``spec.i`` of the n = 12s construction."""
    rs, _ = add_handle_case0_detail(emb, spec)
    return rs


def add_handle_case0_detail(emb: RotationSystem, spec: HandleSpec0):
    n, r, sh, a = spec.n, spec.r, 2 * spec.i, spec.a
    if emb.vertex_count != n:
        raise HandleError(f"embedding has {emb.vertex_count} vertices, handle expects {n}")

    def S(*vs):
        return tuple((v + sh) % n for v in vs)

    face1 = S(0, 4 * r, 2 * r)
    face2 = S(a, a + 2 * r, a + 4 * r)
    relocated = []
    for j in (0, 2 * r, 4 * r):
        relocated.append(S(j, a + j))
        relocated.append(S(j, a + 2 * r + j))
    return _relocate_and_flip(emb, face1, face2, relocated, relocated, False, spec.added_edges())


# ---------------------------------------------------------------------------
# pipeline


def gamma_complete(n: int) -> int:
    return math.ceil((n - 3) * (n - 4) / 12)


def gamma_octahedral(n: int) -> int:
    return math.ceil((n - 2) * (n - 6) / 12)


def gamma_minus_matching(n: int, t: int) -> int:
    return math.ceil(((n - 3) * (n - 4) - 2 * t) / 12)


@dataclass
class PipelineStep:
    name: str
    system: RotationSystem = field(repr=False)
    spec: GraphSpec
    V: int
    E: int
    F: int
    genus: int
    triangular: bool
    expected_genus: int
    problems: list[str]
    duplicates: list[tuple[int, int]] = field(default_factory=list)
    intermediate: bool = False  # the multigraph stage with duplicate edges

    @property
    def passed(self) -> bool:
        return not self.problems


@dataclass
class PipelineResult:
    n: int
    steps: list[PipelineStep]
    source: str
    log: object = None
    handle_specs: list = field(default_factory=list)
    flips: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(st.passed for st in self.steps)

    def genus_chain(self) -> list[int]:
        return [st.genus for st in self.steps if not st.intermediate]

    def spec_chain(self) -> list[GraphSpec]:
        return [st.spec for st in self.steps if not st.intermediate]

    @property
    def final(self) -> PipelineStep:
        return self.steps[-1]

    def triangulations(self) -> dict[int, RotationSystem]:
        """Triangular simple embeddings keyed by matching size t."""
        return {
            st.spec.t: st.system for st in self.steps if st.triangular and not st.duplicates and not st.intermediate
        }

    def multigraph(self) -> PipelineStep | None:
        return next((st for st in self.steps if st.intermediate), None)


class PipelineError(RuntimeError):
    def __init__(self, message: str, steps: list[PipelineStep] | None = None):
        super().__init__(message)
        self.steps = steps or []


def _record(name, rs, spec, expected_genus, *, triangular=True, duplicates=None, intermediate=False):
    faces = trace_faces(rs)
    problems = []
    try:
        genus = faces.genus
    except EmbeddingError as exc:
        genus = -1
        problems.append(str(exc))
    if triangular and not faces.is_triangular:
        problems.append(f"not triangular: {dict(faces.length_multiset())}")
    if genus != expected_genus:
        problems.append(f"genus {genus} != expected {expected_genus}")
    ident = check_graph_identity(rs, spec)
    dups = ident.duplicates
    if duplicates is not None:
        if sorted(dups) != sorted(duplicates):
            problems.append(f"duplicates {dups} != expected {sorted(duplicates)}")
        problems.extend(p for p in ident.problems if "duplicate" not in p)
    else:
        problems.extend(ident.problems)
    return PipelineStep(
        name, rs, spec, faces.V, faces.E, faces.F, genus, faces.is_triangular, expected_genus, problems, dups, intermediate
    )


def _check(step: PipelineStep, steps: list[PipelineStep]) -> None:
    steps.append(step)
    log.debug("step %s: V=%d E=%d F=%d genus=%d %s", step.name, step.V, step.E, step.F, step.genus, step.problems)
    if not step.passed:
        raise PipelineError(f"step '{step.name}' failed: {'; '.join(step.problems)}", steps)


def run_pipeline_case6(base: RotationSystem, n: int) -> PipelineResult:
    s = (n - 6) // 12
    r = 2 * s + 1
    steps: list[PipelineStep] = []
    specs = []
    flips = []
    _check(_record(f"O_{n}", base, GraphSpec.octahedral(n), gamma_octahedral(n)), steps)
    rs = base
    missing = {_pair(i, i + n // 2) for i in range(n // 2)}
    for i in range(s):
        spec = HandleSpec6(s, i)
        try:
            rs, fl = add_handle_case6_detail(rs, spec)
        except HandleError as exc:
            raise PipelineError(f"handle i={i}: {exc}", steps) from exc
        specs.append(spec)
        flips.append(fl)
        missing -= spec.added_edges()
        t = len(missing)
        gs = GraphSpec.minus_matching(n, t, missing)
        _check(_record(f"handle {i}: K({n},{t})", rs, gs, gamma_minus_matching(n, t)), steps)
    spec = HandleSpec6(s, s)
    try:
        rs, fl = add_handle_case6_detail(rs, spec)
    except HandleError as exc:
        raise PipelineError(f"final handle: {exc}", steps) from exc
    specs.append(spec)
    flips.append(fl)
    dups = [_pair(0, 3 * r), _pair(r, 4 * r), _pair(2 * r, 5 * r)]
    _check(
        _record(
            f"handle {s}: K_{n} + 3 duplicates",
            rs,
            GraphSpec.complete(n),
            gamma_complete(n),
            duplicates=dups,
            intermediate=True,
        ),
        steps,
    )
    simple = delete_edges(rs, dups)
    _check(_record(f"K_{n}", simple, GraphSpec.complete(n), gamma_complete(n), triangular=False), steps)
    return PipelineResult(n, steps, "", handle_specs=specs, flips=flips)


def run_pipeline_case0(base: RotationSystem, n: int, abc: tuple[int, int, int] | None = None) -> PipelineResult:
    s = n // 12
    abc = abc or case0_family_abc(s)
    if abc is None:
        raise PipelineError(f"no handle values for n={n}")
    steps: list[PipelineStep] = []
    specs = []
    flips = []
    _check(_record(f"O_{n}", base, GraphSpec.octahedral(n), gamma_octahedral(n)), steps)
    rs = base
    missing = {_pair(i, i + n // 2) for i in range(n // 2)}
    for i in range(s):
        spec = HandleSpec0(s, i, *abc)
        try:
            rs, fl = add_handle_case0_detail(rs, spec)
        except HandleError as exc:
            raise PipelineError(f"handle i={i}: {exc}", steps) from exc
        specs.append(spec)
        flips.append(fl)
        missing -= spec.added_edges()
        t = len(missing)
        gs = GraphSpec.complete(n) if t == 0 else GraphSpec.minus_matching(n, t, missing)
        _check(_record(f"handle {i}: {gs}", rs, gs, gamma_minus_matching(n, t)), steps)
    return PipelineResult(n, steps, "", handle_specs=specs, flips=flips)


def base_embedding(n: int, budget: int | None = None):
    """Triangular O_n to start from: builtin for n = 18, 24, else searched.

    Returns ``(system, source, log, abc)``; ``abc`` is only set for n = 24.
    """
    from octagen import currents

    if n == 18:
        lg = currents.builtin_logs("z18")[0]
        return currents.derive_index1(lg), "builtin:z18", lg, None
    if n == 24:
        l0, l1 = currents.builtin_logs("z24-index2")
        return currents.derive_index2(l0, l1), "builtin:z24-index2", (l0, l1), (1, 2, 19)
    from octagen import search

    cg = search.search_cascade(n, budget=budget, anchored=True, fallback=False)
    if cg is None:
        raise PipelineError(f"no anchored cascade found for n={n} within budget")
    lg = currents.extract_log(cg)
    return currents.derive_index1(lg), f"search:{n}", lg, None


def augment_pipeline(n: int, budget: int | None = None, base=None) -> PipelineResult:
    """Certified chain from O_n to K_n for n = 0 mod 6, n >= 18.

    ``base`` may be a tuple as returned by :func:`base_embedding`.  When the
    base comes from search, later candidates are tried if an earlier one
    fails a handle step.
    """
    if n % 6 or n < 18:
        raise ValueError(f"n must be a multiple of 6 and at least 18, got {n}")
    if base is not None:
        return _run(n, *base)
    if n in (18, 24):
        return _run(n, *base_embedding(n))
    from octagen import currents, search

    errors = []
    for cg in search.iter_cascades(n, budget=budget, anchored=True, fallback=False):
        lg = currents.extract_log(cg)
        rs = currents.derive_index1(lg)
        try:
            return _run(n, rs, f"search:{n}", lg, None)
        except PipelineError as exc:
            errors.append(str(exc))
            log.info("candidate cascade rejected: %s", exc)
    raise PipelineError(f"no searched cascade for n={n} completed the pipeline ({len(errors)} tried)")


def _run(n, rs, source, lg, abc) -> PipelineResult:
    if n % 12 == 6:
        res = run_pipeline_case6(rs, n)
    else:
        res = run_pipeline_case0(rs, n, abc)
    res.source = source
    res.log = lg
    return res
