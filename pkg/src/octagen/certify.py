"""Genus bounds, genus tables for K(n,t), and one-crossing drawing certificates."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

from octagen.rotsys import (
    EmbeddingError,
    FaceSet,
    GraphSpec,
    RotationSystem,
    check_graph_identity,
    remove_edges_by_id,
    trace_faces,
)


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def euler_lower_bound(v: int, e: int) -> int:
    """Smallest genus allowed by Euler's formula for a simple graph."""
    if v < 3:
        raise ValueError(f"need at least 3 vertices, got {v}")
    return max(0, _ceil_div(e - 3 * v + 6, 6))


def genus_formula(spec: GraphSpec) -> int:
    n = spec.n
    if n < 3:
        return 0
    if spec.kind == "Complete":
        return max(0, _ceil_div((n - 3) * (n - 4), 12))
    if spec.kind == "Octahedral":
        return max(0, _ceil_div((n - 2) * (n - 6), 12))
    return max(0, _ceil_div((n - 3) * (n - 4) - 2 * spec.t, 12))


def kainen_bound(v: int, e: int, g: int) -> int:
    """Crossings forced by Euler's formula when drawing on the genus-g surface."""
    if v < 3:
        raise ValueError(f"need at least 3 vertices, got {v}")
    return max(0, e - (3 * v - 6 + 6 * g))


# ---------------------------------------------------------------------------
# crossing certificates


@dataclass(frozen=True)
class CrossingCertificate:
    """Missing edge (u, v) drawn through faces f1 ∋ u and f2 ∋ v across edge (x, y)."""

    missing: tuple[int, int]
    crossed: tuple[int, int]
    faces: tuple[int, int]
    face_vertices: tuple[tuple[int, ...], tuple[int, ...]]

    def to_line(self) -> str:
        (u, v), (x, y), (f1, f2) = self.missing, self.crossed, self.faces
        return f"xing {u} {v} via {x} {y} faces {f1} {f2}"

    def validate(self, faces: FaceSet) -> list[str]:
        problems = []
        f1, f2 = self.faces
        u, v = self.missing
        x, y = self.crossed
        if f1 == f2:
            problems.append("both ends use the same face")
        for f, end, want in ((f1, u, self.face_vertices[0]), (f2, v, self.face_vertices[1])):
            if not 0 <= f < faces.F:
                problems.append(f"face {f} does not exist")
                continue
            walk = faces.vertex_walk(f)
            if walk != want:
                problems.append(f"face {f} is {walk}, certificate says {want}")
            if end not in walk or end in (x, y):
                problems.append(f"vertex {end} is not a free corner of face {f}")
            if not _has_side(walk, x, y):
                problems.append(f"edge ({x}, {y}) is not a side of face {f}")
        if self.missing in set(faces.system.edge_multiset()):
            problems.append(f"edge {self.missing} is present")
        return problems


def _has_side(walk: Sequence[int], x: int, y: int) -> bool:
    k = len(walk)
    return any({walk[i], walk[(i + 1) % k]} == {x, y} for i in range(k))


def parse_certificate_line(line: str, faces: FaceSet) -> CrossingCertificate:
    parts = line.split()
    if len(parts) != 9 or parts[0] != "xing" or parts[3] != "via" or parts[6] != "faces":
        raise ValueError(f"bad certificate line {line!r}")
    u, v, x, y, f1, f2 = (int(parts[i]) for i in (1, 2, 4, 5, 7, 8))
    return CrossingCertificate(
        (u, v), (x, y), (f1, f2), (faces.vertex_walk(f1), faces.vertex_walk(f2))
    )


@dataclass
class CertificateResult:
    certificates: list[CrossingCertificate]
    failures: list[tuple[int, int]]
    note: str = ""

    @property
    def complete(self) -> bool:
        return not self.failures

    def lines(self) -> list[str]:
        return [c.to_line() for c in self.certificates]


def _dart_faces(faces: FaceSet) -> dict[int, int]:
    out = {}
    for i, walk in enumerate(faces.faces):
        for d, _ in walk:
            out[d] = i
    return out


def certificate_candidates(
    emb: RotationSystem, missing: tuple[int, int], faces: FaceSet | None = None
) -> list[CrossingCertificate]:
    """Every way to draw ``missing`` with a single crossing, in face order."""
    if not emb.is_pure:
        raise EmbeddingError("certificates need a pure (orientable) rotation system")
    faces = faces or trace_faces(emb)
    owner = _dart_faces(faces)
    u, v = missing
    out = []
    for f1, walk in enumerate(faces.faces):
        if len(walk) != 3:
            continue
        verts = [emb.dart_vertex(d) for d, _ in walk]
        for k in range(3):
            if verts[k] != u:
                continue
            side = walk[(k + 1) % 3][0]
            f2 = owner[side ^ 1]
            if f2 == f1 or len(faces.faces[f2]) != 3:
                continue
            x, y = verts[(k + 1) % 3], verts[(k + 2) % 3]
            other = [emb.dart_vertex(d) for d, _ in faces.faces[f2]]
            third = [w for w in other if w not in (x, y)]
            if third == [v]:
                out.append(
                    CrossingCertificate((u, v), (x, y), (f1, f2), (faces.vertex_walk(f1), faces.vertex_walk(f2)))
                )
    return out


def one_crossing_certificates(
    emb: RotationSystem,
    missing: Iterable[tuple[int, int]],
    prefer: dict[tuple[int, int], tuple[int, int]] | None = None,
    node_limit: int = 200_000,
) -> CertificateResult:
    """Certificates for all ``missing`` edges using pairwise disjoint face pairs.

    Candidates are assigned by backtracking, most constrained edge first.
    ``prefer`` maps a missing edge to a crossed edge tried before the others.
    If no disjoint family exists (or the node limit is hit) the result lists
    the edges left uncertified.
    """
    faces = trace_faces(emb)
    missing = [tuple(m) for m in missing]
    present = set(emb.edge_multiset())
    for u, v in missing:
        if (min(u, v), max(u, v)) in present:
            raise ValueError(f"edge ({u}, {v}) is present in the embedding")
    prefer = {tuple(sorted(k)): tuple(sorted(v)) for k, v in (prefer or {}).items()}
    cands = {}
    for m in missing:
        cs = certificate_candidates(emb, m, faces)
        want = prefer.get(tuple(sorted(m)))
        if want is not None:
            cs.sort(key=lambda c: tuple(sorted(c.crossed)) != want)
        cands[m] = cs
    hopeless = [m for m in missing if not cands[m]]
    order = sorted((m for m in missing if cands[m]), key=lambda m: len(cands[m]))
    used: set[int] = set()
    chosen: dict[tuple[int, int], CrossingCertificate] = {}
    nodes = [0]

    def place(i):
        if i == len(order):
            return True
        nodes[0] += 1
        if nodes[0] > node_limit:
            return False
        m = order[i]
        for c in cands[m]:
            if c.faces[0] in used or c.faces[1] in used:
                continue
            used.update(c.faces)
            chosen[m] = c
            if place(i + 1):
                return True
            used.difference_update(c.faces)
            del chosen[m]
        return False

    if place(0):
        note = "no single-crossing route" if hopeless else ""
        return CertificateResult([chosen[m] for m in missing if m in chosen], hopeless, note)
    # fall back to a greedy partial family so the failure list is informative
    used.clear()
    chosen.clear()
    for m in order:
        for c in cands[m]:
            if not used & set(c.faces):
                used.update(c.faces)
                chosen[m] = c
                break
    failures = hopeless + [m for m in order if m not in chosen]
    note = "node limit reached" if nodes[0] > node_limit else "no disjoint family exists"
    return CertificateResult([chosen[m] for m in missing if m in chosen], failures, note)


# ---------------------------------------------------------------------------
# genus tables


@dataclass
class GenusTableRow:
    n: int
    t: int
    formula_genus: int
    witness_kind: str
    witness_genus: int
    source_t: int
    deleted: list[tuple[int, int]] = field(default_factory=list)
    problems: list[str] = field(default_factory=list)
    system: RotationSystem | None = field(default=None, repr=False)

    @property
    def verified(self) -> bool:
        return not self.problems and self.witness_genus == self.formula_genus


def _delete_keeping_genus(rs: RotationSystem, wanted: int, candidates: Iterable[tuple[int, int]]):
    """Delete ``wanted`` edges from ``candidates``, each separating two distinct faces."""
    deleted = []
    for u, v in candidates:
        if len(deleted) == wanted:
            break
        ids = [e for e, (a, b) in enumerate(rs.ends) if {a, b} == {u, v}]
        if len(ids) != 1:
            continue
        owner = _dart_faces(trace_faces(rs))
        e = ids[0]
        if owner[2 * e] == owner[2 * e + 1]:
            continue
        rs = remove_edges_by_id(rs, [e])
        deleted.append((min(u, v), max(u, v)))
    if len(deleted) != wanted:
        raise EmbeddingError(f"could only delete {len(deleted)} of {wanted} edges without changing genus")
    return rs, deleted


def _drop_duplicates(rs: RotationSystem, duplicates) -> RotationSystem:
    """Remove one copy of each duplicated pair, choosing a copy between distinct faces."""
    for u, v in duplicates:
        owner = _dart_faces(trace_faces(rs))
        ids = [e for e, (a, b) in enumerate(rs.ends) if {a, b} == {u, v} and owner[2 * e] != owner[2 * e + 1]]
        if not ids:
            raise EmbeddingError(f"every copy of ({u}, {v}) has one face on both sides")
        rs = remove_edges_by_id(rs, ids[-1:])
    return rs


def _diametric(n: int) -> list[tuple[int, int]]:
    return [(i, i + n // 2) for i in range(n // 2)]


def _row(n, t, kind, rs, source_t, deleted) -> GenusTableRow:
    spec = GraphSpec.complete(n) if t == 0 else GraphSpec.minus_matching(n, t)
    formula = genus_formula(spec)
    problems = list(check_graph_identity(rs, spec).problems)
    try:
        g = trace_faces(rs).genus
    except EmbeddingError as exc:
        g = -1
        problems.append(str(exc))
    return GenusTableRow(n, t, formula, kind, g, source_t, deleted, problems, rs)


def torus_k6() -> RotationSystem:
    """K6 on the torus: K7's triangular torus embedding minus vertex 6."""
    rows = [[(i + d) % 7 for d in (1, 3, 2, 6, 4, 5)] for i in range(7)]
    return RotationSystem.from_neighbors([[u for u in row if u != 6] for row in rows[:6]])


def _genus_table_6() -> list[GenusTableRow]:
    from octagen.currents import derive_index1
    from octagen.search import search_log_bruteforce

    rows = []
    k6 = torus_k6()
    rows.append(_row(6, 0, "triangulation-minus-vertex", k6, 0, []))
    for t in (1, 2):
        rs, deleted = _delete_keeping_genus(k6, t, _diametric(6))
        rows.append(_row(6, t, "deletion-from-torus-k6", rs, 0, deleted))
    rows.append(_row(6, 3, "triangulation", derive_index1(search_log_bruteforce(6)), 3, []))
    return rows


@lru_cache(maxsize=8)
def _pipeline(n: int):
    from octagen.surgery import augment_pipeline

    return augment_pipeline(n)


def genus_table(n: int, pipeline=None) -> list[GenusTableRow]:
    """One verified witness embedding per t = 0..n/2."""
    if n == 6:
        return _genus_table_6()
    if n % 6 or n < 18:
        raise ValueError(f"genus tables need n = 6 or n = 0 mod 6 with n >= 18, got {n}")
    res = pipeline or _pipeline(n)
    tri = res.triangulations()
    anchors = sorted(tri)
    rows = []
    for t in range(n // 2 + 1):
        if t in tri:
            rows.append(_row(n, t, "triangulation", tri[t], t, []))
            continue
        below = [k for k in anchors if k <= t]
        if below:
            k = below[-1]
            host = tri[k]
            present = set(host.edge_multiset())
            rs, deleted = _delete_keeping_genus(host, t - k, [p for p in _diametric(n) if p in present])
            rows.append(_row(n, t, "deletion-from-triangulation", rs, k, deleted))
            continue
        multi = res.multigraph()
        if multi is None:
            raise EmbeddingError(f"no witness available for n={n}, t={t}")
        rs = _drop_duplicates(multi.system, multi.duplicates)
        rs, deleted = _delete_keeping_genus(rs, t, _diametric(n))
        rows.append(_row(n, t, "duplicate-deletion", rs, -1, list(multi.duplicates) + deleted))
    return rows


# ---------------------------------------------------------------------------
# crossing numbers


@dataclass
class CrossingRow:
    g: int
    genus: int
    lower_bound: int
    upper_bound: int | None
    certificates: CertificateResult
    verdict: str

    @property
    def certified(self) -> bool:
        return self.verdict == "certified"


@dataclass
class CrossingReport:
    n: int
    rows: list[CrossingRow]
    expected: dict[int, int]

    @property
    def passed(self) -> bool:
        return all(r.certified and r.lower_bound == self.expected[r.g] for r in self.rows)


def expected_crossings(n: int, g: int) -> int:
    return 6 * g if n % 12 == 0 else 6 * g - 3


def _crossing_row(n: int, g: int, emb: RotationSystem, prefer=None) -> CrossingRow:
    genus = trace_faces(emb).genus
    total = n * (n - 1) // 2
    lower = kainen_bound(n, total, genus)
    present = set(emb.edge_multiset())
    missing = [(i, j) for i in range(n) for j in range(i + 1, n) if (i, j) not in present]
    certs = one_crossing_certificates(emb, missing, prefer)
    problems = [p for c in certs.certificates for p in c.validate(trace_faces(emb))]
    if problems or not certs.complete:
        verdict = "upper bound unestablished"
        upper = None
    else:
        upper = len(certs.certificates)
        verdict = "certified" if upper == lower else "bounds differ"
    return CrossingRow(g, genus, lower, upper, certs, verdict)


def crossing_theorem_check(n: int, pipeline=None) -> CrossingReport:
    """Crossing numbers of K_n on the surfaces of genus γ(K_n) - g, g = 1..⌈n/12⌉.

    The lower bound comes from Euler's formula; the upper bound from drawing
    every edge missing from the pipeline's triangulation at that genus with
    one crossing through its own pair of faces.  n = 12 uses the O_12 from
    exhaustive log search (one surface only).
    """
    if n == 12:
        from octagen.currents import derive_index1
        from octagen.search import search_log_bruteforce

        emb = derive_index1(search_log_bruteforce(12))
        row = _crossing_row(12, 1, emb, {(2, 8): (0, 11)})
        return CrossingReport(12, [row], {1: expected_crossings(12, 1)})
    if n % 6 or n < 18:
        raise ValueError(f"crossing check needs n = 12 or n = 0 mod 6 with n >= 18, got {n}")
    res = pipeline or _pipeline(n)
    top = genus_formula(GraphSpec.complete(n))
    by_genus = {st.genus: st for st in res.steps if st.triangular and not st.intermediate and not st.duplicates}
    prefer = {}
    for fl in res.flips:
        for original, diagonal in fl:
            prefer[diagonal] = original
    rows = []
    for g in range(1, math.ceil(n / 12) + 1):
        st = by_genus.get(top - g)
        if st is None:
            raise EmbeddingError(f"pipeline has no triangulation at genus {top - g}")
        rows.append(_crossing_row(n, g, st.system, prefer))
    return CrossingReport(n, rows, {g: expected_crossings(n, g) for g in range(1, math.ceil(n / 12) + 1)})
