import pytest

from octagen.certify import (
    CrossingCertificate,
    certificate_candidates,
    crossing_theorem_check,
    euler_lower_bound,
    expected_crossings,
    genus_formula,
    genus_table,
    kainen_bound,
    one_crossing_certificates,
    parse_certificate_line,
    torus_k6,
)
from octagen.currents import builtin_logs, derive_index1
from octagen.rotsys import GraphSpec, RotationSystem, delete_edges, trace_faces
from octagen.search import search_log_bruteforce


@pytest.fixture(scope="module")
def o18():
    return derive_index1(builtin_logs("z18")[0])


@pytest.mark.parametrize("v,e,g", [(18, 153, 18), (4, 6, 0), (18, 144, 16), (3, 3, 0), (7, 21, 1)])
def test_euler_lower_bound(v, e, g):
    assert euler_lower_bound(v, e) == g


def test_euler_lower_bound_needs_three_vertices():
    with pytest.raises(ValueError):
        euler_lower_bound(2, 1)
    with pytest.raises(ValueError):
        kainen_bound(2, 1, 0)


def test_genus_formula_examples():
    assert genus_formula(GraphSpec.complete(6)) == 1
    assert genus_formula(GraphSpec.complete(7)) == 1
    assert genus_formula(GraphSpec.octahedral(18)) == 16
    assert genus_formula(GraphSpec.minus_matching(18, 3)) == 17
    assert genus_formula(GraphSpec.octahedral(6)) == 0


def test_genus_formula_matches_euler_bound_everywhere():
    for n in range(6, 61, 6):
        for t in range(n // 2 + 1):
            spec = GraphSpec.complete(n) if t == 0 else GraphSpec.minus_matching(n, t)
            assert genus_formula(spec) == euler_lower_bound(n, n * (n - 1) // 2 - t), (n, t)
        assert genus_formula(GraphSpec.octahedral(n)) == genus_formula(GraphSpec.minus_matching(n, n // 2))


def test_kainen_bound_examples():
    assert kainen_bound(12, 66, 5) == 6
    assert kainen_bound(18, 153, 16) == 9
    assert kainen_bound(18, 153, 18) == 0
    assert kainen_bound(18, 144, 16) == 0


def test_o18_missing_edge_crosses_the_flipped_edge(o18):
    cands = certificate_candidates(o18, (7, 16))
    assert any(set(c.crossed) == {0, 3} for c in cands)
    res = one_crossing_certificates(o18, [(7, 16)], prefer={(7, 16): (0, 3)})
    (cert,) = res.certificates
    assert set(cert.crossed) == {0, 3}
    assert cert.validate(trace_faces(o18)) == []


def test_o18_full_certificate_family_is_disjoint(o18):
    missing = [(i, i + 9) for i in range(9)]
    res = one_crossing_certificates(o18, missing)
    assert res.complete
    used = [f for c in res.certificates for f in c.faces]
    assert len(used) == len(set(used)) == 18
    assert len(res.certificates) == kainen_bound(18, 153, 16)


def test_o12_certificate_through_0_11():
    lg = search_log_bruteforce(12)
    emb = derive_index1(lg)
    res = one_crossing_certificates(emb, [(i, i + 6) for i in range(6)], prefer={(2, 8): (0, 11)})
    assert res.complete
    by_missing = {c.missing: c for c in res.certificates}
    assert set(by_missing[(2, 8)].crossed) == {0, 11}
    assert len(res.certificates) == kainen_bound(12, 66, 5) == 6


def test_planar_octahedron_three_certificates():
    emb = derive_index1(search_log_bruteforce(6))
    faces = trace_faces(emb)
    assert faces.genus == 0 and faces.F == 8
    res = one_crossing_certificates(emb, [(0, 3), (1, 4), (2, 5)])
    assert res.complete and len(res.certificates) == 3
    assert len({f for c in res.certificates for f in c.faces}) == 6
    assert kainen_bound(6, 15, 0) == 3


def test_present_edge_rejected(o18):
    with pytest.raises(ValueError):
        one_crossing_certificates(o18, [(0, 1)])


def test_failure_is_reported_not_forced():
    # K7 on the torus minus three edges at vertex 0: (0, 1) loses its only route
    k7 = RotationSystem.from_neighbors([[(i + d) % 7 for d in (1, 3, 2, 6, 4, 5)] for i in range(7)])
    emb = delete_edges(k7, [(0, 1), (0, 2), (0, 3)])
    res = one_crossing_certificates(emb, [(0, 1), (0, 2), (0, 3)])
    assert not res.complete
    assert res.failures == [(0, 1)]
    assert len(res.certificates) == 2 and res.note


def test_certificate_line_round_trip(o18):
    res = one_crossing_certificates(o18, [(7, 16)])
    faces = trace_faces(o18)
    line = res.lines()[0]
    back = parse_certificate_line(line, faces)
    assert back == res.certificates[0]
    assert back.validate(faces) == []
    with pytest.raises(ValueError):
        parse_certificate_line("xing 1 2 3", faces)


def test_tampered_certificate_fails_validation(o18):
    cert = one_crossing_certificates(o18, [(7, 16)]).certificates[0]
    faces = trace_faces(o18)
    bad = CrossingCertificate(cert.missing, cert.crossed, (cert.faces[0], cert.faces[0]), cert.face_vertices)
    assert bad.validate(faces)
    wrong_edge = CrossingCertificate(cert.missing, (1, 2), cert.faces, cert.face_vertices)
    assert wrong_edge.validate(faces)


def test_torus_k6():
    faces = trace_faces(torus_k6())
    assert (faces.V, faces.E, faces.genus) == (6, 15, 1)


@pytest.mark.parametrize("n", [6, 18, 24])
def test_genus_table_rows_verified(n):
    rows = genus_table(n)
    assert [r.t for r in rows] == list(range(n // 2 + 1))
    for r in rows:
        assert r.verified, (r.t, r.problems)
        assert r.witness_genus == r.formula_genus
        assert trace_faces(r.system).genus == r.formula_genus


def test_genus_table_18_values():
    rows = genus_table(18)
    assert [r.formula_genus for r in rows] == [18, 18, 18, 17, 17, 17, 17, 17, 17, 16]
    assert rows[3].witness_kind == "triangulation"
    assert {rows[t].witness_kind for t in (0, 1, 2)} == {"duplicate-deletion"}
    assert rows[9].witness_kind == "triangulation"


def test_genus_table_24_octahedral_row():
    rows = genus_table(24)
    assert rows[12].formula_genus == 33 and rows[12].witness_kind == "triangulation"


def test_genus_table_bad_n():
    for n in (12, 20):
        with pytest.raises(ValueError):
            genus_table(n)


@pytest.mark.parametrize(
    "n,values",
    [(12, {1: 6}), (18, {1: 3, 2: 9}), (24, {1: 6, 2: 12}), (30, {1: 3, 2: 9, 3: 15})],
)
def test_crossing_numbers_certified(n, values):
    rep = crossing_theorem_check(n)
    assert rep.passed
    assert {r.g: r.lower_bound for r in rep.rows} == values
    assert {r.g: r.upper_bound for r in rep.rows} == values
    for r in rep.rows:
        faces = [f for c in r.certificates.certificates for f in c.faces]
        assert len(faces) == len(set(faces))


def test_expected_crossings():
    assert [expected_crossings(18, g) for g in (1, 2)] == [3, 9]
    assert [expected_crossings(24, g) for g in (1, 2)] == [6, 12]
