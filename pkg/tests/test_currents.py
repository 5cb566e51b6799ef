import pytest

from octagen.currents import (
    CurrentGraph,
    Log,
    LogError,
    NotTriangularError,
    builtin_cascade,
    builtin_logs,
    cascade_from_log,
    derive_index1,
    derive_index1_twisted,
    derive_index2,
    extract_log,
    format_logs,
    is_octahedral_triangulation,
    load_logs,
    parse_cascade,
    parse_logs,
    shift_faces,
    verify_cascade,
)
from octagen.rotsys import GraphSpec, RotationSystem, StructureError, check_graph_identity, is_orientable, trace_faces

Z18 = (6, 12, 2, 5, 4, 15, 13, 17, 7, 3, 16, 10, 11, 14, 1, 8)


def test_builtin_z18_log_matches_known_sequence():
    (lg,) = builtin_logs("z18")
    assert lg == Log(18, Z18)
    assert lg.covers_octahedral()


def test_z18_derivation_counts():
    rs = derive_index1(Log(18, Z18))
    faces = trace_faces(rs)
    assert (faces.V, faces.E, faces.F, faces.genus) == (18, 144, 96, 16)
    assert faces.is_triangular
    assert rs.is_pure
    assert check_graph_identity(rs, GraphSpec.octahedral(18)).passed


def test_derivation_before_flips_is_orientable_with_twists():
    raw = derive_index1_twisted(Log(18, Z18))
    assert not raw.is_pure
    assert is_orientable(raw)
    assert trace_faces(raw).length_multiset() == trace_faces(derive_index1(Log(18, Z18))).length_multiset()


def test_even_shift_maps_faces_to_faces():
    faces = trace_faces(derive_index1(Log(18, Z18)))
    walks = [faces.vertex_walk(i) for i in range(faces.F)]
    base = {frozenset(w) for w in walks}
    assert shift_faces(walks, 2, 18) == base
    assert shift_faces(walks, 1, 18) == base  # as vertex sets, odd shifts too


def test_z18_pendant_face():
    faces = trace_faces(derive_index1(Log(18, Z18)))
    faces.find_face((0, 12, 6))


def test_index2_z24():
    l0, l1 = builtin_logs("z24-index2")
    rs = derive_index2(l0, l1)
    faces = trace_faces(rs)
    assert (faces.V, faces.E, faces.F, faces.genus) == (24, 264, 176, 33)
    assert is_octahedral_triangulation(rs)


def test_index2_rejects_non_triangular_pair():
    l0, l1 = builtin_logs("z24-index2")
    bad = list(l1.entries)
    bad[0], bad[1] = bad[1], bad[0]
    with pytest.raises(NotTriangularError) as info:
        derive_index2(l0, Log(24, bad))
    assert info.value.faces is not None


def test_perturbed_log_is_not_triangular():
    bad = list(Z18)
    bad[2], bad[3] = bad[3], bad[2]
    assert not is_octahedral_triangulation(derive_index1(Log(18, bad)))


@pytest.mark.parametrize("entries", [(0, 1, 2), (1, 2, 9) + Z18[3:], Z18[:-1], Z18[:-1] + (6,)])
def test_derive_rejects_bad_logs(entries):
    with pytest.raises(LogError):
        derive_index1(Log(18, entries))


def test_fixture_cascade_passes_all_properties():
    cg = builtin_cascade("z18")
    rep = verify_cascade(cg)
    assert rep.passed, rep.failed()
    assert rep.circuit_count == 1
    pendant = [v for v in range(cg.embedding.vertex_count) if cg.embedding.degree(v) == 1]
    assert len(pendant) == 1
    assert rep.excess[pendant[0]] in (6, 12)
    assert set(rep.log.entries) == set(Z18)


def test_fixture_log_reads_back():
    assert extract_log(builtin_cascade("z18")) == Log(18, Z18)


def test_rebuild_from_log_round_trips():
    cg = cascade_from_log(Log(18, Z18))
    assert cg == builtin_cascade("z18")
    assert parse_cascade(cg.to_text()) == cg
    assert extract_log(cg) == Log(18, Z18)


def test_cascade_from_index2_row_fails_cleanly():
    l0, _ = builtin_logs("z24-index2")
    with pytest.raises(LogError):
        cascade_from_log(l0)


def test_broken_current_fails_kirchhoff():
    cg = builtin_cascade("z18")
    currents = list(cg.currents)
    currents[1] = (currents[1] + 2) % 18
    rep = verify_cascade(CurrentGraph(cg.embedding, 18, currents))
    assert not rep.properties["C3"]


def test_degree_two_vertex_fails_c1():
    rs = RotationSystem(((0, 1), (1, 2)), ((0,), (1, 2), (3,)), ())
    rep = verify_cascade(CurrentGraph(rs, 6, (2, 2)))
    assert not rep.properties["C1"]
    assert not rep.passed


def test_twisted_flip_of_odd_current_breaks_c6():
    cg = builtin_cascade("z18")
    rs = cg.embedding
    e = next(e for e, c in enumerate(cg.currents) if c % 2 == 0 and rs.signature[e] == 1)
    sig = list(rs.signature)
    sig[e] = -1
    rep = verify_cascade(CurrentGraph(RotationSystem(rs.ends, rs.rotation, tuple(sig)), 18, cg.currents))
    assert not rep.passed


def test_zero_current_rejected():
    rs = RotationSystem(((0, 1),), ((0,), (1,)), ())
    with pytest.raises(StructureError):
        CurrentGraph(rs, 6, (0,))


@pytest.mark.parametrize(
    "text",
    [
        "",
        "cascade 1\n",
        "cascade 1\nmod 18\nv 0: 0+\n",
        "cascade 1\nmod 18\nv 0: 0+\nv 1: 0-\ne 0 0 1 0 1\n",
        "cascade 1\nmod 18\nv 0: 0+\nv 1: 0-\ne 0 0 1 3 2\n",
    ],
)
def test_parse_cascade_rejects_malformed(text):
    with pytest.raises((StructureError, LogError)):
        parse_cascade(text)


def test_log_file_round_trip(tmp_path):
    logs = builtin_logs("z24-index2")
    path = tmp_path / "pair.log"
    path.write_text(format_logs(logs))
    assert load_logs(path) == logs
    assert parse_logs(format_logs(logs)) == logs


def test_load_logs_from_cascade_file(tmp_path):
    path = tmp_path / "z.cascade"
    path.write_text(builtin_cascade("z18").to_text())
    assert load_logs(path) == [Log(18, Z18)]


@pytest.mark.parametrize("text", ["", "log 1\n", "log 1\nmod 18\nrow 0 1\n", "log 1\nmod 18\nrow x\n", "log 1\nmod 18\n"])
def test_parse_logs_rejects_malformed(text):
    with pytest.raises(LogError):
        parse_logs(text)


def test_unknown_builtin():
    with pytest.raises(KeyError):
        builtin_logs("z19")


def test_log_helpers():
    lg = Log(18, Z18)
    assert lg.rotated_to(7).entries[0] == 7
    assert lg.contains_run((14, 1, 8))
    assert lg.contains_run((8, 6))  # wraps around
    assert not lg.contains_run((6, 8))
    assert str(Log(6, (1, 2, 4, 5))) == "(1 2 4 5)"
