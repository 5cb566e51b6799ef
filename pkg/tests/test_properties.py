import math
import random

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from octagen import _pykernels, kernels
from octagen.certify import euler_lower_bound, genus_formula
from octagen.currents import builtin_logs, derive_index1
from octagen.rotsys import GraphSpec, RotationSystem, flip_vertices, is_orientable, trace_faces
from octagen.surgery import add_tube, gamma_complete, gamma_octahedral

from _gen import random_system

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def system(seed):
    return random_system(random.Random(seed))


@settings(max_examples=1000)
@given(seeds)
def test_face_lengths_sum_to_twice_edges(seed):
    rs = system(seed)
    faces = trace_faces(rs)
    assert sum(faces.lengths()) == 2 * rs.edge_count
    assert faces.F >= 1


@settings(max_examples=300)
@given(seeds, st.data())
def test_vertex_flips_preserve_faces_and_orientability(seed, data):
    rs = system(seed)
    flips = data.draw(st.sets(st.integers(0, rs.vertex_count - 1)))
    other = flip_vertices(rs, flips)
    assert trace_faces(other).length_multiset() == trace_faces(rs).length_multiset()
    assert is_orientable(other) == is_orientable(rs)


@settings(max_examples=300)
@given(seeds)
def test_orientable_systems_have_integral_genus(seed):
    rs = system(seed)
    if is_orientable(rs):
        faces = trace_faces(rs)
        assert faces.genus >= 0


@pytest.mark.skipif(kernels.BACKEND != "cython", reason="compiled kernels not built")
@settings(max_examples=300)
@given(seeds)
def test_backends_trace_identically(seed):
    rs = system(seed)
    succ, pred = rs._succ_pred
    dsig = [s for s in rs.signature for _ in (0, 1)]
    assert kernels.trace(succ, pred, dsig) == _pykernels.trace(succ, pred, dsig)


@pytest.mark.skipif(kernels.BACKEND != "cython", reason="compiled kernels not built")
@given(st.integers(3, 40).map(lambda k: 2 * k), st.data())
def test_backends_agree_on_orbits(n, data):
    x = data.draw(st.integers(0, n - 1))
    y = data.draw(st.integers(0, n - 1))
    assert kernels.corner_orbit(n, x, y) == _pykernels.corner_orbit(n, x, y)


@pytest.mark.skipif(kernels.BACKEND != "cython", reason="compiled kernels not built")
@settings(max_examples=60)
@given(st.sampled_from([18, 24, 30, 36]), seeds, st.integers(1, 3000))
def test_backends_agree_on_search(n, rng_seed, limit):
    seeds_ = [(n // 3, 2 * n // 3)]
    assert kernels.corner_search(n, seeds_, rng_seed, limit) == _pykernels.corner_search(n, seeds_, rng_seed, limit)


def _k7():
    return RotationSystem.from_neighbors([[(i + d) % 7 for d in (1, 3, 2, 6, 4, 5)] for i in range(7)])


_BASES = {"k7": _k7(), "o18": derive_index1(builtin_logs("z18")[0])}


@settings(max_examples=150, suppress_health_check=[HealthCheck.filter_too_much])
@given(st.sampled_from(sorted(_BASES)), st.data())
def test_tube_between_disjoint_faces(name, data):
    rs = _BASES[name]
    faces = trace_faces(rs)
    i = data.draw(st.integers(0, faces.F - 1))
    a = faces.vertex_walk(i)
    others = [j for j in range(faces.F) if not set(faces.vertex_walk(j)) & set(a)]
    j = data.draw(st.sampled_from(others))
    b = faces.vertex_walk(j)
    j0 = data.draw(st.integers(0, 2))
    pairs = [(a[k], b[(j0 - k) % 3]) for k in range(3)] + [(a[k], b[(j0 - k + 1) % 3]) for k in range(3)]
    out, ids = add_tube(rs, a, b, pairs)
    after = trace_faces(out)
    assert (after.E - faces.E, after.F - faces.F, after.genus - faces.genus) == (6, 4, 1)
    assert after.is_triangular
    assert len(ids) == 6


@given(st.integers(3, 10).map(lambda k: 6 * k))
def test_handle_count_identity(n):
    # a triangular O_n needs ceil(n / 12) handles to reach the genus of K_n
    assert gamma_complete(n) - gamma_octahedral(n) == math.ceil(n / 12)
    assert gamma_octahedral(n) == genus_formula(GraphSpec.octahedral(n))
    assert gamma_complete(n) == euler_lower_bound(n, n * (n - 1) // 2)
    # O_n triangulates: E = 3(V - 2 + 2g)
    assert n * (n - 2) // 2 == 3 * (n - 2 + 2 * gamma_octahedral(n))
