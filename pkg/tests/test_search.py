import itertools

import pytest

from octagen import kernels
from octagen.currents import Log, derive_index1, extract_log, is_octahedral_triangulation, parse_cascade, verify_cascade
from octagen.rotsys import trace_faces
from octagen.search import (
    CatalogError,
    all_triangular_logs,
    default_catalog,
    enumerate_templates,
    family_values,
    iter_cascades,
    parse_catalog,
    search_cascade,
    search_log_bruteforce,
    template_space,
    template_space_size,
)


def test_default_catalog_shape():
    cat = default_catalog()
    assert cat.shards == 8
    assert {ln.section for ln in cat.lines} == {"case6", "case0", "plain"}
    assert len(cat.lines) <= 10


def test_template_space_counts():
    # case 6: two anchor lines x 8 shards, then the plain line
    assert len(template_space(30)) == template_space_size(30) == 2 * 8 + 8
    assert len(template_space(30, fallback=False)) == 16
    # case 0: two lines with k and j each over 0..5
    assert len(template_space(36)) == template_space_size(36) == 2 * 36 * 8 + 8
    # n = 12 has no family values: only the plain line
    assert len(template_space(12)) == template_space_size(12) == 8
    assert len(template_space(30, anchored=False)) == 8


def test_template_seeds_pin_pendant_and_anchor():
    ts = template_space(30, fallback=False)
    env = family_values(30)
    q, r = env["q"], env["r"]
    assert (q, r) == (1, 5)
    assert ts[0].corners == ((10, 20), (q, r), (r, q + 3 * r))
    assert len({t.rng_seed for t in ts}) == len(ts)


def test_enumeration_is_deterministic():
    a = [cg.to_text() for cg in itertools.islice(enumerate_templates(30), 3)]
    b = [cg.to_text() for cg in itertools.islice(enumerate_templates(30), 3)]
    assert a == b and len(a) == 3


def test_enumerate_rejects_bad_n():
    with pytest.raises(ValueError):
        next(enumerate_templates(16))


def test_enumerate_n18_contains_valid_cascade():
    found = [cg for cg in enumerate_templates(18, budget=50_000) if verify_cascade(cg).passed]
    assert found


@pytest.mark.parametrize("n", [12, 18, 24, 30, 36])
def test_search_cascade_success(n):
    cg = search_cascade(n)
    assert cg is not None
    again = parse_cascade(cg.to_text())
    assert verify_cascade(again).passed
    rs = derive_index1(extract_log(again))
    assert is_octahedral_triangulation(rs)


def test_search_budget_exhaustion_returns_none():
    assert search_cascade(36, budget=5) is None


def test_search_rejects_bad_n():
    for n in (6, 16, 20):
        with pytest.raises(ValueError):
            search_cascade(n)


def test_anchored_results_have_handle_neighbours():
    env = family_values(42)
    q, r = env["q"], env["r"]
    cg = next(iter_cascades(42, fallback=False))
    lg = extract_log(cg)
    k = lg.entries.index(r)
    assert {lg.entries[k - 1], lg.entries[(k + 1) % len(lg)]} == {q % 42, (q + 3 * r) % 42}


def test_bruteforce_n6_matches_cyclic_order_oracle():
    # oracle: try every cyclic order of {1, 2, 4, 5} starting with 1
    oracle = []
    for rest in itertools.permutations((2, 4, 5)):
        lg = Log(6, (1,) + rest)
        rs = derive_index1(lg)
        faces = trace_faces(rs)
        if faces.is_triangular and faces.genus == 0:
            oracle.append(lg)
    assert oracle == all_triangular_logs(6)
    lg = search_log_bruteforce(6)
    assert lg in oracle
    faces = trace_faces(derive_index1(lg))
    assert (faces.V, faces.E, faces.F, faces.genus) == (6, 12, 8, 0)


def test_bruteforce_n12_prefers_run_2_11_8():
    lg = search_log_bruteforce(12)
    assert lg.contains_run((2, 11, 8))
    faces = trace_faces(derive_index1(lg))
    assert faces.is_triangular and faces.genus == 5


def test_bruteforce_n12_every_log_is_triangular():
    logs = all_triangular_logs(12)
    assert logs
    assert all(is_octahedral_triangulation(derive_index1(lg)) for lg in logs)
    assert all(lg.entries[0] == 1 for lg in logs)


def test_bruteforce_rejects_other_n():
    with pytest.raises(ValueError):
        search_log_bruteforce(18)


def test_catalog_parsing_and_errors(tmp_path):
    text = "shards 2\nlimit 100\n[plain]\nonly  n//3>2*n//3\n"
    cat = parse_catalog(text)
    assert (cat.shards, cat.limit) == (2, 100)
    assert len(template_space(18, cat)) == 2
    for bad in (
        "[plain]\n",
        "x 1>2\n",
        "[weird]\nx 1>2\n",
        "[plain]\nx 1-2\n",
        "[plain]\nx 1>zz\n",
        "[plain]\nx 1>(2\n",
        "shards 0\n[plain]\nx 1>2\n",
    ):
        with pytest.raises(CatalogError):
            parse_catalog(bad)


def test_catalog_skips_lines_with_undefined_values():
    cat = parse_catalog("[case0]\nneeds-a a>1\n[plain]\np n//3>2*n//3\n")
    ts = template_space(12, cat)
    assert {t.name for t in ts} == {"p"}


def test_kernel_backend_is_reported():
    assert kernels.BACKEND in ("cython", "python")
