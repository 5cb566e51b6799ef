"""Search for triangular logs and the cascades that carry them.

A log is triangular exactly when every corner of the derived embedding
closes after three steps, so the search works on corner orbits directly
(see :func:`octagen.kernels.corner_search`).  Seed patterns from a text
catalog pin the degree-1 vertex and, for the handle families, the log
neighbours that make the later edge flips land on matching edges.  Each
pattern runs under several RNG shards; the first shard whose log rebuilds
into a cascade passing all checks wins, in enumeration order.
"""

from __future__ import annotations

import ast
import itertools
import logging
import operator
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterator

from octagen import kernels
from octagen.currents import (
    CurrentGraph,
    Log,
    LogError,
    cascade_from_log,
    derive_index1,
    extract_log,
    is_octahedral_triangulation,
    parse_cascade,
    verify_cascade,
)
from octagen.surgery import case0_family_abc, case6_family_q

log = logging.getLogger(__name__)

DEFAULT_BUDGET = 2_000_000


class CatalogError(ValueError):
    pass


# ---------------------------------------------------------------------------
# catalog

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.FloorDiv: operator.floordiv}


def _eval(node, env):
    if isinstance(node, ast.Expression):
        return _eval(node.body, env)
    if isinstance(node, ast.Constant) and isinstance(node.value, int):
        return node.value
    if isinstance(node, ast.Name):
        if env.get(node.id) is None:
            raise KeyError(node.id)
        return env[node.id]
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_eval(node.left, env), _eval(node.right, env))
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub):
        return -_eval(node.operand, env)
    raise CatalogError(f"unsupported expression element {ast.dump(node)}")


@dataclass(frozen=True)
class CatalogLine:
    section: str
    name: str
    corners: tuple[tuple[ast.Expression, ast.Expression], ...]
    loop_vars: tuple[str, ...]


@dataclass(frozen=True)
class Catalog:
    lines: tuple[CatalogLine, ...]
    shards: int = 8
    limit: int = 20000
    source: str = "builtin"


_VARS = {"n", "r", "s", "q", "a", "b", "c", "k", "j"}


def parse_catalog(text: str, source: str = "<text>") -> Catalog:
    section = None
    lines = []
    shards, limit = 8, 20000
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"{source}:{lineno}"
        m = re.fullmatch(r"\[(\w+)\]", line)
        if m:
            section = m.group(1)
            if section not in ("case6", "case0", "plain"):
                raise CatalogError(f"{where}: unknown section [{section}]")
            continue
        head, *rest = line.split()
        if head in ("shards", "limit") and section is None:
            if len(rest) != 1 or not rest[0].isdigit() or int(rest[0]) < 1:
                raise CatalogError(f"{where}: '{head}' needs one positive integer")
            if head == "shards":
                shards = int(rest[0])
            else:
                limit = int(rest[0])
            continue
        if section is None:
            raise CatalogError(f"{where}: template before any section header")
        if not rest:
            raise CatalogError(f"{where}: template '{head}' has no corners")
        corners = []
        used = set()
        for tok in rest:
            if tok.count(">") != 1:
                raise CatalogError(f"{where}: corner {tok!r} is not of the form x>y")
            pair = []
            for part in tok.split(">"):
                try:
                    expr = ast.parse(part, mode="eval")
                except SyntaxError as exc:
                    raise CatalogError(f"{where}: bad expression {part!r}") from exc
                names = {nd.id for nd in ast.walk(expr) if isinstance(nd, ast.Name)}
                if names - _VARS:
                    raise CatalogError(f"{where}: unknown variable(s) {sorted(names - _VARS)}")
                used |= names
                pair.append(expr)
            corners.append(tuple(pair))
        lines.append(CatalogLine(section, head, tuple(corners), tuple(v for v in ("k", "j") if v in used)))
    if not lines:
        raise CatalogError(f"{source}: catalog has no templates")
    return Catalog(tuple(lines), shards, limit, source)


def default_catalog() -> Catalog:
    text = resources.files("octagen").joinpath("fixtures/catalog.txt").read_text()
    return parse_catalog(text, "builtin")


def load_catalog(path: str | Path | None) -> Catalog:
    if path is None:
        return default_catalog()
    return parse_catalog(Path(path).read_text(), str(path))


# ---------------------------------------------------------------------------
# template space


@dataclass(frozen=True)
class SeedTemplate:
    """One search run: seed corners imposed before the DFS, plus an RNG shard."""

    n: int
    name: str
    corners: tuple[tuple[int, int], ...]
    shard: int
    limit: int

    @property
    def rng_seed(self) -> int:
        key = f"{self.n}|{self.name}|{self.corners}|{self.shard}"
        h = 1469598103934665603
        for ch in key.encode():
            h = ((h ^ ch) * 1099511628211) & ((1 << 64) - 1)
        return h


def family_values(n: int) -> dict:
    """Variables available to catalog expressions for this n."""
    env = {"n": n, "r": n // 6, "s": None, "q": None, "a": None, "b": None, "c": None}
    if n % 12 == 6:
        s = (n - 6) // 12
        env.update(s=s, r=2 * s + 1, q=case6_family_q(s) if s >= 1 else None)
    elif n % 12 == 0:
        s = n // 12
        env.update(s=s, r=2 * s)
        abc = case0_family_abc(s)
        if abc:
            env.update(a=abc[0], b=abc[1], c=abc[2])
    return env


def _check_n(n: int, minimum: int = 6) -> None:
    if not isinstance(n, int) or n % 6 or n < minimum:
        raise ValueError(f"n must be a multiple of 6 and at least {minimum}, got {n!r}")


def template_space(
    n: int, catalog: Catalog | None = None, anchored: bool = True, fallback: bool = True
) -> list[SeedTemplate]:
    """All seed templates for ``n`` in enumeration order.

    ``anchored`` puts the residue section ([case6] or [case0]) first; with
    ``fallback`` the [plain] section follows it.  Either way at least the
    [plain] section is used when the anchored one yields nothing.
    """
    _check_n(n)
    catalog = catalog or default_catalog()
    env = family_values(n)
    wanted = ["case6" if n % 12 == 6 else "case0"] if anchored else []

    def build(sections):
        out = []
        for line in catalog.lines:
            if line.section not in sections:
                continue
            for values in itertools.product(range(6), repeat=len(line.loop_vars)):
                scope = dict(env, **dict(zip(line.loop_vars, values)))
                try:
                    corners = tuple((_eval(x, scope) % n, _eval(y, scope) % n) for x, y in line.corners)
                except KeyError:
                    break
                tag = line.name + "".join(f",{v}={val}" for v, val in zip(line.loop_vars, values))
                for shard in range(catalog.shards):
                    out.append(SeedTemplate(n, tag, corners, shard, catalog.limit))
        return out

    space = build(wanted) if wanted else []
    if fallback or not space:
        space += build(["plain"])
    return space


def template_space_size(n: int, catalog: Catalog | None = None, anchored: bool = True, fallback: bool = True) -> int:
    """Closed form for ``len(template_space(...))``: sum of 6^(loop vars) times shards."""
    catalog = catalog or default_catalog()
    env = family_values(n)

    def count(sections):
        total = 0
        for line in catalog.lines:
            if line.section not in sections:
                continue
            names = {nd.id for x, y in line.corners for e in (x, y) for nd in ast.walk(e) if isinstance(nd, ast.Name)}
            if any(env.get(v) is None for v in names - {"k", "j"}):
                continue
            total += 6 ** len(line.loop_vars) * catalog.shards
        return total

    anchored_total = count(["case6" if n % 12 == 6 else "case0"]) if anchored else 0
    if fallback or not anchored_total:
        return anchored_total + count(["plain"])
    return anchored_total


# ---------------------------------------------------------------------------
# running templates


@dataclass
class RunResult:
    template: SeedTemplate
    status: int
    nodes: int
    log: Log | None
    cascade_text: str | None
    reason: str


def run_template(t: SeedTemplate, limit: int | None = None) -> RunResult:
    """Search one template and rebuild its cascade.  Picklable for workers."""
    status, seq, nodes = kernels.corner_search(t.n, list(t.corners), t.rng_seed, limit or t.limit)
    if status != 1:
        return RunResult(t, status, nodes, None, None, "exhausted" if status == 0 else "node limit")
    lg = Log(t.n, tuple(seq))
    try:
        cg = cascade_from_log(lg)
    except LogError as exc:
        return RunResult(t, 0, nodes, lg, None, str(exc))
    return RunResult(t, 1, nodes, lg, cg.to_text(), "ok")


def _runs(templates: list[SeedTemplate], budget: int, workers: int) -> Iterator[RunResult]:
    """Results in enumeration order until the node budget is spent."""
    spent = 0
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            for res in pool.map(run_template, templates, chunksize=4):
                if spent + res.nodes > budget:
                    pool.shutdown(cancel_futures=True)
                    return
                spent += res.nodes
                yield res
        return
    for t in templates:
        res = run_template(t)
        if spent + res.nodes > budget:
            return
        spent += res.nodes
        yield res


def _reverify(text: str) -> CurrentGraph | None:
    """Independent re-check from the serialized form."""
    cg = parse_cascade(text)
    report = verify_cascade(cg)
    if not report.passed:
        return None
    if not is_octahedral_triangulation(derive_index1(extract_log(cg))):
        return None
    return cg


def enumerate_templates(
    n: int,
    budget: int = DEFAULT_BUDGET,
    catalog: Catalog | None = None,
    anchored: bool = True,
    workers: int = 1,
    fallback: bool = True,
) -> Iterator[CurrentGraph]:
    """Structurally valid cascades from the template space, in order."""
    _check_n(n)
    for res in _runs(template_space(n, catalog, anchored, fallback), budget, workers):
        if res.cascade_text is not None:
            yield parse_cascade(res.cascade_text)


def iter_cascades(
    n: int,
    budget: int | None = None,
    catalog: Catalog | None = None,
    anchored: bool = True,
    workers: int = 1,
    fallback: bool = True,
) -> Iterator[CurrentGraph]:
    """Cascades passing every check, re-verified from text, in order."""
    _check_n(n, 12)
    for res in _runs(template_space(n, catalog, anchored, fallback), budget or DEFAULT_BUDGET, workers):
        if res.cascade_text is None:
            continue
        cg = _reverify(res.cascade_text)
        if cg is None:
            log.warning("template %s produced a cascade that failed re-verification", res.template.name)
            continue
        yield cg


def search_cascade(
    n: int,
    budget: int | None = None,
    catalog: Catalog | None = None,
    anchored: bool = True,
    workers: int = 1,
    fallback: bool = True,
) -> CurrentGraph | None:
    """First cascade for O_n passing all checks, or None when the budget runs out."""
    return next(iter_cascades(n, budget, catalog, anchored, workers, fallback), None)


# ---------------------------------------------------------------------------
# exhaustive search for tiny n


def all_triangular_logs(n: int) -> list[Log]:
    """Every triangular log over Z_n with first element 1, in lexicographic order.

    Fixing the first element removes the cyclic rotations; each cyclic log
    therefore appears exactly once.
    """
    half = n // 2
    elems = [v for v in range(1, n) if v != half]
    m = len(elems)
    succ, pred = {}, {}
    out = []
    seq = [1]

    def consistent(orbit):
        return all(succ.get(a, b) == b and pred.get(b, a) == a for a, b in orbit)

    def assign(orbit):
        done = []
        for a, b in orbit:
            if succ.get(a, b) != b or pred.get(b, a) != a:
                undo(done)
                return None
            if a not in succ:
                succ[a] = b
                pred[b] = a
                done.append((a, b))
        return done

    def undo(done):
        for a, b in done:
            del succ[a]
            del pred[b]

    def extend():
        x = seq[-1]
        if len(seq) == m:
            orbit = kernels.corner_orbit(n, x, seq[0])
            if orbit is not None and consistent(orbit):
                out.append(Log(n, tuple(seq)))
            return
        for y in elems:
            if y in seq:
                continue
            orbit = kernels.corner_orbit(n, x, y)
            if orbit is None or not consistent(orbit):
                continue
            done = assign(orbit)
            if done is None:
                continue
            seq.append(y)
            extend()
            seq.pop()
            undo(done)

    extend()
    return out


def search_log_bruteforce(n: int) -> Log | None:
    """Exhaustive log search for n in {6, 12}.

    Every candidate is confirmed by deriving and tracing the embedding.  For
    n = 12 a log containing the run 2, 11, 8 is preferred.
    """
    if n not in (6, 12):
        raise ValueError(f"exhaustive log search is only for n = 6 or 12, got {n}; use search_cascade")
    found = [lg for lg in all_triangular_logs(n) if is_octahedral_triangulation(derive_index1(lg))]
    if not found:
        return None
    if n == 12:
        preferred = [lg for lg in found if lg.contains_run((2, 11, 8))]
        if preferred:
            return preferred[0]
    return found[0]
