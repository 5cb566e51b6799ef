"""Command-line front end.

Exit status: 0 when every verdict passes, 1 on a mathematical verification
failure (or a search that found nothing), 2 on bad input or usage.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

from octagen import certify, currents, kernels, rotsys, search, surgery

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass
class RunReport:
    command: str
    inputs: dict
    steps: list[dict] = field(default_factory=list)
    outputs: list[str] = field(default_factory=list)
    status: int = EXIT_OK

    def add(self, name: str, ok: bool, **counts) -> None:
        self.steps.append({"name": name, "verdict": "pass" if ok else "FAIL", **counts})
        if not ok:
            self.status = EXIT_FAIL

    def render(self) -> str:
        out = [f"{self.command}: " + ", ".join(f"{k}={v}" for k, v in self.inputs.items())]
        if self.steps:
            keys = []
            for st in self.steps:
                keys.extend(k for k in st if k not in keys)
            rows = [[_cell(st.get(k, "")) for k in keys] for st in self.steps]
            widths = [max(len(k), *(len(r[i]) for r in rows)) for i, k in enumerate(keys)]
            out.append("  ".join(k.ljust(w) for k, w in zip(keys, widths)).rstrip())
            for r in rows:
                out.append("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip())
        for path in self.outputs:
            out.append(f"wrote {path}")
        out.append(f"status={self.status}")
        return "\n".join(out)


def _cell(v) -> str:
    if isinstance(v, (list, tuple)):
        return " ".join(map(str, v)) if v else "-"
    return str(v)


def _faces_counts(rs: rotsys.RotationSystem) -> dict:
    faces = rotsys.trace_faces(rs)
    out = {"V": faces.V, "E": faces.E, "F": faces.F}
    try:
        out["genus"] = faces.genus
    except rotsys.EmbeddingError:
        out["genus"] = None
    out["triangular"] = faces.is_triangular
    return out


def _write(path: Path, text: str, report: RunReport) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    report.outputs.append(str(path))


# ---------------------------------------------------------------------------
# commands


def cmd_derive(args) -> RunReport:
    report = RunReport("derive", {"log": args.log, "index2": args.index2})
    logs = currents.load_logs(args.log)
    if args.index2:
        if len(logs) != 2:
            raise UsageError(f"--index2 needs two log rows, got {len(logs)}")
        try:
            rs = currents.derive_index2(*logs)
        except currents.NotTriangularError as exc:
            report.add("derive", False, problem=str(exc))
            return report
    else:
        if len(logs) != 1:
            raise UsageError(f"expected one log row, got {len(logs)} (use --index2 for two)")
        rs = currents.derive_index1(logs[0])
    n = rs.vertex_count
    counts = _faces_counts(rs)
    ident = rotsys.check_graph_identity(rs, rotsys.GraphSpec.octahedral(n))
    expected = certify.genus_formula(rotsys.GraphSpec.octahedral(n))
    ok = counts["triangular"] and ident.passed and counts["genus"] == expected
    report.add(f"O_{n}", ok, **counts, expected_genus=expected, graph="O_n" if ident.passed else "; ".join(ident.problems))
    out = Path(args.out) if args.out else None
    if out:
        _write(out, rs.to_text(), report)
    return report


def cmd_augment(args) -> RunReport:
    n = args.n
    if n % 6 or n < 18:
        raise UsageError(f"--n must be a multiple of 6 and at least 18, got {n}")
    report = RunReport("augment", {"n": n})
    try:
        res = surgery.augment_pipeline(n, budget=args.budget)
    except surgery.PipelineError as exc:
        for st in exc.steps:
            report.add(st.name, st.passed, V=st.V, E=st.E, F=st.F, genus=st.genus, problems=st.problems)
        report.add("pipeline", False, problem=str(exc))
        return report
    report.inputs["source"] = res.source
    outdir = Path(args.outdir) if args.outdir else None
    for k, st in enumerate(res.steps):
        report.add(
            st.name,
            st.passed,
            V=st.V,
            E=st.E,
            F=st.F,
            genus=st.genus,
            expected=st.expected_genus,
            triangular=st.triangular,
            duplicates=[f"{u}-{v}" for u, v in st.duplicates],
        )
        if outdir:
            slug = st.name.split(": ")[-1].replace(" + 3 duplicates", "-dups").replace("(", "").replace(")", "")
            slug = slug.replace(",", "-").replace(" ", "")
            _write(outdir / f"{k}-{slug}.rotsys", st.system.to_text(), report)
    report.inputs["genus_chain"] = res.genus_chain()
    return report


def cmd_table(args) -> RunReport:
    report = RunReport("table", {"n": args.n})
    try:
        rows = certify.genus_table(args.n)
    except rotsys.EmbeddingError:
        raise
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    for r in rows:
        report.add(
            f"t={r.t}",
            r.verified,
            formula=r.formula_genus,
            witness=r.witness_genus,
            kind=r.witness_kind,
            deleted=[f"{u}-{v}" for u, v in r.deleted],
        )
    return report


def cmd_crossings(args) -> RunReport:
    report = RunReport("crossings", {"n": args.n})
    try:
        rep = certify.crossing_theorem_check(args.n)
    except rotsys.EmbeddingError:
        raise
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    lines = []
    for row in rep.rows:
        ok = row.certified and row.lower_bound == rep.expected[row.g]
        report.add(
            f"g={row.g}",
            ok,
            genus=row.genus,
            lower=row.lower_bound,
            upper=row.upper_bound,
            expected=rep.expected[row.g],
            outcome=row.verdict,
        )
        lines.append(f"# g={row.g} genus={row.genus}")
        lines.extend(row.certificates.lines())
        lines.extend(f"# uncertified {u} {v}" for u, v in row.certificates.failures)
    if args.certs:
        _write(Path(args.certs), "\n".join(lines) + "\n", report)
    return report


def cmd_verify(args) -> RunReport:
    report = RunReport("verify", {"path": args.path})
    cg = currents.load_cascade(args.path)
    res = currents.verify_cascade(cg)
    for name, ok in res.properties.items():
        report.add(name, ok)
    if res.log is not None:
        report.inputs["log"] = " ".join(map(str, res.log.entries))
        rs = currents.derive_index1(res.log)
        counts = _faces_counts(rs)
        report.add("derived O_n", counts["triangular"] and currents.is_octahedral_triangulation(rs), **counts)
    return report


def cmd_search(args) -> RunReport:
    report = RunReport("search", {"n": args.n, "budget": args.budget})
    try:
        catalog = search.load_catalog(args.catalog)
        cg = search.search_cascade(args.n, budget=args.budget, catalog=catalog, workers=args.workers)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if cg is None:
        report.add("search", False, result="not found within budget")
        return report
    res = currents.verify_cascade(cg)
    report.add("search", res.passed, result="found", log=list(res.log.entries) if res.log else [])
    if args.out:
        _write(Path(args.out), cg.to_text(), report)
    return report


def cmd_trace(args) -> RunReport:
    report = RunReport("trace", {"path": args.path})
    rs = rotsys.parse_rotsys(Path(args.path).read_text())
    faces = rotsys.trace_faces(rs)
    counts = _faces_counts(rs)
    lengths = dict(sorted(faces.length_multiset().items()))
    report.add("faces", counts["genus"] is not None, **counts, lengths=[f"{k}x{v}" for k, v in lengths.items()])
    if args.faces:
        for i in range(faces.F):
            report.steps.append({"name": f"face {i}", "verdict": "-", "walk": list(faces.vertex_walk(i))})
    return report


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="octagen", description=__doc__.splitlines()[0])
    p.add_argument("--json", action="store_true", help="print the report as JSON")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("derive", help="derive the embedding of a log")
    d.add_argument("--log", required=True, help="builtin:<name>, a 'log 1' file or a 'cascade 1' file")
    d.add_argument("--index2", action="store_true", help="two logs, one per vertex parity")
    d.add_argument("--out", help="write the rotation system here")

    a = sub.add_parser("augment", help="run the handle pipeline from O_n to K_n")
    a.add_argument("--n", type=int, required=True)
    a.add_argument("--outdir", help="write one rotsys file per step")
    a.add_argument("--budget", type=int, default=None)

    t = sub.add_parser("table", help="genus table of K(n,t)")
    t.add_argument("--n", type=int, required=True)

    c = sub.add_parser("crossings", help="crossing numbers just below the genus of K_n")
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--certs", help="write certificate lines here")

    v = sub.add_parser("verify", help="check a cascade file")
    v.add_argument("path")

    s = sub.add_parser("search", help="search for a cascade")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--budget", type=int, default=search.DEFAULT_BUDGET)
    s.add_argument("--catalog", help="seed catalog file (default: built in)")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--out", help="write the cascade here")

    tr = sub.add_parser("trace", help="trace the faces of a rotsys file")
    tr.add_argument("path")
    tr.add_argument("--faces", action="store_true", help="list every face walk")
    return p


COMMANDS = {
    "derive": cmd_derive,
    "augment": cmd_augment,
    "table": cmd_table,
    "crossings": cmd_crossings,
    "verify": cmd_verify,
    "search": cmd_search,
    "trace": cmd_trace,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    logging.getLogger(__name__).debug("kernel backend: %s", kernels.BACKEND)
    try:
        report = COMMANDS[args.command](args)
    except rotsys.EmbeddingError as exc:
        print(f"octagen {args.command}: verification failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (UsageError, ValueError, KeyError, OSError, rotsys.StructureError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"octagen {args.command}: error: {msg}", file=sys.stderr)
        return EXIT_USAGE
    if args.json:
        print(json.dumps(asdict(report), indent=2))
    else:
        print(report.render())
    return report.status


if __name__ == "__main__":
    sys.exit(main())
