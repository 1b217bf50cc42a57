"""Project files, reports and the ``symdyn`` command.

A project file is line oriented::

    symdyn-project 1
    # comments start with '#'
    shift X symbols=a1,b1,a2,b2 arrows=a1>a1,a1>b1,b1>a1,a2>a2,a2>b2,b2>a2
    shift Y symbols=a,b arrows=a>a,a>b,b>a
    relation R shift=X pairs=a1~a2,b1~b2
    code C from=X to=Y map=a1:a,b1:b,a2:a,b2:b
    factor F code=C relation=R
    fixture M builtin=mixed_fiber

Names may be declared in any order.  Relations are closed under symmetry
and reflexivity; the closure is recorded as a warning and the file keeps
the pairs as written, so emitting and re-parsing is lossless.

Every command prints one JSON report.  Exit codes: 0 computed or passed,
1 counterexample, 2 input error, 3 truncation too small.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import re
import sys
from dataclasses import dataclass, field

from .census import first_return_series, lemma62_diagnostic, perron, periodic_counts
from .degree import rec_degree, sees_magic, shortest_magic_subword, verify_thm_degree
from .fixtures import FIXTURES
from .pipeline import (
    PipelineError,
    run_pipeline,
    verify_coverage,
    verify_disjointness,
    verify_injectivity,
    verify_levels,
)
from .quotient import CliqueCapExceeded, build_quotient, degree_spectrum, fiber_census
from .relation import BowenFactor, SymRelation, canonical_relation, is_transitive, verify_bowen_property
from .shiftcore import EPSequence, InputError, ShiftGraph, essential_symbols, periodic_points_upto, scc_decompose

HEADER = "symdyn-project 1"
REPORT_SCHEMA = "symdyn-report 1"
EXIT_OK, EXIT_COUNTEREXAMPLE, EXIT_INPUT, EXIT_TRUNCATION = 0, 1, 2, 3


class ProjectError(InputError):
    """A located problem in a project file; ``kind`` is syntax, reference or graph."""

    def __init__(self, kind: str, message: str, line: int, column: int):
        super().__init__(f"{line}:{column}: {kind} error: {message}")
        self.kind = kind
        self.line = line
        self.column = column


@dataclass
class Decl:
    kind: str
    name: str
    fields: dict[str, str]
    line: int
    columns: dict[str, int] = field(default_factory=dict)


@dataclass
class ProjectFile:
    decls: dict[str, Decl]
    warnings: list[str] = field(default_factory=list)

    def names(self, kind: str) -> list[str]:
        return sorted(n for n, d in self.decls.items() if d.kind == kind)

    def _get(self, name: str, kinds: tuple[str, ...], where: Decl | None = None, key: str = "") -> Decl:
        d = self.decls.get(name)
        if d is None or d.kind not in kinds:
            if where is None:
                raise InputError(f"no {' or '.join(kinds)} named {name!r}")
            raise ProjectError("reference", f"unknown {'/'.join(kinds)} {name!r}", where.line,
                               where.columns.get(key, 1))
        return d

    def shift(self, name: str) -> ShiftGraph:
        d = self._get(name, ("shift",))
        return _build_shift(d)

    def relation(self, name: str) -> SymRelation:
        d = self._get(name, ("relation",))
        G = self.shift(self._get(d.fields["shift"], ("shift",), d, "shift").name)
        return _build_relation(d, G)[0]

    def factor(self, name: str) -> BowenFactor:
        d = self._get(name, ("factor", "fixture"))
        if d.kind == "fixture":
            return FIXTURES[d.fields["builtin"]]()
        code = self._get(d.fields["code"], ("code",), d, "code")
        rel = self._get(d.fields["relation"], ("relation",), d, "relation")
        src = self._get(code.fields["from"], ("shift",), code, "from")
        if rel.fields["shift"] != src.name:
            raise ProjectError("reference", f"relation {rel.name!r} is on {rel.fields['shift']!r}, "
                               f"code {code.name!r} starts at {src.name!r}", d.line, d.columns["relation"])
        X = _build_shift(src)
        Y = _build_shift(self._get(code.fields["to"], ("shift",), code, "to"))
        mapping = _build_code(code, X, Y)
        R = _build_relation(rel, X)[0]
        try:
            return BowenFactor(X, R, Y, mapping, name=name)
        except InputError as exc:
            raise ProjectError("reference", str(exc), d.line, 1) from exc

    def default_factor(self) -> str:
        names = self.names("factor") + self.names("fixture")
        if len(names) != 1:
            raise InputError("name a factor with --factor (the project declares "
                             f"{len(names)})")
        return names[0]


_FIELDS = {
    "shift": ("symbols", "arrows"),
    "relation": ("shift", "pairs"),
    "code": ("from", "to", "map"),
    "factor": ("code", "relation"),
    "fixture": ("builtin",),
}
_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_.\-]*$")
_SYMBOL = re.compile(r"[^\s,=>~:#]+$")


def _split_list(d: Decl, key: str) -> list[str]:
    raw = d.fields[key]
    return [] if raw == "" else raw.split(",")


def _build_shift(d: Decl) -> ShiftGraph:
    syms = _split_list(d, "symbols")
    col = d.columns["symbols"]
    for s in syms:
        if not _SYMBOL.match(s):
            raise ProjectError("syntax", f"bad symbol {s!r}", d.line, col)
    if len(set(syms)) != len(syms):
        raise ProjectError("graph", "repeated symbol", d.line, col)
    seen = set()
    arrows = []
    for a in _split_list(d, "arrows"):
        parts = a.split(">")
        if len(parts) != 2:
            raise ProjectError("syntax", f"arrow {a!r} is not of the form a>b", d.line, d.columns["arrows"])
        for s in parts:
            if s not in syms:
                raise ProjectError("reference", f"arrow uses unknown symbol {s!r}", d.line, d.columns["arrows"])
        if tuple(parts) in seen:
            raise ProjectError("graph", f"parallel arrow {a!r}: graphs must be simple", d.line,
                               d.columns["arrows"])
        seen.add(tuple(parts))
        arrows.append(tuple(parts))
    return ShiftGraph.from_labels(syms, arrows)


def _build_relation(d: Decl, G: ShiftGraph) -> tuple[SymRelation, list[tuple[int, int]]]:
    pairs = []
    for p in _split_list(d, "pairs"):
        parts = p.split("~")
        if len(parts) != 2:
            raise ProjectError("syntax", f"pair {p!r} is not of the form a~b", d.line, d.columns["pairs"])
        for s in parts:
            if s not in G.index:
                raise ProjectError("reference", f"pair uses unknown symbol {s!r}", d.line, d.columns["pairs"])
        pairs.append((G.index[parts[0]], G.index[parts[1]]))
    return SymRelation.from_pairs(G.size, pairs), pairs


def _build_code(d: Decl, X: ShiftGraph, Y: ShiftGraph) -> tuple[int, ...]:
    out = {}
    for m in _split_list(d, "map"):
        parts = m.split(":")
        if len(parts) != 2:
            raise ProjectError("syntax", f"map entry {m!r} is not of the form a:b", d.line, d.columns["map"])
        a, b = parts
        if a not in X.index:
            raise ProjectError("reference", f"map uses unknown source symbol {a!r}", d.line, d.columns["map"])
        if b not in Y.index:
            raise ProjectError("reference", f"map uses unknown target symbol {b!r}", d.line, d.columns["map"])
        out[X.index[a]] = Y.index[b]
    missing = [X.labels[i] for i in range(X.size) if i not in out]
    if missing:
        raise ProjectError("reference", f"map misses source symbols {missing}", d.line, d.columns["map"])
    return tuple(out[i] for i in range(X.size))


def parse_project(text: str) -> ProjectFile:
    lines = text.splitlines()
    body = [(i + 1, ln) for i, ln in enumerate(lines) if ln.strip() and not ln.lstrip().startswith("#")]
    if not body or body[0][1].strip() != HEADER:
        where = body[0][0] if body else 1
        raise ProjectError("syntax", f"first line must be {HEADER!r}", where, 1)
    decls: dict[str, Decl] = {}
    for lineno, ln in body[1:]:
        tokens = [(m.group(), m.start() + 1) for m in re.finditer(r"\S+", ln.split("#", 1)[0])]
        kind, kcol = tokens[0]
        if kind not in _FIELDS:
            raise ProjectError("syntax", f"unknown statement {kind!r}", lineno, kcol)
        if len(tokens) < 2:
            raise ProjectError("syntax", "missing name", lineno, kcol + len(kind))
        name, ncol = tokens[1]
        if not _NAME.match(name):
            raise ProjectError("syntax", f"bad name {name!r}", lineno, ncol)
        if name in decls:
            raise ProjectError("syntax", f"{name!r} declared twice", lineno, ncol)
        fields, cols = {}, {}
        for tok, col in tokens[2:]:
            if "=" not in tok:
                raise ProjectError("syntax", f"expected key=value, got {tok!r}", lineno, col)
            k, v = tok.split("=", 1)
            if k not in _FIELDS[kind]:
                raise ProjectError("syntax", f"unknown field {k!r} for {kind}", lineno, col)
            if k in fields:
                raise ProjectError("syntax", f"field {k!r} repeated", lineno, col)
            fields[k], cols[k] = v, col + len(k) + 1
        for k in _FIELDS[kind]:
            if k not in fields:
                raise ProjectError("syntax", f"{kind} needs {k}=", lineno, ncol)
        decls[name] = Decl(kind, name, fields, lineno, cols)
    project = ProjectFile(decls)
    _check(project)
    return project


def _check(project: ProjectFile):
    """Resolve every reference and build every object once."""
    for name in sorted(project.decls, key=lambda n: project.decls[n].line):
        d = project.decls[name]
        if d.kind == "shift":
            _build_shift(d)
        elif d.kind == "relation":
            G = _build_shift(project._get(d.fields["shift"], ("shift",), d, "shift"))
            rel, given = _build_relation(d, G)
            if rel.added - {(a, a) for a in range(G.size)}:
                project.warnings.append(f"line {d.line}: relation {name!r} closed under symmetry "
                                        f"({len(rel.added - {(a, a) for a in range(G.size)})} pairs added)")
        elif d.kind == "code":
            X = _build_shift(project._get(d.fields["from"], ("shift",), d, "from"))
            Y = _build_shift(project._get(d.fields["to"], ("shift",), d, "to"))
            _build_code(d, X, Y)
        elif d.kind == "factor":
            project.factor(name)
        elif d.kind == "fixture":
            if d.fields["builtin"] not in FIXTURES:
                raise ProjectError("reference", f"unknown builtin {d.fields['builtin']!r}", d.line,
                                   d.columns["builtin"])


def emit_project(project: ProjectFile) -> str:
    """Canonical text: declarations by kind then name, fields in fixed order."""
    order = ["shift", "relation", "code", "factor", "fixture"]
    out = [HEADER]
    for kind in order:
        for name in project.names(kind):
            d = project.decls[name]
            out.append(" ".join([kind, name] + [f"{k}={d.fields[k]}" for k in _FIELDS[kind]]))
    return "\n".join(out) + "\n"


def project_from_factor(f: BowenFactor, name: str = "F") -> ProjectFile:
    """A project declaring a one-block factor (source, target, code, relation)."""
    X, Y = f.source, f.target
    lines = [
        HEADER,
        f"shift {name}_src symbols={','.join(X.labels)} arrows="
        + ",".join(f"{X.labels[a]}>{X.labels[b]}" for a, b in sorted(X.arrows)),
        f"shift {name}_tgt symbols={','.join(Y.labels)} arrows="
        + ",".join(f"{Y.labels[a]}>{Y.labels[b]}" for a, b in sorted(Y.arrows)),
        f"relation {name}_rel shift={name}_src pairs="
        + ",".join(f"{X.labels[a]}~{X.labels[b]}" for a, b in f.relation.sorted_pairs()),
        f"code {name}_code from={name}_src to={name}_tgt map="
        + ",".join(f"{X.labels[a]}:{Y.labels[f.code[a]]}" for a in range(X.size)),
        f"factor {name} code={name}_code relation={name}_rel",
    ]
    return parse_project("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# reports


def _digest(project: ProjectFile) -> str:
    """Hash of the canonical text, with built-in fixtures expanded."""
    parts = [emit_project(project)]
    for name in project.names("fixture"):
        f = project.factor(name)
        if f.code is not None:
            parts.append(emit_project(project_from_factor(f, name)))
        else:
            parts.append(f"{name}: {f.source.labels} {sorted(f.source.arrows)} {f.relation.sorted_pairs()}")
    return hashlib.sha256("\n".join(parts).encode()).hexdigest()


def _render(x: EPSequence, G: ShiftGraph) -> str:
    return x.render(G)


def _word(w, G: ShiftGraph) -> list[str]:
    return [G.labels[a] for a in w]


def _components(G: ShiftGraph) -> list[dict]:
    dec = scc_decompose(G)
    return [{"symbols": _word(sorted(c), G), "size": len(c), "period": p}
            for c, nt, p in zip(dec.components, dec.nontrivial, dec.periods) if nt]


def cmd_info(project, args):
    if args.shift:
        G = project.shift(args.shift)
        res = {"shift": args.shift, "symbols": list(G.labels), "arrows": len(G.arrows),
               "essential": len(essential_symbols(G)), "components": _components(G)}
        if args.dot:
            res["dot"] = G.to_dot(args.shift)
        return EXIT_OK, res, {}
    f = project.factor(args.factor)
    res = {"factor": f.name, "source": {"symbols": list(f.source.labels), "arrows": len(f.source.arrows),
                                        "components": _components(f.source)},
           "target": {"symbols": list(f.target.labels), "arrows": len(f.target.arrows)},
           "relation": [[f.source.labels[a], f.source.labels[b]] for a, b in f.relation.sorted_pairs()]}
    if args.dot:
        res["dot"] = f.source.to_dot(f.name or "X")
    return EXIT_OK, res, {}


def cmd_degree(project, args):
    f = project.factor(args.factor)
    rep = rec_degree(f.source, f.relation)
    return EXIT_OK, {"degree": rep.degree, "magic_word": _word(rep.word, f.source), "index": rep.index,
                     "search_bound": rep.search_bound}, {}


def cmd_magic(project, args):
    f = project.factor(args.factor)
    G, rel = f.source, f.relation
    rep = rec_degree(G, rel)
    rows = []
    for x in periodic_points_upto(G, args.period_bound):
        if sees_magic(x, G, rel, rep.degree):
            w, i = shortest_magic_subword(x, G, rel, rep.degree)
            rows.append({"point": _render(x, G), "magic_word": _word(w, G), "index": i})
    check = verify_thm_degree(G, rel, args.period_bound)
    res = {"degree": rep.degree, "points": rows, "theorem_check": check.passed}
    if not check.passed:
        res["counterexamples"] = [_render(x, G) for x in (check.failures + check.lower_bound_failures)[:5]]
        return EXIT_COUNTEREXAMPLE, res, {"period_bound": args.period_bound}
    return EXIT_OK, res, {"period_bound": args.period_bound}


def cmd_quotient(project, args):
    f = project.factor(args.factor)
    Q = build_quotient(f, args.order)
    comps = []
    for c in Q.components():
        p = scc_decompose(Q.graph.restrict(c)[0]).periods[0]
        comps.append({"symbols": _word(sorted(c), Q.graph), "size": len(c), "period": p})
    return EXIT_OK, {"order": args.order, "symbols": len(Q.subsets), "arrows": len(Q.graph.arrows),
                     "components": comps, "max_degree": Q.max_degree(),
                     "degree_bound": Q.degree_bound()}, {"order": args.order}


def cmd_pipeline(project, args):
    f = project.factor(args.factor)
    P, L = args.period_bound, args.loop_bound
    B = args.check_bound or P
    c = run_pipeline(f, P, L)
    reports = [verify_injectivity(c, B), verify_coverage(c, f, B), verify_disjointness(c, B), verify_levels(c, B)]
    res = {"spectrum": c.spectrum,
           "levels": [{"level": lv.index, "order": lv.order, "quotient_symbols": len(lv.quotient.subsets),
                       "magic_words": [_word(w, lv.quotient.graph) for w in lv.recoding.words],
                       "loop_graph_symbols": lv.recoding.graph.size} for lv in c.levels],
           "certificates": {r.kind: {"passed": r.passed, "checked": r.checked} for r in reports}}
    bad = [r for r in reports if not r.passed and not r.truncated]
    if bad:
        res["counterexample"] = {r.kind: r.counterexample for r in bad}
        code = EXIT_COUNTEREXAMPLE
    elif any(r.truncated for r in reports):
        res["truncation_gap"] = [_render(y, c.target) for r in reports for y in r.gap]
        code = EXIT_TRUNCATION
    else:
        code = EXIT_OK
    return code, res, {"period_bound": P, "loop_bound": L, "check_bound": B, "_provenance": c.provenance}


def cmd_census(project, args):
    G = project.shift(args.shift) if args.shift else project.factor(args.factor).target
    N = args.max_n
    counts = periodic_counts(G, N)
    res = {"fix": {str(n): str(v) for n, v in counts.fix.items()},
           "per_min": {str(n): str(v) for n, v in counts.per_min.items()}}
    code = EXIT_OK
    try:
        pd = perron(G)
    except InputError as exc:
        res["perron"] = {"error": str(exc)}
        return code, res, {"max_n": N}
    rep = lemma62_diagnostic(G, N, args.tolerance)
    fr = first_return_series(G, 0, 0, args.series_length, pd.eigenvalue)
    res["perron"] = {"eigenvalue": pd.eigenvalue, "period": pd.period, "residual": pd.residual,
                     "left": [float(v) for v in pd.left], "right": [float(v) for v in pd.right]}
    res["first_return"] = {"symbol": G.labels[0], "coefficients": [str(c) for c in fr.L],
                           "value": fr.L_value, "mean_return": fr.mean_return, "tail_estimate": fr.tail_bound}
    res["normalized_counts"] = {"ratios": {str(n): v for n, v in rep.ratios.items()},
                                "last": rep.last, "liminf_surrogate": rep.liminf_surrogate,
                                "symbol_error": rep.symbol_error, "passed": rep.passed}
    return code, res, {"max_n": N, "tolerance": args.tolerance, "series_length": args.series_length}


def cmd_verify(project, args):
    f = project.factor(args.factor)
    P = args.period_bound
    res = {}
    failed = False
    if args.suite in ("bowen", "all"):
        r = verify_bowen_property(f, P)
        res["bowen"] = {"passed": r.passed, "exact": r.exact, "tested_points": r.tested_points}
        if not r.passed:
            failed = True
            res["bowen"]["reason"] = r.reason
            res["bowen"]["counterexample"] = [_render(x, f.source) if isinstance(x, EPSequence) else str(x)
                                              for x in r.counterexample or ()]
    if args.suite in ("degree", "all"):
        c = verify_thm_degree(f.source, f.relation, P)
        res["degree"] = {"passed": c.passed, "degree": c.degree, "min_class": c.min_class}
        failed |= not c.passed
    if args.suite in ("census", "all"):
        rows = {}
        for N in range(1, 4):
            fc = fiber_census(f, build_quotient(f, N), P)
            rows[str(N)] = {"passed": fc.passed, "targets": len(fc.rows)}
            failed |= not fc.passed
        res["census"] = rows
    return (EXIT_COUNTEREXAMPLE if failed else EXIT_OK), res, {"period_bound": P}


def cmd_transitivity(project, args):
    f = project.factor(args.factor)
    rep = is_transitive(f.source, f.relation)
    res = {"transitive": rep.transitive}
    if rep.witness is not None:
        res["witness"] = [_render(x, f.source) for x in rep.witness]
    return EXIT_OK, res, {}


def cmd_canonical(project, args):
    f = project.factor(args.factor)
    can = canonical_relation(f)
    return EXIT_OK, {"pairs": [[f.source.labels[a], f.source.labels[b]] for a, b in can.sorted_pairs()],
                     "contained_in_declared": can.issubset(f.relation)}, {}


COMMANDS = {
    "info": cmd_info,
    "degree": cmd_degree,
    "magic": cmd_magic,
    "quotient": cmd_quotient,
    "pipeline": cmd_pipeline,
    "census": cmd_census,
    "verify": cmd_verify,
    "transitivity": cmd_transitivity,
    "canonical-relation": cmd_canonical,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="symdyn", description="Bowen quotients, degrees and codings of Markov shifts.")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, **kw):
        sp = sub.add_parser(name, **kw)
        if name == "verify":
            sp.add_argument("suite", choices=["bowen", "degree", "census", "all"])
        sp.add_argument("project", nargs="?", help="project file (omit with --fixture)")
        sp.add_argument("--fixture", choices=sorted(FIXTURES), help="use a built-in factor")
        sp.add_argument("--factor", help="factor or fixture name in the project")
        return sp

    sp = add("info")
    sp.add_argument("--shift")
    sp.add_argument("--dot", action="store_true", help="include a graphviz dump")
    add("degree")
    add("magic").add_argument("--period-bound", type=int, default=6)
    add("quotient").add_argument("--order", type=int, required=True)
    sp = add("pipeline")
    sp.add_argument("--period-bound", type=int, default=8)
    sp.add_argument("--loop-bound", type=int, default=16)
    sp.add_argument("--check-bound", type=int, help="period bound for the certificates (default: --period-bound)")
    sp = add("census")
    sp.add_argument("--shift")
    sp.add_argument("--max-n", type=int, default=30)
    sp.add_argument("--tolerance", type=float, default=0.02)
    sp.add_argument("--series-length", type=int, default=40)
    add("verify").add_argument("--period-bound", type=int, default=6)
    add("transitivity")
    add("canonical-relation")
    return p


def _load(args) -> ProjectFile:
    if args.fixture:
        if args.project:
            raise InputError("give either a project file or --fixture, not both")
        return parse_project(f"{HEADER}\nfixture {args.fixture} builtin={args.fixture}\n")
    if not args.project:
        raise InputError("a project file or --fixture is required")
    with open(args.project, encoding="utf-8") as fh:
        return parse_project(fh.read())


def run(argv: list[str] | None = None) -> tuple[int, dict]:
    """Parse arguments, run one command and return (exit code, report)."""
    args = build_parser().parse_args(argv)
    report = {"schema": REPORT_SCHEMA, "command": args.command}
    try:
        project = _load(args)
        report["input_digest"] = _digest(project)
        report["warnings"] = project.warnings
        if getattr(args, "factor", None) is None and not getattr(args, "shift", None):
            args.factor = project.default_factor()
        code, results, params = COMMANDS[args.command](project, args)
        report["provenance"] = params.pop("_provenance", [])
        report["parameters"] = params
        report["results"] = results
    except (CliqueCapExceeded, PipelineError) as exc:
        code = EXIT_TRUNCATION
        report["error"] = str(exc)
    except (InputError, OSError) as exc:
        code = EXIT_INPUT
        report["error"] = str(exc)
        if isinstance(exc, ProjectError):
            report["location"] = {"line": exc.line, "column": exc.column, "kind": exc.kind}
    report["status"] = {EXIT_OK: "ok", EXIT_COUNTEREXAMPLE: "counterexample",
                        EXIT_INPUT: "input-error", EXIT_TRUNCATION: "truncation"}[code]
    return code, report


def main(argv: list[str] | None = None) -> int:
    code, report = run(argv)
    sys.stdout.write(json.dumps(report, sort_keys=True, indent=2, default=str) + "\n")
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
