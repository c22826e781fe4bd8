"""Command-line front end: presets, verification, classification, algebra
tables, optimal systems, reductions, solution checks, and the full
claim-by-claim reproduction scorecard."""
from __future__ import annotations

import argparse
import json
import random
import sys
from dataclasses import dataclass, field as dfield

import sympy as sp

from . import symkernel as sk
from . import jetspace as js
from . import detsys
from . import liealg
from . import reduction as rd
from . import catalog as cat
from . import harness
from .symkernel import ZeroVerdict
from .reduction import U

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_UNDECIDED = 3


@dataclass
class Report:
    command: str
    verdicts: list = dfield(default_factory=list)       # (key, "pass"/"fail"/...)
    tables: list = dfield(default_factory=list)         # (title, headers, rows)
    notices: list = dfield(default_factory=list)        # harness.Notice
    lines: list = dfield(default_factory=list)          # free-form text payload
    exit_status: int = EXIT_OK

    def as_json(self) -> str:
        payload = {
            "command": self.command,
            "verdicts": [{"key": k, "verdict": v} for k, v in self.verdicts],
            "tables": [{"title": t, "headers": h, "rows": r} for t, h, r in self.tables],
            "notices": [{"where": n.where, "reported": n.claimed, "derived": n.derived}
                        for n in self.notices],
            "details": self.lines,
            "exit_status": self.exit_status,
        }
        return json.dumps(payload, sort_keys=True, indent=2)

    def as_text(self) -> str:
        out = [f"$ {self.command}"]
        out.extend(self.lines)
        for title, headers, rows in self.tables:
            out.append("")
            out.append(title)
            widths = [max(len(str(r[i])) for r in [headers] + rows) for i in range(len(headers))]
            fmt = "  ".join("{:>%d}" % w for w in widths)
            out.append(fmt.format(*headers))
            for r in rows:
                out.append(fmt.format(*[str(c) for c in r]))
        for k, v in self.verdicts:
            out.append(f"{v.upper():5}  {k}")
        for n in self.notices:
            out.append("note " + n.line())
        return "\n".join(out)

    def as_latex(self) -> str:
        out = []
        for title, headers, rows in self.tables:
            out.append(f"% {title}")
            out.append("\\begin{tabular}{" + "c" * len(headers) + "}")
            out.append("\\hline\\hline")
            out.append(" & ".join(_latexify(h) for h in headers) + " \\\\")
            for r in rows:
                out.append(" & ".join(_latexify(c) for c in r) + " \\\\")
            out.append("\\hline\\hline")
            out.append("\\end{tabular}")
        for k, v in self.verdicts:
            out.append(f"% {v}: {k}")
        for n in self.notices:
            out.append("% note " + n.line())
        if not out:
            return "% empty report"
        return "\n".join(out)


def _latexify(cell) -> str:
    s = str(cell)
    s = s.replace("e^eps", "e^{@E@}").replace("e^-eps", "e^{-@E@}")
    s = s.replace("eps", "@E@").replace("@E@", "\\varepsilon").replace("*", " ")
    return f"${s}$" if s not in ("", "0") else s


def _finalize(report: Report, args) -> int:
    if args.format == "json":
        print(report.as_json())
    elif args.format == "latex":
        print(report.as_latex())
    else:
        print(report.as_text())
    return report.exit_status


def _case(args) -> cat.CaseDef:
    return cat.case(args.pde, args.case)


def _alias_case_params(e: sp.Expr) -> sp.Expr:
    """Accept a1/a2 as spellings of the case parameters alpha1/alpha2."""
    return e.xreplace({sp.Symbol("a1"): cat.alpha1, sp.Symbol("a2"): cat.alpha2})


def _named_fields(equation: str, case_label: str | None):
    names = dict(zip(cat.base_names(equation), cat.base_fields(equation)))
    if case_label:
        cd = cat.case(equation, case_label)
        names[cd.generator_name] = cd.generator
        names["XA" if equation == "gze1" else "YA"] = cd.generator
    return names


def _parse_field(text: str, equation: str, case_label: str | None) -> js.VectorField:
    if ";" in text:
        return js.VectorField.parse(text)
    names = _named_fields(equation, case_label)
    expr = sk.parse(text)
    combo = None
    rest = expr
    for nm, F in names.items():
        c = expr.coeff(sp.Symbol(nm))
        if c != 0:
            if c.free_symbols & {sp.Symbol(n) for n in names}:
                raise ValueError(f"field combination is not linear: {text}")
            term = c * F
            combo = term if combo is None else combo + term
            rest = sp.expand(rest - c * sp.Symbol(nm))
    if combo is None or sk.normalize(rest) != 0:
        raise ValueError(f"cannot interpret field {text!r}; use generator names or "
                         "the 'xi_t; xi_x[; xi_y]; eta' form")
    return combo


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_verify(args) -> int:
    rng = random.Random(args.seed)
    rep = Report(command=_echo(args))
    cd = _case(args)
    pde = cd.pde()
    F = _parse_field(args.field, args.pde, args.case) if args.field else cd.generator
    res = detsys.verify_symmetry(pde, F, rng=rng)
    verdict = "pass" if res.passed else ("inconclusive" if res.inconclusive else "fail")
    rep.verdicts.append((f"verify/{args.pde}/case{args.case}/{args.field or cd.generator_name}",
                         verdict))
    rep.lines.append(f"f = {sk.render(cd.f_expr)}")
    rep.lines.append(f"g = {sk.render(cd.g_expr)}")
    rep.lines.append(f"generator: {F.render()}")
    if res.note:
        rep.lines.append(res.note)
    for mono, eq in res.failing:
        rep.lines.append(f"residual @ {sp.sstr(mono)}: {sp.sstr(sp.simplify(eq))}")
    rep.exit_status = (EXIT_OK if res.passed
                       else EXIT_UNDECIDED if res.inconclusive else EXIT_CHECK_FAILED)
    return _finalize(rep, args)


def cmd_classify(args) -> int:
    rng = random.Random(args.seed)
    rep = Report(command=_echo(args))
    f_expr = sk.parse(args.f) if args.f else sp.sympify(cat.u) ** cat.K
    f_expr = _alias_case_params(f_expr)
    branches = detsys.classify(args.pde, f_expr, rng=rng)
    rows = []
    for b in branches:
        gens = "; ".join(F.render() for F in b.extra_generators) or "-"
        rows.append([b.family, sp.sstr(b.g_expr), gens, b.algebra_label])
        rep.lines.extend(f"  [{b.family}] {n}" for n in b.notes)
    rep.tables.append((f"classification of {args.pde} with f = {sk.render(f_expr)}",
                       ["g-family", "g(u)", "extra generators", "algebra"], rows))
    return _finalize(rep, args)


def _algebra_for(args):
    cd = _case(args)
    alg = cd.algebra()
    names = cat.base_names(args.pde) + [cd.generator_name]
    return alg, names


def cmd_commutators(args) -> int:
    rep = Report(command=_echo(args))
    alg, names = _algebra_for(args)
    rows = []
    for i in range(alg.dim):
        row = [names[i]]
        for j in range(alg.dim):
            row.append(liealg.format_combo(alg.bracket_vector(i, j), names))
        rows.append(row)
    rep.tables.append((f"commutators [row, col] for {args.pde} case {args.case}",
                       ["[ , ]"] + names, rows))
    printed = (cat.PRINTED_COMMUTATORS_GZE1 if args.pde == "gze1"
               else cat.PRINTED_COMMUTATORS_GZE2)
    ref_names = cat.NAMES_1 if args.pde == "gze1" else cat.NAMES_2
    _, notices, _ = harness._compare_tables(
        [[alg.bracket_vector(i, j) for j in range(alg.dim)] for i in range(alg.dim)],
        printed, ref_names, f"tables/{args.pde}/commutators")
    rep.notices.extend(notices)
    return _finalize(rep, args)


def cmd_adjoint(args) -> int:
    rep = Report(command=_echo(args))
    alg, names = _algebra_for(args)
    table = liealg.adjoint_table(alg)
    rows = []
    for i in range(alg.dim):
        row = [names[i]]
        for j in range(alg.dim):
            row.append(liealg.format_combo(table.entry(i, j), names))
        rows.append(row)
    rep.tables.append((f"Ad(exp(eps*row)) col for {args.pde} case {args.case}",
                       ["Ad"] + names, rows))
    printed = cat.PRINTED_ADJOINT_GZE1 if args.pde == "gze1" else cat.PRINTED_ADJOINT_GZE2
    ref_names = cat.NAMES_1 if args.pde == "gze1" else cat.NAMES_2
    _, notices, _ = harness._compare_tables(table.entries, printed, ref_names,
                                            f"tables/{args.pde}/adjoint")
    rep.notices.extend(notices)
    return _finalize(rep, args)


def cmd_optimal_system(args) -> int:
    rng = random.Random(args.seed)
    rep = Report(command=_echo(args))
    alg, names = _algebra_for(args)
    key = {"gze1": "A3,3", "gze2": "3A1(s)2A1"}[args.pde]
    ops = cat.OPTIMAL_SYSTEMS[key]()
    res = liealg.optimal_system_check(alg, ops, rng=rng, trials=args.trials)
    rep.lines.append(f"claimed invariants verified: {res.invariants_ok}")
    rep.lines.append(f"normalization trials matched: {res.matched}/{res.trials}")
    rep.lines.append(f"inequivalence certificates: {len(res.separated_pairs)} pairs "
                     "separated by invariant values")
    for note in res.notes:
        rep.notices.append(harness.Notice(f"optimal-system/{key}", "claimed list complete", note))
    for ce in res.counterexamples:
        rep.lines.append(f"counterexample: {ce}")
    rep.verdicts.append((f"optimal-system/{key}", "pass" if res.passed else "fail"))
    rep.exit_status = EXIT_OK if res.passed else EXIT_CHECK_FAILED
    return _finalize(rep, args)


def cmd_reduce(args) -> int:
    rng = random.Random(args.seed)
    rep = Report(command=_echo(args))
    if args.subalgebra:
        fields, hints = cat.subalgebra(args.subalgebra, args.case or "I")
        pde = detsys.preset(args.pde)
        if args.subalgebra in ("A4", "A5"):
            cd = cat.case(args.pde, args.case or "I")
            pde = cd.pde()
        if args.subalgebra == "A5":
            binding = {cat.aA: 1, cat.bA: 2}
            fields = [js.VectorField(F.variables, tuple(c.subs(binding) for c in F.xi),
                                     F.eta.subs(binding)) for F in fields]
        pde = pde.with_ledger(*hints.get("ledger", ()))
        smap = rd.invariants_for(fields, pde.variables,
                                 inv_symbol=sp.Symbol(hints.get("inv_name", "zeta")),
                                 invariant=hints.get("invariant"), rule=hints.get("rule"),
                                 ledger=pde.ledger)
    else:
        F = _parse_field(args.field, args.pde, args.case)
        cd = cat.case(args.pde, args.case) if args.case else None
        pde = cd.pde() if cd else detsys.preset(args.pde)
        smap = rd.invariants_for(F, pde.variables, inv_symbol=sp.Symbol("xi"),
                                 ledger=pde.ledger)
    red = rd.pullback(pde, smap)
    rep.lines.append("similarity transformation: " + smap.describe())
    if red.cancelled:
        rep.lines.append("cancelled nonzero factors: "
                         + ", ".join(sp.sstr(c) for c in red.cancelled))
    rep.lines.append("reduced equation: " + red.describe())
    try:
        integrated = rd.integrate_twice(red)
        rep.lines.append("twice-integrated form: " + integrated.describe())
    except ValueError:
        pass
    if args.subalgebra == "A3":
        rep.lines.append("solved form: g(u) = u1*ln(x/t) + u0")
        rep.notices.append(harness.Notice(
            "reduction/gze2/A3", "g(u) = u1*(x/t) + u0",
            "g(u) = u1*ln(x/t) + u0 (the printed form solves only with u1 = 0)"))
    if args.subalgebra == "A5":
        rep.lines.append("no closed-form solution is claimed for this reduction")
    return _finalize(rep, args)


def cmd_check_solution(args) -> int:
    rng = random.Random(args.seed)
    rep = Report(command=_echo(args))
    cd = _case(args)
    pde = cd.pde()
    rule = _alias_case_params(sk.parse(args.solution))
    params = tuple(sp.Symbol(p.strip()) for p in (args.params or "u0,U0").split(",") if p.strip())
    verdict = rd.check_solution(pde, rule, params=params, ledger=pde.ledger, rng=rng)
    rep.lines.append(f"candidate u = {sp.sstr(rule)}")
    rep.lines.append(verdict.describe())
    for c in verdict.constraints:
        rep.lines.append(f"  constraint: {sp.sstr(c)} = 0")
    if verdict.witness:
        rep.lines.append(f"  witness: {verdict.witness}")
    kind = verdict.kind.name.lower()
    rep.verdicts.append((f"solution/{args.pde}/case{args.case}", kind))
    rep.exit_status = EXIT_OK if verdict.kind is not rd.VerdictKind.NONZERO else EXIT_CHECK_FAILED
    return _finalize(rep, args)


def cmd_reproduce_paper(args) -> int:
    card = harness.run_scorecard(seed=args.seed, sections=args.sections)
    rep = Report(command=_echo(args))
    for r in card.results:
        rep.verdicts.append((r.key, "pass" if r.passed else "fail"))
        if r.detail:
            rep.lines.append(f"{r.key}: {r.detail}")
        rep.notices.extend(r.notices)
    rep.exit_status = EXIT_OK if card.passed else EXIT_CHECK_FAILED
    return _finalize(rep, args)


def _echo(args) -> str:
    return " ".join(sys.argv[:1] and ["zoomsym"] + sys.argv[1:] or ["zoomsym"])


def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    shared.add_argument("--samples", type=int, default=16,
                        help="zero-test sample count (default 16)")
    shared.add_argument("--tol", type=float, default=1e-9,
                        help="numeric zero-test tolerance (default 1e-9)")
    shared.add_argument("--format", choices=("text", "json", "latex"), default="text")
    p = argparse.ArgumentParser(
        prog="zoomsym",
        description="Lie point symmetry analysis of the generalized Zoomeron equations")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, **kw):
        return sub.add_parser(name, parents=[shared], **kw)

    def common(q, case_required=False):
        q.add_argument("--pde", choices=("gze1", "gze2"), required=True)
        q.add_argument("--case", required=case_required,
                       help="A-D for gze1, I-IV for gze2")

    q = add("verify", help="verify a symmetry generator on a classified case")
    common(q, case_required=True)
    q.add_argument("--field", help="generator name, combination (X1 + a*X2), or "
                                   "'xi_t; xi_x[; xi_y]; eta'")
    q.set_defaults(fn=cmd_verify)

    q = add("classify", help="classify g-families admitting extra symmetries")
    q.add_argument("--pde", choices=("gze1", "gze2"), required=True)
    q.add_argument("--f", help="shape function f(u), e.g. 'u^K' or 'exp(K*u)'")
    q.set_defaults(fn=cmd_classify)

    q = add("commutators", help="commutator table for a case algebra")
    common(q, case_required=True)
    q.set_defaults(fn=cmd_commutators)

    q = add("adjoint", help="adjoint representation table")
    common(q, case_required=True)
    q.set_defaults(fn=cmd_adjoint)

    q = add("optimal-system", help="check the claimed one-dimensional optimal system")
    common(q, case_required=True)
    q.add_argument("--trials", type=int, default=120)
    q.set_defaults(fn=cmd_optimal_system)

    q = add("reduce", help="similarity reduction by a generator or subalgebra")
    q.add_argument("--pde", choices=("gze1", "gze2"), required=True)
    q.add_argument("--case", help="bind the case shape functions")
    q.add_argument("--field", help="generator or combination to reduce by")
    q.add_argument("--subalgebra", choices=cat.SUBALGEBRAS,
                   help="two-dimensional subalgebra A1..A5 (gze2)")
    q.set_defaults(fn=cmd_reduce)

    q = add("check-solution", help="test a closed-form solution candidate")
    common(q, case_required=True)
    q.add_argument("--solution", required=True, help="u as an expression in t, x[, y]")
    q.add_argument("--params", help="comma-separated free parameters (default u0,U0)")
    q.set_defaults(fn=cmd_check_solution)

    q = add("reproduce-paper",
            help="recompute every published claim and emit the scorecard")
    q.add_argument("--sections", nargs="*", choices=tuple(harness.SECTIONS),
                   help="restrict to specific scorecard sections")
    q.set_defaults(fn=cmd_reproduce_paper)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    try:
        return args.fn(args)
    except (ValueError, KeyError, rd.UnsupportedFieldShape, rd.IncompleteInvariants) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
