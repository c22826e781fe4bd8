"""Claim-by-claim reproduction harness.

Every published result (symmetry classification, algebra tables, optimal
systems, reductions, closed-form solutions) is recomputed from scratch
and compared against the reference data in the catalog; disagreements
become discrepancy notices.  The same checks back the acceptance test
suite and the `reproduce-paper` CLI command.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field as dfield

import sympy as sp
from sympy import Rational, Symbol

from . import symkernel as sk
from . import jetspace as js
from . import detsys
from . import liealg
from . import reduction as rd
from . import catalog as cat
from .symkernel import ZeroVerdict, u, t, x, y, f, g
from .jetspace import field
from .reduction import U, u0_sym, u1_sym


@dataclass
class Notice:
    where: str
    claimed: str
    derived: str

    def line(self) -> str:
        return f"[{self.where}] reported: {self.claimed} | derived: {self.derived}"


@dataclass
class CheckResult:
    key: str
    passed: bool
    detail: str = ""
    notices: list[Notice] = dfield(default_factory=list)

    def line(self) -> str:
        s = "PASS" if self.passed else "FAIL"
        out = f"{s:5} {self.key}" + (f" :: {self.detail}" if self.detail else "")
        for n in self.notices:
            out += "\n        note " + n.line()
        return out


@dataclass
class Scorecard:
    results: list[CheckResult] = dfield(default_factory=list)

    def add(self, r: CheckResult):
        self.results.append(r)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    @property
    def notices(self) -> list[Notice]:
        return [n for r in self.results for n in r.notices]

    def section(self, prefix: str) -> list[CheckResult]:
        return [r for r in self.results if r.key.startswith(prefix)]


def _vd(report) -> str:
    bad = [v for v in report.verdicts if v is not ZeroVerdict.IDENTICALLY_ZERO]
    return f"{len(report.verdicts)} determining equations, {len(bad)} not identically zero"


# ---------------------------------------------------------------------------
# 1. symmetry verification
# ---------------------------------------------------------------------------

def check_symmetry_verification(rng: random.Random) -> list[CheckResult]:
    out = []
    for equation in ("gze1", "gze2"):
        pde = detsys.preset(equation)  # abstract nonconstant f, g
        for name, F in zip(cat.base_names(equation), cat.base_fields(equation)):
            rep = detsys.verify_symmetry(pde, F, rng=rng)
            out.append(CheckResult(f"verify/{equation}/generic/{name}", rep.passed, _vd(rep)))
    for (equation, label), cd in sorted(cat.CASES.items()):
        pde = cd.pde()
        ok = True
        details = []
        for name, F in zip(cat.base_names(equation), cat.base_fields(equation)):
            rep = detsys.verify_symmetry(pde, F, rng=rng)
            ok &= rep.passed
            if not rep.passed:
                details.append(f"{name} failed")
        rep = detsys.verify_symmetry(pde, cd.generator, rng=rng)
        ok &= rep.passed
        notices = []
        if cd.generator_mismatch():
            printed = detsys.verify_symmetry(pde, cd.printed_generator, rng=rng)
            ok &= not printed.passed  # the printed form must genuinely fail
            notices.append(Notice(
                f"classification/{equation}/case{label}/{cd.generator_name}",
                f"generator {cd.printed_generator.render()}",
                f"generator {cd.generator.render()} (printed form fails verification)"))
        out.append(CheckResult(f"verify/{equation}/case{label}", ok,
                               "; ".join(details) or _vd(rep), notices))
    return out


# ---------------------------------------------------------------------------
# 2. classification
# ---------------------------------------------------------------------------

def _pure_y_scaling(extras):
    for F in extras:
        if all(sk.normalize(F.coeff(v)) == 0 for v in ("t", "x")):
            return F
    return None


def _tx_scaling(extras):
    for F in extras:
        if sk.normalize(F.coeff("t") - t) == 0 and sk.normalize(F.coeff("x") - x) == 0:
            return F
    return None


def check_classification(rng: random.Random) -> list[CheckResult]:
    out = []
    m = Symbol("m")
    jobs = [
        ("gze1", u ** cat.K, "power", "A", -2 / cat.alpha1 - (cat.K - 1), cat.alpha1),
        ("gze1", u ** cat.K, "log", "B", None, 1 / (1 - cat.K)),
        ("gze1", sp.exp(cat.K * u), "exponential", "C", -(cat.K + 2 / cat.alpha2), cat.alpha2),
        ("gze1", sp.exp(cat.K * u), "linear", "D", None, -1 / cat.K),
        ("gze2", u ** cat.K, "power", "I", -1 / cat.alpha1 - (cat.K - 1), -cat.alpha1),
        ("gze2", u ** cat.K, "log", "II", None, 1 / (1 - cat.K)),
        ("gze2", sp.exp(cat.K * u), "exponential", "III", -(cat.K + 2 / cat.alpha2), cat.alpha2),
        ("gze2", sp.exp(cat.K * u), "linear", "IV", None, -1 / cat.K),
    ]
    branch_cache = {}
    for equation, fe, family, label, printed_exp, printed_weight in jobs:
        key = (equation, sp.srepr(fe))
        if key not in branch_cache:
            branch_cache[key] = detsys.classify(equation, fe, rng=rng)
        branches = branch_cache[key]
        by_family = {b.family: b for b in branches}

        generic = by_family["generic"]
        expected_extras = 0 if equation == "gze1" else 1
        base_ok = (len(generic.extra_generators) == expected_extras and
                   generic.algebra_label == ("2A1" if equation == "gze1" else "A4,5^{ab}"))

        br = by_family[family]
        extras = br.extra_generators
        scal = _pure_y_scaling(extras) if equation == "gze2" else _tx_scaling(extras)
        ok = base_ok and scal is not None
        notices = []
        detail = f"branch `{family}`: {len(extras)} extra generator(s), algebra {br.algebra_label}"
        if scal is not None:
            # normalize the scaling part to xi = t,x (or y) and read the eta weight
            div = scal.coeff("y") / y if equation == "gze2" else scal.coeff("t") / t
            weight = sk.normalize(sp.cancel(scal.eta / div))
            weight_coeff = sp.cancel(weight / u) if family in ("power", "log") else weight
            if family in ("power", "exponential"):
                # derived family exponent as a function of the printed weight
                sols = sp.solve(sp.Eq(weight_coeff, printed_weight), m)
                derived_exp = sp.cancel(sols[0]) if sols else None
                if derived_exp is None:
                    ok = False
                elif printed_exp is not None:
                    agree = sp.cancel(sp.together(derived_exp - printed_exp)) == 0
                    if not agree:
                        notices.append(Notice(
                            f"classification/{equation}/case{label}/g-shape",
                            f"exponent {sp.sstr(printed_exp)}",
                            f"exponent {sp.sstr(derived_exp)} for the printed generator"))
                    detail += f"; derived exponent {sp.sstr(derived_exp)}"
            else:
                agree = sp.cancel(sp.together(weight_coeff - printed_weight)) == 0
                if not agree:
                    notices.append(Notice(
                        f"classification/{equation}/case{label}/weight",
                        f"dependent coefficient {sp.sstr(printed_weight)}",
                        f"dependent coefficient {sp.sstr(weight_coeff)}"))
                detail += f"; derived weight {sp.sstr(weight_coeff)}"
            expected_label = "A3,3" if equation == "gze1" else "3A1(s)2A1"
            ok &= br.algebra_label == expected_label
        out.append(CheckResult(f"classify/{equation}/{family}->case{label}", ok,
                               detail, notices))
    # the no-extra branches: exponential g on a power f and vice versa
    ok = (len(branch_cache[("gze1", sp.srepr(u ** cat.K))][3].extra_generators) == 0
          and len(branch_cache[("gze1", sp.srepr(sp.exp(cat.K * u)))][1].extra_generators) == 0)
    out.append(CheckResult("classify/gze1/cross-family-empty", ok,
                           "power f admits no exponential-g scaling and conversely"))
    return out


# ---------------------------------------------------------------------------
# 3. algebra tables
# ---------------------------------------------------------------------------

def _compare_tables(computed, printed, names, where) -> tuple[bool, list[Notice], set]:
    notices = []
    cells = set()
    n = len(names)
    for i in range(n):
        for j in range(n):
            got = tuple(sp.expand(sp.nsimplify(c)) for c in computed[i][j])
            want = tuple(sp.expand(c) for c in printed[i][j])
            same = all(sp.simplify(a - b) == 0 for a, b in zip(got, want))
            if not same:
                cells.add((names[i], names[j]))
                notices.append(Notice(
                    f"{where}/({names[i]},{names[j]})",
                    liealg.format_combo(want, names),
                    liealg.format_combo(got, names)))
    return True, notices, cells


EXPECTED_COMMUTATOR_MISMATCHES = {
    "gze1": set(),
    "gze2": {("Y3", "Y4"), ("Y4", "Y3"), ("Y3", "YA"), ("YA", "Y3")},
}
EXPECTED_ADJOINT_MISMATCHES = {
    "gze1": set(),
    "gze2": {("Y3", "Y1"), ("Y3", "Y2"), ("Y3", "Y4"), ("Y3", "YA"), ("Y4", "Y3")},
}


def check_tables(rng: random.Random) -> list[CheckResult]:
    out = []
    for equation, case_label, names, printed_comm, printed_adj in (
            ("gze1", "A", cat.NAMES_1, cat.PRINTED_COMMUTATORS_GZE1, cat.PRINTED_ADJOINT_GZE1),
            ("gze2", "I", cat.NAMES_2, cat.PRINTED_COMMUTATORS_GZE2, cat.PRINTED_ADJOINT_GZE2)):
        alg = cat.case(equation, case_label).algebra()
        computed = [[alg.bracket_vector(i, j) for j in range(alg.dim)] for i in range(alg.dim)]
        _, notices, cells = _compare_tables(computed, printed_comm, names,
                                            f"tables/{equation}/commutators")
        ok = cells == EXPECTED_COMMUTATOR_MISMATCHES[equation]
        out.append(CheckResult(
            f"tables/{equation}/commutators", ok,
            f"{len(cells)} cell(s) disagree with the printed table", notices))

        table = liealg.adjoint_table(alg)
        _, notices, cells = _compare_tables(table.entries, printed_adj, names,
                                            f"tables/{equation}/adjoint")
        ok = cells == EXPECTED_ADJOINT_MISMATCHES[equation]
        out.append(CheckResult(
            f"tables/{equation}/adjoint", ok,
            f"{len(cells)} cell(s) disagree with the printed table", notices))

        # the commutator tables must not depend on which case realizes the algebra
        others = [lab for (eq, lab) in cat.CASES if eq == equation and lab != case_label]
        stable = True
        for lab in others:
            alg2 = cat.case(equation, lab).algebra()
            for i in range(alg.dim):
                for j in range(alg.dim):
                    if any(sp.simplify(a - b) != 0 for a, b in
                           zip(alg.bracket_vector(i, j), alg2.bracket_vector(i, j))):
                        stable = False
        out.append(CheckResult(f"tables/{equation}/case-independence", stable,
                               f"same structure constants across cases {case_label},{','.join(others)}"))
    return out


# ---------------------------------------------------------------------------
# 4. algebra identification
# ---------------------------------------------------------------------------

def check_identification(rng: random.Random) -> list[CheckResult]:
    out = []
    two = liealg.structure_constants(cat.base_fields("gze1"), cat.base_names("gze1"))
    out.append(CheckResult("identify/gze1/generic", liealg.identify(two).label == "2A1",
                           f"label {liealg.identify(two).label}"))
    for label in ("A", "B", "C", "D"):
        alg = cat.case("gze1", label).algebra()
        ident = liealg.identify(alg)
        out.append(CheckResult(f"identify/gze1/case{label}", ident.label == "A3,3",
                               f"label {ident.label}"))
    four = liealg.structure_constants(cat.base_fields("gze2"), cat.base_names("gze2"))
    ident4 = liealg.identify(four)
    okw = ident4.label == "A4,5^{ab}" and tuple(ident4.weights) == (1, 1, -1)
    out.append(CheckResult("identify/gze2/generic", okw,
                           f"label {ident4.label}, weights (1, a, b) = {tuple(ident4.weights)}",
                           [Notice("algebra/A4,5-parameters", "a, b unstated",
                                   f"(a, b) = ({ident4.weights[1]}, {ident4.weights[2]})")]))
    for label in ("I", "II", "III", "IV"):
        alg = cat.case("gze2", label).algebra()
        ident = liealg.identify(alg)
        out.append(CheckResult(f"identify/gze2/case{label}", ident.label == "3A1(s)2A1",
                               f"label {ident.label}"))
    return out


# ---------------------------------------------------------------------------
# 5. adjoint invariants and optimal systems
# ---------------------------------------------------------------------------

def check_optimal_systems(rng: random.Random, trials: int = 120) -> list[CheckResult]:
    out = []
    algebras = {
        "2A1": liealg.structure_constants(cat.base_fields("gze1"), cat.base_names("gze1")),
        "A3,3": cat.case("gze1", "A").algebra(),
        "A4,5": liealg.structure_constants(cat.base_fields("gze2"), cat.base_names("gze2")),
        "3A1(s)2A1": cat.case("gze2", "I").algebra(),
    }
    for name, alg in algebras.items():
        ops = cat.OPTIMAL_SYSTEMS[name]()
        rep = liealg.optimal_system_check(alg, ops, rng=rng, trials=trials)
        notices = [Notice(f"optimal-system/{name}", "claimed list complete", n)
                   for n in rep.notes]
        notices.append(Notice("adjoint-invariants/index-convention",
                              "derivative index written as the row index",
                              "standard convention (derivative on the bracket-result index) used"))
        out.append(CheckResult(
            f"optimal-system/{name}", rep.passed,
            f"invariants ok: {rep.invariants_ok}; normalization {rep.matched}/{rep.trials}; "
            f"{len(rep.counterexamples)} counterexample(s)",
            notices if name == "3A1(s)2A1" else notices[:0] if not rep.notes else notices))
    return out


# ---------------------------------------------------------------------------
# 6. reductions
# ---------------------------------------------------------------------------

def _D2(e, z):
    return rd._total_z_derivative(rd._total_z_derivative(e, z), z)


def check_reductions(rng: random.Random) -> list[CheckResult]:
    out = []
    a = Symbol("a")
    xi = rd.xi_sym

    # travelling wave on gze1, abstract f and g
    pde = detsys.preset("gze1").with_ledger(a, a ** 2 - 1)
    smap = rd.invariants_for(field(cat.V1, t=1, x=a), cat.V1, inv_symbol=xi)
    red = rd.pullback(pde, smap).scaled(-a, pde.ledger)
    recon = sk.is_zero(rd.reconstruction_defect(pde, red), rng=rng)
    red2 = rd.integrate_twice(red)
    target = (a ** 2 - 1) * U[2] / f(U[0]) + 2 * g(U[0]) - u1_sym * xi - u0_sym
    m1 = sk.is_zero(sp.together(red2.residual - target), rng=rng)
    gh = g(U[0]) / (a ** 2 - 1)
    fd1 = U[2] + (2 * gh - u1_sym * xi / (a ** 2 - 1) - u0_sym / (a ** 2 - 1)) * f(U[0])
    m2 = sk.is_zero(sp.together(red2.residual - (a ** 2 - 1) * fd1 / f(U[0])), rng=rng)
    ok = all(v is ZeroVerdict.IDENTICALLY_ZERO for v in (recon, m1, m2))
    out.append(CheckResult(
        "reduce/gze1/travelling-wave", ok,
        "twice-integrated form matches the quoted second-order equation after "
        "rescaling by (a^2 - 1) and relabeling the constants"))

    # a^2 = 1 branch: g(U) = u1 xi + u0
    pde1 = detsys.preset("gze1")
    smap1 = rd.invariants_for(field(cat.V1, t=1, x=1), cat.V1, inv_symbol=xi)
    red1 = rd.integrate_twice(rd.pullback(pde1, smap1).scaled(-2, pde1.ledger))
    ok = sk.is_zero(red1.residual - (g(U[0]) - u1_sym * xi - u0_sym), rng=rng) \
        is ZeroVerdict.IDENTICALLY_ZERO
    out.append(CheckResult("reduce/gze1/travelling-wave-unit-speed", ok,
                           f"solved form: {rd.render_ode(red1.residual)} = 0"))

    # A1 travelling wave on gze2
    fields, hints = cat.subalgebra("A1")
    pde2 = detsys.preset("gze2").with_ledger(*hints["ledger"])
    smapA1 = rd.invariants_for(fields, cat.V2, inv_symbol=xi, ledger=pde2.ledger)
    P = cat.a2 * cat.b3 - cat.a3 * cat.b2
    Q = cat.a3 * cat.b1 - cat.a1 * cat.b3
    D = cat.a1 * cat.b2 - cat.a2 * cat.b1
    inv_ok = sk.is_zero(sp.together(smapA1.invariant - (P * t + Q * x + D * y) / D),
                        rng=rng) is ZeroVerdict.IDENTICALLY_ZERO
    redA1 = rd.pullback(pde2, smapA1)
    recon = sk.is_zero(rd.reconstruction_defect(pde2, redA1), rng=rng)
    # printed reduced equation, as a cleared polynomial form
    printed = ((P ** 2 - Q ** 2) * (-Q) * _D2(U[2] / f(U[0]), xi)
               + 2 * P * (-Q) * _D2(g(U[0]), xi))
    printed = sp.together(printed * f(U[0]) ** 3)
    # normalize the subalgebra basis so that a1*b2 - a2*b1 = 1, then compare
    b2_slice = (1 + cat.a2 * cat.b1) / cat.a1
    lead = sp.expand(redA1.residual).coeff(U[4]) or sp.Integer(1)
    plead = sp.expand(sp.fraction(printed)[0]).coeff(U[4])
    diff = sp.together(redA1.residual * plead - sp.fraction(printed)[0] * lead)
    match_slice = sk.is_zero(sp.fraction(sp.cancel(diff.subs(cat.b2, b2_slice)))[0],
                             rng=rng) is ZeroVerdict.IDENTICALLY_ZERO
    generic_match = sk.is_zero(sp.fraction(sp.cancel(diff))[0], rng=rng)
    notices = []
    if generic_match is not ZeroVerdict.IDENTICALLY_ZERO:
        notices.append(Notice(
            "reduction/gze2/A1",
            "reduced equation with coefficient 2*(a2*b3-a3*b2)*(a1*b3-b1*a3) on the g-term",
            "that coefficient needs the extra factor a1*b2-a2*b1 (the printed form is "
            "recovered on the normalized basis a1*b2-a2*b1 = 1)"))
    ok = inv_ok and match_slice and recon is ZeroVerdict.IDENTICALLY_ZERO
    out.append(CheckResult("reduce/gze2/A1", ok,
                           "travelling-wave invariant and reduced equation recovered "
                           "(printed form matches on the unimodular basis slice)", notices))

    # A2 on gze2: (zeta U')' form
    fields, hints = cat.subalgebra("A2")
    z = rd.zeta_sym
    pde2 = detsys.preset("gze2").with_ledger(*hints["ledger"])
    smapA2 = rd.invariants_for(fields, cat.V2, inv_symbol=z,
                               invariant=hints["invariant"], rule=hints["rule"],
                               ledger=pde2.ledger)
    redA2 = rd.pullback(pde2, smapA2).scaled(-cat.a1 * z ** 2, pde2.ledger)
    recon = sk.is_zero(rd.reconstruction_defect(pde2,
                                                rd.pullback(pde2, smapA2)), rng=rng)
    redA2i = rd.integrate_twice(redA2)
    tgt = ((cat.a2 ** 2 - cat.a1 ** 2) * (U[1] + z * U[2]) / f(U[0])
           + 2 * cat.a2 * g(U[0]) - u1_sym * z - u0_sym)
    m_int = sk.is_zero(sp.together(redA2i.residual - tgt), rng=rng)
    # printed integrated form with the absorbed constants
    ghat = cat.a2 * g(U[0]) / (cat.a2 ** 2 - cat.a1 ** 2)
    printed_int = ((U[1] + z * U[2])
                   + (2 * ghat - (u1_sym * z + u0_sym) / (cat.a2 ** 2 - cat.a1 ** 2)) * f(U[0]))
    m_printed = sk.is_zero(sp.together(
        redA2i.residual - (cat.a2 ** 2 - cat.a1 ** 2) * printed_int / f(U[0])), rng=rng)
    ok = all(v is ZeroVerdict.IDENTICALLY_ZERO for v in (recon, m_int, m_printed))
    out.append(CheckResult(
        "reduce/gze2/A2", ok,
        "zeta = (a2*t - a1*x)*y; integrated form (zeta*U')' + (2*g~ + u1*zeta + u0)*f = 0",
        [Notice("reduction/gze2/A2",
                "prefactor (a2 - a1) on the fourth-order reduced equation",
                "derived prefactor (a2^2 - a1^2), with a2 multiplying the g-term; "
                "the printed integrated form is recovered after absorbing "
                "(a2^2 - a1^2)/a2 into the free shape constant")]))

    # A3 on gze2: g(u) solved in the similarity variable
    fields, hints = cat.subalgebra("A3")
    sig = rd.sigma_sym
    pde2 = detsys.preset("gze2")
    smapA3 = rd.invariants_for(fields, cat.V2, inv_symbol=sig, ledger=pde2.ledger)
    redA3 = rd.pullback(pde2, smapA3)
    redA3i = rd.integrate_once(redA3.scaled(-2, pde2.ledger), u1_sym)
    # solved form: sigma * d/dsigma g(U) = u1  =>  g(U) = u1*ln(sigma) + u0
    w = Symbol("w")
    lhs = redA3i.residual.subs({sp.Derivative(g(U[0]), U[0]) * U[1]: w})
    derived_form = u1_sym * sp.log(sig) + u0_sym
    # verify by substitution on a bound instance of case I
    g1v = cat.g1
    pdeIb = detsys.preset("gze2", f=u ** 3, g=g1v * u ** (-3)).with_ledger(g1v)
    smapA3b = rd.invariants_for(fields, cat.V2, inv_symbol=sig, ledger=pdeIb.ledger)
    redA3b = rd.pullback(pdeIb, smapA3b)
    sol_derived = (g1v / (u1_sym * sp.log(sig) + u0_sym)) ** Rational(1, 3)
    v_derived = rd.check_solution(redA3b, sol_derived, params=(u1_sym, u0_sym),
                                  ledger=pdeIb.ledger, rng=rng)
    sol_printed = (g1v / (u1_sym * sig + u0_sym)) ** Rational(1, 3)
    v_printed = rd.check_solution(redA3b, sol_printed, params=(u1_sym, u0_sym),
                                  ledger=pdeIb.ledger, rng=rng)
    printed_fails_generically = v_printed.kind is not rd.VerdictKind.ZERO_IDENTICALLY
    u1_only = (v_printed.kind is rd.VerdictKind.ZERO_GIVEN_CONSTRAINTS
               and v_printed.witness is not None
               and sp.sympify(v_printed.witness.get(u1_sym, 1)) == 0)
    ok = (v_derived.kind is rd.VerdictKind.ZERO_IDENTICALLY
          and printed_fails_generically and u1_only)
    out.append(CheckResult(
        "reduce/gze2/A3", ok,
        f"derived solved form g(u) = {sp.sstr(derived_form)}",
        [Notice("reduction/gze2/A3",
                "g(u) = u1*(x/t) + u0",
                "g(u) = u1*ln(x/t) + u0; the printed form solves only with u1 = 0")]))

    # A4 similarity transformations (engine-derived) for all four cases
    for label, expected_rule in (
            ("I", U[0] * (t * y) ** cat.alpha1),
            ("II", U[0] * (t * y) ** (1 / (1 - cat.K))),
            ("III", U[0] + cat.alpha2 / 2 * sp.log(t * y)),
            ("IV", U[0] - sp.log(t * y) / cat.K)):
        fields, hints = cat.subalgebra("A4", label)
        cd = cat.case("gze2", label)
        pdeC = cd.pde()
        smap4 = rd.invariants_for(fields, cat.V2, inv_symbol=rd.sigma_sym,
                                  ledger=pdeC.ledger)
        rule = sp.expand_log(smap4.rule.subs(rd.sigma_sym, x / t), force=True)
        expect = rd._power_normal(sp.expand_log(expected_rule.subs(rd.sigma_sym, x / t),
                                                force=True))
        same = sk.is_zero(sp.together(rd._power_normal(rule) - expect), rng=rng)
        notices = []
        if label in ("III", "IV"):
            printed_shift = cat.alpha2 if label == "III" else 1 / (1 - cat.K)
            notices.append(Notice(
                f"reduction/gze2/A4/case{label}",
                f"similarity shift {sp.sstr(printed_shift)}*ln(t*y)",
                f"shift {sp.sstr(cd.generator.eta)}*ln(t*y) from the verified generator"))
        out.append(CheckResult(f"reduce/gze2/A4/case{label}/map",
                               same is ZeroVerdict.IDENTICALLY_ZERO,
                               f"u = {sp.sstr(smap4.rule)} with sigma = x/t", notices))

    # A5 emits a reduced equation (no solution claim)
    g1v = cat.g1
    pdeI2 = detsys.preset("gze2", f=u ** 2, g=g1v / u ** 2)
    fields, hints = cat.subalgebra("A5")
    binding = {cat.aA: 1, cat.bA: 2, cat.K: 2, cat.alpha1: 1}
    fields = [js.VectorField(F.variables,
                             tuple(c.subs(binding) for c in F.xi),
                             F.eta.subs(binding)) for F in fields]
    led = pdeI2.ledger.with_nonzero(cat.a1, cat.b1, g1v,
                                    2 * cat.a1 - cat.b1, 2 * cat.a2 - cat.b2,
                                    cat.a2 * cat.b1 - cat.a1 * cat.b2)
    pdeI2 = detsys.Pde(pdeI2.name, pdeI2.variables, pdeI2.residual, pdeI2.leading,
                       led, pdeI2.f_expr, pdeI2.g_expr, pdeI2.cleared_denominator)
    smapA5 = rd.invariants_for(fields, cat.V2, inv_symbol=rd.zeta_sym, ledger=led)
    redA5 = rd.pullback(pdeI2, smapA5)
    recon5 = sk.is_zero(rd.reconstruction_defect(pdeI2, redA5), rng=rng)
    ok = redA5.order >= 2 and recon5 is not ZeroVerdict.NONZERO
    out.append(CheckResult(
        "reduce/gze2/A5", ok,
        f"reduced equation of order {redA5.order} emitted; no closed-form solution sought"))
    return out


# ---------------------------------------------------------------------------
# 7. solution catalog
# ---------------------------------------------------------------------------

def check_solutions(rng: random.Random) -> list[CheckResult]:
    out = []
    u0c, U0c = sp.symbols("u0 U0")
    K, al1, al2, g1v = cat.K, cat.alpha1, cat.alpha2, cat.g1

    # scaling similarity solutions on gze1 (cases A and B)
    cdA = cat.case("gze1", "A")
    pdeA = cdA.pde()
    smap3 = rd.invariants_for(cdA.generator, cat.V1, inv_symbol=rd.sigma_sym)
    red3 = rd.pullback(pdeA, smap3)
    v_red = rd.check_solution(red3, U0c * rd.sigma_sym ** al1, params=(U0c,),
                              ledger=pdeA.ledger, rng=rng)
    v_comp = rd.check_solution(pdeA, U0c * x ** al1, params=(U0c,),
                               ledger=pdeA.ledger, rng=rng)
    v_printed = rd.check_solution(pdeA, u0c * x ** al1 * t ** (2 * al1),
                                  params=(u0c,), ledger=pdeA.ledger, rng=rng)
    ok = (v_red.kind is rd.VerdictKind.ZERO_IDENTICALLY
          and v_comp.kind is rd.VerdictKind.ZERO_IDENTICALLY
          and v_printed.kind is rd.VerdictKind.NONZERO)
    out.append(CheckResult(
        "solutions/gze1/caseA-scaling", ok,
        "U = U0*sigma^alpha1 solves the reduced equation; its composition "
        "u = U0*x^alpha1 solves the PDE",
        [Notice("solutions/gze1/caseA",
                "u = u0*x^alpha1*t^(2*alpha1)",
                "that form leaves a nonzero residual; the invariant composition "
                "u = U0*x^alpha1 (time-independent) solves")]))

    cdB = cat.case("gze1", "B")
    pdeB = cdB.pde()
    v_printedB = rd.check_solution(pdeB, u0c * x ** (1 / (1 - K)) * t ** (2 / (1 - K)),
                                   params=(u0c,), ledger=pdeB.ledger, rng=rng)
    v_compB = rd.check_solution(pdeB, u0c * x ** (1 / (1 - K)), params=(u0c,),
                                ledger=pdeB.ledger, rng=rng)
    okB = (v_printedB.kind is rd.VerdictKind.ZERO_IDENTICALLY
           and v_compB.kind is rd.VerdictKind.ZERO_IDENTICALLY)
    out.append(CheckResult(
        "solutions/gze1/caseB-scaling", okB,
        "printed u0*x^(1/(1-K))*t^(2/(1-K)) solves identically (and so does the "
        "time-independent composition)",
        [Notice("solutions/gze1/caseB",
                "solution follows from U(sigma) = U0*sigma^(1/(1-K))",
                "the printed composition is not invariant under the verified "
                "generator, yet solves the equation")]))

    # static log solutions (cases C and D)
    cdC = cat.case("gze1", "C")
    vC = rd.check_solution(cdC.pde(), al2 * sp.log(U0c * x), params=(U0c,),
                           ledger=cdC.pde().ledger, rng=rng)
    out.append(CheckResult("solutions/gze1/caseC-static",
                           vC.kind is rd.VerdictKind.ZERO_IDENTICALLY,
                           "u = alpha2*ln(U0*x) is a static solution"))
    cdD = cat.case("gze1", "D")
    vD = rd.check_solution(cdD.pde(), -sp.log(U0c * x) / K, params=(U0c,),
                           ledger=cdD.pde().ledger, rng=rng)
    out.append(CheckResult("solutions/gze1/caseD-static",
                           vD.kind is rd.VerdictKind.ZERO_IDENTICALLY,
                           "u = -(1/K)*ln(U0*x) is a static solution"))

    # A2 closed forms on gze2
    zexpr = (cat.a2 * t - cat.a1 * x) * y
    cdI = cat.case("gze2", "I")
    pdeI = cdI.pde().with_ledger(cat.a1, cat.a2, cat.a2 ** 2 - cat.a1 ** 2)
    vI = rd.check_solution(pdeI, u0c * zexpr ** al1, params=(u0c, g1v),
                           ledger=pdeI.ledger, rng=rng)
    okI = (vI.kind is rd.VerdictKind.ZERO_GIVEN_CONSTRAINTS and vI.witness)
    out.append(CheckResult(
        "solutions/gze2/A2-caseI", bool(okI),
        "u = u0*zeta^alpha1 solves under a balance constraint tying u0 to the "
        "shape constant g1",
        [Notice("solutions/gze2/A2-caseI", "u0 an integration constant",
                "u0 is pinned by the shape constant: "
                + (sp.sstr(vI.witness) if vI.witness else "unsatisfiable"))]))

    cdIII = cat.case("gze2", "III")
    pdeIII = cdIII.pde().with_ledger(cat.a1, cat.a2, cat.a2 ** 2 - cat.a1 ** 2)
    vIII = rd.check_solution(pdeIII, u0c * sp.log(zexpr), params=(u0c,),
                             ledger=pdeIII.ledger, rng=rng)
    expected_u0 = -al2 / (al2 * K + 2)
    okIII = (vIII.kind is rd.VerdictKind.ZERO_GIVEN_CONSTRAINTS
             and vIII.witness is not None
             and sp.simplify(vIII.witness.get(u0c, sp.nan) - expected_u0) == 0)
    out.append(CheckResult(
        "solutions/gze2/A2-caseIII", okIII,
        f"u = u0*ln(zeta) with u0 = {sp.sstr(expected_u0)} (constraint reproduced exactly)"))

    # A4 closed forms
    pdeI4 = cdI.pde()
    vA4I = rd.check_solution(pdeI4, U0c * (x * y) ** al1, params=(U0c, al1),
                             ledger=pdeI4.ledger, rng=rng)
    okA4I = (vA4I.kind is rd.VerdictKind.ZERO_GIVEN_CONSTRAINTS
             and vA4I.witness is not None)
    out.append(CheckResult(
        "solutions/gze2/A4-caseI", okA4I,
        "composed u = U0*(x*y)^alpha1 solves only on the constraint variety "
        + (sp.sstr(vA4I.constraints) if vA4I.constraints else ""),
        [Notice("solutions/gze2/A4-caseI",
                "U(sigma) = U0*sigma^alpha1 a closed-form solution",
                "satisfiable only under "
                + (sp.sstr(vA4I.witness) if vA4I.witness else "no constraint"))]))

    cdII = cat.case("gze2", "II")
    pdeII = cdII.pde()
    vA4II = rd.check_solution(pdeII, U0c * (x * y) ** (1 / (1 - K)), params=(U0c,),
                              ledger=pdeII.ledger, rng=rng)
    out.append(CheckResult("solutions/gze2/A4-caseII",
                           vA4II.kind is rd.VerdictKind.ZERO_IDENTICALLY,
                           "u = U0*(x*y)^(1/(1-K)) solves identically"))

    vA4III = rd.check_solution(pdeIII, al2 * sp.log(x * y), params=(),
                               ledger=pdeIII.ledger, rng=rng)
    out.append(CheckResult("solutions/gze2/A4-caseIII",
                           vA4III.kind is rd.VerdictKind.ZERO_IDENTICALLY,
                           "u = alpha2*ln(x*y) solves identically (static)"))

    cdIV = cat.case("gze2", "IV")
    pdeIV = cdIV.pde()
    vA4IV = rd.check_solution(pdeIV, sp.log(x * y) / (1 - K), params=(),
                              ledger=pdeIV.ledger, rng=rng)
    out.append(CheckResult("solutions/gze2/A4-caseIV",
                           vA4IV.kind is rd.VerdictKind.ZERO_IDENTICALLY,
                           "printed u = (1/(1-K))*ln(x*y) solves identically",
                           [Notice("solutions/gze2/A4-caseIV",
                                   "similarity shift 1/(1-K) for the exponential case",
                                   "the verified generator has shift -1/K; the printed "
                                   "composition still solves (any c*ln(x*y) does)")]))

    # quadrature first integral and the oscillator claim
    a = Symbol("a")
    xi = rd.xi_sym
    pdeAq = detsys.preset("gze1", f=u ** K, g=g1v * u ** 3).with_ledger(K, g1v, a, a ** 2 - 1)
    # slope constant absent: autonomous second-order form U'' + (2*g + u0)*f = 0
    fd1 = rd.ReducedEquation(U[2] + (2 * g1v * U[0] ** 3 + u0_sym) * U[0] ** K,
                             xi, (), None, "gze1")
    H_derived = rd.quadrature_first_integral(fd1)
    ok_plus = rd.first_integral_check(fd1, H_derived)
    H_minus = Rational(1, 2) * U[1] ** 2 - sp.integrate(
        (2 * g1v * U[0] ** 3 + u0_sym) * U[0] ** K, U[0])
    ok_minus = rd.first_integral_check(fd1, H_minus)
    out.append(CheckResult(
        "solutions/gze1/quadrature", ok_plus and not ok_minus,
        f"conserved H = {rd.render_ode(H_derived)}",
        [Notice("solutions/gze1/quadrature-sign",
                "H = U'^2/2 - Int(G + f*u0) dU",
                "conserved quantity needs +Int(G + f*u0) dU; the printed sign fails")]))

    osc = rd.ReducedEquation(U[2] + 2 * U[0] ** 3, xi, (), None, "gze1")
    H_osc_claim = Rational(1, 2) * U[1] ** 2 - Rational(1, 2) * U[0] ** 2
    H_osc = rd.quadrature_first_integral(osc)
    out.append(CheckResult(
        "solutions/gze1/oscillator", (not rd.first_integral_check(osc, H_osc_claim))
        and rd.first_integral_check(osc, H_osc),
        f"g = u^2, f = u, u1 = u0 = 0 gives the quartic integral {rd.render_ode(H_osc)}",
        [Notice("solutions/gze1/oscillator",
                "H = U'^2/2 - U^2/2",
                f"H = {rd.render_ode(H_osc)} (quartic potential; the printed "
                "oscillator form is not conserved)")]))
    return out


SECTIONS = {
    "verification": check_symmetry_verification,
    "classification": check_classification,
    "tables": check_tables,
    "identification": check_identification,
    "optimal-systems": check_optimal_systems,
    "reductions": check_reductions,
    "solutions": check_solutions,
}


def run_scorecard(seed: int = 0, sections=None) -> Scorecard:
    card = Scorecard()
    for name, fn in SECTIONS.items():
        if sections and name not in sections:
            continue
        rng = random.Random(seed ^ hash(name) & 0xFFFF)
        for result in fn(rng):
            card.add(result)
    return card
