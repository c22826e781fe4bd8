"""PDE presets, determining equations, symmetry verification and the
structured-ansatz classification for the generalized Zoomeron equations.

The classification mechanizes an Ovsiannikov-style scheme: build the
symmetry condition for an affine ansatz generator, eliminate the leading
derivative, collect by jet monomials, and solve the resulting linear
system identically in u, once with the shape function g kept abstract
(the generic branch) and once per candidate g-family.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dfield
from typing import Iterable, Sequence

import sympy as sp
from sympy import Derivative, Symbol

from . import symkernel as sk
from . import jetspace as js
from .symkernel import AssumptionLedger, Expr, ZeroVerdict, f, g, t, u, x, y
from .jetspace import JetCoord, VectorField, prolong

PROLONG_ORDER = 4


@dataclass(frozen=True)
class Pde:
    """Denominator-cleared residual in jet coordinates.

    The leading derivative is the highest-order jet, occurs linearly, and
    its coefficient is nonzero by the assumption ledger.
    """

    name: str
    variables: tuple[str, ...]
    residual: Expr
    leading: JetCoord
    ledger: AssumptionLedger
    f_expr: Expr
    g_expr: Expr
    cleared_denominator: Expr

    @property
    def leading_coefficient(self) -> Expr:
        return sp.diff(self.residual, self.leading.symbol)

    def with_ledger(self, *nonzero: Expr) -> "Pde":
        return Pde(self.name, self.variables, self.residual, self.leading,
                   self.ledger.with_nonzero(*nonzero), self.f_expr, self.g_expr,
                   self.cleared_denominator)

    def substitute_shapes(self, f_expr: Expr | None = None, g_expr: Expr | None = None) -> "Pde":
        """Bind abstract f/g to concrete shapes (an explicit rewrite pass)."""
        res = self.residual
        fe, ge = self.f_expr, self.g_expr
        if f_expr is not None:
            res = substitute_abstract(res, "f", f_expr)
            fe = f_expr
        if g_expr is not None:
            res = substitute_abstract(res, "g", g_expr)
            ge = g_expr
        num, den = sp.fraction(sp.cancel(sp.together(res)))
        return Pde(self.name, self.variables, sk.normalize(num), self.leading,
                   self.ledger, fe, ge, sk.normalize(self.cleared_denominator * den))


def substitute_abstract(e: Expr, name: str, shape: Expr) -> Expr:
    """Replace the abstract function `name`(u) and its derivative markers
    by a concrete shape, an Expr in u."""
    func = sk.ABSTRACT_FUNCS[name]
    reps: dict[sp.Basic, Expr] = {}
    for atom in e.atoms(Derivative):
        if isinstance(atom.expr, sp.core.function.AppliedUndef) and atom.expr.func == func:
            order = sum(int(c) for _, c in atom.variable_count)
            arg = atom.expr.args[0]
            reps[atom] = sp.diff(shape, u, order).subs(u, arg)
    for atom in e.atoms(sp.core.function.AppliedUndef):
        if atom.func == func:
            reps.setdefault(atom, shape.subs(u, atom.args[0]))
    return e.xreplace(reps)


def _nonconstant_or_raise(expr: Expr, label: str) -> None:
    if expr.has(f) or expr.has(g):
        return  # abstract shapes are assumed nonconstant
    if sk.normalize(sp.diff(expr, u)) == 0:
        raise ValueError(f"{label} must be a nonconstant function of u: {expr}")


def _build(name: str, variables: tuple[str, ...], mixed: JetCoord, f_expr: Expr,
           g_expr: Expr, leading: JetCoord, xx_coeff: Expr = sp.Integer(1),
           g_coeff: Expr = sp.Integer(1)) -> Pde:
    D = js.total_derivative
    w = mixed.symbol / f_expr
    raw = D(D(w, "t"), "t") - xx_coeff * D(D(w, "x"), "x") \
        + 2 * g_coeff * D(D(g_expr, "t"), "x")
    num, den = sp.fraction(sp.cancel(sp.together(raw)))
    residual = sk.normalize(num)
    lead_sym = leading.symbol
    c = sp.diff(residual, lead_sym)
    if c == 0 or sp.diff(c, lead_sym) != 0:
        raise ValueError(f"leading derivative {leading} does not occur linearly")
    if sk.jets_in(c):
        raise ValueError(f"leading coefficient contains jet coordinates: {c}")
    ledger = AssumptionLedger().with_nonzero(f_expr.subs(u, u), c)
    return Pde(name, variables, residual, leading, ledger, f_expr, g_expr,
               sk.normalize(den))


PRESETS = ("zoomeron_1+1", "zoomeron_2+1", "g_zoomeron_2+1", "gze1", "gze2")


def preset(name: str, **params) -> Pde:
    """Construct one of the Zoomeron-family PDEs as a cleared residual.

    gze1/gze2 accept shape functions f and g (Exprs in u or strings; the
    abstract f(u), g(u) by default); g_zoomeron_2+1 takes parameters k,
    alpha, n.  Constant shapes are rejected.
    """
    def shape(key, default):
        v = params.get(key, default)
        if isinstance(v, str):
            v = sk.parse(v)
        return sp.sympify(v)

    if name == "zoomeron_1+1":
        return _build(name, ("t", "x"), JetCoord(("t", "x")), u, u ** 2,
                      JetCoord(("t", "t", "t", "x")))
    if name == "zoomeron_2+1":
        return _build(name, ("t", "x", "y"), JetCoord(("x", "y")), u, u ** 2,
                      JetCoord(("t", "t", "x", "y")))
    if name == "g_zoomeron_2+1":
        k = shape("k", Symbol("k"))
        alpha = shape("alpha", Symbol("alpha"))
        n = shape("n", Symbol("n"))
        pde = _build(name, ("t", "x", "y"), JetCoord(("x", "y")), u, u ** (2 * n),
                     JetCoord(("t", "t", "x", "y")), xx_coeff=k ** 2, g_coeff=alpha)
        return pde.with_ledger(k, alpha, n)
    if name == "gze1":
        fe, ge = shape("f", f(u)), shape("g", g(u))
        _nonconstant_or_raise(fe, "f")
        _nonconstant_or_raise(ge, "g")
        return _build(name, ("t", "x"), JetCoord(("t", "x")), fe, ge,
                      JetCoord(("t", "t", "t", "x")))
    if name == "gze2":
        fe, ge = shape("f", f(u)), shape("g", g(u))
        _nonconstant_or_raise(fe, "f")
        _nonconstant_or_raise(ge, "g")
        return _build(name, ("t", "x", "y"), JetCoord(("x", "y")), fe, ge,
                      JetCoord(("t", "t", "x", "y")))
    raise ValueError(f"unknown preset {name!r}; choose from {PRESETS}")


# ---------------------------------------------------------------------------
# Determining equations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DeterminingSystem:
    pde: Pde
    generator: VectorField
    equations: tuple[Expr, ...]
    monomials: tuple[Expr, ...]          # provenance: jet monomial per equation
    eliminated_multiplier: Expr          # coefficient A with pr(X)(H)=A*u_L+B
    clear_factor: Expr                   # leading coefficient c of H

    def reconstruction_defect(self, raw_symmetry_condition: Expr) -> Expr:
        """sum(monomial*equation) + A*H - c*pr(X)(H); identically zero."""
        total = sp.Add(*[m * e for m, e in zip(self.monomials, self.equations)])
        return sk.normalize(total + self.eliminated_multiplier * self.pde.residual
                            - self.clear_factor * raw_symmetry_condition)


def symmetry_condition(pde: Pde, X: VectorField) -> Expr:
    """pr(X) applied to the cleared residual, before elimination."""
    pr = prolong(X, PROLONG_ORDER)
    return pr.apply(pde.residual)


def determining_equations(pde: Pde, X: VectorField) -> DeterminingSystem:
    """Generate the determining system: apply the prolonged generator to
    the residual, substitute the leading derivative from H = 0, clear the
    leading coefficient, and collect by jet monomials."""
    if tuple(X.variables) != tuple(pde.variables):
        raise ValueError(f"generator variables {X.variables} do not match PDE {pde.variables}")
    E = symmetry_condition(pde, X)
    L = pde.leading.symbol
    c = pde.leading_coefficient
    if not pde.ledger.allows_cancel(c):
        raise ValueError(f"leading coefficient {c} not provably nonzero")
    A = sp.diff(E, L)
    if sp.diff(A, L) != 0:
        raise ValueError("symmetry condition is nonlinear in the leading derivative")
    B = sp.expand(E - A * L)
    rest = sp.expand(pde.residual - c * L)
    cleared = sk.normalize(c * B - A * rest)
    jets = sk.jets_in(cleared)
    collected = sk.collect(cleared, jets)
    monos, eqs = [], []
    for mono in sorted(collected, key=sp.default_sort_key):
        coeff = collected[mono]
        if coeff == 0:
            continue
        monos.append(mono)
        eqs.append(coeff)
    return DeterminingSystem(pde, X, tuple(eqs), tuple(monos), sk.normalize(A), c)


@dataclass(frozen=True)
class VerificationReport:
    pde_name: str
    generator: VectorField
    passed: bool
    inconclusive: bool
    verdicts: tuple[ZeroVerdict, ...]
    residual_equations: tuple[Expr, ...]
    monomials: tuple[Expr, ...]
    note: str = ""

    @property
    def failing(self) -> list[tuple[Expr, Expr]]:
        return [(m, e) for m, e, v in
                zip(self.monomials, self.residual_equations, self.verdicts)
                if v is not ZeroVerdict.IDENTICALLY_ZERO]


def verify_symmetry(pde: Pde, X: VectorField, rng=None) -> VerificationReport:
    """Pass iff every determining equation is identically zero under the
    ledger; Undecided verdicts are reported as inconclusive, never pass."""
    if tuple(X.variables) != tuple(pde.variables):
        return VerificationReport(pde.name, X, False, False, (), (), (),
                                  note=f"variable-set mismatch: field uses {X.variables}, "
                                       f"equation uses {pde.variables}")
    import random
    rng = rng or random.Random(17)
    system = determining_equations(pde, X)
    verdicts = []
    for eq in system.equations:
        verdicts.append(sk.is_zero(eq, pde.ledger, rng=rng))
    passed = all(v is ZeroVerdict.IDENTICALLY_ZERO for v in verdicts)
    inconclusive = (not passed) and all(v is not ZeroVerdict.NONZERO for v in verdicts)
    return VerificationReport(pde.name, X, passed, inconclusive, tuple(verdicts),
                              system.equations, system.monomials)


# ---------------------------------------------------------------------------
# Classification under the affine ansatz
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AnsatzSpec:
    """xi components affine in (t, x, y) with constant coefficients and
    eta = c*u + d."""

    scale_u: bool = True   # allow the c*u part of eta
    shift_u: bool = True   # allow the constant d


@dataclass
class ClassificationBranch:
    family: str
    f_expr: Expr
    g_expr: Expr
    constraints: list
    generators: list[VectorField]
    extra_generators: list[VectorField]
    algebra_label: str
    free_symbols: list[Symbol]
    g_condition: Expr | None = None
    notes: list[str] = dfield(default_factory=list)

    def describe(self) -> str:
        gens = ", ".join(Xf.render() for Xf in self.extra_generators) or "none"
        return (f"[{self.family}] g = {sp.sstr(self.g_expr)}; extra generators: {gens}; "
                f"algebra {self.algebra_label}")


def _ansatz_field(variables: Sequence[str], spec: AnsatzSpec):
    base = [sp.Integer(1)] + [sk.INDEPENDENT[v] for v in variables]
    params = []
    xi = []
    for v in variables:
        comps = []
        for b in base:
            sym = Symbol(f"c_{v}{'1' if b == 1 else b}")
            params.append(sym)
            comps.append(sym * b)
        xi.append(sp.Add(*comps))
    eta = sp.Integer(0)
    if spec.shift_u:
        d0 = Symbol("c_u1")
        params.append(d0)
        eta += d0
    if spec.scale_u:
        c1 = Symbol("c_uu")
        params.append(c1)
        eta += c1 * u
    X = VectorField(tuple(variables), tuple(xi), eta)
    return X, params


def _term_signature(term: Expr):
    """u-dependence class of one additive term: (power exponent,
    exp-kernel coefficient, opaque u-factors), plus the u-free remainder."""
    pow_exp = sp.Integer(0)
    exp_coeff = sp.Integer(0)
    opaque = []
    coeff = sp.Integer(1)
    factors = term.args if term.is_Mul else (term,)
    for fac in factors:
        base, e = (fac.base, fac.exp) if fac.is_Pow else (fac, sp.Integer(1))
        if base == u and not e.has(u):
            pow_exp += e
        elif isinstance(base, sp.exp) and base.args[0].has(u):
            arg = sp.expand(base.args[0] * e)
            cu = arg.coeff(u)
            rest = sp.expand(arg - cu * u)
            if rest.has(u):
                opaque.append(fac)
            else:
                exp_coeff += cu
                coeff *= sp.exp(rest)
        elif fac.has(u):
            opaque.append(fac)
        else:
            coeff *= fac
    sig = (sp.expand(pow_exp), sp.expand(exp_coeff),
           tuple(sorted((sp.sstr(o) for o in opaque))))
    opq = sp.Mul(*opaque) if opaque else sp.Integer(1)
    return sig, coeff, opq


def u_class_coefficients(e: Expr) -> list[Expr]:
    """Split an expression into coefficients of its independent
    u-dependence classes (distinct power exponents, exp kernels, or
    abstract-function atoms must vanish separately)."""
    e = sk.normalize(e)
    if e == 0:
        return []
    groups: dict = {}
    for term in sp.Add.make_args(e):
        sig, coeff, _ = _term_signature(term)
        groups[sig] = groups.get(sig, sp.Integer(0)) + coeff
    return [sk.normalize(c) for c in groups.values() if sk.normalize(c) != 0]


def _linear_system_matrix(conditions: Iterable[Expr], params: Sequence[Symbol]):
    rows = []
    for cond in conditions:
        row = []
        rem = cond
        for p in params:
            cp = sp.expand(cond).coeff(p)
            if cp.has(*params):
                raise ValueError(f"condition not linear in ansatz parameters: {cond}")
            row.append(sp.cancel(cp))
            rem = sp.expand(rem - cp * p)
        if sk.normalize(rem) != 0:
            raise ValueError(f"nonhomogeneous condition: {cond}")
        rows.append(row)
    return sp.Matrix(rows)


def _kernel_fields(X: VectorField, params: Sequence[Symbol], conditions: list[Expr]):
    """Solve the homogeneous linear system identically; return the
    admitted parameter directions as vector fields."""
    active = [p for p in params if any(c.has(p) for c in conditions)]
    passive = [p for p in params if p not in active]
    fields = []
    if active:
        M = _linear_system_matrix(conditions, active)
        null = M.nullspace()
        if null:
            N = sp.Matrix.hstack(*null).T
            N = N.rref()[0]
            for r in range(N.rows):
                subs = {p: sp.nsimplify(N[r, i]) for i, p in enumerate(active)}
                subs.update({p: 0 for p in passive})
                fields.append(_subs_field(X, subs, params))
    for p in passive:
        subs = {q: (1 if q == p else 0) for q in params}
        fields.append(_subs_field(X, subs, params))
    return [F for F in fields if not F.is_zero_field()]


def _subs_field(X: VectorField, subs: dict, params) -> VectorField:
    xi = tuple(sk.normalize(sp.cancel(c.subs(subs))) for c in X.xi)
    eta = sk.normalize(sp.cancel(X.eta.subs(subs)))
    return VectorField(X.variables, xi, eta)


_G_FAMILIES = {
    "power": lambda m: Symbol("g0") + Symbol("g1") * u ** m,
    "log": lambda m: Symbol("g0") + Symbol("g1") * sp.log(u),
    "exponential": lambda m: Symbol("g0") + Symbol("g1") * sp.exp(m * u),
    "linear": lambda m: Symbol("g0") + Symbol("g1") * u,
}
_FAMILY_HAS_EXPONENT = {"power": True, "log": False, "exponential": True, "linear": False}


def classify(pde_name: str, f_expr, ansatz: AnsatzSpec | None = None,
             families: Sequence[str] = ("power", "log", "exponential", "linear"),
             rng=None) -> list[ClassificationBranch]:
    """Symmetry classification of a Zoomeron-family PDE with fixed f and
    g ranging over the recognized families (g abstract for the generic
    baseline branch).

    Works under the affine ansatz: solves the g-free determining
    equations first, then the remaining conditions per g-family, with the
    family exponent kept symbolic.  Every emitted generator is checked by
    verify_symmetry before being reported.
    """
    import random
    rng = rng or random.Random(23)
    ansatz = ansatz or AnsatzSpec()
    if isinstance(f_expr, str):
        f_expr = sk.parse(f_expr)
    f_expr = sp.sympify(f_expr)
    pde = preset(pde_name, f=f_expr, g=g(u))
    X, params = _ansatz_field(pde.variables, ansatz)
    system = determining_equations(pde, X)

    eqs_free = [e for e in system.equations if not e.has(g)]
    eqs_g = [e for e in system.equations if e.has(g)]

    # Stage 1: conditions that must hold regardless of g.
    stage1: list[Expr] = []
    for e in eqs_free:
        stage1.extend(u_class_coefficients(e))

    branches: list[ClassificationBranch] = []

    # Generic branch: g stays abstract, so its derivative atoms are
    # independent classes and their coefficients vanish separately.
    generic_conditions = list(stage1)
    for e in eqs_g:
        generic_conditions.extend(u_class_coefficients(e))
    gen_fields = _kernel_fields(X, params, generic_conditions)
    branches.append(_make_branch("generic", pde_name, f_expr, g(u), gen_fields,
                                 pde, None, rng))

    for family in families:
        m = Symbol("m")
        g_form = _G_FAMILIES[family](m)
        conditions = list(stage1)
        for e in eqs_g:
            bound = substitute_abstract(e, "g", g_form)
            conditions.extend(u_class_coefficients(bound))
        fields = _kernel_fields(X, params, conditions)
        branch = _make_branch(family, pde_name, f_expr, g_form, fields, pde,
                              m if _FAMILY_HAS_EXPONENT[family] else None, rng)
        branches.append(branch)
    return branches


def _make_branch(family, pde_name, f_expr, g_expr, fields, abstract_pde, m, rng):
    translations = [F for F in fields if _is_translation(F)]
    extras = [F for F in fields if not _is_translation(F)]
    constraints: list = []
    notes: list[str] = []
    free: list[Symbol] = [m] if m is not None else []

    if family == "generic":
        check_pde = abstract_pde
    else:
        check_pde = preset(pde_name, f=f_expr, g=g_expr)
        if m is not None:
            check_pde = check_pde.with_ledger(m, Symbol("g1"))
        else:
            check_pde = check_pde.with_ledger(Symbol("g1"))

    verified_extras = []
    for F in extras:
        rep = verify_symmetry(check_pde, F, rng=rng)
        if rep.passed:
            verified_extras.append(F)
        else:
            notes.append(f"dropped unverified direction {F.render()}")
    generators = translations + verified_extras

    label = "unrecognized"
    try:
        from . import liealg
        alg = liealg.structure_constants(generators)
        label = liealg.identify(alg).label
    except Exception as exc:  # non-closure with free family exponents
        notes.append(f"algebra identification skipped: {exc}")

    return ClassificationBranch(family, f_expr, g_expr, constraints, generators,
                                verified_extras, label, free, None, notes)


def _is_translation(F: VectorField) -> bool:
    return all(sp.sympify(c).is_number for c in (*F.xi, F.eta))
