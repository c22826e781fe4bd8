"""Similarity machinery: invariants of optimal-system elements and
two-dimensional subalgebras, pullback of the PDEs to reduced ODEs,
quadrature first integrals, and closed-form solution checking."""
from __future__ import annotations

import random
from dataclasses import dataclass, field as dfield
from enum import Enum
from typing import Sequence

import sympy as sp
from sympy import Derivative, Rational, Symbol

from . import symkernel as sk
from .symkernel import AssumptionLedger, Expr, ZeroVerdict, f, g, u
from .jetspace import JetCoord, VectorField, commutator
from .detsys import Pde, substitute_abstract

#: derivative-order symbols for the reduced dependent variable U
U = sp.symbols("U0:7")

xi_sym = Symbol("xi")
sigma_sym = Symbol("sigma")
zeta_sym = Symbol("zeta")

u0_sym, u1_sym = sp.symbols("u0 u1")


class UnsupportedFieldShape(ValueError):
    pass


class IncompleteInvariants(ValueError):
    pass


def render_ode(e: Expr) -> str:
    """Human-readable ODE text with U, U', U'' notation."""
    names = {U[0]: "U", U[1]: "U'", U[2]: "U''", U[3]: "U'''"}
    names.update({U[k]: f"U({k})" for k in range(4, 7)})
    out = sp.sstr(e)
    for s, n in sorted(names.items(), key=lambda kv: -len(kv[0].name)):
        out = out.replace(sp.sstr(s), n)
    return out


@dataclass(frozen=True)
class SimilarityMap:
    """Invariant-based change of variables u = Phi(t, x, y, U(zeta))."""

    variables: tuple[str, ...]
    invariant: Expr                  # zeta as a function of the base variables
    inv_symbol: Symbol
    rule: Expr                       # u in terms of base variables and U0
    dep_invariant: Expr              # expression equal to U0 on solutions
    fields: tuple[VectorField, ...]

    @property
    def invariants(self) -> tuple[Expr, ...]:
        return (self.invariant, self.dep_invariant)

    def describe(self) -> str:
        return (f"{self.inv_symbol} = {sp.sstr(self.invariant)}, "
                f"u = {sp.sstr(self.rule).replace('U0', 'U(' + self.inv_symbol.name + ')')}")


def verify_map(smap: SimilarityMap, ledger: AssumptionLedger | None = None) -> bool:
    """X(I) = 0 exactly for every generating field and both invariants."""
    for X in smap.fields:
        for inv in smap.invariants:
            val = X.apply(inv)
            if sk.is_zero(val, ledger) is not ZeroVerdict.IDENTICALLY_ZERO:
                return False
    return True


# ---------------------------------------------------------------------------
# Characteristic-system solving (pattern based)
# ---------------------------------------------------------------------------

def _action_shape(a: Expr, z: Symbol):
    a = sp.expand(a)
    if a == 0:
        return ("zero", sp.Integer(0))
    if z not in a.free_symbols:
        return ("const", a)
    c = sp.cancel(a / z)
    if z not in c.free_symbols:
        return ("linear", c)
    raise UnsupportedFieldShape(f"coefficient {a} is neither constant nor linear in {z}")


def _solve_chart(syms: Sequence[Symbol], actions: Sequence[Expr]):
    """Invariants of a field given by its action on chart coordinates.

    Each action must be 0, constant, or c*coordinate (translations,
    scalings, log-shifts).  Returns (invariant exprs in the chart symbols,
    inverse substitutions orig -> h(new, pivot), pivot symbol).
    """
    shapes = [_action_shape(a, z) for z, a in zip(syms, actions)]
    pivot = None
    for i, (kind, _) in enumerate(shapes):
        if kind == "linear":
            pivot = i
            break
    if pivot is None:
        for i, (kind, c) in enumerate(shapes):
            if kind == "const" and c != 0:
                pivot = i
                break
    if pivot is None:
        raise UnsupportedFieldShape("field acts trivially on the chart")
    pk, pc = shapes[pivot]
    p = syms[pivot]
    invs, inverse = [], {}
    for i, (kind, c) in enumerate(shapes):
        if i == pivot:
            continue
        z = syms[i]
        ratio = sp.cancel(c / pc) if kind != "zero" else sp.Integer(0)
        if kind == "zero":
            invs.append(z)
            inverse[z] = z
        elif pk == "linear":
            if kind == "const":
                invs.append(z - ratio * sp.log(p))
                inverse[z] = z + ratio * sp.log(p)
            else:
                invs.append(z * p ** (-ratio))
                inverse[z] = z * p ** ratio
        else:  # pivot is a translation
            if kind == "const":
                invs.append(z - ratio * p)
                inverse[z] = z + ratio * p
            else:
                invs.append(z * sp.exp(-ratio * p))
                inverse[z] = z * sp.exp(ratio * p)
    return invs, inverse, p


def _translation_combo(v1: VectorField, v2: VectorField):
    """A basis (w1, w2) of span{v1, v2} with w1 a pure translation, when
    one exists."""
    if _is_constant_field(v1):
        return v1, v2
    if _is_constant_field(v2):
        return v2, v1
    mu, nu = sp.symbols("_mu _nu")
    vars_all = [sk.INDEPENDENT[v] for v in v1.variables] + [u]
    eqs = []
    for slot in (*v1.variables, "u"):
        c = sp.expand(mu * v1.coeff(slot) + nu * v2.coeff(slot))
        for var in vars_all:
            eqs.append(sp.diff(c, var))
    sols = sp.linsolve(eqs, [mu, nu])
    if not sols:
        return None
    vals = next(iter(sols))
    free = set(vals[0].free_symbols) | set(vals[1].free_symbols)
    sub = {s: sp.Integer(1) for s in (mu, nu) if s in free}
    mv, nv = (v.xreplace(sub) for v in vals)
    if mv == 0 and nv == 0:
        return None
    w1 = mv * v1 + nv * v2
    if w1.is_zero_field():
        return None
    w2 = v2 if not _is_constant_field(v2) else v1
    return w1, w2


def _is_constant_field(F: VectorField) -> bool:
    return all(sp.sympify(c).is_number or not c.free_symbols & {sk.t, sk.x, sk.y, u}
               for c in (*F.xi, F.eta))


def _proportional(W: VectorField, V: VectorField) -> bool:
    """W = c*V for a constant c (exact, both nonzero)."""
    ratios = []
    for slot in (*V.variables, "u"):
        a, b = sp.sympify(W.coeff(slot)), sp.sympify(V.coeff(slot))
        if b == 0:
            if sk.normalize(a) != 0:
                return False
            continue
        ratios.append(sp.cancel(a / b))
    if not ratios:
        return False
    return all(sp.cancel(r - ratios[0]) == 0 and not r.free_symbols & {sk.t, sk.x, sk.y, u}
               for r in ratios)


def invariants_for(fields, variables: Sequence[str], inv_symbol: Symbol | None = None,
                   invariant: Expr | None = None, rule: Expr | None = None,
                   ledger: AssumptionLedger | None = None) -> SimilarityMap:
    """Similarity transformation for one generator or a two-dimensional
    subalgebra.

    Pattern-based: translations, scalings, log-shifts, and the bilinear
    combinations arising from sequential reduction.  A user-supplied
    (invariant, rule) pair bypasses the solver but is still verified
    through X(I) = 0.
    """
    if isinstance(fields, VectorField):
        fields = [fields]
    fields = list(fields)
    variables = tuple(variables)
    inv_symbol = inv_symbol or zeta_sym

    if invariant is not None and rule is not None:
        dep_inv = _dependent_invariant_from_rule(rule, invariant, inv_symbol)
        smap = SimilarityMap(variables, invariant, inv_symbol, rule, dep_inv, tuple(fields))
        if not verify_map(smap, ledger):
            raise UnsupportedFieldShape("supplied invariants are not annihilated by the fields")
        return smap

    base_syms = [sk.INDEPENDENT[v] for v in variables] + [u]
    if len(fields) == 1:
        chart_exprs = {s: s for s in base_syms}
        invs = _reduce_once(fields[0], base_syms, chart_exprs)
    elif len(fields) == 2:
        invs = _reduce_pair(fields[0], fields[1], base_syms)
    else:
        raise UnsupportedFieldShape("expected one generator or a pair")

    dep = [(s, e) for s, e in invs if u in e.free_symbols]
    base = [(s, e) for s, e in invs if u not in e.free_symbols]
    if len(dep) != 1 or len(base) != 1:
        raise IncompleteInvariants(f"expected one base and one dependent invariant, got {invs}")
    invariant = sk.normalize(base[0][1])
    dep_inv = sk.normalize(dep[0][1])
    sols = sp.solve(sp.Eq(dep_inv, U[0]), u)
    if len(sols) != 1:
        raise UnsupportedFieldShape(f"cannot invert dependent invariant {dep_inv}")
    rule = _power_normal(sols[0].subs(invariant, inv_symbol))
    smap = SimilarityMap(variables, invariant, inv_symbol, rule, dep_inv, tuple(fields))
    if not verify_map(smap, ledger):
        raise UnsupportedFieldShape("derived invariants failed the X(I) = 0 check")
    return smap


def _dependent_invariant_from_rule(rule: Expr, invariant: Expr, inv_symbol: Symbol) -> Expr:
    sols = sp.solve(sp.Eq(u, rule.subs(inv_symbol, invariant)), U[0])
    if len(sols) != 1:
        raise UnsupportedFieldShape(f"cannot invert rule {rule} for U")
    return sk.normalize(sols[0])


def _reduce_once(X: VectorField, syms, chart_exprs):
    actions = []
    for s in syms:
        slot = "u" if s == u else s.name
        actions.append(sp.expand(sp.sympify(X.coeff(slot))))
    invs, _, _ = _solve_chart(syms, actions)
    return [(Symbol(f"_z{i}"), inv.xreplace(chart_exprs)) for i, inv in enumerate(invs)]


def _reduce_pair(v1: VectorField, v2: VectorField, base_syms):
    br = commutator(v1, v2)
    if br.is_zero_field():
        combo = _translation_combo(v1, v2)
        first, second = combo if combo else (v2, v1)
    elif _proportional(br, v1):
        first, second = v1, v2
    elif _proportional(br, v2):
        first, second = v2, v1
    else:
        raise UnsupportedFieldShape("pair does not span a two-dimensional subalgebra")

    actions1 = [sp.sympify(first.coeff("u" if s == u else s.name)) for s in base_syms]
    invs1, inverse1, pivot1 = _solve_chart(base_syms, actions1)

    # push the second field onto the invariant chart
    zsyms = [Symbol(f"_w{i}") for i in range(len(invs1))]
    chart = dict(zip(zsyms, invs1))
    rename = {old: new for old, new in zip([s for s in base_syms if s != pivot1], zsyms)}
    inv_sub = {s: inverse1[s].xreplace(rename) for s in inverse1}

    actions2 = []
    for zi, Ii in chart.items():
        a = second.apply(Ii)
        a = a.xreplace({s: inv_sub[s] for s in inv_sub})
        a = sp.powsimp(sp.expand(a), force=True)
        if pivot1 in a.free_symbols:
            raise IncompleteInvariants(f"pushed coefficient still depends on {pivot1}: {a}")
        actions2.append(a)
    invs2, _, _ = _solve_chart(zsyms, actions2)
    out = []
    for i, inv in enumerate(invs2):
        expr = inv.xreplace(chart)
        out.append((Symbol(f"_z{i}"), sp.powsimp(sp.expand(expr), force=True)))
    return out


# ---------------------------------------------------------------------------
# Pullback
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ReducedEquation:
    """ODE residual in (zeta, U, U', ...) with the record of cancelled
    nonzero factors; pullback of the PDE equals their product."""

    residual: Expr
    inv_symbol: Symbol
    cancelled: tuple[Expr, ...]
    map: SimilarityMap
    pde_name: str
    shape_factor: Expr | None = None   # pullback of the cleared denominator

    @property
    def order(self) -> int:
        for k in range(len(U) - 1, -1, -1):
            if self.residual.has(U[k]):
                return k
        return 0

    def describe(self) -> str:
        return render_ode(self.residual) + " = 0"

    def scaled(self, factor: Expr, ledger: AssumptionLedger) -> "ReducedEquation":
        """Divide out a ledger-nonzero factor, recording the cancellation;
        the chart variable itself counts as a generic point."""
        if not ledger.with_nonzero(self.inv_symbol).allows_cancel(factor):
            raise ValueError(f"factor {factor} is not ledger-nonzero")
        res = sp.expand(sp.cancel(sp.together(self.residual / factor)))
        return ReducedEquation(res, self.inv_symbol, self.cancelled + (factor,),
                               self.map, self.pde_name, self.shape_factor)


_FDER = {("f", k): sp.Function(f"fD{k}") for k in range(1, 5)}
_FDER.update({("g", k): sp.Function(f"gD{k}") for k in range(1, 5)})


def _mark_abstract_derivatives(e: Expr) -> Expr:
    reps = {}
    for atom in e.atoms(Derivative):
        fn = atom.expr
        if isinstance(fn, sp.core.function.AppliedUndef) and fn.func in (f, g):
            order = sum(int(c) for _, c in atom.variable_count)
            reps[atom] = _FDER[(fn.func.__name__, order)](fn.args[0])
    return e.xreplace(reps)


def _unmark_abstract_derivatives(e: Expr) -> Expr:
    reps = {}
    for atom in e.atoms(sp.core.function.AppliedUndef):
        name = atom.func.__name__
        if name.startswith(("fD", "gD")):
            order = int(name[2:])
            base = f if name[0] == "f" else g
            arg = atom.args[0]
            if arg != U[0]:
                raise IncompleteInvariants(
                    f"abstract shape argument {arg} is not the reduced variable")
            reps[atom] = Derivative(base(U[0]), (U[0], order))
    return e.xreplace(reps)


def _chain_diff(e: Expr, var: Symbol, dz: Expr) -> Expr:
    """d/dvar for expressions in (base vars, U0..U5) with dUk/dvar =
    U_{k+1} * dz/dvar."""
    out = sp.diff(e, var)
    for k in range(len(U) - 1):
        pd = sp.diff(e, U[k])
        if pd != 0:
            out += pd * U[k + 1] * dz
    return sp.expand(out)


def _expand_exponents(e: Expr) -> Expr:
    """Expand the exponents of power nodes so that symbolic-exponent
    arithmetic (t**(K*(a-2)) vs t**(K*a - 2*K)) cancels structurally."""
    return e.replace(lambda z: z.is_Pow, lambda z: sp.Pow(z.base, sp.expand(z.exp)))


def _denest_pows(e: Expr) -> Expr:
    """(b**p)**q -> b**(p*q), applied to fixpoint (generic positive
    bases: similarity charts are local)."""
    def rule(z):
        return sp.Pow(z.base.base, sp.expand(z.base.exp * z.exp))
    prev = None
    while prev != e:
        prev = e
        e = e.replace(lambda z: z.is_Pow and z.base.is_Pow, rule)
    return e


def _factor_pow_bases(e: Expr) -> Expr:
    """Factor sum bases of powers so that (a2*t*y - a1*x*y)**m splits
    into consistent atoms."""
    return e.replace(lambda z: z.is_Pow and z.base.is_Add,
                     lambda z: sp.Pow(sp.factor(z.base), z.exp))


def _power_normal(e: Expr) -> Expr:
    """Distribute powers of products, denest nested powers and collect
    same-base powers; the base variables and U are treated as positive
    (similarity charts are local)."""
    e = sp.powdenest(e, force=True)
    e = _factor_pow_bases(e)
    e = sp.expand_power_base(e, force=True)
    e = _denest_pows(e)
    e = sp.powsimp(e, force=True, combine="exp")
    return _expand_exponents(sp.expand(e))


def pullback(pde: Pde, smap: SimilarityMap) -> ReducedEquation:
    """Substitute u = Phi(..., U(zeta)) into the cleared residual, expand
    by the chain rule, re-express in (zeta, U, U', ...), and cancel
    ledger-nonzero common factors."""
    if tuple(smap.variables) != tuple(pde.variables):
        raise ValueError("similarity map variables do not match the PDE")
    base_vars = [sk.INDEPENDENT[v] for v in pde.variables]
    rule = smap.rule.subs(smap.inv_symbol, smap.invariant)

    images: dict[JetCoord, Expr] = {JetCoord(()): sp.expand(rule)}
    needed = sorted({JetCoord.from_symbol(s) for s in sk.jets_in(pde.residual)},
                    key=lambda jc: (jc.order, jc.indices))
    for jc in needed:
        parent = JetCoord(jc.indices[:-1])
        if parent not in images:
            # fill intermediate orders along the canonical peel path
            stack = [parent]
            while stack[-1] not in images:
                stack.append(JetCoord(stack[-1].indices[:-1]))
            for missing in reversed(stack):
                if missing in images:
                    continue
                par = JetCoord(missing.indices[:-1])
                var = sk.INDEPENDENT[missing.indices[-1]]
                images[missing] = _chain_diff(images[par], var, sp.diff(smap.invariant, var))
        var = sk.INDEPENDENT[jc.indices[-1]]
        images[jc] = _chain_diff(images[parent], var, sp.diff(smap.invariant, var))

    marked = _mark_abstract_derivatives(pde.residual)
    reps = {jc.symbol: img for jc, img in images.items() if jc.order >= 1}
    reps[u] = images[JetCoord(())]
    R = sp.expand(marked.xreplace(reps))

    # eliminate the base variables in favor of zeta
    zeta = smap.inv_symbol
    solve_var = None
    for v in reversed(base_vars):
        if v in smap.invariant.free_symbols:
            sols = sp.solve(sp.Eq(smap.invariant, zeta), v)
            if len(sols) >= 1:
                solve_var, solution = v, sols[0]
                break
    if solve_var is None:
        raise IncompleteInvariants("invariant does not involve the base variables")
    R = _power_normal(R.subs(solve_var, solution))

    residual, factors = _strip_variable_factor(R, [v for v in base_vars if v != solve_var],
                                               pde.ledger)
    residual = _unmark_abstract_derivatives(sk.normalize(residual))
    shape_factor = None
    if smap.rule == U[0]:
        shape_factor = _mark_abstract_derivatives(pde.cleared_denominator).xreplace({u: U[0]})
        shape_factor = _unmark_abstract_derivatives(shape_factor)
    return ReducedEquation(residual, zeta, tuple(factors), smap, pde.name, shape_factor)


def _strip_variable_factor(R: Expr, surviving_vars, ledger: AssumptionLedger):
    """Factor R = M(vars) * G(zeta, U...); the common factor M must be
    ledger-cancellable; raises when a variable survives in G.

    Two passes: common power-monomial stripping (handles symbolic
    exponents), then a rational-function fallback for residuals whose
    terms mix powers of a linear form in the variables."""
    R = sp.expand(R)
    svars = set(surviving_vars)
    if R == 0 or not R.free_symbols & svars:
        return R, ()
    terms = sp.Add.make_args(R)

    def var_part(term):
        parts = []
        for fac in (term.args if term.is_Mul else (term,)):
            if fac.free_symbols & svars:
                parts.append(fac)
        return sp.Mul(*parts) if parts else sp.Integer(1)

    pivot = var_part(terms[0])
    out = sp.Integer(0)
    monomial_ok = True
    for term in terms:
        ratio = _power_normal(sp.cancel(sp.together(term / pivot)))
        if ratio.free_symbols & svars:
            monomial_ok = False
            break
        out += ratio
    if monomial_ok:
        factors = []
        if pivot != 1:
            if not ledger.allows_cancel(pivot):
                raise ValueError(f"common factor {pivot} is not ledger-nonzero")
            factors.append(pivot)
        return out, factors

    # rational fallback: single fraction, then factor the numerator
    num, den = sp.fraction(sp.cancel(sp.together(R)))
    num = sp.factor(num)
    keep, vardep = [], []
    for fac in sp.Mul.make_args(num):
        if fac.free_symbols & svars:
            vardep.append(fac)
        else:
            keep.append(fac)
    G = sp.Mul(*keep) if keep else sp.Integer(1)
    if G.free_symbols & svars:
        bad = sorted(G.free_symbols & svars, key=str)
        raise IncompleteInvariants(
            f"reduced residual still involves {bad[0]}: invariant set incomplete")
    factor = sp.cancel(sp.Mul(*vardep) / den)
    factors = []
    if factor != 1:
        if not ledger.allows_cancel(factor):
            raise ValueError(f"common factor {factor} is not ledger-nonzero")
        factors.append(factor)
    return sp.expand(G), factors


def reconstruction_defect(pde: Pde, red: ReducedEquation) -> Expr:
    """(cancelled factors)*(ODE residual) - substituted PDE, identically
    zero by construction; recomputed here for auditing."""
    smap = red.map
    rule = smap.rule.subs(smap.inv_symbol, smap.invariant)
    marked = _mark_abstract_derivatives(pde.residual)
    images: dict = {}
    images[JetCoord(())] = sp.expand(rule)
    for s in sk.jets_in(pde.residual):
        jc = JetCoord.from_symbol(s)
        chain = [jc]
        while chain[-1].indices[:-1] not in [c.indices for c in images]:
            chain.append(JetCoord(chain[-1].indices[:-1]))
            if chain[-1].order == 0:
                break
        for missing in reversed(chain):
            if missing in images or missing.order == 0:
                continue
            par = JetCoord(missing.indices[:-1])
            var = sk.INDEPENDENT[missing.indices[-1]]
            images[missing] = _chain_diff(images[par], var, sp.diff(smap.invariant, var))
    reps = {jc.symbol: img for jc, img in images.items() if jc.order >= 1}
    reps[u] = images[JetCoord(())]
    substituted = sp.expand(marked.xreplace(reps))
    back = sp.Mul(*red.cancelled) * _mark_abstract_derivatives(red.residual)
    back = back.subs(red.inv_symbol, smap.invariant)
    return sk.normalize(_power_normal(substituted - back))


# ---------------------------------------------------------------------------
# Integration helpers
# ---------------------------------------------------------------------------

def _total_z_derivative(e: Expr, z: Symbol) -> Expr:
    out = sp.diff(e, z)
    for k in range(len(U) - 1):
        pd = sp.diff(e, U[k])
        if pd != 0:
            out += pd * U[k + 1]
    return sp.expand(out)


def _rational_zero(e: Expr) -> bool:
    return sp.cancel(sp.together(sp.expand(e))) == 0


def _generic_branch(e: Expr) -> Expr:
    """Select the generic-parameter branch of Piecewise antiderivatives
    (symbolic exponents are treated as generic)."""
    if not e.has(sp.Piecewise):
        return e
    return e.replace(lambda z: isinstance(z, sp.Piecewise), lambda z: z.args[0][0])


def _integrate_exact(e: Expr, z: Symbol) -> Expr:
    """Antiderivative S with dS/dz = e along the jet of U.

    Standard descent: for an exact form the work expression is linear in
    its top derivative U_k, with a coefficient that may involve U_{k-1}
    and lower; the antiderivative piece is the coefficient integrated
    with respect to U_{k-1}.  Whatever survives at the bottom must be a
    closed-form function of z alone."""
    S = sp.Integer(0)
    work = sp.expand(e)
    for k in range(len(U) - 1, 0, -1):
        if not work.has(U[k]):
            continue
        A = sp.expand(work).coeff(U[k])
        if A.has(U[k]) or sp.expand(work - A * U[k]).has(U[k]):
            raise ValueError(f"residual nonlinear in {U[k]}; not an exact derivative")
        piece = _generic_branch(sp.integrate(sp.cancel(sp.together(A)), U[k - 1]))
        if piece.has(sp.Integral):
            raise ValueError(f"no closed-form antiderivative for coefficient {A}")
        S += piece
        work = sp.expand(work - _total_z_derivative(piece, z))
        if _rational_zero(work):
            return sp.expand(S)
    if not _rational_zero(work):
        # remaining part must be a function of z alone, integrable in closed form
        if work.has(U[0]) or work.has(f) or work.has(g):
            raise ValueError(f"non-exact remainder {sp.cancel(sp.together(work))}")
        tail = _generic_branch(sp.integrate(sp.cancel(sp.together(work)), z))
        if tail.has(sp.Integral):
            raise ValueError(f"no closed-form antiderivative for {work}")
        S += tail
    return sp.expand(S)


def _exactness_form(red: ReducedEquation) -> Expr:
    """The residual divided by the pulled-back clearing factor, restoring
    the exact-derivative structure destroyed by denominator clearing."""
    expr = red.residual
    if red.shape_factor is not None and red.shape_factor != 1:
        expr = sp.expand(sp.cancel(sp.together(expr / red.shape_factor)))
    return expr


def integrate_once(red: ReducedEquation, constant: Symbol) -> ReducedEquation:
    z = red.inv_symbol
    expr = _exactness_form(red)
    S = _integrate_exact(expr, z)
    if not _rational_zero(_total_z_derivative(S, z) - expr):
        raise ValueError("residual is not an exact derivative")
    return ReducedEquation(sp.expand(S - constant), z, red.cancelled, red.map,
                           red.pde_name)


def integrate_twice(red: ReducedEquation) -> ReducedEquation:
    """For residuals that are exact second derivatives: introduce the
    integration constants u1 (slope) and u0 (offset)."""
    first = integrate_once(red, u1_sym)
    inner = sp.expand(first.residual + u1_sym)
    S2 = _integrate_exact(inner, red.inv_symbol)
    if not _rational_zero(_total_z_derivative(S2, red.inv_symbol) - inner):
        raise ValueError("first integral is not an exact derivative")
    res = sp.expand(S2 - u1_sym * red.inv_symbol - u0_sym)
    return ReducedEquation(res, red.inv_symbol, red.cancelled, red.map, red.pde_name)


def solved_second_order(red: ReducedEquation) -> Expr:
    """U'' = R(zeta, U, U') for a second-order reduced equation."""
    res = red.residual
    A = sp.expand(res).coeff(U[2])
    if A == 0 or A.has(U[2]):
        raise ValueError("equation is not second order / linear in U''")
    B = sp.expand(res - A * U[2])
    return sp.cancel(-B / A)


def first_integral_check(red: ReducedEquation, H: Expr) -> bool:
    """True iff dH/dzeta vanishes along U'' = R(zeta, U, U')."""
    R = solved_second_order(red)
    z = red.inv_symbol
    dH = sp.diff(H, z) + U[1] * sp.diff(H, U[0]) + R * sp.diff(H, U[1])
    return sk.is_zero(sp.together(dH)) is ZeroVerdict.IDENTICALLY_ZERO


def quadrature_first_integral(red: ReducedEquation) -> Expr:
    """(1/2)U'^2 + V(U) with V the antiderivative of the z-free force
    term of U'' + W(U) = 0; requires the slope constant absent."""
    R = solved_second_order(red)
    if red.inv_symbol in R.free_symbols:
        raise ValueError("equation depends on the reduced variable; no autonomous integral")
    W = sp.expand(-R)
    if W.has(U[1]):
        raise ValueError("damping term present; no quadrature integral")
    V = _generic_branch(sp.integrate(W, U[0]))
    if V.has(sp.Integral):
        raise ValueError(f"no closed-form antiderivative for {W}")
    return sp.Rational(1, 2) * U[1] ** 2 + V


# ---------------------------------------------------------------------------
# Solution checking
# ---------------------------------------------------------------------------

class VerdictKind(Enum):
    ZERO_IDENTICALLY = "zero_identically"
    ZERO_GIVEN_CONSTRAINTS = "zero_given_constraints"
    NONZERO = "nonzero"


@dataclass
class SolutionVerdict:
    kind: VerdictKind
    constraints: tuple[Expr, ...] = ()
    witness: dict | None = None
    residual: Expr | None = None

    def describe(self) -> str:
        if self.kind is VerdictKind.ZERO_IDENTICALLY:
            return "solves identically"
        if self.kind is VerdictKind.ZERO_GIVEN_CONSTRAINTS:
            cs = "; ".join(sp.sstr(c) + " = 0" for c in self.constraints)
            return f"solves under constraints: {cs}"
        return "does not solve (residual nonzero under the ledger)"


def _var_signature(term: Expr, vars_):
    pows = {v: sp.Integer(0) for v in vars_}
    expc = {v: sp.Integer(0) for v in vars_}
    opaque = []
    coeff = sp.Integer(1)
    for fac in (term.args if term.is_Mul else (term,)):
        base, e = (fac.base, fac.exp) if fac.is_Pow else (fac, sp.Integer(1))
        hit = [v for v in vars_ if fac.has(v)]
        if not hit:
            coeff *= fac
            continue
        if base in vars_ and not e.has(*vars_):
            pows[base] += e
        elif isinstance(base, sp.exp):
            arg = sp.expand(base.args[0] * e)
            linear = all(not arg.coeff(v).has(*vars_) for v in hit)
            if linear:
                rest = arg
                for v in hit:
                    cv = arg.coeff(v)
                    expc[v] += cv
                    rest = sp.expand(rest - cv * v)
                if rest.has(*vars_):
                    opaque.append(fac)
                else:
                    coeff *= sp.exp(rest)
            else:
                opaque.append(fac)
        else:
            opaque.append(fac)
    sig = (tuple(sp.expand(pows[v]) for v in vars_),
           tuple(sp.expand(expc[v]) for v in vars_),
           tuple(sorted(sp.sstr(o) for o in opaque)))
    return sig, coeff


def _constraint_groups(residual: Expr, vars_) -> list[Expr]:
    groups: dict = {}
    for term in sp.Add.make_args(sp.expand(residual)):
        sig, coeff = _var_signature(term, vars_)
        groups[sig] = groups.get(sig, sp.Integer(0)) + coeff
    out = []
    for c in groups.values():
        c = sp.cancel(sp.together(c))
        if c != 0:
            out.append(sp.expand(sp.fraction(c)[0]))
    return out


def _satisfiable(constraints, params, ledger: AssumptionLedger, rng: random.Random,
                 reject=None):
    """Try to solve the constraints for the declared parameters without
    violating the ledger; returns a witness dict or None.  ``reject``
    filters out degenerate witnesses (e.g. those zeroing the candidate)."""
    params = [p for p in params if any(c.has(p) for c in constraints)]
    if not params:
        return None
    reject = reject or (lambda sol: False)

    def admissible(sol):
        for L in ledger.nonzero:
            if sk.is_zero(L.subs(sol), rng=rng) is ZeroVerdict.IDENTICALLY_ZERO:
                return False
        return not reject(sol)

    try:
        sols = sp.solve(constraints, params, dict=True)
    except Exception:
        sols = []
    for sol in sols:
        if admissible(sol):
            return sol
    # numeric fallback: bind the non-declared symbols, then solve again
    other = sorted({s for c in constraints for s in c.free_symbols} - set(params),
                   key=lambda s: s.name)
    for _ in range(16):
        binding = {s: Rational(rng.randint(1, 7), rng.randint(1, 3)) * rng.choice([-1, 1])
                   for s in other}
        if ledger.violated_by(binding):
            continue
        try:
            sols = sp.solve([c.subs(binding) for c in constraints], params, dict=True)
        except Exception:
            continue
        for sol in sols:
            if all(sp.sympify(v).is_real is not False for v in sol.values()):
                full = dict(binding)
                full.update(sol)
                if admissible(full):
                    return full
    return None


def check_solution(target, rule: Expr, params: Sequence[Symbol] = (),
                   ledger: AssumptionLedger | None = None,
                   rng: random.Random | None = None) -> SolutionVerdict:
    """Substitute a closed-form candidate into a PDE (rule gives u in the
    base variables) or a reduced ODE (rule gives U in the reduced
    variable); factor the residual and extract parameter constraints."""
    rng = rng or random.Random(5)
    if isinstance(target, Pde):
        ledger = ledger if ledger is not None else target.ledger
        base_vars = [sk.INDEPENDENT[v] for v in target.variables]
        marked = _mark_abstract_derivatives(target.residual)
        reps: dict[sp.Basic, Expr] = {u: rule}
        for s in sk.jets_in(target.residual):
            jc = JetCoord.from_symbol(s)
            d = rule
            for idx in jc.indices:
                d = sp.diff(d, sk.INDEPENDENT[idx])
            reps[s] = d
        residual = marked.xreplace(reps)
        vars_ = base_vars
    elif isinstance(target, ReducedEquation):
        ledger = ledger if ledger is not None else AssumptionLedger()
        z = target.inv_symbol
        marked = _mark_abstract_derivatives(target.residual)
        reps = {U[k]: sp.diff(rule, z, k) for k in range(len(U))}
        residual = marked.xreplace(reps)
        vars_ = [z]
    else:
        raise TypeError(f"cannot check solutions against {type(target).__name__}")

    residual = _power_normal(sp.expand_log(sp.expand(residual), force=True))
    if sk.is_zero(residual, ledger, rng=rng) is ZeroVerdict.IDENTICALLY_ZERO:
        return SolutionVerdict(VerdictKind.ZERO_IDENTICALLY)

    constraints = _constraint_groups(residual, vars_)
    # drop constraints that already vanish and strip ledger-nonzero factors
    cleaned = []
    for c in constraints:
        c = sp.factor(c)
        kept = []
        for fac in sp.Mul.make_args(c):
            base = fac.base if fac.is_Pow else fac
            if ledger.allows_cancel(base):
                continue
            kept.append(fac)
        c2 = sp.Mul(*kept) if kept else sp.Integer(1)
        if sk.is_zero(c2, ledger, rng=rng) is ZeroVerdict.IDENTICALLY_ZERO:
            continue
        cleaned.append(sp.expand(c2))
    if not cleaned:
        return SolutionVerdict(VerdictKind.ZERO_IDENTICALLY)

    def _degenerate(sol):
        return sk.is_zero(rule.subs(sol), rng=rng) is ZeroVerdict.IDENTICALLY_ZERO

    witness = _satisfiable(cleaned, list(params), ledger, rng, reject=_degenerate)
    if witness is not None:
        res_check = residual.subs(witness)
        if sk.is_zero(res_check, rng=rng) in (ZeroVerdict.IDENTICALLY_ZERO,
                                              ZeroVerdict.UNDECIDED):
            return SolutionVerdict(VerdictKind.ZERO_GIVEN_CONSTRAINTS,
                                   tuple(cleaned), witness, residual)
    return SolutionVerdict(VerdictKind.NONZERO, tuple(cleaned), None, residual)
