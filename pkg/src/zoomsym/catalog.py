"""Case catalog for the generalized Zoomeron equations: the classified
(f, g) families with their admitted generators, the reference tables and
optimal systems as printed in the published classification, and the
two-dimensional subalgebras used for double reductions.

Where a printed generator is inconsistent with its own (f, g) family,
the catalog carries the engine-derived generator (these all pass
verify_symmetry) alongside the printed one; comparisons between the two
are surfaced as discrepancy notices, never silently patched.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dfield

import sympy as sp
from sympy import Rational, Symbol

from . import symkernel as sk
from . import jetspace as js
from . import detsys
from . import liealg
from .symkernel import u, t, x, y
from .jetspace import VectorField, field

K = Symbol("K")
alpha1 = Symbol("alpha1")
alpha2 = Symbol("alpha2")
g0 = Symbol("g0")
g1 = Symbol("g1")
alpha = Symbol("alpha")
beta = Symbol("beta")

V1 = ("t", "x")
V2 = ("t", "x", "y")

#: subalgebra coefficients for the double reductions
a1, a2, a3 = sp.symbols("a1 a2 a3")
b1, b2, b3 = sp.symbols("b1 b2 b3")
aA, bA = sp.symbols("aA bA")


@dataclass(frozen=True)
class CaseDef:
    equation: str                 # gze1 | gze2
    case: str                     # A..D | I..IV
    f_expr: sp.Expr
    g_expr: sp.Expr
    generator: VectorField        # engine-derived (verifies)
    printed_generator: VectorField
    generator_name: str
    ledger_extra: tuple = ()

    @property
    def variables(self):
        return V1 if self.equation == "gze1" else V2

    def pde(self) -> detsys.Pde:
        p = detsys.preset(self.equation, f=self.f_expr, g=self.g_expr)
        return p.with_ledger(*self.ledger_extra)

    def base_fields(self) -> list[VectorField]:
        return base_fields(self.equation)

    def algebra(self) -> liealg.LieAlgebra:
        gens = self.base_fields() + [self.generator]
        names = base_names(self.equation) + [self.generator_name]
        return liealg.structure_constants(gens, names)

    def generator_mismatch(self) -> bool:
        return self.generator != self.printed_generator


def base_fields(equation: str) -> list[VectorField]:
    if equation == "gze1":
        return [field(V1, t=1), field(V1, x=1)]
    return [field(V2, t=1), field(V2, x=1), field(V2, y=1),
            field(V2, t=t, x=x, y=-y)]


def base_names(equation: str) -> list[str]:
    return ["X1", "X2"] if equation == "gze1" else ["Y1", "Y2", "Y3", "Y4"]


_power_exp_1 = -2 / alpha1 - (K - 1)          # printed with X3, consistent
_power_exp_2 = -1 / alpha1 - (K - 1)          # printed with Y5 (sign-inconsistent)
_exp_exp = -(K + 2 / alpha2)                  # printed shape for C and III

CASES: dict[tuple[str, str], CaseDef] = {}


def _register(case: CaseDef):
    CASES[(case.equation, case.case)] = case


_register(CaseDef(
    "gze1", "A", u ** K, g0 + g1 * u ** _power_exp_1,
    generator=field(V1, t=t, x=x, u=alpha1 * u),
    printed_generator=field(V1, t=t, x=x, u=alpha1 * u),
    generator_name="X3",
    ledger_extra=(alpha1, g1, K, _power_exp_1)))

_register(CaseDef(
    "gze1", "B", u ** K, g0 + g1 * sp.log(u),
    generator=field(V1, t=t, x=x, u=2 * u / (1 - K)),
    printed_generator=field(V1, t=t, x=x, u=u / (1 - K)),
    generator_name="X4",
    ledger_extra=(g1, K, 1 - K)))

_register(CaseDef(
    "gze1", "C", sp.exp(K * u), g0 + g1 * sp.exp(_exp_exp * u),
    generator=field(V1, t=t, x=x, u=alpha2),
    printed_generator=field(V1, t=t, x=x, u=alpha2),
    generator_name="X5",
    ledger_extra=(alpha2, g1, K, K + 2 / alpha2)))

_register(CaseDef(
    "gze1", "D", sp.exp(K * u), g0 + g1 * u,
    generator=field(V1, t=t, x=x, u=Rational(-2, 1) / K),
    printed_generator=field(V1, t=t, x=x, u=Rational(-1, 1) / K),
    generator_name="X6",
    ledger_extra=(g1, K)))

_register(CaseDef(
    "gze2", "I", u ** K, g0 + g1 * u ** _power_exp_2,
    generator=field(V2, y=y, u=alpha1 * u),
    printed_generator=field(V2, y=y, u=-alpha1 * u),
    generator_name="Y5",
    ledger_extra=(alpha1, g1, K, _power_exp_2)))

_register(CaseDef(
    "gze2", "II", u ** K, g0 + g1 * sp.log(u),
    generator=field(V2, y=y, u=u / (1 - K)),
    printed_generator=field(V2, y=y, u=u / (1 - K)),
    generator_name="Y6",
    ledger_extra=(g1, K, 1 - K)))

_register(CaseDef(
    "gze2", "III", sp.exp(K * u), g0 + g1 * sp.exp(_exp_exp * u),
    generator=field(V2, y=y, u=alpha2 / 2),
    printed_generator=field(V2, y=y, u=alpha2),
    generator_name="Y7",
    ledger_extra=(alpha2, g1, K, K + 2 / alpha2)))

_register(CaseDef(
    "gze2", "IV", sp.exp(K * u), g0 + g1 * u,
    generator=field(V2, y=y, u=Rational(-1, 1) / K),
    printed_generator=field(V2, y=y, u=Rational(-1, 1) / K),
    generator_name="Y8",
    ledger_extra=(g1, K)))


def case(equation: str, label: str) -> CaseDef:
    try:
        return CASES[(equation, label)]
    except KeyError:
        raise KeyError(f"unknown case {label!r} for {equation}") from None


# ---------------------------------------------------------------------------
# Reference tables (as printed)
# ---------------------------------------------------------------------------

def _combo(names, **coeffs):
    vec = [sp.Integer(0)] * len(names)
    for nm, c in coeffs.items():
        vec[names.index(nm)] = sp.sympify(c)
    return tuple(vec)


eps = liealg.eps

NAMES_1 = ["X1", "X2", "XA"]
NAMES_2 = ["Y1", "Y2", "Y3", "Y4", "YA"]

#: printed commutator table for the three-dimensional algebras (correct)
PRINTED_COMMUTATORS_GZE1 = [
    [_combo(NAMES_1), _combo(NAMES_1), _combo(NAMES_1, X1=1)],
    [_combo(NAMES_1), _combo(NAMES_1), _combo(NAMES_1, X2=1)],
    [_combo(NAMES_1, X1=-1), _combo(NAMES_1, X2=-1), _combo(NAMES_1)],
]

#: printed commutator table for the five-dimensional algebras; four cells
#: carry the opposite sign of the actual brackets
PRINTED_COMMUTATORS_GZE2 = [
    [_combo(NAMES_2), _combo(NAMES_2), _combo(NAMES_2), _combo(NAMES_2, Y1=1), _combo(NAMES_2)],
    [_combo(NAMES_2), _combo(NAMES_2), _combo(NAMES_2), _combo(NAMES_2, Y2=1), _combo(NAMES_2)],
    [_combo(NAMES_2), _combo(NAMES_2), _combo(NAMES_2), _combo(NAMES_2, Y3=1), _combo(NAMES_2, Y3=-1)],
    [_combo(NAMES_2, Y1=-1), _combo(NAMES_2, Y2=-1), _combo(NAMES_2, Y3=-1), _combo(NAMES_2), _combo(NAMES_2)],
    [_combo(NAMES_2), _combo(NAMES_2), _combo(NAMES_2, Y3=1), _combo(NAMES_2), _combo(NAMES_2)],
]

_E = sp.exp(eps)

PRINTED_ADJOINT_GZE1 = [
    [_combo(NAMES_1, X1=1), _combo(NAMES_1, X2=1), _combo(NAMES_1, XA=1, X1=-eps)],
    [_combo(NAMES_1, X1=1), _combo(NAMES_1, X2=1), _combo(NAMES_1, XA=1, X2=-eps)],
    [_combo(NAMES_1, X1=_E), _combo(NAMES_1, X2=_E), _combo(NAMES_1, XA=1)],
]

PRINTED_ADJOINT_GZE2 = [
    [_combo(NAMES_2, Y1=1), _combo(NAMES_2, Y2=1), _combo(NAMES_2, Y3=1),
     _combo(NAMES_2, Y4=1, Y1=-eps), _combo(NAMES_2, YA=1)],
    [_combo(NAMES_2, Y1=1), _combo(NAMES_2, Y2=1), _combo(NAMES_2, Y3=1),
     _combo(NAMES_2, Y4=1, Y2=-eps), _combo(NAMES_2, YA=1)],
    [_combo(NAMES_2, Y1=_E), _combo(NAMES_2, Y2=_E), _combo(NAMES_2, Y3=1),
     _combo(NAMES_2, Y4=1, Y3=-eps), _combo(NAMES_2, YA=1, Y3=eps)],
    [_combo(NAMES_2, Y1=_E), _combo(NAMES_2, Y2=_E), _combo(NAMES_2, Y3=_E),
     _combo(NAMES_2, Y4=1), _combo(NAMES_2, YA=1)],
    [_combo(NAMES_2, Y1=1), _combo(NAMES_2, Y2=1), _combo(NAMES_2, Y3=_E),
     _combo(NAMES_2, Y4=1), _combo(NAMES_2, YA=1)],
]

#: printed one-dimensional optimal systems
def optimal_system_gze1_2dim() -> liealg.OptimalSystem:
    Z, I = sp.Integer(0), sp.Integer(1)
    a = liealg.coefficient_symbols(2)
    return liealg.OptimalSystem(
        representatives=((I, Z), (Z, I), (I, alpha)),
        labels=("{X1}", "{X2}", "{X1+a*X2}"),
        invariants=(a[0], a[1]))


def optimal_system_gze1_3dim() -> liealg.OptimalSystem:
    Z, I = sp.Integer(0), sp.Integer(1)
    a = liealg.coefficient_symbols(3)
    return liealg.OptimalSystem(
        representatives=((I, Z, Z), (Z, I, Z), (I, alpha, Z), (Z, Z, I)),
        labels=("{X1}", "{X2}", "{X1+a*X2}", "{XA}"),
        invariants=(a[2],))


def optimal_system_gze2_4dim() -> liealg.OptimalSystem:
    Z, I = sp.Integer(0), sp.Integer(1)
    a = liealg.coefficient_symbols(4)
    return liealg.OptimalSystem(
        representatives=((I, Z, Z, Z), (Z, I, Z, Z), (Z, Z, I, Z), (Z, Z, Z, I),
                         (I, alpha, Z, Z), (I, Z, alpha, Z), (Z, I, alpha, Z),
                         (I, alpha, beta, Z)),
        labels=("{Y1}", "{Y2}", "{Y3}", "{Y4}", "{Y1+a*Y2}", "{Y1+a*Y3}",
                "{Y2+a*Y3}", "{Y1+a*Y2+b*Y3}"),
        invariants=(a[3],))


def optimal_system_gze2_5dim() -> liealg.OptimalSystem:
    Z, I = sp.Integer(0), sp.Integer(1)
    a = liealg.coefficient_symbols(5)
    return liealg.OptimalSystem(
        representatives=((I, Z, Z, Z, Z), (Z, I, Z, Z, Z), (Z, Z, I, Z, Z),
                         (Z, Z, Z, I, Z),
                         (I, alpha, Z, Z, Z), (I, Z, alpha, Z, Z), (Z, I, alpha, Z, Z),
                         (I, alpha, beta, Z, Z),
                         (Z, Z, Z, Z, I), (Z, Z, Z, I, alpha), (I, Z, Z, Z, alpha),
                         (Z, I, Z, Z, alpha), (I, alpha, Z, Z, beta)),
        labels=("{Y1}", "{Y2}", "{Y3}", "{Y4}", "{Y1+a*Y2}", "{Y1+a*Y3}",
                "{Y2+a*Y3}", "{Y1+a*Y2+b*Y3}", "{YA}", "{Y4+a*YA}", "{Y1+a*YA}",
                "{Y2+a*YA}", "{Y1+a*Y2+b*YA}"),
        invariants=(a[3], a[4]))


OPTIMAL_SYSTEMS = {
    "2A1": optimal_system_gze1_2dim,
    "A3,3": optimal_system_gze1_3dim,
    "A4,5": optimal_system_gze2_4dim,
    "3A1(s)2A1": optimal_system_gze2_5dim,
}


# ---------------------------------------------------------------------------
# Two-dimensional subalgebras of the five-dimensional algebras
# ---------------------------------------------------------------------------

def subalgebra(name: str, case_label: str = "I") -> tuple[list[VectorField], dict]:
    """The pair of generators for A1..A5 plus reduction hints (preferred
    invariant/rule and extra ledger assumptions)."""
    cd = case("gze2", case_label)
    Y4 = field(V2, t=t, x=x, y=-y)
    Y3 = field(V2, y=1)
    YA = cd.generator
    from .reduction import U
    if name == "A1":
        v1 = field(V2, t=a1, x=a2, y=a3)
        v2 = field(V2, t=b1, x=b2, y=b3)
        hints = {"ledger": (a1, a1 * b2 - a2 * b1, a3 * b1 - a1 * b3),
                 "inv_name": "xi"}
        return [v1, v2], hints
    if name == "A2":
        v1 = field(V2, t=a1, x=a2)
        hints = {"invariant": (a2 * t - a1 * x) * y, "rule": U[0],
                 "ledger": (a1, a2, a2 ** 2 - a1 ** 2), "inv_name": "zeta"}
        return [v1, Y4], hints
    if name == "A3":
        return [Y3, Y4], {"inv_name": "sigma"}
    if name == "A4":
        return [Y4, YA], {"inv_name": "sigma", "ledger": cd.ledger_extra}
    if name == "A5":
        v1 = field(V2, t=a1, x=a2) + aA * YA
        v2 = field(V2, t=b1, x=b2) + bA * YA
        hints = {"ledger": (*cd.ledger_extra, a1, b1, aA, bA,
                            bA * a1 - aA * b1, bA * a2 - aA * b2,
                            b2 * (bA * a1 - aA * b1) - b1 * (bA * a2 - aA * b2)),
                 "inv_name": "zeta"}
        return [v1, v2], hints
    raise KeyError(f"unknown subalgebra {name!r}")


SUBALGEBRAS = ("A1", "A2", "A3", "A4", "A5")
