"""Jet-space bookkeeping: total derivatives, point vector fields, and
prolongation of generators up to order MAX_JET_ORDER."""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import sympy as sp
from sympy import Symbol

from . import symkernel as sk
from .symkernel import Expr, INDEPENDENT, MAX_JET_ORDER, u


@dataclass(frozen=True, order=True)
class JetCoord:
    """A derivative coordinate u_J; indices are kept canonically sorted so
    u_xt and u_tx are the same coordinate."""

    indices: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "indices", tuple(sorted(self.indices)))

    @property
    def order(self) -> int:
        return len(self.indices)

    @property
    def symbol(self) -> Symbol:
        return sk.jet_symbol(self.indices)

    def extended(self, var: str) -> "JetCoord":
        if self.order + 1 > MAX_JET_ORDER:
            raise ValueError(f"jet order bound {MAX_JET_ORDER} exceeded at u_{''.join(self.indices)}{var}")
        return JetCoord(self.indices + (var,))

    @classmethod
    def from_symbol(cls, sym: Symbol) -> "JetCoord":
        return cls(sk.jet_indices(sym))

    @property
    def key(self) -> str:
        return "".join(self.indices)

    def __str__(self) -> str:
        return "u" if not self.indices else "u_" + self.key


def _var_name(v) -> str:
    if isinstance(v, Symbol) and v.name in INDEPENDENT:
        return v.name
    if isinstance(v, str) and v in INDEPENDENT:
        return v
    raise ValueError(f"{v} is not an independent variable")


def total_derivative(e: Expr, v) -> Expr:
    """D_v e = de/dv + sum over jets u_J of u_{J,v} * de/du_J.

    Raises when the result would exceed the configured jet order bound.
    """
    name = _var_name(v)
    var = INDEPENDENT[name]
    e = sp.sympify(e)
    out = sp.diff(e, var)
    for jet in [u] + sk.jets_in(e):
        de = sp.diff(e, jet)
        if de == 0:
            continue
        succ = JetCoord(sk.jet_indices(jet)).extended(name)
        out += succ.symbol * de
    return sk.normalize(out)


@dataclass(frozen=True)
class VectorField:
    """Point symmetry generator: one coefficient per independent variable
    plus the dependent coefficient eta, all functions of (t, x, [y], u)."""

    variables: tuple[str, ...]
    xi: tuple[Expr, ...]
    eta: Expr

    def __post_init__(self):
        if len(self.variables) != len(self.xi):
            raise ValueError("one xi coefficient per independent variable required")
        for c in (*self.xi, self.eta):
            if sk.jets_in(sp.sympify(c)):
                raise ValueError(f"point symmetry coefficients must be jet-free: {c}")

    def coeff(self, var: str) -> Expr:
        if var == "u":
            return self.eta
        return self.xi[self.variables.index(var)]

    def apply(self, F: Expr) -> Expr:
        """First-order directional derivative on functions of (t, x, y, u)."""
        F = sp.sympify(F)
        out = self.eta * sp.diff(F, u)
        for name, c in zip(self.variables, self.xi):
            out += c * sp.diff(F, INDEPENDENT[name])
        return sk.normalize(out)

    def __add__(self, other: "VectorField") -> "VectorField":
        if self.variables != other.variables:
            raise ValueError("variable sets differ")
        return VectorField(self.variables,
                           tuple(sk.normalize(a + b) for a, b in zip(self.xi, other.xi)),
                           sk.normalize(self.eta + other.eta))

    def __rmul__(self, c) -> "VectorField":
        c = sp.sympify(c)
        return VectorField(self.variables, tuple(sk.normalize(c * a) for a in self.xi),
                           sk.normalize(c * self.eta))

    def __neg__(self) -> "VectorField":
        return sp.Integer(-1) * self

    def is_zero_field(self) -> bool:
        return all(sk.normalize(c) == 0 for c in (*self.xi, self.eta))

    def render(self) -> str:
        parts = [sk.render(sk.normalize(c)) for c in self.xi]
        parts.append(sk.render(sk.normalize(self.eta)))
        return "; ".join(parts)

    @classmethod
    def parse(cls, text: str, variables: Sequence[str] | None = None) -> "VectorField":
        """Parse the `xi_t; xi_x[; xi_y]; eta` text format."""
        slots = [sk.parse(p) for p in text.split(";")]
        if len(slots) == 3:
            vars_ = ("t", "x")
        elif len(slots) == 4:
            vars_ = ("t", "x", "y")
        else:
            raise ValueError("expected 3 or 4 semicolon-separated coefficients")
        if variables is not None and tuple(variables) != vars_:
            raise ValueError(f"field has variables {vars_}, expected {tuple(variables)}")
        return cls(vars_, tuple(slots[:-1]), slots[-1])


def field(variables: Sequence[str], **coeffs) -> VectorField:
    """Convenience constructor: field(('t','x'), t=..., x=..., u=...)."""
    xi = tuple(sp.sympify(coeffs.get(v, 0)) for v in variables)
    return VectorField(tuple(variables), xi, sp.sympify(coeffs.get("u", 0)))


def commutator(X: VectorField, Y: VectorField) -> VectorField:
    """Lie bracket [X, Y], componentwise X(Y^k) - Y(X^k)."""
    if X.variables != Y.variables:
        raise ValueError("variable sets differ")
    xi = tuple(sk.normalize(X.apply(Y.xi[i]) - Y.apply(X.xi[i]))
               for i in range(len(X.variables)))
    eta = sk.normalize(X.apply(Y.eta) - Y.apply(X.eta))
    return VectorField(X.variables, xi, eta)


@dataclass(frozen=True)
class ProlongedField:
    """A vector field together with its prolongation coefficients eta^J."""

    base: VectorField
    order: int
    coeffs: dict  # JetCoord -> Expr

    def coeff(self, jet: JetCoord) -> Expr:
        return self.coeffs[jet]

    def apply(self, e: Expr) -> Expr:
        """pr(X)(e) = xi^i de/dx^i + eta de/du + sum eta^J de/du_J."""
        e = sp.sympify(e)
        out = self.base.apply(e)
        for jet_sym in sk.jets_in(e):
            jc = JetCoord.from_symbol(jet_sym)
            if jc.order > self.order:
                raise ValueError(f"expression contains {jet_sym} beyond prolongation order {self.order}")
            out += self.coeffs[jc] * sp.diff(e, jet_sym)
        return sk.normalize(out)

    def to_json(self) -> str:
        data = {jc.key: sk.render(expr) for jc, expr in sorted(self.coeffs.items())}
        data[""] = sk.render(sk.normalize(self.base.eta))
        return json.dumps(data, sort_keys=True)


def prolong(X: VectorField, order: int) -> ProlongedField:
    """Prolong a point generator by the standard recursion
    eta^{J,i} = D_i eta^J - sum_j u_{J,j} D_i xi^j, with eta^{} = eta.

    Each canonical multi-index is computed once, peeling its last index;
    mixed partials are consistent because the base field is a point field.
    """
    if order > MAX_JET_ORDER:
        raise ValueError(f"order {order} exceeds maximum {MAX_JET_ORDER}")
    dxi: dict[str, dict[str, Expr]] = {}
    for i in X.variables:
        dxi[i] = {j: total_derivative(X.xi[X.variables.index(j)], i) for j in X.variables}

    coeffs: dict[JetCoord, Expr] = {JetCoord(()): sk.normalize(X.eta)}
    by_order: dict[int, list[JetCoord]] = {0: [JetCoord(())]}
    for n in range(1, order + 1):
        by_order[n] = []
        seen = set()
        for prev in by_order[n - 1]:
            for i in X.variables:
                jc = prev.extended(i)
                if jc in seen:
                    continue
                seen.add(jc)
                # canonical path: peel the last (largest) index of jc
                last = jc.indices[-1]
                parent = JetCoord(jc.indices[:-1])
                expr = total_derivative(coeffs[parent], last)
                for j in X.variables:
                    expr -= parent.extended(j).symbol * dxi[last][j]
                coeffs[jc] = sk.normalize(expr)
                by_order[n].append(jc)
    return ProlongedField(X, order, coeffs)
