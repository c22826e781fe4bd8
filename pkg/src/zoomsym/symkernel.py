"""Exact symbolic kernel: expression construction, parsing, rendering,
differentiation, canonical normalization, zero-testing and coefficient
collection.

Expressions are sympy trees restricted to a fixed atom set: rational
constants, named parameters, the independent variables t, x, y, the
dependent variable u and its jet coordinates (u_t, u_tx, ...), power
nodes with possibly symbolic exponents, exp/ln kernels, and the abstract
function symbols f(u), g(u) with derivative markers.  Everything is
immutable and safe to share between threads; the only stateful object is
the RNG used for numeric sampling, which is always passed in explicitly.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping

import sympy as sp
from sympy import Derivative, Function, Rational, Symbol
from sympy.core.function import AppliedUndef

Expr = sp.Expr

# Fixed variable atoms.  Everything else with a plain name is a parameter.
t = Symbol("t")
x = Symbol("x")
y = Symbol("y")
u = Symbol("u")
INDEPENDENT = {"t": t, "x": x, "y": y}

f = Function("f")
g = Function("g")
ABSTRACT_FUNCS = {"f": f, "g": g}

#: Highest jet order the kernel will represent (PDE order 4 plus headroom
#: for one more total derivative).
MAX_JET_ORDER = 5

_JET_LETTERS = ("t", "x", "y")


def jet_symbol(indices: Iterable[str]) -> Symbol:
    """Jet coordinate symbol for a multi-index over t/x/y.

    Mixed partials commute, so the multi-index is sorted into canonical
    order; ``jet_symbol("xt") is jet_symbol("tx")``.  The empty index
    returns u itself.
    """
    idx = tuple(sorted(indices))
    if not idx:
        return u
    if len(idx) > MAX_JET_ORDER:
        raise ValueError(f"jet order {len(idx)} exceeds maximum {MAX_JET_ORDER}")
    for c in idx:
        if c not in _JET_LETTERS:
            raise ValueError(f"bad jet index {c!r}")
    return Symbol("u_" + "".join(idx))


def is_jet(sym: sp.Basic) -> bool:
    """True for jet coordinate symbols of order >= 1 (u itself excluded)."""
    if not isinstance(sym, Symbol):
        return False
    name = sym.name
    if not name.startswith("u_") or len(name) < 3:
        return False
    idx = name[2:]
    return all(c in _JET_LETTERS for c in idx) and list(idx) == sorted(idx)


def jet_indices(sym: Symbol) -> tuple[str, ...]:
    if sym == u:
        return ()
    if not is_jet(sym):
        raise ValueError(f"{sym} is not a jet coordinate")
    return tuple(sym.name[2:])


def jets_in(e: Expr) -> list[Symbol]:
    """All jet coordinate symbols of order >= 1 occurring in e, sorted."""
    out = [s for s in e.free_symbols if is_jet(s)]
    return sorted(out, key=lambda s: (len(s.name), s.name))


class ZeroVerdict(Enum):
    IDENTICALLY_ZERO = "identically_zero"
    NONZERO = "nonzero"
    UNDECIDED = "undecided"


@dataclass(frozen=True)
class AssumptionLedger:
    """Set of expressions asserted nonzero.

    Cancelling a factor from an equation is allowed only when the factor
    is justified by the ledger; the independent variables themselves are
    treated as generic (nonzero) points.
    """

    nonzero: tuple[Expr, ...] = ()

    def with_nonzero(self, *exprs: Expr) -> "AssumptionLedger":
        known = list(self.nonzero)
        for e in exprs:
            e = sp.sympify(e)
            if not any(e == k for k in known):
                known.append(e)
        return AssumptionLedger(tuple(known))

    def allows_cancel(self, factor: Expr) -> bool:
        """Whether ``factor`` is a product of ledger members, powers of
        members, nonzero rationals, independent variables, exp kernels."""
        factor = sp.sympify(factor)
        if factor.is_Rational:
            return factor != 0
        if isinstance(factor, sp.exp):
            return True
        if factor.free_symbols & {t, x, y}:
            # factors carrying independent variables hold at generic points
            return True
        for k in self.nonzero:
            if factor == k or sp.cancel(factor - k) == 0 or sp.cancel(factor + k) == 0:
                return True
            if k.is_Pow and k.base == factor:
                return True
        if factor.is_Mul:
            return all(self.allows_cancel(a) for a in factor.args)
        if factor.is_Pow:
            return self.allows_cancel(factor.base)
        return False

    def violated_by(self, subs: Mapping[sp.Basic, sp.Basic], tol: float = 1e-6) -> bool:
        """True if a sample assignment lands (numerically) on a ledger zero."""
        for e in self.nonzero:
            try:
                val = sp.sympify(e).xreplace(dict(subs))
                val = complex(val.evalf(20))
            except Exception:
                continue
            if abs(val) < tol:
                return True
        return False


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

class ParseError(ValueError):
    def __init__(self, msg: str, pos: int):
        super().__init__(f"{msg} (at position {pos})")
        self.pos = pos


_TOKEN_OPS = set("+-*/^(),;")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    toks = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c in _TOKEN_OPS:
            toks.append(("op", c, i))
            i += 1
            continue
        if c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            toks.append(("num", text[i:j], i))
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            toks.append(("name", text[i:j], i))
            i = j
            continue
        raise ParseError(f"unexpected character {c!r}", i)
    toks.append(("end", "", n))
    return toks


class _Parser:
    """Recursive-descent parser for the expression grammar.

    Grammar: `+ - * / ^` with usual precedence, `^` binding tightest and
    right-associative; calls exp( ), ln( ), f( ), g( ); total derivatives
    Dt( ) Dx( ) Dy( ); partial derivative d(e, v); rationals written p/q;
    jet coordinates as u_tx etc. (any index order accepted, canonicalized
    on construction).
    """

    def __init__(self, text: str, strict: bool = False, known: set[str] | None = None):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0
        self.strict = strict
        self.known = known or set()

    def peek(self):
        return self.toks[self.i]

    def next(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, val: str):
        kind, v, pos = self.next()
        if v != val:
            raise ParseError(f"expected {val!r}, found {v!r}", pos)

    def parse(self) -> Expr:
        e = self.expr()
        kind, v, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected trailing {v!r}", pos)
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.next()[1]
            rhs = self.term()
            e = e + rhs if op == "+" else e - rhs
        return e

    def term(self) -> Expr:
        e = self.unary()
        while self.peek()[1] in ("*", "/"):
            op = self.next()[1]
            rhs = self.unary()
            e = e * rhs if op == "*" else e / rhs
        return e

    def unary(self) -> Expr:
        if self.peek()[1] == "-":
            self.next()
            return -self.unary()
        if self.peek()[1] == "+":
            self.next()
            return self.unary()
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.peek()[1] == "^":
            self.next()
            return base ** self.unary()
        return base

    def atom(self) -> Expr:
        kind, v, pos = self.next()
        if v == "(":
            e = self.expr()
            self.expect(")")
            return e
        if kind == "num":
            return sp.Integer(int(v))
        if kind != "name":
            raise ParseError(f"unexpected token {v!r}", pos)
        if self.peek()[1] == "(":
            return self.call(v, pos)
        return self.name_atom(v, pos)

    def call(self, name: str, pos: int) -> Expr:
        self.expect("(")
        arg = self.expr()
        if name == "d":
            self.expect(",")
            var = self.expr()
            self.expect(")")
            if not isinstance(var, Symbol):
                raise ParseError("second argument of d() must be a symbol", pos)
            return diff(arg, var)
        self.expect(")")
        if name == "exp":
            return sp.exp(arg)
        if name == "ln":
            return sp.log(arg)
        if name in ABSTRACT_FUNCS:
            return ABSTRACT_FUNCS[name](arg)
        if name in ("Dt", "Dx", "Dy"):
            from . import jetspace

            return jetspace.total_derivative(arg, INDEPENDENT[name[1].lower()])
        raise ParseError(f"unknown function {name!r}", pos)

    def name_atom(self, name: str, pos: int) -> Expr:
        if name in INDEPENDENT:
            return INDEPENDENT[name]
        if name == "u":
            return u
        if name.startswith("u_"):
            try:
                return jet_symbol(name[2:])
            except ValueError:
                raise ParseError(f"bad jet coordinate {name!r}", pos)
        if self.strict and name not in self.known:
            raise ParseError(f"unknown identifier {name!r}", pos)
        return Symbol(name)


def parse(text: str, strict: bool = False, known: set[str] | None = None) -> Expr:
    """Parse an expression string; the result is normalized."""
    return normalize(_Parser(text, strict=strict, known=known).parse())


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------

def _needs_parens_in_product(e: Expr) -> bool:
    return e.is_Add


def _render_pow(e: Expr) -> str:
    base, expo = e.base, e.exp
    bs = render(base)
    if base.is_Add or base.is_Mul or base.is_Pow or (base.is_Rational and not base.is_Integer) or (base.is_number and base < 0):
        bs = f"({bs})"
    es = render(expo)
    if (expo.is_Integer and expo > 0) or expo.is_Symbol:
        return f"{bs}^{es}"
    return f"{bs}^({es})"


def _render_factor(e: Expr) -> str:
    s = render(e)
    return f"({s})" if _needs_parens_in_product(e) else s


def render(e: Expr) -> str:
    """Deterministic canonical text form; parse(render(e)) == e."""
    e = sp.sympify(e)
    if e.is_Symbol:
        return e.name
    if e.is_Integer:
        return str(e)
    if e.is_Rational:
        return f"{e.p}/{e.q}"
    if isinstance(e, sp.exp):
        return f"exp({render(e.args[0])})"
    if isinstance(e, sp.log):
        return f"ln({render(e.args[0])})"
    if isinstance(e, AppliedUndef):
        return f"{e.func.__name__}({render(e.args[0])})"
    if isinstance(e, Derivative):
        inner = render(e.expr)
        for var, count in e.variable_count:
            for _ in range(int(count)):
                inner = f"d({inner}, {render(var)})"
        return inner
    if e.is_Pow:
        return _render_pow(e)
    if e.is_Mul:
        num_parts: list[str] = []
        den_parts: list[str] = []
        coeff = sp.Integer(1)
        for a in e.args:
            if a.is_Rational:
                coeff *= a
            elif a.is_Pow and a.exp.is_Rational and a.exp < 0:
                inv = a.base ** (-a.exp)
                den_parts.append(_render_factor(inv) if not inv.is_Pow else _render_pow(inv))
            else:
                num_parts.append(_render_factor(a) if not a.is_Pow else _render_pow(a))
        num_parts.sort()
        den_parts.sort()
        if coeff.q != 1:
            den_parts.insert(0, str(coeff.q))
        sign = ""
        if coeff.p < 0:
            sign = "-"
        if abs(coeff.p) != 1 or not num_parts:
            num_parts.insert(0, str(abs(coeff.p)))
        num = "*".join(num_parts)
        if den_parts:
            den = "*".join(den_parts)
            if len(den_parts) > 1:
                den = f"({den})"
            return f"{sign}{num}/{den}"
        return f"{sign}{num}"
    if e.is_Add:
        parts = sorted(render(a) for a in e.args)
        out = parts[0]
        for p in parts[1:]:
            if p.startswith("-"):
                out += " - " + p[1:]
            else:
                out += " + " + p
        return out
    raise ValueError(f"cannot render node {type(e).__name__}: {e}")


# ---------------------------------------------------------------------------
# Core operations
# ---------------------------------------------------------------------------

def normalize(e: Expr) -> Expr:
    """Canonical additive normal form.

    Sums/products are flattened and commutatively sorted and rational
    constants folded by construction; expansion distributes products over
    sums so that structural equality is a usable zero test.  Idempotent.
    """
    return sp.expand(sp.sympify(e))


def diff(e: Expr, v: Symbol) -> Expr:
    """Exact partial derivative treating jet coordinates as independent
    symbols; abstract f/g differentiate by raising the derivative order."""
    e = sp.sympify(e)
    if not isinstance(v, Symbol):
        raise ValueError(f"cannot differentiate with respect to {v}")
    return normalize(sp.diff(e, v))


def _instantiate_abstract(e: Expr, rng: random.Random) -> Expr:
    """Replace f/g atoms (and their derivative markers) by random cubics
    so that numeric sampling is consistent across derivative orders."""
    replacements: dict[sp.Basic, Expr] = {}
    polys: dict[str, sp.Poly] = {}
    z = Symbol("_z")

    def poly_for(name: str):
        if name not in polys:
            coeffs = [Rational(rng.randint(1, 4), rng.randint(1, 3)) * rng.choice([-1, 1])
                      for _ in range(4)]
            polys[name] = sp.Poly(coeffs, z)
        return polys[name]

    for atom in e.atoms(Derivative):
        if isinstance(atom.expr, AppliedUndef):
            name = atom.expr.func.__name__
            arg = atom.expr.args[0]
            order = sum(int(c) for _, c in atom.variable_count)
            p = poly_for(name).as_expr()
            replacements[atom] = sp.diff(p, z, order).subs(z, arg)
    for atom in e.atoms(AppliedUndef):
        name = atom.func.__name__
        replacements.setdefault(atom, poly_for(name).as_expr().subs(z, atom.args[0]))
    return e.xreplace(replacements)


def _sample_point(e: Expr, rng: random.Random, ledger: AssumptionLedger,
                  retries: int = 12) -> dict[sp.Basic, sp.Basic] | None:
    """Draw a sample assignment for all symbols, avoiding ledger zeros.

    u and its jets are sampled positive so that u^K and ln(u) stay real.
    """
    syms = sorted(e.free_symbols, key=lambda s: s.name)
    for _ in range(retries):
        subs: dict[sp.Basic, sp.Basic] = {}
        for s in syms:
            if s == u or is_jet(s) or s in (t, x, y):
                val = Rational(rng.randint(1, 40), rng.randint(1, 9))
            else:
                val = Rational(rng.choice([-1, 1]) * rng.randint(1, 25), rng.randint(1, 7))
            subs[s] = val
        if not ledger.violated_by(subs):
            return subs
    return None


def _eval_at(e: Expr, subs: Mapping[sp.Basic, sp.Basic]) -> complex | None:
    try:
        val = e.xreplace(dict(subs)).evalf(40)
        val = complex(val)
    except (TypeError, ValueError, ZeroDivisionError, OverflowError):
        return None
    if val != val or abs(val) == float("inf"):  # nan / inf
        return None
    return val


_SIMPLIFY_OPS_LIMIT = 600


def is_zero(e: Expr, ledger: AssumptionLedger | None = None,
            rng: random.Random | None = None, samples: int = 16,
            tol: float = 1e-9) -> ZeroVerdict:
    """Three-stage zero test.

    IdenticallyZero requires the canonical rational normal form over the
    transcendental kernels to vanish; Nonzero requires a sample point
    (drawn from a seeded distribution avoiding ledger zeros) where the
    value exceeds tol; everything else is Undecided, never silently zero.
    """
    ledger = ledger or AssumptionLedger()
    rng = rng or random.Random(0)
    e = sp.sympify(e)
    if e == 0:
        return ZeroVerdict.IDENTICALLY_ZERO
    e2 = normalize(e)
    if e2 == 0:
        return ZeroVerdict.IDENTICALLY_ZERO
    if e2.is_Rational:
        return ZeroVerdict.NONZERO
    try:
        num, _den = sp.fraction(sp.cancel(sp.together(e2)))
        num = sp.expand(num)
        if num == 0:
            return ZeroVerdict.IDENTICALLY_ZERO
    except Exception:
        num = e2

    concrete = _instantiate_abstract(num, random.Random(rng.randint(0, 2**30)))
    clean_samples = 0
    for _ in range(samples):
        subs = _sample_point(concrete, rng, ledger)
        if subs is None:
            continue
        val = _eval_at(concrete, subs)
        if val is None:
            continue
        clean_samples += 1
        if abs(val) > tol:
            return ZeroVerdict.NONZERO
    if clean_samples == 0:
        return ZeroVerdict.UNDECIDED
    # numerically zero everywhere: one harder structural attempt
    if sp.count_ops(num) <= _SIMPLIFY_OPS_LIMIT:
        if sp.simplify(num) == 0:
            return ZeroVerdict.IDENTICALLY_ZERO
    return ZeroVerdict.UNDECIDED


def collect(e: Expr, coords: Iterable[Symbol]) -> dict[Expr, Expr]:
    """Collect e as a polynomial in the given jet coordinates.

    Returns a map from monomial (product of powers of coords, 1 for the
    constant part) to coefficient; coefficients are free of the coords.
    Raises ValueError on non-polynomial dependence.
    """
    coords = list(coords)
    coord_set = set(coords)
    e = normalize(e)
    out: dict[Expr, Expr] = {sp.Integer(1): sp.Integer(0)}
    terms = e.args if e.is_Add else (e,)
    for term in terms:
        factors = term.args if term.is_Mul else (term,)
        mono = sp.Integer(1)
        coeff = sp.Integer(1)
        for fac in factors:
            base, expo = (fac.base, fac.exp) if fac.is_Pow else (fac, sp.Integer(1))
            if base in coord_set:
                if not (expo.is_Integer and expo > 0):
                    raise ValueError(f"non-polynomial dependence on {base}: {fac}")
                mono *= base ** expo
            else:
                if coord_set & fac.free_symbols:
                    raise ValueError(f"non-polynomial dependence inside {fac}")
                coeff *= fac
        out[mono] = sp.Add(out.get(mono, sp.Integer(0)), coeff)
    return {m: normalize(c) for m, c in out.items()}


def reconstruct(collected: Mapping[Expr, Expr]) -> Expr:
    """Sum of monomial*coefficient; inverse of collect up to normalize."""
    return normalize(sp.Add(*[m * c for m, c in collected.items()]))
