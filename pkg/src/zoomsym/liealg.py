"""Finite-dimensional Lie algebra layer: structure constants, catalog
identification, adjoint representation, adjoint invariants and
one-dimensional optimal system checks."""
from __future__ import annotations

import random
from dataclasses import dataclass, field as dfield
from typing import Sequence

import sympy as sp
from sympy import Rational, Symbol

from . import symkernel as sk
from .symkernel import Expr, ZeroVerdict, u
from .jetspace import VectorField, commutator

eps = Symbol("eps")


class ClosureError(ValueError):
    pass


def _basis_expand(basis: Sequence[VectorField], W: VectorField) -> tuple[Expr, ...]:
    """Coefficients of W in the given basis; raises ClosureError when W is
    outside the span."""
    cs = sp.symbols(f"_bx0:{len(basis)}")
    poly_vars = [sk.INDEPENDENT[v] for v in W.variables] + [u]
    eqs = []
    for slot in (*W.variables, "u"):
        expr = sp.expand(sp.Add(*[c * B.coeff(slot) for c, B in zip(cs, basis)])
                         - W.coeff(slot))
        if expr == 0:
            continue
        try:
            poly = sp.Poly(expr, *poly_vars)
        except sp.PolynomialError as exc:
            raise ClosureError(f"non-polynomial coefficient {expr}") from exc
        eqs.extend(poly.coeffs())
    sol = sp.linsolve(eqs, cs)
    if not sol:
        raise ClosureError(f"commutator {W.render()} is outside the basis span")
    vals = next(iter(sol))
    if any(v.free_symbols & set(cs) for v in vals):
        # underdetermined: basis is linearly dependent; pin free values to 0
        vals = tuple(v.xreplace({c: sp.Integer(0) for c in cs}) for v in vals)
    return tuple(sp.cancel(v) for v in vals)


@dataclass(frozen=True)
class LieAlgebra:
    """Ordered basis plus structure constants C[i][j][k] with
    [X_i, X_j] = sum_k C[i][j][k] X_k."""

    basis: tuple[VectorField, ...]
    constants: tuple[tuple[tuple[Expr, ...], ...], ...]
    names: tuple[str, ...]

    @property
    def dim(self) -> int:
        return len(self.basis)

    def C(self, i: int, j: int, k: int) -> Expr:
        return self.constants[i][j][k]

    def bracket_vector(self, i: int, j: int) -> tuple[Expr, ...]:
        return self.constants[i][j]

    def ad_matrix(self, i: int) -> sp.Matrix:
        """Matrix of ad(X_i): column j holds [X_i, X_j] in the basis."""
        n = self.dim
        return sp.Matrix(n, n, lambda k, j: self.constants[i][j][k])

    def jacobi_defect(self, i: int, j: int, k: int) -> tuple[Expr, ...]:
        n = self.dim
        out = []
        for l in range(n):
            s = sp.Integer(0)
            for m in range(n):
                s += (self.C(i, j, m) * self.C(m, k, l)
                      + self.C(j, k, m) * self.C(m, i, l)
                      + self.C(k, i, m) * self.C(m, j, l))
            out.append(sp.cancel(s))
        return tuple(out)


def structure_constants(basis: Sequence[VectorField],
                        names: Sequence[str] | None = None) -> LieAlgebra:
    """Expand each pairwise commutator in the basis; fails loudly (with
    the offending commutator) when the basis is not closed."""
    n = len(basis)
    names = tuple(names) if names else tuple(f"X{i + 1}" for i in range(n))
    zero = tuple(sp.Integer(0) for _ in range(n))
    table = [[zero for _ in range(n)] for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            W = commutator(basis[i], basis[j])
            if W.is_zero_field():
                continue
            coeffs = _basis_expand(basis, W)
            table[i][j] = coeffs
            table[j][i] = tuple(sp.cancel(-c) for c in coeffs)
    return LieAlgebra(tuple(basis), tuple(tuple(row) for row in table), names)


# ---------------------------------------------------------------------------
# Identification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Identification:
    label: str
    features: dict
    weights: tuple[Expr, ...] = ()


def _derived_span(alg: LieAlgebra) -> sp.Matrix:
    rows = []
    for i in range(alg.dim):
        for j in range(i + 1, alg.dim):
            rows.append(list(alg.bracket_vector(i, j)))
    if not rows:
        return sp.zeros(0, alg.dim)
    M = sp.Matrix(rows)
    reduced, pivots = M.rref()
    return reduced[:len(pivots), :]

def _center_dim(alg: LieAlgebra) -> int:
    n = alg.dim
    rows = []
    for j in range(n):
        for k in range(n):
            rows.append([alg.C(i, j, k) for i in range(n)])
    M = sp.Matrix(rows)
    return len(M.nullspace())


def _is_abelian_span(alg: LieAlgebra, span: sp.Matrix) -> bool:
    for r in range(span.rows):
        for s in range(r + 1, span.rows):
            for k in range(alg.dim):
                val = sp.Integer(0)
                for i in range(alg.dim):
                    for j in range(alg.dim):
                        val += span[r, i] * span[s, j] * alg.C(i, j, k)
                if sp.cancel(val) != 0:
                    return False
    return True


def _complement(span: sp.Matrix, dim: int) -> list[sp.Matrix]:
    """Coordinate vectors completing the span to the full space."""
    out = []
    M = span
    for k in range(dim):
        e = sp.zeros(1, dim)
        e[0, k] = 1
        cand = M.col_join(e)
        if cand.rank() > M.rank():
            M = cand
            out.append(e.T)
    return out


def _ad_on_span(alg: LieAlgebra, w: sp.Matrix, span: sp.Matrix) -> sp.Matrix:
    """Matrix of ad(w) restricted to the row-span (assumes invariance)."""
    r = span.rows
    images = []
    for s in range(r):
        img = sp.zeros(alg.dim, 1)
        for i in range(alg.dim):
            for j in range(alg.dim):
                for k in range(alg.dim):
                    img[k] += w[i] * span[s, j] * alg.C(i, j, k)
        images.append(img)
    # express each image in the span basis
    B = span.T  # dim x r
    out = sp.zeros(r, r)
    for s, img in enumerate(images):
        sol = B.solve_least_squares(img) if B.rows != B.cols else B.solve(img)
        coords = sp.Matrix([sp.cancel(v) for v in sol])
        if sp.simplify(B * coords - img) != sp.zeros(alg.dim, 1):
            raise ClosureError("derived algebra is not ad-invariant")
        out[:, s] = coords
    return out


def identify(alg: LieAlgebra) -> Identification:
    """Match against the catalog {nA1, A3,3, A4,5^{ab}, 3A1(s)2A1} via
    derived-algebra dimension, center dimension and ad eigenvalues.

    Unmatched algebras come back labeled "unrecognized" with the computed
    features; catalog membership is invariant under basis permutation and
    rational rescaling.
    """
    n = alg.dim
    derived = _derived_span(alg)
    d_dim = derived.rows
    feats = {"dim": n, "derived_dim": d_dim, "center_dim": _center_dim(alg)}
    if d_dim == 0:
        return Identification(f"{n}A1", feats)
    derived_abelian = _is_abelian_span(alg, derived)
    feats["derived_abelian"] = derived_abelian
    comp = _complement(derived, n)

    if n == 3 and d_dim == 2 and derived_abelian and len(comp) == 1:
        M = _ad_on_span(alg, comp[0], derived)
        lam = sp.cancel(M[0, 0])
        if lam != 0 and sp.simplify(M - lam * sp.eye(2)) == sp.zeros(2, 2):
            return Identification("A3,3", feats, (sp.Integer(1), sp.Integer(1)))

    if n == 4 and d_dim == 3 and derived_abelian and len(comp) == 1:
        M = _ad_on_span(alg, comp[0], derived)
        eig = _rational_eigs(M)
        if eig is not None and M.is_diagonalizable() and all(e != 0 for e in eig):
            a, b = _normalize_weights(eig)
            feats["ad_eigenvalues"] = tuple(eig)
            return Identification("A4,5^{ab}", feats, (sp.Integer(1), a, b))

    if n == 5 and d_dim == 3 and derived_abelian and len(comp) == 2:
        w1, w2 = comp
        # the complement pair must commute modulo nothing (2A1 factor)
        br = sp.zeros(n, 1)
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    br[k] += w1[i] * w2[j] * alg.C(i, j, k)
        if sp.simplify(br) == sp.zeros(n, 1):
            M1 = _ad_on_span(alg, w1, derived)
            M2 = _ad_on_span(alg, w2, derived)
            if _rational_eigs(M1) is not None and _rational_eigs(M2) is not None \
                    and sp.simplify(M1 * M2 - M2 * M1) == sp.zeros(3, 3):
                return Identification("3A1(s)2A1", feats)
    return Identification("unrecognized", feats)


def _rational_eigs(M: sp.Matrix):
    try:
        ev = M.eigenvals()
    except Exception:
        return None
    out = []
    for val, mult in ev.items():
        if not val.is_rational:
            return None
        out.extend([val] * mult)
    return sorted(out, reverse=True)


def _normalize_weights(eigs):
    """Scale the eigenvalue multiset to the form (1, a, b) with
    -1 <= b <= a <= 1, breaking ties lexicographically."""
    candidates = []
    for lam in eigs:
        if lam == 0:
            continue
        scaled = sorted([sp.Rational(e, 1) / lam for e in eigs], reverse=True)
        if 1 not in scaled:
            continue
        rest = list(scaled)
        rest.remove(1)
        a, b = max(rest), min(rest)
        if -1 <= b <= a <= 1:
            candidates.append((a, b))
    if not candidates:
        scaled = sorted([e / eigs[0] for e in eigs], reverse=True)
        rest = scaled[1:]
        return max(rest), min(rest)
    return max(candidates)


# ---------------------------------------------------------------------------
# Adjoint representation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AdjointTable:
    """entries[i][j] = coefficient vector of Ad(exp(eps*X_i)) X_j."""

    algebra: LieAlgebra
    entries: tuple[tuple[tuple[Expr, ...], ...], ...]

    def entry(self, i: int, j: int) -> tuple[Expr, ...]:
        return self.entries[i][j]


class UnsupportedAdjointForm(ValueError):
    pass


def adjoint_row(alg: LieAlgebra, i: int) -> tuple[tuple[Expr, ...], ...]:
    """Ad(exp(eps*X_i)) X_j for all j: the matrix exponential of
    -eps*ad(X_i), summed exactly.

    Requires the ad matrix to have rational eigenvalues (nilpotent,
    rationally diagonalizable, or a commuting mix); anything else raises
    UnsupportedAdjointForm.
    """
    M = alg.ad_matrix(i)
    if _rational_eigs(M) is None:
        raise UnsupportedAdjointForm(
            f"ad({alg.names[i]}) has non-rational spectrum; cannot sum the series exactly")
    R = sp.simplify((-eps * M).exp())
    cols = []
    for j in range(alg.dim):
        cols.append(tuple(sp.nsimplify(sp.expand(R[k, j])) for k in range(alg.dim)))
    return tuple(cols)


def adjoint_table(alg: LieAlgebra) -> AdjointTable:
    return AdjointTable(alg, tuple(adjoint_row(alg, i) for i in range(alg.dim)))


def format_combo(coeffs: Sequence[Expr], names: Sequence[str]) -> str:
    """Human-readable linear combination, e.g. 'Y4 - eps*Y1'."""
    parts = []
    for c, name in zip(coeffs, names):
        c = sp.nsimplify(sp.expand(c))
        if c == 0:
            continue
        if c == 1:
            parts.append(f"+ {name}")
        elif c == -1:
            parts.append(f"- {name}")
        else:
            cs = sp.sstr(c).replace("exp(eps)", "e^eps").replace("exp(-eps)", "e^-eps")
            if c.is_Add:
                cs = f"({cs})"
            parts.append(f"+ {cs}*{name}" if not cs.startswith("-") else f"- {cs[1:]}*{name}")
    if not parts:
        return "0"
    out = " ".join(parts)
    return out[2:] if out.startswith("+ ") else ("-" + out[2:] if out.startswith("- ") else out)


# ---------------------------------------------------------------------------
# Adjoint invariants and optimal systems
# ---------------------------------------------------------------------------

def coefficient_symbols(n: int) -> tuple[Symbol, ...]:
    return sp.symbols(f"a1:{n + 1}")


def check_invariant(alg: LieAlgebra, phi: Expr) -> bool:
    """True iff Delta_i(phi) = C^k_{ij} a_j dphi/da_k vanishes for every i
    (standard convention: the derivative index is the bracket result
    index)."""
    a = coefficient_symbols(alg.dim)
    for i in range(alg.dim):
        delta = sp.Integer(0)
        for j in range(alg.dim):
            for k in range(alg.dim):
                delta += alg.C(i, j, k) * a[j] * sp.diff(phi, a[k])
        if sk.is_zero(delta) is not ZeroVerdict.IDENTICALLY_ZERO:
            return False
    return True


@dataclass(frozen=True)
class OptimalSystem:
    """Claimed one-dimensional optimal system: representative coefficient
    vectors (entries may contain the free parameters alpha/beta, treated
    as nonzero) plus claimed adjoint invariants."""

    representatives: tuple[tuple[Expr, ...], ...]
    labels: tuple[str, ...]
    invariants: tuple[Expr, ...]


@dataclass
class OptimalSystemReport:
    invariants_ok: bool
    separated_pairs: list[tuple[str, str]]
    trials: int
    matched: int
    counterexamples: list
    notes: list[str] = dfield(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.invariants_ok and self.matched == self.trials and not self.counterexamples


def _support(vec) -> tuple[int, ...]:
    return tuple(i for i, v in enumerate(vec) if sp.sympify(v) != 0)


def _apply_adjoint(row, vec, val):
    n = len(vec)
    out = []
    for k in range(n):
        s = sp.Integer(0)
        for j in range(n):
            s += row[j][k].subs(eps, val) * vec[j]
        out.append(sp.cancel(sp.nsimplify(s)))
    return tuple(out)


def normalize_vector(alg: LieAlgebra, table: AdjointTable, vec) -> tuple:
    """Greedy normalization: repeatedly solve for eps in single adjoint
    maps to zero out coefficients, accepting only moves that strictly
    shrink the support; finishes with an overall rescale."""
    vec = tuple(sp.nsimplify(v) for v in vec)
    changed = True
    while changed:
        changed = False
        for i in range(alg.dim):
            row = table.entries[i]
            for k in range(alg.dim):
                if vec[k] == 0:
                    continue
                # coefficient k after conjugating by exp(eps*X_i)
                expr = sp.Add(*[row[j][k] * vec[j] for j in range(alg.dim)])
                slope = sp.diff(expr, eps)
                if slope == 0 or sp.diff(slope, eps) != 0 or slope.has(sp.exp):
                    continue
                sol = sp.solve(sp.Eq(expr, 0), eps)
                if len(sol) != 1 or not sol[0].is_rational:
                    continue
                new = _apply_adjoint(row, vec, sol[0])
                if set(_support(new)) < set(_support(vec)):
                    vec = new
                    changed = True
    sup = _support(vec)
    if sup:
        lead = vec[sup[0]]
        vec = tuple(sp.cancel(v / lead) for v in vec)
    return vec


def _matches_representative(vec, rep) -> bool:
    """vec ~ c*rep with the representative's free parameters nonzero."""
    sup_v, sup_r = _support(vec), _support(rep)
    if sup_v != sup_r:
        return False
    free = sorted(set().union(*[sp.sympify(r).free_symbols for r in rep]) if rep else set(),
                  key=lambda s: s.name)
    c = Symbol("_scale")
    eqs = [sp.Eq(c * rep[i], vec[i]) for i in range(len(vec))]
    sols = sp.solve(eqs, [c, *free], dict=True)
    for sol in sols:
        cv = sol.get(c)
        if cv in (None, 0):
            continue
        if all(sol.get(s, 1) != 0 for s in free):
            return True
    return False


def _shift_slopes(alg: LieAlgebra, table: AdjointTable):
    """Symbolic slopes of the affine-in-eps normalization moves: entry
    (i, k) holds d/deps of coordinate k under conjugation by X_i, a linear
    form in the vector coordinates (None when the move is not a shift)."""
    vsyms = sp.symbols(f"_v0:{alg.dim}")
    out = {}
    for i in range(alg.dim):
        row = table.entries[i]
        for k in range(alg.dim):
            expr = sp.Add(*[row[j][k] * vsyms[j] for j in range(alg.dim)])
            slope = sp.diff(expr, eps)
            if slope == 0 or sp.diff(slope, eps) != 0 or slope.has(sp.exp):
                continue
            out[(i, k)] = (slope, vsyms)
    return out


def _is_generic(vec, slopes) -> bool:
    """A sampled vector is generic for the normalization search when no
    structurally-available shift slope vanishes accidentally at it."""
    for (i, k), (slope, vsyms) in slopes.items():
        if vec[k] == 0:
            continue
        restricted = slope.xreplace({s: sp.Integer(0) for s, v in zip(vsyms, vec) if v == 0})
        if restricted == 0:
            continue
        if slope.xreplace(dict(zip(vsyms, vec))) == 0:
            return False
    return True


def optimal_system_check(alg: LieAlgebra, proposal: OptimalSystem,
                         rng: random.Random | None = None,
                         trials: int = 120) -> OptimalSystemReport:
    """(a) verify claimed invariants, (b) certify inequivalence of
    representatives separated by invariant values, (c) randomized
    completeness: seeded random generic coefficient vectors must
    normalize onto exactly one representative."""
    rng = rng or random.Random(7)
    a = coefficient_symbols(alg.dim)

    inv_ok = all(check_invariant(alg, phi) for phi in proposal.invariants)

    separated = []
    for p in range(len(proposal.representatives)):
        for q in range(p + 1, len(proposal.representatives)):
            for phi in proposal.invariants:
                vp = phi.subs(dict(zip(a, proposal.representatives[p])))
                vq = phi.subs(dict(zip(a, proposal.representatives[q])))
                if sk.is_zero(vp - vq) is ZeroVerdict.NONZERO:
                    separated.append((proposal.labels[p], proposal.labels[q]))
                    break

    table = adjoint_table(alg)
    slopes = _shift_slopes(alg, table)
    matched = 0
    counterexamples = []
    notes = []
    for _ in range(trials):
        while True:
            vec = tuple(Rational(rng.randint(1, 97), rng.randint(1, 8)) * rng.choice([-1, 1])
                        if rng.random() < 0.55 else sp.Integer(0)
                        for _ in range(alg.dim))
            if any(v != 0 for v in vec) and _is_generic(vec, slopes):
                break
        norm = normalize_vector(alg, table, vec)
        hits = [lab for rep, lab in zip(proposal.representatives, proposal.labels)
                if _matches_representative(norm, rep)]
        if len(hits) == 1:
            matched += 1
        else:
            counterexamples.append({"vector": vec, "normalized": norm, "matches": hits})

    # probe the non-generic strata once: a vector that defeats every shift
    # normalizes to a form outside the claimed list in some algebras
    probe = tuple(sp.Integer(1) for _ in range(alg.dim))
    if not _is_generic(probe, slopes):
        norm = normalize_vector(alg, table, probe)
        hits = [lab for rep, lab in zip(proposal.representatives, proposal.labels)
                if _matches_representative(norm, rep)]
        if not hits:
            notes.append(
                "non-generic stratum found outside the claimed list: "
                f"all-ones vector normalizes to {tuple(sp.sstr(v) for v in norm)}")
    return OptimalSystemReport(inv_ok, separated, trials, matched, counterexamples,
                               notes)
