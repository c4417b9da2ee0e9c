"""Dense matrix realization of multiplication/translation operator sums.

Operators act on the N-point cell space (one basis vector per cell): a
translation operator carries a single 1 per domain column, a multiplication
operator is diagonal, and an operator expression sum(M_{f_i} L_{g_i}) is
assembled column by column.  The normalized matrix trace (1/N) tr plays the
role of the vector-state trace; its agreement with the symbolic
fixed-point-integral route is enforced by tests, not assumed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import SpaceMismatchError, TermCapExceededError
from .grid import CellFunction, DiscreteSpace, compose_with_inverse, ess_sup_abs, integrate, mul
from .partials import (
    GeneratorFamily,
    PartialInjection,
    Word,
    compose,
    evaluate_word,
    fixed_point_set,
)

NORMAL_FORM_TERM_CAP = 1_000_000


@dataclass(frozen=True)
class DenseOperator:
    """An N x N complex matrix over a discretized space."""

    space: DiscreteSpace
    mat: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.asarray(self.mat, dtype=np.complex128)
        n = self.space.n
        if m.shape != (n, n):
            raise ValueError(f"expected a {n}x{n} matrix, got shape {m.shape}")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "mat", m)

    def __matmul__(self, other: "DenseOperator") -> "DenseOperator":
        return matmul(self, other)

    def __add__(self, other: "DenseOperator") -> "DenseOperator":
        return add(self, other)

    def __sub__(self, other: "DenseOperator") -> "DenseOperator":
        return add(self, scale(-1.0, other))

    def __rmul__(self, c: complex) -> "DenseOperator":
        return scale(c, self)


def _check_spaces(a: DenseOperator, b: DenseOperator) -> None:
    if a.space != b.space:
        raise SpaceMismatchError("operators live on different spaces")


def identity_operator(space: DiscreteSpace) -> DenseOperator:
    return DenseOperator(space, np.eye(space.n, dtype=np.complex128))


def zero_operator(space: DiscreteSpace) -> DenseOperator:
    return DenseOperator(space, np.zeros((space.n, space.n), dtype=np.complex128))


def matrix_of_translation(g: PartialInjection) -> DenseOperator:
    """Column y holds a single 1 at row g(y), for y in the domain."""
    n = g.space.n
    m = np.zeros((n, n), dtype=np.complex128)
    src = np.flatnonzero(g.target >= 0)
    m[g.target[src], src] = 1.0
    return DenseOperator(g.space, m)


def matrix_of_mult(f: CellFunction) -> DenseOperator:
    return DenseOperator(f.space, np.diag(f.values))


def adjoint(a: DenseOperator) -> DenseOperator:
    return DenseOperator(a.space, a.mat.conj().T)


def matmul(a: DenseOperator, b: DenseOperator) -> DenseOperator:
    _check_spaces(a, b)
    return DenseOperator(a.space, a.mat @ b.mat)


def add(a: DenseOperator, b: DenseOperator) -> DenseOperator:
    _check_spaces(a, b)
    return DenseOperator(a.space, a.mat + b.mat)


def scale(c: complex, a: DenseOperator) -> DenseOperator:
    return DenseOperator(a.space, complex(c) * a.mat)


def shift(z: complex, a: DenseOperator) -> DenseOperator:
    """z*I - A."""
    m = -a.mat.copy()
    np.fill_diagonal(m, np.diagonal(m) + complex(z))
    return DenseOperator(a.space, m)


def trace(a: DenseOperator) -> complex:
    """Normalized trace (1/N) * sum of the diagonal."""
    return complex(np.trace(a.mat) / a.space.n)


# ---------------------------------------------------------------------------
# Operator expressions and normal-form calculus
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OperatorExpr:
    """A formal sum of terms M_{f_i} L_{g_i} over one generator family."""

    family: GeneratorFamily
    terms: tuple[tuple[CellFunction, str], ...]

    def __post_init__(self):
        for f, name in self.terms:
            self.family[name]  # raises UnknownGeneratorError
            if f.space != self.family.space:
                raise SpaceMismatchError("term function lives on a different space")

    @property
    def space(self) -> DiscreteSpace:
        return self.family.space

    def term_maps(self) -> tuple[tuple[CellFunction, PartialInjection], ...]:
        return tuple((f, self.family[name]) for f, name in self.terms)


def operator_expr(fam: GeneratorFamily, terms: Sequence[tuple[CellFunction, str]]) -> OperatorExpr:
    return OperatorExpr(fam, tuple(terms))


def assemble(expr: OperatorExpr) -> DenseOperator:
    """Dense matrix of sum(M_{f_i} L_{g_i}): entry (g_i(y), y) += f_i(g_i(y))."""
    n = expr.space.n
    m = np.zeros((n, n), dtype=np.complex128)
    for f, name in expr.terms:
        g = expr.family[name]
        src = np.flatnonzero(g.target >= 0)
        tgt = g.target[src]
        m[tgt, src] += f.values[tgt]
    return DenseOperator(expr.space, m)


@dataclass(frozen=True)
class NormalTerm:
    """One normal-form term M_h L_w with w a word in the generators."""

    h: CellFunction
    word: Word


def materialize(term: NormalTerm, fam: GeneratorFamily) -> DenseOperator:
    return matmul(matrix_of_mult(term.h), matrix_of_translation(evaluate_word(fam, term.word)))


def trace_of_term(term: NormalTerm, fam: GeneratorFamily) -> complex:
    """Trace via the fixed-point integral; no matrix is materialized."""
    w = evaluate_word(fam, term.word)
    return integrate(term.h, fixed_point_set(w))


def normal_form_power(
    expr: OperatorExpr, n: int, cap: int = NORMAL_FORM_TERM_CAP
) -> list[NormalTerm]:
    """The k^n normal-form terms of (sum M_{f_i} L_{g_i})^n.

    Repeatedly pushing translations past multiplications turns each product
    of terms into M_h L_w with h accumulating the coefficient functions
    pulled back along the growing word; the pullback zero-fills off the
    word's range, which is exactly the indicator masking the product needs.
    """
    if n < 1:
        raise ValueError("power must be >= 1")
    k = len(expr.terms)
    if k == 0:
        return []
    if k**n > cap:
        raise TermCapExceededError(f"{k}^{n} normal-form terms exceed cap {cap}")
    fam = expr.family
    # level entries: (h, word letters, word evaluated as a map)
    level = [
        (f, (name,), fam[name])
        for f, name in expr.terms
    ]
    for _ in range(n - 1):
        nxt = []
        for h, names, wmap in level:
            for f, name in expr.terms:
                h2 = mul(h, compose_with_inverse(f, wmap))
                nxt.append((h2, names + (name,), compose(wmap, fam[name])))
        level = nxt
    return [NormalTerm(h, Word(tuple((nm, 1) for nm in names))) for h, names, _ in level]


def op_norm_upper_bound(expr: OperatorExpr) -> float:
    """Triangle-inequality bound: sum of ess-sup norms of the coefficients."""
    return float(sum(ess_sup_abs(f) for f, _ in expr.terms))
