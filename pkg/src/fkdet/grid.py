"""Discretized probability space: cells, cell sets, and complex step functions.

The unit interval [0, 1) is split into N equal cells; cell k stands for
[k/N, (k+1)/N).  Measures of cell sets are exact rationals (|S|/N), so
set-theoretic hypotheses downstream can be checked exactly rather than in
floating point.  Functions are complex step functions, constant on each
cell; smooth built-ins are sampled at cell midpoints (k + 0.5)/N.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence, TYPE_CHECKING

import numpy as np

from .errors import DivisionByZeroCellError, SpaceMismatchError

if TYPE_CHECKING:
    from .partials import PartialInjection

# Relative zero tolerance: |f(k)| below ZERO_TOL * ess_sup|f| is treated as an
# exact zero by log-integrals and cellwise division.
ZERO_TOL = 1e-14


@dataclass(frozen=True)
class DiscreteSpace:
    """Uniform discretization of ([0,1), Lebesgue) into ``n`` cells."""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"need at least one cell, got n={self.n}")

    @property
    def cell_measure(self) -> Fraction:
        return Fraction(1, self.n)

    def midpoints(self) -> np.ndarray:
        """Midpoint (k + 0.5)/n of each cell, as a float vector."""
        return (np.arange(self.n) + 0.5) / self.n

    def full(self) -> "CellSet":
        return CellSet(self, frozenset(range(self.n)))

    def empty(self) -> "CellSet":
        return CellSet(self, frozenset())

    def subset(self, members: Iterable[int]) -> "CellSet":
        return CellSet(self, frozenset(int(k) for k in members))


def _require_same_space(a, b) -> None:
    if a.space != b.space:
        raise SpaceMismatchError(
            f"values live on different spaces (n={a.space.n} vs n={b.space.n})"
        )


@dataclass(frozen=True)
class CellSet:
    """A measurable set: a union of cells, stored as a set of indices."""

    space: DiscreteSpace
    members: frozenset[int]

    def __post_init__(self):
        object.__setattr__(self, "members", frozenset(int(k) for k in self.members))
        for k in self.members:
            if not 0 <= k < self.space.n:
                raise ValueError(f"cell index {k} outside [0, {self.space.n})")

    def __contains__(self, k: int) -> bool:
        return k in self.members

    def __len__(self) -> int:
        return len(self.members)

    def __or__(self, other: "CellSet") -> "CellSet":
        _require_same_space(self, other)
        return CellSet(self.space, self.members | other.members)

    def __and__(self, other: "CellSet") -> "CellSet":
        _require_same_space(self, other)
        return CellSet(self.space, self.members & other.members)

    def __sub__(self, other: "CellSet") -> "CellSet":
        _require_same_space(self, other)
        return CellSet(self.space, self.members - other.members)

    def complement(self) -> "CellSet":
        return CellSet(self.space, frozenset(range(self.space.n)) - self.members)

    def indices(self) -> np.ndarray:
        """Members as a sorted int array (deterministic iteration order)."""
        return np.array(sorted(self.members), dtype=np.int64)

    def indicator(self) -> "CellFunction":
        values = np.zeros(self.space.n, dtype=np.complex128)
        if self.members:
            values[self.indices()] = 1.0
        return CellFunction(self.space, values)


def measure(s: CellSet) -> Fraction:
    """Exact uniform measure |S|/N of a cell set."""
    return Fraction(len(s.members), s.space.n)


@dataclass(frozen=True)
class CellFunction:
    """A complex step function, one value per cell."""

    space: DiscreteSpace
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.complex128)
        if v.shape != (self.space.n,):
            raise ValueError(f"expected {self.space.n} values, got shape {v.shape}")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @staticmethod
    def constant(space: DiscreteSpace, c: complex) -> "CellFunction":
        return CellFunction(space, np.full(space.n, complex(c), dtype=np.complex128))

    @staticmethod
    def from_values(space: DiscreteSpace, values: Sequence[complex]) -> "CellFunction":
        return CellFunction(space, np.asarray(values, dtype=np.complex128))

    @staticmethod
    def sampled(space: DiscreteSpace, fn: Callable[[np.ndarray], np.ndarray]) -> "CellFunction":
        """Sample ``fn`` at cell midpoints (vectorized over the midpoint array)."""
        return CellFunction(space, np.asarray(fn(space.midpoints()), dtype=np.complex128))

    def __call__(self, k: int) -> complex:
        return complex(self.values[k])

    def __mul__(self, other):
        if isinstance(other, CellFunction):
            return mul(self, other)
        return scale(other, self)

    __rmul__ = __mul__


def ess_sup_abs(f: CellFunction) -> float:
    """Essential sup of |f| (a max, since f is a step function)."""
    return float(np.max(np.abs(f.values)))


def zero_cells(f: CellFunction, zero_tol: float = ZERO_TOL) -> np.ndarray:
    """Indices where f is treated as exactly zero (relative tolerance)."""
    sup = ess_sup_abs(f)
    return np.flatnonzero(np.abs(f.values) < zero_tol * sup) if sup > 0.0 \
        else np.arange(f.space.n)


def integrate(f: CellFunction, s: CellSet) -> complex:
    """Riemann sum (1/N) * sum of f over the cells of S."""
    _require_same_space(f, s)
    if not s.members:
        return 0.0 + 0.0j
    return complex(np.sum(f.values[s.indices()]) / f.space.n)


def log_abs_integral(f: CellFunction, s: CellSet, zero_tol: float = ZERO_TOL) -> float:
    """(1/N) * sum of log|f| over S; -inf if any cell of S carries a zero.

    A cell counts as zero when |f(k)| < zero_tol * ess_sup|f|, mirroring the
    numerical-rank convention of the spectral kernel.
    """
    _require_same_space(f, s)
    if not s.members:
        return 0.0
    idx = s.indices()
    moduli = np.abs(f.values[idx])
    sup = ess_sup_abs(f)
    if sup == 0.0 or np.any(moduli < zero_tol * sup):
        return float("-inf")
    # compensated summation: log-sums feed determinant comparisons at 1e-10
    return _kahan_sum(np.log(moduli)) / f.space.n


def _kahan_sum(values: np.ndarray) -> float:
    total = 0.0
    carry = 0.0
    for v in values:
        y = float(v) - carry
        t = total + y
        carry = (t - total) - y
        total = t
    return total


def compose_with_inverse(f: CellFunction, g: "PartialInjection") -> CellFunction:
    """The function x -> f(g^{-1} x) on range(g), zero-filled elsewhere.

    Downstream uses always multiply by an indicator that kills the
    zero-filled cells, so the fill value is never observed where it matters.
    """
    _require_same_space(f, g)
    out = np.zeros(f.space.n, dtype=np.complex128)
    src = np.flatnonzero(g.target >= 0)
    out[g.target[src]] = f.values[src]
    return CellFunction(f.space, out)


def mul(f: CellFunction, h: CellFunction) -> CellFunction:
    _require_same_space(f, h)
    return CellFunction(f.space, f.values * h.values)


def div(f: CellFunction, h: CellFunction, zero_tol: float = ZERO_TOL) -> CellFunction:
    """Cellwise f/h; raises DivisionByZeroCellError naming the first bad cell."""
    _require_same_space(f, h)
    bad = zero_cells(h, zero_tol)
    if bad.size:
        raise DivisionByZeroCellError(int(bad[0]))
    return CellFunction(f.space, f.values / h.values)


def abs2(f: CellFunction) -> CellFunction:
    return CellFunction(f.space, (f.values * f.values.conj()).real.astype(np.complex128))


def scale(c: complex, f: CellFunction) -> CellFunction:
    return CellFunction(f.space, complex(c) * f.values)


def pointwise(f: CellFunction, h, kind: str) -> CellFunction:
    """Dispatching wrapper over the cellwise operations.

    kind = "mul" | "div" (h a CellFunction), "scale" (h a scalar),
    "abs2" (h ignored).
    """
    if kind == "mul":
        return mul(f, h)
    if kind == "div":
        return div(f, h)
    if kind == "abs2":
        return abs2(f)
    if kind == "scale":
        return scale(h, f)
    raise ValueError(f"unknown pointwise kind {kind!r}")
