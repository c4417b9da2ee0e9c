"""Built-in invariant suite behind `fkdet selftest`.

A fast, deterministic sample of the package's algebraic contracts: one
PASS/FAIL line per invariant, nonzero count returned on any failure.  The
full pytest suite is the authoritative gate; this runs from an installed
CLI with no test files around.
"""

from __future__ import annotations

import math

import numpy as np

from .grid import CellFunction, DiscreteSpace, compose_with_inverse, log_abs_integral, mul
from .operators import (
    DenseOperator,
    adjoint,
    assemble,
    matmul,
    materialize,
    matrix_of_mult,
    matrix_of_translation,
    normal_form_power,
    operator_expr,
    shift,
    trace,
    trace_of_term,
)
from .partials import family, invert, make_rotation, make_table, restrict
from .spectral import fk_determinant, log_abs_det_lu, singular_values


def _random_function(rng: np.random.Generator, space: DiscreteSpace) -> CellFunction:
    mod = rng.uniform(0.5, 2.0, space.n)
    arg = rng.uniform(0.0, 2.0 * np.pi, space.n)
    return CellFunction(space, mod * np.exp(1j * arg))


def _checks():
    rng = np.random.default_rng(20240811)
    space = DiscreteSpace(16)
    f = _random_function(rng, space)
    g = restrict(make_rotation(space, 3), space.subset(range(10)))
    lg = matrix_of_translation(g)
    mf = matrix_of_mult(f)

    # L_g M_f = M_{f o g^-1} L_g (the pullback zero-fill is absorbed by L_g)
    lhs = matmul(lg, mf).mat
    rhs = matmul(matrix_of_mult(compose_with_inverse(f, g)), lg).mat
    yield "commutation rule", float(np.max(np.abs(lhs - rhs))), 1e-12

    # partial isometry: L_g* L_g is the domain indicator
    prod = matmul(adjoint(lg), lg).mat
    ind = matrix_of_mult(g.domain().indicator()).mat
    yield "partial isometry", float(np.max(np.abs(prod - ind))), 0.0

    # adjoint matches the inverse map
    dev = np.max(np.abs(adjoint(lg).mat - matrix_of_translation(invert(g)).mat))
    yield "adjoint = inverse translation", float(dev), 0.0

    # cube of a single term vs its normal form
    fam = family(space, g=make_rotation(space, 5))
    expr = operator_expr(fam, [(f, "g")])
    dense_cube = matmul(matmul(assemble(expr), assemble(expr)), assemble(expr))
    (term,) = normal_form_power(expr, 3)
    dev = np.max(np.abs(dense_cube.mat - materialize(term, fam).mat))
    yield "normal-form power (n=3)", float(dev), 1e-12

    # trace via fixed points vs matrix trace
    dev = abs(trace_of_term(term, fam) - trace(materialize(term, fam)))
    yield "fixed-point trace", float(dev), 1e-12

    # multiplication-operator determinant matches the log-integral
    fk = fk_determinant(matrix_of_mult(f))
    dev = abs(fk.log_det - log_abs_integral(f, space.full()))
    yield "mult-operator determinant", float(dev), 1e-10

    # worked half-swap example: log Delta = 2 log 2 exactly
    s4 = DiscreteSpace(4)
    fam4 = family(
        s4,
        g1=make_table(s4, [(0, 2), (1, 3)]),
        g2=make_table(s4, [(2, 0), (3, 1)]),
    )
    expr4 = operator_expr(
        fam4,
        [(CellFunction.constant(s4, 2.0), "g1"), (CellFunction.constant(s4, 8.0), "g2")],
    )
    fk4 = fk_determinant(assemble(expr4))
    yield "half-swap determinant", abs(fk4.log_det - 2.0 * math.log(2.0)), 1e-12

    # spectral route vs pivoted elimination
    m = rng.standard_normal((12, 12)) + 1j * rng.standard_normal((12, 12))
    t = shift(3.0, matrix_of_mult(_random_function(rng, DiscreteSpace(12))))
    t = t + 0.1 * DenseOperator(t.space, m)
    dev = abs(fk_determinant(t).log_det - log_abs_det_lu(t))
    yield "LU cross-check", float(dev), 1e-8

    # permutation-with-phases unitary has unit determinant
    perm = rng.permutation(16)
    u = np.zeros((16, 16), dtype=np.complex128)
    u[perm, np.arange(16)] = np.exp(1j * rng.uniform(0, 2 * np.pi, 16))
    fku = fk_determinant(DenseOperator(space, u))
    yield "unitary determinant", abs(fku.log_det), 1e-10

    # shifted cycle: log det (zI - c L_rot) = (1/N) log|z^N - c^N|
    rot = make_rotation(space, 1)
    phi = matmul(matrix_of_mult(CellFunction.constant(space, 0.5)), matrix_of_translation(rot))
    fkz = fk_determinant(shift(1.0, phi))
    expected = math.log1p(-(0.5**16)) / 16
    yield "shifted-cycle determinant", abs(fkz.log_det - expected), 1e-10

    # translation of a half-domain map: domain-many ones, the rest zeros
    sig = singular_values(matrix_of_translation(g))
    ones = int(np.count_nonzero(np.abs(sig - 1.0) < 1e-12))
    zeros = int(np.count_nonzero(np.abs(sig) < 1e-12))
    yield "partial isometry spectrum", 0.0 if (ones, zeros) == (10, 6) else 1.0, 0.5


def run_selftest(verbose: bool = True) -> int:
    """Run every invariant; returns the number of failures."""
    failures = 0
    for label, deviation, tol in _checks():
        ok = deviation <= tol
        failures += 0 if ok else 1
        if verbose:
            status = "PASS" if ok else "FAIL"
            print(f"[{status}] {label}: deviation {deviation:.3e} (tol {tol:g})")
    if verbose:
        print("selftest:", "all invariants hold" if failures == 0 else f"{failures} FAILURES")
    return failures
