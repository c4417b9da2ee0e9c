"""Hypothesis checkers and closed-form determinant evaluators.

Two closed-form regimes are covered, with their hypotheses checked exactly
on the grid:

* the anchored-contraction formula: one term carries a full bijection and a
  nonvanishing coefficient dominating the others (contraction sum < 1), and
  log Delta(T) equals the log-integral of the anchor coefficient;
* the disjoint-partition formula: domains cover the space and ranges are
  pairwise disjoint, T*T collapses to a multiplication operator, and
  log Delta(T) is the sum of per-range log-integrals (exact at every N).

Conditions that only make sense on the continuum (treeing, ergodicity of
the generated relation) are surfaced as quantitative diagnostics - orbit
counts and the shortest fixed-point word length (girth) - never as pass/fail
hypothesis booleans.  Closed forms are total: they evaluate the formula
whether or not the hypotheses hold, so convergence outside the hypotheses
can be studied.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import ConsistencyError, DivisionByZeroCellError, TermCapExceededError
from .grid import (
    ZERO_TOL,
    abs2,
    compose_with_inverse,
    div,
    ess_sup_abs,
    log_abs_integral,
    measure,
)
from .operators import (
    NORMAL_FORM_TERM_CAP,
    OperatorExpr,
    adjoint,
    assemble,
    identity_operator,
    matmul,
    matrix_of_mult,
    matrix_of_translation,
    normal_form_power,
    shift,
    trace,
    trace_of_term,
)
from .partials import compose, invert, is_ergodic_finite, orbits, treeing_girth
from .spectral import fk_determinant, spectral_radius_estimate

GIRTH_MAX_LEN = 4
TRACE_AGREEMENT_TOL = 1e-10


# ---------------------------------------------------------------------------
# Hypothesis reports
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HypothesisCondition:
    """One machine-checked condition; satisfied=None marks not-evaluable."""

    label: str
    satisfied: bool | None
    value: object
    threshold: str


@dataclass(frozen=True)
class HypothesisReport:
    conditions: tuple[HypothesisCondition, ...]
    overall: bool
    diagnostics: dict = field(default_factory=dict)

    def condition(self, label: str) -> HypothesisCondition:
        for c in self.conditions:
            if c.label == label:
                return c
        raise KeyError(label)


def _relation_diagnostics(expr: OperatorExpr, girth_max_len: int) -> dict:
    fam = expr.family
    orbit_classes = orbits(fam)
    try:
        girth = treeing_girth(fam, girth_max_len)
    except TermCapExceededError:
        girth = None
    return {
        "single_orbit": is_ergodic_finite(fam),
        "orbit_count": len(orbit_classes),
        "treeing_girth": girth,
        "girth_max_len": girth_max_len,
    }


# ---------------------------------------------------------------------------
# Anchored-contraction regime
# ---------------------------------------------------------------------------

def contraction_sum(expr: OperatorExpr, i0: int, zero_tol: float = ZERO_TOL) -> float:
    """sum over i != i0 of ess-sup |f_i / f_{i0}|; raises if f_{i0} has a zero cell."""
    f0 = expr.terms[i0][0]
    total = 0.0
    for i, (f, _) in enumerate(expr.terms):
        if i == i0:
            continue
        total += ess_sup_abs(div(f, f0, zero_tol))
    return total


def check_anchored_contraction(
    expr: OperatorExpr,
    i0: int,
    zero_tol: float = ZERO_TOL,
    girth_max_len: int = GIRTH_MAX_LEN,
) -> HypothesisReport:
    """Exact hypothesis check for the anchored determinant formula."""
    if not 0 <= i0 < len(expr.terms):
        raise IndexError(f"anchor index {i0} out of range")
    f0, g0_name = expr.terms[i0]
    g0 = expr.family[g0_name]

    sup0 = ess_sup_abs(f0)
    min_rel = float(np.min(np.abs(f0.values)) / sup0) if sup0 > 0 else 0.0
    nonvanishing = sup0 > 0 and min_rel >= zero_tol

    try:
        total = contraction_sum(expr, i0, zero_tol)
        contraction = HypothesisCondition(
            "contraction_sum", total < 1.0, total, "< 1")
    except DivisionByZeroCellError:
        contraction = HypothesisCondition(
            "contraction_sum", None, None, "< 1 (not evaluable: anchor vanishes)")

    dom, rng = measure(g0.domain()), measure(g0.range())
    bijection = HypothesisCondition(
        "anchor_full_bijection",
        g0.is_full_bijection(),
        f"domain={dom}, range={rng}",
        "= 1",
    )
    vanish = HypothesisCondition(
        "anchor_nonvanishing", nonvanishing, min_rel, f">= {zero_tol} (relative)")

    conditions = (contraction, bijection, vanish)
    overall = all(c.satisfied is True for c in conditions)
    return HypothesisReport(conditions, overall, _relation_diagnostics(expr, girth_max_len))


def closed_form_anchored(expr: OperatorExpr, i0: int, zero_tol: float = ZERO_TOL) -> float:
    """log-integral of the anchor coefficient over the whole space."""
    f0 = expr.terms[i0][0]
    return log_abs_integral(f0, expr.space.full(), zero_tol)


def factorization_residual(expr: OperatorExpr, i0: int, zero_tol: float = ZERO_TOL) -> float:
    """Max entrywise gap between T and its anchored factorization.

    T should equal M_{f0} L_{g0} (I + sum over i != i0 of
    M_{(f_i/f_0) o g_0} L_{g_0^{-1} g_i}) whenever g_0 is a full bijection.
    """
    f0, g0_name = expr.terms[i0]
    g0 = expr.family[g0_name]
    bracket = identity_operator(expr.space)
    for i, (f, name) in enumerate(expr.terms):
        if i == i0:
            continue
        coeff = compose_with_inverse(div(f, f0, zero_tol), invert(g0))
        word_map = compose(invert(g0), expr.family[name])
        bracket = bracket + matmul(matrix_of_mult(coeff), matrix_of_translation(word_map))
    rhs = matmul(matmul(matrix_of_mult(f0), matrix_of_translation(g0)), bracket)
    return float(np.max(np.abs(assemble(expr).mat - rhs.mat)))


def anchored_error_bound(rho: float, girth: int) -> float:
    """Geometric tail bound 2 rho^girth / (girth (1 - rho)) on the comparison error."""
    if not 0 <= rho < 1:
        raise ValueError("needs a contraction sum in [0, 1)")
    return 2.0 * rho**girth / (girth * (1.0 - rho))


# ---------------------------------------------------------------------------
# Disjoint-partition regime
# ---------------------------------------------------------------------------

def _max_pairwise_overlap(sets) -> Fraction:
    worst = Fraction(0)
    for i in range(len(sets)):
        for j in range(i + 1, len(sets)):
            worst = max(worst, measure(sets[i] & sets[j]))
    return worst


def check_disjoint_partition(
    expr: OperatorExpr, girth_max_len: int | None = None
) -> HypothesisReport:
    """Exact rational check of the partition hypotheses.

    Primary: domains cover the space and ranges are pairwise disjoint.
    Domain disjointness is implied by the primary pair (a counting argument
    on exact measures) and is reported in the diagnostics, along with which
    hypothesis variant -- primary, or domain-disjointness swapped in for the
    covering condition -- a scenario satisfies.
    """
    maps = expr.term_maps()
    domains = [g.domain() for _, g in maps]
    ranges = [g.range() for _, g in maps]

    union = expr.space.empty()
    for d in domains:
        union = union | d
    cover = measure(union)
    s1 = HypothesisCondition("domains_cover", cover == 1, cover, "= 1")

    range_overlap = _max_pairwise_overlap(ranges)
    s2 = HypothesisCondition("ranges_disjoint", range_overlap == 0, range_overlap, "= 0")

    domain_overlap = _max_pairwise_overlap(domains)
    s3_holds = domain_overlap == 0

    overall = bool(s1.satisfied and s2.satisfied)
    variant = {
        (True, True): "both",
        (True, False): "primary",
        (False, True): "swapped",
        (False, False): "none",
    }[(overall, bool(s3_holds and s2.satisfied))]
    diagnostics = {
        "domains_disjoint": s3_holds,
        "max_domain_overlap": domain_overlap,
        "domain_disjointness_follows": (not overall) or s3_holds,
        "variant_passed": variant,
    }
    if girth_max_len is not None:
        diagnostics.update(_relation_diagnostics(expr, girth_max_len))
    return HypothesisReport((s1, s2), overall, diagnostics)


def closed_form_disjoint_partition(expr: OperatorExpr, zero_tol: float = ZERO_TOL) -> float:
    """Sum over terms of the log-integral of f_i over range(g_i); -inf absorbs."""
    total = 0.0
    for f, g in expr.term_maps():
        part = log_abs_integral(f, g.range(), zero_tol)
        if part == float("-inf"):
            return float("-inf")
        total += part
    return total


@dataclass(frozen=True)
class GramStructureReport:
    """How close T*T is to the predicted multiplication operator."""

    off_diagonal_max: float
    diagonal_deviation: float
    worst_entry: tuple[int, int]
    ok: bool

    @property
    def max_deviation(self) -> float:
        return max(self.off_diagonal_max, self.diagonal_deviation)


def gram_structure_check(expr: OperatorExpr, tol: float = 1e-12) -> GramStructureReport:
    """Materialize T*T and compare against the diagonal sum of |f_i o g_i|^2."""
    t = assemble(expr)
    gram = matmul(adjoint(t), t).mat
    n = expr.space.n

    predicted = np.zeros(n, dtype=np.float64)
    for f, g in expr.term_maps():
        pulled = compose_with_inverse(abs2(f), invert(g))  # |f_i|^2 o g_i on A_i
        predicted += pulled.values.real

    off = gram.copy()
    np.fill_diagonal(off, 0.0)
    off_abs = np.abs(off)
    off_max = float(off_abs.max()) if n else 0.0
    diag_dev = np.abs(np.diagonal(gram) - predicted)
    diag_max = float(diag_dev.max()) if n else 0.0

    if off_max >= diag_max:
        worst = np.unravel_index(int(np.argmax(off_abs)), off_abs.shape)
    else:
        k = int(np.argmax(diag_dev))
        worst = (k, k)
    return GramStructureReport(
        off_max, diag_max, (int(worst[0]), int(worst[1])), off_max <= tol and diag_max <= tol
    )


# ---------------------------------------------------------------------------
# Trace profiles and the shifted-unit determinant criterion
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TraceProfileRow:
    n: int
    tau_matrix: complex
    tau_normal_form: complex | None

    @property
    def disagreement(self) -> float | None:
        if self.tau_normal_form is None:
            return None
        return abs(self.tau_matrix - self.tau_normal_form)


def trace_vanishing_profile(
    expr: OperatorExpr,
    n_max: int,
    agreement_tol: float = TRACE_AGREEMENT_TOL,
    term_cap: int | None = None,
) -> list[TraceProfileRow]:
    """Normalized trace of each power, by dense powers and by normal forms.

    The two routes must agree within ``agreement_tol``; a gap raises
    ConsistencyError since it would mean the commutation calculus and the
    matrix model disagree.  If the normal-form expansion overflows its term
    cap the profile falls back to the matrix route alone from that power on.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    cap = NORMAL_FORM_TERM_CAP if term_cap is None else term_cap
    t = assemble(expr)
    rows: list[TraceProfileRow] = []
    power = t
    for n in range(1, n_max + 1):
        if n > 1:
            power = matmul(power, t)
        tau_m = trace(power)
        try:
            terms = normal_form_power(expr, n, cap)
            tau_nf = complex(sum(trace_of_term(term, expr.family) for term in terms))
        except TermCapExceededError:
            tau_nf = None
        if tau_nf is not None and abs(tau_m - tau_nf) > agreement_tol:
            raise ConsistencyError(
                f"trace routes disagree at power {n}: {tau_m} vs {tau_nf}")
        rows.append(TraceProfileRow(n, tau_m, tau_nf))
    return rows


def _cyclic_shift_structure(expr: OperatorExpr) -> tuple[complex, int] | None:
    """Detect T = c * L_rot for a constant c and a full rotation; return (c, step)."""
    if len(expr.terms) != 1:
        return None
    f, g = expr.term_maps()[0]
    if not g.is_full_bijection():
        return None
    n = expr.space.n
    step = int(g.target[0])
    if not np.array_equal(g.target, (np.arange(n) + step) % n):
        return None
    c = complex(f.values[0])
    if not np.allclose(f.values, c, rtol=0.0, atol=0.0):
        return None
    return c, step


@dataclass(frozen=True)
class ShiftedUnitReport:
    """Evidence for/against Delta(z - Phi) = |z| at this resolution."""

    abs_z: float
    radius_upper_bound: float
    radius_certified: bool
    profile: tuple[TraceProfileRow, ...]
    first_nonzero_trace_n: int | None
    numeric_log_det: float
    log_abs_z: float
    deviation: float
    cycle_log_det: float | None
    cycle_deviation: float | None


def shifted_unit_check(
    expr: OperatorExpr,
    z: complex,
    n_max: int,
    k_max: int = 6,
    trace_tol: float = 1e-12,
    tol_factor: float = 1e-12,
    max_sweeps: int = 100,
) -> ShiftedUnitReport:
    """Compare Delta(zI - Phi) against |z| plus the hypotheses behind it.

    Reports a certified spectral-radius upper bound (r < |z| makes the
    hypothesis hold; a bound >= |z| certifies nothing), the trace profile
    with the first nonzero power flagged, and the numeric determinant's
    deviation from log|z|.  When Phi is a constant multiple of a cyclic
    shift the exact finite determinant (1/N) log|z^M - c^M| per cycle is
    evaluated in a cancellation-safe form and reported alongside.
    """
    phi = assemble(expr)
    radius = spectral_radius_estimate(phi, k_max) if np.any(phi.mat) else 0.0
    abs_z = abs(z)

    profile = tuple(trace_vanishing_profile(expr, n_max))
    first_nonzero = next(
        (row.n for row in profile if abs(row.tau_matrix) > trace_tol), None)

    numeric = fk_determinant(shift(z, phi), tol_factor=tol_factor, max_sweeps=max_sweeps)
    log_abs_z = math.log(abs_z) if abs_z > 0 else float("-inf")
    deviation = abs_comparison_error(log_abs_z, numeric.log_det)

    cycle_log_det = cycle_deviation = None
    structure = _cyclic_shift_structure(expr)
    if structure is not None and abs_z > 0:
        c, step = structure
        n = expr.space.n
        cycles = math.gcd(step % n, n) if step % n else n
        m = n // cycles
        w = (c / z) ** m
        if abs(w) < 1.0:
            # log|z^m - c^m| = m log|z| + 0.5 log1p(-2 Re w + |w|^2): the
            # expanded |1 - w|^2 - 1 keeps full precision for tiny w
            correction = 0.5 * math.log1p(-2.0 * w.real + (w.real**2 + w.imag**2))
            cycle_log_det = log_abs_z + (cycles / n) * correction
            cycle_deviation = abs(cycle_log_det - log_abs_z)
        else:
            val = z**m - c**m
            if val != 0:
                cycle_log_det = (cycles / n) * math.log(abs(val))
                cycle_deviation = abs(cycle_log_det - log_abs_z)
            else:
                cycle_log_det = float("-inf")
                cycle_deviation = float("inf")

    return ShiftedUnitReport(
        abs_z=abs_z,
        radius_upper_bound=radius,
        radius_certified=radius < abs_z,
        profile=profile,
        first_nonzero_trace_n=first_nonzero,
        numeric_log_det=numeric.log_det,
        log_abs_z=log_abs_z,
        deviation=deviation,
        cycle_log_det=cycle_log_det,
        cycle_deviation=cycle_deviation,
    )


# ---------------------------------------------------------------------------
# Closed-form vs numeric comparisons
# ---------------------------------------------------------------------------

def abs_comparison_error(closed_form: float, numeric: float) -> float:
    """|closed - numeric|; two -inf values agree exactly, one alone is inf."""
    cf_inf = closed_form == float("-inf")
    nu_inf = numeric == float("-inf")
    if cf_inf and nu_inf:
        return 0.0
    if cf_inf or nu_inf:
        return float("inf")
    return abs(closed_form - numeric)


@dataclass(frozen=True)
class TheoremComparison:
    n: int
    closed_form: float
    numeric: float

    @property
    def abs_error(self) -> float:
        return abs_comparison_error(self.closed_form, self.numeric)


def compare_anchored(
    expr: OperatorExpr, i0: int, zero_tol: float = ZERO_TOL,
    tol_factor: float = 1e-12, max_sweeps: int = 100,
) -> TheoremComparison:
    numeric = fk_determinant(assemble(expr), tol_factor=tol_factor, max_sweeps=max_sweeps)
    return TheoremComparison(
        expr.space.n, closed_form_anchored(expr, i0, zero_tol), numeric.log_det)


def compare_disjoint_partition(
    expr: OperatorExpr, zero_tol: float = ZERO_TOL,
    tol_factor: float = 1e-12, max_sweeps: int = 100,
) -> TheoremComparison:
    numeric = fk_determinant(assemble(expr), tol_factor=tol_factor, max_sweeps=max_sweeps)
    return TheoremComparison(
        expr.space.n, closed_form_disjoint_partition(expr, zero_tol), numeric.log_det)
