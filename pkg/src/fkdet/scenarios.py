"""Scenario documents: the JSON-compatible input format of the CLI.

A scenario names generators and coefficient functions symbolically and is
instantiated at a concrete resolution N, so one document can drive a whole
convergence sweep.  Generator kinds: rotation, table, restrict (by explicit
cells or by a rational interval), interval_exchange.  Function kinds:
constant, table, sampled (fourier / poly / step families, evaluated at cell
midpoints).  Tables are tied to explicit cell indices and therefore reject
sweeps; everything else is resolution-parametric.

Schema versioning: documents carry ``schema_version`` (currently 1).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .errors import ScenarioError, TableError
from .grid import CellFunction, DiscreteSpace
from .operators import OperatorExpr
from .partials import (
    GeneratorFamily,
    PartialInjection,
    make_interval_exchange,
    make_rotation,
    make_table,
    restrict,
)

SCHEMA_VERSION = 1

GENERATOR_KINDS = ("rotation", "table", "restrict", "interval_exchange")
FUNCTION_KINDS = ("constant", "table", "sampled")
SAMPLED_FAMILIES = ("fourier", "poly", "step")
TASK_KINDS = ("determinant", "check_r1", "check_r2", "deninger", "trace_profile", "sweep")
SWEEP_THEOREMS = ("r1", "r2", "deninger")


@dataclass(frozen=True)
class Tolerances:
    """Numerical knobs echoed into every report."""

    zero_tol: float = 1e-14
    jacobi_tol_factor: float = 1e-12
    jacobi_max_sweeps: int = 100
    trace_agreement: float = 1e-10
    girth_max_len: int = 4

    def to_dict(self) -> dict:
        return {
            "zero_tol": self.zero_tol,
            "jacobi_tol_factor": self.jacobi_tol_factor,
            "jacobi_max_sweeps": self.jacobi_max_sweeps,
            "trace_agreement": self.trace_agreement,
            "girth_max_len": self.girth_max_len,
        }


def _fraction(value, where: str) -> Fraction:
    if isinstance(value, bool) or isinstance(value, float):
        raise ScenarioError("exact rational required (int or string like '1/4')", where)
    try:
        return Fraction(value)
    except (ValueError, ZeroDivisionError, TypeError):
        raise ScenarioError(f"cannot parse {value!r} as a rational", where) from None


def _complex(value, where: str) -> complex:
    if isinstance(value, bool):
        raise ScenarioError("expected a number or [re, im] pair", where)
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, Sequence) and len(value) == 2 and all(
        isinstance(x, (int, float)) and not isinstance(x, bool) for x in value
    ):
        return complex(value[0], value[1])
    raise ScenarioError(f"expected a number or [re, im] pair, got {value!r}", where)


def _complex_to_doc(c: complex):
    return [c.real, c.imag]


@dataclass(frozen=True)
class GeneratorSpec:
    name: str
    kind: str
    # rotation
    p: int | None = None
    # table
    pairs: tuple[tuple[int, int], ...] | None = None
    # restrict
    base: str | None = None
    cells: tuple[int, ...] | None = None
    interval: tuple[Fraction, Fraction] | None = None
    # interval_exchange
    cuts: tuple[Fraction, ...] | None = None
    permutation: tuple[int, ...] | None = None

    @property
    def parametric(self) -> bool:
        if self.kind in ("rotation", "interval_exchange"):
            return True
        if self.kind == "restrict":
            return self.interval is not None
        return False

    def to_dict(self) -> dict:
        doc: dict = {"name": self.name, "kind": self.kind}
        if self.kind == "rotation":
            doc["p"] = self.p
        elif self.kind == "table":
            doc["pairs"] = [list(pair) for pair in self.pairs]
        elif self.kind == "restrict":
            doc["base"] = self.base
            if self.cells is not None:
                doc["cells"] = list(self.cells)
            else:
                doc["interval"] = [str(self.interval[0]), str(self.interval[1])]
        elif self.kind == "interval_exchange":
            doc["cuts"] = [str(c) for c in self.cuts]
            doc["permutation"] = list(self.permutation)
        return doc


@dataclass(frozen=True)
class FunctionSpec:
    name: str
    kind: str
    # constant
    value: complex | None = None
    # table
    values: tuple[complex, ...] | None = None
    # sampled
    family: str | None = None
    k: int | None = None
    coeffs: tuple[complex, ...] | None = None
    cuts: tuple[Fraction, ...] | None = None
    step_values: tuple[complex, ...] | None = None

    @property
    def parametric(self) -> bool:
        return self.kind != "table"

    def to_dict(self) -> dict:
        doc: dict = {"name": self.name, "kind": self.kind}
        if self.kind == "constant":
            doc["re"], doc["im"] = self.value.real, self.value.imag
        elif self.kind == "table":
            doc["values"] = [_complex_to_doc(v) for v in self.values]
        elif self.kind == "sampled":
            doc["family"] = self.family
            if self.family == "fourier":
                doc["k"] = self.k
            elif self.family == "poly":
                doc["coeffs"] = [_complex_to_doc(c) for c in self.coeffs]
            elif self.family == "step":
                doc["cuts"] = [str(c) for c in self.cuts]
                doc["values"] = [_complex_to_doc(v) for v in self.step_values]
        return doc


@dataclass(frozen=True)
class TaskSpec:
    kind: str
    i0: int | None = None
    z: complex | None = None
    n_max: int | None = None
    theorem: str | None = None
    sweep_ns: tuple[int, ...] | None = None

    def to_dict(self) -> dict:
        doc: dict = {"kind": self.kind}
        if self.i0 is not None:
            doc["i0"] = self.i0
        if self.z is not None:
            doc["z"] = _complex_to_doc(self.z)
        if self.n_max is not None:
            doc["n_max"] = self.n_max
        if self.theorem is not None:
            doc["theorem"] = self.theorem
        if self.sweep_ns is not None:
            doc["Ns"] = list(self.sweep_ns)
        return doc


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    n: tuple[int, ...]  # one entry for single-resolution tasks
    generators: tuple[GeneratorSpec, ...]
    functions: tuple[FunctionSpec, ...]
    operator: tuple[tuple[str, str], ...]  # (function name, generator name)
    task: TaskSpec
    tolerances: Tolerances = field(default_factory=Tolerances)

    @property
    def parametric(self) -> bool:
        return all(g.parametric for g in self.generators) and all(
            f.parametric for f in self.functions
        )

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "name": self.name,
            "N": self.n[0] if len(self.n) == 1 else list(self.n),
            "generators": [g.to_dict() for g in self.generators],
            "functions": [f.to_dict() for f in self.functions],
            "operator": [list(pair) for pair in self.operator],
            "task": self.task.to_dict(),
            "tolerances": self.tolerances.to_dict(),
        }


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

def _require(cond: bool, message: str, field_path: str) -> None:
    if not cond:
        raise ScenarioError(message, field_path)


def _parse_generator(doc: Mapping, idx: int, known: set[str]) -> GeneratorSpec:
    where = f"generators[{idx}]"
    _require(isinstance(doc, Mapping), "expected an object", where)
    name = doc.get("name")
    _require(isinstance(name, str) and bool(name), "missing generator name", where)
    kind = doc.get("kind")
    _require(kind in GENERATOR_KINDS, f"kind must be one of {GENERATOR_KINDS}", where)
    extra = set(doc) - {"name", "kind", "p", "pairs", "base", "cells", "interval",
                        "cuts", "permutation"}
    _require(not extra, f"unknown fields {sorted(extra)}", where)

    if kind == "rotation":
        p = doc.get("p")
        _require(isinstance(p, int) and not isinstance(p, bool), "p must be an integer", where)
        return GeneratorSpec(name, kind, p=p)
    if kind == "table":
        pairs = doc.get("pairs")
        _require(isinstance(pairs, Sequence), "pairs must be a list", where)
        out = []
        for j, pair in enumerate(pairs):
            _require(
                isinstance(pair, Sequence) and len(pair) == 2
                and all(isinstance(x, int) and not isinstance(x, bool) for x in pair),
                "each pair must be [source, target]", f"{where}.pairs[{j}]")
            out.append((pair[0], pair[1]))
        return GeneratorSpec(name, kind, pairs=tuple(out))
    if kind == "restrict":
        base = doc.get("base")
        _require(isinstance(base, str), "missing base generator name", where)
        _require(base in known, f"base {base!r} must be defined earlier", where)
        cells = doc.get("cells")
        interval = doc.get("interval")
        _require(
            (cells is None) != (interval is None),
            "exactly one of cells / interval is required", where)
        if cells is not None:
            _require(
                isinstance(cells, Sequence)
                and all(isinstance(k, int) and not isinstance(k, bool) for k in cells),
                "cells must be a list of integers", where)
            return GeneratorSpec(name, kind, base=base, cells=tuple(cells))
        _require(
            isinstance(interval, Sequence) and len(interval) == 2,
            "interval must be [lo, hi]", where)
        lo = _fraction(interval[0], f"{where}.interval")
        hi = _fraction(interval[1], f"{where}.interval")
        _require(0 <= lo < hi <= 1, "need 0 <= lo < hi <= 1", f"{where}.interval")
        return GeneratorSpec(name, kind, base=base, interval=(lo, hi))
    # interval_exchange
    cuts = doc.get("cuts")
    perm = doc.get("permutation")
    _require(isinstance(cuts, Sequence), "cuts must be a list", where)
    _require(isinstance(perm, Sequence), "permutation must be a list", where)
    fr = tuple(_fraction(c, f"{where}.cuts") for c in cuts)
    _require(
        all(isinstance(j, int) and not isinstance(j, bool) for j in perm),
        "permutation must contain integers", where)
    return GeneratorSpec(name, kind, cuts=fr, permutation=tuple(perm))


def _parse_function(doc: Mapping, idx: int) -> FunctionSpec:
    where = f"functions[{idx}]"
    _require(isinstance(doc, Mapping), "expected an object", where)
    name = doc.get("name")
    _require(isinstance(name, str) and bool(name), "missing function name", where)
    kind = doc.get("kind")
    _require(kind in FUNCTION_KINDS, f"kind must be one of {FUNCTION_KINDS}", where)

    if kind == "constant":
        re = doc.get("re", 0.0)
        im = doc.get("im", 0.0)
        for label, v in (("re", re), ("im", im)):
            _require(
                isinstance(v, (int, float)) and not isinstance(v, bool),
                f"{label} must be a number", where)
        return FunctionSpec(name, kind, value=complex(re, im))
    if kind == "table":
        values = doc.get("values")
        _require(isinstance(values, Sequence) and len(values) > 0, "values required", where)
        out = tuple(_complex(v, f"{where}.values[{j}]") for j, v in enumerate(values))
        return FunctionSpec(name, kind, values=out)
    # sampled
    fam = doc.get("family")
    _require(fam in SAMPLED_FAMILIES, f"family must be one of {SAMPLED_FAMILIES}", where)
    if fam == "fourier":
        k = doc.get("k")
        _require(isinstance(k, int) and not isinstance(k, bool), "k must be an integer", where)
        return FunctionSpec(name, kind, family=fam, k=k)
    if fam == "poly":
        coeffs = doc.get("coeffs")
        _require(isinstance(coeffs, Sequence) and len(coeffs) > 0, "coeffs required", where)
        out = tuple(_complex(c, f"{where}.coeffs[{j}]") for j, c in enumerate(coeffs))
        return FunctionSpec(name, kind, family=fam, coeffs=out)
    # step
    cuts = doc.get("cuts")
    values = doc.get("values")
    _require(isinstance(cuts, Sequence), "cuts must be a list", where)
    _require(isinstance(values, Sequence), "values must be a list", where)
    fr = tuple(_fraction(c, f"{where}.cuts") for c in cuts)
    _require(
        all(0 < c < 1 for c in fr) and list(fr) == sorted(set(fr)),
        "cuts must be strictly increasing within (0, 1)", where)
    _require(len(values) == len(fr) + 1, "need one value per piece", where)
    vals = tuple(_complex(v, f"{where}.values[{j}]") for j, v in enumerate(values))
    return FunctionSpec(name, kind, family=fam, cuts=fr, step_values=vals)


def _parse_task(doc, n_list: tuple[int, ...]) -> TaskSpec:
    where = "task"
    _require(isinstance(doc, Mapping), "expected an object", where)
    kind = doc.get("kind")
    _require(kind in TASK_KINDS, f"kind must be one of {TASK_KINDS}", where)

    if kind == "determinant" or kind == "check_r2":
        return TaskSpec(kind)
    if kind == "check_r1":
        i0 = doc.get("i0")
        _require(isinstance(i0, int) and not isinstance(i0, bool) and i0 >= 0,
                 "i0 must be a nonnegative integer", where)
        return TaskSpec(kind, i0=i0)
    if kind == "deninger":
        z = _complex(doc.get("z", 1.0), f"{where}.z")
        n_max = doc.get("n_max", 8)
        _require(isinstance(n_max, int) and n_max >= 1, "n_max must be >= 1", where)
        return TaskSpec(kind, z=z, n_max=n_max)
    if kind == "trace_profile":
        n_max = doc.get("n_max")
        _require(isinstance(n_max, int) and n_max >= 1, "n_max must be >= 1", where)
        return TaskSpec(kind, n_max=n_max)
    # sweep
    theorem = doc.get("theorem")
    _require(theorem in SWEEP_THEOREMS, f"theorem must be one of {SWEEP_THEOREMS}", where)
    ns = doc.get("Ns", list(n_list))
    _require(
        isinstance(ns, Sequence) and len(ns) > 0
        and all(isinstance(v, int) and not isinstance(v, bool) and v >= 1 for v in ns),
        "Ns must be a nonempty list of positive integers", where)
    i0 = doc.get("i0")
    z = doc.get("z")
    if theorem == "r1":
        _require(isinstance(i0, int) and not isinstance(i0, bool) and i0 >= 0,
                 "sweep over theorem r1 needs i0", where)
    if theorem == "deninger":
        z = _complex(z if z is not None else 1.0, f"{where}.z")
    return TaskSpec(
        kind, theorem=theorem, sweep_ns=tuple(ns), i0=i0,
        z=z if theorem == "deninger" else None)


def parse_scenario(source: str | Mapping) -> ScenarioConfig:
    """Parse and validate a scenario document (JSON text or mapping)."""
    if isinstance(source, str):
        try:
            doc = json.loads(source)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    else:
        doc = source
    _require(isinstance(doc, Mapping), "scenario must be a JSON object", "$")

    version = doc.get("schema_version")
    _require(version == SCHEMA_VERSION,
             f"schema_version must be {SCHEMA_VERSION}", "schema_version")

    extra = set(doc) - {"schema_version", "name", "N", "generators", "functions",
                        "operator", "task", "tolerances"}
    _require(not extra, f"unknown fields {sorted(extra)}", "$")

    name = doc.get("name", "")
    _require(isinstance(name, str), "name must be a string", "name")

    raw_n = doc.get("N")
    if isinstance(raw_n, int) and not isinstance(raw_n, bool):
        n_list = (raw_n,)
    elif isinstance(raw_n, Sequence) and raw_n and all(
        isinstance(v, int) and not isinstance(v, bool) for v in raw_n
    ):
        n_list = tuple(raw_n)
    else:
        raise ScenarioError("N must be a positive integer or list of them", "N")
    _require(all(v >= 1 for v in n_list), "N values must be >= 1", "N")

    gen_docs = doc.get("generators")
    _require(isinstance(gen_docs, Sequence) and len(gen_docs) > 0,
             "at least one generator is required", "generators")
    generators: list[GeneratorSpec] = []
    known: set[str] = set()
    for idx, gdoc in enumerate(gen_docs):
        spec = _parse_generator(gdoc, idx, known)
        _require(spec.name not in known, f"duplicate generator name {spec.name!r}",
                 f"generators[{idx}]")
        known.add(spec.name)
        generators.append(spec)

    fn_docs = doc.get("functions")
    _require(isinstance(fn_docs, Sequence) and len(fn_docs) > 0,
             "at least one function is required", "functions")
    functions: list[FunctionSpec] = []
    fn_names: set[str] = set()
    for idx, fdoc in enumerate(fn_docs):
        spec = _parse_function(fdoc, idx)
        _require(spec.name not in fn_names, f"duplicate function name {spec.name!r}",
                 f"functions[{idx}]")
        fn_names.add(spec.name)
        functions.append(spec)

    op_doc = doc.get("operator")
    _require(isinstance(op_doc, Sequence) and len(op_doc) > 0,
             "operator must be a nonempty list of [function, generator] pairs", "operator")
    operator: list[tuple[str, str]] = []
    for idx, pair in enumerate(op_doc):
        where = f"operator[{idx}]"
        _require(isinstance(pair, Sequence) and len(pair) == 2
                 and all(isinstance(x, str) for x in pair),
                 "expected [function name, generator name]", where)
        fn, gn = pair
        _require(fn in fn_names, f"unknown function {fn!r}", where)
        _require(gn in known, f"unknown generator {gn!r}", where)
        operator.append((fn, gn))

    tol_doc = doc.get("tolerances", {})
    _require(isinstance(tol_doc, Mapping), "tolerances must be an object", "tolerances")
    defaults = Tolerances()
    extra = set(tol_doc) - set(defaults.to_dict())
    _require(not extra, f"unknown tolerance fields {sorted(extra)}", "tolerances")
    merged = {**defaults.to_dict(), **dict(tol_doc)}
    for key in ("jacobi_max_sweeps", "girth_max_len"):
        _require(isinstance(merged[key], int) and merged[key] >= 1,
                 f"{key} must be a positive integer", "tolerances")
    for key in ("zero_tol", "jacobi_tol_factor", "trace_agreement"):
        _require(isinstance(merged[key], (int, float)) and merged[key] > 0,
                 f"{key} must be positive", "tolerances")
    tolerances = Tolerances(**merged)

    task = _parse_task(doc.get("task"), n_list)
    config = ScenarioConfig(
        name=name, n=n_list, generators=tuple(generators),
        functions=tuple(functions), operator=tuple(operator),
        task=task, tolerances=tolerances)

    if task.kind == "check_r1" or (task.kind == "sweep" and task.theorem == "r1"):
        _require(task.i0 < len(operator), "i0 must index an operator term", "task")
    if task.kind == "sweep":
        _require(config.parametric,
                 "non-parametric scenario: table-based pieces cannot sweep N", "task")
    if len(n_list) > 1:
        _require(task.kind == "sweep", "a list of N values requires a sweep task", "N")
    if task.kind != "sweep":
        instantiate(config, n_list[0])  # eager: surfaces bad tables / misaligned cuts
    return config


# ---------------------------------------------------------------------------
# Instantiation at a concrete resolution
# ---------------------------------------------------------------------------

def _build_generator(spec: GeneratorSpec, space: DiscreteSpace,
                     built: dict[str, PartialInjection]) -> PartialInjection:
    try:
        if spec.kind == "rotation":
            return make_rotation(space, spec.p)
        if spec.kind == "table":
            return make_table(space, spec.pairs)
        if spec.kind == "restrict":
            base = built[spec.base]
            if spec.cells is not None:
                bad = [k for k in spec.cells if not 0 <= k < space.n]
                if bad:
                    raise ScenarioError(f"cells {bad} outside [0, {space.n})",
                                        f"generator {spec.name!r}")
                return restrict(base, space.subset(spec.cells))
            lo, hi = spec.interval
            lo_edge, hi_edge = lo * space.n, hi * space.n
            if lo_edge.denominator != 1 or hi_edge.denominator != 1:
                raise ScenarioError(
                    f"interval [{lo}, {hi}) does not sit on cell boundaries at N={space.n}",
                    f"generator {spec.name!r}")
            return restrict(base, space.subset(range(int(lo_edge), int(hi_edge))))
        return make_interval_exchange(space, spec.cuts, spec.permutation)
    except TableError as exc:
        raise ScenarioError(str(exc), f"generator {spec.name!r}") from exc


def _build_function(spec: FunctionSpec, space: DiscreteSpace) -> CellFunction:
    if spec.kind == "constant":
        return CellFunction.constant(space, spec.value)
    if spec.kind == "table":
        if len(spec.values) != space.n:
            raise ScenarioError(
                f"table has {len(spec.values)} values but N={space.n}",
                f"function {spec.name!r}")
        return CellFunction.from_values(space, spec.values)
    if spec.family == "fourier":
        k = spec.k
        return CellFunction.sampled(space, lambda x: np.exp(2j * np.pi * k * x))
    if spec.family == "poly":
        coeffs = spec.coeffs

        def poly(x: np.ndarray) -> np.ndarray:
            acc = np.zeros_like(x, dtype=np.complex128)
            for c in reversed(coeffs):
                acc = acc * x + c
            return acc

        return CellFunction.sampled(space, poly)
    # step: value of the piece containing each midpoint
    edges = np.array([float(c) for c in spec.cuts])
    vals = np.array(spec.step_values, dtype=np.complex128)
    return CellFunction.sampled(
        space, lambda x: vals[np.searchsorted(edges, x, side="right")])


def instantiate(config: ScenarioConfig, n: int) -> OperatorExpr:
    """Build the operator expression of a scenario at resolution ``n``."""
    space = DiscreteSpace(n)
    built: dict[str, PartialInjection] = {}
    for spec in config.generators:
        built[spec.name] = _build_generator(spec, space, built)
    fam = GeneratorFamily(space, tuple((s.name, built[s.name]) for s in config.generators))
    fns = {spec.name: _build_function(spec, space) for spec in config.functions}
    terms = tuple((fns[fn], gn) for fn, gn in config.operator)
    return OperatorExpr(fam, terms)
