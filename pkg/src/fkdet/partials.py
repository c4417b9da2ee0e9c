"""Measure-preserving partial injections on cells, words, orbits, diagnostics.

A partial injection g: A -> B is stored as a target vector of length N with
-1 marking cells outside the domain A.  Injectivity forces
measure(domain) = measure(range) exactly, realizing measure preservation on
the uniform grid.  Words over a named generator family are evaluated by
maximal-domain composition, rightmost letter first.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import TableError, TermCapExceededError, UnknownGeneratorError
from .grid import CellSet, DiscreteSpace, _require_same_space, measure

WORD_ENUM_CAP = 200_000


@dataclass(frozen=True)
class PartialInjection:
    """An injective map between cell sets, with -1 for cells off the domain."""

    space: DiscreteSpace
    target: np.ndarray = field(repr=False)

    def __post_init__(self):
        t = np.asarray(self.target, dtype=np.int64)
        if t.shape != (self.space.n,):
            raise ValueError(f"expected {self.space.n} targets, got shape {t.shape}")
        if np.any((t < -1) | (t >= self.space.n)):
            raise ValueError("target indices out of range")
        hit = t[t >= 0]
        if len(np.unique(hit)) != len(hit):
            raise TableError("not injective")
        t = t.copy()
        t.setflags(write=False)
        object.__setattr__(self, "target", t)

    def domain(self) -> CellSet:
        return CellSet(self.space, frozenset(np.flatnonzero(self.target >= 0).tolist()))

    def range(self) -> CellSet:
        hit = self.target[self.target >= 0]
        return CellSet(self.space, frozenset(hit.tolist()))

    def __call__(self, k: int) -> int | None:
        t = int(self.target[k])
        return None if t < 0 else t

    def is_full_bijection(self) -> bool:
        return bool(np.all(self.target >= 0))

    def __eq__(self, other) -> bool:
        if not isinstance(other, PartialInjection):
            return NotImplemented
        return self.space == other.space and np.array_equal(self.target, other.target)

    def __hash__(self):
        return hash((self.space, self.target.tobytes()))


def identity_map(space: DiscreteSpace) -> PartialInjection:
    return PartialInjection(space, np.arange(space.n, dtype=np.int64))


def make_rotation(space: DiscreteSpace, p: int) -> PartialInjection:
    """Full bijection k -> (k + p) mod N."""
    n = space.n
    return PartialInjection(space, (np.arange(n, dtype=np.int64) + p) % n)


def make_table(space: DiscreteSpace, pairs: Iterable[tuple[int, int]]) -> PartialInjection:
    """Partial injection from explicit (source, target) cell pairs."""
    target = np.full(space.n, -1, dtype=np.int64)
    seen_targets: set[int] = set()
    for s, t in pairs:
        s, t = int(s), int(t)
        if not (0 <= s < space.n and 0 <= t < space.n):
            raise TableError(f"pair ({s}, {t}) outside [0, {space.n})")
        if target[s] >= 0:
            raise TableError(f"not a function: duplicate source {s}")
        if t in seen_targets:
            raise TableError(f"not injective: duplicate target {t}")
        target[s] = t
        seen_targets.add(t)
    return PartialInjection(space, target)


def make_interval_exchange(
    space: DiscreteSpace, cuts: Sequence[Fraction], permutation: Sequence[int]
) -> PartialInjection:
    """Interval exchange: translate the subintervals between cut points.

    ``cuts`` are the internal division points of [0,1), strictly increasing;
    each must sit on a cell boundary (a multiple of 1/N).  ``permutation``
    gives the left-to-right order of the source intervals in the image.
    """
    n = space.n
    cuts = [Fraction(c) for c in cuts]
    if any(not (0 < c < 1) for c in cuts) or sorted(set(cuts)) != list(cuts):
        raise TableError("cut points must be strictly increasing within (0, 1)")
    bounds = [Fraction(0)] + list(cuts) + [Fraction(1)]
    edges = []
    for b in bounds:
        e = b * n
        if e.denominator != 1:
            raise TableError(f"cut point {b} is not a multiple of 1/{n}")
        edges.append(int(e))
    m = len(bounds) - 1
    if sorted(permutation) != list(range(m)):
        raise TableError(f"permutation must rearrange 0..{m - 1}")
    lengths = [edges[i + 1] - edges[i] for i in range(m)]
    target = np.empty(n, dtype=np.int64)
    out = 0
    for j in permutation:
        lo = edges[j]
        target[lo : lo + lengths[j]] = np.arange(out, out + lengths[j])
        out += lengths[j]
    return PartialInjection(space, target)


def invert(g: PartialInjection) -> PartialInjection:
    target = np.full(g.space.n, -1, dtype=np.int64)
    src = np.flatnonzero(g.target >= 0)
    target[g.target[src]] = src
    return PartialInjection(g.space, target)


def restrict(g: PartialInjection, s: CellSet) -> PartialInjection:
    _require_same_space(g, s)
    target = np.full(g.space.n, -1, dtype=np.int64)
    if s.members:
        idx = s.indices()
        target[idx] = g.target[idx]
    return PartialInjection(g.space, target)


def compose(g: PartialInjection, h: PartialInjection) -> PartialInjection:
    """x -> g(h(x)) on the maximal domain h^{-1}(range(h) & domain(g))."""
    _require_same_space(g, h)
    target = np.full(g.space.n, -1, dtype=np.int64)
    ok = h.target >= 0
    via = h.target[ok]
    step2 = g.target[via]
    src = np.flatnonzero(ok)[step2 >= 0]
    target[src] = step2[step2 >= 0]
    return PartialInjection(g.space, target)


def fixed_point_set(g: PartialInjection) -> CellSet:
    fixed = np.flatnonzero(g.target == np.arange(g.space.n))
    return CellSet(g.space, frozenset(fixed.tolist()))


# ---------------------------------------------------------------------------
# Words over a generator family
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Word:
    """A formal word in the generators: a tuple of (name, exponent +-1)."""

    letters: tuple[tuple[str, int], ...] = ()

    def __post_init__(self):
        for name, e in self.letters:
            if e not in (-1, 1):
                raise ValueError(f"exponent must be +-1, got {e}")

    def __len__(self) -> int:
        return len(self.letters)

    def __mul__(self, other: "Word") -> "Word":
        return Word(self.letters + other.letters)

    def inverse(self) -> "Word":
        return Word(tuple((name, -e) for name, e in reversed(self.letters)))

    def is_reduced(self) -> bool:
        return all(
            not (a[0] == b[0] and a[1] == -b[1])
            for a, b in zip(self.letters, self.letters[1:])
        )

    def __str__(self) -> str:
        if not self.letters:
            return "e"
        return "*".join(n if e == 1 else f"{n}^-1" for n, e in self.letters)


def reduce_word(w: Word) -> Word:
    """Free reduction: cancel adjacent g*g^-1 pairs until none remain."""
    stack: list[tuple[str, int]] = []
    for letter in w.letters:
        if stack and stack[-1][0] == letter[0] and stack[-1][1] == -letter[1]:
            stack.pop()
        else:
            stack.append(letter)
    return Word(tuple(stack))


@dataclass(frozen=True)
class GeneratorFamily:
    """An ordered family of named partial injections on one space."""

    space: DiscreteSpace
    generators: tuple[tuple[str, PartialInjection], ...]

    def __post_init__(self):
        names = [n for n, _ in self.generators]
        if len(set(names)) != len(names):
            raise TableError("generator names must be unique")
        for _, g in self.generators:
            if g.space != self.space:
                raise TableError("all generators must share the family's space")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.generators)

    def __getitem__(self, name: str) -> PartialInjection:
        for n, g in self.generators:
            if n == name:
                return g
        raise UnknownGeneratorError(f"unknown generator {name!r}")

    def letter_map(self, name: str, exponent: int) -> PartialInjection:
        g = self[name]
        return g if exponent == 1 else invert(g)


def family(space: DiscreteSpace, **named: PartialInjection) -> GeneratorFamily:
    return GeneratorFamily(space, tuple(named.items()))


def evaluate_word(fam: GeneratorFamily, w: Word) -> PartialInjection:
    """Maximal-domain composition of the letters, rightmost applied first."""
    acc = identity_map(fam.space)
    for name, e in reversed(w.letters):
        acc = compose(fam.letter_map(name, e), acc)
    return acc


# ---------------------------------------------------------------------------
# Orbits and saturation (union-find with deterministic representatives)
# ---------------------------------------------------------------------------

class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x: int, y: int) -> None:
        rx, ry = self.find(x), self.find(y)
        if rx == ry:
            return
        if self.size[rx] < self.size[ry]:
            rx, ry = ry, rx
        self.parent[ry] = rx
        self.size[rx] += self.size[ry]


def orbits(fam: GeneratorFamily) -> tuple[CellSet, ...]:
    """Partition of cells under the relation generated by the family.

    Classes are keyed by their smallest cell and returned in that order.
    """
    uf = _UnionFind(fam.space.n)
    for _, g in fam.generators:
        for x in np.flatnonzero(g.target >= 0):
            uf.union(int(x), int(g.target[x]))
    classes: dict[int, set[int]] = {}
    for x in range(fam.space.n):
        classes.setdefault(uf.find(x), set()).add(x)
    keyed = sorted((min(cells), cells) for cells in classes.values())
    return tuple(CellSet(fam.space, frozenset(cells)) for _, cells in keyed)


def saturate(fam: GeneratorFamily, s: CellSet) -> CellSet:
    """Union of the orbits meeting S."""
    _require_same_space(fam, s)
    out: frozenset[int] = frozenset()
    for orbit in orbits(fam):
        if orbit.members & s.members:
            out |= orbit.members
    return CellSet(fam.space, out)


def is_ergodic_finite(fam: GeneratorFamily) -> bool:
    """Finite proxy for ergodicity: a single orbit."""
    return len(orbits(fam)) == 1


# ---------------------------------------------------------------------------
# Treeing diagnostics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TreeingDiagnostics:
    """Fixed-point measures of reduced words, sorted largest first."""

    entries: tuple[tuple[Word, Fraction], ...]
    max_len: int
    truncated: bool

    def girth(self) -> int | None:
        """Shortest word length with a positive-measure fixed set, if any."""
        lengths = [len(w) for w, m in self.entries if m > 0]
        return min(lengths) if lengths else None


def _reduced_words_up_to(names: Sequence[str], max_len: int, cap: int):
    """All nontrivial reduced words of length <= max_len, breadth first.

    Words are generated directly in reduced form (never extend by the
    inverse of the last letter), so no duplicates arise.  Yields a final
    ``truncated`` flag once the cap cuts enumeration short.
    """
    alphabet = [(n, e) for n in names for e in (1, -1)]
    level: list[tuple[tuple[str, int], ...]] = [()]
    produced = 0
    words: list[Word] = []
    truncated = False
    for _ in range(max_len):
        nxt: list[tuple[tuple[str, int], ...]] = []
        for prefix in level:
            for letter in alphabet:
                if prefix and prefix[-1][0] == letter[0] and prefix[-1][1] == -letter[1]:
                    continue
                if produced >= cap:
                    truncated = True
                    return words, truncated
                w = prefix + (letter,)
                words.append(Word(w))
                nxt.append(w)
                produced += 1
        level = nxt
    return words, truncated


def treeing_diagnostics(
    fam: GeneratorFamily, max_len: int, cap: int = WORD_ENUM_CAP
) -> TreeingDiagnostics:
    """Fixed-point measure of every nontrivial reduced word up to max_len.

    On a finite grid every point is eventually periodic, so some word always
    violates the measure-zero fixed-set condition; the shortest violating
    length (the girth) quantifies how far the family is from a treeing at
    this resolution.
    """
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    words, truncated = _reduced_words_up_to(fam.names, max_len, cap)
    entries = [(w, measure(fixed_point_set(evaluate_word(fam, w)))) for w in words]
    entries.sort(key=lambda e: (-e[1], len(e[0]), str(e[0])))
    return TreeingDiagnostics(tuple(entries), max_len, truncated)


def treeing_girth(fam: GeneratorFamily, max_len: int, cap: int = WORD_ENUM_CAP) -> int | None:
    """Shortest violating word length, scanning level by level and stopping early."""
    alphabet = [(n, e) for n in fam.names for e in (1, -1)]
    level: list[tuple[tuple[tuple[str, int], ...], PartialInjection]] = [
        ((), identity_map(fam.space))
    ]
    produced = 0
    for length in range(1, max_len + 1):
        nxt = []
        for prefix, pmap in level:
            for letter in alphabet:
                if prefix and prefix[-1][0] == letter[0] and prefix[-1][1] == -letter[1]:
                    continue
                produced += 1
                if produced > cap:
                    raise TermCapExceededError(
                        f"word enumeration exceeded cap {cap} at length {length}"
                    )
                wmap = compose(pmap, fam.letter_map(*letter))
                if measure(fixed_point_set(wmap)) > 0:
                    return length
                nxt.append((prefix + (letter,), wmap))
        level = nxt
    return None
