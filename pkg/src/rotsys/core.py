"""Combinatorial model of (pre-)rotation systems of the complete graph.

Vertices are labelled ``1..n``.  A system stores, for every vertex ``a``, the
counterclockwise cyclic order of the other vertices, normalized so that the
smallest vertex comes first.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Sequence


class InvalidSystem(ValueError):
    """Malformed rotation system or bad vertex arguments."""


class NotDrawable(ValueError):
    """Raised when a 4-element subconfiguration is the obstruction Pi4o."""


class OutOfScope(ValueError):
    """Requested check is not covered by a known characterization."""


def normalize_cycle(seq: Sequence[int]) -> tuple[int, ...]:
    """Rotate a cyclic sequence so that its smallest element is first."""
    k = seq.index(min(seq))
    return tuple(seq[k:]) + tuple(seq[:k])


@dataclass(frozen=True)
class PreRotationSystem:
    n: int
    rotations: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        n = self.n
        if n < 3:
            raise InvalidSystem(f"need n >= 3, got {n}")
        if len(self.rotations) != n:
            raise InvalidSystem(f"expected {n} rotations, got {len(self.rotations)}")
        for a, rot in enumerate(self.rotations, start=1):
            if sorted(rot) != [v for v in range(1, n + 1) if v != a]:
                raise InvalidSystem(f"rotation of {a} is not a permutation of the others: {rot}")
            if rot[0] != min(rot):
                raise InvalidSystem(f"rotation of {a} must start with its smallest element")

    @classmethod
    def from_rotations(cls, rotations: Iterable[Sequence[int]]) -> "PreRotationSystem":
        rots = tuple(normalize_cycle(list(r)) for r in rotations)
        return cls(len(rots), rots)

    def rotation(self, a: int) -> tuple[int, ...]:
        return self.rotations[a - 1]

    @cached_property
    def _pos(self) -> tuple[dict[int, int], ...]:
        return tuple({b: i for i, b in enumerate(rot)} for rot in self.rotations)

    def position(self, a: int, b: int) -> int:
        return self._pos[a - 1][b]

    def ccw(self, a: int, b: int, c: int, d: int) -> bool:
        """True iff ``b, c, d`` appear in this cyclic order around ``a``."""
        pos = self._pos[a - 1]
        i, j, k = pos[b], pos[c], pos[d]
        return i < j < k or j < k < i or k < i < j

    def vector(self) -> tuple[int, ...]:
        return tuple(itertools.chain.from_iterable(self.rotations))

    def reflected(self) -> "PreRotationSystem":
        return PreRotationSystem.from_rotations(tuple(reversed(r)) for r in self.rotations)

    def is_natural(self) -> bool:
        return self.rotations[0] == tuple(range(2, self.n + 1))

    def to_json(self) -> str:
        return json.dumps({"n": self.n, "rotations": [list(r) for r in self.rotations]})

    @classmethod
    def from_json(cls, line: str | dict) -> "PreRotationSystem":
        obj = json.loads(line) if isinstance(line, str) else line
        sys_ = cls.from_rotations(obj["rotations"])
        if "n" in obj and obj["n"] != sys_.n:
            raise InvalidSystem(f"n={obj['n']} does not match {sys_.n} rotations")
        return sys_

    def __str__(self):
        return " ".join("".join(map(str, r)) if self.n < 10 else ",".join(map(str, r))
                        for r in self.rotations)


def read_jsonl(path) -> Iterator[PreRotationSystem]:
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line and line.startswith("{"):
                obj = json.loads(line)
                if "rotations" in obj:
                    yield PreRotationSystem.from_json(obj)


def write_jsonl(path, systems: Iterable[PreRotationSystem]) -> int:
    count = 0
    with open(path, "w") as fh:
        for s in systems:
            fh.write(s.to_json() + "\n")
            count += 1
    return count


def _check_vertices(pi: PreRotationSystem, vertices: Sequence[int]):
    if len(set(vertices)) != len(vertices):
        raise InvalidSystem(f"duplicate vertices in {vertices}")
    for v in vertices:
        if not 1 <= v <= pi.n:
            raise InvalidSystem(f"vertex {v} out of range 1..{pi.n}")


def restrict(pi: PreRotationSystem, subset: Sequence[int]) -> PreRotationSystem:
    """Induced subconfiguration on ``subset``, relabelled ``1..k`` in subset order."""
    _check_vertices(pi, subset)
    if len(subset) < 3:
        raise InvalidSystem("restriction needs at least 3 vertices")
    label = {v: i for i, v in enumerate(subset, start=1)}
    rots = []
    for v in subset:
        rots.append([label[u] for u in pi.rotation(v) if u in label])
    return PreRotationSystem.from_rotations(rots)


def transform(pi: PreRotationSystem, relabeling: Sequence[int], reflect: bool = False) -> PreRotationSystem:
    """Relabel vertex ``v`` as ``relabeling[v-1]``, optionally reversing all rotations."""
    n = pi.n
    if sorted(relabeling) != list(range(1, n + 1)):
        raise InvalidSystem(f"relabeling {relabeling} is not a bijection on 1..{n}")
    rots: list = [None] * n
    for v in range(1, n + 1):
        r = [relabeling[u - 1] for u in pi.rotation(v)]
        if reflect:
            r.reverse()
        rots[relabeling[v - 1] - 1] = r
    return PreRotationSystem.from_rotations(rots)


def natural_relabelings(pi: PreRotationSystem) -> Iterator[tuple[list[int], bool]]:
    """Yield the 2n(n-1) relabelings making ``pi`` natural.

    Choosing the first vertex ``f``, the second vertex ``s`` and the orientation
    fixes the whole labelling: ``f -> 1`` and the rotation of ``f`` read from ``s``
    becomes ``2, 3, ..., n``.
    """
    n = pi.n
    for f in range(1, n + 1):
        rot = pi.rotation(f)
        for reflect in (False, True):
            seq = list(reversed(rot)) if reflect else list(rot)
            for k in range(n - 1):
                order = seq[k:] + seq[:k]
                perm = [0] * n
                perm[f - 1] = 1
                for j, v in enumerate(order):
                    perm[v - 1] = j + 2
                yield perm, reflect


def _unchecked(n: int, rotations) -> PreRotationSystem:
    obj = object.__new__(PreRotationSystem)
    object.__setattr__(obj, "n", n)
    object.__setattr__(obj, "rotations", rotations)
    return obj


def _natural_rotation_tuples(pi: PreRotationSystem) -> list[tuple]:
    """Rotation tuples of the 2n(n-1) natural candidates (fast path of ``transform``)."""
    n = pi.n
    out = []
    rots = pi.rotations
    for perm, reflect in natural_relabelings(pi):
        new = [None] * n
        for v in range(n):
            r = [perm[u - 1] for u in rots[v]]
            if reflect:
                r.reverse()
            k = r.index(min(r))
            new[perm[v] - 1] = tuple(r[k:] + r[:k])
        out.append(tuple(new))
    return out


def natural_forms(pi: PreRotationSystem) -> set[PreRotationSystem]:
    """All distinct natural systems isomorphic to ``pi``."""
    return {_unchecked(pi.n, r) for r in set(_natural_rotation_tuples(pi))}


def canonical_form(pi: PreRotationSystem) -> PreRotationSystem:
    """Lexicographically smallest row vector over all relabelings and reflections.

    The minimum is always natural, so only the 2n(n-1) natural candidates are tried.
    """
    return _unchecked(pi.n, min(_natural_rotation_tuples(pi)))


def is_isomorphic(p: PreRotationSystem, q: PreRotationSystem) -> bool:
    return p.n == q.n and canonical_form(p) == canonical_form(q)


def orbit(pi: PreRotationSystem) -> set[PreRotationSystem]:
    """All labelled systems isomorphic to ``pi`` (n! * 2 transforms, deduplicated)."""
    out = set()
    for perm in itertools.permutations(range(1, pi.n + 1)):
        out.add(transform(pi, perm, False))
        out.add(transform(pi, perm, True))
    return out


def all_prerotation_systems(n: int) -> Iterator[PreRotationSystem]:
    """Every labelled pre-rotation system on ``n`` elements (small n only)."""
    per_vertex = []
    for a in range(1, n + 1):
        others = [v for v in range(1, n + 1) if v != a]
        first, rest = others[0], others[1:]
        per_vertex.append([(first,) + p for p in itertools.permutations(rest)])
    for rots in itertools.product(*per_vertex):
        yield PreRotationSystem(n, tuple(rots))


# -- convenience constructions ------------------------------------------------

def convex_position(n: int) -> PreRotationSystem:
    """Rotation system of n points in convex position, labelled counterclockwise."""
    return PreRotationSystem.from_rotations(
        [[(a + j - 1) % n + 1 for j in range(1, n)] for a in range(1, n + 1)])


def crossing_free_k4() -> PreRotationSystem:
    """Planar K4 with vertex 4 inside the triangle 1,2,3 (counterclockwise)."""
    return PreRotationSystem.from_rotations([[2, 4, 3], [3, 4, 1], [1, 4, 2], [1, 2, 3]])


def perfect_twisted(n: int) -> PreRotationSystem:
    """The twisted drawing T_n, in which ad crosses bc exactly when a < b < c < d."""
    # a sees the larger vertices increasing, then the smaller ones decreasing
    return PreRotationSystem.from_rotations(
        [list(range(a + 1, n + 1)) + list(range(a - 1, 0, -1)) for a in range(1, n + 1)])


# -- crossings, quadruples and sides ------------------------------------------

Edge = tuple[int, int]


def edge(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


def pairings(a: int, b: int, c: int, d: int) -> tuple[tuple[Edge, Edge], ...]:
    """The three pairs of disjoint edges on ``a < b < c < d``, in fixed order."""
    return (((a, b), (c, d)), ((a, c), (b, d)), ((a, d), (b, c)))


def signature(pi: PreRotationSystem, quad: Sequence[int]) -> tuple[bool, ...]:
    """Y-bits of ``pi`` restricted to ``quad`` (labels 1..4 in quad order).

    Bit ``x`` says whether the other three labels, sorted, appear counterclockwise
    around label ``x``.
    """
    bits = []
    for i, x in enumerate(quad):
        others = [v for j, v in enumerate(quad) if j != i]
        bits.append(pi.ccw(x, *others))
    return tuple(bits)


@dataclass(frozen=True)
class QuadrupleClass:
    crossing: bool
    pair: tuple[Edge, Edge] | None = None
    # True when the second edge, directed low->high, crosses the first
    # (directed low->high) from its left to its right
    left_to_right: bool | None = None

    def __post_init__(self):
        if self.crossing != (self.pair is not None) or self.crossing != (self.left_to_right is not None):
            raise InvalidSystem("crossing class needs exactly one pair and one direction")


NO_CROSSING = QuadrupleClass(False)


def _catalog():
    from .catalog import load_catalog
    return load_catalog()


def classify_quadruple(pi: PreRotationSystem, a: int, b: int, c: int, d: int) -> QuadrupleClass:
    quad = (a, b, c, d)
    _check_vertices(pi, quad)
    entry = _catalog().four[signature(pi, quad)]
    if not entry.drawable:
        raise NotDrawable(f"{quad} induces Pi4o")
    if entry.pair is None:
        return NO_CROSSING
    (p, q), (r, s) = entry.pair
    e, f = edge(quad[p - 1], quad[q - 1]), edge(quad[r - 1], quad[s - 1])
    if f < e:
        e, f = f, e
    # express the stored cyclic pattern around the crossing with real vertices and
    # read off whether f (low->high) passes e (low->high) from left to right
    cyc = [quad[v - 1] for v in entry.cross_rotation]
    k = cyc.index(e[0])
    cyc = cyc[k:] + cyc[:k]
    # ccw around the crossing: e_low, f_high, e_high, f_low  <=>  left-to-right
    return QuadrupleClass(True, (e, f), cyc[1] == f[1])


@dataclass(frozen=True)
class CrossingMap:
    n: int
    pairs: frozenset

    def crosses(self, e: Edge, f: Edge) -> bool:
        return frozenset((edge(*e), edge(*f))) in self.pairs

    def __len__(self):
        return len(self.pairs)

    def crossings_of(self, e: Edge) -> list[Edge]:
        e = edge(*e)
        out = []
        for p in self.pairs:
            if e in p:
                (f,) = p - {e}
                out.append(f)
        return sorted(out)

    def sorted_pairs(self) -> list[tuple[Edge, Edge]]:
        return sorted(tuple(sorted(p)) for p in self.pairs)


def crossing_map(pi: PreRotationSystem) -> CrossingMap:
    four = _catalog().four
    pairs = set()
    for quad in itertools.combinations(range(1, pi.n + 1), 4):
        entry = four[signature(pi, quad)]
        if not entry.drawable:
            raise NotDrawable(f"{quad} induces Pi4o")
        if entry.pair is not None:
            (p, q), (r, s) = entry.pair
            pairs.add(frozenset((edge(quad[p - 1], quad[q - 1]), edge(quad[r - 1], quad[s - 1]))))
    return CrossingMap(pi.n, frozenset(pairs))


def side_contains(pi: PreRotationSystem, d: int, triangle: Sequence[int]) -> bool:
    """Whether ``d`` lies in the side of triangle abc that sees a, b, c counterclockwise."""
    a, b, c = triangle
    quad = (a, b, c, d)
    _check_vertices(pi, quad)
    entry = _catalog().four[signature(pi, quad)]
    if not entry.drawable:
        raise NotDrawable(f"{quad} induces Pi4o")
    return entry.side_abc_contains_d


def contains_configuration(pi: PreRotationSystem, target: PreRotationSystem) -> bool:
    k = target.n
    if k > pi.n:
        return False
    want = canonical_form(target)
    return any(canonical_form(restrict(pi, sub)) == want
               for sub in itertools.combinations(range(1, pi.n + 1), k))


def contains_pi4o(pi: PreRotationSystem) -> bool:
    four = _catalog().four
    return any(not four[signature(pi, q)].drawable
               for q in itertools.combinations(range(1, pi.n + 1), 4))


def subsystem_forms(pi: PreRotationSystem, k: int) -> Iterator[PreRotationSystem]:
    for sub in itertools.combinations(range(1, pi.n + 1), k):
        yield canonical_form(restrict(pi, sub))


def check_class(pi: PreRotationSystem, cls: str) -> bool:
    """Membership via forbidden subconfigurations.

    ``cls`` is one of ``drawable``, ``convex``, ``hconvex``, ``gentwisted``.
    """
    cat = _catalog()
    if pi.n < 4:
        if cls == "gentwisted":
            raise OutOfScope("generalized twisted characterization needs n >= 7")
        return True
    if contains_pi4o(pi):
        return False
    if cls == "gentwisted":
        if pi.n < 7:
            raise OutOfScope("generalized twisted characterization needs n >= 7")
        return all(f == cat.gt_allowed5 for f in subsystem_forms(pi, 5))
    fives = set(subsystem_forms(pi, 5)) if pi.n >= 5 else set()
    if fives & {cat.pi5a, cat.pi5b}:
        return False
    if cls == "drawable":
        return True
    if fives & {cat.conv5a, cat.conv5b}:
        return False
    if cls == "convex":
        return True
    if cls == "hconvex":
        return pi.n < 6 or cat.hconv6 not in set(subsystem_forms(pi, 6))
    raise ValueError(f"unknown class {cls!r}")
