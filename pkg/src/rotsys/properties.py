"""Clause families for the conjecture checks, emitted on top of a base instance."""

from __future__ import annotations

import itertools
import logging
from math import comb, factorial

from .cnf import TRUE, CnfInstance, ConfigError, _catalog, at_most_k
from .core import edge, pairings

log = logging.getLogger(__name__)

DEFAULT_CAP = 12
HC_PLUS_CAP = 9


class FactorialCap(ConfigError):
    """Encoding size is factorial in n and n exceeds the configured cap."""


def _check_cap(n: int, cap: int, what: str):
    if n > cap:
        raise FactorialCap(f"{what} needs factorially many clauses; n={n} exceeds cap {cap}")


def _base_n(inst: CnfInstance) -> int:
    return inst.meta.get("base_n", inst.varmap.n)


def hamiltonian_cycles(vertices):
    """Each undirected cycle once: first vertex fixed, second < last."""
    vertices = list(vertices)
    first, rest = vertices[0], vertices[1:]
    for perm in itertools.permutations(rest):
        if len(perm) < 2 or perm[0] < perm[-1]:
            yield (first,) + perm


def cycle_edges(seq) -> list:
    return [edge(seq[i], seq[(i + 1) % len(seq)]) for i in range(len(seq))]


def path_edges(seq) -> list:
    return [edge(p, q) for p, q in zip(seq, seq[1:])]


def disjoint_pairs(edges):
    for e, f in itertools.combinations(edges, 2):
        if not set(e) & set(f):
            yield e, f


def crossing_clause(inst: CnfInstance, edges) -> list[int]:
    vm = inst.varmap
    return [vm.c(e, f) for e, f in disjoint_pairs(edges)]


def forbid_plane_hamiltonian_cycle(inst: CnfInstance, cap: int = DEFAULT_CAP):
    n = _base_n(inst)
    _check_cap(n, cap, "-HC")
    for cyc in hamiltonian_cycles(range(1, n + 1)):
        inst.add(crossing_clause(inst, cycle_edges(cyc)))


def forbid_plane_hamiltonian_path(inst: CnfInstance, a: int, b: int, cap: int = DEFAULT_CAP):
    n = _base_n(inst)
    if a == b:
        raise ValueError("path endpoints must differ")
    _check_cap(n, cap, "plane Hamiltonian path")
    inst.meta["symmetric"] = False
    inner = [v for v in range(1, n + 1) if v not in (a, b)]
    for perm in itertools.permutations(inner):
        inst.add(crossing_clause(inst, path_edges((a,) + perm + (b,))))


def forbid_hc_plus(inst: CnfInstance, cap: int = HC_PLUS_CAP):
    """No plane subdrawing on 2n-3 edges containing a Hamiltonian cycle."""
    n = _base_n(inst)
    _check_cap(n, cap, "-HC+")
    all_edges = list(itertools.combinations(range(1, n + 1), 2))
    extra = 2 * n - 3 - n
    for cyc in hamiltonian_cycles(range(1, n + 1)):
        ce = cycle_edges(cyc)
        rest = [e for e in all_edges if e not in set(ce)]
        for more in itertools.combinations(rest, extra):
            inst.add(crossing_clause(inst, ce + list(more)))


def forbid_matching_friendly_hc(inst: CnfInstance, k: int, cap: int = DEFAULT_CAP):
    """Plane matching {12, 34, ..., (2k-1)(2k)} that every plane Hamiltonian cycle crosses."""
    vm = inst.varmap
    n = _base_n(inst)
    if 2 * k > n or k < 0:
        raise ValueError(f"matching of size {k} does not fit into n={n}")
    if k >= 2 and inst.meta.get("natural"):
        raise ConfigError("-HT+ with k >= 2 cannot assume a natural labelling")
    _check_cap(n, cap, "-HT+")
    inst.meta["symmetric"] = False
    matching = [(2 * i + 1, 2 * i + 2) for i in range(k)]
    for m1, m2 in itertools.combinations(matching, 2):
        inst.add([-vm.c(m1, m2)])
    if k >= 2:
        # symmetry breaking around vertex 1, as seen from 2
        for u, u1 in matching[1:]:
            inst.add([vm.y(1, 2, u, u1)])
        for (u, _), (w, _) in itertools.combinations(matching[1:], 2):
            inst.add([vm.y(1, 2, u, w)])
        free = range(2 * k + 1, n + 1)
        for x, y in itertools.combinations(free, 2):
            inst.add([vm.y(1, 2, x, y)])
    for cyc in hamiltonian_cycles(range(1, n + 1)):
        ce = cycle_edges(cyc)
        clause = crossing_clause(inst, ce)
        for e in ce:
            for m in matching:
                if not set(e) & set(m):
                    clause.append(vm.c(e, m))
        inst.add(clause)


def k_cycles(n: int, k: int):
    """Every undirected k-cycle on [n] once (smallest vertex first, second < last)."""
    for sub in itertools.combinations(range(1, n + 1), k):
        yield from hamiltonian_cycles(sub)


def forbid_empty_k_cycles(inst: CnfInstance, k: int):
    """No plane k-cycle with all other vertices on one side.

    W(p0, q) is the parity of crossings of p0 q with the cycle edges, fixed by a
    case split over the 2^k crossing patterns; p0 is the smallest off-cycle vertex.
    """
    vm = inst.varmap
    n = _base_n(inst)
    if not 3 <= k <= n:
        raise ValueError(f"k must be in 3..{n}")
    lo = inst.num_vars + 1
    for cyc in k_cycles(n, k):
        ce = cycle_edges(cyc)
        clause = crossing_clause(inst, ce)
        off = [v for v in range(1, n + 1) if v not in cyc]
        if off:
            p0 = off[0]
            for q in off[1:]:
                w = inst.new_var()
                cs = [vm.c(edge(p0, q), e) for e in ce]
                for bits in itertools.product((False, True), repeat=k):
                    case = [-c if b else c for c, b in zip(cs, bits)]
                    inst.add(case + [w if sum(bits) % 2 else -w])
                clause.append(w)
        inst.add(clause)
    inst.blocks["w"] = (lo, inst.num_vars)


def _side_literals(inst, a, b, c, d):
    """(Y literals, contains) for the 16 possible signatures of the quad (a, b, c, d)."""
    cat = _catalog()
    vm = inst.varmap
    quad = (a, b, c, d)
    ys = []
    for i, x in enumerate(quad):
        others = [v for j, v in enumerate(quad) if j != i]
        ys.append(vm.y(x, *others))
    for sig in itertools.product((False, True), repeat=4):
        entry = cat.four[sig]
        contains = bool(entry.drawable and entry.side_abc_contains_d)
        yield [y if bit else -y for y, bit in zip(ys, sig)], contains


def empty_triangle_vars(inst: CnfInstance) -> dict:
    """t({a,b,c}) equivalent to "one side of abc has no vertex"; keyed by sorted triple."""
    n = _base_n(inst)
    lo = inst.num_vars + 1
    e = {}
    for a, b, c in itertools.combinations(range(1, n + 1), 3):
        for tri in ((a, b, c), (a, c, b)):
            eds = []
            for d in range(1, n + 1):
                if d in tri:
                    continue
                ed = inst.new_var()
                for lits, contains in _side_literals(inst, *tri, d):
                    inst.add([-l for l in lits] + [-ed if contains else ed])
                eds.append(ed)
            e[tri] = inst.and_gate(eds) if eds else TRUE
    t = {}
    for a, b, c in itertools.combinations(range(1, n + 1), 3):
        t[(a, b, c)] = inst.or_gate([e[(a, b, c)], e[(a, c, b)]])
    inst.blocks["empty"] = (lo, inst.num_vars)
    return t


def bound_empty_triangles(inst: CnfInstance, max_count: int):
    if max_count < 0:
        raise ValueError("bound must be non-negative")
    t = empty_triangle_vars(inst)
    lits = [l for l in t.values() if l not in (TRUE, -TRUE)]
    fixed = sum(1 for l in t.values() if l == TRUE)
    if fixed > max_count:
        inst.add([])
        return
    at_most_k(inst, lits, max_count - fixed)


def require_crossing_profile(inst: CnfInstance, mode: str):
    vm = inst.varmap
    n = _base_n(inst)
    if mode == "allEdgesCrossed":
        for e in itertools.combinations(range(1, n + 1), 2):
            inst.add([vm.c(e, f) for f in itertools.combinations(range(1, n + 1), 2)
                      if not set(e) & set(f)])
    elif mode == "crossingMaximal":
        for quad in itertools.combinations(range(1, n + 1), 4):
            inst.add([vm.c(e, f) for e, f in pairings(*quad)])
    else:
        raise ValueError(f"unknown crossing profile {mode!r}")


def matchings(vertices, k: int):
    """All sets of k pairwise vertex-disjoint edges, each once."""
    vertices = sorted(vertices)

    def rec(avail, k, start):
        if k == 0:
            yield []
            return
        for i, e in enumerate(start):
            if not set(e) <= avail:
                continue
            for rest in rec(avail - set(e), k - 1, start[i + 1:]):
                yield [e] + rest

    yield from rec(set(vertices), k, list(itertools.combinations(vertices, 2)))


def forbid_crossing_family(inst: CnfInstance, k: int):
    vm = inst.varmap
    n = _base_n(inst)
    if k < 2:
        raise ValueError("crossing families need k >= 2")
    if 2 * k > n:
        log.warning("crossing family of size %d cannot exist for n=%d; nothing to forbid", k, n)
        return
    for fam in matchings(range(1, n + 1), k):
        inst.add([-vm.c(e, f) for e, f in itertools.combinations(fam, 2)])


def required_pair(kind: str, labels) -> tuple:
    """The crossing pair the C- or T-rule demands on ``labels`` (positions a<b<c<d)."""
    a, b, c, d = labels
    if kind == "C":
        return edge(a, c), edge(b, d)
    if kind == "T":
        return edge(a, d), edge(b, c)
    raise ValueError(kind)


def pattern_labelings(kind: str, subset):
    """Orderings of ``subset`` up to the symmetries of the pattern."""
    first = subset[0]
    for perm in itertools.permutations(subset):
        if kind == "C":
            # dihedral: start at the minimum, second smaller than last
            if perm[0] != first or (len(perm) > 2 and perm[1] > perm[-1]):
                continue
        elif perm[0] > perm[-1]:
            continue
        yield perm


def forbid_perfect(inst: CnfInstance, kind: str, k: int):
    vm = inst.varmap
    n = _base_n(inst)
    if k < 4:
        raise ValueError("perfect subdrawings need k >= 4")
    if k > n:
        log.warning("forbidding %s%d is vacuous for n=%d", kind, k, n)
        return
    for sub in itertools.combinations(range(1, n + 1), k):
        for lab in pattern_labelings(kind, sub):
            inst.add([-vm.c(*required_pair(kind, q)) for q in itertools.combinations(lab, 4)])


def forbid_crossing_maximal_subdrawing(inst: CnfInstance, k: int):
    vm = inst.varmap
    n = _base_n(inst)
    if k < 4:
        raise ValueError("-X needs k >= 4")
    if k > n:
        log.warning("forbidding X%d is vacuous for n=%d", k, n)
        return
    uncrossed = {}
    for quad in itertools.combinations(range(1, n + 1), 4):
        u = inst.new_var()
        for e, f in pairings(*quad):
            inst.add([-u, -vm.c(e, f)])
        uncrossed[quad] = u
    for sub in itertools.combinations(range(1, n + 1), k):
        inst.add([uncrossed[q] for q in itertools.combinations(sub, 4)])


def forbid_subdrawing(inst: CnfInstance, kind: str, k: int):
    if kind in ("C", "perfectConvex"):
        forbid_perfect(inst, "C", k)
    elif kind in ("T", "perfectTwisted"):
        forbid_perfect(inst, "T", k)
    elif kind in ("X", "crossMaxSub"):
        forbid_crossing_maximal_subdrawing(inst, k)
    else:
        raise ValueError(f"unknown subdrawing kind {kind!r}")


def expected_property_counts(n: int) -> dict:
    return {
        "hc": factorial(n - 1) // 2,
        "hp_per_pair": factorial(n - 2),
        "hc_plus_per_cycle": comb(comb(n, 2) - n, n - 3),
    }
