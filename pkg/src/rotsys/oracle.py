"""Brute-force verifiers working from crossing maps and sides, never through CNF."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import networkx as nx

from .core import CrossingMap, PreRotationSystem, crossing_map, edge, side_contains


class BudgetExceeded(RuntimeError):
    pass


@dataclass
class OracleReport:
    prop: str
    witness: object = None
    exhaustive: bool = True

    @property
    def found(self) -> bool:
        return self.witness is not None


def _plane(cmap: CrossingMap, edges) -> bool:
    return not any(cmap.crosses(e, f) for e, f in itertools.combinations(edges, 2)
                   if not set(e) & set(f))


def _cmap(pi_or_cmap):
    return pi_or_cmap if isinstance(pi_or_cmap, CrossingMap) else crossing_map(pi_or_cmap)


def _search_path(cmap: CrossingMap, n: int, start: int, end: int | None, closed: bool,
                 budget: int, extra_edges=()):
    """Backtrack over Hamiltonian paths/cycles whose edges avoid crossing each other."""
    steps = [0]
    extra_edges = list(extra_edges)

    def ok(e, used):
        return (not any(cmap.crosses(e, f) for f in used if not set(e) & set(f))
                and not any(cmap.crosses(e, m) for m in extra_edges if not set(e) & set(m)))

    def rec(path, used, remaining):
        steps[0] += 1
        if steps[0] > budget:
            raise BudgetExceeded
        last = path[-1]
        if not remaining:
            if closed:
                return path if len(path) > 2 and ok(edge(last, path[0]), used) else None
            return path if end is None or last == end else None
        cands = []
        for v in remaining:
            if end is not None and v == end and len(remaining) > 1:
                continue
            e = edge(last, v)
            if ok(e, used):
                cands.append(v)
        # fewest onward options first
        def freedom(v):
            e = edge(last, v)
            return sum(1 for w in remaining if w != v and ok(edge(v, w), used + [e]))
        for v in sorted(cands, key=lambda v: (freedom(v), v)):
            res = rec(path + [v], used + [edge(last, v)], remaining - {v})
            if res:
                return res
        return None

    verts = set(range(1, n + 1)) - {start}
    return rec([start], [], frozenset(verts))


def find_plane_hamiltonian_cycle(pi, budget: int = 10**7, avoid=()) -> OracleReport:
    """A Hamiltonian cycle with no two crossing edges (and crossing none of ``avoid``)."""
    cmap = _cmap(pi)
    n = cmap.n
    try:
        cyc = _search_path(cmap, n, 1, None, True, budget, avoid)
    except BudgetExceeded:
        return OracleReport("plane-hc", None, False)
    if cyc:
        assert _plane(cmap, _cycle_edges(cyc))
    return OracleReport("plane-hc", tuple(cyc) if cyc else None)


def find_plane_hamiltonian_path(pi, a: int, b: int, budget: int = 10**7) -> OracleReport:
    cmap = _cmap(pi)
    try:
        path = _search_path(cmap, cmap.n, a, b, False, budget)
    except BudgetExceeded:
        return OracleReport("plane-hp", None, False)
    return OracleReport("plane-hp", tuple(path) if path else None)


def _cycle_edges(seq):
    return [edge(seq[i], seq[(i + 1) % len(seq)]) for i in range(len(seq))]


def find_hc_plus(pi) -> OracleReport:
    """A plane edge set of size 2n-3 containing a Hamiltonian cycle (exhaustive)."""
    cmap = _cmap(pi)
    n = cmap.n
    all_edges = list(itertools.combinations(range(1, n + 1), 2))
    for perm in itertools.permutations(range(2, n + 1)):
        if perm[0] > perm[-1]:
            continue
        cyc = (1,) + perm
        ce = _cycle_edges(cyc)
        if not _plane(cmap, ce):
            continue
        # greedy extension is not enough in general; search subsets of compatible edges
        rest = [e for e in all_edges if e not in ce and _plane(cmap, ce + [e])]
        need = n - 3
        for more in itertools.combinations(rest, need):
            if _plane(cmap, ce + list(more)):
                return OracleReport("hc-plus", ce + list(more))
    return OracleReport("hc-plus", None)


def find_matching_friendly_hc(pi, k: int) -> OracleReport:
    """Plane Hamiltonian cycle crossing none of 12, 34, ..., (2k-1)(2k)."""
    matching = [(2 * i + 1, 2 * i + 2) for i in range(k)]
    return find_plane_hamiltonian_cycle(pi, avoid=matching)


# -- sides, triangles, cycles ----------------------------------------------------

def closed_side(pi: PreRotationSystem, tri) -> set[int]:
    """Vertices in the closed side of triangle ``tri`` that reads it counterclockwise."""
    a, b, c = tri
    return {a, b, c} | {d for d in range(1, pi.n + 1)
                        if d not in tri and side_contains(pi, d, tri)}


def count_empty_triangles(pi: PreRotationSystem) -> int:
    count = 0
    for a, b, c in itertools.combinations(range(1, pi.n + 1), 3):
        if len(closed_side(pi, (a, b, c))) == 3 or len(closed_side(pi, (a, c, b))) == 3:
            count += 1
    return count


def same_side(cmap: CrossingMap, cycle_edges, p: int, q: int) -> bool:
    """Off-cycle p and q lie on one side iff pq crosses the cycle an even number of times."""
    pq = edge(p, q)
    return sum(cmap.crosses(pq, e) for e in cycle_edges) % 2 == 0


def find_empty_k_cycle(pi, k: int, budget: int = 10**7) -> OracleReport:
    cmap = _cmap(pi)
    n = cmap.n
    steps = 0
    for sub in itertools.combinations(range(1, n + 1), k):
        first, rest = sub[0], sub[1:]
        for perm in itertools.permutations(rest):
            if len(perm) > 1 and perm[0] > perm[-1]:
                continue
            steps += 1
            if steps > budget:
                return OracleReport(f"empty-{k}-cycle", None, False)
            cyc = (first,) + perm
            ce = _cycle_edges(cyc)
            if not _plane(cmap, ce):
                continue
            off = [v for v in range(1, n + 1) if v not in cyc]
            if all(same_side(cmap, ce, off[0], q) for q in off[1:]):
                return OracleReport(f"empty-{k}-cycle", cyc)
    return OracleReport(f"empty-{k}-cycle", None)


def uncrossed_edges(pi) -> list:
    cmap = _cmap(pi)
    return [e for e in itertools.combinations(range(1, cmap.n + 1), 2) if not cmap.crossings_of(e)]


def is_crossing_maximal(pi) -> bool:
    cmap = _cmap(pi)
    from math import comb
    return len(cmap) == comb(cmap.n, 4)


def find_crossing_family(pi, k: int) -> OracleReport:
    """k pairwise crossing, pairwise disjoint edges (clique search)."""
    cmap = _cmap(pi)
    g = nx.Graph()
    for p in cmap.pairs:
        e, f = tuple(p)
        g.add_edge(e, f)
    for clique in nx.find_cliques(g):
        if len(clique) >= k:
            fam = sorted(clique)[:k]
            # any k-subset of a clique of pairwise crossing edges is a family
            return OracleReport(f"crossing-family-{k}", sorted(fam))
    return OracleReport(f"crossing-family-{k}", None)


def _pair(kind, a, b, c, d):
    return (edge(a, c), edge(b, d)) if kind == "C" else (edge(a, d), edge(b, c))


def find_perfect_subdrawing(pi, kind: str, k: int) -> OracleReport:
    """Labelled k-subset whose crossings follow the C-rule or the T-rule exactly."""
    if kind not in ("C", "T"):
        raise ValueError(kind)
    cmap = _cmap(pi)
    n = cmap.n
    if k > n:
        return OracleReport(f"{kind}{k}", None)

    def ext(seq, avail):
        if len(seq) == k:
            return seq
        for v in sorted(avail):
            if kind == "C" and seq and v < seq[0]:
                continue
            new = seq + [v]
            if len(new) >= 4 and not all(
                    cmap.crosses(*_pair(kind, *(list(q) + [v]))) for q in itertools.combinations(seq, 3)):
                continue
            res = ext(new, avail - {v})
            if res:
                if kind == "C" and res[1] > res[-1]:
                    continue
                if kind == "T" and res[0] > res[-1]:
                    continue
                return res
        return None

    for sub in itertools.combinations(range(1, n + 1), k):
        res = ext([], set(sub))
        if res:
            return OracleReport(f"{kind}{k}", tuple(res))
    return OracleReport(f"{kind}{k}", None)


# -- convexity -----------------------------------------------------------------

def side_is_convex(pi: PreRotationSystem, cmap: CrossingMap, tri) -> bool:
    """Every edge between two vertices of the closed side avoids the triangle edges."""
    a, b, c = tri
    sides = [edge(a, b), edge(b, c), edge(a, c)]
    verts = closed_side(pi, tri)
    for u, v in itertools.combinations(sorted(verts), 2):
        uv = edge(u, v)
        if uv in sides:
            continue
        if any(cmap.crosses(uv, s) for s in sides if not set(uv) & set(s)):
            return False
    return True


def convex_sides(pi: PreRotationSystem, cmap: CrossingMap | None = None) -> dict:
    """Sorted triple -> list of its convex orientations among (a,b,c) and (a,c,b)."""
    cmap = cmap or crossing_map(pi)
    out = {}
    for a, b, c in itertools.combinations(range(1, pi.n + 1), 3):
        out[(a, b, c)] = [t for t in ((a, b, c), (a, c, b)) if side_is_convex(pi, cmap, t)]
    return out


def _hconvex_assignment(pi: PreRotationSystem, sides: dict):
    """2-SAT over side choices: T' inside S_T must choose the side away from T."""
    tris = list(sides)
    var = {t: i for i, t in enumerate(tris)}
    orient = {}
    for t in tris:
        a, b, c = t
        orient[(a, b, c)] = (var[t], True)
        orient[(a, c, b)] = (var[t], False)

    def lit(o):
        i, val = orient[o]
        return (i, val)

    def neg(l):
        return (l[0], not l[1])

    closed = {o: closed_side(pi, o) for o in orient}
    g = nx.DiGraph()
    g.add_nodes_from((i, v) for i in range(len(tris)) for v in (True, False))

    def clause(l1, l2):
        g.add_edge(neg(l1), l2)
        g.add_edge(neg(l2), l1)

    for t in tris:
        allowed = sides[t]
        for o in (t, (t[0], t[2], t[1])):
            if o not in allowed:
                clause(neg(lit(o)), neg(lit(o)))
    for o in orient:
        inside = closed[o]
        for t2 in tris:
            if t2 == tuple(sorted(o)) or not set(t2) <= inside:
                continue
            away = set(o) - set(t2)
            o1 = t2
            o2 = (t2[0], t2[2], t2[1])
            # S_T' must be the side of T' not containing the vertices of T outside T'
            ok = [x for x in (o1, o2) if not (away & closed[x])]
            if not ok:
                clause(neg(lit(o)), neg(lit(o)))
            elif len(ok) == 1:
                clause(neg(lit(o)), lit(ok[0]))
    comp = {}
    for k, scc in enumerate(nx.strongly_connected_components(g)):
        for node in scc:
            comp[node] = k
    for i in range(len(tris)):
        if comp[(i, True)] == comp[(i, False)]:
            return None
    cond = nx.condensation(g)
    order = {c: r for r, c in enumerate(nx.topological_sort(cond))}
    mapping = cond.graph["mapping"]
    choice = {}
    for t in tris:
        i = var[t]
        val = order[mapping[(i, True)]] > order[mapping[(i, False)]]
        choice[t] = t if val else (t[0], t[2], t[1])
    return choice


def check_class_definitional(pi: PreRotationSystem, cls: str) -> bool:
    """Convexity and h-convexity straight from the definitions."""
    if pi.n < 4:
        return True
    cmap = crossing_map(pi)
    sides = convex_sides(pi, cmap)
    if any(not s for s in sides.values()):
        return False
    if cls == "convex":
        return True
    if cls == "hconvex":
        return _hconvex_assignment(pi, sides) is not None
    raise ValueError(f"unknown class {cls!r}")


def hconvex_witness(pi: PreRotationSystem):
    cmap = crossing_map(pi)
    sides = convex_sides(pi, cmap)
    if any(not s for s in sides.values()):
        return None
    return _hconvex_assignment(pi, sides)


def validate_hconvex_witness(pi: PreRotationSystem, choice: dict) -> bool:
    cmap = crossing_map(pi)
    for t, o in choice.items():
        if not side_is_convex(pi, cmap, o):
            return False
    for t, o in choice.items():
        inside = closed_side(pi, o)
        for t2, o2 in choice.items():
            if t2 != t and set(t2) <= inside and not closed_side(pi, o2) <= inside:
                return False
    return True
