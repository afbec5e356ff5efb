"""Drawability of pre-rotation systems via planarizations.

A drawing is searched for as an ordering of the crossings along every edge such
that the subdivided graph (original vertices plus one degree-4 cross-vertex per
crossing) is planar.  Planarity is encoded with Schnyder's order-dimension-3
criterion.  Independently, :func:`faces_of` walks the faces of a combinatorial
embedding so that a found planarization can be checked against Euler's formula
with the rotations prescribed by the system itself.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from functools import lru_cache

from .cnf import CnfInstance
from .core import (
    CrossingMap, NotDrawable, PreRotationSystem, canonical_form, classify_quadruple,
    contains_pi4o, crossing_map, edge, restrict,
)


class EmbeddingError(RuntimeError):
    """A combinatorial embedding violates Euler's formula."""


@dataclass
class PlanarizationGraph:
    n: int
    crossings: list  # list of (e, f) with e < f; cross-vertex i has id n + 1 + i
    orders: dict = field(default_factory=dict)  # edge -> (u, x1, ..., v) along u -> v, u < v

    def cross_id(self, pair) -> int:
        return self.n + 1 + self.crossings.index(tuple(sorted(pair)))

    @property
    def vertices(self) -> list[int]:
        return list(range(1, self.n + 1 + len(self.crossings)))

    def edges(self) -> set[tuple[int, int]]:
        out = set()
        for seq in self.orders.values():
            for p, q in zip(seq, seq[1:]):
                out.add((p, q) if p < q else (q, p))
        return out

    def check(self):
        """Structural invariants: degree 4 at crossings, edge count."""
        es = self.edges()
        expected = self.n * (self.n - 1) // 2 + 2 * len(self.crossings)
        if len(es) != expected:
            raise EmbeddingError(f"planarization has {len(es)} edges, expected {expected}")
        deg = {v: 0 for v in self.vertices}
        for p, q in es:
            deg[p] += 1
            deg[q] += 1
        for i in range(len(self.crossings)):
            if deg[self.n + 1 + i] != 4:
                raise EmbeddingError("cross-vertex without degree 4")
        for (e, f) in self.crossings:
            x = self.cross_id((e, f))
            if x not in self.orders[e] or x not in self.orders[f]:
                raise EmbeddingError(f"crossing {e}x{f} missing from an edge order")

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "crossings": [[list(e), list(f)] for e, f in self.crossings],
            "orders": {f"{u},{v}": list(seq) for (u, v), seq in sorted(self.orders.items())},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _neighbour_toward(graph: PlanarizationGraph, node: int, e, endpoint: int) -> int:
    seq = graph.orders[e]
    i = seq.index(node)
    return seq[i - 1] if endpoint == seq[0] else seq[i + 1]


def embedding_rotations(graph: PlanarizationGraph, rotations, cross_patterns) -> dict[int, list[int]]:
    """Counterclockwise rotation at every planarization vertex.

    ``rotations[a]`` is the cyclic order of original neighbours of ``a``;
    ``cross_patterns[(e, f)]`` is the cyclic order of the four endpoints of
    e and f as seen around their crossing.
    """
    rot = {}
    for a in range(1, graph.n + 1):
        rot[a] = [_neighbour_toward(graph, a, edge(a, b), b) for b in rotations[a]]
    for e, f in graph.crossings:
        x = graph.cross_id((e, f))
        pattern = cross_patterns[(e, f)]
        rot[x] = [_neighbour_toward(graph, x, e if end in e else f, end) for end in pattern]
    return rot


def faces_of(rotation: dict[int, list[int]], check_euler: bool = True) -> list[list[tuple[int, int]]]:
    """Face boundary walks of a connected combinatorial embedding.

    ``rotation[v]`` lists the neighbours of ``v`` counterclockwise.  Each face is
    returned as a list of darts ``(u, v)``; the face lies to the left of each dart.
    """
    pred = {}
    for v, nbrs in rotation.items():
        k = len(nbrs)
        for i, u in enumerate(nbrs):
            pred[(v, u)] = nbrs[(i - 1) % k]
    darts = [(u, v) for u, nbrs in rotation.items() for v in nbrs]
    for u, v in darts:
        if (v, u) not in pred:
            raise EmbeddingError(f"rotation is not symmetric at edge {u}-{v}")
    seen = set()
    faces = []
    for start in darts:
        if start in seen:
            continue
        face = []
        d = start
        while d not in seen:
            seen.add(d)
            face.append(d)
            u, v = d
            d = (v, pred[(v, u)])
        if d != start:
            raise EmbeddingError("face walk did not close")
        faces.append(face)
    if check_euler:
        nv = len(rotation)
        ne = len(darts) // 2
        if nv - ne + len(faces) != 2:
            raise EmbeddingError(f"Euler violated: V={nv} E={ne} F={len(faces)}")
    return faces


def is_planar_embedding(rotation) -> bool:
    try:
        faces_of(rotation)
    except EmbeddingError:
        return False
    return True


def left_region(rotation, faces, cycle: list[int]) -> set[int]:
    """Indices of faces left of the directed closed walk ``cycle`` (a planarization cycle)."""
    face_of = {}
    for i, f in enumerate(faces):
        for d in f:
            face_of[d] = i
    cyc_darts = {(cycle[i], cycle[(i + 1) % len(cycle)]) for i in range(len(cycle))}
    blocked = cyc_darts | {(v, u) for u, v in cyc_darts}
    region = {face_of[d] for d in cyc_darts}
    stack = list(region)
    while stack:
        i = stack.pop()
        for u, v in faces[i]:
            if (u, v) in blocked:
                continue
            j = face_of[(v, u)]
            if j not in region:
                region.add(j)
                stack.append(j)
    return region


def vertex_in_region(faces, region: set[int], v: int) -> bool:
    return any(i in region for i, f in enumerate(faces) for d in f if d[0] == v)


# -- planarization of a Pi4o-free system --------------------------------------

def cross_patterns_for(pi: PreRotationSystem, cmap: CrossingMap) -> dict:
    """Alternating endpoint order around each crossing, chirality from its K4."""
    out = {}
    for e, f in cmap.sorted_pairs():
        q = classify_quadruple(pi, *sorted(e + f))
        (e0, e1), (f0, f1) = q.pair
        out[(e, f)] = [e0, f1, e1, f0] if q.left_to_right else [e0, f0, e1, f1]
    return out


def planarization_from_orders(pi: PreRotationSystem, cmap: CrossingMap, orders: dict) -> PlanarizationGraph:
    """``orders[e]`` lists the edges crossing ``e`` in order from its low to high endpoint."""
    crossings = cmap.sorted_pairs()
    graph = PlanarizationGraph(pi.n, crossings)
    for u, v in itertools.combinations(range(1, pi.n + 1), 2):
        e = (u, v)
        xs = [graph.cross_id((e, f)) for f in orders.get(e, [])]
        graph.orders[e] = (u, *xs, v)
    return graph


def check_planarization(pi: PreRotationSystem, graph: PlanarizationGraph) -> list:
    """Verify that ``graph`` with the rotations of ``pi`` is a plane embedding; returns faces."""
    graph.check()
    cmap = crossing_map(pi)
    rot = embedding_rotations(graph, {a: pi.rotation(a) for a in range(1, pi.n + 1)},
                              cross_patterns_for(pi, cmap))
    return faces_of(rot)


# -- SAT encoding -------------------------------------------------------------

class DrawabilityEncoding:
    """CNF whose models are edge orders with a planar planarization."""

    def __init__(self, pi: PreRotationSystem, cmap: CrossingMap | None = None):
        self.pi = pi
        self.cmap = cmap if cmap is not None else crossing_map(pi)
        self.inst = CnfInstance()
        self.inst.meta.update(kind="drawability", n=pi.n)
        n = pi.n
        self.crossings = self.cmap.sorted_pairs()
        self.node_of = {c: n + 1 + i for i, c in enumerate(self.crossings)}
        self.n_nodes = n + len(self.crossings)
        self.edge_nodes = {}
        for u, v in itertools.combinations(range(1, n + 1), 2):
            e = (u, v)
            self.edge_nodes[e] = [self.node_of[tuple(sorted((e, f)))] for f in self.cmap.crossings_of(e)]
        self._order_vars()
        self._adjacency()
        self._schnyder()

    # O(e, x, y): x comes before y on e (walking from its low endpoint)
    def _order_vars(self):
        inst = self.inst
        self.order = {}
        start = inst.num_vars + 1
        for e, xs in self.edge_nodes.items():
            for x, y in itertools.combinations(xs, 2):
                self.order[(e, x, y)] = inst.new_var()
        inst.blocks["order"] = (start, inst.num_vars)
        for e, xs in self.edge_nodes.items():
            for x, y, z in itertools.permutations(xs, 3):
                # each 3-cycle is excluded once, by the rotation led by its minimum
                if not (x < y and x < z):
                    continue
                inst.add([-self.before(e, x, y), -self.before(e, y, z), self.before(e, x, z)])

    def before(self, e, x, y) -> int:
        u, v = e
        if x == y:
            raise ValueError("same node")
        if x == u or y == v:
            return self.inst.TRUE
        if x == v or y == u:
            return -self.inst.TRUE
        if (e, x, y) in self.order:
            return self.order[(e, x, y)]
        return -self.order[(e, y, x)]

    def _adjacency(self):
        inst = self.inst
        self.adj = {}
        start = inst.num_vars + 1
        for e, xs in self.edge_nodes.items():
            seq = [e[0], *xs, e[1]]
            for p, q in itertools.combinations(seq, 2):
                key = (p, q) if p < q else (q, p)
                self.adj[key] = inst.new_var()
        inst.blocks["adjacency"] = (start, inst.num_vars)
        for e, xs in self.edge_nodes.items():
            seq = [e[0], *xs, e[1]]
            for p, q in itertools.permutations(seq, 2):
                # p directly before q forces the planarization edge pq
                key = (p, q) if p < q else (q, p)
                clause = [self.adj[key], -self.before(e, p, q)]
                for z in seq:
                    if z in (p, q):
                        continue
                    b1, b2 = self.before(e, p, z), self.before(e, z, q)
                    clause.append(inst.and_gate([b1, b2], polarity=1))
                inst.add(clause)
            for p, q in itertools.combinations(seq, 2):
                # at most consecutive pairs become edges
                key = (p, q) if p < q else (q, p)
                for z in seq:
                    if z in (p, q):
                        continue
                    inst.add([-self.adj[key], -self.before(e, p, z), -self.before(e, z, q)])
                    inst.add([-self.adj[key], -self.before(e, q, z), -self.before(e, z, p)])

    def _schnyder(self):
        inst = self.inst
        nodes = range(1, self.n_nodes + 1)
        self.rank = {}
        start = inst.num_vars + 1
        for i in range(3):
            for u, v in itertools.combinations(nodes, 2):
                self.rank[(i, u, v)] = inst.new_var()
        inst.blocks["schnyder"] = (start, inst.num_vars)
        for i in range(3):
            for u, v, w in itertools.permutations(nodes, 3):
                if u < v and u < w:
                    inst.add([-self.prec(i, u, v), -self.prec(i, v, w), self.prec(i, u, w)])
        # every edge uv and third vertex w: some order puts both u and v below w
        for (u, v), a in self.adj.items():
            for w in nodes:
                if w in (u, v):
                    continue
                clause = [-a]
                for i in range(3):
                    clause.append(inst.and_gate([self.prec(i, u, w), self.prec(i, v, w)], polarity=1))
                inst.add(clause)

    def prec(self, i, u, v) -> int:
        return self.rank[(i, u, v)] if u < v else -self.rank[(i, v, u)]

    def decode(self, model) -> PlanarizationGraph:
        val = _model_lookup(model)
        orders = {}
        for e, xs in self.edge_nodes.items():
            inv = {self.node_of[tuple(sorted((e, f)))]: f for f in self.cmap.crossings_of(e)}
            # position = number of crossings before it
            ranked = sorted(xs, key=lambda x: sum(1 for y in xs if y != x and _lit(val, self.before(e, y, x))))
            orders[e] = [inv[x] for x in ranked]
        return planarization_from_orders(self.pi, self.cmap, orders)


def _model_lookup(model):
    return set(l for l in model if l > 0)


def _lit(pos: set, lit: int) -> bool:
    return (lit in pos) if lit > 0 else (-lit not in pos)


def build_drawability_cnf(pi: PreRotationSystem) -> CnfInstance:
    if contains_pi4o(pi):
        raise NotDrawable("system contains Pi4o")
    return DrawabilityEncoding(pi).inst


def is_drawable(pi: PreRotationSystem, solver=None, hereditary: bool = True
                ) -> tuple[bool, PlanarizationGraph | None]:
    """Decide drawability; on success also return a verified planarization.

    With ``hereditary`` every 5-element restriction is decided first (by this
    same SAT query, memoised per class): sub-drawings of drawings are drawings,
    and the small queries refute most non-drawable systems far faster than the
    full encoding does.
    """
    from .solver import PysatSolver, SolveStatus, solve

    if pi.n < 4:
        return True, PlanarizationGraph(pi.n, [], {e: e for e in itertools.combinations(range(1, pi.n + 1), 2)})
    if contains_pi4o(pi):
        return False, None
    if hereditary and pi.n > 5:
        for sub in itertools.combinations(range(1, pi.n + 1), 5):
            if not _drawable_class(canonical_form(restrict(pi, sub))):
                return False, None
    if solver is None and pi in _memo:
        return _memo[pi]
    if solver is None and pi.n > 5:
        graph = construct_planarization(pi)
        if graph is not None:
            _memo[pi] = (True, graph)
            return _memo[pi]
    enc = DrawabilityEncoding(pi)
    # the planarity query has heavy-tailed run times; sliced search cuts the tail
    out = solve(enc.inst, solver or PysatSolver(sliced=True))
    if out.status is SolveStatus.UNSAT:
        result = (False, None)
    elif out.status is SolveStatus.SAT:
        graph = enc.decode(out.model)
        check_planarization(pi, graph)
        result = (True, graph)
    else:
        raise RuntimeError(f"drawability query returned {out.status}")
    if solver is None:
        _memo[pi] = result
    return result


_memo: dict = {}  # verdicts of the default solver, per labelled system


@lru_cache(maxsize=None)
def _drawable_class(pi: PreRotationSystem) -> bool:
    return is_drawable(pi, hereditary=False)[0]


def _sub_order(pi, e, f, g):
    """Whether f crosses e before g in the drawing of the restriction to their endpoints."""
    sub = sorted(set(e) | set(f) | set(g))
    ok, graph = is_drawable(restrict(pi, sub))
    if not ok:
        raise NotDrawable("a restriction is not drawable")
    lab = {v: i for i, v in enumerate(sub, start=1)}
    m = lambda x: tuple(lab[v] for v in x)
    seq = graph.orders[m(e)]
    return seq.index(graph.cross_id((m(e), m(f)))) < seq.index(graph.cross_id((m(e), m(g))))


def construct_planarization(pi: PreRotationSystem, max_free: int = 12) -> PlanarizationGraph | None:
    """Planarization assembled from drawings of smaller restrictions, or None.

    The rotation system of a simple drawing of K_n determines the drawing, so
    the order of two crossings along an edge can be read off the drawing of
    the (at most six) vertices involved.  Orders whose triple spans all of
    ``pi`` are searched exhaustively (at most ``2**max_free`` combinations).
    Any graph returned has passed :func:`check_planarization`; None means the
    caller should fall back to the SAT query.
    """
    cmap = crossing_map(pi)
    before, free = {}, []
    try:
        for u, v in itertools.combinations(range(1, pi.n + 1), 2):
            e = (u, v)
            for f, g in itertools.combinations(sorted(cmap.crossings_of(e)), 2):
                if len(set(e) | set(f) | set(g)) == pi.n:
                    free.append((e, f, g))
                else:
                    before[(e, f, g)] = _sub_order(pi, e, f, g)
    except NotDrawable:
        return None
    if len(free) > max_free:
        return None
    for bits in itertools.product((True, False), repeat=len(free)):
        before.update(zip(free, bits))
        orders = {}
        for u, v in itertools.combinations(range(1, pi.n + 1), 2):
            e = (u, v)
            xs = sorted(cmap.crossings_of(e))
            rank = {f: sum(before[(e, g, f)] if g < f else not before[(e, f, g)] for g in xs if g != f)
                    for f in xs}
            if sorted(rank.values()) != list(range(len(xs))):
                break
            orders[e] = sorted(xs, key=rank.get)
        else:
            graph = planarization_from_orders(pi, cmap, orders)
            try:
                check_planarization(pi, graph)
            except EmbeddingError:
                continue
            return graph
    return None


def embedding_search_drawable(pi: PreRotationSystem, limit: int = 200_000) -> PlanarizationGraph | None:
    """Brute force over all crossing orders, checking each embedding by Euler's formula.

    Independent of the SAT route; feasible for n <= 5.
    """
    if contains_pi4o(pi):
        return None
    cmap = crossing_map(pi)
    patterns = cross_patterns_for(pi, cmap)
    rots = {a: pi.rotation(a) for a in range(1, pi.n + 1)}
    edges = list(itertools.combinations(range(1, pi.n + 1), 2))
    choices = [list(itertools.permutations(cmap.crossings_of(e))) for e in edges]
    tried = 0
    for combo in itertools.product(*choices):
        tried += 1
        if tried > limit:
            raise RuntimeError("embedding search budget exceeded")
        graph = planarization_from_orders(pi, cmap, dict(zip(edges, combo)))
        if is_planar_embedding(embedding_rotations(graph, rots, patterns)):
            return graph
    return None
