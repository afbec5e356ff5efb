"""Derive the obstruction catalog from first principles.

The 16 labelled systems on 4 elements are classified by trying every set of
crossing pairs and crossing chirality and checking the induced embedding against
Euler's formula.  Everything above 4 elements then uses that table together with
the drawability oracles and the definitional convexity checks.
"""

from __future__ import annotations

import itertools
import logging
import time

from .catalog import CatalogError, FourEntry, ObstructionCatalog, using_catalog
from .core import (
    PreRotationSystem, all_prerotation_systems, canonical_form, crossing_map, contains_pi4o,
    pairings, perfect_twisted, signature,
)
from .drawability import (
    PlanarizationGraph, embedding_rotations, embedding_search_drawable, faces_of,
    is_drawable, is_planar_embedding, left_region, vertex_in_region,
)

log = logging.getLogger(__name__)

EXPECTED = {"classes4": 3, "drawable4": 2, "free5": 7, "drawable5": 5, "convex5": 3,
            "drawable6": 102, "convex6": 16, "hconvex6": 15}


def _embeddings_of_four(L: PreRotationSystem):
    """All (crossing set, patterns, graph, rotation) giving a plane embedding of ``L``."""
    rots = {a: L.rotation(a) for a in range(1, 5)}
    pairs = pairings(1, 2, 3, 4)
    found = []
    for r in range(4):
        for chosen in itertools.combinations(pairs, r):
            crossings = sorted(tuple(sorted(p)) for p in chosen)
            for chir in itertools.product((True, False), repeat=len(crossings)):
                graph = PlanarizationGraph(4, crossings)
                for e in itertools.combinations(range(1, 5), 2):
                    xs = [graph.cross_id(p) for p in crossings if e in p]
                    graph.orders[e] = (e[0], *xs, e[1])
                patterns = {}
                for (e, f), lr in zip(crossings, chir):
                    (e0, e1), (f0, f1) = e, f
                    patterns[(e, f)] = [e0, f1, e1, f0] if lr else [e0, f0, e1, f1]
                rot = embedding_rotations(graph, rots, patterns)
                if is_planar_embedding(rot):
                    found.append((crossings, patterns, graph, rot))
    return found


def _triangle_walk(graph: PlanarizationGraph, tri) -> list[int]:
    walk = []
    for u, v in zip(tri, tri[1:] + tri[:1]):
        seq = graph.orders[(min(u, v), max(u, v))]
        seq = list(seq) if u < v else list(reversed(seq))
        walk.extend(seq[:-1])
    return walk


def derive_four_table() -> dict:
    table = {}
    for L in all_prerotation_systems(4):
        sig = signature(L, (1, 2, 3, 4))
        found = _embeddings_of_four(L)
        if not found:
            table[sig] = FourEntry(sig, False)
            continue
        if len(found) != 1:
            raise CatalogError(f"{L} admits {len(found)} embeddings; expected exactly one")
        crossings, patterns, graph, rot = found[0]
        faces = faces_of(rot)
        region = left_region(rot, faces, _triangle_walk(graph, (1, 2, 3)))
        inside = vertex_in_region(faces, region, 4)
        if crossings:
            (e, f), = crossings
            table[sig] = FourEntry(sig, True, (e, f), tuple(patterns[(e, f)]), inside)
        else:
            table[sig] = FourEntry(sig, True, None, None, inside)
    return table


def _classes(systems) -> list[PreRotationSystem]:
    return sorted({canonical_form(s) for s in systems}, key=lambda s: s.rotations)


def derive_obstruction_catalog(report=None, check_six: bool = True) -> ObstructionCatalog:
    """Run the full derivation; ``report`` receives (name, value) progress lines."""
    say = report or (lambda k, v: log.info("%s: %s", k, v))
    t0 = time.perf_counter()

    def expect(key, value):
        say(key, value)
        if EXPECTED[key] != value:
            raise CatalogError(f"{key}: derived {value}, expected {EXPECTED[key]}")

    four = derive_four_table()
    cat = ObstructionCatalog(four)
    n_draw = sum(e.drawable for e in four.values())
    sides = sum(bool(e.side_abc_contains_d) for e in four.values() if e.drawable)
    say("labelled drawable 4-systems", n_draw)
    say("labelled 4-systems with d in S_abc", sides)
    if n_draw != 8 or sides != 4:
        raise CatalogError("unexpected four-element table")

    with using_catalog(cat):
        c4 = _classes(all_prerotation_systems(4))
        expect("classes4", len(c4))
        bad4 = [c for c in c4 if contains_pi4o(c)]
        expect("drawable4", len(c4) - len(bad4))
        cat.pi4o = bad4[0]

        c5 = [c for c in _classes(all_prerotation_systems(5)) if not contains_pi4o(c)]
        expect("free5", len(c5))
        drawable5, bad5 = [], []
        for c in c5:
            sat_verdict, graph = is_drawable(c)
            brute = embedding_search_drawable(c) is not None
            if sat_verdict != brute:
                raise CatalogError(f"drawability oracles disagree on {c}")
            (drawable5 if sat_verdict else bad5).append(c)
        expect("drawable5", len(drawable5))
        cat.pi5a, cat.pi5b = bad5
        cat.drawable5 = tuple(drawable5)

        from .oracle import check_class_definitional

        convex5 = [c for c in drawable5 if check_class_definitional(c, "convex")]
        expect("convex5", len(convex5))
        t5 = canonical_form(perfect_twisted(5))
        cmap = crossing_map(t5)
        if len(cmap) != 5:
            raise CatalogError("T5 construction does not cross once per 4-subset")
        cat.gt_allowed5 = t5
        nonconvex = [c for c in drawable5 if c not in convex5]
        if t5 not in nonconvex:
            raise CatalogError("T5 is expected among the non-convex 5-classes")
        cat.conv5a = t5
        (cat.conv5b,) = [c for c in nonconvex if c != t5]

        if check_six:
            from .cnf import BaseOptions, build_base
            from .solver import enumerate_all

            six = list(enumerate_all(build_base(6, BaseOptions())))
            expect("drawable6", len(six))
            convex6 = [c for c in six if check_class_definitional(c, "convex")]
            expect("convex6", len(convex6))
            hconvex6 = [c for c in convex6 if check_class_definitional(c, "hconvex")]
            expect("hconvex6", len(hconvex6))
            (cat.hconv6,) = [c for c in convex6 if c not in hconvex6]
    say("seconds", round(time.perf_counter() - t0, 2))
    return cat
