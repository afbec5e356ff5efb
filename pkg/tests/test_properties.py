"""Property encodings checked per class against the oracle.

Each class is pinned with X-literal assumptions, so SAT means "this system
violates the property" and must match the independent oracle verdict.
"""

import itertools
from math import comb, factorial

import pytest

from rotsys import oracle
from rotsys import properties as props
from rotsys.cnf import BaseOptions, ConfigError, build_base
from rotsys.core import crossing_map, transform
from rotsys.solver import decode_model, solve, system_assumptions
from rotsys.solver import get_solver


def pinned(inst, systems):
    """SAT verdict for each system on one incremental session."""
    solver = get_solver()
    with solver.session(inst) as sess:
        for pi in systems:
            out = sess.solve(assumptions=system_assumptions(pi, inst.varmap))
            yield pi, out.sat


def base(n, **kw):
    return build_base(n, BaseOptions(**kw))


@pytest.mark.parametrize("n", [5, 6])
def test_plane_hc_per_class(drawable, n):
    inst = base(n)
    props.forbid_plane_hamiltonian_cycle(inst)
    assert len(inst) - len(base(n)) == props.expected_property_counts(n)["hc"]
    for pi, sat in pinned(inst, drawable[n]):
        assert sat == (not oracle.find_plane_hamiltonian_cycle(pi).found)
        assert not sat


def test_plane_hp_all_pairs_n5(drawable):
    for a, b in itertools.combinations(range(1, 6), 2):
        inst = base(5, natural=False)
        props.forbid_plane_hamiltonian_path(inst, a, b)
        assert inst.meta["symmetric"] is False
        for pi, sat in pinned(inst, drawable[5]):
            assert sat == (not oracle.find_plane_hamiltonian_path(pi, a, b).found)


def test_hc_plus_per_class(drawable):
    inst = base(6)
    props.forbid_hc_plus(inst)
    for pi, sat in pinned(inst, drawable[6]):
        assert sat == (not oracle.find_hc_plus(pi).found)


def test_ht_plus_witness_n6():
    inst = base(6, natural=False)
    props.forbid_matching_friendly_hc(inst, 2)
    out = solve(inst)
    assert out.sat
    pi = decode_model(out.model, inst.varmap)
    cm = crossing_map(pi)
    assert not cm.crosses((1, 2), (3, 4))
    assert not oracle.find_matching_friendly_hc(pi, 2).found


def test_ht_plus_convex_unsat_n6():
    inst = base(6, natural=False, subclasses=("convex",))
    props.forbid_matching_friendly_hc(inst, 3)
    assert not solve(inst).sat


def test_ht_plus_rejects_natural():
    with pytest.raises(ConfigError):
        props.forbid_matching_friendly_hc(base(6), 2)


@pytest.mark.parametrize("n", [5, 6])
def test_empty_cycles_per_class(drawable, n):
    for k in range(3, n + 1):
        inst = base(n)
        props.forbid_empty_k_cycles(inst, k)
        for pi, sat in pinned(inst, drawable[n]):
            assert sat == (not oracle.find_empty_k_cycle(pi, k).found)


def test_empty_cycle_parity_variables(drawable):
    """Decoded W values equal the oracle crossing parity on every pinned class."""
    n, k = 6, 4
    inst = base(n)
    lo = inst.num_vars + 1
    props.forbid_empty_k_cycles(inst, k)
    # drop the final clauses so every class is satisfiable and W can be read
    inst2 = base(n)
    w_of = {}
    for cyc in props.k_cycles(n, k):
        ce = props.cycle_edges(cyc)
        off = [v for v in range(1, n + 1) if v not in cyc]
        for q in off[1:]:
            w = inst2.new_var()
            w_of[(cyc, q)] = (w, off[0], ce)
            cs = [inst2.varmap.c((min(off[0], q), max(off[0], q)), e) for e in ce]
            for bits in itertools.product((False, True), repeat=k):
                inst2.add([-c if b else c for c, b in zip(cs, bits)] + [w if sum(bits) % 2 else -w])
    assert inst.blocks["w"][0] == lo
    for pi in drawable[n][:20]:
        out = solve(inst2, assumptions=system_assumptions(pi, inst2.varmap))
        pos = {l for l in out.model if l > 0}
        cm = crossing_map(pi)
        for (cyc, q), (w, p0, ce) in w_of.items():
            assert (w in pos) == (not oracle.same_side(cm, ce, p0, q))


@pytest.mark.parametrize("n", [5, 6])
def test_empty_triangle_counts_per_class(drawable, n):
    counts = {pi: oracle.count_empty_triangles(pi) for pi in drawable[n]}
    assert min(counts.values()) >= 2
    for bound in sorted(set(counts.values()) | {min(counts.values()) - 1}):
        inst = base(n)
        props.bound_empty_triangles(inst, bound)
        for pi, sat in pinned(inst, drawable[n]):
            assert sat == (counts[pi] <= bound)


def test_empty_triangle_bound_sat_witness():
    n = 6
    inst = base(n)
    props.bound_empty_triangles(inst, 2 * n - 4)
    out = solve(inst)
    assert out.sat
    assert oracle.count_empty_triangles(decode_model(out.model, inst.varmap)) <= 2 * n - 4
    inst = base(n)
    props.bound_empty_triangles(inst, 2 * n - 5)
    assert not solve(inst).sat


@pytest.mark.parametrize("mode", ["allEdgesCrossed", "crossingMaximal"])
def test_crossing_profiles(drawable, mode):
    for n in (5, 6):
        inst = base(n)
        props.require_crossing_profile(inst, mode)
        for pi, sat in pinned(inst, drawable[n]):
            want = not oracle.uncrossed_edges(pi) if mode == "allEdgesCrossed" else oracle.is_crossing_maximal(pi)
            assert sat == want


def test_crossing_family_per_class(drawable):
    inst = base(6)
    props.forbid_crossing_family(inst, 3)
    assert len(inst) - len(base(6)) == len(list(props.matchings(range(1, 7), 3))) == 15
    for pi, sat in pinned(inst, drawable[6]):
        assert sat == (not oracle.find_crossing_family(pi, 3).found)


@pytest.mark.parametrize("kind,k", [("C", 4), ("C", 5), ("T", 5), ("C", 6), ("T", 6)])
def test_perfect_subdrawings_per_class(drawable, kind, k):
    for n in (5, 6):
        if k > n:
            continue
        inst = base(n)
        props.forbid_subdrawing(inst, kind, k)
        for pi, sat in pinned(inst, drawable[n]):
            assert sat == (not oracle.find_perfect_subdrawing(pi, kind, k).found)


def test_crossing_maximal_subdrawing(drawable):
    inst = base(6)
    props.forbid_subdrawing(inst, "X", 5)
    for pi, sat in pinned(inst, drawable[6]):
        cm = crossing_map(pi)
        has = any(sum(1 for p in cm.pairs if set().union(*p) <= set(sub)) == 5
                  for sub in itertools.combinations(range(1, 7), 5))
        assert sat == (not has)


def test_pattern_labeling_counts():
    sub = tuple(range(1, 7))
    assert len(list(props.pattern_labelings("C", sub))) == factorial(5) // 2
    assert len(list(props.pattern_labelings("T", sub))) == factorial(6) // 2


def test_perfect_patterns_hold_on_constructions():
    from rotsys.core import convex_position, perfect_twisted
    assert oracle.find_perfect_subdrawing(convex_position(6), "C", 6).witness == (1, 2, 3, 4, 5, 6)
    assert oracle.find_perfect_subdrawing(perfect_twisted(6), "T", 6).found
    shuffled = transform(perfect_twisted(6), [3, 1, 6, 2, 5, 4])
    assert oracle.find_perfect_subdrawing(shuffled, "T", 6).found


def test_factorial_cap():
    with pytest.raises(props.FactorialCap):
        props.forbid_plane_hamiltonian_cycle(base(6), cap=5)


def test_counts_formulas():
    c = props.expected_property_counts(7)
    assert c["hc"] == 360 and c["hp_per_pair"] == 120
    assert c["hc_plus_per_cycle"] == comb(14, 4)
