import itertools
from math import comb, perm

import pytest
from pysat.solvers import Solver

from rotsys.catalog import load_catalog
from rotsys.cnf import (
    BaseOptions, CnfInstance, ConfigError, VarMap, at_most_k, build_base, emit_drawability,
    emit_natural, emit_prerotation, expected_counts, labelled_signatures,
)
from rotsys.core import canonical_form, convex_position, orbit
from rotsys.drawability import is_drawable
from rotsys.solver import decode_model, enumerate_all, solve, to_dimacs

from conftest import classes


def fresh(n):
    return CnfInstance(VarMap(n))


@pytest.mark.parametrize("n", [4, 5, 6, 7])
def test_variable_blocks(n):
    vm = VarMap(n)
    exp = expected_counts(n)
    for block in ("x", "y", "c", "d"):
        assert vm.count(block) == exp[block]
    assert vm.num_vars == sum(exp[b] for b in ("x", "y", "c", "d"))


@pytest.mark.parametrize("n", [4, 5, 6])
def test_prerotation_clause_count(n):
    inst = fresh(n)
    emit_prerotation(inst)
    m = n - 1
    exactly_one = 2 * n * (m + m * comb(m, 2))
    sync = n * comb(m, 3) * perm(m, 3)
    assert len(inst) == exactly_one + n + sync + expected_counts(n)["ternary"]


@pytest.mark.parametrize("n", [4, 5, 6])
def test_drawability_clause_counts(n):
    cat = load_catalog()
    inst = fresh(n)
    emit_drawability(inst, "v4only")
    assert len(inst) == expected_counts(n)["pi4o"]
    assert len(labelled_signatures(cat.pi4o)) == 8
    inst = fresh(n)
    emit_drawability(inst, "v5only")
    per5 = len(orbit(cat.pi5a)) + len(orbit(cat.pi5b))
    assert len(inst) == per5 * comb(n, 5)


def test_natural_units():
    inst = fresh(5)
    emit_natural(inst)
    assert len(inst) == 4 == expected_counts(5)["natural"]
    assert all(len(c) == 1 for c in inst.clauses)


def test_constant_folding():
    inst = CnfInstance()
    inst.add([CnfInstance.TRUE, 5])
    assert len(inst) == 0
    inst.add([-CnfInstance.TRUE])
    assert inst.has_empty_clause


@pytest.mark.parametrize("m,k", [(5, 0), (5, 1), (5, 2), (6, 3), (4, 4)])
def test_sequential_counter(m, k):
    inst = CnfInstance()
    lits = [inst.new_var() for _ in range(m)]
    at_most_k(inst, lits, k)
    with Solver(bootstrap_with=inst.clauses) as s:
        for bits in itertools.product((0, 1), repeat=m):
            assume = [l if b else -l for l, b in zip(lits, bits)]
            assert s.solve(assumptions=assume) == (sum(bits) <= k)


def test_dimacs_deterministic():
    a = to_dimacs(build_base(6, BaseOptions(subclasses=("hconvex",))))
    b = to_dimacs(build_base(6, BaseOptions(subclasses=("hconvex",))))
    assert a == b


@pytest.mark.parametrize("n,count", [(4, 2), (5, 7)])
def test_counts_without_pi5(n, count):
    inst = build_base(n, BaseOptions(valid5=False))
    assert sum(1 for _ in enumerate_all(inst)) == count


def test_prerotation_only_n4():
    inst = build_base(4, BaseOptions(valid4=False, valid5=False))
    assert sum(1 for _ in enumerate_all(inst)) == 3


@pytest.mark.parametrize("n,count", [(4, 2), (5, 5), (6, 102)])
def test_lexmin_counts_without_dedup(n, count):
    inst = build_base(n, BaseOptions(lexmin=True))
    found = list(enumerate_all(inst, dedup="none"))
    assert len(found) == count
    assert {canonical_form(p) for p in found} == set(classes(n))


def test_models_biject_with_drawable_classes_n5_n6():
    for n in (5, 6):
        free = list(enumerate_all(build_base(n, BaseOptions(valid5=False))))
        reps = {canonical_form(p) for p in free}
        by_oracle = {p for p in reps if is_drawable(p)[0]}
        assert by_oracle == set(classes(n))


def test_subclass_nesting():
    for n in (4, 5, 6):
        d = set(classes(n))
        c = set(classes(n, ("convex",)))
        h = set(classes(n, ("hconvex",)))
        g = set(classes(n, ("gentwisted",)))
        assert h <= c <= d and g <= d


def test_decoded_system_is_natural():
    inst = build_base(6)
    out = solve(inst)
    assert out.sat
    assert decode_model(out.model, inst.varmap).is_natural()


def test_config_errors():
    with pytest.raises(ConfigError):
        build_base(5, BaseOptions(natural=False, lexmin=True))
    with pytest.raises(ConfigError):
        build_base(5, BaseOptions(lexmin=True, subclasses=("cmono",)))
    with pytest.raises(ConfigError):
        build_base(7, BaseOptions(valid5=False, subclasses=("gentwisted",)))


def test_convex_position_satisfies_convex_encoding():
    inst = build_base(6, BaseOptions(subclasses=("hconvex",)))
    pi = convex_position(6)
    vm = inst.varmap
    units = []
    for a in range(1, 7):
        for i, b in enumerate(pi.rotation(a)):
            units.append(vm.x(a, i, b))
    assert solve(inst, assumptions=units).sat
