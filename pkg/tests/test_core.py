import itertools
import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rotsys.core import (
    InvalidSystem, NotDrawable, OutOfScope, PreRotationSystem, all_prerotation_systems,
    canonical_form, check_class, classify_quadruple, contains_pi4o, convex_position,
    crossing_free_k4, crossing_map, edge, natural_forms, orbit, perfect_twisted, read_jsonl,
    restrict, side_contains, transform, write_jsonl,
)
from rotsys.catalog import load_catalog


def random_system(n, rng):
    rots = []
    for a in range(1, n + 1):
        others = [v for v in range(1, n + 1) if v != a]
        rng.shuffle(others)
        rots.append(others)
    return PreRotationSystem.from_rotations(rots)


@st.composite
def systems(draw, lo=4, hi=7):
    n = draw(st.integers(lo, hi))
    rots = [draw(st.permutations([v for v in range(1, n + 1) if v != a])) for a in range(1, n + 1)]
    return PreRotationSystem.from_rotations(rots)


@st.composite
def transforms(draw, n):
    return draw(st.permutations(list(range(1, n + 1)))), draw(st.booleans())


def test_validation():
    with pytest.raises(InvalidSystem):
        PreRotationSystem(4, ((2, 3, 4), (1, 3, 4), (1, 2, 4)))
    with pytest.raises(InvalidSystem):
        PreRotationSystem(4, ((3, 2, 4), (1, 3, 4), (1, 2, 4), (1, 2, 3)))
    with pytest.raises(InvalidSystem):
        PreRotationSystem.from_rotations([[2, 3, 4], [1, 3, 3], [1, 2, 4], [1, 2, 3]])
    with pytest.raises(InvalidSystem):
        transform(convex_position(4), [1, 1, 2, 3])


def test_from_rotations_normalizes():
    pi = PreRotationSystem.from_rotations([[3, 4, 2], [4, 1, 3], [1, 2, 4], [2, 3, 1]])
    assert pi.rotation(1) == (2, 3, 4)
    assert pi.rotation(2) == (1, 3, 4)


def test_json_roundtrip(tmp_path):
    pi = convex_position(6)
    assert PreRotationSystem.from_json(pi.to_json()) == pi
    path = tmp_path / "s.jsonl"
    write_jsonl(path, [pi, perfect_twisted(6)])
    assert list(read_jsonl(path)) == [pi, perfect_twisted(6)]
    with pytest.raises(InvalidSystem):
        PreRotationSystem.from_json(json.dumps({"n": 5, "rotations": [list(r) for r in pi.rotations]}))


def test_restrict_and_transform():
    pi = convex_position(6)
    sub = restrict(pi, [2, 4, 6, 1])
    assert sub.n == 4
    # relabelled in increasing order: 1,2,4,6 -> 1..4
    assert sub == convex_position(4)
    assert transform(pi, list(range(1, 7))) == pi
    assert transform(pi, list(range(1, 7)), reflect=True) == pi.reflected()
    with pytest.raises(InvalidSystem):
        restrict(pi, [1, 2, 2, 3])


def test_orbit_sizes_n4():
    systems4 = list(all_prerotation_systems(4))
    assert len(systems4) == 16
    classes = {canonical_form(s) for s in systems4}
    assert len(classes) == 3
    assert sum(len(orbit(c)) for c in classes) == 16


def test_canonical_form_is_natural_and_minimal():
    pi = random_system(6, random.Random(1))
    c = canonical_form(pi)
    assert c.is_natural()
    assert c in orbit(pi)
    assert all(c.rotations <= f.rotations for f in natural_forms(pi))
    assert canonical_form(convex_position(4)).rotation(1) == (2, 3, 4)


def test_canonical_form_invariant_1000_transforms():
    rng = random.Random(7)
    for trial in range(1000):
        n = rng.randint(4, 7)
        pi = random_system(n, rng)
        perm = list(range(1, n + 1))
        rng.shuffle(perm)
        assert canonical_form(transform(pi, perm, rng.random() < 0.5)) == canonical_form(pi)


@settings(max_examples=60, deadline=None)
@given(systems(), st.data())
def test_canonical_form_property(pi, data):
    perm, refl = data.draw(transforms(pi.n))
    assert canonical_form(transform(pi, perm, refl)) == canonical_form(pi)


@settings(max_examples=40, deadline=None)
@given(systems(lo=4, hi=6))
def test_natural_forms_are_the_natural_orbit_members(pi):
    if pi.n == 4:
        expect = {s for s in orbit(pi) if s.is_natural()}
        assert natural_forms(pi) == expect
    assert all(s.is_natural() for s in natural_forms(pi))


def test_convex_and_twisted_crossings():
    for n in (4, 5, 6, 7):
        cm = crossing_map(convex_position(n))
        for a, b, c, d in itertools.combinations(range(1, n + 1), 4):
            assert cm.crosses((a, c), (b, d))
        assert len(cm) == len(list(itertools.combinations(range(n), 4)))
        tw = crossing_map(perfect_twisted(n))
        for a, b, c, d in itertools.combinations(range(1, n + 1), 4):
            assert tw.crosses((a, d), (b, c))
        assert len(tw) == len(cm)


def test_crossing_free_k4():
    k4 = crossing_free_k4()
    assert len(crossing_map(k4)) == 0
    assert side_contains(k4, 4, (1, 2, 3))
    assert not side_contains(k4, 4, (1, 3, 2))
    assert classify_quadruple(k4, 1, 2, 3, 4).crossing is False


def test_classify_quadruple_convex():
    q = classify_quadruple(convex_position(4), 1, 2, 3, 4)
    assert q.crossing and q.pair == ((1, 3), (2, 4))


def test_crossing_direction_flips_under_reflection():
    pi = convex_position(5)
    for quad in itertools.combinations(range(1, 6), 4):
        a = classify_quadruple(pi, *quad)
        b = classify_quadruple(pi.reflected(), *quad)
        assert a.pair == b.pair and a.left_to_right != b.left_to_right


def test_pi4o_detection():
    cat = load_catalog()
    pi4o = cat.pi4o
    assert contains_pi4o(pi4o)
    with pytest.raises(NotDrawable):
        crossing_map(pi4o)
    with pytest.raises(NotDrawable):
        classify_quadruple(pi4o, 1, 2, 3, 4)
    assert not check_class(pi4o, "drawable")


def test_at_most_one_crossing_per_quadruple(drawable):
    for n, cls in drawable.items():
        for pi in cls:
            for quad in itertools.combinations(range(1, n + 1), 4):
                q = classify_quadruple(pi, *quad)
                assert q.pair is None or set(q.pair[0] + q.pair[1]) == set(quad)


def test_sides_partition(drawable):
    for n, cls in drawable.items():
        for pi in cls:
            for a, b, c, d in itertools.permutations(range(1, n + 1), 4):
                assert side_contains(pi, d, (a, b, c)) != side_contains(pi, d, (a, c, b))


def test_prop_a2_exhaustive_n5():
    free = [s for s in all_prerotation_systems(5) if not contains_pi4o(s)]
    assert len({canonical_form(s) for s in free}) == 7
    by_map = {}
    for s in free:
        by_map.setdefault(crossing_map(s).pairs, []).append(s)
    for members in by_map.values():
        for p, q in itertools.combinations(members, 2):
            assert q == p.reflected()


def test_check_class_scope():
    with pytest.raises(OutOfScope):
        check_class(perfect_twisted(6), "gentwisted")
    assert check_class(perfect_twisted(7), "gentwisted")
    assert not check_class(convex_position(7), "gentwisted")
    with pytest.raises(ValueError):
        check_class(convex_position(5), "bogus")


def test_edge_helper():
    assert edge(3, 1) == (1, 3)
