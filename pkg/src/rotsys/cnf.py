"""CNF instances for rotation systems: variables, base clause families, subclasses."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb

from .core import PreRotationSystem, edge, orbit, pairings

TOOL_VERSION = "0.1.0"

# sentinel literal for the constant true; folded out of every clause
TRUE = 1 << 60


class ConfigError(ValueError):
    """Mutually inconsistent encoding options."""


class CnfInstance:
    """A growing clause list with a variable allocator.

    ``blocks`` records named variable ranges for the DIMACS header, ``meta``
    carries the flags that produced the instance.
    """

    TRUE = TRUE

    def __init__(self, varmap: "VarMap | None" = None):
        self.num_vars = 0
        self.clauses: list[list[int]] = []
        self.blocks: dict[str, tuple[int, int]] = {}
        self.meta: dict = {}
        self.varmap = varmap
        self.has_empty_clause = False
        if varmap is not None:
            self.num_vars = varmap.num_vars
            self.blocks.update(varmap.blocks)
            self.meta["n"] = varmap.n

    def new_var(self) -> int:
        self.num_vars += 1
        return self.num_vars

    def add(self, clause):
        out = []
        for lit in clause:
            if lit == TRUE:
                return
            if lit == -TRUE:
                continue
            out.append(lit)
        if not out:
            self.has_empty_clause = True
        self.clauses.append(out)

    def extend(self, clauses):
        for c in clauses:
            self.add(c)

    def and_gate(self, lits, polarity: int = 0) -> int:
        """Literal equal to (or bounding) the conjunction of ``lits``.

        ``polarity=1``: the gate only implies the conjunction (use where the gate
        occurs positively); ``-1``: only implied by it; ``0``: equivalence.
        """
        lits = [l for l in lits if l != TRUE]
        if any(l == -TRUE for l in lits):
            return -TRUE
        lits = list(dict.fromkeys(lits))
        if not lits:
            return TRUE
        if len(lits) == 1:
            return lits[0]
        g = self.new_var()
        if polarity >= 0:
            for l in lits:
                self.add([-g, l])
        if polarity <= 0:
            self.add([g] + [-l for l in lits])
        return g

    def or_gate(self, lits, polarity: int = 0) -> int:
        return -self.and_gate([-l for l in lits], -polarity)

    def __len__(self):
        return len(self.clauses)


def at_most_k(inst: CnfInstance, lits, k: int):
    """Sequential counter: at most ``k`` of ``lits`` are true."""
    lits = list(lits)
    m = len(lits)
    if k < 0:
        raise ValueError("bound must be non-negative")
    if k >= m:
        return
    if k == 0:
        for l in lits:
            inst.add([-l])
        return
    # s[i][j]: at least j+1 of the first i+1 literals are true
    s = [[inst.new_var() for _ in range(k)] for _ in range(m - 1)]
    inst.add([-lits[0], s[0][0]])
    for j in range(1, k):
        inst.add([-s[0][j]])
    for i in range(1, m - 1):
        inst.add([-lits[i], s[i][0]])
        inst.add([-s[i - 1][0], s[i][0]])
        for j in range(1, k):
            inst.add([-lits[i], -s[i - 1][j - 1], s[i][j]])
            inst.add([-s[i - 1][j], s[i][j]])
        inst.add([-lits[i], -s[i - 1][k - 1]])
    inst.add([-lits[m - 1], -s[m - 2][k - 1]])


class VarMap:
    """Variable numbering for a rotation system on ``n`` elements.

    Blocks are allocated in the order X, Y, C, D.  X(a, i, b) uses 0-based
    positions ``i``; Y is stored for sorted triples only.
    """

    def __init__(self, n: int):
        if n < 3:
            raise ValueError("n must be at least 3")
        self.n = n
        self.blocks = {}
        nxt = 1
        self._x = {}
        for a in range(1, n + 1):
            for i in range(n - 1):
                for b in range(1, n + 1):
                    if b != a:
                        self._x[(a, i, b)] = nxt
                        nxt += 1
        self.blocks["x"] = (1, nxt - 1)
        start = nxt
        self._y = {}
        for a in range(1, n + 1):
            others = [v for v in range(1, n + 1) if v != a]
            for t in itertools.combinations(others, 3):
                self._y[(a,) + t] = nxt
                nxt += 1
        self.blocks["y"] = (start, nxt - 1)
        start = nxt
        self._c = {}
        for quad in itertools.combinations(range(1, n + 1), 4):
            for e, f in pairings(*quad):
                self._c[(e, f)] = nxt
                nxt += 1
        self.blocks["c"] = (start, nxt - 1)
        start = nxt
        self._d = {}
        for quad in itertools.combinations(range(1, n + 1), 4):
            for k in range(3):
                for lr in (True, False):
                    self._d[(quad, k, lr)] = nxt
                    nxt += 1
        self.blocks["d"] = (start, nxt - 1)
        self.num_vars = nxt - 1

    def x(self, a: int, i: int, b: int) -> int:
        return self._x[(a, i, b)]

    def y_canonical(self, a: int, b: int, c: int, d: int) -> int:
        return self._y[(a, b, c, d)]

    def y(self, a: int, b: int, c: int, d: int) -> int:
        """Literal for "b, c, d counterclockwise around a" in any argument order."""
        t = [b, c, d]
        inversions = (t[0] > t[1]) + (t[0] > t[2]) + (t[1] > t[2])
        var = self._y[(a, *sorted(t))]
        return -var if inversions % 2 else var

    def c(self, e, f) -> int:
        e, f = edge(*e), edge(*f)
        if f < e:
            e, f = f, e
        return self._c[(e, f)]

    def d(self, quad, k: int, lr: bool) -> int:
        return self._d[(tuple(quad), k, lr)]

    def count(self, block: str) -> int:
        lo, hi = self.blocks[block]
        return hi - lo + 1


# -- clause families -----------------------------------------------------------

def emit_prerotation(inst: CnfInstance):
    vm = inst.varmap
    n = vm.n
    for a in range(1, n + 1):
        others = [b for b in range(1, n + 1) if b != a]
        for i in range(n - 1):
            inst.add([vm.x(a, i, b) for b in others])
            for b1, b2 in itertools.combinations(others, 2):
                inst.add([-vm.x(a, i, b1), -vm.x(a, i, b2)])
        for b in others:
            inst.add([vm.x(a, i, b) for i in range(n - 1)])
            for i, j in itertools.combinations(range(n - 1), 2):
                inst.add([-vm.x(a, i, b), -vm.x(a, j, b)])
        inst.add([vm.x(a, 0, others[0])])
    # X -> Y synchronisation
    for a in range(1, n + 1):
        others = [b for b in range(1, n + 1) if b != a]
        for b, c, d in itertools.combinations(others, 3):
            y = vm.y_canonical(a, b, c, d)
            for i, j, k in itertools.permutations(range(n - 1), 3):
                ccw = i < j < k or k < i < j or j < k < i
                inst.add([-vm.x(a, i, b), -vm.x(a, j, c), -vm.x(a, k, d), y if ccw else -y])
    # cyclic consistency of Y on every 4 neighbours, as eight ternary clauses
    for a in range(1, n + 1):
        others = [b for b in range(1, n + 1) if b != a]
        for b, c, d, e in itertools.combinations(others, 4):
            bcd, bce = vm.y_canonical(a, b, c, d), vm.y_canonical(a, b, c, e)
            bde, cde = vm.y_canonical(a, b, d, e), vm.y_canonical(a, c, d, e)
            inst.extend([
                [-bcd, bce, -bde], [bcd, -bce, bde],
                [-bce, bde, -cde], [bce, -bde, cde],
                [-bcd, -bde, cde], [bcd, bde, -cde],
                [-bcd, bce, cde], [bcd, -bce, -cde],
            ])


def signature_bits(L: PreRotationSystem) -> list[tuple[int, int, int, int, bool]]:
    """(centre, p, q, r, bit) for every centre and sorted triple of other labels."""
    out = []
    for x in range(1, L.n + 1):
        others = [v for v in range(1, L.n + 1) if v != x]
        for p, q, r in itertools.combinations(others, 3):
            out.append((x, p, q, r, L.ccw(x, p, q, r)))
    return out


@lru_cache(maxsize=None)
def labelled_signatures(cls: PreRotationSystem) -> tuple:
    """Y signatures of every labelled member of the isomorphism class of ``cls``."""
    return tuple(sorted(tuple(signature_bits(m)) for m in orbit(cls)))


def signature_literals(vm: VarMap, subset, bits) -> list[int]:
    lits = []
    for x, p, q, r, bit in bits:
        v = vm.y_canonical(subset[x - 1], subset[p - 1], subset[q - 1], subset[r - 1])
        lits.append(v if bit else -v)
    return lits


def forbid_class(inst: CnfInstance, cls: PreRotationSystem, elements=None):
    """One clause per subset and labelled member negating its Y signature."""
    vm = inst.varmap
    elements = list(elements or range(1, vm.n + 1))
    sigs = labelled_signatures(cls)
    for subset in itertools.combinations(elements, cls.n):
        for bits in sigs:
            inst.add([-l for l in signature_literals(vm, subset, bits)])


def _catalog():
    from .catalog import load_catalog
    return load_catalog()


def emit_drawability(inst: CnfInstance, level: str = "full", elements=None):
    """``level``: ``full``, ``v4only`` (Pi4o only) or ``v5only`` (Pi5A/B only)."""
    if level not in ("full", "v4only", "v5only", "none"):
        raise ValueError(level)
    cat = _catalog()
    if level in ("full", "v4only"):
        forbid_class(inst, cat.pi4o, elements)
    if level in ("full", "v5only"):
        forbid_class(inst, cat.pi5a, elements)
        forbid_class(inst, cat.pi5b, elements)


def emit_natural(inst: CnfInstance, elements=None):
    vm = inst.varmap
    elements = sorted(elements or range(1, vm.n + 1))
    first, rest = elements[0], elements[1:]
    for b, c, d in itertools.combinations(rest, 3):
        inst.add([vm.y_canonical(first, b, c, d)])


def emit_symmetry(inst: CnfInstance, mode: str = "natural"):
    if mode not in ("natural", "lexmin"):
        raise ValueError(mode)
    emit_natural(inst)
    if mode == "lexmin":
        emit_lexmin(inst)


def emit_lexmin(inst: CnfInstance):
    """Assert the X matrix is lexicographically minimal among natural relabelings.

    Requires the natural unit clauses (row 1 is the identity).  For each of the
    2n(n-1)-1 other candidates (first vertex f, second vertex s, reflection r)
    the candidate rows are derived from Q(a, x, b, k) = "b is k steps after x in
    the rotation of a"; aux variables are only bounded from below, which is
    sound because they occur negatively in the comparator clauses.
    """
    vm = inst.varmap
    n = vm.n
    m = n - 1
    V = range(1, n + 1)
    ident_pos = {b: b - 2 for b in range(2, n + 1)}

    q_cache = {}

    def q(a, x, b, k):
        key = (a, x, b, k)
        if key in q_cache:
            return q_cache[key]
        if a == 1:
            # row 1 is fixed to 2, 3, ..., n
            lit = TRUE if (ident_pos[x] + k) % m == ident_pos[b] else -TRUE
        else:
            lit = inst.new_var()
            for j in range(m):
                inst.add([-vm.x(a, j, x), -vm.x(a, (j + k) % m, b), lit])
        q_cache[key] = lit
        return lit

    lo = inst.num_vars + 1
    positions = [(l, i) for l in range(2, n + 1) for i in range(1, m)]
    for f in V:
        for s in V:
            if s == f:
                continue
            for r in (False, True):
                if f == 1 and s == 2 and not r:
                    continue
                # sigma(v) = l  iff  P[v][l]
                P = {}
                for v in V:
                    if v == f:
                        continue
                    for l in range(2, n + 1):
                        if l == 2:
                            P[(v, l)] = TRUE if v == s else -TRUE
                        elif v == s:
                            P[(v, l)] = -TRUE
                        else:
                            k = (l - 2) if not r else (m - (l - 2)) % m
                            P[(v, l)] = q(f, s, v, k)
                eq = TRUE
                for (l, i) in positions:
                    k = i if not r else m - i
                    # R[b]: entry (l, i) of the candidate is sigma(b)
                    R = {}
                    for b in V:
                        if b == f:
                            continue
                        lits = []
                        for a in V:
                            if a in (f, b):
                                continue
                            pa, qa = P[(a, l)], q(a, f, b, k)
                            if pa == -TRUE or qa == -TRUE:
                                continue
                            lits.append((pa, qa))
                        if not lits:
                            R[b] = -TRUE
                            continue
                        rb = inst.new_var()
                        for pa, qa in lits:
                            inst.add([-pa, -qa, rb])
                        R[b] = rb
                    cand = {}
                    for val in range(2, n + 1):
                        if val == l:
                            continue
                        terms = [(R[b], P[(b, val)]) for b in V
                                 if b != f and R.get(b, -TRUE) != -TRUE and P[(b, val)] != -TRUE]
                        if not terms:
                            cand[val] = -TRUE
                            continue
                        cv = inst.new_var()
                        for rb, pb in terms:
                            inst.add([-rb, -pb, cv])
                        cand[val] = cv
                    orig = {val: vm.x(l, i, val) for val in range(1, n + 1) if val != l}
                    vals = sorted(cand)
                    for hi_ in vals:
                        for lo_ in vals:
                            if lo_ < hi_:
                                inst.add([-eq, -orig[hi_], -cand[lo_]])
                    nxt = inst.new_var()
                    for val in vals:
                        inst.add([-eq, -orig[val], -cand[val], nxt])
                    eq = nxt
    inst.blocks["lexmin"] = (lo, inst.num_vars)


def emit_crossing_defs(inst: CnfInstance, elements=None):
    """D variables equal the labelled crossing 4-systems; C = D_lr or D_rl."""
    vm = inst.varmap
    cat = _catalog()
    elements = sorted(elements or range(1, vm.n + 1))
    crossing_entries = [e for e in cat.four.values() if e.drawable and e.pair is not None]
    for quad in itertools.combinations(elements, 4):
        lab = dict(zip((1, 2, 3, 4), quad))
        for k, (e, f) in enumerate(pairings(1, 2, 3, 4)):
            for lr in (True, False):
                dv = vm.d(quad, k, lr)
                matches = [en for en in crossing_entries
                           if set(en.pair) == {e, f} and en.left_to_right == lr]
                assert len(matches) == 1
                lits = []
                for x, bit in zip((1, 2, 3, 4), matches[0].signature):
                    p, q_, r = [lab[v] for v in (1, 2, 3, 4) if v != x]
                    y = vm.y_canonical(lab[x], p, q_, r)
                    lits.append(y if bit else -y)
                for l in lits:
                    inst.add([-dv, l])
                inst.add([dv] + [-l for l in lits])
            cv = vm.c((lab[e[0]], lab[e[1]]), (lab[f[0]], lab[f[1]]))
            d1, d2 = vm.d(quad, k, True), vm.d(quad, k, False)
            inst.extend([[-cv, d1, d2], [cv, -d1], [cv, -d2]])


# the 5-subset characterization of generalized twisted drawings holds from here on
GT_CHARACTERIZATION_FROM = 7

SUBCLASSES = ("convex", "hconvex", "cmono", "strongcmono", "gentwisted")


def emit_subclass(inst: CnfInstance, cls: str):
    cat = _catalog()
    vm = inst.varmap
    if cls in ("convex", "hconvex"):
        base = inst.meta.get("base_elements")
        forbid_class(inst, cat.conv5a, base)
        forbid_class(inst, cat.conv5b, base)
        if cls == "hconvex":
            forbid_class(inst, cat.hconv6, base)
    elif cls == "gentwisted":
        base = inst.meta.get("base_elements")
        for other in cat.drawable5:
            if other != cat.gt_allowed5:
                forbid_class(inst, other, base)
        for quad in itertools.combinations(sorted(base or range(1, vm.n + 1)), 4):
            inst.add([vm.c(e, f) for e, f in pairings(*quad)])
        if inst.meta.get("extended"):
            # below 7 elements the 5-subset test is too weak: use the definition,
            # a c-monotone drawing whose ray b1 b2 crosses every edge
            n = inst.meta["base_n"]
            if "cmono" not in inst.meta["subclasses"] and "strongcmono" not in inst.meta["subclasses"]:
                emit_subclass(inst, "cmono")
            for e in itertools.combinations(range(1, n + 1), 2):
                inst.add([vm.c((n + 1, n + 2), e)])
    elif cls in ("cmono", "strongcmono"):
        n = inst.meta["base_n"]
        b1, b2 = n + 1, n + 2
        for i in range(1, n + 1):
            for j in range(1, n + 1):
                if i != j:
                    inst.add([-vm.c((b1, i), (b2, j))])
        if cls == "strongcmono":
            lo = inst.num_vars + 1
            sel = {}
            for i in range(1, n + 1):
                for j in range(1, n + 1):
                    if i != j:
                        sel[(i, j)] = inst.new_var()
            inst.blocks["selectors"] = (lo, inst.num_vars)
            for i in range(1, n + 1):
                inst.add([sel[(i, j)] for j in range(1, n + 1) if j != i])
                for j in range(1, n + 1):
                    if j == i:
                        continue
                    for x in range(1, n + 1):
                        if x in (i, j):
                            continue
                        for b in (b1, b2):
                            inst.add([-sel[(i, j)], -vm.c((i, x), (j, b))])
    else:
        raise ValueError(f"unknown subclass {cls!r}")


@dataclass
class BaseOptions:
    """Flags controlling the base instance (mirrors the command line)."""
    valid4: bool = True
    valid5: bool = True
    natural: bool = True
    lexmin: bool = False
    subclasses: tuple = ()
    extra: dict = field(default_factory=dict)

    def drawability_level(self) -> str:
        if self.valid4 and self.valid5:
            return "full"
        if self.valid4:
            return "v4only"
        if self.valid5:
            return "v5only"
        return "none"


def build_base(n: int, opts: BaseOptions | None = None) -> CnfInstance:
    """Pre-rotation axioms, drawability, symmetry breaking, crossings and subclasses."""
    opts = opts or BaseOptions()
    subclasses = list(opts.subclasses)
    if "hconvex" in subclasses and "convex" not in subclasses:
        subclasses.insert(subclasses.index("hconvex"), "convex")
    gt_by_ray = "gentwisted" in subclasses and n < GT_CHARACTERIZATION_FROM
    extended = gt_by_ray or any(c in ("cmono", "strongcmono") for c in subclasses)
    if opts.lexmin and not opts.natural:
        raise ConfigError("lexicographic minimality requires the natural labelling")
    if opts.lexmin and extended:
        raise ConfigError("lexmin is not available for c-monotone extensions")
    if "gentwisted" in subclasses and not opts.valid5:
        raise ConfigError("-gt relies on the 5-element drawability clauses")
    total = n + 2 if extended else n
    vm = VarMap(total)
    inst = CnfInstance(vm)
    inst.meta.update(
        tool=TOOL_VERSION, n=n, valid4=opts.valid4, valid5=opts.valid5,
        natural=opts.natural, lexmin=opts.lexmin, subclasses=subclasses,
        extended=extended, base_n=n, base_elements=list(range(1, n + 1)) if extended else None,
        symmetric=True,
    )
    emit_prerotation(inst)
    emit_drawability(inst, opts.drawability_level())
    if opts.natural:
        if extended:
            emit_natural(inst, range(1, n + 1))
        else:
            emit_symmetry(inst, "lexmin" if opts.lexmin else "natural")
    emit_crossing_defs(inst)
    for cls in subclasses:
        emit_subclass(inst, cls)
    return inst


def expected_counts(n: int) -> dict:
    """Closed-form sizes of the variable blocks and fixed clause families."""
    return {
        "x": n * (n - 1) ** 2,
        "y": n * comb(n - 1, 3),
        "c": 3 * comb(n, 4),
        "d": 6 * comb(n, 4),
        "ternary": 8 * n * comb(n - 1, 4),
        "natural": comb(n - 1, 3),
        "pi4o": 8 * comb(n, 4),
        "lexmin_candidates": 2 * n * (n - 1) - 1,
    }
