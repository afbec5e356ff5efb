"""DIMACS serialization, solver drivers, model decoding and all-SAT enumeration."""

from __future__ import annotations

import enum
import itertools
import json
import os
import shlex
import subprocess
import sys
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path

from .cnf import TOOL_VERSION, CnfInstance, VarMap
from .core import PreRotationSystem, canonical_form, natural_forms

SOLVER_ENV = "ROTSYS_SOLVER"


class SolveStatus(enum.Enum):
    SAT = "SAT"
    UNSAT = "UNSAT"
    UNKNOWN = "UNKNOWN"


class SolverEnvError(RuntimeError):
    """Solver missing or crashed."""


class ProtocolError(RuntimeError):
    """Solver output could not be understood."""


class DecodeError(RuntimeError):
    """Model violates the X/Y semantics (an encoding bug)."""


@dataclass
class SolveOutcome:
    status: SolveStatus
    model: list[int] | None = None
    stats: dict = field(default_factory=dict)

    @property
    def sat(self) -> bool:
        return self.status is SolveStatus.SAT


# -- DIMACS --------------------------------------------------------------------

def to_dimacs(inst: CnfInstance) -> bytes:
    lines = []
    if inst.num_vars or inst.clauses or inst.meta:
        lines.append(f"c rotsys {TOOL_VERSION}")
        if inst.meta:
            lines.append("c flags " + json.dumps(inst.meta, sort_keys=True, default=list))
        for name, (lo, hi) in inst.blocks.items():
            lines.append(f"c {name}-block {lo}..{hi}")
    lines.append(f"p cnf {inst.num_vars} {len(inst.clauses)}")
    for c in inst.clauses:
        lines.append(" ".join(map(str, c)) + " 0")
    return ("\n".join(lines) + "\n").encode()


def write_dimacs(inst: CnfInstance, path) -> Path:
    path = Path(path)
    path.write_bytes(to_dimacs(inst))
    return path


def parse_dimacs(data: bytes | str) -> tuple[int, list[list[int]], list[str]]:
    """(num_vars, clauses, comment lines) of a DIMACS CNF file."""
    if isinstance(data, bytes):
        data = data.decode()
    comments, clauses, cur = [], [], []
    nv = None
    for line in data.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("c"):
            comments.append(line[1:].strip())
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ProtocolError(f"bad problem line {line!r}")
            nv = int(parts[2])
            continue
        for tok in line.split():
            lit = int(tok)
            if lit == 0:
                clauses.append(cur)
                cur = []
            else:
                cur.append(lit)
    if cur:
        raise ProtocolError("last clause not terminated by 0")
    if nv is None:
        raise ProtocolError("missing problem line")
    return nv, clauses, comments


def parse_solver_output(text: str, num_vars: int) -> SolveOutcome:
    status = None
    values = []
    terminated = False
    for line in text.splitlines():
        line = line.strip()
        if line.startswith("s "):
            word = line[2:].strip()
            status = {"SATISFIABLE": SolveStatus.SAT, "UNSATISFIABLE": SolveStatus.UNSAT}.get(
                word, SolveStatus.UNKNOWN)
        elif line.startswith("v"):
            for tok in line[1:].split():
                lit = int(tok)
                if lit == 0:
                    terminated = True
                else:
                    values.append(lit)
    if status is None:
        return SolveOutcome(SolveStatus.UNKNOWN)
    if status is SolveStatus.SAT:
        if not terminated:
            raise ProtocolError("model section not terminated by 0")
        seen = {abs(l) for l in values}
        missing = [v for v in range(1, num_vars + 1) if v not in seen]
        if missing:
            raise ProtocolError(f"model misses {len(missing)} variables, e.g. {missing[:5]}")
        return SolveOutcome(status, values)
    return SolveOutcome(status)


# -- solvers -----------------------------------------------------------------------

class PysatSolver:
    """Incremental in-process CaDiCaL (via python-sat)."""

    name = "pysat"

    def __init__(self, backend: str = "cadical195", sliced: bool = False):
        self.backend = backend
        # sliced: always search in conflict-budgeted calls; besides enforcing
        # timeouts this acts as frequent restarts, which tames heavy tails
        self.sliced = sliced

    def session(self, inst: CnfInstance):
        return _PysatSession(self.backend, inst, self.sliced)

    def solve(self, inst: CnfInstance, timeout: float | None = None, assumptions=()) -> SolveOutcome:
        with self.session(inst) as s:
            return s.solve(timeout, assumptions)


class _PysatSession:
    SLICE = 500  # conflicts per time slice under a timeout

    def __init__(self, backend, inst: CnfInstance, sliced: bool = False):
        from pysat.solvers import Solver

        self.sliced = sliced
        self.inst = inst
        self.num_vars = inst.num_vars
        self.solver = Solver(name=backend, bootstrap_with=inst.clauses)

    def add_clause(self, clause):
        self.num_vars = max([self.num_vars] + [abs(l) for l in clause])
        self.solver.add_clause(clause)

    def solve(self, timeout=None, assumptions=()) -> SolveOutcome:
        t0 = time.perf_counter()
        if timeout is None and not self.sliced:
            res = self.solver.solve(assumptions=list(assumptions))
        else:
            # interrupt() is not honoured by every backend while it holds the GIL,
            # so the search runs in conflict-budgeted slices between clock checks
            deadline = t0 + timeout if timeout is not None else float("inf")
            res = None
            while time.perf_counter() < deadline:
                self.solver.conf_budget(self.SLICE)
                res = self.solver.solve_limited(assumptions=list(assumptions))
                if res is not None:
                    break
        stats = {"wall": time.perf_counter() - t0}
        if res is None:
            return SolveOutcome(SolveStatus.UNKNOWN, stats=stats)
        if not res:
            return SolveOutcome(SolveStatus.UNSAT, stats=stats)
        model = list(self.solver.get_model() or [])
        have = {abs(l) for l in model}
        model += [-v for v in range(1, self.num_vars + 1) if v not in have]
        return SolveOutcome(SolveStatus.SAT, model, stats)

    def close(self):
        self.solver.delete()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


class ExternalSolver:
    """Any DIMACS solver run as a subprocess on a temporary file."""

    name = "external"

    def __init__(self, command: str, extra_args=(), proof: str | None = None):
        self.command = shlex.split(command) + list(extra_args)
        # CaDiCaL/kissat convention: the proof file follows the instance
        self.proof = proof

    def solve(self, inst: CnfInstance, timeout: float | None = None, assumptions=()) -> SolveOutcome:
        if assumptions:
            inst = _with_units(inst, assumptions)
        with tempfile.TemporaryDirectory() as tmp:
            path = write_dimacs(inst, Path(tmp) / "instance.cnf")
            t0 = time.perf_counter()
            try:
                tail = [str(path)] + ([str(self.proof)] if self.proof else [])
                proc = subprocess.run(self.command + tail, capture_output=True,
                                      text=True, timeout=timeout)
            except FileNotFoundError as exc:
                raise SolverEnvError(f"solver not found: {self.command[0]}") from exc
            except subprocess.TimeoutExpired:
                return SolveOutcome(SolveStatus.UNKNOWN, stats={"wall": time.perf_counter() - t0,
                                                                "timeout": True})
        out = parse_solver_output(proc.stdout, inst.num_vars)
        out.stats.update(wall=time.perf_counter() - t0, exit_code=proc.returncode)
        if out.status is SolveStatus.UNKNOWN and proc.returncode not in (0, 10, 20):
            raise SolverEnvError(f"solver exited with {proc.returncode}: {proc.stderr.strip()[:500]}")
        return out

    def session(self, inst: CnfInstance):
        return _RestartSession(self, inst)


class _RestartSession:
    """Incremental interface emulated by re-running the solver with all clauses."""

    def __init__(self, solver: ExternalSolver, inst: CnfInstance):
        self.solver = solver
        self.inst = _copy(inst)

    def add_clause(self, clause):
        self.inst.num_vars = max([self.inst.num_vars] + [abs(l) for l in clause])
        self.inst.clauses.append(list(clause))

    def solve(self, timeout=None, assumptions=()):
        return self.solver.solve(self.inst, timeout, assumptions)

    def close(self):
        pass

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        pass


def _copy(inst: CnfInstance) -> CnfInstance:
    out = CnfInstance()
    out.num_vars = inst.num_vars
    out.clauses = [list(c) for c in inst.clauses]
    out.blocks = dict(inst.blocks)
    out.meta = dict(inst.meta)
    out.varmap = inst.varmap
    return out


def _with_units(inst: CnfInstance, units) -> CnfInstance:
    out = _copy(inst)
    out.clauses.extend([u] for u in units)
    return out


def get_solver(spec: str | None = None):
    """``None``/``pysat``/``pysat:<backend>`` or a command line for an external solver."""
    spec = spec or os.environ.get(SOLVER_ENV) or "pysat"
    if spec == "pysat":
        return PysatSolver()
    if spec.startswith("pysat:"):
        return PysatSolver(spec.split(":", 1)[1])
    if spec == "shim":
        return ExternalSolver(f"{shlex.quote(sys.executable)} -m rotsys.sat_shim")
    return ExternalSolver(spec)


def solve(inst: CnfInstance, solver=None, timeout: float | None = None, assumptions=()) -> SolveOutcome:
    if solver is None or isinstance(solver, str):
        solver = get_solver(solver)
    if inst.has_empty_clause:
        return SolveOutcome(SolveStatus.UNSAT, stats={"trivial": True})
    return solver.solve(inst, timeout, assumptions)


# -- decoding ----------------------------------------------------------------------

def decode_model(model, varmap: VarMap, check: bool = True) -> PreRotationSystem:
    pos = {l for l in model if l > 0}
    n = varmap.n
    rots = []
    for a in range(1, n + 1):
        row = []
        for i in range(n - 1):
            hits = [b for b in range(1, n + 1) if b != a and varmap.x(a, i, b) in pos]
            if len(hits) != 1:
                raise DecodeError(f"row {a} position {i} has {len(hits)} entries")
            row.append(hits[0])
        rots.append(row)
    try:
        pi = PreRotationSystem(n, tuple(tuple(r) for r in rots))
    except ValueError as exc:
        raise DecodeError(str(exc)) from exc
    if check:
        for a in range(1, n + 1):
            others = [v for v in range(1, n + 1) if v != a]
            for b, c, d in itertools.combinations(others, 3):
                if (varmap.y_canonical(a, b, c, d) in pos) != pi.ccw(a, b, c, d):
                    raise DecodeError(f"Y({a};{b},{c},{d}) disagrees with the X block")
    return pi


def system_assumptions(pi: PreRotationSystem, varmap: VarMap) -> list[int]:
    """X literals pinning the first ``pi.n`` rows to ``pi`` (n must match the varmap)."""
    if pi.n != varmap.n:
        raise ValueError(f"system has n={pi.n}, instance has n={varmap.n}")
    return [varmap.x(a, i, b) for a, rot in enumerate(pi.rotations, start=1)
            for i, b in enumerate(rot)]


def project(pi: PreRotationSystem, n: int) -> PreRotationSystem:
    from .core import restrict
    return restrict(pi, list(range(1, n + 1)))


def decode_crossings(model, varmap: VarMap) -> set:
    pos = {l for l in model if l > 0}
    return {key for key, v in varmap._c.items() if v in pos}


# -- enumeration -----------------------------------------------------------------

def blocking_clause(pi: PreRotationSystem, varmap: VarMap) -> list[int]:
    """Excludes exactly ``pi`` using X literals of the rows' free positions.

    Position 0 is fixed by the smallest-first units and the last position is
    forced by the others, so (n)(n-3) literals suffice.
    """
    x = varmap._x
    return [-x[(a, i, rot[i])] for a, rot in enumerate(pi.rotations, start=1)
            for i in range(1, pi.n - 2)]


def projected_blocking_clause(pi: PreRotationSystem, varmap: VarMap) -> list[int]:
    """Excludes every extension whose restriction to [k] is ``pi`` (k = pi.n).

    The rotation of ``a`` on [k] is determined by the orientations of the triples
    (m, b, c) around it, where m is the smallest other element.
    """
    out = []
    for a in range(1, pi.n + 1):
        others = [v for v in range(1, pi.n + 1) if v != a]
        m = others[0]
        for b, c in itertools.combinations(others[1:], 2):
            y = varmap.y_canonical(a, m, b, c)
            out.append(-y if pi.ccw(a, m, b, c) else y)
    return out


@dataclass
class EnumerationState:
    count: int = 0
    models: int = 0
    blocking: int = 0
    seen: set = field(default_factory=set)
    wall: float = 0.0
    status: str = "running"

    def summary(self) -> dict:
        return {"classes": len(self.seen), "emitted": self.count, "models": self.models,
                "blocking_clauses": self.blocking, "wall": round(self.wall, 3),
                "status": self.status}


def enumerate_all(inst: CnfInstance, dedup: str = "canonical", limit: int | None = None,
                  solver=None, timeout: float | None = None, orbit_blocking: bool | None = None,
                  state: EnumerationState | None = None):
    """Yield the rotation systems of all models, deduplicated up to isomorphism.

    With ``dedup="canonical"`` each class is yielded as its canonical form.

    With ``orbit_blocking`` each found class is excluded with one clause per
    natural labelled member, which is sound only when the instance is closed
    under relabeling and reflection (``meta['symmetric']``).  For c-monotone
    extensions the models are projected to the first n elements.
    """
    if dedup not in ("canonical", "none"):
        raise ValueError(dedup)
    state = state if state is not None else EnumerationState()
    vm = inst.varmap
    extended = inst.meta.get("extended", False)
    base_n = inst.meta.get("base_n", vm.n)
    if orbit_blocking is None:
        orbit_blocking = (dedup == "canonical" and inst.meta.get("symmetric", False)
                          and inst.meta.get("natural", False) and not inst.meta.get("lexmin"))
    if orbit_blocking and not inst.meta.get("symmetric", False):
        raise ValueError("orbit blocking needs a relabeling-invariant instance")
    if solver is None or isinstance(solver, str):
        solver = get_solver(solver)
    t0 = time.perf_counter()
    if inst.has_empty_clause:
        state.status = "done"
        return
    with solver.session(inst) as sess:
        while limit is None or state.count < limit:
            out = sess.solve(timeout)
            if out.status is SolveStatus.UNKNOWN:
                state.status = "unknown"
                state.wall = time.perf_counter() - t0
                raise TimeoutError("enumeration aborted: solver returned UNKNOWN")
            if out.status is SolveStatus.UNSAT:
                state.status = "done"
                break
            state.models += 1
            full = decode_model(out.model, vm)
            pi = project(full, base_n) if extended else full
            if orbit_blocking:
                targets = sorted(natural_forms(pi), key=lambda s: s.rotations)
                key = targets[0]
            else:
                targets = [pi]
                key = canonical_form(pi) if dedup == "canonical" else pi
            for t in targets:
                clause = projected_blocking_clause(t, vm) if extended else blocking_clause(t, vm)
                sess.add_clause(clause)
                state.blocking += 1
            if key in state.seen:
                continue
            state.seen.add(key)
            if dedup == "canonical":
                pi = key
            state.count += 1
            yield pi
    state.wall = time.perf_counter() - t0
    if state.status == "running":
        state.status = "limit"


def count_classes(inst: CnfInstance, **kw) -> int:
    return sum(1 for _ in enumerate_all(inst, **kw))
