"""Minimal DIMACS solver front end: ``python -m rotsys.sat_shim file.cnf``.

Prints competition-style ``s``/``v`` lines and exits 10/20, so the subprocess
path can be exercised without a separately installed solver binary.
"""

import sys

from pysat.solvers import Solver

from .solver import parse_dimacs


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    if len(argv) != 1:
        print("usage: python -m rotsys.sat_shim FILE.cnf", file=sys.stderr)
        return 1
    with open(argv[0], "rb") as fh:
        nv, clauses, _ = parse_dimacs(fh.read())
    with Solver(name="cadical195", bootstrap_with=clauses) as s:
        if not s.solve():
            print("s UNSATISFIABLE")
            return 20
        model = set(s.get_model() or [])
    lits = [v if v in model else -v for v in range(1, nv + 1)]
    print("s SATISFIABLE")
    for i in range(0, len(lits), 10):
        print("v " + " ".join(map(str, lits[i:i + 10])))
    print("v 0")
    return 10


if __name__ == "__main__":
    sys.exit(main())
