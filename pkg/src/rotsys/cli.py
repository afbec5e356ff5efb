"""Command line front end.

    rotsys N [flags]            build, then solve / enumerate (-a) / export (-o)
    rotsys verify FILE -p PROP  oracle verdicts for JSON-lines systems
    rotsys draw FILE            drawability verdicts with planarizations
    rotsys table N [N ...]      class counts per subclass
    rotsys derive-catalog       rebuild the obstruction catalog

Exit codes: 10 SAT, 20 UNSAT, 0 enumeration/export/unknown, 1 failed check,
2 usage error, 3 solver or environment error.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import itertools
import json
import logging
import sys
import time
from pathlib import Path

from . import properties as props
from .cnf import BaseOptions, ConfigError, build_base
from .core import PreRotationSystem, crossing_map, orbit, read_jsonl, write_jsonl
from .solver import (
    EnumerationState, ExternalSolver, SolverEnvError, SolveStatus, decode_model, enumerate_all,
    get_solver, project, solve, write_dimacs,
)

EXIT_SAT, EXIT_UNSAT, EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_ENV = 10, 20, 0, 1, 2, 3

log = logging.getLogger("rotsys")


class UsageError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rotsys", allow_abbrev=False,
                                description="SAT framework for rotation systems of simple drawings of K_n")
    p.add_argument("n", type=int, help="number of vertices")
    g = p.add_argument_group("base encoding")
    g.add_argument("-v4", action="store_true", help="drop the clauses forbidding Pi4o")
    g.add_argument("-v5", action="store_true", help="drop the clauses forbidding Pi5A/Pi5B")
    g.add_argument("-nat", "--nat", dest="no_natural", action="store_true",
                   help="do not assume a natural labelling")
    g.add_argument("--natural", choices=("auto", "on", "off"), default="auto",
                   help="natural labelling; auto turns it off for -HT+ with k >= 2")
    g.add_argument("-lex", "-l", dest="lexmin", action="store_true",
                   help="restrict to lexicographic minima")
    g = p.add_argument_group("subclasses")
    g.add_argument("-c", "--convex", action="store_true")
    g.add_argument("-hc", "--hconvex", action="store_true")
    g.add_argument("-cm", "--cmonotone", action="store_true")
    g.add_argument("-scm", "--strongly-cmonotone", dest="scm", action="store_true")
    g.add_argument("-gt", "--gentwisted", action="store_true")
    g = p.add_argument_group("properties")
    g.add_argument("-HC", dest="hc", action="store_true", help="forbid plane Hamiltonian cycles")
    g.add_argument("-HC+", dest="hc_plus", action="store_true",
                   help="forbid plane 2n-3 edge subdrawings containing a Hamiltonian cycle")
    g.add_argument("-HT+", dest="ht_plus", type=int, metavar="K",
                   help="plane matching of size K crossed by every plane Hamiltonian cycle")
    g.add_argument("--forbidAllPairsHP", dest="all_pairs_hp", action="store_true",
                   help="one instance per vertex pair without plane Hamiltonian path")
    g.add_argument("--forbidHP", dest="hp", type=int, nargs=2, metavar=("A", "B"))
    g.add_argument("--emptycycles", type=int, metavar="K", help="forbid empty K-cycles")
    g.add_argument("-etupp", type=int, metavar="K", help="at most K empty triangles")
    g.add_argument("-aec", action="store_true", help="every edge is crossed")
    g.add_argument("-crmax", action="store_true", help="crossing-maximal")
    g.add_argument("-crf", type=int, metavar="K", help="forbid crossing families of size K")
    g.add_argument("-C", dest="perfect_c", type=int, metavar="A", help="forbid C_A")
    g.add_argument("-T", dest="perfect_t", type=int, metavar="B", help="forbid T_B")
    g.add_argument("-X", dest="crossmax_sub", type=int, metavar="K",
                   help="forbid crossing-maximal subdrawings of K_K")
    g.add_argument("--cap", type=int, default=None, help="override the factorial size cap")
    g = p.add_argument_group("run")
    g.add_argument("-a", "--all", dest="enumerate", action="store_true", help="enumerate all solutions")
    g.add_argument("-o", dest="export", metavar="PATH", help="write DIMACS and stop")
    g.add_argument("-r2f", dest="results", metavar="PATH", help="write solutions as JSON lines")
    g.add_argument("--witness", metavar="PATH", help="where to persist a SAT witness")
    g.add_argument("--solver", help="'pysat', 'pysat:<backend>', 'shim' or a solver command line")
    g.add_argument("--proof", metavar="PATH", help="ask an external solver to write a DRAT proof")
    g.add_argument("--timeout", type=float)
    g.add_argument("--limit", type=int)
    g.add_argument("--dedup", choices=("canonical", "none"), default="canonical")
    g.add_argument("--orbit-blocking", choices=("auto", "on", "off"), default="auto")
    g.add_argument("--jobs", type=int, default=1)
    g.add_argument("--checkATgraphs", action="store_true",
                   help="check that non-mirror solutions have distinct crossing maps")
    g.add_argument("--summary", metavar="PATH", help="write a JSON run summary")
    g.add_argument("-q", "--quiet", action="store_true")
    return p


def options_from_args(args) -> BaseOptions:
    subclasses = []
    for flag, name in ((args.convex, "convex"), (args.hconvex, "hconvex"), (args.cmonotone, "cmono"),
                       (args.scm, "strongcmono"), (args.gentwisted, "gentwisted")):
        if flag:
            subclasses.append(name)
    if args.no_natural and args.natural == "on":
        raise UsageError("-nat contradicts --natural on")
    natural = not args.no_natural and args.natural != "off"
    if args.ht_plus is not None and args.ht_plus >= 2:
        if args.natural == "on":
            raise UsageError("-HT+ with k >= 2 fixes labels; it cannot assume a natural labelling")
        natural = False
    if args.gentwisted and args.v5:
        raise UsageError("-gt cannot be combined with -v5")
    if args.lexmin and not natural:
        raise UsageError("-lex needs the natural labelling")
    return BaseOptions(valid4=not args.v4, valid5=not args.v5, natural=natural,
                       lexmin=args.lexmin, subclasses=tuple(subclasses))


def build_instance(args, hp_pair=None):
    n = args.n
    if n < 3:
        raise UsageError("n must be at least 3")
    opts = options_from_args(args)
    inst = build_base(n, opts)
    cap = {} if args.cap is None else {"cap": args.cap}
    applied = []
    if args.hc:
        props.forbid_plane_hamiltonian_cycle(inst, **cap)
        applied.append("HC")
    if args.hc_plus:
        props.forbid_hc_plus(inst, **cap)
        applied.append("HC+")
    if args.ht_plus is not None:
        props.forbid_matching_friendly_hc(inst, args.ht_plus, **cap)
        applied.append(f"HT+{args.ht_plus}")
    pair = hp_pair or (tuple(args.hp) if args.hp else None)
    if pair:
        props.forbid_plane_hamiltonian_path(inst, *pair, **cap)
        applied.append(f"HP{pair[0]}-{pair[1]}")
    if args.emptycycles is not None:
        props.forbid_empty_k_cycles(inst, args.emptycycles)
        applied.append(f"emptycycles{args.emptycycles}")
    if args.etupp is not None:
        props.bound_empty_triangles(inst, args.etupp)
        applied.append(f"etupp{args.etupp}")
    if args.aec:
        props.require_crossing_profile(inst, "allEdgesCrossed")
        applied.append("aec")
    if args.crmax:
        props.require_crossing_profile(inst, "crossingMaximal")
        applied.append("crmax")
    if args.crf is not None:
        props.forbid_crossing_family(inst, args.crf)
        applied.append(f"crf{args.crf}")
    if args.perfect_c is not None:
        props.forbid_subdrawing(inst, "C", args.perfect_c)
        applied.append(f"C{args.perfect_c}")
    if args.perfect_t is not None:
        props.forbid_subdrawing(inst, "T", args.perfect_t)
        applied.append(f"T{args.perfect_t}")
    if args.crossmax_sub is not None:
        props.forbid_subdrawing(inst, "X", args.crossmax_sub)
        applied.append(f"X{args.crossmax_sub}")
    inst.meta["properties"] = applied
    return inst


def _solver(args):
    s = get_solver(args.solver)
    if args.proof:
        if not isinstance(s, ExternalSolver):
            raise UsageError("--proof needs an external solver (--solver CMD)")
        s.proof = args.proof
    return s


def _decode(inst, model):
    full = decode_model(model, inst.varmap)
    if inst.meta.get("extended"):
        return project(full, inst.meta["base_n"]), full
    return full, None


def _emit(line: dict, quiet=False):
    if not quiet:
        print(json.dumps(line), flush=True)


def _witness_path(args, tag="witness") -> Path:
    return Path(args.witness or f"rotsys_n{args.n}_{tag}.jsonl")


def check_at_graphs(systems) -> tuple[bool, int]:
    """Labelled systems with equal crossing maps must coincide or be mirror images.

    Every solution is expanded to all its relabelings first, so the check is the
    same whether the enumeration was deduplicated or not.
    """
    labelled = set()
    for pi in systems:
        labelled |= orbit(pi)
    groups = {}
    for pi in sorted(labelled, key=lambda s: s.rotations):
        groups.setdefault(crossing_map(pi).pairs, []).append(pi)
    bad = 0
    for members in groups.values():
        for p, q in itertools.combinations(members, 2):
            if q != p and q != p.reflected():
                bad += 1
    return bad == 0, len(groups)


def _solve_pair(payload):
    argv, pair = payload
    args = build_parser().parse_args(argv)
    inst = build_instance(args, hp_pair=pair)
    out = solve(inst, _solver(args), args.timeout)
    witness = None
    if out.sat:
        witness = _decode(inst, out.model)[0].to_json()
    return pair, out.status.value, witness


def run_main(argv) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(message)s", stream=sys.stderr)
    t0 = time.perf_counter()
    summary = {"n": args.n}
    try:
        if args.all_pairs_hp:
            return _run_all_pairs(args, argv, summary)
        inst = build_instance(args)
        summary.update(vars=inst.num_vars, clauses=len(inst.clauses),
                       properties=inst.meta.get("properties"))
        if args.export:
            path = write_dimacs(inst, args.export)
            log.info("wrote %s (%d vars, %d clauses)", path, inst.num_vars, len(inst.clauses))
            for name, (lo, hi) in inst.blocks.items():
                log.info("  %s-block %d..%d", name, lo, hi)
            summary.update(status="exported", path=str(path))
            return EXIT_OK
        if args.enumerate:
            return _run_enumerate(args, inst, summary)
        out = solve(inst, _solver(args), args.timeout)
        summary.update(status=out.status.value, wall=round(time.perf_counter() - t0, 3))
        if out.status is SolveStatus.SAT:
            pi, full = _decode(inst, out.model)
            path = _witness_path(args)
            write_jsonl(path, [pi] + ([full] if full is not None else []))
            summary["witness"] = str(path)
            log.info("SAT; witness written to %s", path)
            print("SAT")
            return EXIT_SAT
        if out.status is SolveStatus.UNSAT:
            print("UNSAT")
            return EXIT_UNSAT
        print("UNKNOWN")
        return EXIT_OK
    except (UsageError, ConfigError) as exc:
        print(f"rotsys: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SolverEnvError, OSError) as exc:
        print(f"rotsys: {exc}", file=sys.stderr)
        return EXIT_ENV
    finally:
        summary.setdefault("wall", round(time.perf_counter() - t0, 3))
        if args.summary:
            Path(args.summary).write_text(json.dumps(summary, indent=1) + "\n")


def _run_enumerate(args, inst, summary) -> int:
    orbit = {"auto": None, "on": True, "off": False}[args.orbit_blocking]
    state = EnumerationState()
    found = []
    sink = open(args.results, "w") if args.results else None
    try:
        for pi in enumerate_all(inst, dedup=args.dedup, limit=args.limit, solver=_solver(args),
                                timeout=args.timeout, orbit_blocking=orbit, state=state):
            found.append(pi)
            if sink:
                sink.write(pi.to_json() + "\n")
            else:
                _emit({"n": pi.n, "rotations": [list(r) for r in pi.rotations]}, args.quiet)
    except TimeoutError as exc:
        print(f"rotsys: {exc}", file=sys.stderr)
        summary.update(state.summary())
        return EXIT_ENV
    finally:
        if sink:
            sink.close()
    summary.update(state.summary())
    summary["count"] = state.count
    if args.checkATgraphs:
        ok, groups = check_at_graphs(found)
        summary["checkATgraphs"] = {"ok": ok, "crossing_maps": groups}
        log.info("checkATgraphs: %s (%d distinct crossing maps)", "ok" if ok else "FAILED", groups)
        if not ok:
            _emit({"summary": summary})
            return EXIT_FAIL
    log.info("%d solutions", state.count)
    _emit({"summary": summary})
    return EXIT_OK


def _run_all_pairs(args, argv, summary) -> int:
    sub_argv = [a for a in argv if a != "--forbidAllPairsHP"]
    pairs = list(itertools.combinations(range(1, args.n + 1), 2))
    payloads = [(sub_argv, pair) for pair in pairs]
    results = []
    if args.jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(args.jobs) as ex:
            results = list(ex.map(_solve_pair, payloads))
    else:
        results = [_solve_pair(p) for p in payloads]
    sat = [(pair, w) for pair, status, w in results if status == "SAT"]
    unknown = [pair for pair, status, _ in results if status == "UNKNOWN"]
    summary.update(pairs=len(pairs), sat=len(sat), unknown=len(unknown))
    if sat:
        path = _witness_path(args, "hp_witness")
        with open(path, "w") as fh:
            for pair, w in sat:
                obj = json.loads(w)
                obj["pair"] = list(pair)
                fh.write(json.dumps(obj) + "\n")
        summary["witness"] = str(path)
        print("SAT")
        return EXIT_SAT
    if unknown:
        print("UNKNOWN")
        return EXIT_OK
    print("UNSAT")
    return EXIT_UNSAT


# -- auxiliary modes -------------------------------------------------------------

VERIFY_PROPS = ("drawable", "convex", "hconvex", "gentwisted", "plane-hc", "plane-hp",
                "empty-triangles", "empty-cycle", "crossing-family", "C", "T", "aec", "crmax",
                "crossings")


def verify_system(pi: PreRotationSystem, prop: str, k=None) -> dict:
    from . import oracle
    from .core import check_class

    out = {"rotations": [list(r) for r in pi.rotations], "property": prop}
    if prop == "drawable":
        from .drawability import is_drawable
        sat, graph = is_drawable(pi)
        out.update(verdict=sat, obstruction_check=check_class(pi, "drawable"))
        out["agree"] = out["verdict"] == out["obstruction_check"]
    elif prop in ("convex", "hconvex"):
        out.update(verdict=oracle.check_class_definitional(pi, prop),
                   obstruction_check=check_class(pi, prop))
        out["agree"] = out["verdict"] == out["obstruction_check"]
    elif prop == "gentwisted":
        out["verdict"] = check_class(pi, "gentwisted")
    elif prop == "plane-hc":
        r = oracle.find_plane_hamiltonian_cycle(pi)
        out.update(verdict=r.found, witness=r.witness, exhaustive=r.exhaustive)
    elif prop == "plane-hp":
        res = {}
        for a, b in itertools.combinations(range(1, pi.n + 1), 2):
            res[f"{a}-{b}"] = oracle.find_plane_hamiltonian_path(pi, a, b).found
        out.update(verdict=all(res.values()), pairs=res)
    elif prop == "empty-triangles":
        out["verdict"] = oracle.count_empty_triangles(pi)
    elif prop == "empty-cycle":
        r = oracle.find_empty_k_cycle(pi, k or 3)
        out.update(verdict=r.found, witness=r.witness, exhaustive=r.exhaustive)
    elif prop == "crossing-family":
        r = oracle.find_crossing_family(pi, k or 3)
        out.update(verdict=r.found, witness=r.witness)
    elif prop in ("C", "T"):
        r = oracle.find_perfect_subdrawing(pi, prop, k or 5)
        out.update(verdict=r.found, witness=r.witness)
    elif prop == "aec":
        out["verdict"] = not oracle.uncrossed_edges(pi)
    elif prop == "crmax":
        out["verdict"] = oracle.is_crossing_maximal(pi)
    elif prop == "crossings":
        out["verdict"] = [[list(e), list(f)] for e, f in crossing_map(pi).sorted_pairs()]
    else:
        raise UsageError(f"unknown property {prop!r}")
    return out


def run_verify(argv) -> int:
    p = argparse.ArgumentParser(prog="rotsys verify")
    p.add_argument("file")
    p.add_argument("-p", "--property", required=True, choices=VERIFY_PROPS)
    p.add_argument("-k", type=int)
    args = p.parse_args(argv)
    disagreements = 0
    for pi in read_jsonl(args.file):
        res = verify_system(pi, args.property, args.k)
        if res.get("agree") is False:
            disagreements += 1
        print(json.dumps(res, default=list), flush=True)
    print(json.dumps({"summary": {"disagreements": disagreements}}))
    return EXIT_FAIL if disagreements else EXIT_OK


def run_draw(argv) -> int:
    from .core import contains_pi4o
    from .drawability import check_planarization, is_drawable

    p = argparse.ArgumentParser(prog="rotsys draw")
    p.add_argument("file")
    args = p.parse_args(argv)
    for pi in read_jsonl(args.file):
        if contains_pi4o(pi):
            print(json.dumps({"rotations": [list(r) for r in pi.rotations], "drawable": False,
                              "reason": "Pi4o"}))
            continue
        ok, graph = is_drawable(pi)
        line = {"rotations": [list(r) for r in pi.rotations], "drawable": ok}
        if ok:
            faces = check_planarization(pi, graph)
            line["planarization"] = graph.to_dict()
            line["faces"] = len(faces)
        print(json.dumps(line), flush=True)
    return EXIT_OK


TABLE_COLUMNS = {"all": (), "convex": ("convex",), "hconvex": ("hconvex",), "cmono": ("cmono",),
                 "strongcmono": ("strongcmono",), "gentwisted": ("gentwisted",)}


def run_table(argv) -> int:
    p = argparse.ArgumentParser(prog="rotsys table")
    p.add_argument("ns", type=int, nargs="+")
    p.add_argument("--columns", nargs="+", choices=list(TABLE_COLUMNS), default=list(TABLE_COLUMNS))
    p.add_argument("--solver")
    args = p.parse_args(argv)
    rows = {}
    print("n  " + "  ".join(f"{c:>12}" for c in args.columns))
    for n in args.ns:
        row = {}
        for col in args.columns:
            inst = build_base(n, BaseOptions(subclasses=TABLE_COLUMNS[col]))
            row[col] = sum(1 for _ in enumerate_all(inst, solver=args.solver))
        rows[n] = row
        print(f"{n:<3}" + "  ".join(f"{row[c]:>12}" for c in args.columns), flush=True)
    print(json.dumps({"summary": rows}))
    return EXIT_OK


def run_derive(argv) -> int:
    from .catalog import default_path, reset_cache
    from .derive import derive_obstruction_catalog

    p = argparse.ArgumentParser(prog="rotsys derive-catalog")
    p.add_argument("--out", default=None, help="target file (default: the packaged catalog)")
    args = p.parse_args(argv)
    cat = derive_obstruction_catalog(report=lambda k, v: print(f"{k}: {v}", flush=True))
    path = Path(args.out) if args.out else default_path()
    cat.save(path)
    reset_cache()
    print(f"catalog written to {path}")
    return EXIT_OK


MODES = {"verify": run_verify, "draw": run_draw, "table": run_table, "derive-catalog": run_derive}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        if argv and argv[0] in MODES:
            return MODES[argv[0]](argv[1:])
        return run_main(argv)
    except SystemExit as exc:
        # argparse reports usage problems with status 2
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    except UsageError as exc:
        print(f"rotsys: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
