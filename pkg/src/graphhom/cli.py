"""``graphhom`` command line: Betti tables, duality reports, sheaf checks.

Every command writes one JSON document (or CSV with ``--format csv``) to
``--out`` or stdout.  Errors go to stderr as a single JSON line and map
to exit codes: 2 bad input, 3 outside the configured caps, 4 a failed
duality pairing or self-test.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

from .complexes import SCHEMA, ComplexSpec, betti_table_json, graph_betti
from .duality import ShiftMismatch, duality_report
from .graphs import DEFAULT_CAPS, InvalidGraph, OutOfScope
from .linalg import NotAComplex
from .ribbon import InvalidRibbon
from . import sheaves as sh

EXIT_INVALID, EXIT_SCOPE, EXIT_FAILED = 2, 3, 4

GAMMA_OPERADS = ("comm", "ass", "lie", "dcomm", "dass", "dlie")
RIBBON_OPERADS = ("t", "dt")


class UsageError(Exception):
    pass


class CheckFailed(Exception):
    def __init__(self, message, payload):
        super().__init__(message)
        self.payload = payload


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def load_caps(cap_rank=None) -> dict:
    caps = dict(DEFAULT_CAPS)
    env = os.environ.get("GRAPHHOM_CAPS")
    if env:
        try:
            extra = json.loads(env)
        except json.JSONDecodeError as exc:
            raise UsageError(f"GRAPHHOM_CAPS is not JSON: {exc}") from None
        if not isinstance(extra, dict):
            raise UsageError("GRAPHHOM_CAPS must be a JSON object")
        caps.update({k: int(v) for k, v in extra.items()})
    if cap_rank is not None:
        caps["rank"] = cap_rank
    return caps


def _orientation(args, default):
    if args.twisted and args.standard:
        raise UsageError("--twisted and --standard are exclusive")
    if args.twisted:
        return "twisted"
    if args.standard:
        return "standard"
    return default


def cmd_gamma(args, caps) -> dict:
    if args.operad not in GAMMA_OPERADS:
        raise UsageError(f"operad must be one of {', '.join(GAMMA_OPERADS)}")
    spec = ComplexSpec(args.operad, rank=args.rank, orientation=_orientation(args, "twisted"),
                       h_twist=args.h_twist, tree_policy=args.tree_policy, cohomology=args.cohomology)
    return betti_table_json(spec, graph_betti(spec, caps))


def cmd_ribbon(args, caps) -> dict:
    op = args.operad
    orientation = _orientation(args, "standard")
    if op in RIBBON_OPERADS:
        spec = ComplexSpec(op, genus=args.genus, boundary=args.boundary, labeled=args.labeled,
                           orientation=orientation, h_twist=args.h_twist,
                           tree_policy=args.tree_policy, cohomology=args.cohomology)
    elif op == "ass":
        if args.labeled:
            raise UsageError("labeled mode needs --operad t")
        g, b = args.genus, args.boundary
        if g < 0 or b < 1 or 2 - 2 * g - b >= 0:
            raise InvalidRibbon(f"(g,b)=({g},{b}) violates 2-2g-b < 0")
        spec = ComplexSpec("ass", rank=2 * g + b - 1, ribbon_filter=(g, b), orientation=orientation,
                           h_twist=args.h_twist, tree_policy=args.tree_policy, cohomology=args.cohomology)
    else:
        raise UsageError("ribbon takes --operad t, dt or ass")
    return betti_table_json(spec, graph_betti(spec, caps))


def cmd_duality(args, caps) -> dict:
    if not args.operad:
        raise UsageError("--operad is required")
    if args.ribbon or args.genus is not None:
        if args.genus is None or args.boundary is None:
            raise UsageError("ribbon duality needs --genus and --boundary")
        if args.operad != "t":
            raise UsageError("ribbon duality is modelled for --operad t")
        report = duality_report("t", genus=args.genus, boundary=args.boundary,
                                labeled=args.labeled, caps=caps)
    else:
        if args.rank is None:
            raise UsageError("give --rank, or --ribbon with --genus/--boundary")
        if args.operad not in ("comm", "ass", "lie"):
            raise UsageError("duality takes --operad comm, ass or lie in rank mode")
        report = duality_report(args.operad, rank=args.rank, caps=caps)
    # wall-clock time would break byte-identical reruns
    report = {"schema": SCHEMA, **{k: v for k, v in report.items() if k != "seconds"}}
    if not report["passed"]:
        raise CheckFailed("no uniform shift pairs the tables", report)
    return report


def _read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None


def _load_system(args):
    if args.example:
        X, F = sh.example_system(args.example)
        return X, F
    if not args.system:
        raise UsageError("give --system FILE or --example NAME")
    data = _read_json(args.system)
    try:
        X = sh.SimplicialComplex.from_json(_read_json(args.complex)) if args.complex else None
        F = sh.CoefficientSystem.from_json(data, X)
    except (KeyError, ValueError, TypeError) as exc:
        raise UsageError(f"malformed system: {exc}") from None
    return F.X, F


def _table(d) -> dict:
    return {str(k): v for k, v in sorted(d.items())}


def selftest(seed: int, cases: int) -> dict:
    rows = []
    failed = None
    for i in range(cases):
        s = seed + i
        X = sh.random_complex(s)
        F = sh.random_system(X, s)
        D = sh.verdier_dual(X, F)
        hF, hD = sh.hypercohomology(X, F), sh.hypercohomology(X, D)
        global_ok = hD == {-k: v for k, v in hF.items()}
        stalk_ok = all(sh.stalk_table(D, f) == {-k: v for k, v in sh.star_compact_cohomology(X, f, F).items()}
                       for f in X.faces)
        DD = sh.verdier_dual(X, D)
        double_ok = sh.hypercohomology(X, DD) == hF
        row = {"seed": s, "faces": len(X.faces), "F": _table(hF), "DF": _table(hD),
               "global": global_ok, "stalk": stalk_ok, "double_dual": double_ok}
        rows.append(row)
        if failed is None and not (global_ok and stalk_ok and double_ok):
            failed = {"case": row, "system": F.to_json()}
    out = {"schema": SCHEMA, "command": "sheaf selftest", "cases": rows, "passed": failed is None}
    if failed:
        out["counterexample"] = failed
        raise CheckFailed("sheaf self-test failed", out)
    return out


def cmd_sheaf(args, caps) -> dict:
    if args.action == "selftest":
        return selftest(args.seed, args.cases)
    X, F = _load_system(args)
    if args.action == "cohomology":
        return {"schema": SCHEMA, "command": "sheaf cohomology", "betti": _table(sh.hypercohomology(X, F))}
    D = sh.verdier_dual(X, F)
    return {"schema": SCHEMA, "command": "sheaf verdier", "dual": D.to_json(),
            "betti": _table(sh.hypercohomology(X, D))}


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="graphhom", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(q):
        q.add_argument("--out")
        q.add_argument("--format", choices=("json", "csv"), default="json")
        q.add_argument("--cap-rank", type=int)
        q.add_argument("--seed", type=int, default=0)

    def orient(q):
        q.add_argument("--twisted", action="store_true")
        q.add_argument("--standard", action="store_true")
        q.add_argument("--h-twist", action="store_true")
        q.add_argument("--cohomology", action="store_true")
        q.add_argument("--tree-policy", choices=("bfs", "dfs"), default="bfs")

    g = sub.add_parser("gamma", help="Betti table of an O-graph complex")
    g.add_argument("--operad", required=True)
    g.add_argument("--rank", type=int, required=True)
    orient(g)
    common(g)

    r = sub.add_parser("ribbon", help="Betti table of a ribbon graph complex")
    r.add_argument("--operad", default="t")
    r.add_argument("--genus", type=int, required=True)
    r.add_argument("--boundary", type=int, required=True)
    r.add_argument("--labeled", action="store_true")
    orient(r)
    common(r)

    d = sub.add_parser("duality", help="uniform-shift duality report")
    d.add_argument("--operad")
    d.add_argument("--rank", type=int)
    d.add_argument("--ribbon", action="store_true")
    d.add_argument("--genus", type=int)
    d.add_argument("--boundary", type=int)
    d.add_argument("--labeled", action="store_true")
    common(d)

    s = sub.add_parser("sheaf", help="constructible sheaf computations")
    s.add_argument("action", choices=("cohomology", "verdier", "selftest"))
    s.add_argument("--complex")
    s.add_argument("--system")
    s.add_argument("--example", choices=sorted(sh.EXAMPLES))
    s.add_argument("--cases", type=int, default=25)
    common(s)
    return p


def to_csv(doc: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if "tables" in doc:
        w.writerow(["table", "degree", "dim"])
        for name, table in doc["tables"].items():
            for k, v in table.items():
                w.writerow([name, k, v])
    elif "cases" in doc:
        w.writerow(["seed", "faces", "global", "stalk", "double_dual"])
        for row in doc["cases"]:
            w.writerow([row["seed"], row["faces"], row["global"], row["stalk"], row["double_dual"]])
    else:
        w.writerow(["degree", "dim"])
        for k, v in doc.get("betti", {}).items():
            w.writerow([k, v])
    return buf.getvalue()


def _emit(doc, args):
    text = to_csv(doc) if args.format == "csv" else json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _fail(code, kind, message):
    sys.stderr.write(json.dumps({"error": kind, "message": str(message), "exit": code}) + "\n")
    return code


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        return _fail(EXIT_INVALID, "usage", exc)
    handlers = {"gamma": cmd_gamma, "ribbon": cmd_ribbon, "duality": cmd_duality, "sheaf": cmd_sheaf}
    try:
        caps = load_caps(args.cap_rank)
        doc = handlers[args.command](args, caps)
    except CheckFailed as exc:
        _emit(exc.payload, args)
        return _fail(EXIT_FAILED, "check_failed", exc)
    except ShiftMismatch as exc:
        return _fail(EXIT_FAILED, "shift_mismatch", exc)
    except OutOfScope as exc:
        return _fail(EXIT_SCOPE, "out_of_scope", exc)
    except (UsageError, InvalidGraph, InvalidRibbon, sh.NonFunctorialSystem, sh.FaceNotFound,
            NotAComplex, KeyError, ValueError) as exc:
        return _fail(EXIT_INVALID, type(exc).__name__, exc)
    _emit(doc, args)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
