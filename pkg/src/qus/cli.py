"""``qus`` command-line front end.

Reports go to standard output as ``key=value`` lines (or one JSON object
with ``--json``); diagnostics go to standard error.  Exit codes: 0 the
query was answered, 1 usage error, 2 parse or validation error, 3 an
internal invariant was breached.
"""

from __future__ import annotations

import argparse
import bisect
import json
import sys
from typing import Sequence

import numpy as np

from . import __version__
from .cbn import CbnModel, gmp_sweep, grouped_kernel, joint_kernel, tci_check
from .dsl import ModelFile, ParseError, format_weight, kernel_text, parse
from .errors import QusError
from .extension import definetti_mixture, extend, is_exchangeable, prefix_marginal
from .graph import d_separated
from .kernels import check_factorization, disintegrate, extract_function, is_copy_deterministic, is_function_deterministic, is_zero_one_deterministic
from .monad import ATOL, Dist, Kernel
from .sampling import Seed, uniform
from .spaces import UNIT, label

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_BREACH = 0, 1, 2, 3


class UsageError(Exception):
    pass


class InvalidInput(Exception):
    """Validation failure of command arguments against a parsed model."""


class _ArgParser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 1 << 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _parser() -> argparse.ArgumentParser:
    common = _ArgParser(add_help=False)
    common.add_argument("--json", action="store_true", help="emit one JSON object")
    common.add_argument("--tol", type=float, default=ATOL, help="float tolerance (default 1e-12)")

    p = _ArgParser(prog="qus", description="Finite Markov kernels, CBNs and independence queries.")
    p.add_argument("--version", action="version", version=f"qus {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_ArgParser)

    def cmd(name, help_):
        c = sub.add_parser(name, help=help_, parents=[common])
        c.add_argument("file", help="model file")
        return c

    cmd("check", "parse and validate a model file")
    cmd("run", "evaluate the query statements of a model file")
    c = cmd("dsep", "d-separation of node sets in a graph")
    c.add_argument("graph")
    c.add_argument("a"), c.add_argument("b"), c.add_argument("c")
    c = cmd("tci", "transitional conditional independence under a CBN")
    c.add_argument("a"), c.add_argument("b"), c.add_argument("c")
    c.add_argument("--cbn")
    c = cmd("gmp", "global Markov property sweep")
    c.add_argument("--cbn")
    c.add_argument("--max-set-size", type=_positive, default=2)
    c.add_argument("--converse", action="store_true", help="also count TCI without d-separation")
    c = cmd("disintegrate", "split a kernel Z -> X*Y into X|Y,Z and Y|Z")
    c.add_argument("kernel")
    c.add_argument("--fallback", choices=("uniform", "first"), default="uniform")
    c = cmd("joint", "joint kernel of a CBN")
    c.add_argument("--cbn")
    c.add_argument("--input", action="append", default=[], metavar="NODE=VALUE")
    c = cmd("sample", "ancestral sampling of a CBN node (or a family prefix)")
    c.add_argument("--cbn")
    c.add_argument("--family")
    c.add_argument("--node", action="append", default=[])
    c.add_argument("--input", action="append", default=[], metavar="NODE=VALUE")
    c.add_argument("--n", type=_positive, default=10_000)
    c.add_argument("--seed", type=_u64, default=0)
    c.add_argument("--prefix", type=int, help="last coordinate of a family prefix (default: depth)")
    c = cmd("detcheck", "the three determinism notions of a kernel")
    c.add_argument("kernel")
    c = cmd("definetti", "exchangeability and iid-mixture fit of a law on X^n")
    c.add_argument("target", help="kernel or distribution name (or a family)")
    c.add_argument("--grid", default=None, help="comma-separated p values (default 0, 0.1, ..., 1)")
    return p


# --- helpers ------------------------------------------------------------

def _load(path: str) -> ModelFile:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    except UnicodeDecodeError as exc:
        raise ParseError(f"input is not UTF-8 ({exc.reason})", 1, 1) from None
    return parse(text)


def _node_set(text: str) -> list[str]:
    t = text.strip()
    if not (t.startswith("{") and t.endswith("}")):
        raise UsageError(f"node set must look like '{{a,b}}', got {text!r}")
    body = t[1:-1].strip()
    return [s.strip() for s in body.split(",")] if body else []


def _pick_cbn(m: ModelFile, name: str | None) -> tuple[str, CbnModel]:
    cbns = m.env.cbns
    if name is not None:
        if name not in cbns:
            raise InvalidInput(f"no cbn named {name!r}")
        return name, cbns[name]
    if len(cbns) != 1:
        raise UsageError(f"model declares {len(cbns)} cbns; choose one with --cbn")
    return next(iter(cbns.items()))


def _require_nodes(g, nodes):
    for v in nodes:
        if v not in g:
            raise InvalidInput(f"{v!r} is not a node")


def _kernel_or_dist(m: ModelFile, name: str) -> Kernel:
    if name in m.env.kernels:
        return m.env.kernels[name]
    if name in m.env.dists:
        return Kernel.from_dist(m.env.dists[name])
    if name in m.env.families:
        return m.env.families[name].levels()[-1]
    raise InvalidInput(f"no kernel or distribution named {name!r}")


def _inputs(model: CbnModel, assignments: list[str]):
    """Input configuration from ``NODE=VALUE`` strings; ``None`` when no inputs exist."""
    g = model.graph
    given = {}
    for item in assignments:
        if "=" not in item:
            raise UsageError(f"--input expects NODE=VALUE, got {item!r}")
        node, value = (s.strip() for s in item.split("=", 1))
        if node not in g.inputs:
            raise InvalidInput(f"{node!r} is not an input node")
        try:
            given[node] = model.space_of[node].lookup(value)
        except QusError:
            raise InvalidInput(f"{value!r} is not a point of the space of {node!r}") from None
    missing = [j for j in g.inputs if j not in given]
    if missing:
        raise InvalidInput(f"input node(s) {', '.join(missing)} need a value (--input NODE=VALUE)")
    if not g.inputs:
        return UNIT.points[0]
    values = [given[j] for j in g.inputs]
    return values[0] if len(values) == 1 else tuple(values)


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format_weight(value)
    return str(value)


def _emit(report: dict, as_json: bool, out) -> None:
    if as_json:
        out.write(json.dumps(report, sort_keys=False, default=str) + "\n")
        return
    if len(report) == 1 and not isinstance(next(iter(report.values())), list):
        # a lone answer prints bare, e.g. "true"
        out.write(f"{_fmt(next(iter(report.values())))}\n")
        return
    for key, value in report.items():
        if isinstance(value, list):
            for item in value:
                out.write(f"{key}={_fmt(item)}\n")
        else:
            out.write(f"{key}={_fmt(value)}\n")


def _table(d: Dist) -> list[str]:
    return [f"{label(p)}:{format_weight(w)}" for p, w in zip(d.space.points, d.weights)]


# --- commands -----------------------------------------------------------

def cmd_check(args, m: ModelFile) -> tuple[dict, int]:
    env = m.env
    return {
        "status": "ok",
        "declarations": len(m.declarations),
        "spaces": len(env.spaces), "dists": len(env.dists), "kernels": len(env.kernels),
        "graphs": len(env.graphs), "cbns": len(env.cbns), "families": len(env.families),
        "queries": len(m.queries),
    }, EXIT_OK


def cmd_run(args, m: ModelFile) -> tuple[dict, int]:
    results = []
    for q in m.queries:
        head = f"{q.kind} {q.target} : {{{','.join(q.a)}}} _||_ {{{','.join(q.b)}}} | {{{','.join(q.c)}}}"
        if q.kind == "dsep":
            ok = d_separated(m.env.graphs[q.target], q.a, q.b, q.c)
            results.append(f"{head} -> {_fmt(ok)}")
        else:
            w = tci_check(grouped_kernel(m.env.cbns[q.target], q.a, q.b, q.c), args.tol)
            results.append(f"{head} -> {'holds' if w.holds else 'fails'}")
    return {"queries": len(results), "result": results}, EXIT_OK


def cmd_dsep(args, m: ModelFile) -> tuple[dict, int]:
    g = m.env.graphs.get(args.graph)
    if g is None:
        raise InvalidInput(f"no graph named {args.graph!r}")
    a, b, c = _node_set(args.a), _node_set(args.b), _node_set(args.c)
    _require_nodes(g, a + b + c)
    return {"dsep": d_separated(g, a, b, c)}, EXIT_OK


def cmd_tci(args, m: ModelFile) -> tuple[dict, int]:
    name, model = _pick_cbn(m, args.cbn)
    a, b, c = _node_set(args.a), _node_set(args.b), _node_set(args.c)
    _require_nodes(model.graph, a + b + c)
    w = tci_check(grouped_kernel(model, a, b, c), args.tol)
    report = {"cbn": name, "tci": "holds" if w.holds else "fails", "deviation": w.deviation}
    if w.holds:
        report["q"] = kernel_text("Q", w.q)
    else:
        z, y, t, x = w.counterexample
        report["counterexample"] = f"z={label(z)} y={label(y)} t={label(t)} x={label(x)}"
    return report, EXIT_OK


def cmd_gmp(args, m: ModelFile) -> tuple[dict, int]:
    name, model = _pick_cbn(m, args.cbn)
    r = gmp_sweep(model, args.max_set_size, args.tol, converse=args.converse)
    report = {
        "cbn": name, "triples": r.triples, "separated": r.separated,
        "violations": len(r.violations),
    }
    if args.converse:
        report["tci_without_dsep"] = r.tci_without_dsep
    report["violation"] = [
        f"{{{','.join(model.canonical(a))}}} _||_ {{{','.join(model.canonical(b))}}} | "
        f"{{{','.join(model.canonical(c))}}} deviation={format_weight(dev)}"
        for a, b, c, dev in r.violations
    ]
    return report, (EXIT_OK if r.ok else EXIT_BREACH)


def cmd_disintegrate(args, m: ModelFile) -> tuple[dict, int]:
    k = _kernel_or_dist(m, args.kernel)
    if k.codomain.kind != "product" or len(k.codomain.factors) != 2:
        raise InvalidInput(f"{args.kernel!r} must map into a product of two spaces")
    cond, marg = disintegrate(k, args.fallback)
    if not check_factorization(k, cond, max(args.tol, 1e-12)):
        return {"error": "disintegration does not reproduce the joint"}, EXIT_BREACH
    return {"cond": kernel_text("C", cond), "marg": kernel_text("M", marg)}, EXIT_OK


def cmd_joint(args, m: ModelFile) -> tuple[dict, int]:
    name, model = _pick_cbn(m, args.cbn)
    jk = joint_kernel(model)
    outputs = [v for v in model.order if v in model.graph.outputs]
    report = {"cbn": name, "nodes": ",".join(outputs)}
    if args.input or model.graph.inputs == ():
        t = _inputs(model, args.input)
        report["atom"] = _table(jk.row(t))
    else:
        report["atom"] = [
            f"{label(t)}|{entry}" for t in jk.domain.points for entry in _table(jk.row(t))
        ]
    return report, EXIT_OK


def _ancestral(model: CbnModel, t, n: int, root: Seed, nodes: list[str]) -> Dist:
    g = model.graph
    order = model.order
    cums = {v: [list(r) for r in model.kernel_of[v].cumulative] for v in g.outputs}
    single = len(g.inputs) == 1
    held = {j: (t if single else t[i]) for i, j in enumerate(g.inputs)}
    target = model.set_space(nodes)
    counts = np.zeros(len(target), dtype=np.int64)
    wanted = model.canonical(nodes)
    for i in range(n):
        s = root.spawn(i)
        values = dict(held)
        for k, v in enumerate(order):
            if v in held:
                continue
            ps = model.parents(v)
            key = "0" if not ps else (values[ps[0]] if len(ps) == 1 else tuple(values[p] for p in ps))
            kern = model.kernel_of[v]
            row = cums[v][kern.domain.position(key)]
            j = min(bisect.bisect_right(row, uniform(s.spawn(k))), len(row) - 1)
            while j > 0 and row[j] == row[j - 1]:
                j -= 1  # never land on a zero-mass atom after rounding
            values[v] = kern.codomain.points[j]
        point = values[wanted[0]] if len(wanted) == 1 else tuple(values[v] for v in wanted)
        counts[target.position(point)] += 1
    return Dist(target, counts / n)


def cmd_sample(args, m: ModelFile) -> tuple[dict, int]:
    root = Seed.root(args.seed)
    if args.family:
        fam = m.env.families.get(args.family)
        if fam is None:
            raise InvalidInput(f"no family named {args.family!r}")
        depth = fam.depth if args.prefix is None else args.prefix
        if depth < 0:
            raise UsageError("--prefix must be nonnegative")
        d = prefix_marginal(extend(fam.conds, fam.base), depth, UNIT.points[0], args.n, root)
        return {"family": args.family, "prefix": depth, "n": args.n, "seed": args.seed,
                "freq": _table(d)}, EXIT_OK
    name, model = _pick_cbn(m, args.cbn)
    nodes = args.node or [v for v in model.order if v in model.graph.outputs]
    _require_nodes(model.graph, nodes)
    t = _inputs(model, args.input)
    d = _ancestral(model, t, args.n, root, nodes)
    return {"cbn": name, "nodes": ",".join(model.canonical(nodes)), "n": args.n, "seed": args.seed,
            "freq": _table(d)}, EXIT_OK


def cmd_detcheck(args, m: ModelFile) -> tuple[dict, int]:
    k = _kernel_or_dist(m, args.kernel)
    tol = args.tol
    zo, cp, fn = is_zero_one_deterministic(k, tol), is_copy_deterministic(k, tol), is_function_deterministic(k, tol)
    report = {"zero_one": zo, "copy": cp, "function": fn}
    if len({zo, cp, fn}) != 1:
        return report, EXIT_BREACH
    if fn:
        g = extract_function(k, tol)
        report["map"] = [f"{label(z)}->{label(g(z))}" for z in k.domain.points]
    return report, EXIT_OK


def cmd_definetti(args, m: ModelFile) -> tuple[dict, int]:
    k = _kernel_or_dist(m, args.target)
    if args.grid is None:
        grid = [i / 10 for i in range(11)]
    else:
        try:
            grid = [float(x) for x in args.grid.split(",") if x.strip()]
        except ValueError:
            raise UsageError(f"--grid must be comma-separated numbers, got {args.grid!r}") from None
        if not grid or any(not 0.0 <= p <= 1.0 for p in grid):
            raise UsageError("--grid values must lie in [0, 1]")
    exch = is_exchangeable(k, args.tol)
    fits = definetti_mixture(k, grid)
    report = {"exchangeable": exch}
    weights, residuals = [], []
    for z, fit in fits.items():
        prefix = "" if k.domain == UNIT else f"{label(z)}|"
        weights.extend(f"{prefix}{format_weight(p)}:{format_weight(w)}" for p, w in zip(fit.grid, fit.weights) if w > 1e-12)
        residuals.append(f"{prefix}{format_weight(fit.residual)}")
    report["weight"] = weights
    report["residual"] = residuals
    return report, EXIT_OK


COMMANDS = {
    "check": cmd_check, "run": cmd_run, "dsep": cmd_dsep, "tci": cmd_tci, "gmp": cmd_gmp,
    "disintegrate": cmd_disintegrate, "joint": cmd_joint, "sample": cmd_sample,
    "detcheck": cmd_detcheck, "definetti": cmd_definetti,
}


def run_command(argv: Sequence[str], out=None, err=None) -> int:
    """Run one ``qus`` invocation; returns the exit code."""
    out = out or sys.stdout
    err = err or sys.stderr
    parser = _parser()
    try:
        args = parser.parse_args(list(argv))
    except UsageError as exc:
        err.write(f"qus: usage error: {exc}\n")
        return EXIT_USAGE
    except SystemExit as exc:   # --help / --version
        return EXIT_OK if not exc.code else EXIT_USAGE
    try:
        model = _load(args.file)
        report, code = COMMANDS[args.command](args, model)
    except UsageError as exc:
        err.write(f"qus: usage error: {exc}\n")
        return EXIT_USAGE
    except ParseError as exc:
        err.write(f"{args.file}:{exc.line}:{exc.col}: error: {exc.message}\n")
        return EXIT_INVALID
    except (InvalidInput, QusError) as exc:
        err.write(f"{args.file}: error: {exc}\n")
        return EXIT_INVALID
    except Exception as exc:  # an internal invariant broke
        err.write(f"qus: internal error: {type(exc).__name__}: {exc}\n")
        return EXIT_BREACH
    _emit(report, args.json, out)
    if code == EXIT_BREACH:
        err.write("qus: invariant breached\n")
    return code


def main(argv: Sequence[str] | None = None) -> int:
    return run_command(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())
