"""Command-line entry point ``tailtrees``.

Exit codes: 0 success, 1 configuration error, 2 violated precondition,
3 numerical failure or a failed ``verify`` check.
"""

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import tail_measure as tm
from .config import load_model_file, read_json
from .errors import ConfigError, PreconditionError, TailTreeError
from .increments import Empirical
from .maxlinear import maxlinear_tail_law, theta_moment_ml
from .simulate import MarkovTreeSampler, compare_distributions, empirical_tail_tree, sample_markov_tree
from .tail_tree import (
    build_tail_tree,
    change_root,
    exact_tail_tree_discrete,
    law_difference,
    root_change_expectation,
    root_change_law,
    sample_discrete_law,
    sample_tail_tree,
    theta_alpha_moment,
)

EXIT_VERIFY_FAILED = 3


# --------------------------------------------------------------------------
# helpers
# --------------------------------------------------------------------------

def _default_root(cfg, args):
    if args.root is not None:
        root = str(args.root)
        if root not in cfg.nodes:
            raise ConfigError(f"unknown root {root!r}")
        return root
    c = cfg.constants
    return next(v for v in cfg.nodes if v in c)


def _exact_law(cfg, root):
    """Exact law of Theta_root, or None when it cannot be enumerated."""
    if cfg.kind != "markov_tree":
        return maxlinear_tail_law(cfg.model, cfg.model.index(root))
    try:
        return exact_tail_tree_discrete(build_tail_tree(cfg.model, root))
    except PreconditionError as exc:
        if exc.condition in ("discrete increments", "state-space bound"):
            return None
        raise


def _source(cfg, root, args):
    law = _exact_law(cfg, root)
    if law is not None:
        return tm.ThetaSource(law, root, cfg.constants, cfg.model.alpha)
    return tm.ThetaSource.from_tail_tree(build_tail_tree(cfg.model, root), args.n, args.seed, args.threads)


def _json(obj):
    return json.dumps(obj, indent=2) + "\n"


def _matrix_text(sm, fmt, extra=None):
    if fmt == "json":
        doc = {"nodes": list(sm.nodes), "rows": sm.values.tolist()}
        doc.update(extra or {})
        return _json(doc)
    return sm.to_csv()


def _law_text(law, fmt):
    if fmt == "csv":
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(list(law.nodes) + ["p"])
        for a, p in zip(law.atoms, law.probs):
            w.writerow([repr(float(x)) for x in a] + [repr(float(p))])
        return out.getvalue()
    return _json({"nodes": list(law.nodes), "atoms": law.to_records()})


def _emit(text, args):
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _check(metric, value, threshold, ok):
    return {"metric": metric, "value": float(value), "threshold": float(threshold), "pass": bool(ok)}


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------

def cmd_validate(cfg, args):
    if args.root is not None:
        _default_root(cfg, args)
    report = {"valid": True, "kind": cfg.kind, "nodes": list(cfg.nodes), "constants": cfg.constants}
    if cfg.kind == "markov_tree":
        m = cfg.model
        edges = []
        for a, b in sorted(tuple(sorted(e)) for e in m.tree.edges):
            for x, y in ((a, b), (b, a)):
                entry = {"from": x, "to": y, "stored": (x, y) in m.stored}
                if (x, y) in m.stored or (x in m.c and y in m.c):
                    inc = m.increment(x, y)
                    entry["law"] = repr(inc)
                    entry["alpha_moment"] = float(inc.moment(m.alpha))
                    if x in m.c and y in m.c:
                        entry["c_ratio"] = m.c[y] / m.c[x]
                edges.append(entry)
        report["edges"] = edges
    else:
        report["coeff"] = cfg.model.coeff.tolist()
    return _json(report), 0


def cmd_tailtree(cfg, args):
    root = _default_root(cfg, args)
    if args.action == "exact":
        law = _exact_law(cfg, root)
        if law is None:
            raise PreconditionError("tail tree has non-discrete increments", condition="discrete increments")
        return _law_text(law, args.format or "json"), 0
    if cfg.kind == "markov_tree":
        sm = sample_tail_tree(build_tail_tree(cfg.model, root), args.n, args.seed, args.threads)
    else:
        sm = sample_discrete_law(_exact_law(cfg, root), args.n, args.seed, args.threads)
    return _matrix_text(sm, args.format or "csv"), 0


def _moment_check(cfg, u, v, args):
    """Means of Theta_v: direct draws versus reweighted draws of Theta_u."""
    tt_u = build_tail_tree(cfg.model, u)
    tt_v = build_tail_tree(cfg.model, v)
    su = sample_tail_tree(tt_u, args.n, args.seed, args.threads)
    sv = sample_tail_tree(tt_v, args.n, args.seed + 1, args.threads)
    return _mean_checks("mean", su, sv, u, v, cfg.model.alpha)


def _mean_checks(label, theta_u, theta_v, u, v, alpha):
    """Componentwise means of ``theta_v`` against the reweighted ``theta_u``, within 3 combined SEs.

    A floor of ``1e-12`` keeps deterministic components (``Theta_{v,v} = 1``)
    from failing on rounding.
    """
    pred, pred_se = root_change_expectation(theta_u, u, v, lambda th: th, alpha, return_se=True)
    direct = theta_v.values.mean(axis=0)
    direct_se = theta_v.values.std(axis=0, ddof=1) / math.sqrt(len(theta_v))
    rows = []
    for k, node in enumerate(theta_u.nodes):
        bound = 3 * math.hypot(pred_se[k], direct_se[k]) + 1e-12 * max(1.0, abs(direct[k]))
        diff = abs(pred[k] - direct[k])
        rows.append(_check(f"{label} Theta[{v},{node}]", diff, bound, diff <= bound))
    return rows


def cmd_root_change(cfg, args):
    u = _default_root(cfg, args)
    if args.to is None:
        raise ConfigError("root-change needs --to")
    ubar = str(args.to)
    if ubar not in cfg.nodes:
        raise ConfigError(f"unknown node {ubar!r}")
    report = {"from": u, "to": ubar}
    alpha = cfg.model.alpha
    c = cfg.constants
    if cfg.kind == "markov_tree":
        tt = change_root(cfg.model, u, ubar)
        report["edges"] = [{"from": a, "to": b, "law": repr(tt.increments[(a, b)])} for a, b in tt.rooted.directed_edges]
        moment = theta_alpha_moment(build_tail_tree(cfg.model, u), ubar)
    else:
        moment = theta_moment_ml(cfg.model, cfg.model.index(u), cfg.model.index(ubar))[0]
    target = c[ubar] / c[u]
    flag = abs(moment - target) <= tm.EXACT_TOL * max(1.0, target)
    report["alpha_moment"] = moment
    report["c_ratio"] = target
    report["reweighting_applies"] = bool(flag)
    checks = []
    if flag:
        law_u = _exact_law(cfg, u)
        if law_u is not None:
            law_v = _exact_law(cfg, ubar)
            diff = law_difference(root_change_law(law_u, ubar, alpha), law_v)
            checks.append(_check("atomwise probability difference", diff, 1e-12, diff <= 1e-12))
        else:
            checks.extend(_moment_check(cfg, u, ubar, args))
    report["checks"] = checks
    ok = all(ch["pass"] for ch in checks)
    report["pass"] = ok
    return _json(report), 0 if ok else EXIT_VERIFY_FAILED


def _query_root(cfg, args, query):
    if args.root is not None or "i" not in query:
        if args.root is None and "J" in query:
            c = cfg.constants
            inside = [str(j) for j in query["J"] if str(j) in c]
            if inside:
                return inside[0]
        return _default_root(cfg, args)
    root = str(query["i"])
    if root not in cfg.nodes:
        raise ConfigError(f"unknown query node {root!r}")
    return root


def cmd_nu(cfg, args, force_kind=None):
    if args.query is None:
        raise ConfigError("--query is required")
    query = read_json(args.query)
    if not isinstance(query, dict):
        raise ConfigError("query must be a JSON object")
    if force_kind is not None:
        query = dict(query, kind=force_kind)
    root = _query_root(cfg, args, query)
    est = tm.evaluate_query(_source(cfg, root, args), query)
    return _json(est.as_dict()), 0


def _sampler(cfg, args):
    root = _default_root(cfg, args)
    return MarkovTreeSampler(cfg.model.tree, root, cfg.simulation_pickands())


def cmd_simulate(cfg, args):
    sampler = _sampler(cfg, args)
    X = sample_markov_tree(sampler, args.n, args.seed, args.threads)
    if args.quantile is None:
        return _matrix_text(X, args.format or "csv"), 0
    ex = empirical_tail_tree(X, sampler.root, args.quantile)
    return _matrix_text(ex.theta, args.format or "csv", {"threshold": ex.threshold, "count": ex.count}), 0


def _verify_markov(cfg, args):
    checks = []
    sampler = _sampler(cfg, args)
    u = sampler.root
    q = 0.99 if args.quantile is None else args.quantile
    X = sample_markov_tree(sampler, args.n, args.seed, args.threads)
    ex = empirical_tail_tree(X, u, q)
    tt = build_tail_tree(cfg.model, u)
    law = _exact_law(cfg, u)
    m = ex.count
    ref_n = max(10 * m, 10000)
    ref = None if law is not None else sample_tail_tree(tt, ref_n, args.seed + 1, args.threads)
    targets = list(cfg.K) or [v for v in cfg.nodes if v != u]
    for v in targets:
        if v == u:
            continue
        if law is not None:
            reference, bound = law.marginal(v), 1.63 / math.sqrt(m)
        else:
            reference, bound = Empirical(ref.column(v)), 1.63 * math.sqrt(1.0 / m + 1.0 / ref_n)
        ks = compare_distributions(ex.theta.column(v), reference)["ks"]
        checks.append(_check(f"ks Theta[{u},{v}]", ks, bound, ks <= bound))
    # root change at simulation level
    c = cfg.constants
    for v in targets:
        if v == u or v not in c:
            continue
        if abs(theta_alpha_moment(tt, v) - c[v] / c[u]) > tm.EXACT_TOL:
            continue
        ex_v = empirical_tail_tree(X, v, q)
        checks.extend(_mean_checks("root change mean", ex.theta, ex_v.theta, u, v, cfg.model.alpha))
    return checks


def _verify_maxlinear(cfg):
    ml = cfg.model
    checks = []
    laws = [maxlinear_tail_law(ml, i) for i in range(ml.d)]
    for i in range(ml.d):
        for j in range(ml.d):
            if i == j:
                continue
            mom, flag = theta_moment_ml(ml, i, j)
            zero = float(laws[j].probs[laws[j].atoms[:, i] == 0].sum())
            ok = flag == (zero == 0)
            checks.append(_check(f"zero-mass dichotomy [{ml.nodes[i]},{ml.nodes[j]}]", zero, 0.0, ok))
            if flag:
                diff = law_difference(root_change_law(laws[i], ml.nodes[j], ml.alpha), laws[j])
                checks.append(_check(f"root change [{ml.nodes[i]}->{ml.nodes[j]}]", diff, 1e-12, diff <= 1e-12))
    c = cfg.constants
    sources = [tm.ThetaSource(laws[i], ml.nodes[i], c, ml.alpha) for i in range(ml.d)]
    rep = tm.consistency_check(sources, list(ml.nodes), np.ones(ml.d))
    checks.append(_check("model consistency (orthant, y = 1)", rep.max_discrepancy, 1e-9, rep.ok))
    return checks


def cmd_verify(cfg, args):
    checks = _verify_markov(cfg, args) if cfg.kind == "markov_tree" else _verify_maxlinear(cfg)
    ok = all(ch["pass"] for ch in checks)
    return _json({"checks": checks, "pass": ok}), 0 if ok else EXIT_VERIFY_FAILED


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------

def _common(p):
    p.add_argument("--model", required=True, help="model config (JSON)")
    p.add_argument("--root", help="conditioning / sampling root node id")
    p.add_argument("--n", type=int, default=100000, help="sample size (default 100000)")
    p.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    p.add_argument("--out", help="output file (default stdout)")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--quantile", type=float, help="conditioning quantile q in (0, 1)")
    p.add_argument("--threads", type=int, default=1, help="worker threads; never changes results")


def build_parser():
    parser = argparse.ArgumentParser(prog="tailtrees", description="Tail trees of regularly varying Markov trees.")
    sub = parser.add_subparsers(dest="command", required=True)
    _common(sub.add_parser("validate", help="schema and invariant checks"))
    p = sub.add_parser("tailtree", help="sample or enumerate a tail tree")
    p.add_argument("action", choices=("sample", "exact"))
    _common(p)
    p = sub.add_parser("root-change", help="change the root and cross-check by reweighting")
    _common(p)
    p.add_argument("--to", help="new root")
    for name in ("nu", "mpd"):
        p = sub.add_parser(name, help="tail-measure query" if name == "nu" else "multivariate Pareto probability")
        _common(p)
        p.add_argument("--query", help="query (JSON)")
    _common(sub.add_parser("simulate", help="simulate the Markov tree (unit Frechet margins)"))
    _common(sub.add_parser("verify", help="run verification checks, JSON pass/fail report"))
    return parser


COMMANDS = {
    "validate": cmd_validate,
    "tailtree": cmd_tailtree,
    "root-change": cmd_root_change,
    "nu": cmd_nu,
    "mpd": lambda cfg, args: cmd_nu(cfg, args, force_kind="mpd"),
    "simulate": cmd_simulate,
    "verify": cmd_verify,
}


def run(argv=None):
    """Run the command line and return the exit code."""
    args = build_parser().parse_args(argv)
    try:
        if args.n < 1:
            raise ConfigError(f"--n must be >= 1, got {args.n}")
        cfg = load_model_file(args.model)
        text, code = COMMANDS[args.command](cfg, args)
    except TailTreeError as exc:
        cond = getattr(exc, "condition", None)
        tail = f" [violated: {cond}]" if cond else ""
        print(f"tailtrees {args.command}: {type(exc).__name__}: {exc}{tail}", file=sys.stderr)
        return exc.exit_code
    _emit(text, args)
    return code


def main():
    sys.exit(run())
