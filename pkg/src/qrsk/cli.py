"""Command-line front end.

Exit codes: 0 success (or every check passed), 1 a verification check
failed, 2 bad usage or invalid parameters.  Structured output is JSON with
floats printed to 17 significant digits; trajectories are CSV.
"""
from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import random
import sys
from concurrent.futures import ProcessPoolExecutor

from .growth import check_symmetry
from .insertion import qrsk_matrix
from .localmoves import (
    check_growth_independence, check_qrsk_equivalence, droplet_positions, png_csv, qpng_run,
)
from .measures import EnvParams, verify_lmpush, verify_qwhittaker_corollary
from .oracle import as_chooser
from .polymer import (
    check_qburke, expected_z, pushtasep_csv_rows, pushtasep_run, stationary_polymer,
)
from .qdist import check_qbinhyp, check_qhahn_to_qhyp, check_qhyp_identities
from .qkernel import DomainError, gamma_rate

IDENTITY_TOL = 1e-11


class UsageError(Exception):
    pass


# -- output helpers ----------------------------------------------------------

def _fmt(x) -> str:
    if isinstance(x, bool) or x is None:
        return json.dumps(x)
    if isinstance(x, float):
        if math.isnan(x) or math.isinf(x):
            return json.dumps(str(x))
        return format(x, ".17g")
    if isinstance(x, int):
        return str(x)
    if isinstance(x, str):
        return json.dumps(x)
    if isinstance(x, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_fmt(v)}" for k, v in x.items()) + "}"
    if isinstance(x, (list, tuple)):
        return "[" + ", ".join(_fmt(v) for v in x) + "]"
    if hasattr(x, "item"):
        return _fmt(x.item())
    raise TypeError(f"cannot serialize {type(x).__name__}")


def to_json(obj) -> str:
    """JSON text with every float written to 17 significant digits."""
    return _fmt(obj)


def _emit(text: str, out):
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([format(v, ".17g") if isinstance(v, float) else v for v in r])
    return buf.getvalue()


def _map(fn, items, jobs):
    items = list(items)
    if jobs and jobs > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            return list(ex.map(fn, items))
    return [fn(x) for x in items]


def _unit(name, x, closed_low=False):
    if not ((0 <= x if closed_low else 0 < x) and x < 1):
        raise UsageError(f"{name} must lie in {'[0' if closed_low else '(0'}, 1), got {x}")


def _config(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k != "func" and v is not None}


# -- qrsk --------------------------------------------------------------------

def cmd_qrsk(args) -> int:
    try:
        with open(args.matrix) as fh:
            A = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read matrix: {exc}")
    if not isinstance(A, list) or not all(isinstance(r, list) for r in A):
        raise UsageError("matrix must be a JSON 2d array")
    q = (args.q or [0.5])[0]
    _unit("q", q, closed_low=True)
    out = qrsk_matrix(A, q, args.seed, keep_evolution=False)
    report = {"config": _config(args), "p_pattern": [list(l) for l in out.p_pattern.levels],
              "q_pattern": [list(l) for l in out.q_pattern.levels],
              "shape": list(out.p_pattern.shape)}
    _emit(to_json(report), args.out)
    return 0


# -- verification suites -----------------------------------------------------

def _identity_tuple(seed):
    rnd = random.Random(seed)
    q = rnd.choice([i / 10 for i in range(10)])
    m1, m2 = rnd.randint(0, 8), rnd.randint(0, 8)
    k = rnd.randint(0, min(8, m1 + m2))
    a, b = rnd.randint(0, 8), rnd.randint(0, 8)
    c = rnd.randint(0, 8)
    if b < a:
        a, b = b, a
    c = min(c, b)
    dev = check_qhyp_identities(m1, m2, k, q)
    return {"q": q, "params": [m1, m2, k, a, b, c], "qhyp": dev.qhyp, "qhypinf": dev.qhypinf,
            "vandermonde": dev.vandermonde, "qbinhyp": check_qbinhyp(a, b, c, q) if q > 0 else 0.0,
            "qhahn": check_qhahn_to_qhyp(a, b, c, q)}


def suite_identities(args):
    rows = _map(_identity_tuple, range(args.seed, args.seed + args.reps), args.jobs)
    worst = max(max(r[k] for k in ("qhyp", "qhypinf", "vandermonde", "qbinhyp", "qhahn")) for r in rows)
    tol = args.tol if args.tol is not None else IDENTITY_TOL
    return {"tuples": len(rows), "max_deviation": worst, "tol": tol}, worst < tol


def _symmetry_case(case):
    A, q = case
    return {"matrix": A, "q": q, "tv": check_symmetry(A, q)}


def _binary_matrices(n, m):
    for bits in itertools.product((0, 1), repeat=n * m):
        yield [list(bits[i * m:(i + 1) * m]) for i in range(n)]


def suite_symmetry(args):
    qs = args.q or [0.0, 0.3, 0.7]
    for q in qs:
        _unit("q", q, closed_low=True)
    cases = [(A, q) for q in qs for A in _binary_matrices(*(args.size or [2, 2]))]
    checks = _map(_symmetry_case, cases, args.jobs)
    tol = args.tol if args.tol is not None else 1e-10
    worst = max(c["tv"] for c in checks)
    return {"checks": len(checks), "max_tv": worst, "tol": tol}, worst < tol


def suite_burke(args):
    alpha, beta = args.alpha, args.beta
    if alpha is None or beta is None:
        raise UsageError("burke needs --alpha and --beta")
    if alpha * beta >= 1 or not (0 < alpha < 1 and 0 < beta < 1):
        raise UsageError("burke needs alpha, beta in (0, 1), so alpha * beta < 1")
    checks = []
    for q in args.q or [0.5]:
        _unit("q", q, closed_low=True)
        r = check_qburke(alpha, beta, q, args.cap or 40)
        checks.append({"q": q, "tv": r.tv, "tail": r.tail, "xprime_tv": r.xprime_tv, "pass": r.ok})
    return {"alpha": alpha, "beta": beta, "checks": checks}, all(c["pass"] for c in checks)


def suite_localmoves(args):
    q = (args.q or [0.5])[0]
    _unit("q", q, closed_low=True)
    checks = []
    for rows in [(1,), (2, 1), (2, 2)]:
        n, m = len(rows), rows[0]
        worst = 0.0
        for A in _binary_matrices(n, m):
            if any(A[i][j] for i in range(n) for j in range(m) if j >= rows[i]):
                continue
            worst = max(worst, check_qrsk_equivalence(rows, A, q))
        checks.append({"shape": list(rows), "max_tv": worst})
    checks.append({"shape": [2, 2], "growth_sequences_tv": check_growth_independence((2, 2), [[1, 0], [1, 1]], q)})
    tol = args.tol if args.tol is not None else 1e-10
    ok = all(c.get("max_tv", c.get("growth_sequences_tv")) < tol for c in checks)
    return {"q": q, "checks": checks, "tol": tol}, ok


def _env(args, n, m):
    alpha = args.alpha_vec or [0.3] * m
    alpha_hat = args.alphahat_vec or [0.3] * n
    return EnvParams(alpha, alpha_hat)


def suite_lmpush(args):
    q = (args.q or [0.5])[0]
    _unit("q", q, closed_low=True)
    checks = []
    for rows, cap in [((1,), 5), ((2, 1), 4), ((1, 1), 5)]:
        env = _env(args, len(rows), rows[0])
        r = verify_lmpush(rows, env, q, args.cap or cap)
        checks.append({"shape": list(rows), "tv": r.tv, "tail": r.tail,
                       "exponent_violations": r.exponent_violations, "pass": r.ok})
    return {"q": q, "checks": checks}, all(c["pass"] for c in checks)


def suite_whittaker(args):
    q = (args.q or [0.5])[0]
    _unit("q", q, closed_low=True)
    n, m = args.size or [2, 2]
    env = EnvParams(args.alpha_vec or [0.3, 0.2, 0.25][:m], args.alphahat_vec or [0.3, 0.2, 0.35][:n])
    r = verify_qwhittaker_corollary(n, m, env, q, args.cap or 6)
    tol = args.tol if args.tol is not None else 1e-9
    return {"n": n, "m": m, "q": q, "deviation": r.deviation, "worst": list(r.worst),
            "checked": r.checked, "tol": tol}, r.deviation < tol


SUITES = {
    "identities": suite_identities, "symmetry": suite_symmetry, "burke": suite_burke,
    "localmoves": suite_localmoves, "lmpush": suite_lmpush, "whittaker": suite_whittaker,
}


def cmd_verify(args) -> int:
    report, ok = SUITES[args.suite](args)
    report = {"suite": args.suite, "config": _config(args), "pass": ok, **report}
    _emit(to_json(report), args.out)
    return 0 if ok else 1


# -- simulations -------------------------------------------------------------

def _alpha_beta(args):
    alpha = 0.3 if args.alpha is None else args.alpha
    beta = 0.3 if args.beta is None else args.beta
    _unit("alpha", alpha)
    _unit("beta", beta)
    return alpha, beta


def cmd_polymer(args) -> int:
    alpha, beta = _alpha_beta(args)
    q = (args.q or [0.5])[0]
    _unit("q", q, closed_low=True)
    N, M = (args.size + args.size)[:2] if args.size else (10, 10)
    if N < 0 or M < 0:
        raise UsageError("size must be nonnegative")
    field_ = stationary_polymer(N, M, alpha, beta, q, args.seed)
    if args.format == "csv":
        _emit(_csv(["l", "j", "Z"], field_.csv_rows()), args.out)
    else:
        _emit(to_json({"config": _config(args), "Z": field_.z[(N, M)],
                       "predicted_mean": expected_z(N, M, alpha, beta, q),
                       "gamma_alpha": gamma_rate(alpha, q), "gamma_beta": gamma_rate(beta, q)}), args.out)
    return 0


def cmd_pushtasep(args) -> int:
    alpha, beta = _alpha_beta(args)
    q = (args.q or [0.5])[0]
    _unit("q", q, closed_low=True)
    M, T = (args.size + args.size)[:2] if args.size else (5, 10)
    if M < 0 or T < 0:
        raise UsageError("size must be nonnegative")
    states = pushtasep_run(M, T, alpha, beta, q, args.seed)
    if args.format == "csv":
        _emit(_csv(["time", "particle", "position"], pushtasep_csv_rows(states)), args.out)
    else:
        last = states[-1]
        _emit(to_json({"config": _config(args), "positions": list(last.xi),
                       "predicted_mean": [expected_z(T, m, alpha, beta, q) + m for m in range(M + 1)]}),
              args.out)
    return 0


def cmd_png(args) -> int:
    q = (args.q or [0.0])[0]
    _unit("q", q, closed_low=True)
    p = args.size[0] if args.size else 3
    if p < 0:
        raise UsageError("size must be nonnegative")
    ch = as_chooser(args.seed)
    if args.droplets == "unit":
        seq = [{k: 1 for k in droplet_positions(m)} for m in range(1, p + 1)]
    else:
        rate = 0.3 if args.alpha is None else args.alpha
        _unit("alpha", rate)
        seq = [{k: ch.qgeom(rate, q) for k in droplet_positions(m)} for m in range(1, p + 1)]
    states = qpng_run(seq, q, ch)
    if args.format == "csv":
        _emit(png_csv(states), args.out)
    else:
        _emit(to_json({"config": _config(args),
                       "heights": {f"{lv},{k}": h for (lv, k), h in sorted(states[-1].heights().items())}}),
              args.out)
    return 0


# -- parser ------------------------------------------------------------------

def _floats(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _ints(text):
    try:
        return [int(x) for x in text.replace("x", ",").split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected integers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--q", type=_floats, help="deformation parameter(s), comma separated")
    common.add_argument("--alpha", type=float)
    common.add_argument("--beta", type=float)
    common.add_argument("--alpha-vec", type=_floats)
    common.add_argument("--alphahat-vec", type=_floats)
    common.add_argument("--size", type=_ints, help="e.g. 20 or 20,30")
    common.add_argument("--cap", type=int)
    common.add_argument("--tol", type=float)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--reps", type=int, default=500)
    common.add_argument("--jobs", type=int, default=1)
    common.add_argument("--out")
    common.add_argument("--format", choices=["json", "csv"], default="json")

    ap = argparse.ArgumentParser(prog="qrsk", description="q-deformed RSK, local moves and polymers")
    sub = ap.add_subparsers(dest="command", required=True)
    p = sub.add_parser("qrsk", parents=[common], help="run qRSK on a matrix file")
    p.add_argument("matrix")
    p.set_defaults(func=cmd_qrsk)
    p = sub.add_parser("verify", parents=[common], help="run a verification suite")
    p.add_argument("suite", choices=sorted(SUITES))
    p.set_defaults(func=cmd_verify)
    p = sub.add_parser("polymer", parents=[common], help="stationary q-polymer")
    p.set_defaults(func=cmd_polymer)
    p = sub.add_parser("pushtasep", parents=[common], help="stationary q-pushTASEP")
    p.set_defaults(func=cmd_pushtasep)
    p = sub.add_parser("png", parents=[common], help="q-PNG heights")
    p.add_argument("--droplets", choices=["unit", "geom"], default="geom")
    p.set_defaults(func=cmd_png)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 2
    try:
        return args.func(args)
    except (UsageError, DomainError, ValueError) as exc:
        sys.stderr.write(f"qrsk: error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
