"""Command-line front end: lemma sweeps, protocol runs, binding and key-recovery experiments.

Exit codes: 0 every check passed, 1 a checked inequality or identity failed,
2 bad input, 3 malformed strategy.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import os
import subprocess
import sys
from functools import lru_cache

from . import __version__
from .adversary import (
    BUILTIN,
    CheatStrategy,
    MalformedStrategy,
    binding_report,
    builtin,
    claim1_factor,
    hpsp_solve,
    hpsp_sweep,
    mean_success,
    norm_sq_term,
    normalize_strategy,
    t_value,
)
from .gates import GateTargetError, NonUnitaryError
from .hilbert import ATOL, PRUNE_TOL
from .lemmas import verify_all
from .perm import InvalidSecurityParameter, check_security_param, enumerate_keys
from .protocol import alice_commit, alice_open, bob_verify

SCHEMA = "permcommit-report/1"
EXIT_OK, EXIT_FAILED, EXIT_BAD_INPUT, EXIT_MALFORMED = 0, 1, 2, 3
LEMMA_SIZES = (2, 6)


class BadInput(ValueError):
    pass


@lru_cache(maxsize=1)
def git_describe() -> str:
    here = os.path.dirname(os.path.abspath(__file__))
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty", "--tags"],
            cwd=here,
            capture_output=True,
            text=True,
            timeout=10,
        )
    except (OSError, subprocess.SubprocessError):
        return "unknown"
    return out.stdout.strip() if out.returncode == 0 and out.stdout.strip() else "unknown"


def envelope(command: str, params: dict, result: dict, status: str) -> dict:
    return {
        "schema": SCHEMA,
        "command": command,
        "version": __version__,
        "git": git_describe(),
        "tolerances": {"atol": ATOL, "prune": PRUNE_TOL},
        "params": params,
        "status": status,
        "result": result,
    }


def dump(report: dict, path: str | None, stdout=None) -> None:
    text = json.dumps(report, indent=2) + "\n"
    if path == "-":
        (stdout or sys.stdout).write(text)
    elif path:
        with open(path, "w") as fh:
            fh.write(text)


def _status(ok: bool) -> str:
    return "pass" if ok else "fail"


def _n(value: int) -> int:
    try:
        check_security_param(value)
    except InvalidSecurityParameter as exc:
        raise BadInput(str(exc)) from exc
    return value


def load_strategy(source: str, n: int) -> CheatStrategy:
    if source in BUILTIN:
        try:
            return builtin(source, n)
        except ValueError as exc:
            raise BadInput(str(exc)) from exc
    if not os.path.exists(source):
        raise BadInput(f"{source!r} is neither a bundled strategy ({', '.join(BUILTIN)}) nor a file")
    try:
        return CheatStrategy.load(source, n)
    except (NonUnitaryError, GateTargetError, KeyError) as exc:
        raise MalformedStrategy(str(exc)) from exc


# -- commands ---------------------------------------------------------------------

def cmd_verify_lemmas(args) -> int:
    n = _n(args.n)
    if n not in LEMMA_SIZES:
        raise BadInput(f"lemma sweeps run at n in {LEMMA_SIZES}, got {n}")
    if args.samples < 1:
        raise BadInput("--samples must be at least 1")
    checks = verify_all(n, args.samples, args.seed)
    ok = all(c.passed is not False for c in checks)
    for c in checks:
        mark = "skip" if c.passed is None else _status(c.passed)
        print(f"{mark:4}  {c.name:28} cases={c.cases:<6} max_dev={c.max_deviation:.3e}")
    dump(envelope("verify-lemmas", {"n": n, "samples": args.samples, "seed": args.seed},
                  {"checks": [c.to_json() for c in checks]}, _status(ok)), args.json, args.stdout)
    return EXIT_OK if ok else EXIT_FAILED


def cmd_simulate(args) -> int:
    n = _n(args.n)
    keys = enumerate_keys(n)
    if not 0 <= args.key_index < len(keys):
        raise BadInput(f"--key-index must lie in [0, {len(keys)}) at n={n}")
    if args.bit not in (0, 1):
        raise BadInput("--bit must be 0 or 1")
    pi = keys[args.key_index]
    t = alice_open(alice_commit(n, args.bit, pi))
    res = bob_verify(t, args.mode, args.seed)
    ledger = t.cost_ledger()
    print(f"key {pi}  bit {args.bit}  mode {args.mode}")
    for tr in ledger["transfers"]:
        print(f"  {tr['step']:3} {tr['register']:7} {tr['from']} -> {tr['to']}  {tr['qubits']} qubits")
    print(f"opening qubits {ledger['opening_qubits']}, total {ledger['total_qubits']}")
    print(f"verdict {res.verdict} (probability {res.probability:.12g})")
    ok = res.verdict == f"Accept({args.bit})"
    params = {"n": n, "bit": args.bit, "key_index": args.key_index, "mode": args.mode,
              "seed": args.seed if args.mode == "sample" else None}
    result = {"key": pi.to_json(), "verdict": res.to_json(), "path": [list(p) for p in res.path],
              "transcript": t.to_json()}
    dump(envelope("simulate", params, result, _status(ok)), args.json, args.stdout)
    return EXIT_OK if ok else EXIT_FAILED


def cmd_binding(args) -> int:
    n = _n(args.n)
    s = load_strategy(args.strategy, n)
    rep = binding_report(s, jobs=args.jobs)
    d = rep.to_json()
    for k in ("T0", "T1", "excess", "normSq", "claim1_bound", "claim2_bound", "hpsp_success"):
        print(f"{k:14} {d[k]:.12g}")
    for k, v in d["flags"].items():
        print(f"{k:20} {'n/a' if v is None else _status(v)}")
    dump(envelope("binding", {"n": n, "strategy": args.strategy}, d, _status(rep.passed())), args.json, args.stdout)
    return EXIT_OK if rep.passed() else EXIT_FAILED


def cmd_hpsp(args) -> int:
    n = _n(args.n)
    s = normalize_strategy(load_strategy(args.strategy, n))
    keys = enumerate_keys(n)
    if args.key_index is not None and not 0 <= args.key_index < len(keys):
        raise BadInput(f"--key-index must lie in [0, {len(keys)}) at n={n}")
    t0, t1 = t_value(s, 0), t_value(s, 1)
    excess = t0 + t1 - 1
    applies = excess > ATOL
    if t1 <= 0:
        results = []
    elif args.key_index is None:
        results = hpsp_sweep(s, keys, args.jobs)
    else:
        results = [hpsp_solve(s, keys[args.key_index])]
    ns = norm_sq_term(s) if t1 > 0 else 0.0
    c1 = claim1_factor(n) * ns
    per_key = []
    for r in results:
        row = r.to_json()
        row["claim1_holds"] = (r.success >= c1 - ATOL) if applies else None
        per_key.append(row)
        print(f"{r.pi_prime}  success {r.success:.12g}")
    result = {"T0": t0, "T1": t1, "excess": excess, "normSq": ns, "claim1_bound": c1, "per_key": per_key}
    ok = True
    if args.key_index is None:
        mean = mean_success(results) if results else 0.0
        eps = max(excess, 0.0)
        composed = eps**2 * claim1_factor(n) / 4
        result.update({"mean_success": mean, "composed_bound": composed,
                       "composed_holds": (mean >= composed - ATOL) if applies else None})
        print(f"mean success {mean:.12g}  composed bound {composed:.12g}"
              + ("" if applies else "  (no excess, bound vacuous)"))
        ok = result["composed_holds"] is not False
    dump(envelope("hpsp", {"n": n, "strategy": args.strategy, "key_index": args.key_index}, result,
                  _status(ok)), args.json, args.stdout)
    return EXIT_OK if ok else EXIT_FAILED


# -- parser ------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="permcommit", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, strategy=False):
        sp.add_argument("--n", type=int, default=6, help="security parameter, n = 2 mod 4 (default 6)")
        sp.add_argument("--json", metavar="PATH", help="write the JSON report here ('-' for stdout)")
        if strategy:
            sp.add_argument("--strategy", default="key-swap", help=f"bundled name ({', '.join(BUILTIN)}) or JSON file")
            sp.add_argument("--jobs", type=int, default=1, help="worker threads for the per-key sweep")

    sp = sub.add_parser("verify-lemmas", help="check the overlap identities and ensemble structure")
    common(sp)
    sp.add_argument("--samples", type=int, default=10_000)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_verify_lemmas)

    sp = sub.add_parser("simulate", help="run the honest protocol once")
    common(sp)
    sp.add_argument("--bit", type=int, default=0)
    sp.add_argument("--key-index", type=int, default=0)
    sp.add_argument("--mode", choices=("analysis", "sample"), default="analysis")
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("binding", help="success probabilities of a cheating strategy and the bounds on them")
    common(sp, strategy=True)
    sp.set_defaults(func=cmd_binding)

    sp = sub.add_parser("hpsp", help="key recovery built from a cheating strategy")
    common(sp, strategy=True)
    sp.add_argument("--key-index", type=int, default=None, help="hidden key (default: all keys)")
    sp.set_defaults(func=cmd_hpsp)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    # with the report on stdout, the human-readable table moves to stderr
    args.stdout = sys.stdout
    quiet = args.json == "-"
    try:
        with contextlib.redirect_stdout(sys.stderr) if quiet else contextlib.nullcontext():
            return args.func(args)
    except BadInput as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except (MalformedStrategy, NonUnitaryError) as exc:
        print(f"malformed strategy: {exc}", file=sys.stderr)
        return EXIT_MALFORMED


if __name__ == "__main__":
    sys.exit(main())
