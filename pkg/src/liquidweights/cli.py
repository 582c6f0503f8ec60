"""Command-line front end.

Instance files are JSON objects::

    {"accuracies": [0.9, 0.9, 0.6],          # required, n numbers in [0.5, 1]
     "delegation": [[1, 0, 0], ...],          # optional n x n row-stochastic
     "network": [[0, 1], [2, 0]],             # optional edge list, absent = complete
     "utilities": [[...], ...],               # optional n x n, default u[i][j] = accuracies[j]
     "description": "free text"}              # optional, ignored

Agents are numbered from 0.  Reports go to stdout, diagnostics to stderr.
Exit codes: 0 success, 1 bad input or usage, 2 resource guard tripped.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import re
import sys
import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import accuracy, games, model, optimal, shares
from .errors import DomainError, InvalidInstance, ResourceGuard

ENV_CAP = "LIQUIDWEIGHTS_CAP"
ENV_TOL = "LIQUIDWEIGHTS_TOL"
ENV_MAX_ITER = "LIQUIDWEIGHTS_MAX_ITER"
FIELDS = ("accuracies", "delegation", "network", "utilities", "description")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


# ---------------------------------------------------------------------------
# instances


@dataclass(frozen=True)
class Instance:
    q: np.ndarray
    delegation: Optional[model.WeightedProfile]
    network: Optional[model.Network]
    utilities: np.ndarray
    digest: str

    @property
    def n(self) -> int:
        return self.q.size

    @property
    def is_gd(self) -> bool:
        return games.is_gd(self.utilities) and np.array_equal(self.utilities[0], self.q)

    def profile(self) -> model.WeightedProfile:
        if self.delegation is None:
            raise InvalidInstance("this command needs a 'delegation' field in the instance")
        return self.delegation


def _field_line(text: str, name: str) -> str:
    m = re.search(rf'"{name}"\s*:', text)
    return f"line {text.count(chr(10), 0, m.start()) + 1}, " if m else ""


def _matrix(raw, name: str, n: int) -> np.ndarray:
    try:
        a = np.array(raw, dtype=float)
    except (TypeError, ValueError):
        raise InvalidInstance(f"field '{name}': expected an {n} x {n} array of numbers") from None
    if a.shape != (n, n):
        raise InvalidInstance(f"field '{name}': expected shape ({n}, {n}), got {a.shape}")
    return a


def parse_instance(text: str, source: str = "<instance>") -> Instance:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise InvalidInstance(f"{source}: line {e.lineno}, column {e.colno}: {e.msg}") from None
    if not isinstance(data, dict):
        raise InvalidInstance(f"{source}: top level must be an object with an 'accuracies' field")
    unknown = sorted(set(data) - set(FIELDS))
    if unknown:
        raise InvalidInstance(f"{source}: {_field_line(text, unknown[0])}unknown field '{unknown[0]}'")
    current = "accuracies"
    try:
        if "accuracies" not in data:
            raise InvalidInstance("missing required field")
        raw_q = data["accuracies"]
        if not isinstance(raw_q, list) or not all(isinstance(x, (int, float)) and not isinstance(x, bool)
                                                   for x in raw_q):
            raise InvalidInstance("expected an array of numbers")
        q = model.accuracies(raw_q)
        n = q.size
        network = None
        if data.get("network") is not None:
            current = "network"
            edges = data["network"]
            if not isinstance(edges, list) or not all(isinstance(e, list) and len(e) == 2 for e in edges):
                raise InvalidInstance("expected an array of [i, j] pairs")
            if not all(isinstance(x, int) and not isinstance(x, bool) for e in edges for x in e):
                raise InvalidInstance("edge endpoints must be integers")
            network = model.Network(n, frozenset(map(tuple, edges)))
        delegation = None
        if data.get("delegation") is not None:
            current = "delegation"
            delegation = model.WeightedProfile(_matrix(data["delegation"], "delegation", n), network)
        current = "utilities"
        if data.get("utilities") is not None:
            u = _matrix(data["utilities"], "utilities", n)
            if not np.all(np.isfinite(u)):
                raise InvalidInstance("entries must be finite")
        else:
            u = games.gd_utilities(q)
    except InvalidInstance as e:
        msg = str(e)
        if not msg.startswith("field"):
            msg = f"field '{current}': {msg}"
        raise InvalidInstance(f"{source}: {_field_line(text, current)}{msg}") from None
    canonical = json.dumps({k: data.get(k) for k in FIELDS[:4]}, sort_keys=True, separators=(",", ":"))
    digest = hashlib.sha256(canonical.encode()).hexdigest()
    return Instance(q, delegation, network, u, digest)


def load_instance(path: str) -> Instance:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise InvalidInstance(f"cannot read instance {path}: {e.strerror}") from None
    return parse_instance(text, path)


# ---------------------------------------------------------------------------
# commands


def _weights_method(args) -> str:
    return "paths" if args.paths else "exact"


def cmd_accuracy(inst: Instance, args) -> dict:
    D = inst.delegation or model.WeightedProfile.identity(inst.n)
    w = model.expected_weights(D, method=_weights_method(args), cap=args.cap)
    if args.mc:
        rep = accuracy.group_accuracy_mc(inst.q, w, args.samples, args.seed, tie_rule=args.tie_rule)
    else:
        rep = accuracy.group_accuracy(inst.q, w, tie_rule=args.tie_rule)
    out = {
        "value": rep.value,
        "method": rep.method,
        "guru_count": rep.guru_count,
        "standard_error": rep.standard_error,
        "winning_coalition_count": rep.winning_coalition_count,
        "weights": w,
        "tie_rule": args.tie_rule,
    }
    if args.diagnostic:
        out["non_canonical_realized_profile_accuracy"] = accuracy.realized_profile_accuracy(
            inst.q, D, tie_rule=args.tie_rule, cap=args.cap)
    return out


def cmd_weights(inst: Instance, args) -> dict:
    D = inst.delegation or model.WeightedProfile.identity(inst.n)
    if args.mc:
        mean, se = model.sample_weights(D, args.samples, args.seed)
        return {"weights": mean, "standard_error": se, "method": "sample"}
    w = model.expected_weights(D, method=_weights_method(args), cap=args.cap)
    return {"weights": w, "method": _weights_method(args), "gurus": np.flatnonzero(w > 0)}


def cmd_optimal(inst: Instance, args) -> dict:
    ow = optimal.optimal_weights(inst.q, clamp=args.clamp)
    D = optimal.algorithm1(inst.q, clamp=args.clamp)
    value = accuracy.group_accuracy(inst.q, ow.w_star, tie_rule=args.tie_rule).value
    out = {
        "w_star": ow.w_star,
        "N1": sorted(ow.N1),
        "N2": sorted(ow.N2),
        "delegation": D.D,
        "accuracy": value,
        "pure_baseline": None,
    }
    if inst.n <= optimal.MAX_PURE_N:
        pure = optimal.best_pure_accuracy(inst.q, tie_rule=args.tie_rule)
        out["pure_baseline"] = {"accuracy": pure.value, "profile": pure.profile}
    return out


def cmd_optimal_pure(inst: Instance, args) -> dict:
    pure = optimal.best_pure_accuracy(inst.q, tie_rule=args.tie_rule)
    return {"accuracy": pure.value, "weights": pure.weights, "profile": pure.profile,
            "delegation": model.WeightedProfile.from_pure(pure.profile).D}


def _outcome(o: games.GameOutcome) -> dict:
    v = o.violation
    if v is not None:
        v = {"agent": v[0], "deviation": v[1], "gain": v[2]}
    return {"delegation": o.profile.D, "utilities": o.utilities, "is_equilibrium": o.is_equilibrium,
            "deviations_checked": o.deviations_checked, "max_gain": o.max_gain, "violation": v,
            "acyclic": model.is_acyclic(o.profile)}


def cmd_game_br(inst: Instance, args) -> dict:
    start = inst.delegation or model.WeightedProfile.identity(inst.n)
    res = games.best_response_dynamics(start, inst.utilities, inst.network, order=args.order,
                                       seed=args.seed, max_rounds=args.max_rounds)
    out = {"converged": res.converged, "rounds": res.rounds, "moves": len(res.trace), **_outcome(res.outcome)}
    if args.trace:
        out["trace"] = [{"round": m.round, "agent": m.agent, "target": m.target,
                         "before": m.before, "after": m.after} for m in res.trace]
    return out


def cmd_game_check_ne(inst: Instance, args) -> dict:
    return _outcome(games.is_U_NE(inst.profile(), inst.utilities, inst.network))


def cmd_game_max_ne(inst: Instance, args) -> dict:
    if inst.network is not None and not inst.network.is_complete:
        raise InvalidInstance("game max-ne builds its equilibrium on the complete network")
    D = games.construct_max_accuracy_NE(inst.q)
    out = _outcome(games.is_U_NE(D, games.gd_utilities(inst.q)))
    out["accuracy"] = accuracy.profile_accuracy(inst.q, D, tie_rule=args.tie_rule).value
    out["best_pure_ne"] = None
    if inst.n <= games.MAX_PURE_NE_N:
        value, witness = games.best_pure_ne_accuracy(inst.q, tie_rule=args.tie_rule)
        out["best_pure_ne"] = {"accuracy": value, "profile": witness}
    return out


def cmd_game_poa(inst: Instance, args) -> dict:
    p = games.price_of_anarchy(inst.q, tie_rule=args.tie_rule)
    out = {"poa": p.poa, "optimum": p.optimum, "worst_ne": p.worst_ne, "poa_pure": None}
    if inst.n <= optimal.MAX_PURE_N:
        pp = games.price_of_anarchy_pure(inst.q, tie_rule=args.tie_rule)
        out["poa_pure"] = {"poa": pp.poa, "optimum": pp.optimum, "worst_ne": pp.worst_ne}
    return out


def _structure(D) -> dict:
    cs = shares.chain_structure(D)
    return {"irreducible": cs.irreducible, "aperiodic": cs.aperiodic,
            "classes": [{"members": c.members, "closed": c.closed, "period": c.period} for c in cs.classes]}


def cmd_shares_converge(inst: Instance, args) -> dict:
    D = inst.profile().D
    w, converged, used, status = shares.share_limit(D, np.ones(inst.n), args.tol, args.max_iter)
    return {"weights": w, "converged": converged, "status": status, "iterations_used": used,
            "structure": _structure(D)}


def cmd_shares_chi(inst: Instance, args) -> dict:
    if not 0 <= args.agent < inst.n:
        raise InvalidInstance(f"--agent {args.agent} out of range for n={inst.n}")
    D = inst.profile().D
    a = shares.apportionment(D, args.agent, args.tol, args.max_iter)
    return {"agent": a.owner, "chi": a.chi, "converged": a.converged, "status": a.status,
            "iterations_used": a.iterations_used, "absorbed": a.absorbed,
            "utility_hat": shares.utility_hat(D, inst.utilities, args.agent, args.tol, args.max_iter,
                                              args.semantics)}


def cmd_shares_check_ne(inst: Instance, args) -> dict:
    o = shares.is_Uhat_NE(inst.profile(), inst.utilities, inst.network, args.budget, args.seed,
                          args.semantics, args.tol, args.max_iter)
    out = _outcome(o)
    out["semantics"] = args.semantics
    return out


COMMANDS = {
    ("accuracy",): cmd_accuracy,
    ("weights",): cmd_weights,
    ("optimal",): cmd_optimal,
    ("optimal-pure",): cmd_optimal_pure,
    ("game", "br"): cmd_game_br,
    ("game", "check-ne"): cmd_game_check_ne,
    ("game", "max-ne"): cmd_game_max_ne,
    ("game", "poa"): cmd_game_poa,
    ("shares", "converge"): cmd_shares_converge,
    ("shares", "chi"): cmd_shares_chi,
    ("shares", "check-ne"): cmd_shares_check_ne,
}


# ---------------------------------------------------------------------------
# parsing and output


def _env(name: str, default, cast):
    raw = os.environ.get(name)
    if raw is None:
        return default
    try:
        return cast(float(raw)) if cast is int else cast(raw)
    except ValueError:
        raise UsageError(f"environment variable {name}={raw!r} is not a number") from None


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--instance", required=True, metavar="FILE")
    mode = common.add_mutually_exclusive_group()
    mode.add_argument("--exact", action="store_true", help="exact computation (default)")
    mode.add_argument("--mc", action="store_true", help="seeded Monte-Carlo estimate")
    common.add_argument("--paths", action="store_true", help="exact weights by chain sums, not profile enumeration")
    common.add_argument("--samples", type=int, default=100_000, metavar="K")
    common.add_argument("--seed", type=int, default=0, metavar="S")
    common.add_argument("--tol", type=float, default=None, metavar="T", help="share convergence threshold")
    common.add_argument("--cap", type=int, default=None, metavar="C", help="enumeration cap")
    common.add_argument("--max-iter", type=int, default=None, metavar="M")
    common.add_argument("--format", choices=("json", "table", "csv"), default="json")
    common.add_argument("--tie-rule", choices=("split", "inclusive"), default="split")
    common.add_argument("--clamp", action="store_true", help="clamp accuracy 1 to 1 - 1e-12")
    common.add_argument("--no-timing", action="store_true", help="omit wall time from the report")
    common.add_argument("--diagnostic", action="store_true", help="add non-canonical diagnostics")

    p = _Parser(prog="liquidweights", description="Accuracy and games of weighted delegations.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in ("accuracy", "weights", "optimal", "optimal-pure"):
        sub.add_parser(name, parents=[common])

    game = sub.add_parser("game").add_subparsers(dest="sub", required=True, parser_class=_Parser)
    br = game.add_parser("br", parents=[common])
    br.add_argument("--order", choices=("round_robin", "random"), default="round_robin")
    br.add_argument("--max-rounds", type=int, default=1000)
    br.add_argument("--trace", action="store_true")
    for name in ("check-ne", "max-ne", "poa"):
        game.add_parser(name, parents=[common])

    sh = sub.add_parser("shares").add_subparsers(dest="sub", required=True, parser_class=_Parser)
    sh.add_parser("converge", parents=[common])
    chi = sh.add_parser("chi", parents=[common])
    chi.add_argument("--agent", type=int, required=True)
    ne = sh.add_parser("check-ne", parents=[common])
    ne.add_argument("--budget", type=int, default=shares.DEFAULT_BUDGET)
    for q in (chi, ne):
        q.add_argument("--semantics", choices=("absorbing", "stationary"), default="absorbing")
    return p


def _plain(x):
    if isinstance(x, dict):
        return {k: _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return _plain(x.tolist())
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else repr(x)
    return x


def _flatten(prefix: str, x, out: list):
    if isinstance(x, dict):
        for k, v in x.items():
            _flatten(f"{prefix}.{k}" if prefix else k, v, out)
    elif isinstance(x, list) and x and any(isinstance(v, (list, dict)) for v in x):
        for k, v in enumerate(x):
            _flatten(f"{prefix}[{k}]", v, out)
    else:
        out.append((prefix, x))


def _cell(x) -> str:
    if isinstance(x, float):
        return format(x, ".10g")
    if isinstance(x, list):
        return " ".join(_cell(v) for v in x)
    if x is None:
        return "-"
    return str(x)


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, indent=2) + "\n"
    rows: list = []
    _flatten("", report, rows)
    if fmt == "table":
        width = max(len(k) for k, _ in rows)
        return "".join(f"{k:<{width}}  {_cell(v)}\n" for k, v in rows)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["key", "value"])
    for k, v in rows:
        w.writerow([k, _cell(v)])
    return buf.getvalue()


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
        if args.cap is None:
            args.cap = _env(ENV_CAP, model.DEFAULT_CAP, int)
        if args.tol is None:
            args.tol = _env(ENV_TOL, shares.EPS_CONV, float)
        if args.max_iter is None:
            args.max_iter = _env(ENV_MAX_ITER, shares.MAX_ITER, int)
    except UsageError as e:
        print(e, file=stderr)
        return 1
    except SystemExit as e:  # --help
        return int(e.code or 0)

    key = (args.command,) if getattr(args, "sub", None) is None else (args.command, args.sub)
    t0 = time.perf_counter()
    try:
        inst = load_instance(args.instance)
        results = COMMANDS[key](inst, args)
    except ResourceGuard as e:
        print(f"liquidweights: resource guard: {e}", file=stderr)
        return 2
    except (DomainError, ValueError) as e:
        print(f"liquidweights: {e}", file=stderr)
        return 1
    report = {
        "command": argv,
        "instance_digest": inst.digest,
        "seed": args.seed,
        "tolerances": {"cap": args.cap, "tol": args.tol, "max_iter": args.max_iter,
                       "row_tol": model.ROW_TOL, "deviation_tol": games.DEV_TOL,
                       "env": {k: os.environ.get(k) for k in (ENV_CAP, ENV_TOL, ENV_MAX_ITER)}},
        "results": results,
    }
    if not args.no_timing:
        report["wall_time"] = time.perf_counter() - t0
    stdout.write(render(_plain(report), args.format))
    return 0


def main() -> None:
    sys.exit(run())
