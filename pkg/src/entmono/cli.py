"""Command-line front end: ``entmono compute | verify | convergence``.

Exit codes: 0 success, 1 a verification check failed, 2 malformed input,
3 a copy number exceeds the cap.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from .functionals import (
    closed_limit1,
    closed_lower_bound,
    closed_upper_bound,
    estimate_limit1,
    estimate_upper,
    finite_n_limit1,
    finite_n_log_value,
    spec_theta,
)
from .gmean import Leaf, Node, mean_property_margins, random_psd, tree_from_weights
from .multilinear import (
    MultipartiteState,
    all_bipartitions,
    elementary_bipartitions,
    make_state,
    parse_bipartition,
)
from .observables import Bipartite, FamilySpec, GMean, Grouped, verify_axioms
from .partitions import kronecker_vanishing_violations, lr_vanishing_violations
from .schurweyl import DEFAULT_CAP, CapExceededError, check_cap

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_CAP = 0, 1, 2, 3
DEFAULT_SEED = 20240917
SUITES = ("axioms", "gmean", "partitions")


class InputError(ValueError):
    """Malformed command-line input (exit code 2)."""


@dataclass
class RunConfig:
    command: str
    state: str
    alphas: list[float | str]
    bipartitions: str | None = None
    theta: str | None = None
    tree_policy: str = "balanced"
    n_max: int = 4
    tol: float = 1e-9
    fmt: str = "json"
    seed: int = DEFAULT_SEED
    cap: int = DEFAULT_CAP
    out: str | None = None
    suite: list[str] = field(default_factory=lambda: list(SUITES))
    sizes: list[tuple[int, int]] = field(default_factory=lambda: [(1, 1)])
    samples: int = 5
    inject_fault: str | None = None


# --------------------------------------------------------------------------
# parsing


def _parse_number(text: str) -> float:
    try:
        return float(Fraction(text.strip()))
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"not a number: {text!r}") from exc


def _schmidt_state(probs: Sequence[float], k: int) -> MultipartiteState:
    r = len(probs)
    amps = np.zeros((r,) * k, dtype=complex)
    for i, p in enumerate(probs):
        amps[(i,) * k] = math.sqrt(p)
    return MultipartiteState((r,) * k, amps.ravel())


def parse_state(text: str, seed: int) -> MultipartiteState:
    """``name[:key=value,...]`` or a JSON file ``{"dims": [...], "amplitudes": [...]}``.

    Names: ``unit:r=,k=``, ``ghz:level=,k=``, ``w:k=``, ``random:dims=2x2x2[,seed=]``
    and ``schmidt:p=0.3/0.7[,k=2]`` (``sum_i sqrt(p_i) |i...i>``). Amplitudes in
    a file are numbers or ``[re, im]`` pairs.
    """
    path = Path(text)
    try:
        if text.endswith(".json") or path.is_file():
            data = json.loads(path.read_text())
            amps = [complex(*a) if isinstance(a, list) else complex(a) for a in data["amplitudes"]]
            return MultipartiteState(tuple(data["dims"]), np.array(amps))
        name, _, rest = text.partition(":")
        params = {}
        for item in filter(None, rest.split(",")):
            key, eq, value = item.partition("=")
            if not eq:
                raise InputError(f"state parameter {item!r} is not key=value")
            params[key.strip()] = value.strip()
        if name == "random":
            dims = tuple(int(d) for d in params["dims"].split("x"))
            return make_state("random", dims=dims, seed=int(params.get("seed", seed)))
        if name == "schmidt":
            probs = [_parse_number(p) for p in params["p"].split("/")]
            return _schmidt_state(probs, int(params.get("k", 2)))
        return make_state(name, **params)
    except InputError:
        raise
    except (KeyError, ValueError, TypeError, OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot parse state {text!r}: {exc}") from exc


def parse_alphas(text: str) -> list[float | str]:
    if text.strip() == "limit1":
        return ["limit1"]
    out: list[float | str] = []
    for item in text.split(","):
        a = _parse_number(item)
        if not 0.0 < a < 1.0:
            raise InputError(f"alpha {a} outside (0, 1)")
        out.append(a)
    return out


def parse_sizes(text: str) -> list[tuple[int, int]]:
    out = []
    try:
        for item in text.split(";"):
            m, n = (int(x) for x in item.split(","))
            if m < 1 or n < 1:
                raise ValueError
            out.append((m, n))
    except ValueError as exc:
        raise InputError(f"sizes must look like '1,1;1,2', got {text!r}") from exc
    return out


def _tree_from_json(node: dict, k: int, sides: list[frozenset[int]]):
    if "leaf" in node:
        side = parse_bipartition(node["leaf"], k)
        if side in sides:
            raise InputError(f"bipartition {node['leaf']} appears twice in the tree")
        sides.append(side)
        return Leaf(len(sides) - 1)
    try:
        t = Fraction(str(node["t"])) if isinstance(node["t"], str) else node["t"]
        return Node(_tree_from_json(node["left"], k, sides), _tree_from_json(node["right"], k, sides), t)
    except KeyError as exc:
        raise InputError(f"tree node misses key {exc}") from exc


def build_spec(k: int, bipartitions: str | None, theta: str | None, policy: str) -> FamilySpec:
    """Family from ``--bipartitions`` and ``--theta`` (weights or a tree file)."""
    try:
        if theta is not None and (theta.endswith(".json") or Path(theta).is_file()):
            sides: list[frozenset[int]] = []
            tree = _tree_from_json(json.loads(Path(theta).read_text()), k, sides)
            if len(sides) == 1:
                return Bipartite(sides[0])
            return GMean(tuple(Bipartite(s) for s in sides), tree)
        if bipartitions in (None, "elementary"):
            sides = elementary_bipartitions(k) if k >= 3 else all_bipartitions(k)
        elif bipartitions == "all":
            sides = all_bipartitions(k)
        else:
            sides = [parse_bipartition(b, k) for b in bipartitions.split(",")]
        if not sides:
            raise InputError("no bipartition selected")
        if len(set(sides)) != len(sides):
            raise InputError("repeated bipartition")
        if theta is None:
            weights = [Fraction(1, len(sides))] * len(sides)
        else:
            weights = [Fraction(w.strip()) for w in theta.split(",")]
            if len(weights) != len(sides):
                raise InputError(f"{len(weights)} weights for {len(sides)} bipartitions")
        if len(sides) == 1:
            return Bipartite(sides[0])
        return GMean(tuple(Bipartite(s) for s in sides), tree_from_weights(weights, policy))
    except InputError:
        raise
    except (ValueError, ZeroDivisionError, OSError, json.JSONDecodeError) as exc:
        raise InputError(str(exc)) from exc


# --------------------------------------------------------------------------
# commands


def cmd_compute(cfg: RunConfig) -> tuple[list[dict], int]:
    check_cap(cfg.n_max, cfg.cap)
    psi = parse_state(cfg.state, cfg.seed)
    spec = build_spec(psi.k, cfg.bipartitions, cfg.theta, cfg.tree_policy)
    reports = []
    for a in cfg.alphas:
        if a == "limit1":
            rep = estimate_limit1(psi, spec, cfg.n_max)
        else:
            rep = estimate_upper(psi, spec, a, cfg.n_max, cap=cfg.cap, tol=cfg.tol)
        reports.append(rep.to_dict())
    return reports, EXIT_OK


def cmd_convergence(cfg: RunConfig) -> tuple[list[dict], int]:
    check_cap(cfg.n_max, cfg.cap)
    psi = parse_state(cfg.state, cfg.seed)
    spec = build_spec(psi.k, cfg.bipartitions, cfg.theta, cfg.tree_policy)
    theta = spec_theta(spec, psi.k)
    rows = []
    for a in cfg.alphas:
        if a == "limit1":
            lower = upper = closed_limit1(psi, theta)
        else:
            upper = closed_upper_bound(psi, theta, a)
            lower = closed_lower_bound(psi, theta, a) if a >= 0.5 else None
        for n in range(1, cfg.n_max + 1):
            e = finite_n_limit1(psi, spec, n) if a == "limit1" else finite_n_log_value(psi, spec, a, n, cap=cfg.cap)
            rows.append(
                {"alpha": a, "n": n, "e_n": e, "closed_lower": lower, "closed_upper": upper, "gap": upper - e}
            )
    return rows, EXIT_OK


def _check(suite: str, check: str, instance: str, margin: float, passed: bool, **extra) -> dict:
    out = {"suite": suite, "check": check, "instance": instance, "margin": float(margin), "pass": bool(passed)}
    out.update(extra)
    return out


def _inject(spec: FamilySpec) -> FamilySpec:
    """Flip the entropy exponent of every leaf, turning ``A`` into ``A^{-1}``.

    Flipping a single leaf of a mean can cancel against the others on small
    symmetric instances, so the fault would go unnoticed.
    """
    if isinstance(spec, Bipartite):
        return Bipartite(spec.side, weight_sign=-1)
    if isinstance(spec, Grouped):
        return Grouped(_inject(spec.base), spec.groups)
    return GMean(tuple(_inject(c) for c in spec.children), spec.tree, spec.alpha)


def cmd_verify(cfg: RunConfig) -> tuple[dict, int]:
    if not cfg.suite:
        raise InputError("empty suite selection")
    unknown = set(cfg.suite) - set(SUITES)
    if unknown:
        raise InputError(f"unknown suites {sorted(unknown)}; choose from {SUITES}")
    checks: list[dict] = []
    if "axioms" in cfg.suite:
        psi = parse_state(cfg.state, cfg.seed)
        spec = build_spec(psi.k, cfg.bipartitions, cfg.theta, cfg.tree_policy)
        if cfg.inject_fault == "sign-flip":
            spec = _inject(spec)
        elif cfg.inject_fault is not None:
            raise InputError(f"unknown fault {cfg.inject_fault!r}")
        for a in cfg.alphas:
            if a == "limit1":
                raise InputError("axiom checks need a numeric alpha")
            for m, n in cfg.sizes:
                for res in verify_axioms(spec, psi.dims, (m, n), a, tol=cfg.tol, seed=cfg.seed, cap=cfg.cap):
                    extra = {} if res.slack_factor is None else {"slack_factor": res.slack_factor}
                    checks.append(
                        _check("axioms", res.axiom, f"alpha={a:g} {res.instance}", res.margin, res.passed, **extra)
                    )
    if "gmean" in cfg.suite:
        rng = np.random.default_rng(cfg.seed)
        tree = tree_from_weights([Fraction(1, 3)] * 3, "balanced")
        for i in range(cfg.samples):
            d = int(rng.integers(2, 9))
            ops = [random_psd(rng, d) for _ in range(3)]
            for name, margin in mean_property_margins(tree, ops, rng, cfg.tol).items():
                checks.append(_check("gmean", name, f"sample={i} dim={d}", margin, margin >= -cfg.tol))
    if "partitions" in cfg.suite:
        for n in range(1, 6):
            bad = kronecker_vanishing_violations(n)
            worst = 0.0 - max((v[3] for v in bad), default=0.0)
            checks.append(_check("partitions", "kronecker_vanishing", f"n={n}", worst, not bad))
        bad = lr_vanishing_violations(6)
        worst = 0.0 - max((v[3] for v in bad), default=0.0)
        checks.append(_check("partitions", "lr_vanishing", "m+n<=6", worst, not bad))
    failures = sum(not c["pass"] for c in checks)
    report = {
        "config": {
            "state": cfg.state,
            "alphas": cfg.alphas,
            "bipartitions": cfg.bipartitions,
            "theta": cfg.theta,
            "sizes": [list(s) for s in cfg.sizes],
            "suite": list(cfg.suite),
            "seed": cfg.seed,
            "tol": cfg.tol,
            "inject_fault": cfg.inject_fault,
        },
        "checks": checks,
        "failures": failures,
        "passed": failures == 0,
    }
    return report, EXIT_FAIL if failures else EXIT_OK


# --------------------------------------------------------------------------
# output


def _g12(x) -> str:
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    if isinstance(x, float):
        return "inf" if math.isinf(x) else format(x, ".12g")
    return str(x)


def _csv(rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_g12(row.get(c)) for c in columns])
    return buf.getvalue()


def _json(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=True) + "\n"


def render(command: str, payload, fmt: str) -> str:
    if fmt == "json":
        return _json(payload)
    if command == "compute":
        rows = [
            {
                "alpha": r["alpha"],
                "spec": r["spec"],
                "n": n,
                "e_n": e,
                "E_lo": r["E_interval"][0],
                "E_hi": r["E_interval"][1],
                "closed_lower": r["closed_lower"],
                "closed_upper": r["closed_upper"],
            }
            for r in payload
            for n, e in r["sequence"]
        ]
        if fmt == "csv":
            return _csv(rows, list(rows[0]))
        lines = []
        for r in payload:
            lines.append(f"{r['spec']}  alpha={r['alpha']}  state={r['state_digest']}")
            for n, e in r["sequence"]:
                lines.append(f"  n={n:<3d} e_n={e:.12g}")
            lo, hi = r["E_interval"]
            lines.append(f"  E in [{lo:.12g}, {hi:.12g}]   F in [{r['F_interval'][0]:.12g}, {r['F_interval'][1]:.12g}]")
            lines.append(f"  closed bounds: lower={_g12(r['closed_lower'])} upper={r['closed_upper']:.12g}")
            for v in r["violations"]:
                lines.append(f"  VIOLATION: {v}")
        return "\n".join(lines) + "\n"
    if command == "convergence":
        cols = ["alpha", "n", "e_n", "closed_lower", "closed_upper", "gap"]
        if fmt == "csv":
            return _csv(payload, cols)
        return "\n".join("  ".join(f"{c}={_g12(row[c])}" for c in cols) for row in payload) + "\n"
    # verify
    if fmt == "csv":
        return _csv(payload["checks"], ["suite", "check", "instance", "margin", "pass"])
    lines = [
        f"{'PASS' if c['pass'] else 'FAIL'}  {c['suite']:<10s} {c['check']:<18s} margin={c['margin']:.3e}  {c['instance']}"
        for c in payload["checks"]
    ]
    lines.append(f"{len(payload['checks']) - payload['failures']}/{len(payload['checks'])} checks passed")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="entmono", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--state", default="ghz:level=2,k=3", help="named state 'name:k=v,...' or JSON file")
    common.add_argument("--alpha", default="0.5", help="comma-separated orders in (0,1), or 'limit1'")
    common.add_argument("--bipartitions", default=None, help="'elementary', 'all' or e.g. '1|23,2|13'")
    common.add_argument("--theta", default=None, help="comma-separated weights or a tree JSON file")
    common.add_argument("--tree-policy", default="balanced", choices=["balanced", "left-comb"])
    common.add_argument("--n-max", type=int, default=4)
    common.add_argument("--tol", type=float, default=1e-9)
    common.add_argument("--format", dest="fmt", default="json", choices=["json", "csv", "pretty"])
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common.add_argument("--cap", type=int, default=DEFAULT_CAP, help="largest copy number allowed")
    common.add_argument("--out", default=None, help="write to this file instead of stdout")
    sub.add_parser("compute", parents=[common], help="finite-n sequence and bounds")
    sub.add_parser("convergence", parents=[common], help="table of e_n against the closed bounds")
    verify = sub.add_parser("verify", parents=[common], help="axiom and property checks")
    verify.add_argument("--suite", default=",".join(SUITES), help=f"comma-separated subset of {SUITES}")
    verify.add_argument("--sizes", default="1,1", help="copy-number pairs 'm,n;m,n'")
    verify.add_argument("--samples", type=int, default=5, help="random instances for the mean checks")
    verify.add_argument("--inject-fault", default=None, choices=["sign-flip"])
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(
        command=args.command,
        state=args.state,
        alphas=parse_alphas(args.alpha),
        bipartitions=args.bipartitions,
        theta=args.theta,
        tree_policy=args.tree_policy,
        n_max=args.n_max,
        tol=args.tol,
        fmt=args.fmt,
        seed=args.seed,
        cap=args.cap,
        out=args.out,
    )
    if cfg.n_max < 1:
        raise InputError("--n-max must be at least 1")
    if args.command == "verify":
        cfg.suite = [s.strip() for s in args.suite.split(",") if s.strip()]
        cfg.sizes = parse_sizes(args.sizes)
        cfg.samples = args.samples
        cfg.inject_fault = args.inject_fault
    return cfg


COMMANDS = {"compute": cmd_compute, "convergence": cmd_convergence, "verify": cmd_verify}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        payload, code = COMMANDS[cfg.command](cfg)
    except CapExceededError as exc:
        print(f"entmono: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (InputError, ValueError) as exc:
        print(f"entmono: {exc}", file=sys.stderr)
        return EXIT_INPUT
    text = render(cfg.command, payload, cfg.fmt)
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
