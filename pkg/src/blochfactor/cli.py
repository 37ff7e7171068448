"""Batch command-line runner. Every subcommand writes one JSON (or CSV) report.

Exit status: 0 completed, 2 a mathematical finding (violated inequality or
route disagreement), 1 error.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import hashlib
import io
import json
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import __version__
from .blochcore import DEFAULT_GRID, BlochFunc, GridSpec, bloch_seminorm
from .domination import decide
from .duality import VecMolecule, crossnorm_checks, default_candidates, vec_pairing, w2_lb, w2_ub
from .errors import BlochError, BudgetExceededError, InvalidInputError
from .factor import (CheckResult, build_factorization, ideal_inequality_check, kwapien_lb,
                     pietsch_ub, unitary_criterion_check)
from .molecules import WeightedSeq, molecule_norm_lb, molecule_norm_opt, molecule_norm_ub_triangle
from .suite import run_suite

EXIT_OK, EXIT_ERROR, EXIT_FINDING = 0, 1, 2
SUBCOMMANDS = ("norm", "molecule-norm", "dominate", "gamma2", "unitary-check", "ideal-check",
               "w2", "duality-gap", "suite")


@dataclass
class RunConfig:
    subcommand: str
    inputs: dict = field(default_factory=dict)
    seed: int = 0
    grid_nr: int | None = None
    grid_ntheta: int | None = None
    degree: int | None = None
    budget: int | None = None
    out: str | None = None
    format: str = "json"
    params: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise InvalidInputError(f"unknown config keys: {sorted(unknown)}")
        if data.get("subcommand") not in SUBCOMMANDS:
            raise InvalidInputError(f"subcommand must be one of {SUBCOMMANDS}")
        cfg = cls(**data)
        if not (0 <= int(cfg.seed) < 2 ** 64):
            raise InvalidInputError("seed must be a 64-bit unsigned integer")
        if cfg.format not in ("json", "csv"):
            raise InvalidInputError("format must be json or csv")
        return cfg

    def grid(self) -> GridSpec:
        base = DEFAULT_GRID
        return GridSpec(n_r=self.grid_nr or base.n_r, n_theta=self.grid_ntheta or base.n_theta,
                        r_cert=base.r_cert, mode=base.mode)

    def report_view(self) -> dict:
        d = asdict(self)
        d.pop("out")
        return d


# ---------------------------------------------------------------------------
# JSON helpers


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if np.isfinite(v) else str(v)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def _read(path: str) -> tuple[dict, bytes]:
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise InvalidInputError(f"cannot read {path}: {exc}") from exc
    try:
        return json.loads(raw), raw
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc


class _Inputs:
    """Loads input files once and hashes their bytes in key order."""

    def __init__(self, paths: dict):
        self.paths = paths
        self.data, self.raw = {}, {}
        for key in sorted(paths):
            self.data[key], self.raw[key] = _read(paths[key])

    def digest(self) -> str:
        h = hashlib.sha256()
        for key in sorted(self.raw):
            h.update(key.encode())
            h.update(b"\0")
            h.update(self.raw[key])
        return h.hexdigest()

    def need(self, key):
        if key not in self.data:
            raise InvalidInputError(f"--{key} is required")
        return self.data[key]


def _checks_finding(checks) -> bool:
    return any(not c["pass"] for c in checks)


# ---------------------------------------------------------------------------
# subcommands; each returns (result dict, finding flag)


def _cmd_norm(cfg, inp):
    f = BlochFunc.from_dict(inp.need("func"))
    br = bloch_seminorm(f, cfg.grid())
    return {"bracket": br.to_dict()}, False


def _cmd_molecule_norm(cfg, inp):
    m = WeightedSeq.from_dict(inp.need("molecule"))
    deg = cfg.degree or 48
    lb = molecule_norm_lb(m, budget=cfg.budget or 2000, seed=cfg.seed)
    r = molecule_norm_opt(m, degree=deg)
    lower = max(lb, r.lower)
    res = {"lower": lower, "upper": r.upper, "sampled_lower": lb, "program": r.to_dict(),
           "triangle_upper": molecule_norm_ub_triangle(m)}
    return res, lower > r.upper * (1 + 1e-9)


def _cmd_dominate(cfg, inp):
    a = WeightedSeq.from_dict(inp.need("a"))
    b = WeightedSeq.from_dict(inp.need("b"))
    v = decide(a, b, n=cfg.budget or 10_000, degree=cfg.degree or 8, seed=cfg.seed)
    return v.to_dict(), v.disagreement


def _gamma2_report(f, cfg):
    budget = cfg.budget or 1000
    lb = kwapien_lb(f, budget=budget, seed=cfg.seed)
    c, cert = pietsch_ub(f, degree=cfg.degree or 8, seed=cfg.seed)
    wit = build_factorization(f, cert)
    br = bloch_seminorm(f)
    checks = [
        CheckResult("seminorm_below_kwapien", lb - br.lower + 1e-9, lb >= br.lower - 1e-9),
        CheckResult("kwapien_below_pietsch", c - lb + 1e-9, lb <= c + 1e-9),
        CheckResult("certificate_inequality", 1e-8 - cert.violation(), cert.verify()),
        CheckResult("factorization_residual", 1e-6 - wit.residual, wit.residual <= 1e-6),
        CheckResult("factorization_bound", c * 1.02 - wit.bound, wit.bound <= c * 1.02),
    ]
    rep = {"gamma2_lower": max(lb, br.lower), "gamma2_upper": c,
           "certificate": cert.to_dict(), "witness": wit.to_dict(),
           "checks": [ch.to_dict() for ch in checks]}
    return rep, c


def _cmd_gamma2(cfg, inp):
    f = BlochFunc.from_dict(inp.need("func"))
    rep, _ = _gamma2_report(f, cfg)
    return rep, _checks_finding(rep["checks"])


def _cmd_unitary(cfg, inp):
    f = BlochFunc.from_dict(inp.need("func"))
    c = cfg.params.get("c")
    if c is None:
        c, _ = pietsch_ub(f, seed=cfg.seed)
    rep = unitary_criterion_check(f, float(c), n=int(cfg.params.get("n", 8)),
                                  trials=cfg.budget or 1000, seed=cfg.seed).to_dict()
    return rep, rep["max_ratio"] > 1 + 1e-6


def _cmd_ideal(cfg, inp):
    f = BlochFunc.from_dict(inp.need("func"))
    t = np.array([[complex(*v) for v in row] for row in inp.need("matrix")])
    a = cfg.params.get("a", [0.0, 0.0])
    checks = ideal_inequality_check(t, f, complex(*a), seed=cfg.seed, budget=cfg.budget or 300,
                                    grid=cfg.grid())
    rows = [ch.to_dict() for ch in checks]
    return {"checks": rows}, _checks_finding(rows)


def _cmd_w2(cfg, inp):
    g = VecMolecule.from_dict(inp.need("molecule"))
    lo = w2_lb(g)
    hi = w2_ub(g, budget=cfg.budget or 64, seed=cfg.seed)
    checks = [CheckResult("duality_sandwich", hi + 1e-9 - lo, lo <= hi + 1e-9).to_dict()]
    cands = default_candidates(g)
    if cands:
        # the best rank-one candidate doubles as a cross-norm test pair
        cand = max(cands, key=lambda cd: abs(vec_pairing(cd.mapping, g)))
        payload = cand.mapping.terms[0][0]
        scalar = BlochFunc(1, [([1.0], cand.mapping.terms[0][1])])
        checks += [ch.to_dict() for ch in crossnorm_checks(g, scalar, payload)]
    return {"w2_lower": lo, "w2_upper": hi, "checks": checks}, _checks_finding(checks)


def _cmd_duality_gap(cfg, inp):
    f = BlochFunc.from_dict(inp.need("func"))
    g = VecMolecule.from_dict(inp.need("molecule"))
    c, _ = pietsch_ub(f, seed=cfg.seed)
    hi = w2_ub(g, budget=cfg.budget or 64, seed=cfg.seed)
    val = abs(vec_pairing(f, g))
    margin = c * hi * 1.02 - val
    checks = [CheckResult("pairing_bound", margin, margin >= 0).to_dict()]
    return {"pairing_abs": val, "gamma2_upper": c, "w2_upper": hi, "checks": checks}, margin < 0


def _cmd_suite(cfg, inp):
    only = cfg.params.get("only")
    results = run_suite(seed=cfg.seed, only=only)
    rows = [r.to_dict() for r in results]
    return {"criteria": rows, "all_pass": all(r["pass"] for r in rows)}, \
        not all(r["pass"] for r in rows)


HANDLERS = {"norm": _cmd_norm, "molecule-norm": _cmd_molecule_norm, "dominate": _cmd_dominate,
            "gamma2": _cmd_gamma2, "unitary-check": _cmd_unitary, "ideal-check": _cmd_ideal,
            "w2": _cmd_w2, "duality-gap": _cmd_duality_gap, "suite": _cmd_suite}


def run(cfg: RunConfig) -> tuple[int, dict]:
    """Execute one configuration; returns (exit status, report)."""
    report = {"tool": "blochfactor", "version": __version__, "subcommand": cfg.subcommand,
              "seed": cfg.seed, "config": cfg.report_view(),
              "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat()}
    try:
        inp = _Inputs(cfg.inputs)
        report["input_digest"] = inp.digest()
        result, finding = HANDLERS[cfg.subcommand](cfg, inp)
        report["result"] = result
        report["status"] = "finding" if finding else "ok"
        status = EXIT_FINDING if finding else EXIT_OK
    except BudgetExceededError as exc:
        report.update(status="error", error=str(exc), best=exc.best)
        status = EXIT_ERROR
    except BlochError as exc:
        report.update(status="error", error=f"{type(exc).__name__}: {exc}")
        status = EXIT_ERROR
    return status, _plain(report)


def _flatten(prefix, obj, rows):
    if isinstance(obj, dict):
        for k, v in obj.items():
            _flatten(f"{prefix}.{k}" if prefix else str(k), v, rows)
    elif isinstance(obj, list) and obj and isinstance(obj[0], (dict, list)):
        for i, v in enumerate(obj):
            _flatten(f"{prefix}[{i}]", v, rows)
    else:
        rows.append((prefix, json.dumps(obj) if isinstance(obj, list) else obj))


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, indent=2, sort_keys=True) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if report.get("subcommand") == "suite" and "result" in report:
        w.writerow(["id", "name", "pass"])
        for r in report["result"]["criteria"]:
            w.writerow([r["id"], r["name"], r["pass"]])
    else:
        rows: list = []
        _flatten("", report, rows)
        w.writerow(["key", "value"])
        w.writerows(rows)
    return buf.getvalue()


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int)
    common.add_argument("--grid-nr", type=int)
    common.add_argument("--grid-ntheta", type=int)
    common.add_argument("--degree", type=int)
    common.add_argument("--budget", type=int)
    common.add_argument("--out")
    common.add_argument("--format", choices=("json", "csv"))
    common.add_argument("--config", help="JSON file with RunConfig keys; flags override it")

    p = argparse.ArgumentParser(prog="blochfactor", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="subcommand")
    sp = {name: sub.add_parser(name, parents=[common]) for name in SUBCOMMANDS}
    for name in ("norm", "gamma2", "unitary-check", "ideal-check", "duality-gap"):
        sp[name].add_argument("--func", help="BlochFunc JSON")
    for name in ("molecule-norm", "w2", "duality-gap"):
        sp[name].add_argument("--molecule", help="molecule JSON")
    sp["dominate"].add_argument("--a")
    sp["dominate"].add_argument("--b")
    sp["unitary-check"].add_argument("--c", type=float)
    sp["unitary-check"].add_argument("--n", type=int, default=8)
    sp["ideal-check"].add_argument("--matrix", help="JSON matrix [[[re,im],...],...]")
    sp["ideal-check"].add_argument("--a", type=float, nargs=2, default=[0.0, 0.0],
                                   metavar=("RE", "IM"))
    sp["suite"].add_argument("--only", type=int, nargs="+", help="criterion ids to run")
    return p


_INPUT_FLAGS = ("func", "molecule", "a", "b", "matrix")
_PARAM_FLAGS = ("c", "n", "only")


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    data: dict = {}
    if ns.config:
        data, _ = _read(ns.config)
        if not isinstance(data, dict):
            raise InvalidInputError("config file must hold a JSON object")
    data = dict(data)
    data["subcommand"] = ns.subcommand
    inputs = dict(data.get("inputs", {}))
    params = dict(data.get("params", {}))
    for key in _INPUT_FLAGS:
        val = getattr(ns, key, None)
        if val is None:
            continue
        if ns.subcommand == "ideal-check" and key == "a":
            params["a"] = val
        else:
            inputs[key] = val
    for key in _PARAM_FLAGS:
        val = getattr(ns, key, None)
        if val is not None:
            params[key] = val
    data["inputs"], data["params"] = inputs, params
    for key in ("seed", "grid_nr", "grid_ntheta", "degree", "budget", "out", "format"):
        val = getattr(ns, key)
        if val is not None:
            data[key] = val
    return RunConfig.from_dict(data)


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else argv
    if not argv:
        parser.print_usage(sys.stderr)
        return EXIT_ERROR
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code else EXIT_OK
    if ns.subcommand is None:
        parser.print_usage(sys.stderr)
        return EXIT_ERROR
    try:
        cfg = config_from_args(ns)
    except BlochError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    status, report = run(cfg)
    text = render(report, cfg.format)
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)
    if status == EXIT_ERROR:
        print(f"error: {report.get('error')}", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
