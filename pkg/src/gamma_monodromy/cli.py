"""Command line interface.

Three subcommands: ``reflections`` extracts reflection vectors from
monodromy and scores them against the Gamma-structure candidates,
``phi`` tabulates the oscillatory integral against its residue series,
and ``suite`` runs the package acceptance checks.

Output is JSON (schema tag ``gamma-monodromy/1``) with complex numbers
as [re, im] pairs; ``phi`` can emit CSV instead.  Payloads are
deterministic for fixed inputs: grids and summation orders are fixed and
wall-clock timings are kept out of the JSON.  Exit codes: 0 pass,
1 tolerance breach, 2 numerical failure, 64 usage error.  GM_THREADS
caps suite parallelism.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict, dataclass

import numpy as np

from . import mirror
from . import suite as suite_mod
from .cohomology import line_bundle, make_proj, psi_map
from .monodromy import (gamma_loop, monodromy_matrix, reflection_vector,
                        twisted_reflection_check)
from .numerics import NumericsError
from .periods import SERIES_CAP
from .quantum import quantum_mult_proj, sseries_proj

SCHEMA = "gamma-monodromy/1"
EXIT_OK, EXIT_FAIL, EXIT_NUMERIC, EXIT_USAGE = 0, 1, 2, 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad usage; the contract reserves 2 for numerics
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, "%s: error: %s\n" % (self.prog, message))


@dataclass
class RunConfig:
    command: str
    space: str | None = None
    q: list | None = None       # [modulus, argument / pi]
    Q: list | None = None
    k: int | None = None
    m: int | None = None
    tol: float = 1e-4
    out: str | None = None
    format: str = "json"


def _c(z) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def _cvec(v) -> list:
    return [_c(z) for z in np.asarray(v).ravel()]


def parse_space(text: str) -> tuple[str, int]:
    kind, _, par = (text or "").partition(":")
    if kind not in ("proj", "twisted", "blproj") or not par.isdigit():
        raise UsageError("invalid space %r, expected proj:m, twisted:n "
                         "or blproj:n" % text)
    return kind, int(par)


def _check_tol(tol: float) -> float:
    if not 1e-12 <= tol <= 1e-3:
        raise UsageError("tol %g outside [1e-12, 1e-3]" % tol)
    return tol


def _branch_value(pair: list | None, flag: str) -> complex:
    """Modulus/argument pair -> complex value; the branch is explicit in
    the arguments, never inferred from a printed complex number."""
    if pair is None:
        raise UsageError("missing required argument %s" % flag)
    mod, arg_pi = pair
    if mod <= 0:
        raise UsageError("%s modulus must be positive" % flag)
    return complex(mod) * np.exp(1j * math.pi * arg_pi)


def _config_dict(cfg: RunConfig) -> dict:
    """Config echo for the payload; the destination path is dropped so the
    emitted bytes do not depend on where they are written."""
    d = asdict(cfg)
    d.pop("out", None)
    return d


def _emit(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, sort_keys=True, indent=2,
                      allow_nan=False) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _strip_seconds(obj):
    if isinstance(obj, dict):
        return {k: _strip_seconds(v) for k, v in obj.items()
                if k not in ("seconds", "seconds_per_n")}
    if isinstance(obj, list):
        return [_strip_seconds(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, complex):
        return _c(obj)
    return obj


def cmd_reflections(cfg: RunConfig) -> int:
    kind, par = parse_space(cfg.space)
    tol = _check_tol(cfg.tol)
    ode_tol = min(1e-9, max(tol * 1e-2, 1e-12))
    if kind == "proj":
        m_dim = par
        n = m_dim + 2
        q = _branch_value(cfg.q, "--q")
        q_log = math.log(cfg.q[0]) + 1j * math.pi * cfg.q[1]
        level = -(cfg.m if cfg.m is not None else n)
        space = make_proj(m_dim)
        product = quantum_mult_proj(m_dim, q)
        sser = sseries_proj(m_dim, q, SERIES_CAP)
        ks = [cfg.k] if cfg.k is not None else list(range(n - 1))
        results = []
        for k in ks:
            if not 0 <= k <= n - 2:
                raise UsageError("k %d outside [0, %d]" % (k, n - 2))
            loop = gamma_loop(n, q_log, k)
            res = monodromy_matrix(space, product, sser, level, loop,
                                   ode_tol)
            cand = psi_map(space, line_bundle(k), q_log)
            alpha = reflection_vector(res, space, candidate=cand)
            d_plus = float(np.max(np.abs(alpha - cand)))
            d_minus = float(np.max(np.abs(alpha + cand)))
            sign = 1 if d_plus <= d_minus else -1
            residual = min(d_plus, d_minus)
            results.append({
                "k": k,
                "alpha": _cvec(alpha),
                "candidate": _cvec(cand),
                "sign": sign,
                "residual": residual,
                "tolerance": tol,
                "pairing_residual": res.residuals["pairing"],
                "pairing_tolerance": 1e-6,
                "solver_residuals": {kk: float(vv) for kk, vv
                                     in res.residuals.items()},
                "pass": bool(residual < tol
                             and res.residuals["pairing"] < 1e-6),
            })
        payload = {"schema": SCHEMA, "config": _config_dict(cfg),
                   "level": level, "results": results,
                   "pass": all(r["pass"] for r in results)}
        _emit(payload, cfg.out)
        return EXIT_OK if payload["pass"] else EXIT_FAIL
    if kind == "twisted":
        n = par
        Q = _branch_value(cfg.Q, "--Q")
        ks = [cfg.k] if cfg.k is not None else list(range(n - 1))
        results = []
        for k in ks:
            if not 0 <= k <= n - 2:
                raise UsageError("k %d outside [0, %d]" % (k, n - 2))
            rep = twisted_reflection_check(n, Q, k, m=cfg.m, tol=ode_tol)
            pair_res = abs(rep["exceptional_pairing"] - 1.0)
            entry = {
                "k": k,
                "constant": _c(rep["constant"]),
                "constant_deviation": rep["constant_deviation"],
                "fit_residual": rep["fit_residual"],
                "tolerance": tol,
                "exceptional_pairing": _c(rep["exceptional_pairing"]),
                "pairing_residual": pair_res,
                "pairing_tolerance": 1e-8,
                "beta": _cvec(rep["beta"]),
                "candidate": _cvec(rep["candidate"]),
                "pass": bool(rep["constant_deviation"] < tol
                             and rep["fit_residual"] < tol
                             and pair_res < 1e-8),
            }
            results.append(entry)
        payload = {"schema": SCHEMA, "config": _config_dict(cfg),
                   "results": results,
                   "pass": all(r["pass"] for r in results)}
        _emit(payload, cfg.out)
        return EXIT_OK if payload["pass"] else EXIT_FAIL
    raise UsageError("reflections requires proj:m or twisted:n")


def cmd_phi(cfg: RunConfig) -> int:
    kind, par = parse_space(cfg.space)
    if kind != "proj":
        raise UsageError("phi requires a proj:m space")
    tol = _check_tol(cfg.tol)
    if cfg.q is None:
        raise UsageError("missing required argument --q")
    if cfg.q[1] != 0.0 or cfg.q[0] <= 0:
        raise UsageError("phi requires real positive --q")
    q = float(cfg.q[0])
    n = par + 2
    m = cfg.m if cfg.m is not None else n
    u = mirror.u_of_q(n, q)

    scan = mirror.zero_region_scan(n, q, m, npts=20, tol=tol)
    lams = u * np.linspace(1.5, 4.0, 10)
    mb_cfg = mirror.make_mb_config(n, q, m, float(lams[-1]),
                                   min(tol, 1e-7))
    mb = mirror.phi_mb_batch(n, q, m, lams, mb_cfg)
    ser = np.array([mirror.phi_residue_series(n, q, m, lv, terms=60)
                    for lv in lams])
    rows = [[float(lv), float(sv.real), float(mv.real),
             float(abs(sv - mv))]
            for lv, sv, mv in zip(lams, ser, mb)]
    max_diff = max(r[3] for r in rows)
    fit = mirror.local_exponent_fit(n, q, m)
    exp_dev = abs(fit["slope"] - (m - 0.5))

    ok = (scan["max_abs"] < max(tol, 1e-6)
          and max_diff < max(tol, 1e-6) and exp_dev < 0.02)

    if cfg.format == "csv":
        lines = ["lambda,re_phi_series,re_phi_mb,abs_diff"]
        lines += ["%.12g,%.12g,%.12g,%.12g" % tuple(r) for r in rows]
        text = "\n".join(lines) + "\n"
        if cfg.out:
            with open(cfg.out, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        return EXIT_OK if ok else EXIT_FAIL

    payload = {
        "schema": SCHEMA, "config": _config_dict(cfg),
        "n": n, "m": m, "branch_point": float(u),
        "zero_region": {"max_abs": scan["max_abs"],
                        "tolerance": max(tol, 1e-6),
                        "points": len(scan["lambdas"])},
        "comparison": {"rows": rows, "max_abs_diff": max_diff,
                       "tolerance": max(tol, 1e-6),
                       "tail_bound": mb_cfg.tail_bound,
                       "columns": ["lambda", "re_phi_series",
                                   "re_phi_mb", "abs_diff"]},
        "exponent_fit": {"slope": fit["slope"],
                         "expected": m - 0.5,
                         "deviation": exp_dev,
                         "tolerance": 0.02,
                         "r_squared": fit["r2"]},
        "pass": ok,
    }
    _emit(payload, cfg.out)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_suite(cfg: RunConfig, only: str | None) -> int:
    try:
        results = suite_mod.run_suite(only=only)
    except ValueError as exc:
        raise UsageError(str(exc))
    for res in results:
        line = "%s  %-14s residual=%.3e tol=%.1e (%.1fs)" % (
            "PASS" if res["pass"] else "FAIL", res["name"],
            res["residual"], res["tol"], res["seconds"])
        print(line)
    ok = all(r["pass"] for r in results)
    if cfg.out:
        payload = {"schema": SCHEMA, "config": _config_dict(cfg),
                   "results": _strip_seconds(results), "pass": ok}
        _emit(payload, cfg.out)
    return EXIT_OK if ok else EXIT_FAIL


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--space", help="proj:m, twisted:n or blproj:n")
    sub.add_argument("--q", type=float, help="modulus of q")
    sub.add_argument("--q-arg", type=float, default=0.0,
                     help="argument of q in units of pi (default 0)")
    sub.add_argument("--Q", type=float, help="modulus of Q")
    sub.add_argument("--Q-arg", type=float, default=0.0,
                     help="argument of Q in units of pi (default 0)")
    sub.add_argument("--k", type=int, help="single line-bundle index")
    sub.add_argument("--m", type=int, help="period level magnitude "
                     "(default: n of the ambient space)")
    sub.add_argument("--tol", type=float, default=1e-4,
                     help="report tolerance, in [1e-12, 1e-3]")
    sub.add_argument("--out", help="write the payload to this path")
    sub.add_argument("--format", choices=("json", "csv"), default="json")


def _to_config(args: argparse.Namespace, command: str) -> RunConfig:
    q = [args.q, args.q_arg] if args.q is not None else None
    Q = [args.Q, args.Q_arg] if args.Q is not None else None
    return RunConfig(command=command, space=args.space, q=q, Q=Q,
                     k=args.k, m=args.m, tol=args.tol, out=args.out,
                     format=args.format)


def main(argv: list[str] | None = None) -> int:
    parser = _Parser(prog="gamma-monodromy",
                     description="reflection vectors from quantum "
                                 "cohomology monodromy")
    subs = parser.add_subparsers(dest="command", required=True)
    for name, text in (("reflections", "extract reflection vectors"),
                       ("phi", "oscillatory integral comparison"),
                       ("suite", "run the acceptance checks")):
        sub = subs.add_parser(name, help=text)
        _add_common(sub)
        if name == "suite":
            sub.add_argument("--only", help="run a single criterion")
    args = parser.parse_args(argv)
    cfg = _to_config(args, args.command)
    try:
        if args.command == "reflections":
            return cmd_reflections(cfg)
        if args.command == "phi":
            return cmd_phi(cfg)
        return cmd_suite(cfg, args.only)
    except UsageError as exc:
        print("gamma-monodromy: error: %s" % exc, file=sys.stderr)
        return EXIT_USAGE
    except (NumericsError, mirror.FitQualityError,
            np.linalg.LinAlgError) as exc:
        print("gamma-monodromy: numerical failure: %s" % exc,
              file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
