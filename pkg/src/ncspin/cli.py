"""Command-line front end: ``ncspin {algebra,orbit,evolve,propagate,kernel}``.

Every command reads an optional JSON config. Values given as flags win over
the config, which wins over the built-in defaults. All inputs are validated
before any computation, and output files are written atomically.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import dynamics, liealg, orbit, quantum, spin
from .errors import (BranchViolation, ClosureFailure, ConvergenceFailure, DegenerateWeights,
                     DomainExit, DomainViolation, NcspinError, StepFailure)

EXIT_OK, EXIT_USAGE, EXIT_ALGEBRA, EXIT_INPUT, EXIT_DOMAIN, EXIT_STEP, EXIT_CONVERGENCE = range(7)


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


# -- I/O helpers -----------------------------------------------------------

def _complex_list(value, length: int | None = None, name: str = "value") -> np.ndarray:
    """Parse ``[[re, im], ...]`` (or plain reals) into a complex array."""
    try:
        out = np.array([complex(v[0], v[1]) if isinstance(v, (list, tuple)) else complex(v)
                        for v in value])
    except (TypeError, ValueError, IndexError) as exc:
        raise ConfigError(f"{name}: expected a list of [re, im] pairs") from exc
    if length is not None and out.shape != (length,):
        raise ConfigError(f"{name}: expected {length} entries, got {len(out)}")
    if not np.all(np.isfinite(out)):
        raise ConfigError(f"{name}: non-finite entries")
    return out


def _pairs(z) -> list:
    return [[float(np.real(v)), float(np.imag(v))] for v in np.atleast_1d(z)]


def _pair(z) -> list:
    return [float(np.real(z)), float(np.imag(z))]


def _write_atomic(path: str | None, text: str):
    if path is None:
        sys.stdout.write(text)
        return
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    return cfg


def _merge(defaults: dict, cfg: dict, flags: dict) -> dict:
    out = dict(defaults)
    out.update(cfg)
    out.update({k: v for k, v in flags.items() if v is not None})
    return out


def _positive(value, name: str) -> float:
    try:
        v = float(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name} must be a number") from exc
    if not np.isfinite(v) or v <= 0:
        raise ConfigError(f"{name} must be positive and finite")
    return v


def _int_at_least(value, low: int, name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        if not (isinstance(value, float) and value.is_integer()):
            raise ConfigError(f"{name} must be an integer")
    v = int(value)
    if v < low:
        raise ConfigError(f"{name} must be >= {low}")
    return v


# -- commands --------------------------------------------------------------

def cmd_algebra(opts: dict) -> tuple[int, dict]:
    Js = [_positive(j, "J") for j in np.atleast_1d(opts["J"])]
    samples = _int_at_least(opts["samples"], 1, "samples")
    tol = _positive(opts["tol"], "tol")
    sign_opt = opts["t7_sign"]
    if sign_opt not in ("auto", "+1", "-1", 1, -1):
        raise ConfigError("t7_sign must be auto, +1 or -1")

    report = liealg.verification_report()
    if sign_opt == "auto":
        basis = liealg.build_generators()
    else:
        basis = liealg.candidate_basis(int(sign_opt))
        report["t7_sign"] = basis.t7_sign
        report["t7_convention"] = "T_7 = %si lambda_6 / 2" % ("-" if basis.t7_sign < 0 else "+")
        report["residuals"] = liealg.basis_residuals(basis)
    report["forced_t7_sign"] = sign_opt != "auto"
    try:
        if max(report["residuals"].values()) > tol:
            bad = {k: v for k, v in report["residuals"].items() if v > tol}
            raise ClosureFailure(f"basis identities fail: {bad}")
        sc = liealg.structure_constants(basis, tol)
        report["spin_algebra"] = [
            {"J": J, **spin.verify_spin_algebra(basis, sc, J, samples, opts["seed"], tol).to_json()}
            for J in Js
        ]
    except ClosureFailure as exc:
        report["error"] = str(exc)
        return EXIT_ALGEBRA, report
    return EXIT_OK, report


def _parse_partition(value) -> tuple[int, ...]:
    if isinstance(value, str):
        value = [v for v in value.replace("{", "").replace("}", "").split(",") if v.strip()]
    try:
        return tuple(int(v) for v in value)
    except (TypeError, ValueError) as exc:
        raise ConfigError("partition must be a list of positive integers") from exc


def cmd_orbit(opts: dict) -> tuple[int, dict]:
    partition = _parse_partition(opts["partition"])
    x = opts["x"]
    if x is None:
        x = list(liealg.ReferenceElement.cp11(1.0).xs[:2]) if partition == (2,) else [2.0, 1.0]
    if isinstance(x, str):
        x = x.split(",")
    try:
        x1, x2 = (float(v) for v in x)
    except (TypeError, ValueError) as exc:
        raise ConfigError("x must be two reals x1, x2") from exc
    try:
        spec = orbit.OrbitSpec(liealg.ReferenceElement(x1, x2), partition)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    result = orbit.classify_constraints(spec, seed=opts["seed"])
    return EXIT_OK, {"partition": list(partition), "x": [x1, x2, -x1 - x2],
                     "J1": spec.J1, "J2": spec.J2, **result.to_json()}


def cmd_evolve(opts: dict) -> tuple[int, dict, str]:
    J = _positive(opts["J"], "J")
    tol = _positive(opts["tol"], "tol")
    t_end = _positive(opts["t_end"], "t_end")
    try:
        c1 = np.asarray(opts["c1"], dtype=float)
        if opts.get("c2") is None:
            spec = dynamics.HamiltonianSpec(np.zeros((8, 8)), c1, J)
        else:
            spec = dynamics.HamiltonianSpec.from_upper_triangle(opts["c2"], c1, J)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    if not 1e-12 <= tol <= 1e-4:
        raise ConfigError("tol must lie in [1e-12, 1e-4]")
    xi0 = _complex_list(opts["xi0"], 2, "xi0")
    p0 = dynamics.validate_initial_point(xi0)

    traj = dynamics.integrate(p0, spec, t_end, tol)
    summary = {"J": J, "t_end": t_end, "tol": tol, "steps": len(traj.times) - 1, **traj.stats}
    omegas = spec.torus_frequencies()
    if omegas is not None:
        exact = np.array([dynamics.exact_torus_solution(p0, *omegas, t).coords for t in traj.times])
        summary["omegas"] = list(omegas)
        summary["exact_error"] = float(np.abs(traj.coords - exact).max())
    return EXIT_OK, summary, traj.to_csv()


def _grid_points(opts: dict, rng: np.random.Generator, n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    if opts.get("points") is not None:
        pts = []
        for i, entry in enumerate(opts["points"]):
            if not isinstance(entry, dict) or "xi" not in entry or "xi_prime" not in entry:
                raise ConfigError(f"points[{i}] needs xi and xi_prime")
            pts.append((_complex_list(entry["xi"], 2, f"points[{i}].xi"),
                        _complex_list(entry["xi_prime"], 2, f"points[{i}].xi_prime")))
        return pts

    def sample():
        v = rng.normal(size=2) + 1j * rng.normal(size=2)
        return v / np.linalg.norm(v) * opts["radius"] * np.sqrt(rng.uniform())

    xis = [sample() for _ in range(n)]
    xps = [sample() for _ in range(n)]
    return [(a, b) for a in xis for b in xps]


def cmd_propagate(opts: dict) -> tuple[int, dict]:
    J = _positive(opts["J"], "J")
    D = _int_at_least(opts["D"], 1, "D")
    tail_tol = _positive(opts["tol"], "tol")
    try:
        w1, w2 = (float(w) for w in opts["omegas"])
    except (TypeError, ValueError) as exc:
        raise ConfigError("omegas must be two reals") from exc
    times = [float(t) for t in np.atleast_1d(opts["t"])]
    rng = np.random.default_rng(opts["seed"])
    pts = _grid_points(opts, rng, _int_at_least(opts["grid"], 0, "grid"))
    for xi, xp in pts:
        r = float(np.sum(np.abs(xp.conj() * xi)))
        if r >= 1:
            raise BranchViolation(f"grid point with |xibar'_1 xi_1| + |xibar'_2 xi_2| = {r:.4g} >= 1")
        if quantum.series_tail_bound(r, J, D) >= tail_tol:
            raise ConvergenceFailure(f"D = {D} does not meet the tail bound at r = {r:.4g}")

    rows = []
    for xi, xp in pts:
        for t in times:
            kc = quantum.propagator_closed_form(xp.conj(), xi, t, w1, w2, J)
            kn = quantum.propagator_numeric(xp.conj(), xi, t, w1, w2, J, D, tail_tol)
            rows.append({"xi": _pairs(xi), "xi_prime": _pairs(xp), "t": t,
                         "K_closed": _pair(kc), "K_numeric": _pair(kn),
                         "kernel": _pair(quantum.kernel(xp.conj(), xi, J)),
                         "abs_err": float(abs(kc - kn))})
    out = {"J": J, "omegas": [w1, w2], "t": times, "D": D, "points": rows,
           "max_abs_err": max((r["abs_err"] for r in rows), default=0.0)}
    return EXIT_OK, out


def cmd_kernel(opts: dict) -> tuple[int, dict]:
    J = _positive(opts["J"], "J")
    order = _int_at_least(opts["order"], 0, "order")
    rng = np.random.default_rng(opts["seed"])
    pts = _grid_points(opts, rng, _int_at_least(opts["grid"], 0, "grid"))
    # evaluate first so a bad point aborts before any output is written
    rows = [{"xi": _pairs(xi), "xi_prime": _pairs(xp), "K": _pair(quantum.kernel(xp.conj(), xi, J))}
            for xi, xp in pts]
    coeffs = [{"m": m, "n": d - m, "value": quantum.kernel_coefficient(m, d - m, J)}
              for d in range(order + 1) for m in range(d, -1, -1)]
    return EXIT_OK, {"J": J, "points": rows, "coefficients": coeffs}


# -- entry point -----------------------------------------------------------

DEFAULTS = {
    "algebra": {"J": [0.5, 1.0, 1.5], "samples": 100, "tol": 1e-10, "t7_sign": "auto", "seed": 0},
    "orbit": {"partition": [2], "x": None, "seed": 0},
    "evolve": {"J": 1.0, "c1": [0, 0, 1.0, 0, 0, 0, 0, 0], "c2": None,
               "xi0": [[0.3, 0.1], [-0.2, 0.4]], "t_end": 10.0, "tol": 1e-10, "seed": 0},
    "propagate": {"J": 1.5, "omegas": [1.0, 0.5], "t": [0.1, 1.0, 5.0], "D": 40, "grid": 5,
                  "radius": 0.5, "points": None, "tol": 1e-12, "seed": 0},
    "kernel": {"J": 1.5, "order": 5, "grid": 3, "radius": 0.5, "points": None, "seed": 0},
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--out", help="output path (stdout if omitted)")
    common.add_argument("--seed", type=int)
    common.add_argument("--tol", type=float)

    parser = _Parser(prog="ncspin", description="SU(2,1) noncompact spin toolkit")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("algebra", parents=[common], help="verify generators and spin algebra")
    p.add_argument("--t7-sign", dest="t7_sign", choices=["auto", "+1", "-1"])
    p.add_argument("--samples", type=int)
    p.add_argument("--J", dest="J", type=float, nargs="+")

    p = sub.add_parser("orbit", parents=[common], help="classify constraints for a partition")
    p.add_argument("--partition", help="block sizes, e.g. 2 or 1,1")
    p.add_argument("--x", help="reference eigenvalues x1,x2")

    p = sub.add_parser("evolve", parents=[common], help="integrate a classical trajectory")
    p.add_argument("--J", dest="J", type=float)
    p.add_argument("--t-end", dest="t_end", type=float)
    p.add_argument("--summary", help="summary JSON path (stdout if --out is set, else stderr)")

    for name, text in (("propagate", "propagator grid"), ("kernel", "reproducing kernel grid")):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("--J", dest="J", type=float)
        p.add_argument("--grid", type=int, help="points per axis of the random grid")
        if name == "propagate":
            p.add_argument("--D", dest="D", type=int)
        else:
            p.add_argument("--order", type=int)
    return parser


_FLAG_KEYS = {"config", "out", "command", "summary"}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    flags = {k: v for k, v in vars(args).items() if k not in _FLAG_KEYS}
    try:
        opts = _merge(DEFAULTS[args.command], _load_config(args.config), flags)
        if args.command == "evolve":
            code, summary, csv_text = cmd_evolve(opts)
            _write_atomic(args.out, csv_text)
            text = _dump(summary)
            if args.summary:
                _write_atomic(args.summary, text)
            elif args.out:
                sys.stdout.write(text)
            else:
                sys.stderr.write(text)
            return code
        handler = {"algebra": cmd_algebra, "orbit": cmd_orbit,
                   "propagate": cmd_propagate, "kernel": cmd_kernel}[args.command]
        code, result = handler(opts)
        _write_atomic(args.out, _dump(result))
        return code
    except (ConfigError, DegenerateWeights, DomainViolation) as exc:
        print(f"ncspin: invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ClosureFailure as exc:
        print(f"ncspin: algebra failure: {exc}", file=sys.stderr)
        return EXIT_ALGEBRA
    except DomainExit as exc:
        print(f"ncspin: domain exit: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except StepFailure as exc:
        print(f"ncspin: integrator failure: {exc}", file=sys.stderr)
        return EXIT_STEP
    except (ConvergenceFailure, BranchViolation) as exc:
        print(f"ncspin: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except NcspinError as exc:
        print(f"ncspin: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
