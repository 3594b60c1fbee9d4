"""Command line entry point.

Exit status: 0 when every asserted check passes, 1 for usage or configuration
errors, 2 when a numerical check fails.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .audit import audit_moments, reports_to_csv
from .errors import ConfigError, VCSError
from .families import canonical_scalar_family, clifford_zr_model, coupled_family, random_invertible_family
from .jaynes_cummings import (
    JCParams,
    build_jc_cs,
    closed_form_observables,
    general_cs,
    series_observables,
)
from .oscillator import (
    LadderContext,
    commutator_table,
    coupled_identities,
    coupled_rational_checks,
    eigenstate_residual,
)
from .registry import DEFAULT_MEASURE, FAMILIES, FAMILY_KEYS, build_model, normalization_checks
from .susy import RhoParams, rho_potentials
from .vcs import FockTruncation

EXIT_OK, EXIT_CONFIG, EXIT_CHECK = 0, 1, 2

COMMON_KEYS = {"levels", "seed", "samples", "radius_max"}
JC_KEYS = {"omega", "omega0", "kappa", "z1", "z2", "x", "c1", "c2"}
RHO_KEYS = {"gamma", "epsilon", "beta", "z1", "z2"}
ALGEBRA_FAMILIES = ("coupled", "canonical", "random", "probe", "jc")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _number(text: str):
    text = text.strip()
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    try:
        return complex(text.replace(" ", ""))
    except ValueError:
        pass
    return text


def read_params(path: str | None, allowed: set) -> dict:
    """``key = value`` lines; ``#`` starts a comment.  Unknown keys raise ConfigError naming the key."""
    if path is None:
        return {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read parameter file: {exc}") from exc
    out = {}
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in allowed:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        if key in out:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        out[key] = _number(value)
    return out


def _parse_sweep(text: str, allowed: set):
    try:
        key, spec = text.split("=", 1)
        lo, hi, num = spec.split(":")
        lo, hi, num = float(lo), float(hi), int(num)
    except ValueError as exc:
        raise ConfigError(f"sweep must look like key=lo:hi:count, got {text!r}") from exc
    if key not in allowed:
        raise ConfigError(f"cannot sweep {key!r}; choose from {', '.join(sorted(allowed))}")
    if num < 1:
        raise ConfigError("sweep count must be positive")
    return key, np.linspace(lo, hi, num)


def _positive(name):
    def conv(text):
        val = float(text)
        if not val > 0:
            raise argparse.ArgumentTypeError(f"{name} must be positive")
        return val
    return conv


def _emit(payload, fmt: str, out: str | None, csv_rows=None):
    if fmt == "json":
        text = json.dumps(payload, sort_keys=True, indent=1, allow_nan=True) + "\n"
    else:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        for row in csv_rows or []:
            writer.writerow(row)
        text = buf.getvalue()
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, complex):
        return f"{v.real!r}{v.imag:+}j"
    return repr(v) if isinstance(v, float) else v


# -- verify / moment-audit ----------------------------------------------------

def _model_and_measure(args, params):
    model = build_model(args.family, params)
    name = args.measure or DEFAULT_MEASURE[args.family]
    if name not in model.measures:
        raise ConfigError(f"family {args.family!r} has no measure {name!r}; choose from {', '.join(model.measures)}")
    return model, model.measures[name]


def _family_params(args, extra=()):
    allowed = COMMON_KEYS | set(FAMILY_KEYS[args.family]) | set(extra)
    return read_params(args.params, allowed)


def cmd_moment_audit(args) -> int:
    params = _family_params(args)
    model, measure = _model_and_measure(args, params)
    levels = int(params.get("levels", 30 if args.family != "rho" else 20))
    results = audit_moments(model.family, model.variable, measure, model.normalization, range(levels + 1), args.tol)
    if args.format == "json":
        _emit([r.as_record() for r in results], "json", args.out)
    else:
        text = reports_to_csv(results)
        if args.out:
            Path(args.out).write_text(text)
        else:
            sys.stdout.write(text)
    return EXIT_OK if all(r.passed for r in results) else EXIT_CHECK


def cmd_verify(args) -> int:
    params = _family_params(args)
    model, measure = _model_and_measure(args, params)
    seed = int(params.get("seed", 0))
    levels = int(params.get("levels", 30 if args.family != "rho" else 20))
    trunc = FockTruncation(model.family.dimension, level_cutoff=args.truncation, tail_tolerance=1e-16)
    norm = normalization_checks(model, int(params.get("samples", 20)), float(params.get("radius_max", 3.0)),
                                seed, trunc)
    audit = audit_moments(model.family, model.variable, measure, model.normalization, range(levels + 1), args.tol)
    norm_tol = max(args.tol, 1e-9) if args.tol >= 1e-9 else args.tol
    norm_ok = all(c.passed(norm_tol) for c in norm)
    audit_ok = all(r.passed for r in audit)
    payload = {
        "command": "verify",
        "family": args.family,
        "measure": measure.name,
        "seed": seed,
        "tol": args.tol,
        "normalization": [
            {"radii": list(c.radii), "phases": list(c.phases), "norm_deviation": c.norm_deviation,
             "closed_form_deviation": c.closed_form_deviation, "pass": c.passed(norm_tol)}
            for c in norm
        ],
        "audit": [r.as_record() | {"refinement_change": r.refinement_change} for r in audit],
        "pass": norm_ok and audit_ok,
    }
    rows = [["check", "index", "deviation", "pass"]]
    rows += [["normalization", i, _cell(c.norm_deviation), c.passed(norm_tol)] for i, c in enumerate(norm)]
    rows += [["audit", r.m, _cell(r.deviation), r.passed] for r in audit]
    _emit(payload, args.format, args.out, rows)
    return EXIT_OK if payload["pass"] else EXIT_CHECK


# -- observables --------------------------------------------------------------

_OBS_COLUMNS = ("mean_A", "mean_Adag", "mean_HD", "mean_HD2", "mean_Q", "mean_P", "var_Q", "var_P", "var_HD",
                "snr", "mandel")


def _obs_deviation(a, b) -> float:
    worst = 0.0
    for key in _OBS_COLUMNS:
        x, y = getattr(a, key), getattr(b, key)
        if x is None or y is None:
            if (x is None) != (y is None):
                return math.inf
            continue
        worst = max(worst, abs(x - y))
    return worst


def _observable_point(p: JCParams, z1, z2, c1, c2, trunc):
    states = [build_jc_cs(p, z1, z2, k, trunc) for k in (0, 1)]
    closed = [closed_form_observables(p, z1, z2, k) for k in (0, 1)]
    series = [series_observables(p, s) for s in states]
    # general state: component-diagonal means combine with |c_k|^2
    general = series_observables(p, general_cs(states, [c1, c2]))
    w = (abs(c1) ** 2, abs(c2) ** 2)
    combined_hd = w[0] * closed[0].mean_HD + w[1] * closed[1].mean_HD
    return states, closed, series, general, combined_hd


def cmd_observables(args) -> int:
    params = read_params(args.params, COMMON_KEYS | JC_KEYS)
    p = JCParams(float(params.get("omega", 1.0)), float(params.get("omega0", 0.5)), float(params.get("kappa", 0.1)))
    z1 = complex(params.get("z1", 1.0))
    z2 = complex(params.get("z2", 1.0))
    c1 = complex(params.get("c1", 1.0))
    c2 = complex(params.get("c2", 0.0))
    if abs(abs(c1) ** 2 + abs(c2) ** 2 - 1.0) > 1e-12:
        raise ConfigError("c1, c2 must satisfy |c1|^2 + |c2|^2 = 1")
    trunc = FockTruncation(2, level_cutoff=args.truncation, tail_tolerance=1e-17)
    points = [(z1, z2)]
    if args.sweep:
        key, grid = _parse_sweep(args.sweep, {"r1", "r2", "theta1", "theta2"})
        points = []
        for val in grid:
            r1, t1, r2, t2 = abs(z1), np.angle(z1), abs(z2), np.angle(z2)
            if key == "r1":
                r1 = val
            elif key == "r2":
                r2 = val
            elif key == "theta1":
                t1 = val
            else:
                t2 = val
            points.append((complex(r1 * np.exp(1j * t1)), complex(r2 * np.exp(1j * t2))))
    records = []
    rows = [["z1_re", "z1_im", "z2_re", "z2_im", "k"] + [f"closed_{c}" for c in _OBS_COLUMNS]
            + [f"series_{c}" for c in _OBS_COLUMNS] + ["printed_snr", "deviation"]]
    ok = True
    for a, b in points:
        _, closed, series, general, combined = _observable_point(p, a, b, c1, c2, trunc)
        for k in (0, 1):
            dev = _obs_deviation(closed[k], series[k])
            ok &= dev <= args.tol
            records.append({"z1": [a.real, a.imag], "z2": [b.real, b.imag], "k": k,
                            "closed_form": closed[k].as_record(), "series": series[k].as_record(),
                            "deviation": dev})
            rows.append([repr(a.real), repr(a.imag), repr(b.real), repr(b.imag), k]
                        + [_cell(getattr(closed[k], c)) for c in _OBS_COLUMNS]
                        + [_cell(getattr(series[k], c)) for c in _OBS_COLUMNS]
                        + [_cell(closed[k].printed_snr), repr(dev)])
        if not args.sweep:
            records.append({"general": general.as_record(), "weights": [[c1.real, c1.imag], [c2.real, c2.imag]],
                            "combined_mean_HD": combined,
                            "deviation": abs(general.mean_HD - combined)})
    payload = {"command": "observables", "params": {"omega": p.omega, "omega0": p.omega0, "kappa": p.kappa},
               "records": records, "pass": bool(ok)}
    _emit(payload, args.format, args.out, rows)
    return EXIT_OK if ok else EXIT_CHECK


# -- algebra ------------------------------------------------------------------

def _algebra_family(name, params):
    if name == "coupled":
        return coupled_family(), False
    if name == "canonical":
        return canonical_scalar_family(), True
    if name == "random":
        return random_invertible_family(3, int(params.get("seed", 0))), False
    if name == "probe":
        return clifford_zr_model(twist=0.3).family, True
    from .jaynes_cummings import jc_family
    return jc_family(JCParams(1.0, 0.5, 0.1)).with_ordering("zr"), True


def cmd_algebra(args) -> int:
    name = args.family or "coupled"
    if name not in ALGEBRA_FAMILIES:
        raise ConfigError(f"algebra family must be one of {', '.join(ALGEBRA_FAMILIES)}")
    params = read_params(args.params, COMMON_KEYS)
    levels = int(params.get("levels", 60))
    family, diagonal = _algebra_family(name, params)
    ctx = LadderContext(family, levels)
    tables = {}
    ok = True
    for pair in ("A,A+", "N,A", "N,A+"):
        rows = commutator_table(ctx, pair, indexed=True)
        tables[f"indexed {pair}"] = rows
        ok &= max(d for _, d in rows) <= args.tol
        rows = commutator_table(ctx, pair, indexed=False)
        tables[f"global {pair}"] = rows
        # the global [N, A] and [N, A+] forms hold only when the x_m commute
        if pair == "A,A+" or diagonal:
            ok &= max(d for _, d in rows) <= args.tol
    report = {"command": "algebra", "family": name, "levels": levels, "factorial_error": ctx.factorial_error,
              "commutators": {k: max(d for _, d in v) for k, v in tables.items()}}
    if name == "coupled":
        ident = coupled_identities(ctx)
        report["identities"] = ident
        report["rational"] = coupled_rational_checks()
        ok &= all(v <= args.tol for k, v in ident.items() if "diagnostic" not in k)
        ok &= all(report["rational"].values())
    if family.ordering == "zr" or name in ("canonical", "jc", "probe"):
        seed = int(params.get("seed", 0))
        rng = np.random.default_rng(seed)
        n = family.dimension
        Z = np.diag(rng.uniform(0.2, 1.5, n) * np.exp(1j * rng.uniform(0, 2 * math.pi, n)))
        if name == "probe":
            from .families import su2_matrix
            Z = 1.2 * su2_matrix(0.4, 0.9, -0.3)
        trunc = FockTruncation(n, level_cutoff=levels, tail_tolerance=1e-16)
        res = [eigenstate_residual(ctx, Z, j, trunc) for j in range(n)]
        report["seed"] = seed
        report["eigenstate_residual"] = res
        report["eigenstate_asserted"] = bool(family.commutes_with_Z)
        if family.commutes_with_Z:
            ok &= max(res) <= 1e-12
    report["pass"] = bool(ok)
    rows = [["table", "m", "max_deviation"]]
    for key, vals in tables.items():
        rows += [[key, m, repr(d)] for m, d in vals]
    _emit(report, args.format, args.out, rows)
    return EXIT_OK if ok else EXIT_CHECK


# -- potentials ---------------------------------------------------------------

def cmd_potentials(args) -> int:
    params = read_params(args.params, COMMON_KEYS | RHO_KEYS)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        p = RhoParams(float(params.get("gamma", 0.0)), float(params.get("epsilon", 1.0)),
                      float(params.get("beta", 0.0)))
    problems = p.positivity_problems()
    _, grid = _parse_sweep(args.sweep or "x=0.25:4:16", {"x"})
    if np.any(grid <= 0):
        raise ConfigError("potentials need x > 0")
    rows = [["x", "V_plus", "V_minus"]]
    records = []
    for x in grid:
        try:
            vp, vm = rho_potentials(p, float(x))
        except VCSError:
            vp, vm = None, None
        rows.append([repr(float(x)), _cell(vp), _cell(vm)])
        records.append({"x": float(x), "V_plus": vp, "V_minus": vm})
    _emit({"command": "potentials", "params": {"gamma": p.gamma, "epsilon": p.epsilon, "beta": p.beta},
           "warnings": problems, "points": records}, args.format, args.out, rows)
    return EXIT_OK


# -- entry point ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="matvcs", description="Matrix-moment vector coherent states: checks and tables.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    specs = {
        "verify": "normalization and resolution-of-identity checks for one family",
        "moment-audit": "per-level moment matrices against the identity",
        "observables": "JC mean values, closed form next to series",
        "algebra": "ladder algebra commutators and eigenstate residuals",
        "potentials": "partner potentials of the SUSY radial oscillator",
    }
    for name, help_text in specs.items():
        sp = sub.add_parser(name, help=help_text)
        if name in ("verify", "moment-audit"):
            sp.add_argument("--family", required=True, choices=FAMILIES)
            sp.add_argument("--measure", default=None)
        elif name == "algebra":
            sp.add_argument("--family", default="coupled", choices=ALGEBRA_FAMILIES)
        else:
            sp.add_argument("--family", default=None, help=argparse.SUPPRESS)
        sp.add_argument("--params", default=None, help="key = value parameter file")
        sp.add_argument("--truncation", type=int, default=512, help="Fock level cutoff")
        sp.add_argument("--tol", type=_positive("tol"), default=1e-8)
        sp.add_argument("--out", default=None)
        sp.add_argument("--format", choices=("json", "csv"), default="json")
        if name in ("observables", "potentials"):
            sp.add_argument("--sweep", default=None, help="key=lo:hi:count, e.g. r1=0:3:31")
    return parser


COMMANDS = {
    "verify": cmd_verify,
    "moment-audit": cmd_moment_audit,
    "observables": cmd_observables,
    "algebra": cmd_algebra,
    "potentials": cmd_potentials,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.truncation < 1:
        parser.error("--truncation must be positive")
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"matvcs: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except VCSError as exc:
        print(f"matvcs: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CHECK


if __name__ == "__main__":
    sys.exit(main())
