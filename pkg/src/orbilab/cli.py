"""orbilab command line.

Every subcommand writes a CSV or JSON report whose header embeds the schema
version, the tool version and the effective configuration, so two runs with
the same configuration produce byte-identical files.

A ``--config`` file holds ``key = value`` lines (``#`` comments allowed);
explicit flags win over the file.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict
from fractions import Fraction

import numpy as np

from . import __version__
from .arith import (
    GAMMA0,
    GAMMA_FULL,
    ArchimedeanPlace,
    OrbifoldSignature,
    QuaternionData,
    coset_enumeration_oracle,
    descriptor,
    genus_defect,
    quaternion_archimedean_check,
    signature_volume,
    signature_volume_over_pi,
    synthetic_3d_descriptor,
)
from .diagnostics import SCAN_COLUMNS, bs_criterion_check, genus_ratio_scan, prime_levels
from .gromov import displacement_lower_bound_witness, random_orbit_sample, recheck_witness
from .hypmodels import Point, apply, random_isometry, translation
from .margulis import DEFAULT_EPSILON
from .trace import b1_upper_bound, geometric_side

SCHEMA_VERSION = 1
KINDS = {"gamma0": GAMMA0, "gamma": GAMMA_FULL}
BS_EPS_GRID = (0.01, 0.05, 0.1)
# not part of the reproducibility record
_UNRECORDED = {"config", "output", "command", "func", "jobs"}


class ConfigError(ValueError):
    pass


# --- parsing helpers ----------------------------------------------------------------

def _int_list(text: str) -> list[int]:
    text = text.strip()
    return [int(v) for v in text.split(",") if v.strip()] if text else []


def _float_list(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _places(text: str) -> list[ArchimedeanPlace]:
    """'+-,++,c' -> real place with a>0, b<0; real with a, b > 0; complex place."""
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if tok in ("c", "complex"):
            out.append(ArchimedeanPlace("complex"))
        elif len(tok) == 2 and set(tok) <= {"+", "-"}:
            out.append(ArchimedeanPlace("real", 1 if tok[0] == "+" else -1, 1 if tok[1] == "+" else -1))
        else:
            raise ValueError(f"bad place {tok!r}")
    return out


def _add_common(p: argparse.ArgumentParser, fmt: str):
    p.add_argument("--config", help="key = value file; flags override it")
    p.add_argument("--output", "-o", default="-", help="output path ('-' for stdout)")
    p.add_argument("--format", choices=("csv", "json"), default=fmt)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)


def _add_family(p: argparse.ArgumentParser):
    p.add_argument("--kind", choices=sorted(KINDS), default="gamma0")
    p.add_argument("--primes", action="store_true", help="prime levels only")
    p.add_argument("--nmin", type=int, default=1)
    p.add_argument("--nmax", type=int, default=1000)
    p.add_argument("--eps", type=float, default=DEFAULT_EPSILON)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="orbilab", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"orbilab {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("signature", help="orbifold Gauss-Bonnet volume and genus defect")
    p.add_argument("--g", type=int, default=0, help="genus")
    p.add_argument("--cusps", type=int, default=0)
    p.add_argument("--cones", type=_int_list, default=[], help="comma-separated cone orders")
    _add_common(p, "json")
    p.set_defaults(func=cmd_signature)

    p = sub.add_parser("gamma0-scan", help="descriptors, genus ratio and thin fraction per level")
    _add_family(p)
    _add_common(p, "csv")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("bs-check", help="thin-fraction verdict on the top volume decile")
    _add_family(p)
    p.add_argument("--threshold", type=float, default=1e-3)
    _add_common(p, "json")
    p.set_defaults(func=cmd_bs_check)

    p = sub.add_parser("trace", help="geometric side of the heat trace for a synthetic 3-orbifold")
    p.add_argument("--scale", type=float, default=1.0)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--degree", type=int, choices=(0, 1), default=0)
    p.add_argument("--eps", type=float, default=DEFAULT_EPSILON)
    _add_common(p, "json")
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("b1-bound", help="heat-trace upper bound on b1/vol over a t grid")
    p.add_argument("--scale", type=float, default=1.0)
    p.add_argument("--t-grid", type=_float_list, default=[1.0, 10.0, 50.0, 100.0])
    p.add_argument("--eps", type=float, default=DEFAULT_EPSILON)
    _add_common(p, "csv")
    p.set_defaults(func=cmd_b1)

    p = sub.add_parser("orbit-lemma", help="witness for the linear displacement lower bound")
    p.add_argument("--length", type=float, default=2 * math.log(2), help="translation length")
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--rho-max", type=float, default=10.0)
    p.add_argument("--kmin", type=int, default=5)
    p.add_argument("--kmax", type=int, default=60)
    p.add_argument("--a-cap", type=float, default=None)
    p.add_argument("--conjugate", action="store_true", help="conjugate by a random isometry")
    _add_common(p, "csv")
    p.set_defaults(func=cmd_orbit)

    p = sub.add_parser("quaternion-check", help="archimedean splitting pattern of (-a, -b)")
    p.add_argument("--degree", type=int, required=False, default=None)
    p.add_argument("--places", type=_places, default=None,
                   help="comma list: 'c' for complex, or sign pair of (a, b) such as '-+'")
    _add_common(p, "json")
    p.set_defaults(func=cmd_quaternion)

    p = sub.add_parser("oracle-verify", help="closed formulas vs coset enumeration")
    p.add_argument("--kind", choices=sorted(KINDS), default="gamma0")
    p.add_argument("--nmin", type=int, default=1)
    p.add_argument("--nmax", type=int, default=300)
    _add_common(p, "csv")
    p.set_defaults(func=cmd_oracle)
    return ap


def _subparser(ap: argparse.ArgumentParser, name: str) -> argparse.ArgumentParser:
    for act in ap._actions:
        if isinstance(act, argparse._SubParsersAction):
            return act.choices[name]
    raise KeyError(name)


def read_config(path: str, sp: argparse.ArgumentParser) -> dict:
    """Parse key = value lines into typed defaults, naming line and field on error."""
    actions = {a.dest: a for a in sp._actions if a.dest not in ("help", "config")}
    out = {}
    try:
        fh = open(path, encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"config: cannot read {path}: {e.strerror}") from None
    with fh:
        for n, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"config line {n}: expected 'key = value'")
            key, value = (s.strip() for s in line.split("=", 1))
            dest = key.replace("-", "_")
            if dest not in actions:
                raise ConfigError(f"config line {n}: unknown field '{key}'")
            act = actions[dest]
            try:
                if isinstance(act, argparse._StoreTrueAction):
                    low = value.lower()
                    if low not in ("true", "false", "1", "0", "yes", "no"):
                        raise ValueError(value)
                    val = low in ("true", "1", "yes")
                else:
                    val = act.type(value) if act.type else value
                if act.choices is not None and val not in act.choices:
                    raise ValueError(value)
            except (TypeError, ValueError):
                raise ConfigError(f"config line {n}: invalid value for field '{key}': {value!r}") from None
            out[dest] = val
    return out


def parse(argv) -> argparse.Namespace:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.config:
        sp = _subparser(ap, args.command)
        sp.set_defaults(**read_config(args.config, sp))
        args = ap.parse_args(argv)
    validate(args)
    return args


def validate(args):
    def bad(field, msg):
        raise ConfigError(f"field '{field}': {msg}")

    if hasattr(args, "eps") and not 0 < args.eps <= DEFAULT_EPSILON:
        bad("eps", f"must lie in (0, {DEFAULT_EPSILON}], got {args.eps}")
    if hasattr(args, "nmax") and not 1 <= args.nmin <= args.nmax:
        bad("nmax", f"level range [{args.nmin}, {args.nmax}] is empty")
    if getattr(args, "t", 1.0) <= 0:
        bad("t", "must be positive")
    if hasattr(args, "t_grid") and (not args.t_grid or min(args.t_grid) <= 0):
        bad("t_grid", "must be a nonempty list of positive times")
    if getattr(args, "scale", 1.0) <= 0:
        bad("scale", "must be positive")
    if args.jobs < 1:
        bad("jobs", "must be at least 1")
    if args.command == "orbit-lemma":
        if not 1 <= args.kmin <= args.kmax:
            bad("kmax", f"k range [{args.kmin}, {args.kmax}] is empty")
        if args.length <= 0 or args.samples < 1:
            bad("length" if args.length <= 0 else "samples", "must be positive")
    if args.command == "quaternion-check" and not args.places:
        bad("places", "required")


# --- report writing --------------------------------------------------------------------

def recorded_config(args) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k not in _UNRECORDED}
    for k, v in cfg.items():
        if isinstance(v, list) and v and isinstance(v[0], ArchimedeanPlace):
            cfg[k] = [asdict(p) for p in v]
    return cfg


def _schema(args) -> str:
    return f"orbilab.{args.command}/{SCHEMA_VERSION}"


def render_csv(args, columns, rows) -> str:
    buf = io.StringIO()
    buf.write(f"# schema: {_schema(args)}\n")
    buf.write(f"# version: {__version__}\n")
    buf.write(f"# config: {json.dumps(recorded_config(args), sort_keys=True)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(r[c]) for c in columns])
    return buf.getvalue()


def _cell(v):
    if isinstance(v, float):
        return repr(v)
    return v


def render_json(args, result, columns=None) -> str:
    doc = {"schema": _schema(args), "version": __version__, "config": recorded_config(args),
           "result": result}
    if columns is not None:
        doc["columns"] = list(columns)
    return json.dumps(doc, sort_keys=True, indent=2, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, Fraction):
        return str(o)
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    raise TypeError(type(o).__name__)


def emit(args, text: str):
    if args.output == "-":
        sys.stdout.write(text)
        return
    try:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as e:
        raise ConfigError(f"field 'output': cannot write {args.output}: {e.strerror}") from None


def tabular(args, columns, rows, extra=None):
    rows = list(rows)
    if args.format == "csv":
        emit(args, render_csv(args, columns, rows))
    else:
        res = {"rows": rows}
        if extra:
            res.update(extra)
        emit(args, render_json(args, res, columns))


def document(args, result: dict):
    if args.format == "json":
        emit(args, render_json(args, result))
    else:
        keys = sorted(result)
        emit(args, render_csv(args, keys, [{k: _flat(result[k]) for k in keys}]))


def _flat(v):
    if isinstance(v, (dict, list, tuple)):
        return json.dumps(v, sort_keys=True, default=_json_default)
    if isinstance(v, Fraction):
        return str(v)
    return v


# --- commands ---------------------------------------------------------------------------

def cmd_signature(args) -> int:
    sig = OrbifoldSignature(args.g, args.cusps, tuple(args.cones))
    gd = genus_defect(sig)
    document(args, {
        "vol_over_pi": str(signature_volume_over_pi(sig)),
        "volume": signature_volume(sig),
        "neg_euler_characteristic": str(sig.neg_euler_characteristic),
        "genus_defect": str(gd.exact),
        "count_bound": str(gd.count_bound),
        "published_bound": gd.published_bound,
        "published_bound_holds": gd.published_bound_holds,
    })
    return 0


def _levels(args) -> list[int]:
    if args.primes:
        return prime_levels(args.nmin, args.nmax)
    return list(range(args.nmin, args.nmax + 1))


def _scan(args, eps=None):
    levels = _levels(args)
    if not levels:
        raise ConfigError(f"field 'nmax': no levels in [{args.nmin}, {args.nmax}]")
    eps = args.eps if eps is None else eps
    kind = KINDS[args.kind]
    if args.jobs > 1 and len(levels) > 2000:
        with ProcessPoolExecutor(args.jobs) as ex:
            return genus_ratio_scan(levels, eps, kind, ex)
    return genus_ratio_scan(levels, eps, kind)


def cmd_scan(args) -> int:
    series = _scan(args)
    tabular(args, SCAN_COLUMNS, series.rows())
    return 0


def cmd_bs_check(args) -> int:
    grid = sorted(set(BS_EPS_GRID) | {args.eps})
    verdicts = {}
    for eps in grid:
        v = bs_criterion_check(_scan(args, eps), args.threshold, eps)
        verdicts[repr(eps)] = json.loads(v.to_json())
    main = verdicts[repr(args.eps)]
    document(args, {"status": main["status"], "eps": args.eps, "threshold": args.threshold,
                    "tail_max": main["tail_max"], "by_eps": verdicts})
    return 0 if main["status"] == "pass" else 1


def cmd_trace(args) -> int:
    desc = synthetic_3d_descriptor(args.seed, args.scale, args.eps)
    side = geometric_side(desc, args.eps, args.t, args.degree)
    document(args, side.report())
    return 0


def cmd_b1(args) -> int:
    desc = synthetic_3d_descriptor(args.seed, args.scale, args.eps)
    rows = []
    for t in args.t_grid:
        b = b1_upper_bound(desc, args.eps, t)
        rows.append({"t": t, "bound": b.value, "identity_density": b.identity_density,
                     "correction": b.correction, "upper_bound": b.upper_bound})
    tabular(args, ("t", "bound", "identity_density", "correction", "upper_bound"), rows)
    return 0


def cmd_orbit(args) -> int:
    rng = np.random.default_rng(args.seed)
    g = translation(args.length)
    x = Point.h2(0.0, 1.0)
    if args.conjugate:
        h = random_isometry(rng)
        g, x = g.conjugate_by(h), apply(h, x)
    sample = random_orbit_sample(rng, g, x, args.samples, args.rho_max, (args.kmin, args.kmax))
    w = displacement_lower_bound_witness(sample, a_cap=args.a_cap)
    bad = recheck_witness(w, args.length)
    rows = [{"index": r.index, "rho": r.rho, "k": r.k, "lhs": r.lhs, "rhs": r.rhs, "slack": r.slack}
            for r in w.rows]
    summary = {"C": w.C, "A": w.A, "k0": w.k0, "verified": w.verified,
               "violations": len(w.violations), "recheck_failures": len(bad),
               "min_slack": w.min_slack}
    tabular(args, ("index", "rho", "k", "lhs", "rhs", "slack"), rows, {"summary": summary})
    print(json.dumps(summary, sort_keys=True), file=sys.stderr)
    return 0 if w.verified and not bad else 1


def cmd_quaternion(args) -> int:
    places = tuple(args.places)
    degree = args.degree if args.degree is not None else sum(2 if p.kind == "complex" else 1
                                                             for p in places)
    try:
        v = quaternion_archimedean_check(QuaternionData(degree, places))
    except ValueError as e:
        document(args, {"ok": False, "reason": str(e)})
        return 1
    document(args, {"ok": True, "split": list(v.split)})
    return 0


def cmd_oracle(args) -> int:
    kind = KINDS[args.kind]
    rows = []
    for N in range(args.nmin, args.nmax + 1):
        f, o = descriptor(N, kind), coset_enumeration_oracle(N, kind)
        rows.append({"N": N, "formula": list(f.fields()), "oracle": list(o.fields()),
                     "match": f.fields() == o.fields()})
    mismatches = sum(not r["match"] for r in rows)
    if args.format == "csv":
        flat = [{"N": r["N"], "formula": " ".join(map(str, r["formula"][1:])),
                 "oracle": " ".join(map(str, r["oracle"][1:])), "match": r["match"]} for r in rows]
        emit(args, render_csv(args, ("N", "formula", "oracle", "match"), flat))
    else:
        emit(args, render_json(args, {"mismatches": mismatches, "rows": rows}))
    print(f"{mismatches} mismatches for {args.kind} levels {args.nmin}..{args.nmax}", file=sys.stderr)
    return 0 if mismatches == 0 else 1


def main(argv=None) -> int:
    try:
        args = parse(argv)
        return args.func(args)
    except ConfigError as e:
        print(f"orbilab: error: {e}", file=sys.stderr)
        return 2
    except ValueError as e:
        print(f"orbilab: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
