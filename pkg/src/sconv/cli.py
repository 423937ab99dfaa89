"""Command-line interface: ``sconv bounds``, ``sconv verify`` and ``sconv compute``.

Rates are in nats unless ``--bits`` is given.  ``--config FILE`` reads an
INI file whose ``[sconv]`` section supplies defaults for any long flag
(dashes become underscores).  ``SCONV_SEED`` sets the default seed.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import math
import os
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import converses as cv
from . import derived, divergences, harness
from .channels import (
    KrausChannel,
    depolarizing_channel,
    erasure_channel,
    identity_channel,
    random_cptp,
)
from .states import (
    CqEnsemble,
    DensityMatrix,
    max_entangled,
    maximally_mixed,
    random_cq,
    random_density,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
LN2 = math.log(2.0)

BOUND_FAMILIES = {
    "classical-exponent": "classical_exponent",
    "classical-wolfowitz": "classical_wolfowitz",
    "quantum-exponent": "quantum_exponent",
    "quantum-wolfowitz": "quantum_wolfowitz",
    "erasure-renyi": "erasure_renyi",
    "erasure-hockeystick": "erasure_hockeystick",
}


class UsageError(Exception):
    pass


# --- spec parsing -------------------------------------------------------------


def parse_range(text: str) -> list[float]:
    """``"1..32"`` (inclusive integer range), ``"a..b:step"`` or a comma list."""
    out: list[float] = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        if ".." in part:
            lo, _, rest = part.partition("..")
            hi, _, step = rest.partition(":")
            lo_v, hi_v = float(lo), float(hi)
            st = float(step) if step else 1.0
            if st <= 0 or hi_v < lo_v:
                raise UsageError(f"bad range {part!r}")
            count = int(math.floor((hi_v - lo_v) / st + 1e-9)) + 1
            out.extend(lo_v + k * st for k in range(count))
        else:
            out.append(float(part))
    if not out:
        raise UsageError(f"empty range {text!r}")
    return out


def _int_range(text: str) -> list[int]:
    vals = parse_range(text)
    if any(v != int(v) or v < 1 for v in vals):
        raise UsageError(f"n values must be positive integers: {text!r}")
    return [int(v) for v in vals]


def _kv(text: str) -> dict[str, str]:
    out = {}
    for item in filter(None, text.split(",")):
        key, sep, val = item.partition("=")
        if not sep:
            raise UsageError(f"expected key=value, got {item!r}")
        out[key.strip()] = val.strip()
    return out


def _layout(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.lower().split("x"))


def _load_json(path: str):
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"no such file: {path}")
    return json.loads(p.read_text())


def parse_state(spec: str, seed: int) -> DensityMatrix:
    """``phi:d``, ``mixed:2x3``, ``random:layout=2x3,rank=2,seed=5`` or a JSON file."""
    if spec.endswith(".json"):
        return DensityMatrix.from_json(_load_json(spec))
    name, _, arg = spec.partition(":")
    if name == "phi":
        return max_entangled(int(arg))
    if name == "mixed":
        return maximally_mixed(_layout(arg))
    if name == "random":
        kv = _kv(arg)
        layout = _layout(kv.get("layout", "2x2"))
        rank = int(kv["rank"]) if "rank" in kv else None
        return random_density(layout, rank, int(kv.get("seed", seed)))
    raise UsageError(f"unknown state spec {spec!r}")


def parse_ensemble(spec: str, seed: int) -> CqEnsemble:
    """``random:nsym=3,layout=2,seed=1`` or a JSON file."""
    if spec.endswith(".json"):
        return CqEnsemble.from_json(_load_json(spec))
    name, _, arg = spec.partition(":")
    if name == "random":
        kv = _kv(arg)
        rank = int(kv["rank"]) if "rank" in kv else None
        return random_cq(int(kv.get("nsym", 2)), _layout(kv.get("layout", "2")),
                         int(kv.get("seed", seed)), rank)
    raise UsageError(f"unknown ensemble spec {spec!r}")


def parse_channel(spec: str, seed: int) -> KrausChannel:
    """``erasure:p=0.25,d=2``, ``depolarizing:q=0.1,d=2``, ``identity:d=2``,
    ``random:din=2,dout=2,denv=2,seed=3`` or a JSON file."""
    if spec.endswith(".json"):
        return KrausChannel.from_json(_load_json(spec))
    name, _, arg = spec.partition(":")
    kv = _kv(arg)
    d = int(kv.get("d", 2))
    if name == "erasure":
        return erasure_channel(float(kv.get("p", 0.0)), d)
    if name == "depolarizing":
        return depolarizing_channel(float(kv.get("q", 0.0)), d)
    if name == "identity":
        return identity_channel(d)
    if name == "random":
        din = int(kv.get("din", d))
        return random_cptp(din, int(kv.get("dout", din)), int(kv.get("denv", din)),
                           int(kv.get("seed", seed)))
    raise UsageError(f"unknown channel spec {spec!r}")


# --- bounds -------------------------------------------------------------------


def _require(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError("missing required option(s): " + ", ".join("--" + m.replace("_", "-") for m in missing))


def _sweep_points(args) -> list[tuple[float, float | None, int]]:
    rates = parse_range(args.rate)
    if args.bits:
        rates = [r * LN2 for r in rates]
    if args.lam is not None:
        params = parse_range(args.lam)
    elif args.s is not None:
        params = parse_range(args.s)
    else:
        params = [None]
    return [(r, q, n) for r in rates for q in params for n in _int_range(args.n)]


def _exponent_e0(args, s: float, quantum: bool) -> float:
    """Single-use E0 at ``s``: given directly or computed from state/ensemble and channel."""
    if args.e0 is not None:
        return float(args.e0)
    if quantum:
        _require(args, "state", "channel")
        return cv.quantum_e0(parse_state(args.state, args.seed), parse_channel(args.channel, args.seed), s)
    _require(args, "ensemble")
    ch = parse_channel(args.channel, args.seed) if args.channel else None
    return cv.classical_e0(parse_ensemble(args.ensemble, args.seed), ch, s)


def _s_value(args, q) -> float:
    if q is None:
        raise UsageError("this family needs --s (or --lambda)")
    return cv.s_from_order(q) if args.lam is not None else q


def evaluate_bounds(args) -> list[cv.BoundReport]:
    family = args.family
    if family not in BOUND_FAMILIES:
        raise UsageError(f"unknown bound family {family!r}; choose from {', '.join(BOUND_FAMILIES)}")
    _require(args, "rate", "n")
    reports = []
    e0_cache: dict[float, float] = {}
    for rate, q, n in _sweep_points(args):
        if family == "erasure-renyi":
            _require(args, "p", "dA", "lam")
            reports.append(cv.erasure_renyi_bound(n, rate, args.p, args.dA, q))
        elif family == "erasure-hockeystick":
            _require(args, "p", "dA")
            reports.append(cv.erasure_hockeystick_bound(n, rate, args.p, args.dA))
        elif family == "classical-wolfowitz":
            _require(args, "c1", "a1")
            reports.append(cv.classical_wolfowitz(n, rate, args.c1, args.a1))
        elif family == "quantum-wolfowitz":
            _require(args, "q_reg", "a_q")
            reports.append(cv.quantum_wolfowitz(n, rate, args.q_reg, args.a_q))
        else:
            s = _s_value(args, q)
            quantum = family == "quantum-exponent"
            if s not in e0_cache:
                e0_cache[s] = _exponent_e0(args, s, quantum)
            if quantum:
                # product of the single-use input: E0 adds over uses
                reports.append(cv.quantum_fidelity_exponent_bound(n, rate, s, n * e0_cache[s]))
            else:
                reports.append(cv.classical_exponent_bound(n, rate, s, e0_cache[s]))
    return reports


def render_bounds(reports: Sequence[cv.BoundReport], fmt: str, bits: bool) -> str:
    scale = 1.0 / LN2 if bits else 1.0
    buf = io.StringIO()
    if fmt == "csv":
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cv.CSV_HEADER)
        for r in reports:
            w.writerow([_fmt(v) for v in r.csv_row(scale)])
    else:
        for r in reports:
            d = r.to_dict()
            d["rate"] = d["rate"] * scale
            buf.write(json.dumps(d, sort_keys=True, default=_json_default) + "\n")
    return buf.getvalue()


def _fmt(v):
    return repr(v) if isinstance(v, float) else v


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, DensityMatrix):
        return obj.to_json()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_bounds(args) -> int:
    text = render_bounds(evaluate_bounds(args), args.format, args.bits)
    _emit(text, args.out)
    return EXIT_OK


# --- verify -------------------------------------------------------------------


def cmd_verify(args) -> int:
    if args.check != "all" and args.check not in harness.REGISTRY:
        raise UsageError(f"unknown check {args.check!r}; choose from all, {', '.join(harness.REGISTRY)}")
    try:
        reports = harness.run_check(args.check, args.trials, args.seed, args.tol, args.kind)
    except (ValueError, divergences.DivergenceError) as exc:
        raise UsageError(str(exc)) from exc
    _emit("".join(r.to_json() + "\n" for r in reports), args.out)
    return EXIT_OK if all(r.ok for r in reports) else EXIT_FAIL


# --- compute ------------------------------------------------------------------


def _kind(args):
    _require(args, "kind")
    return divergences.parse_kind(args.kind)


def _sigma(args):
    _require(args, "sigma")
    return parse_state(args.sigma, args.seed)


def _state(args):
    _require(args, "state")
    return parse_state(args.state, args.seed)


def _s_arg(args) -> float:
    _require(args, "s")
    return float(args.s)


def _compute_value(args):
    q = args.quantity
    if q == "divergence":
        return _kind(args)(_state(args), _sigma(args))
    if q == "relative-entropy":
        return divergences.relative_entropy(_state(args), _sigma(args))
    if q == "entropy":
        return divergences.entropy(_state(args))
    if q == "mutual":
        return divergences.mutual_information(_state(args), args.na)
    if q == "coherent":
        return divergences.coherent_information(_state(args), args.na)
    if q == "kq":
        kv = derived.k_q(_state(args), _kind(args), args.na, args.refine)
        return {"value": kv.value, "exact": kv.exact}
    if q == "kc":
        _require(args, "ensemble")
        kv = derived.k_c_cq(parse_ensemble(args.ensemble, args.seed), _kind(args), args.refine)
        return {"value": kv.value, "exact": kv.exact}
    if q == "sigma-star":
        _require(args, "lam")
        return derived.sibson_sigma_star(_state(args), float(args.lam), args.na)
    if q == "g":
        return cv.g_function(_state(args), _s_arg(args), args.na)
    if q == "e0":
        _require(args, "ensemble")
        ch = parse_channel(args.channel, args.seed) if args.channel else None
        return cv.classical_e0(parse_ensemble(args.ensemble, args.seed), ch, _s_arg(args))
    if q == "qe0":
        _require(args, "channel")
        return cv.quantum_e0(_state(args), parse_channel(args.channel, args.seed), _s_arg(args))
    if q == "variance-c":
        _require(args, "ensemble")
        return derived.info_variance_c(parse_ensemble(args.ensemble, args.seed))
    if q == "variance-q":
        return derived.info_variance_q(_state(args), args.na)
    if q == "capacity":
        _require(args, "p", "dA")
        return cv.erasure_capacity(args.p, args.dA)
    raise UsageError(f"unknown quantity {q!r}")


COMPUTE_QUANTITIES = (
    "divergence", "relative-entropy", "entropy", "mutual", "coherent", "kq", "kc",
    "sigma-star", "g", "e0", "qe0", "variance-c", "variance-q", "capacity",
)


def cmd_compute(args) -> int:
    value = _compute_value(args)
    inputs = {k: getattr(args, k) for k in ("state", "sigma", "ensemble", "channel", "kind", "s", "lam", "p", "dA", "na")
              if getattr(args, k, None) is not None}
    out = {"quantity": args.quantity, "seed": args.seed, "inputs": inputs}
    if isinstance(value, dict):
        out.update(value)
    else:
        out["value"] = value
    _emit(json.dumps(out, sort_keys=True, default=_json_default) + "\n", args.out)
    return EXIT_OK


# --- parser -------------------------------------------------------------------


def _default_seed() -> int:
    raw = os.environ.get("SCONV_SEED")
    if raw is None or raw == "":
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"SCONV_SEED must be an integer, got {raw!r}") from None


def build_parser(seed_default: int = 0) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sconv", description="Strong-converse bounds and checks.")
    parser.add_argument("--config", help="INI file; keys in [sconv] mirror long flags")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=seed_default)
        p.add_argument("--out", help="output path (default stdout)")

    b = sub.add_parser("bounds", help="evaluate a converse bound over a sweep")
    b.add_argument("family", help=", ".join(BOUND_FAMILIES))
    b.add_argument("--n", default="1", help="block lengths, e.g. 1..32 or 1,2,4")
    b.add_argument("--rate", help="rates (nats per use unless --bits)")
    b.add_argument("--s", help="s values in [-1/2, 0)")
    b.add_argument("--lambda", dest="lam", help="Renyi orders")
    b.add_argument("--p", type=float)
    b.add_argument("--dA", type=int)
    b.add_argument("--e0", type=float, help="single-use E0 (otherwise computed)")
    b.add_argument("--c1", type=float)
    b.add_argument("--a1", type=float)
    b.add_argument("--q-reg", dest="q_reg", type=float)
    b.add_argument("--a-q", dest="a_q", type=float)
    b.add_argument("--state")
    b.add_argument("--ensemble")
    b.add_argument("--channel")
    b.add_argument("--bits", action="store_true", help="rates in bits")
    b.add_argument("--format", choices=("csv", "json"), default="csv")
    common(b)
    b.set_defaults(func=cmd_bounds)

    v = sub.add_parser("verify", help="run a seeded verification check")
    v.add_argument("check", help="check name or 'all'")
    v.add_argument("--trials", type=int, default=100)
    v.add_argument("--tol", "--tolerance", dest="tol", type=float, default=None)
    v.add_argument("--kind", help="divergence kind for per-kind checks, e.g. renyi:2")
    common(v)
    v.set_defaults(func=cmd_verify)

    c = sub.add_parser("compute", help="evaluate a single quantity")
    c.add_argument("quantity", help=", ".join(COMPUTE_QUANTITIES))
    c.add_argument("--state")
    c.add_argument("--sigma")
    c.add_argument("--ensemble")
    c.add_argument("--channel")
    c.add_argument("--kind")
    c.add_argument("--s")
    c.add_argument("--lambda", dest="lam")
    c.add_argument("--p", type=float)
    c.add_argument("--dA", type=int)
    c.add_argument("--na", type=int, default=1, help="number of leading subsystems forming A")
    c.add_argument("--refine", action="store_true", help="local search for hockey-stick K")
    common(c)
    c.set_defaults(func=cmd_compute)
    return parser


def _apply_config(parser: argparse.ArgumentParser, path: str) -> None:
    if not Path(path).is_file():
        raise UsageError(f"no such config file: {path}")
    cfg = configparser.ConfigParser()
    cfg.read(path)
    if not cfg.has_section("sconv"):
        return
    values = {k.replace("-", "_"): v for k, v in cfg.items("sconv")}
    for action in parser._subparsers._group_actions:  # noqa: SLF001
        for sp in action.choices.values():
            known = {}
            for a in sp._actions:  # noqa: SLF001
                if a.dest in values:
                    raw = values[a.dest]
                    if a.type is not None:
                        raw = a.type(raw)
                    elif a.const is True:
                        raw = cfg.getboolean("sconv", a.dest)
                    known[a.dest] = raw
            sp.set_defaults(**known)


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        parser = build_parser(_default_seed())
        cfg_path = _config_path(argv)
        if cfg_path:
            _apply_config(parser, cfg_path)
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:
            return int(exc.code) if exc.code is not None else EXIT_OK
        return args.func(args)
    except UsageError as exc:
        print(f"sconv: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, KeyError) as exc:
        print(f"sconv: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def _config_path(argv: Sequence[str]) -> str | None:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    return known.config
