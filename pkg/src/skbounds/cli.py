"""Command-line front end.

    skbounds rs --beta 1 --b 0 --q 0
    skbounds rs --beta 10 --b 0.001 --minimize --bound lower
    skbounds verify
    skbounds scan --beta-values 1/0.1,1/0.5 --b-values 0.001 --optimize --out scan.csv
    skbounds oracle --n 6 --beta 1 --b 0.5 --samples 2000 --seed 1

Settings are resolved as: built-in defaults, then ``--config FILE``
(``key = value`` lines), then the environment (``SKBOUNDS_QUAD_ORDER``,
``SKBOUNDS_THREADS``), then command-line flags.

Exit codes: 0 success, 1 verification failure, 2 usage error, 3 I/O error.
"""

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, asdict, replace
from fractions import Fraction

from . import __version__
from .ed_oracle import MAX_SPINS, MIN_SPINS, phi_n_estimate
from .errors import ConfigurationError, SkBoundsError
from .falk_bruch import FBConstants, nonexact_condition
from .instability import scan_region, verify_paper_points
from .quadrature import DEFAULT_ORDER
from .rs_bound import Couplings, RSPoint, minimize_rs, phi_lower, phi_upper
from .rsb_bound import RSBPoint

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3

SCAN_FIELDS = ("beta", "b", "m", "q1", "q2", "q_star", "theta_min", "positive",
               "quad_order", "convergence_gap")
MIN_QUAD_ORDER, MAX_QUAD_ORDER = 8, 512


@dataclass(frozen=True)
class RunConfig:
    quad_order: int = DEFAULT_ORDER
    kappa: float = 0.763
    output_format: str = "csv"
    seed: int = 0
    threads: object = "auto"

    def __post_init__(self):
        if not MIN_QUAD_ORDER <= self.quad_order <= MAX_QUAD_ORDER:
            raise ConfigurationError(
                f"quad_order must be in [{MIN_QUAD_ORDER}, {MAX_QUAD_ORDER}], got {self.quad_order}"
            )
        if self.output_format not in ("csv", "json"):
            raise ConfigurationError(f"output_format must be csv or json, got {self.output_format!r}")
        if not 0 <= self.seed < 2**64:
            raise ConfigurationError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.threads != "auto" and not (isinstance(self.threads, int) and self.threads >= 1):
            raise ConfigurationError(f"threads must be a positive integer or 'auto', got {self.threads!r}")
        FBConstants(kappa=self.kappa)

    @property
    def workers(self):
        if self.threads == "auto":
            return os.cpu_count() or 1
        return self.threads


def parse_number(text):
    """Parse a decimal or ``a/b`` rational (e.g. ``1/0.10``) exactly, then round once."""
    text = str(text).strip()
    try:
        if "/" in text:
            num, den = text.split("/", 1)
            value = Fraction(num.strip()) / Fraction(den.strip())
        else:
            value = Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from exc
    return float(value)


def parse_threads(text):
    text = str(text).strip()
    if text == "auto":
        return "auto"
    try:
        value = int(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"threads must be an integer or 'auto', got {text!r}") from exc
    if value < 1:
        raise argparse.ArgumentTypeError("threads must be >= 1")
    return value


def parse_range(text):
    """``a:b:n`` -> n evenly spaced values from a to b inclusive."""
    parts = str(text).split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"range must look like a:b:n, got {text!r}")
    a, b = parse_number(parts[0]), parse_number(parts[1])
    try:
        n = int(parts[2])
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"range count must be an integer, got {parts[2]!r}") from exc
    if n < 1:
        raise argparse.ArgumentTypeError("range count must be >= 1")
    if n == 1:
        return [a]
    fa, fb = Fraction(a), Fraction(b)
    return [float(fa + (fb - fa) * Fraction(i, n - 1)) for i in range(n)]


def parse_values(text):
    return [parse_number(v) for v in str(text).split(",") if v.strip()]


def _spin_count(text):
    n = int(text)
    if not MIN_SPINS <= n <= MAX_SPINS:
        raise argparse.ArgumentTypeError(f"n must be in [{MIN_SPINS}, {MAX_SPINS}] (n >= 2 required)")
    return n


def _positive_int(text):
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return n


_CONFIG_KEYS = {
    "quad_order": int,
    "kappa": parse_number,
    "output_format": str,
    "seed": int,
    "threads": parse_threads,
}


def read_config_file(path):
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigurationError(f"{path}:{lineno}: expected key = value")
            key, value = (s.strip() for s in line.split("=", 1))
            key = key.replace("-", "_")
            if key not in _CONFIG_KEYS:
                raise ConfigurationError(f"{path}:{lineno}: unknown key {key!r}")
            try:
                values[key] = _CONFIG_KEYS[key](value)
            except (ValueError, argparse.ArgumentTypeError) as exc:
                raise ConfigurationError(f"{path}:{lineno}: {exc}") from exc
    return values


def resolve_config(args, environ=None):
    environ = os.environ if environ is None else environ
    settings = {}
    if getattr(args, "config", None):
        settings.update(read_config_file(args.config))
    try:
        if "SKBOUNDS_QUAD_ORDER" in environ:
            settings["quad_order"] = int(environ["SKBOUNDS_QUAD_ORDER"])
        if "SKBOUNDS_THREADS" in environ:
            settings["threads"] = parse_threads(environ["SKBOUNDS_THREADS"])
    except (ValueError, argparse.ArgumentTypeError) as exc:
        raise ConfigurationError(f"bad environment override: {exc}") from exc
    for key in _CONFIG_KEYS:
        if getattr(args, key, None) is not None:
            settings[key] = getattr(args, key)
    return replace(RunConfig(), **settings) if settings else RunConfig()


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return "nan" if math.isnan(value) else f"{value:.17g}"
    return str(value)


def render(config, fields, rows):
    """Serialize ``rows`` (dicts) as CSV or as ``{"config", "records"}`` JSON."""
    if config.output_format == "json":
        doc = {"config": asdict(config), "records": [{k: r[k] for k in fields} for r in rows]}
        return json.dumps(doc, indent=2, allow_nan=False) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(fields)
    for r in rows:
        writer.writerow([_fmt(r[k]) for k in fields])
    return buf.getvalue()


def _emit(text, out_path=None):
    if out_path is None:
        sys.stdout.write(text)
        return
    with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def cmd_rs(args, config):
    c = Couplings(args.beta, args.b)
    kinds = {"lower": ["rs_lower"], "upper": ["rs_upper"], "both": ["rs_lower", "rs_upper"]}[args.bound]
    rows = []
    for kind in kinds:
        if args.minimize:
            point, bound = minimize_rs(c, kind, config.quad_order)
        else:
            point = RSPoint(args.q)
            bound = (phi_lower if kind == "rs_lower" else phi_upper)(c, point, config.quad_order)
        rows.append({"kind": kind, "beta": c.beta, "b": c.b, "q": point.q,
                     "minimized": bool(args.minimize), "value": bound.value,
                     "quad_order": bound.quad_order, "convergence_gap": bound.convergence_gap})
    holds, margin = nonexact_condition(c, FBConstants(kappa=config.kappa))
    for r in rows:
        r["nonexact"] = holds
        r["nonexact_margin"] = margin
    fields = ("kind", "beta", "b", "q", "minimized", "value", "quad_order", "convergence_gap",
              "nonexact", "nonexact_margin")
    _emit(render(config, fields, rows))
    return EXIT_OK


VERIFY_FIELDS = ("beta", "b", "m", "q1", "q2", "q_star", "q_ref", "theta_min", "theta_ref",
                 "theta_at_ref_q", "abs_dev", "rel_dev", "convergence_gap", "status")


def cmd_verify(args, config):
    checks = verify_paper_points(config.quad_order)
    rows = []
    for chk in checks:
        pt, rec = chk.point, chk.record
        rows.append({"beta": pt.beta, "b": pt.b, "m": pt.m, "q1": pt.q1, "q2": pt.q2,
                     "q_star": rec.q_star, "q_ref": pt.q, "theta_min": rec.theta_min,
                     "theta_ref": pt.theta, "theta_at_ref_q": chk.theta_at_ref_q,
                     "abs_dev": chk.abs_dev, "rel_dev": chk.rel_dev,
                     "convergence_gap": rec.convergence_gap,
                     "status": "PASS" if chk.passed else "FAIL"})
    _emit(render(config, VERIFY_FIELDS, rows), args.out)
    failed = sum(not chk.passed for chk in checks)
    print(f"reference points: {len(checks) - failed}/{len(checks)} within tolerance", file=sys.stderr)
    return EXIT_OK if failed == 0 else EXIT_FAIL


def cmd_scan(args, config):
    betas = args.beta_values if args.beta_values is not None else args.beta_range
    bs = args.b_values if args.b_values is not None else args.b_range
    if betas is None or bs is None:
        raise ConfigurationError("scan needs --beta-range/--beta-values and --b-range/--b-values")
    if args.optimize:
        point = None
    elif None in (args.m, args.q1, args.q2):
        raise ConfigurationError("scan needs --optimize or all of --m, --q1, --q2")
    else:
        point = RSBPoint(args.m, args.q1, args.q2)
    records = scan_region(betas, bs, point, config.quad_order, config.workers)
    text = render(config, SCAN_FIELDS, [r.to_dict() for r in records])
    _emit(text, args.out)
    positive = sum(r.positive for r in records)
    failed = sum(r.error is not None for r in records)
    summary = f"positive: {positive}/{len(records)}" + (f" (failed cells: {failed})" if failed else "")
    print(summary, file=sys.stdout if args.out else sys.stderr)
    return EXIT_OK


ORACLE_FIELDS = ("n", "beta", "b", "samples", "seed", "mean", "stderr", "failures",
                 "phi_upper_min", "q_star", "verdict")


def cmd_oracle(args, config):
    c = Couplings(args.beta, args.b)
    est = phi_n_estimate(args.n, c, args.samples, config.seed, config.workers)
    q_star, bound = minimize_rs(c, "rs_upper", config.quad_order)
    ok = est.mean <= bound.value + 3.0 * est.stderr
    row = {"n": args.n, "beta": c.beta, "b": c.b, "samples": est.samples, "seed": est.seed,
           "mean": est.mean, "stderr": est.stderr, "failures": est.failures,
           "phi_upper_min": bound.value, "q_star": q_star.q, "verdict": "PASS" if ok else "FAIL"}
    _emit(render(config, ORACLE_FIELDS, [row]))
    print(f"mean <= Phi_U bound: {'PASS' if ok else 'FAIL'}", file=sys.stderr)
    return EXIT_OK if ok else EXIT_FAIL


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--quad-order", dest="quad_order", type=int, default=None,
                        help=f"quadrature order ({MIN_QUAD_ORDER}-{MAX_QUAD_ORDER}, default {DEFAULT_ORDER})")
    common.add_argument("--kappa", type=parse_number, default=None,
                        help="SK ground-state energy magnitude (default 0.763)")
    common.add_argument("--format", dest="output_format", choices=("csv", "json"), default=None)
    common.add_argument("--threads", type=parse_threads, default=None, help="worker threads or 'auto'")
    common.add_argument("--seed", type=int, default=None, help="random seed (oracle only)")
    common.add_argument("--config", default=None, help="key = value configuration file")

    parser = argparse.ArgumentParser(prog="skbounds", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rs", parents=[common], help="RS envelopes Phi_L / Phi_U")
    p.add_argument("--beta", type=parse_number, required=True)
    p.add_argument("--b", type=parse_number, required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--q", type=parse_number)
    group.add_argument("--minimize", action="store_true")
    p.add_argument("--bound", choices=("lower", "upper", "both"), default="both")
    p.set_defaults(func=cmd_rs)

    p = sub.add_parser("verify", parents=[common], help="recompute the five reference Theta values")
    p.add_argument("--out", default=None, help="write the table here instead of stdout")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("scan", parents=[common], help="min_q Theta over a (beta, b) grid")
    p.add_argument("--beta-range", type=parse_range, default=None, metavar="A:B:N")
    p.add_argument("--beta-values", type=parse_values, default=None, metavar="V1,V2,...")
    p.add_argument("--b-range", type=parse_range, default=None, metavar="A:B:N")
    p.add_argument("--b-values", type=parse_values, default=None, metavar="V1,V2,...")
    p.add_argument("--optimize", action="store_true", help="minimize Psi_U per cell")
    p.add_argument("--m", type=parse_number, default=None)
    p.add_argument("--q1", type=parse_number, default=None)
    p.add_argument("--q2", type=parse_number, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("oracle", parents=[common], help="exact-diagonalization check of phi_N <= Phi_U")
    p.add_argument("--n", type=_spin_count, required=True)
    p.add_argument("--beta", type=parse_number, required=True)
    p.add_argument("--b", type=parse_number, required=True)
    p.add_argument("--samples", type=_positive_int, default=2000)
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = resolve_config(args)
        return args.func(args, config)
    except ConfigurationError as exc:
        print(f"skbounds: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"skbounds: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except SkBoundsError as exc:
        print(f"skbounds: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
