"""Command-line front end.

Every run echoes a header with the tool version, the fully resolved
configuration, and the tolerances in use, so reports are reproducible
from their own text.  Exit codes: 0 all checks passed, 1 a mathematical
check failed, 2 usage or configuration error.  Machine-readable output
(--machine) is tab-delimited with a fixed column order.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from . import __version__
from .compatibility import c5_tightness, check_all
from .duality import dual_psi, real_dual_norm, verify_duality_relations
from .generators import (
    GeneratorError,
    PsiFunction,
    TabulatedGenerator,
    certify,
    combine,
    psi_p,
    require_certified,
)
from .njconst import GeometryError, clarkson_check, nj_estimate, nj_exact_p
from .norms import BaseNorm, BlockVector, DimensionMismatch, ProductNorm
from .simplex import SimplexError, SimplexGrid, default_resolution
from .subdiff import SubdifferentialError, norm_subdiff_block

SEED_ENV_VAR = "SIGNSYM_SEED"

CONFIG_KEYS = {
    "psi", "phi", "n", "d", "base.p", "K", "seed", "samples", "budget",
    "restarts", "alpha", "strict", "machine",
}


class UsageError(Exception):
    """Bad flags, config keys, or input files."""


def _parse_exponent(text: str) -> float:
    text = text.strip()
    if text.startswith("p="):
        text = text[2:].strip()
    if text in ("inf", "Inf", "INF", "infinity"):
        return math.inf
    try:
        p = float(text)
    except ValueError:
        raise UsageError(f"cannot parse exponent {text!r}") from None
    return p


def _parse_p_term(term: str, n: int) -> PsiFunction:
    term = term.strip()
    if not term.startswith("p="):
        raise UsageError(f"generator term {term!r} must look like p=VALUE")
    return psi_p(_parse_exponent(term[2:]), n)


def load_table(path: str) -> TabulatedGenerator:
    """Read a tab-delimited grid table (header row, then t_1..t_n value)."""
    try:
        with open(path) as fh:
            lines = [ln.strip() for ln in fh if ln.strip()]
    except OSError as exc:
        raise UsageError(f"cannot read table file {path}: {exc}") from None
    if len(lines) < 2:
        raise UsageError(f"table file {path} has no data rows")
    rows = [ln.split("\t") for ln in lines[1:]]
    try:
        data = np.array([[float(v) for v in r] for r in rows])
    except ValueError:
        raise UsageError(f"non-numeric entry in table file {path}") from None
    n = data.shape[1] - 1
    if n < 2:
        raise UsageError(f"table file {path} needs at least 3 columns")
    coords, values = data[:, :n], data[:, n]
    positive = coords[coords > 1e-12]
    if positive.size == 0:
        raise UsageError(f"table file {path} contains no positive coordinates")
    K = int(round(1.0 / positive.min()))
    grid = SimplexGrid(n, K)
    if len(grid) != len(coords):
        raise UsageError(
            f"table file {path}: {len(coords)} rows do not form a resolution-{K} grid"
        )
    lattice = np.rint(coords * K).astype(int)
    if np.abs(lattice / K - coords).max() > 1e-9:
        raise UsageError(f"table file {path}: coordinates are not multiples of 1/{K}")
    ordered = np.empty(len(grid))
    for row, v in zip(lattice, values):
        ordered[grid.index[tuple(row)]] = v
    return TabulatedGenerator(grid, ordered)


def parse_psi_spec(spec: str, n: int | None) -> PsiFunction:
    """Generator specs: 'p=2', 'p=inf', 'table:FILE',
    'mix:W,p=A;W,p=B;...', 'max:p=A;p=B;...'."""
    spec = spec.strip()
    if spec.startswith("table:"):
        return load_table(spec[len("table:"):])
    if n is None:
        raise UsageError(f"generator spec {spec!r} requires --n")
    if spec.startswith("mix:"):
        weights, terms = [], []
        for part in spec[len("mix:"):].split(";"):
            pieces = part.split(",", 1)
            if len(pieces) != 2:
                raise UsageError(f"mix term {part!r} must look like WEIGHT,p=VALUE")
            try:
                weights.append(float(pieces[0]))
            except ValueError:
                raise UsageError(f"cannot parse mix weight {pieces[0]!r}") from None
            terms.append(_parse_p_term(pieces[1], n))
        return combine("convex-combination", terms, weights)
    if spec.startswith("max:"):
        terms = [_parse_p_term(part, n) for part in spec[len("max:"):].split(";")]
        return combine("pointwise-max", terms)
    return _parse_p_term(spec, n)


def read_config_file(path: str) -> dict:
    """Flat KEY=VALUE lines; '#' starts a comment; unknown keys rejected."""
    cfg = {}
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from None
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected KEY=VALUE, got {line!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        if key not in CONFIG_KEYS:
            raise UsageError(f"{path}:{lineno}: unknown config key {key!r}")
        cfg[key] = value.strip()
    return cfg


def load_data_file(path: str) -> list:
    """One comma-delimited numeric array per line."""
    try:
        with open(path) as fh:
            lines = [ln.strip() for ln in fh if ln.strip()]
    except OSError as exc:
        raise UsageError(f"cannot read data file {path}: {exc}") from None
    out = []
    for lineno, line in enumerate(lines, 1):
        try:
            out.append(np.array([float(v) for v in line.split(",")]))
        except ValueError:
            raise UsageError(f"{path}:{lineno}: non-numeric entry") from None
    return out


class Settings:
    """Resolved configuration: defaults, then config file, then flags."""

    DEFAULTS = {
        "psi": None, "phi": None, "n": None, "d": 1, "base.p": 2.0,
        "K": None, "seed": 0, "samples": 1000, "budget": 20_000,
        "restarts": 8, "alpha": 2.0, "strict": False, "machine": False,
    }

    def __init__(self, args: argparse.Namespace):
        values = dict(self.DEFAULTS)
        env_seed = os.environ.get(SEED_ENV_VAR)
        if env_seed is not None:
            try:
                values["seed"] = int(env_seed)
            except ValueError:
                raise UsageError(f"{SEED_ENV_VAR}={env_seed!r} is not an integer") from None
        if getattr(args, "config", None):
            for key, raw in read_config_file(args.config).items():
                values[key] = self._convert(key, raw)
        for key in self.DEFAULTS:
            flag = key.replace(".", "_")
            given = getattr(args, flag, None)
            if given is not None and given is not False:
                values[key] = given
        self.values = values

    @staticmethod
    def _convert(key: str, raw: str):
        if key in ("n", "d", "K", "seed", "samples", "budget", "restarts"):
            try:
                return int(raw)
            except ValueError:
                raise UsageError(f"config key {key}={raw!r} is not an integer") from None
        if key in ("base.p", "alpha"):
            return _parse_exponent(raw)
        if key in ("strict", "machine"):
            return raw.lower() in ("1", "true", "yes", "on")
        return raw

    def __getitem__(self, key):
        return self.values[key]

    def resolved_lines(self):
        for key in sorted(self.values):
            v = self.values[key]
            if v is None:
                continue
            yield f"{key}={v}"


def _require(settings: Settings, *keys):
    for key in keys:
        if settings[key] is None:
            raise UsageError(f"missing required setting --{key}")


def _psi_from(settings: Settings, key: str = "psi") -> PsiFunction:
    spec = settings[key]
    if spec is None:
        raise UsageError(f"missing required setting --{key}")
    return parse_psi_spec(spec, settings["n"])


def _base_from(settings: Settings) -> BaseNorm:
    return BaseNorm(settings["base.p"], settings["d"])


class Report:
    """Collects header lines, human-readable lines, and machine rows."""

    def __init__(self, command: str, settings: Settings, tolerances: str):
        self.machine = bool(settings["machine"])
        self.lines = []
        self.rows = []
        self.header(f"tool=signsym version={__version__} command={command}")
        self.header("config " + " ".join(settings.resolved_lines()))
        self.header(f"tolerances {tolerances}")

    def header(self, text: str):
        self.lines.append("# " + text)

    def say(self, text: str):
        self.lines.append(text)

    def row(self, *cells):
        self.rows.append("\t".join(str(c) for c in cells))

    def emit(self, stream=None):
        stream = stream or sys.stdout
        for line in self.lines:
            print(line, file=stream)
        if self.machine:
            for line in self.rows:
                print(line, file=stream)


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def cmd_certify(settings: Settings) -> int:
    psi = _psi_from(settings)
    K = settings["K"] or default_resolution(psi.n)
    rep = certify(psi, K)
    out = Report("certify", settings, "b1=1e-9 b2=1e-9 convexity=1e-9 strict-gap=1e-9")
    checks = [
        ("vertex-values", rep.b1_pass, rep.b1_worst),
        ("face-bound", rep.b2_pass, rep.b2_worst),
        ("midpoint-convexity", rep.convex_pass, rep.convex_worst),
        ("range-bounds", rep.bounds_pass, rep.bounds_worst),
        ("strict-convexity", rep.strictly_convex_pass, -rep.strict_smallest_gap),
    ]
    ok = rep.passed
    if settings["strict"]:
        ok = ok and rep.strictly_convex_pass
    for name, passed, margin in checks:
        required = name != "strict-convexity" or settings["strict"]
        status = "pass" if passed else ("FAIL" if required else "no")
        out.say(f"{name:20s} {status:4s} worst-margin {_fmt(margin)}")
        out.row("certify", name, status, _fmt(margin))
    if not rep.convex_pass and rep.convex_witness is not None:
        out.say(f"convexity witness: {rep.convex_witness}")
    out.say(f"checked {rep.checked_points} grid points at resolution {rep.resolution}")
    out.say("result " + ("PASS" if ok else "FAIL"))
    out.emit()
    return 0 if ok else 1


def cmd_dual(settings: Settings, out_path: str | None) -> int:
    psi = _psi_from(settings)
    require_certified(psi, settings["K"])
    K = settings["K"] or default_resolution(psi.n)
    result = dual_psi(psi, K)
    out = Report("dual", settings, f"closed-form-deviation<=2n/K={2*psi.n/K:.6g}")
    ok = True
    if result.psi_star.closed_form is not None:
        dev = float(np.max(np.abs(
            result.table_values
            - result.psi_star.closed_form.eval_many(result.grid.points_array)
        )))
        ok = dev <= 2.0 * psi.n / K
        out.say(f"closed-form max deviation {_fmt(dev)} (tolerance {_fmt(2*psi.n/K)})")
        out.row("dual", "closed-form-deviation", _fmt(dev))
    else:
        out.say("no closed form available; table is the result")
    if out_path:
        with open(out_path, "w") as fh:
            fh.write("\t".join([f"t_{i+1}" for i in range(psi.n)] + ["value"]) + "\n")
            for row in result.export_rows():
                fh.write("\t".join(_fmt(v) for v in row) + "\n")
        out.say(f"table written to {out_path} ({len(result.grid)} rows)")
    elif settings["machine"]:
        for row in result.export_rows():
            out.row("dual-table", *[_fmt(v) for v in row])
    out.say("result " + ("PASS" if ok else "FAIL"))
    out.emit()
    return 0 if ok else 1


def _load_points(settings: Settings, point: str | None, data: str | None):
    if point is not None:
        try:
            arrays = [np.array([float(v) for v in point.split(",")])]
        except ValueError:
            raise UsageError(f"cannot parse --point {point!r}") from None
    elif data is not None:
        arrays = load_data_file(data)
    else:
        raise UsageError("need --point or --data")
    return arrays


def cmd_norm_eval(settings: Settings, point: str | None, data: str | None) -> int:
    psi = _psi_from(settings)
    base = _base_from(settings)
    N = ProductNorm(psi, base)
    out = Report("norm-eval", settings, "exact evaluation")
    for k, arr in enumerate(_load_points(settings, point, data)):
        if arr.size != psi.n * base.d:
            raise UsageError(
                f"array {k}: length {arr.size} != n*d = {psi.n * base.d} "
                f"(blocks of {base.d})"
            )
        v = N(BlockVector.from_flat(arr, psi.n, base.d))
        out.say(f"norm[{k}] = {_fmt(v)}")
        out.row("norm-eval", k, _fmt(v))
    out.say("result PASS")
    out.emit()
    return 0


def cmd_subdiff(settings: Settings, point: str | None, data: str | None) -> int:
    psi = _psi_from(settings)
    base = _base_from(settings)
    N = ProductNorm(psi, base)
    K = settings["K"] or default_resolution(psi.n)
    out = Report("subdiff", settings,
                 f"pairing=1e-9 dual-norm={5*max(psi.n/K,1e-9):.3g}")
    ok = True
    for k, arr in enumerate(_load_points(settings, point, data)):
        if arr.size != psi.n * base.d:
            raise UsageError(
                f"array {k}: length {arr.size} != n*d = {psi.n * base.d} "
                f"(blocks of {base.d})"
            )
        x = BlockVector.from_flat(arr, psi.n, base.d)
        v = N(x)
        if v == 0.0:
            raise UsageError(f"array {k}: zero vector has the full dual ball")
        x = BlockVector.from_flat(arr / v, psi.n, base.d)
        res = norm_subdiff_block(N, x, K)
        elem = res.canonical
        from .duality import dual_norm_eval
        from .norms import pairing

        pair = pairing(elem, x)
        dn = dual_norm_eval(N, elem, K)
        out.say(f"point[{k}] element " + ",".join(_fmt(v) for v in elem.flat()))
        out.say(f"point[{k}] pairing {_fmt(pair)} dual-norm {_fmt(dn)} "
                f"elements-sampled {len(res.elements)}")
        out.row("subdiff", k, ",".join(_fmt(v) for v in elem.flat()),
                _fmt(pair), _fmt(dn))
        ok = ok and abs(pair - 1.0) <= 1e-9 and abs(dn - 1.0) <= res.dual_norm_tolerance
    out.say("result " + ("PASS" if ok else "FAIL"))
    out.emit()
    return 0 if ok else 1


def cmd_nj(settings: Settings) -> int:
    psi = _psi_from(settings)
    base = _base_from(settings)
    N = ProductNorm(psi, base)
    rep = nj_estimate(N, settings["budget"], settings["restarts"], settings["seed"])
    out = Report("nj", settings, "estimate-reproducibility=1e-12")
    out.say(f"estimate {_fmt(rep.estimate)}")
    if rep.exact is not None:
        out.say(f"exact {_fmt(rep.exact)}")
    out.say("witness-x " + ",".join(_fmt(v) for v in rep.witness_x.flat()))
    out.say("witness-y " + ",".join(_fmt(v) for v in rep.witness_y.flat()))
    out.row("nj", _fmt(rep.estimate), _fmt(rep.exact) if rep.exact is not None else "",
            ",".join(_fmt(v) for v in rep.witness_x.flat()),
            ",".join(_fmt(v) for v in rep.witness_y.flat()))
    ok = rep.exact is None or rep.estimate <= rep.exact + 1e-6
    out.say("result " + ("PASS" if ok else "FAIL"))
    out.emit()
    return 0 if ok else 1


def cmd_clarkson(settings: Settings) -> int:
    psi = _psi_from(settings)
    base = _base_from(settings)
    N = ProductNorm(psi, base)
    rep = clarkson_check(N, settings["alpha"], settings["samples"], settings["seed"])
    out = Report("clarkson", settings, "relative-slack=1e-9")
    out.say(f"alpha {_fmt(rep.params.alpha)} beta {_fmt(rep.params.beta)}")
    out.say(f"samples {rep.samples} violations {rep.violations} "
            f"worst-margin {_fmt(rep.worst_margin)}")
    if rep.violations:
        out.say("witness-x " + ",".join(_fmt(v) for v in rep.witness[0]))
        out.say("witness-y " + ",".join(_fmt(v) for v in rep.witness[1]))
    out.row("clarkson", _fmt(rep.params.alpha), rep.samples, rep.violations,
            _fmt(rep.worst_margin))
    out.say("result " + ("PASS" if rep.passed else "FAIL"))
    out.emit()
    return 0 if rep.passed else 1


def cmd_compat(settings: Settings) -> int:
    psi = _psi_from(settings)
    phi = parse_psi_spec(settings["phi"], settings["n"]) if settings["phi"] else _psi_from(settings)
    base = _base_from(settings)
    rep = check_all(psi, phi, base, settings["samples"], settings["seed"], settings["K"])
    out = Report("compat", settings, "ratio-slack=1e-10")
    for r in rep.rows:
        status = "skip" if r.skipped else ("pass" if r.passed else "FAIL")
        out.say(f"{r.condition} kappa {_fmt(r.kappa)} worst-ratio {_fmt(r.worst_ratio)} {status}")
        out.row("compat", r.condition, _fmt(r.kappa), _fmt(r.worst_ratio), status,
                r.witness_index)
    out.say(f"C5-tightness {_fmt(c5_tightness(psi, base))}")
    out.say("result " + ("PASS" if rep.passed else "FAIL"))
    out.emit()
    return 0 if rep.passed else 1


def cmd_duality_verify(settings: Settings) -> int:
    psi = _psi_from(settings)
    phi = parse_psi_spec(settings["phi"], settings["n"]) if settings["phi"] else _psi_from(settings)
    rep = verify_duality_relations(psi, phi, settings["K"], seed=settings["seed"])
    out = Report("duality-verify", settings, f"product-tolerance={rep.tolerance:.6g}")
    cc = rep.constants
    out.say(f"m {_fmt(cc.m)} M {_fmt(cc.M)} m* {_fmt(cc.m_star)} M* {_fmt(cc.M_star)}")
    out.say(f"m*M* product {_fmt(rep.product_mMstar)} M*m* product {_fmt(rep.product_Mmstar)} "
            + ("pass" if rep.products_pass else "FAIL"))
    out.say(f"grid order primal {rep.order_primal} dual {rep.order_dual} "
            + ("pass" if rep.order_pass else "FAIL"))
    out.say(f"norm-equivalence worst slack {_fmt(rep.sandwich_worst)} "
            + ("pass" if rep.sandwich_pass else "FAIL"))
    out.row("duality-verify", _fmt(cc.m), _fmt(cc.M), _fmt(cc.m_star), _fmt(cc.M_star),
            _fmt(rep.product_mMstar), _fmt(rep.product_Mmstar),
            rep.order_primal, rep.order_dual, _fmt(rep.sandwich_worst))
    out.say("result " + ("PASS" if rep.passed else "FAIL"))
    out.emit()
    return 0 if rep.passed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="signsym",
        description="Construct and verify sign-symmetric product norms "
                    "built from simplex generator functions.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="flat KEY=VALUE config file")
        p.add_argument("--psi", help="generator spec: p=2, p=inf, table:FILE, "
                                     "mix:0.5,p=1;0.5,p=inf, max:p=2;p=inf")
        p.add_argument("--phi", help="second generator spec")
        p.add_argument("--n", type=int, help="number of blocks")
        p.add_argument("--d", type=int, help="block dimension")
        p.add_argument("--base", dest="base_p", type=_parse_exponent,
                       metavar="P", help="base norm exponent (accepts inf)")
        p.add_argument("--K", type=int, help="grid resolution")
        p.add_argument("--seed", type=int, help="random seed "
                       f"(default from ${SEED_ENV_VAR} when set)")
        p.add_argument("--samples", type=int)
        p.add_argument("--budget", type=int)
        p.add_argument("--restarts", type=int)
        p.add_argument("--alpha", type=float)
        p.add_argument("--machine", action="store_true",
                       help="append machine-readable tab-delimited rows")

    for name in ("certify", "dual", "norm-eval", "subdiff", "nj",
                 "clarkson", "compat", "duality-verify"):
        p = sub.add_parser(name)
        common(p)
        if name == "certify":
            p.add_argument("--strict", action="store_true",
                           help="require strict convexity")
        if name == "dual":
            p.add_argument("--out", help="write the dual table to this file")
        if name in ("norm-eval", "subdiff"):
            p.add_argument("--point", help="one comma-delimited flat vector")
            p.add_argument("--data", help="file with one comma-delimited array per line")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        settings = Settings(args)
        if settings["psi"] is None:
            raise UsageError("missing required setting --psi")
        if args.command == "certify":
            return cmd_certify(settings)
        if args.command == "dual":
            return cmd_dual(settings, getattr(args, "out", None))
        if args.command == "norm-eval":
            return cmd_norm_eval(settings, args.point, args.data)
        if args.command == "subdiff":
            return cmd_subdiff(settings, args.point, args.data)
        if args.command == "nj":
            return cmd_nj(settings)
        if args.command == "clarkson":
            return cmd_clarkson(settings)
        if args.command == "compat":
            return cmd_compat(settings)
        if args.command == "duality-verify":
            return cmd_duality_verify(settings)
        raise UsageError(f"unknown command {args.command!r}")
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (GeneratorError, SimplexError, DimensionMismatch,
            GeometryError, SubdifferentialError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
