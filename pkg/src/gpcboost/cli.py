"""Command-line front end: synthesize, min-horizon, sweep, simulate.

Exit codes: 0 success, 2 input error, 3 no stable horizon, 4 numerical blowup.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .errors import CornerDominanceViolated, NoStableHorizon, NotBoostable, NumericalBlowup
from .gpc import GpcConfig, synthesize
from .plant import GAIN_CONVENTIONS, METHODS, ConverterParams, discrete_plant, operating_point
from .sim import Event, Scenario, metrics, simulate
from .stability import assess, horizon_scan, robust_horizon, sweep

EXIT_OK, EXIT_INPUT, EXIT_NO_HORIZON, EXIT_BLOWUP = 0, 2, 3, 4

POLE_HEADER = "P,lambda,R,vref,pole_index,re,im,modulus,stable"
SUMMARY_HEADER = "P,lambda,R,vref,max_modulus,stable"
TRACE_HEADER = "t,iL,vO,duty,ref"

GPC_KEYS = {"horizon_p": "horizon_p", "horizon_nu": "horizon_nu", "lambda": "lam",
            "delta_w": "delta_w", "delay_d": "delay_d"}


class ConfigError(ValueError):
    pass


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.9g}"


@dataclass
class Config:
    converter: ConverterParams = field(default_factory=ConverterParams)
    gpc: GpcConfig = field(default_factory=GpcConfig)
    discretization: str = "zoh"
    gain_convention: str = "linearized"
    margin: float = 0.0
    output_dir: str = "out"

    def to_dict(self) -> dict:
        g = asdict(self.gpc)
        return {
            "converter": asdict(self.converter),
            "gpc": {k: g[attr] for k, attr in GPC_KEYS.items()},
            "discretization": self.discretization,
            "gain_convention": self.gain_convention,
            "margin": self.margin,
            "output_dir": self.output_dir,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Config":
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        top = {"converter", "gpc", "discretization", "gain_convention", "margin", "output_dir"}
        _reject_unknown(d, top, "")
        conv = d.get("converter", {})
        _reject_unknown(conv, {f.name for f in fields(ConverterParams)}, "converter.")
        gpc = d.get("gpc", {})
        _reject_unknown(gpc, set(GPC_KEYS), "gpc.")
        try:
            params = ConverterParams(**{k: float(v) for k, v in conv.items()})
        except NotBoostable:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"converter: {exc}") from exc
        try:
            ints = {"horizon_p", "horizon_nu", "delay_d"}
            gcfg = GpcConfig(**{GPC_KEYS[k]: (_as_int(v, "gpc." + k) if k in ints else float(v))
                                for k, v in gpc.items()})
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"gpc: {exc}") from exc
        method = d.get("discretization", "zoh")
        if method not in METHODS:
            raise ConfigError(f"discretization: expected one of {METHODS}, got {method!r}")
        gain = d.get("gain_convention", "linearized")
        if gain not in GAIN_CONVENTIONS:
            raise ConfigError(f"gain_convention: expected one of {GAIN_CONVENTIONS}, got {gain!r}")
        margin = float(d.get("margin", 0.0))
        if not margin >= 0:
            raise ConfigError("margin: must be >= 0")
        return cls(params, gcfg, method, gain, margin, str(d.get("output_dir", "out")))


def _as_int(v, key):
    if isinstance(v, bool) or not float(v).is_integer():
        raise ConfigError(f"{key}: expected an integer, got {v!r}")
    return int(v)


def _reject_unknown(d, allowed, prefix):
    if not isinstance(d, dict):
        raise ConfigError(f"{prefix.rstrip('.') or 'config'}: expected a JSON object")
    for k in d:
        if k not in allowed:
            raise ConfigError(f"unknown key {prefix}{k!r}")


def _load_json(path: str, what: str) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {what} {path}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc


def load_config(path: str | None) -> Config:
    return Config() if path is None else Config.from_dict(_load_json(path, "config"))


def load_scenario(path: str) -> Scenario:
    d = _load_json(path, "scenario")
    allowed = {f.name for f in fields(Scenario)}
    _reject_unknown(d, allowed, "")
    events = d.get("events", [])
    if not isinstance(events, list):
        raise ConfigError("events: expected a list")
    for i, e in enumerate(events):
        _reject_unknown(e, {"time", "kind", "value", "resynthesize"}, f"events[{i}].")
    try:
        return Scenario(**{**d, "events": tuple(Event(**e) for e in events)})
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"scenario: {exc}") from exc


def parse_range(text: str) -> list[float]:
    """``start:stop`` or ``start:step:stop`` (inclusive), or a single value."""
    parts = text.split(":")
    try:
        nums = [float(x) for x in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad range {text!r}") from None
    if len(nums) == 1:
        return nums
    if len(nums) == 2:
        start, step, stop = nums[0], 1.0, nums[1]
    elif len(nums) == 3:
        start, step, stop = nums
    else:
        raise argparse.ArgumentTypeError(f"bad range {text!r}")
    if step <= 0 or stop < start:
        raise argparse.ArgumentTypeError(f"range {text!r} must increase with a positive step")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [start + i * step for i in range(n)]


def parse_corners(text: str) -> tuple[float, float, float, float]:
    try:
        vals = tuple(float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad corners {text!r}") from None
    if len(vals) != 4:
        raise argparse.ArgumentTypeError("corners need rmin,rmax,vmin,vmax")
    return vals


def atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def pole_rows(p, lam, r, vref, poles, stable):
    return [",".join([fmt(p), fmt(lam), fmt(r), fmt(vref), str(i), fmt(z.real), fmt(z.imag),
                      fmt(abs(z)), fmt(stable)]) for i, z in enumerate(poles)]


def _poly_line(name, poly):
    return f"{name} = [" + ", ".join(fmt(c) for c in np.asarray(poly)) + "]"


def cmd_synthesize(cfg: Config, out: Path) -> int:
    plant = discrete_plant(cfg.converter, cfg.discretization, cfg.gain_convention)
    syn = synthesize(plant, cfg.gpc)
    rep = assess(plant, syn, cfg.margin)
    op = operating_point(cfg.converter)
    g = cfg.gpc
    lines = [
        "# GPC synthesis report",
        f"method = {cfg.discretization}",
        f"gain_convention = {cfg.gain_convention}",
        f"P = {g.horizon_p}", f"Nu = {g.horizon_nu}", f"lambda = {fmt(g.lam)}",
        f"delta = {fmt(g.delta_w)}", f"d = {g.delay_d}",
        f"duty_D = {fmt(op.d)}", f"iL0 = {fmt(op.il)}", f"vO0 = {fmt(op.vo)}",
        _poly_line("A", plant.a.coeffs),
        _poly_line("B_discrete", plant.b.coeffs),
        _poly_line("B_carima", syn.model.b.coeffs),
        _poly_line("A_tilde", syn.model.a_tilde.coeffs),
    ]
    if syn.model.shifted:
        lines.append("note = biproper numerator delayed one sample to act on u(k-1)")
    lines.append(f"[K] {len(syn.k_row)}")
    lines += [f"K[{j}] = {fmt(k)}" for j, k in enumerate(syn.k_row, 1)]
    lines.append(f"[F] {len(syn.f_polys)}")
    lines += [_poly_line(f"F[{j}]", f.coeffs) for j, f in enumerate(syn.f_polys, 1)]
    lines.append(f"[Gprime] {len(syn.gprime_polys)}")
    lines += [_poly_line(f"Gprime[{j}]", gp) for j, gp in enumerate(syn.gprime_polys, 1)]
    lines.append(_poly_line("D_closed_loop", rep.char_poly.coeffs))
    lines.append(f"D_order = {rep.order}")
    lines.append(f"[poles] {len(rep.poles)}")
    lines += [f"pole[{i}] = {fmt(z.real)} {fmt(z.imag)} |z|={fmt(abs(z))}" for i, z in enumerate(rep.poles)]
    lines.append(f"max_modulus = {fmt(rep.max_modulus)}")
    lines.append(f"stable = {fmt(rep.stable)}")
    path = out / "synthesis.txt"
    atomic_write(path, "\n".join(lines) + "\n")
    print(path)
    return EXIT_OK


def cmd_min_horizon(cfg: Config, out: Path, p_max: int, corners) -> int:
    params, lam = cfg.converter, cfg.gpc.lam
    kw = dict(method=cfg.discretization, margin=cfg.margin, base=cfg.gpc, gain=cfg.gain_convention)
    if corners:
        r_min, r_max, v_min, v_max = corners
        design = params.replace(r=min(r_min, r_max), vo_ref=max(v_min, v_max))
    else:
        design = params
    rows = [POLE_HEADER]
    found = None
    for p, rep in horizon_scan(design, lam, p_max, kw["method"], kw["margin"], kw["base"],
                               gain=kw["gain"]):
        rows += pole_rows(p, lam, design.r, design.vo_ref, rep.poles, rep.stable)
        if rep.stable:
            found = p
    atomic_write(out / "min_horizon_poles.csv", "\n".join(rows) + "\n")
    if found is None:
        print(f"error: NoStableHorizon: no stable P <= {p_max}", file=sys.stderr)
        return EXIT_NO_HORIZON
    if corners:
        try:
            found = robust_horizon(params, (r_min, r_max), (v_min, v_max), lam, p_max, **kw)
        except CornerDominanceViolated as exc:
            print(f"error: CornerDominanceViolated: {exc}", file=sys.stderr)
            return EXIT_NO_HORIZON
    print(found)
    return EXIT_OK


def cmd_sweep(cfg: Config, out: Path, grid: dict) -> int:
    recs = sweep(cfg.converter, grid, cfg.discretization, cfg.margin, cfg.gpc, cfg.gain_convention)
    poles, summary = [POLE_HEADER], [SUMMARY_HEADER]
    for rec in recs:
        key = [fmt(rec.horizon_p), fmt(rec.lam), fmt(rec.r), fmt(rec.vo_ref)]
        if rec.error:
            summary.append(",".join(key + ["", "error"]))
            poles.append(",".join(key + ["", "", "", "", "error"]))
            print(f"warning: P={rec.horizon_p} lambda={rec.lam:g} R={rec.r:g} vref={rec.vo_ref:g}: "
                  f"{rec.error}", file=sys.stderr)
            continue
        summary.append(",".join(key + [fmt(rec.max_modulus), fmt(rec.stable)]))
        poles += pole_rows(rec.horizon_p, rec.lam, rec.r, rec.vo_ref, rec.poles, rec.stable)
    atomic_write(out / "sweep_poles.csv", "\n".join(poles) + "\n")
    atomic_write(out / "sweep_summary.csv", "\n".join(summary) + "\n")
    print(f"{len(recs)} grid points -> {out / 'sweep_summary.csv'}")
    return EXIT_OK


def _write_trace(path: Path, tr) -> None:
    rows = [TRACE_HEADER]
    for k in range(len(tr)):
        rows.append(",".join(fmt(x) for x in (tr.t[k], tr.il[k], tr.vo[k], tr.duty[k], tr.ref[k])))
    atomic_write(path, "\n".join(rows) + "\n")


def cmd_simulate(cfg: Config, out: Path, scenario_path: str) -> int:
    scn = load_scenario(scenario_path)
    code = EXIT_OK
    try:
        tr = simulate(cfg.converter, cfg.gpc, scn, cfg.discretization, cfg.gain_convention)
    except NumericalBlowup as exc:
        print(f"error: NumericalBlowup: {exc}", file=sys.stderr)
        tr, code = exc.trace, EXIT_BLOWUP
    _write_trace(out / "trace.csv", tr)
    if len(tr) == 0:
        return code
    m = metrics(tr, float(tr.ref[-1]),
                duty_limits=(cfg.converter.duty_min, cfg.converter.duty_max))
    data = {k: (None if isinstance(v, float) and not math.isfinite(v) else v)
            for k, v in asdict(m).items()}
    data.update(ref_final=float(tr.ref[-1]), floor_clamped=tr.floor_clamped, notes=tr.notes,
                blowup=code == EXIT_BLOWUP)
    atomic_write(out / "metrics.json", json.dumps(data, indent=2) + "\n")
    for k, v in asdict(m).items():
        print(f"{k}={fmt(v)}")
    return code


def _common(parser, suppress=False):
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--config", metavar="PATH", default=d(None), help="JSON config file")
    parser.add_argument("--method", choices=METHODS, default=d(None), help="discretization")
    parser.add_argument("--margin", type=float, default=d(None), help="stability exclusion band")
    parser.add_argument("--out", metavar="DIR", default=d(None), help="output directory")
    parser.add_argument("--dump-config", action="store_true", default=d(False),
                        help="print the resolved config as JSON and exit")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gpcboost", description=__doc__.splitlines()[0])
    _common(ap)
    sub = ap.add_subparsers(dest="command")

    s = sub.add_parser("synthesize", help="write the controller report")
    _common(s, suppress=True)

    s = sub.add_parser("min-horizon", help="smallest stabilizing prediction horizon")
    _common(s, suppress=True)
    s.add_argument("--p-max", type=int, default=40)
    s.add_argument("--corners", type=parse_corners, default=None, metavar="RMIN,RMAX,VMIN,VMAX")

    s = sub.add_parser("sweep", help="closed-loop poles over a parameter grid")
    _common(s, suppress=True)
    s.add_argument("--p", type=parse_range, metavar="RANGE")
    s.add_argument("--lambda", dest="lam", type=parse_range, metavar="RANGE")
    s.add_argument("--r", type=parse_range, metavar="RANGE")
    s.add_argument("--vref", type=parse_range, metavar="RANGE")

    s = sub.add_parser("simulate", help="nonlinear closed-loop simulation")
    _common(s, suppress=True)
    s.add_argument("--scenario", required=True, metavar="PATH")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.method:
            cfg.discretization = args.method
        if args.margin is not None:
            if args.margin < 0:
                raise ConfigError("margin: must be >= 0")
            cfg.margin = args.margin
        if args.out:
            cfg.output_dir = args.out
        if args.dump_config:
            print(json.dumps(cfg.to_dict(), indent=2))
            return EXIT_OK
        if args.command is None:
            ap.print_usage(sys.stderr)
            print("gpcboost: error: a command is required", file=sys.stderr)
            return EXIT_INPUT
        out = Path(cfg.output_dir)
        if args.command == "synthesize":
            return cmd_synthesize(cfg, out)
        if args.command == "min-horizon":
            if args.p_max < 1:
                raise ConfigError("--p-max must be >= 1")
            return cmd_min_horizon(cfg, out, args.p_max, args.corners)
        if args.command == "sweep":
            grid = {k: v for k, v in (("P", args.p), ("lambda", args.lam), ("R", args.r),
                                      ("vref", args.vref)) if v is not None}
            if not grid:
                ap.print_usage(sys.stderr)
                print("gpcboost sweep: error: give at least one of --p, --lambda, --r, --vref",
                      file=sys.stderr)
                return EXIT_INPUT
            return cmd_sweep(cfg, out, grid)
        return cmd_simulate(cfg, out, args.scenario)
    except NotBoostable as exc:
        print(f"error: NotBoostable: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NoStableHorizon as exc:
        print(f"error: NoStableHorizon: {exc}", file=sys.stderr)
        return EXIT_NO_HORIZON
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
