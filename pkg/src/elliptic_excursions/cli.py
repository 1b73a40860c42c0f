"""Command-line experiment runner.

    python -m elliptic_excursions dist --family simplified --T 100 --sigma 3
    python -m elliptic_excursions verify --out report.json

Exit codes: 0 ok, 1 internal error, 2 parameter or positivity rejection,
3 numerical failure (poles, domain errors, accuracy).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import asymptotics as asy
from .errors import NumericalError, ParameterError, PositivityError
from .lattice import slice_positions
from .measures import (
    argmax_trajectory,
    interpolated_gap,
    positivity_check,
    require_certified,
    single_time_distribution,
)
from .theta import DEFAULT_TOL
from .verification import run_suite
from .weights import Family, ModelParams

EXIT_OK, EXIT_INTERNAL, EXIT_REJECTED, EXIT_NUMERICAL = 0, 1, 2, 3

# family defaults: the certified specializations
_DEFAULTS = {
    Family.SIMPLIFIED: dict(sigma=3.0, alpha0_over_r=math.pi / 2, beta0_over_r=0.0),
    Family.TRIG: dict(sigma=6.0, alpha0_over_r=math.pi / 4, beta0_over_r=-math.pi / 4),
    Family.ELLIPTIC: dict(sigma=6.0, alpha0_over_r=math.pi / 4, beta0_over_r=-math.pi / 4),
    Family.CLASSICAL: dict(),
}

CONFIG_KEYS = (
    "family", "T", "sigma", "r", "alpha0_over_r", "beta0_over_r", "kappa", "tol", "seed",
    "out", "format", "allow_signed", "Ts", "ns", "nv", "n_terms",
)


@dataclass
class ExperimentConfig:
    family: Optional[str] = None
    T: Optional[int] = None
    sigma: Optional[float] = None
    r: Optional[float] = None
    alpha0_over_r: Optional[float] = None
    beta0_over_r: Optional[float] = None
    kappa: Optional[float] = None
    tol: float = DEFAULT_TOL
    seed: int = 0
    out: Optional[str] = None
    format: str = "csv"
    allow_signed: bool = False
    Ts: list = field(default_factory=list)
    ns: int = 19
    nv: int = 11
    n_terms: int = 100_000

    def params(self, T: Optional[int] = None) -> ModelParams:
        T = self.T if T is None else T
        if self.family is None:
            raise ParameterError("--family is required")
        if T is None:
            raise ParameterError("--T is required")
        fam = Family.parse(self.family)
        if fam is Family.CLASSICAL:
            return ModelParams.classical(T)
        d = dict(_DEFAULTS[fam])
        if self.sigma is not None and self.r is not None:
            raise ParameterError("--sigma and --r are mutually exclusive")
        sigma = self.sigma if self.sigma is not None else (None if self.r is not None else d["sigma"])
        a = self.alpha0_over_r if self.alpha0_over_r is not None else d["alpha0_over_r"]
        b = self.beta0_over_r if self.beta0_over_r is not None else d["beta0_over_r"]
        return ModelParams.from_ratios(fam, T, sigma=sigma, r=self.r, alpha0_over_r=a, beta0_over_r=b, kappa=self.kappa)


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _jsonable(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    return v


def render_table(columns, rows, fmt: str, summary: Optional[list] = None) -> str:
    if fmt == "json":
        doc = {"columns": list(columns), "rows": [[_jsonable(v) for v in r] for r in rows]}
        if summary is not None:
            doc["summary"] = [_jsonable(v) for v in summary]
        return json.dumps(doc, indent=1) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    if summary is not None:
        w.writerow([_fmt(v) for v in summary])
    return buf.getvalue()


def _emit(text: str, out: Optional[str]) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)


def _certify(params: ModelParams, cfg: ExperimentConfig) -> None:
    if not cfg.allow_signed:
        require_certified(params, cfg.tol)


# subcommands ---------------------------------------------------------------------------


def cmd_dist(cfg: ExperimentConfig) -> int:
    params = cfg.params()
    _certify(params, cfg)
    rows = []
    for t in range(2 * params.T + 1):
        dist = single_time_distribution(t, params, cfg.tol)
        rows += [(t, int(x), float(p)) for x, p in zip(dist.x, dist.prob)]
    _emit(render_table(("t", "x", "prob"), rows, cfg.format), cfg.out)
    return EXIT_OK


def cmd_trajectory(cfg: ExperimentConfig) -> int:
    params = cfg.params()
    rec = argmax_trajectory(params, cfg.tol, allow_signed=cfg.allow_signed)
    T = params.T
    rows = [
        (int(t), t / T, int(x), x / T, float(p), bool(f))
        for t, x, p, f in zip(rec.t, rec.x_max, rec.p_max, rec.tie_flag)
    ]
    _emit(render_table(("t", "s", "x_max", "v", "p_max", "tie_flag"), rows, cfg.format), cfg.out)
    return EXIT_OK


def cmd_collapse(cfg: ExperimentConfig) -> int:
    Ts = sorted(set(int(T) for T in cfg.Ts)) or ([cfg.T] if cfg.T else [])
    if not Ts:
        raise ParameterError("collapse needs --Ts (comma separated) or --T")
    curves = {}
    rows = []
    for T in Ts:
        rec = argmax_trajectory(cfg.params(T), cfg.tol, allow_signed=cfg.allow_signed)
        s, v = rec.t / T, rec.x_max / T
        curves[T] = (s, v)
        rows += [(T, float(a), float(b)) for a, b in zip(s, v)]
    lo, hi = Ts[0], Ts[-1]
    gap = interpolated_gap(*curves[lo], *curves[hi])
    _emit(render_table(("T", "s", "v"), rows, cfg.format, summary=("max_gap", f"{lo}-{hi}", gap)), cfg.out)
    return EXIT_OK


def _rate_grid(ns: int, nv: int):
    if ns < 1 or nv < 1:
        raise ParameterError("grid sizes must be positive")
    s_vals = np.linspace(0, 2, ns + 2)[1:-1]
    for s in s_vals:
        w = min(s, 2 - s) * (1 - 1e-6)
        for v in np.linspace(-w, w, nv) if nv > 1 else [0.0]:
            yield float(s), float(v)


def cmd_rate(cfg: ExperimentConfig) -> int:
    rows = []
    vstar = {}
    for s, v in _rate_grid(cfg.ns, cfg.nv):
        if s not in vstar:
            vstar[s] = asy.zero_curve(s)
        i_int = asy.rate_integral(s, v).value
        i_fou = asy.rate_fourier(s, v, cfg.n_terms).value
        rows.append((s, v, i_int, i_fou, vstar[s], asy.cubic_trajectory(s)))
    cols = ("s", "v", "I_integral", "I_fourier", "v_star", "v_cubic")
    _emit(render_table(cols, rows, cfg.format), cfg.out)
    return EXIT_OK


def cmd_clt(cfg: ExperimentConfig) -> int:
    if cfg.family is not None and Family.parse(cfg.family) is not Family.SIMPLIFIED:
        raise ParameterError("clt is defined for the simplified family only")
    if cfg.T is None:
        raise ParameterError("--T is required")
    xi, scaled = asy.clt_scaled_law(cfg.T)
    rows = [
        (float(a), float(b), asy.clt_density(a), asy.brownian_bridge_density(1.0, a))
        for a, b in zip(xi, scaled)
    ]
    _emit(render_table(("xi", "scaled_prob", "f_xi", "bb_density"), rows, cfg.format), cfg.out)
    return EXIT_OK


def cmd_verify(cfg: ExperimentConfig) -> int:
    params = cfg.params() if cfg.family is not None and cfg.T is not None else None
    results = run_suite(seed=cfg.seed, params=params)
    ok = all(r.status == "pass" for r in results)
    report = {"all_passed": ok, "n_checks": len(results), "checks": [r.as_dict() for r in results]}

    def clean(o):
        if isinstance(o, dict):
            return {k: clean(v) for k, v in o.items()}
        if isinstance(o, list):
            return [clean(v) for v in o]
        return _jsonable(o)

    _emit(json.dumps(clean(report), indent=1) + "\n", cfg.out)
    return EXIT_OK if ok else EXIT_NUMERICAL


COMMANDS = {
    "dist": cmd_dist,
    "trajectory": cmd_trajectory,
    "collapse": cmd_collapse,
    "rate": cmd_rate,
    "clt": cmd_clt,
    "verify": cmd_verify,
}


def _int_list(text: str) -> list:
    return [int(t) for t in text.split(",") if t.strip()]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with parameter keys; flags override it")
    common.add_argument("--family", choices=["elliptic", "trig", "simplified", "classical"])
    common.add_argument("--T", type=int)
    grp = common.add_mutually_exclusive_group()
    grp.add_argument("--sigma", type=float, help="proportionality pi*r = sigma*T")
    grp.add_argument("--r", type=float, help="raw r (alternative to --sigma)")
    common.add_argument("--alpha0-over-r", dest="alpha0_over_r", type=float)
    common.add_argument("--beta0-over-r", dest="beta0_over_r", type=float)
    common.add_argument("--kappa", type=float)
    common.add_argument("--tol", type=float)
    common.add_argument("--seed", type=int)
    common.add_argument("--out")
    common.add_argument("--format", choices=["csv", "json"])
    common.add_argument("--allow-signed", dest="allow_signed", action="store_const", const=True)

    p = argparse.ArgumentParser(prog="elliptic-excursions", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("dist", parents=[common], help="single-time distributions on the whole domain")
    sub.add_parser("trajectory", parents=[common], help="maximum-likelihood trajectory")
    c = sub.add_parser("collapse", parents=[common], help="scaled trajectories for several T")
    c.add_argument("--Ts", type=_int_list, help="comma-separated list of T values")
    r = sub.add_parser("rate", parents=[common], help="rate function on a grid")
    r.add_argument("--ns", type=int, help="number of interior s values")
    r.add_argument("--nv", type=int, help="number of v values per s")
    r.add_argument("--n-terms", dest="n_terms", type=int, help="Fourier terms")
    sub.add_parser("clt", parents=[common], help="scaled law at t=T against the limit density")
    sub.add_parser("verify", parents=[common], help="run the invariant suite")
    return p


def load_config(args: argparse.Namespace) -> ExperimentConfig:
    values = {}
    if getattr(args, "config", None):
        with open(args.config) as fh:
            data = json.load(fh)
        unknown = set(data) - set(CONFIG_KEYS)
        if unknown:
            raise ParameterError(f"unknown config keys: {sorted(unknown)}")
        values.update(data)
    for key in CONFIG_KEYS:
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    if "sigma" in values and "r" in values and values["sigma"] is not None and values["r"] is not None:
        if getattr(args, "sigma", None) is not None:
            values.pop("r")
        elif getattr(args, "r", None) is not None:
            values.pop("sigma")
    cfg = ExperimentConfig(**{k: v for k, v in values.items() if v is not None})
    if isinstance(cfg.Ts, str):
        cfg.Ts = _int_list(cfg.Ts)
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args)
        return COMMANDS[args.command](cfg)
    except (ParameterError, PositivityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_REJECTED
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
