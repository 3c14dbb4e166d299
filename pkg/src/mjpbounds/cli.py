"""Command line interface.

Subcommands: ``validate``, ``spectrum``, ``simulate``, ``rate``, ``series``,
``bounds``, ``compare``.  Numeric CSV output is the canonical result format;
floats are printed with 17 significant digits so files round-trip exactly.
A timestamp comment line is written unless ``--no-timestamp`` is given, so
that result bodies can be compared byte for byte.  Exit codes: 0 success,
2 validation failure, 3 numerical failure, 4 domination-check failure under
``compare --strict``.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from . import bounds as bnd
from . import combinatorics as comb
from .errors import NumericalError, ValidationError
from .modelio import read_model_file
from .simulate import empirical_tail, time_averages
from .spectral import pi_variance, sigma_hat_sq
from .tilting import lambda0, lambda0_star

DEFAULT_FAMILIES = ("general", "perturbation", "poincare", "bernstein_general")
THREADS_ENV = "MJPBOUNDS_THREADS"


def _fmt(x: float) -> str:
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    return format(float(x), ".17g")


def _parse_grid(spec: str) -> np.ndarray:
    try:
        lo, hi, n = spec.split(":")
        lo, hi, n = float(lo), float(hi), int(n)
    except ValueError as exc:
        raise ValidationError(f"grid must look like lo:hi:n, got {spec!r}") from exc
    if n < 1:
        raise ValidationError(f"grid needs at least one point, got {n}")
    if n == 1:
        return np.array([lo])
    return np.linspace(lo, hi, n)


def _parse_t_list(spec: str) -> list[float]:
    try:
        values = [float(s) for s in spec.split(",") if s.strip()]
    except ValueError as exc:
        raise ValidationError(f"bad time list {spec!r}") from exc
    if not values:
        raise ValidationError("time list is empty")
    return values


def _default_threads() -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def _open_out(path):
    if path is None or path == "-":
        return sys.stdout, False
    return open(path, "w"), True


def _timestamp_line(args) -> str | None:
    if getattr(args, "no_timestamp", False):
        return None
    return "# generated " + datetime.now(timezone.utc).isoformat()


def _load(args):
    mf = read_model_file(args.model)
    seed = args.seed if args.seed is not None else (mf.seed or 0)
    return mf, seed


def cmd_validate(args) -> int:
    mf, seed = _load(args)
    model = mf.model
    info = {
        "states": mf.labels,
        "n": model.n,
        "irreducible": True,
        "reversible": model.reversible,
        "pi": [float(x) for x in model.pi.weights],
        "f_centered": [float(x) for x in model.f.values],
        "nu": [float(x) for x in model.nu.weights],
        "seed": seed,
    }
    print(json.dumps(info, indent=2))
    return 0


def cmd_spectrum(args) -> int:
    mf, _ = _load(args)
    model = mf.model
    a = bnd.analyze(model)
    out = {
        "eigenvalues": [float(x) for x in a.sd.eigenvalues],
        "gap": a.gap,
        "sigma_hat_sq": sigma_hat_sq(a.sd, model.f, model.pi),
        "var_pi_f": pi_variance(model.pi, model.f.values),
        "reversible": model.reversible,
    }
    print(json.dumps(out, indent=2))
    return 0


def cmd_simulate(args) -> int:
    mf, seed = _load(args)
    est = empirical_tail(
        mf.model, args.t, args.u, args.samples, seed, threads=args.threads
    )
    fh, close = _open_out(args.out)
    try:
        stamp = _timestamp_line(args)
        if stamp:
            fh.write(stamp + "\n")
        fh.write("u,t,n,hits,p_hat,ci_lo,ci_hi\n")
        fh.write(
            ",".join(
                [
                    _fmt(est.u),
                    _fmt(est.t),
                    str(est.n_samples),
                    str(est.hits),
                    _fmt(est.p_hat),
                    _fmt(est.ci_lo),
                    _fmt(est.ci_hi),
                ]
            )
            + "\n"
        )
    finally:
        if close:
            fh.close()
    return 0


def cmd_rate(args) -> int:
    mf, _ = _load(args)
    model = mf.model
    a = bnd.analyze(model)
    fh, close = _open_out(args.out)
    try:
        stamp = _timestamp_line(args)
        if stamp:
            fh.write(stamp + "\n")
        fh.write("u,lambda0_star,argmax_r,finite\n")
        for u in _parse_grid(args.u_grid):
            res = lambda0_star(a.sd, model.f, model.pi, float(u))
            arg = "" if res.argmax_r is None else _fmt(res.argmax_r)
            fh.write(
                f"{_fmt(u)},{_fmt(res.value)},{arg},{int(res.finite)}\n"
            )
    finally:
        if close:
            fh.close()
    return 0


def cmd_series(args) -> int:
    mf, _ = _load(args)
    model = mf.model
    a = bnd.analyze(model)
    coeffs = comb.lambda0_coefficients(a.sd, model.f, model.pi, args.order)
    fh, close = _open_out(args.out)
    try:
        stamp = _timestamp_line(args)
        if stamp:
            fh.write(stamp + "\n")
        fh.write("order,coefficient\n")
        for k, c in enumerate(coeffs.coeffs, start=1):
            fh.write(f"{k},{_fmt(c)}\n")
        if args.r_grid:
            fh.write("r,lambda0,partial_sum,abs_error\n")
            for r in _parse_grid(args.r_grid):
                lam = lambda0(a.sd, model.f, model.pi, float(r))
                ps = coeffs.partial_sum(float(r))
                fh.write(
                    f"{_fmt(r)},{_fmt(lam)},{_fmt(ps)},{_fmt(abs(lam - ps))}\n"
                )
    finally:
        if close:
            fh.close()
    return 0


def _resolve_families(spec, fsobolev_c: float | None):
    if spec is None or spec == "all":
        fams = list(DEFAULT_FAMILIES)
        if fsobolev_c is not None:
            fams.append("fsobolev")
        return fams
    if isinstance(spec, (list, tuple)):
        fams = [str(s).strip() for s in spec]
    else:
        fams = [s.strip() for s in spec.split(",") if s.strip()]
    for fam in fams:
        if fam not in bnd.FAMILIES:
            raise ValidationError(f"unknown family {fam!r}")
    if "fsobolev" in fams and fsobolev_c is None:
        raise ValidationError("family 'fsobolev' needs --fsobolev-c")
    return fams


def _family_kwargs(model, fsobolev_c):
    if fsobolev_c is None:
        return {}
    F = bnd.log_sobolev(fsobolev_c)
    verdict = bnd.check_f_sobolev(model, F)
    return {
        "F": F,
        "fsobolev_verdict": verdict,
        "assume_fsobolev": verdict.status != "violated",
    }


def cmd_bounds(args) -> int:
    mf, _ = _load(args)
    model = mf.model
    analysis = bnd.analyze(model)
    families = _resolve_families(args.families, args.fsobolev_c)
    kwargs = _family_kwargs(model, args.fsobolev_c)
    fh, close = _open_out(args.out)
    try:
        stamp = _timestamp_line(args)
        if stamp:
            fh.write(stamp + "\n")
        fh.write("u,family,rate,prefactor,bound,branch,notes\n")
        for u in _parse_grid(args.u_grid):
            for fam in families:
                kw = kwargs if fam == "fsobolev" else {}
                p = bnd.evaluate_family(
                    model, args.t, float(u), fam, analysis=analysis, **kw
                )
                notes = ""
                if p.diagnostics.get("boundary"):
                    notes = "boundary"
                fh.write(
                    ",".join(
                        [
                            _fmt(p.u),
                            fam,
                            _fmt(p.rate),
                            _fmt(p.prefactor),
                            _fmt(p.bound),
                            p.branch,
                            notes,
                        ]
                    )
                    + "\n"
                )
    finally:
        if close:
            fh.close()
    return 0


@dataclass
class RunConfig:
    """Resolved configuration of one comparison run."""

    model: str
    t_values: list[float]
    u_grid: list[float]
    families: list[str]
    samples: int
    seed: int
    threads: int = 1
    out: str | None = None
    strict: bool = False
    resume: bool = False
    no_timestamp: bool = False
    fsobolev_c: float | None = None
    summary_out: str | None = None
    domination_sigma: float = 3.0  # CI multiplier for the domination flag
    extra: dict = field(default_factory=dict)

    def validate(self):
        if not self.u_grid:
            raise ValidationError("u grid is empty")
        if sorted(self.u_grid) != list(self.u_grid):
            raise ValidationError("u grid must be sorted ascending")
        if self.samples < 1:
            raise ValidationError("sample count must be >= 1")
        if not self.t_values:
            raise ValidationError("time list is empty")


def _compare_header(families):
    cols = ["u", "t", "n", "hits", "p_hat", "ci_lo", "ci_hi"]
    for fam in families:
        cols += [f"{fam}_rate", f"{fam}_bound", f"{fam}_ok"]
    cols.append("sharpness_gap")
    return ",".join(cols)


def run_compare(config: RunConfig) -> dict:
    """End-to-end comparison: empirical tails against every requested bound.

    Writes one CSV row per (u, t) cell, flushed as soon as the cell finishes
    so interrupted runs can be resumed cell by cell.  Returns the JSON-ready
    summary.
    """
    config.validate()
    mf = read_model_file(config.model)
    model = mf.model
    analysis = bnd.analyze(model)
    families = config.families
    kwargs = _family_kwargs(model, config.fsobolev_c)
    sharpness_on = model.reversible

    done_cells = set()
    mode = "w"
    if config.resume and config.out and os.path.exists(config.out):
        with open(config.out) as fh:
            for line in fh:
                if line.startswith("#") or line.startswith("u,"):
                    continue
                parts = line.split(",")
                if len(parts) >= 2:
                    done_cells.add((parts[0], parts[1]))
        mode = "a"

    fh = open(config.out, mode) if config.out else sys.stdout
    close = config.out is not None
    failures = []
    rows = 0
    try:
        if mode == "w":
            if not config.no_timestamp:
                fh.write(
                    "# generated "
                    + datetime.now(timezone.utc).isoformat()
                    + "\n"
                )
            fh.write(_compare_header(families) + "\n")
            fh.flush()
        for t in config.t_values:
            averages = time_averages(
                model, t, config.samples, config.seed, threads=config.threads
            )
            for u in config.u_grid:
                key = (_fmt(u), _fmt(t))
                if key in done_cells:
                    continue
                est = empirical_tail(
                    model, t, u, config.samples, config.seed, averages=averages
                )
                cells = [
                    _fmt(u),
                    _fmt(t),
                    str(est.n_samples),
                    str(est.hits),
                    _fmt(est.p_hat),
                    _fmt(est.ci_lo),
                    _fmt(est.ci_hi),
                ]
                for fam in families:
                    kw = kwargs if fam == "fsobolev" else {}
                    p = bnd.evaluate_family(
                        model, t, u, fam, analysis=analysis, **kw
                    )
                    slack = config.domination_sigma * est.ci_half_width
                    ok = est.p_hat <= p.bound + slack
                    if not ok:
                        failures.append(
                            {"family": fam, "u": u, "t": t, "p_hat": est.p_hat,
                             "bound": p.bound}
                        )
                    cells += [_fmt(p.rate), _fmt(p.bound), str(int(ok))]
                if sharpness_on and est.p_hat > 0.0:
                    # empirical decay rate exceeds the bound's rate; the
                    # excess shrinks to 0 as t grows on reversible chains
                    rate = lambda0_star(analysis.sd, model.f, model.pi, u).value
                    gap = -math.log(est.p_hat) / t - rate
                    cells.append(_fmt(gap))
                else:
                    cells.append("")
                fh.write(",".join(cells) + "\n")
                fh.flush()
                rows += 1
    finally:
        if close:
            fh.close()

    summary = {
        "model": config.model,
        "families": families,
        "t_values": config.t_values,
        "u_grid": [float(u) for u in config.u_grid],
        "samples": config.samples,
        "seed": config.seed,
        "rows_written": rows,
        "domination_failures": failures,
        "all_dominated": not failures,
        "sharpness_diagnostic": sharpness_on,
    }
    if config.summary_out:
        with open(config.summary_out, "w") as sf:
            json.dump(summary, sf, indent=2)
            sf.write("\n")
    return summary


def cmd_compare(args) -> int:
    cfg_file = {}
    if args.config:
        with open(args.config) as fh:
            cfg_file = json.load(fh)

    def pick(flag, key, fallback):
        if flag is not None:
            return flag
        if key in cfg_file:
            return cfg_file[key]
        return fallback

    mf = read_model_file(args.model)
    seed = pick(args.seed, "seed", mf.seed or 0)
    threads = pick(args.threads, "threads", _default_threads())
    u_grid_spec = pick(args.u_grid, "u_grid", None)
    if u_grid_spec is None:
        raise ValidationError("compare needs --u-grid (or u_grid in --config)")
    u_grid = (
        [float(x) for x in u_grid_spec]
        if isinstance(u_grid_spec, list)
        else [float(x) for x in _parse_grid(u_grid_spec)]
    )
    t_spec = pick(args.t, "t", None)
    if t_spec is None:
        raise ValidationError("compare needs --t (or t in --config)")
    t_values = t_spec if isinstance(t_spec, list) else _parse_t_list(t_spec)
    fsobolev_c = pick(args.fsobolev_c, "fsobolev_c", None)
    families = _resolve_families(
        pick(args.families, "families", None), fsobolev_c
    )
    config = RunConfig(
        model=args.model,
        t_values=[float(t) for t in t_values],
        u_grid=sorted(u_grid),
        families=families,
        samples=int(pick(args.samples, "samples", 10000)),
        seed=int(seed),
        threads=int(threads),
        out=pick(args.out, "out", None),
        strict=bool(args.strict or cfg_file.get("strict", False)),
        resume=bool(args.resume or cfg_file.get("resume", False)),
        no_timestamp=bool(args.no_timestamp or cfg_file.get("no_timestamp", False)),
        fsobolev_c=fsobolev_c,
        summary_out=pick(args.summary_out, "summary_out", None),
        domination_sigma=float(cfg_file.get("domination_sigma", 3.0)),
    )
    summary = run_compare(config)
    if config.strict and not summary["all_dominated"]:
        print(
            f"domination check failed in {len(summary['domination_failures'])} cells",
            file=sys.stderr,
        )
        return 4
    return 0


def _add_common(sp):
    sp.add_argument("--model", required=True, help="model file (JSON or TOML)")
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--threads", type=int, default=None)
    sp.add_argument("--out", default=None, help="output path (default: stdout)")
    sp.add_argument("--no-timestamp", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mjpbounds",
        description="Concentration bounds for Markov jump process time averages",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("validate", help="parse and validate a model file")
    _add_common(sp)
    sp.set_defaults(fn=cmd_validate)

    sp = sub.add_parser("spectrum", help="eigenvalues, gap, variances as JSON")
    _add_common(sp)
    sp.set_defaults(fn=cmd_spectrum)

    sp = sub.add_parser("simulate", help="empirical tail estimate")
    _add_common(sp)
    sp.add_argument("--t", type=float, required=True)
    sp.add_argument("--u", type=float, required=True)
    sp.add_argument("--samples", type=int, required=True)
    sp.set_defaults(fn=cmd_simulate)

    sp = sub.add_parser("rate", help="conjugate rate function on a u grid")
    _add_common(sp)
    sp.add_argument("--u-grid", required=True, help="lo:hi:n")
    sp.set_defaults(fn=cmd_rate)

    sp = sub.add_parser("series", help="perturbation-series coefficients")
    _add_common(sp)
    sp.add_argument("--order", type=int, required=True)
    sp.add_argument("--r-grid", default=None, help="lo:hi:n")
    sp.set_defaults(fn=cmd_series)

    sp = sub.add_parser("bounds", help="bound curves on a u grid")
    _add_common(sp)
    sp.add_argument("--t", type=float, required=True)
    sp.add_argument("--u-grid", required=True, help="lo:hi:n")
    sp.add_argument("--families", default=None, help="all or comma list")
    sp.add_argument("--fsobolev-c", type=float, default=None)
    sp.set_defaults(fn=cmd_bounds)

    sp = sub.add_parser("compare", help="bounds vs Monte Carlo, one CSV")
    _add_common(sp)
    sp.add_argument("--t", default=None, help="comma list of horizons")
    sp.add_argument("--u-grid", default=None, help="lo:hi:n")
    sp.add_argument("--families", default=None)
    sp.add_argument("--samples", type=int, default=None)
    sp.add_argument("--fsobolev-c", type=float, default=None)
    sp.add_argument("--strict", action="store_true")
    sp.add_argument("--resume", action="store_true")
    sp.add_argument("--config", default=None, help="JSON config; flags win")
    sp.add_argument("--summary-out", default=None, help="JSON summary path")
    sp.set_defaults(fn=cmd_compare)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "threads", None) is None:
        args.threads = _default_threads()
    try:
        return args.fn(args)
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except ValidationError as exc:
        print(f"validation failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
