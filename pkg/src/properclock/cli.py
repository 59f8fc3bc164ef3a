"""Command-line interface: ``properclock <command> [options]``.

Exit codes: 0 success, 1 verification failure, 2 input or schema error,
3 numerical failure.
"""
import argparse
import csv
import io
import json
import logging
import math
import re
import sys

import numpy as np

from . import analytic, metrology, oracle, units, verify
from ._accel import apply_thread_cap
from .quadrature import QuadratureError
from .scenario import ScenarioError, load_scenario
from .states import GaussianPacket, MomentumSuperposition

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3

SWEEP_HEADER = (
    "dp_over_mc", "ptot_over_mc", "theta", "phi", "delta_over_mc", "gamma_c_inv", "gamma_q_inv",
)

RB87_PRESET = {
    "mass_kg": units.RB87_MASS_KG,
    "radius_m": units.RB87_RADIUS_M,
    "v_m_s": 5.0,
    "v_prime_m_s": 15.0,
    "theta": 3 * math.pi / 4,
    "phi": 0.0,
    "clock_resolution_s": 1e-14,
}


class InputError(ValueError):
    pass


_NUMBER = re.compile(
    r"^\s*(?P<coef>[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?\s*\*?\s*(?P<pi>pi)?"
    r"\s*(?:/\s*(?P<div>\d+\.?\d*(?:[eE][+-]?\d+)?))?\s*$"
)


def parse_number(text):
    """Number with an optional ``pi`` factor: ``0.5``, ``pi/8``, ``3*pi/4``, ``-2pi``."""
    m = _NUMBER.match(text)
    if not m or not (m.group("coef") or m.group("pi")):
        raise InputError(f"cannot parse number {text!r}")
    value = float(m.group("coef")) if m.group("coef") else 1.0
    if m.group("pi"):
        value *= math.pi
    if m.group("div"):
        value /= float(m.group("div"))
    return value


def parse_grid(spec):
    """``lo:hi:n`` to an increasing linspace with ``n >= 2`` points."""
    parts = spec.split(":")
    if len(parts) != 3:
        raise InputError(f"grid must be lo:hi:n, got {spec!r}")
    lo, hi = parse_number(parts[0]), parse_number(parts[1])
    try:
        n = int(parts[2])
    except ValueError:
        raise InputError(f"grid point count must be an integer, got {parts[2]!r}") from None
    if n < 2:
        raise InputError("grid needs at least 2 points")
    if not hi > lo:
        raise InputError("grid must be increasing (lo < hi)")
    return np.linspace(lo, hi, n)


def _fmt(x):
    return "%.16e" % x


def _open_out(path):
    if path in (None, "-", "stdout"):
        return sys.stdout, False
    return open(path, "w", encoding="utf-8", newline=""), True


def _emit(args, text):
    fh, close = _open_out(args.out)
    try:
        fh.write(text)
    finally:
        if close:
            fh.close()


def _csv_text(header, rows, extra_lines=()):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    for line in extra_lines:
        buf.write(line + "\n")
    return buf.getvalue()


# -- sweep ------------------------------------------------------------------

def sweep_rows(axis, grid, ptots, dp, theta, phi, delta, pb=0.0, delta_b=None):
    """Rows of :data:`SWEEP_HEADER` in input order, plus the per-ptot optimum."""
    rows, optima = [], []
    for ptot in ptots:
        if axis == "dp":
            dps, thetas = grid, np.full_like(grid, theta)
        else:
            dps, thetas = np.full_like(grid, dp), grid
        gq = analytic.gamma_q_inv_1d(dps, ptot, thetas, phi, delta)
        gc = analytic.gamma_c_inv_1d(dps, ptot, thetas, delta, pb, delta_b)
        if not (np.all(np.isfinite(gq)) and np.all(np.isfinite(gc))):
            raise FloatingPointError("non-finite dilation factor in sweep")
        for i in range(grid.size):
            rows.append((dps[i], ptot, thetas[i], phi, delta, gc[i], gq[i]))
        i = int(np.argmax(np.abs(gq)))
        key = "p_opt" if axis == "dp" else "theta_opt"
        optima.append({"ptot_over_mc": float(ptot), key: float(grid[i]), "gamma_q_inv": float(gq[i])})
    return rows, optima


def cmd_sweep(args):
    grid = parse_grid(args.grid)
    ptots = [parse_number(p) for p in args.ptot.split(",")]
    theta, phi = parse_number(args.theta), parse_number(args.phi)
    if not 0 <= phi <= math.pi:
        raise InputError("phi must lie in [0, pi]")
    if args.axis == "theta" and (grid[0] < 0 or grid[-1] > math.pi):
        raise InputError("theta grid must lie within [0, pi]")
    if not args.delta > 0:
        raise InputError("delta must be > 0")
    rows, optima = sweep_rows(
        args.axis, grid, ptots, args.dp, theta, phi, args.delta, args.pb, args.delta_b
    )
    if args.format == "csv":
        _emit(args, _csv_text(SWEEP_HEADER, rows))
    else:
        doc = {"rows": [dict(zip(SWEEP_HEADER, map(float, r))) for r in rows], "optima": optima}
        _emit(args, json.dumps(doc, indent=2) + "\n")
    print(json.dumps({"optima": optima}), file=sys.stderr)
    return EXIT_OK


# -- pdist ------------------------------------------------------------------

def pdist_values(scenario, tau_b, tau_grid, engine):
    if engine == "analytic":
        return analytic.conditional_density(tau_grid, tau_b, scenario.sigma, scenario.h_a, scenario.h_b, scenario.mass)
    if engine == "quadrature":
        return oracle.leading_order_density(scenario, tau_grid, tau_b)
    return oracle.nonperturbative_density(scenario, tau_grid, tau_b, refine=False)


def cmd_pdist(args):
    if args.scenario is None:
        raise InputError("pdist needs --scenario")
    sc = load_scenario(args.scenario)
    mass_kg = sc.mass_kg
    grid = parse_grid(args.grid)
    tau_b = parse_number(args.tau_b)
    if sc.units == "si":
        t_grid = units.time_to_natural(grid, mass_kg)
        t_b = units.time_to_natural(tau_b, mass_kg)
    else:
        t_grid, t_b = grid, tau_b
    dens = np.asarray(pdist_values(sc, t_b, t_grid, args.engine), dtype=float)
    if sc.units == "si":
        dens = units.density_to_si(dens, mass_kg)
    if not np.all(np.isfinite(dens)):
        raise FloatingPointError("non-finite density")
    dist = analytic.ConditionalDistribution.from_samples(tau_b, grid, dens)
    if args.format == "csv":
        extra = [f"mean={_fmt(dist.mean)},variance={_fmt(dist.variance)}"] if args.moments else []
        _emit(args, _csv_text(("tau_a", "density"), zip(grid, dens), extra))
    else:
        doc = {"engine": args.engine, "tau_b": tau_b, "tau_a": grid.tolist(), "density": dens.tolist()}
        if args.moments:
            doc.update(mean=dist.mean, variance=dist.variance)
        _emit(args, json.dumps(doc, indent=2) + "\n")
    return EXIT_OK


# -- estimate ---------------------------------------------------------------

def rb87_superposition():
    """Natural-unit superposition and matched clock B for the Rb-87 preset.

    Clock B sits in a single packet with the same spread whose squared mean
    momentum equals the mixture average, which removes the classical
    dilation difference.
    """
    p = RB87_PRESET
    mass = p["mass_kg"]
    pa = units.momentum_to_natural(units.momentum_from_velocity(p["v_m_s"], mass), mass)
    pa_ = units.momentum_to_natural(units.momentum_from_velocity(p["v_prime_m_s"], mass), mass)
    delta = units.momentum_to_natural(units.momentum_spread_from_radius(p["radius_m"]), mass)
    sup = MomentumSuperposition(
        GaussianPacket(pa, delta), GaussianPacket(pa_, delta), p["theta"], p["phi"]
    )
    pb = math.sqrt(math.cos(p["theta"]) ** 2 * pa**2 + math.sin(p["theta"]) ** 2 * pa_**2)
    return sup, GaussianPacket(pb, delta)


def estimate_report(sup, cm_b, resolution_s):
    f = analytic.dilation_factors(sup, cm_b)
    coherence = None if f.gamma_q_inv == 0 else resolution_s / abs(f.gamma_q_inv)
    return {
        "gamma_q_inv": f.gamma_q_inv,
        "gamma_c_inv": f.gamma_c_inv,
        "clock_resolution_s": resolution_s,
        "required_coherence_time_s": coherence,
        "coherence_unbounded": coherence is None,
        "inputs": {
            "pbar_over_mc": sup.first.pbar[0],
            "pbar_prime_over_mc": sup.second.pbar[0],
            "delta_over_mc": sup.delta,
            "theta": sup.theta,
            "phi": sup.phi,
            "pbar_b_over_mc": cm_b.pbar[0],
            "delta_b_over_mc": cm_b.delta,
        },
    }


def cmd_estimate(args):
    if args.scenario is not None:
        sc = load_scenario(args.scenario)
        sup = sc.cm_a
        if isinstance(sup, GaussianPacket):
            sup = MomentumSuperposition(sup, sup, 0.0, 0.0)
        cm_b = sc.cm_b
        resolution = args.resolution
    elif args.preset == "rb87":
        sup, cm_b = rb87_superposition()
        resolution = args.resolution or RB87_PRESET["clock_resolution_s"]
    else:
        raise InputError("estimate needs --preset rb87 or --scenario")
    if resolution is None:
        resolution = RB87_PRESET["clock_resolution_s"]
    if not resolution > 0:
        raise InputError("--resolution must be > 0")
    _emit(args, json.dumps(estimate_report(sup, cm_b, resolution), indent=2) + "\n")
    return EXIT_OK


# -- verify / povm-check ----------------------------------------------------

def cmd_verify(args):
    ok, summary = verify.run(args.suite, tuple(args.inject or ()))
    _emit(args, json.dumps(summary, indent=2) + "\n")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_povm_check(args):
    if args.model == "two-level":
        mu = None
        if args.inject and "mu-miscalibration" in args.inject:
            mu = 2 * args.omega / math.pi
        model = metrology.TwoLevelClock(args.omega, mu=mu)
        shifts = (0.0, math.pi / (2 * args.omega), model.period, args.shift)
        info = {"model": "two-level", "omega": args.omega, "mu": model.mu, "mu_derived": model.mu_derived}
    else:
        model = metrology.IdealContinuousClock(args.sigma)
        shifts = (0.0, args.shift)
        info = {"model": "ideal", "sigma": args.sigma}
    completeness = metrology.povm_completeness(model, args.resolution)
    covariance = max(metrology.covariance_check(model, s) for s in shifts)
    ok = bool(completeness <= args.tol and covariance <= args.tol)
    info.update(
        resolution=args.resolution,
        completeness_deviation=completeness,
        covariance_deviation=covariance,
        threshold=args.tol,
        passed=ok,
    )
    _emit(args, json.dumps(info, indent=2) + "\n")
    return EXIT_OK if ok else EXIT_FAIL


# -- parser -----------------------------------------------------------------

def build_parser():
    ap = argparse.ArgumentParser(prog="properclock", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, fmt=True):
        p.add_argument("--out", default="-", help="output path, '-' for stdout")
        if fmt:
            p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("sweep", help="tabulate dilation factors over a parameter grid")
    p.add_argument("--axis", choices=("dp", "theta"), default="dp")
    p.add_argument("--grid", required=True, help="lo:hi:n (pi allowed, e.g. 0:pi/2:101)")
    p.add_argument("--ptot", default="0", help="comma-separated total momenta (units of mc)")
    p.add_argument("--dp", type=float, default=0.17, help="momentum difference for a theta sweep")
    p.add_argument("--theta", default="pi/8", help="superposition weight for a dp sweep")
    p.add_argument("--phi", default="0")
    p.add_argument("--delta", type=float, default=0.01)
    p.add_argument("--pb", type=float, default=0.0, help="mean momentum of clock B")
    p.add_argument("--delta-b", type=float, default=None, help="spread of clock B (default: --delta)")
    common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("pdist", help="conditional density of clock A readings")
    p.add_argument("--scenario", required=True)
    p.add_argument("--tau-b", default="0")
    p.add_argument("--grid", required=True)
    p.add_argument("--engine", choices=("analytic", "quadrature", "nonperturbative"), default="analytic")
    p.add_argument("--moments", action="store_true")
    common(p)
    p.set_defaults(func=cmd_pdist)

    p = sub.add_parser("estimate", help="quantum dilation and coherence-time estimate")
    p.add_argument("--preset", choices=("rb87",), default=None)
    p.add_argument("--scenario", default=None)
    p.add_argument("--resolution", type=float, default=None, help="clock resolution in seconds")
    common(p, fmt=False)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("verify", help="run the self-check suites")
    p.add_argument("--suite", choices=("analytic", "oracle", "metrology", "all"), default="all")
    p.add_argument("--inject", action="append", choices=verify.INJECTIONS, help="negative-control hook")
    common(p, fmt=False)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("povm-check", help="POVM completeness and covariance deviations")
    p.add_argument("--model", choices=("two-level", "ideal"), default="two-level")
    p.add_argument("--omega", type=float, default=1.0)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--resolution", type=int, default=4096)
    p.add_argument("--shift", type=float, default=0.37)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--inject", action="append", choices=("mu-miscalibration",))
    common(p, fmt=False)
    p.set_defaults(func=cmd_povm_check)
    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        apply_thread_cap()
        return args.func(args)
    except (InputError, ScenarioError, FileNotFoundError) as exc:
        print(f"properclock: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (QuadratureError, oracle.GridError, FloatingPointError, metrology.OrthogonalityUnreachable) as exc:
        diag = getattr(exc, "diagnostics", None)
        print(f"properclock: numerical failure: {exc}" + (f" {diag}" if diag else ""), file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"properclock: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
