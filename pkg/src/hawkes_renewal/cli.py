"""Command-line entry point.

Subcommands wrap the library: ``simulate`` (one thinned path), ``renewal``
(regeneration cycles), ``coupling``, ``clt``, ``re-chain`` and ``verify``
(the gated statistical suites).  Configuration is a key=value INI file;
every run is reproducible from the seed, and infinite values are written
as the literal ``inf`` with 12 significant digits elsewhere.
"""

import argparse
import configparser
import logging
import math
import os
import sys

from .errors import ConfigError
from .hawkes import path_to_csv, simulate_adhp
from .kernels import (ExponentialKernel, GammaSchedule, PowerLawKernel,
                      RateSpec, TableKernel)
from .prm import PrmStream
from .renewal import RenewalConfig, iterate_regenerations
from .stats import summarize, write_reports
from .verify import SUITES, run_suites

log = logging.getLogger("hawkes_renewal")


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


# ---------------------------------------------------------------------------
# Configuration parsing
# ---------------------------------------------------------------------------

_DEFAULTS = {
    "kernel": {"form": "exponential", "rate": "1.0", "amplitude": "0.2"},
    "rate": {"form": "refractory_linear", "c": "0.5", "L": "0.4", "delta": "1.0"},
    "gamma": {"form": "linear", "C": "1.0"},
    "envelope": {"D": "0.0", "r": "zero"},
    "run": {"p": "2.0", "assumption": "B", "seed": "1", "horizon": "100.0",
            "n_blocks": "1000", "out": ".", "alpha": "0.01", "parallel": "0",
            "max_cycles": "1000000", "scan_cap": "1000000",
            "n_runs": "1000", "n_steps": "1000000",
            "fclt_units": "200", "fclt_paths": "400"},
    "debug": {"band_f_scale": "1.0"},
    "verify": {},
}


def _build_kernel(sec, problems):
    form = sec.get("form", "exponential").lower()
    try:
        if form == "exponential":
            return ExponentialKernel(float(sec.get("rate", 1.0)),
                                     float(sec.get("amplitude", 1.0)))
        if form == "powerlaw":
            return PowerLawKernel(float(sec.get("amplitude", 1.0)),
                                  float(sec.get("exponent", 2.5)))
        if form == "table":
            knots = [tuple(float(v) for v in part.split(":"))
                     for part in sec.get("knots", "0:1,1:0").split(",")]
            return TableKernel(knots)
    except (ConfigError, ValueError) as exc:
        problems.append(f"kernel: {exc}")
        return None
    problems.append(f"kernel: unknown form {form!r}")
    return None


def _build_rate(sec, problems):
    form = sec.get("form", "linear").lower()
    try:
        c = float(sec.get("c", 1.0))
        L = float(sec.get("l", sec.get("L", 1.0)))
        if form == "linear":
            return RateSpec.linear(c, L)
        if form == "refractory_linear":
            return RateSpec.refractory_linear(c, L, float(sec.get("delta", 1.0)))
        if form == "hard_refractory":
            return RateSpec.hard_refractory(c, float(sec.get("delta", 1.0)), L=L)
    except (ConfigError, ValueError) as exc:
        problems.append(f"rate: {exc}")
        return None
    problems.append(f"rate: unknown form {form!r}")
    return None


def _build_gamma(sec, problems, p, kernel, rate):
    form = sec.get("form", "linear").lower()
    try:
        if form == "linear":
            return GammaSchedule.linear(float(sec.get("c", sec.get("C", 1.0))))
        if form == "log":
            raw = sec.get("c", sec.get("C", "auto"))
            if raw == "auto":
                m = rate.L * kernel.pos_l1
                if not 0 < m < 1:
                    problems.append("gamma: auto log schedule needs 0 < L*||h+|| < 1")
                    return None
                return GammaSchedule.log(p=p, c_h=m - math.log(m) - 1.0)
            return GammaSchedule.log(C=float(raw))
    except (ConfigError, ValueError) as exc:
        problems.append(f"gamma: {exc}")
        return None
    problems.append(f"gamma: unknown form {form!r}")
    return None


def load_config(path=None, seed_override=None, out_override=None):
    """Parse the INI file into a RenewalConfig plus run settings.

    All validation problems are aggregated into one ConfigError.
    """
    parser = configparser.ConfigParser()
    parser.read_dict(_DEFAULTS)
    if path is not None:
        if not os.path.exists(path):
            raise ConfigError([f"config file not found: {path}"])
        parser.read(path)
    problems = []
    kernel = _build_kernel(parser["kernel"], problems)
    rate = _build_rate(parser["rate"], problems)
    run = parser["run"]
    try:
        p = float(run.get("p", 2.0))
    except ValueError:
        problems.append("run: p must be a number")
        p = 2.0
    assumption = run.get("assumption", "B").strip().upper()
    if assumption not in ("A", "B"):
        problems.append(f"run: assumption must be A or B, got {assumption!r}")
    sched = None
    if kernel is not None and rate is not None:
        sched = _build_gamma(parser["gamma"], problems, p, kernel, rate)
    env_sec = parser["envelope"]
    r_fn = None
    r_form = env_sec.get("r", "zero").lower()
    if r_form == "exp":
        coef = float(env_sec.get("r_coef", 1.0))
        rted = float(env_sec.get("r_rate", 1.0))
        r_fn = lambda t: coef * math.exp(-rted * t)
    elif r_form != "zero":
        problems.append(f"envelope: unknown r form {r_form!r}")
    try:
        D = float(env_sec.get("d", env_sec.get("D", 0.0)))
    except ValueError:
        problems.append("envelope: D must be a number")
        D = 0.0
    cfg = None
    if not problems and kernel is not None and rate is not None and sched is not None:
        try:
            cfg = RenewalConfig(
                kernel=kernel, rate=rate, sched=sched, r=r_fn, D=D, p=p,
                assumption=assumption,
                max_cycles=int(run.get("max_cycles", 10**6)),
                scan_cap=int(run.get("scan_cap", 10**6)),
                band_f_scale=float(parser["debug"].get("band_f_scale", 1.0)))
            problems.extend(cfg.validate())
        except (ConfigError, ValueError) as exc:
            problems.append(str(exc))
    if problems:
        raise ConfigError(problems)
    settings = {
        "seed": int(seed_override if seed_override is not None else run.get("seed", 1)),
        "out": out_override or run.get("out", "."),
        "horizon": float(run.get("horizon", 100.0)),
        "n_blocks": int(run.get("n_blocks", 1000)),
        "n_runs": int(run.get("n_runs", 1000)),
        "n_steps": int(run.get("n_steps", 10**6)),
        "fclt_units": int(run.get("fclt_units", 200)),
        "fclt_paths": int(run.get("fclt_paths", 400)),
        "alpha": float(run.get("alpha", 0.01)),
        # 0 means auto: use the available cores (outputs are identical
        # at any worker count, so this only affects speed)
        "parallel": int(run.get("parallel", 0)) or (os.cpu_count() or 1),
        "verify_sizes": {k: v for k, v in parser["verify"].items()},
        "band_f_scale": float(parser["debug"].get("band_f_scale", 1.0)),
    }
    return cfg, settings


def _outfile(settings, name):
    os.makedirs(settings["out"], exist_ok=True)
    return os.path.join(settings["out"], name)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_simulate(cfg, settings):
    pi = PrmStream(settings["seed"], stream=0)
    path = simulate_adhp(pi, cfg.kernel, cfg.rate, delay=cfg.D,
                         horizon=settings["horizon"])
    fname = _outfile(settings, "events.csv")
    with open(fname, "w") as fh:
        path_to_csv(path, fh)
    log.info("wrote %d events to %s", path.n, fname)
    print(fname)
    return 0


def cmd_renewal(cfg, settings):
    blocks = iterate_regenerations(cfg, settings["n_blocks"],
                                   seed=settings["seed"],
                                   n_jobs=settings["parallel"])
    fname = _outfile(settings, "cycles.csv")
    with open(fname, "w") as fh:
        fh.write("seed,cycle,tau_gap,alpha_gap,eta,rho\n")
        for i, b in enumerate(blocks):
            for c in b.cycles:
                fh.write(f"{i},{c.index},{_fmt(c.tau_gap)},{_fmt(c.alpha_gap)},"
                         f"{b.eta},{_fmt(b.rho)}\n")
    log.info("wrote %d blocks to %s", len(blocks), fname)
    print(fname)
    return 0


def cmd_coupling(cfg, settings):
    from .stats import coupling_experiment
    reports, data = coupling_experiment(cfg, n_runs=settings["n_runs"],
                                        seed=settings["seed"])
    fname = _outfile(settings, "coupling.csv")
    with open(fname, "w") as fh:
        fh.write("run,T,rho\n")
        for i, (t, r) in enumerate(zip(data["T"], data["rho"])):
            fh.write(f"{i},{_fmt(float(t))},{_fmt(float(r))}\n")
    _write_and_print(reports, settings, "coupling_reports.csv")
    return 0 if all(r.passed or not r.gating for r in reports) else 1


def cmd_clt(cfg, settings):
    from .stats import clt_time_average, functional_clt_paths
    nb = settings["n_blocks"]
    _, reports = clt_time_average(cfg, n_blocks=nb, seed=settings["seed"],
                                  n_jobs=settings["parallel"],
                                  alpha=settings["alpha"])
    tg, paths, rep2 = functional_clt_paths(cfg, n=settings["fclt_units"],
                                           n_paths=settings["fclt_paths"],
                                           seed=settings["seed"] + 1,
                                           n_jobs=settings["parallel"],
                                           alpha=settings["alpha"])
    fname = _outfile(settings, "clt_paths.csv")
    with open(fname, "w") as fh:
        fh.write("path_id,t,B\n")
        for i in range(paths.shape[0]):
            for t, b in zip(tg, paths[i]):
                fh.write(f"{i},{_fmt(float(t))},{_fmt(float(b))}\n")
    reports = reports + rep2
    _write_and_print(reports, settings, "clt_reports.csv")
    return 0 if all(r.passed or not r.gating for r in reports) else 1


def cmd_re_chain(cfg, settings):
    from .verify import suite_re_chain
    reports = suite_re_chain(n_steps=settings["n_steps"], seed=settings["seed"])
    _write_and_print(reports, settings, "re_chain_reports.csv")
    return 0 if all(r.passed or not r.gating for r in reports) else 1


def cmd_verify(cfg, settings, only=None):
    names = [only] if only else None
    sizes = {}
    for key, val in settings["verify_sizes"].items():
        suite, _, param = key.partition(".")
        if suite in SUITES and param:
            sizes.setdefault(suite, {})[param] = int(float(val))
    reports = run_suites(names=names, sizes=sizes, n_jobs=settings["parallel"],
                         band_f_scale=settings["band_f_scale"])
    _write_and_print(reports, settings, "verify_reports.csv")
    failed = [r for r in reports if r.gating and not r.passed]
    for r in failed:
        print(f"FAILED: {r.name}: stat={_fmt(r.statistic)} p={_fmt(r.p_value)}",
              file=sys.stderr)
    return 1 if failed else 0


def _write_and_print(reports, settings, name):
    fname = _outfile(settings, name)
    with open(fname, "w") as fh:
        write_reports(reports, fh)
    print(summarize(reports))
    print(fname)


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def main(argv=None):
    level = os.environ.get("HAWKES_RENEWAL_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))
    ap = argparse.ArgumentParser(prog="hawkes-renewal",
                                 description="Regeneration-based Hawkes simulation")
    ap.add_argument("command",
                    choices=["simulate", "renewal", "coupling", "clt",
                             "re-chain", "verify"])
    ap.add_argument("--config", help="INI configuration file")
    ap.add_argument("--seed", type=int, help="master seed override")
    ap.add_argument("--out", help="output directory")
    ap.add_argument("--only", help="run a single verification suite",
                    choices=sorted(SUITES))
    args = ap.parse_args(argv)
    try:
        cfg, settings = load_config(args.config, seed_override=args.seed,
                                    out_override=args.out)
    except ConfigError as exc:
        for prob in exc.problems:
            print(f"config error: {prob}", file=sys.stderr)
        return 2
    try:
        if args.command == "simulate":
            return cmd_simulate(cfg, settings)
        if args.command == "renewal":
            return cmd_renewal(cfg, settings)
        if args.command == "coupling":
            return cmd_coupling(cfg, settings)
        if args.command == "clt":
            return cmd_clt(cfg, settings)
        if args.command == "re-chain":
            return cmd_re_chain(cfg, settings)
        return cmd_verify(cfg, settings, only=args.only)
    except ConfigError as exc:
        for prob in exc.problems:
            print(f"config error: {prob}", file=sys.stderr)
        return 2
    except Exception as exc:  # simulation-level failure
        log.exception("simulation failed")
        print(f"simulation error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
