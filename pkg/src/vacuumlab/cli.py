"""Command line front door.

    vacuumlab <subcommand> [--config FILE] [--key value ...]

Configuration is a flat key=value file; every key can be overridden by a
flag of the same name.  The output directory is, in order of precedence,
--output_dir, $VACUUMLAB_OUTPUT_DIR, the config file, ./vacuumlab_out.
Every run writes config.txt (the resolved configuration, reusable with
--config) and manifest.json next to its artifacts.

Exit codes: 0 checks passed or run converged, 1 a check failed or the run
did not converge, 2 usage or configuration error.
"""
import argparse
import math
import sys
import time
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from . import __version__
from .artifact_io import output_dir, write_csv, write_json
from .errors import ConvergenceError, DomainError, PreconditionError, RangeError, SolverError, VacuumLabError

SUBCOMMANDS = ("spectrum", "equilibrium", "smooth", "verify", "evolve", "iterate", "check-n")
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


@dataclass
class RunConfig:
    N: float = 7.0
    T: float = 1.0
    modes: int = 32
    steps: int = 64
    model: str = "nonrelativistic"
    L0: float = 0.0
    L1: float = 0.0
    n_modes: int = 8
    seed_kind: str = "periodic"
    mode: int = 1
    eps: float = 1e-3
    phase: float = 0.0
    psi0: str = "0,0.001"
    psi1: str = "0,0,0.001"
    delta: float = 1e-3
    tol: float = 1e-6
    theta0: float = 4.0
    kappa: float = 2.0
    max_steps: int = 12
    nu: int = 1
    nubar: int = 3
    thetas: str = "4,16,64,256"
    trials: int = 30
    eos: str = "power"
    gammas: str = "1.1,1.15,1.18,1.2,1.22,1.25,1.3,1.4,1.6666666666666667,1.9"
    u_c: float = 1.0
    c: float = math.inf
    nu0: float = 54.5
    nu1: float = 2.0
    rng_seed: int = 0
    timing: int = 0
    output_dir: str = ""

    def floats(self, name):
        text = getattr(self, name)
        try:
            return [float(v) for v in str(text).split(",") if v.strip()]
        except ValueError as exc:
            raise ConfigError(f"{name} must be a comma-separated list of numbers") from exc

    def lines(self):
        out = []
        for f in fields(self):
            v = getattr(self, f.name)
            out.append(f"{f.name}={_fmt(v)}")
        return "\n".join(out) + "\n"


class ConfigError(VacuumLabError, ValueError):
    """Malformed or out-of-range configuration."""


def _fmt(v):
    if isinstance(v, float):
        if math.isinf(v):
            return "inf"
        return repr(v)
    return str(v)


def _convert(name, text):
    types = {f.name: f.type for f in fields(RunConfig)}
    if name not in types:
        raise ConfigError(f"unknown configuration key {name!r}")
    kind = types[name]
    try:
        if kind in (int, "int"):
            return int(text)
        if kind in (float, "float"):
            return float(text)
    except ValueError as exc:
        raise ConfigError(f"{name}: cannot parse {text!r}") from exc
    return str(text)


def read_config_file(path):
    values = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key, val = (s.strip() for s in line.split("=", 1))
        values[key] = _convert(key, val)
    return values


def build_parser():
    p = argparse.ArgumentParser(prog="vacuumlab", description="Vacuum-boundary evolution toolkit.")
    p.add_argument("subcommand", choices=SUBCOMMANDS)
    p.add_argument("--config", help="flat key=value configuration file")
    for f in fields(RunConfig):
        p.add_argument(f"--{f.name}", dest=f.name, default=None)
    return p


def resolve_config(args):
    values = {}
    if args.config:
        try:
            values.update(read_config_file(args.config))
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
    for f in fields(RunConfig):
        v = getattr(args, f.name)
        if v is not None:
            values[f.name] = _convert(f.name, v)
    cfg = RunConfig(**values)
    cfg.output_dir = str(output_dir(cfg.output_dir or None, getattr(args, "output_dir", None)))
    return cfg


# ----------------------------------------------------------------------------
# validation
# ----------------------------------------------------------------------------

def _need(cond, message):
    if not cond:
        raise ConfigError(message)


def validate(sub, cfg):
    _need(cfg.trials >= 1, "trials must be positive")
    if sub == "check-n":
        _need(cfg.N > 0 and float(cfg.N).is_integer(), "N must be a positive integer")
        return
    _need(cfg.N > 4, "N must exceed 4")
    _need(not float(cfg.N / 2).is_integer(), "N/2 must not be an integer")
    _need(cfg.T > 0, "T must be positive")
    if sub in ("evolve", "iterate", "verify"):
        _need(cfg.model in ("trivial", "nonrelativistic", "manufactured"), f"unknown model {cfg.model!r}")
    if sub in ("evolve", "iterate"):
        _need(cfg.modes >= 8, "modes must be at least 8")
        _need(cfg.steps >= 2, "steps must be at least 2")
        _need(cfg.seed_kind in ("periodic", "cauchy", "manufactured", "zero"), f"unknown seed {cfg.seed_kind!r}")
        _need(cfg.mode >= 1, "mode must be >= 1 (mode 0 is the constant)")
        _need(cfg.eps > 0, "eps must be positive")
    if sub == "iterate":
        _need(cfg.tol > 0, "tol must be positive")
        _need(cfg.theta0 > 0 and cfg.kappa > 1, "need theta0 > 0 and kappa > 1")
        _need(cfg.max_steps >= 1, "max_steps must be positive")
    if sub == "spectrum":
        _need(cfg.n_modes >= 1, "n_modes must be positive")
    if sub == "smooth":
        _need(0 <= cfg.nu <= cfg.nubar <= 4, "need 0 <= nu <= nubar <= 4")
        th = cfg.floats("thetas")
        _need(th and all(t >= 1 for t in th), "thetas must be >= 1")
    if sub == "equilibrium":
        _need(cfg.eos in ("power", "interpolated"), "eos must be power or interpolated")
        _need(cfg.u_c > 0, "u_c must be positive")
        _need(cfg.c > 0, "c must be positive")
        if cfg.eos == "power":
            g = cfg.floats("gammas")
            _need(g and all(1 < x < 2 for x in g), "every gamma must lie in (1, 2)")
        else:
            _need(cfg.nu0 > 0 and cfg.nu1 > 0, "nu0 and nu1 must be positive")


# ----------------------------------------------------------------------------
# subcommands
# ----------------------------------------------------------------------------

def _model(cfg, kind=None):
    from .models import builtin_model

    kind = kind or cfg.model
    if kind == "trivial":
        return builtin_model("trivial", N=cfg.N, T=cfg.T)
    return builtin_model(kind, N=cfg.N, T=cfg.T, L0=cfg.L0 or None, L1=cfg.L1 or None)


def _background(cfg, model, disc):
    from .nash_moser_driver import seed_cauchy, seed_manufactured, seed_periodic
    from .spectral_l import solve_spectrum

    if cfg.seed_kind == "zero":
        z = np.zeros((disc.K + 1, disc.M))
        return z, z.copy()
    if cfg.seed_kind == "manufactured":
        return seed_manufactured(model, disc, cfg.delta)
    if cfg.seed_kind == "cauchy":
        return seed_cauchy(cfg.floats("psi0"), cfg.floats("psi1"), model, disc)
    pair = solve_spectrum(model.coeffs, cfg.mode + 1)[cfg.mode]
    return seed_periodic(pair, cfg.eps, cfg.phase, model, disc)


def run_spectrum(cfg, out):
    from .spectral_l import build_coefficients, solve_spectrum

    coeffs = build_coefficients(cfg.N, cfg.L0 or None, cfg.L1 or None)
    pairs = solve_spectrum(coeffs, cfg.n_modes)
    write_csv(out / "spectrum.csv", ["n", "lambda", "C0", "C1"],
              [(p.index, p.eigenvalue, p.C0, p.C1) for p in pairs])
    x = np.linspace(0.0, 1.0, 201)
    for p in pairs:
        write_csv(out / f"mode_{p.index}.csv", ["x", "phi"], zip(x, p(x)))
    report = {"N": cfg.N, "eigenvalues": [p.eigenvalue for p in pairs],
              "residuals": [p.residual for p in pairs]}
    if cfg.L0 == 0 and cfg.L1 == 0:
        exact = [n * (n + 1.5 + cfg.N / 2.0) for n in range(cfg.n_modes)]
        err = [abs(a - b) / max(1.0, b) for a, b in zip(report["eigenvalues"], exact)]
        report.update({"closed_form": exact, "max_relative_error": max(err)})
        report["passed"] = bool(max(err) <= 1e-6)
    else:
        report["passed"] = True
    write_json(out / "report.json", report)
    return report["passed"]


def run_equilibrium(cfg, out):
    from . import stellar_equilibrium as st

    if cfg.eos == "interpolated":
        rep = st.interpolated_construction(cfg.nu0, cfg.nu1, cfg.u_c, cfg.c if math.isfinite(cfg.c) else 1e3)
        prof = rep.pop("profile")
        eos = rep.pop("eos")
        write_csv(out / "profile.csv", ["r", "m", "u", "rho", "P"], zip(prof.r, prof.m, prof.u, prof.rho, prof.P))
        write_json(out / "eos.json", {"kind": "interpolated", "nu0": eos.nu0, "nu1": eos.nu1,
                                      "u_star": eos.u_star, "K_star": eos.K_star, "c": eos.c})
        write_json(out / "report.json", rep)
        return rep["bound_ok"]
    rows = []
    report = []
    for g in cfg.floats("gammas"):
        eos = st.power_law_eos(g, cfg.c)
        prof = (st.integrate_lane_emden(eos, cfg.u_c) if not math.isfinite(cfg.c)
                else st.integrate_tov(eos, cfg.u_c, c=cfg.c))
        entry = {"gamma": g, "finite": prof.finite, "r_plus": prof.r_plus}
        if prof.finite:
            rows.append((g, "finite", prof.r_plus))
            B, resid = st.boundary_expansion_fit(prof)
            entry.update({"B": B, "fit_residual": resid, "xi_plus": prof.r_plus / prof.length_scale})
            write_csv(out / f"profile_gamma_{g:.6g}.csv", ["r", "m", "u", "rho", "P"],
                      zip(prof.r, prof.m, prof.u, prof.rho, prof.P))
        else:
            rows.append((g, "infinite", "—"))
        report.append(entry)
    write_csv(out / "scan.csv", ["gamma", "finite", "r_plus"], rows)
    write_json(out / "eos.json", {"kind": "power", "gammas": cfg.floats("gammas"), "c": cfg.c, "u_c": cfg.u_c})
    write_json(out / "report.json", {"rows": report})
    return True


def run_smooth(cfg, out):
    from .smoothing_ops import slope_within, verify_smoothing_estimates

    rep = verify_smoothing_estimates(cfg.nu, cfg.nubar, tuple(cfg.floats("thetas")), trials=cfg.trials,
                                     N=cfg.N, T=cfg.T, seed=cfg.rng_seed)
    passed = bool(max(rep["drift"].values()) < 0.1 and slope_within(rep))
    rep["passed"] = passed
    write_json(out / "report.json", rep)
    return passed


def run_verify(cfg, out):
    from .verification import envelope_entries, run_suite

    rep = run_suite(cfg.model if cfg.model != "manufactured" else "nonrelativistic", N=cfg.N,
                    seed=cfg.rng_seed, trials=cfg.trials)
    # explicit-constant comparisons are reported, not part of the pass verdict
    rep["envelopes"] = envelope_entries(rep)
    for env in rep["envelopes"]:
        if not env["envelope_ok"]:
            print(f"note: {env['name']} worst ratio {env['worst_ratio']:.4g} exceeds the explicit "
                  f"constant {env['proof_constant']:.4g}", file=sys.stderr)
    write_json(out / "report.json", rep)
    return rep["passed"]


def run_evolve(cfg, out):
    from .linearized_evolution import energy_audit, energy_density, solve_linearized
    from .models import discretization

    model = _model(cfg)
    disc = discretization(cfg.N, cfg.modes, cfg.steps, cfg.T)
    Y, V = _background(cfg, model, disc)
    rng = np.random.default_rng(cfg.rng_seed)
    band = min(8, disc.M)
    rows = rng.standard_normal((2, band)) / np.arange(1, band + 1) ** 2
    G1 = np.zeros((disc.K + 1, disc.M))
    G2 = np.zeros_like(G1)
    G1[:, :band] = np.cos(disc.t)[:, None] * rows[0]
    G2[:, :band] = np.sin(2.0 * disc.t)[:, None] * rows[1]
    h = solve_linearized(model, disc, Y, V, (G1, G2))
    audit = energy_audit(model, disc, Y, V, (G1, G2), h)
    sp = disc.space
    ones = np.ones(sp.xq.shape)
    h_norm = np.sqrt(np.sum(h.y**2, axis=1))
    dh = np.sqrt(energy_density(sp, ones, h.y, np.zeros_like(h.v)))
    k_norm = np.sqrt(np.sum(h.v**2, axis=1))
    write_csv(out / "timeseries.csv", ["t", "h_norm", "Ddot_h_norm", "k_norm", "energy", "residual"],
              zip(disc.t, h_norm, dh, k_norm, audit["energy"], audit["state_residual"]))
    summary = {k: audit[k] for k in ("max_state_residual", "max_midpoint_residual", "energy_nonnegative",
                                     "equivalence", "M0", "M", "gronwall_ok")}
    summary.update({"model": model.kind, "N": cfg.N, "T": cfg.T, "modes": disc.M, "steps": disc.K,
                    "dt": disc.dt, "rng_seed": cfg.rng_seed})
    write_json(out / "run.json", summary)
    return bool(audit["energy_nonnegative"] and audit["gronwall_ok"])


def run_iterate(cfg, out):
    from .models import discretization
    from .nash_moser_driver import iterate

    kind = "manufactured" if cfg.seed_kind == "manufactured" else cfg.model
    model = _model(cfg, kind)
    disc = discretization(cfg.N, cfg.modes, cfg.steps, cfg.T)
    Ys, Vs = _background(cfg, model, disc)
    trace = iterate(model, disc, Ys, Vs, theta0=cfg.theta0, kappa=cfg.kappa, tol=cfg.tol,
                    max_steps=cfg.max_steps)
    steps = trace.as_json()
    if not cfg.timing:
        for s in steps:
            s["wall_ms"] = None
    write_json(out / "trace.json", steps)
    write_json(out / "run.json", {"converged": trace.converged, "reason": trace.reason,
                                  "grading": asdict(trace.grading), "model": model.kind,
                                  "steps": len(steps), "final_residual": trace.residuals[-1]})
    return trace.converged


def run_check_n(cfg, out):
    from .nash_moser_driver import check_theorem_conditions

    verdict = check_theorem_conditions(int(cfg.N))
    write_json(out / "verdict.json", verdict)
    return bool(verdict["paper_sufficient"] and verdict["raw_inequality"])


RUNNERS = {
    "spectrum": run_spectrum,
    "equilibrium": run_equilibrium,
    "smooth": run_smooth,
    "verify": run_verify,
    "evolve": run_evolve,
    "iterate": run_iterate,
    "check-n": run_check_n,
}


def run(subcommand, cfg):
    """Validate, execute and archive one subcommand; returns the exit code."""
    if subcommand not in RUNNERS:
        raise ConfigError(f"unknown subcommand {subcommand!r}")
    validate(subcommand, cfg)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.txt").write_text(cfg.lines(), encoding="utf-8")
    manifest = {"subcommand": subcommand, "version": __version__, "config": asdict(cfg),
                "rng_seed": cfg.rng_seed}
    start = time.perf_counter()
    try:
        passed = RUNNERS[subcommand](cfg, out)
    except (PreconditionError, DomainError, RangeError) as exc:
        manifest.update({"status": "config_error", "error": str(exc)})
        write_json(out / "manifest.json", manifest)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConvergenceError, SolverError) as exc:
        manifest.update({"status": "failed", "error": str(exc)})
        write_json(out / "manifest.json", manifest)
        print(f"failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    manifest["status"] = "passed" if passed else "failed"
    if cfg.timing:
        manifest["wall_s"] = time.perf_counter() - start
    write_json(out / "manifest.json", manifest)
    return EXIT_OK if passed else EXIT_FAIL


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        cfg = resolve_config(args)
        code = run(args.subcommand, cfg)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    print(f"{args.subcommand}: exit {code}, artifacts in {cfg.output_dir}")
    return code


if __name__ == "__main__":
    sys.exit(main())
