"""Experiment runner: sweeps driven by a config file, results written as CSV.

Each subcommand reproduces one family of results at two effort profiles:
``fast`` finishes in well under a minute per experiment, ``paper`` uses
publication-grade sample counts.  Re-running any experiment with the same
seed yields a byte-identical CSV body for any worker count.
"""

from __future__ import annotations

import argparse
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields

import numpy as np

from . import isiprob, linksim, septheory
from .scenario import ConfigError, Pdp, ScenarioConfig, link_variance, load_config
from .seeding import point_seed

KINDS = (
    "isi_prob_sweep",
    "isi_prob_vs_M",
    "ber_curve",
    "discrete_phase_ber",
    "sinr_vs_M",
    "gamma_table",
    "sep_curve",
)

PROFILES = {
    "fast": dict(
        mc_trials=20_000,
        ber_trials=2_000,
        gamma_samples=20_000,
        sinr_trials=2_000,
    ),
    "paper": dict(
        mc_trials=100_000,
        ber_trials=100_000,
        gamma_samples=1_000_000,
        sinr_trials=20_000,
    ),
}

X_GRID = {"fast": (1.0, 5.0, 10.0, 20.0, 30.0, 50.0), "paper": tuple(float(x) for x in range(1, 51))}
PT_GRID = (5.0, 10.0, 15.0, 20.0, 25.0, 30.0)
PT_GRID_HIGH = (30.0, 35.0, 40.0, 45.0, 50.0, 55.0, 60.0)

DEFAULT_SWEEPS = {
    "isi_prob_sweep": ("N_b", (5, 10, 15)),
    "isi_prob_vs_M": ("M", (16, 64, 256)),
    "ber_curve": ("M", (64, 128, 256)),
    "discrete_phase_ber": ("M", (16, 64, 256)),
    "sinr_vs_M": ("M", (16, 32, 64, 128, 256)),
    "gamma_table": ("N_b", (1, 2, 5, 9)),
    "sep_curve": ("P_t_dbm", PT_GRID),
}

_INT_FIELDS = {"M", "N_b", "N_g", "phase_resolution", "seed"}
_SWEEPABLE = {f.name for f in fields(ScenarioConfig)}


@dataclass(frozen=True)
class ExperimentSpec:
    kind: str
    base: ScenarioConfig
    sweep_name: str
    sweep_values: tuple
    trials: int
    output_path: str
    profile: str = "fast"
    seed: int | None = None       # overrides base.seed when given
    q: int = 2
    threshold: float = 10.0
    x_grid: tuple = ()
    pt_grid: tuple = ()
    resolutions: tuple = (0, 1, 2)  # 0 denotes ideal phases
    workers: int = 1
    symbols_per_trial: int = 100

    def violations(self) -> list[str]:
        out = []
        if self.kind not in KINDS:
            out.append(f"unknown experiment kind {self.kind!r}")
        if self.sweep_name not in _SWEEPABLE:
            out.append(f"sweep parameter {self.sweep_name!r} is not a config field")
        if not self.sweep_values:
            out.append("sweep value list is empty")
        if self.trials < 1:
            out.append("trials >= 1 violated")
        if self.profile not in PROFILES:
            out.append(f"unknown profile {self.profile!r}")
        out.extend(self.base.violations())
        return out

    @property
    def effective_seed(self) -> int:
        return self.base.seed if self.seed is None else self.seed


def validate_config(path: str) -> ScenarioConfig:
    """Parse and invariant-check a config file; ConfigError lists all problems."""
    return load_config(path)


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return str(v)
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    f = float(v)
    if math.isnan(f):
        return "nan"
    return repr(f)


def _write_csv(path: str, header: list[str], rows: list[tuple]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _sweep_configs(spec: ExperimentSpec) -> list[ScenarioConfig]:
    out = []
    for v in spec.sweep_values:
        cfg = spec.base.replace(**{spec.sweep_name: v})
        cfg.validated()
        out.append(cfg)
    return out


def _map_points(spec: ExperimentSpec, fn, n_points: int) -> list:
    """Evaluate sweep points, optionally concurrently, in deterministic order."""
    if spec.workers > 1:
        with ThreadPoolExecutor(max_workers=spec.workers) as pool:
            return list(pool.map(fn, range(n_points)))
    return [fn(i) for i in range(n_points)]


# --- experiment kinds ---------------------------------------------------------


def _run_isi_prob(spec: ExperimentSpec) -> tuple[list[str], list[tuple]]:
    header = ["X", "N_b", "N_g", "M", "sigma", "p_analytic", "p_mc", "mc_stderr"]
    configs = _sweep_configs(spec)
    points = [(cfg, x) for cfg in configs for x in spec.x_grid]

    def one(i: int) -> tuple:
        cfg, x = points[i]
        p_an = isiprob.isi_elimination_probability(cfg, threshold=x)
        p_mc = isiprob.isi_elimination_mc(
            cfg, threshold=x, n_trials=spec.trials, seed=point_seed(spec.effective_seed, i)
        )
        stderr = math.sqrt(p_mc * (1.0 - p_mc) / spec.trials)
        sigma = math.sqrt(link_variance(cfg)[0])
        return (x, cfg.N_b, cfg.N_g, cfg.M, sigma, p_an, p_mc, stderr)

    return header, _map_points(spec, one, len(points))


def _run_ber(spec: ExperimentSpec) -> tuple[list[str], list[tuple]]:
    header = ["P_t_dbm", "M", "N_b", "r", "ber_sim", "ber_theory", "bits"]
    configs = _sweep_configs(spec)
    points = [(cfg, pt) for cfg in configs for pt in spec.pt_grid]
    gamma_samples = PROFILES[spec.profile]["gamma_samples"]

    def one(i: int) -> tuple:
        cfg, pt = points[i]
        cfg = cfg.replace(P_t_dbm=pt)
        seed = point_seed(spec.effective_seed, i)
        metrics = linksim.ber_monte_carlo(
            cfg, "ideal", spec.trials, symbols_per_trial=spec.symbols_per_trial,
            q=spec.q, seed=seed,
        )
        if cfg.scenario == "S1":
            samples = septheory.sample_sinr(cfg, gamma_samples, seed=point_seed(spec.effective_seed, 10_000 + i))
            theory = septheory.sep_psk(septheory.fit_gamma(samples), spec.q)
        else:
            theory = float("nan")
        return (pt, cfg.M, cfg.N_b, 0, metrics.ber, theory, metrics.bits_total)

    return header, _map_points(spec, one, len(points))


def _run_discrete_ber(spec: ExperimentSpec) -> tuple[list[str], list[tuple]]:
    header = ["P_t_dbm", "M", "N_b", "r", "ber_sim", "ber_theory", "bits"]
    configs = _sweep_configs(spec)
    points = [
        (cfg, r, pt) for cfg in configs for r in spec.resolutions for pt in spec.pt_grid
    ]

    def one(i: int) -> tuple:
        cfg, r, pt = points[i]
        if r:
            cfg = cfg.replace(P_t_dbm=pt, phase_resolution=r)
            mode = "quantized"
        else:
            cfg = cfg.replace(P_t_dbm=pt)
            mode = "ideal"
        metrics = linksim.ber_monte_carlo(
            cfg, mode, spec.trials, symbols_per_trial=spec.symbols_per_trial,
            q=spec.q, seed=point_seed(spec.effective_seed, i),
        )
        return (pt, cfg.M, cfg.N_b, r, metrics.ber, float("nan"), metrics.bits_total)

    return header, _map_points(spec, one, len(points))


def _run_sinr_sweep(spec: ExperimentSpec) -> tuple[list[str], list[tuple]]:
    header = ["M", "pdp", "mode", "sinr_mean_db", "sinr_stderr"]
    configs = _sweep_configs(spec)
    exp_decay = spec.base.pdp.decay if spec.base.pdp.kind == "exponential" else 1.0
    profiles = [Pdp.uniform(), Pdp.exponential(exp_decay)]
    points = [
        (cfg, pdp, mode) for cfg in configs for pdp in profiles for mode in ("ideal", "blind")
    ]

    def one(i: int) -> tuple:
        cfg, pdp, mode = points[i]
        cfg = cfg.replace(pdp=pdp)
        mean, se = linksim.mean_sinr_monte_carlo(
            cfg, mode, spec.trials, seed=point_seed(spec.effective_seed, i)
        )
        mean_db = 10.0 * math.log10(mean)
        se_db = 10.0 / math.log(10.0) * se / mean
        return (cfg.M, pdp.kind, mode, mean_db, se_db)

    return header, _map_points(spec, one, len(points))


def _run_gamma_table(spec: ExperimentSpec) -> tuple[list[str], list[tuple]]:
    header = ["N_b", "P_t_dbm", "kappa", "rho", "n_samples"]
    configs = _sweep_configs(spec)
    points = [(cfg, pt) for cfg in configs for pt in spec.pt_grid]

    def one(i: int) -> tuple:
        cfg, pt = points[i]
        cfg = cfg.replace(P_t_dbm=pt)
        samples = septheory.sample_sinr(cfg, spec.trials, seed=point_seed(spec.effective_seed, i))
        fit = septheory.fit_gamma(samples)
        return septheory.fit_csv_row(fit, cfg.N_b, pt)

    return header, _map_points(spec, one, len(points))


def _run_sep_curve(spec: ExperimentSpec) -> tuple[list[str], list[tuple]]:
    header = ["P_t_dbm", "M", "N_b", "Q", "kappa", "rho", "sep"]
    configs = _sweep_configs(spec)

    def one(i: int) -> tuple:
        cfg = configs[i]
        samples = septheory.sample_sinr(cfg, spec.trials, seed=point_seed(spec.effective_seed, i))
        fit = septheory.fit_gamma(samples)
        return (cfg.P_t_dbm, cfg.M, cfg.N_b, spec.q, fit.kappa, fit.rho, septheory.sep_psk(fit, spec.q))

    return header, _map_points(spec, one, len(configs))


_RUNNERS = {
    "isi_prob_sweep": _run_isi_prob,
    "isi_prob_vs_M": _run_isi_prob,
    "ber_curve": _run_ber,
    "discrete_phase_ber": _run_discrete_ber,
    "sinr_vs_M": _run_sinr_sweep,
    "gamma_table": _run_gamma_table,
    "sep_curve": _run_sep_curve,
}


def run_experiment(spec: ExperimentSpec) -> str:
    """Run one experiment and write its CSV; returns the output path."""
    bad = spec.violations()
    if bad:
        raise ConfigError(bad)
    header, rows = _RUNNERS[spec.kind](spec)
    _write_csv(spec.output_path, header, rows)
    return spec.output_path


# --- command line -------------------------------------------------------------

_CMD_TO_KIND = {
    "isi-prob": "isi_prob_sweep",
    "isi-prob-vs-m": "isi_prob_vs_M",
    "ber": "ber_curve",
    "discrete-ber": "discrete_phase_ber",
    "sinr-sweep": "sinr_vs_M",
    "gamma-fit": "gamma_table",
    "sep": "sep_curve",
}

_TRIALS_KEY = {
    "isi_prob_sweep": "mc_trials",
    "isi_prob_vs_M": "mc_trials",
    "ber_curve": "ber_trials",
    "discrete_phase_ber": "ber_trials",
    "sinr_vs_M": "sinr_trials",
    "gamma_table": "gamma_samples",
    "sep_curve": "gamma_samples",
}


def _parse_values(name: str, text: str) -> tuple:
    parse = int if name in _INT_FIELDS else float
    try:
        return tuple(parse(tok) for tok in text.split(",") if tok)
    except ValueError as exc:
        raise ConfigError([f"cannot parse sweep values {text!r} for {name}: {exc}"]) from exc


def build_spec(args: argparse.Namespace) -> ExperimentSpec:
    base = load_config(args.config)
    kind = _CMD_TO_KIND[args.command]
    if args.sweep:
        if "=" not in args.sweep:
            raise ConfigError(["--sweep must look like NAME=v1,v2,..."])
        name, _, text = args.sweep.partition("=")
        if name not in _SWEEPABLE:
            raise ConfigError([f"sweep parameter {name!r} is not a config field"])
        sweep_name, sweep_values = name, _parse_values(name, text)
    else:
        sweep_name, sweep_values = DEFAULT_SWEEPS[kind]

    profile = args.profile
    trials = args.trials if args.trials else PROFILES[profile][_TRIALS_KEY[kind]]
    x_grid = _parse_values("X", args.x) if getattr(args, "x", None) else X_GRID[profile]
    if getattr(args, "pt", None):
        pt_grid = _parse_values("P_t_dbm", args.pt)
    else:
        pt_grid = PT_GRID_HIGH if kind == "discrete_phase_ber" else PT_GRID
    resolutions = (
        tuple(int(r) for r in args.r.split(",")) if getattr(args, "r", None) else (0, 1, 2)
    )
    return ExperimentSpec(
        kind=kind,
        base=base,
        sweep_name=sweep_name,
        sweep_values=sweep_values,
        trials=trials,
        output_path=args.out,
        profile=profile,
        seed=args.seed,
        q=getattr(args, "q", 2),
        x_grid=x_grid,
        pt_grid=pt_grid,
        resolutions=resolutions,
        workers=args.workers,
    )


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="otaeq",
        description="RIS over-the-air equalization experiments (CSV outputs)",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="JSON scenario config file")
    common.add_argument("--seed", type=int, default=None, help="override the config seed")
    common.add_argument("--out", required=True, help="output CSV path")
    common.add_argument("--profile", choices=sorted(PROFILES), default="fast")
    common.add_argument("--workers", type=int, default=1, help="concurrent sweep points")
    common.add_argument("--trials", type=int, default=0, help="override the profile trial count")
    common.add_argument("--sweep", default=None, help="sweep override, e.g. M=16,64,256")

    for cmd in ("isi-prob", "isi-prob-vs-m"):
        p = sub.add_parser(cmd, parents=[common], help="ISI elimination probability sweep")
        p.add_argument("--x", default=None, help="threshold grid, e.g. 1,5,10")
    for cmd in ("ber", "discrete-ber"):
        p = sub.add_parser(cmd, parents=[common], help="Monte Carlo BER sweep")
        p.add_argument("--pt", default=None, help="transmit power grid in dBm")
        p.add_argument("--q", type=int, default=2, help="PSK order")
        if cmd == "discrete-ber":
            p.add_argument("--r", default=None, help="phase resolutions, 0 meaning ideal")
    sub.add_parser("sinr-sweep", parents=[common], help="mean SINR vs element count")
    p = sub.add_parser("gamma-fit", parents=[common], help="fitted SINR gamma parameters")
    p.add_argument("--pt", default=None, help="transmit power grid in dBm")
    p = sub.add_parser("sep", parents=[common], help="semi-analytic symbol error probability")
    p.add_argument("--q", type=int, default=2, help="PSK order")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = make_parser().parse_args(argv)
    try:
        spec = build_spec(args)
        path = run_experiment(spec)
    except ConfigError as exc:
        print("invalid configuration:", file=sys.stderr)
        for v in exc.violations:
            print(f"  - {v}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"cannot write output: {exc}", file=sys.stderr)
        return 1
    print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
