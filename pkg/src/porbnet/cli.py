"""Command-line entry point for reproducible experiments.

Subcommands: sample-prior (prior function draws and summaries), fit (full
posterior inference on a CSV dataset), kernel (variogram tables). A flat JSON
config with sections {model, prior, mcmc, data, output} can seed any run;
command-line flags override config values. Every run writes manifest.json
with the seed, the fully merged config, a config hash, and library versions,
and all outputs are deterministic given the seed.

Exit codes: 0 success, 2 configuration error, 3 sampler abort.
"""
from __future__ import annotations

import argparse
import copy
import csv
import hashlib
import json
import subprocess
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bnn import BNNHyper, run_bnn_baseline, sample_prior_functions as bnn_prior_functions
from .datasets import load_csv, normalize, split
from .gp import GPHyper
from .intensity import GridIntensity, HomogeneousIntensity, PiecewiseLinearFn, default_region
from .kernels import cov_williams, empirical_cov, sample_prior_functions, variogram
from .metrics import count_upcrossings, rmse, test_log_likelihood
from .network import Hyperparams
from .sampler import Chain, MCMCConfig, SamplerAbort, posterior_predictive, run_mcmc


class ConfigError(ValueError):
    pass


DEFAULT_CONFIG = {
    "model": {"kind": "porbnet", "intensity": "fixed"},
    "prior": {
        "lambda": 1.0,
        "lambda_star": 10.0,
        "region": None,  # null -> data range padded by the prior lengthscale proxy
        "s0_sq": 1.0,
        "sigma_w_sq": 1.0,
        "sigma_b_sq": 1.0,
        "noise_var": 0.01,
        "gamma_alpha": 2.0,
        "gamma_beta": 2.0,
        "gp_variance": 1.0,
        "gp_lengthscale": None,  # null -> 0.2 * region width
        "bnn_width": 10,
        "intensity_grid": None,  # {"positions": [...], "values": [...]} fixed grid intensity
        "sigma_c_sq": 1.0,  # Gaussian-center comparison kernel
        "sigma_s_sq": 0.5,
    },
    "mcmc": {
        "iters": 2000,
        "burnin": 500,
        "thinning": 1,
        "leapfrog": 20,
        "step_size": 0.05,
        "birth_death_moves": 10,
        "seed": 0,
        "chains": 1,
        "h_snapshots": 10,
        "h_step_size": 0.15,
        "h_leapfrog": 10,
        "lambda_rw_step": 0.1,
        "intensity_grid_size": 100,
    },
    "data": {"path": None, "train_fraction": 0.75, "normalize": True},
    "output": {"dir": "out", "grid_size": 200, "samples": 50, "gaps": [0.0, 1.0, 2.0]},
}


def _merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for key, val in override.items():
        if key not in out:
            raise ConfigError(f"unknown config key {key!r}")
        if isinstance(val, dict) and isinstance(out[key], dict):
            for k2, v2 in val.items():
                if k2 not in out[key]:
                    raise ConfigError(f"unknown config key {key}.{k2}")
                out[key][k2] = v2
        else:
            out[key] = val
    return out


def load_config(args: argparse.Namespace) -> dict:
    cfg = copy.deepcopy(DEFAULT_CONFIG)
    if getattr(args, "config", None):
        with open(args.config) as fh:
            cfg = _merge(cfg, json.load(fh))
    flag_map = {
        "model": ("model", "kind"),
        "intensity": ("model", "intensity"),
        "lam": ("prior", "lambda"),
        "lambda_star": ("prior", "lambda_star"),
        "region": ("prior", "region"),
        "s0_sq": ("prior", "s0_sq"),
        "sigma_w_sq": ("prior", "sigma_w_sq"),
        "sigma_b_sq": ("prior", "sigma_b_sq"),
        "noise_var": ("prior", "noise_var"),
        "bnn_width": ("prior", "bnn_width"),
        "iters": ("mcmc", "iters"),
        "burnin": ("mcmc", "burnin"),
        "thinning": ("mcmc", "thinning"),
        "leapfrog": ("mcmc", "leapfrog"),
        "step_size": ("mcmc", "step_size"),
        "seed": ("mcmc", "seed"),
        "chains": ("mcmc", "chains"),
        "data": ("data", "path"),
        "out": ("output", "dir"),
        "samples": ("output", "samples"),
        "grid_size": ("output", "grid_size"),
        "gaps": ("output", "gaps"),
    }
    for flag, (sec, key) in flag_map.items():
        val = getattr(args, flag, None)
        if val is not None:
            cfg[sec][key] = val
    return cfg


def _hyper_from(cfg: dict, region: tuple[float, float]) -> Hyperparams:
    p = cfg["prior"]
    return Hyperparams(
        s0_sq=p["s0_sq"],
        sigma_w_sq=p["sigma_w_sq"],
        sigma_b_sq=p["sigma_b_sq"],
        noise_var=p["noise_var"],
        region=region,
        gamma_alpha=p["gamma_alpha"],
        gamma_beta=p["gamma_beta"],
    )


def _resolve_region(cfg: dict, x=None) -> tuple[float, float]:
    reg = cfg["prior"]["region"]
    if reg is not None:
        if len(reg) != 2 or not float(reg[0]) < float(reg[1]):
            raise ConfigError("region must be two numbers A < B")
        return float(reg[0]), float(reg[1])
    if x is None:
        return (-5.0, 5.0)
    p = cfg["prior"]
    hyper = Hyperparams(s0_sq=p["s0_sq"])
    if cfg["model"]["intensity"] == "sgcp":
        level = 0.5 * p["lambda_star"]
    elif cfg["model"]["intensity"] == "learned":
        level = float(np.sqrt(p["gamma_alpha"] / p["gamma_beta"]))
    else:
        level = p["lambda"]
    return default_region(x, hyper, level)


def _fixed_intensity(cfg: dict, region):
    grid_spec = cfg["prior"]["intensity_grid"]
    if grid_spec is not None:
        fn = PiecewiseLinearFn(np.asarray(grid_spec["positions"]), np.asarray(grid_spec["values"]))
        return GridIntensity(fn, region)
    return HomogeneousIntensity(cfg["prior"]["lambda"], region)


def _config_hash(cfg: dict) -> str:
    return hashlib.sha256(json.dumps(cfg, sort_keys=True).encode()).hexdigest()[:16]


def _git_revision() -> str | None:
    try:
        out = subprocess.run(
            ["git", "rev-parse", "HEAD"], capture_output=True, text=True, timeout=5,
            cwd=Path(__file__).resolve().parent,
        )
        return out.stdout.strip() or None
    except OSError:
        return None


def write_manifest(cfg: dict, out_dir: Path, command: str) -> None:
    manifest = {
        "command": command,
        "seed": cfg["mcmc"]["seed"],
        "config": cfg,
        "config_hash": _config_hash(cfg),
        "versions": {
            "python": sys.version.split()[0],
            "numpy": np.__version__,
            "porbnet": __version__,
        },
        "git_revision": _git_revision(),
    }
    try:
        import scipy

        manifest["versions"]["scipy"] = scipy.__version__
    except ImportError:
        pass
    with open(out_dir / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow(row)


def chain_to_jsonl(chain: Chain, path: Path, burnin: int, thinning: int) -> None:
    with open(path, "w") as fh:
        for i, s in enumerate(chain.samples):
            rec = {
                "iter": burnin + i * thinning,
                "K": int(s.width),
                "bias": s.bias,
                "weights": s.weights.tolist(),
                "centers": s.centers.tolist(),
                "scales": s.scales.tolist(),
                "log_post": float(chain.log_posterior_trace[burnin + i * thinning]),
            }
            fh.write(json.dumps(rec) + "\n")


# ---------------------------------------------------------------------------
# subcommands


def cmd_sample_prior(cfg: dict) -> int:
    out_dir = Path(cfg["output"]["dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    region = _resolve_region(cfg)
    rng = np.random.default_rng(cfg["mcmc"]["seed"])
    grid = np.linspace(region[0], region[1], cfg["output"]["grid_size"])
    n_keep = cfg["output"]["samples"]
    n_stat = max(n_keep, 10_000)  # variance and upcrossings want many draws
    if cfg["model"]["kind"] == "porbnet":
        hyper = _hyper_from(cfg, region)
        intens = _fixed_intensity(cfg, region)
        f = sample_prior_functions(hyper, intens, grid, n_stat, rng)
    elif cfg["model"]["kind"] == "bnn":
        p = cfg["prior"]
        bnn = BNNHyper(p["bnn_width"], p["sigma_w_sq"], p["sigma_b_sq"], p["noise_var"])
        f = bnn_prior_functions(bnn, grid, n_stat, rng)
    else:
        raise ConfigError(f"unknown model {cfg['model']['kind']!r}")
    var = f.var(axis=0, ddof=1)
    header = ["x"] + [f"f{i}" for i in range(n_keep)] + ["sd"]
    rows = [
        [grid[j]] + [f[i, j] for i in range(n_keep)] + [float(np.sqrt(var[j]))]
        for j in range(grid.size)
    ]
    _write_csv(out_dir / "prior_samples.csv", header, rows)
    _write_csv(
        out_dir / "prior_summary.csv",
        ["x", "variance", "sd"],
        [[grid[j], var[j], float(np.sqrt(var[j]))] for j in range(grid.size)],
    )
    ups = np.array([count_upcrossings(f[i]) for i in range(n_stat)])
    counts = np.bincount(ups)
    _write_csv(
        out_dir / "upcrossings.csv",
        ["upcrossings", "count", "frequency"],
        [[k, int(c), float(c / n_stat)] for k, c in enumerate(counts)],
    )
    write_manifest(cfg, out_dir, "sample-prior")
    print(f"wrote {out_dir}/prior_samples.csv ({n_keep} draws), prior_summary.csv, upcrossings.csv")
    print(f"mean prior upcrossings: {ups.mean():.3f}; interior variance ~ {np.median(var):.3f}")
    return 0


def _chain_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([seed, index]).generate_state(1)[0])


def _run_single_chain(cfg: dict, data, hyper, chain_index: int) -> Chain:
    m = cfg["mcmc"]
    config = MCMCConfig(
        n_iterations=m["iters"],
        n_burnin=m["burnin"],
        thinning=m["thinning"],
        hmc_leapfrog_steps=m["leapfrog"],
        hmc_step_size=m["step_size"],
        birth_death_moves_per_iter=m["birth_death_moves"],
        seed=_chain_seed(m["seed"], chain_index) if cfg["mcmc"]["chains"] > 1 else m["seed"],
        h_snapshots=m["h_snapshots"],
        h_step_size=m["h_step_size"],
        h_leapfrog=m["h_leapfrog"],
        lambda_rw_step=m["lambda_rw_step"],
        intensity_grid_size=m["intensity_grid_size"],
    )
    mode = {"fixed": "fixed", "learned": "homogeneous-learned", "sgcp": "sgcp"}[cfg["model"]["intensity"]]
    region = hyper.region
    if cfg["model"]["kind"] == "bnn":
        p = cfg["prior"]
        bnn = BNNHyper(p["bnn_width"], p["sigma_w_sq"], p["sigma_b_sq"], p["noise_var"])
        return run_bnn_baseline(data, bnn, config)
    if mode == "fixed":
        return run_mcmc(data, hyper, config, "fixed", _fixed_intensity(cfg, region))
    if mode == "homogeneous-learned":
        return run_mcmc(data, hyper, config, "homogeneous-learned")
    gp_ls = cfg["prior"]["gp_lengthscale"]
    gph = GPHyper(
        cfg["prior"]["gp_variance"],
        gp_ls if gp_ls is not None else 0.2 * (region[1] - region[0]),
    )
    # grow capacity from an empty network: the plug-in intensity coupling is
    # far more stable when units appear only where the data demands them
    from .network import NetworkState

    empty = NetworkState(bias=0.0, weights=np.zeros(0), centers=np.zeros(0), scales=np.zeros(0))
    return run_mcmc(
        data, hyper, config, "sgcp", lambda_star=cfg["prior"]["lambda_star"], gp_hyper=gph,
        init_state=empty,
    )


def cmd_fit(cfg: dict) -> int:
    if cfg["data"]["path"] is None:
        raise ConfigError("fit needs a dataset (--data PATH)")
    if cfg["model"]["intensity"] not in ("fixed", "learned", "sgcp"):
        raise ConfigError(f"unknown intensity mode {cfg['model']['intensity']!r}")
    out_dir = Path(cfg["output"]["dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    data = load_csv(cfg["data"]["path"])
    data = split(data, cfg["data"]["train_fraction"], cfg["mcmc"]["seed"])
    if cfg["data"]["normalize"]:
        data = normalize(data)
    region = _resolve_region(cfg, data.x)
    hyper = _hyper_from(cfg, region)

    n_chains = cfg["mcmc"]["chains"]
    if n_chains > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=n_chains) as pool:
            chains = list(pool.map(_run_single_chain, [cfg] * n_chains, [data] * n_chains, [hyper] * n_chains, range(n_chains)))
    else:
        chains = [_run_single_chain(cfg, data, hyper, 0)]

    m = cfg["mcmc"]
    for i, ch in enumerate(chains):
        name = "chain.jsonl" if n_chains == 1 else f"chain_{i}.jsonl"
        chain_to_jsonl(ch, out_dir / name, m["burnin"], m["thinning"])

    pooled = Chain(
        samples=[s for ch in chains for s in ch.samples],
        log_posterior_trace=np.concatenate([ch.log_posterior_trace for ch in chains]),
        accept_rates=chains[0].accept_rates,
        noise_var=chains[0].noise_var,
        intensity_kind=chains[0].intensity_kind,
        intensity_grids=[g for ch in chains for g in ch.intensity_grids],
    )
    grid = np.linspace(data.x.min(), data.x.max(), cfg["output"]["grid_size"])
    pred = posterior_predictive(pooled, grid, np.random.default_rng(m["seed"]))
    _write_csv(
        out_dir / "predictive.csv",
        ["x", "mean", "sd", "q05", "q95"],
        zip(pred["x"], pred["mean"], pred["sd"], pred["q05"], pred["q95"]),
    )
    _write_csv(
        out_dir / "train.csv", ["x", "y", "role"],
        [[float(xv), float(yv), "train"] for xv, yv in zip(data.x_train, data.y_train)]
        + [[float(xv), float(yv), "test"] for xv, yv in zip(data.x_test, data.y_test)],
    )

    llh = test_log_likelihood(pooled, data.x_test, data.y_test)
    err = rmse(pooled, data.x_test, data.y_test)
    metrics = {
        "dataset": data.name,
        "model": cfg["model"]["kind"] + ("" if cfg["model"]["kind"] == "bnn" else f"-{cfg['model']['intensity']}"),
        "llh_mean": llh,
        "llh_std": 0.0,
        "rmse_mean": err,
        "rmse_std": 0.0,
        "n_splits": 1,
        "seed": m["seed"],
        "accept_rates": chains[0].accept_rates,
        "divergence_fraction": max(ch.divergence_fraction for ch in chains),
    }
    with open(out_dir / "metrics.json", "w") as fh:
        json.dump(metrics, fh, indent=2, sort_keys=True)
        fh.write("\n")

    if pooled.intensity_grids:
        grids = np.stack([g.values for g in pooled.intensity_grids])
        positions = pooled.intensity_grids[0].positions
        _write_csv(
            out_dir / "intensity.csv",
            ["c", "lambda_hat"],
            zip(positions, grids.mean(axis=0)),
        )
    write_manifest(cfg, out_dir, "fit")
    print(f"fit complete: llh={llh:.4f} rmse={err:.4f} -> {out_dir}/metrics.json")
    return 0


def cmd_kernel(cfg: dict) -> int:
    out_dir = Path(cfg["output"]["dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    region = _resolve_region(cfg)
    grid = np.linspace(region[0], region[1], cfg["output"]["grid_size"])
    gaps = [float(g) for g in cfg["output"]["gaps"]]
    rows = []
    if cfg["model"]["kind"] == "porbnet":
        hyper = _hyper_from(cfg, region)
        intens = _fixed_intensity(cfg, region)
        rows.extend(variogram(hyper, intens, gaps, grid))
        rng = np.random.default_rng(cfg["mcmc"]["seed"])
        mc_grid = grid[:: max(1, grid.size // 25)]
        for h in gaps:
            for xv in mc_grid:
                est = empirical_cov(hyper, intens, xv - h / 2, xv + h / 2, 4000, rng)
                rows.append({"x": float(xv), "gap": h, "cov": est.estimate, "source": "mc", "std_error": est.std_error})
    elif cfg["model"]["kind"] == "bnn":
        p = cfg["prior"]
        amp = p["sigma_b_sq"] + p["sigma_w_sq"]
        for h in gaps:
            for xv in grid:
                cov = cov_williams(xv - h / 2, xv + h / 2, p["sigma_c_sq"], p["sigma_s_sq"], amp)
                rows.append({"x": float(xv), "gap": h, "cov": float(cov), "source": "analytic", "std_error": 0.0})
    else:
        raise ConfigError(f"unknown model {cfg['model']['kind']!r}")
    _write_csv(
        out_dir / "variogram.csv",
        ["x", "gap", "cov", "source", "std_error"],
        [[r["x"], r["gap"], r["cov"], r["source"], r["std_error"]] for r in rows],
    )
    write_manifest(cfg, out_dir, "kernel")
    print(f"wrote {out_dir}/variogram.csv ({len(rows)} rows)")
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="porbnet", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="JSON config file; flags override it")
        p.add_argument("--model", choices=["porbnet", "bnn"])
        p.add_argument("--lambda", dest="lam", type=float, help="homogeneous intensity level")
        p.add_argument("--lambda-star", dest="lambda_star", type=float, help="sigmoidal-GP intensity bound")
        p.add_argument("--region", nargs=2, type=float, metavar=("A", "B"))
        p.add_argument("--s0-sq", dest="s0_sq", type=float)
        p.add_argument("--sigma-w-sq", dest="sigma_w_sq", type=float)
        p.add_argument("--sigma-b-sq", dest="sigma_b_sq", type=float)
        p.add_argument("--noise-var", dest="noise_var", type=float)
        p.add_argument("--bnn-width", dest="bnn_width", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--out", help="output directory")
        p.add_argument("--grid-size", dest="grid_size", type=int)

    p_prior = sub.add_parser("sample-prior", help="draw prior functions and summarize them")
    add_common(p_prior)
    p_prior.add_argument("--samples", type=int, help="function draws to keep in the CSV")

    p_fit = sub.add_parser("fit", help="posterior inference on a CSV dataset")
    add_common(p_fit)
    p_fit.add_argument("--data", help="path to a two-column (x, y) CSV")
    p_fit.add_argument("--intensity", choices=["fixed", "learned", "sgcp"])
    p_fit.add_argument("--iters", type=int)
    p_fit.add_argument("--burnin", type=int)
    p_fit.add_argument("--thinning", type=int)
    p_fit.add_argument("--leapfrog", type=int)
    p_fit.add_argument("--step-size", dest="step_size", type=float)
    p_fit.add_argument("--chains", type=int)

    p_kernel = sub.add_parser("kernel", help="variogram tables, analytic and Monte Carlo")
    add_common(p_kernel)
    p_kernel.add_argument("--gaps", nargs="+", type=float)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args)
        if args.command == "sample-prior":
            return cmd_sample_prior(cfg)
        if args.command == "fit":
            return cmd_fit(cfg)
        if args.command == "kernel":
            return cmd_kernel(cfg)
        raise ConfigError(f"unknown command {args.command!r}")
    except (ConfigError, OSError, json.JSONDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SamplerAbort as exc:
        print(f"sampler abort: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
