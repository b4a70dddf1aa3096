"""Experiment runner: simulate Gram spectra, solve their limits, compare.

Verbs:

    gramfield run <config.json>          full pipeline, CSV artifacts
    gramfield compare <F.csv> <G.csv>    Levy/Kolmogorov between CDF files
    gramfield sweep-alpha <config.json>  periodization-gap decay over sizes

A run config is a single JSON document; complex numbers are [re, im]
pairs.  Outputs are deterministic given the config: identical configs
produce byte-identical artifacts (all floats printed with 17
significant digits).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import matgen, spectra, transforms
from .limit_solver import (SolverConfig, measure_from_lambda,
                           solve_centered_many, solve_noncentered_many,
                           solve_square_many, write_solver_csv)
from .spectra import (EmpiricalSpectrum, bai_bound, default_inversion_grid,
                      invert_stieltjes_to_cdf, kolmogorov_distance,
                      levy_distance, read_cdf_csv, write_cdf_csv)
from .symbols import (SpectralSymbol1D, SpectralSymbol2D,
                      filter_from_json_dict)

OUTPUT_DIR_ENV = "GRAMFIELD_OUTPUT_DIR"

MODES = ("centered", "noncentered_pseudodiag", "square_toeplitz", "real_case")


@dataclass
class InversionSettings:
    eta: float = 1e-3
    step: float = 5e-3
    pad: float = 1.0


@dataclass
class ExperimentConfig:
    mode: str
    filter2d: object
    N: int
    n: int
    seeds: list
    z_grid: list
    filter1d: object = None
    lambda_diag: np.ndarray = None
    solver: SolverConfig = field(default_factory=SolverConfig)
    inversion: InversionSettings = field(default_factory=InversionSettings)
    output_dir: str = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.N < 1 or self.n < 1:
            raise ValueError("N and n must be positive")
        if self.mode == "square_toeplitz":
            if self.N != self.n:
                raise ValueError("square_toeplitz mode requires N == n")
            if self.filter1d is None:
                raise ValueError("square_toeplitz mode requires filter1d")
        elif self.N > self.n:
            raise ValueError("rectangular modes require N <= n")
        if self.mode == "noncentered_pseudodiag" and self.lambda_diag is None:
            raise ValueError("noncentered_pseudodiag mode requires lambda_diag")
        if self.mode == "real_case" and not self.filter2d.is_real:
            raise ValueError("real_case mode requires a real filter")
        if not self.seeds:
            raise ValueError("at least one seed is required")
        for z in self.z_grid:
            if complex(z).imag <= 0:
                raise ValueError(f"z grid point {z} is not in the upper half-plane")

    @classmethod
    def from_json_dict(cls, doc):
        solver_doc = doc.get("solver", {})
        inv_doc = doc.get("inversion", {})
        lam = doc.get("lambda_diag")
        return cls(
            mode=doc["mode"],
            filter2d=filter_from_json_dict(doc["filter2d"]),
            filter1d=(filter_from_json_dict(doc["filter1d"])
                      if "filter1d" in doc else None),
            lambda_diag=(np.array([complex(p[0], p[1]) for p in lam])
                         if lam is not None else None),
            N=int(doc["N"]),
            n=int(doc["n"]),
            seeds=[int(s) for s in doc["seeds"]],
            z_grid=[complex(p[0], p[1]) for p in doc.get("z_grid", [])],
            solver=SolverConfig(
                grid_size=int(solver_doc.get("grid_size", 64)),
                tolerance=float(solver_doc.get("tolerance", 1e-10)),
                max_iterations=int(solver_doc.get("max_iterations", 10000)),
                damping=(float(solver_doc["damping"])
                         if solver_doc.get("damping") is not None else None)),
            inversion=InversionSettings(
                eta=float(inv_doc.get("eta", 1e-3)),
                step=float(inv_doc.get("step", 5e-3)),
                pad=float(inv_doc.get("pad", 1.0))),
            output_dir=doc.get("output_dir"))


def load_config(path):
    with open(path) as fh:
        return ExperimentConfig.from_json_dict(json.load(fh))


def _g17(x):
    return f"{x:.17g}"


def _deterministic_part(cfg):
    """The matrix added to the field, or None for centered modes."""
    if cfg.mode == "square_toeplitz":
        return matgen.build_toeplitz(cfg.filter1d, cfg.n)
    if cfg.mode == "noncentered_pseudodiag":
        lam = matgen.build_pseudo_diagonal(cfg.lambda_diag, cfg.N, cfg.n)
        f_left = transforms.fourier_matrix(cfg.N)
        f_right = transforms.fourier_matrix(cfg.n)
        a = f_left.adjoint_entries() @ lam.entries @ f_right.entries
        return matgen.FieldMatrix(a, kind="generic")
    return None


def _simulate_seed(cfg, det, seed):
    """One seed: spectrum of the (possibly shifted) Gram matrix plus the
    coupling statistics between raw and periodized fields."""
    dist = "real_standard" if cfg.mode == "real_case" else "complex_standard"
    noise = matgen.sample_noise(cfg.N, cfg.n, matgen.NoiseSpec(dist, seed),
                                margin=cfg.filter2d.radius)
    z_raw = matgen.build_field(cfg.filter2d, noise, cfg.N, cfg.n)
    z_per = matgen.build_periodized_field(cfg.filter2d, noise, cfg.N, cfg.n)
    if det is None:
        m_raw, m_per = z_raw, z_per
    else:
        m_raw, m_per = z_raw + det, z_per + det
    spectrum = spectra.gram_spectrum(m_raw)
    lhs, rhs = bai_bound(m_raw, m_per)
    alpha, beta, beta_tilde = spectra.trace_stats(z_raw, z_per, det)
    return {
        "seed": seed,
        "spectrum": spectrum,
        "bai_lhs": lhs,
        "bai_rhs": rhs,
        "alpha": alpha,
        "beta": beta,
        "beta_tilde": beta_tilde,
    }


def _solve_batch(cfg, z_values):
    """Kernels' f-values plus residual/iteration bookkeeping per z."""
    sym = SpectralSymbol2D(cfg.filter2d)
    c = cfg.N / cfg.n
    if cfg.mode == "real_case":
        profile = sym.folded_profile
    else:
        profile = sym.profile
    if cfg.mode == "square_toeplitz":
        sym1 = SpectralSymbol1D(cfg.filter1d)
        pairs = solve_square_many(profile, sym1.profile, z_values, cfg.solver)
        kernels = [p[0] for p in pairs]
    elif cfg.mode == "noncentered_pseudodiag":
        lam = matgen.build_pseudo_diagonal(cfg.lambda_diag, cfg.N, cfg.n)
        H = measure_from_lambda(lam)
        pairs = solve_noncentered_many(profile, c, H, z_values, cfg.solver)
        kernels = [p[0] for p in pairs]
    else:
        kernels = solve_centered_many(profile, c, z_values, cfg.solver)
    return kernels


def run_experiment(cfg: ExperimentConfig, threads=1):
    """Execute a configured run; returns the summary dict.

    Artifacts written to the output directory: per-seed eigenvalue CSVs,
    the pooled ECDF, the solver table at the configured z grid, the
    inverted limiting CDF, and a summary CSV.  Non-converged solver
    points are recorded, not fatal.
    """
    out_dir = cfg.output_dir or os.environ.get(OUTPUT_DIR_ENV) or "."
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    det = _deterministic_part(cfg)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(
                lambda s: _simulate_seed(cfg, det, s), cfg.seeds))
    else:
        results = [_simulate_seed(cfg, det, s) for s in cfg.seeds]

    for res in results:
        path = out / f"eigenvalues_seed{res['seed']}.csv"
        with open(path, "w") as fh:
            fh.write("eigenvalue\n")
            for v in res["spectrum"].eigenvalues:
                fh.write(_g17(v) + "\n")

    pooled_vals = np.sort(np.concatenate(
        [res["spectrum"].eigenvalues for res in results]))
    pooled = EmpiricalSpectrum(eigenvalues=pooled_vals, dim=len(pooled_vals))
    pooled_ecdf = pooled.ecdf()
    write_cdf_csv(pooled_ecdf, out / "pooled_ecdf.csv")

    nonconverged = 0
    if cfg.z_grid:
        kernels = _solve_batch(cfg, cfg.z_grid)
        nonconverged += sum(not k.converged for k in kernels)
        write_solver_csv(kernels, out / "stieltjes.csv")

    inv = cfg.inversion
    grid = default_inversion_grid(pooled, step=inv.step, pad=inv.pad)
    sweep = _solve_batch(cfg, grid + 1j * inv.eta)
    nonconverged += sum(not k.converged for k in sweep)
    f_values = np.array([k.value for k in sweep])
    limit = invert_stieltjes_to_cdf(f_values, grid, inv.eta)
    write_cdf_csv(limit, out / "limit_cdf.csv")

    summary = {
        "mode": cfg.mode,
        "N": cfg.N,
        "n": cfg.n,
        "n_seeds": len(cfg.seeds),
        "levy_pooled_vs_limit": levy_distance(pooled_ecdf, limit),
        "kolmogorov_pooled_vs_limit": kolmogorov_distance(pooled_ecdf, limit),
        "bai_holds_all": int(all(r["bai_lhs"] <= r["bai_rhs"] for r in results)),
        "bai_lhs_max": max(r["bai_lhs"] for r in results),
        "bai_rhs_min": min(r["bai_rhs"] for r in results),
        "alpha_mean": float(np.mean([r["alpha"] for r in results])),
        "beta_mean": float(np.mean([r["beta"] for r in results])),
        "beta_tilde_mean": float(np.mean([r["beta_tilde"] for r in results])),
        "solver_nonconverged": nonconverged,
    }
    with open(out / "summary.csv", "w") as fh:
        fh.write("metric,value\n")
        for key, val in summary.items():
            text = _g17(val) if isinstance(val, float) else str(val)
            fh.write(f"{key},{text}\n")
    return summary


def compare_distributions(path_f, path_g):
    """Levy and Kolmogorov distances between two CDF CSV files."""
    F = read_cdf_csv(path_f)
    G = read_cdf_csv(path_g)
    return levy_distance(F, G), kolmogorov_distance(F, G)


def sweep_alpha(h, sizes, seeds):
    """Mean periodization gap alpha per (N, n) size over the seed list.

    alpha = (1/n) Tr (Z - Zt)(Z - Zt)* measures how much the raw field
    differs from its periodization; it decays as the window grows.
    """
    if len(sizes) < 2:
        raise ValueError("sweep_alpha needs at least two sizes")
    if not seeds:
        raise ValueError("sweep_alpha needs a nonempty seed list")
    rows = []
    for N, n in sizes:
        alphas = []
        for seed in seeds:
            noise = matgen.sample_noise(
                N, n, matgen.NoiseSpec("complex_standard", seed),
                margin=h.radius)
            z_raw = matgen.build_field(h, noise, N, n)
            z_per = matgen.build_periodized_field(h, noise, N, n)
            alpha, _, _ = spectra.trace_stats(z_raw, z_per)
            alphas.append(alpha)
        rows.append((N, n, float(np.mean(alphas))))
    return rows


def _cmd_run(args):
    cfg = load_config(args.config)
    summary = run_experiment(cfg, threads=args.threads)
    for key, val in summary.items():
        text = _g17(val) if isinstance(val, float) else str(val)
        print(f"{key},{text}")
    return 0


def _cmd_compare(args):
    levy, kolmogorov = compare_distributions(args.cdf_f, args.cdf_g)
    print("levy,kolmogorov")
    print(f"{_g17(levy)},{_g17(kolmogorov)}")
    return 0


def _cmd_sweep_alpha(args):
    with open(args.config) as fh:
        doc = json.load(fh)
    h = filter_from_json_dict(doc["filter2d"])
    sizes = [(int(p[0]), int(p[1])) for p in doc["sizes"]]
    seeds = [int(s) for s in doc["seeds"]]
    rows = sweep_alpha(h, sizes, seeds)
    print("N,n,mean_alpha")
    for N, n, alpha in rows:
        print(f"{N},{n},{_g17(alpha)}")
    means = [r[2] for r in rows]
    decreasing = all(b <= a for a, b in zip(means, means[1:]))
    print(f"monotone_decreasing,{int(decreasing)}")
    return 0


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="gramfield",
        description="Gram spectra of stationary Gaussian fields: simulation, "
                    "limit solving, and distribution comparison.")
    parser.add_argument("--threads", type=int, default=1,
                        help="worker threads for per-seed simulation")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a configured experiment")
    p_run.add_argument("config")
    p_run.set_defaults(fn=_cmd_run)

    p_cmp = sub.add_parser("compare", help="distances between two CDF CSVs")
    p_cmp.add_argument("cdf_f")
    p_cmp.add_argument("cdf_g")
    p_cmp.set_defaults(fn=_cmd_compare)

    p_sw = sub.add_parser("sweep-alpha",
                          help="periodization gap decay over matrix sizes")
    p_sw.add_argument("config")
    p_sw.set_defaults(fn=_cmd_sweep_alpha)

    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
