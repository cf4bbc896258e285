"""Run orchestration: execute a strategy, persist artifacts, build tables.

Every run directory is self-describing: ``manifest.json`` holds the fully
resolved config (plus the package version), and rerunning from the
manifest reproduces ``records.csv`` and ``evals.csv`` byte-for-byte.
"""
import os

import numpy as np

from .. import __version__, baselines, cem, flowsim
from ..reward import Evaluator, EvalMode, RewardSpec
from ..spectral import bandpass_perturbation, fit_power_law, partition_bands, radial_psd
from ..streams import child_rng
from ..subspace import decouple, reconstruct
from . import runio
from .config import resolve


def build_generator(cfg):
    """Instantiate the flow generator described by a resolved config."""
    gen = cfg["generator"]
    prior = flowsim.PowerLawPrior(beta=gen["beta"], amplitude=gen["amplitude"])
    target = None
    if cfg["reward"]["kind"] in ("template_lowfreq", "neg_l2"):
        seed_spec = gen["target_seed"]
        rng = (child_rng(cfg["seed"], "target") if seed_spec is None
               else np.random.default_rng(seed_spec))
        target = flowsim.sample_prior_realization(prior, tuple(gen["shape"]), rng)
    return flowsim.WienerFlowGenerator(
        shape=tuple(gen["shape"]),
        prior=prior,
        steps=gen["steps"],
        clip=gen["clip"],
        target=target,
    )


def build_reward_spec(cfg):
    rew = cfg["reward"]
    return RewardSpec(
        kind=rew["kind"],
        level=rew["level"] if rew["level"] is not None else 4,
        band=tuple(rew["band"]) if rew["band"] else None,
        command=tuple(rew["command"]) if rew["command"] else None,
    )


def _persist_common(out_dir, cfg, records, eval_log, digest):
    runio.atomic_write_text(os.path.join(out_dir, "records.csv"), runio.records_csv(records))
    runio.atomic_write_text(os.path.join(out_dir, "timings.csv"), runio.timings_csv(records))
    runio.atomic_write_text(os.path.join(out_dir, "evals.csv"), runio.eval_log_csv(eval_log))


def run(raw_config, out_dir):
    """Execute one search run and write its artifacts under ``out_dir``.

    Returns a summary dict with the best score and the NRE consumed.
    Mid-run scorer failures still persist partial records plus a
    ``failure.json`` marker before the exception propagates.
    """
    cfg = resolve(raw_config)
    os.makedirs(out_dir, exist_ok=True)
    digest = runio.config_digest(cfg)
    manifest = {"config": cfg, "version": __version__, "config_digest": digest}
    runio.atomic_write_text(os.path.join(out_dir, "manifest.json"), runio.dump_json(manifest))

    generator = build_generator(cfg)
    spec = build_reward_spec(cfg)
    mode = EvalMode(steps=cfg["eval"]["steps"])
    budget = cem.Budget(total=cfg["budget_nre"])
    seed = cfg["seed"]
    strategy = cfg["strategy"]

    with Evaluator(generator, spec, mode, budget, workers=cfg["workers"]) as evaluator:
        try:
            if strategy == "ses":
                summary = _run_ses(cfg, generator, evaluator, budget, seed, out_dir, digest)
            elif strategy == "bon":
                result = baselines.best_of_n(
                    evaluator.score_batch, generator.shape, budget,
                    child_rng(seed, "bon"), record_chunk=cfg["record_chunk"])
                summary = _persist_baseline(result, cfg, out_dir, digest, result.best.u)
            elif strategy == "zon":
                zo_cfg = baselines.ZoConfig(
                    n_iter=cfg["zo"]["n_iter"], batch=cfg["zo"]["batch"],
                    step_lambda=cfg["zo"]["step_lambda"])
                result = baselines.zero_order(
                    evaluator.score_batch, generator.shape, budget, zo_cfg,
                    child_rng(seed, "zon"))
                summary = _persist_baseline(result, cfg, out_dir, digest, result.best.u)
            else:  # random_subspace
                x_init = child_rng(seed, "init").standard_normal(tuple(generator.shape))
                _, sub = decouple(x_init, cfg["cem"]["level"])
                result = baselines.random_search_subspace(
                    evaluator.score_batch, sub, budget,
                    child_rng(seed, "search"), record_chunk=cfg["record_chunk"])
                best_field = reconstruct(result.best.u, sub)
                summary = _persist_baseline(result, cfg, out_dir, digest, best_field)
        except cem.SearchAbort as abort:
            _persist_common(out_dir, cfg, abort.records, abort.eval_log, digest)
            runio.atomic_write_text(
                os.path.join(out_dir, "failure.json"),
                runio.dump_json({"error": str(abort), "nre_used": budget.used}),
            )
            raise

    summary["nre_used"] = budget.used
    runio.atomic_write_text(os.path.join(out_dir, "summary.json"), runio.dump_json(summary))
    return summary


def _run_ses(cfg, generator, evaluator, budget, seed, out_dir, digest):
    ses_cfg = cem.SesConfig(
        n_per_gen=cfg["cem"]["n_per_gen"],
        elite_k=cfg["cem"]["elite_k"],
        gamma=cfg["cem"]["gamma"],
        variance_floor=cfg["cem"]["variance_floor"],
        finalize_mode=cfg["cem"]["finalize_mode"],
    )
    x_init = child_rng(seed, "init").standard_normal(tuple(generator.shape))
    _, sub = decouple(x_init, cfg["cem"]["level"])

    def evaluate(us):
        return evaluator.score_batch([reconstruct(u, sub) for u in us])

    result = cem.run_ses(evaluate, sub.low_dim, budget, ses_cfg, child_rng(seed, "cem"))
    u_star = cem.finalize(result.final, result.pool, ses_cfg.finalize_mode,
                          rng=child_rng(seed, "finalize"))

    _persist_common(out_dir, cfg, result.records, result.eval_log, digest)
    runio.write_field(os.path.join(out_dir, "best_noise.f32"),
                      reconstruct(result.best.u, sub), "best_seen_noise", seed, digest)
    runio.write_field(os.path.join(out_dir, "final_noise.f32"),
                      reconstruct(u_star, sub), "finalized_noise", seed, digest)
    runio.atomic_write_text(
        os.path.join(out_dir, "distribution.json"),
        runio.dump_json({
            "mu": [runio.fmt_real(v) for v in result.final.mu],
            "sigma2": [runio.fmt_real(v) for v in result.final.sigma2],
        }),
    )
    return {"strategy": "ses", "best_score": result.best.score,
            "best_eval_index": result.best.eval_index,
            "generations": len(result.records)}


def _persist_baseline(result, cfg, out_dir, digest, best_field):
    _persist_common(out_dir, cfg, result.records, result.eval_log, digest)
    runio.write_field(os.path.join(out_dir, "best_noise.f32"),
                      best_field, "best_seen_noise", cfg["seed"], digest)
    return {"strategy": cfg["strategy"], "best_score": result.best.score,
            "best_eval_index": result.best.eval_index,
            "generations": len(result.records)}


def validate_theory(beta, grid_size, n_bands, steps, out_dir, seed=0,
                    amplitude=None, eps=1e-3):
    """Emit a gain-curve report comparing three gain computations per band.

    Bands partition the grid's nonzero frequencies; each receives one
    seeded unit-norm probe. Columns: measured perturb-and-integrate gain,
    quadrature prediction for the same probe, and the critical-time
    approximation at the band's representative norm. When ``amplitude`` is
    omitted it defaults to the SNR-balanced value, which centers the
    unit-SNR crossing of the lattice mid-frequency inside the integration
    window so the fixed step count resolves every band's transition.
    """
    if n_bands < 4:
        raise ValueError(f"n_bands must be >= 4, got {n_bands}")
    if grid_size < 2 or grid_size & (grid_size - 1):
        raise ValueError(f"grid_size must be a power of two, got {grid_size}")
    if amplitude is None:
        amplitude = flowsim.balanced_amplitude(beta, (grid_size, grid_size))
    prior = flowsim.PowerLawPrior(beta=beta, amplitude=amplitude)
    g = flowsim.WienerFlowGenerator(shape=(1, grid_size, grid_size), prior=prior, steps=steps)
    bands = partition_bands((grid_size, grid_size), n_bands)
    x0 = child_rng(seed, "theory-x0").standard_normal(g.shape)

    rows = []
    emp, cf, pw = [], [], []
    for k, band in enumerate(bands):
        xi = bandpass_perturbation(g.shape, band, child_rng(seed, "probe", k))
        emp.append(flowsim.empirical_gain_of(g, x0, xi, eps))
        cf.append(flowsim.gain_of_perturbation(g, xi))
        pw.append(flowsim.piecewise_gain_approx(prior, g.schedule, band.representative,
                                                clip=g.clip))
        rows.append((band.lo, band.hi, band.representative, emp[-1], cf[-1], pw[-1]))

    lines = ["band_lo,band_hi,omega_rep,gain_empirical,gain_closed_form,gain_piecewise"]
    for row in rows:
        lines.append(",".join(runio.fmt_real(v) for v in row))

    fit_cf = flowsim.fit_gain_curve(bands, cf)
    fit_emp = flowsim.fit_gain_curve(bands, emp)
    fit_pw = flowsim.fit_gain_curve(bands, pw)
    report = {
        "beta": beta,
        "amplitude": amplitude,
        "grid_size": grid_size,
        "n_bands": n_bands,
        "steps": steps,
        "seed": seed,
        "target_slope": -beta / 2.0,
        "slope_closed_form": fit_cf.fit_slope,
        "slope_empirical": fit_emp.fit_slope,
        "slope_piecewise": fit_pw.fit_slope,
        "r2_closed_form": fit_cf.r2,
        "max_rel_diff_empirical_vs_closed_form": float(
            np.max(np.abs(np.array(emp) - np.array(cf)) / np.array(cf))
        ),
    }
    os.makedirs(out_dir, exist_ok=True)
    runio.atomic_write_text(os.path.join(out_dir, "gain_curve.csv"), "\n".join(lines) + "\n")
    runio.atomic_write_text(os.path.join(out_dir, "theory_report.json"), runio.dump_json(report))
    return report


def psd_report(field, n_bins, out_dir, name="psd"):
    """Export a field's radial PSD profile and its power-law fit as CSV/JSON."""
    profile = radial_psd(field, n_bins)
    fit = fit_power_law(profile)
    lines = ["bin_lo,bin_hi,bin_center,mean_power,count"]
    for k in range(len(profile.mean_power)):
        lines.append(",".join([
            runio.fmt_real(profile.bin_edges[k]),
            runio.fmt_real(profile.bin_edges[k + 1]),
            runio.fmt_real(profile.centers[k]),
            runio.fmt_real(profile.mean_power[k]),
            str(int(profile.counts[k])),
        ]))
    os.makedirs(out_dir, exist_ok=True)
    runio.atomic_write_text(os.path.join(out_dir, f"{name}_profile.csv"),
                            "\n".join(lines) + "\n")
    runio.atomic_write_text(os.path.join(out_dir, f"{name}_fit.json"), runio.dump_json({
        "exponent": fit.exponent, "intercept": fit.intercept, "r2": fit.r2,
    }))
    return fit


def bench(strategies, budgets, n_seeds, common_config, out_dir, base_seed=0):
    """Per-(strategy, budget, seed) best scores plus mean/std aggregates.

    Individual run failures are recorded in their cell; the table is still
    emitted.
    """
    if not strategies or not budgets or n_seeds < 1:
        raise ValueError("bench needs non-empty strategies, budgets, and seeds")
    os.makedirs(out_dir, exist_ok=True)
    cell_lines = ["strategy,budget_nre,seed,status,best_score"]
    agg_lines = ["strategy,budget_nre,n_seeds,mean_best,std_best"]
    for strategy in strategies:
        for budget in budgets:
            scores = []
            for i in range(n_seeds):
                seed = base_seed + i
                raw = dict(common_config or {})
                raw.update({"strategy": strategy, "budget_nre": budget, "seed": seed})
                run_dir = os.path.join(out_dir, "runs", f"{strategy}-b{budget}-s{seed}")
                try:
                    summary = run(raw, run_dir)
                except Exception as exc:  # noqa: BLE001 - cell-level isolation
                    cell_lines.append(f"{strategy},{budget},{seed},failed,{type(exc).__name__}")
                    continue
                scores.append(summary["best_score"])
                cell_lines.append(
                    f"{strategy},{budget},{seed},ok,{runio.fmt_real(summary['best_score'])}"
                )
            if scores:
                arr = np.asarray(scores)
                agg_lines.append(
                    f"{strategy},{budget},{len(scores)},"
                    f"{runio.fmt_real(arr.mean())},{runio.fmt_real(arr.std(ddof=0))}"
                )
            else:
                agg_lines.append(f"{strategy},{budget},0,nan,nan")
    runio.atomic_write_text(os.path.join(out_dir, "bench_cells.csv"), "\n".join(cell_lines) + "\n")
    runio.atomic_write_text(os.path.join(out_dir, "bench_aggregate.csv"), "\n".join(agg_lines) + "\n")
    return {"cells": os.path.join(out_dir, "bench_cells.csv"),
            "aggregate": os.path.join(out_dir, "bench_aggregate.csv")}
