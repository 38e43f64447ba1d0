"""Command-line front end: simulation, sweeps, thresholds and fits.

Subcommands: simulate, ensemble, velocities, thresholds, phase-diagram,
lifetime-scaling, fit-intermittency.  Every data artifact embeds the
config (and master seed) it was produced from, so any output file can be
re-run bitwise-identically; progress goes to stderr, data to files or
stdout only.

Grid-valued flags (--alpha, --h) accept a single value, a comma list
("2.1,2.2"), or an inclusive range "lo:hi:step".
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import bifurcation, stats
from .engine import (
    InitialCondition,
    classify,
    export_space_time,
    run_ensemble,
    run_field_trajectory,
    run_trajectory,
)
from .params import ModelParams


# --------------------------------------------------------------------------
# plumbing

def parse_grid(text: str) -> list[float]:
    """"2.1" -> [2.1]; "2.1,2.2" -> [2.1, 2.2]; "2.0:2.3:0.1" -> inclusive
    range (endpoint kept when it lands on the grid within 1e-9)."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise argparse.ArgumentTypeError(f"range must be lo:hi:step, got {text!r}")
        lo, hi, step = map(float, parts)
        if step <= 0 or hi < lo:
            raise argparse.ArgumentTypeError(f"bad range {text!r}")
        n = int(math.floor((hi - lo) / step + 1e-9)) + 1
        return [lo + i * step for i in range(n)]
    return [float(v) for v in text.split(",")]


def progress(msg: str) -> None:
    print(msg, file=sys.stderr, flush=True)


def write_csv(path: Path, config: dict, header: list[str], rows) -> None:
    """CSV with a leading '# config: {json}' line, then a header row."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write("# config: " + json.dumps(config, sort_keys=True) + "\n")
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def write_json(path: Path | None, payload: dict) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True)
    if path is None:
        print(text)
    else:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text + "\n")


def read_embedded_config(path: Path) -> dict:
    """Parse the '# config: ...' line of a CSV artifact."""
    with open(path) as fh:
        first = fh.readline()
    if not first.startswith("# config: "):
        raise ValueError(f"{path} has no embedded config line")
    return json.loads(first[len("# config: "):])


def fmt(v: float) -> str:
    return repr(float(v))


# --------------------------------------------------------------------------
# subcommands

def cmd_simulate(args) -> int:
    params = ModelParams(args.alpha_one, args.h_one, args.delta)
    ic = InitialCondition(kind=args.ic_kind, seed=args.seed, n_sites=args.n_sites)
    progress(f"simulate: alpha={params.alpha} h={params.h} max_time={args.max_time}")
    fieldarr, rec = run_field_trajectory(params, ic, args.max_time)
    out = Path(args.out or "space_time.csv")
    out.parent.mkdir(parents=True, exist_ok=True)
    export_space_time(out, fieldarr, params, args.seed)
    label = classify(rec)
    sidecar = {
        "command": "simulate",
        "alpha": params.alpha, "h": params.h, "delta": params.delta,
        "seed": args.seed, "ic_kind": args.ic_kind, "n_sites": args.n_sites,
        "max_time": args.max_time,
        "lifetime": rec.lifetime, "cause": rec.cause,
        "classification": label.label,
    }
    write_json(out.with_suffix(out.suffix + ".config.json"), sidecar)
    progress(f"simulate: lifetime={rec.lifetime} ({rec.cause}), "
             f"classified as {label.label}; wrote {out}")
    return 0


def ensemble_config(args, params: ModelParams) -> dict:
    return {
        "command": "ensemble",
        "alpha": params.alpha, "h": params.h, "delta": params.delta,
        "n": args.n, "max_time": args.max_time, "seed": args.seed,
        "ic_kind": args.ic_kind, "n_sites": args.n_sites,
    }


def cmd_ensemble(args) -> int:
    params = ModelParams(args.alpha_one, args.h_one, args.delta)
    progress(f"ensemble: alpha={params.alpha} h={params.h} n={args.n}")
    res = run_ensemble(params, args.n, args.max_time, master_seed=args.seed,
                       ic_kind=args.ic_kind, n_sites=args.n_sites,
                       threads=args.threads)
    est = stats.mean_lifetime(res.lifetimes, res.censored)
    if args.out:
        rows = [(i, int(res.lifetimes[i]), int(res.censored[i]),
                 ",".join(fmt(a) for a in res.amplitudes[i]))
                for i in range(args.n)]
        write_csv(Path(args.out), ensemble_config(args, params),
                  ["index", "lifetime", "censored", "amplitude"], rows)
        progress(f"ensemble: wrote {args.out}")
    write_json(None, {
        "config": ensemble_config(args, params),
        "mean_lifetime": est.mean, "ci": [est.ci_lo, est.ci_hi],
        "n": est.n, "n_censored": est.n_censored,
    })
    return 0


# defaults of the edge-velocity measurement protocol: a slug seeded from a
# single site, edges regressed over a window late enough to forget the kick
VEL_WINDOW = (300, 2500)
VEL_MAX_TIME = 3000


def measure_vl_curve(alphas, h, delta, n, max_time, window, seed, threads):
    samples = []
    for a in alphas:
        res = run_ensemble(ModelParams(a, h, delta), n, max_time,
                           master_seed=seed, threads=threads,
                           velocity_window=window)
        samples.append(res.v_l)
        progress(f"velocities: v_l alpha={a:.4f} done")
    return stats.aggregate_velocity_curve(alphas, samples)


def measure_vt_curve(hs, alpha, delta, n, max_time, window, seed, threads):
    samples = []
    for h in hs:
        res = run_ensemble(ModelParams(alpha, h, delta), n, max_time,
                           master_seed=seed, threads=threads,
                           velocity_window=window)
        samples.append(res.v_t)
        progress(f"velocities: v_t h={h:.4f} done")
    return stats.aggregate_velocity_curve(hs, samples)


def cmd_velocities(args) -> int:
    sn = bifurcation.find_saddle_node(ModelParams(0.0, 2.1, args.delta))
    alphas = args.alpha if args.alpha is not None else \
        [sn.alpha_sn - da for da in
         (0.30, 0.25, 0.20, 0.15, 0.12, 0.10, 0.08, 0.06, 0.04, 0.02, 0.01)]
    hs = args.h if args.h is not None else parse_grid("2.02:2.30:0.02")
    h_ref = hs[len(hs) // 2]
    alpha_ref = args.vt_alpha
    window = VEL_WINDOW
    out = Path(args.out or "velocities")
    config = {
        "command": "velocities", "delta": args.delta,
        "alpha": list(alphas), "h": list(hs), "vt_alpha": alpha_ref,
        "vl_h": h_ref, "n": args.n, "max_time": args.max_time,
        "window": list(window), "seed": args.seed,
    }
    vl = measure_vl_curve(alphas, h_ref, args.delta, args.n, args.max_time,
                          window, args.seed, args.threads)
    vt = measure_vt_curve(hs, alpha_ref, args.delta, args.n, args.max_time,
                          window, args.seed, args.threads)
    write_csv(out / "leading_velocity.csv", config,
              ["alpha", "v_l", "std", "n_used"],
              [(fmt(a), fmt(v), fmt(s), int(k))
               for a, v, s, k in zip(vl.x, vl.v, vl.std, vl.n_used)])
    write_csv(out / "trailing_velocity.csv", config,
              ["h", "v_t", "std", "n_used"],
              [(fmt(h), fmt(v), fmt(s), int(k))
               for h, v, s, k in zip(vt.x, vt.v, vt.std, vt.n_used)])
    progress(f"velocities: wrote {out}/leading_velocity.csv and "
             f"{out}/trailing_velocity.csv")
    return 0


def cmd_thresholds(args) -> int:
    sn = bifurcation.find_saddle_node(ModelParams(0.0, 2.1, args.delta))
    hs = args.h if args.h is not None else parse_grid("2.0:3.0:0.05")
    alpha_p = bifurcation.alpha_puff_curve(np.array(hs), args.delta)
    config = {"command": "thresholds", "delta": args.delta, "h": list(hs)}
    if args.out:
        write_csv(Path(args.out), config, ["h", "alpha_p"],
                  [(fmt(h), fmt(a)) for h, a in zip(hs, alpha_p)])
        progress(f"thresholds: wrote {args.out}")
    write_json(None, {
        "config": config,
        "alpha_sn": sn.alpha_sn, "x_fixed": sn.x_fixed,
        "alpha_p": {fmt(h): float(a) for h, a in zip(hs, alpha_p)},
    })
    return 0


def _cell_name(alpha: float, h: float) -> str:
    return f"cell_a{alpha:.6g}_h{h:.6g}.json"


def _phase_cell(alpha: float, h: float, args) -> dict:
    params = ModelParams(alpha, h, args.delta)
    res = run_ensemble(params, args.n, args.max_time, master_seed=args.seed,
                       threads=args.threads)
    est = stats.mean_lifetime(res.lifetimes, res.censored)
    tau_s = 1.0 / math.log(h / 2.0) if h > 2.0 else math.inf
    long_frac = float((res.lifetimes > 1e3 * tau_s).mean())
    decay_frac = float((res.lifetimes <= 10.0 * tau_s).mean())
    # width-trend (puff vs slug) label from a few recorded trajectories;
    # the most turbulent outcome wins so a single early decay cannot
    # mislabel a slug cell
    rank = {"decay": 0, "puff": 1, "slug": 2}
    label = "decay"
    for k in range(min(args.n, 5)):
        lab = classify(run_trajectory(
            params, InitialCondition(seed=args.seed + k), args.max_time)).label
        if rank[lab] > rank[label]:
            label = lab
    return {
        "alpha": alpha, "h": h,
        "tau_mean": est.mean, "ci_lo": est.ci_lo, "ci_hi": est.ci_hi,
        "n_censored": est.n_censored, "frac_decay": decay_frac,
        "frac_long_lived": long_frac, "label": label,
    }


def cmd_phase_diagram(args) -> int:
    alphas = args.alpha if args.alpha is not None else parse_grid("0.0:3.0:0.1")
    hs = args.h if args.h is not None else parse_grid("2.02:3.0:0.05")
    out = Path(args.out or "phase_diagram")
    cells_dir = out / "cells"
    cells_dir.mkdir(parents=True, exist_ok=True)
    config = {
        "command": "phase-diagram", "alpha": list(alphas), "h": list(hs),
        "delta": args.delta, "n": args.n, "max_time": args.max_time,
        "seed": args.seed,
    }
    total = len(alphas) * len(hs)
    done = 0
    for h in hs:
        for alpha in alphas:
            done += 1
            cell_path = cells_dir / _cell_name(alpha, h)
            if args.resume and cell_path.exists():
                continue
            cell = _phase_cell(alpha, h, args)
            # flush each cell as it completes so interruption loses at
            # most the cell in flight
            write_json(cell_path, cell)
            progress(f"phase-diagram: cell {done}/{total} "
                     f"(alpha={alpha:.4g}, h={h:.4g}) -> {cell['label']}")
    rows = []
    for h in hs:
        for alpha in alphas:
            cell = json.loads((cells_dir / _cell_name(alpha, h)).read_text())
            rows.append((fmt(alpha), fmt(h), fmt(cell["tau_mean"]),
                         fmt(cell["ci_lo"]), fmt(cell["ci_hi"]),
                         cell["n_censored"], fmt(cell["frac_decay"]),
                         fmt(cell["frac_long_lived"]), cell["label"]))
    write_csv(out / "grid.csv", config,
              ["alpha", "h", "tau_mean", "ci_lo", "ci_hi", "n_censored",
               "frac_decay", "frac_long_lived", "label"], rows)
    overlay_h = np.array([h for h in hs])
    write_csv(out / "alpha_p.csv", config, ["h", "alpha_p"],
              [(fmt(h), fmt(a)) for h, a in
               zip(overlay_h, bifurcation.alpha_puff_curve(overlay_h, args.delta))])
    slice_h = min(hs, key=lambda h: abs(h - args.slice_h))
    slice_rows = [r for r in rows if float(r[1]) == float(slice_h)]
    write_csv(out / "lifetime_slice.csv", {**config, "slice_h": slice_h},
              ["alpha", "h", "tau_mean", "ci_lo", "ci_hi", "n_censored",
               "frac_decay", "frac_long_lived", "label"], slice_rows)
    progress(f"phase-diagram: wrote {out}/grid.csv ({len(rows)} cells), "
             f"alpha_p.csv, lifetime_slice.csv (h={slice_h:g})")
    return 0


def cmd_lifetime_scaling(args) -> int:
    alphas = args.alpha if args.alpha is not None else [0.5, 0.8]
    hs = args.h if args.h is not None else [2.12, 2.14, 2.18, 2.22, 2.26, 2.30]
    out = Path(args.out or "lifetime_scaling")
    fits = {}
    for alpha in alphas:
        rows = []
        tau_s_list, tau_list = [], []
        for h in hs:
            params = ModelParams(alpha, h, args.delta)
            tau_s = 1.0 / math.log(h / 2.0)
            res = run_ensemble(params, args.n, args.max_time,
                               master_seed=args.seed, threads=args.threads)
            fit = stats.fit_exponential_lifetimes(
                res.lifetimes, res.censored,
                min_lifetime=args.tail_multiple * tau_s)
            est = stats.mean_lifetime(res.lifetimes, res.censored)
            rows.append((fmt(h), fmt(tau_s), fmt(fit.mean), fmt(est.mean),
                         fmt(est.ci_lo), fmt(est.ci_hi), fit.n_events,
                         fit.n_censored))
            tau_s_list.append(tau_s)
            tau_list.append(fit.mean)
            progress(f"lifetime-scaling: alpha={alpha} h={h} "
                     f"tau={fit.mean:.1f} ({fit.n_events} events)")
        config = {
            "command": "lifetime-scaling", "alpha": alpha, "h": list(hs),
            "delta": args.delta, "n": args.n, "max_time": args.max_time,
            "seed": args.seed, "tail_multiple": args.tail_multiple,
        }
        write_csv(out / f"lifetimes_alpha{alpha:g}.csv", config,
                  ["h", "tau_s", "tau_tail", "tau_mean", "ci_lo", "ci_hi",
                   "n_events", "n_censored"], rows)
        sf = stats.fit_superexponential(np.array(tau_s_list), np.array(tau_list))
        fits[f"{alpha:g}"] = {"B": sf.B, "C": sf.C, "r_squared": sf.r_squared,
                              "config": config}
    write_json(out / "scaling_fits.json", fits)
    progress(f"lifetime-scaling: wrote {out}")
    return 0


def cmd_fit_intermittency(args) -> int:
    sn = bifurcation.find_saddle_node(ModelParams(0.0, 2.1, args.delta))
    das = args.delta_alpha if args.delta_alpha is not None else \
        [0.01, 0.02, 0.03, 0.05, 0.07, 0.10, 0.13, 0.17, 0.22, 0.26, 0.30]
    alphas = [sn.alpha_sn - da for da in das]
    vl = measure_vl_curve(alphas, args.h_one, args.delta, args.n,
                          args.max_time, VEL_WINDOW, args.seed, args.threads)
    fit, resid = stats.refit_intermittency_constants(np.array(das), vl.v)
    config = {
        "command": "fit-intermittency", "delta": args.delta, "h": args.h_one,
        "delta_alpha": list(das), "n": args.n, "max_time": args.max_time,
        "seed": args.seed,
    }
    write_json(Path(args.out) if args.out else None, {
        "config": config,
        "a": fit.a, "nu_c": fit.nu_c, "A": fit.A, "xi": fit.xi,
        "alpha_sn": sn.alpha_sn,
        "residual": [float(r) for r in resid],
        "v_l": [float(v) for v in vl.v],
    })
    return 0


# --------------------------------------------------------------------------
# argument wiring

def _single(values: list[float] | None, default: float, flag: str) -> float:
    if values is None:
        return default
    if len(values) != 1:
        raise SystemExit(f"{flag} must be a single value for this subcommand")
    return values[0]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ucml", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    def add_common(sp, n_default=100, max_time_default=10000):
        sp.add_argument("--alpha", type=parse_grid, default=None,
                        help="coupling strength (value, list, or lo:hi:step)")
        sp.add_argument("--h", type=parse_grid, default=None,
                        help="tent-map slope (value, list, or lo:hi:step)")
        sp.add_argument("--delta", type=float, default=0.1,
                        help="cutoff offset (default 0.1)")
        sp.add_argument("--n", type=int, default=n_default,
                        help="ensemble size")
        sp.add_argument("--max-time", type=int, default=max_time_default,
                        help="per-trajectory step cap")
        sp.add_argument("--seed", type=int, default=0, help="master seed")
        sp.add_argument("--out", type=str, default=None,
                        help="output file or directory")
        sp.add_argument("--threads", type=int, default=None,
                        help="worker threads (default: UCML_THREADS or CPU count); "
                             "never affects results")
        sp.add_argument("--resume", action="store_true",
                        help="skip cells already present in --out")
        sp.add_argument("--ic-kind", choices=["single-site", "multi-site"],
                        default="single-site")
        sp.add_argument("--n-sites", type=int, default=1)
        return sp

    add_common(sub.add_parser("simulate", help="one trajectory -> space-time CSV")
               ).set_defaults(func=cmd_simulate)
    add_common(sub.add_parser("ensemble", help="lifetime ensemble at one (alpha, h)")
               ).set_defaults(func=cmd_ensemble)
    sp = add_common(sub.add_parser("velocities",
                                   help="leading/trailing edge velocity tables"),
                    n_default=100, max_time_default=VEL_MAX_TIME)
    sp.add_argument("--vt-alpha", type=float, default=2.9,
                    help="coupling used for the trailing-velocity sweep")
    sp.set_defaults(func=cmd_velocities)
    add_common(sub.add_parser("thresholds", help="alpha_sn and alpha_P(h) table")
               ).set_defaults(func=cmd_thresholds)
    sp = add_common(sub.add_parser("phase-diagram",
                                   help="(alpha, h) grid -> lifetime/label table"),
                    n_default=20)
    sp.add_argument("--slice-h", type=float, default=2.1,
                    help="h of the fixed-h lifetime slice artifact")
    sp.set_defaults(func=cmd_phase_diagram)
    sp = add_common(sub.add_parser("lifetime-scaling",
                                   help="ln(tau) vs tau_s tables and fits"),
                    n_default=2000, max_time_default=1000000)
    sp.add_argument("--tail-multiple", type=float, default=10.0,
                    help="established-puff cut: drop lifetimes below this "
                         "multiple of tau_s before the exponential fit")
    sp.set_defaults(func=cmd_lifetime_scaling)
    sp = add_common(sub.add_parser("fit-intermittency",
                                   help="refit leading-velocity constants"),
                    n_default=400, max_time_default=VEL_MAX_TIME)
    sp.add_argument("--delta-alpha", type=parse_grid, default=None,
                    help="distances below alpha_sn to measure v_l at")
    sp.set_defaults(func=cmd_fit_intermittency)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    # subcommands operating at a single (alpha, h) point
    args.alpha_one = _single(args.alpha, 0.5, "--alpha") \
        if args.command in ("simulate", "ensemble") else None
    args.h_one = _single(args.h, 2.1, "--h") \
        if args.command in ("simulate", "ensemble", "fit-intermittency") else None
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
