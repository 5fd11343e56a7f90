"""Declarative parameter sweeps: config parsing, execution, results, plots.

A config file is flat INI text; each section describes one sweep over a
single varied parameter (noise level, factor density, or rank), run for a
number of repetitions per grid point.  Results land in a tidy CSV (one row
per run) and plots are regenerated from that CSV alone.
"""

from __future__ import annotations

import configparser
import csv
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .cancer import CancerParams
from .capricorn import CapricornParams
from .matrix import sparsity
from .objective import relative_frobenius
from .pipeline import ALGORITHMS, DEFAULT_CYCLES, DEFAULT_OBJECTIVE, factorize
from .svgplot import line_plot_svg
from .synth import NoiseSpec, make_instance

__all__ = [
    "SweepSpec",
    "RESULT_COLUMNS",
    "parse_config",
    "run_experiment",
    "plots_from_results",
    "EXAMPLE_CONFIG",
]

VARY_CHOICES = ("noise_level", "density", "rank", "none")

RESULT_COLUMNS = (
    "sweep",
    "algorithm",
    "objective",
    "vary",
    "value",
    "rep",
    "seed",
    "rows",
    "cols",
    "rank_true",
    "rank_fit",
    "density",
    "noise",
    "level",
    "rel_error",
    "error_bar_half_width",
    "sparsity_b",
    "sparsity_c",
    "wall_time_s",
    "status",
    "message",
)

EXAMPLE_CONFIG = """\
# One section per sweep.  `vary` picks the swept parameter and `values`
# lists its grid; every grid point runs `reps` times with derived seeds.

[flip-noise-capricorn]
rows = 200
cols = 160
rank = 5
density = 0.3
algorithm = capricorn
noise = tropical-flip
vary = noise_level
values = 0 0.1 0.2 0.3 0.4 0.5
reps = 10
seed = 1

[gaussian-noise-cancer]
rows = 200
cols = 160
rank = 5
density = 0.5
algorithm = cancer
noise = gaussian
vary = noise_level
values = 0 0.01 0.02 0.04 0.08
reps = 10
seed = 2

[density-capricorn]
rows = 200
cols = 160
rank = 5
noise = tropical-density
level = 0.1
algorithm = capricorn
vary = density
values = 0.1 0.3 0.5 0.7 0.9
reps = 10
seed = 3

[rank-capricorn]
rows = 200
cols = 160
density = 0.3
noise = tropical-flip
level = 0.1
algorithm = capricorn
vary = rank
values = 2 4 6 8 10
reps = 10
seed = 4
"""


@dataclass(frozen=True)
class SweepSpec:
    """One fully specified sweep: a grid over a single varied parameter."""

    name: str
    rows: int
    cols: int
    rank: int
    density: float
    algorithm: str
    objective: str
    cycles: int
    noise: str
    level: float
    vary: str
    values: tuple
    reps: int
    seed: int
    params: dict = field(default_factory=dict)


def _parse_values(text):
    toks = text.replace(",", " ").split()
    if not toks:
        raise ValueError("empty values list")
    return tuple(float(t) for t in toks)


def parse_config(path):
    """Parse an INI sweep config into a list of SweepSpec."""
    cp = configparser.ConfigParser()
    read = cp.read(path)
    if not read:
        raise ValueError(f"cannot read config file {path}")
    sweeps = []
    for name in cp.sections():
        sec = cp[name]
        algorithm = sec.get("algorithm", "capricorn").strip()
        if algorithm not in ALGORITHMS:
            raise ValueError(f"[{name}] unknown algorithm {algorithm!r}")
        vary = sec.get("vary", "none").strip()
        if vary not in VARY_CHOICES:
            raise ValueError(f"[{name}] unknown vary {vary!r}")
        values = _parse_values(sec.get("values", "0")) if vary != "none" else (0.0,)
        params = {}
        for key in ("bucket_size", "delta", "theta", "tau",
                    "max_degree", "update_fraction"):
            if key in sec:
                params[key] = float(sec[key])
        spec = SweepSpec(
            name=name,
            rows=sec.getint("rows", 200),
            cols=sec.getint("cols", 160),
            rank=sec.getint("rank", 5),
            density=sec.getfloat("density", 0.3),
            algorithm=algorithm,
            objective=sec.get("objective", DEFAULT_OBJECTIVE[algorithm]).strip(),
            cycles=sec.getint("cycles", DEFAULT_CYCLES[algorithm]),
            noise=sec.get("noise", "none").strip(),
            level=sec.getfloat("level", 0.0),
            vary=vary,
            values=values,
            reps=sec.getint("reps", 10),
            seed=sec.getint("seed", 0),
            params=params,
        )
        if spec.reps < 1:
            raise ValueError(f"[{name}] reps must be >= 1")
        sweeps.append(spec)
    return sweeps


def _grid_rows(sweeps):
    """Flat run list in deterministic grid order."""
    runs = []
    for sweep in sweeps:
        for vi, value in enumerate(sweep.values):
            for rep in range(sweep.reps):
                seed = sweep.seed * 1_000_003 + vi * 1_009 + rep
                runs.append((sweep, value, rep, seed))
    return runs


def _apply_vary(sweep, value):
    density = sweep.density
    rank = sweep.rank
    level = sweep.level
    if sweep.vary == "noise_level":
        level = value
    elif sweep.vary == "density":
        density = value
    elif sweep.vary == "rank":
        rank = int(value)
    return density, rank, level


def run_single(sweep, value, rep, seed):
    """Execute one grid point; returns a result row dict (never raises)."""
    density, rank, level = _apply_vary(sweep, value)
    row = {
        "sweep": sweep.name,
        "algorithm": sweep.algorithm,
        "objective": sweep.objective,
        "vary": sweep.vary,
        "value": value,
        "rep": rep,
        "seed": seed,
        "rows": sweep.rows,
        "cols": sweep.cols,
        "rank_true": rank,
        "rank_fit": rank,
        "density": density,
        "noise": sweep.noise,
        "level": level,
        "rel_error": "",
        "error_bar_half_width": "",
        "sparsity_b": "",
        "sparsity_c": "",
        "wall_time_s": "",
        "status": "ok",
        "message": "",
    }
    try:
        noise = None if sweep.noise == "none" else NoiseSpec(sweep.noise, level)
        inst = make_instance(sweep.rows, sweep.cols, rank, density, noise, seed)
        kwargs = {}
        if sweep.algorithm == "capricorn" and sweep.params:
            kwargs["capricorn_params"] = CapricornParams(
                bucket_size=int(sweep.params.get("bucket_size", 3)),
                delta=sweep.params.get("delta", 0.01),
                theta=sweep.params.get("theta", 0.5),
                tau=sweep.params.get("tau", 0.5),
            )
        if sweep.algorithm == "cancer" and sweep.params:
            kwargs["cancer_params"] = CancerParams(
                max_degree=int(sweep.params.get("max_degree", 16)),
                update_fraction=sweep.params.get("update_fraction", 0.1),
            )
        started = time.perf_counter()
        fact, _ = factorize(
            inst.noisy,
            rank,
            algorithm=sweep.algorithm,
            cycles=sweep.cycles,
            objective=sweep.objective,
            seed=seed,
            **kwargs,
        )
        elapsed = time.perf_counter() - started
        row["rel_error"] = f"{relative_frobenius(inst.noisy, fact.reconstruct()):.10g}"
        row["sparsity_b"] = f"{sparsity(fact.B):.10g}"
        row["sparsity_c"] = f"{sparsity(fact.C):.10g}"
        row["wall_time_s"] = f"{elapsed:.4f}"
    except Exception as exc:  # recorded per-row; the sweep carries on
        row["status"] = "failed"
        row["message"] = f"{type(exc).__name__}: {exc}"
    return row


def _run_star(args):
    return run_single(*args)


def run_experiment(config_path, out_dir, jobs=1, quiet=False):
    """Run every sweep in the config; write results.csv and plots.

    Returns the number of failed runs (0 means full success).  Results are
    merged in grid order regardless of completion order.
    """
    import os

    sweeps = parse_config(config_path)
    runs = _grid_rows(sweeps)
    os.makedirs(out_dir, exist_ok=True)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_run_star, runs, chunksize=1))
    else:
        rows = []
        for i, args in enumerate(runs):
            rows.append(run_single(*args))
            if not quiet:
                print(f"[experiment] run {i + 1}/{len(runs)}: "
                      f"{args[0].name} value={args[1]} rep={args[2]}")

    # fill in the error-bar column: half width is 2 * sample std of rel_error
    # within each (sweep, value) cell
    by_cell = {}
    for row in rows:
        if row["status"] == "ok":
            key = (row["sweep"], row["value"])
            by_cell.setdefault(key, []).append(float(row["rel_error"]))
    for row in rows:
        key = (row["sweep"], row["value"])
        vals = by_cell.get(key)
        if row["status"] == "ok" and vals:
            row["error_bar_half_width"] = f"{2.0 * float(np.std(vals, ddof=1)) if len(vals) > 1 else 0.0:.10g}"

    results_path = os.path.join(out_dir, "results.csv")
    with open(results_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=RESULT_COLUMNS)
        writer.writeheader()
        writer.writerows(rows)
    plots_from_results(results_path, out_dir)
    failures = sum(1 for row in rows if row["status"] != "ok")
    if not quiet:
        print(f"[experiment] {len(rows) - failures}/{len(rows)} runs ok; "
              f"results in {results_path}")
    return failures


def plots_from_results(results_path, out_dir):
    """Regenerate per-sweep SVG plots from a results CSV (and nothing else)."""
    import os

    with open(results_path, "r", encoding="utf-8", newline="") as fh:
        rows = [row for row in csv.DictReader(fh)]
    sweeps = []
    for row in rows:
        if row["sweep"] not in sweeps:
            sweeps.append(row["sweep"])
    written = []
    for sweep in sweeps:
        cells = {}
        meta = None
        for row in rows:
            if row["sweep"] != sweep or row["status"] != "ok":
                continue
            meta = row
            cells.setdefault(float(row["value"]), []).append(
                (float(row["rel_error"]),
                 float(row["sparsity_b"]),
                 float(row["sparsity_c"]))
            )
        if not cells or meta is None:
            continue
        xs = sorted(cells)
        err_mean, err_half = [], []
        sp_mean, sp_half = [], []
        for x in xs:
            errs = np.array([c[0] for c in cells[x]])
            sps = np.array([(c[1] + c[2]) / 2 for c in cells[x]])
            err_mean.append(float(errs.mean()))
            err_half.append(2.0 * float(errs.std(ddof=1)) if errs.size > 1 else 0.0)
            sp_mean.append(float(sps.mean()))
            sp_half.append(2.0 * float(sps.std(ddof=1)) if sps.size > 1 else 0.0)
        xlabel = meta["vary"] if meta["vary"] != "none" else "grid point"
        err_path = os.path.join(out_dir, f"{sweep}.svg")
        line_plot_svg(
            err_path,
            xs,
            [(meta["algorithm"], err_mean, err_half)],
            title=f"{sweep}: relative error",
            xlabel=xlabel,
            ylabel="relative Frobenius error",
        )
        sp_path = os.path.join(out_dir, f"{sweep}_sparsity.svg")
        line_plot_svg(
            sp_path,
            xs,
            [(meta["algorithm"], sp_mean, sp_half)],
            title=f"{sweep}: factor sparsity",
            xlabel=xlabel,
            ylabel="mean factor sparsity",
        )
        written.extend([err_path, sp_path])
    return written
