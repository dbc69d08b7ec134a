"""Sampling-rate sweeps and singular-tube CDF tables.

A sweep cell is one ``(rate, trial)`` pair.  Its mask seed is derived from
``(base_seed, rate_index, trial)`` only, so every algorithm in a cell sees
the same mask and the comparison is paired.
"""
import csv
from dataclasses import dataclass, field, replace
import logging
from time import perf_counter

import numpy as np

from .altmin import SolverConfig, complete
from .errors import TubalError
from .metrics import rse
from .sampling import TRACE, project, random_mask
from .talgebra import singular_tube_cdf, tubal_rank
from .tnn import TnnConfig, complete_tnn

log = logging.getLogger(__name__)

ALGOS = ("altmin", "tnn")
COLUMNS = ("rate", "trial", "algo", "rse_final", "iters", "wall_time_s",
           "terminated_by", "status", "mask_seed", "mask_hash")

# Sweeps run Alt-Min for a fixed budget of iterations, stopping early only
# once the observed entries are fit to near the ridge floor.
SWEEP_ALTMIN = {"max_iters": 300, "tol_rse": 1e-9}


def rate_grid(start, stop, step):
    """Inclusive grid ``start, start + step, ..., stop`` rounded to 10 digits."""
    n = int(np.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + i * step, 10) for i in range(n)]


def cell_seed(base_seed, rate_index, trial):
    return int(np.random.SeedSequence([int(base_seed), int(rate_index), int(trial)]).generate_state(1)[0])


@dataclass
class SweepResult:
    rows: list = field(default_factory=list)

    def ok_rows(self, algo=None):
        return [r for r in self.rows if r["status"] == "ok" and (algo is None or r["algo"] == algo)]

    def aggregate(self):
        """Per ``(rate, algo)`` arithmetic means over the successful trials."""
        groups = {}
        for row in self.ok_rows():
            groups.setdefault((row["rate"], row["algo"]), []).append(row)
        out = []
        for (rate, algo), rows in sorted(groups.items()):
            out.append({
                "rate": rate, "trial": "mean", "algo": algo,
                "rse_final": float(np.mean([r["rse_final"] for r in rows])),
                "iters": float(np.mean([r["iters"] for r in rows])),
                "wall_time_s": float(np.mean([r["wall_time_s"] for r in rows])),
                "terminated_by": "", "status": f"n={len(rows)}", "mask_seed": "", "mask_hash": "",
            })
        return out

    def mean_rse(self, algo):
        return {row["rate"]: row["rse_final"] for row in self.aggregate() if row["algo"] == algo}

    def to_csv(self, path, aggregate=False):
        rows = self.rows + (self.aggregate() if aggregate else [])
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(COLUMNS)
            for row in rows:
                writer.writerow([_fmt(row[c]) for c in COLUMNS])


def _fmt(value):
    if isinstance(value, float):
        return repr(float(value))
    return str(value)


def _run(algo, obs, mask, truth, r, altmin_cfg, tnn_cfg):
    if algo == "altmin":
        _, est, rep = complete(obs, mask, replace(altmin_cfg, r=r), truth=truth)
    elif algo == "tnn":
        est, rep = complete_tnn(obs, mask, tnn_cfg, truth=truth)
    else:
        raise ValueError(f"unknown algorithm {algo!r}")
    return est, rep


def sweep(volume, rates, trials, algos=ALGOS, r=None, mode=TRACE, base_seed=0,
          altmin_overrides=None, tnn_overrides=None):
    """Complete ``volume`` from random subsamples at every rate and trial.

    Parameters
    ----------
    volume : ndarray (m, n, k)
        Fully sampled reference.
    rates : sequence of float in (0, 1]
    trials : int
    algos : iterable of {"altmin", "tnn"}
    r : int, optional
        Target tubal rank for Alt-Min; estimated from ``volume`` when omitted.
    altmin_overrides, tnn_overrides : dict, optional
        Field overrides on top of the sweep defaults.

    Solver errors inside a cell mark that row ``failed`` instead of
    aborting the sweep.
    """
    volume = np.asarray(volume, dtype=np.float64)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if r is None:
        r = max(1, tubal_rank(volume)[0])
    altmin_cfg = SolverConfig(r=r, **{**SWEEP_ALTMIN, **(altmin_overrides or {})})
    tnn_cfg = TnnConfig(**(tnn_overrides or {}))
    result = SweepResult()
    for ri, rate in enumerate(rates):
        for trial in range(trials):
            seed = cell_seed(base_seed, ri, trial)
            mask = random_mask(volume.shape, rate, seed, mode)
            obs = project(volume, mask)
            digest = mask.digest()
            for algo in algos:
                row = {"rate": float(rate), "trial": trial, "algo": algo, "mask_seed": seed,
                       "mask_hash": digest}
                start = perf_counter()
                try:
                    est, rep = _run(algo, obs, mask, volume, r, altmin_cfg, tnn_cfg)
                    row.update(rse_final=rse(est, volume), iters=rep.iters_run,
                               terminated_by=rep.terminated_by, status="ok")
                except (TubalError, np.linalg.LinAlgError) as exc:
                    log.warning("cell rate=%s trial=%d algo=%s failed: %s", rate, trial, algo, exc)
                    row.update(rse_final=float("nan"), iters=0, terminated_by="",
                               status=f"failed:{type(exc).__name__}")
                row["wall_time_s"] = perf_counter() - start
                result.rows.append(row)
                log.info("rate %.2f trial %d %s rse %.3e", rate, trial, algo, row["rse_final"])
    return result


def rank_vs_rate_cdf(volume, rates, seed, mode=TRACE, rel_tol=1e-3):
    """Singular-tube CDF and effective tubal rank of the projected volume per rate."""
    volume = np.asarray(volume, dtype=np.float64)
    table = []
    for ri, rate in enumerate(rates):
        mask = random_mask(volume.shape, rate, cell_seed(seed, ri, 0), mode)
        obs = project(volume, mask)
        table.append({
            "rate": float(rate),
            "tubal_rank": tubal_rank(obs, rel_tol)[0],
            "cdf": singular_tube_cdf(obs),
        })
    return table


def write_cdf_table(path, table):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("rate", "tubal_rank", "norm", "cum_fraction"))
        for entry in table:
            for norm, frac in entry["cdf"]:
                writer.writerow((repr(entry["rate"]), entry["tubal_rank"], repr(norm), repr(frac)))
