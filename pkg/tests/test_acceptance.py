"""Acceptance gate: one test per criterion, each recording a PASS/FAIL line."""
import csv
import io
from time import perf_counter

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from oracles import circ_tprod, dense_ls_x, dense_ls_y
from tubal.altmin import SolverConfig, complete, ls_x, ls_y
from tubal.bench import sweep
from tubal.io import read_msk, read_t3b, write_msk, write_t3b
from tubal.metrics import convergence_rate, rse
from tubal.sampling import project, random_element_mask, random_trace_mask
from tubal.synth import SynthConfig, make_low_tubal_rank, synthesize
from tubal.talgebra import fft_tubes, ifft_tubes, t_identity, t_product, t_svd, t_transpose
from tubal.tnn import TnnConfig, complete_tnn


def record(number, title, ok, detail):
    ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] {number}. {title}: {detail}")
    assert ok, detail


@pytest.fixture(scope="module")
def volume():
    return synthesize(SynthConfig(dims=(64, 64, 256), truncate_rank=2))


def run_altmin(volume, seed):
    mask = random_trace_mask(64, 64, 0.4, seed)
    cfg = SolverConfig(r=2, max_iters=15, tol_rse=1e-4, stop_on="truth")
    _, est, rep = complete(project(volume, mask), mask, cfg, truth=volume)
    return rse(est, volume), rep


@pytest.fixture(scope="module")
def first_run(volume):
    return run_altmin(volume, 0)


def test_c1_exact_recovery(volume, first_run):
    start = perf_counter()
    results = [first_run] + [run_altmin(volume, s) for s in range(1, 5)]
    wall = perf_counter() - start + first_run[1].wall_time
    ok = all(err < 1e-4 and rep.iters_run <= 15 for err, rep in results) and wall <= 300
    detail = ", ".join(f"rse {err:.2e}/{rep.iters_run} it" for err, rep in results)
    record(1, "exact recovery 64x64x256 r=2 @40%", ok, f"{detail}; {wall:.1f} s total")


@pytest.fixture(scope="module")
def tnn_run(volume):
    mask = random_trace_mask(64, 64, 0.4, 0)
    z, rep = complete_tnn(project(volume, mask), mask, TnnConfig(tol_rse=1e-4, stop_on="truth"), truth=volume)
    return rse(z, volume), rep


def test_c2_baseline_ordering(first_run, tnn_run):
    err_a, rep_a = first_run
    err_t, rep_t = tnn_run
    ok = err_t < 1e-4 and rep_t.terminated_by == "tol" and rep_t.iters_run > rep_a.iters_run
    record(2, "TNN converges, needs more iterations", ok,
           f"tnn {rep_t.iters_run} it rse {err_t:.2e}, altmin {rep_a.iters_run} it rse {err_a:.2e}")


def test_c3_error_vs_rate():
    vol = synthesize(SynthConfig(dims=(32, 32, 128), truncate_rank=2))
    rates = [round(0.1 * i, 1) for i in range(1, 10)]
    res = sweep(vol, rates, 5, r=2, base_seed=0)
    alt, tnn = res.mean_rse("altmin"), res.mean_rse("tnn")
    a = [alt[r] for r in rates]
    rises = [(x, y) for x, y in zip(a, a[1:]) if y > x]
    monotone = len(rises) <= 1 and all(y <= 2 * x for x, y in rises)
    gap = all(alt[r] * 10 <= tnn[r] for r in rates if r >= 0.5)
    ok = monotone and gap and alt[0.3] <= 1e-2
    detail = " ".join(f"{r:.1f}:{alt[r]:.1e}/{tnn[r]:.1e}" for r in rates)
    record(3, "error-vs-rate sweep (altmin/tnn mean RSE)", ok, detail)


def test_c4_convergence_rate(first_run, tnn_run):
    exact = convergence_rate([1.0, 0.1, 0.01])
    slope_a = convergence_rate(first_run[1].rse_history).slope
    slope_t = convergence_rate(tnn_run[1].rse_history).slope
    ok = abs(exact.slope + 1.0) < 1e-12 and abs(slope_a) > abs(slope_t)
    record(4, "log-RSE slope altmin steeper than TNN", ok,
           f"altmin {slope_a:.3f}, tnn {slope_t:.3f}, geometric {exact.slope:.15f}")


def test_c5_talgebra_oracles():
    rng = np.random.default_rng(5)
    start = perf_counter()
    worst_prod = 0.0
    for _ in range(50):
        a, b, c, k = rng.integers(1, 7, 4)
        x, y = rng.standard_normal((a, b, k)), rng.standard_normal((b, c, k))
        worst_prod = max(worst_prod, np.abs(t_product(x, y) - circ_tprod(x, y)).max())
    worst_svd = 0.0
    for _ in range(20):
        m, n, k = rng.integers(1, 7, 3)
        t = rng.standard_normal((m, n, k))
        res = t_svd(t)
        eye = t_identity(res.rho, k)
        off = res.S.copy()
        off[np.arange(res.rho), np.arange(res.rho), :] = 0
        worst_svd = max(worst_svd,
                        np.linalg.norm(res.compose() - t) / np.linalg.norm(t),
                        np.abs(t_product(t_transpose(res.U), res.U) - eye).max(),
                        np.abs(t_product(t_transpose(res.V), res.V) - eye).max(),
                        np.abs(off).max())
    worst_fft = worst_pars = 0.0
    for _ in range(50):
        t = rng.standard_normal(tuple(rng.integers(1, 7, 3)))
        nt = np.linalg.norm(t)
        worst_fft = max(worst_fft, np.linalg.norm(ifft_tubes(fft_tubes(t)) - t) / nt)
        lhs = np.linalg.norm(fft_tubes(t)) ** 2
        worst_pars = max(worst_pars, abs(lhs - t.shape[2] * nt**2) / lhs)
    wall = perf_counter() - start
    ok = worst_prod <= 1e-10 and worst_svd <= 1e-10 and worst_fft <= 1e-12 and worst_pars <= 1e-12 and wall <= 10
    record(5, "t-algebra oracle suite", ok,
           f"tprod {worst_prod:.1e}, tsvd {worst_svd:.1e}, fft {worst_fft:.1e}, parseval {worst_pars:.1e}, {wall:.2f} s")


def test_c6_least_squares_oracles():
    rng = np.random.default_rng(6)
    worst_ls = worst_path = 0.0
    for trial in range(12):
        m, n = rng.integers(2, 9, 2)
        k = int(rng.integers(1, 5))
        r = int(rng.integers(1, min(m, n) + 1))
        mask = (random_trace_mask(m, n, 0.6, trial) if trial % 2 == 0
                else random_element_mask(m, n, k, 0.6, trial))
        t = project(rng.standard_normal((m, n, k)), mask)
        x, y = rng.standard_normal((m, r, k)), rng.standard_normal((r, n, k))
        lam = 1e-6
        got_y = ifft_tubes(ls_y(fft_tubes(t), mask, fft_tubes(x), lam))
        got_x = ifft_tubes(ls_x(fft_tubes(t), mask, fft_tubes(y), lam))
        ref_y, ref_x = dense_ls_y(t, mask, x, lam), dense_ls_x(t, mask, y, lam)
        worst_ls = max(worst_ls, np.abs(got_y - ref_y).max() / max(1, np.abs(ref_y).max()),
                       np.abs(got_x - ref_x).max() / max(1, np.abs(ref_x).max()))
        if mask.is_trace:
            fast = ls_y(fft_tubes(t), mask, fft_tubes(x), lam, path="trace")
            slow = ls_y(fft_tubes(t), mask, fft_tubes(x), lam, path="general")
            worst_path = max(worst_path, np.abs(fast - slow).max() / max(1, np.abs(fast).max()))
    bad_runs = 0
    for seed in range(20):
        g = np.random.default_rng(seed)
        m, n, k, r = 8, 8, 4, 2
        t = t_product(g.standard_normal((m, r, k)), g.standard_normal((r, n, k))) + 0.01 * g.standard_normal((m, n, k))
        mask = random_trace_mask(m, n, 0.5, seed) if seed % 2 else random_element_mask(m, n, k, 0.5, seed)
        _, _, rep = complete(project(t, mask), mask, SolverConfig(r=r, max_iters=20, tol_rse=1e-12))
        h = rep.objective_history
        bad_runs += any(b > a * (1 + 1e-9) + 1e-14 for a, b in zip(h, h[1:]))
    ok = worst_ls <= 1e-8 and worst_path <= 1e-8 and bad_runs == 0
    record(6, "least-squares oracles", ok,
           f"ls vs dense {worst_ls:.1e}, trace vs general {worst_path:.1e}, non-monotone runs {bad_runs}/20")


def test_c7_rank16_substitute():
    rng = np.random.default_rng(7)
    truth = make_low_tubal_rank(rng.standard_normal((25, 100, 128)), 16)
    mask = random_trace_mask(25, 100, 0.5, 7)
    cfg = SolverConfig(r=16, max_iters=30, tol_rse=1e-5, stop_on="truth")
    _, est, rep = complete(project(truth, mask), mask, cfg, truth=truth)
    err = rse(est, truth)
    ok = err < 1e-5 and rep.iters_run <= 30
    record(7, "rank-16 25x100x128 @50% traces", ok, f"rse {err:.2e} after {rep.iters_run} it")


def _strip_timing(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    drop = rows[0].index("wall_time_s")
    out = io.StringIO()
    csv.writer(out, lineterminator="\n").writerows([c for i, c in enumerate(row) if i != drop] for row in rows)
    return out.getvalue().encode()


def test_c8_persistence(tmp_path):
    rng = np.random.default_rng(8)
    exact = True
    for i in range(10):
        shape = tuple(int(v) for v in rng.integers(1, 12, 3))
        t = rng.standard_normal(shape) * 10.0 ** rng.integers(-300, 300)
        write_t3b(tmp_path / f"{i}.t3b", t, 0.001 * i)
        back, dt = read_t3b(tmp_path / f"{i}.t3b")
        exact &= back.tobytes() == t.tobytes() and dt == 0.001 * i
        mask = random_element_mask(*shape, 0.5, i) if i % 2 else random_trace_mask(shape[0], shape[1], 0.5, i)
        write_msk(tmp_path / f"{i}.msk", mask, shape[2])
        mback, _ = read_msk(tmp_path / f"{i}.msk")
        exact &= mback.kind == mask.kind and np.array_equal(mback.array, mask.array)
    vol = synthesize(SynthConfig(dims=(16, 16, 64), truncate_rank=2))
    blobs = []
    for rep in range(2):
        res = sweep(vol, [0.5, 0.9], 2, r=2, base_seed=3, tnn_overrides={"max_iters": 20})
        res.to_csv(tmp_path / f"sweep{rep}.csv", aggregate=True)
        blobs.append(_strip_timing(tmp_path / f"sweep{rep}.csv"))
    same = blobs[0] == blobs[1]
    record(8, "persistence roundtrip and CSV determinism", exact and same,
           f"10 tensors+masks bit-exact {exact}, CSV identical {same}")
