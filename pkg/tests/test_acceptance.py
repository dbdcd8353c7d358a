"""Acceptance suite: one test per criterion, each at its stated tolerance.

Every test prints a single PASS/FAIL line (also collected into the pytest
terminal summary). Criterion 10 is informational and never fails the run.
"""

import math
import os
import time

import numpy as np
import pytest

from scenes import ACCEPTANCE_LOG, brute_force, pso_scene, ramp_scene
from gradient_weave.cli import default_probe, main
from gradient_weave.compositor import CompositeConfig, run_pipeline
from gradient_weave.matting import PsoConfig, correlation_matte, pso_select, smooth_matte
from gradient_weave.metrics import mse, rgb_probe
from gradient_weave.mixing import gradient_energy, mixing_weight
from gradient_weave.mvc import clone_region, mean_value_coordinates, point_in_polygon
from gradient_weave.synthetic import SceneSpec, bundled_suite, generate_scene, write_scene
from gradient_weave.trimap import Label, Trimap, propagate_trimap


def report(number, title, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title} | {detail}"
    print(line, flush=True)
    ACCEPTANCE_LOG.append(line)
    return ok


# ------------------------------------------------------------------- 1. MVC

def _star(rng):
    m = int(rng.integers(8, 65))
    gaps = rng.uniform(0.5, 1.5, m)
    theta = np.cumsum(gaps) / gaps.sum() * 2 * np.pi
    rad = rng.uniform(0.3, 1.0, m)
    v = np.stack([rad * np.cos(theta), rad * np.sin(theta)], axis=1)
    e = np.roll(v, -1, axis=0) - v
    safe = (np.abs(v[:, 0] * e[:, 1] - v[:, 1] * e[:, 0]) / np.hypot(*e.T)).min()
    ang = rng.uniform(0, 2 * np.pi)
    p = rng.uniform(0, 0.95) * safe * np.array([math.cos(ang), math.sin(ang)])
    return v, p


def _convex(rng):
    m = int(rng.integers(3, 65))
    theta = np.sort(rng.uniform(0, 2 * np.pi, m))
    v = np.stack([np.cos(theta), np.sin(theta)], axis=1) * rng.uniform(0.5, 2.0)
    w = rng.dirichlet(np.ones(m))
    return v, w @ v  # convex combination: inside or on the hull


def test_c01_mvc_correctness():
    rng = np.random.default_rng(101)
    t0 = time.perf_counter()
    sum_err = 0.0
    for _ in range(1000):
        v, p = _star(rng)
        sum_err = max(sum_err, abs(mean_value_coordinates(p, v).weights.sum() - 1.0))
    lin_err, done = 0.0, 0
    while done < 1000:
        v, p = _convex(rng)
        if not point_in_polygon(p, v):
            continue
        w = mean_value_coordinates(p, v).weights
        lin_err = max(lin_err, float(np.linalg.norm(w @ v - p)))
        done += 1
    secs = time.perf_counter() - t0
    ok = sum_err <= 1e-9 and lin_err <= 1e-6 and secs < 10
    report(1, "MVC partition of unity / linear precision", ok,
           f"max|sum-1|={sum_err:.2e} (<=1e-9), max|sum l v - p|={lin_err:.2e} (<=1e-6), {secs:.2f}s (<10s)")
    assert ok


# ---------------------------------------------------------- 2. seamless clone

def test_c02_seamless_clone_limit():
    h = w = 64
    yy, xx = np.mgrid[:h, :w]
    lab = np.zeros((h, w), np.uint8)
    d = np.hypot(xx - 31.5, yy - 30.0)
    lab[d <= 20] = Label.UNKNOWN
    lab[d <= 15] = Label.FOREGROUND
    t = Trimap(lab)
    out = clone_region(np.full((h, w, 3), 0.2), np.full((h, w, 3), 0.8), t).data
    err = float(np.abs(out[t.region] - 0.8).max())
    ok = err <= 1 / 255
    report(2, "constant 0.2 cloned into 0.8 at k=1", ok, f"max|out-0.8|={err:.2e} (<=1/255)")
    assert ok


# --------------------------------------------------------- 3. alpha recovery

def test_c03_alpha_recovery():
    t0 = time.perf_counter()
    pre = post = 0.0
    for seed in range(50):
        img, t, truth = ramp_scene(seed)
        raw = correlation_matte(img, t, PsoConfig())
        smooth = smooth_matte(raw, img, t, radius=2, sigma_c=0.1)
        u = t.unknown
        pre = max(pre, float(np.abs(raw.alpha - truth)[u].max()))
        post = max(post, float(np.abs(smooth.alpha - truth)[u].max()))
    secs = time.perf_counter() - t0
    ok = pre <= 1e-6 and post <= 0.02 and secs < 60
    report(3, "alpha recovery on 50 exact-mix scenes", ok,
           f"pre={pre:.2e} (<=1e-6), post={post:.4f} (<=0.02), {secs:.1f}s (<60s)")
    assert ok


# -------------------------------------------------------------- 4. PSO oracle

def test_c04_pso_vs_brute_force():
    hits, worst = 0, 0.0
    for seed in range(200):
        cands, z, zp = pso_scene(seed)
        table = brute_force(cands, z, zp)  # oracle over all 256 pairs
        best = table.min()
        pick = pso_select(cands, z, zp, PsoConfig(seed=seed))
        got = table[pick.f_index, pick.b_index]
        if got <= best:
            hits += 1
        else:
            worst = max(worst, (got - best) / best)
    ok = hits >= 190 and worst <= 0.01
    report(4, "PSO matches exhaustive optimum", ok,
           f"{hits}/200 optimal (>=190), worst miss {100 * worst:.3f}% (<=1%)")
    assert ok


# ---------------------------------------------------------- 5. mixing laws

def test_c05_mixing_weight_laws():
    rng = np.random.default_rng(5)
    n = 10_000
    scale = 10.0 ** rng.uniform(-6, 3, (n, 1, 1, 1))
    gs = rng.normal(size=(n, 1, 3, 2)) * scale
    gt = rng.normal(size=(n, 1, 3, 2)) * 10.0 ** rng.uniform(-6, 3, (n, 1, 1, 1))
    gs[:50] = 0.0  # include one-sided zero gradients
    gt[50:100] = 0.0
    ma = mixing_weight(gs, gt).ma
    in_range = bool(((ma >= 0) & (ma <= 1)).all())
    nz = ((gradient_energy(gs) > 0) | (gradient_energy(gt) > 0)).ravel()
    comp = float(np.abs(ma + mixing_weight(gt, gs).ma - 1).ravel()[nz].max())
    # equal norms: a permuted copy of the same gradient has the same energy
    half = float(np.abs(mixing_weight(gs[100:], gs[100:, :, ::-1, ::-1]).ma - 0.5).max())
    s = 10.0 ** rng.uniform(-3, 3, (n, 1, 1, 1))
    inv = float(np.abs(mixing_weight(s * gs, s * gt).ma - ma).max())
    ok = in_range and comp <= 1e-12 and half <= 1e-12 and inv <= 1e-12
    report(5, "Ma range, symmetry, complementarity, scale invariance", ok,
           f"in[0,1]={in_range}, |Ma+Ma'-1|={comp:.1e}, |Ma-0.5|={half:.1e}, scale={inv:.1e} (all <=1e-12)")
    assert ok


# -------------------------------------- shared suite runs (6, 9, probe check)

@pytest.fixture(scope="module")
def suite_runs():
    runs = []
    t0 = time.perf_counter()
    for spec in bundled_suite():
        sc = generate_scene(spec)
        base = run_pipeline(sc.source, sc.target, sc.trimap0, CompositeConfig(mode="baseline"))
        prop = run_pipeline(sc.source, sc.target, sc.trimap0, CompositeConfig(mode="proposed"))
        runs.append((sc, base, prop))
    return runs, time.perf_counter() - t0


def test_c06_headline_comparison(suite_runs):
    runs, secs = suite_runs
    strict, reductions, rows = True, [], []
    for sc, base, prop in runs:
        b = np.mean([mse(f, g) for f, g in zip(base.frames, sc.truth)])
        p = np.mean([mse(f, g) for f, g in zip(prop.frames, sc.truth)])
        strict &= bool(p < b)
        reductions.append((b - p) / b * 100)
        rows.append(f"{b:.1f}->{p:.1f}")
    avg = float(np.mean(reductions))
    ok = strict and avg >= 5.0 and secs < 300
    report(6, "proposed MSE below baseline on all 10 sequences", ok,
           f"every sequence lower={strict}, mean reduction {avg:.1f}% (>=5%), {secs:.0f}s (<300s); "
           + ", ".join(rows))
    assert ok


def test_c07_trimap_propagation_oracle():
    radius = 5
    shifts = [(dx, dy) for dy in range(-radius, radius + 1) for dx in range(-radius, radius + 1)]
    wrong = 0
    t0 = time.perf_counter()
    for trial in range(100):
        for dx, dy in shifts:
            sc = generate_scene(SceneSpec(width=80, height=80, radius=12, band=4, frames=2,
                                          translation=(dx, dy), seed=700 + trial))
            moved, flow = propagate_trimap(sc.trimap0, sc.source[0], sc.source[1], radius)
            if flow.shift != (dx, dy) or not np.array_equal(moved.labels, sc.trimap_at(1).labels):
                wrong += 1
    ok = wrong == 0
    report(7, "trimap propagation recovers known shifts", ok,
           f"{wrong} wrong of {100 * len(shifts)} (100 seeded trials x every shift with |dx|,|dy|<=5), "
           f"{time.perf_counter() - t0:.0f}s")
    assert ok


def test_c08_cli_determinism(tmp_path):
    scene = write_scene(generate_scene(bundled_suite(1)[0]), tmp_path / "scene")
    outs = []
    for name in ("first", "second"):
        out = tmp_path / name
        argv = ["run", "--source-dir", str(scene / "source"), "--target-dir", str(scene / "target"),
                "--trimap", str(scene / "trimap.png"), "--reference-dir", str(scene / "truth"),
                "--output-dir", str(out), "--mode", "both", "--seed", "42", "--timing", "off",
                "--save-mattes"]
        assert main(argv) == 0
        outs.append(out)
    files = sorted(p.relative_to(outs[0]) for p in outs[0].rglob("*") if p.is_file())
    differing = [str(f) for f in files if (outs[0] / f).read_bytes() != (outs[1] / f).read_bytes()]
    same_set = files == sorted(p.relative_to(outs[1]) for p in outs[1].rglob("*") if p.is_file())
    ok = same_set and not differing and len(files) == 2 * 10 * 2 + 2
    report(8, "two --mode both runs are byte-identical", ok,
           f"{len(files)} files compared, {len(differing)} differ")
    assert ok


def test_c09_mode_degeneracy(suite_runs):
    runs, _ = suite_runs
    cfg = CompositeConfig(mode="proposed", force_unit_mixing=True, smooth_radius=0, matting="constant")
    mismatched = 0
    for sc, base, _ in runs:
        prop = run_pipeline(sc.source, sc.target, sc.trimap0, cfg)
        mismatched += sum(not np.array_equal(a.data, b.data) for a, b in zip(base.frames, prop.frames))
    ok = mismatched == 0
    report(9, "degenerate proposed mode equals baseline bit-exactly", ok,
           f"{mismatched} of 100 frames differ")
    assert ok


def test_c10_throughput_informational(monkeypatch):
    monkeypatch.setenv("GRADIENT_WEAVE_THREADS", "1")
    sc = generate_scene(SceneSpec(width=320, height=320, radius=60, band=5, frames=50,
                                  translation=(1, 1), seed=7))
    res = run_pipeline(sc.source, sc.target, sc.trimap0, CompositeConfig(mode="proposed"))
    secs = res.total_seconds
    report(10, "throughput, 50 frames 320x320, one worker (informational)", secs <= 60,
           f"{secs:.1f}s (target <=60s); reference: 9.7 s for 50 frames (hardware-specific)")


def test_probe_saturation_direction(suite_runs):
    """Wherever the baseline probe saturates, the proposed probe should not."""
    runs, _ = suite_runs
    saturated = still = 0
    for sc, base, prop in runs:
        x, y = default_probe(sc.trimap0)
        for fb, fp in zip(base.frames, prop.frames):
            if max(rgb_probe(fb, x, y)) == 255:
                saturated += 1
                still += max(rgb_probe(fp, x, y)) >= 255
    print(f"probe: baseline saturated in {saturated} frames, proposed also saturated in {still}")
    assert saturated > 0 and still == 0
