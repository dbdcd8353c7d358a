import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import square_trimap
from scenes import brute_force, oracle_alpha, oracle_fitness, pso_scene, ramp_scene
from gradient_weave.imaging import load_gray
from gradient_weave.matting import (
    AlphaMatte, CandidateSet, PsoConfig, SamplePair, baseline_matte_composite, collect_samples,
    correlation_matte, estimate_alpha, matte_composite, pair_fitness, pso_select, save_matte,
    smooth_matte,
)
from gradient_weave.trimap import Label, Trimap

colour = st.lists(st.floats(0, 1), min_size=3, max_size=3).map(np.array)


def pair(z, f, b, zp=(0, 0), fp=(0, 0), bp=(0, 0)):
    return SamplePair(0, 0, np.asarray(f, float), np.asarray(b, float), fp, bp, np.asarray(z, float), zp)


# ---------------------------------------------------------------- alpha / fitness

def test_alpha_endpoints_and_midpoint():
    f, b = np.array([0.9, 0.6, 0.2]), np.array([0.1, 0.2, 0.7])
    assert estimate_alpha(pair(f, f, b)) == 1.0
    assert estimate_alpha(pair(b, f, b)) == 0.0
    assert estimate_alpha(pair(0.5 * f + 0.5 * b, f, b)) == pytest.approx(0.5, abs=1e-15)


def test_alpha_degenerate_fallback():
    c = np.array([0.4, 0.4, 0.4])
    assert estimate_alpha(pair(c + 0.1, c, c)) == 1.0
    assert estimate_alpha(pair(c, c + 1e-8, c - 0.2)) == pytest.approx(1.0)


@settings(max_examples=200, deadline=None)
@given(colour, colour, st.floats(0, 1))
def test_alpha_forward_inverse(f, b, a):
    if np.sum((f - b) ** 2) < 1e-6:
        return
    z = a * f + (1 - a) * b
    assert abs(estimate_alpha(pair(z, f, b)) - a) <= 1e-9


@settings(max_examples=100, deadline=None)
@given(colour, colour, colour)
def test_alpha_matches_oracle(z, f, b):
    assert estimate_alpha(pair(z, f, b)) == pytest.approx(oracle_alpha(list(z), list(f), list(b)), abs=1e-12)


def test_fitness_zero_on_segment():
    f, b = np.array([1.0, 0.2, 0.0]), np.array([0.0, 0.4, 1.0])
    assert pair_fitness(pair(0.3 * f + 0.7 * b, f, b, fp=(3, 4)), 10.0, eta=0) == pytest.approx(0, abs=1e-15)
    c = np.array([0.5, 0.5, 0.5])
    assert pair_fitness(pair(c, c, c), 10.0, eta=0) == 0


def test_fitness_table_matches_oracle_on_8x8_scene():
    rng = np.random.default_rng(8)
    img = rng.random((8, 8, 3))
    lab = np.zeros((8, 8), np.uint8)
    lab[:, :3] = Label.FOREGROUND
    lab[:, 3:5] = Label.UNKNOWN
    t = Trimap(lab)
    z = (3, 4)
    cands = collect_samples(img, t, z, max_per_side=16, eps_a=0.0)
    table = brute_force(cands, img[4, 3], z)
    for i in range(len(cands.f_colours)):
        for j in range(len(cands.b_colours)):
            p = SamplePair(i, j, cands.f_colours[i], cands.b_colours[j],
                           tuple(cands.f_positions[i]), tuple(cands.b_positions[j]), img[4, 3], z)
            assert pair_fitness(p, cands.diagonal) == pytest.approx(table[i, j], abs=1e-12)


# ----------------------------------------------------------------- candidates

def test_uniform_foreground_collapses_to_one():
    t = square_trimap()
    img = np.zeros((24, 24, 3))
    img[t.foreground] = 0.7
    cands = collect_samples(img, t, (6, 6), eps_a=0.05)
    assert len(cands.f_colours) == 1


def test_no_suppression_gives_nearest(rng):
    t = square_trimap()
    img = rng.random((24, 24, 3))
    cands = collect_samples(img, t, (6, 6), max_per_side=5, eps_a=0.0)
    assert len(cands.f_colours) == len(cands.b_colours) == 5
    fy, fx = np.nonzero(t.foreground)
    d = np.sort(np.hypot(fx - 6, fy - 6))[:5]
    np.testing.assert_allclose(np.hypot(*(cands.f_positions - [6, 6]).T), d)


def test_two_tone_foreground():
    t = square_trimap()
    img = np.zeros((24, 24, 3))
    ys, xs = np.nonzero(t.foreground)
    img[ys, xs] = np.where((xs < 12)[:, None], 0.2, 0.8)
    cands = collect_samples(img, t, (7, 12), eps_a=0.1)
    assert sorted(cands.f_colours[:, 0].tolist()) == [0.2, 0.8]


def test_candidates_respect_suppression_radius(rng):
    t = square_trimap()
    img = rng.random((24, 24, 3))
    cands = collect_samples(img, t, (6, 10), max_per_side=8, eps_a=0.3)
    for side in (cands.f_colours, cands.b_colours):
        assert 1 <= len(side) <= 8
        d = np.linalg.norm(side[:, None] - side[None], axis=-1)
        assert (d[np.triu_indices(len(side), 1)] >= 0.3).all()


def test_collect_requires_unknown_pixel(rng):
    with pytest.raises(ValueError):
        collect_samples(rng.random((24, 24, 3)), square_trimap(), (0, 0))


# ------------------------------------------------------------------------ PSO

def test_pso_config_validation():
    for bad in ({"swarm_size": 0}, {"iterations": 0}, {"inertia": 1.0}, {"social": 0.0}):
        with pytest.raises(ValueError):
            PsoConfig(**bad)


def test_single_pair():
    c = CandidateSet(np.array([[0.5, 0.5, 0.5]]), np.zeros((1, 2)),
                     np.array([[0.1, 0.1, 0.1]]), np.ones((1, 2)), 10.0)
    p = pso_select(c, [0.3, 0.3, 0.3], (0, 0), PsoConfig(swarm_size=3, iterations=2, seed=9))
    assert (p.f_index, p.b_index) == (0, 0)


def test_pso_is_deterministic():
    c, z, zp = pso_scene(5)
    a = pso_select(c, z, zp, PsoConfig(seed=77))
    b = pso_select(c, z, zp, PsoConfig(seed=77))
    assert (a.f_index, a.b_index) == (b.f_index, b.b_index)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 8), st.integers(1, 10))
def test_pso_never_worse_than_first_particle(seed, swarm, iters):
    c, z, zp = pso_scene(seed)
    cfg = PsoConfig(swarm_size=swarm, iterations=iters, seed=seed)
    table = brute_force(c, z, zp)
    # the first particle's start cell is drawn first from the pixel stream
    u0 = np.random.default_rng(seed).random((swarm, 2))[0]
    start = table[int(u0[0] * 16), int(u0[1] * 16)]
    got = pso_select(c, z, zp, cfg)
    assert table[got.f_index, got.b_index] <= start


def test_pso_finds_oracle_optimum_small_sample():
    hits = 0
    for s in range(20):
        c, z, zp = pso_scene(1000 + s)
        table = brute_force(c, z, zp)
        p = pso_select(c, z, zp, PsoConfig(seed=s))
        hits += table[p.f_index, p.b_index] <= table.min()
    assert hits >= 19


# -------------------------------------------------------------- matte passes

def test_correlation_matte_recovers_ramp():
    img, t, truth = ramp_scene(3)
    raw = correlation_matte(img, t, PsoConfig())
    assert np.abs(raw.alpha - truth).max() <= 1e-6
    assert (raw.alpha[t.foreground] == 1).all() and (raw.alpha[t.background] == 0).all()


def test_correlation_matte_independent_of_threads(monkeypatch):
    img, t, _ = ramp_scene(4)
    monkeypatch.setenv("GRADIENT_WEAVE_THREADS", "1")
    one = correlation_matte(img, t, PsoConfig(seed=3)).alpha
    monkeypatch.setenv("GRADIENT_WEAVE_THREADS", "4")
    four = correlation_matte(img, t, PsoConfig(seed=3)).alpha
    assert np.array_equal(one, four)


def test_smooth_radius_zero_is_identity(rng):
    t = square_trimap()
    raw = np.where(t.foreground, 1.0, np.where(t.background, 0.0, rng.random((24, 24))))
    out = smooth_matte(AlphaMatte(raw), rng.random((24, 24, 3)), t, radius=0)
    np.testing.assert_array_equal(out.alpha, raw)


def test_smooth_constant_colour_is_box_mean(rng):
    t = square_trimap()
    raw = np.where(t.foreground, 1.0, np.where(t.background, 0.0, rng.random((24, 24))))
    out = smooth_matte(AlphaMatte(raw), np.full((24, 24, 3), 0.5), t, radius=1)
    y, x = 6, 10
    assert out.alpha[y, x] == pytest.approx(raw[y - 1:y + 2, x - 1:x + 2].mean(), abs=1e-12)


def test_smooth_sharp_kernel_keeps_raw(rng):
    t = square_trimap()
    raw = np.where(t.foreground, 1.0, np.where(t.background, 0.0, rng.random((24, 24))))
    img = rng.random((24, 24, 3))  # neighbours differ from each pixel's colour
    out = smooth_matte(AlphaMatte(raw), img, t, radius=2, sigma_c=1e-4)
    np.testing.assert_allclose(out.alpha[t.unknown], raw[t.unknown], atol=1e-9)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 3), st.floats(0.02, 1.0))
def test_smooth_is_window_convex(seed, radius, sigma):
    rng = np.random.default_rng(seed)
    t = square_trimap()
    raw = np.where(t.foreground, 1.0, np.where(t.background, 0.0, rng.random((24, 24))))
    out = smooth_matte(AlphaMatte(raw), rng.random((24, 24, 3)), t, radius, sigma).alpha
    pad = np.pad(raw, radius, constant_values=np.nan)
    for y, x in zip(*np.nonzero(t.unknown)):
        win = pad[y:y + 2 * radius + 1, x:x + 2 * radius + 1]
        assert np.nanmin(win) - 1e-12 <= out[y, x] <= np.nanmax(win) + 1e-12
    assert (out[t.foreground] == 1).all() and (out[t.background] == 0).all()


def test_matte_composite_examples():
    c, g = np.full((3, 3, 3), 0.2), np.full((3, 3, 3), 0.6)
    np.testing.assert_array_equal(matte_composite(AlphaMatte(np.ones((3, 3))), c, g).data, c)
    np.testing.assert_array_equal(matte_composite(AlphaMatte(np.zeros((3, 3))), c, g).data, g)
    np.testing.assert_allclose(matte_composite(AlphaMatte(np.full((3, 3), 0.5)), c, g).data, 0.4)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_matte_composite_between_layers(seed):
    rng = np.random.default_rng(seed)
    c, g, a = rng.random((4, 4, 3)), rng.random((4, 4, 3)), rng.random((4, 4))
    out = matte_composite(AlphaMatte(a), c, g).data
    assert (out >= np.minimum(c, g) - 1e-12).all() and (out <= np.maximum(c, g) + 1e-12).all()


def test_baseline_matte_composite():
    t = square_trimap()
    c, g = np.ones((24, 24, 3)), np.zeros((24, 24, 3))
    out = baseline_matte_composite(c, g, 0.75, t).data
    assert (out[t.region] == 0.75).all() and (out[t.background] == 0).all()
    np.testing.assert_array_equal(baseline_matte_composite(c, g, 1.0, t).data[t.region], 1.0)
    np.testing.assert_array_equal(baseline_matte_composite(c, g, 0.0, t).data, g)


def test_alpha_matte_range():
    with pytest.raises(ValueError):
        AlphaMatte(np.array([[1.5]]))


def test_save_matte(tmp_path):
    save_matte(AlphaMatte(np.array([[0.0, 0.5], [1.0, 0.25]])), tmp_path / "m.png")
    assert load_gray(tmp_path / "m.png").tolist() == [[0, 128], [255, 64]]
