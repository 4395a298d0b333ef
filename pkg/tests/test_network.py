import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pilot_forge.config import SystemConfig, rng_substream
from pilot_forge.network import (
    CellLayout,
    UserDrop,
    build_layout,
    compute_beta,
    distances,
    drop_users,
    sample_small_scale,
)

R = 500.0


def hexagon_vertices(center, R):
    angles = np.deg2rad(30 + 60 * np.arange(6))
    return center + R * np.stack([np.cos(angles), np.sin(angles)], axis=1)


def inside_polygon(p, verts):
    # convex, counter-clockwise: p is inside iff it is left of every edge
    nxt = np.roll(verts, -1, axis=0)
    cross = (nxt[:, 0] - verts[:, 0]) * (p[1] - verts[:, 1]) - (nxt[:, 1] - verts[:, 1]) * (p[0] - verts[:, 0])
    return np.all(cross >= -1e-9)


def test_layout_single_cell():
    lay = build_layout(1, R)
    assert lay.centers.shape == (1, 2)
    np.testing.assert_array_equal(lay.centers[0], [0.0, 0.0])


def test_layout_seven_cells_ring():
    lay = build_layout(7, R)
    np.testing.assert_array_equal(lay.centers[0], [0.0, 0.0])
    d = np.hypot(*lay.centers[1:].T)
    np.testing.assert_allclose(d, 866.0254037844386, rtol=1e-12)
    expected = [(math.sqrt(3) * R * math.cos(math.pi / 3 * k), math.sqrt(3) * R * math.sin(math.pi / 3 * k))
                for k in range(6)]
    np.testing.assert_allclose(lay.centers[1:], expected, atol=1e-9)


def test_layout_four_cells_is_spiral_prefix():
    lay = build_layout(4, R)
    ring1 = build_layout(7, R).centers[1:]
    angles = np.mod(np.arctan2(ring1[:, 1], ring1[:, 0]), 2 * np.pi)
    first_three = ring1[np.argsort(angles)[:3]]
    np.testing.assert_allclose(lay.centers[1:], first_three, atol=1e-9)


def test_layout_nineteen_cells_distinct_and_on_lattice():
    c = build_layout(19, R).centers
    d = np.hypot(*(c[:, None] - c[None]).transpose(2, 0, 1))
    np.fill_diagonal(d, np.inf)
    assert d.min() == pytest.approx(math.sqrt(3) * R)
    # ring 2 sits at 3R or 2*sqrt(3)R from the origin
    r = np.sort(np.hypot(*c[7:].T))
    assert np.allclose(r[:6], 3 * R) and np.allclose(r[6:], 2 * math.sqrt(3) * R)


def test_layout_rejects_bad_input():
    with pytest.raises(ValueError):
        build_layout(0, R)
    with pytest.raises(ValueError):
        build_layout(3, 0.0)


def test_users_inside_serving_hexagon():
    cfg = SystemConfig(L=7, K=8, r_min=0.0)
    lay = build_layout(cfg.L, cfg.R)
    drop = drop_users(lay, cfg, np.random.default_rng(1))
    for j in range(cfg.L):
        verts = hexagon_vertices(lay.centers[j], cfg.R)
        for k in range(cfg.K):
            assert inside_polygon(drop.positions[j, k], verts)


def test_exclusion_radius_over_many_draws():
    cfg = SystemConfig(L=1, K=10_000, r_min=50.0)
    lay = build_layout(1, cfg.R)
    drop = drop_users(lay, cfg, np.random.default_rng(2))
    r = np.hypot(*drop.positions[0].T)
    assert r.min() >= 50.0
    assert r.max() <= cfg.R


def test_positions_cover_hexagon_uniformly():
    # mean of a uniform hexagon is its center; fraction within the inscribed
    # circle is pi*a^2 / (3*sqrt(3)/2 * R^2) with apothem a
    cfg = SystemConfig(L=1, K=20_000, r_min=0.0)
    drop = drop_users(build_layout(1, cfg.R), cfg, np.random.default_rng(3))
    pts = drop.positions[0]
    assert np.all(np.abs(pts.mean(axis=0)) < 5.0)
    a = math.sqrt(3) / 2 * cfg.R
    frac = np.mean(np.hypot(*pts.T) <= a)
    assert frac == pytest.approx(math.pi * a**2 / (1.5 * math.sqrt(3) * cfg.R**2), abs=0.01)


def test_shadowing_std():
    cfg = SystemConfig(L=1, K=100_000, sigma_shadow_db=8.0)
    drop = drop_users(build_layout(1, cfg.R), cfg, np.random.default_rng(4))
    assert drop.shadow_db.shape == (100_000, 1)
    assert abs(drop.shadow_db.std() - 8.0) < 0.2
    assert abs(drop.shadow_db.mean()) < 0.1


def _one_user_drop(pos, shadow_db, L=1):
    return UserDrop(positions=np.array(pos, dtype=float).reshape(L, 1, 2),
                    shadow_db=np.full((L, L), float(shadow_db)))


@pytest.mark.parametrize("r, shadow, expected", [
    (R, 0.0, 1.0),
    (R / 2, 0.0, 8.0),
    (R, 10.0, 10.0),
])
def test_beta_examples(r, shadow, expected):
    cfg = SystemConfig(L=1, K=1)
    lay = build_layout(1, R)
    beta = compute_beta(_one_user_drop([[r, 0.0]], shadow), lay, cfg)
    assert beta.beta[0, 0] == pytest.approx(expected, rel=1e-12)


def test_beta_rejects_colocated_user():
    cfg = SystemConfig(L=1, K=1, r_min=0.0)
    with pytest.raises(ValueError):
        compute_beta(_one_user_drop([[0.0, 0.0]], 0.0), build_layout(1, R), cfg)


def test_beta_doubling_distances_divides_by_eight():
    cfg = SystemConfig(L=3, K=4)
    lay = build_layout(3, R)
    drop = drop_users(lay, cfg, np.random.default_rng(5))
    big_lay = CellLayout(centers=2 * lay.centers, R=R)
    big = UserDrop(positions=2 * drop.positions, shadow_db=drop.shadow_db)
    np.testing.assert_allclose(compute_beta(big, big_lay, cfg).beta,
                               compute_beta(drop, lay, cfg).beta / 8, rtol=1e-12)


def test_beta_equal_at_shared_edge_midpoint():
    lay = build_layout(2, R)
    mid = lay.centers.mean(axis=0)
    drop = UserDrop(positions=np.array([[mid], [lay.centers[1] + [10.0, 0.0]]]),
                    shadow_db=np.zeros((2, 2)))
    beta = compute_beta(drop, lay, SystemConfig(L=2, K=1))
    assert beta.beta[0, 0] == pytest.approx(beta.beta[0, 1], rel=1e-12)


def test_drop_reproducible_from_seed():
    cfg = SystemConfig(L=7, K=8)
    lay = build_layout(cfg.L, cfg.R)
    a = drop_users(lay, cfg, rng_substream(99, [3, 0]))
    b = drop_users(lay, cfg, rng_substream(99, [3, 0]))
    assert a.positions.tobytes() == b.positions.tobytes()
    assert a.shadow_db.tobytes() == b.shadow_db.tobytes()
    c = drop_users(lay, cfg, rng_substream(100, [3, 0]))
    assert not np.array_equal(a.positions, c.positions)


def test_distances_match_direct_computation():
    cfg = SystemConfig(L=4, K=3)
    lay = build_layout(cfg.L, cfg.R)
    drop = drop_users(lay, cfg, np.random.default_rng(6))
    r = distances(drop, lay)
    for j in range(cfg.L):
        for k in range(cfg.K):
            for i in range(cfg.L):
                assert r[j * cfg.K + k, i] == pytest.approx(math.dist(drop.positions[j, k], lay.centers[i]))


def test_small_scale_unit_power_scalar():
    cfg = SystemConfig(L=1, K=1, M=1)
    ss = sample_small_scale(cfg, np.random.default_rng(7), n_users=100_000, method="vectors")
    assert ss.g.shape == (100_000, 1, 1)
    assert np.mean(np.abs(ss.g) ** 2) == pytest.approx(1.0, rel=0.02)
    assert np.var(ss.g.real) == pytest.approx(0.5, rel=0.02)
    assert np.var(ss.g.imag) == pytest.approx(0.5, rel=0.02)
    np.testing.assert_allclose(ss.norm_sq, np.abs(ss.g[..., 0]) ** 2)


def test_small_scale_norm_concentrates_large_m():
    cfg = SystemConfig(L=1, K=1, M=10_000)
    ss = sample_small_scale(cfg, np.random.default_rng(8), n_users=200, method="vectors")
    ratio = ss.norm_sq.ravel() / cfg.M
    assert np.mean((ratio >= 0.95) & (ratio <= 1.05)) >= 0.99


def test_small_scale_links_independent():
    cfg = SystemConfig(L=2, K=1, M=4)
    ss = sample_small_scale(cfg, np.random.default_rng(9), n_users=20_000, method="vectors")
    corr = np.corrcoef(ss.norm_sq[:, 0], ss.norm_sq[:, 1])[0, 1]
    assert abs(corr) < 0.05


def test_gamma_shortcut_matches_vector_moments():
    # ||g||^2 for CN(0, I_M) has mean M and variance M
    cfg = SystemConfig(L=1, K=1, M=16)
    v = sample_small_scale(cfg, np.random.default_rng(10), n_users=40_000, method="vectors").norm_sq
    g = sample_small_scale(cfg, np.random.default_rng(11), n_users=40_000, method="gamma").norm_sq
    for x in (v, g):
        assert x.mean() == pytest.approx(16, rel=0.01)
        assert x.var() == pytest.approx(16, rel=0.05)


def test_auto_method_switches_on_size():
    small = sample_small_scale(SystemConfig(L=2, K=2, M=8), np.random.default_rng(0))
    big = sample_small_scale(SystemConfig(L=7, K=8, M=100_000), np.random.default_rng(0))
    assert small.g is not None and small.norm_sq.shape == (4, 2)
    assert big.g is None and big.norm_sq.shape == (56, 7)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 7), st.integers(1, 8), st.integers(0, 2**32))
def test_beta_positive_finite(L, K, seed):
    cfg = SystemConfig(L=L, K=K)
    lay = build_layout(L, cfg.R)
    beta = compute_beta(drop_users(lay, cfg, np.random.default_rng(seed)), lay, cfg)
    assert beta.beta.shape == (L * K, L)
    assert np.all(np.isfinite(beta.beta)) and np.all(beta.beta > 0)
    own = distances(drop_users(lay, cfg, np.random.default_rng(seed)), lay)[np.arange(L * K), beta.serving]
    assert np.all((own >= cfg.r_min) & (own <= cfg.R))
