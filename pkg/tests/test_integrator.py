import numpy as np
import pytest

from dampedbo import (
    BirkhoffState,
    vector_field,
    DivergenceError,
    InvalidInputError,
    RunConfig,
    StiffnessError,
    Trajectory,
    evolve,
    step,
)
from dampedbo import integrator as integrator_mod
from dampedbo.integrator import h_half_norm, sample_times
from oracles import random_state


def one_gap_state(r, N):
    z = np.zeros(N, complex)
    z[0] = -r / np.sqrt(1 - r * r)
    return BirkhoffState(0.0, z)


def test_sample_times():
    assert np.allclose(sample_times(0, 1, 0.25), [0, 0.25, 0.5, 0.75, 1])
    assert np.allclose(sample_times(0, 1, 0.3), [0, 0.3, 0.6, 0.9, 1.0])
    assert np.allclose(sample_times(2, 3, 0.5), [2, 2.5, 3])


def test_tableau_matches_reference_pair():
    from scipy.integrate import RK45

    assert np.array_equal(integrator_mod._C, RK45.C)
    assert np.array_equal(integrator_mod._B, RK45.B)
    assert np.allclose(integrator_mod._E, RK45.E, rtol=0, atol=1e-16)
    assert np.allclose(integrator_mod._P, RK45.P, rtol=0, atol=1e-15)


def test_h_half_norm():
    assert h_half_norm(np.array([1.0, 1.0])) == pytest.approx(np.sqrt(3))


def test_zero_state_stays_zero():
    cfg = RunConfig(alpha=0.5, N=8, t_end=2.0, sample_dt=0.5)
    traj = evolve(BirkhoffState(0, np.zeros(8)), cfg)
    assert np.all(traj.zeta == 0)
    assert np.all(traj.diagnostics["l2_norm_sq"] == 0)


@pytest.mark.parametrize("r", [0.2, 0.5, 0.7])
def test_undamped_one_gap_exact_rotation(r):
    s0 = one_gap_state(r, 8)
    cfg = RunConfig(alpha=0.0, N=8, t_end=5.0, sample_dt=0.25, tol=1e-11)
    traj = evolve(s0, cfg)
    g1 = r * r / (1 - r * r)
    exact = s0.zeta[0] * np.exp(1j * (1 - 2 * g1) * traj.times)
    assert np.max(np.abs(traj.zeta[:, 0] - exact)) < 1e-8
    assert np.max(np.abs(traj.zeta[:, 1:])) == 0


@pytest.mark.parametrize("seed", [2, 3])
def test_undamped_actions_conserved(seed):
    s0 = BirkhoffState(0, random_state(np.random.default_rng(seed), 12))
    cfg = RunConfig(alpha=0.0, N=12, t_end=10.0, sample_dt=0.1, tol=1e-10)
    traj = evolve(s0, cfg)
    assert np.max(np.abs(traj.gamma - traj.gamma[0])) <= 10 * cfg.tol


def test_damped_one_gap_initial_slope():
    # gamma_1' = -alpha gamma_1/(1+gamma_1) holds at t = 0; later gamma_2 is excited
    alpha, r, h = 0.5, 0.5, 1e-3
    s0 = one_gap_state(r, 6)
    g = [step(s0, d, alpha)[0].gamma[0] for d in (h, -h)]
    g1 = s0.gamma[0]
    assert (g[0] - g[1]) / (2 * h) == pytest.approx(-alpha * g1 / (1 + g1), rel=1e-6)
    late = evolve(s0, RunConfig(alpha=alpha, N=6, t_end=4.0, sample_dt=0.5)).gamma[-1]
    assert late[1] > 0


def test_step_is_fifth_order():
    s0 = BirkhoffState(0.1, random_state(np.random.default_rng(5), 6, scale=0.3))
    alpha = 0.6

    def local_error(h):
        coarse, _ = step(s0, h, alpha)
        fine = s0
        for _ in range(64):
            fine, _ = step(fine, h / 64, alpha)
        return np.max(np.abs(coarse.zeta - fine.zeta))

    order = np.log2(local_error(0.08) / local_error(0.04))
    # local error O(h^6)
    assert 5.5 < order < 6.7


def test_two_half_steps_against_one_full_step():
    s0 = BirkhoffState(0.1, random_state(np.random.default_rng(5), 6, scale=0.3))

    def gap(h):
        full, _ = step(s0, h, 0.6)
        half, _ = step(step(s0, h / 2, 0.6)[0], h / 2, 0.6)
        return np.max(np.abs(full.zeta - half.zeta))

    assert np.log2(gap(0.08) / gap(0.04)) > 5


def test_zero_field_step():
    s0 = BirkhoffState(0.3, np.zeros(5))
    new, err = step(s0, 0.1, 0.5)
    assert np.all(new.zeta == 0) and err == 0


def test_small_step_recovers_field():
    s0 = BirkhoffState(0.2, random_state(np.random.default_rng(3), 8))
    F = vector_field(s0, 0.4)

    def slope_error(h):
        new, _ = step(s0, h, 0.4)
        return np.max(np.abs((new.zeta - s0.zeta) / h - F))

    e1, e2 = slope_error(1e-3), slope_error(5e-4)
    assert e2 < e1 and e1 / e2 == pytest.approx(2, rel=0.05)


def test_step_error_estimate_tracks_step():
    s0 = BirkhoffState(0, random_state(np.random.default_rng(6), 10))
    _, e1 = step(s0, 0.05, 0.3)
    _, e2 = step(s0, 0.025, 0.3)
    assert e1 > e2 > 0
    new, _ = step(s0, 0.05, 0.3)
    assert new.t == pytest.approx(0.05)


def test_tolerance_controls_error():
    s0 = BirkhoffState(0, random_state(np.random.default_rng(8), 10))
    base = dict(alpha=0.5, N=10, t_end=2.0, sample_dt=0.1)
    ref = evolve(s0, RunConfig(tol=1e-13, **base)).zeta
    errs = []
    for tol in (1e-6, 1e-8, 1e-10):
        z = evolve(s0, RunConfig(tol=tol, **base)).zeta
        errs.append(np.max(np.abs(z - ref)))
        assert errs[-1] < 100 * tol
    # global error roughly linear in tol: two decades per two decades
    slopes = np.diff(np.log10(errs)) / -2
    assert np.all((slopes > 0.8) & (slopes < 1.2))


def test_dense_output_matches_grid_stops():
    s0 = BirkhoffState(0, random_state(np.random.default_rng(9), 8))
    base = dict(alpha=0.4, N=8, t_end=1.0, tol=1e-11)
    a = evolve(s0, RunConfig(sample_dt=0.1, **base))
    b = evolve(s0, RunConfig(sample_dt=0.02, **base))
    assert np.max(np.abs(a.zeta - b.zeta[::5])) < 1e-9


def test_run_is_deterministic():
    s0 = BirkhoffState(0, random_state(np.random.default_rng(10), 8))
    cfg = RunConfig(alpha=0.3, N=8, t_end=1.0)
    a, b = evolve(s0, cfg), evolve(s0, cfg)
    assert np.array_equal(a.zeta, b.zeta)
    assert a.stats == b.stats


def test_nonzero_start_time():
    s0 = BirkhoffState(0, random_state(np.random.default_rng(11), 6))
    cfg = RunConfig(alpha=0.3, N=6, t_end=1.0, sample_dt=0.5)
    full = evolve(s0, RunConfig(alpha=0.3, N=6, t_end=2.0, sample_dt=0.5))
    rest = evolve(full.state(2), cfg)
    assert rest.times[0] == 1.0 and rest.times[-1] == 2.0
    assert np.max(np.abs(rest.zeta[-1] - full.zeta[-1])) < 1e-9


def test_diagnostic_channels():
    s0 = BirkhoffState(0, random_state(np.random.default_rng(12), 6))
    traj = evolve(s0, RunConfig(alpha=0.3, N=6, t_end=0.5, sample_dt=0.25))
    d = traj.diagnostics
    assert set(d) == {"l2_norm_sq", "mode1_sq", "gap_product_sum", "P_0", "P_1"}
    n = np.arange(1, 7)
    assert np.allclose(d["l2_norm_sq"], 2 * (traj.gamma * n).sum(axis=1))
    assert np.all(np.diff(d["l2_norm_sq"]) <= 0)


def test_csv_and_json_round_trip(tmp_path):
    s0 = BirkhoffState(0, random_state(np.random.default_rng(13), 5))
    cfg = RunConfig(alpha=0.2, N=5, t_end=0.5, sample_dt=0.1)
    traj = evolve(s0, cfg)
    traj.to_csv(tmp_path / "t.csv")
    back = Trajectory.from_csv(tmp_path / "t.csv", cfg)
    assert np.array_equal(back.times, traj.times)
    assert np.array_equal(back.zeta, traj.zeta)
    for k in traj.diagnostics:
        assert np.array_equal(back.diagnostics[k], traj.diagnostics[k])
    header = (tmp_path / "t.csv").read_text().splitlines()[0].split(",")
    assert header[0] == "t" and header[-2:] == ["re_zeta_5", "im_zeta_5"]
    traj.to_json(tmp_path / "t.json")
    again = Trajectory.from_json(tmp_path / "t.json")
    assert np.array_equal(again.zeta, traj.zeta) and again.config == cfg


def test_rejects_large_initial_state():
    z = np.zeros(4)
    z[0] = 11.0
    with pytest.raises(InvalidInputError):
        evolve(BirkhoffState(0, z), RunConfig(N=4))


def test_step_underflow_raises():
    s0 = BirkhoffState(0, random_state(np.random.default_rng(14), 6))
    with pytest.raises(StiffnessError) as err:
        evolve(s0, RunConfig(alpha=0.5, N=6, t_end=1.0, tol=1e-300))
    assert err.value.last_state is not None


def test_non_finite_field_raises(monkeypatch):
    s0 = BirkhoffState(0, random_state(np.random.default_rng(15), 6))

    def bad(t, z, alpha):
        return np.full_like(z, np.nan)

    monkeypatch.setattr(integrator_mod, "vector_field_gauge", bad)
    with pytest.raises(DivergenceError) as err:
        evolve(s0, RunConfig(alpha=0.5, N=6, t_end=1.0))
    assert np.allclose(err.value.last_state.zeta, s0.zeta)
