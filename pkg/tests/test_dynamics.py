import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graphpde.boundary import boundary_residual, fill_boundary
from graphpde.dynamics import (
    BLEW_UP,
    EXTINCT,
    RAN_TO_HORIZON,
    STEP_FAILURE,
    IntegratorConfig,
    ProblemSpec,
    boundary_residuals,
    estimate_blowup_rate,
    fit_blowup_time,
    integrate,
    rhs,
    sample_on_grid,
    write_trajectory,
)
from graphpde.operators import phi_p
from graphpde.presets import U0_TABLE, get_preset, paper_graph
from helpers import random_network


def preset_spec(name):
    pr = get_preset(name)
    return ProblemSpec(pr.network(), pr.p, pr.q, pr.lam, list(pr.u0)), pr


def test_rhs_at_x3(mixed_net):
    spec = ProblemSpec(mixed_net, 1.5, 2.0, 3.0, list(U0_TABLE))
    f = rhs(spec, spec.u0)
    assert f[mixed_net.interior.index("x3")] == pytest.approx(3.8284271, abs=1e-7)


def test_rhs_of_zero(mixed_net):
    spec = ProblemSpec(mixed_net, 1.5, 0.5, 1.0, np.zeros(6))
    np.testing.assert_array_equal(rhs(spec, np.zeros(6)), 0.0)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), p=st.floats(1.1, 4.0), q=st.floats(0.2, 3.0))
def test_neumann_mass_identity(seed, p, q):
    """Sum of the rhs equals the reaction sum up to the boundary flux.

    The flux is ``sum_z B[u](z) / mu(z)``; it vanishes in exact arithmetic
    but not always in floating point when ``p`` is close to 1.
    """
    rng = np.random.default_rng(seed)
    net = random_network(rng, 5, 3, dirichlet_prob=0.0, neumann_prob=1.0)
    u = fill_boundary(net, rng.uniform(0, 2, net.n), p)
    spec = ProblemSpec(net, p, q, 1.3, u)
    S = net.interior_idx
    lhs = rhs(spec, spec.u0).sum()
    reaction = 1.3 * phi_p(spec.u0[S], q + 1.0).sum()
    flux = sum(boundary_residual(net, spec.u0, z, p) / net.mu[z] for z in net.boundary)
    assert lhs == pytest.approx(reaction + flux, rel=1e-10, abs=1e-10)
    if p >= 2:
        assert lhs == pytest.approx(reaction, rel=1e-10, abs=1e-10)


def test_neumann_mass_law_along_trajectory(neumann_net):
    spec = ProblemSpec(neumann_net, 2.5, 1.5, 0.7, [0.3, 1.0, 0.2, 0.7, 0, 0])
    cfg = IntegratorConfig(t_horizon=1.0)
    traj = integrate(spec, cfg)
    S = neumann_net.interior_idx
    for u in traj.states:
        want = 0.7 * np.sum(u[S] ** 1.5)
        assert abs(rhs(spec, u).sum() - want) <= cfg.rel_tol * want


def test_problem_spec_validation(mixed_net):
    with pytest.raises(ValueError, match="p must"):
        ProblemSpec(mixed_net, 1.0, 2.0, 1.0, np.ones(6))
    with pytest.raises(ValueError, match="q must"):
        ProblemSpec(mixed_net, 2.0, 0.0, 1.0, np.ones(6))
    with pytest.raises(ValueError, match="lambda"):
        ProblemSpec(mixed_net, 2.0, 1.0, 0.0, np.ones(6))
    with pytest.raises(ValueError, match="nonnegative"):
        ProblemSpec(mixed_net, 2.0, 1.0, 1.0, -np.ones(6))


def test_problem_spec_recomputes_boundary(mixed_net):
    spec = ProblemSpec(mixed_net, 1.5, 2.0, 3.0, [2, 1, 0, 1, 9, 9])
    assert spec.u0[mixed_net.idx("x5")] == pytest.approx(1.0)
    assert spec.u0[mixed_net.idx("x6")] == pytest.approx(1.0)
    assert np.all(boundary_residuals(spec, spec.u0) <= 1e-12)
    with pytest.raises(ValueError):
        spec.u0[0] = 5.0


def test_integrator_config_validation():
    with pytest.raises(ValueError):
        IntegratorConfig(rel_tol=0)
    with pytest.raises(ValueError, match="dt_min"):
        IntegratorConfig(dt_init=1e-6, dt_min=1e-5)
    with pytest.raises(ValueError):
        IntegratorConfig(snapshot_stride=0)


def test_zero_data_stays_zero(mixed_net):
    spec = ProblemSpec(mixed_net, 1.5, 0.5, 1.0, np.zeros(6))
    traj = integrate(spec, IntegratorConfig(t_horizon=1.0))
    assert traj.outcome.kind == RAN_TO_HORIZON
    assert np.all(traj.states == 0.0)
    assert traj.times[-1] == 1.0


@pytest.mark.parametrize("lam", [0.5, 2.0])
def test_neumann_linear_growth(neumann_net, lam):
    spec = ProblemSpec(neumann_net, 2.5, 1.0, lam, [0.3, 1.0, 0.2, 0.7, 0, 0])
    traj = integrate(spec, IntegratorConfig(t_horizon=1.0))
    S = neumann_net.interior_idx
    got = traj.final[S].sum()
    assert got == pytest.approx(math.exp(lam) * spec.interior_u0.sum(), rel=1e-6)


def test_trajectory_invariants():
    spec, pr = preset_spec("fig6-right")
    traj = integrate(spec, IntegratorConfig(t_horizon=pr.horizon, snapshot_stride=7))
    assert np.all(np.diff(traj.times) > 0)
    assert len(traj.times) == len(traj.states)
    assert traj.times[-1] == pr.horizon
    assert len(traj.step_times) == traj.n_accepted + 1


def test_blowup_outcome_and_fit():
    spec, pr = preset_spec("fig4-left")
    cfg = IntegratorConfig(t_horizon=pr.horizon)
    traj = integrate(spec, cfg)
    assert traj.outcome.kind == BLEW_UP
    S = spec.net.interior_idx
    assert traj.final[S].max() >= cfg.blowup_threshold
    assert traj.times[-1] < traj.outcome.t_est < traj.times[-1] + 1e-6
    rate = estimate_blowup_rate(traj, spec)
    assert rate.theoretical == pytest.approx(1 / 3)
    assert rate.relative_error < 1e-3
    assert rate.lower_ok and rate.upper_ok


def test_extinction_outcome():
    spec, pr = preset_spec("fig8-left")
    cfg = IntegratorConfig(t_horizon=pr.horizon)
    traj = integrate(spec, cfg)
    assert traj.outcome.kind == EXTINCT
    assert np.all(traj.final == 0.0)
    assert traj.outcome.t_est == traj.times[-1]


def test_tiny_data_goes_extinct_not_trivial(mixed_net):
    spec = ProblemSpec(mixed_net, 1.5, 2.0, 0.1, [1e-9, 0, 0, 0, 0, 0])
    traj = integrate(spec, IntegratorConfig(t_horizon=1.0))
    assert traj.outcome.kind == EXTINCT


def test_step_failure(mixed_net):
    spec = ProblemSpec(mixed_net, 1.5, 2.0, 3.0, list(U0_TABLE))
    traj = integrate(spec, IntegratorConfig(t_horizon=2.0, max_steps=5))
    assert traj.outcome.kind == STEP_FAILURE


def test_rate_requires_blowup():
    spec, _ = preset_spec("fig6-right")
    traj = integrate(spec, IntegratorConfig(t_horizon=0.1))
    with pytest.raises(ValueError, match="did not blow up"):
        estimate_blowup_rate(traj, spec)


def test_fit_recovers_exact_profile():
    q, lam, T = 2.5, 1.7, 0.8
    t = T - np.geomspace(1e-1, 1e-7, 200)
    m = (lam * (q - 1) * (T - t)) ** (-1 / (q - 1))
    T_fit, c, idx = fit_blowup_time(t, m, q)
    assert T_fit == pytest.approx(T, abs=1e-9)
    assert math.exp(c) == pytest.approx((1 / (lam * (q - 1))) ** (1 / (q - 1)), rel=1e-6)
    assert m[idx[0]] >= m[-1] / 10
    with pytest.raises(ValueError):
        fit_blowup_time(t, m, 1.0)


def random_spec(rng, p, q, lam=None, n_int=4, n_bnd=2):
    net = random_network(rng, n_int, n_bnd)
    lam = rng.uniform(0.1, 1.0) if lam is None else lam
    return ProblemSpec(net, p, q, lam, rng.uniform(0, 1, net.n))


@settings(max_examples=12, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), p=st.floats(1.2, 3.5), q=st.floats(0.3, 2.0))
def test_nonnegative_and_boundary_maximum(seed, p, q):
    # p < 2 can be stiff for the explicit scheme; the step cap keeps the
    # runtime bounded and the checks apply to whatever was computed
    rng = np.random.default_rng(seed)
    spec = random_spec(rng, p, q)
    traj = integrate(spec, IntegratorConfig(t_horizon=0.5, max_steps=3000))
    net = spec.net
    assert np.all(traj.states >= 0)
    nbrs = net.boundary_neighbors()
    for u in traj.states:
        for k, zi in enumerate(net.boundary_idx):
            assert u[zi] <= u[nbrs[k][0]].max() + 1e-9


def test_step_halving_converges():
    spec, pr = preset_spec("fig6-left")
    a = integrate(spec, IntegratorConfig(t_horizon=pr.horizon, rel_tol=1e-8))
    b = integrate(spec, IntegratorConfig(t_horizon=pr.horizon, rel_tol=5e-9))
    S = spec.net.interior_idx
    la, lb = (float(np.dot(x.final[S], x.final[S])) for x in (a, b))
    assert abs(la - lb) <= 10 * 5e-9 * lb


def test_sample_on_grid_matches_integrate(mixed_net):
    spec = ProblemSpec(mixed_net, 2.5, 1.2, 0.3, [1, 0.5, 0.2, 0.8, 0, 0])
    grid = np.linspace(0, 1, 5)
    times, states, outcome = sample_on_grid(spec, IntegratorConfig(), grid)
    assert outcome.kind == RAN_TO_HORIZON
    np.testing.assert_array_equal(times, grid)
    np.testing.assert_array_equal(states[0], spec.u0)
    full = integrate(spec, IntegratorConfig(t_horizon=1.0))
    np.testing.assert_allclose(states[-1], full.final, rtol=1e-6, atol=1e-9)
    with pytest.raises(ValueError):
        sample_on_grid(spec, IntegratorConfig(), [0.5, 1.0])


def test_write_trajectory(tmp_path):
    spec, _ = preset_spec("fig8-left")
    traj = integrate(spec, IntegratorConfig(t_horizon=60.0, snapshot_stride=50))
    path = tmp_path / "traj.csv"
    write_trajectory(traj, spec, path, extra={"preset": "fig8-left"})
    lines = path.read_text().splitlines()
    assert lines[0] == "t,u_x1,u_x2,u_x3,u_x4,u_x5,u_x6,max_u,l2_sq"
    assert len(lines) == len(traj.times) + 1
    last = [float(v) for v in lines[-1].split(",")]
    assert last[0] == traj.times[-1]
    assert last[-1] == 0.0
    meta = json.loads((tmp_path / "traj.meta.json").read_text())
    assert meta["outcome"] == EXTINCT
    assert meta["t_est"] == traj.outcome.t_est
    assert meta["preset"] == "fig8-left"


def test_paper_graph_relations_hold_along_blowup():
    spec, pr = preset_spec("fig4-left")
    traj = integrate(spec, IntegratorConfig(t_horizon=pr.horizon))
    net = paper_graph()
    i1, i4, i5, i6 = (net.idx(x) for x in ("x1", "x4", "x5", "x6"))
    finite = traj.states[np.isfinite(traj.states).all(axis=1)]
    np.testing.assert_allclose(finite[:, i5], finite[:, i1] / 2, rtol=1e-12)
    np.testing.assert_allclose(finite[:, i6], finite[:, i4], rtol=1e-12)
