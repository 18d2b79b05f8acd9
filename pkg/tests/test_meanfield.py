import numpy as np
import pytest

from spincd import (ModelParams, Schedule, SelfConsistencyError, cd_field,
                    limit_mz_h0, limit_theta_dot_h0, mz_dot, solve_mz,
                    trace_meanfield)
from spincd.meanfield import solve_trace_arrays


def bisect_mz(J, h, gamma):
    """Independent solver: scan the un-squared fixed point for all sign
    changes on (0, 1], bisect each bracket, and keep the root minimizing
    the mean-field energy per spin (same selection rule, different
    method)."""

    def f(m):
        b = J * m + h
        return m - b / np.hypot(b, gamma)

    def energy(m):
        return 0.5 * J * m * m - np.hypot(J * m + h, gamma)

    grid = np.linspace(0.0, 1.0, 20001)
    vals = f(grid)
    roots = []
    for i in np.flatnonzero(np.sign(vals[:-1]) != np.sign(vals[1:])):
        lo, hi = grid[i], grid[i + 1]
        for _ in range(100):
            mid = 0.5 * (lo + hi)
            if np.sign(f(mid)) == np.sign(f(lo)):
                lo = mid
            else:
                hi = mid
        roots.append(0.5 * (lo + hi))
    assert roots, "scan found no fixed point"
    return min(roots, key=energy)


def test_solve_mz_pinned_value():
    params = ModelParams(coupling=1.0, field_h=1e-3)
    assert solve_mz(params, 1.0) == pytest.approx(0.1254934278132817,
                                                  rel=1e-12)


def test_solve_mz_against_bisection(rng):
    for _ in range(200):
        J = 1.0
        h = rng.uniform(1e-6, 0.5)
        g = rng.uniform(0.0, 3.0)
        params = ModelParams(coupling=J, field_h=h)
        m = solve_mz(params, g)
        # agreement in m is residual / |f'(m)|; f' can be ~1e-3 near the
        # fold, so the m-space tolerance is looser than the residual one
        assert m == pytest.approx(bisect_mz(J, h, g), abs=1e-9)


def test_solve_mz_limits():
    params = ModelParams(coupling=1.0, field_h=1e-3)
    # Gamma = 0: fully polarized
    assert solve_mz(params, 0.0) == pytest.approx(1.0, abs=1e-12)
    # deep paramagnet: m -> h / (Gamma - J) to leading order
    assert solve_mz(params, 50.0) == pytest.approx(1e-3 / 49.0, rel=1e-3)


def test_solve_mz_residual_property(rng):
    params = ModelParams(coupling=1.0, field_h=0.01)
    g = rng.uniform(0.0, 3.0, 500)
    m = solve_mz(params, g)
    b = params.coupling * m + params.field_h
    resid = np.abs(m - b / np.hypot(b, g))
    assert resid.max() < 1e-10
    assert np.all((m > 0.0) & (m <= 1.0))


def test_solve_mz_array_matches_scalar():
    params = ModelParams(coupling=1.0, field_h=1e-3)
    g = np.array([0.3, 1.0, 1.7])
    arr = solve_mz(params, g)
    assert arr.shape == (3,)
    for gi, mi in zip(g, arr):
        assert solve_mz(params, float(gi)) == mi


def test_mz_dot_pinned_and_finite_difference():
    params = ModelParams(coupling=1.0, field_h=1e-3)
    sched = Schedule(t_f=1.0)
    s = 0.25
    g, gd = sched.gamma(s), sched.gamma_dot(s)
    m = solve_mz(params, g)
    md = mz_dot(params, g, gd, m)
    assert md == pytest.approx(0.03985649126444047, rel=1e-10)
    eps = 1e-6
    fd = (solve_mz(params, sched.gamma(s + eps))
          - solve_mz(params, sched.gamma(s - eps))) / (2 * eps)
    assert md == pytest.approx(fd, rel=1e-6)


def test_mz_dot_singular_denominator_raises():
    # h = 0 at the critical field: the derivative diverges
    params = ModelParams(coupling=1.0, field_h=0.0)
    with pytest.raises(SelfConsistencyError):
        mz_dot(params, 1.0, -1.0, 0.0)


def test_cd_field_pinned_value():
    params = ModelParams(coupling=1.0, field_h=1e-3)
    sched = Schedule(t_f=1.0)
    g, gd = sched.gamma(0.25), sched.gamma_dot(0.25)
    m = solve_mz(params, g)
    td = cd_field(params, g, gd, m, mz_dot(params, g, gd, m))
    assert td == pytest.approx(-0.019928386845801605, rel=1e-10)


def test_cd_field_zero_at_stationary_schedule_points():
    params = ModelParams(coupling=1.0, field_h=1e-3)
    sched = Schedule(t_f=1.0)
    for s in (0.0, 0.5, 1.0):
        g, gd = sched.gamma(s), sched.gamma_dot(s)
        m = solve_mz(params, g)
        assert cd_field(params, g, gd, m, mz_dot(params, g, gd, m)) == 0.0


def test_h_zero_limits():
    g = np.array([0.0, 0.6, 0.99, 1.0, 1.5])
    m = limit_mz_h0(1.0, g)
    np.testing.assert_allclose(m[:3], np.sqrt(1.0 - g[:3] ** 2), rtol=1e-14)
    assert m[3] == 0.0 and m[4] == 0.0
    # solve_mz delegates at h = 0
    params = ModelParams(coupling=1.0, field_h=0.0)
    assert solve_mz(params, 0.6) == pytest.approx(0.8, rel=1e-14)


def test_h_zero_theta_dot_branches():
    # paramagnetic side: no counter-diabatic field
    assert limit_theta_dot_h0(1.0, 1.4, -2.0) == 0.0
    # ferromagnetic side: gd / (2 sqrt(J^2 - g^2))
    assert limit_theta_dot_h0(1.0, 0.6, -1.0) == pytest.approx(
        -1.0 / (2.0 * 0.8), rel=1e-14)
    with pytest.raises(SelfConsistencyError):
        limit_theta_dot_h0(1.0, 1.0, -1.0)
    # the quintic schedule parks dGamma/dt at the critical point
    assert limit_theta_dot_h0(1.0, 1.0, 0.0) == 0.0


def test_trace_meanfield_contract(headline_params):
    sched = Schedule(t_f=1.0)
    points = trace_meanfield(headline_params, sched, n_points=101)
    assert len(points) == 101
    assert points[0].s == 0.0 and points[-1].s == 1.0
    mz = np.array([p.mz for p in points])
    assert np.all(np.diff(mz) >= -1e-12)  # monotone sweep for quintic
    assert max(p.residual for p in points) < 1e-10
    # theta_dot vanishes at the three stationary points of the schedule
    assert points[0].theta_dot == 0.0
    assert points[50].theta_dot == 0.0
    assert points[-1].theta_dot == 0.0


def test_trace_meanfield_rejects_h_zero():
    params = ModelParams(coupling=1.0, field_h=0.0)
    with pytest.raises(SelfConsistencyError):
        trace_meanfield(params, Schedule(t_f=1.0))


def test_trace_coarse_grid_uses_dense_continuity_check(headline_params):
    # a 5-point grid has physical |dm| > 0.2 between neighbors; the
    # continuity check must not mistake that for a branch jump
    s, _, _, mz, _, _, _ = solve_trace_arrays(headline_params,
                                              Schedule(t_f=1.0), 5)
    assert s.size == 5
    assert np.abs(np.diff(mz)).max() > 0.2


def test_model_params_validation():
    with pytest.raises(ValueError):
        ModelParams(coupling=0.0)
    with pytest.raises(ValueError):
        ModelParams(coupling=-1.0)
    with pytest.raises(ValueError):
        ModelParams(field_h=-1e-3)
    with pytest.raises(ValueError):
        ModelParams(n_spins=0)
    with pytest.raises(ValueError):
        ModelParams(n_spins=2.5)
    p = ModelParams(n_spins=8)
    assert p.spin == 4.0 and p.dim == 9
