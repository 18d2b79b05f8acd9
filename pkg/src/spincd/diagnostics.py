"""Self-contained invariant suite with machine-readable results.

Each check measures a numerical defect against a fixed tolerance and
reports {name, passed, measured, tolerance, detail}.  Failures are
reported, never raised, so a broken build still produces a full report;
the CLI maps overall failure to a nonzero exit code.
"""

from __future__ import annotations

import numpy as np

from .meanfield import (ModelParams, cd_field, limit_theta_dot_h0, mz_dot,
                        solve_mz, _solve_mz_arrays)
from .schedule import Schedule
from .spin_ops import SpinSize, build_operators
from .twolevel import TwoLevelFields, theta_dot
from .variational import gauge_matrix, trace_norm_G, variational_alpha

DEFAULT_SEED = 20260814


def _check(name, measured, tolerance, detail=""):
    return {
        "name": name,
        "passed": bool(measured < tolerance),
        "measured": float(measured),
        "tolerance": float(tolerance),
        "detail": detail,
    }


def check_commutators(n_spins=(1, 9, 100, 1000)):
    """[S^x, S^y] = i S^z and cyclic permutations.

    The defect is measured relative to S^2, the scale of the operator
    products entering the commutator.
    """
    worst = 0.0
    for n in n_spins:
        ops = build_operators(SpinSize(n))
        scale = ops.size.s ** 2
        for a, b, c in ((ops.sx, ops.sy, ops.sz),
                        (ops.sy, ops.sz, ops.sx),
                        (ops.sz, ops.sx, ops.sy)):
            defect = float(np.abs(a @ b - b @ a - 1j * c).max())
            worst = max(worst, defect / scale)
    return _check("spin_commutators", worst, 1e-12,
                  f"N in {list(n_spins)}, relative to S^2")


def check_casimir(n_spins=(1, 9, 100, 1000)):
    """S^2 = S(S+1) identity in the symmetric sector, relative defect."""
    worst = 0.0
    for n in n_spins:
        ops = build_operators(SpinSize(n))
        s = ops.size.s
        s2 = ops.sx @ ops.sx + ops.sy @ ops.sy + ops.sz @ ops.sz
        target = s * (s + 1.0) * np.eye(ops.size.dim)
        worst = max(worst, float(np.abs(s2 - target).max()) / (s * (s + 1.0)))
    return _check("casimir_identity", worst, 1e-12,
                  f"N in {list(n_spins)}, relative to S(S+1)")


def check_root_residuals(n_draws=10000, seed=DEFAULT_SEED):
    """Fixed-point residual of the quartic solve over random (h, Gamma)."""
    rng = np.random.default_rng(seed)
    h = rng.uniform(1e-6, 0.5, n_draws)
    g = rng.uniform(0.0, 3.0, n_draws)
    worst = 0.0
    bad_branch = 0
    for hi, gi in zip(h, g):
        m, res = _solve_mz_arrays(np.array([gi]), 1.0, hi)
        worst = max(worst, float(res[0]))
        if not 0.0 < m[0] <= 1.0:
            bad_branch += 1
    measured = worst if bad_branch == 0 else np.inf
    return _check("meanfield_root_residual", measured, 1e-10,
                  f"{n_draws} draws, {bad_branch} off-branch roots")


def check_mz_dot_fd(seed=DEFAULT_SEED, n_draws=100):
    """Analytic dm/dt against centered differences along random sweeps."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    used = 0
    while used < n_draws:
        h = rng.uniform(1e-3, 0.3)
        g = rng.uniform(0.05, 2.5)
        gd = rng.uniform(-3.0, 3.0)
        params = ModelParams(coupling=1.0, field_h=h, n_spins=2)
        m = solve_mz(params, g)
        denom = 2 * m**3 + 3 * h * m * m - (1 - h * h - g * g) * m - h
        if abs(denom) < 1e-3:
            continue
        used += 1
        md = mz_dot(params, g, gd, m)
        eps = 1e-6 * max(1.0, g)
        fd = (solve_mz(params, g + eps) - solve_mz(params, g - eps)) \
            / (2 * eps) * gd
        if fd != 0.0:
            worst = max(worst, abs(md - fd) / max(abs(fd), 1e-30))
    return _check("mz_dot_vs_finite_difference", worst, 1e-6,
                  f"{n_draws} draws away from the singular denominator")


def check_trace_formula(seed=DEFAULT_SEED, n_draws=50):
    """Closed-form Tr G^2 against brute-force matrix traces, S in {1, 3/2, 2}."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    worst_s2 = 0.0
    for _ in range(n_draws):
        J = rng.uniform(0.2, 2.0)
        h = rng.uniform(0.0, 1.0)
        g = rng.uniform(0.0, 2.0)
        gd = rng.uniform(-3.0, 3.0)
        a = rng.uniform(-2.0, 2.0)
        for n in (2, 3, 4):
            params = ModelParams(coupling=J, field_h=h, n_spins=n)
            ops = build_operators(SpinSize(n))
            G = gauge_matrix(ops, params, g, gd, a)
            brute = float(np.trace(G @ G).real)
            closed = trace_norm_G(params, g, gd, a)
            rel = abs(brute - closed) / max(abs(brute), 1e-30)
            worst = max(worst, rel)
            if n == 4:
                worst_s2 = max(worst_s2, rel)
    return _check("gauge_trace_formula", worst, 1e-10,
                  f"{n_draws} draws; S=2 worst {worst_s2:.2e}")


def check_exponent_fit():
    """Critical scaling of the h -> +0 field: slope 1/2 past the midpoint."""
    sched = Schedule(t_f=1.0, kind="quintic")
    u = np.logspace(-4, -2, 41)
    s = 0.5 + u
    td = limit_theta_dot_h0(1.0, sched.gamma(s), sched.gamma_dot(s))
    slope = np.polyfit(np.log(u), np.log(np.abs(td)), 1)[0]
    return _check("critical_exponent", abs(slope - 0.5), 0.01,
                  f"fitted slope {slope:.4f} over s - 1/2 in [1e-4, 1e-2]")


def check_variational_crosscheck(n_points=401):
    """Two-level field in the self-consistent effective field equals the
    mean-field counter-diabatic field on a full schedule grid."""
    params = ModelParams()
    sched = Schedule(t_f=1.0, kind="quintic")
    s = np.linspace(0.0, 1.0, n_points)
    g = np.asarray(sched.gamma(s, params.coupling), dtype=float)
    gd = np.asarray(sched.gamma_dot(s, params.coupling), dtype=float)
    m, _ = _solve_mz_arrays(g, params.coupling, params.field_h)
    md = mz_dot(params, g, gd, m)
    td = cd_field(params, g, gd, m, md)
    scale = np.abs(td).max()
    worst = 0.0
    for i in range(n_points):
        f = TwoLevelFields(gamma=g[i], h=params.coupling * m[i] + params.field_h,
                           gamma_dot=gd[i], h_dot=params.coupling * md[i])
        worst = max(worst, abs(theta_dot(f) - td[i]))
    return _check("variational_substitution_identity", worst / scale, 1e-10,
                  f"{n_points}-point grid, relative to max |theta_dot|")


def check_variational_minimizer(seed=DEFAULT_SEED, n_draws=100):
    """alpha* is a stationary minimum of Tr G^2."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_draws):
        params = ModelParams(coupling=rng.uniform(0.2, 2.0),
                             field_h=rng.uniform(1e-4, 1.0),
                             n_spins=int(rng.integers(1, 40)))
        g = rng.uniform(0.0, 2.0)
        gd = rng.uniform(-3.0, 3.0)
        a = variational_alpha(params, g, gd)
        base = trace_norm_G(params, g, gd, a)
        for eps in (1e-4, 1e-2):
            da = eps * max(1.0, abs(a))
            if (trace_norm_G(params, g, gd, a + da) < base
                    or trace_norm_G(params, g, gd, a - da) < base):
                worst = np.inf
    return _check("variational_minimizer", worst, 1.0,
                  f"{n_draws} draws, perturbations 1e-4 and 1e-2")


def run_all(seed=DEFAULT_SEED):
    """Run every check; returns {passed, seed, checks: [...]}.

    A check that raises is reported as failed rather than aborting the
    rest of the suite.
    """
    runners = [
        (check_commutators, {}),
        (check_casimir, {}),
        (check_root_residuals, {"seed": seed}),
        (check_mz_dot_fd, {"seed": seed}),
        (check_trace_formula, {"seed": seed}),
        (check_exponent_fit, {}),
        (check_variational_crosscheck, {}),
        (check_variational_minimizer, {"seed": seed}),
    ]
    checks = []
    for fn, kwargs in runners:
        try:
            checks.append(fn(**kwargs))
        except Exception as exc:  # noqa: BLE001 - report, don't abort
            checks.append(_check(fn.__name__.removeprefix("check_"),
                                 np.inf, 0.0, f"raised {exc!r}"))
    return {
        "passed": all(c["passed"] for c in checks),
        "seed": seed,
        "checks": checks,
    }
