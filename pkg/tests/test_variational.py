import numpy as np
import pytest

from spincd import (ModelParams, Schedule, SpinSize, TwoLevelFields,
                    alpha_from_fields, build_operators, compare_fields,
                    gauge_matrix, theta_dot, trace_norm_G, variational_alpha)
from spincd.variational import trace_norm_G_gradient


def random_draw(rng):
    return (rng.uniform(0.2, 2.0), rng.uniform(0.0, 1.0),
            rng.uniform(0.0, 2.0), rng.uniform(-3.0, 3.0),
            rng.uniform(-2.0, 2.0))


@pytest.mark.parametrize("n_spins", [2, 3, 4])
def test_trace_formula_matches_brute_force(n_spins, rng):
    ops = build_operators(SpinSize(n_spins))
    for _ in range(20):
        J, h, g, gd, a = random_draw(rng)
        params = ModelParams(coupling=J, field_h=h, n_spins=n_spins)
        G = gauge_matrix(ops, params, g, gd, a)
        brute = float(np.trace(G @ G).real)
        closed = trace_norm_G(params, g, gd, a)
        assert closed == pytest.approx(brute, rel=1e-12, abs=1e-12)


def test_trace_formula_spin_half_reduction(rng):
    # (2S-1) = 0 kills the interaction term: 2(gd - 2ha)^2 + 8 g^2 a^2
    for _ in range(20):
        J, h, g, gd, a = random_draw(rng)
        params = ModelParams(coupling=J, field_h=h, n_spins=1)
        expected = 2.0 * (gd - 2 * h * a) ** 2 + 8.0 * g * g * a * a
        assert trace_norm_G(params, g, gd, a) == pytest.approx(expected,
                                                               rel=1e-13)


def test_trace_formula_alpha_zero():
    params = ModelParams(coupling=1.0, field_h=0.3, n_spins=6)
    s = params.spin
    gd = -1.7
    expected = (4.0 / 3.0) * gd * gd * s * (s + 1) * (2 * s + 1)
    assert trace_norm_G(params, 0.9, gd, 0.0) == pytest.approx(expected,
                                                               rel=1e-14)


def test_minimizer_is_stationary_and_minimal(rng):
    for _ in range(100):
        J, h, g, gd, _ = random_draw(rng)
        params = ModelParams(coupling=J, field_h=max(h, 1e-4),
                             n_spins=int(rng.integers(1, 30)))
        a = variational_alpha(params, g, gd)
        base = trace_norm_G(params, g, gd, a)
        scale = trace_norm_G(params, g, gd, 0.0) + base + 1e-30
        assert abs(trace_norm_G_gradient(params, g, gd, a)) < 1e-8 * scale
        for eps in (1e-4, 1e-2):
            da = eps * max(1.0, abs(a))
            assert trace_norm_G(params, g, gd, a + da) >= base
            assert trace_norm_G(params, g, gd, a - da) >= base


def test_gradient_matches_finite_difference():
    params = ModelParams(coupling=1.3, field_h=0.2, n_spins=7)
    g, gd, a = 0.8, -2.1, 0.37
    eps = 1e-6
    fd = (trace_norm_G(params, g, gd, a + eps)
          - trace_norm_G(params, g, gd, a - eps)) / (2 * eps)
    assert trace_norm_G_gradient(params, g, gd, a) == pytest.approx(fd,
                                                                    rel=1e-7)


def test_alpha_spin_half_reduction_is_exact(rng):
    for _ in range(200):
        h = rng.uniform(1e-6, 2.0)
        g = rng.uniform(0.0, 3.0)
        gd = rng.uniform(-5.0, 5.0)
        J = rng.uniform(0.1, 3.0)
        td = theta_dot(TwoLevelFields(gamma=g, h=h, gamma_dot=gd, h_dot=0.0))
        assert alpha_from_fields(J, h, 0.5, g, gd) == td
        params = ModelParams(coupling=J, field_h=h, n_spins=1)
        assert variational_alpha(params, g, gd) == td


def test_alpha_j_zero_reduction_is_exact(rng):
    for _ in range(200):
        h = rng.uniform(1e-6, 2.0)
        g = rng.uniform(0.0, 3.0)
        gd = rng.uniform(-5.0, 5.0)
        spin = rng.integers(1, 60) / 2.0
        td = theta_dot(TwoLevelFields(gamma=g, h=h, gamma_dot=gd, h_dot=0.0))
        assert alpha_from_fields(0.0, h, spin, g, gd) == td


def test_alpha_spin_one_correction_term():
    # J=1, S=1: correction (2S-1)(2S+3)/20 * (J/S)^2 = 5/20 = 0.25
    params = ModelParams(coupling=1.0, field_h=0.4, n_spins=2)
    g, gd = 0.7, -1.1
    expected = 0.5 * 0.4 * gd / (0.4 ** 2 + g * g + 0.25)
    assert variational_alpha(params, g, gd) == pytest.approx(expected,
                                                             rel=1e-14)


def test_alpha_undefined_when_denominator_vanishes():
    with pytest.raises(ValueError):
        alpha_from_fields(0.0, 0.0, 2.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        alpha_from_fields(1.0, 0.0, 0.5, 0.0, 1.0)
    with pytest.raises(ValueError):
        alpha_from_fields(1.0, 0.1, 0.0, 0.5, 1.0)


def test_compare_fields_headline_regime(headline_params):
    comp = compare_fields(headline_params, Schedule(t_f=1.0), n_points=201)
    assert comp.s.size == 201
    # shared zeros of the two fields at the schedule's stationary points
    for idx in (0, 100, 200):
        assert comp.alpha[idx] == 0.0
        assert comp.theta_dot[idx] == 0.0
        assert np.isnan(comp.ratio[idx])
    # s = 0.25: the variational field is strongly suppressed
    i = 50
    assert abs(comp.alpha[i]) < abs(comp.theta_dot[i])
    assert abs(comp.ratio[i]) < 0.1
    finite = comp.ratio[np.isfinite(comp.ratio)]
    assert finite.size == 198
