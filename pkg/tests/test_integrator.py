import numpy as np
import pytest

from tribubble.exceptions import ConfigError, RadiusUnderflow, StepBudgetExceeded
from tribubble.integrator import (
    IntegratorConfig,
    Propagator,
    TangentFrame,
    step_to,
    step_with_tangents,
)
from tribubble.model import State
from tribubble.params import PhysicalParams, natural_frequency
from tribubble.systems import bubble_system, linear_system

from conftest import CHAOTIC_POINT


def chaotic_state(cfg):
    p = PhysicalParams().with_control(*CHAOTIC_POINT)
    T = natural_frequency(p).period_tau
    return p, T, step_to(p, cfg, State.equilibrium(1e-3), 200 * T)


class TestConfig:
    @pytest.mark.parametrize("kw", [{"rel_tol": 0.0}, {"abs_tol": 0.5}, {"h_max": 0.0},
                                    {"h_init": -1.0}, {"max_steps": 0}])
    def test_invalid(self, kw):
        with pytest.raises(ConfigError):
            IntegratorConfig(**kw)


class TestStepTo:
    def test_exponential_decay(self, cfg):
        y = step_to(linear_system([-1.0]), cfg, np.array([1.0]), 1.0)
        assert y[0] == pytest.approx(np.exp(-1.0), rel=cfg.rel_tol * 10)

    def test_undriven_equilibrium_unchanged(self, cfg):
        p = PhysicalParams(a=0.0)
        s = step_to(p, cfg, State.equilibrium(), 100.0)
        np.testing.assert_allclose(s.to_vector(), State.equilibrium().to_vector(),
                                   rtol=0, atol=cfg.abs_tol)

    def test_lands_exactly_on_target(self, params, cfg):
        T = natural_frequency(params).period_tau
        s = State.equilibrium(1e-3)
        for k in range(1, 6):
            s = step_to(params, cfg, s, k * T)
            assert s.tau == k * T

    def test_rejects_backward_target(self, params, cfg):
        with pytest.raises(ValueError):
            step_to(params, cfg, State((1, 1, 1), (0, 0, 0), 2.0), 1.0)

    def test_self_convergence_on_chaotic_segment(self):
        coarse = IntegratorConfig()
        fine = IntegratorConfig(rel_tol=coarse.rel_tol / 2, abs_tol=coarse.abs_tol / 2)
        p, T, s = chaotic_state(IntegratorConfig())
        a = step_to(p, coarse, s, s.tau + T).to_vector()
        b = step_to(p, fine, s, s.tau + T).to_vector()
        assert np.max(np.abs(a - b)) < 10 * coarse.rel_tol * max(1.0, np.max(np.abs(b)))

    def test_time_reversal(self, cfg):
        p, T, s = chaotic_state(cfg)
        prop = Propagator(bubble_system(p), cfg, s.to_vector(), s.tau)
        prop.advance(s.tau + 0.1 * T)
        prop.advance(s.tau)
        assert np.max(np.abs(prop.y - s.to_vector())) < 1e3 * cfg.abs_tol

    def test_rupture(self, cfg):
        p = PhysicalParams(a=1e8)
        with pytest.raises(RadiusUnderflow) as info:
            step_to(p, cfg, State.equilibrium(), 50.0)
        assert info.value.tau is not None

    def test_step_budget(self, params):
        with pytest.raises(StepBudgetExceeded):
            step_to(params, IntegratorConfig(max_steps=5), State.equilibrium(), 10.0)


class TestTangents:
    def test_zero_tangent_stays_zero(self, params, cfg):
        frame = TangentFrame(np.zeros((6, 1)))
        _, out = step_with_tangents(params, cfg, State.equilibrium(1e-3), frame, 3.0)
        assert np.all(out.vectors == 0.0)

    def test_scaling_by_two(self, cfg):
        p, T, s = chaotic_state(cfg)
        v = np.random.default_rng(3).standard_normal((6, 1))
        _, a = step_with_tangents(p, cfg, s, TangentFrame(v), s.tau + T)
        _, b = step_with_tangents(p, cfg, s, TangentFrame(2 * v), s.tau + T)
        np.testing.assert_array_equal(b.vectors, 2 * a.vectors)

    def test_linearity(self, cfg):
        p, T, s = chaotic_state(cfg)
        g = np.random.default_rng(4)
        v, w = g.standard_normal((6, 1)), g.standard_normal((6, 1))
        alpha, beta = 0.7, -1.9
        _, out = step_with_tangents(p, cfg, s, TangentFrame(np.hstack([v, w, alpha * v + beta * w])),
                                    s.tau + T)
        image = out.vectors
        combo = alpha * image[:, :1] + beta * image[:, 1:2]
        assert np.max(np.abs(image[:, 2:] - combo)) <= 1e-10 * np.max(np.abs(combo))

    def test_linear_field_tangent_decay(self, cfg):
        system = linear_system([-1.0, -2.0])
        _, out = step_with_tangents(system, cfg, np.array([1.0, 1.0]), TangentFrame.identity(2), 3.0)
        norms = np.linalg.norm(out.vectors, axis=0)
        np.testing.assert_allclose(norms, np.exp([-3.0, -6.0]), rtol=10 * cfg.rel_tol)

    def test_frame_orthonormal_after_qr(self):
        frame = TangentFrame(np.random.default_rng(5).standard_normal((6, 6)))
        frame.orthonormalize()
        assert np.max(np.abs(frame.vectors.T @ frame.vectors - np.eye(6))) < 1e-12
