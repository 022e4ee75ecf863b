import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from robosnn.errors import InvalidParameterError, NonFiniteInputError
from robosnn.loss import LossKind, LossSpec, loss_grad, loss_profile, loss_value, profile_to_csv

ALL_SPECS = [
    LossSpec.square(),
    LossSpec.absolute(),
    LossSpec.huber(1.0),
    LossSpec.logcosh(),
    LossSpec.robos(a=1.0, lam=1.0, eps=0.01),
    LossSpec.robos(a=4.0, lam=0.3, eps=0.05),
]
ROBOS = LossSpec.robos(a=1.0, lam=1.0, eps=0.01)

# mpmath, 50 digits: lam*(1-(g+1)e^-g) and its derivative at r=1, g = sqrt(1.01) - 0.1
ROBOS_VALUE_AT_1 = 0.22934315524152892417
ROBOS_GRAD_AT_1 = 0.36429299404275131078
TANH_1 = 0.76159415595576488812


def central_difference(spec, r, h=1e-6):
    return (loss_value(spec, r + h) - loss_value(spec, r - h)) / (2 * h)


class TestLossSpec:
    def test_robos_requires_positive_params(self):
        with pytest.raises(InvalidParameterError):
            LossSpec(LossKind.ROBOS, a=-1.0, lam=1.0, eps=0.01)
        with pytest.raises(InvalidParameterError):
            LossSpec(LossKind.ROBOS, a=1.0, lam=0.0, eps=0.01)
        with pytest.raises(InvalidParameterError):
            LossSpec(LossKind.ROBOS, a=1.0, lam=1.0)

    def test_huber_requires_positive_delta(self):
        with pytest.raises(InvalidParameterError):
            LossSpec.huber(0.0)

    def test_irrelevant_params_dropped(self):
        spec = LossSpec("square", a=3.0, delta=2.0)
        assert spec == LossSpec.square()
        assert spec.a is None and spec.delta is None

    @pytest.mark.parametrize("text,kind", [
        ("mse", LossKind.SQUARE), ("MAE", LossKind.ABSOLUTE), ("huber:delta=2", LossKind.HUBER),
        ("logcosh", LossKind.LOGCOSH), ("robos:a=2,lambda=0.5,eps=0.02", LossKind.ROBOS),
    ])
    def test_parse(self, text, kind):
        assert LossSpec.parse(text).kind is kind

    @pytest.mark.parametrize("spec", ALL_SPECS)
    def test_string_roundtrip(self, spec):
        assert LossSpec.parse(spec.to_string()) == spec

    @pytest.mark.parametrize("text", ["quantile", "huber:tau=1", "robos:a=x", "robos:a"])
    def test_parse_rejects(self, text):
        with pytest.raises(InvalidParameterError):
            LossSpec.parse(text)


class TestLossValue:
    def test_robos_origin(self):
        assert loss_value(ROBOS, 0.0) == 0.0

    def test_robos_at_one(self):
        assert loss_value(ROBOS, 1.0) == pytest.approx(ROBOS_VALUE_AT_1, abs=1e-15)

    def test_huber_branches(self):
        assert loss_value(LossSpec.huber(1.0), 0.5) == 0.125
        assert loss_value(LossSpec.huber(1.0), 2.0) == 1.5
        assert loss_value(LossSpec.huber(1.0), -2.0) == 1.5

    def test_simple_kinds(self):
        assert loss_value(LossSpec.square(), 3.0) == 9.0
        assert loss_value(LossSpec.absolute(), -3.0) == 3.0
        assert loss_value(LossSpec.logcosh(), 0.0) == 0.0

    def test_logcosh_matches_direct_formula(self):
        r = np.linspace(-20, 20, 401)
        np.testing.assert_allclose(loss_value(LossSpec.logcosh(), r), np.log(np.cosh(r)), rtol=1e-13, atol=1e-15)

    def test_logcosh_large_residual_no_overflow(self):
        assert loss_value(LossSpec.logcosh(), 1e4) == pytest.approx(1e4 - math.log(2), rel=1e-15)

    def test_robos_small_residual_series_branch(self):
        # g tiny: 1-(g+1)e^-g ~ g^2/2
        spec = LossSpec.robos(a=1.0, lam=1.0, eps=0.01)
        r = 1e-4
        g = (math.sqrt(r * r + 0.01) - 0.1)
        assert loss_value(spec, r) == pytest.approx(g * g / 2 - g ** 3 / 3, rel=1e-9)

    def test_scalar_in_scalar_out(self):
        assert isinstance(loss_value(ROBOS, 1.0), float)
        assert loss_value(ROBOS, np.array([0.0, 1.0])).shape == (2,)

    @pytest.mark.parametrize("bad", [math.nan, math.inf, -math.inf])
    def test_non_finite_rejected(self, bad):
        with pytest.raises(NonFiniteInputError):
            loss_value(ROBOS, bad)
        with pytest.raises(NonFiniteInputError):
            loss_grad(LossSpec.square(), np.array([0.0, bad]))

    def test_robos_extreme_residuals(self):
        vals = loss_value(ROBOS, np.array([1e9, -1e300, 1.7e308]))
        assert np.all(vals < 1.0)
        assert np.all(vals > 0.999)
        grads = loss_grad(ROBOS, np.array([1e9, -1e300, 1.7e308]))
        np.testing.assert_array_equal(grads, 0.0)


class TestLossGrad:
    def test_robos_origin(self):
        for spec in ALL_SPECS:
            if spec.kind is LossKind.ROBOS:
                assert loss_grad(spec, 0.0) == 0.0

    def test_robos_at_one(self):
        assert loss_grad(ROBOS, 1.0) == pytest.approx(ROBOS_GRAD_AT_1, abs=1e-15)
        assert central_difference(ROBOS, 1.0) == pytest.approx(ROBOS_GRAD_AT_1, abs=1e-8)

    def test_logcosh_is_tanh(self):
        assert loss_grad(LossSpec.logcosh(), 1.0) == pytest.approx(TANH_1, abs=1e-15)

    def test_absolute_subgradient_at_zero(self):
        assert loss_grad(LossSpec.absolute(), 0.0) == 0.0

    def test_huber_continuous_at_threshold(self):
        spec = LossSpec.huber(1.5)
        below = loss_grad(spec, 1.5 - 1e-12)
        above = loss_grad(spec, 1.5 + 1e-12)
        assert abs(below - above) < 1e-10

    @pytest.mark.parametrize("spec", ALL_SPECS, ids=str)
    def test_odd(self, spec):
        r = np.random.default_rng(0).normal(scale=3.0, size=200)
        np.testing.assert_allclose(loss_grad(spec, r), -loss_grad(spec, -r), atol=1e-15)


class TestProperties:
    @settings(max_examples=200, deadline=None)
    @given(st.floats(-1e6, 1e6, allow_nan=False), st.sampled_from(ALL_SPECS))
    def test_symmetric(self, r, spec):
        assert loss_value(spec, r) == loss_value(spec, -r)

    @settings(max_examples=200, deadline=None)
    @given(st.floats(-1e6, 1e6, allow_nan=False), st.sampled_from(ALL_SPECS))
    def test_nonnegative(self, r, spec):
        assert loss_value(spec, r) >= 0.0

    @settings(max_examples=200, deadline=None)
    @given(
        st.floats(-1e12, 1e12, allow_nan=False),
        st.floats(0.05, 20.0), st.floats(0.05, 5.0), st.floats(1e-4, 1.0),
    )
    def test_robos_bounded(self, r, a, lam, eps):
        assert 0.0 <= loss_value(LossSpec.robos(a, lam, eps), r) < lam

    @pytest.mark.parametrize("spec", ALL_SPECS, ids=str)
    def test_monotone_in_abs_residual(self, spec):
        u = np.sort(np.random.default_rng(1).exponential(scale=4.0, size=2000))
        vals = loss_value(spec, u * np.random.default_rng(2).choice([-1, 1], size=u.size))
        assert np.all(np.diff(vals) >= 0.0)

    def test_robos_approaches_bound(self):
        spec = LossSpec.robos(a=1.0, lam=0.7, eps=0.01)
        vals = [loss_value(spec, 10.0 ** k) for k in range(1, 9)]
        assert all(v2 >= v1 for v1, v2 in zip(vals, vals[1:]))
        assert all(v < 0.7 for v in vals)
        assert 0.7 - vals[-1] < 1e-12

    def test_robos_not_convex(self):
        r = np.linspace(-10, 10, 401)
        vals = loss_value(ROBOS, r)
        found = False
        for i in range(0, len(r), 7):
            for j in range(i + 2, len(r), 7):
                if (i + j) % 2 == 0:
                    mid = vals[(i + j) // 2]
                    if mid > 0.5 * (vals[i] + vals[j]) + 1e-12:
                        found = True
                        break
            if found:
                break
        assert found

    @pytest.mark.parametrize("spec", ALL_SPECS, ids=str)
    def test_grad_matches_finite_difference(self, spec):
        r = np.random.default_rng(3).uniform(-6, 6, size=1000)
        if spec.kind is LossKind.ABSOLUTE:
            r = r[np.abs(r) > 1e-3]
        if spec.kind is LossKind.HUBER:
            r = r[np.abs(np.abs(r) - spec.delta) > 1e-3]
        g = loss_grad(spec, r)
        fd = central_difference(spec, r)
        assert np.all(np.abs(g - fd) <= 1e-5 * (1 + np.abs(g)))

    def test_robos_lipschitz(self):
        spec = LossSpec.robos(a=3.0, lam=0.5, eps=0.02)
        r = np.linspace(-20, 20, 200_001)
        assert np.max(np.abs(loss_grad(spec, r))) <= spec.lam * spec.a / math.e + 1e-12


class TestProfile:
    def test_square_grid(self):
        assert loss_profile(LossSpec.square(), -1, 1, 3) == [(-1.0, 1.0, -2.0), (0.0, 0.0, 0.0), (1.0, 1.0, 2.0)]

    def test_degenerate_range(self):
        with pytest.raises(InvalidParameterError):
            loss_profile(ROBOS, 0.0, 0.0, 2)

    def test_too_few_points(self):
        with pytest.raises(InvalidParameterError):
            loss_profile(ROBOS, 0.0, 1.0, 1)

    def test_bounded_by_lambda(self):
        rows = loss_profile(LossSpec.robos(a=1.0, lam=0.5, eps=0.01), -50, 50, 1001)
        assert all(v < 0.5 for _, v, _ in rows)

    def test_csv(self):
        text = profile_to_csv(loss_profile(LossSpec.square(), -2, 2, 5), header="hello")
        lines = text.splitlines()
        assert lines[0] == "# hello"
        assert lines[1] == "r,value,grad"
        assert len(lines) == 7
