import numpy as np
import pytest

from regenmc import oracle, zoo
from regenmc.errors import (
    DomainError,
    DriftNotSatisfied,
    StatedRangeWarning,
    UnsupportedTarget,
)


class TestTwoState:
    def test_default_build(self):
        zm = zoo.two_state_example()
        assert zm.model.is_doeblin
        assert zm.model.beta == 0.5
        np.testing.assert_allclose(zm.model.kernel.P, [[0.75, 0.25], [0.25, 0.75]])

    def test_residual_is_identity(self):
        zm = zoo.two_state_example(0.4)
        np.testing.assert_allclose(zm.model.Q, np.eye(2), atol=1e-12)

    def test_beyond_designed_range_warns(self):
        with pytest.warns(StatedRangeWarning):
            zoo.two_state_example(0.7)

    def test_within_range_is_silent(self):
        import warnings

        with warnings.catch_warnings():
            warnings.simplefilter("error")
            zoo.two_state_example(0.5)

    def test_invalid_beta_rejected(self):
        for beta in (0.0, -0.5, 1.01):
            with pytest.raises(DomainError):
                zoo.two_state_example(beta)


class TestIndependenceMH:
    def test_stationary_law_is_target(self):
        zm = zoo.independence_mh()
        target = 0.6 ** np.arange(10)
        target = target / target.sum()
        pi = oracle.stationary(zm.model.kernel)
        np.testing.assert_allclose(pi, target, atol=1e-10)

    def test_detailed_balance(self):
        zm = zoo.independence_mh()
        pi = oracle.stationary(zm.model.kernel)
        P = zm.model.kernel.P
        flux = pi[:, None] * P
        np.testing.assert_allclose(flux, flux.T, atol=1e-12)

    def test_full_space_minorization_at_proposal_ratio(self):
        target = np.array([0.5, 0.3, 0.2])
        proposal = np.array([1.0, 1.0, 1.0])
        zm = zoo.independence_mh(target, proposal)
        assert zm.model.is_doeblin
        assert zm.model.beta == pytest.approx((proposal / 3 / target).min())

    def test_zero_mass_target_rejected(self):
        with pytest.raises(UnsupportedTarget):
            zoo.independence_mh(np.array([0.5, 0.5, 0.0]))

    def test_mismatched_shapes_rejected(self):
        with pytest.raises(UnsupportedTarget):
            zoo.independence_mh(np.array([0.5, 0.5]), np.array([1.0, 1.0, 1.0]))


class TestDriftChain:
    def test_default_build_satisfies_drift(self):
        zm = zoo.drift_chain()
        inputs = oracle.drift_inputs_exact(zm.model, zm.V)
        assert inputs.lambda_hat < 1.0
        assert not zm.model.is_doeblin

    def test_flat_drift_function_rejected(self):
        # V = 1**x is constant, so no contraction is possible anywhere
        with pytest.raises(DriftNotSatisfied):
            zoo.drift_chain(up=0.5, v=1.0)

    def test_contraction_needs_downward_bias(self):
        # up = 0.5, v = 2: lambda_hat = 0.5*2 + 0.5/2 = 1.25 >= 1
        with pytest.raises(DriftNotSatisfied):
            zoo.drift_chain(up=0.5, v=2.0)

    def test_documented_alternative_parameters(self):
        zm = zoo.drift_chain(up=0.3, v=1.3)
        inputs = oracle.drift_inputs_exact(zm.model, zm.V)
        assert inputs.lambda_hat == pytest.approx(0.3 * 1.3 + 0.7 / 1.3, rel=1e-12)

    def test_beta_capped_by_holding_probability(self):
        with pytest.raises(DomainError):
            zoo.drift_chain(up=0.3, beta=0.75)

    def test_size_domain(self):
        with pytest.raises(DomainError):
            zoo.drift_chain(size=2)


class TestByName:
    def test_dispatch(self):
        assert zoo.by_name("two-state", beta=0.4).model.beta == 0.4
        assert zoo.by_name("imh").name == "imh"
        assert zoo.by_name("drift-bd", size=10).model.n_states == 10

    def test_unknown_name_rejected(self):
        with pytest.raises(DomainError, match="two-state, imh, drift-bd"):
            zoo.by_name("nosuch")

    def test_file_models_take_no_parameters(self, three_state_file):
        with pytest.raises(DomainError):
            zoo.by_name(f"file:{three_state_file}", beta=0.5)

    def test_file_model_loads(self, three_state_file):
        zm = zoo.by_name(f"file:{three_state_file}")
        assert zm.model.n_states == 3
        assert not zm.model.is_doeblin
        np.testing.assert_allclose(zm.f, [0.0, 1.0, 2.0])

    def test_file_without_split_spec_rejected(self, tmp_path):
        path = tmp_path / "bare.txt"
        path.write_text("2\n0.9 0.1\n0.2 0.8\n")
        with pytest.raises(DomainError, match="trailer"):
            zoo.by_name(f"file:{path}")

    def test_standard_zoo_contents(self):
        names = [zm.name for zm in zoo.standard_zoo()]
        assert names == ["two-state", "imh", "drift-bd"]
