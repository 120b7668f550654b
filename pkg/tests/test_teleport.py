"""Test the wavefunction teleportation engine and the outcome sweep."""

import math
import os
import sys

import numpy as np
import pytest

# Add the package to the path for testing
sys.path.insert(0, os.path.join(os.path.dirname(__file__), ".."))

from cubictele.core.errors import BranchError, DomainError
from cubictele.core.heisenberg import error_budget, error_x, mean_y1
from cubictele.core.params import GridSet, GridSpec, InputState, ProtocolParams, suggest_grids
from cubictele.core.qstate import (
    Representation,
    input_wavefunction,
    quadrature_moments,
    squeezed_profile,
)
from cubictele.core.teleport import (
    LatticeSpec,
    MeasurementOutcome,
    TeleportEngine,
    default_lattice,
    default_weight,
    postselection_mass,
    resource_momentum,
    resource_state,
    sweep,
)


@pytest.mark.unit
class TestRecords:
    """Test outcome and lattice records."""

    def test_outcome_must_be_finite(self):
        with pytest.raises(DomainError):
            MeasurementOutcome(float("nan"), 0.0)

    def test_lattice_axes(self):
        lattice = LatticeSpec(1.0, 5.0, 5, -2.0, 2.0, 3)
        y1m, yinm = lattice.axes()
        assert list(y1m) == [1.0, 2.0, 3.0, 4.0, 5.0]
        assert list(yinm) == [-2.0, 0.0, 2.0]
        assert LatticeSpec.from_dict(lattice.to_dict()) == lattice

    def test_bad_lattice(self):
        with pytest.raises(DomainError):
            LatticeSpec(5.0, 1.0, 5, -2.0, 2.0, 3)
        with pytest.raises(DomainError):
            LatticeSpec(1.0, 5.0, 0, -2.0, 2.0, 3)

    @pytest.mark.parametrize(
        "data",
        [
            {"y1m": {"min": 1.0, "max": 5.0}, "yinm": {"min": -2.0, "max": 2.0, "n": 3}},
            {"y1m": {"min": 1.0, "max": 5.0, "n": 5}},
            {"y1m": {"min": "low", "max": 5.0, "n": 5}, "yinm": {"min": -2.0, "max": 2.0, "n": 3}},
            {"y1m": [1.0, 5.0, 5], "yinm": {"min": -2.0, "max": 2.0, "n": 3}},
        ],
    )
    def test_malformed_lattice_record(self, data):
        """Test that incomplete or mistyped lattice records raise DomainError."""
        with pytest.raises(DomainError):
            LatticeSpec.from_dict(data)

    def test_default_weight(self, small_params):
        params = default_weight(small_params.with_weight(1.0))
        assert params.g == pytest.approx(6 * 0.1 * 10.0 * math.exp(-0.8))

    def test_default_lattice(self, small_params):
        """Test that the default lattice brackets the mean photocurrent and reaches below zero."""
        lattice = default_lattice(small_params, 32, 16)
        mu = mean_y1(small_params.g, 0.1, 10.0, math.exp(1.6) / 2)
        assert lattice.y1m_min < mu < lattice.y1m_max
        g = small_params.g
        noise = math.sqrt(math.exp(-1.6) / 2 + g * g * (math.exp(-1.6) / 2 + 0.5))
        assert lattice.y1m_min == pytest.approx(-4 * noise)
        assert lattice.yinm_min == pytest.approx(-lattice.yinm_max)
        assert (lattice.n_y1m, lattice.n_yinm) == (32, 16)

    def test_default_lattice_needs_teleport_mode(self):
        with pytest.raises(DomainError):
            default_lattice(ProtocolParams(0.8, 0.1, 10.0, 2.0, 1.0))


@pytest.mark.unit
class TestSweepResult:
    """Test summaries of a hand-built sweep."""

    def test_high_fidelity_mass(self, synthetic_sweep):
        """Test that NaN fidelities count as failures."""
        assert synthetic_sweep.high_fidelity_mass() == pytest.approx(0.55)
        assert synthetic_sweep.high_fidelity_mass(0.4) == pytest.approx(0.975)

    def test_summary(self, synthetic_sweep):
        summary = synthetic_sweep.summary()
        assert summary["P_at_mode"] == pytest.approx(0.1)
        assert summary["modal_outcome"] == {"y1m": 0.0, "yinm": 0.0}
        assert summary["F_at_mode"] is None
        assert summary["low_success"] is False
        assert summary["postselect_stats"] == {"5.0": 0.5}
        assert synthetic_sweep.summary(low_success_mass=0.6)["low_success"] is True

    def test_postselection_mass(self):
        """Test the mass below the threshold on a uniform density."""
        y1m = np.linspace(0.0, 10.0, 11)
        yinm = np.array([0.0, 1.0])
        P = np.full((11, 2), 0.1)
        assert postselection_mass(P, y1m, yinm, 5.0) == pytest.approx(0.5)
        assert postselection_mass(P, y1m, yinm, 2.5) == pytest.approx(0.25)
        assert math.isnan(postselection_mass(P[:1], y1m[:1], yinm, 5.0))

    def test_postselection_mass_truncated_lattice(self):
        """Test that mass beyond the top of the lattice is not counted below the threshold."""
        y1m = np.linspace(0.0, 8.0, 9)
        yinm = np.array([0.0, 1.0])
        P = np.full((9, 2), 0.1)
        assert postselection_mass(P, y1m, yinm, 5.0) == pytest.approx(0.5)
        assert postselection_mass(P, y1m, yinm, -1.0) == 0.0
        assert postselection_mass(P, y1m, yinm, 20.0) == pytest.approx(0.8)


@pytest.mark.unit
class TestResource:
    """Test the displaced cubic-phase resource."""

    def test_momentum_moments(self, small_params, small_grids):
        """Test that the cubic gate leaves |psi(y)| centred at alpha with variance e^{2r}/2."""
        psi = resource_momentum(small_params, small_grids.resource)
        assert psi.rep is Representation.MOMENTUM
        mean, var = quadrature_moments(psi)
        assert mean == pytest.approx(10.0, rel=1e-8)
        assert var == pytest.approx(math.exp(1.6) / 2, rel=1e-6)
        expected = squeezed_profile(psi.axis - 10.0, -0.8)
        assert np.allclose(np.abs(psi.amps), expected, atol=1e-10)

    def test_position_mean(self, small_params, small_grids):
        """Test <x> = 3 gamma (alpha^2 + e^{2r}/2) after the gate."""
        psi = resource_state(small_params, small_grids.resource)
        mean, _ = quadrature_moments(psi)
        assert mean == pytest.approx(3 * 0.1 * (100.0 + math.exp(1.6) / 2), rel=1e-6)


@pytest.mark.unit
class TestEngine:
    """Test conditioned states, outputs and fidelities at the reduced-squeezing point."""

    @pytest.fixture(scope="class")
    def outcomes(self, small_params):
        mu = mean_y1(small_params.g, small_params.gamma, small_params.alpha)
        return [MeasurementOutcome(mu, 0.0), MeasurementOutcome(0.8 * mu, 1.5), MeasurementOutcome(1.2 * mu, -2.0)]

    def test_requires_teleport_mode(self):
        with pytest.raises(DomainError):
            TeleportEngine(ProtocolParams(0.8, 0.1, 10.0, 2.0, 1.0))

    def test_conditioned_state_weight(self, small_engine, outcomes):
        for outcome in outcomes:
            conditioned = small_engine.conditioned_state(outcome)
            assert conditioned.weight > 0
            assert not conditioned.psi.normalized
            assert conditioned.psi.grid.matches(small_engine.output_frame(outcome.y1m))

    def test_window_choice(self, small_engine, outcomes):
        """Test that the spectral and dense kernel paths give the same conditioned state."""
        outcome = outcomes[0]
        frame = small_engine.output_frame(outcome.y1m)
        # interior nodes of the frame, so the window no longer matches it
        trim = 32 * frame.spacing
        window = GridSpec(frame.min + trim, frame.max - trim, frame.n - 64)
        spectral = small_engine.conditioned_state(outcome)
        dense = small_engine.conditioned_state(outcome, window=window)
        reference = spectral.psi.amps[32:-32]
        assert np.allclose(dense.psi.amps, reference, atol=1e-7 * np.max(np.abs(reference)))

    def test_output_state(self, small_engine, outcomes):
        """Test that the output lives on the input grid and is normalized."""
        psi = small_engine.output_state(outcomes[0])
        assert psi.grid.matches(small_engine.grids.input)
        assert psi.normalized
        assert psi.norm() == pytest.approx(1.0)
        assert 0.0 <= small_engine.fidelity(outcomes[0]) <= 1.0

    def test_fidelity_near_mean(self, small_engine, outcomes):
        """Test that typical outcomes teleport the vacuum with high fidelity."""
        assert small_engine.fidelity(outcomes[0]) > 0.9

    def test_grid_convergence(self, small_params, small_grids, small_engine, outcomes):
        """Test that doubling both grids' point counts leaves F unchanged to 1e-4."""
        fine = GridSet(
            GridSpec(small_grids.input.min, small_grids.input.max, 2 * small_grids.input.n),
            GridSpec(small_grids.resource.min, small_grids.resource.max, 2 * small_grids.resource.n),
        )
        engine = TeleportEngine(small_params, fine)
        for outcome in outcomes[:2]:
            assert engine.fidelity(outcome) == pytest.approx(small_engine.fidelity(outcome), abs=1e-4)

    def test_branch_error(self, small_engine):
        """Test that the feed-forward square root needs y1m/g > 0."""
        with pytest.raises(BranchError):
            small_engine.output_state(MeasurementOutcome(-5.0, 0.0))
        with pytest.raises(BranchError):
            small_engine.fidelity(MeasurementOutcome(0.0, 0.0))

    def test_global_phase_invariance(self, small_params, small_grids, small_engine, outcomes):
        """Test that a global phase on the input leaves the fidelity unchanged."""
        vacuum = input_wavefunction(InputState(), small_grids.input)
        phased = InputState("custom", grid=small_grids.input, amps=tuple(vacuum.amps * np.exp(0.7j)))
        engine = TeleportEngine(
            ProtocolParams(small_params.r, small_params.gamma, small_params.alpha, small_params.g1, small_params.g2, phased),
            small_grids,
        )
        for outcome in outcomes:
            assert engine.fidelity(outcome) == pytest.approx(small_engine.fidelity(outcome), abs=1e-9)


@pytest.mark.unit
class TestSweep:
    """Test the lattice sweep against node-by-node evaluation."""

    @pytest.fixture(scope="class")
    def axes(self, small_params):
        mu = mean_y1(small_params.g, small_params.gamma, small_params.alpha)
        return np.linspace(0.7 * mu, 1.3 * mu, 4), np.linspace(-3.0, 3.0, 3)

    @pytest.fixture(scope="class")
    def small_sweep(self, small_engine, axes):
        return small_engine.sweep(*axes, thresholds=[5.0], jobs=2)

    def test_shapes_and_ranges(self, small_sweep, axes):
        assert small_sweep.P.shape == (4, 3)
        assert small_sweep.F.shape == (4, 3)
        assert np.all(small_sweep.P >= 0)
        assert np.all((small_sweep.F >= 0) & (small_sweep.F <= 1))
        assert 5.0 in small_sweep.postselect_stats

    def test_matches_conditioned_weight(self, small_engine, small_sweep, axes):
        """Test that P equals the norm of the node-by-node conditioned state."""
        for i, y1m in enumerate(axes[0]):
            for j, yinm in enumerate(axes[1]):
                weight = small_engine.conditioned_state(MeasurementOutcome(y1m, yinm)).weight
                assert small_sweep.P[i, j] == pytest.approx(weight, rel=1e-9)

    def test_matches_fidelity(self, small_engine, small_sweep, axes):
        """Test that F equals the fidelity of the feed-forward output state."""
        for i, y1m in enumerate(axes[0]):
            for j, yinm in enumerate(axes[1]):
                fidelity = small_engine.fidelity(MeasurementOutcome(y1m, yinm))
                assert small_sweep.F[i, j] == pytest.approx(fidelity, abs=1e-8)

    def test_worker_count_independent(self, small_engine, small_sweep, axes):
        serial = small_engine.sweep(*axes, thresholds=[5.0], jobs=1)
        assert np.array_equal(serial.P, small_sweep.P)
        assert np.array_equal(serial.F, small_sweep.F)

    def test_negative_branch_is_nan(self, small_engine):
        """Test that nodes with y1m/g <= 0 get F = NaN but a valid density."""
        result = small_engine.sweep([-10.0, 0.0, 40.0], [0.0])
        assert np.isnan(result.F[0, 0]) and np.isnan(result.F[1, 0])
        assert np.isfinite(result.F[2, 0])
        assert np.all(result.P >= 0)

    def test_axes_must_increase(self, small_engine):
        with pytest.raises(DomainError):
            small_engine.sweep([3.0, 2.0], [0.0])
        with pytest.raises(DomainError):
            small_engine.sweep([], [0.0])

    @pytest.mark.integration
    def test_total_probability(self, small_params, small_grids):
        """Test that the default lattice captures nearly all of P."""
        result = sweep(small_params, default_lattice(small_params, 48, 48), small_grids)
        assert 0.97 < result.total_probability < 1.01


@pytest.mark.integration
class TestTrends:
    """Test that the fidelity follows the Heisenberg-picture error model."""

    @staticmethod
    def _fidelity_at_mean(params):
        engine = TeleportEngine(params, suggest_grids(params))
        return engine.fidelity(MeasurementOutcome(mean_y1(params.g, params.gamma, params.alpha), 0.0))

    def test_larger_weight_raises_fidelity(self, small_params):
        """Test that doubling the CZ weight lowers the x error and raises F."""
        stronger = small_params.with_weight(2 * small_params.g)
        assert error_x(stronger.g, stronger.r) < error_x(small_params.g, small_params.r)
        assert self._fidelity_at_mean(stronger) > self._fidelity_at_mean(small_params)

    def test_more_squeezing_raises_fidelity(self, small_params):
        """Test that raising r from 0.8 to 1.2 at the same weight raises F."""
        squeezed = ProtocolParams(1.2, small_params.gamma, small_params.alpha, small_params.g1, small_params.g2)
        assert self._fidelity_at_mean(squeezed) > self._fidelity_at_mean(small_params)


@pytest.mark.slow
@pytest.mark.integration
class TestReproduction:
    """Test the -15 dB, gamma 0.1 lattices for the vacuum input."""

    @pytest.fixture(scope="class")
    def engine20(self, params_alpha20):
        return TeleportEngine(params_alpha20, suggest_grids(params_alpha20))

    def test_alpha20_mode(self, engine20):
        """Test that the most likely outcome at alpha 20 teleports with F above 0.998."""
        result = engine20.sweep(np.linspace(195.0, 275.0, 41), np.linspace(-3.0, 3.0, 7))
        summary = result.summary()
        assert 225.0 < summary["modal_outcome"]["y1m"] < 245.0
        assert summary["modal_outcome"]["yinm"] == 0.0
        assert summary["F_at_mode"] > 0.998

    def test_alpha20_output_moments(self, params_alpha20, engine20):
        """Test that the output at the mode is centred with variance 1/2 + error_x."""
        psi = engine20.output_state(MeasurementOutcome(235.0, 0.0))
        mean, var = quadrature_moments(psi)
        assert abs(mean) < 0.2
        assert var == pytest.approx(0.5 + error_x(params_alpha20.g, params_alpha20.r), rel=0.2)

    def test_error_model_ordering(self, balanced_params, params_alpha20, engine20):
        """Test that alpha 10 has the larger predicted error and the lower F at its mean outcome."""
        params10 = balanced_params(10.0)
        budget10, budget20 = error_budget(params10), error_budget(params_alpha20)
        assert budget10.err_x + budget10.err_y > budget20.err_x + budget20.err_y
        engine10 = TeleportEngine(params10, suggest_grids(params10))
        f10 = engine10.fidelity(MeasurementOutcome(mean_y1(params10.g, 0.1, 10.0), 0.0))
        f20 = engine20.fidelity(MeasurementOutcome(mean_y1(params_alpha20.g, 0.1, 20.0), 0.0))
        assert f10 < f20

    def test_alpha10_high_fidelity_region(self, balanced_params):
        """Test alpha 10: high fidelity above y1m 20 and a small postselected tail below 5."""
        params = balanced_params(10.0)
        engine = TeleportEngine(params, suggest_grids(params))
        assert engine.fidelity(MeasurementOutcome(20.0, 0.0)) > 0.99
        assert engine.fidelity(MeasurementOutcome(40.0, 2.0)) > 0.99
        lattice = default_lattice(params, 48, 32)
        assert lattice.y1m_min < 0
        result = engine.sweep(*lattice.axes())
        assert result.high_fidelity_mass() > 0.5
        # fine rows over the low tail only
        tail = LatticeSpec(lattice.y1m_min, 10.0, 81, lattice.yinm_min, lattice.yinm_max, lattice.n_yinm)
        tail_result = engine.sweep(*tail.axes(), thresholds=[5.0])
        assert 0.055 < tail_result.postselect_stats[5.0] < 0.075

    def test_alpha6_lower_success(self, balanced_params):
        """Test that reducing alpha to 6 cuts the high-fidelity mass to under 0.3 of its alpha 10 value."""
        summaries = []
        for alpha in (6.0, 10.0):
            params = balanced_params(alpha)
            summaries.append(sweep(params, default_lattice(params, 48, 32)).summary())
        low, high = summaries
        assert low["high_fidelity_mass"] < 0.3 * high["high_fidelity_mass"]
        assert low["low_success"] is True
        assert high["low_success"] is False
