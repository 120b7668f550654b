"""Test parameter records, grid specs and grid checks."""

import math
import os
import sys

import numpy as np
import pytest

# Add the package to the path for testing
sys.path.insert(0, os.path.join(os.path.dirname(__file__), ".."))

from cubictele.core.errors import DomainError, GridError
from cubictele.core.params import (
    CONVENTIONS,
    EnergyParams,
    GridSet,
    GridSpec,
    InputState,
    ProtocolParams,
    next_power_of_two,
    r_to_squeezing_db,
    squeezing_db_to_r,
    suggest_grids,
    teleport_params,
    validate_grid,
)
from cubictele.core.qstate import squeezed_profile

pytestmark = pytest.mark.unit


class TestConventions:
    """Test the fixed physical conventions."""

    def test_vacuum_variance_is_one_half(self):
        """Test the commutator convention [x, y] = i."""
        assert CONVENTIONS.vacuum_quadrature_variance == 0.5
        assert CONVENTIONS.fourier_sign == 1

    def test_fifteen_db_squeezing(self):
        """Test the -15 dB conversion used by every reproduction run."""
        r = squeezing_db_to_r(-15.0)
        assert r == pytest.approx(1.726938, rel=1e-6)
        assert math.exp(-2 * r) == pytest.approx(10 ** (-1.5), rel=1e-12)

    def test_db_round_trip(self):
        """Test that dB and r conversions invert each other."""
        assert r_to_squeezing_db(squeezing_db_to_r(-7.3)) == pytest.approx(-7.3)
        assert squeezing_db_to_r(0.0) == 0.0

    def test_positive_db_rejected(self):
        """Test that anti-squeezing in dB is rejected."""
        with pytest.raises(DomainError):
            squeezing_db_to_r(3.0)
        with pytest.raises(DomainError):
            r_to_squeezing_db(-0.1)

    def test_next_power_of_two(self):
        assert next_power_of_two(1000) == 1024
        assert next_power_of_two(1024) == 1024
        assert next_power_of_two(1025) == 2048
        assert next_power_of_two(0.5) == 1


class TestGridSpec:
    """Test uniform grid specs."""

    def test_spacing_and_points(self):
        """Test that both bounds are grid nodes."""
        grid = GridSpec(-1.0, 1.0, 21)
        assert grid.spacing == pytest.approx(0.1)
        points = grid.points()
        assert points[0] == -1.0
        assert points[-1] == pytest.approx(1.0)
        assert len(points) == 21

    def test_invalid_grids(self):
        """Test that degenerate grids are rejected."""
        with pytest.raises(GridError):
            GridSpec(0.0, 1.0, 8)
        with pytest.raises(GridError):
            GridSpec(1.0, 1.0, 64)
        with pytest.raises(GridError):
            GridSpec(0.0, float("inf"), 64)

    def test_reciprocal_grid(self):
        """Test that the DFT conjugate grid satisfies n hx hy = 2 pi."""
        grid = GridSpec(-10.0, 10.0, 1024)
        conjugate = grid.reciprocal()
        assert conjugate.n == grid.n
        assert grid.n * grid.spacing * conjugate.spacing == pytest.approx(2 * math.pi)
        assert conjugate.min == pytest.approx(-conjugate.max)
        assert conjugate.is_reciprocal_of(grid)
        assert conjugate.shifted(3.7).is_reciprocal_of(grid)
        assert not GridSpec(-5.0, 5.0, 1024).is_reciprocal_of(grid)

    def test_matches_within_tolerance(self):
        grid = GridSpec(0.0, 1.0, 101)
        assert grid.matches(GridSpec(1e-9, 1.0 + 1e-9, 101))
        assert not grid.matches(GridSpec(0.001, 1.001, 101))
        assert not grid.matches(GridSpec(0.0, 1.0, 102))

    def test_dict_round_trip(self):
        grids = GridSet(GridSpec(-8.0, 8.0, 512), GridSpec(-10.0, 50.0, 32768))
        assert GridSet.from_dict(grids.to_dict()) == grids

    def test_missing_field(self):
        with pytest.raises(DomainError):
            GridSpec.from_dict({"min": 0.0, "max": 1.0})


class TestInputState:
    """Test input state descriptions and their moments."""

    def test_analytic_moments(self):
        """Test moments of the analytically known input states."""
        assert InputState().moments() == (0.0, 0.0, 0.5, 0.5)
        mean_x, mean_y, var_x, var_y = InputState("squeezed", r_in=0.5).moments()
        assert var_x == pytest.approx(math.exp(-1.0) / 2)
        assert var_y == pytest.approx(math.exp(1.0) / 2)
        assert InputState("displaced", x0=1.0, y0=-2.0).moments()[:2] == (1.0, -2.0)

    def test_custom_moments(self):
        """Test numerical moments of a custom state equal to a displaced vacuum."""
        grid = GridSpec(-10.0, 10.0, 1024)
        x = grid.points()
        amps = squeezed_profile(x - 1.0, 0.0) * np.exp(0.5j * x)
        mean_x, mean_y, var_x, var_y = InputState("custom", grid=grid, amps=tuple(amps)).moments()
        assert mean_x == pytest.approx(1.0, abs=1e-6)
        assert mean_y == pytest.approx(0.5, rel=1e-3)
        assert var_x == pytest.approx(0.5, rel=1e-4)
        assert var_y == pytest.approx(0.5, rel=1e-2)

    def test_unknown_kind(self):
        with pytest.raises(DomainError):
            InputState("cat")

    def test_custom_needs_matching_amplitudes(self):
        """Test that custom states need one amplitude per grid point."""
        with pytest.raises(DomainError):
            InputState("custom", grid=GridSpec(-1.0, 1.0, 16), amps=(1.0,) * 15)
        with pytest.raises(DomainError):
            InputState("custom")

    def test_custom_dict_round_trip(self):
        grid = GridSpec(-1.0, 1.0, 16)
        state = InputState("custom", grid=grid, amps=tuple(complex(k, -k) for k in range(16)))
        assert InputState.from_dict(state.to_dict()) == state


class TestProtocolParams:
    """Test protocol parameter validation and serialization."""

    def test_teleport_mode(self):
        params = teleport_params(1.0, 0.1, 20.0, 2.0)
        assert params.teleport_mode
        assert params.g == 2.0
        assert params.with_weight(3.0).g2 == -3.0

    def test_general_weights_have_no_single_g(self):
        """Test that g is undefined outside teleport mode."""
        params = ProtocolParams(1.0, 0.1, 20.0, 2.0, 1.0)
        assert not params.teleport_mode
        with pytest.raises(DomainError):
            params.g

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"r": -0.1},
            {"gamma": 0.0},
            {"gamma": -0.1},
            {"g1": 0.0},
            {"alpha": float("nan")},
        ],
    )
    def test_strict_validation(self, kwargs):
        """Test that out-of-domain parameters are rejected."""
        values = {"r": 1.0, "gamma": 0.1, "alpha": 20.0, "g1": 2.0, "g2": -2.0, **kwargs}
        with pytest.raises(DomainError):
            ProtocolParams(**values)

    def test_degenerate_limits(self):
        """Test that gamma = 0 and g = 0 need allow_degenerate."""
        params = ProtocolParams(1.0, 0.0, 20.0, 0.0, 0.0, allow_degenerate=True)
        assert params.gamma == 0.0
        with pytest.raises(DomainError):
            ProtocolParams(1.0, -0.1, 20.0, 0.0, 0.0, allow_degenerate=True)

    def test_from_dict_shorthands(self):
        """Test squeeze_db and the balanced weight shorthand."""
        params = ProtocolParams.from_dict({"squeeze_db": -15, "gamma": 0.1, "alpha": 20, "g": "balanced"})
        assert params.r == pytest.approx(squeezing_db_to_r(-15))
        assert params.g == pytest.approx(6 * 0.1 * 20 * math.exp(-params.r))
        assert params.g2 == -params.g1

    def test_dict_round_trip(self):
        params = teleport_params(0.8, 0.1, 10.0, 2.5, InputState("displaced", x0=0.5, y0=1.0))
        assert ProtocolParams.from_dict(params.to_dict()) == params

    def test_from_dict_missing_fields(self):
        with pytest.raises(DomainError):
            ProtocolParams.from_dict({"gamma": 0.1, "alpha": 20, "g": 1.0})
        with pytest.raises(DomainError):
            ProtocolParams.from_dict({"r": 1.0, "gamma": 0.1, "alpha": 20})


class TestEnergyParams:
    @pytest.mark.parametrize("tau", [0.0, -0.5, 1.5])
    def test_transmittance_range(self, tau):
        with pytest.raises(DomainError):
            EnergyParams(wavelength=430e-9, tau=tau, alpha=20.0)

    def test_wavelength_positive(self):
        with pytest.raises(DomainError):
            EnergyParams(wavelength=0.0, tau=0.01, alpha=20.0)


class TestGridChecks:
    """Test the resource grid check and the grid suggestion."""

    def test_suggested_grids_pass(self, params_alpha20):
        """Test that the suggested grids raise no warnings."""
        grids = suggest_grids(params_alpha20)
        assert validate_grid(grids.resource, params_alpha20) == []
        assert grids.resource.n == 32768
        assert grids.resource.min < 20.0 < grids.resource.max

    def test_coarse_grid_undersamples_phase(self, params_alpha20):
        """Test that a 256-point grid cannot resolve the cubic phase at alpha 20."""
        warnings = validate_grid(GridSpec(-10.0, 50.0, 256), params_alpha20)
        assert any(w.startswith("undersampled phase") for w in warnings)

    def test_narrow_grid_misses_support(self, params_alpha20):
        """Test that a grid narrower than alpha +- 6 sigma is reported."""
        warnings = validate_grid(GridSpec(15.0, 25.0, 4096), params_alpha20)
        assert any("does not cover the resource support" in w for w in warnings)

    def test_position_window_raises_phase_rate(self, params_alpha20):
        """Test that a wide x window tightens the sampling condition."""
        grid = suggest_grids(params_alpha20).resource
        assert validate_grid(grid, params_alpha20, x_window=(-5000.0, 5000.0))

    def test_degenerate_gamma_grid_check(self):
        """Test that with gamma = 0 only coverage matters."""
        params = ProtocolParams(0.5, 0.0, 5.0, 1.0, -1.0, allow_degenerate=True)
        assert validate_grid(GridSpec(-20.0, 30.0, 64), params) == []
