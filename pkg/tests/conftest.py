"""Shared helpers: independent quadrature oracles and small scenario builders.

The midpoint evaluators below are the second set of books for the quadrature
double-entry checks: they sample *analytic* integrands at cell centers, so
they share neither code nor sample points with the trapezoid path under test.
"""

import numpy as np
import pytest

from symhyp import SpaceTimeGrid, Scenario, SpatialWeight, SymMatrixField


def midpoint_2d(fn, grid: SpaceTimeGrid) -> float:
    """Midpoint rule over the space-time cylinder for a callable fn(x, t)."""
    xc = grid.x_lo + (np.arange(grid.nx - 1) + 0.5) * grid.hx
    tc = (np.arange(grid.nt - 1) + 0.5) * grid.ht
    vals = fn(xc[None, :], tc[:, None])
    return float(np.sum(vals) * grid.hx * grid.ht)


def midpoint_x(fn, grid: SpaceTimeGrid) -> float:
    xc = grid.x_lo + (np.arange(grid.nx - 1) + 0.5) * grid.hx
    return float(np.sum(fn(xc)) * grid.hx)


def midpoint_t(fn, grid: SpaceTimeGrid) -> float:
    tc = (np.arange(grid.nt - 1) + 0.5) * grid.ht
    return float(np.sum(fn(tc)) * grid.ht)


def scalar_scenario(nx=101, nt=101, t_final=1.0, beta=0.5, eta_slope=1.0,
                    h0=1.0, h1=1.0, name="scalar") -> Scenario:
    """N = 1 scenario with constant coefficients on (0, 1)."""
    grid = SpaceTimeGrid(0.0, 1.0, t_final, nx, nt)
    return Scenario(
        name=name, grid=grid, n_comp=1,
        h0=SymMatrixField.constant([[h0]], label="h0"),
        h1=SymMatrixField.constant([[h1]], label="h1"),
        eta=SpatialWeight.linear(eta_slope), beta=beta)


def system_scenario(h0, h1, nx=51, nt=51, t_final=1.0, beta=0.5,
                    eta_slope=1.0, name="system") -> Scenario:
    """N x N scenario with constant coefficient literals on (0, 1)."""
    grid = SpaceTimeGrid(0.0, 1.0, t_final, nx, nt)
    h0f = SymMatrixField.constant(h0, label="h0")
    return Scenario(
        name=name, grid=grid, n_comp=h0f.n_comp, h0=h0f,
        h1=SymMatrixField.constant(h1, label="h1"),
        eta=SpatialWeight.linear(eta_slope), beta=beta)


@pytest.fixture
def unit_grid():
    return SpaceTimeGrid(0.0, 1.0, 1.0, 101, 101)
