"""Explicit time stepper for the first-order system, plus its oracles.

The scheme is local Lax-Friedrichs (Rusanov) on the quasi-linear form with a
characteristic boundary closure: at each boundary node the state is split
along the generalized eigenvectors of (h1 * nu, h0); incoming characteristics
take the prescribed inflow data, outgoing ones are linearly extrapolated from
the two adjacent interior nodes.  First order, dissipative, and stable under
the usual Courant restriction on the fastest characteristic.

The target inequalities quantify over solutions without any boundary
condition; a discrete marcher must impose some inflow closure, so solutions
generated here form a subfamily of that admissible set (the manufactured
route through `residual` has no such restriction).

`residual` applies the discrete operator to arbitrary samples, which turns
any smooth grid function into a manufactured solution; `exact_transport`
provides the constant-speed scalar analytic solution used as an oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import CflViolationError, GridMismatchError, SingularCoefficientError
from .fields import (
    NORMALS,
    SIDES,
    GridFunction,
    Scenario,
    SpaceTimeGrid,
    eig_bounds,
    sample_field,
)

CFL_DEFAULT = 0.5

#: characteristics with |speed| below this are treated as non-propagating
SPEED_TOL = 1e-12


@dataclass(frozen=True)
class SolveResult:
    """Discrete solution with its boundary traces.

    traces has shape (2, nt, n) in SIDES order and equals the boundary
    columns of u exactly; cfl_used is the Courant number actually run,
    bounded by cfl_limit.
    """

    u: GridFunction
    traces: np.ndarray
    cfl_used: float
    cfl_limit: float
    scheme: str = "rusanov-characteristic"


def _char_speeds(h0m: np.ndarray, h1m: np.ndarray) -> np.ndarray:
    """Largest |generalized eigenvalue| of (h1, h0) per node.

    h0 is whitened with a Cholesky factor, so h0 must already be checked
    positive definite.
    """
    n = h0m.shape[-1]
    if n == 1:
        return np.abs(h1m[..., 0, 0] / h0m[..., 0, 0])
    chol = np.linalg.cholesky(h0m)
    y = np.linalg.solve(chol, h1m)
    sym = np.linalg.solve(chol, np.swapaxes(y, -1, -2))
    w = np.linalg.eigvalsh(sym)
    return np.abs(w).max(axis=-1)


def _require_spd(h0m: np.ndarray, grid: SpaceTimeGrid, trow: float,
                 xcoords: np.ndarray) -> None:
    lmin, _ = eig_bounds(h0m)
    if lmin.min() <= 0.0:
        i = int(np.argmin(lmin))
        raise SingularCoefficientError(
            f"h0 is not positive definite at x={xcoords[i]}, t={trow} "
            f"(lambda_min={lmin.min()!r})")


def max_char_speed(scenario: Scenario) -> float:
    """Fastest characteristic speed over all grid nodes."""
    grid = scenario.grid
    x = grid.x
    if scenario.h0.time_independent and scenario.h1.time_independent:
        rows = [0.0]
    else:
        rows = grid.t
    alpha = 0.0
    block = 256
    for start in range(0, len(rows), block):
        tb = np.asarray(rows[start:start + block])[:, None]
        h0m = scenario.h0(x[None, :], tb)
        h1m = scenario.h1(x[None, :], tb)
        lmin, _ = eig_bounds(h0m)
        if lmin.min() <= 0.0:
            nrow, i = np.unravel_index(int(np.argmin(lmin)), lmin.shape)
            raise SingularCoefficientError(
                f"h0 is not positive definite at x={x[i]}, "
                f"t={float(tb[nrow, 0])} (lambda_min={lmin.min()!r})")
        alpha = max(alpha, float(_char_speeds(h0m, h1m).max()))
    return alpha


def admissible_time_nodes(scenario: Scenario,
                          cfl_factor: float = CFL_DEFAULT) -> int:
    """Smallest nt honoring ht <= cfl_factor * hx / alpha on this grid."""
    grid = scenario.grid
    alpha = max_char_speed(scenario)
    if alpha == 0.0:
        return 2
    steps = math.ceil(grid.t_final * alpha / (cfl_factor * grid.hx) - 1e-12)
    return max(2, steps + 1)


class _RowCoeffs:
    """Coefficient samples on one time row, with the derived per-node data."""

    def __init__(self, scenario: Scenario, trow: float):
        grid = scenario.grid
        x = grid.x
        tval = np.asarray(trow)
        self.h0 = scenario.h0(x, tval)
        self.h1 = scenario.h1(x, tval)
        _require_spd(self.h0, grid, trow, x)
        self.inv_h0 = np.linalg.inv(self.h0)
        self.speeds = _char_speeds(self.h0, self.h1)
        self.p = scenario.p(x, tval) if scenario.p is not None else None


def _boundary_basis(scenario: Scenario, side: str, trow: float):
    """Generalized eigenbasis of (nu * h1, h0) at one boundary node.

    Returns (speeds, V, h0b) with V normalized so V.T @ h0b @ V = I; the
    characteristic coordinates of a state g are then V.T @ h0b @ g.
    """
    grid = scenario.grid
    xb = grid.x_lo if side == "x_lo" else grid.x_hi
    tval = np.asarray(trow)
    h0b = scenario.h0(np.asarray(xb), tval)
    flux = NORMALS[side] * scenario.h1(np.asarray(xb), tval)
    lam, vecs = scipy.linalg.eigh(flux, h0b)
    return lam, vecs, h0b


def _normalize_initial(initial, grid: SpaceTimeGrid, n_comp: int) -> np.ndarray:
    if callable(initial):
        initial = initial(grid.x)
    arr = np.asarray(initial, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.shape != (grid.nx, n_comp):
        raise GridMismatchError(
            f"initial data shape {arr.shape} != (nx, n) = ({grid.nx}, {n_comp})")
    return arr


def _inflow_value(inflow, side: str, tval: float, n_comp: int) -> np.ndarray:
    if inflow is None:
        return np.zeros(n_comp)
    fn = inflow.get(side)
    if fn is None:
        return np.zeros(n_comp)
    return np.broadcast_to(np.asarray(fn(tval), dtype=float), (n_comp,))


def solve(scenario: Scenario, initial, inflow: dict | None = None,
          cfl_factor: float = CFL_DEFAULT) -> SolveResult:
    """March the system on the scenario grid.

    initial: array (nx, n) (or (nx,) for scalar systems) or callable of x.
    inflow: optional dict {"x_lo": fn, "x_hi": fn} of time functions giving
    the full state vector whose incoming characteristic part is imposed;
    missing sides default to zero data.

    Refuses to run when the grid time step violates the Courant bound, and
    when h0 fails to be positive definite at any sampled node.
    """
    grid = scenario.grid
    n = scenario.n_comp
    nx, nt = grid.nx, grid.nt
    hx, ht = grid.hx, grid.ht

    alpha = max_char_speed(scenario)
    cfl_used = alpha * ht / hx
    if cfl_used > cfl_factor * (1 + 1e-12):
        raise CflViolationError(
            f"time step ht={ht!r} violates the Courant bound "
            f"{cfl_factor!r}*hx/alpha with alpha={alpha!r}; "
            f"need nt >= {admissible_time_nodes(scenario, cfl_factor)}")

    static = (scenario.h0.time_independent and scenario.h1.time_independent
              and (scenario.p is None or scenario.p.time_independent))
    coeffs = _RowCoeffs(scenario, 0.0) if static else None
    bases = ({side: _boundary_basis(scenario, side, 0.0) for side in SIDES}
             if static else None)

    u = np.empty((nt, nx, n))
    u[0] = _normalize_initial(initial, grid, n)
    tgrid = grid.t
    lam_c = ht / (2.0 * hx)

    for step in range(nt - 1):
        tn = float(tgrid[step])
        tn1 = float(tgrid[step + 1])
        row = coeffs if static else _RowCoeffs(scenario, tn)
        un = u[step]

        # interior: central transport + Rusanov dissipation + lower order
        rhs = np.einsum("iab,ib->ia", row.h1[1:-1], un[2:] - un[:-2]) / (2 * hx)
        if row.p is not None:
            rhs = rhs + np.einsum("iab,ib->ia", row.p[1:-1], un[1:-1])
        if scenario.source is not None:
            rhs = rhs - scenario.source(grid.x, np.asarray(tn))[1:-1]
        upd = un[1:-1] - ht * np.einsum("iab,ib->ia", row.inv_h0[1:-1], rhs)
        a_r = np.maximum(row.speeds[1:-1], row.speeds[2:])
        a_l = np.maximum(row.speeds[:-2], row.speeds[1:-1])
        upd = upd + lam_c * (a_r[:, None] * (un[2:] - un[1:-1])
                             - a_l[:, None] * (un[1:-1] - un[:-2]))
        u[step + 1, 1:-1] = upd

        # characteristic closure at both boundary nodes, at the new time
        for side in SIDES:
            lam, vecs, h0b = (bases[side] if static
                              else _boundary_basis(scenario, side, tn1))
            if side == "x_lo":
                extrap = 2.0 * u[step + 1, 1] - u[step + 1, 2]
                ib = 0
            else:
                extrap = 2.0 * u[step + 1, -2] - u[step + 1, -3]
                ib = nx - 1
            coords = vecs.T @ (h0b @ extrap)
            incoming = lam < -SPEED_TOL
            if incoming.any():
                g = _inflow_value(inflow, side, tn1, n)
                coords_in = vecs.T @ (h0b @ g)
                coords = np.where(incoming, coords_in, coords)
            u[step + 1, ib] = vecs @ coords

    traces = np.stack([u[:, 0, :], u[:, -1, :]])
    return SolveResult(u=GridFunction(grid, u), traces=traces,
                       cfl_used=cfl_used, cfl_limit=cfl_factor)


def residual(u: GridFunction, scenario: Scenario) -> GridFunction:
    """Apply the discrete operator: h0 D_t u + h1 D_x u + p u.

    Derivatives are the second-order differences of `central_derivative`.
    Declaring the result as the source makes any smooth sample a valid
    solution (the manufactured-solution route).
    """
    if u.grid != scenario.grid:
        raise GridMismatchError("grid function was sampled on a different grid")
    if u.n_comp != scenario.n_comp:
        raise GridMismatchError(
            f"component count {u.n_comp} != scenario size {scenario.n_comp}")
    grid = scenario.grid
    h0m = sample_field(scenario.h0, grid)
    h1m = sample_field(scenario.h1, grid)
    ut = np.gradient(u.values, grid.ht, axis=0, edge_order=2)
    ux = np.gradient(u.values, grid.hx, axis=1, edge_order=2)
    out = (np.einsum("txab,txb->txa", h0m, ut)
           + np.einsum("txab,txb->txa", h1m, ux))
    if scenario.p is not None:
        x, t = grid.meshgrid()
        out = out + np.einsum("txab,txb->txa", scenario.p(x, t), u.values)
    return GridFunction(grid, out)


def exact_transport(speed: float, profile, grid: SpaceTimeGrid,
                    inflow=None) -> GridFunction:
    """Constant-speed scalar transport solution u(x, t) = u0(x - c t).

    Where the backward characteristic exits the domain before time 0, the
    value is taken from the inflow time series at the entry boundary
    (zero when no inflow is given).  profile and inflow must accept arrays.
    """
    x, t = grid.meshgrid()
    if speed == 0.0:
        vals = np.broadcast_to(np.asarray(profile(x), dtype=float), grid.shape)
        return GridFunction(grid, np.array(vals)[..., None])
    y = x - speed * t
    if speed > 0:
        inside = y >= grid.x_lo
        tau = t - (x - grid.x_lo) / speed
    else:
        inside = y <= grid.x_hi
        tau = t - (x - grid.x_hi) / speed
    py = np.asarray(profile(np.clip(y, grid.x_lo, grid.x_hi)), dtype=float)
    py = np.broadcast_to(py, inside.shape)
    if inflow is None:
        bv = np.zeros(inside.shape)
    else:
        bv = np.broadcast_to(
            np.asarray(inflow(np.maximum(tau, 0.0)), dtype=float), inside.shape)
    vals = np.where(inside, py, bv)
    return GridFunction(grid, vals[..., None])
