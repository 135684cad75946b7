"""Ensemble studies that estimate the constants the inequalities assert.

The weighted-estimate scan samples the solution quantifier with manufactured
solutions: arbitrary seeded smooth grid functions whose source is defined as
their own discrete residual.  The observability and energy studies use
genuine zero-inflow solves of the homogeneous system, as those statements
require.  Every study refuses to run (with the full hypothesis report
attached) when its structural hypotheses fail, and every aggregation is a
max over non-degenerate members, so adding members can only grow the
estimated constants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import HypothesisRefusal
from .fields import (
    GridFunction,
    Scenario,
    bump_profile,
    random_initial_profile,
    random_smooth_gridfunction,
)
from .functionals import (
    CarlemanTerms,
    carleman_ratio,
    carleman_terms,
    energy_ledger,
    observability_ratio,
)
from .hypotheses import (
    check_eta_coercivity,
    check_h0_bounds,
    check_hypotheses,
    check_weight_coercivity,
    classify_boundary_series,
    minimal_time,
)
from .solver import CFL_DEFAULT, residual, solve

#: relative band around the tail level that defines the stabilization point
S0_TAIL_BAND = 0.10


@dataclass(frozen=True)
class ScanRow:
    member: int
    s: float
    terms: CarlemanTerms
    ratio: float


@dataclass(frozen=True)
class ScanPass:
    """One full (member x s) sweep at a fixed resolution."""

    nx: int
    nt: int
    rows: tuple[ScanRow, ...]
    rho_max: tuple[float, ...]
    s0_hat: float
    c_hat: float
    degenerate: int


@dataclass(frozen=True)
class CarlemanScanReport:
    scenario: str
    s_grid: tuple[float, ...]
    ensemble: int
    coarse: ScanPass
    fine: ScanPass | None
    drift: float | None

    @property
    def rho_max(self) -> tuple[float, ...]:
        return self.coarse.rho_max

    @property
    def s0_hat(self) -> float:
        return self.coarse.s0_hat

    @property
    def c_hat(self) -> float:
        return self.coarse.c_hat

    @property
    def all_finite(self) -> bool:
        return all(math.isfinite(r) for r in self.coarse.rho_max)


def _stabilized_tail(s_grid: tuple[float, ...],
                     rho: tuple[float, ...]) -> tuple[float, float]:
    """(s0_hat, c_hat) from the per-s maxima.

    The reference level is the median of the upper half of the s grid; the
    threshold is the smallest s whose maximum sits within S0_TAIL_BAND of
    that level, and the constant estimate is the largest maximum at or past
    the threshold.  Falls back to the last s when nothing qualifies.
    """
    tail = [r for r in rho[len(rho) // 2:] if math.isfinite(r)]
    if not tail:
        return s_grid[-1], math.nan
    tail_ref = float(np.median(tail))
    s0_hat = s_grid[-1]
    for s, r in zip(s_grid, rho):
        if math.isfinite(r) and abs(r - tail_ref) <= S0_TAIL_BAND * abs(tail_ref):
            s0_hat = s
            break
    c_hat = max((r for s, r in zip(s_grid, rho)
                 if s >= s0_hat and math.isfinite(r)), default=math.nan)
    return s0_hat, c_hat


def _scan_pass(scenario: Scenario, s_grid: tuple[float, ...],
               members: list[GridFunction]) -> ScanPass:
    labels = classify_boundary_series(scenario)
    rows = []
    degenerate = 0
    per_s: dict[float, float] = {s: -math.inf for s in s_grid}
    for idx, u in enumerate(members):
        if not np.any(u.values):
            degenerate += 1
        src = residual(u, scenario)
        for s in s_grid:
            terms = carleman_terms(u, src, scenario, s, labels=labels)
            ratio = carleman_ratio(terms)
            rows.append(ScanRow(member=idx, s=s, terms=terms, ratio=ratio))
            if not math.isnan(ratio):
                per_s[s] = max(per_s[s], ratio)
    rho = tuple(per_s[s] if per_s[s] != -math.inf else math.nan
                for s in s_grid)
    s0_hat, c_hat = _stabilized_tail(s_grid, rho)
    return ScanPass(nx=scenario.grid.nx, nt=scenario.grid.nt,
                    rows=tuple(rows), rho_max=rho, s0_hat=s0_hat,
                    c_hat=c_hat, degenerate=degenerate)


def scan_carleman(scenario: Scenario, ensemble: int = 20,
                  s_grid=(1.0, 2.0, 4.0, 8.0, 16.0), seed: int = 0,
                  modes: int = 4, decay: float = 2.0,
                  members: list[GridFunction] | None = None,
                  refine: bool = True) -> CarlemanScanReport:
    """Estimate the weighted-estimate constant over a manufactured ensemble.

    Member i is the seeded smooth grid function with seed `seed + i`, with
    its discrete residual taken as the source; the per-s maximum ratio over
    the ensemble is aggregated and the stabilized tail gives (s0_hat, c_hat).
    With refine=True the identical smooth functions are resampled on the
    node-doubled grid and the relative drift of c_hat is reported.

    Explicit `members` replace the generated ensemble (refinement is skipped
    then, since arbitrary samples cannot be resampled).  Identically zero
    members are counted as degenerate and excluded from every maximum.
    """
    weight = check_weight_coercivity(scenario)
    if not weight.passed:
        raise HypothesisRefusal(
            f"weight coercivity fails on {scenario.name}: lambda_min="
            f"{weight.value!r} at x={weight.worst_x!r}, t={weight.worst_t!r}",
            check_hypotheses(scenario))
    s_grid = tuple(float(s) for s in s_grid)

    generated = members is None
    if generated:
        members = [random_smooth_gridfunction(scenario.grid, scenario.n_comp,
                                              seed + i, modes=modes,
                                              decay=decay)
                   for i in range(ensemble)]
    coarse = _scan_pass(scenario, s_grid, members)

    fine = None
    drift = None
    if refine and generated:
        fine_scenario = scenario.with_grid(scenario.grid.refined())
        fine_members = [random_smooth_gridfunction(fine_scenario.grid,
                                                   scenario.n_comp, seed + i,
                                                   modes=modes, decay=decay)
                        for i in range(len(members))]
        fine = _scan_pass(fine_scenario, s_grid, fine_members)
        if math.isfinite(coarse.c_hat) and coarse.c_hat != 0.0:
            drift = abs(fine.c_hat - coarse.c_hat) / abs(coarse.c_hat)

    return CarlemanScanReport(scenario=scenario.name, s_grid=s_grid,
                              ensemble=len(members), coarse=coarse,
                              fine=fine, drift=drift)


# ---------------------------------------------------------------------------
# observability
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ObservabilityReport:
    scenario: str
    t_final: float
    t_min: float
    ratios: tuple[float, ...]
    c_obs: float
    verdict: str  # OBSERVABLE | COUNTEREXAMPLE
    warnings: tuple[str, ...]
    counterexample: dict | None
    degenerate: int


def _homogeneous(scenario: Scenario) -> Scenario:
    return replace(scenario, source=None) if scenario.source is not None \
        else scenario


def _observability_guard(scenario: Scenario) -> tuple[float, list[str]]:
    eta_c = check_eta_coercivity(scenario)
    h0b = check_h0_bounds(scenario)
    failed = []
    if not eta_c.passed:
        failed.append(f"eta coercivity fails: lambda_min={eta_c.value!r} "
                      f"at x={eta_c.worst_x!r}, t={eta_c.worst_t!r}")
    if not h0b.passed:
        failed.append(f"h0 bounds fail: delta1={h0b.delta1!r} "
                      f"at x={h0b.worst_x!r}, t={h0b.worst_t!r}")
    if failed:
        raise HypothesisRefusal(
            f"observability hypotheses fail on {scenario.name}: "
            + "; ".join(failed), check_hypotheses(scenario))
    t_min = minimal_time(scenario.eta, eta_c.value, h0b.M, scenario.grid)
    warnings = []
    if scenario.grid.t_final <= t_min:
        warnings.append(
            f"T={scenario.grid.t_final!r} does not exceed the critical time "
            f"T_min={t_min!r}; proceeding (counterexample study)")
    return t_min, warnings


def estimate_observability(scenario: Scenario, ensemble: int = 20,
                           seed: int = 0, initial_kind: str = "random",
                           modes: int = 3, decay: float = 2.0,
                           support: tuple[float, float] = (0.0, 0.4),
                           amplitude: float = 1.0,
                           cfl_factor: float = CFL_DEFAULT,
                           members: list[np.ndarray] | None = None
                           ) -> ObservabilityReport:
    """Solve the homogeneous system per member and aggregate trace ratios.

    Zero inflow throughout; initial data is either the seeded band-limited
    sine ensemble ("random") or the compactly supported bump ("bump").
    The verdict is OBSERVABLE only when the horizon exceeds the critical
    time and every non-degenerate ratio is finite; otherwise the worst
    member is recorded as the counterexample.
    """
    scenario = _homogeneous(scenario)
    t_min, warnings = _observability_guard(scenario)

    if members is None:
        if initial_kind == "random":
            members = [random_initial_profile(scenario.grid, scenario.n_comp,
                                              seed + i, modes=modes,
                                              decay=decay)
                       for i in range(ensemble)]
        elif initial_kind == "bump":
            members = [bump_profile(scenario.grid, support,
                                    scenario.n_comp, amplitude)
                       for _ in range(ensemble)]
        else:
            raise ValueError(f"unknown initial_kind {initial_kind!r}")

    ratios = []
    degenerate = 0
    for u0 in members:
        result = solve(scenario, u0, inflow=None, cfl_factor=cfl_factor)
        r = observability_ratio(result)
        if math.isnan(r):
            degenerate += 1
        ratios.append(r)

    usable = [r for r in ratios if not math.isnan(r)]
    c_obs = max(usable) if usable else math.nan
    all_finite = bool(usable) and all(math.isfinite(r) for r in usable)
    observable = scenario.grid.t_final > t_min and all_finite
    counterexample = None
    if not observable and usable:
        worst = int(np.nanargmax([r if not math.isnan(r) else -math.inf
                                  for r in ratios]))
        counterexample = {"member": worst, "ratio": ratios[worst],
                          "t_min": t_min}
    return ObservabilityReport(
        scenario=scenario.name, t_final=scenario.grid.t_final, t_min=t_min,
        ratios=tuple(ratios), c_obs=c_obs,
        verdict="OBSERVABLE" if observable else "COUNTEREXAMPLE",
        warnings=tuple(warnings), counterexample=counterexample,
        degenerate=degenerate)


# ---------------------------------------------------------------------------
# energy estimate
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EnergyEstimateReport:
    scenario: str
    ratios: tuple[float, ...]
    c_energy: float
    ratios_fine: tuple[float, ...] | None
    c_energy_fine: float | None
    drift: float | None
    degenerate: int

    @property
    def finite(self) -> bool:
        return math.isfinite(self.c_energy)


def _energy_pass(scenario: Scenario, members, cfl_factor: float):
    labels = classify_boundary_series(scenario)
    ratios = []
    degenerate = 0
    for u0 in members:
        result = solve(scenario, u0, inflow=None, cfl_factor=cfl_factor)
        ledger = energy_ledger(result, scenario, labels=labels)
        r = ledger.max_ratio
        if math.isnan(r):
            degenerate += 1
        ratios.append(r)
    return ratios, degenerate


def verify_energy_estimate(scenario: Scenario, ensemble: int = 20,
                           seed: int = 0, modes: int = 3, decay: float = 2.0,
                           cfl_factor: float = CFL_DEFAULT,
                           members: list[np.ndarray] | None = None,
                           refine: bool = False) -> EnergyEstimateReport:
    """Max energy-balance ratio over zero-inflow solves of random data.

    Requires the two-sided spectral bounds on h0.  Identically degenerate
    members (zero data) are excluded; with refine=True the same initial
    profiles are resampled on the node-doubled grid for a drift estimate.
    """
    h0b = check_h0_bounds(scenario)
    if not h0b.passed:
        raise HypothesisRefusal(
            f"h0 bounds fail on {scenario.name}: delta1={h0b.delta1!r} "
            f"at x={h0b.worst_x!r}, t={h0b.worst_t!r}",
            check_hypotheses(scenario))
    scenario = _homogeneous(scenario)

    generated = members is None
    if generated:
        members = [random_initial_profile(scenario.grid, scenario.n_comp,
                                          seed + i, modes=modes, decay=decay)
                   for i in range(ensemble)]
    ratios, degenerate = _energy_pass(scenario, members, cfl_factor)
    usable = [r for r in ratios if not math.isnan(r)]
    c_energy = max(usable) if usable else math.nan

    ratios_fine = None
    c_fine = None
    drift = None
    if refine and generated:
        fine_scenario = scenario.with_grid(scenario.grid.refined())
        fine_members = [random_initial_profile(fine_scenario.grid,
                                               scenario.n_comp, seed + i,
                                               modes=modes, decay=decay)
                        for i in range(len(members))]
        rf, _ = _energy_pass(fine_scenario, fine_members, cfl_factor)
        ratios_fine = tuple(rf)
        uf = [r for r in rf if not math.isnan(r)]
        c_fine = max(uf) if uf else math.nan
        if math.isfinite(c_energy) and c_energy != 0.0:
            drift = abs(c_fine - c_energy) / abs(c_energy)

    return EnergyEstimateReport(
        scenario=scenario.name, ratios=tuple(ratios), c_energy=c_energy,
        ratios_fine=ratios_fine, c_energy_fine=c_fine, drift=drift,
        degenerate=degenerate)
