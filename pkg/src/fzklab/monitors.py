"""Localized functionals: region-restricted Sobolev norms, weighted
smoothing integrals, and the moving-half-space propagation monitor.

Sobolev densities are computed globally (spectrally exact J^r) and then
restricted to the region; time integrals use the trapezoid rule over the
recorded snapshots.  The smoothing integrals optionally start at the
first positive recorded time: the time-averaged local gain is an
almost-everywhere-in-time effect, and the t = 0 endpoint only reflects
the unsmoothed data.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
import scipy.fft as _fft

from .spectral import (
    Field,
    Grid,
    apply_multiplier,
    bessel_potential_multiplier,
    fft_workers,
    partial_multiplier,
    riesz_power_multiplier,
)
from .weights import ConeCondition, DirectionalWeight, check_cone, smoothing_lambda
from .evolve import ConservedQuantities, Trajectory, conserved_quantities


@dataclass(frozen=True)
class DiagnosticRecord:
    """Per-snapshot diagnostic row."""

    t: float
    quantities: ConservedQuantities
    localized: Dict[str, float]
    meta: dict = field(default_factory=dict)


def sobolev_density(u: Field, r: float) -> np.ndarray:
    """(J^r u)^2 pointwise, computed with the exact global multiplier."""
    jr = apply_multiplier(bessel_potential_multiplier(r), u)
    return jr.values**2


def localized_sobolev(u: Field, r: float, region, t: float = 0.0,
                      omega: float = 0.0) -> float:
    """int over the (moving) region of (J^r u)^2, lattice quadrature."""
    if r < 0:
        raise ValueError("Sobolev index must be >= 0")
    mask = region.indicator(u.grid.coordinates, t, omega)
    dens = sobolev_density(u, r)
    return float(u.grid.cell_volume * np.sum(dens[mask]))


def global_sobolev(u: Field, r: float) -> float:
    """Squared global H^r norm by Parseval."""
    uh = _fft.fftn(u.values, workers=fft_workers())
    bracket = (1.0 + u.grid.wavenumber_norm**2) ** (r / 2.0)
    scale = u.grid.cell_volume / u.grid.num_points
    return float(scale * np.sum((bracket * np.abs(uh)) ** 2))


# ---------------------------------------------------------------------------
# Weighted smoothing integrals
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SmoothingIntegralResult:
    gain_term: float          # int_t int (J^(s+a/2) u)^2 d1(phi)
    x1_term: float            # int_t int (d1 J^(s+(a-2)/2) u)^2 d1(phi)
    homogeneous_term: float   # same gain with |2 pi xi|^(s+a/2) multiplier
    times: tuple
    gain_series: tuple
    x1_series: tuple


def _weight_gradient_x1(weight: DirectionalWeight, grid: Grid, t: float,
                        omega: float) -> np.ndarray:
    d1 = weight.partial((1,) + (0,) * (grid.ndim - 1), grid.coordinates, t, omega)
    if np.min(d1) < -1e-12:
        raise ValueError("weight has negative d_x1 phi; profile must be nondecreasing")
    return np.maximum(d1, 0.0)


def smoothing_integral(traj: Trajectory, s: float, alpha: float,
                       weight: DirectionalWeight, omega: float = 0.0,
                       skip_initial: bool = False) -> SmoothingIntegralResult:
    """Accumulated weighted smoothing functionals along a trajectory.

    ``skip_initial`` drops the t = 0 snapshot from the quadrature (used
    for data that is rough at the monitored index at time zero).
    """
    grid = traj.grid
    gain_mult = bessel_potential_multiplier(s + alpha / 2.0)
    x1_mult = bessel_potential_multiplier(s + (alpha - 2.0) / 2.0)
    d1_op = partial_multiplier((1,) + (0,) * (grid.ndim - 1))
    hom_mult = riesz_power_multiplier(s + alpha / 2.0)

    times, gain_series, x1_series, hom_series = [], [], [], []
    for snap in traj.snapshots:
        if skip_initial and snap.t == traj.snapshots[0].t:
            continue
        w1 = _weight_gradient_x1(weight, grid, snap.t, omega)
        g = apply_multiplier(gain_mult, snap.u).values
        x = apply_multiplier(d1_op, apply_multiplier(x1_mult, snap.u)).values
        h = apply_multiplier(hom_mult, snap.u).values
        cell = grid.cell_volume
        times.append(snap.t)
        gain_series.append(cell * float(np.sum(g * g * w1)))
        x1_series.append(cell * float(np.sum(x * x * w1)))
        hom_series.append(cell * float(np.sum(h * h * w1)))
    tarr = np.array(times)
    return SmoothingIntegralResult(
        gain_term=float(np.trapezoid(gain_series, tarr)),
        x1_term=float(np.trapezoid(x1_series, tarr)),
        homogeneous_term=float(np.trapezoid(hom_series, tarr)),
        times=tuple(times),
        gain_series=tuple(gain_series),
        x1_series=tuple(x1_series),
    )


@dataclass(frozen=True)
class SmoothingBoundReport:
    lam: float
    lhs_time_integral: float       # lambda * int_t (gain + x1 densities)
    rhs_surrogate: float
    ratio: float
    sup_grad_l1: float             # ||grad u||_{L^1_T L^inf_x}
    sup_hs: float                  # sup_t ||u||_{H^s}
    details: dict


def smoothing_bound_report(traj: Trajectory, s: float, alpha: float,
                           weight: DirectionalWeight, cone: ConeCondition,
                           r_index: Optional[float] = None,
                           omega: float = 0.0,
                           skip_initial: bool = False) -> SmoothingBoundReport:
    """Measured smoothing inequality sides for an admissible direction.

    The right side is the surrogate
    (1 + T + ||grad u||_{L1_T Linf} + T sup_t ||u||_{H^r})^(1/2) * sup_t ||u||_{H^s};
    only finiteness and refinement stability are meaningful (absolute
    constants are not reproducible).
    """
    cls = check_cone(cone)
    if not cls.admissible:
        raise ValueError(f"inadmissible cone: {cls.reason}")
    lam = smoothing_lambda(cone)
    grid = traj.grid
    if r_index is None:
        r_index = grid.ndim / 2.0 + 0.5

    result = smoothing_integral(traj, s, alpha, weight, omega, skip_initial)

    grad_linf = []
    hs_norms = []
    hr_norms = []
    for snap in traj.snapshots:
        g2 = np.zeros(grid.shape)
        for axis in range(grid.ndim):
            beta = tuple(1 if i == axis else 0 for i in range(grid.ndim))
            g2 += apply_multiplier(partial_multiplier(beta), snap.u).values ** 2
        grad_linf.append(float(np.max(np.sqrt(g2))))
        hs_norms.append(np.sqrt(global_sobolev(snap.u, s)))
        hr_norms.append(np.sqrt(global_sobolev(snap.u, r_index)))
    T = traj.snapshots[-1].t
    grad_l1 = float(np.trapezoid(grad_linf, traj.times))
    sup_hs = float(np.max(hs_norms))
    sup_hr = float(np.max(hr_norms))
    rhs = np.sqrt(1.0 + T + grad_l1 + T * sup_hr) * sup_hs
    lhs = lam * (result.gain_term + result.x1_term)
    return SmoothingBoundReport(
        lam=lam,
        lhs_time_integral=float(lhs),
        rhs_surrogate=float(rhs),
        ratio=float(lhs / rhs) if rhs > 0 else float("inf"),
        sup_grad_l1=grad_l1,
        sup_hs=sup_hs,
        details={
            "gain_term": result.gain_term,
            "x1_term": result.x1_term,
            "homogeneous_term": result.homogeneous_term,
            "case": cls.case,
            "T": T,
        },
    )


# ---------------------------------------------------------------------------
# Propagation monitor
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PropagationMonitorResult:
    sup_half_space: float
    sup_time: float
    channel_integral: float
    times: tuple
    half_space_series: tuple
    channel_series: tuple


def propagation_monitor(traj: Trajectory, r: float, beta: float, eps: float,
                        tau: float, nu: Sequence[float], omega: float,
                        channel_index: Optional[float] = None) -> PropagationMonitorResult:
    """Moving half-space supremum and moving channel time integral.

    The half space is {nu.x > beta + eps - omega t}; the channel is
    {beta + eps - omega t < nu.x < beta + tau - omega t} with the Sobolev
    index ``channel_index`` (defaults to r + 1).
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if tau < 5.0 * eps:
        raise ValueError(f"tau must be >= 5*eps, got tau={tau}, eps={eps}")
    if channel_index is None:
        channel_index = r + 1.0
    grid = traj.grid
    nu = tuple(float(v) for v in nu)
    proj = None
    for v, x in zip(nu, grid.coordinates):
        proj = v * x if proj is None else proj + v * x

    times, half_series, chan_series = [], [], []
    for snap in traj.snapshots:
        moving = proj + omega * snap.t
        half_mask = moving > beta + eps
        chan_mask = (moving > beta + eps) & (moving < beta + tau)
        dens_r = sobolev_density(snap.u, r)
        dens_c = dens_r if channel_index == r else sobolev_density(snap.u, channel_index)
        cell = grid.cell_volume
        times.append(snap.t)
        half_series.append(cell * float(np.sum(dens_r[half_mask])))
        chan_series.append(cell * float(np.sum(dens_c[chan_mask])))
    sup_idx = int(np.argmax(half_series))
    return PropagationMonitorResult(
        sup_half_space=float(half_series[sup_idx]),
        sup_time=float(times[sup_idx]),
        channel_integral=float(np.trapezoid(chan_series, np.array(times))),
        times=tuple(times),
        half_space_series=tuple(half_series),
        channel_series=tuple(chan_series),
    )


# ---------------------------------------------------------------------------
# Record emission: CSV rows + JSON summary
# ---------------------------------------------------------------------------

class DiagnosticWriter:
    """Collects per-snapshot rows and writes deterministic CSV/JSON."""

    def __init__(self, alpha: float, meta: dict):
        self.alpha = alpha
        self.meta = dict(meta)
        self.records: List[DiagnosticRecord] = []
        self._columns: List[str] = []

    def observe(self, t: float, u: Field, localized: Dict[str, float]):
        q = conserved_quantities(u, self.alpha)
        for key in localized:
            if key not in self._columns:
                self._columns.append(key)
        self.records.append(DiagnosticRecord(t, q, dict(localized)))

    def write_csv(self, path):
        cols = (["t", "mean", "mass", "hamiltonian", "hamiltonian_printed"]
                + self._columns)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["# config_hash=" + self.meta.get("config_hash", "")])
            writer.writerow(["# version=" + self.meta.get("version", "")])
            writer.writerow(cols)
            for rec in self.records:
                row = [_fmt(rec.t), _fmt(rec.quantities.mean),
                       _fmt(rec.quantities.mass),
                       _fmt(rec.quantities.hamiltonian),
                       _fmt(rec.quantities.hamiltonian_printed)]
                row += [_fmt(rec.localized.get(c, float("nan")))
                        for c in self._columns]
                writer.writerow(row)

    def write_summary(self, path, extra: Optional[dict] = None):
        payload = {
            "schema_version": 1,
            "meta": self.meta,
            "n_records": len(self.records),
            "final_t": self.records[-1].t if self.records else None,
            "columns": self._columns,
        }
        if self.records:
            first, last = self.records[0], self.records[-1]
            payload["conservation"] = {
                "mean_drift": abs(last.quantities.mean - first.quantities.mean),
                "mass_drift_rel": _rel_drift(first.quantities.mass,
                                             last.quantities.mass),
                "hamiltonian_drift_rel": _rel_drift(
                    first.quantities.hamiltonian, last.quantities.hamiltonian),
                "hamiltonian_printed_drift_rel": _rel_drift(
                    first.quantities.hamiltonian_printed,
                    last.quantities.hamiltonian_printed),
            }
        if extra:
            payload.update(extra)
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _rel_drift(a: float, b: float) -> float:
    return abs(b - a) / max(abs(a), 1e-300)
