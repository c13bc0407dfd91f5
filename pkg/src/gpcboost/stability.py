"""Closed-loop pole analysis of the GPC loop and prediction-horizon design.

With the control law written in RST form ``R du = T w - S y`` where

    R(z^-1) = 1 + z^-1 * sum_j k_j G'_j(z^-1)
    S(z^-1) = sum_j k_j F_j(z^-1)

the loop closed around the CARIMA model has characteristic polynomial
``Delta A R + z^-1 B S``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import CornerDominanceViolated, GpcBoostError, NoStableHorizon
from .gpc import GpcConfig, GpcSynthesis, synthesize
from .numerics import DiscreteTf, Polynomial, poly_roots
from .plant import ConverterParams, discrete_plant


@dataclass(frozen=True)
class StabilityReport:
    char_poly: Polynomial
    order: int
    poles: np.ndarray
    max_modulus: float
    stable: bool
    margin: float = 0.0


@dataclass(frozen=True)
class SweepRecord:
    horizon_p: int
    lam: float
    r: float
    vo_ref: float
    max_modulus: float = float("nan")
    stable: bool | None = None
    poles: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=complex), repr=False)
    error: str | None = None


def rst_polynomials(syn: GpcSynthesis) -> tuple[Polynomial, Polynomial]:
    k = syn.k_row
    if k is None:
        raise ValueError("synthesis has no gain; call gpc.gain first")
    width = syn.gprime_polys[0].size if syn.gprime_polys else 0
    r = np.zeros(width + 1)
    r[0] = 1.0
    for kj, gp in zip(k, syn.gprime_polys):
        r[1:] += kj * gp
    ns = max(len(f) for f in syn.f_polys)
    s = np.zeros(ns)
    for kj, fj in zip(k, syn.f_polys):
        s[: len(fj)] += kj * fj.coeffs
    return Polynomial(r), Polynomial(s)


def _charpoly_parts(syn: GpcSynthesis):
    r, s = rst_polynomials(syn)
    m = syn.model
    return m.a_tilde * r, (m.b * s).shift(1)


def structural_order(syn: GpcSynthesis) -> int:
    """Degree in z of the characteristic polynomial before cancellation.

    The top coefficient cancels identically, which leaves the pole at the
    origin; trimming would otherwise drop it.
    """
    m = syn.model
    width = syn.gprime_polys[0].size if syn.gprime_polys else 0
    ns = max(len(f) for f in syn.f_polys) - 1
    return max(m.a_tilde.degree + width, 1 + m.b.degree + ns)


def closed_loop_charpoly(plant: DiscreteTf, syn: GpcSynthesis) -> Polynomial:
    left, right = _charpoly_parts(syn)
    return left + right


def assess(plant: DiscreteTf, syn: GpcSynthesis, margin: float = 0.0) -> StabilityReport:
    if margin < 0:
        raise ValueError("margin must be non-negative")
    cp = closed_loop_charpoly(plant, syn)
    order = max(structural_order(syn), cp.degree)
    poles = poly_roots(cp, order=order)
    mm = float(np.max(np.abs(poles))) if poles.size else 0.0
    return StabilityReport(char_poly=cp, order=order, poles=poles, max_modulus=mm,
                           stable=mm < 1.0 - margin, margin=margin)


def evaluate(params: ConverterParams, cfg: GpcConfig, method: str = "zoh",
             margin: float = 0.0, gain: str = "linearized") -> StabilityReport:
    """Synthesize the controller for ``params`` and assess the closed loop."""
    plant = discrete_plant(params, method, gain)
    return assess(plant, synthesize(plant, cfg), margin)


def _cfg(lam, base: GpcConfig | None, p: int) -> GpcConfig:
    base = base or GpcConfig()
    return GpcConfig(horizon_p=p, horizon_nu=min(base.horizon_nu, p), lam=lam,
                     delta_w=base.delta_w, delay_d=base.delay_d)


def horizon_scan(params: ConverterParams, lam: float, p_max: int, method: str = "zoh",
                 margin: float = 0.0, base: GpcConfig | None = None, stop_at_first=True,
                 gain: str = "linearized"):
    """Yield ``(P, report)`` for P = 1, 2, ... up to the first stable P or ``p_max``."""
    plant = discrete_plant(params, method, gain)
    for p in range(1, p_max + 1):
        rep = assess(plant, synthesize(plant, _cfg(lam, base, p)), margin)
        yield p, rep
        if stop_at_first and rep.stable:
            return


def min_horizon(params: ConverterParams, lam: float = 10.0, p_max: int = 40,
                method: str = "zoh", margin: float = 0.0, base: GpcConfig | None = None,
                gain: str = "linearized") -> int:
    """Smallest stabilizing prediction horizon, scanning P upward from 1."""
    if p_max < 1:
        raise ValueError("p_max must be >= 1")
    for p, rep in horizon_scan(params, lam, p_max, method, margin, base, gain=gain):
        if rep.stable:
            return p
    raise NoStableHorizon(f"no stable horizon for P <= {p_max} "
                          f"(R={params.r} ohm, vo_ref={params.vo_ref} V, lambda={lam})")


def robust_horizon(params: ConverterParams, r_range, vref_range, lam: float = 10.0,
                   p_max: int = 40, method: str = "zoh", margin: float = 0.0,
                   base: GpcConfig | None = None, gain: str = "linearized") -> int:
    """Design the horizon at the (min load, max reference) corner and check the others."""
    r_min, r_max = sorted(r_range)
    v_min, v_max = sorted(vref_range)
    worst = params.replace(r=r_min, vo_ref=v_max)
    p = min_horizon(worst, lam, p_max, method, margin, base, gain)
    failing = []
    for r, v in itertools.product(sorted({r_min, r_max}), sorted({v_min, v_max})):
        rep = evaluate(params.replace(r=r, vo_ref=v), _cfg(lam, base, p), method, margin, gain)
        if not rep.stable:
            failing.append((r, v, rep.max_modulus))
    if failing:
        raise CornerDominanceViolated(
            f"P={p} leaves corners unstable: {failing}", horizon=p, failing=failing)
    return p


def _axis(values, default):
    if values is None:
        return [default]
    vals = [float(v) for v in values]
    if not vals:
        raise ValueError("grid axes must be nonempty")
    if any(b <= a for a, b in zip(vals, vals[1:])):
        raise ValueError("grid axes must be strictly increasing")
    return vals


def sweep(params: ConverterParams, grid: dict, method: str = "zoh", margin: float = 0.0,
          base: GpcConfig | None = None, gain: str = "linearized") -> list[SweepRecord]:
    """Assess every point of the Cartesian grid over ``P``, ``lambda``, ``R`` and ``vref``.

    Missing axes are pinned to the values in ``params`` and ``base``. Failures
    at a grid point are stored in the record's ``error`` field.
    """
    base = base or GpcConfig()
    unknown = set(grid) - {"P", "lambda", "R", "vref"}
    if unknown:
        raise ValueError(f"unknown grid axes: {sorted(unknown)}")
    ps = [int(p) for p in _axis(grid.get("P"), base.horizon_p)]
    lams = _axis(grid.get("lambda"), base.lam)
    rs = _axis(grid.get("R"), params.r)
    vs = _axis(grid.get("vref"), params.vo_ref)
    out = []
    for p, lam, r, v in itertools.product(ps, lams, rs, vs):
        try:
            rep = evaluate(params.replace(r=r, vo_ref=v), _cfg(lam, base, p), method, margin, gain)
        except (GpcBoostError, ValueError, np.linalg.LinAlgError) as exc:
            out.append(SweepRecord(p, lam, r, v, error=f"{type(exc).__name__}: {exc}"))
            continue
        out.append(SweepRecord(p, lam, r, v, rep.max_modulus, rep.stable, rep.poles))
    return out
