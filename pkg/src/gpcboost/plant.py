"""Boost-converter model: parameters, operating point, small-signal and averaged dynamics."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from .errors import NotBoostable
from .numerics import ContinuousTf, DiscreteTf, tustin, zoh

METHODS = ("zoh", "tustin")


@dataclass(frozen=True)
class ConverterParams:
    """Physical converter parameters (SI units) plus duty-cycle limits.

    The defaults are the 50 V to 70 V, 15 mH / 470 uF, 66 ohm, 10 kHz design.
    """

    vg: float = 50.0
    vo_ref: float = 70.0
    l: float = 15e-3
    c: float = 470e-6
    r: float = 66.0
    fs: float = 10e3
    duty_min: float = 0.1
    duty_max: float = 0.9

    def __post_init__(self):
        for name in ("vg", "l", "c", "r", "fs"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive, got {v!r}")
        if not math.isfinite(self.vo_ref):
            raise ValueError("vo_ref must be finite")
        if self.vo_ref <= self.vg:
            raise NotBoostable(
                f"NotBoostable: vo_ref={self.vo_ref} V must exceed vg={self.vg} V"
            )
        if not (0.0 <= self.duty_min < self.duty_max <= 1.0):
            raise ValueError("duty limits must satisfy 0 <= duty_min < duty_max <= 1")

    @property
    def ts(self) -> float:
        return 1.0 / self.fs

    def replace(self, **changes) -> "ConverterParams":
        d = asdict(self)
        d.update(changes)
        return ConverterParams(**d)


@dataclass(frozen=True)
class OperatingPoint:
    d: float
    il: float
    vo: float


@dataclass(frozen=True)
class ConverterState:
    il: float
    vo: float


def operating_point(p: ConverterParams) -> OperatingPoint:
    if p.vo_ref <= p.vg:
        raise NotBoostable(f"NotBoostable: vo_ref={p.vo_ref} V must exceed vg={p.vg} V")
    d = 1.0 - p.vg / p.vo_ref
    il = p.vo_ref / ((1.0 - d) * p.r)
    return OperatingPoint(d=d, il=il, vo=p.vo_ref)


GAIN_CONVENTIONS = ("linearized", "printed")


def continuous_tf(p: ConverterParams, gain: str = "linearized") -> ContinuousTf:
    """Duty-to-output-voltage small-signal transfer function at the operating point.

    Has a right-half-plane zero at s = (1-D)^2 R / L. With ``gain="linearized"``
    the DC gain is Vg/(1-D)^2, the slope of the steady-state map Vg/(1-d) and
    hence consistent with :func:`nonlinear_derivatives`. ``gain="printed"``
    uses Vg/(1-D) instead; the two differ only by a constant factor.
    """
    d = operating_point(p).d
    m = 1.0 - d
    if gain == "linearized":
        k = p.vg / (m * m)
    elif gain == "printed":
        k = p.vg / m
    else:
        raise ValueError(f"unknown gain convention {gain!r}; expected one of {GAIN_CONVENTIONS}")
    tau_z = p.l / (m * m * p.r)
    a2 = p.l * p.c / (m * m)
    return ContinuousTf(num=(k, -k * tau_z), den=(1.0, tau_z, a2))


def discrete_plant(p: ConverterParams, method: str = "zoh", gain: str = "linearized") -> DiscreteTf:
    ct = continuous_tf(p, gain)
    if method == "zoh":
        return zoh(ct, p.ts)
    if method == "tustin":
        return tustin(ct, p.ts)
    raise ValueError(f"unknown discretization method {method!r}; expected one of {METHODS}")


def nonlinear_derivatives(x: ConverterState, d: float, p: ConverterParams) -> tuple[float, float]:
    """Averaged large-signal dynamics (inductor current, output voltage)."""
    if not 0.0 <= d <= 1.0:
        raise ValueError(f"duty must lie in [0, 1], got {d}")
    off = 1.0 - d
    dil = (p.vg - off * x.vo) / p.l
    dvo = off * x.il / p.c - x.vo / (p.c * p.r)
    return dil, dvo
