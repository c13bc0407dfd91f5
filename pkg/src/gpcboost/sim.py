"""Closed-loop time-domain simulation of the boost converter under GPC.

The controller runs once per switching period ``Ts = 1/fs``: it samples the
output voltage, computes a duty cycle and holds it for the whole period.
Between samples the converter is integrated with fixed-step RK4, either on
the averaged model or on the two switch states of a sawtooth PWM.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import NumericalBlowup
from .gpc import ControllerState, GpcConfig, control_step, synthesize
from .plant import ConverterParams, discrete_plant, operating_point

EVENT_KINDS = ("set_horizon", "set_load", "set_load_current", "set_ref")
# whether the controller's linear model is re-derived at the new operating point
RESYNTH_DEFAULT = {"set_horizon": True, "set_load": False, "set_load_current": False, "set_ref": True}
BLOWUP_LIMIT = 1e6


@dataclass(frozen=True)
class Event:
    time: float
    kind: str
    value: float
    resynthesize: bool | None = None

    def __post_init__(self):
        if self.kind not in EVENT_KINDS:
            raise ValueError(f"unknown event kind {self.kind!r}; expected one of {EVENT_KINDS}")
        if not math.isfinite(self.value) or self.value <= 0:
            raise ValueError(f"event value must be positive, got {self.value!r}")
        if self.kind == "set_horizon" and int(self.value) != self.value:
            raise ValueError("set_horizon needs an integer horizon")


@dataclass(frozen=True)
class Scenario:
    duration: float
    events: tuple = ()
    initial: str = "equilibrium"
    model: str = "averaged"
    substeps: int = 10
    initial_ref: float | None = None
    initial_load: float | None = None
    initial_vo_offset: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.duration) and self.duration > 0):
            raise ValueError("scenario duration must be positive")
        if self.initial not in ("equilibrium", "zero_state"):
            raise ValueError(f"initial must be 'equilibrium' or 'zero_state', got {self.initial!r}")
        if self.model not in ("averaged", "switched"):
            raise ValueError(f"model must be 'averaged' or 'switched', got {self.model!r}")
        if int(self.substeps) != self.substeps or self.substeps < 1:
            raise ValueError("substeps must be a positive integer")
        events = tuple(e if isinstance(e, Event) else Event(**e) for e in self.events)
        times = [e.time for e in events]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("event times must be strictly increasing")
        if times and (times[0] < 0 or times[-1] >= self.duration):
            raise ValueError("event times must lie in [0, duration)")
        object.__setattr__(self, "events", events)


@dataclass
class SimTrace:
    t: np.ndarray
    il: np.ndarray
    vo: np.ndarray
    duty: np.ndarray
    ref: np.ndarray
    event_times: list = field(default_factory=list)
    floor_clamped: int = 0
    notes: list = field(default_factory=list)

    def __len__(self):
        return self.t.size


@dataclass(frozen=True)
class SimMetrics:
    steady_state_error: float
    overshoot: float
    settling_time_2pct: float
    unstable: bool
    duty_railed_fraction: float


def _rk4(il, vo, d, p_vg, l, c, r, h, n):
    off = 1.0 - d
    cr = c * r
    for _ in range(n):
        k1i = (p_vg - off * vo) / l
        k1v = off * il / c - vo / cr
        i2, v2 = il + 0.5 * h * k1i, vo + 0.5 * h * k1v
        k2i = (p_vg - off * v2) / l
        k2v = off * i2 / c - v2 / cr
        i3, v3 = il + 0.5 * h * k2i, vo + 0.5 * h * k2v
        k3i = (p_vg - off * v3) / l
        k3v = off * i3 / c - v3 / cr
        i4, v4 = il + h * k3i, vo + h * k3v
        k4i = (p_vg - off * v4) / l
        k4v = off * i4 / c - v4 / cr
        il += h / 6.0 * (k1i + 2 * k2i + 2 * k3i + k4i)
        vo += h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)
    return il, vo


def simulate(params: ConverterParams, cfg: GpcConfig, scn: Scenario, method: str = "zoh",
             gain: str = "linearized") -> SimTrace:
    ts = params.ts
    ref = scn.initial_ref if scn.initial_ref is not None else params.vo_ref
    load = scn.initial_load if scn.initial_load is not None else params.r
    model_params = params.replace(vo_ref=ref, r=load)
    syn = synthesize(discrete_plant(model_params, method, gain), cfg)
    op = operating_point(model_params)
    if scn.initial == "equilibrium":
        il, vo = op.il, op.vo + scn.initial_vo_offset
        ctrl = ControllerState.at_rest(syn, op.d, op.vo, params.duty_min, params.duty_max)
    else:
        il, vo = 0.0, scn.initial_vo_offset
        ctrl = ControllerState.at_rest(syn, 0.0, 0.0, params.duty_min, params.duty_max)
    floor = 0
    if vo < 0.0:
        vo = 0.0
        floor += 1

    n = int(round(scn.duration / ts))
    t_arr = np.arange(n) * ts
    out = {k: np.empty(n) for k in ("il", "vo", "duty", "ref")}
    notes = []
    if syn.model.shifted:
        notes.append("tustin numerator delayed one sample to fit the u(k-1) model slot")
    pending = list(scn.events)
    applied = []
    h = ts / scn.substeps

    def truncated(k):
        return SimTrace(t_arr[:k], *(out[x][:k] for x in ("il", "vo", "duty", "ref")),
                        event_times=applied, floor_clamped=floor, notes=notes)

    for k in range(n):
        t = t_arr[k]
        while pending and pending[0].time <= t + 1e-12 * ts:
            ev = pending.pop(0)
            applied.append(ev.time)
            resynth = RESYNTH_DEFAULT[ev.kind] if ev.resynthesize is None else ev.resynthesize
            if ev.kind == "set_horizon":
                p = int(ev.value)
                cfg = replace(cfg, horizon_p=p, horizon_nu=min(cfg.horizon_nu, p))
            elif ev.kind == "set_ref":
                ref = ev.value
                if resynth:
                    model_params = model_params.replace(vo_ref=ref)
            else:
                if ev.kind == "set_load_current":
                    load = ref / ev.value
                    notes.append(f"t={ev.time:g}s: load current {ev.value:g} A mapped to "
                                 f"R = vo_ref/I = {load:.9g} ohm")
                else:
                    load = ev.value
                if resynth:
                    model_params = model_params.replace(r=load)
            if resynth:
                syn = synthesize(discrete_plant(model_params, method, gain), cfg)
                ctrl = ctrl.resized(syn)

        d, ctrl = control_step(syn, ctrl, vo, ref)
        out["il"][k], out["vo"][k], out["duty"][k], out["ref"][k] = il, vo, d, ref

        if scn.model == "averaged":
            il, vo = _rk4(il, vo, d, params.vg, params.l, params.c, load, h, scn.substeps)
        else:
            t_on = d * ts
            if t_on > 0:
                il, vo = _rk4(il, vo, 1.0, params.vg, params.l, params.c, load,
                              t_on / scn.substeps, scn.substeps)
            if ts - t_on > 0:
                il, vo = _rk4(il, vo, 0.0, params.vg, params.l, params.c, load,
                              (ts - t_on) / scn.substeps, scn.substeps)
        if vo < 0.0:
            vo = 0.0
            floor += 1
        if not (abs(il) < BLOWUP_LIMIT and abs(vo) < BLOWUP_LIMIT):
            raise NumericalBlowup(f"state left |x| < {BLOWUP_LIMIT:g} at t={t + ts:.6g}s",
                                  trace=truncated(k + 1))
    return truncated(n)


def _runs(mask):
    """(start, stop) index pairs of consecutive True runs."""
    runs, start = [], None
    for i, m in enumerate(mask):
        if m and start is None:
            start = i
        elif not m and start is not None:
            runs.append((start, i))
            start = None
    if start is not None:
        runs.append((start, len(mask)))
    return runs


def metrics(trace: SimTrace, ref_final: float, t_start: float | None = None,
            t_end: float | None = None, duty_limits=(0.1, 0.9),
            final_window: float = 20e-3) -> SimMetrics:
    """Tracking and stability figures over ``[t_start, t_end)``.

    ``t_start`` defaults to the last event time (or the trace start).
    The loop is declared unstable when the output stays more than 50 % of the
    reference away from it for over 20 ms, or when the duty sits on a limit
    for more than 50 consecutive periods while the error does not shrink.
    """
    if len(trace) == 0:
        raise ValueError("empty trace")
    if t_start is None:
        t_start = trace.event_times[-1] if trace.event_times else float(trace.t[0])
    if t_end is None:
        t_end = np.inf
    sel = (trace.t >= t_start - 1e-12) & (trace.t < t_end)
    t, vo, duty, ref = trace.t[sel], trace.vo[sel], trace.duty[sel], trace.ref[sel]
    if t.size == 0:
        raise ValueError("metrics window contains no samples")
    dt = float(trace.t[1] - trace.t[0]) if len(trace) > 1 else 0.0

    tail = t >= t[-1] - final_window + 0.5 * dt
    sse = abs(float(np.mean(vo[tail])) - ref_final)

    dev = vo - ref_final
    band = 0.02 * abs(ref_final)
    if abs(dev[0]) <= band:
        overshoot = float(np.max(np.abs(dev)))
    elif dev[0] < 0:
        overshoot = max(0.0, float(np.max(dev)))
    else:
        overshoot = max(0.0, float(-np.min(dev)))

    outside = np.flatnonzero(np.abs(dev) > band)
    if outside.size == 0:
        settling = 0.0
    elif outside[-1] == dev.size - 1:
        settling = math.inf
    else:
        settling = float(t[outside[-1] + 1] - t[0])

    err = np.abs(vo - ref)
    unstable = False
    for a, b in _runs(err > 0.5 * np.abs(ref)):
        if (b - a) * dt > 20e-3:
            unstable = True
    lo, hi = duty_limits
    railed = (np.abs(duty - lo) < 1e-12) | (np.abs(duty - hi) < 1e-12)
    for mask in (np.abs(duty - lo) < 1e-12, np.abs(duty - hi) < 1e-12):
        for a, b in _runs(mask):
            if b - a > 50 and err[b - 1] >= err[a]:
                unstable = True
    return SimMetrics(steady_state_error=sse, overshoot=overshoot, settling_time_2pct=settling,
                      unstable=unstable, duty_railed_fraction=float(np.mean(railed)))
