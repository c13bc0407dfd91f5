"""Acceptance criteria, one marked test (or group of tests) per criterion.

Run ``pytest tests/test_acceptance.py`` and read the "acceptance criteria"
section of the terminal summary for one PASS/FAIL line per criterion.
"""
import time

import mpmath as mp
import numpy as np
import pytest
from oracles import golden_section, gpc_cost

from gpcboost import (
    ControllerState,
    ConverterParams,
    DiscreteTf,
    GpcConfig,
    Polynomial,
    control_step,
    diophantine,
    discrete_plant,
    evaluate,
    min_horizon,
    robust_horizon,
    synthesize,
)
from gpcboost.cli import Config
from gpcboost.gpc import carima_model, free_response
from gpcboost.numerics import DELTA
from gpcboost.sim import Event, Scenario, metrics, simulate

NOMINAL = ConverterParams()
DEFAULT_METHOD = Config().discretization
NUDGE = -1e-3  # initial vo deficit, see README "Simulation start"


def crit(n, title):
    return pytest.mark.criterion(n, title)


def complex_pair(poles):
    return bool(np.any(np.abs(np.imag(poles)) > 1e-9))


# 1

@crit(1, "nominal horizon boundary P_min = 13 under the default discretization, < 5 s")
def test_c1_nominal_boundary(record_property):
    found = {}
    for method in ("zoh", "tustin"):
        t0 = time.perf_counter()
        found[method] = min_horizon(NOMINAL, lam=10, p_max=40, method=method)
        found[method + "_s"] = time.perf_counter() - t0
    record_property("detail", f"zoh={found['zoh']} tustin={found['tustin']} "
                              f"default={DEFAULT_METHOD} ({found[DEFAULT_METHOD + '_s']:.3f} s)")
    assert found[DEFAULT_METHOD] == 13
    assert found[DEFAULT_METHOD + "_s"] < 5


# 2

@crit(2, "worst-case corner R=40, vo_ref=90: robust/min horizon = 16, < 5 s")
def test_c2_worst_case_boundary(record_property):
    t0 = time.perf_counter()
    corner = min_horizon(NOMINAL.replace(r=40, vo_ref=90), lam=10, p_max=60, method=DEFAULT_METHOD)
    robust = robust_horizon(NOMINAL, (40, 70), (60, 90), lam=10, p_max=60, method=DEFAULT_METHOD)
    dt = time.perf_counter() - t0
    at16 = evaluate(NOMINAL.replace(r=40, vo_ref=90), GpcConfig(16), DEFAULT_METHOD)
    record_property("detail", f"min_horizon={corner} robust_horizon={robust} "
                              f"max|z| at P=16 is {at16.max_modulus:.4f} ({dt:.3f} s)")
    assert dt < 5
    assert corner == 16 and robust == 16


# 3

@crit(3, "lambda-insensitivity: P=13 nominal stable for lambda = 2..10")
def test_c3_lambda_insensitivity(record_property):
    mods = {lam: evaluate(NOMINAL, GpcConfig(13, lam=lam), DEFAULT_METHOD).max_modulus
            for lam in range(2, 11)}
    record_property("detail", "max|z| " + " ".join(f"{k}:{v:.4f}" for k, v in mods.items()))
    assert all(m < 1 for m in mods.values())


# 4

@crit(4, "max pole modulus at P=13 strictly increases as R falls and as vo_ref rises")
@pytest.mark.parametrize("axis", ["R", "vref"])
def test_c4_trends(axis, record_property):
    if axis == "R":
        values = [70, 60, 50, 40]
        mods = [evaluate(NOMINAL.replace(r=r), GpcConfig(13), DEFAULT_METHOD).max_modulus
                for r in values]
    else:
        values = [60, 70, 80, 90]
        mods = [evaluate(NOMINAL.replace(vo_ref=v), GpcConfig(13), DEFAULT_METHOD).max_modulus
                for v in values]
    record_property("detail", " ".join(f"{v}:{m:.4f}" for v, m in zip(values, mods)))
    assert all(b > a for a, b in zip(mods, mods[1:]))


# 5

NOMINAL_GRID = [(p, 10) for p in range(11, 16)] + [(13, lam) for lam in range(2, 11)]


@crit(5, "every stable nominal grid point has an origin root and a complex-conjugate pair")
def test_c5_structural_poles(record_property):
    missing_origin, missing_pair, stable = [], [], 0
    for p, lam in NOMINAL_GRID:
        rep = evaluate(NOMINAL, GpcConfig(p, lam=lam), DEFAULT_METHOD)
        if not rep.stable:
            continue
        stable += 1
        if np.min(np.abs(rep.poles)) >= 1e-6:
            missing_origin.append((p, lam))
        if not complex_pair(rep.poles):
            missing_pair.append((p, lam))
    record_property("detail", f"{stable} stable points; no origin root at {missing_origin}; "
                              f"no complex pair at (P, lambda) = {missing_pair}")
    assert not missing_origin and not missing_pair


# 6

def diophantine_residual(at, p):
    tab = diophantine(at, p)
    worst = 0.0
    for j in range(1, p + 1):
        lhs = np.convolve(tab.e[j - 1].coeffs, at.coeffs)
        rhs = np.concatenate([np.zeros(j), tab.f[j - 1].coeffs])
        n = max(lhs.size, rhs.size)
        total = np.pad(lhs, (0, n - lhs.size)) + np.pad(rhs, (0, n - rhs.size))
        total[0] -= 1
        worst = max(worst, float(np.max(np.abs(total))))
    return worst


@crit(6, "Diophantine identity < 1e-10 for j = 1..20, nominal and 100 random monic A~, < 10 s")
def test_c6_diophantine_identity(record_property):
    t0 = time.perf_counter()
    worst_table = max(diophantine_residual(carima_model(discrete_plant(NOMINAL, m)).a_tilde, 20)
                      for m in ("zoh", "tustin"))
    rng = np.random.default_rng(2024)
    worst_rand = 0.0
    for _ in range(100):
        deg = int(rng.integers(1, 5))
        a = Polynomial(np.poly(rng.uniform(-0.95, 0.95, deg)))
        worst_rand = max(worst_rand, diophantine_residual(DELTA * a, 20))
    dt = time.perf_counter() - t0
    record_property("detail", f"nominal {worst_table:.2e}, random {worst_rand:.2e} ({dt:.2f} s)")
    assert worst_table < 1e-10 and worst_rand < 1e-10
    assert dt < 10


# 7

@crit(7, "control_step matches a 1-D minimizer of the prediction cost within 1e-8 (100 cases)")
def test_c7_cost_minimization(record_property):
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(100):
        poles = rng.uniform(-0.95, 0.95, int(rng.integers(1, 4)))
        b = np.concatenate([[0.0], rng.normal(size=int(rng.integers(1, 4)))])
        plant = DiscreteTf(Polynomial(b), Polynomial(np.poly(poles)), 1.0)
        cfg = GpcConfig(int(rng.integers(1, 21)), lam=float(rng.uniform(0, 20)),
                        delta_w=float(rng.uniform(0.2, 2)))
        syn = synthesize(plant, cfg)
        st = ControllerState.at_rest(syn, float(rng.uniform(-1, 1)), 0.0)
        st = st.__class__(st.u_prev, rng.normal(size=st.du_history.size),
                          rng.normal(size=st.y_history.size), st.u_min, st.u_max)
        y = float(rng.normal())
        w = float(rng.normal())
        u, _ = control_step(syn, st, y, w)
        du = u - st.u_prev
        y_hist = np.concatenate([[y], st.y_history[:-1]])
        f = free_response(syn, y_hist, st.du_history)
        best = golden_section(gpc_cost(syn.step_coeffs, f, w, cfg.lam, cfg.delta_w))
        worst = max(worst, abs(du - float(best)))
    record_property("detail", f"max |du - du_min| = {worst:.2e}")
    assert worst < 1e-8


# 8

def horizon_run(p, duration=0.2):
    return simulate(NOMINAL, GpcConfig(p), Scenario(duration, initial_vo_offset=NUDGE),
                    DEFAULT_METHOD)


@crit(8, "nonlinear-sim instability verdict equals pole verdict for P = 11..20, < 60 s")
def test_c8_pole_time_agreement(record_property):
    t0 = time.perf_counter()
    rows = []
    for p in range(11, 21):
        pole_stable = evaluate(NOMINAL, GpcConfig(p), DEFAULT_METHOD).stable
        tr = horizon_run(p)
        m = metrics(tr, 70.0, t_start=0.0)
        rows.append((p, pole_stable, m.unstable, tr))
    dt = time.perf_counter() - t0
    mismatched = [p for p, s, u, _ in rows if s == u]
    tr12 = rows[1][3]
    tr13 = rows[2][3]
    tail13 = tr13.vo[tr13.t >= tr13.t[-1] - 20e-3]
    record_property("detail", f"mismatches {mismatched}; P=12 final duty {tr12.duty[-1]:.3f}; "
                              f"P=13 tail |vo-70| <= {np.max(np.abs(tail13 - 70)):.2e} V "
                              f"({dt:.1f} s)")
    assert not mismatched
    assert tr12.duty[-1] == pytest.approx(0.1) and metrics(tr12, 70.0, t_start=0.0).unstable
    assert np.all(np.abs(tail13 - 70) <= 0.02 * 70)
    assert dt < 60


# 9

def horizon_step(p0, p1):
    scn = Scenario(0.5, events=(Event(0.1, "set_horizon", p1),), initial_vo_offset=NUDGE)
    tr = simulate(NOMINAL, GpcConfig(p0), scn, DEFAULT_METHOD)
    before = metrics(tr, 70.0, t_start=0.0, t_end=0.1)
    after = metrics(tr, 70.0, t_start=0.1)
    return before, after


@crit(9, "scenario reproduction: horizon steps, load step, reference steps (averaged model)")
def test_c9_horizon_11_to_14(record_property):
    before, after = horizon_step(11, 14)
    record_property("detail", f"before unstable={before.unstable}; after unstable={after.unstable}"
                              f" sse={after.steady_state_error:.3g} V")
    assert before.unstable and not after.unstable
    assert after.steady_state_error <= 0.02 * 70


@crit(9, "scenario reproduction: horizon steps, load step, reference steps (averaged model)")
def test_c9_horizon_14_to_11(record_property):
    before, after = horizon_step(14, 11)
    record_property("detail", f"before unstable={before.unstable}; after unstable={after.unstable}")
    assert not before.unstable and after.unstable


@crit(9, "scenario reproduction: horizon steps, load step, reference steps (averaged model)")
def test_c9_load_step(record_property):
    scn = Scenario(0.5, events=(Event(0.1, "set_load_current", 1.5),), initial_load=70.0)
    tr = simulate(NOMINAL, GpcConfig(16), scn, DEFAULT_METHOD)
    m = metrics(tr, 70.0)
    record_property("detail", f"unstable={m.unstable} overshoot={m.overshoot:.3g} V "
                              f"sse={m.steady_state_error:.3g} V")
    assert not m.unstable
    assert 2 <= m.overshoot <= 8


@crit(9, "scenario reproduction: horizon steps, load step, reference steps (averaged model)")
def test_c9_reference_steps(record_property):
    scn = Scenario(0.7, events=(Event(0.1, "set_ref", 90.0), Event(0.4, "set_ref", 60.0)),
                   initial_ref=60.0)
    tr = simulate(NOMINAL, GpcConfig(16), scn, DEFAULT_METHOD)
    up = metrics(tr, 90.0, t_start=0.1, t_end=0.4)
    down = metrics(tr, 60.0, t_start=0.4)
    record_property("detail", f"60->90 unstable={up.unstable} sse={up.steady_state_error:.3g} V; "
                              f"90->60 unstable={down.unstable} "
                              f"sse={down.steady_state_error:.3g} V")
    assert not up.unstable and not down.unstable
    assert up.steady_state_error <= 0.02 * 90
    assert down.steady_state_error <= 0.02 * 60


# 10

@crit(10, "hardware execution times and the explicit-MPC comparison (excluded)")
def test_c10_excluded():
    pytest.skip("hardware-specific timings; replaced by the property suites of criteria 6 and 7")
