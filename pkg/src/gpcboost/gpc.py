"""Generalized predictive control on a CARIMA model with C = 1.

The plant model is ``A y(k) = z^-d B u(k-1) + e(k)/Delta``. Predictions split
into a forced part driven by future control increments (the step-response
matrix ``G``) and a free response built from past outputs (``F_j``) and past
increments (the past-input polynomials ``G'_j``).
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DimensionMismatch, NotMonic, SingularNormalMatrix
from .numerics import DELTA, DiscreteTf, Polynomial


@dataclass(frozen=True)
class GpcConfig:
    horizon_p: int = 13
    horizon_nu: int = 1
    lam: float = 10.0
    delta_w: float = 1.0
    delay_d: int = 0

    def __post_init__(self):
        if not 1 <= self.horizon_nu <= self.horizon_p:
            raise ValueError("need 1 <= horizon_nu <= horizon_p")
        if self.lam < 0:
            raise ValueError("lambda must be non-negative")
        if not self.delta_w > 0:
            raise ValueError("delta_w must be positive")
        if self.delay_d < 0:
            raise ValueError("delay_d must be non-negative")


@dataclass(frozen=True)
class DiophantineTable:
    e: list
    f: list


@dataclass(frozen=True)
class CarimaModel:
    """``a_tilde = Delta*A`` and the input polynomial acting on u(k-1).

    ``shifted`` is True when the discrete numerator had a nonzero leading
    coefficient and was delayed by one extra sample to fit the u(k-1) slot.
    """

    a: Polynomial
    b: Polynomial
    a_tilde: Polynomial
    shifted: bool


@dataclass(frozen=True)
class GpcSynthesis:
    f_polys: list
    gprime_polys: list
    g_matrix: np.ndarray
    config: GpcConfig
    plant: DiscreteTf
    model: CarimaModel
    k_row: np.ndarray | None = None
    step_coeffs: np.ndarray = field(default=None, repr=False)


def carima_model(plant: DiscreteTf, delay_d: int = 0) -> CarimaModel:
    b = plant.b.coeffs
    if b.size > 1 and b[0] == 0.0:
        bpoly = Polynomial(b[1:])
        shifted = False
    elif b.size == 1 and b[0] == 0.0:
        bpoly = Polynomial([0.0])
        shifted = False
    else:
        bpoly = Polynomial(b)
        shifted = True
    if delay_d:
        bpoly = bpoly.shift(delay_d)
    return CarimaModel(a=plant.a, b=bpoly, a_tilde=DELTA * plant.a, shifted=shifted)


def diophantine(a_tilde: Polynomial, p_horizon: int) -> DiophantineTable:
    """Solve ``1 = E_j a_tilde + z^-j F_j`` for j = 1..p_horizon by recursive division."""
    at = np.asarray(a_tilde.coeffs if isinstance(a_tilde, Polynomial) else a_tilde, dtype=float)
    if at[0] != 1.0:
        raise NotMonic(f"a_tilde[0] must be 1, got {at[0]}")
    if p_horizon < 1:
        raise ValueError("p_horizon must be >= 1")
    n = at.size - 1
    f = -at[1:].copy() if n else np.zeros(1)
    e = [1.0]
    es, fs = [], []
    for j in range(1, p_horizon + 1):
        es.append(Polynomial(e))
        fs.append(Polynomial(f))
        # next step of the long division 1 / a_tilde
        lead = f[0]
        e = e + [lead]
        if n:
            nxt = np.zeros(n)
            nxt[: n - 1] = f[1:]
            nxt -= lead * at[1:]
            f = nxt
    return DiophantineTable(e=es, f=fs)


def prediction_matrices(plant: DiscreteTf, table: DiophantineTable, cfg: GpcConfig,
                        model: CarimaModel | None = None) -> GpcSynthesis:
    """Step-response matrix and free-response polynomials; gain left unset."""
    p, nu = cfg.horizon_p, cfg.horizon_nu
    if len(table.e) < p or len(table.f) < p:
        raise DimensionMismatch(f"Diophantine table has {len(table.e)} rows, need {p}")
    if model is None:
        model = carima_model(plant, cfg.delay_d)
    b = model.b.coeffs
    g = np.zeros(p)
    gprime = []
    for j in range(1, p + 1):
        gj = np.convolve(table.e[j - 1].coeffs, b)
        gj = np.concatenate([gj, np.zeros(max(0, j - gj.size))])
        g[j - 1] = gj[j - 1]
        gprime.append(gj[j:].copy())
    width = max((x.size for x in gprime), default=0)
    gprime = [np.concatenate([x, np.zeros(width - x.size)]) for x in gprime]
    gm = np.zeros((p, nu))
    for col in range(nu):
        gm[col:, col] = g[: p - col]
    return GpcSynthesis(
        f_polys=list(table.f[:p]),
        gprime_polys=gprime,
        g_matrix=gm,
        config=cfg,
        plant=plant,
        model=model,
        step_coeffs=g,
    )


def gain(syn: GpcSynthesis, cfg: GpcConfig | None = None) -> GpcSynthesis:
    """First row of ``(delta G^T G + lambda I)^-1 delta G^T``."""
    cfg = cfg or syn.config
    G = syn.g_matrix
    nu = G.shape[1]
    normal = cfg.delta_w * G.T @ G + cfg.lam * np.eye(nu)
    if nu == 1:
        den = float(normal[0, 0])
        if abs(den) <= 1e-300:
            raise SingularNormalMatrix("delta*g'g + lambda is zero")
        k = cfg.delta_w * G[:, 0] / den
    else:
        if np.linalg.cond(normal) > 1e14:
            raise SingularNormalMatrix(f"normal matrix condition number {np.linalg.cond(normal):.3e}")
        k = np.linalg.solve(normal, cfg.delta_w * G.T)[0]
    return replace(syn, k_row=np.asarray(k, dtype=float), config=cfg)


def synthesize(plant: DiscreteTf, cfg: GpcConfig) -> GpcSynthesis:
    model = carima_model(plant, cfg.delay_d)
    table = diophantine(model.a_tilde, cfg.horizon_p)
    return gain(prediction_matrices(plant, table, cfg, model), cfg)


@dataclass(frozen=True)
class ControllerState:
    """Controller memory; histories are ordered newest first.

    Between steps ``y_history`` holds y(k-1), y(k-2), ... (one sample per
    F_j coefficient) and ``du_history`` holds du(k-1), du(k-2), ...
    """

    u_prev: float
    du_history: np.ndarray
    y_history: np.ndarray
    u_min: float = -np.inf
    u_max: float = np.inf

    @classmethod
    def at_rest(cls, syn: GpcSynthesis, u: float, y: float,
                u_min: float = -np.inf, u_max: float = np.inf) -> "ControllerState":
        nd = syn.gprime_polys[0].size if syn.gprime_polys else 0
        ny = max(len(f) for f in syn.f_polys)
        return cls(u_prev=float(u), du_history=np.zeros(nd), y_history=np.full(ny, float(y)),
                   u_min=u_min, u_max=u_max)

    def resized(self, syn: GpcSynthesis) -> "ControllerState":
        """Truncate or zero-pad the histories to fit another synthesis."""
        nd = syn.gprime_polys[0].size if syn.gprime_polys else 0
        ny = max(len(f) for f in syn.f_polys)
        du = np.zeros(nd)
        du[: min(nd, self.du_history.size)] = self.du_history[:nd]
        y = np.zeros(ny)
        y[: min(ny, self.y_history.size)] = self.y_history[:ny]
        return replace(self, du_history=du, y_history=y)


def free_response(syn: GpcSynthesis, y_hist: np.ndarray, du_hist: np.ndarray) -> np.ndarray:
    """Predicted outputs over the horizon with all future increments zero.

    ``y_hist`` starts with the current sample y(k).
    """
    f = np.empty(len(syn.f_polys))
    for j, (fj, gpj) in enumerate(zip(syn.f_polys, syn.gprime_polys)):
        c = fj.coeffs
        f[j] = c @ y_hist[: c.size] + gpj @ du_hist[: gpj.size]
    return f


def control_step(syn: GpcSynthesis, st: ControllerState, y_meas: float,
                 w_ref: float) -> tuple[float, ControllerState]:
    # y(k) .. y(k-n_a)
    y_hist = np.concatenate([[y_meas], st.y_history[:-1]])
    f = free_response(syn, y_hist, st.du_history)
    du = float(syn.k_row @ (w_ref - f))
    u = min(max(st.u_prev + du, st.u_min), st.u_max)
    du = u - st.u_prev
    du_hist = np.concatenate([[du], st.du_history[:-1]]) if st.du_history.size else st.du_history
    return u, replace(st, u_prev=u, du_history=du_hist, y_history=y_hist)
