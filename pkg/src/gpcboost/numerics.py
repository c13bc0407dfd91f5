"""Polynomial algebra in the delay operator z^-1, root finding and s-to-z transforms.

Polynomials are stored in ascending powers of z^-1::

    c[0] + c[1] z^-1 + ... + c[n] z^-n

Conversion to positive powers of z only happens inside :func:`poly_roots`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    ConvergenceFailure,
    DegenerateDenominator,
    UnsupportedPoleStructure,
    ZeroPolynomial,
)

TRIM_TOL = 1e-12
ROOT_RESIDUAL_TOL = 1e-8

__all__ = [
    "Polynomial",
    "ContinuousTf",
    "DiscreteTf",
    "poly_mul",
    "poly_roots",
    "tustin",
    "zoh",
    "impulse_coeffs",
    "DELTA",
]


def _trim(c: np.ndarray, tol: float) -> np.ndarray:
    scale = np.max(np.abs(c)) if c.size else 0.0
    if scale == 0.0:
        return np.zeros(1)
    n = c.size
    while n > 1 and (c[n - 1] == 0.0 or abs(c[n - 1]) < tol * scale):
        n -= 1
    return c[:n].copy()


class Polynomial:
    """Real polynomial in z^-1 with trailing-coefficient trimming.

    Trailing coefficients smaller than ``trim`` times the largest coefficient
    are dropped; the zero polynomial is ``[0.0]``.
    """

    __slots__ = ("_c",)

    def __init__(self, coeffs: Sequence[float] | np.ndarray | float, trim: float = TRIM_TOL):
        c = np.atleast_1d(np.asarray(coeffs, dtype=float)).ravel()
        if not np.all(np.isfinite(c)):
            raise ValueError("polynomial coefficients must be finite")
        c = _trim(c, trim)
        c.setflags(write=False)
        self._c = c

    @property
    def coeffs(self) -> np.ndarray:
        return self._c

    @property
    def degree(self) -> int:
        return self._c.size - 1

    def is_zero(self) -> bool:
        return self._c.size == 1 and self._c[0] == 0.0

    def __len__(self):
        return self._c.size

    def __getitem__(self, i):
        return self._c[i]

    def __iter__(self):
        return iter(self._c)

    def __repr__(self):
        return f"Polynomial({np.array2string(self._c, precision=6, separator=', ')})"

    def __call__(self, z):
        """Evaluate at a point of the z-plane (not at z^-1)."""
        z = np.asarray(z, dtype=complex)
        w = 1.0 / z
        acc = np.zeros_like(w)
        for c in self._c[::-1]:
            acc = acc * w + c
        return acc if acc.ndim else complex(acc)

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self._c.size == other._c.size and bool(np.all(self._c == other._c))

    def __hash__(self):
        return hash(self._c.tobytes())

    def allclose(self, other: "Polynomial", atol: float = 1e-12) -> bool:
        other = _as_poly(other)
        n = max(len(self), len(other))
        return bool(np.allclose(_pad(self._c, n), _pad(other._c, n), rtol=0.0, atol=atol))

    def __add__(self, other):
        other = _as_poly(other)
        n = max(len(self), len(other))
        return Polynomial(_pad(self._c, n) + _pad(other._c, n))

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(-self._c)

    def __sub__(self, other):
        return self + (-_as_poly(other))

    def __rsub__(self, other):
        return _as_poly(other) - self

    def __mul__(self, other):
        if np.isscalar(other):
            return Polynomial(self._c * float(other))
        return poly_mul(self, _as_poly(other))

    __rmul__ = __mul__

    def shift(self, k: int = 1) -> "Polynomial":
        """Multiply by z^-k."""
        if k < 0:
            raise ValueError("shift must be non-negative")
        if self.is_zero():
            return self
        return Polynomial(np.concatenate([np.zeros(k), self._c]))

    def to_list(self) -> list[float]:
        return [float(x) for x in self._c]


def _pad(c: np.ndarray, n: int) -> np.ndarray:
    out = np.zeros(n)
    out[: c.size] = c
    return out


def _as_poly(x) -> Polynomial:
    return x if isinstance(x, Polynomial) else Polynomial(x)


#: The differencing operator 1 - z^-1.
DELTA = Polynomial([1.0, -1.0])


def poly_mul(p: Polynomial, q: Polynomial) -> Polynomial:
    return Polynomial(np.convolve(_as_poly(p).coeffs, _as_poly(q).coeffs))


def _horner_z(c: np.ndarray, r: complex) -> complex:
    acc = 0j
    for x in c:
        acc = acc * r + x
    return acc


def poly_roots(p: Polynomial, order: int | None = None) -> np.ndarray:
    """Roots in the z-plane of a polynomial given in z^-1.

    The polynomial is rewritten as ``z**order * p(z^-1)``; ``order`` defaults
    to ``p.degree``. Passing a larger ``order`` restores roots at the origin
    whose (structurally zero) trailing coefficients were trimmed away.
    Leading zero coefficients in z^-1 correspond to roots at infinity and are
    dropped.
    """
    p = _as_poly(p)
    if p.is_zero():
        raise ZeroPolynomial("cannot take roots of the zero polynomial")
    n = p.degree
    if order is None:
        order = n
    if order < n:
        raise ValueError(f"order {order} is below the polynomial degree {n}")

    c = p.coeffs / np.max(np.abs(p.coeffs))
    nz = np.flatnonzero(c)
    c = c[nz[0]:]  # z-form coefficients, descending powers of z
    m = c.size - 1
    roots = np.zeros(0, dtype=complex)
    if m > 0:
        comp = np.zeros((m, m))
        comp[0, :] = -c[1:] / c[0]
        comp[1:, :-1] = np.eye(m - 1)
        try:
            roots = np.linalg.eigvals(comp).astype(complex)
        except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
            raise ConvergenceFailure(str(exc)) from exc
        dc = c[:-1] * np.arange(m, 0, -1)
        for i, r in enumerate(roots):
            res = _horner_z(c, r)
            for _ in range(3):
                if abs(res) < 1e-3 * ROOT_RESIDUAL_TOL:
                    break
                d = _horner_z(dc, r)
                if d == 0:
                    break
                cand = r - res / d
                cres = _horner_z(c, cand)
                if abs(cres) >= abs(res):
                    break
                r, res = cand, cres
            if abs(res) >= ROOT_RESIDUAL_TOL:
                raise ConvergenceFailure(f"root {r} has residual {abs(res):.3e}")
            roots[i] = r
    if order > n:
        roots = np.concatenate([roots, np.zeros(order - n, dtype=complex)])
    return roots


@dataclass(frozen=True)
class ContinuousTf:
    """Rational function of s; coefficients in ascending powers of s."""

    num: tuple
    den: tuple

    def __post_init__(self):
        num = np.trim_zeros(np.atleast_1d(np.asarray(self.num, dtype=float)), "b")
        den = np.trim_zeros(np.atleast_1d(np.asarray(self.den, dtype=float)), "b")
        if den.size == 0:
            raise DegenerateDenominator("denominator is identically zero")
        if num.size == 0:
            num = np.zeros(1)
        if num.size > den.size:
            raise ValueError("transfer function must be proper (deg num <= deg den)")
        object.__setattr__(self, "num", tuple(float(x) for x in num))
        object.__setattr__(self, "den", tuple(float(x) for x in den))

    def __call__(self, s):
        s = np.asarray(s, dtype=complex)
        return np.polyval(self.num[::-1], s) / np.polyval(self.den[::-1], s)

    def poles(self) -> np.ndarray:
        return np.roots(self.den[::-1]) if len(self.den) > 1 else np.zeros(0)

    def zeros(self) -> np.ndarray:
        return np.roots(self.num[::-1]) if len(self.num) > 1 else np.zeros(0)


@dataclass(frozen=True)
class DiscreteTf:
    """b(z^-1)/a(z^-1), normalized so that a[0] == 1."""

    b: Polynomial
    a: Polynomial
    sample_time: float
    method: str = field(default="", compare=False)

    def __post_init__(self):
        b, a = _as_poly(self.b), _as_poly(self.a)
        if not self.sample_time > 0:
            raise ValueError("sample_time must be positive")
        if a.is_zero() or a[0] == 0.0:
            raise DegenerateDenominator("denominator has zero leading coefficient")
        a0 = a[0]
        object.__setattr__(self, "b", Polynomial(b.coeffs / a0))
        object.__setattr__(self, "a", Polynomial(a.coeffs / a0))

    def dc_gain(self) -> float:
        return float(np.sum(self.b.coeffs) / np.sum(self.a.coeffs))

    def poles(self) -> np.ndarray:
        return poly_roots(self.a) if self.a.degree > 0 else np.zeros(0, dtype=complex)

    def step(self, n: int) -> np.ndarray:
        """First ``n`` samples of the unit-step response, starting at k = 0."""
        return np.cumsum(impulse_coeffs(self, n))


def tustin(ct: ContinuousTf, Ts: float) -> DiscreteTf:
    """Bilinear transform, substituting s = (2/Ts)(1 - z^-1)/(1 + z^-1)."""
    if not Ts > 0:
        raise ValueError("Ts must be positive")
    n = len(ct.den) - 1
    k = 2.0 / Ts
    minus, plus = np.array([1.0, -1.0]), np.array([1.0, 1.0])

    def substitute(coeffs):
        out = np.zeros(n + 1)
        for i, ci in enumerate(coeffs):
            if ci == 0.0:
                continue
            term = np.array([ci * k**i])
            for _ in range(i):
                term = np.convolve(term, minus)
            for _ in range(n - i):
                term = np.convolve(term, plus)
            out += term
        return out

    b = substitute(ct.num)
    a = substitute(ct.den)
    if not np.any(a) or abs(a[0]) < TRIM_TOL * np.max(np.abs(a)):
        raise DegenerateDenominator("bilinear substitution annihilates the denominator")
    return DiscreteTf(Polynomial(b), Polynomial(a), Ts, method="tustin")


def zoh(ct: ContinuousTf, Ts: float) -> DiscreteTf:
    """Step-invariant (zero-order hold) equivalent via partial fractions.

    Supports simple nonzero poles and at most one pole at s = 0.
    """
    if not Ts > 0:
        raise ValueError("Ts must be positive")
    num = np.asarray(ct.num)
    den = np.asarray(ct.den)
    m0 = int(np.argmax(den != 0.0))  # integrators in G(s)
    if m0 > 1:
        raise UnsupportedPoleStructure("more than one pole at the origin")
    d1 = den[m0:]
    poles = np.roots(d1[::-1]) if d1.size > 1 else np.zeros(0, dtype=complex)
    if poles.size:
        scale = max(1.0, float(np.max(np.abs(poles))))
        if np.any(np.abs(poles) < 1e-9 * scale):
            raise UnsupportedPoleStructure("pole numerically at the origin")
        for i in range(poles.size):
            for j in range(i + 1, poles.size):
                if abs(poles[i] - poles[j]) < 1e-6 * scale:
                    raise UnsupportedPoleStructure("repeated poles are not supported")

    def pv(c, s):
        return np.polyval(c[::-1], s)

    def dpv(c, s):
        return np.polyval(np.polyder(c[::-1]), s) if c.size > 1 else 0.0

    # G(s) = d + rho0/s + sum rho_i/(s - p_i); each term discretized on its own.
    # rho/(s - p) -> rho*Ts*phi1(p*Ts) z^-1/(1 - e^(p*Ts) z^-1), phi1(x) = expm1(x)/x,
    # which avoids the cancellation of the G(s)/s form when p*Ts is small
    feed = num[-1] / den[-1] if num.size == den.size else 0.0
    resid = np.array([pv(num, p) / (p**m0 * dpv(d1, p)) for p in poles], dtype=complex)
    x = poles * Ts
    gains = resid * Ts * np.expm1(x) / x

    q = np.exp(x)
    factors = [np.array([1.0, -qi]) for qi in q]
    integ = np.array([1.0, -1.0])

    def prod(polys):
        out = np.array([1.0 + 0j])
        for f in polys:
            out = np.convolve(out, f)
        return out

    def delayed(c):
        return np.concatenate([[0.0], c])

    den_z = prod(factors + ([integ] if m0 else []))
    num_z = feed * den_z
    if m0:
        num_z = _cadd(num_z, delayed(num[0] / d1[0] * Ts * prod(factors)))
    for i, g in enumerate(gains):
        others = [f for j, f in enumerate(factors) if j != i]
        num_z = _cadd(num_z, delayed(g * prod(others + ([integ] if m0 else []))))

    for arr in (num_z, den_z):
        mag = max(1.0, float(np.max(np.abs(arr))))
        if np.max(np.abs(arr.imag)) > 1e-8 * mag:
            raise UnsupportedPoleStructure("partial fractions did not produce a real result")
    b = num_z.real.copy()
    if len(ct.num) < len(ct.den):
        b[0] = 0.0  # strictly proper: exact one-sample delay
    return DiscreteTf(Polynomial(b), Polynomial(den_z.real), Ts, method="zoh")


def _cadd(x, y):
    n = max(x.size, y.size)
    out = np.zeros(n, dtype=complex)
    out[: x.size] += x
    out[: y.size] += y
    return out


def impulse_coeffs(tf: DiscreteTf, n: int) -> np.ndarray:
    """First ``n`` coefficients of the power series b(z^-1)/a(z^-1)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    b, a = tf.b.coeffs, tf.a.coeffs
    h = np.zeros(n)
    for k in range(n):
        acc = b[k] if k < b.size else 0.0
        for i in range(1, min(k, a.size - 1) + 1):
            acc -= a[i] * h[k - i]
        h[k] = acc / a[0]
    return h
