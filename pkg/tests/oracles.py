"""Independent reference computations shared by the test modules."""
import mpmath as mp
import numpy as np

from gpcboost import ControllerState, control_step


def linear_closed_loop(syn, n=2000, y0=1e-3, limit=1e6):
    """Run control_step against the linear plant b/a in deviation variables.

    Returns the output sequence, cut short once |y| exceeds ``limit``.
    The plant recursion uses the discrete model directly, not the RST form.
    """
    a = syn.plant.a.coeffs
    b = syn.model.b.coeffs  # acts on u(k-1), u(k-2), ...
    st = ControllerState.at_rest(syn, 0.0, 0.0)
    ys = np.zeros(n)
    us = np.zeros(n)
    ys[0] = y0
    for k in range(n):
        if k:
            acc = 0.0
            for i in range(1, a.size):
                if k - i >= 0:
                    acc -= a[i] * ys[k - i]
            for i in range(b.size):
                if k - 1 - i >= 0:
                    acc += b[i] * us[k - 1 - i]
            ys[k] = acc
        us[k], st = control_step(syn, st, ys[k], 0.0)
        if abs(ys[k]) > limit:
            return ys[: k + 1]
    return ys


def diverges(ys, y0=1e-3):
    tail = np.abs(ys[-200:])
    return bool(np.max(tail) > 10 * y0)


def golden_section(f, tol=mp.mpf("1e-25")):
    """Golden-section minimizer of a convex function in multiprecision arithmetic.

    The bracket [-h, h] is doubled until both ends cost at least f(0).
    """
    with mp.workdps(50):
        f0 = f(mp.mpf(0))
        h = mp.mpf(1)
        while f(h) < f0 or f(-h) < f0:
            h *= 2
        invphi = (mp.sqrt(5) - 1) / 2
        a, b = -h, h
        c = b - invphi * (b - a)
        d = a + invphi * (b - a)
        fc, fd = f(c), f(d)
        while b - a > tol:
            if fc < fd:
                b, d, fd = d, c, fc
                c = b - invphi * (b - a)
                fc = f(c)
            else:
                a, c, fc = c, d, fd
                d = a + invphi * (b - a)
                fd = f(d)
        return (a + b) / 2


def gpc_cost(g, f, w, lam, delta):
    """Quadratic prediction cost over a single future increment, in mpmath."""
    g = [mp.mpf(float(x)) for x in g]
    f = [mp.mpf(float(x)) for x in f]
    w = mp.mpf(float(w))
    lam, delta = mp.mpf(float(lam)), mp.mpf(float(delta))

    def cost(du):
        return delta * mp.fsum((gj * du + fj - w) ** 2 for gj, fj in zip(g, f)) + lam * du**2

    return cost
