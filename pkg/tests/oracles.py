"""Independent oracles used to pin expected values.

Closed forms are verified symbolically against the rotationally symmetric
soliton equations before their Taylor coefficients are trusted; the sphere
curvature oracle recomputes Ricci from coordinate Christoffel symbols by
finite differences, with no Lie-algebra input.
"""
from fractions import Fraction

import numpy as np
import sympy as sp

t = sp.symbols("t", positive=True)


def verify_warped_soliton(f, u, eps, n_orbit):
    """Check Ric + Hess u + (eps/2) g = 0 for dt^2 + f(t)^2 g_round.

    g_round is the unit round metric on an n_orbit-sphere (flat circle for
    n_orbit = 1).  Returns the two residuals (radial, orbital) simplified;
    both must be zero.
    """
    fp, fpp = sp.diff(f, t), sp.diff(f, t, 2)
    up, upp = sp.diff(u, t), sp.diff(u, t, 2)
    n = n_orbit
    ric_rad = -n * fpp / f
    ric_orb = -fpp * f - (n - 1) * fp ** 2 + (n - 1)  # coefficient of g_round
    # Hess u: radial upp; orbital f f' u'
    res_rad = sp.simplify(ric_rad + upp + sp.Rational(1, 2) * eps)
    res_orb = sp.simplify(ric_orb + f * fp * up + sp.Rational(1, 2) * eps * f ** 2)
    return res_rad, res_orb


def verify_first_integral(f, u, eps, n_orbit):
    """Check the scalar conservation law for the warped closed form."""
    up = sp.diff(u, t)
    upp = sp.diff(u, t, 2)
    uppp = sp.diff(u, t, 3)
    trL = n_orbit * sp.diff(f, t) / f
    trLdot = sp.diff(trL, t)
    return sp.simplify(uppp + trL * upp + trLdot * up - 2 * upp * up - eps * up)


def taylor_fractions(expr, order):
    """Exact rational Taylor coefficients of expr through t^order."""
    ser = sp.series(expr, t, 0, order + 1).removeO()
    poly = sp.Poly(sp.expand(ser), t)
    out = []
    for e in range(order + 1):
        c = poly.coeff_monomial(t ** e)
        out.append(Fraction(int(sp.fraction(c)[0]), int(sp.fraction(c)[1])))
    return out


def cigar_profiles(order=12):
    """x = (tanh t / t)^2 and u = -2 log cosh t, certified then expanded."""
    f = sp.tanh(t)
    u = -2 * sp.log(sp.cosh(t))
    res = verify_warped_soliton(f, u, 0, 1)
    assert res == (0, 0), f"cigar closed form fails the equations: {res}"
    assert verify_first_integral(f, u, 0, 1) == 0
    x_expr = (f / t) ** 2
    return taylor_fractions(x_expr, order), taylor_fractions(u, order)


def sine_cone_profiles(n, order=12):
    """x = (sin t / t)^2 with u = 0 and eps = -2n, certified then expanded."""
    f = sp.sin(t)
    u = sp.Integer(0)
    res = verify_warped_soliton(f, u, -2 * n, n)
    assert res == (0, 0), f"sine cone closed form fails the equations: {res}"
    x_expr = (f / t) ** 2
    return taylor_fractions(x_expr, order)


def gaussian_certificate(eps, k):
    """f = t, u = -eps t^2 / 4 solves the equations for every sphere size."""
    f = t
    u = -sp.Rational(1, 4) * eps * t ** 2
    return verify_warped_soliton(f, u, eps, k)


def cigar_state(tv):
    """Exact state (x, y, u, udot, uddot) of the cigar at time tv (floats)."""
    f = sp.tanh(t)
    x = (f / t) ** 2
    y = sp.diff(x, t) / 2
    u = -2 * sp.log(sp.cosh(t))
    vals = [x, y, u, sp.diff(u, t), sp.diff(u, t, 2)]
    return [float(v.subs(t, tv)) for v in vals]


def cigar_state_rates(tv):
    """(xdot, ydot, u3) of the cigar closed form at time tv."""
    f = sp.tanh(t)
    x = (f / t) ** 2
    y = sp.diff(x, t) / 2
    u = -2 * sp.log(sp.cosh(t))
    vals = [sp.diff(x, t), sp.diff(y, t), sp.diff(u, t, 3)]
    return [float(v.subs(t, tv)) for v in vals]


def sine_cone_state(tv):
    f = sp.sin(t)
    x = (f / t) ** 2
    y = sp.diff(x, t) / 2
    return [float(x.subs(t, tv)), float(y.subs(t, tv)), 0.0, 0.0, 0.0]


def sine_cone_state_rates(tv):
    f = sp.sin(t)
    x = (f / t) ** 2
    y = sp.diff(x, t) / 2
    return [float(sp.diff(x, t).subs(t, tv)), float(sp.diff(y, t).subs(t, tv)), 0.0]


# ---------------------------------------------------------------------------
# coordinate-chart curvature oracle (no Lie theory)


def _stereographic_metric(n):
    def g(xi):
        s = 1.0 + float(np.dot(xi, xi))
        return (4.0 / s ** 2) * np.eye(n)

    return g


def ricci_by_christoffel(gfun, xi, h=1e-4):
    """Ricci tensor of a coordinate metric at a point by finite differences."""
    n = len(xi)

    def christoffel(p):
        g = gfun(p)
        ginv = np.linalg.inv(g)
        dg = np.zeros((n, n, n))  # dg[l, i, j] = d_l g_ij
        for l in range(n):
            e = np.zeros(n)
            e[l] = h
            dg[l] = (gfun(p + e) - gfun(p - e)) / (2 * h)
        gam = np.zeros((n, n, n))  # gam[k, i, j]
        for k_ in range(n):
            for i in range(n):
                for j in range(n):
                    acc = 0.0
                    for l in range(n):
                        acc += ginv[k_, l] * (dg[i, j, l] + dg[j, i, l] - dg[l, i, j])
                    gam[k_, i, j] = 0.5 * acc
        return gam

    gam0 = christoffel(xi)
    dgam = np.zeros((n, n, n, n))  # dgam[l, k, i, j]
    for l in range(n):
        e = np.zeros(n)
        e[l] = h
        dgam[l] = (christoffel(xi + e) - christoffel(xi - e)) / (2 * h)
    ric = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            acc = 0.0
            for k_ in range(n):
                acc += dgam[k_, k_, i, j] - dgam[i, k_, k_, j]
                for l in range(n):
                    acc += gam0[k_, k_, l] * gam0[l, i, j] \
                        - gam0[k_, i, l] * gam0[l, k_, j]
            ric[i, j] = acc
    return ric


def unit_sphere_einstein_constant(n, point_scale=0.3, h=1e-4):
    """Ric / g of the unit n-sphere from the chart oracle (expect n - 1)."""
    gfun = _stereographic_metric(n)
    xi = point_scale * np.ones(n) / np.sqrt(n)
    ric = ricci_by_christoffel(gfun, xi, h=h)
    g = gfun(xi)
    ratios = ric[np.abs(g) > 1e-12] / g[np.abs(g) > 1e-12]
    return float(np.mean(ratios)), float(np.max(np.abs(ric - (n - 1) * g)))
