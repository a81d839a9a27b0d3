"""Order-by-order power-series solution of the singular initial value problem.

The metric coefficient x(t) and potential u(t) are expanded at the singular
time t = 0.  At step m the Taylor coefficient equations reduce to a linear
solve against the order-m operator; the right-hand side is extracted by
evaluating the full equations in truncated series arithmetic with the unknown
coefficient set to zero, so no closed-form expansion is ever transcribed by
hand.  The series validity horizons double as a dependency audit: reading a
coefficient the current partial jet cannot support raises immediately.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import (
    ConsistencyViolated,
    DataError,
    InitialConditionViolated,
    ParityViolated,
)
from .geometry import Block, DiagonalTensor, casimir_spectrum
from .series import ScalarSeries, TensorSeries, dr_sing_matrix, ricci_series

CONSISTENCY_TOL = 1e-8
PARITY_TOL = 1e-9
KERNEL_SVD_TOL = 1e-9


# ---------------------------------------------------------------------------
# initial data


@dataclass
class InitialData:
    """Data of the singular-orbit problem: soliton constant, shape operator,
    second potential derivative, and kernel injections per order.

    tr(L1) = 0 is required at ingestion (the singular orbit is minimal) and
    L1 must be supported on the minus block.
    """

    epsilon: float
    L1: DiagonalTensor
    u2: float
    kernel_params: dict = field(default_factory=dict)
    order: int = 12
    u0: float = 0.0
    exact: bool = False

    def __post_init__(self):
        geom = self.L1.geometry
        scale = max(1.0, float(np.max(np.abs(self.L1.values.astype(float)))))
        plus_mass = float(np.max(np.abs(
            self.L1.plus_part().values.astype(float)))) if geom.n_summands else 0.0
        if plus_mass > 1e-14 * scale:
            raise DataError("L1 must vanish on the plus block")
        tr = float(self.L1.trace())
        if abs(tr) > 1e-12 * scale:
            raise DataError(
                f"tr(L1) = {tr:.3e} != 0: the singular orbit must be minimal"
            )
        if self.order < 2:
            raise DataError("series order must be >= 2")
        if self.exact:
            self.epsilon = _as_fraction(self.epsilon)
            self.u2 = _as_fraction(self.u2)
            self.u0 = _as_fraction(self.u0)
            vals = np.array([_as_fraction(v) for v in self.L1.values], dtype=object)
            self.L1 = DiagonalTensor(vals, geom)


def _as_fraction(v):
    if isinstance(v, Fraction):
        return v
    return Fraction(v).limit_denominator(10 ** 12)


# ---------------------------------------------------------------------------
# operators


@dataclass
class OperatorMatrix:
    """Order-m linear operator of the recursion on summand coordinates."""

    m: int
    matrix: np.ndarray
    geometry: object

    def apply(self, xi):
        return DiagonalTensor(self.matrix @ xi.values.astype(float), self.geometry)


def _model_dr_matrix(spec):
    """Scalar-model derivative of r_sing: closed plus formula, diagonal Casimir.

    Used for summand-table skeletons without a bracket tensor.  On geometries
    where the Casimir acts scalarly per summand and the plus block is a single
    scalar, this equals the exact matrix.
    """
    q = spec.n_summands
    k = spec.k
    dims = spec.dims
    dr = np.zeros((q, q))
    lam = casimir_spectrum(spec)
    for pos, i in enumerate(spec.minus_ids):
        dr[i, i] = 0.5 * lam[pos]
    for i in spec.plus_ids:
        for j in spec.plus_ids:
            dr[i, j] = (k + 1) * (1.0 if i == j else 0.0) - 2.0 * dims[j]
    return dr


def operator_dr_matrix(spec):
    """Derivative of r_sing at the identity used to build the operators.

    Exact series linearization when a bracket tensor is available; the
    scalar-model closed form for declared-Casimir skeletons.
    """
    if spec.has_brackets:
        return dr_sing_matrix(spec)
    return _model_dr_matrix(spec)


def build_Lm(spec, m):
    """Order-m operator: (m+1)I - 2/(m+2) dA - d_y B in summand coordinates.

    dA equals the derivative of r_sing at the identity; the B-derivative
    contributes k I plus the trace coupling into the plus block.
    """
    q = spec.n_summands
    k = spec.k
    dr = operator_dr_matrix(spec)
    L = (m + 1 + k) * np.eye(q) - (2.0 / (m + 2)) * dr
    for i in spec.plus_ids:
        L[i, :] += spec.dims  # +tr(xi) on each plus row
    return OperatorMatrix(m, L, spec)


def build_Lm_model(spec, m):
    """Order-m operator of the scalar-coordinate model (closed formulas only)."""
    q = spec.n_summands
    k = spec.k
    dr = _model_dr_matrix(spec)
    L = (m + 1 + k) * np.eye(q) - (2.0 / (m + 2)) * dr
    for i in spec.plus_ids:
        L[i, :] += spec.dims
    return OperatorMatrix(m, L, spec)


def build_Ltilde(k, m, exact=False):
    """Order-m scalar operator of the potential recursion: (m+1) - k/(m+2) + k."""
    if exact:
        return Fraction(m + 1) + k - Fraction(k, m + 2)
    return (m + 1) - k / (m + 2) + k


def singular_coefficient_A(spec, x):
    """A(x) = (1-k) x_+ + x r_sing(x), assembled from the Laurent extraction."""
    from .series import r_sing_of

    rs = r_sing_of(spec, x)
    return x.plus_part() * float(1 - spec.k) + x * rs


def shear_term_B(spec, x, y, udot=0.0):
    """B(x, y) = -k y - tr(x^-1 y) x_+ + udot x_+ (pointwise definition)."""
    k = spec.k
    return y * float(-k) + x.plus_part() * (
        -float((x.inverse() * y).trace()) + float(udot)
    )


def finite_difference_Lm(spec, m, b=None, h=1e-6):
    """Operator rebuilt from its defining form with numerical derivatives.

    dA is differenced through the Laurent-extracted A at the identity, the
    y-derivative of B at (I, b); the result must agree with build_Lm to the
    differencing accuracy.  Serves as the independent cross-validation of the
    closed construction.
    """
    q = spec.n_summands
    ident = DiagonalTensor.identity(spec)
    if b is None:
        b = DiagonalTensor.zero(spec)
    dA = np.zeros((q, q))
    dB = np.zeros((q, q))
    for j in range(q):
        e = DiagonalTensor(np.eye(q)[j], spec)
        ap = singular_coefficient_A(spec, ident + e * h)
        am = singular_coefficient_A(spec, ident + e * (-h))
        dA[:, j] = (ap.values - am.values) / (2 * h)
        bp = shear_term_B(spec, ident, b + e * h)
        bm = shear_term_B(spec, ident, b + e * (-h))
        dB[:, j] = (bp.values - bm.values) / (2 * h)
    L = (m + 1) * np.eye(q) - (2.0 / (m + 2)) * dA - dB
    return OperatorMatrix(m, L, spec)


def kernel_basis(spec, m):
    """Orthonormal kernel basis of the order-m operator (weighted by dims).

    Singular values below 1e-9 of the largest are treated as zero.  The basis
    is canonicalized: directions supported purely on the plus block come
    first, the remainder is completed orthogonally in the weighted metric,
    and signs are fixed deterministically.
    """
    L = build_Lm(spec, m).matrix
    d = spec.dims.astype(float)
    W = np.sqrt(d)
    # kernel in the weighted metric: substitute v = w / sqrt(d)
    Mw = L / W[None, :]
    U, S, Vt = np.linalg.svd(Mw)
    if S.size == 0:
        return []
    thresh = KERNEL_SVD_TOL * max(S[0], 1.0)
    null_w = [Vt[i] for i in range(len(S)) if S[i] <= thresh]
    if not null_w:
        return []
    K = np.array(null_w).T  # weighted-orthonormal columns spanning the kernel
    minus_mask = spec.block_mask(Block.MINUS)
    ordered = []
    if minus_mask.any() and K.shape[1]:
        # combinations with zero minus part: null space of the minus rows
        Km = K[minus_mask]
        _, Sm, Vm = np.linalg.svd(Km) if Km.size else (None, np.array([]), None)
        tol = KERNEL_SVD_TOL * max(Sm[0], 1.0) if Sm.size else 0.0
        rank = int(np.sum(Sm > tol))
        pure = [K @ Vm[i] for i in range(rank, K.shape[1])] if Sm.size else []
        rest = [K @ Vm[i] for i in range(rank)] if Sm.size else [K[:, i] for i in range(K.shape[1])]
        ordered = pure + rest
    else:
        ordered = [K[:, i] for i in range(K.shape[1])]
    vecs = []
    for w in ordered:
        v = w / W
        nrm = np.sqrt(np.sum(d * v * v))
        if nrm < 1e-14:
            continue
        v = v / nrm
        j = int(np.argmax(np.abs(v)))
        if v[j] < 0:
            v = -v
        vecs.append(v)
    return [DiagonalTensor(v, spec) for v in vecs]


# ---------------------------------------------------------------------------
# series assembly of the two equations


def _one(exact):
    return Fraction(1) if exact else 1.0


def _num(v, exact):
    return _as_fraction(v) if exact else float(v)


def x_equation_rhs(spec, epsilon, x, u, order, exact=False):
    """Laurent series of the metric-equation right-hand side (the ydot law).

    All terms are assembled from series arithmetic; the Ricci endomorphism
    enters through its full Laurent expansion, never a transcribed split.
    """
    one = _one(exact)
    half = one / 2
    k = spec.k
    eps = _num(epsilon, exact)
    tm1 = ScalarSeries.monomial(-1, one)
    tm2 = ScalarSeries.monomial(-2, one)

    y = x.derivative() * half
    xinv = x.inverse(to=order + 4)
    r = ricci_series(spec, x, order, check_parity=False)
    trxy = (xinv * y).trace()
    udot = u.derivative()
    xplus = x.plus_part()

    rhs = xplus * (tm2 * (one * (1 - k)))
    rhs = rhs + y * (tm1 * (-k * one))
    rhs = rhs + xplus * (trxy * tm1) * (-one)
    rhs = rhs + xplus * (udot * tm1)
    rhs = rhs + (y * xinv * y) * (2 * one)
    rhs = rhs + x * r
    rhs = rhs + y * trxy * (-one)
    rhs = rhs + y * udot
    rhs = rhs + x * (eps * half)
    return rhs


def u_equation_rhs(spec, epsilon, x, u, ydot, order, exact=False):
    """Laurent series of the third-derivative law for the potential."""
    one = _one(exact)
    half = one / 2
    k = spec.k
    eps = _num(epsilon, exact)
    tm1 = ScalarSeries.monomial(-1, one)
    tm2 = ScalarSeries.monomial(-2, one)

    y = x.derivative() * half
    xinv = x.inverse(to=order + 4)
    udot = u.derivative()
    uddot = udot.derivative()
    trxy = (xinv * y).trace()
    trxyxy = ((xinv * y) * (xinv * y)).trace()
    tr_xinv_ydot = (xinv * ydot).trace()

    rhs = (tm1 * (-k * one)) * uddot
    rhs = rhs + trxy * uddot * (-one)
    rhs = rhs + (tm2 * (k * one)) * udot
    rhs = rhs + trxyxy * udot * (2 * one)
    rhs = rhs + tr_xinv_ydot * udot * (-one)
    rhs = rhs + uddot * udot * (2 * one)
    rhs = rhs + udot * (eps * one)
    return rhs


# ---------------------------------------------------------------------------
# initial-condition check


@dataclass
class InitialConditionReport:
    a_at_identity: float
    da_b_plus_B: float
    a_tilde_at_zero: float
    da_tilde_plus_B_tilde: float
    tol: float = 1e-8

    @property
    def passed(self):
        return all(
            v <= self.tol
            for v in (
                self.a_at_identity,
                self.da_b_plus_B,
                self.a_tilde_at_zero,
                self.da_tilde_plus_B_tilde,
            )
        )

    def __str__(self):
        return (
            f"|A(I)|            = {self.a_at_identity:.3e}\n"
            f"|2(dA)b + B(I,b)| = {self.da_b_plus_B:.3e}\n"
            f"|At(0)|           = {self.a_tilde_at_zero:.3e}\n"
            f"|dAt u2 + Bt|     = {self.da_tilde_plus_B_tilde:.3e}\n"
            f"result            = {'PASS' if self.passed else 'FAIL'}"
        )


def _seed_series(spec, data):
    exact = data.exact
    one = _one(exact)
    ident = DiagonalTensor.identity(spec, exact=exact)
    b = data.L1 if not exact else data.L1
    x = TensorSeries.from_jet(spec, [ident, b * (2 * one)], valid_to=1)
    half = one / 2
    u = ScalarSeries.taylor([data.u0, 0 * one, data.u2 * half], valid_to=2)
    return x, u


def check_initial_conditions(spec, data):
    """Evaluate the four singular-point compatibility quantities.

    The t^-2 and t^-1 Laurent coefficients of both assembled equations at the
    seed jet are exactly the compatibility conditions; each must vanish to
    1e-8.  Raises InitialConditionViolated on failure.
    """
    x, u = _seed_series(spec, data)
    rhs_x = x_equation_rhs(spec, data.epsilon, x, u, order=-1, exact=data.exact)
    a0 = rhs_x.coefficient(-2).as_float().norm()
    a1 = rhs_x.coefficient(-1).as_float().norm()
    rhs_u = u_equation_rhs(spec, data.epsilon, x, u, ydot=rhs_x, order=-1,
                           exact=data.exact)
    at0 = abs(float(rhs_u.coefficient(-2)))
    at1 = abs(float(rhs_u.coefficient(-1)))
    report = InitialConditionReport(a0, a1, at0, at1)
    if not report.passed:
        worst = max(
            ("A(I)", a0), ("2(dA)b+B", a1), ("At(0)", at0), ("dAt u2+Bt", at1),
            key=lambda kv: kv[1],
        )
        raise InitialConditionViolated(worst[0], worst[1])
    return report


# ---------------------------------------------------------------------------
# the jet solution


@dataclass
class SeriesSolution:
    """Formal power-series jet with its consistency record.

    x_jet / u_jet are factorial-normalized (the m-th entry is the m-th
    derivative at zero); raw Taylor coefficients are kept alongside.
    """

    geometry: object
    data: InitialData
    x_jet: list
    u_jet: list
    x_raw: list
    u_raw: list
    consistency_residuals: dict
    consistency_relative: dict
    parity_residuals: dict
    free_param_log: list

    @property
    def order(self):
        return len(self.x_raw) - 1

    def x_series(self, valid_to=None):
        return TensorSeries.from_jet(self.geometry, self.x_raw, valid_to=valid_to)

    def u_series(self, valid_to=None):
        if valid_to is None:
            valid_to = len(self.u_raw) - 1
        return ScalarSeries.taylor(list(self.u_raw), valid_to=valid_to)

    def max_consistency_residual(self):
        return max(self.consistency_relative.values(), default=0.0)

    def tail_estimate(self, t):
        """Magnitude of the last retained x and u terms at time t."""
        n = self.order
        xt = self.x_raw[-1].as_float().values
        last_x = float(np.max(np.abs(xt))) * t ** n
        last_u = abs(float(self.u_raw[-1])) * t ** (len(self.u_raw) - 1)
        return max(last_x, last_u)

    def to_csv(self, path):
        import csv

        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["kind", "summand_label", "m", "coefficient",
                        "consistency_residual"])
            labels = self.geometry.labels()
            for m, xt in enumerate(self.x_jet):
                res = self.consistency_residuals.get(m - 2, "")
                for lab, v in zip(labels, xt.values):
                    w.writerow(["x", lab, m, str(v), res])
            for m, uv in enumerate(self.u_jet):
                w.writerow(["u", "-", m, str(uv), ""])


def _factorial(m, exact):
    f = math.factorial(m)
    return Fraction(f) if exact else float(f)


def _exact_solve(M, rhs):
    """Fraction-exact linear solve by row echelon; free variables get zero.

    Returns (solution vector, residual vector)."""
    q = len(rhs)
    A = [[_as_fraction(M[i][j]) for j in range(q)] + [rhs[i]] for i in range(q)]
    piv_cols = []
    r = 0
    for c in range(q):
        piv = None
        for i in range(r, q):
            if A[i][c] != 0:
                piv = i
                break
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        pv = A[r][c]
        A[r] = [v / pv for v in A[r]]
        for i in range(q):
            if i != r and A[i][c] != 0:
                f = A[i][c]
                A[i] = [a - f * b for a, b in zip(A[i], A[r])]
        piv_cols.append(c)
        r += 1
        if r == q:
            break
    x = [Fraction(0)] * q
    for row, c in enumerate(piv_cols):
        x[c] = A[row][q]
    resid = []
    for i in range(q):
        acc = -rhs[i]
        for j in range(q):
            acc += _as_fraction(M[i][j]) * x[j]
        resid.append(acc)
    return x, resid


def _solve_x_step(spec, data, m, rhs_coeff):
    """Solve the order-m linear system for the next metric coefficient."""
    exact = data.exact
    q = spec.n_summands
    if exact:
        two_over = Fraction(2, m + 2)
        dvec = [two_over * _as_fraction(v) for v in rhs_coeff.values]
        L = build_Lm(spec, m).matrix
        sol, resid = _exact_solve(L, dvec)
        xm2 = DiagonalTensor(np.array(sol, dtype=object), spec)
        dt = DiagonalTensor(np.array(dvec, dtype=object), spec)
        res_abs = DiagonalTensor(np.array(resid, dtype=object), spec).as_float().norm()
    else:
        dvec = (2.0 / (m + 2)) * rhs_coeff.values.astype(float)
        L = build_Lm(spec, m).matrix
        sol, *_ = np.linalg.lstsq(L, dvec, rcond=None)
        xm2 = DiagonalTensor(sol, spec)
        dt = DiagonalTensor(dvec, spec)
        res_abs = DiagonalTensor(L @ sol - dvec, spec).norm()
    res_rel = res_abs / max(1.0, dt.as_float().norm())
    return xm2, dt, res_abs, res_rel


def solve_series(spec, data):
    """Run the interleaved recursion and return the jet through data.order.

    At step m the metric coefficient of order m+2 is solved first (least
    squares against the order-m operator, kernel injection added), then the
    potential coefficient of order m+3.  Odd potential coefficients must
    vanish and are snapped to exact zero.  Raises ConsistencyViolated when a
    right-hand side has a relative component outside the operator image
    beyond 1e-8, and ParityViolated for odd-order potential leakage.
    """
    check_initial_conditions(spec, data)
    exact = data.exact
    one = _one(exact)
    half = one / 2
    N = data.order

    ident = DiagonalTensor.identity(spec, exact=exact)
    xhat = [ident, data.L1 * (2 * one)]
    zero = Fraction(0) if exact else 0.0
    uhat = [data.u0, zero, data.u2 * half]
    cons_abs, cons_rel, parity = {}, {}, {}
    log = [f"epsilon = {data.epsilon}", f"u2 (second potential derivative) = {data.u2}"]

    for m in range(0, N - 1):
        # ---- metric step: solve coefficient m+2
        zero_t = DiagonalTensor.zero(spec, exact=exact)
        x = TensorSeries.from_jet(spec, xhat + [zero_t], valid_to=m + 2)
        u = ScalarSeries.taylor(list(uhat), valid_to=len(uhat) - 1)
        rhs = x_equation_rhs(spec, data.epsilon, x, u, order=m, exact=exact)
        xm2, dt, res_abs, res_rel = _solve_x_step(spec, data, m,
                                                  rhs.coefficient(m))
        cons_abs[m], cons_rel[m] = res_abs, res_rel
        if res_rel > CONSISTENCY_TOL:
            raise ConsistencyViolated(
                f"order {m}: relative out-of-image residual {res_rel:.3e}"
            )
        if m in data.kernel_params:
            basis = kernel_basis(spec, m)
            coeffs = np.atleast_1d(data.kernel_params[m]).astype(float)
            if len(coeffs) > len(basis):
                raise DataError(
                    f"order {m}: {len(coeffs)} kernel coefficients but kernel "
                    f"dimension is {len(basis)}"
                )
            for c, vec in zip(coeffs, basis):
                if exact:
                    inj = np.array([_as_fraction(c * v) for v in vec.values],
                                   dtype=object)
                    xm2 = DiagonalTensor(xm2.values + inj, spec)
                else:
                    xm2 = xm2 + float(c) * vec
                log.append(f"kernel injection at m={m}: coefficient {c} on "
                           f"{np.round(vec.values.astype(float), 6).tolist()}")
        xhat.append(xm2)

        # ---- potential step: solve coefficient m+3
        x = TensorSeries.from_jet(spec, xhat, valid_to=m + 2)
        u = ScalarSeries.taylor(list(uhat) + [zero], valid_to=m + 3)
        y = x.derivative() * half
        ydot = y.derivative()
        rhs_u = u_equation_rhs(spec, data.epsilon, x, u, ydot, order=m, exact=exact)
        lt = build_Ltilde(spec.k, m, exact=exact)
        denom = (m + 3) * (m + 2)
        if exact:
            um3 = _as_fraction(rhs_u.coefficient(m)) / (denom * lt)
        else:
            um3 = float(rhs_u.coefficient(m)) / (denom * lt)
        if (m + 3) % 2 == 1:
            mag = abs(float(um3))
            scale = max(1.0, abs(float(data.u2)))
            parity[m + 3] = mag
            if mag > PARITY_TOL * scale:
                raise ParityViolated(
                    f"odd potential coefficient u_{m+3} = {float(um3):.3e}"
                )
            um3 = zero
        uhat.append(um3)

    x_jet = [xh * _factorial(m, exact) for m, xh in enumerate(xhat)]
    u_jet = [uh * _factorial(m, exact) for m, uh in enumerate(uhat)]
    return SeriesSolution(
        geometry=spec,
        data=data,
        x_jet=x_jet,
        u_jet=u_jet,
        x_raw=xhat,
        u_raw=uhat,
        consistency_residuals=cons_abs,
        consistency_relative=cons_rel,
        parity_residuals=parity,
        free_param_log=log,
    )


def compute_D(spec, data, partial_solution, m):
    """Factorial-normalized inhomogeneous terms of the order-m solves.

    partial_solution must carry raw coefficients through x order m+1 and u
    order m+2 (a full SeriesSolution works).  Returns (D_m, Dtilde_m) with
    the normalization L_m x_{m+2} = D_m and Ltilde_m u_{m+3} = Dtilde_m.
    """
    exact = data.exact
    one = _one(exact)
    half = one / 2
    xh = partial_solution.x_raw[: m + 2]
    uh = partial_solution.u_raw[: m + 3]
    zero_t = DiagonalTensor.zero(spec, exact=exact)
    zero = Fraction(0) if exact else 0.0

    x = TensorSeries.from_jet(spec, list(xh) + [zero_t], valid_to=m + 2)
    u = ScalarSeries.taylor(list(uh), valid_to=m + 2)
    rhs = x_equation_rhs(spec, data.epsilon, x, u, order=m, exact=exact)
    draw = rhs.coefficient(m)
    fac = _factorial(m + 2, exact)
    two_over = (Fraction(2, m + 2) if exact else 2.0 / (m + 2))
    D_m = draw * (two_over * fac)

    x_full = TensorSeries.from_jet(spec, list(xh), valid_to=m + 1)
    u_pad = ScalarSeries.taylor(list(uh) + [zero], valid_to=m + 3)
    y = x_full.derivative() * half
    ydot = y.derivative()
    rhs_u = u_equation_rhs(spec, data.epsilon, x_full, u_pad, ydot, order=m,
                           exact=exact)
    raw_u = rhs_u.coefficient(m)
    fac3 = _factorial(m + 3, exact)
    denom = (m + 3) * (m + 2)
    Dt_m = raw_u * fac3 / denom if exact else float(raw_u) * fac3 / denom
    return D_m, Dt_m


def jet_residual(spec, data, sol):
    """Substitute the solved jet back into both equations via series arithmetic.

    Returns (metric residual TensorSeries, potential residual ScalarSeries);
    along a consistent jet every readable coefficient vanishes through the
    contact order.
    """
    exact = data.exact
    one = _one(exact)
    half = one / 2
    x = sol.x_series()
    u = sol.u_series()
    N = sol.order
    y = x.derivative() * half
    ydot = y.derivative()
    rhs = x_equation_rhs(spec, data.epsilon, x, u, order=N - 2, exact=exact)
    res_x = ydot - rhs
    rhs_u = u_equation_rhs(spec, data.epsilon, x, u, ydot, order=N - 2, exact=exact)
    uddd = u.derivative().derivative().derivative()
    res_u = uddd - rhs_u
    return res_x.truncate(N - 2), res_u.truncate(N - 2)
