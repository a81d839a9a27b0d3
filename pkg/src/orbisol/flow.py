"""Regular-region ODE flow, continuation from the series handoff, certificates.

Away from t = 0 no pole cancellation is needed, so the right-hand side
evaluates the unsplit equations pointwise with the Ricci endomorphism computed
directly from the bracket sums.  Certificates (the contracted-Bianchi first
integral and the full soliton residual) are evaluated from dense-output
derivatives, independent of the formulas the integrator stepped with.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import SingularMetric, StepSizeUnderflow
from .geometry import Block, DiagonalTensor, _ricci_diagonal, metric_at

DEGENERATION_THRESHOLD = 1e-8
HANDOFF_TOL = 1e-10


@dataclass
class SolitonState:
    """Regular-region state (t, x, y, udot, uddot); u is carried for the
    conserved-quantity certificate."""

    t: float
    x: DiagonalTensor
    y: DiagonalTensor
    udot: float
    uddot: float
    u: float = 0.0

    def vector(self):
        """Reduced phase-space vector (x, y, u, udot); uddot is reconstructed."""
        return np.concatenate([
            self.x.values.astype(float),
            self.y.values.astype(float),
            [self.u, self.udot],
        ])

    @classmethod
    def from_vector(cls, spec, eps, t, vec):
        q = spec.n_summands
        x = DiagonalTensor(vec[:q].copy(), spec)
        y = DiagonalTensor(vec[q:2 * q].copy(), spec)
        udot = float(vec[2 * q + 1])
        uddot = _uddot_from_transverse(spec, eps, t, x, y, udot)
        return cls(t=t, x=x, y=y, u=float(vec[2 * q]), udot=udot, uddot=uddot)


def _metric_rate(spec, eps, t, x, y, udot):
    """ydot of the unsplit orbital equation at a regular time."""
    k = spec.k
    r_vals, _ = _ricci_diagonal(spec, metric_at(spec, x, t))
    r = DiagonalTensor(r_vals, spec)
    xinv = x.inverse()
    eta = xinv * y
    trxy = float(eta.trace())
    xplus = x.plus_part()
    ydot = (
        xplus * ((1.0 - k) / (t * t))
        + y * (-k / t)
        + xplus * (-trxy / t)
        + xplus * (udot / t)
        + (y * xinv * y) * 2.0
        + x * r
        + y * (-trxy)
        + y * udot
        + x * (eps / 2.0)
    )
    return ydot, xinv, eta


def _uddot_from_transverse(spec, eps, t, x, y, udot, ydot=None, xinv=None,
                           eta=None):
    """Second potential derivative from the transverse soliton equation.

    uddot = tr(Ldot) + tr(L^2) - eps/2 holds along solutions; using it as the
    definition keeps the flow on the constraint surface, where the
    third-derivative law has an unstable off-surface mode (its 2 uddot udot
    feedback amplifies error like exp(t^2) on shrinkers).
    """
    k = spec.k
    if ydot is None:
        ydot, xinv, eta = _metric_rate(spec, eps, t, x, y, udot)
    etadot = xinv * ydot - (eta * eta) * 2.0
    trLdot = -k / (t * t) + float(etadot.trace())
    plus = DiagonalTensor(spec.block_mask(Block.PLUS).astype(float), spec)
    L = eta + plus * (1.0 / t)
    trL2 = float((L * L).trace())
    return trLdot + trL2 - eps / 2.0


def _rhs_core(spec, eps, t, x, y, udot, uddot):
    """(ydot, u3) of the unsplit equations at a regular time."""
    k = spec.k
    ydot, xinv, eta = _metric_rate(spec, eps, t, x, y, udot)
    trxy = float(eta.trace())
    tr_xinv_ydot = float((xinv * ydot).trace())
    tr_eta2 = float((eta * eta).trace())
    u3 = (
        -(k / t) * uddot
        - trxy * uddot
        + (k / (t * t)) * udot
        + 2.0 * tr_eta2 * udot
        - tr_xinv_ydot * udot
        + 2.0 * uddot * udot
        + eps * udot
    )
    return ydot, u3


def rhs(spec, eps, state):
    """Time derivative of a SolitonState; raises off the regular region."""
    if state.t <= 0.0:
        raise SingularMetric("rhs requires t > 0")
    if np.any(state.x.values.astype(float) <= 0.0):
        raise SingularMetric("metric degenerate: nonpositive x component")
    ydot, u3 = _rhs_core(spec, eps, state.t, state.x, state.y,
                         state.udot, state.uddot)
    return SolitonState(
        t=state.t,
        x=state.y * 2.0,
        y=ydot,
        u=state.udot,
        udot=state.uddot,
        uddot=u3,
    )


class _PiecewiseDense:
    """Dense output stitched across guarded integration segments."""

    def __init__(self, pieces):
        self.sols = [p.sol for p in pieces]
        self.breaks = np.array([p.t[-1] for p in pieces])

    def __call__(self, t):
        i = int(np.searchsorted(self.breaks, t, side="left"))
        i = min(i, len(self.sols) - 1)
        return self.sols[i](t)


@dataclass
class Trajectory:
    """Dense solution of one continuation run."""

    geometry: object
    epsilon: float
    t0: float
    t_end: float
    ts: np.ndarray
    dense: object
    degenerate_time: float | None
    handoff: dict
    rtol: float
    atol: float

    @property
    def reached(self):
        """Final time actually covered."""
        return float(self.ts[-1])

    def state_at(self, t):
        vec = self.dense(t)
        return SolitonState.from_vector(self.geometry, self.epsilon, float(t), vec)

    def sample(self, ts):
        return [self.state_at(t) for t in np.atleast_1d(ts)]

    def grid(self, n=200):
        return np.linspace(self.t0, self.reached, n)


NEAR_MISS_LEVEL = 1e-4
REFINE_RTOL = 1e-13
REFINE_ATOL = 1e-16


def integrate(spec, data, jet, t0, t_end, rtol=1e-9, atol=1e-12,
              max_step=np.inf, _allow_refine=True):
    """Continue the series solution with an adaptive embedded 5(4) pair.

    The initial state is read off the jet at t0 (the handoff record keeps the
    tail estimate there).  Integration halts cleanly when a metric scalar
    crosses the degeneration threshold; the crossing time is reported on the
    trajectory, not raised.

    A closing orbit is a knife-edge: state error is amplified near the
    pinch, so a trajectory that dips close to the threshold and bounces may
    be a true degeneration blurred by integration error.  Such near misses
    trigger one automatic re-run at sharply tightened tolerances; a genuine
    bounce is insensitive to this, a true closure crosses the threshold.

    The integrated state is (x, y, u, udot) with the second potential
    derivative reconstructed from the transverse soliton equation; stepping
    the third-derivative law directly excites an off-constraint mode whose
    error grows like exp(t^2) on shrinking backgrounds.
    """
    if t0 <= 0 or t_end <= t0:
        raise SingularMetric("need 0 < t0 < t_end")
    xs = jet.x_series()
    us = jet.u_series()
    x0 = xs.evaluate(t0)
    y0 = (xs.derivative().evaluate(t0)) * 0.5
    u0 = us.evaluate(t0)
    ud0 = us.derivative().evaluate(t0)
    udd0 = us.derivative().derivative().evaluate(t0)
    state0 = SolitonState(t0, x0, y0, ud0, udd0, u=u0)
    tail = jet.tail_estimate(t0)
    handoff = {"t0": t0, "jet_order": jet.order, "tail_estimate": tail,
               "handoff_tol": HANDOFF_TOL, "tail_ok": tail <= HANDOFF_TOL}

    q = spec.n_summands
    eps = float(data.epsilon)

    def f(t, vec):
        if np.min(vec[:q]) <= 0.0:
            raise SingularMetric(f"metric scalar nonpositive at t = {t:.6f}")
        x = DiagonalTensor(vec[:q], spec)
        y = DiagonalTensor(vec[q:2 * q], spec)
        udot = vec[2 * q + 1]
        ydot, xinv, eta = _metric_rate(spec, eps, t, x, y, udot)
        uddot = _uddot_from_transverse(spec, eps, t, x, y, udot,
                                       ydot=ydot, xinv=xinv, eta=eta)
        out = np.empty_like(vec)
        out[:q] = 2.0 * y.values
        out[q:2 * q] = ydot.values
        out[2 * q] = udot
        out[2 * q + 1] = uddot
        return out

    def degeneration(t, vec):
        return float(np.min(vec[:q]) - DEGENERATION_THRESHOLD)

    degeneration.terminal = True
    degeneration.direction = -1

    # guard band: when a metric scalar drops near the floor, re-integrate the
    # approach with a small step cap so a narrow dip cannot be stepped over
    guard_level = max(1e-3, 10.0 * DEGENERATION_THRESHOLD)

    def guard_down(t, vec):
        return float(np.min(vec[:q]) - guard_level)

    guard_down.terminal = True
    guard_down.direction = -1

    def guard_up(t, vec):
        return float(np.min(vec[:q]) - 2.0 * guard_level)

    guard_up.terminal = True
    guard_up.direction = 1

    pieces = []
    degenerate_time = None
    min_x_seen = float(np.min(state0.vector()[:q]))
    t_cur = t0
    vec_cur = state0.vector()
    slow = bool(np.min(vec_cur[:q]) < guard_level)
    for _ in range(200):
        if slow:
            ev = [degeneration, guard_up]
            cap = min(max_step, 1e-4 * max(1.0, abs(t_cur)))
        else:
            ev = [degeneration, guard_down]
            cap = max_step
        res = solve_ivp(
            f, (t_cur, t_end), vec_cur, method="RK45", rtol=rtol, atol=atol,
            dense_output=True, events=ev, max_step=cap,
        )
        if res.status == -1:
            raise StepSizeUnderflow(res.message)
        pieces.append(res)
        min_x_seen = min(min_x_seen, float(np.min(res.y[:q])))
        if res.status == 1 and len(res.t_events[0]):
            degenerate_time = float(res.t_events[0][0])
            break
        if res.status == 0:
            break
        # guard event: flip regime and continue from the crossing
        t_cur = float(res.t[-1])
        vec_cur = res.y[:, -1].copy()
        slow = not slow

    if (degenerate_time is None and _allow_refine
            and min_x_seen < NEAR_MISS_LEVEL and rtol > REFINE_RTOL):
        return integrate(spec, data, jet, t0, t_end,
                         rtol=REFINE_RTOL, atol=REFINE_ATOL,
                         max_step=max_step, _allow_refine=False)

    dense = _PiecewiseDense(pieces)
    ts = np.concatenate([p.t for p in pieces])
    return Trajectory(
        geometry=spec, epsilon=eps, t0=t0, t_end=t_end, ts=ts,
        dense=dense, degenerate_time=degenerate_time, handoff=handoff,
        rtol=rtol, atol=atol,
    )


# ---------------------------------------------------------------------------
# certificates


def _dense_derivative(traj, t, h=None):
    """Second-order difference of the dense output, one-sided at the ends.

    Independent of the stepping law, so certificates built on it measure the
    numerical solution rather than restating the right-hand side.
    """
    if h is None:
        h = 1e-5 * max(1.0, abs(t))
    a, b = traj.t0, traj.reached
    f = traj.dense
    if t - h >= a and t + h <= b:
        return (f(t + h) - f(t - h)) / (2.0 * h)
    if t + 2 * h <= b:
        return (-3.0 * f(t) + 4.0 * f(t + h) - f(t + 2 * h)) / (2.0 * h)
    if t - 2 * h >= a:
        return (3.0 * f(t) - 4.0 * f(t - h) + f(t - 2 * h)) / (2.0 * h)
    return (f(b) - f(a)) / (b - a)


def shape_operator(spec, state):
    """Per-summand shape operator L = (1/t) I_+ + x^-1 y."""
    eta = state.x.inverse() * state.y
    plus = DiagonalTensor(spec.block_mask(Block.PLUS).astype(float), spec)
    return eta + plus * (1.0 / state.t)


def _fd_stencil(func, t, a, b, h):
    """Second-order derivative of a scalar function on [a, b]."""
    if t - h >= a and t + h <= b:
        return (func(t + h) - func(t - h)) / (2.0 * h)
    if t + 2 * h <= b:
        return (-3.0 * func(t) + 4.0 * func(t + h) - func(t + 2 * h)) / (2.0 * h)
    if t - 2 * h >= a:
        return (3.0 * func(t) - 4.0 * func(t - h) + func(t - 2 * h)) / (2.0 * h)
    return (func(b) - func(a)) / (b - a)


def first_integral_residual(spec, eps, traj, ts=None):
    """Residual of the contracted-Bianchi scalar identity along the trajectory.

    The third potential derivative and the shape-operator rate are taken from
    dense-output differentiation, so the residual measures true solution
    quality rather than restating the stepping formulas.  Returns an array,
    one value per sample.
    """
    if ts is None:
        ts = traj.grid()
    q = spec.n_summands
    k = spec.k
    out = np.empty(len(ts))

    def uddot_at(tv):
        return traj.state_at(tv).uddot

    for i, t in enumerate(np.atleast_1d(ts)):
        st = traj.state_at(t)
        dvec = _dense_derivative(traj, t)
        ydot = DiagonalTensor(dvec[q:2 * q], spec)
        h = 1e-5 * max(1.0, abs(t))
        u3 = _fd_stencil(uddot_at, t, traj.t0, traj.reached, h)
        xinv = st.x.inverse()
        eta = xinv * st.y
        trL = k / t + float(eta.trace())
        trLdot = (
            -k / (t * t)
            + float((xinv * ydot).trace())
            - 2.0 * float((eta * eta).trace())
        )
        out[i] = (
            u3 + trL * st.uddot + trLdot * st.udot
            - 2.0 * st.uddot * st.udot - eps * st.udot
        )
    return out


def conserved_quantity(spec, eps, state):
    """Scalar first integral uddot + tr(L) udot - udot^2 - eps u."""
    trL = spec.k / state.t + float((state.x.inverse() * state.y).trace())
    return state.uddot + trL * state.udot - state.udot ** 2 - eps * state.u


def conserved_drift(spec, eps, traj, ts=None):
    """Drift of the conserved scalar relative to its handoff value."""
    if ts is None:
        ts = traj.grid()
    j0 = conserved_quantity(spec, eps, traj.state_at(traj.t0))
    return np.array([
        conserved_quantity(spec, eps, traj.state_at(t)) - j0
        for t in np.atleast_1d(ts)
    ])


def soliton_residual(spec, eps, state, derivatives):
    """Full soliton-equation residual at one state.

    derivatives must provide the time rate of y (key "ydot", DiagonalTensor).
    Returns (orbital residual per summand, transverse scalar residual): the
    endomorphism identity r - tr(L) L - Ldot + udot L + eps/2 I on the orbit
    and the second-derivative identity -tr(Ldot) - tr(L^2) + uddot + eps/2
    across it.
    """
    t = state.t
    k = spec.k
    ydot = derivatives["ydot"]
    r_vals, _ = _ricci_diagonal(spec, metric_at(spec, state.x, t))
    r = DiagonalTensor(r_vals, spec)
    xinv = state.x.inverse()
    eta = xinv * state.y
    plus = DiagonalTensor(spec.block_mask(Block.PLUS).astype(float), spec)
    L = eta + plus * (1.0 / t)
    etadot = xinv * ydot - (eta * eta) * 2.0
    Ldot = etadot - plus * (1.0 / (t * t))
    trL = float(L.trace())
    ident = DiagonalTensor.identity(spec)
    orbital = r - L * trL - Ldot + L * state.udot + ident * (eps / 2.0)
    transverse = (
        -float(Ldot.trace()) - float((L * L).trace()) + state.uddot + eps / 2.0
    )
    return orbital, transverse


def soliton_residual_along(spec, eps, traj, ts=None):
    """Max-norm soliton residuals along a trajectory (dense-output rates)."""
    if ts is None:
        ts = traj.grid()
    q = spec.n_summands
    orb = np.empty(len(ts))
    trv = np.empty(len(ts))
    for i, t in enumerate(np.atleast_1d(ts)):
        st = traj.state_at(t)
        dvec = _dense_derivative(traj, t)
        ydot = DiagonalTensor(dvec[q:2 * q], spec)
        o, s = soliton_residual(spec, eps, st, {"ydot": ydot})
        orb[i] = float(np.max(np.abs(o.values)))
        trv[i] = abs(s)
    return orb, trv


def orbit_constraint_residual(spec, state):
    """Codifferential constraint along the orbit (diagnostic).

    For the diagonal ansatz the momentum one-form delta(L) + d tr(L) can only
    have components on isotropy-trivial directions; its max component is
    returned, computed from the invariant-metric connection coefficients.
    """
    kd = spec.isotropy_dim
    C = spec.brackets
    n_p = spec.n_p
    g = metric_at(spec, state.x, state.t)
    eta = state.x.inverse() * state.y
    lam_summand = eta.values.astype(float).copy()
    for i in spec.plus_ids:
        lam_summand[i] += 1.0 / state.t
    lam = lam_summand[spec.index_summand]
    V = np.zeros(n_p)
    for m in range(n_p):
        acc = 0.0
        for i in range(n_p):
            if m == i:
                continue
            # Gamma^m_{ii} = -g([e_i, e_m], e_i) / g_m; delta(L) telescopes to
            # (1/g_m) sum_i (lam_i - lam_m) c(i, m -> i)
            c = C[kd + i, kd + m, kd + i]
            if c != 0.0:
                acc += (lam[i] - lam[m]) * c
        V[m] = acc / g[m]
    return float(np.max(np.abs(V))) if n_p else 0.0
