"""Truncated Taylor/Laurent series arithmetic over scalars and diagonal tensors.

Series carry an explicit validity horizon: every operation propagates the
highest exponent whose coefficient is still exact, so downstream consumers can
assert they never read past what the inputs support.  Coefficients are floats
by default; Fraction coefficients give the exact mode used for regression
fixtures.
"""
from __future__ import annotations

from fractions import Fraction

import numpy as np

from .errors import LeadTooSingular, NonDiagonalRicci, ZeroLeadingCoefficient
from .geometry import Block, DiagonalTensor, DIAG_TOL

INF = 10 ** 9  # validity horizon of an exactly-known polynomial


def _is_zero(v):
    return v == 0


class ScalarSeries:
    """Laurent series with coefficients known exactly through t^valid_to.

    coeffs[j] is the coefficient of t^(lead+j).  Exponents outside the stored
    window but at or below valid_to are exactly zero; exponents above valid_to
    are unknown and reading them raises.
    """

    __slots__ = ("lead", "coeffs", "valid_to")

    def __init__(self, lead, coeffs, valid_to):
        coeffs = list(coeffs)
        while coeffs and _is_zero(coeffs[0]):
            coeffs.pop(0)
            lead += 1
        while coeffs and _is_zero(coeffs[-1]):
            coeffs.pop()
        if not coeffs:
            lead = 0
        else:
            # drop stored coefficients past the horizon
            keep = valid_to - lead + 1
            if keep < len(coeffs):
                coeffs = coeffs[: max(keep, 0)]
                while coeffs and _is_zero(coeffs[-1]):
                    coeffs.pop()
                if not coeffs:
                    lead = 0
        self.lead = lead
        self.coeffs = coeffs
        self.valid_to = valid_to

    # -- constructors --------------------------------------------------------

    @classmethod
    def taylor(cls, coeffs, valid_to=None):
        coeffs = list(coeffs)
        if valid_to is None:
            valid_to = len(coeffs) - 1
        return cls(0, coeffs, valid_to)

    @classmethod
    def constant(cls, c, valid_to=INF):
        return cls(0, [c], valid_to)

    @classmethod
    def monomial(cls, e, c=1.0, valid_to=INF):
        return cls(e, [c], valid_to)

    @classmethod
    def zero(cls, valid_to=INF):
        return cls(0, [], valid_to)

    # -- bookkeeping ---------------------------------------------------------

    @property
    def exact(self):
        return any(isinstance(c, Fraction) for c in self.coeffs)

    @property
    def end(self):
        """Exponent of the last stored coefficient."""
        return self.lead + len(self.coeffs) - 1

    def is_zero(self):
        return not self.coeffs

    def coefficient(self, e):
        """Coefficient of t^e; exact zero off the window, error past the horizon."""
        if e > self.valid_to:
            raise ValueError(
                f"coefficient of t^{e} requested, series valid only to t^{self.valid_to}"
            )
        j = e - self.lead
        if j < 0 or j >= len(self.coeffs):
            return self._zero()
        return self.coeffs[j]

    def _zero(self):
        for c in self.coeffs:
            if isinstance(c, Fraction):
                return Fraction(0)
        return 0.0

    def truncate(self, to):
        return ScalarSeries(self.lead, list(self.coeffs), min(self.valid_to, to))

    # -- arithmetic ----------------------------------------------------------

    def __add__(self, other):
        other = _coerce(other)
        valid = min(self.valid_to, other.valid_to)
        if self.is_zero():
            return ScalarSeries(other.lead, list(other.coeffs), valid)
        if other.is_zero():
            return ScalarSeries(self.lead, list(self.coeffs), valid)
        lead = min(self.lead, other.lead)
        end = min(max(self.end, other.end), valid)
        n = end - lead + 1
        if n <= 0:
            return ScalarSeries(0, [], valid)
        out = [self._zero() + other._zero()] * n
        for src in (self, other):
            for j, c in enumerate(src.coeffs):
                e = src.lead + j
                if lead <= e <= end:
                    out[e - lead] = out[e - lead] + c
        return ScalarSeries(lead, out, valid)

    def __radd__(self, other):
        return self.__add__(other)

    def __sub__(self, other):
        return self + (-_coerce(other))

    def __rsub__(self, other):
        return _coerce(other) + (-self)

    def __neg__(self):
        return ScalarSeries(self.lead, [-c for c in self.coeffs], self.valid_to)

    def __mul__(self, other):
        if not isinstance(other, ScalarSeries):
            return ScalarSeries(self.lead, [c * other for c in self.coeffs],
                                self.valid_to)
        a, b = self, other
        if a.is_zero():
            return ScalarSeries(0, [], min(a.valid_to + b.lead, b.valid_to)
                                if not b.is_zero() else min(a.valid_to, b.valid_to))
        if b.is_zero():
            return ScalarSeries(0, [], min(b.valid_to + a.lead, a.valid_to))
        valid = min(a.valid_to + b.lead, b.valid_to + a.lead)
        lead = a.lead + b.lead
        end = min(a.end + b.end, valid)
        n = end - lead + 1
        if n <= 0:
            return ScalarSeries(0, [], valid)
        out = [a._zero() * b._zero()] * n
        for i, ca in enumerate(a.coeffs):
            if _is_zero(ca):
                continue
            for j, cb in enumerate(b.coeffs):
                e = i + j
                if e >= n:
                    break
                out[e] = out[e] + ca * cb
        return ScalarSeries(lead, out, valid)

    __rmul__ = __mul__

    def invert(self, to=None):
        """Reciprocal series; the leading coefficient must be nonzero."""
        if self.is_zero():
            raise ZeroLeadingCoefficient("cannot invert the zero series")
        if to is None:
            if self.valid_to >= INF:
                raise ValueError("invert of an exact polynomial needs a target order")
            to = self.valid_to - 2 * self.lead
        cap = min(to, self.valid_to - 2 * self.lead)
        lead = -self.lead
        n = cap - lead + 1
        if n <= 0:
            return ScalarSeries(0, [], cap)
        c0 = self.coeffs[0]
        one = Fraction(1) if isinstance(c0, Fraction) else 1.0
        inv0 = one / c0
        rel = [self.coefficient(self.lead + j) / c0 if self.lead + j <= self.valid_to
               else self._zero() for j in range(n)]
        out = [inv0] + [inv0 * 0] * (n - 1)
        for m in range(1, n):
            acc = out[0] * 0
            for j in range(1, m + 1):
                if not _is_zero(rel[j]):
                    acc = acc + rel[j] * out[m - j]
            out[m] = -acc
        return ScalarSeries(lead, out, cap)

    def shift(self, e):
        """Multiply by t^e."""
        return ScalarSeries(self.lead + e, list(self.coeffs), self.valid_to + e)

    def derivative(self):
        out = [c * (self.lead + j) for j, c in enumerate(self.coeffs)]
        return ScalarSeries(self.lead - 1, out, self.valid_to - 1)

    def evaluate(self, t):
        return float(sum(float(c) * t ** (self.lead + j)
                         for j, c in enumerate(self.coeffs)))

    def max_abs(self):
        return max((abs(float(c)) for c in self.coeffs), default=0.0)

    def as_float(self):
        return ScalarSeries(self.lead, [float(c) for c in self.coeffs], self.valid_to)

    def items(self):
        for j, c in enumerate(self.coeffs):
            if not _is_zero(c):
                yield self.lead + j, c

    def __repr__(self):
        terms = [f"{c}*t^{e}" for e, c in self.items()]
        body = " + ".join(terms[:6]) or "0"
        if len(terms) > 6:
            body += " + ..."
        return f"ScalarSeries({body}; valid to t^{min(self.valid_to, INF)})"


def _coerce(v):
    if isinstance(v, ScalarSeries):
        return v
    return ScalarSeries.constant(v)


# spec-level operation aliases
def series_add(a, b):
    return _coerce(a) + _coerce(b)


def series_mul(a, b):
    return _coerce(a) * _coerce(b)


def series_invert(a, to=None):
    return a.invert(to)


def series_scale(a, c):
    return a * c


class TensorSeries:
    """One scalar series per summand; componentwise arithmetic."""

    def __init__(self, components, geometry):
        if len(components) != geometry.n_summands:
            raise ValueError("one component per summand required")
        self.components = list(components)
        self.geometry = geometry

    @classmethod
    def from_jet(cls, geometry, jets, valid_to=None):
        """Taylor series whose t^m coefficient is the m-th DiagonalTensor in jets."""
        if valid_to is None:
            valid_to = len(jets) - 1
        comps = []
        for i in range(geometry.n_summands):
            comps.append(ScalarSeries.taylor([jet.values[i] for jet in jets], valid_to))
        return cls(comps, geometry)

    @classmethod
    def constant(cls, x, valid_to=INF):
        return cls([ScalarSeries.constant(v, valid_to) for v in x.values], x.geometry)

    def coefficient(self, e):
        vals = [c.coefficient(e) for c in self.components]
        dtype = object if any(isinstance(v, Fraction) for v in vals) else float
        return DiagonalTensor(np.array(vals, dtype=dtype), self.geometry)

    @property
    def lead(self):
        leads = [c.lead for c in self.components if c.coeffs]
        return min(leads) if leads else 0

    @property
    def valid_to(self):
        return min(c.valid_to for c in self.components)

    def _map(self, f):
        return TensorSeries([f(c) for c in self.components], self.geometry)

    def __add__(self, other):
        return TensorSeries([a + b for a, b in zip(self.components, other.components)],
                            self.geometry)

    def __sub__(self, other):
        return TensorSeries([a - b for a, b in zip(self.components, other.components)],
                            self.geometry)

    def __neg__(self):
        return self._map(lambda c: -c)

    def __mul__(self, other):
        if isinstance(other, TensorSeries):
            return TensorSeries(
                [a * b for a, b in zip(self.components, other.components)],
                self.geometry,
            )
        return self._map(lambda c: c * other)  # scalar series or number

    __rmul__ = __mul__

    def inverse(self, to=None):
        return self._map(lambda c: c.invert(to))

    def trace(self):
        acc = ScalarSeries.zero()
        for d, c in zip(self.geometry.dims, self.components):
            acc = acc + c * int(d)
        return acc

    def plus_part(self):
        mask = self.geometry.block_mask(Block.PLUS)
        return TensorSeries(
            [c if m else ScalarSeries.zero(c.valid_to)
             for c, m in zip(self.components, mask)],
            self.geometry,
        )

    def minus_part(self):
        mask = self.geometry.block_mask(Block.MINUS)
        return TensorSeries(
            [c if m else ScalarSeries.zero(c.valid_to)
             for c, m in zip(self.components, mask)],
            self.geometry,
        )

    def derivative(self):
        return self._map(lambda c: c.derivative())

    def shift(self, e):
        return self._map(lambda c: c.shift(e))

    def truncate(self, to):
        return self._map(lambda c: c.truncate(to))

    def evaluate(self, t):
        return DiagonalTensor(
            np.array([c.evaluate(t) for c in self.components]), self.geometry
        )

    def max_abs(self):
        return max(c.max_abs() for c in self.components)

    def is_even(self):
        """True when no odd exponent carries a nonzero coefficient."""
        for comp in self.components:
            for e, c in comp.items():
                if e % 2:
                    return False
        return True

    def __repr__(self):
        return "TensorSeries(\n  " + ",\n  ".join(
            f"{s.label}: {c!r}" for s, c in zip(self.geometry.summands, self.components)
        ) + "\n)"


# ---------------------------------------------------------------------------
# Ricci endomorphism in series arithmetic


def ricci_series(spec, x, order, check_parity=True):
    """Laurent expansion of the Ricci endomorphism of g_t = t^2 x_+(t) ⊕ x_-(t).

    x(0) must be invertible (nonzero scalars at t = 0).  The result has lead
    >= -2.  For an even input the expansion contains even powers only and the
    vanishing of odd coefficients (in particular t^-1) is asserted.

    Parameters
    ----------
    x : TensorSeries
        Metric coefficient series (Taylor, lead 0).
    order : int
        Highest exponent the returned expansion must cover.
    """
    n_p = spec.n_p
    for comp in x.components:
        if comp.lead != 0 or comp.is_zero():
            raise ZeroLeadingCoefficient("x(0) must be invertible")

    g_idx = []
    for j in range(n_p):
        s = x.components[spec.index_summand[j]]
        if spec.summands[spec.index_summand[j]].block is Block.PLUS:
            s = s.shift(2)
        g_idx.append(s)
    ginv_idx = [s.invert(to=order + 4) for s in g_idx]

    pair_targets, kill = spec._sparse_terms()
    exact = any(c.exact for c in x.components)

    def const(v):
        if exact:
            return ScalarSeries.constant(Fraction(v).limit_denominator(10 ** 12))
        return ScalarSeries.constant(v)

    ric = {}

    def add_term(a, b, series):
        key = (a, b)
        ric[key] = ric.get(key, ScalarSeries.zero()) + series

    for a in range(n_p):
        for b in range(n_p):
            if kill[a, b] != 0.0:
                add_term(a, b, const(kill[a, b]))

    # -1/2 sum_i g^{ii} g([a,i]_p, [b,i]_p)
    by_partner = {}
    for (xx, i), targets in pair_targets.items():
        by_partner.setdefault(i, []).append((xx, targets))
    half = Fraction(1, 2) if exact else 0.5
    quarter = Fraction(1, 4) if exact else 0.25
    for i, rows in by_partner.items():
        w = ginv_idx[i]
        for (a, ta) in rows:
            for (b, tb) in rows:
                s = None
                for (e1, c1) in ta:
                    for (e2, c2) in tb:
                        if e1 == e2:
                            term = g_idx[e1] * (c1 * c2)
                            s = term if s is None else s + term
                if s is not None:
                    add_term(a, b, -(half) * (w * s))

    # +1/4 sum_{i,p} g^{ii} g^{pp} g(a, [i,p]) g(b, [i,p])
    for (i, p), targets in pair_targets.items():
        w = ginv_idx[i] * ginv_idx[p]
        for (a, ca) in targets:
            for (b, cb) in targets:
                add_term(a, b, quarter * ((w * (g_idx[a] * ca)) * (g_idx[b] * cb)))

    scale = max((s.max_abs() for (a, b), s in ric.items() if a == b), default=1.0)
    scale = max(scale, 1.0)
    for (a, b), s in ric.items():
        if a != b and s.max_abs() > DIAG_TOL * scale:
            raise NonDiagonalRicci(
                f"series Ricci off-diagonal at basis pair ({a},{b}): "
                f"max |coeff| = {s.max_abs():.3e}"
            )

    comps = []
    pos = 0
    for s_i, summand in enumerate(spec.summands):
        reps = []
        for j in range(pos, pos + summand.dim):
            rj = ric.get((j, j), ScalarSeries.zero()) * ginv_idx[j]
            reps.append(rj.truncate(order))
        first = reps[0]
        for other in reps[1:]:
            diff = (first - other).max_abs()
            if diff > DIAG_TOL * scale:
                raise NonDiagonalRicci(
                    f"series Ricci not scalar on summand {summand.label}: dev {diff:.3e}"
                )
        comps.append(first)
        pos += summand.dim
    out = TensorSeries(comps, spec)

    if out.valid_to < order:
        raise ValueError(
            f"input series too short: Ricci valid to t^{out.valid_to}, need t^{order}"
        )
    if out.lead < -2:
        raise LeadTooSingular(f"Ricci series lead {out.lead} < -2")
    if check_parity and x.is_even():
        for comp in out.components:
            for e, c in comp.items():
                if e % 2 and abs(float(c)) > 1e-10 * scale:
                    raise NonDiagonalRicci(
                        f"odd Ricci coefficient t^{e} = {float(c):.3e} for even metric"
                    )
    return out


def laurent_split(s):
    """Split a tensor series into (t^-2 coefficient, t^-1 coefficient, Taylor part)."""
    if s.lead < -2:
        raise LeadTooSingular(f"lead {s.lead} < -2")
    a = s.coefficient(-2)
    b = s.coefficient(-1)
    regular = TensorSeries(
        [ScalarSeries(0,
                      [c.coefficient(e) for e in range(0, max(c.end, 0) + 1)]
                      if not c.is_zero() else [],
                      c.valid_to)
         for c in s.components],
        s.geometry,
    )
    return a, b, regular


def r_sing_of(spec, x, order=2):
    """Singular Ricci coefficient r_sing(x): the t^-2 term for constant x."""
    xs = TensorSeries.constant(x, valid_to=order + 4)
    r = ricci_series(spec, xs, order)
    return r.coefficient(-2)


def dr_sing_matrix(spec):
    """Exact derivative of r_sing at the identity, in summand coordinates.

    Column j is the directional derivative along the j-th summand direction,
    read off as the t^-1 Laurent coefficient of the Ricci expansion of the
    linear-in-t metric x = I + e_j t.  Cached per geometry.
    """
    cache = getattr(spec, "_drsing", None)
    if cache is not None:
        return cache
    q = spec.n_summands
    out = np.zeros((q, q))
    for j in range(q):
        jets = [DiagonalTensor.identity(spec),
                DiagonalTensor(np.eye(q)[j], spec)]
        xs = TensorSeries.from_jet(spec, jets, valid_to=6)
        r = ricci_series(spec, xs, 1, check_parity=False)
        out[:, j] = r.coefficient(-1).values.astype(float)
    spec._drsing = out
    return out


def series_to_csv(series, path):
    """Dump (summand_label, exponent, coefficient) rows."""
    import csv

    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["summand_label", "exponent", "coefficient"])
        for label, comp in zip(series.geometry.labels(), series.components):
            for e, c in comp.items():
                w.writerow([label, e, str(c)])
