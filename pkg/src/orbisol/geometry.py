"""Infinitesimal homogeneous-space data and curvature of diagonal invariant metrics.

A geometry is encoded by an adapted basis {basis of the isotropy algebra} ∪
{basis of the collapsing-sphere block} ∪ {basis of the singular-orbit block},
orthonormal for the background metric on the reductive complement, together
with the bracket structure constants on that basis.  Metrics are one positive
scalar per declared irreducible summand (diagonal ansatz); the Ricci
endomorphism of such a metric is computed from the literal structure-constant
sums and must come out diagonal again, which is asserted.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import (
    GeometryError,
    NonDiagonalRicci,
    NonScalarCasimir,
    SingularMetric,
)

DIAG_TOL = 1e-10
JACOBI_TOL = 1e-12


class Block(enum.Enum):
    PLUS = "plus"    # tangent to the collapsing sphere, metric scaled by t^2
    MINUS = "minus"  # tangent to the singular orbit


@dataclass(frozen=True)
class SummandSpec:
    """One irreducible summand of the diagonal ansatz."""

    label: str
    dim: int
    block: Block
    casimir_eigenvalue: float | None = None

    def __post_init__(self):
        if self.dim < 1:
            raise GeometryError(f"summand {self.label}: dim must be >= 1")


class GeometrySpec:
    """Numeric skeleton of a cohomogeneity-one geometry near the singular orbit.

    Parameters
    ----------
    k : int
        Dimension of the collapsing sphere (codimension of the orbit is k+1).
    summands : sequence of SummandSpec
        Ordered summand table; plus dims must sum to k.
    brackets : array (n, n, n) or None
        c[a][b][e] = coefficient of X_e in [X_a, X_b] on the adapted basis
        (isotropy block first, then summands in declared order).  None means
        the zero tensor (pure summand-table skeleton).
    isotropy_dim : int
        Dimension of the isotropy algebra block at the front of the basis.
    name : str
        Display name.
    """

    def __init__(self, k, summands, brackets=None, isotropy_dim=0, name="custom"):
        if k < 1:
            raise GeometryError("k must be >= 1")
        self.k = int(k)
        self.summands = tuple(summands)
        self.isotropy_dim = int(isotropy_dim)
        self.name = name
        self.dims = np.array([s.dim for s in self.summands], dtype=int)
        self.n_p = int(self.dims.sum())
        self.n_total = self.isotropy_dim + self.n_p
        plus_total = sum(s.dim for s in self.summands if s.block is Block.PLUS)
        if plus_total != self.k:
            raise GeometryError(
                f"plus dims sum to {plus_total}, expected k = {self.k}"
            )
        if brackets is None:
            brackets = np.zeros((self.n_total,) * 3)
        brackets = np.asarray(brackets, dtype=float)
        if brackets.shape != (self.n_total,) * 3:
            raise GeometryError(
                f"bracket tensor shape {brackets.shape}, expected {(self.n_total,)*3}"
            )
        self.brackets = brackets
        self.brackets.setflags(write=False)

        # summand index of each basis vector of the reductive complement
        owner = []
        for i, s in enumerate(self.summands):
            owner.extend([i] * s.dim)
        self.index_summand = np.array(owner, dtype=int)
        self.plus_ids = np.array(
            [i for i, s in enumerate(self.summands) if s.block is Block.PLUS], dtype=int
        )
        self.minus_ids = np.array(
            [i for i, s in enumerate(self.summands) if s.block is Block.MINUS], dtype=int
        )
        self._sparse = None
        self._killing = None

    # -- bookkeeping -------------------------------------------------------

    @property
    def n_summands(self):
        return len(self.summands)

    @property
    def has_brackets(self):
        return bool(np.any(self.brackets != 0.0))

    def summand_of(self, basis_index):
        """Summand index for an adapted-basis index, or None inside the isotropy block."""
        if basis_index < self.isotropy_dim:
            return None
        return int(self.index_summand[basis_index - self.isotropy_dim])

    def labels(self):
        return [s.label for s in self.summands]

    def block_mask(self, block):
        return np.array([s.block is block for s in self.summands])

    # -- precomputed bracket views ------------------------------------------

    def _sparse_terms(self):
        """Nonzero bracket data grouped for the Ricci sums.

        Returns (pair_targets, killing) where pair_targets maps a pair (i, p)
        of complement indices to the list of (a, c) with [X_i, X_p] having
        coefficient c on complement vector X_a, and killing is the matrix
        -1/2 tr(ad ad) over the full algebra restricted to complement rows.
        """
        if self._sparse is not None:
            return self._sparse
        kd, np_ = self.isotropy_dim, self.n_p
        C = self.brackets
        pair_targets = {}
        for i in range(np_):
            for p in range(np_):
                row = C[kd + i, kd + p]
                nz = np.nonzero(row[kd:])[0]
                if nz.size:
                    pair_targets[(i, p)] = [(int(a), float(row[kd + a])) for a in nz]
        kill = np.zeros((np_, np_))
        for a in range(np_):
            for b in range(np_):
                kill[a, b] = -0.5 * np.einsum(
                    "yx,xy->", C[kd + a], C[kd + b]
                )
        self._sparse = (pair_targets, kill)
        return self._sparse

    def __repr__(self):
        return f"GeometrySpec({self.name!r}, k={self.k}, summands={self.labels()})"


@dataclass
class DiagonalTensor:
    """Invariant symmetric endomorphism: one scalar per summand.

    Arithmetic is componentwise.  Values may be floats or Fractions (the exact
    coefficient mode); operations preserve the entry type.
    """

    values: np.ndarray
    geometry: GeometrySpec

    def __post_init__(self):
        vals = np.asarray(self.values)
        if vals.dtype != object:
            vals = vals.astype(float)
        if vals.shape != (self.geometry.n_summands,):
            raise GeometryError(
                f"expected {self.geometry.n_summands} values, got {vals.shape}"
            )
        self.values = vals

    # constructors
    @classmethod
    def identity(cls, geom, exact=False):
        one = Fraction(1) if exact else 1.0
        return cls(np.array([one] * geom.n_summands, dtype=object if exact else float), geom)

    @classmethod
    def zero(cls, geom, exact=False):
        z = Fraction(0) if exact else 0.0
        return cls(np.array([z] * geom.n_summands, dtype=object if exact else float), geom)

    @classmethod
    def from_labels(cls, geom, mapping, default=0.0):
        vals = [mapping.get(s.label, default) for s in geom.summands]
        return cls(np.array(vals, dtype=float), geom)

    # componentwise algebra
    def _wrap(self, vals):
        return DiagonalTensor(vals, self.geometry)

    def __add__(self, other):
        return self._wrap(self.values + other.values)

    def __sub__(self, other):
        return self._wrap(self.values - other.values)

    def __mul__(self, other):
        if isinstance(other, DiagonalTensor):
            return self._wrap(self.values * other.values)
        return self._wrap(self.values * other)

    __rmul__ = __mul__

    def __neg__(self):
        return self._wrap(-self.values)

    def inverse(self):
        if any(v == 0 for v in self.values):
            raise SingularMetric("cannot invert: zero component")
        one = Fraction(1) if self.values.dtype == object else 1.0
        return self._wrap(np.array([one / v for v in self.values],
                                   dtype=self.values.dtype))

    def trace(self):
        return sum(d * v for d, v in zip(self.geometry.dims, self.values))

    def plus_part(self):
        mask = self.geometry.block_mask(Block.PLUS)
        vals = self.values.copy()
        vals[~mask] = 0 * vals[~mask]
        return self._wrap(vals)

    def minus_part(self):
        mask = self.geometry.block_mask(Block.MINUS)
        vals = self.values.copy()
        vals[~mask] = 0 * vals[~mask]
        return self._wrap(vals)

    def norm(self):
        """Euclidean norm weighted by summand dimensions (trace inner product)."""
        v = self.values.astype(float)
        return float(np.sqrt(np.sum(self.geometry.dims * v * v)))

    def as_float(self):
        return self._wrap(self.values.astype(float))

    def per_index(self):
        """Expand to one value per complement basis index."""
        return self.values[self.geometry.index_summand]

    def __repr__(self):
        pairs = ", ".join(
            f"{s.label}={v}" for s, v in zip(self.geometry.summands, self.values)
        )
        return f"DiagonalTensor({pairs})"


# ---------------------------------------------------------------------------
# validation


@dataclass
class ValidationReport:
    antisymmetry_dev: float
    jacobi_dev: float
    diagonality_dev: float
    casimir_dev: float
    structural_ok: bool = True
    notes: list = field(default_factory=list)

    @property
    def passed(self):
        return (
            self.structural_ok
            and self.antisymmetry_dev <= JACOBI_TOL
            and self.jacobi_dev <= JACOBI_TOL
            and self.diagonality_dev <= DIAG_TOL
        )

    def __str__(self):
        lines = [
            f"antisymmetry max dev : {self.antisymmetry_dev:.3e}",
            f"jacobi max dev       : {self.jacobi_dev:.3e}",
            f"diagonality max dev  : {self.diagonality_dev:.3e}",
            f"casimir scalar dev   : {self.casimir_dev:.3e}",
            f"result               : {'PASS' if self.passed else 'FAIL'}",
        ]
        lines += [f"note: {n}" for n in self.notes]
        return "\n".join(lines)


def validate_geometry(spec):
    """Check bracket antisymmetry, the Jacobi identity, and the diagonal ansatz.

    Structural errors raise GeometryError; invariant violations are reported
    with the maximum deviation.  The diagonality probe evaluates the Ricci
    endomorphism of a random diagonal metric and measures its off-diagonal
    entries.
    """
    C = spec.brackets
    n = spec.n_total
    anti = float(np.max(np.abs(C + np.transpose(C, (1, 0, 2))))) if n else 0.0

    jac = 0.0
    if spec.has_brackets:
        # [[a,b],c] + [[b,c],a] + [[c,a],b] via one einsum per cyclic term
        t1 = np.einsum("abe,ecf->abcf", C, C)
        jac_t = t1 + np.transpose(t1, (1, 2, 0, 3)) + np.transpose(t1, (2, 0, 1, 3))
        jac = float(np.max(np.abs(jac_t)))

    diag_dev = 0.0
    if spec.has_brackets:
        rng = np.random.default_rng(12345)
        for _ in range(3):
            x = DiagonalTensor(rng.uniform(0.5, 2.0, spec.n_summands), spec)
            try:
                _, dev = _ricci_diagonal(spec, x.per_index())
            except NonDiagonalRicci as exc:
                dev = float(str(exc).rsplit("=", 1)[-1]) if "=" in str(exc) else np.inf
            diag_dev = max(diag_dev, dev)

    cas_dev = 0.0
    notes = []
    if spec.has_brackets and len(spec.minus_ids):
        try:
            _, cas_dev = _casimir_raw(spec)
        except NonScalarCasimir:
            cas_dev = np.inf
        for i in spec.minus_ids:
            s = spec.summands[i]
            if s.casimir_eigenvalue is not None:
                notes.append(f"summand {s.label}: declared casimir retained")
    elif not spec.has_brackets:
        if any(spec.summands[i].casimir_eigenvalue is not None for i in spec.minus_ids):
            notes.append("summand-table skeleton: declared casimir values in use")

    return ValidationReport(anti, jac, diag_dev, cas_dev, notes=notes)


# ---------------------------------------------------------------------------
# Ricci endomorphism (pointwise)


def ricci_bilinear_matrix(spec, g_index):
    """Full Ricci bilinear form of the diagonal metric with per-index scalars.

    g_index is one metric value per complement basis index.  Works for float
    and Fraction entries.  Returns an (n_p, n_p) array of the same kind.
    """
    pair_targets, kill = spec._sparse_terms()
    np_ = spec.n_p
    exact = np.asarray(g_index).dtype == object
    if exact:
        ginv = np.array([Fraction(1) / v for v in g_index], dtype=object)
        ric = np.array(
            [[Fraction(kill[a, b]).limit_denominator(10**12) for b in range(np_)]
             for a in range(np_)],
            dtype=object,
        )
    else:
        ginv = 1.0 / np.asarray(g_index, dtype=float)
        ric = kill.copy()

    # -1/2 sum_i g^{ii} g([a,i]_p, [b,i]_p): group bracket rows by partner i
    by_partner = {}
    for (x, i), targets in pair_targets.items():
        by_partner.setdefault(i, []).append((x, targets))
    for i, rows in by_partner.items():
        w = ginv[i]
        for (a, ta) in rows:
            for (b, tb) in rows:
                s = 0
                for (e1, c1) in ta:
                    for (e2, c2) in tb:
                        if e1 == e2:
                            s = s + c1 * c2 * g_index[e1]
                if s != 0:
                    half = Fraction(1, 2) if exact else 0.5
                    ric[a, b] = ric[a, b] - half * w * s

    # +1/4 sum_{i,p} g^{ii} g^{pp} g(a,[i,p]) g(b,[i,p])
    for (i, p), targets in pair_targets.items():
        w = ginv[i] * ginv[p]
        quarter = Fraction(1, 4) if exact else 0.25
        for (a, ca) in targets:
            for (b, cb) in targets:
                ric[a, b] = ric[a, b] + quarter * w * (g_index[a] * ca) * (g_index[b] * cb)
    return ric


def _ricci_diagonal(spec, g_index):
    """Diagonal of the Ricci endomorphism; raises if off-diagonal survives."""
    ric = ricci_bilinear_matrix(spec, g_index)
    ricf = ric.astype(float)
    scale = max(np.max(np.abs(ricf)), 1.0)
    off = ricf - np.diag(np.diag(ricf))
    dev = float(np.max(np.abs(off))) / scale if ricf.size else 0.0
    if dev > DIAG_TOL:
        raise NonDiagonalRicci(f"off-diagonal Ricci, relative dev = {dev:.3e}")
    r_index = np.array([ric[j, j] / g_index[j] for j in range(spec.n_p)],
                       dtype=ric.dtype)
    # collapse to one scalar per summand, checking within-summand agreement
    out = []
    pos = 0
    for s_i, s in enumerate(spec.summands):
        chunk = r_index[pos:pos + s.dim]
        cf = chunk.astype(float)
        if s.dim > 1 and np.max(np.abs(cf - cf[0])) > DIAG_TOL * scale:
            raise NonDiagonalRicci(
                f"Ricci not scalar on summand {s.label}, dev = "
                f"{np.max(np.abs(cf - cf[0])):.3e}"
            )
        out.append(chunk[0])
        pos += s.dim
    return np.array(out, dtype=r_index.dtype), dev


def ricci_endomorphism(spec, x):
    """Ricci endomorphism r of the diagonal metric x, with Ric(X,Y) = g(rX, Y).

    All metric scalars must be positive.  The computed bilinear form must be
    diagonal on the declared summands (relative tolerance 1e-10).
    """
    vals = x.values
    if any(float(v) <= 0.0 for v in vals):
        raise SingularMetric("metric scalars must be positive")
    r, _ = _ricci_diagonal(spec, x.per_index())
    return DiagonalTensor(r, spec)


def metric_at(spec, x, t):
    """Per-index metric scalars of g_t = t^2 x_+ ⊕ x_- at time t."""
    gi = x.per_index().copy()
    for j in range(spec.n_p):
        if spec.summands[spec.index_summand[j]].block is Block.PLUS:
            gi[j] = gi[j] * t * t
    return gi


def ricci_endomorphism_at(spec, x, t):
    """Ricci endomorphism of g_t = t^2 x_+ ⊕ x_- evaluated pointwise."""
    if t <= 0:
        raise SingularMetric("t must be positive")
    vals = x.values
    if any(float(v) <= 0.0 for v in vals):
        raise SingularMetric("metric scalars must be positive")
    r, _ = _ricci_diagonal(spec, metric_at(spec, x, t))
    return DiagonalTensor(r, spec)


# ---------------------------------------------------------------------------
# Casimir data


def _plus_basis_indices(spec):
    out = []
    pos = 0
    for s in spec.summands:
        if s.block is Block.PLUS:
            out.extend(range(pos, pos + s.dim))
        pos += s.dim
    return out


def _minus_basis_indices(spec):
    out = []
    pos = 0
    for s in spec.summands:
        if s.block is Block.MINUS:
            out.extend(range(pos, pos + s.dim))
        pos += s.dim
    return out


def _ad_on_minus(spec):
    """Matrices of ad(U_alpha) restricted to the minus block, one per plus basis vector."""
    kd = spec.isotropy_dim
    minus = _minus_basis_indices(spec)
    plus = _plus_basis_indices(spec)
    C = spec.brackets
    mats = []
    for al in plus:
        ad = np.array(
            [[C[kd + al, kd + b, kd + e] for b in minus] for e in minus]
        )
        mats.append(ad)
    return mats, minus


def _casimir_raw(spec):
    """Vector-level Casimir matrix on the minus block and its per-summand scalars.

    Returns (per-summand eigenvalues, max scalar deviation).  Raises
    NonScalarCasimir when the matrix is not scalar on a declared summand.
    """
    mats, minus = _ad_on_minus(spec)
    m = len(minus)
    cas = np.zeros((m, m))
    for ad in mats:
        cas -= ad @ ad
    scale = max(np.max(np.abs(cas)), 1.0) if m else 1.0
    eigs = []
    dev = 0.0
    pos = 0
    for s_i in spec.minus_ids:
        d = spec.summands[s_i].dim
        block = cas[pos:pos + d, pos:pos + d]
        lam = block[0, 0]
        dev = max(dev, float(np.max(np.abs(block - lam * np.eye(d)))) / scale)
        if m > d:
            cross = np.delete(cas[pos:pos + d, :], np.s_[pos:pos + d], axis=1)
            dev = max(dev, float(np.max(np.abs(cross))) / scale)
        eigs.append(float(lam))
        pos += d
    if dev > DIAG_TOL:
        raise NonScalarCasimir(f"Casimir not scalar per summand, dev = {dev:.3e}")
    return np.array(eigs), dev


def casimir_spectrum(spec):
    """Per-minus-summand Casimir eigenvalues (operator on minus vectors).

    Declared values take precedence for summand-table skeletons; otherwise the
    matrix -sum ad(U)^2 restricted to the minus block is computed from the
    bracket tensor and must be scalar on each summand.
    """
    if not len(spec.minus_ids):
        return np.array([])
    declared = [spec.summands[i].casimir_eigenvalue for i in spec.minus_ids]
    if not spec.has_brackets:
        if any(v is None for v in declared):
            raise NonScalarCasimir(
                "no bracket tensor and missing declared casimir values"
            )
        return np.array([float(v) for v in declared])
    eigs, _ = _casimir_raw(spec)
    if all(v is not None for v in declared):
        return np.array([float(v) for v in declared])
    return eigs


def casimir_vector_matrix(spec):
    """Raw vector-level Casimir matrix on the minus block (for PSD checks)."""
    mats, _ = _ad_on_minus(spec)
    m = sum(spec.summands[i].dim for i in spec.minus_ids)
    cas = np.zeros((m, m))
    for ad in mats:
        cas -= ad @ ad
    return cas


def casimir_endo_matrix(spec):
    """Casimir acting on diagonal endomorphisms of the minus block.

    Returns the (q-, q-) matrix in minus-summand scalar coordinates of the
    operator -sum [ad(U), [ad(U), .]] restricted to block-diagonal
    endomorphisms.  For a bracket-less skeleton this is diag of the declared
    eigenvalues.  When summands interact under ad(U) the matrix mixes them;
    the identity direction is always in its kernel.
    """
    q = len(spec.minus_ids)
    if q == 0:
        return np.zeros((0, 0))
    if not spec.has_brackets:
        return np.diag(casimir_spectrum(spec))
    mats, minus = _ad_on_minus(spec)
    m = len(minus)
    # projections onto each minus summand in minus-block coordinates
    projs = []
    pos = 0
    for s_i in spec.minus_ids:
        d = spec.summands[s_i].dim
        P = np.zeros((m, m))
        P[range(pos, pos + d), range(pos, pos + d)] = 1.0
        projs.append((P, d, pos))
        pos += d
    out = np.zeros((q, q))
    for j, (Pj, dj, posj) in enumerate(projs):
        cend = np.zeros((m, m))
        for ad in mats:
            cend -= ad @ ad @ Pj - 2.0 * ad @ Pj @ ad + Pj @ ad @ ad
        for i, (Pi, di, posi) in enumerate(projs):
            block = cend[posi:posi + di, posi:posi + di]
            out[i, j] = np.trace(block) / di
    return out
