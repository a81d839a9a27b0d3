"""Builtin geometry generators and data presets.

The rotation-algebra skeletons carry full bracket tensors so structure
constants never have to be typed by hand.  Two additional summand-table
skeletons carry declared Casimir data only; they exist to reproduce known
indeterminacy counts in scalar coordinates and cannot be integrated.
"""
from __future__ import annotations

import re

import numpy as np

from .errors import GeometryError
from .geometry import Block, GeometrySpec, SummandSpec


def _so_bracket_tensor(N, order_pairs):
    """Bracket tensor of so(N) on the basis L_{ij} = E_ij - E_ji, i<j.

    order_pairs gives the adapted ordering of the (i, j) pairs (0-based).
    """
    idx = {p: a for a, p in enumerate(order_pairs)}
    n = len(order_pairs)
    C = np.zeros((n, n, n))
    mats = []
    for (i, j) in order_pairs:
        M = np.zeros((N, N))
        M[i, j] = 1.0
        M[j, i] = -1.0
        mats.append(M)
    for a in range(n):
        for b in range(n):
            M = mats[a] @ mats[b] - mats[b] @ mats[a]
            for (i, j), c in idx.items():
                C[a, b, c] = M[i, j]
    return C


def sphere_skeleton(n):
    """Round sphere S^n principal orbit collapsing to a point.

    so(n+1) with isotropy so(n); one plus summand of dimension n, no minus
    block.  The basis is normalized so x = 1 gives the unit round sphere of
    radius t in the collapsing family.
    """
    if n < 1:
        raise GeometryError("sphere dimension must be >= 1")
    if n == 1:
        return circle_skeleton()
    iso_pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    plus_pairs = [(i, n) for i in range(n)]
    C = _so_bracket_tensor(n + 1, iso_pairs + plus_pairs)
    summands = [SummandSpec("s", n, Block.PLUS)]
    return GeometrySpec(k=n, summands=summands, brackets=C,
                        isotropy_dim=len(iso_pairs), name=f"sphere({n})")


def circle_skeleton():
    """Circle principal orbit (flat S^1 fibers); abelian, k = 1."""
    summands = [SummandSpec("s", 1, Block.PLUS)]
    return GeometrySpec(k=1, summands=summands, brackets=None,
                        isotropy_dim=0, name="circle")


def stiefel_skeleton(n=2):
    """Stiefel principal orbit SO(n+2)/SO(n) collapsing onto S^(n+1).

    so(n+2) with isotropy so(n) acting on the first n coordinates.  The
    sphere block and the standard-representation part of the orbit block are
    declared as singleton summands (scalar coordinates expose each free
    direction separately); the Ricci form of any diagonal metric on this
    frame is diagonal, which validate_geometry checks.
    """
    if n < 2:
        raise GeometryError("stiefel skeleton needs n >= 2")
    N = n + 2
    iso_pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    plus_pairs = [(i, n) for i in range(n)]          # tangent to S^n = H/K
    minus_std = [(i, n + 1) for i in range(n)]       # standard-rep part of the orbit
    minus_triv = [(n, n + 1)]                        # K-trivial direction
    C = _so_bracket_tensor(N, iso_pairs + plus_pairs + minus_std + minus_triv)
    summands = [SummandSpec(f"p{i+1}", 1, Block.PLUS) for i in range(n)]
    summands += [SummandSpec(f"m{i+1}", 1, Block.MINUS) for i in range(n)]
    summands += [SummandSpec("m0", 1, Block.MINUS)]
    return GeometrySpec(k=n, summands=summands, brackets=C,
                        isotropy_dim=len(iso_pairs), name=f"stiefel-so({n + 2})")


def stiefel_codim2_counts_skeleton(n=2):
    """Summand-table skeleton reproducing the codimension-two Stiefel counts.

    Regression fixture with a known indeterminacy pattern: one relative plus
    freedom at order 0 and one minus kernel at order 0 (declared Casimir value
    planted at the order-0 root 2(k+1) on the carrier summand).  No bracket
    tensor; usable for kernel scans only.
    """
    k = 2
    summands = [
        SummandSpec("pa", 1, Block.PLUS),
        SummandSpec("pb", 1, Block.PLUS),
        SummandSpec("mA", n, Block.MINUS, casimir_eigenvalue=1.0),
        SummandSpec("mB", n, Block.MINUS, casimir_eigenvalue=float(2 * (k + 1))),
    ]
    return GeometrySpec(k=k, summands=summands, brackets=None,
                        isotropy_dim=0, name=f"stiefel-codim2({n})")


def example1_counts_skeleton(p=2, n=3):
    """Summand-table skeleton with the real-Grassmannian-family count pattern.

    One relative plus freedom at order 0 plus one minus kernel at order 0
    (declared Casimir at the root): total indeterminacy two.  No bracket
    tensor; kernel scans only.
    """
    k = n - 1
    summands = [
        SummandSpec("pa", 1, Block.PLUS),
        SummandSpec("pb", 1, Block.PLUS),
        SummandSpec("mI", p * (n - 1), Block.MINUS, casimir_eigenvalue=1.0),
        SummandSpec("mII", p, Block.MINUS, casimir_eigenvalue=float(2 * (k + 1))),
    ]
    if k != 2:
        raise GeometryError("counts skeleton is tabulated for n = 3 (k = 2)")
    return GeometrySpec(k=k, summands=summands, brackets=None,
                        isotropy_dim=0, name=f"example1-so({p}+{n})")


def planted_root_skeleton(k, lam, dim_minus=2, label="planted"):
    """Summand table with one minus summand at a chosen Casimir value."""
    summands = [SummandSpec("p1", k, Block.PLUS),
                SummandSpec("mP", dim_minus, Block.MINUS, casimir_eigenvalue=float(lam))]
    return GeometrySpec(k=k, summands=summands, brackets=None,
                        isotropy_dim=0, name=label)


def abelian_skeleton(k=1, minus_dims=()):
    """All-brackets-zero spec; any summand layout (test gadget)."""
    summands = [SummandSpec("p1", k, Block.PLUS)]
    summands += [SummandSpec(f"m{i+1}", d, Block.MINUS, casimir_eigenvalue=0.0)
                 for i, d in enumerate(minus_dims)]
    return GeometrySpec(k=k, summands=summands, brackets=None,
                        isotropy_dim=0, name="abelian")


# ---------------------------------------------------------------------------
# name registry: geometry + data presets used by the CLI


_NAME_RE = re.compile(r"^([a-z0-9-]+?)(?:\((\d+(?:,\d+)*)\))?$")


def resolve_geometry(name, **params):
    """Map a builtin name like 'bryant-sphere(3)' to (spec, data presets).

    Presets fill epsilon/u2 only where the family pins them; explicit CLI
    flags override.
    """
    m = _NAME_RE.match(name.strip())
    if not m:
        raise GeometryError(f"cannot parse geometry name {name!r}")
    base, args = m.group(1), m.group(2)
    nums = [int(v) for v in args.split(",")] if args else []

    def arg(key, default=None):
        if nums:
            return nums[0]
        if key in params and params[key] is not None:
            return params[key]
        if default is None:
            raise GeometryError(f"geometry {base!r} needs a size parameter")
        return default

    if base == "gaussian-flat":
        k = arg("k")
        eps = params.get("epsilon")
        preset = {"u2": (-eps / 2.0) if eps is not None else None}
        return sphere_skeleton(k), preset
    if base == "bryant-sphere":
        return sphere_skeleton(arg("n")), {"epsilon": 0.0}
    if base == "cigar":
        return circle_skeleton(), {"epsilon": 0.0, "u2": -2.0}
    if base == "sine-cone":
        n = arg("n")
        return sphere_skeleton(n), {"epsilon": -2.0 * n, "u2": 0.0}
    if base == "stiefel-so":
        total = arg("n")
        return stiefel_skeleton(total - 2), {}
    if base == "stiefel-codim2":
        return stiefel_codim2_counts_skeleton(arg("n", 2)), {}
    if base == "example1-so":
        return example1_counts_skeleton(), {}
    if base == "abelian-flat":
        return abelian_skeleton(arg("k", 1)), {}
    raise GeometryError(f"unknown builtin geometry {name!r}")
