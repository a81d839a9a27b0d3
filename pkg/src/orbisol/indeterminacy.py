"""Order-by-order kernel dimensions of the recursion operators.

The report follows the scalar-coordinate counting model: the order-0 plus
freedom is the trace-free subspace of the declared plus scalars, and a minus
summand contributes one free direction at each order m where its Casimir
eigenvalue hits (m+1+k)(m+2).  Where a bracket tensor is available the exact
matrix kernels are scanned as well and any disagreement with the scalar model
is flagged rather than hidden; the same goes for summand pairs that share
dimension and Casimir eigenvalue, where the scalar model is known to
undercount.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import StabilizationNotReached
from .geometry import Block, casimir_spectrum
from .recursion import kernel_basis

ROOT_TOL = 1e-9


@dataclass
class IndeterminacyReport:
    geometry: object
    per_order: dict            # m -> (plus_dim, minus_dim)
    triggering: dict           # m -> [summand labels]
    stabilization_orders: tuple
    total: int
    matrix_kernel_dims: dict = field(default_factory=dict)  # m -> exact dim
    flags: list = field(default_factory=list)
    scan_limit: int = 50

    def table(self):
        lines = ["   m  plus  minus  triggering"]
        for m in sorted(self.per_order):
            p, mi = self.per_order[m]
            trig = ",".join(self.triggering.get(m, [])) or "-"
            lines.append(f"{m:4d}  {p:4d}  {mi:5d}  {trig}")
        lines.append(f"stabilization orders (even, odd): {self.stabilization_orders}")
        lines.append(f"total indeterminacy: {self.total}")
        for f in self.flags:
            lines.append(f"flag: {f}")
        return "\n".join(lines)


def _minus_root_orders(lam, k, M_max):
    """Orders m >= 0 with (m+1+k)(m+2) = lam, solved exactly."""
    # quadratic m^2 + (k+3) m + 2(k+1) - lam = 0
    disc = (k + 3) ** 2 - 4 * (2 * (k + 1) - lam)
    if disc < 0:
        return []
    root = (-(k + 3) + math.sqrt(disc)) / 2.0
    m = int(round(root))
    if m < 0 or m > M_max:
        return []
    if abs((m + 1 + k) * (m + 2) - lam) <= ROOT_TOL * max(lam, 1.0):
        return [m]
    return []


def kernel_scan(spec, M_max=50):
    """Scan kernel dimensions through order M_max and locate stabilization.

    Returns an IndeterminacyReport; the per-order counts follow the
    scalar-coordinate model (plus trace-free freedom at order 0, Casimir
    roots on the minus block).
    """
    k = spec.k
    lam = casimir_spectrum(spec)
    p = len(spec.plus_ids)
    per_order = {}
    triggering = {}

    plus0 = max(p - 1, 0)
    if plus0:
        per_order[0] = (plus0, 0)
        triggering[0] = [spec.summands[i].label for i in spec.plus_ids]

    minus_orders = []
    for pos, i in enumerate(spec.minus_ids):
        label = spec.summands[i].label
        for m in _minus_root_orders(lam[pos], k, M_max):
            pm = per_order.get(m, (0, 0))
            per_order[m] = (pm[0], pm[1] + 1)
            triggering.setdefault(m, []).append(label)
            minus_orders.append(m)

    # structural bound: beyond the largest root of the quadratic condition no
    # kernel can appear
    if len(lam):
        lam_max = max(lam)
        bound = (-(k + 3) + math.sqrt((k + 3) ** 2 - 4 * (2 * (k + 1) - lam_max))) / 2 \
            if (k + 3) ** 2 - 4 * (2 * (k + 1) - lam_max) >= 0 else 0.0
        if bound > M_max:
            raise StabilizationNotReached(
                f"Casimir value {lam_max} has kernel order beyond scan limit {M_max}"
            )

    even = [m for m in minus_orders if m % 2 == 0]
    odd = [m for m in minus_orders if m % 2 == 1]
    m0 = (max(even) + 2) // 2 if even else 0
    m1 = (max(odd) + 1) // 2 if odd else 0

    flags = []
    seen = {}
    for pos, i in enumerate(spec.minus_ids):
        key = (spec.summands[i].dim, round(lam[pos], 9))
        if key in seen:
            flags.append(
                f"summands {seen[key]} and {spec.summands[i].label} share "
                f"dimension and Casimir eigenvalue: scalar-coordinate counts "
                f"may undercount intertwining freedom"
            )
        else:
            seen[key] = spec.summands[i].label

    matrix_dims = {}
    if spec.has_brackets:
        minus_mask = spec.block_mask(Block.MINUS)
        check_to = max([0] + minus_orders) + 2
        for m in range(0, min(check_to, M_max) + 1):
            basis = kernel_basis(spec, m)
            dim = len(basis)
            if dim:
                matrix_dims[m] = dim
            pure_plus = sum(
                1 for v in basis
                if float(np.max(np.abs(v.values[minus_mask]))) < 1e-9
            ) if dim else 0
            model_p, model_m = per_order.get(m, (0, 0))
            if (pure_plus, dim - pure_plus) != (model_p, model_m):
                flags.append(
                    f"order {m}: exact operator kernel splits as "
                    f"({pure_plus} plus-supported, {dim - pure_plus} mixed/minus) "
                    f"vs scalar-model count ({model_p}, {model_m})"
                )

    total = sum(pd + md for pd, md in per_order.values())
    return IndeterminacyReport(
        geometry=spec,
        per_order=per_order,
        triggering=triggering,
        stabilization_orders=(m0, m1),
        total=total,
        matrix_kernel_dims=matrix_dims,
        flags=flags,
        scan_limit=M_max,
    )


def indeterminacy_total(report):
    """Total free dimensions beyond the geometric data, summed over orders."""
    if any(m >= report.scan_limit for m in report.per_order):
        raise StabilizationNotReached(
            "kernels persist at the scan limit; raise M_max"
        )
    return report.total
