"""Structured-text geometry files and CSV exports."""
from __future__ import annotations

import csv

import numpy as np

from .errors import GeometryError
from .geometry import Block, GeometrySpec, SummandSpec


def load_geometry(path):
    """Read a geometry file.

    Line forms (0-based indices into the adapted basis, '#' comments):

        name <string>
        k <int>
        isotropy_dim <int>
        summand <label> <dim> <plus|minus> [<casimir>]
        bracket <a> <b> <c> <value>
    """
    name = "file"
    k = None
    iso = 0
    summands = []
    bracket_rows = []
    with open(path) as fh:
        for ln, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            tag = parts[0]
            try:
                if tag == "name":
                    name = parts[1]
                elif tag == "k":
                    k = int(parts[1])
                elif tag == "isotropy_dim":
                    iso = int(parts[1])
                elif tag == "summand":
                    label, dim, block = parts[1], int(parts[2]), parts[3]
                    cas = float(parts[4]) if len(parts) > 4 else None
                    summands.append(SummandSpec(
                        label, dim,
                        Block.PLUS if block == "plus" else Block.MINUS,
                        casimir_eigenvalue=cas,
                    ))
                elif tag == "bracket":
                    a, b, c = int(parts[1]), int(parts[2]), int(parts[3])
                    bracket_rows.append((a, b, c, float(parts[4])))
                else:
                    raise GeometryError(f"unknown directive {tag!r}")
            except (IndexError, ValueError) as exc:
                raise GeometryError(f"{path}:{ln}: {exc}") from exc
    if k is None:
        raise GeometryError(f"{path}: missing 'k'")
    n = iso + sum(s.dim for s in summands)
    C = np.zeros((n, n, n))
    for (a, b, c, v) in bracket_rows:
        if not (0 <= a < n and 0 <= b < n and 0 <= c < n):
            raise GeometryError(f"bracket index out of range: {(a, b, c)}")
        C[a, b, c] = v
    return GeometrySpec(k=k, summands=summands, brackets=C,
                        isotropy_dim=iso, name=name)


def dump_geometry(spec, path):
    with open(path, "w") as fh:
        fh.write(f"name {spec.name}\n")
        fh.write(f"k {spec.k}\n")
        fh.write(f"isotropy_dim {spec.isotropy_dim}\n")
        for s in spec.summands:
            cas = f" {s.casimir_eigenvalue}" if s.casimir_eigenvalue is not None else ""
            fh.write(f"summand {s.label} {s.dim} {s.block.value}{cas}\n")
        nz = np.argwhere(spec.brackets != 0.0)
        for (a, b, c) in nz:
            fh.write(f"bracket {a} {b} {c} {spec.brackets[a, b, c]!r}\n")


def trajectory_to_csv(spec, traj, path, eps, n_samples=200):
    """(t, x per summand, y per summand, udot, uddot, first-integral residual,
    soliton residual norm) rows."""
    from .flow import first_integral_residual, soliton_residual_along

    ts = traj.grid(n_samples)
    fi = first_integral_residual(spec, eps, traj, ts)
    orb, trv = soliton_residual_along(spec, eps, traj, ts)
    labels = spec.labels()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(
            ["t"] + [f"x_{l}" for l in labels] + [f"y_{l}" for l in labels]
            + ["udot", "uddot", "first_integral_residual", "soliton_residual"]
        )
        for i, t in enumerate(ts):
            st = traj.state_at(t)
            w.writerow(
                [f"{t:.12g}"]
                + [f"{v:.12g}" for v in st.x.values]
                + [f"{v:.12g}" for v in st.y.values]
                + [f"{st.udot:.12g}", f"{st.uddot:.12g}",
                   f"{fi[i]:.6e}", f"{max(orb[i], trv[i]):.6e}"]
            )


def plot_data_csv(spec, traj, path, n_samples=400):
    """Profile functions: t*sqrt(x) on plus summands, sqrt(x) on minus."""
    from .geometry import Block

    ts = traj.grid(n_samples)
    labels = spec.labels()
    plus = spec.block_mask(Block.PLUS)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t"] + [f"f_{l}" for l in labels])
        for t in ts:
            st = traj.state_at(t)
            row = [f"{t:.12g}"]
            for i, v in enumerate(st.x.values):
                f = (t if plus[i] else 1.0) * np.sqrt(max(v, 0.0))
                row.append(f"{f:.12g}")
            w.writerow(row)


def kernel_report_to_csv(report, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["m", "plus_kernel_dim", "minus_kernel_dim", "triggering_summands"])
        for m in sorted(report.per_order):
            p, mi = report.per_order[m]
            w.writerow([m, p, mi, ";".join(report.triggering.get(m, []))])
