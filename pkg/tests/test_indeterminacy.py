import numpy as np
import pytest

from orbisol import (
    Block,
    GeometrySpec,
    StabilizationNotReached,
    SummandSpec,
    abelian_skeleton,
    example1_counts_skeleton,
    indeterminacy_total,
    kernel_scan,
    planted_root_skeleton,
    stiefel_codim2_counts_skeleton,
)


class TestFixtureCounts:
    def test_stiefel_so4(self, stiefel4):
        rep = kernel_scan(stiefel4)
        assert rep.per_order.get(0) == (1, 0)
        assert indeterminacy_total(rep) == 1
        # the exact operator disagrees with the scalar attribution here and
        # the report must say so rather than hide it
        assert any("exact operator kernel" in f for f in rep.flags)
        assert any("share dimension and Casimir" in f for f in rep.flags)

    def test_codim2_variant(self):
        rep = kernel_scan(stiefel_codim2_counts_skeleton())
        assert rep.per_order.get(0) == (1, 1)
        assert indeterminacy_total(rep) == 2

    def test_example1(self):
        rep = kernel_scan(example1_counts_skeleton())
        assert rep.per_order.get(0) == (1, 1)
        assert indeterminacy_total(rep) == 2

    def test_abelian_flat_plus_only(self):
        rep = kernel_scan(abelian_skeleton(3, minus_dims=(2, 4)))
        # all Casimir values zero: (m+1+k)(m+2) >= 2(k+1) > 0 never hit
        assert all(md == 0 for _, md in rep.per_order.values())
        assert indeterminacy_total(rep) == 0  # single plus summand


class TestRootCondition:
    def test_planted_root_reported_at_m2(self):
        k = 2
        spec = planted_root_skeleton(k, (k + 3) * 4)  # root of the m = 2 condition
        rep = kernel_scan(spec)
        assert rep.per_order.get(2) == (0, 1)
        assert rep.triggering[2] == ["mP"]

    def test_root_residual_exact(self):
        k = 3
        for m in (0, 1, 4):
            lam = (m + 1 + k) * (m + 2)
            rep = kernel_scan(planted_root_skeleton(k, lam))
            assert rep.per_order.get(m, (0, 0))[1] == 1
            assert abs((m + 1 + k) * (m + 2) - lam) < 1e-9 * lam

    def test_near_miss_not_reported(self):
        k = 2
        lam = (k + 3) * 4 + 0.3  # off every root by a unit-scale gap
        rep = kernel_scan(planted_root_skeleton(k, lam))
        assert all(md == 0 for _, md in rep.per_order.values())

    def test_no_kernel_beyond_quadratic_bound(self):
        spec = stiefel_codim2_counts_skeleton()
        rep = kernel_scan(spec, M_max=50)
        lam_max = 6.0
        k = spec.k
        bound = (-(k + 3) + np.sqrt((k + 3) ** 2 - 4 * (2 * (k + 1) - lam_max))) / 2
        assert all(m <= bound + 1e-9 for m in rep.per_order if rep.per_order[m][1])

    def test_stabilization_not_reached(self):
        k = 1
        m_big = 60
        lam = (m_big + 1 + k) * (m_big + 2)
        with pytest.raises(StabilizationNotReached):
            kernel_scan(planted_root_skeleton(k, lam), M_max=50)


class TestReportShape:
    def test_summand_reorder_invariance(self):
        a = stiefel_codim2_counts_skeleton()
        reordered = GeometrySpec(
            k=a.k,
            summands=[a.summands[1], a.summands[0], a.summands[3], a.summands[2]],
            brackets=None, isotropy_dim=0, name="permuted",
        )
        ra, rb = kernel_scan(a), kernel_scan(reordered)
        assert ra.per_order == rb.per_order
        assert ra.total == rb.total
        assert ra.stabilization_orders == rb.stabilization_orders

    def test_stabilization_orders(self):
        # even kernel at m = 0 means the even polynomial spaces grow once
        rep = kernel_scan(stiefel_codim2_counts_skeleton())
        assert rep.stabilization_orders == (1, 0)
        k = 2
        spec = planted_root_skeleton(k, (1 + 1 + k) * 3)  # odd root m = 1
        rep = kernel_scan(spec)
        assert rep.per_order.get(1, (0, 0))[1] == 1
        assert rep.stabilization_orders == (0, 1)

    def test_table_renders(self, stiefel4):
        text = kernel_scan(stiefel4).table()
        assert "total indeterminacy: 1" in text

    def test_multiplicity_flag(self):
        spec = GeometrySpec(
            k=1,
            summands=[
                SummandSpec("p", 1, Block.PLUS),
                SummandSpec("mA", 2, Block.MINUS, casimir_eigenvalue=1.0),
                SummandSpec("mB", 2, Block.MINUS, casimir_eigenvalue=1.0),
            ],
            brackets=None, isotropy_dim=0, name="mult",
        )
        rep = kernel_scan(spec)
        assert any("undercount" in f for f in rep.flags)
