import dataclasses
import math

import numpy as np
import pytest

from sdfem.mesh import AxisSpec, OutOfDomain, build_mesh
from sdfem.problem import make_benchmark
from sdfem.stabilization import DeltaField, DeltaVariant, DomainError, admissible_cstar


def bench(N=8, eps=1e-8):
    p = make_benchmark(eps)
    m = build_mesh(AxisSpec(N=N, epsilon=eps, beta=2.0), AxisSpec(N=N, epsilon=eps, beta=1.0))
    return p, m


class TestRamps:
    def test_endpoints(self):
        _, m = bench()
        d = DeltaField.from_mesh(m, DeltaVariant.MODIFIED, 0.5)
        assert d.xi(d.x_s) == 1.0
        assert d.xi(d.x_t) == pytest.approx(0.0, abs=1e-12)
        assert d.eta(d.y_s) == 1.0
        assert d.eta(d.y_t) == pytest.approx(0.0, abs=1e-12)

    def test_midpoint_linearity(self):
        _, m = bench()
        d = DeltaField.from_mesh(m, DeltaVariant.MODIFIED, 0.5)
        assert d.xi(d.x_s + d.H_x / 2) == pytest.approx(0.5, rel=1e-12)
        assert d.eta(d.y_s + d.H_y / 2) == pytest.approx(0.5, rel=1e-12)

    def test_domain_errors(self):
        _, m = bench()
        d = DeltaField.from_mesh(m, DeltaVariant.MODIFIED, 0.5)
        with pytest.raises(DomainError):
            d.xi(1.0)  # beyond the transition point
        with pytest.raises(DomainError):
            d.eta(-0.1)


class TestDelta:
    def test_standard_value_in_omega_s(self):
        _, m = bench(N=8)
        d = DeltaField.from_mesh(m, DeltaVariant.STANDARD, 0.5)
        assert d.delta(0.5, 0.5) == 0.0625  # c_star / N exactly

    def test_modified_equals_standard_inside_inner_region(self):
        _, m = bench(N=8)
        ds = DeltaField.from_mesh(m, DeltaVariant.STANDARD, 0.5)
        dm = DeltaField.from_mesh(m, DeltaVariant.MODIFIED, 0.5)
        for x, y in ((0.1, 0.1), (d := 0.3, d), (m.x_s, m.y_s)):
            assert dm.delta(x, y) == ds.delta(x, y)

    def test_vanishes_in_layers(self):
        _, m = bench()
        for variant in DeltaVariant:
            d = DeltaField.from_mesh(m, variant, 0.5)
            assert d.delta(1.0 - m.x_axis.lam / 2, 0.5) == 0.0
            assert d.delta(0.5, 1.0 - m.y_axis.lam / 2) == 0.0

    def test_out_of_domain(self):
        _, m = bench()
        d = DeltaField.from_mesh(m, DeltaVariant.STANDARD, 0.5)
        with pytest.raises(OutOfDomain):
            d.delta(1.5, 0.5)

    def test_invalid_cstar(self):
        _, m = bench()
        with pytest.raises(ValueError):
            DeltaField.from_mesh(m, DeltaVariant.STANDARD, 0.0)


class TestVectorizedEvaluation:
    def test_cellwise_mask_controls_support(self):
        _, m = bench(N=8)
        d = DeltaField.from_mesh(m, DeltaVariant.STANDARD, 0.5)
        x = np.array([0.5, 0.5])
        y = np.array([0.5, 0.5])
        vals = d.evaluate_cells(np.array([True, False]), x, y)
        assert vals[0] == 0.0625
        assert vals[1] == 0.0

    def test_cellwise_immune_to_sub_ulp_layers(self):
        # at eps = 1e-16 layer cell widths are below one ulp of 1.0, so the
        # quadrature abscissae of the first layer cell round onto x_t; the
        # cell-driven form must still return zero there
        _, m = bench(N=64, eps=1e-16)
        d = DeltaField.from_mesh(m, DeltaVariant.STANDARD, 0.5)
        x = np.array([m.x_t])  # rounded abscissa of a layer-cell point
        y = np.array([0.5])
        assert d.evaluate_cells(np.array([False]), x, y)[0] == 0.0

    def test_matches_pointwise_on_omega_s(self):
        _, m = bench(N=8, eps=1e-4)
        for variant in DeltaVariant:
            d = DeltaField.from_mesh(m, variant, 0.7)
            xs = np.linspace(0.05, float(m.x_t) - 1e-6, 9)
            ys = np.linspace(0.05, float(m.y_t) - 1e-6, 9)
            vec = d.evaluate_cells(np.ones_like(xs, dtype=bool), xs, ys)
            for k in range(9):
                assert vec[k] == pytest.approx(d.delta(float(xs[k]), float(ys[k])), rel=1e-12)


class TestAdmissibleCstar:
    def test_benchmark_cap_is_half_n(self):
        p, m = bench(N=8)
        assert admissible_cstar(p, m) == pytest.approx(4.0, rel=1e-12)
        p16, m16 = bench(N=16)
        assert admissible_cstar(p16, m16) == pytest.approx(8.0, rel=1e-12)

    def test_reaction_free_problem_is_uncapped(self):
        p, m = bench(N=8)
        free = dataclasses.replace(p, c=lambda x, y: 0.0 * x)
        assert admissible_cstar(free, m) == math.inf

    def test_linear_in_mu0(self):
        p, m = bench(N=8)
        doubled = dataclasses.replace(p, mu0=2.0)
        assert admissible_cstar(doubled, m) == pytest.approx(2 * admissible_cstar(p, m), rel=1e-12)

    def test_mismatched_mesh_rejected(self):
        _, m8 = bench(N=8)
        _, m16 = bench(N=16)
        d = DeltaField.from_mesh(m8, DeltaVariant.STANDARD, 0.5)
        assert d.matches(m8)
        assert not d.matches(m16)
