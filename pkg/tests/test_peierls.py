import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ctk import corpus, lattice
from ctk.contour import ContourParams, ContourError, external_contours, extract_contours
from ctk.model import ModelParams, SpinConfiguration, c_alpha
from ctk.peierls import (
    RegimeError,
    collar,
    droplet_heuristic,
    energy_bound,
    energy_cost,
    nu_exact,
    nu_minus_exact,
    peierls_beta_c,
    peierls_constants,
    peierls_sum,
    triangle_ratio,
    truncation_radius,
)
import oracle_constants as oracle


def doubled(p):
    pc0 = peierls_constants(p)
    return ContourParams.from_model(p, M=2 * pc0.M_threshold)


class TestConstants:
    @pytest.mark.parametrize("d,alpha", [(2, 2.5), (2, 3.0), (2, 4.0), (3, 3.5)])
    def test_against_oracle(self, d, alpha):
        pc = peierls_constants(ModelParams(d=d, alpha=alpha))
        ref = oracle.chain(d, alpha)
        for key in ("k_alpha_1", "M1", "M2", "M_geometric", "M_threshold", "c2", "c3", "c4", "K_alpha"):
            got, want = getattr(pc, key), float(ref[key])
            assert got == pytest.approx(want, rel=1e-12, abs=1e-12 * abs(float(ref["c2"]))), key

    def test_threshold_is_strict(self):
        pc = peierls_constants(ModelParams(d=2, alpha=3.0))
        assert not pc.above_threshold
        pc2 = peierls_constants(ModelParams(d=2, alpha=3.0), doubled(ModelParams(d=2, alpha=3.0)))
        assert pc2.above_threshold and pc2.positive

    def test_low_M_not_positive(self):
        p = ModelParams(d=2, alpha=3.0)
        assert not peierls_constants(p, M=1.0).positive


class TestEnergy:
    @pytest.mark.parametrize("alpha", [2.5, 3.0, 4.0])
    def test_single_flip_costs_twice_c_alpha(self, alpha):
        p = ModelParams(d=2, alpha=alpha)
        sigma = SpinConfiguration.box(5, 2, -1).with_spins_at({(0, 0): 1})
        (g,) = extract_contours(sigma, ContourParams.from_model(p))
        assert energy_cost(sigma, g, p) == pytest.approx(2 * c_alpha(p), rel=1e-12)

    def test_cost_needs_minus_boundary(self):
        p = ModelParams()
        sigma = SpinConfiguration.box(5, 2, -1).with_spins_at({(0, 0): 1})
        (g,) = extract_contours(sigma, ContourParams.from_model(p))
        with pytest.raises(ContourError):
            energy_cost(SpinConfiguration(sigma.origin, sigma.spins, 1), g, p)

    def test_triangle_ratio(self):
        rng = np.random.default_rng(3)
        p = ModelParams(d=2, alpha=3.0)
        xs = rng.integers(-30, 31, size=(10_000, 2, 2))
        worst = math.inf
        for x, y in xs:
            if (x == y).all():
                continue
            worst = min(worst, triangle_ratio(tuple(x.tolist()), tuple(y.tolist()), p))
        assert worst >= 1.0

    @pytest.mark.parametrize("alpha", [2.5, 3.0, 4.0])
    def test_bound_at_doubled_threshold(self, alpha):
        p = ModelParams(d=2, alpha=alpha)
        cp = doubled(p)
        pc = peierls_constants(p, cp)
        checked = 0
        for item in corpus.configuration_corpus(30, seed=7, sizes=(4, 14)):
            sigma = item.sigma
            for g in external_contours(extract_contours(sigma, cp)):
                assert energy_cost(sigma, g, p) >= energy_bound(g, pc, p)
                checked += 1
        assert checked > 10


class TestTruncation:
    def test_pinned(self):
        p = ModelParams(d=2, alpha=2.5, delta=1.0, h_star=0.1)
        t = truncation_radius(p, peierls_constants(p, doubled(p)))
        assert t.regime == "short" and t.R1 is not None
        assert t.R == max(t.R_field, t.R1)
        assert t.R == pytest.approx(578525266.9, rel=1e-9)

    def test_against_oracle(self):
        p = ModelParams(d=2, alpha=2.5, delta=1.0, h_star=0.1)
        cp = doubled(p)
        t = truncation_radius(p, peierls_constants(p, cp))
        ref = oracle.chain(2, 2.5, M=cp.M, delta=1.0, h_star=0.1)
        assert t.R == pytest.approx(float(ref["R"]), rel=1e-10)

    def test_refusals(self):
        outside = ModelParams(d=2, alpha=3.0, delta=0.3, h_star=0.1)
        with pytest.raises(RegimeError):
            truncation_radius(outside, peierls_constants(outside, doubled(outside)))
        summable = ModelParams(d=2, alpha=3.0, delta=2.5, h_star=0.1)
        with pytest.raises(RegimeError):
            truncation_radius(summable, peierls_constants(summable, doubled(summable)))
        low = ModelParams(d=2, alpha=3.0, delta=1.0, h_star=0.1)
        with pytest.raises(RegimeError):
            truncation_radius(low, peierls_constants(low, M=1.0))

    def test_zero_field(self):
        p = ModelParams(d=2, alpha=3.0, delta=1.0)
        assert truncation_radius(p, peierls_constants(p, doubled(p))).R == 0.0


class TestPeierlsSum:
    def test_beta_c(self):
        p = ModelParams(d=2, alpha=3.0)
        pc = peierls_constants(p, doubled(p))
        c1 = oracle.chain(2, 3.0, M=pc.M)["c1"]
        bc = peierls_beta_c(float(c1), pc.c2)
        assert peierls_sum(bc * 1.0001, pc.c2, float(c1)) < 0.5
        assert peierls_sum(bc * 0.9999, pc.c2, float(c1)) > 0.5
        assert peierls_sum(0.0, pc.c2, float(c1)) == math.inf

    @given(st.floats(0.1, 10), st.floats(0.1, 10), st.floats(1, 50))
    def test_monotone_in_beta(self, c1, c2, beta):
        assert peierls_sum(beta * 1.5, c2, c1) <= peierls_sum(beta, c2, c1)

    def test_requires_positive_c2(self):
        with pytest.raises(RegimeError):
            peierls_sum(1.0, -1.0, 1.0)


class TestDroplet:
    def test_decreasing_in_beta(self):
        p = ModelParams(d=2, alpha=3.0, h_star=0.1, delta=1.0)
        a = droplet_heuristic(p, 0.5, 8)
        b = droplet_heuristic(p, 1.0, 8)
        assert b.value < a.value and not b.warnings

    def test_warnings(self):
        p = ModelParams(d=2, alpha=3.0)
        assert droplet_heuristic(p, 0.0, 3).warnings
        strong = ModelParams(d=2, alpha=3.0, h_star=50.0, delta=0.2)
        assert any("increasing" in w for w in droplet_heuristic(strong, 0.1, 6).warnings)
        with pytest.raises(ValueError):
            droplet_heuristic(p, 1.0, 0)


class TestNuExact:
    WIN = frozenset(lattice.cube_points(lattice.Cube(2, (0, 0))))

    @pytest.mark.parametrize(
        "beta,expected", [(0.5, 0.00138629089390066), (1.0, 1.927138183584519e-06), (2.0, 3.713875892905955e-12)]
    )
    def test_pinned(self, beta, expected):
        r = nu_minus_exact(self.WIN, ModelParams(d=2, alpha=3.0, beta=beta))
        assert r.probability == pytest.approx(expected, rel=1e-10)
        assert r.n_free == 1 and r.forced == 24

    def test_single_free_site_closed_form(self):
        # one free site: P(+) = 1 / (1 + exp(2 beta h_eff)) with h_eff = -c_alpha under an all-minus rest
        p = ModelParams(d=2, alpha=3.0, beta=0.5)
        r = nu_minus_exact(self.WIN, p)
        assert r.probability == pytest.approx(1 / (1 + math.exp(2 * p.beta * c_alpha(p))), rel=1e-12)

    def test_duality(self):
        p = ModelParams(d=2, alpha=2.5, beta=0.3)
        win = frozenset(lattice.cube_points(lattice.Cube(1, (0, 0)))) | {(2, 0), (0, 2)}
        plus = nu_exact(win, p, boundary=1, field_mode="zero", sign=-1)
        minus = nu_exact(win, p, boundary=-1, field_mode="zero", sign=1)
        assert plus.probability == pytest.approx(minus.probability, rel=1e-12)

    def test_collar(self):
        win = SpinConfiguration.box(3, 2).window()
        assert collar(win) == win
        assert nu_minus_exact(win, ModelParams()).warnings
        assert (0, 0) not in collar(lattice.l1_ball((0, 0), 3))

    def test_site_outside(self):
        with pytest.raises(ValueError):
            nu_exact(self.WIN, ModelParams(), site=(9, 9))
