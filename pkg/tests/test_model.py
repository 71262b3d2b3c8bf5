import itertools
import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ctk import constants, corpus, lattice
from ctk.model import (
    CapExceeded,
    FieldMode,
    ModelError,
    ModelParams,
    SpinConfiguration,
    c_alpha,
    coupling,
    exact_expectations,
    field,
    field_array,
    field_sum,
    hamiltonian,
    interaction_sums,
    lattice_sum_radial,
    log_partition_function_exact,
    pair_distance_histogram,
    sphere_polynomial,
    surface_energy,
)
import oracle_constants as oracle
from strategies import configurations, connected_regions, regions


def brute_hamiltonian(sigma, p, field_mode="full"):
    """Pair-by-pair evaluation with the exterior folded through the oracle c_alpha."""
    pts = [tuple(q) for q in sigma.points().tolist()]
    vals = dict(zip(pts, sigma.values().tolist()))
    ca = float(oracle.c_alpha(p.d, p.alpha))
    mode = FieldMode.parse(field_mode)
    H = 0.0
    for x, y in itertools.combinations(pts, 2):
        H -= coupling(x, y, p) * vals[x] * vals[y]
    for x in pts:
        inside = sum(coupling(x, y, p) for y in pts if y != x)
        H -= vals[x] * sigma.boundary * (p.J * ca - inside)
        H -= vals[x] * float(field_array(np.array([x]), p, mode)[0])
    return H


class TestParams:
    def test_validation(self):
        with pytest.raises(ModelError):
            ModelParams(d=2, alpha=2.0)
        with pytest.raises(ModelError):
            ModelParams(J=0)
        with pytest.raises(ModelError):
            ModelParams(h_star=-1)

    def test_round_trip(self):
        p = ModelParams(d=3, alpha=3.5, delta=0.7, h_star=0.2, beta=0.4)
        assert ModelParams.from_mapping(p.to_dict()) == p
        assert p.replace(beta=2.0).beta == 2.0

    def test_field_mode(self):
        assert FieldMode.parse("truncated:5") == FieldMode("truncated", 5.0)
        assert str(FieldMode.parse("truncated:5")) == "truncated:5"
        with pytest.raises(ModelError):
            FieldMode.parse("bogus")


class TestCouplingAndField:
    def test_examples(self):
        p = ModelParams(d=2, alpha=3, h_star=2.0, delta=1.0)
        assert coupling((0, 0), (1, 0), p) == 1.0
        assert coupling((0, 0), (1, 1), p) == 2.0**-3
        assert coupling((1, 1), (1, 1), p) == 0.0
        assert field((0, 0), p) == 2.0
        assert field((2, 0), p) == 1.0

    def test_truncated(self):
        p = ModelParams(h_star=1.0)
        pts = np.array([[0, 0], [1, 0], [3, 0]])
        assert field_array(pts, p, FieldMode("truncated", 2.0)).tolist() == [0.0, 0.0, 1 / 3]
        assert field_array(pts, p, "zero").tolist() == [0.0, 0.0, 0.0]


class TestLatticeSum:
    @pytest.mark.parametrize("d,alpha", [(1, 2.0), (2, 2.5), (2, 3.0), (2, 4.0), (3, 3.5), (3, 5.0)])
    def test_against_zeta_oracle(self, d, alpha):
        est = lattice_sum_radial(ModelParams(d=d, alpha=alpha))
        exact = oracle.c_alpha(d, alpha)
        assert abs(est.value - float(exact)) <= est.error + 1e-15
        assert est.error < 1e-12

    def test_known_values(self):
        assert c_alpha(ModelParams(d=2, alpha=3.0)) == pytest.approx(4 * math.pi**2 / 6, rel=1e-13)
        assert c_alpha(ModelParams(d=1, alpha=2.0)) == pytest.approx(math.pi**2 / 3, rel=1e-13)

    @pytest.mark.parametrize("d", [1, 2, 3, 4])
    def test_sphere_polynomial(self, d):
        for n in range(1, 25):
            assert sum(c * n**m for m, c in enumerate(sphere_polynomial(d))) == lattice.sphere_count(d, n)

    def test_tolerance_refinement(self):
        coarse = ModelParams(d=2, alpha=2.5, tail_tol=1e-8)
        fine = coarse.replace(tail_tol=1e-9)
        sigma = corpus.random_configuration(1, 6, 2, 0.3)
        diff = abs(hamiltonian(sigma, coarse) - hamiltonian(sigma, fine))
        n = len(sigma.points())
        assert diff < n * coarse.tail_tol


class TestPairSums:
    @given(regions(2, min_size=2, max_size=40, lo=-8, hi=8))
    def test_histogram_fft_matches_direct(self, reg):
        a = pair_distance_histogram(reg, "direct")
        b = pair_distance_histogram(reg, "fft")
        n = max(len(a), len(b))
        assert np.array_equal(np.pad(a, (0, n - len(a))), np.pad(b, (0, n - len(b))))
        assert a.sum() == len(reg) * (len(reg) - 1)

    @given(regions(2, min_size=1, max_size=30, lo=-6, hi=6), st.integers(0, 2**31))
    def test_interaction_sums_fft_matches_direct(self, reg, seed):
        pts = lattice.as_array(reg)
        w = np.random.default_rng(seed).normal(size=len(pts))
        p = ModelParams(d=2, alpha=2.5)
        assert np.allclose(interaction_sums(pts, w, p, "direct"), interaction_sums(pts, w, p, "fft"), atol=1e-10)

    def test_surface_energy_singleton(self):
        p = ModelParams(d=2, alpha=3.0, J=2.0)
        assert surface_energy({(5, 5)}, p) == pytest.approx(2.0 * c_alpha(p))

    @given(connected_regions(2, 30))
    def test_surface_energy_translation_invariant(self, reg):
        p = ModelParams(d=2, alpha=3.0)
        moved = frozenset((x + 17, y - 5) for x, y in reg)
        assert surface_energy(reg, p) == pytest.approx(surface_energy(moved, p), rel=1e-12)


class TestHamiltonian:
    def test_single_site(self):
        p = ModelParams(d=2, alpha=3.0)
        plus = SpinConfiguration.box(1, 2, -1, fill=1)
        assert hamiltonian(plus, p) == pytest.approx(p.J * c_alpha(p))
        assert hamiltonian(plus.with_values([-1]), p) == pytest.approx(-p.J * c_alpha(p))

    @given(configurations(max_L=5), st.sampled_from([2.5, 3.0, 4.0]), st.floats(0, 1))
    def test_matches_pairwise(self, sigma, alpha, h):
        p = ModelParams(d=2, alpha=alpha, h_star=h, delta=0.8)
        assert hamiltonian(sigma, p) == pytest.approx(brute_hamiltonian(sigma, p), rel=1e-11, abs=1e-9)

    @given(configurations(max_L=7))
    def test_spin_flip_symmetry(self, sigma):
        p = ModelParams(d=2, alpha=2.5)
        assert hamiltonian(sigma.flipped(), p) == pytest.approx(hamiltonian(sigma, p), rel=1e-12, abs=1e-9)

    def test_masked_window(self):
        p = ModelParams(d=2, alpha=3.0, h_star=0.5)
        win = lattice.l1_ball((0, 0), 2)
        sigma = SpinConfiguration.from_points(win, {(0, 0): 1, (1, 1): 1}, -1)
        assert sigma.mask is not None
        assert hamiltonian(sigma, p) == pytest.approx(brute_hamiltonian(sigma, p), rel=1e-11)

    def test_json_round_trip(self):
        sigma = corpus.random_configuration(3, 5, 2, 0.4, boundary=1)
        assert SpinConfiguration.from_json(sigma.to_json()) == sigma


class TestExactEnumeration:
    def brute_logZ(self, window, p, boundary):
        base = SpinConfiguration.from_points(window, None, boundary)
        n = len(base.points())
        logs = [-p.beta * hamiltonian(base.with_values(np.array(s)), p) for s in itertools.product([-1, 1], repeat=n)]
        return float(mp.log(mp.fsum(mp.exp(v) for v in logs)))

    @pytest.mark.parametrize("boundary", [-1, 1])
    def test_logZ_matches_brute_force(self, boundary):
        p = ModelParams(d=2, alpha=2.5, h_star=0.3, delta=1.0, beta=0.7)
        win = SpinConfiguration.box(3, 2).window()
        assert log_partition_function_exact(win, p, boundary) == pytest.approx(self.brute_logZ(win, p, boundary), rel=1e-12)

    def test_spin_flip_duality(self):
        p = ModelParams(d=2, alpha=3.0, beta=0.5)
        win = SpinConfiguration.box(3, 2).window()
        minus = exact_expectations(win, p, -1, "zero")
        plus = exact_expectations(win, p, 1, "zero")
        assert np.allclose(minus["mean_spin"], -plus["mean_spin"], atol=1e-13)
        assert minus["log_Z"] == pytest.approx(plus["log_Z"], rel=1e-13)

    def test_beta_zero(self):
        p = ModelParams(beta=0.0)
        win = SpinConfiguration.box(3, 2).window()
        assert log_partition_function_exact(win, p) == pytest.approx(9 * math.log(2))

    def test_cap(self):
        win = SpinConfiguration.box(5, 2).window()
        with pytest.raises(CapExceeded):
            log_partition_function_exact(win, ModelParams(), cap=20)


class TestSurfaceAndFieldBounds:
    """F_L >= K_alpha max(|L|^{2-alpha/d}, |dL|) and sum_L h <= c5 |L|^{1-delta/d}."""

    @given(connected_regions(2, 80), st.sampled_from([2.5, 3.0, 4.0]))
    def test_surface_lower_bound(self, reg, alpha):
        p = ModelParams(d=2, alpha=alpha)
        K = constants.K_alpha(2, alpha)
        F = surface_energy(reg, p)
        assert F >= K * max(len(reg) ** (2 - alpha / 2), len(lattice.edge_boundary(reg))) - 1e-9

    @given(connected_regions(3, 40))
    def test_surface_lower_bound_3d(self, reg):
        p = ModelParams(d=3, alpha=3.5)
        K = constants.K_alpha(3, 3.5)
        assert surface_energy(reg, p) >= K * max(len(reg) ** (2 - 3.5 / 3), len(lattice.edge_boundary(reg))) - 1e-9

    @given(connected_regions(2, 80), st.sampled_from([0.5, 1.0, 1.5]), st.integers(-3, 3), st.integers(-3, 3))
    def test_field_upper_bound(self, reg, delta, dx, dy):
        p = ModelParams(d=2, alpha=3.0, delta=delta, h_star=1.0)
        moved = frozenset((x + dx, y + dy) for x, y in reg)
        assert field_sum(moved, p) <= constants.c5(2, delta, 1.0) * len(moved) ** (1 - delta / 2) + 1e-9

    def test_c5_refuses_summable(self):
        with pytest.raises(ValueError):
            constants.c5(2, 2.0, 1.0)


class TestSurfaceScaling:
    def test_slopes_quick(self):
        radii = np.arange(8, 33, 4)
        for alpha, target in ((2.5, 1.5), (4.0, 1.0)):
            p = ModelParams(d=2, alpha=alpha)
            F = [surface_energy(lattice.ball_offsets(2, int(R)), p) for R in radii]
            slope = np.polyfit(np.log(radii), np.log(F), 1)[0]
            assert abs(slope - target) < 0.15
