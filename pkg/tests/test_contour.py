import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ctk import corpus, lattice
from ctk.contour import (
    Contour,
    ContourError,
    ContourParams,
    boundary,
    build_partition,
    erase,
    erase_all,
    erasure_problems,
    external_contours,
    extract_contours,
    intersect_partitions,
    is_compatible,
    is_finer,
    reconstruct,
    theta,
    verify_partition,
)
from ctk.model import ModelParams, SpinConfiguration, hamiltonian
from strategies import configurations

P3 = ModelParams(d=2, alpha=3.0)
THRESHOLD = ContourParams.from_model(P3)
SMALL_M = [ContourParams(1.0, THRESHOLD.a, THRESHOLD.r), ContourParams(0.3, THRESHOLD.a, THRESHOLD.r)]
ALL_CP = [THRESHOLD, *SMALL_M]


def square(L, c, fill, half):
    sigma = SpinConfiguration.box(L, 2, -1)
    return sigma.with_spins_at({p: fill for p in itertools.product(range(c - half, c + half + 1), repeat=2)})


def brute_boundary(sigma):
    pts = sigma.points()
    lo, hi = pts.min(axis=0) - 1, pts.max(axis=0) + 1
    return {p for p in itertools.product(*[range(a, b + 1) for a, b in zip(lo, hi)]) if theta(sigma, p) == 0}


class TestParams:
    def test_defaults(self):
        assert THRESHOLD.a == 3.5 and THRESHOLD.r == 6 and THRESHOLD.max_family == 63
        assert THRESHOLD.to_dict()["epsilon"] == 0.5

    def test_invalid(self):
        with pytest.raises(ContourError):
            ContourParams(0.0, 1.0, 1)


class TestBoundary:
    def test_single_plus_site(self):
        sigma = SpinConfiguration.box(5, 2, -1).with_spins_at({(0, 0): 1})
        assert boundary(sigma) == lattice.l1_ball((0, 0), 1)
        assert theta(sigma, (1, 1)) == -1
        assert theta(sigma, (0, 0)) == 0

    def test_uniform(self):
        assert boundary(SpinConfiguration.box(4, 2, -1)) == frozenset()
        assert boundary(SpinConfiguration.box(4, 2, 1, fill=1)) == frozenset()
        # a plus window under a minus exterior has its edge layer incorrect
        assert len(boundary(SpinConfiguration.box(4, 2, -1, fill=1))) > 0

    @given(configurations(max_L=7))
    def test_matches_theta(self, sigma):
        assert boundary(sigma) == brute_boundary(sigma)


class TestPartition:
    @given(configurations(max_L=9), st.sampled_from(ALL_CP))
    def test_verified(self, sigma, cp):
        bd = boundary(sigma)
        P = build_partition(bd, cp, 2)
        ver = verify_partition(P, cp, bd)
        assert ver.ok, ver.violations

    def test_verify_detects_bad_partition(self):
        sigma = corpus.random_configuration(5, 8, 2, 0.3)
        bd = boundary(sigma)
        P = build_partition(bd, SMALL_M[1], 2)
        from ctk.contour import PartitionOfBoundary

        broken = PartitionOfBoundary(P.parts[1:], P.boundary)
        assert not verify_partition(broken, SMALL_M[1]).ok

    @given(configurations(max_L=8))
    def test_intersection(self, sigma):
        bd = boundary(sigma)
        P = build_partition(bd, SMALL_M[0], 2)
        Q = build_partition(bd, SMALL_M[1], 2)
        R = intersect_partitions(P, Q)
        assert is_finer(R, P) and is_finer(R, Q)
        assert verify_partition(R, SMALL_M[0]).ok
        again = intersect_partitions(R, R)
        assert [p.support for p in again.parts] == [p.support for p in R.parts]

    @given(configurations(max_L=8), st.integers(-2, 2), st.integers(-2, 2))
    def test_translation(self, sigma, kx, ky):
        cp = SMALL_M[0]
        bd = boundary(sigma)
        P = build_partition(bd, cp, 2)
        n_max = max((p.scale for p in P.parts), default=0)
        t = np.array([kx, ky]) * 2 ** max(n_max, 1)
        moved = frozenset(tuple((np.array(x) + t).tolist()) for x in bd)
        Q = build_partition(moved, cp, 2)
        shift = lambda s: frozenset(tuple((np.array(x) + t).tolist()) for x in s)  # noqa: E731
        assert [shift(p.support) for p in P.parts] == [q.support for q in Q.parts]


class TestContours:
    def test_single_site(self):
        sigma = SpinConfiguration.box(5, 2, -1).with_spins_at({(0, 0): 1})
        (g,) = extract_contours(sigma, THRESHOLD)
        assert g.support == lattice.l1_ball((0, 0), 1)
        assert g.label_exterior == -1 and g.interior == ()
        assert erase(sigma, [g]) == SpinConfiguration.box(5, 2, -1)

    def test_plus_block_has_plus_interior(self):
        sigma = square(11, 0, 1, 2)
        (g,) = extract_contours(sigma, THRESHOLD)
        assert g.I_plus == frozenset(itertools.product(range(-1, 2), repeat=2))
        assert g.I_minus == frozenset()
        corners = {(sx * 3, sy * 3) for sx in (-1, 1) for sy in (-1, 1)}
        assert g.volume == frozenset(itertools.product(range(-3, 4), repeat=2)) - corners
        tau = erase(sigma, [g])
        assert np.all(tau.values() == -1)

    def test_nested_labels(self):
        sigma = square(15, 0, 1, 4)
        sigma = sigma.with_spins_at({p: -1 for p in itertools.product(range(-1, 2), repeat=2)})
        cs = extract_contours(sigma, SMALL_M[1])
        labels = sorted(lab for g in cs for _, lab in g.interior)
        assert 1 in labels
        out = external_contours(cs)
        assert len(out) == 1
        tau, rounds = erase_all(sigma, SMALL_M[1])
        assert np.all(tau.values() == -1) and rounds >= 1

    @given(configurations(max_L=9), st.sampled_from(ALL_CP))
    def test_erase_all_gives_all_minus(self, sigma, cp):
        sigma = SpinConfiguration(sigma.origin, sigma.spins, -1, sigma.mask)
        tau, _ = erase_all(sigma, cp)
        assert np.all(tau.values() == -1)

    @given(configurations(max_L=8), st.sampled_from(SMALL_M))
    def test_erase_postconditions(self, sigma, cp):
        sigma = SpinConfiguration(sigma.origin, sigma.spins, -1)
        fam = external_contours(extract_contours(sigma, cp))
        tau = erase(sigma, fam, cp)
        assert erasure_problems(sigma, tau, fam, cp) == []

    @given(configurations(max_L=8))
    def test_erasure_lowers_energy(self, sigma):
        sigma = SpinConfiguration(sigma.origin, sigma.spins, -1)
        for g in external_contours(extract_contours(sigma, THRESHOLD)):
            assert hamiltonian(sigma, P3, "zero") - hamiltonian(erase(sigma, [g]), P3, "zero") > 0

    def test_erase_refusals(self):
        sigma = SpinConfiguration.box(5, 2, -1).with_spins_at({(0, 0): 1})
        (g,) = extract_contours(sigma, THRESHOLD)
        with pytest.raises(ContourError):
            erase(sigma.flipped(), [g])
        with pytest.raises(ContourError):
            erase(sigma, [g, g])
        other = SpinConfiguration.box(5, 2, -1).with_spins_at({(1, 1): 1})
        with pytest.raises(ContourError):
            erase(other, [g])

    @given(configurations(max_L=8), st.sampled_from(SMALL_M))
    def test_json_and_reconstruction(self, sigma, cp):
        sigma = SpinConfiguration(sigma.origin, sigma.spins, -1)
        cs = extract_contours(sigma, cp)
        for g in cs:
            assert Contour.from_json(g.to_json()).same_as(g)
        ext = external_contours(cs)
        # supports may reach one site past the window
        win = frozenset(q for x in sigma.window() for q in lattice.l1_ball(x, 1))
        assert is_compatible(ext, win, cp)
        rec = reconstruct(ext, win)
        assert all(any(g.same_as(h) for h in extract_contours(rec, cp)) for g in ext)

    def test_incompatible_family(self):
        sigma = SpinConfiguration.box(7, 2, -1).with_spins_at({(0, 0): 1})
        (g,) = extract_contours(sigma, THRESHOLD)
        flipped_label = Contour(g.support, g.witness_family, 1, g.interior, g.spins, g.scale)
        assert not is_compatible([flipped_label], sigma.window(), THRESHOLD)
        assert not is_compatible([g], SpinConfiguration.box(2, 2).window(), THRESHOLD)
