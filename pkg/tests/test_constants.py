"""Float constant chains against the 40-digit oracle."""

import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ctk import constants
from ctk.contour import ContourParams
from ctk.model import ModelParams, c_alpha
from ctk.multiscale import entropy_constants
from ctk.peierls import peierls_constants, truncation_radius
import oracle_constants as oracle

SIG = 1e-12

POINTS = [
    dict(d=2, alpha=2.5),
    dict(d=2, alpha=3.0),
    dict(d=2, alpha=4.0),
    dict(d=2, alpha=2.2, J=2.0, epsilon=0.3),
    dict(d=3, alpha=3.5),
    dict(d=3, alpha=5.0, epsilon=1.0),
]


def float_chain(d, alpha, J=1.0, epsilon=0.5, M=None, delta=None, h_star=None):
    kw = {} if delta is None else dict(delta=delta, h_star=h_star)
    p = ModelParams(d=d, alpha=alpha, J=J, **kw)
    cp = ContourParams.from_model(p, epsilon=epsilon, M=M)
    pc = peierls_constants(p, cp)
    ec = entropy_constants(d, cp)
    out = dict(
        c_alpha=c_alpha(p),
        a=cp.a,
        r=cp.r,
        k_d=constants.k_d(d),
        k_alpha_1=pc.k_alpha_1,
        M1=pc.M1,
        M2=pc.M2,
        M_geometric=pc.M_geometric,
        M_threshold=pc.M_threshold,
        M=cp.M,
        c2=pc.c2,
        c3=pc.c3,
        c4=pc.c4,
        K_alpha=pc.K_alpha,
        c=ec.c,
        b=ec.b,
        kappa=ec.kappa,
        c1=ec.c1,
        beta_c=constants.beta_c(ec.c1, pc.c2),
    )
    if delta is not None:
        out["c5"] = pc.c5
        t = truncation_radius(p, pc)
        out["R_field"] = t.R_field
        out["R"] = t.R
        for k in ("R1", "R2"):
            if getattr(t, k) is not None:
                out[k] = getattr(t, k)
    return out


def compare(got, ref):
    assert set(got) <= set(ref)
    # c2 can be a near-cancellation at the threshold; its scale is c_alpha-sized
    scale = {"c2": float(ref["c_alpha"]), "c3": 1.0, "c4": 1.0}
    for k, v in got.items():
        want = float(ref[k])
        assert v == pytest.approx(want, rel=SIG, abs=SIG * scale.get(k, 0.0)), k


@pytest.mark.parametrize("kw", POINTS, ids=lambda kw: "-".join(f"{k}{v}" for k, v in kw.items()))
def test_chain_at_threshold(kw):
    compare(float_chain(**kw), oracle.chain(**kw))


@pytest.mark.parametrize("kw", POINTS, ids=lambda kw: "-".join(f"{k}{v}" for k, v in kw.items()))
def test_chain_above_threshold(kw):
    thr = float_chain(**kw)["M_threshold"]
    got = float_chain(**kw, M=2 * thr)
    compare(got, oracle.chain(**kw, M=2 * thr))
    assert got["c2"] > 0 and got["c3"] > 0 and got["c4"] > 0


@pytest.mark.parametrize(
    "kw,branch",
    [
        (dict(d=2, alpha=2.5, delta=1.0, h_star=0.1), "R1"),
        (dict(d=2, alpha=2.2, delta=0.5, h_star=0.05), "R1"),
        (dict(d=2, alpha=4.0, delta=1.5, h_star=0.2), "R2"),
        (dict(d=3, alpha=4.5, delta=2.0, h_star=0.3), "R2"),
    ],
)
def test_field_radii(kw, branch):
    d, alpha = kw["d"], kw["alpha"]
    thr = float_chain(d, alpha)["M_threshold"]
    got = float_chain(**kw, M=2 * thr)
    assert branch in got
    compare(got, oracle.chain(**kw, M=2 * thr))


class TestRegimes:
    @pytest.mark.parametrize(
        "d,alpha,delta,name",
        [
            (2, 2.5, 0.6, "short"),
            (2, 2.5, 0.5, "critical-short"),
            (2, 2.5, 0.4, "outside"),
            (2, 3.0, 1.5, "long"),
            (2, 3.0, 1.0, "critical-long"),
            (2, 4.0, 0.9, "outside"),
            (2, 2.0, 1.0, "outside"),
        ],
    )
    def test_table(self, d, alpha, delta, name):
        assert constants.regime(d, alpha, delta) == name

    @given(st.floats(2.01, 5.0), st.floats(0.01, 1.99))
    def test_matches_min_rule(self, alpha, delta):
        # inside exactly when delta > min(alpha - d, 1), up to the boundary lines
        inside = constants.regime(2, alpha, delta) != "outside"
        edge = min(alpha - 2, 1.0)
        if abs(delta - edge) > 1e-9:
            assert inside == (delta > edge)


class TestSmallPieces:
    def test_stride_and_a(self):
        assert constants.a_exponent(2, 3.0) == 3.5
        assert constants.a_exponent(2, 2.5) == 7.0
        assert constants.stride_r(2, 3.5) == 6
        assert constants.stride_r(2, 7.0) == 6

    def test_zeta_edge(self):
        assert constants.zeta1(1.0) == math.inf
        assert constants.zeta1(2.0) == pytest.approx(math.pi**2 / 6)

    def test_kappa_infinite_when_zeta_diverges(self):
        # e = (r - d - 1) / log2(a) <= 1 forces the zeta term to infinity
        assert constants.kappa(2, 8.0, 6, 10.0) == math.inf

    def test_h_star_critical_is_linear_cutoff(self):
        c3, K = 0.01, 0.2
        h = constants.h_star_critical(2, 1.0, c3, K)
        assert 2 * constants.c5(2, 1.0, h) == pytest.approx(c3 * K)
