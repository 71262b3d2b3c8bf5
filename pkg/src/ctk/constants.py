"""Closed-form constants of the contour argument.

Everything here is a plain formula in double precision. The lattice
sum c_alpha is passed in by callers (see model.lattice_sum_radial).
"""

from __future__ import annotations

import math

from scipy.special import zeta


def c_d(d: int) -> float:
    """Lower sandwich constant (d-1)^{-(d-1)}; equals 1 for d = 1."""
    return 1.0 if d == 1 else float(d - 1) ** (-(d - 1))


def sphere_upper(d: int) -> float:
    """Upper sandwich constant 2^{2d-1} e^{d-1}."""
    return 2.0 ** (2 * d - 1) * math.exp(d - 1)


def C_d(d: int) -> float:
    return (2.0 ** (2 * d) * math.exp(d - 1) / d) ** (-1.0 / d)


def k_d(d: int) -> float:
    """Diameter constant: diam(L) >= k_d |L|^{1/d}."""
    return C_d(d) / 2.0


def _ball_radius_factor(d: int) -> float:
    return (d / c_d(d)) ** (1.0 / d) + 2.0


def K_alpha(d: int, alpha: float, J: float = 1.0) -> float:
    """Surface-energy constant: F_L >= K_alpha max(|L|^{2-alpha/d}, |dL|)."""
    return J * c_d(d) / (alpha - d) * _ball_radius_factor(d) ** (d - alpha)


def c5(d: int, delta: float, h_star: float) -> float:
    """Field-sum constant: sum_L h_x <= c5 |L|^{1-delta/d}, valid for delta < d."""
    if not delta < d:
        raise ValueError(f"c5 needs delta < d, got delta={delta}, d={d}")
    return h_star * sphere_upper(d) / (d - delta) * _ball_radius_factor(d) ** (d - delta)


def a_exponent(d: int, alpha: float, epsilon: float = 0.5) -> float:
    return max((d + 1 + epsilon) / (alpha - d), d + 1 + epsilon)


def stride_r(d: int, a: float) -> int:
    return math.ceil(math.log2(a + 1)) + d + 1


def zeta1(s: float) -> float:
    """Riemann zeta for s > 1, inf otherwise."""
    return float(zeta(s, 1)) if s > 1 else math.inf


def k_alpha_1(d: int, alpha: float, J: float, a: float, r: int) -> float:
    kd = k_d(d)
    m = 2**r - 1
    first = J * sphere_upper(d) * m / ((alpha - d) * kd ** (a * (alpha - d)))
    second = m ** (d + 1) * zeta1(a - d) / kd**d
    return max(first, second)


def _iso(d: int) -> float:
    """(2d)^{d/(d-1)}."""
    return (2.0 * d) ** (d / (d - 1))


def M1(d: int, alpha: float, J: float, k1: float, c_alpha: float) -> float:
    base = 12 * (2 * d + 1) * _iso(d) * k1 * 2.0**alpha / (J * c_alpha)
    return base ** (1.0 / (alpha - d))


def M2(d: int, alpha: float, k1: float) -> float:
    base = 4 * (2 * d + 1) * k1 * 2.0**alpha
    return base ** (1.0 / min(alpha - d, 1.0))


def M_geometric(d: int, r: int) -> float:
    return (2**r - 1) ** (d + 1) / k_d(d) ** d


def M_threshold(d: int, alpha: float, J: float, a: float, r: int, c_alpha: float) -> float:
    k1 = k_alpha_1(d, alpha, J, a, r)
    return max(M_geometric(d, r), M1(d, alpha, J, k1, c_alpha), M2(d, alpha, k1))


def c2(d: int, alpha: float, J: float, c_alpha: float, k1: float, M: float) -> float:
    return J * c_alpha / ((2 * d + 1) * 2.0**alpha) - 6 * _iso(d) * k1 / M ** (alpha - d)


def c3(d: int, alpha: float, k1: float, M: float) -> float:
    return 2 * (1.0 / ((2 * d + 1) * 2.0 ** (alpha - 1)) - 4 * k1 / M)


def c4(d: int, alpha: float, k1: float, M: float) -> float:
    return 1.0 / ((2 * d + 1) * 2.0**alpha) - 2 * k1 / M ** min(alpha - d, 1.0)


# entropy chain


def entropy_c(d: int, r: int) -> float:
    return (2 * d + 1) * math.log(2) + d * math.log(2 ** (r + 1) - 1)


def entropy_b(d: int, r: int) -> float:
    return d * math.log(3) + math.log(2) + entropy_c(d, r) + 1


def kappa(d: int, a: float, r: int, M: float) -> float:
    """Total-volume constant, V_r(sp) <= kappa |sp|; inf when its zeta argument is <= 1."""
    L = math.log(2 * M * d**a) / (r * math.log(2))
    n0 = (a + 2 + L) / (a - 1)
    e = (r - d - 1) / math.log2(a)
    t1 = 3 + L
    t2 = n0 + 1 + 2.0 ** (2 * (r - d - 1)) * n0**e * (2 + L)
    t3 = n0 + 1 + 2.0 ** (r - d - 1) * n0**e * zeta1(e)
    return max(t1, t2, t3)


def entropy_c1(d: int, b: float, kap: float) -> float:
    return 2 * b * kap + 1 + 1.0 / (d - 1)


# field regimes


def regime(d: int, alpha: float, delta: float) -> str:
    """Which branch of the transition region (alpha, delta) falls in.

    Returns 'short' (d < alpha < d+1, delta > alpha-d), 'long' (alpha >= d+1,
    delta > 1), 'critical-short' / 'critical-long' on the boundary lines, or
    'outside'.
    """
    if alpha <= d:
        return "outside"
    if alpha < d + 1:
        if delta > alpha - d:
            return "short"
        if math.isclose(delta, alpha - d, rel_tol=0, abs_tol=1e-12):
            return "critical-short"
        return "outside"
    if delta > 1:
        return "long"
    if math.isclose(delta, 1.0, rel_tol=0, abs_tol=1e-12):
        return "critical-long"
    return "outside"


def R1(d: int, alpha: float, delta: float, c5_val: float, c3_val: float, K: float) -> float:
    c_prime = (2 * c5_val / (c3_val * K)) ** (d / (delta - (alpha - d)))
    return (c_prime / (c3_val * K)) ** (1.0 / delta)


def R2(d: int, delta: float, h_star: float, c5_val: float, c3_val: float, K: float) -> float:
    b_alpha = (c5_val / (d * c3_val * K)) ** (d / (delta - 1))
    return (h_star * b_alpha / (d * c3_val * K)) ** (1.0 / delta)


def R_field(delta: float, h_star: float, c2_val: float) -> float:
    return (4 * h_star / c2_val) ** (1.0 / delta)


def h_star_critical(d: int, delta: float, c3_val: float, K: float) -> float:
    """Largest h* keeping c3 K |I|^q - 2 c5 |I|^q >= 0 on a critical line.

    Both critical lines reduce to c3 K >= 2 c5 (on delta = 1 after the
    isoperimetric bound |dI| >= |I|^{1-1/d}), and c5 is linear in h*.
    """
    per_unit = c5(d, delta, 1.0)
    return c3_val * K / (2 * per_unit)


def beta_c(c1: float, c2_val: float) -> float:
    return 2.0 / c2_val * (c1 + math.log(2) + math.log(3))
