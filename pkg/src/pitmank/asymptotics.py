"""Limiting and approximate formulas for the block count K.

Covers the limit moments of K/n^alpha and the block-count diversity density
(a polynomially tilted Mittag-Leffler density), the refined fixed-theta
moment approximation with its n^{-alpha} correction, the corrected scaling,
the joint-regime (n and theta large together, theta/n -> 0) normalized
moment approximations under two scalings, the centered-and-scaled statistic
Z, the alpha -> 0 reference normalizer, and regime-path construction with
feasibility checks.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction

import mpmath
from mpmath import mpf

from .distribution import exact_moment
from .numerics import (
    ApproxScalar,
    DomainError,
    PitmanParams,
    PrecisionError,
    resolve_bits,
    rising_factorial,
    to_mpf,
)

__all__ = [
    "RegimePath",
    "SCALES",
    "corrected_mean_limit",
    "corrected_scale",
    "cr_feasible",
    "diversity_density",
    "diversity_moment",
    "ewens_reference_scale",
    "mittag_leffler_density",
    "power_scale",
    "power_scale_moment_approx",
    "refined_moment_approx",
    "regime_path",
    "scale_value",
    "shifted_power_scale",
    "shifted_power_scale_moment_approx",
    "tilted_density_moment",
    "z_moments_exact",
    "z_statistic",
]

_SERIES_MAX_TERMS = 10_000
_SERIES_MAX_ESCALATIONS = 8


# ---------------------------------------------------------------------------
# limit moments and densities
# ---------------------------------------------------------------------------

def diversity_moment(alpha, theta, r: int, bits: int | None = None, mode: str = "auto"):
    """r-th moment of the limit law of K/n^alpha:

        (1 + theta/alpha)_r * Gamma(theta + 1) / Gamma(theta + r alpha + 1)

    Rational-representable only when r*alpha is an integer (the gamma ratio
    then collapses to a rising factorial); otherwise exact mode is refused
    and the value is returned as an ApproxScalar.
    """
    if not 0 < alpha < 1:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")
    if not theta > -alpha:
        raise DomainError(f"theta must exceed -alpha, got {theta!r}")
    if r < 1:
        raise DomainError(f"moment order must be >= 1, got {r!r}")
    exact_possible = (
        isinstance(alpha, (int, Fraction))
        and isinstance(theta, (int, Fraction))
        and (Fraction(r) * Fraction(alpha)).denominator == 1
    )
    if mode == "auto":
        mode = "exact" if exact_possible else "float"
    if mode == "exact":
        if not exact_possible:
            raise DomainError(
                "limit moment is not rational-representable unless r*alpha "
                "is an integer; use floating mode"
            )
        a, t = Fraction(alpha), Fraction(theta)
        m = int(Fraction(r) * a)
        lead = rising_factorial(1 + t / a, r, 1)
        return Fraction(lead) / Fraction(rising_factorial(t + 1, m, 1))
    if mode != "float":
        raise DomainError(f"unknown mode {mode!r}")
    bits = resolve_bits(bits)
    with mpmath.workprec(bits + 16):
        a = to_mpf(alpha)
        t = to_mpf(theta)
        lead = mpf(1)
        for j in range(r):
            lead *= 1 + t / a + j
        val = lead * mpmath.exp(mpmath.loggamma(t + 1) - mpmath.loggamma(t + r * a + 1))
    with mpmath.workprec(bits):
        return ApproxScalar(+val, bits)


# Signed series coefficients of the diversity density at theta = 0 and their
# sin-free majorants, cached per (alpha, precision).  All entries are exact
# functions of alpha, so the cache is deterministic.
_series_cache: dict[tuple[str, int], tuple[list, list]] = {}


def _series_coeffs(alpha, prec: int, upto: int):
    key = (repr(alpha), prec)
    signed, major = _series_cache.setdefault(key, ([], []))
    if len(signed) < upto:
        with mpmath.workprec(prec + 20):
            a = to_mpf(alpha)
            for i in range(len(signed) + 1, upto + 1):
                g = mpmath.gamma(i * a + 1) / mpmath.factorial(i)
                sign = 1 if (i + 1) % 2 == 0 else -1
                signed.append(sign * g * mpmath.sinpi(i * a))
                major.append(g)
    return signed, major


def mittag_leffler_density(
    alpha,
    x,
    tol: float = 1e-17,
    bits: int | None = None,
    max_terms: int = _SERIES_MAX_TERMS,
    abs_floor: float = 0.0,
):
    """Density with p-th moment Gamma(p+1)/Gamma(p alpha + 1), evaluated by
    its power series

        (1/(pi alpha)) sum_{i>=1} (-1)^{i+1} Gamma(i alpha + 1)
                                   sin(pi i alpha) x^{i-1} / i!

    Truncation stops once the sin-free majorant term drops below ``tol``
    times the accumulated sum and is past its peak.  (The majorant is used
    because sin(pi i alpha) vanishes periodically for rational alpha, so a
    single small term proves nothing about the tail.)  Deep cancellation
    between terms triggers automatic precision doubling; ``abs_floor > 0``
    allows returning exactly 0 once the result is certified below the floor,
    which keeps far-tail evaluations cheap.  Raises :class:`PrecisionError`
    when escalation is exhausted.
    """
    if not 0 < alpha < 1:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")
    if not x > 0:
        raise DomainError(f"x must be positive, got {x!r}")
    if not tol > 0:
        raise DomainError(f"tol must be positive, got {tol!r}")
    prec = resolve_bits(bits) + 32
    out_bits = resolve_bits(bits)
    for _ in range(_SERIES_MAX_ESCALATIONS):
        with mpmath.workprec(prec):
            xx = to_mpf(x)
            signed, major = _series_coeffs(alpha, prec, 64)
            s = mpf(0)
            xpow = mpf(1)
            max_mag = mpf(0)
            prev_u = None
            i = 0
            converged = False
            while i < max_terms:
                if i >= len(signed):
                    signed, major = _series_coeffs(alpha, prec, 2 * len(signed))
                term = signed[i] * xpow
                u = major[i] * xpow
                s += term
                t_mag = abs(term)
                if t_mag > max_mag:
                    max_mag = t_mag
                if (
                    i > 3
                    and prev_u is not None
                    and u < prev_u
                    and u < tol * max(abs(s), to_mpf(abs_floor))
                ):
                    converged = True
                    break
                prev_u = u
                xpow *= xx
                i += 1
            if converged:
                # round-off in the summed terms is bounded by max_mag shifted
                # down by the working precision (with slack for the length)
                noise = max_mag * mpf(2) ** (-(prec - 40))
                value = s / (mpmath.pi * to_mpf(alpha))
                noise /= mpmath.pi * to_mpf(alpha)
                if abs(value) > noise * mpf(2) ** 16:
                    with mpmath.workprec(out_bits):
                        value = +value
                    # tiny negative round-off is clamped; the density is
                    # nonnegative
                    return value if value >= 0 else mpf(0)
                if abs_floor > 0 and noise * mpf(2) ** 16 < to_mpf(abs_floor):
                    return mpf(0)
        prec *= 2
    raise PrecisionError(
        f"density series at alpha={alpha!r}, x={x!r} did not stabilise "
        f"within {_SERIES_MAX_ESCALATIONS} precision doublings"
    )


def diversity_density(alpha, theta, x, tol: float = 1e-17, bits: int | None = None):
    """Density of the limit law of K/n^alpha:

        Gamma(theta+1)/Gamma(theta/alpha+1) * x^{theta/alpha} * m_alpha(x)

    where m_alpha is :func:`mittag_leffler_density`.  theta = 0 reduces to
    m_alpha itself.
    """
    if not 0 < alpha < 1:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")
    if not theta > -alpha:
        raise DomainError(f"theta must exceed -alpha, got {theta!r}")
    if not x > 0:
        raise DomainError(f"x must be positive, got {x!r}")
    bits = resolve_bits(bits)
    base = mittag_leffler_density(alpha, x, tol=tol, bits=bits)
    with mpmath.workprec(bits + 16):
        a = to_mpf(alpha)
        t = to_mpf(theta)
        pref = mpmath.exp(mpmath.loggamma(t + 1) - mpmath.loggamma(t / a + 1))
        val = pref * to_mpf(x) ** (t / a) * base
    with mpmath.workprec(bits):
        return +val


def tilted_density_moment(
    alpha, theta, p, tol: float = 1e-9, bits: int = 96
) -> float:
    """p-th moment of the diversity density by adaptive quadrature.

    Independent of the gamma-ratio formula for the same quantity, so the two
    can be checked against each other.  The integrand is cut off once its
    far tail is certifiably below the requested tolerance.
    """
    if not 0 < alpha < 1:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")
    if not theta > -alpha:
        raise DomainError(f"theta must exceed -alpha, got {theta!r}")
    if p < 0:
        raise DomainError(f"p must be nonnegative, got {p!r}")
    # fixed generous series precision; far-tail evaluations certify to 0
    series_bits = 512
    floor = tol * 1e-12

    def integrand(x):
        if x <= 0:
            return mpf(0)
        g = mittag_leffler_density(
            alpha, x, tol=1e-18, bits=series_bits, abs_floor=floor
        )
        if g == 0:
            return mpf(0)
        with mpmath.workprec(series_bits):
            a = to_mpf(alpha)
            t = to_mpf(theta)
            pref = mpmath.exp(mpmath.loggamma(t + 1) - mpmath.loggamma(t / a + 1))
            return pref * to_mpf(x) ** (t / a + p) * g

    upper = mpf(8)
    with mpmath.workprec(bits):
        while integrand(upper) > to_mpf(floor):
            upper *= 2
        val = mpmath.quad(integrand, [0, 1, upper])
    return float(val)


# ---------------------------------------------------------------------------
# fixed-theta refinements
# ---------------------------------------------------------------------------

def refined_moment_approx(params: PitmanParams, r: int, bits: int | None = None) -> float:
    """Two-term approximation of E[(K/n^alpha)^r] for n -> infinity at fixed
    theta: the limit moment times

        [1 - (r(r-1) alpha / 2 + r theta)
             * Gamma(theta + r alpha) / Gamma(theta + (r-1) alpha + 1)
             * n^{-alpha}]
    """
    if r < 1:
        raise DomainError(f"moment order must be >= 1, got {r!r}")
    bits = resolve_bits(bits)
    with mpmath.workprec(bits + 16):
        a = to_mpf(params.alpha)
        t = to_mpf(params.theta)
        n = params.n
        lead = mpf(1)
        for j in range(r):
            lead *= 1 + t / a + j
        lead *= mpmath.exp(mpmath.loggamma(t + 1) - mpmath.loggamma(t + r * a + 1))
        coeff = (r * (r - 1) * a / 2 + r * t) * mpmath.exp(
            mpmath.loggamma(t + r * a) - mpmath.loggamma(t + (r - 1) * a + 1)
        )
        val = lead * (1 - coeff / n**a)
    return float(val)


def corrected_scale(params: PitmanParams, bits: int | None = None) -> float:
    """Corrected denominator n^alpha - theta Gamma(theta+alpha)/Gamma(theta+1).

    Replacing n^alpha by this scale cancels the first-order deficit of the
    mean.  Rejected when n is too small for the scale to stay positive.
    """
    bits = resolve_bits(bits)
    with mpmath.workprec(bits + 16):
        a = to_mpf(params.alpha)
        t = to_mpf(params.theta)
        shift = t * mpmath.exp(mpmath.loggamma(t + a) - mpmath.loggamma(t + 1))
        val = to_mpf(params.n) ** a - shift
        if val <= 0:
            threshold = float(mpmath.ceil(abs(shift) ** (1 / a)))
            raise DomainError(
                f"corrected scale is nonpositive at n={params.n}; "
                f"needs n > {threshold}"
            )
    return float(val)


def corrected_mean_limit(alpha, theta, bits: int | None = None) -> float:
    """Limit of E[K / corrected scale]: Gamma(theta+1)/(alpha Gamma(theta+alpha))."""
    if not 0 < alpha < 1:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")
    if not theta > -alpha:
        raise DomainError(f"theta must exceed -alpha, got {theta!r}")
    bits = resolve_bits(bits)
    with mpmath.workprec(bits + 16):
        a = to_mpf(alpha)
        t = to_mpf(theta)
        val = mpmath.exp(mpmath.loggamma(t + 1) - mpmath.loggamma(t + a)) / a
    return float(val)


# ---------------------------------------------------------------------------
# joint-regime scalings
# ---------------------------------------------------------------------------

def _require_positive_theta(theta):
    if not theta > 0:
        raise DomainError(f"joint-regime scaling requires theta > 0, got {theta!r}")


def _warn_out_of_regime(params: PitmanParams):
    if float(params.theta) / params.n >= 0.5:
        warnings.warn(
            f"theta/n = {float(params.theta) / params.n:.3g} is not small; "
            f"joint-regime approximations are unreliable here",
            stacklevel=3,
        )


def power_scale(params: PitmanParams) -> float:
    """Power-law scale (theta/alpha) (n/theta)^alpha for K in the joint regime."""
    _require_positive_theta(params.theta)
    t = float(params.theta)
    a = float(params.alpha)
    return t / a * (params.n / t) ** a


def power_scale_moment_approx(params: PitmanParams, r: int) -> float:
    """Three-term joint-regime approximation of E[(K / power scale)^r]:

        1 - r (theta/n)^alpha + r^2 alpha (1 - alpha) / (2 theta)
    """
    if r < 1:
        raise DomainError(f"moment order must be >= 1, got {r!r}")
    _require_positive_theta(params.theta)
    _warn_out_of_regime(params)
    t = float(params.theta)
    a = float(params.alpha)
    return 1 - r * (t / params.n) ** a + r * r * a * (1 - a) / (2 * t)


def shifted_power_scale(params: PitmanParams) -> float:
    """Scale theta {((n+theta)/theta)^alpha - 1} / alpha for K in the joint
    regime; its alpha -> 0 limit is the reference scale theta log(1 + n/theta)."""
    _require_positive_theta(params.theta)
    t = float(params.theta)
    a = float(params.alpha)
    return t * (((params.n + t) / t) ** a - 1) / a


def shifted_power_scale_moment_approx(params: PitmanParams, r: int) -> float:
    """Joint-regime approximation of E[(K / shifted power scale)^r] with the
    1/theta curvature term: 1 + r^2 alpha (1-alpha) / (2 theta)."""
    if r < 1:
        raise DomainError(f"moment order must be >= 1, got {r!r}")
    _require_positive_theta(params.theta)
    _warn_out_of_regime(params)
    t = float(params.theta)
    a = float(params.alpha)
    return 1 + r * r * a * (1 - a) / (2 * t)


def ewens_reference_scale(n: int, theta) -> float:
    """alpha = 0 reference normalizer theta log(1 + n/theta)."""
    if n < 1:
        raise DomainError(f"n must be positive, got {n!r}")
    _require_positive_theta(theta)
    t = float(theta)
    return t * math.log1p(n / t)


def z_statistic(k_observed: int, params: PitmanParams) -> float:
    """Centered-and-scaled block count

        Z = sqrt(theta) [ alpha K / (theta {((n+theta)/theta)^alpha - 1}) - 1 ]
    """
    if not 1 <= k_observed <= params.n:
        raise DomainError(
            f"k must lie in 1..{params.n}, got {k_observed!r}"
        )
    _require_positive_theta(params.theta)
    t = float(params.theta)
    a = float(params.alpha)
    denom = t * (((params.n + t) / t) ** a - 1)
    return math.sqrt(t) * (a * k_observed / denom - 1)


def z_moments_exact(params: PitmanParams, bits: int | None = None) -> tuple[float, float]:
    """Exact (E[Z], E[Z^2]) from the first two moments of K."""
    _require_positive_theta(params.theta)
    bits = resolve_bits(bits)
    m1 = exact_moment(params, 1, bits=bits, mode="float")
    m2 = exact_moment(params, 2, bits=bits, mode="float")
    with mpmath.workprec(bits):
        t = to_mpf(params.theta)
        a = to_mpf(params.alpha)
        denom = t * (((params.n + t) / t) ** a - 1)
        x1 = a * m1.value / denom
        x2 = a * a * m2.value / denom**2
        ez = mpmath.sqrt(t) * (x1 - 1)
        ez2 = t * (x2 - 2 * x1 + 1)
    return float(ez), float(ez2)


#: Named scale denominators for K.
SCALES = {
    "n_alpha": lambda p: float(p.n) ** float(p.alpha),
    "corrected": corrected_scale,
    "power": power_scale,
    "shifted_power": shifted_power_scale,
    "ewens_ref": lambda p: ewens_reference_scale(p.n, p.theta),
}


def scale_value(label: str, params: PitmanParams) -> float:
    """Value of a named scale denominator; see :data:`SCALES`."""
    try:
        fn = SCALES[label]
    except KeyError:
        raise DomainError(
            f"unknown scaling {label!r}; expected one of {sorted(SCALES)}"
        ) from None
    return float(fn(params))


# ---------------------------------------------------------------------------
# regime paths
# ---------------------------------------------------------------------------

def cr_feasible(alpha, beta) -> tuple[bool, str]:
    """Check whether theta = n^beta satisfies the strengthened regime
    requirements theta^{2 alpha + 1} / n^{2 alpha} -> 0 and theta^2 / n -> 0.

    Substituting theta = n^beta turns the two limits into the exponent
    inequalities beta (2 alpha + 1) < 2 alpha and 2 beta < 1.  Returns
    (feasible, reason); the reason names the violated inequality.
    """
    a = float(alpha)
    b = float(beta)
    if b * (2 * a + 1) >= 2 * a:
        return False, (
            f"theta^(2a+1)/n^(2a) does not vanish: beta*(2*alpha+1) = "
            f"{b * (2 * a + 1):.6g} >= 2*alpha = {2 * a:.6g}"
        )
    if 2 * b >= 1:
        return False, f"theta^2/n does not vanish: 2*beta = {2 * b:.6g} >= 1"
    return True, "feasible"


@dataclass(frozen=True)
class RegimePath:
    """Ordered (n, theta) sequence along one of the two asymptotic regimes.

    ``kind`` is ``"fixed_theta"`` (theta constant) or ``"joint"``
    (theta = n^beta with 0 < beta < 1 so theta/n -> 0).  ``cr`` marks paths
    that additionally satisfy the strengthened regime used for the Z
    statistic.
    """

    kind: str
    points: tuple[tuple[int, float], ...]
    beta: float | None = None
    cr: bool = False

    def __post_init__(self):
        if self.kind not in ("fixed_theta", "joint"):
            raise DomainError(f"unknown path kind {self.kind!r}")
        ns = [n for n, _ in self.points]
        if any(b <= a for a, b in zip(ns, ns[1:])):
            raise DomainError("grid must be strictly increasing in n")
        if self.kind == "fixed_theta":
            thetas = {t for _, t in self.points}
            if len(thetas) > 1:
                raise DomainError("fixed-theta path must keep theta constant")

    @property
    def n_grid(self) -> tuple[int, ...]:
        return tuple(n for n, _ in self.points)


def regime_path(
    kind: str,
    n_grid,
    theta=None,
    beta: float | None = None,
    alpha=None,
    require_cr: bool = False,
) -> RegimePath:
    """Build a regime path over ``n_grid``.

    ``kind = "fixed_theta"`` keeps ``theta`` constant; ``kind = "joint"``
    sets theta = n^beta (beta = 0 degenerates to a fixed-theta path at
    theta = 1).  ``require_cr`` validates the strengthened-regime exponent
    inequalities for the given alpha and rejects infeasible (alpha, beta),
    naming the violated inequality.
    """
    n_grid = tuple(int(n) for n in n_grid)
    if not n_grid:
        raise DomainError("empty grid")
    if kind == "joint" and beta == 0:
        kind = "fixed_theta"
        theta = 1.0 if theta is None else theta
    if kind == "fixed_theta":
        if theta is None:
            raise DomainError("fixed-theta path requires theta")
        if not float(theta) > 0:
            raise DomainError("fixed-theta path requires theta > 0")
        points = tuple((n, float(theta)) for n in n_grid)
        return RegimePath(kind="fixed_theta", points=points)
    if kind != "joint":
        raise DomainError(f"unknown path kind {kind!r}")
    if beta is None or not 0 < beta < 1:
        raise DomainError(
            f"joint path requires 0 < beta < 1 so theta/n -> 0, got {beta!r}"
        )
    cr = False
    if require_cr:
        if alpha is None:
            raise DomainError("strengthened-regime check requires alpha")
        ok, reason = cr_feasible(alpha, beta)
        if not ok:
            raise DomainError(f"path infeasible for the Z statistic: {reason}")
        cr = True
    points = tuple((n, float(n) ** float(beta)) for n in n_grid)
    return RegimePath(kind="joint", points=points, beta=float(beta), cr=cr)
