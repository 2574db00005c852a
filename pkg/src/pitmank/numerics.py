"""Special-function kernel: rising factorials, log-gamma, Stirling's
approximation, and the gamma-ratio identities behind the block-count moments.

Exact mode works in :class:`fractions.Fraction`; floating mode works in
mpmath arbitrary-precision arithmetic with the precision recorded on every
result (:class:`ApproxScalar`).  Differences of nearly equal log-gamma values
are certified by re-evaluating at doubled precision until two consecutive
evaluations agree (see :func:`stable_eval`).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Union

import mpmath
from mpmath import mpf

__all__ = [
    "DEFAULT_PRECISION_BITS",
    "ApproxScalar",
    "DomainError",
    "ExactScalar",
    "Number",
    "PitmanParams",
    "PrecisionError",
    "gamma_decay_expansion",
    "gamma_growth_expansion",
    "gamma_ratio_product",
    "gamma_ratio_product_expansion",
    "log_gamma",
    "resolve_bits",
    "rising_factorial",
    "rising_factorial_expansion",
    "stable_eval",
    "stirling_gamma",
    "to_mpf",
]

DEFAULT_PRECISION_BITS = 128

# Guard bits added on top of the requested precision before any subtraction
# of near-equal logs; escalation doubles from there.
_GUARD_BITS = 32
_MAX_ESCALATIONS = 10

#: Exact rationals are plain ``fractions.Fraction`` values: reduced to lowest
#: terms with a positive denominator, compared by value.
ExactScalar = Fraction

Number = Union[int, float, Fraction]


class DomainError(ValueError):
    """An input lies outside the operation's domain."""


class PrecisionError(ArithmeticError):
    """A floating evaluation stayed unstable after the maximum number of
    precision escalations."""


@dataclass(frozen=True)
class ApproxScalar:
    """A floating result together with the precision it was computed at.

    ``precision_bits`` is the precision the value is trusted to (>= 53);
    operations that produce an ApproxScalar never return a value computed at
    lower precision than requested.
    """

    value: mpf
    precision_bits: int

    def __post_init__(self):
        if self.precision_bits < 53:
            raise DomainError("precision_bits must be at least 53")

    def __float__(self) -> float:
        return float(self.value)


@dataclass(frozen=True)
class PitmanParams:
    """Parameter triple (n, alpha, theta) of the two-parameter partition model.

    Constraints: ``n >= 1``, ``0 < alpha < 1`` and ``theta > -alpha``.  Exact
    arithmetic additionally requires ``alpha`` and ``theta`` to be rational
    (int or Fraction); floats select floating mode.
    """

    n: int
    alpha: Number
    theta: Number

    def __post_init__(self):
        if not isinstance(self.n, int) or isinstance(self.n, bool) or self.n < 1:
            raise DomainError(f"n must be a positive integer, got {self.n!r}")
        if not 0 < self.alpha < 1:
            raise DomainError(f"alpha must lie in (0, 1), got {self.alpha!r}")
        if not self.theta > -self.alpha:
            raise DomainError(
                f"theta must exceed -alpha, got theta={self.theta!r} alpha={self.alpha!r}"
            )

    @property
    def is_exact(self) -> bool:
        return isinstance(self.alpha, (int, Fraction)) and isinstance(
            self.theta, (int, Fraction)
        )

    def exact_alpha_theta(self) -> tuple[Fraction, Fraction]:
        """Return (alpha, theta) as Fractions; reject non-rational inputs."""
        if not self.is_exact:
            raise DomainError(
                "exact mode requires rational alpha and theta; "
                "got alpha=%r theta=%r" % (self.alpha, self.theta)
            )
        return Fraction(self.alpha), Fraction(self.theta)


def resolve_bits(bits: int | None) -> int:
    """Default the working precision; reject precisions below double."""
    if bits is None:
        return DEFAULT_PRECISION_BITS
    bits = int(bits)
    if bits < 53:
        raise DomainError("precision_bits must be at least 53")
    return bits


def to_mpf(x) -> mpf:
    """Convert int/float/Fraction/mpf to mpf at the ambient precision."""
    if isinstance(x, Fraction):
        return mpf(x.numerator) / mpf(x.denominator)
    return mpf(x)


def stable_eval(fn: Callable[[], mpf], bits: int) -> mpf:
    """Evaluate ``fn`` under increasing mpmath precision until two consecutive
    evaluations agree to ``bits`` bits; return the value rounded to ``bits``.

    ``fn`` must compute its result from scratch at the ambient precision.
    Raises :class:`PrecisionError` when agreement is never reached.
    """
    prec = bits + _GUARD_BITS
    with mpmath.workprec(prec):
        prev = fn()
    for _ in range(_MAX_ESCALATIONS):
        prec *= 2
        with mpmath.workprec(prec):
            cur = fn()
            if cur == prev or (cur != 0 and abs(cur - prev) <= abs(cur) * mpf(2) ** (1 - bits)):
                with mpmath.workprec(bits):
                    return +cur
            prev = cur
    raise PrecisionError(
        f"evaluation did not stabilise to {bits} bits after "
        f"{_MAX_ESCALATIONS} precision doublings"
    )


def rising_factorial(x, i: int, y=1):
    """Generalized rising factorial ``x (x+y) (x+2y) ... (x+(i-1)y)``.

    The empty product (``i == 0``) is 1.  ``y = 1`` gives the ordinary
    rising factorial.  Requires ``i >= 0``, ``y >= 0`` and, for non-empty
    products, ``x > -y`` so every factor past the first is positive.
    """
    if not isinstance(i, int) or i < 0:
        raise DomainError(f"index must be a nonnegative integer, got {i!r}")
    if y < 0:
        raise DomainError(f"step must be nonnegative, got {y!r}")
    if i >= 1 and not x > -y:
        raise DomainError(f"need x > -y for a non-empty product, got x={x!r} y={y!r}")
    out = 1
    for j in range(i):
        out = out * (x + j * y)
    return out


def log_gamma(x, bits: int | None = None) -> ApproxScalar:
    """Natural log of Gamma(x) for x > 0, accurate to the requested bits."""
    if not x > 0:
        raise DomainError(f"log_gamma requires x > 0, got {x!r}")
    bits = resolve_bits(bits)
    value = stable_eval(lambda: mpmath.loggamma(to_mpf(x)), bits)
    return ApproxScalar(value, bits)


def stirling_gamma(x, bits: int | None = None) -> ApproxScalar:
    """Two-term Stirling approximation of Gamma(x):
    sqrt(2 pi) e^{-x} x^{x - 1/2} (1 + 1/(12 x)).

    The neglected remainder is O(1/x^2) relative, so the approximation error
    is about 1/(288 x^2) for large x.
    """
    if not x > 0:
        raise DomainError(f"stirling_gamma requires x > 0, got {x!r}")
    bits = resolve_bits(bits)

    def _eval():
        xx = to_mpf(x)
        return (
            mpmath.sqrt(2 * mpmath.pi)
            * mpmath.exp(-xx)
            * xx ** (xx - mpf(1) / 2)
            * (1 + 1 / (12 * xx))
        )

    return ApproxScalar(stable_eval(_eval, bits), bits)


def _check_ratio_index(i: int):
    if not isinstance(i, int) or i < 0:
        raise DomainError(f"ratio index must be a nonnegative integer, got {i!r}")


def gamma_ratio_product(
    params: PitmanParams, i: int, bits: int | None = None
) -> Fraction | ApproxScalar:
    """The product of gamma ratios
    ``[G(t/a+1+i)/G(t/a+1)] [G(t+n+ia)/G(t+n)] [G(t+1)/G(t+1+ia)]``
    for t = theta, a = alpha.

    Every shift offset is an integer plus an integer multiple of alpha with
    matching totals, so the whole product reduces to rising factorials:

        (theta/alpha + 1)_i * (theta + i alpha + 1)_{n-1} / (theta + 1)_{n-1}

    which is rational for rational parameters.  ``i = 0`` is the empty
    product 1.  Exact parameters give a Fraction; floats give an
    ApproxScalar evaluated through certified log-gamma differences.
    """
    _check_ratio_index(i)
    n = params.n
    if i == 0:
        return Fraction(1) if params.is_exact else ApproxScalar(mpf(1), resolve_bits(bits))
    if params.is_exact:
        alpha, theta = params.exact_alpha_theta()
        lead = rising_factorial(theta / alpha + 1, i)
        num = rising_factorial(theta + i * alpha + 1, n - 1)
        den = rising_factorial(theta + 1, n - 1)
        return Fraction(lead) * Fraction(num) / Fraction(den)

    bits = resolve_bits(bits)

    def _eval():
        a = to_mpf(params.alpha)
        t = to_mpf(params.theta)
        lg = mpmath.loggamma
        return mpmath.exp(
            lg(t / a + 1 + i)
            - lg(t / a + 1)
            + lg(t + n + i * a)
            - lg(t + n)
            + lg(t + 1)
            - lg(t + 1 + i * a)
        )

    return ApproxScalar(stable_eval(_eval, bits), bits)


def gamma_growth_expansion(
    n: int, theta, alpha, i: int, bits: int | None = None
) -> ApproxScalar:
    """Large-n approximation of ``Gamma(theta+n+i
    alpha)/Gamma(theta+n)``: returns ``n^{i alpha} (1 + i alpha theta / n)``.

    The neglected remainder is O(1/n + theta^2/n^2) relative.
    """
    _check_ratio_index(i)
    if n < 1:
        raise DomainError(f"n must be at least 1, got {n!r}")
    if theta < 0:
        raise DomainError(f"theta must be nonnegative, got {theta!r}")
    bits = resolve_bits(bits)
    if i == 0:
        return ApproxScalar(mpf(1), bits)

    def _eval():
        t = to_mpf(theta)
        a = to_mpf(alpha)
        return to_mpf(n) ** (i * a) * (1 + i * a * t / n)

    return ApproxScalar(stable_eval(_eval, bits), bits)


def gamma_decay_expansion(theta, alpha, i: int, bits: int | None = None) -> ApproxScalar:
    """Large-theta approximation of ``Gamma(theta+1)/Gamma(theta+1+i alpha)``:
    returns ``theta^{-i alpha} (1 - i alpha (i alpha + 1) / (2 theta))``.

    The neglected remainder is O(1/theta^2) relative.
    """
    _check_ratio_index(i)
    if i == 0:
        return ApproxScalar(mpf(1), resolve_bits(bits))
    if not theta > 0:
        raise DomainError(f"large-theta expansion requires theta > 0, got {theta!r}")
    bits = resolve_bits(bits)

    def _eval():
        t = to_mpf(theta)
        ia = i * to_mpf(alpha)
        return t ** (-ia) * (1 - ia * (ia + 1) / (2 * t))

    return ApproxScalar(stable_eval(_eval, bits), bits)


def rising_factorial_expansion(theta, alpha, i: int, bits: int | None = None) -> ApproxScalar:
    """Large-theta approximation of ``(theta/alpha + 1)_i``:
    returns ``(theta/alpha)^i (1 + i (i+1) alpha / (2 theta))``.

    Exact at ``i = 1``; the remainder is O(1/theta^2) relative otherwise.
    """
    _check_ratio_index(i)
    if i == 0:
        return ApproxScalar(mpf(1), resolve_bits(bits))
    if not theta > 0:
        raise DomainError(f"large-theta expansion requires theta > 0, got {theta!r}")
    bits = resolve_bits(bits)

    def _eval():
        t = to_mpf(theta)
        a = to_mpf(alpha)
        return (t / a) ** i * (1 + i * (i + 1) * a / (2 * t))

    return ApproxScalar(stable_eval(_eval, bits), bits)


def gamma_ratio_product_expansion(
    params: PitmanParams, i: int, bits: int | None = None
) -> ApproxScalar:
    """Joint-regime (n and theta large, theta/n small) second-order
    approximation of :func:`gamma_ratio_product`:

        (theta/alpha * (n/theta)^alpha)^i
            * (1 + i alpha theta / n + i^2 alpha (1 - alpha) / (2 theta))

    The neglected remainder is O(1/theta^2 + theta^2/n^2) relative.
    Requires theta > 0.
    """
    _check_ratio_index(i)
    if i == 0:
        return ApproxScalar(mpf(1), resolve_bits(bits))
    if not params.theta > 0:
        raise DomainError(
            f"joint-regime expansion requires theta > 0, got {params.theta!r}"
        )
    bits = resolve_bits(bits)
    n = params.n

    def _eval():
        a = to_mpf(params.alpha)
        t = to_mpf(params.theta)
        lead = (t / a * (n / t) ** a) ** i
        return lead * (1 + i * a * t / n + i * i * a * (1 - a) / (2 * t))

    return ApproxScalar(stable_eval(_eval, bits), bits)
