"""Closed-form radius bounds for sections of l_p^N balls.

Every gamma-function ratio is evaluated without forming factorials, so all
functions stay finite for dimensions up to at least 10**6.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional


from .types import DomainError, Field, Measure, as_field, as_measure

SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)


# Stirling series coefficients B_2k / (2k (2k - 1))
_STIRLING = (1 / 12, -1 / 360, 1 / 1260, -1 / 1680, 1 / 1188, -691 / 360360, 1 / 156)


def _log_gamma_ratio(x: float, a: float) -> float:
    """log(Gamma(x + a) / Gamma(x)) for x > 0, a > 0.

    For large x the difference of two lgamma values loses about
    log10(x log x) digits, so the Stirling expansions are subtracted term by
    term instead, with the leading part written through log1p.
    """
    if x < 20.0:
        return math.lgamma(x + a) - math.lgamma(x)
    t = a / x
    out = (x - 0.5) * math.log1p(t) + a * math.log(x + a) - a
    for k, c in enumerate(_STIRLING, start=1):
        m = 2 * k - 1
        out += c * x ** (-m) * math.expm1(-m * math.log1p(t))
    return out


def gaussian_mean_norm(d: int, p: float = 1.0) -> float:
    """L_p norm of the Euclidean length of a standard Gaussian vector in R^d.

    ``(E |G|^p)^(1/p) = sqrt(2) * (Gamma((d+p)/2) / Gamma(d/2))^(1/p)``.
    With ``p = 1`` this is the chi-distribution mean usually written mu_d.
    """
    if d < 1 or int(d) != d:
        raise DomainError(f"d must be a positive integer, got {d!r}")
    if not p > 0:
        raise DomainError(f"p must be positive, got {p!r}")
    if p == 2:
        return math.sqrt(d)
    return math.exp(_log_gamma_ratio(d / 2.0, p / 2.0) / p + 0.5 * math.log(2.0))


def _check_nd(N: int, d: int) -> None:
    if d < 1 or N < 1 or d > N:
        raise DomainError(f"need 1 <= d <= N, got N={N}, d={d}")


def _check_p(p: float) -> None:
    if not 1.0 <= p <= 2.0:
        raise DomainError(f"p must lie in [1, 2], got {p!r}")


def thm1_upper(N: int, d: int) -> float:
    """Largest possible lower constant lambda in ``lambda |x|_2 <= |x|_1`` on a d-dim E."""
    _check_nd(N, d)
    return SQRT_2_OVER_PI * math.sqrt(N) * math.sqrt(d) / gaussian_mean_norm(d, 1.0)


def _mu_ratio(d: int, p: float, field: Field) -> float:
    if field is Field.REAL:
        return gaussian_mean_norm(1, p) / gaussian_mean_norm(d, p)
    return gaussian_mean_norm(2, p) / gaussian_mean_norm(2 * d, p)


def thm2_upper(N: int, d: int, p: float, field=Field.REAL) -> float:
    """Upper bound on lambda for ``lambda |x|_2 <= |x|_p`` on a d-dim subspace of l_p^N."""
    _check_nd(N, d)
    _check_p(p)
    field = as_field(field)
    return N ** (1.0 / p - 0.5) * math.sqrt(d) * _mu_ratio(d, p, field)


def normalized_upper(d: int, p: float = 1.0, field=Field.REAL) -> float:
    """The N-free form of :func:`thm2_upper` under a probability measure."""
    if d < 1:
        raise DomainError(f"d must be >= 1, got {d}")
    _check_p(p)
    return math.sqrt(d) * _mu_ratio(d, p, as_field(field))


def lambda_prime_lower(d: int) -> float:
    """Lower bound sqrt(d) on the upper constant lambda' for p = 1."""
    if d < 1:
        raise DomainError(f"d must be >= 1, got {d}")
    return math.sqrt(d)


def meyer_pajor_lower(d: int, p: float = 1.0) -> float:
    """(Vol B_2^d / Vol B_p^d)^(1/d), the volumetric lower bound on lambda'."""
    if d < 1:
        raise DomainError(f"d must be >= 1, got {d}")
    _check_p(p)
    log_vol_b2 = 0.5 * d * math.log(math.pi) - math.lgamma(1.0 + d / 2.0)
    log_vol_bp = d * math.log(2.0 * math.gamma(1.0 + 1.0 / p)) - math.lgamma(1.0 + d / p)
    return math.exp((log_vol_b2 - log_vol_bp) / d)


def sphere_average_l1(N: int) -> float:
    """Mean of |x|_1 over the Euclidean unit sphere of R^N, i.e. N mu_1 / mu_N."""
    if N < 1:
        raise DomainError(f"N must be >= 1, got {N}")
    return N * gaussian_mean_norm(1, 1.0) / gaussian_mean_norm(N, 1.0)


def measure_scale(N: int, p: float, measure=Measure.COUNTING) -> float:
    """Factor converting a counting-measure lambda into the normalized one.

    Both the l_p and the l_2 norm are normalized, so the ratio picks up
    ``N**(1/2 - 1/p)``.
    """
    if as_measure(measure) is Measure.COUNTING:
        return 1.0
    if math.isinf(p):
        return N ** 0.5
    return N ** (0.5 - 1.0 / p)


@dataclass(frozen=True)
class BoundReport:
    N: int
    d: int
    p: float
    field: Field
    measure: Measure
    thm_upper_lambda: float
    thm_lower_lambda_prime: Optional[float]
    meyer_pajor_lower: Optional[float]
    sphere_average: Optional[float]
    complex_p1_asymptote: Optional[float]

    def to_dict(self) -> dict:
        out = asdict(self)
        out["field"] = self.field.value
        out["measure"] = self.measure.value
        return out


def bound_report(N: int, d: int, p: float = 1.0, field=Field.REAL,
                 measure=Measure.COUNTING) -> BoundReport:
    """Evaluate every available bound for one (N, d, p, field, measure) cell.

    Values that only exist for p = 1 (or only in the real case) are None
    otherwise. All lambda-type numbers are rescaled to ``measure``.
    """
    field = as_field(field)
    measure = as_measure(measure)
    s = measure_scale(N, p, measure)
    upper = thm2_upper(N, d, p, field) * s
    p1 = p == 1.0
    lam_prime = lambda_prime_lower(d) * s if p1 else None
    mp = meyer_pajor_lower(d, p) * s if field is Field.REAL else None
    avg = sphere_average_l1(N) * s if (p1 and field is Field.REAL) else None
    asym = math.sqrt(math.pi) / 2.0 * math.sqrt(N) * s if (p1 and field is Field.COMPLEX) else None
    return BoundReport(N, d, p, field, measure, upper, lam_prime, mp, avg, asym)
