"""Perturbation-series coefficients and the combinatorics behind their bounds.

The top eigenvalue of the tilted symmetrized generator expands as a power
series whose n-th coefficient is a signed sum of traces over weak
compositions of n-1 into n parts.  Rotation classes of those compositions
are counted by beta(n, m) (classes with m non-adjacent zeros), their totals
beta_n match the Motzkin numbers shifted by two, and the generating function
Phi(x) = sum beta_n x^n majorizes the series on [0, 1/3].  All combinatorial
quantities here are exact integers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import DomainError, OrderTooLargeError, OutOfRangeError, TooLargeError
from .markov import Observable, ProbDist
from .spectral import SpectralData

ORDER_CAP = 10
ENUMERATION_CAP = 14


def motzkin(n_max: int) -> list[int]:
    """Motzkin numbers m_0..m_n_max from the recurrence of m = 1 + xm + (xm)^2.

    Extracting coefficients from the quadratic equation gives
    ``m_n = m_{n-1} + sum_{i+j=n-2} m_i m_j``; Python integers keep every
    value exact.
    """
    if n_max < 0:
        raise OutOfRangeError(f"need n >= 0, got {n_max}")
    m = [1]
    for n in range(1, n_max + 1):
        val = m[n - 1]
        val += sum(m[i] * m[n - 2 - i] for i in range(n - 1))
        m.append(val)
    return m


def motzkin_binomial(n: int) -> int:
    """Independent closed form m_n = sum_m C(n, 2m) (2m)!/(m!(m+1)!)."""
    if n < 0:
        raise OutOfRangeError(f"need n >= 0, got {n}")
    return sum(
        math.comb(n, 2 * m) * math.factorial(2 * m)
        // (math.factorial(m) * math.factorial(m + 1))
        for m in range(n // 2 + 1)
    )


def beta(n: int, m: int) -> int:
    """Number of rotation classes of weak compositions of n-1 into n parts
    with exactly m non-adjacent zeros.

    Evaluates both closed forms,
    ``C(n-1, m) C(n-1-m, n-2m) / (n-1)`` and
    ``C(n-m-1, m-1) C(n-2, n-m-1) / m``,
    and insists they agree.  Returns 0 for m above floor(n/2), where two
    zeros would have to be adjacent.
    """
    if n < 2 or m < 1:
        raise OutOfRangeError(f"need n >= 2 and m >= 1, got n={n}, m={m}")
    if m > n // 2:
        return 0
    num = math.comb(n - 1, m) * math.comb(n - 1 - m, n - 2 * m)
    if num % (n - 1) != 0:
        raise OutOfRangeError(f"closed form for beta({n},{m}) is not integral")
    first = num // (n - 1)
    alt_num = math.comb(n - m - 1, m - 1) * math.comb(n - 2, n - m - 1)
    if alt_num % m != 0 or alt_num // m != first:
        raise OutOfRangeError(f"the two closed forms for beta({n},{m}) disagree")
    return first


def beta_total(n: int) -> int:
    """beta_n = sum over m of beta(n, m); equals the Motzkin number m_{n-2}."""
    return sum(beta(n, m) for m in range(1, n // 2 + 1))


@dataclass(frozen=True)
class CompositionClass:
    """Rotation class of a weak composition, keyed by its minimal rotation."""

    representative: tuple[int, ...]
    size: int
    zeros: int
    adjacent_zeros: bool


def _min_rotation(t: tuple[int, ...]) -> tuple[int, ...]:
    return min(t[i:] + t[:i] for i in range(len(t)))


def _has_cyclic_adjacent_zeros(t: tuple[int, ...]) -> bool:
    n = len(t)
    return any(t[i] == 0 and t[(i + 1) % n] == 0 for i in range(n))


def enumerate_classes(n: int) -> list[CompositionClass]:
    """All rotation classes of weak compositions of n-1 into n parts.

    Every class has exactly n members because gcd(n, n-1) = 1; this is
    asserted during the census.  Per class the zero count and the cyclic
    zero-adjacency flag are recorded.
    """
    if n < 2:
        raise OutOfRangeError(f"need n >= 2, got {n}")
    if n > ENUMERATION_CAP:
        raise TooLargeError(n, ENUMERATION_CAP)
    total = n - 1
    counts: dict[tuple[int, ...], int] = {}
    for dividers in combinations(range(total + n - 1), n - 1):
        comp = []
        prev = -1
        for d in dividers:
            comp.append(d - prev - 1)
            prev = d
        comp.append(total + n - 2 - prev)
        key = _min_rotation(tuple(comp))
        counts[key] = counts.get(key, 0) + 1
    classes = []
    for rep, size in sorted(counts.items()):
        if size != n:
            raise OutOfRangeError(
                f"rotation class {rep} has {size} members, expected {n}"
            )
        classes.append(
            CompositionClass(
                representative=rep,
                size=size,
                zeros=rep.count(0),
                adjacent_zeros=_has_cyclic_adjacent_zeros(rep),
            )
        )
    return classes


def class_census(n: int) -> dict[int, int]:
    """Count classes with m non-adjacent zeros; the enumeration oracle for beta."""
    census: dict[int, int] = {}
    for cls in enumerate_classes(n):
        if not cls.adjacent_zeros:
            census[cls.zeros] = census.get(cls.zeros, 0) + 1
    return census


def phi(x: float) -> float:
    """Majorant generating function ((1-x)/2)(1 - sqrt(1 - 4x^2/(1-x)^2)).

    Defined on [0, 1/3]; the square-root argument is clamped at 0 at the
    right endpoint where it vanishes.
    """
    if not 0.0 <= x <= 1.0 / 3.0 + 1e-15:
        raise DomainError(x, 0.0, 1.0 / 3.0)
    arg = 1.0 - 4.0 * x * x / (1.0 - x) ** 2
    return 0.5 * (1.0 - x) * (1.0 - math.sqrt(max(arg, 0.0)))


def phi_series(x: float, tol: float = 1e-14, n_cap: int = 600) -> float:
    """Partial sum of sum beta_n x^n, extended until the terms drop below tol.

    Uses the closed form for beta(n, m) only, so it is an oracle independent
    of the Motzkin recurrence and of ``phi``.
    """
    if not 0.0 <= x <= 1.0 / 3.0 + 1e-15:
        raise DomainError(x, 0.0, 1.0 / 3.0)
    terms = []
    for n in range(2, n_cap + 1):
        term = float(beta_total(n)) * x**n
        terms.append(term)
        if n > 8 and term < tol:
            break
    return math.fsum(terms)


@dataclass(frozen=True)
class SeriesCoefficients:
    """Leading perturbation-series coefficients of the tilted top eigenvalue."""

    coeffs: np.ndarray  # coeffs[k] multiplies r^(k+1); first entry is order 1
    order: int

    def partial_sum(self, r: float) -> float:
        powers = np.power(r, np.arange(1, self.order + 1))
        return float(self.coeffs @ powers)


def lambda0_coefficients(
    sd: SpectralData, f: Observable, pi: ProbDist, order: int
) -> SeriesCoefficients:
    """Series coefficients via the trace formula over weak compositions.

    The n-th coefficient is ``(-1)^n / n`` times the sum of
    ``Tr(M_f S^(k_1) ... M_f S^(k_n))`` over compositions k_1+...+k_n = n-1,
    with S^(0) = -pr and S^(k) = S^k.  Traces are taken in the coordinate
    basis (trace is basis independent) and summed with compensated addition.
    """
    if order < 1:
        raise OutOfRangeError(f"need order >= 1, got {order}")
    if order > ORDER_CAP:
        raise OrderTooLargeError(order, ORDER_CAP)
    mf = np.diag(f.values)
    s_powers = [-sd.projector0]
    if order >= 2:
        s_powers.append(sd.resolvent)
        for _ in range(order - 2):
            s_powers.append(s_powers[-1] @ sd.resolvent)
    blocks = [mf @ s for s in s_powers]

    coeffs = np.zeros(order)
    for n in range(1, order + 1):
        traces: list[float] = []
        _trace_over_compositions(blocks, n, n - 1, None, traces)
        coeffs[n - 1] = ((-1.0) ** n / n) * math.fsum(traces)
    return SeriesCoefficients(coeffs=coeffs, order=order)


def _trace_over_compositions(blocks, slots, budget, prefix, out):
    """DFS over compositions sharing prefix products of the slot matrices."""
    if slots == 1:
        prod = blocks[budget] if prefix is None else prefix @ blocks[budget]
        out.append(float(np.trace(prod)))
        return
    for k in range(budget + 1):
        nxt = blocks[k] if prefix is None else prefix @ blocks[k]
        _trace_over_compositions(blocks, slots - 1, budget - k, nxt, out)
