"""The combinatorial kernel of click counting.

D[tau, sigma](k, m) = C(N, k) sum_j C(k, j) (-1)^(k-j) (tau + sigma j / N)^m

For tau = 1 - eta and sigma = eta it is the probability of k clicks among N
diodes given m photons. The alternating sum cancels badly for large m, so
tables are filled with the two-term recursion and the sum itself is only used
(together with the exact rational evaluation) to validate the recursion.
"""

import math
import sys
from fractions import Fraction
from functools import lru_cache
from typing import Tuple, Union

import attr
import numpy as np

from . import _log
from .types import DetectorConfig, ValidationError

Rational = Union[Fraction, int]


@attr.s(auto_attribs=True, frozen=True, slots=True)
class DSymbolParams:
    N: int
    tau: float
    sigma: float

    def __attrs_post_init__(self) -> None:
        if self.N < 1:
            raise ValidationError(f"N must be a positive integer, got {self.N}")
        if not (math.isfinite(self.tau) and math.isfinite(self.sigma)):
            raise ValidationError(
                f"tau and sigma must be finite, got {self.tau}, {self.sigma}"
            )

    @classmethod
    def for_detector(cls, det: DetectorConfig) -> "DSymbolParams":
        """Parameters of the click POVM, (tau, sigma) = (1 - eta, eta)."""
        return cls(det.N, 1.0 - det.eta, det.eta)


@attr.s(auto_attribs=True, frozen=True, slots=True, eq=False)
class DSymbolTable:
    """Read-only table values[k, m] for 0 <= k <= kmax, 0 <= m <= mmax."""

    params: DSymbolParams
    kmax: int
    mmax: int
    values: np.ndarray

    def value(self, k: int, m: int) -> float:
        return float(self.values[k, m])

    def row(self, k: int) -> np.ndarray:
        """D(k, m) for m = 0..mmax, i.e. the diagonal of a POVM element."""
        return self.values[k]

    def column(self, m: int) -> np.ndarray:
        return self.values[:, m]


def _check_indices(N: int, k: int, m: int) -> None:
    if k < 0 or m < 0:
        raise ValidationError(f"indices must be non-negative, got k={k}, m={m}")
    if k > N:
        raise ValidationError(f"k={k} exceeds the number of diodes N={N}")


def d_direct_with_error(params: DSymbolParams, k: int, m: int) -> Tuple[float, float]:
    """Evaluate the alternating sum and bound its forward error.

    The terms are accumulated with exact rounding (math.fsum), so the error
    comes from the rounded bases and powers only; it is bounded by the sum of
    the term magnitudes times (2m + 4) unit roundoffs.
    """
    _check_indices(params.N, k, m)
    terms = [
        math.comb(k, j)
        * (-1) ** (k - j)
        * (params.tau + params.sigma * j / params.N) ** m
        for j in range(k + 1)
    ]
    prefactor = math.comb(params.N, k)
    value = prefactor * math.fsum(terms)
    magnitude = prefactor * math.fsum(abs(term) for term in terms)
    bound = magnitude * (2 * m + 4) * sys.float_info.epsilon / 2
    return value, bound


def d_direct(params: DSymbolParams, k: int, m: int) -> float:
    return d_direct_with_error(params, k, m)[0]


def d_exact(N: int, tau: Rational, sigma: Rational, k: int, m: int) -> Fraction:
    """Exact rational value of the alternating sum.

    >>> d_exact(4, Fraction(1, 20), Fraction(19, 20), 1, 1)
    Fraction(19, 20)
    """
    _check_indices(N, k, m)
    tau, sigma = Fraction(tau), Fraction(sigma)
    total = sum(
        math.comb(k, j) * (-1) ** (k - j) * (tau + sigma * Fraction(j, N)) ** m
        for j in range(k + 1)
    )
    return math.comb(N, k) * Fraction(total)


def d_recursive(params: DSymbolParams, kmax: int, mmax: int) -> DSymbolTable:
    """Fill the table with

    D(k, m) = (tau + sigma k / N) D(k, m-1) + sigma (N - k + 1) / N D(k-1, m-1)

    starting from D(0, 0) = 1, D(k, 0) = 0 for k > 0. For tau = 1 - eta and
    sigma = eta both coefficients are non-negative.
    """
    if not 0 <= kmax <= params.N:
        raise ValidationError(f"kmax={kmax} must lie in [0, N={params.N}]")
    if mmax < 0:
        raise ValidationError(f"mmax must be non-negative, got {mmax}")

    ks = np.arange(kmax + 1, dtype=float)
    stay = params.tau + params.sigma * ks / params.N
    hop = params.sigma * (params.N - ks[1:] + 1) / params.N

    values = np.zeros((kmax + 1, mmax + 1))
    values[0, 0] = 1.0
    for m in range(1, mmax + 1):
        previous = values[:, m - 1]
        values[0, m] = params.tau * previous[0]
        values[1:, m] = stay[1:] * previous[1:] + hop * previous[:-1]
    values.setflags(write=False)

    _log.debug(
        "D-symbol table N=%(N)s tau=%(tau)s sigma=%(sigma)s up to k=%(k)s m=%(m)s",
        {
            "N": params.N,
            "tau": params.tau,
            "sigma": params.sigma,
            "k": kmax,
            "m": mmax,
        },
    )
    return DSymbolTable(params, kmax, mmax, values)


@lru_cache(maxsize=64)
def click_table(det: DetectorConfig, mmax: int) -> DSymbolTable:
    """Table of the click probabilities D[1-eta, eta](k, m), k = 0..N."""
    return d_recursive(DSymbolParams.for_detector(det), det.N, mmax)
