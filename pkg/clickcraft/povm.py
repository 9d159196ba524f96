"""Diagonal POVM elements of click counting detectors and of ideal
photoelectric counting, and the operator-norm distance between the two."""

import math
from typing import Literal, Optional

import attr
import numpy as np

from . import _log
from .dsymbol import click_table
from .types import DetectorConfig, NumericalError, ValidationError

ElementKind = Literal["click", "photoelectric", "normal"]


@attr.s(auto_attribs=True, frozen=True, slots=True, eq=False)
class DiagonalPOVMElement:
    """Operator sum_m weights[m] |m><m| on the Fock levels 0..cutoff-1."""

    weights: np.ndarray
    kind: ElementKind
    k: int
    det: Optional[DetectorConfig] = None

    def __attrs_post_init__(self) -> None:
        if np.any(self.weights < -1e-15) or np.any(self.weights > 1.0 + 1e-12):
            raise NumericalError(f"{self.kind} POVM weights left [0, 1]")

    @property
    def cutoff(self) -> int:
        return len(self.weights)

    def matrix(self) -> np.ndarray:
        return np.diag(self.weights)

    def expectation(self, photon_dist: np.ndarray) -> float:
        """tr(rho Pi) for a state with the given photon distribution."""
        n = min(len(photon_dist), self.cutoff)
        return math.fsum(np.asarray(photon_dist[:n]) * self.weights[:n])


@attr.s(auto_attribs=True, frozen=True, slots=True, eq=False)
class ClickDistribution:
    """c_k, the probability of k clicks, for k = 0..N."""

    probs: np.ndarray

    def __attrs_post_init__(self) -> None:
        if np.any(self.probs < 0.0) or np.any(self.probs > 1.0 + 1e-10):
            raise NumericalError("click probabilities must lie in [0, 1]")
        if self.total > 1.0 + 1e-10:
            raise NumericalError(f"click probabilities sum to {self.total} > 1")

    @property
    def N(self) -> int:
        return len(self.probs) - 1

    @property
    def total(self) -> float:
        return math.fsum(self.probs)

    def mean(self) -> float:
        return math.fsum(np.arange(self.N + 1) * self.probs) / self.total

    def variance(self) -> float:
        mean = self.mean()
        deviations = (np.arange(self.N + 1) - mean) ** 2
        return math.fsum(deviations * self.probs) / self.total


@attr.s(auto_attribs=True, frozen=True, slots=True)
class NormDistance:
    """Bound on the operator norm of a click element minus a photoelectric
    element.

    `sup` is the largest deviation found on the Fock levels 0..cutoff and
    `argmax` the level where it occurs; `tail_bound` covers all higher
    levels. `value` is the larger of the two.
    """

    value: float
    sup: float
    argmax: int
    tail_bound: float
    cutoff: int


def _check_cutoff(cutoff: int) -> None:
    if cutoff < 1:
        raise ValidationError(f"cutoff must be a positive integer, got {cutoff}")


def click_povm_element(
    det: DetectorConfig, k: int, cutoff: int
) -> DiagonalPOVMElement:
    det.check_clicks(k)
    _check_cutoff(cutoff)
    table = click_table(det, cutoff - 1)
    return DiagonalPOVMElement(table.row(k), "click", k, det)


def photoelectric_element(eta: float, k: int, cutoff: int) -> DiagonalPOVMElement:
    """Photoelectric counting element with weights C(m, k) eta^k (1-eta)^(m-k).

    Built by the ratio recurrence w[m] = w[m-1] m / (m-k) (1-eta) so that
    eta = 1 yields the k-photon projector and k = 0 reproduces the powers
    (1-eta)^m of the click element bit for bit.
    """
    if not 0.0 <= eta <= 1.0:
        raise ValidationError(f"quantum efficiency must lie in [0, 1], got {eta}")
    if k < 0:
        raise ValidationError(f"number of counts must be >= 0, got {k}")
    _check_cutoff(cutoff)

    weights = np.zeros(cutoff)
    if k < cutoff:
        weights[k] = eta**k
        for m in range(k + 1, cutoff):
            weights[m] = weights[m - 1] * (m / (m - k)) * (1.0 - eta)
    weights.setflags(write=False)
    return DiagonalPOVMElement(weights, "photoelectric", k)


def simple_measure_element(lam: float, cutoff: int) -> DiagonalPOVMElement:
    """The normally ordered operator :exp(-lam n):, i.e. (1-lam)^n."""
    if not 0.0 <= lam <= 1.0:
        raise ValidationError(f"lam must lie in [0, 1], got {lam}")
    _check_cutoff(cutoff)
    weights = (1.0 - lam) ** np.arange(cutoff)
    weights.setflags(write=False)
    return DiagonalPOVMElement(weights, "normal", 0)


def click_statistics(photon_dist: np.ndarray, det: DetectorConfig) -> ClickDistribution:
    """c_k = sum_m D(k, m) p_m for k = 0..N."""
    p = np.asarray(photon_dist, dtype=float)
    if p.ndim != 1 or len(p) == 0:
        raise ValidationError("photon distribution must be a non-empty vector")
    if np.any(p < -1e-12):
        raise ValidationError(
            f"photon distribution has negative entries (min {p.min()})"
        )
    p = np.clip(p, 0.0, None)
    if math.fsum(p) > 1.0 + 1e-10:
        raise ValidationError(f"photon distribution sums to {math.fsum(p)} > 1")

    table = click_table(det, len(p) - 1)
    probs = np.array([math.fsum(table.row(k) * p) for k in range(det.N + 1)])
    return ClickDistribution(np.clip(probs, 0.0, 1.0))


def binomial_parameter(dist: ClickDistribution) -> float:
    """Q_B = N Var(c) / (<c> (N - <c>)) - 1.

    Zero for coherent light, negative for sub-binomial click statistics.
    """
    mean = dist.mean()
    denominator = mean * (dist.N - mean)
    if denominator <= 0.0:
        raise NumericalError(
            f"binomial parameter undefined for mean click number {mean}"
        )
    return dist.N * dist.variance() / denominator - 1.0


def _tail_bound(det: DetectorConfig, k: int, m: int) -> float:
    """Common bound on both weight sequences for every level above m-1.

    The photoelectric weights decrease once m > k / eta. The click weight is
    at most C(N, k) (1 - eta (N-k)/N)^m, the probability that N-k given
    diodes stay dark.
    """
    rho = 1.0 - det.eta * (det.N - k) / det.N
    log_click = _log_comb(det.N, k) + m * math.log(rho)
    if det.eta == 1.0:
        return math.exp(log_click)
    log_photoelectric = (
        _log_comb(m, k) + k * math.log(det.eta) + (m - k) * math.log1p(-det.eta)
    )
    return math.exp(max(log_photoelectric, log_click))


def _log_comb(n: int, k: int) -> float:
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def operator_norm_distance(det: DetectorConfig, k: int, cutoff: int) -> NormDistance:
    """sup_m |C(m,k) eta^k (1-eta)^(m-k) - D(k, m)| with a tail certificate.

    The scanned range is extended beyond `cutoff` until the analytic tail
    bound drops below a thousandth of the supremum found so far.
    """
    det.check_clicks(k)
    _check_cutoff(cutoff)

    if k == 0 or det.eta == 0.0:
        # identical elements, or both vanish
        return NormDistance(0.0, 0.0, 0, 0.0, cutoff)
    if k == det.N:
        # the click weight tends to one, the photoelectric weight to zero
        return NormDistance(1.0, 1.0, -1, 1.0, cutoff)

    mmax = max(cutoff, math.ceil(k / det.eta) + 1)
    while True:
        click = click_povm_element(det, k, mmax + 1).weights
        photoelectric = photoelectric_element(det.eta, k, mmax + 1).weights
        deviation = np.abs(photoelectric - click)
        argmax = int(np.argmax(deviation))
        sup = float(deviation[argmax])
        tail = _tail_bound(det, k, mmax + 1)
        if tail <= 1e-3 * sup or mmax >= 1 << 16:
            break
        mmax *= 2

    _log.debug(
        "operator norm distance N=%(N)s eta=%(eta)s k=%(k)s: "
        "sup %(sup)s at m=%(m)s, tail %(tail)s beyond m=%(mmax)s",
        {
            "N": det.N,
            "eta": det.eta,
            "k": k,
            "sup": sup,
            "m": argmax,
            "tail": tail,
            "mmax": mmax,
        },
    )
    return NormDistance(max(sup, tail), sup, argmax, tail, mmax)
