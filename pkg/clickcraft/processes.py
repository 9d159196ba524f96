"""Heralding, multi-photon subtraction, multi-photon addition and their
composition as maps on P functions, with truncated Fock-space counterparts.

Every map returns the unnormalized conditional state together with its
trace, the probability of the click event that produced it.
"""

import cmath
import math
import random
from concurrent.futures import ThreadPoolExecutor
from typing import Any, List, Union

import attr
import numpy as np

from . import _log
from .dsymbol import click_table
from .fock import (
    DensityMatrix,
    TwoModeDensityMatrix,
    apply_beam_splitter,
    apply_two_mode_squeezer,
    condition_on_clicks,
    product_state,
    vacuum,
)
from .fock import normalize as normalize_density_matrix
from .pfunc import (
    MAX_CANCELLATION,
    GaussianTerm,
    PhaseSpaceMixture,
    alternating_click_sum,
    cancellation,
    click_probability,
    coherent,
    convolve_noise,
    evaluate,
    from_normal_symbol,
    multiply_click_factor,
    scale_loss,
    to_normal_symbol,
)
from .pfunc import normalize as normalize_mixture
from .types import (
    BeamSplitterConfig,
    DetectorConfig,
    NumericalError,
    ProcessOutcome,
    SqueezerConfig,
    ValidationError,
)

AGREEMENT_TOL = 1e-8


@attr.s(auto_attribs=True, frozen=True, slots=True)
class SubtractionSpec:
    """Beam splitter tapping a fraction r^2 of the light onto a click detector."""

    bs: BeamSplitterConfig
    det: DetectorConfig
    k: int

    def __attrs_post_init__(self) -> None:
        self.det.check_clicks(self.k)

    @property
    def eta_eff(self) -> float:
        """eta r^2 / t^2"""
        return self.det.eta * self.bs.r**2 / self.bs.t**2


@attr.s(auto_attribs=True, frozen=True, slots=True)
class AdditionSpec:
    """Two-mode squeezer whose idler mode is sent to a click detector."""

    sq: SqueezerConfig
    det: DetectorConfig
    k: int

    def __attrs_post_init__(self) -> None:
        self.det.check_clicks(self.k)
        if self.sq.xi <= 0.0:
            raise ValidationError("photon addition needs a squeezing parameter xi > 0")

    @property
    def eta_eff(self) -> float:
        """eta nu^2 / mu^2"""
        return self.det.eta * self.sq.nu**2 / self.sq.mu**2


@attr.s(auto_attribs=True, frozen=True, slots=True)
class AmplifySpec:
    add: AdditionSpec
    sub: SubtractionSpec

    def __attrs_post_init__(self) -> None:
        if self.add.det.eta >= 1.0:
            raise ValidationError(
                "the addition detector needs an efficiency below 1: at eta = 1 the "
                "output P function acquires delta contributions"
            )


@attr.s(auto_attribs=True, frozen=True, slots=True, eq=False)
class HeraldedDistribution:
    """Photon distribution of the heralded mode for one click number.

    `unnormalized` sums to `probability`; `normalized` sums to one.
    """

    k: int
    unnormalized: np.ndarray
    probability: float
    normalized: np.ndarray


def herald(state: TwoModeDensityMatrix, det: DetectorConfig, k: int) -> ProcessOutcome:
    """Condition mode A of a bipartite state on k clicks in mode B."""
    return condition_on_clicks(state, det, k)


def herald_tmsv_distribution(
    omega: float, det: DetectorConfig, k: int, tail_tol: float = 1e-17
) -> HeraldedDistribution:
    """p_n = (1 - omega) omega^n D(k, n) for a phase-diffused TMSV."""
    if not 0.0 < omega < 1.0:
        raise ValidationError(f"omega must lie in (0, 1), got {omega}")
    det.check_clicks(k)

    levels = max(math.ceil(math.log(tail_tol) / math.log(omega)), k + 1)
    n = np.arange(levels)
    unnormalized = (1.0 - omega) * omega**n * click_table(det, levels - 1).row(k)
    probability = math.fsum(unnormalized)
    if probability > 0.0:
        normalized = unnormalized / probability
    else:
        _log.warning(
            "%(k)s clicks cannot occur with eta=%(eta)s",
            {"k": k, "eta": det.eta},
        )
        normalized = np.zeros(levels)
    return HeraldedDistribution(k, unnormalized, probability, normalized)


def _outcome(P: PhaseSpaceMixture, probability: float) -> ProcessOutcome:
    ratio = cancellation(P, probability)
    if ratio > MAX_CANCELLATION:
        _log.debug(
            "mixture of %(n)s terms outweighs its probability %(p)s by %(ratio)s",
            {"n": len(P), "p": probability, "ratio": ratio},
        )
    return ProcessOutcome(P, probability)


def subtract(P_in: PhaseSpaceMixture, spec: SubtractionSpec) -> ProcessOutcome:
    """Loss map followed by the click factor with eta r^2 / t^2."""
    attenuated = scale_loss(P_in, spec.bs.t)
    N, k = spec.det.N, spec.k
    return _outcome(
        multiply_click_factor(attenuated, spec.eta_eff, N, k),
        click_probability(attenuated, spec.eta_eff, N, k),
    )


def add(P_in: PhaseSpaceMixture, spec: AdditionSpec) -> ProcessOutcome:
    """Noise map followed by the click factor with eta nu^2 / mu^2.

    The click factor multiplies the normally ordered symbol of the amplified
    state, the P function is recovered afterwards.
    """
    symbol = to_normal_symbol(convolve_noise(P_in, spec.sq.mu))
    N, k = spec.det.N, spec.k
    clicked = multiply_click_factor(symbol, spec.eta_eff, N, k)
    return _outcome(
        from_normal_symbol(clicked),
        click_probability(symbol, spec.eta_eff, N, k, symbol=True),
    )


def amplify_closed_form(beta: complex, spec: AmplifySpec) -> PhaseSpaceMixture:
    """Output P function of the (k1, k2) amplifier for a coherent input.

    Each pair (j1, j2) of the two click factor expansions contributes the
    Gaussian f exp(-lam2 |alpha|^2 + 2 lam1 Re(conj(beta) alpha) - lam0 |beta|^2).
    """
    add_spec, sub_spec = spec.add, spec.sub
    mu2, nu2 = add_spec.sq.mu**2, add_spec.sq.nu**2
    t = sub_spec.bs.t
    N1, k1, eta1 = add_spec.det.N, add_spec.k, add_spec.det.eta
    N2, k2 = sub_spec.det.N, sub_spec.k
    beta2 = abs(beta) ** 2

    terms: List[GaussianTerm] = []
    for j1 in range(k1 + 1):
        # inverse width of the clicked symbol and of its P function
        A = (1.0 + eta1 * nu2 * (N1 - j1) / N1) / mu2
        a_p = A / (1.0 - A)
        lam1 = a_p / (t * math.sqrt(mu2) * A)
        for j2 in range(k2 + 1):
            lam_b = sub_spec.eta_eff * (N2 - j2) / N2
            lam2 = a_p / t**2 + lam_b
            lam0 = (
                1.0
                - 1.0 / (mu2 * A)
                + a_p * lam_b / (lam2 * mu2 * A**2)
                + lam1**2 / lam2
            )
            f = (
                math.comb(N1, k1)
                * math.comb(k1, j1)
                * (-1) ** (k1 - j1)
                * math.comb(N2, k2)
                * math.comb(k2, j2)
                * (-1) ** (k2 - j2)
                / (mu2 * t**2 * (1.0 - A))
            )
            c = f / math.pi * math.exp((lam1**2 / lam2 - lam0) * beta2)
            terms.append(GaussianTerm(c, lam1 * complex(beta) / lam2, lam2))
    return PhaseSpaceMixture(terms)


def _compare_paths(
    beta: complex, composed: PhaseSpaceMixture, spec: AmplifySpec
) -> None:
    closed = amplify_closed_form(beta, spec)
    rng = random.Random(0)
    radius = 3.0 + abs(beta) * spec.add.sq.mu
    points = np.array(
        [
            cmath.rect(radius * rng.random(), 2 * math.pi * rng.random())
            for _ in range(64)
        ]
    )
    a, b = evaluate(composed, points), evaluate(closed, points)
    scale = float(np.abs(b).max(initial=0.0))
    deviation = float(np.abs(a - b).max(initial=0.0))
    if deviation > AGREEMENT_TOL * max(scale, 1e-300):
        _log.warning(
            "composed and closed-form amplifier outputs differ by %(dev)s "
            "(scale %(scale)s) for k1=%(k1)s k2=%(k2)s",
            {"dev": deviation, "scale": scale, "k1": spec.add.k, "k2": spec.sub.k},
        )


def amplify(
    source: Union[complex, PhaseSpaceMixture], spec: AmplifySpec
) -> ProcessOutcome:
    """Photon addition followed by photon subtraction.

    A complex `source` is a coherent input amplitude; its output is also
    checked against `amplify_closed_form`.
    """
    P_in = source if isinstance(source, PhaseSpaceMixture) else coherent(source)
    outcome = subtract(add(P_in, spec.add).state, spec.sub)
    if not isinstance(source, PhaseSpaceMixture):
        _compare_paths(complex(source), outcome.state, spec)
    return outcome


def _displaced_thermal_sum(
    alpha0: complex, lam: float, noise: float, N: int, k: int
) -> float:
    """Click sum of the terms exp(-x_j |alpha0|^2 / g_j) / g_j with
    x_j = lam (1 - j/N) and g_j = 1 + x_j noise."""

    def term(ctx: Any, j: int) -> Any:
        x = ctx.mpf(lam) * (N - j) / N
        gamma = 1 + x * ctx.mpf(noise)
        alpha2 = ctx.mpf(alpha0.real) ** 2 + ctx.mpf(alpha0.imag) ** 2
        return ctx.exp(-x * alpha2 / gamma) / gamma

    return alternating_click_sum(N, k, term)


def probability_subtraction_displaced_thermal(
    alpha0: complex, nbar: float, spec: SubtractionSpec
) -> float:
    """Probability of k subtraction clicks for a displaced thermal input.

    With g_j = 1 + eta r^2 nbar (1 - j/N) the terms are
    exp(-eta r^2 (1 - j/N) |alpha0|^2 / g_j) / g_j, which stays finite at
    nbar = 0.
    """
    if nbar < 0.0:
        raise ValidationError(f"mean thermal photon number must be >= 0, got {nbar}")
    lam = spec.det.eta * spec.bs.r**2
    return _displaced_thermal_sum(complex(alpha0), lam, nbar, spec.det.N, spec.k)


def probability_addition_displaced_thermal(
    alpha0: complex, nbar: float, spec: AdditionSpec
) -> float:
    """Probability of k addition clicks for a displaced thermal input.

    With g_j = 1 + eta nu^2 (nbar + 1) (1 - j/N) the terms are
    exp(-(1 - 1/g_j) |alpha0|^2 / (nbar + 1)) / g_j.
    """
    if nbar < 0.0:
        raise ValidationError(f"mean thermal photon number must be >= 0, got {nbar}")
    lam = spec.det.eta * spec.sq.nu**2
    return _displaced_thermal_sum(
        complex(alpha0), lam, nbar + 1.0, spec.det.N, spec.k
    )


def probability_table(
    spec: AmplifySpec, beta: complex, workers: int = 1
) -> np.ndarray:
    """Probabilities of all (k1, k2) click pairs for a coherent input.

    The clicks stored in `spec` are ignored. Rows are computed in parallel,
    each row reusing one addition output for every k2.
    """
    P_in = coherent(beta)

    def row(k1: int) -> List[float]:
        added = add(P_in, attr.evolve(spec.add, k=k1)).state
        return [
            subtract(added, attr.evolve(spec.sub, k=k2)).probability
            for k2 in range(spec.sub.det.N + 1)
        ]

    rows = range(spec.add.det.N + 1)
    if workers <= 1:
        table = np.array([row(k1) for k1 in rows])
    else:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            table = np.array(list(executor.map(row, rows)))
    _log.debug(
        "probability table for beta=%(beta)s sums to %(total)s",
        {"beta": beta, "total": math.fsum(table.ravel())},
    )
    return table


def effective_sigma2(sq: SqueezerConfig, eta: float) -> float:
    """Variance nu^2 (1 - eta) / (1 + eta nu^2) of the zero-click addition
    output for a coherent input."""
    if not 0.0 <= eta <= 1.0:
        raise ValidationError(f"quantum efficiency must lie in [0, 1], got {eta}")
    nu2 = sq.nu**2
    return nu2 * (1.0 - eta) / (1.0 + eta * nu2)


def squeezer_from_sigma2(sigma2: float, eta: float) -> SqueezerConfig:
    """Squeezer producing the variance sigma2 at efficiency eta."""
    if not 0.0 <= eta < 1.0:
        raise ValidationError("sigma^2 fixes the squeezer only for eta in [0, 1)")
    denominator = 1.0 - eta - eta * sigma2
    if sigma2 < 0.0 or denominator <= 0.0:
        raise ValidationError(
            f"no squeezer reaches sigma^2={sigma2} at eta={eta}, "
            f"the bound is {(1.0 - eta) / eta if eta else math.inf}"
        )
    return SqueezerConfig(math.asinh(math.sqrt(sigma2 / denominator)))


def normalize(
    outcome: ProcessOutcome,
) -> Union[PhaseSpaceMixture, DensityMatrix]:
    """The conditional state divided by its probability."""
    if outcome.probability <= 0.0:
        raise NumericalError("cannot normalize an outcome of zero probability")
    if isinstance(outcome.state, PhaseSpaceMixture):
        return normalize_mixture(outcome.state, outcome.probability)
    return normalize_density_matrix(outcome.state)


def oracle_subtract(state: DensityMatrix, spec: SubtractionSpec) -> ProcessOutcome:
    """Fock-space subtraction: beam splitter with a vacuum ancilla, clicks
    registered on the reflected mode."""
    joint = product_state(state, vacuum(state.cutoff))
    return condition_on_clicks(apply_beam_splitter(joint, spec.bs), spec.det, spec.k)


def oracle_add(state: DensityMatrix, spec: AdditionSpec) -> ProcessOutcome:
    """Fock-space addition: two-mode squeezer with a vacuum idler, clicks
    registered on the idler."""
    joint = product_state(state, vacuum(state.cutoff))
    squeezed = apply_two_mode_squeezer(joint, spec.sq)
    return condition_on_clicks(squeezed, spec.det, spec.k)
