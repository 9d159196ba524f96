"""P functions as finite mixtures of isotropic Gaussians and delta terms.

A Gaussian term c exp(-a |alpha - z|^2) has variance 1/a, so a thermal state
of mean photon number n is the term (1/(pi n), 0, 1/n). A delta term
c delta^2(alpha - z) is a coherent component |z><z| of weight c.

The loss map, the noise map and the click factors of both detectors send
mixtures to mixtures. The addition protocol multiplies the normally ordered
symbol F(alpha) = int P(beta) exp(-|alpha - beta|^2) d^2beta instead of P,
which is why `to_normal_symbol` and `from_normal_symbol` exist.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, List, Optional, Tuple

import attr
import mpmath
import numpy as np

from . import _log
from .types import NumericalError, StateSpec, ValidationError

MAX_MOMENT_ORDER = 6
PRUNE_REL_TOL = 1e-15
# significant digits an alternating click sum must keep
RESOLVED_DIGITS = 20
MAX_WORKING_DIGITS = 640
# absolute mass over trace above which values of P / trace are meaningless
MAX_CANCELLATION = 1e8


@attr.s(auto_attribs=True, frozen=True, slots=True)
class GaussianTerm:
    c: float
    z: complex
    a: float

    def __attrs_post_init__(self) -> None:
        if not (self.a > 0.0 and math.isfinite(self.a)):
            raise ValidationError(f"Gaussian inverse width must be > 0, got {self.a}")
        if not math.isfinite(self.c):
            raise NumericalError(f"Gaussian coefficient is not finite: {self.c}")

    @property
    def mass(self) -> float:
        return self.c * math.pi / self.a


@attr.s(auto_attribs=True, frozen=True, slots=True)
class DeltaTerm:
    c: float
    z: complex

    def __attrs_post_init__(self) -> None:
        if not math.isfinite(self.c):
            raise NumericalError(f"delta coefficient is not finite: {self.c}")

    @property
    def mass(self) -> float:
        return self.c


@attr.s(auto_attribs=True, frozen=True, slots=True)
class PhaseSpaceMixture:
    gaussians: Tuple[GaussianTerm, ...] = attr.ib(default=(), converter=tuple)
    deltas: Tuple[DeltaTerm, ...] = attr.ib(default=(), converter=tuple)

    def __len__(self) -> int:
        return len(self.gaussians) + len(self.deltas)


@attr.s(auto_attribs=True, frozen=True, slots=True)
class GridSpec:
    """Rectangle of n_re x n_im cells; P is sampled at the cell centers."""

    re_min: float
    re_max: float
    im_min: float
    im_max: float
    n_re: int
    n_im: int

    def __attrs_post_init__(self) -> None:
        if self.n_re < 1 or self.n_im < 1:
            raise ValidationError(f"empty grid {self.n_re}x{self.n_im}")
        if not (self.re_max > self.re_min and self.im_max > self.im_min):
            raise ValidationError("grid bounds must satisfy re0 < re1 and im0 < im1")

    @property
    def re_axis(self) -> np.ndarray:
        step = (self.re_max - self.re_min) / self.n_re
        return self.re_min + (np.arange(self.n_re) + 0.5) * step

    @property
    def im_axis(self) -> np.ndarray:
        step = (self.im_max - self.im_min) / self.n_im
        return self.im_min + (np.arange(self.n_im) + 0.5) * step

    def points(self) -> np.ndarray:
        """Complex cell centers shaped (n_im, n_re)."""
        return self.re_axis[None, :] + 1j * self.im_axis[:, None]


def coherent(beta: complex) -> PhaseSpaceMixture:
    return PhaseSpaceMixture(deltas=[DeltaTerm(1.0, complex(beta))])


def displaced_thermal(alpha0: complex, nbar: float) -> PhaseSpaceMixture:
    if nbar < 0.0:
        raise ValidationError(f"mean thermal photon number must be >= 0, got {nbar}")
    if nbar == 0.0:
        return coherent(alpha0)
    term = GaussianTerm(1.0 / (math.pi * nbar), complex(alpha0), 1.0 / nbar)
    return PhaseSpaceMixture(gaussians=[term])


def thermal(nbar: float) -> PhaseSpaceMixture:
    return displaced_thermal(0j, nbar)


def from_state_spec(spec: StateSpec) -> PhaseSpaceMixture:
    if spec.kind == "vacuum":
        return coherent(0j)
    if spec.kind == "coherent":
        return coherent(spec.alpha)
    if spec.kind == "thermal":
        return thermal(spec.nbar)
    if spec.kind == "displaced_thermal":
        return displaced_thermal(spec.alpha, spec.nbar)
    raise ValidationError(
        f"a {spec.kind} state has no P function made of Gaussians and deltas"
    )


def scale_loss(P: PhaseSpaceMixture, t: float) -> PhaseSpaceMixture:
    """Attenuation P(alpha) -> P(alpha / t) / t^2."""
    if not 0.0 < t <= 1.0:
        raise ValidationError(f"transmissivity must lie in (0, 1], got {t}")
    if t == 1.0:
        return P
    return PhaseSpaceMixture(
        [GaussianTerm(g.c / t**2, t * g.z, g.a / t**2) for g in P.gaussians],
        [DeltaTerm(d.c, t * d.z) for d in P.deltas],
    )


def convolve_noise(P: PhaseSpaceMixture, mu: float) -> PhaseSpaceMixture:
    """Noise map of a parametric amplifier with gain mu = cosh(xi).

    Amplitudes are amplified by mu and the result is convolved with a thermal
    Gaussian of variance mu^2 - 1, so a variance 1/a becomes
    mu^2 / a + mu^2 - 1.
    """
    if mu < 1.0:
        raise ValidationError(f"amplifier gain mu must be >= 1, got {mu}")
    if mu == 1.0:
        _log.warning("noise map with mu = 1 is the identity (no pair generation)")
        return P

    noise = mu**2 - 1.0
    gaussians = []
    for g in P.gaussians:
        a = 1.0 / (mu**2 / g.a + noise)
        gaussians.append(GaussianTerm(g.c * a / g.a, mu * g.z, a))
    for d in P.deltas:
        gaussians.append(GaussianTerm(d.c / (math.pi * noise), mu * d.z, 1.0 / noise))
    return PhaseSpaceMixture(gaussians)


def to_normal_symbol(P: PhaseSpaceMixture) -> PhaseSpaceMixture:
    """F(alpha) = int P(beta) exp(-|alpha - beta|^2) d^2beta.

    The symbol is returned as a mixture of Gaussians, a delta term turning into
    a Gaussian of unit inverse width.
    """
    gaussians = [
        GaussianTerm(g.c * math.pi / (g.a + 1.0), g.z, g.a / (g.a + 1.0))
        for g in P.gaussians
    ]
    gaussians.extend(GaussianTerm(d.c, d.z, 1.0) for d in P.deltas)
    return PhaseSpaceMixture(gaussians)


def from_normal_symbol(F: PhaseSpaceMixture, tol: float = 1e-12) -> PhaseSpaceMixture:
    """Inverse of `to_normal_symbol`.

    Symbol terms need an inverse width a <= 1; a = 1 (within tol) gives back a
    delta term, a > 1 is not the symbol of any state with a P function.
    """
    if F.deltas:
        raise ValidationError("a normally ordered symbol cannot contain delta terms")
    gaussians: List[GaussianTerm] = []
    deltas: List[DeltaTerm] = []
    for g in F.gaussians:
        if abs(g.a - 1.0) <= tol:
            deltas.append(DeltaTerm(g.c, g.z))
        elif g.a < 1.0:
            gaussians.append(
                GaussianTerm(g.c / (math.pi * (1.0 - g.a)), g.z, g.a / (1.0 - g.a))
            )
        else:
            raise ValidationError(
                f"symbol term with inverse width {g.a} > 1 has no P function"
            )
    return PhaseSpaceMixture(gaussians, deltas)


def click_factor(x: float, N: int, k: int) -> float:
    """C(N, k) exp(-x (N-k)/N) (1 - exp(-x/N))^k, stable for small x."""
    return math.comb(N, k) * math.exp(-x * (N - k) / N) * (-math.expm1(-x / N)) ** k


def multiply_click_factor(
    P: PhaseSpaceMixture, eta_eff: float, N: int, k: int
) -> PhaseSpaceMixture:
    """Multiply by the k-click factor of N diodes with efficiency eta_eff.

    The factor is expanded as
    C(N, k) sum_j C(k, j) (-1)^(k-j) exp(-eta_eff (1 - j/N) |alpha|^2),
    each Gaussian term giving k + 1 Gaussian terms. Delta terms are scaled by
    the factor at their center.
    """
    if eta_eff < 0.0:
        raise ValidationError(f"effective efficiency must be >= 0, got {eta_eff}")
    if not 0 <= k <= N:
        raise ValidationError(f"a detector with {N} diodes cannot register {k} clicks")
    if eta_eff == 0.0:
        return P if k == 0 else PhaseSpaceMixture()

    expansion = [
        (
            math.comb(N, k) * math.comb(k, j) * (-1) ** (k - j),
            eta_eff * (N - j) / N,
        )
        for j in range(k + 1)
    ]
    gaussians = []
    for g in P.gaussians:
        for weight, lam in expansion:
            a = g.a + lam
            shrink = math.exp(-g.a * lam * abs(g.z) ** 2 / a)
            gaussians.append(GaussianTerm(weight * g.c * shrink, g.a * g.z / a, a))
    deltas = [
        DeltaTerm(d.c * click_factor(eta_eff * abs(d.z) ** 2, N, k), d.z)
        for d in P.deltas
    ]
    return PhaseSpaceMixture(gaussians, deltas)


def alternating_click_sum(N: int, k: int, term: Callable[[Any, int], Any]) -> float:
    """C(N, k) sum_j C(k, j) (-1)^(k-j) term(ctx, j).

    `term` computes its value with the functions of the mpmath context `ctx`.
    The working precision grows until RESOLVED_DIGITS digits of the sum
    survive the cancellation between its terms.
    """
    digits = RESOLVED_DIGITS + 10 + math.ceil(k * math.log10(2.0))
    while True:
        ctx = mpmath.MPContext()
        ctx.dps = digits
        signed = [
            math.comb(k, j) * (-1) ** (k - j) * term(ctx, j) for j in range(k + 1)
        ]
        total = ctx.fsum(signed)
        scale = ctx.fsum(abs(value) for value in signed)
        if abs(total) >= scale * ctx.mpf(10) ** (RESOLVED_DIGITS - digits):
            break
        if digits >= MAX_WORKING_DIGITS:
            _log.debug(
                "click sum for N=%(N)s k=%(k)s vanishes at %(digits)s digits",
                {"N": N, "k": k, "digits": digits},
            )
            total = ctx.zero
            break
        digits = min(2 * digits, MAX_WORKING_DIGITS)
    return math.comb(N, k) * float(total)


def click_probability(
    P: PhaseSpaceMixture, eta_eff: float, N: int, k: int, symbol: bool = False
) -> float:
    """Trace of `multiply_click_factor(P, eta_eff, N, k)`.

    The trace is summed over the click factor expansion at a precision high
    enough to survive its cancellations, where `integral` of the multiplied
    mixture loses every digit for large k. With `symbol`, P is a normally
    ordered symbol and the trace is that of the P function it stands for,
    a symbol term c exp(-a |alpha - z|^2) carrying the mass c / a.
    """
    if eta_eff < 0.0:
        raise ValidationError(f"effective efficiency must be >= 0, got {eta_eff}")
    if not 0 <= k <= N:
        raise ValidationError(f"a detector with {N} diodes cannot register {k} clicks")
    if symbol and P.deltas:
        raise ValidationError("a normally ordered symbol cannot contain delta terms")
    if eta_eff == 0.0:
        if k > 0:
            return 0.0
        if symbol:
            return math.fsum(g.c / g.a for g in P.gaussians)
        return integral(P)

    def term(ctx: Any, j: int) -> Any:
        lam = ctx.mpf(eta_eff) * (N - j) / N
        values = []
        for g in P.gaussians:
            a = ctx.mpf(g.a)
            width = a + lam
            z2 = ctx.mpf(g.z.real) ** 2 + ctx.mpf(g.z.imag) ** 2
            mass = g.c / width if symbol else g.c * ctx.pi / width
            values.append(mass * ctx.exp(-a * lam * z2 / width))
        return ctx.fsum(values)

    regular = alternating_click_sum(N, k, term) if P.gaussians else 0.0
    return regular + math.fsum(
        d.c * click_factor(eta_eff * abs(d.z) ** 2, N, k) for d in P.deltas
    )


def integral(P: PhaseSpaceMixture) -> float:
    """int P d^2alpha, the trace of the represented operator."""
    return math.fsum(term.mass for term in (*P.gaussians, *P.deltas))


def _absolute_mass(P: PhaseSpaceMixture) -> float:
    return math.fsum(abs(term.mass) for term in (*P.gaussians, *P.deltas))


def cancellation(P: PhaseSpaceMixture, total: float) -> float:
    """Absolute mass of P over its trace `total`.

    Values and moments of P / total lose this factor of relative accuracy;
    a zero or negative trace gives infinity.
    """
    if total <= 0.0:
        return math.inf
    return _absolute_mass(P) / total


def moment(P: PhaseSpaceMixture, p: int, q: int) -> complex:
    """<a^dag^p a^q> = int P conj(alpha)^p alpha^q d^2alpha, p + q <= 6."""
    if p < 0 or q < 0:
        raise ValidationError(f"moment orders must be >= 0, got ({p}, {q})")
    if p + q > MAX_MOMENT_ORDER:
        raise NumericalError(
            f"closed-form moments are limited to order {MAX_MOMENT_ORDER}"
        )
    terms: List[complex] = []
    for g in P.gaussians:
        s = 1.0 / g.a
        zc = g.z.conjugate()
        terms.append(
            g.mass
            * sum(
                math.comb(p, i)
                * math.comb(q, i)
                * math.factorial(i)
                * s**i
                * zc ** (p - i)
                * g.z ** (q - i)
                for i in range(min(p, q) + 1)
            )
        )
    terms.extend(d.c * d.z.conjugate() ** p * d.z**q for d in P.deltas)
    return complex(
        math.fsum(term.real for term in terms), math.fsum(term.imag for term in terms)
    )


def evaluate(P: PhaseSpaceMixture, points: np.ndarray) -> np.ndarray:
    """Regular part of P at the given complex points; delta terms are left out."""
    alpha = np.asarray(points, dtype=complex)
    values = np.zeros(alpha.shape)
    for g in P.gaussians:
        values += g.c * np.exp(-g.a * np.abs(alpha - g.z) ** 2)
    return values


def evaluate_grid(
    P: PhaseSpaceMixture, grid: GridSpec, workers: int = 1
) -> np.ndarray:
    """P at the cell centers, shaped (n_im, n_re).

    Rows are spread over `workers` threads; every cell is summed in term
    order, so the result does not depend on the worker count.
    """
    points = grid.points()
    if workers <= 1:
        return evaluate(P, points)
    with ThreadPoolExecutor(max_workers=workers) as executor:
        rows = list(executor.map(lambda row: evaluate(P, row), points))
    return np.vstack(rows)


def prune(
    P: PhaseSpaceMixture, rel_tol: float = PRUNE_REL_TOL
) -> Tuple[PhaseSpaceMixture, float]:
    """Drop terms whose absolute mass is below rel_tol of the total.

    Returns the pruned mixture and the absolute mass that was dropped.
    """
    threshold = rel_tol * _absolute_mass(P)
    pruned = PhaseSpaceMixture(
        [g for g in P.gaussians if abs(g.mass) > threshold],
        [d for d in P.deltas if abs(d.mass) > threshold],
    )
    dropped = _absolute_mass(P) - _absolute_mass(pruned)
    if len(pruned) < len(P):
        _log.debug(
            "pruned %(n)s of %(total)s terms carrying a mass of %(dropped)s",
            {"n": len(P) - len(pruned), "total": len(P), "dropped": dropped},
        )
    return pruned, dropped


def normalize(P: PhaseSpaceMixture, total: Optional[float] = None) -> PhaseSpaceMixture:
    """P divided by `total`, its integral unless given."""
    if total is None:
        total = integral(P)
    if total <= 0.0:
        raise NumericalError(f"cannot normalize a P function of integral {total}")
    return PhaseSpaceMixture(
        [GaussianTerm(g.c / total, g.z, g.a) for g in P.gaussians],
        [DeltaTerm(d.c / total, d.z) for d in P.deltas],
    )


def negativity(values: np.ndarray) -> float:
    """Depth of the most negative sample relative to the largest magnitude.

    Zero for a non-negative grid; any positive value certifies that the
    sampled P function is not a classical probability density.
    """
    scale = float(np.abs(values).max(initial=0.0))
    if scale == 0.0:
        return 0.0
    return max(0.0, -float(values.min())) / scale


def radial_sign_changes(
    P: PhaseSpaceMixture,
    r_max: float,
    n: int = 2001,
    angle: float = 0.0,
    rel_tol: float = 1e-12,
) -> int:
    """Number of sign changes of P along the ray r exp(i angle), 0 <= r <= r_max.

    Samples below rel_tol of the largest magnitude count as zero.
    """
    radii = np.linspace(0.0, r_max, n)
    values = evaluate(P, radii * np.exp(1j * angle))
    threshold = rel_tol * float(np.abs(values).max(initial=0.0))
    signs = np.sign(values[np.abs(values) > threshold])
    return int(np.count_nonzero(signs[1:] != signs[:-1]))
