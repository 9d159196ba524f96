import math
from pathlib import Path
from typing import TYPE_CHECKING, Any, Dict, Literal, Union

import attr

if TYPE_CHECKING:
    from .fock import DensityMatrix
    from .pfunc import PhaseSpaceMixture

StateKind = Literal[
    "vacuum",
    "coherent",
    "thermal",
    "displaced_thermal",
    "phase_diffused_tmsv",
    "fock",
]
STATE_KINDS = (
    "vacuum",
    "coherent",
    "thermal",
    "displaced_thermal",
    "phase_diffused_tmsv",
    "fock",
)


class ClickcraftError(Exception):
    """Base class of the errors reported by clickcraft."""

    exit_code = 3


class ConfigError(ClickcraftError):
    """The run configuration could not be read or has an unknown layout."""

    exit_code = 1


class ValidationError(ClickcraftError, ValueError):
    """A parameter lies outside the domain of the requested operation."""

    exit_code = 2


class NumericalError(ClickcraftError, ArithmeticError):
    """A result cannot be computed to the requested accuracy."""

    exit_code = 3


class CutoffError(NumericalError):
    """The Fock-space truncation is too small for the state at hand.

    Raised instead of silently dropping the tail of a distribution.
    """


@attr.s(auto_attribs=True, frozen=True, slots=True)
class DetectorConfig:
    """A click counting detector: N on-off diodes sharing the light equally,
    each with quantum efficiency eta."""

    N: int
    eta: float

    def __attrs_post_init__(self) -> None:
        if self.N < 1:
            raise ValidationError(
                f"a detector needs at least one diode, got N={self.N}"
            )
        if not 0.0 <= self.eta <= 1.0:
            raise ValidationError(
                f"quantum efficiency must lie in [0, 1], got {self.eta}"
            )

    def check_clicks(self, k: int) -> None:
        if not 0 <= k <= self.N:
            raise ValidationError(
                f"a detector with {self.N} diodes cannot register {k} clicks"
            )


@attr.s(auto_attribs=True, frozen=True, slots=True)
class BeamSplitterConfig:
    t: float

    def __attrs_post_init__(self) -> None:
        if not 0.0 < self.t < 1.0:
            raise ValidationError(
                f"beam splitter transmissivity must lie in (0, 1), got {self.t}"
            )

    @property
    def r(self) -> float:
        return math.sqrt((1.0 - self.t) * (1.0 + self.t))

    @property
    def theta(self) -> float:
        return math.acos(self.t)


@attr.s(auto_attribs=True, frozen=True, slots=True)
class SqueezerConfig:
    """Two-mode squeezer exp(xi a^dag b^dag - xi a b), mu = cosh xi, nu = sinh xi."""

    xi: float

    def __attrs_post_init__(self) -> None:
        if not (math.isfinite(self.xi) and self.xi >= 0.0):
            raise ValidationError(f"squeezing parameter must be >= 0, got {self.xi}")

    @classmethod
    def from_mu(cls, mu: float) -> "SqueezerConfig":
        if mu < 1.0:
            raise ValidationError(f"mu = cosh(xi) must be >= 1, got {mu}")
        return cls(math.acosh(mu))

    @property
    def mu(self) -> float:
        return math.cosh(self.xi)

    @property
    def nu(self) -> float:
        return math.sinh(self.xi)


@attr.s(auto_attribs=True, frozen=True, slots=True)
class StateSpec:
    """Description of an input state, independent of its representation."""

    kind: StateKind
    alpha: complex = 0j
    nbar: float = 0.0
    omega: float = 0.0
    n: int = 0

    def __attrs_post_init__(self) -> None:
        if self.kind not in STATE_KINDS:
            raise ValidationError(f"unknown state kind {self.kind!r}")
        if self.nbar < 0.0:
            raise ValidationError(
                f"mean thermal photon number must be >= 0, got {self.nbar}"
            )
        if self.kind == "phase_diffused_tmsv" and not 0.0 < self.omega < 1.0:
            raise ValidationError(f"omega must lie in (0, 1), got {self.omega}")
        if self.n < 0:
            raise ValidationError(f"photon number must be >= 0, got {self.n}")


@attr.s(auto_attribs=True, frozen=True, slots=True, eq=False)
class ProcessOutcome:
    """Unnormalized conditional state together with its trace, the
    probability of the click event that produced it."""

    state: Union["PhaseSpaceMixture", "DensityMatrix"]
    probability: float

    def __attrs_post_init__(self) -> None:
        if not -1e-9 <= self.probability <= 1.0 + 1e-9:
            raise NumericalError(
                f"conditional probability {self.probability} lies outside [0, 1]"
            )


@attr.s(auto_attribs=True, frozen=True, slots=True)
class Parameters:
    threads: int
    verbose: int


@attr.s(auto_attribs=True, frozen=True, slots=True, eq=False)
class RunConfig:
    """Fully resolved parameters of one command line run."""

    protocol: str
    out: Path
    fmt: str
    threads: int
    parameters: Dict[str, Any]
