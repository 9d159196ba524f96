"""Truncated Fock-space oracle.

Every mode lives on the levels |0>..|d-1>. Two-mode states are kept as
ensembles rho = sum_i w_i |psi_i><psi_i| with amplitude arrays psi_i[p, r]
(p for mode A, r for mode B), so that unitaries act on the amplitudes only.
The tensor view follows rho[p, q, r, s] = <p, r| rho |q, s>.
"""

import math
from typing import Any, Optional, Tuple, Union

import attr
import numpy as np
from scipy import linalg, sparse
from scipy.sparse.linalg import expm_multiply
from scipy.special import gammaln

from . import _log
from .povm import click_povm_element
from .types import (
    BeamSplitterConfig,
    CutoffError,
    DetectorConfig,
    NumericalError,
    ProcessOutcome,
    SqueezerConfig,
    StateSpec,
    ValidationError,
)

DEFAULT_TAIL_TOL = 1e-10
DEFAULT_EDGE_TOL = 1e-10
SQUEEZER_HEADROOM = 1.5


def _readonly(value: Any, dtype: Any = complex) -> np.ndarray:
    array = np.array(value, dtype=dtype)
    array.setflags(write=False)
    return array


def _readonly_real(value: Any) -> np.ndarray:
    return _readonly(value, float)


@attr.s(auto_attribs=True, frozen=True, slots=True, eq=False)
class DensityMatrix:
    """Single-mode operator in the Fock basis, possibly unnormalized."""

    entries: np.ndarray = attr.ib(converter=_readonly)

    def __attrs_post_init__(self) -> None:
        shape = self.entries.shape
        if len(shape) != 2 or shape[0] != shape[1] or shape[0] == 0:
            raise ValidationError(f"a density matrix must be square, got {shape}")
        scale = max(1.0, float(np.abs(self.entries).max()))
        if not np.allclose(
            self.entries, self.entries.conj().T, rtol=0.0, atol=1e-12 * scale
        ):
            raise NumericalError("density matrix is not Hermitian")
        if not -1e-12 <= self.trace <= 1.0 + 1e-12:
            raise NumericalError(f"density matrix trace {self.trace} outside [0, 1]")
        smallest = float(linalg.eigvalsh(self.entries).min())
        if smallest < -1e-10:
            raise NumericalError(
                f"density matrix is not positive semidefinite (eigenvalue {smallest})"
            )

    @property
    def cutoff(self) -> int:
        return self.entries.shape[0]

    @property
    def trace(self) -> float:
        return math.fsum(np.diag(self.entries).real)

    def padded(self, cutoff: int) -> "DensityMatrix":
        """The same operator embedded into a larger truncation."""
        if cutoff < self.cutoff:
            raise ValidationError(
                f"cannot pad a cutoff {self.cutoff} matrix down to {cutoff}"
            )
        entries = np.zeros((cutoff, cutoff), dtype=complex)
        entries[: self.cutoff, : self.cutoff] = self.entries
        return DensityMatrix(entries)


@attr.s(auto_attribs=True, frozen=True, slots=True, eq=False)
class TwoModeDensityMatrix:
    weights: np.ndarray = attr.ib(converter=_readonly_real)
    amplitudes: np.ndarray = attr.ib(converter=_readonly)

    def __attrs_post_init__(self) -> None:
        if self.amplitudes.ndim != 3 or len(self.weights) != len(self.amplitudes):
            raise ValidationError(
                "a two-mode ensemble needs one (d_A, d_B) amplitude array per weight"
            )
        if np.any(self.weights < 0.0):
            raise NumericalError("ensemble weights must be non-negative")
        if self.trace > 1.0 + 1e-12:
            raise NumericalError(f"two-mode state trace {self.trace} exceeds 1")

    @property
    def cutoffs(self) -> Tuple[int, int]:
        return self.amplitudes.shape[1], self.amplitudes.shape[2]

    @property
    def trace(self) -> float:
        norms = np.sum(np.abs(self.amplitudes) ** 2, axis=(1, 2))
        return math.fsum(self.weights * norms)

    @property
    def tensor(self) -> np.ndarray:
        return np.einsum(
            "i,ipr,iqs->pqrs", self.weights, self.amplitudes, self.amplitudes.conj()
        )

    @property
    def matrix(self) -> np.ndarray:
        """rho as a (d_A d_B) x (d_A d_B) matrix, mode A index varying slowest."""
        da, db = self.cutoffs
        vectors = self.amplitudes.reshape(-1, da * db) * np.sqrt(self.weights)[:, None]
        return vectors.T @ vectors.conj()

    def level_populations(self) -> Tuple[np.ndarray, np.ndarray]:
        populations = self.weights[:, None, None] * np.abs(self.amplitudes) ** 2
        return populations.sum(axis=(0, 2)), populations.sum(axis=(0, 1))

    def reduced_a(self) -> DensityMatrix:
        return _contract_b(self, np.ones(self.cutoffs[1]))

    def reduced_b(self) -> DensityMatrix:
        swapped = TwoModeDensityMatrix(
            self.weights, self.amplitudes.transpose(0, 2, 1)
        )
        return swapped.reduced_a()


State = Union[DensityMatrix, TwoModeDensityMatrix]


def _contract_b(state: TwoModeDensityMatrix, diagonal: np.ndarray) -> DensityMatrix:
    """sum_i w_i psi_i diag(diagonal) psi_i^dag, for a non-negative diagonal."""
    scaled = (
        state.amplitudes
        * np.sqrt(state.weights)[:, None, None]
        * np.sqrt(diagonal)[None, None, :]
    )
    stacked = scaled.transpose(1, 0, 2).reshape(state.cutoffs[0], -1)
    return DensityMatrix(stacked @ stacked.conj().T)


def _ensemble(entries: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a PSD matrix without its negligible weights."""
    eigenvalues, eigenvectors = linalg.eigh((entries + entries.conj().T) / 2)
    if eigenvalues.min() < -1e-10:
        raise NumericalError(
            f"matrix is not positive semidefinite (eigenvalue {eigenvalues.min()})"
        )
    keep = eigenvalues > 1e-16 * max(float(eigenvalues.max()), 1e-300)
    return eigenvalues[keep], eigenvectors[:, keep]


def product_state(rho_a: DensityMatrix, rho_b: DensityMatrix) -> TwoModeDensityMatrix:
    wa, ua = _ensemble(rho_a.entries)
    wb, ub = _ensemble(rho_b.entries)
    amplitudes = np.einsum("pi,rj->ijpr", ua, ub)
    return TwoModeDensityMatrix(
        np.outer(wa, wb).ravel(),
        amplitudes.reshape(-1, rho_a.cutoff, rho_b.cutoff),
    )


def from_tensor(tensor: np.ndarray) -> TwoModeDensityMatrix:
    """Ensemble form of a state given as rho[p, q, r, s]."""
    da, _, db, _ = tensor.shape
    weights, vectors = _ensemble(tensor.transpose(0, 2, 1, 3).reshape(da * db, -1))
    return TwoModeDensityMatrix(weights, vectors.T.reshape(-1, da, db))


def vacuum(cutoff: int) -> DensityMatrix:
    entries = np.zeros((cutoff, cutoff))
    entries[0, 0] = 1.0
    return DensityMatrix(entries)


def _annihilation(cutoff: int) -> sparse.csr_matrix:
    return sparse.diags(np.sqrt(np.arange(1, cutoff, dtype=float)), 1, format="csr")


def _coherent_amplitudes(alpha: complex, cutoff: int) -> np.ndarray:
    amplitudes = np.zeros(cutoff, dtype=complex)
    amplitudes[0] = math.exp(-abs(alpha) ** 2 / 2)
    for n in range(1, cutoff):
        amplitudes[n] = amplitudes[n - 1] * alpha / math.sqrt(n)
    return amplitudes


def _thermal_populations(nbar: float, cutoff: int) -> np.ndarray:
    ratio = nbar / (nbar + 1.0)
    return ratio ** np.arange(cutoff) / (nbar + 1.0)


def _displaced_thermal(alpha: complex, nbar: float, cutoff: int) -> np.ndarray:
    """D(alpha) rho_th D(alpha)^dag built in a padded space, then truncated.

    The padding keeps the displaced support of every thermal level with a
    weight above 1e-18 away from the edge of the padded space.
    """
    ratio = nbar / (nbar + 1.0)
    levels = math.ceil(math.log(1e-18) / math.log(ratio)) if ratio > 0.0 else 1
    size = (
        max(cutoff, levels) + 32 + math.ceil(8 * abs(alpha) + 2 * abs(alpha) ** 2)
    )
    a = _annihilation(size).toarray()
    unitary = linalg.expm(alpha * a.T - np.conj(alpha) * a)
    populations = _thermal_populations(nbar, size)
    entries = (unitary * populations) @ unitary.conj().T
    return entries[:cutoff, :cutoff]


def _single_mode_entries(spec: StateSpec, cutoff: int) -> np.ndarray:
    if spec.kind == "vacuum":
        return vacuum(cutoff).entries
    if spec.kind == "fock":
        if spec.n >= cutoff:
            raise CutoffError(f"cutoff {cutoff} cannot hold the Fock state |{spec.n}>")
        entries = np.zeros((cutoff, cutoff))
        entries[spec.n, spec.n] = 1.0
        return entries
    if spec.kind == "coherent" or (
        spec.kind == "displaced_thermal" and spec.nbar == 0.0
    ):
        amplitudes = _coherent_amplitudes(spec.alpha, cutoff)
        return np.outer(amplitudes, amplitudes.conj())
    if spec.kind == "thermal" or spec.alpha == 0:
        return np.diag(_thermal_populations(spec.nbar, cutoff))
    return _displaced_thermal(spec.alpha, spec.nbar, cutoff)


def _tmsv(omega: float, cutoff: int) -> TwoModeDensityMatrix:
    """(1 - omega) sum_n omega^n |n, n><n, n|"""
    levels = np.arange(cutoff)
    amplitudes = np.zeros((cutoff, cutoff, cutoff))
    amplitudes[levels, levels, levels] = 1.0
    return TwoModeDensityMatrix((1.0 - omega) * omega**levels, amplitudes)


def make_state(
    spec: StateSpec, cutoff: int, tail_tol: float = DEFAULT_TAIL_TOL
) -> State:
    """Truncated state; the truncation is not renormalized away.

    Raises CutoffError when the kept trace falls below 1 - tail_tol.
    """
    if cutoff < 1:
        raise ValidationError(f"cutoff must be a positive integer, got {cutoff}")
    state: State
    if spec.kind == "phase_diffused_tmsv":
        state = _tmsv(spec.omega, cutoff)
    else:
        state = DensityMatrix(_single_mode_entries(spec, cutoff))
    if state.trace < 1.0 - tail_tol:
        raise CutoffError(
            f"cutoff {cutoff} keeps a trace of {state.trace!r} of the {spec.kind} "
            f"state, use at least {suggest_cutoff(spec, tail_tol)}"
        )
    return state


def _tail_cutoff(populations: np.ndarray, tail_tol: float) -> Optional[int]:
    cumulative = np.cumsum(populations)
    if cumulative[-1] < 1.0 - tail_tol:
        return None
    return int(np.searchsorted(cumulative, 1.0 - tail_tol)) + 1


def suggest_cutoff(
    spec: StateSpec,
    tail_tol: float = DEFAULT_TAIL_TOL,
    squeezer: Optional[SqueezerConfig] = None,
) -> int:
    """Smallest cutoff keeping a trace of 1 - tail_tol.

    With a squeezer the output mean photon number mu^2 (<n> + 1) - 1 is
    bounded by a thermal tail and a headroom factor is applied.
    """
    if spec.kind == "phase_diffused_tmsv":
        cutoff = math.ceil(math.log(tail_tol) / math.log(spec.omega))
        mean = spec.omega / (1.0 - spec.omega)
    else:
        size = 16
        while True:
            populations = np.diag(_single_mode_entries(spec, size)).real
            found = _tail_cutoff(populations, tail_tol)
            if found is not None:
                break
            size *= 2
        cutoff = found
        mean = math.fsum(np.arange(size) * populations)

    if squeezer is not None and squeezer.xi > 0.0:
        nbar = squeezer.mu**2 * (mean + 1.0) - 1.0
        ratio = nbar / (nbar + 1.0)
        thermal = math.ceil(math.log(tail_tol) / math.log(ratio))
        cutoff = math.ceil(SQUEEZER_HEADROOM * max(cutoff, thermal))
    return max(cutoff, 1)


def photon_distribution(state: DensityMatrix) -> np.ndarray:
    populations = np.diag(state.entries).real
    if populations.min() < -1e-12:
        raise NumericalError(f"negative photon number population {populations.min()}")
    return np.clip(populations, 0.0, None)


def _equal_cutoff(state: TwoModeDensityMatrix) -> int:
    da, db = state.cutoffs
    if da != db:
        raise ValidationError(f"both modes need the same cutoff, got {da} and {db}")
    return da


def _evolve(
    state: TwoModeDensityMatrix,
    generator: sparse.spmatrix,
    edge_tol: float,
    name: str,
) -> TwoModeDensityMatrix:
    da, db = state.cutoffs
    vectors = np.ascontiguousarray(state.amplitudes.reshape(-1, da * db).T)
    evolved = expm_multiply(generator.astype(complex).tocsr(), vectors)
    result = TwoModeDensityMatrix(
        state.weights, np.asarray(evolved).T.reshape(-1, da, db)
    )

    pop_a, pop_b = result.level_populations()
    edge = max(pop_a[-1], pop_b[-1])
    _log.debug(
        "%(name)s on %(rank)s ensemble members, edge population %(edge)s",
        {"name": name, "rank": len(state.weights), "edge": edge},
    )
    if edge > edge_tol:
        raise CutoffError(
            f"{name} output populates the last Fock level with {edge!r} "
            f"(tolerance {edge_tol}), raise the cutoff above {da}"
        )
    return result


def _mode_operators(cutoff: int) -> Tuple[sparse.spmatrix, sparse.spmatrix]:
    a = _annihilation(cutoff)
    eye = sparse.identity(cutoff, format="csr")
    return sparse.kron(a, eye, format="csr"), sparse.kron(eye, a, format="csr")


def apply_beam_splitter(
    state: TwoModeDensityMatrix,
    bs: BeamSplitterConfig,
    edge_tol: float = DEFAULT_EDGE_TOL,
) -> TwoModeDensityMatrix:
    """exp(theta (a b^dag - a^dag b)) with t = cos(theta).

    Maps |alpha, 0> to |t alpha, r alpha>.
    """
    a, b = _mode_operators(_equal_cutoff(state))
    generator = bs.theta * (a @ b.T - a.T @ b)
    return _evolve(state, generator, edge_tol, "beam splitter")


def apply_two_mode_squeezer(
    state: TwoModeDensityMatrix,
    sq: SqueezerConfig,
    edge_tol: float = DEFAULT_EDGE_TOL,
) -> TwoModeDensityMatrix:
    """exp(xi (a^dag b^dag - a b)), mapping |0, 0> to sum_m (nu/mu)^m / mu |m, m>."""
    cutoff = _equal_cutoff(state)
    if sq.xi == 0.0:
        return state
    a, b = _mode_operators(cutoff)
    generator = sq.xi * (a.T @ b.T - a @ b)
    return _evolve(state, generator, edge_tol, "two-mode squeezer")


def condition_on_clicks(
    state: TwoModeDensityMatrix, det: DetectorConfig, k: int
) -> ProcessOutcome:
    """Mode A conditioned on k clicks in mode B, unnormalized.

    The trace of the result is the probability of the click event.
    """
    det.check_clicks(k)
    weights = click_povm_element(det, k, state.cutoffs[1]).weights
    conditioned = _contract_b(state, weights)
    return ProcessOutcome(conditioned, conditioned.trace)


def normally_ordered_moment(state: DensityMatrix, p: int, q: int) -> complex:
    """tr(rho a^dag^p a^q) on the truncated space."""
    if p < 0 or q < 0:
        raise ValidationError(f"moment orders must be >= 0, got ({p}, {q})")
    d = state.cutoff
    if p + q >= d:
        raise NumericalError(f"moment of order {p + q} needs a cutoff above {d}")

    n = np.arange(q, d - max(p - q, 0))
    m = n - q + p
    coefficients = np.exp(
        (gammaln(n + 1) + gammaln(m + 1)) / 2 - gammaln(n - q + 1)
    )
    terms = state.entries[n, m] * coefficients
    value = complex(math.fsum(terms.real), math.fsum(terms.imag))

    tail = float(np.abs(terms[-2:]).sum())
    if tail > 1e-8 * max(abs(value), 1e-15):
        _log.warning(
            "moment (%(p)s, %(q)s) may be truncated: the last levels contribute "
            "%(tail)s of %(value)s, raise the cutoff above %(d)s",
            {"p": p, "q": q, "tail": tail, "value": abs(value), "d": d},
        )
    return value


def normalize(state: DensityMatrix) -> DensityMatrix:
    trace = state.trace
    if trace <= 0.0:
        raise NumericalError("cannot normalize a state of zero trace")
    return DensityMatrix(state.entries / trace)


def fidelity_with_fock(state: DensityMatrix, n: int) -> float:
    """<n| rho |n> of the normalized state."""
    if not 0 <= n < state.cutoff:
        raise ValidationError(f"|{n}> lies outside the cutoff {state.cutoff}")
    return float(state.entries[n, n].real) / state.trace


def mean_photon_number(state: DensityMatrix) -> float:
    populations = photon_distribution(state)
    return math.fsum(np.arange(state.cutoff) * populations) / state.trace
