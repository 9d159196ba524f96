import logging
import math
from fractions import Fraction
from typing import Any

import numpy as np
import pytest

from clickcraft.dsymbol import click_table, d_exact
from clickcraft.pfunc import (
    MAX_CANCELLATION,
    DeltaTerm,
    GaussianTerm,
    GridSpec,
    PhaseSpaceMixture,
    alternating_click_sum,
    cancellation,
    click_factor,
    click_probability,
    coherent,
    convolve_noise,
    displaced_thermal,
    evaluate,
    evaluate_grid,
    from_normal_symbol,
    from_state_spec,
    integral,
    moment,
    multiply_click_factor,
    negativity,
    normalize,
    prune,
    radial_sign_changes,
    scale_loss,
    thermal,
    to_normal_symbol,
)
from clickcraft.types import (
    DetectorConfig,
    NumericalError,
    StateSpec,
    ValidationError,
)

POINTS = np.array([0.0, 0.3 - 0.2j, 1.0 + 1.0j, -1.5 + 0.4j, 2.5j])


def test_terms_validate() -> None:
    with pytest.raises(ValidationError):
        GaussianTerm(1.0, 0j, 0.0)
    with pytest.raises(NumericalError):
        GaussianTerm(math.inf, 0j, 1.0)
    with pytest.raises(NumericalError):
        DeltaTerm(math.nan, 0j)


def test_constructors() -> None:
    assert integral(coherent(1.0 + 1.0j)) == 1.0
    assert integral(thermal(0.7)) == pytest.approx(1.0, rel=1e-15)
    assert displaced_thermal(0.5j, 0.0) == coherent(0.5j)
    assert len(displaced_thermal(0.5j, 0.3)) == 1
    with pytest.raises(ValidationError):
        displaced_thermal(0j, -0.1)
    assert from_state_spec(StateSpec("vacuum")) == coherent(0j)
    with pytest.raises(ValidationError):
        from_state_spec(StateSpec("fock", n=1))


def test_grid_spec() -> None:
    grid = GridSpec(-1.0, 1.0, 0.0, 1.0, 4, 2)
    np.testing.assert_allclose(grid.re_axis, [-0.75, -0.25, 0.25, 0.75])
    np.testing.assert_allclose(grid.im_axis, [0.25, 0.75])
    assert grid.points().shape == (2, 4)
    with pytest.raises(ValidationError):
        GridSpec(1.0, -1.0, 0.0, 1.0, 4, 2)
    with pytest.raises(ValidationError):
        GridSpec(-1.0, 1.0, 0.0, 1.0, 0, 2)


def test_scale_loss() -> None:
    t = 0.7
    lossy = scale_loss(thermal(0.5), t)
    assert integral(lossy) == pytest.approx(1.0, rel=1e-14)
    assert moment(lossy, 1, 1).real == pytest.approx(t**2 * 0.5, rel=1e-14)
    assert scale_loss(coherent(2.0), t) == coherent(t * 2.0)
    with pytest.raises(ValidationError):
        scale_loss(coherent(1.0), 0.0)


def test_convolve_noise() -> None:
    mu, nbar = 1.4, 0.5
    noisy = convolve_noise(thermal(nbar), mu)
    assert integral(noisy) == pytest.approx(1.0, rel=1e-14)
    expected = mu**2 * (nbar + 1) - 1
    assert moment(noisy, 1, 1).real == pytest.approx(expected, rel=1e-13)

    amplified = convolve_noise(coherent(1.0 - 1.0j), mu)
    (term,) = amplified.gaussians
    assert term.z == pytest.approx(mu * (1.0 - 1.0j))
    assert 1 / term.a == pytest.approx(mu**2 - 1)
    assert integral(amplified) == pytest.approx(1.0, rel=1e-14)


def test_convolve_noise_without_gain(caplog: pytest.LogCaptureFixture) -> None:
    P = thermal(0.2)
    with caplog.at_level(logging.WARNING, logger="clickcraft"):
        assert convolve_noise(P, 1.0) is P
    assert "identity" in caplog.text
    with pytest.raises(ValidationError):
        convolve_noise(P, 0.9)


def test_normal_symbol() -> None:
    P = PhaseSpaceMixture(
        [GaussianTerm(0.4, 0.5 + 0.2j, 1.3)], [DeltaTerm(0.3, -1.0 + 0j)]
    )
    symbol = to_normal_symbol(P)
    assert not symbol.deltas
    # the symbol of a coherent state |z> is exp(-|alpha - z|^2)
    values = evaluate(to_normal_symbol(coherent(0.3j)), POINTS)
    np.testing.assert_allclose(values, np.exp(-np.abs(POINTS - 0.3j) ** 2))

    back = from_normal_symbol(symbol)
    (g,) = back.gaussians
    (d,) = back.deltas
    assert g.c == pytest.approx(0.4, rel=1e-14)
    assert g.a == pytest.approx(1.3, rel=1e-14)
    assert d == DeltaTerm(0.3, -1.0 + 0j)


def test_from_normal_symbol_domain() -> None:
    with pytest.raises(ValidationError, match="has no P function"):
        from_normal_symbol(PhaseSpaceMixture([GaussianTerm(1.0, 0j, 1.5)]))
    with pytest.raises(ValidationError):
        from_normal_symbol(coherent(0j))


def test_click_factor_is_stable_for_weak_light() -> None:
    x = 1e-12
    assert click_factor(x, 4, 1) == pytest.approx(x * math.exp(-x * 3 / 4), rel=1e-9)
    assert click_factor(0.0, 4, 0) == 1.0
    assert click_factor(0.0, 4, 2) == 0.0


def test_multiply_click_factor_pointwise() -> None:
    P = displaced_thermal(0.4 - 0.3j, 0.8)
    eta_eff, N = 0.6, 5
    base = evaluate(P, POINTS)
    for k in range(N + 1):
        clicked = evaluate(multiply_click_factor(P, eta_eff, N, k), POINTS)
        factors = [click_factor(eta_eff * abs(z) ** 2, N, k) for z in POINTS]
        np.testing.assert_allclose(clicked, base * factors, rtol=1e-10, atol=1e-13)


@pytest.mark.parametrize("P", [thermal(0.5), coherent(1.0 + 0.5j)])
def test_click_factors_sum_to_one(P: PhaseSpaceMixture) -> None:
    N = 4
    total = math.fsum(
        integral(multiply_click_factor(P, 0.3, N, k)) for k in range(N + 1)
    )
    assert total == pytest.approx(integral(P), abs=1e-13)


def test_click_probability_is_the_trace_of_the_clicked_mixture() -> None:
    P = PhaseSpaceMixture(
        displaced_thermal(0.4 - 0.3j, 0.8).gaussians, [DeltaTerm(0.25, 0.6 + 0.1j)]
    )
    for k in range(6):
        clicked = multiply_click_factor(P, 0.6, 5, k)
        assert click_probability(P, 0.6, 5, k) == pytest.approx(
            integral(clicked), rel=1e-10
        )
    assert click_probability(P, 0.0, 5, 0) == integral(P)
    assert click_probability(P, 0.0, 5, 2) == 0.0
    with pytest.raises(ValidationError):
        click_probability(P, 0.6, 5, 6)


def test_click_probability_of_a_normal_symbol() -> None:
    symbol = to_normal_symbol(displaced_thermal(0.3j, 0.5))
    for k in range(5):
        clicked = from_normal_symbol(multiply_click_factor(symbol, 0.3, 4, k))
        assert click_probability(symbol, 0.3, 4, k, symbol=True) == pytest.approx(
            integral(clicked), rel=1e-10
        )
    with pytest.raises(ValidationError, match="delta"):
        click_probability(coherent(0.5), 0.3, 4, 1, symbol=True)


def test_click_probability_of_many_clicks() -> None:
    N, eta, nbar = 16, 0.8, 0.5
    m = np.arange(301)
    photons = (nbar / (1 + nbar)) ** m / (1 + nbar)
    table = click_table(DetectorConfig(N, eta), 300)
    probabilities = [click_probability(thermal(nbar), eta, N, k) for k in range(17)]
    for k in range(12, 17):
        expected = math.fsum(photons * table.row(k))
        assert probabilities[k] == pytest.approx(expected, rel=1e-9)
        # the terms of the clicked mixture outweigh its trace
        clicked = multiply_click_factor(thermal(nbar), eta, N, k)
        assert cancellation(clicked, expected) > MAX_CANCELLATION
    assert math.fsum(probabilities) == pytest.approx(1.0, abs=1e-14)


def test_alternating_click_sum_resolves_the_d_symbol() -> None:
    N, m = 16, 200

    def power(ctx: Any, j: int) -> Any:
        return (ctx.mpf(1) / 5 + ctx.mpf(4) / 5 * j / N) ** m

    for k in (1, 8, 16):
        exact = float(d_exact(N, Fraction(1, 5), Fraction(4, 5), k, m))
        assert alternating_click_sum(N, k, power) == pytest.approx(exact, rel=1e-14)
    assert alternating_click_sum(N, 0, power) == pytest.approx(0.2**m, rel=1e-14)


def test_alternating_click_sum_of_a_constant() -> None:
    assert alternating_click_sum(4, 0, lambda ctx, j: ctx.mpf(1)) == 1.0
    assert alternating_click_sum(4, 3, lambda ctx, j: ctx.mpf(1)) == 0.0


def test_cancellation() -> None:
    assert cancellation(thermal(0.5), 1.0) == pytest.approx(1.0)
    assert cancellation(thermal(0.5), 0.0) == math.inf
    mixed = PhaseSpaceMixture(
        [GaussianTerm(1 / math.pi, 0j, 1.0), GaussianTerm(-0.5 / math.pi, 0j, 1.0)]
    )
    assert cancellation(mixed, integral(mixed)) == pytest.approx(3.0)


def test_multiply_click_factor_without_efficiency() -> None:
    P = thermal(0.5)
    assert multiply_click_factor(P, 0.0, 4, 0) is P
    assert len(multiply_click_factor(P, 0.0, 4, 2)) == 0
    with pytest.raises(ValidationError):
        multiply_click_factor(P, 0.3, 4, 5)
    with pytest.raises(ValidationError):
        multiply_click_factor(P, -0.1, 4, 1)


def test_moments() -> None:
    nbar = 0.8
    assert moment(thermal(nbar), 1, 1) == pytest.approx(nbar)
    assert moment(thermal(nbar), 2, 2) == pytest.approx(2 * nbar**2)
    assert moment(thermal(nbar), 0, 1) == 0
    beta = 0.6 + 0.9j
    assert moment(coherent(beta), 2, 1) == pytest.approx(beta.conjugate() ** 2 * beta)
    alpha0 = 1.0 - 0.5j
    expected = abs(alpha0) ** 4 + 4 * nbar * abs(alpha0) ** 2 + 2 * nbar**2
    assert moment(displaced_thermal(alpha0, nbar), 2, 2).real == pytest.approx(
        expected
    )
    with pytest.raises(NumericalError):
        moment(thermal(nbar), 4, 3)
    with pytest.raises(ValidationError):
        moment(thermal(nbar), -1, 1)


def test_evaluate_grid_does_not_depend_on_workers() -> None:
    P = PhaseSpaceMixture(
        [GaussianTerm(0.5, 0.2j, 1.1), GaussianTerm(-0.1, 0.3, 2.0)],
        [DeltaTerm(0.2, 0.1)],
    )
    grid = GridSpec(-2.0, 2.0, -1.5, 1.5, 17, 9)
    single = evaluate_grid(P, grid, workers=1)
    threaded = evaluate_grid(P, grid, workers=4)
    assert single.shape == (9, 17)
    assert np.array_equal(single, threaded)
    # delta terms are not rasterized
    np.testing.assert_array_equal(
        single, evaluate_grid(PhaseSpaceMixture(P.gaussians), grid)
    )


def test_prune_and_normalize() -> None:
    P = PhaseSpaceMixture(
        [GaussianTerm(1.0, 0j, 1.0), GaussianTerm(1e-8, 1.0, 1.0)],
        [DeltaTerm(0.5, 0j)],
    )
    pruned, dropped = prune(P, rel_tol=1e-6)
    assert len(pruned) == 2
    assert dropped == pytest.approx(1e-8 * math.pi, rel=1e-6)
    assert prune(P)[0] == P
    normalized = normalize(pruned)
    assert integral(normalized) == pytest.approx(1.0, rel=1e-15)
    with pytest.raises(NumericalError):
        normalize(PhaseSpaceMixture())


def test_negativity_and_sign_changes() -> None:
    # positive at the origin, negative further out
    P = PhaseSpaceMixture(
        [GaussianTerm(2 / math.pi, 0j, 2.0), GaussianTerm(-1 / math.pi, 0j, 1.0)]
    )
    grid = GridSpec(-3.0, 3.0, -3.0, 3.0, 31, 31)
    assert negativity(evaluate_grid(P, grid)) > 0.0
    assert radial_sign_changes(P, 3.0) == 1
    assert negativity(evaluate_grid(thermal(0.5), grid)) == 0.0
    assert radial_sign_changes(thermal(0.5), 3.0) == 0
    assert negativity(np.zeros((2, 2))) == 0.0
