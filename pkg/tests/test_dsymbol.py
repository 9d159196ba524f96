import math
from fractions import Fraction

import pytest

from clickcraft.dsymbol import (
    DSymbolParams,
    click_table,
    d_direct,
    d_direct_with_error,
    d_exact,
    d_recursive,
)
from clickcraft.types import DetectorConfig, ValidationError

MS = list(range(21)) + [32, 64, 96, 128]


def test_d_direct_initial_values() -> None:
    params = DSymbolParams(4, 0.5, 0.5)
    assert d_direct(params, 0, 0) == 1.0
    assert d_direct(params, 2, 1) == 0.0
    assert d_direct(params, 2, 2) == pytest.approx(0.1875, rel=1e-15)


def test_d_direct_domain() -> None:
    params = DSymbolParams(4, 0.5, 0.5)
    with pytest.raises(ValidationError):
        d_direct(params, 5, 3)
    with pytest.raises(ValidationError):
        d_direct(params, 1, -1)
    with pytest.raises(ValidationError):
        DSymbolParams(0, 0.5, 0.5)
    with pytest.raises(ValidationError):
        DSymbolParams(4, math.inf, 0.5)


def test_d_recursive_first_row() -> None:
    table = d_recursive(DSymbolParams(4, 1 - 0.95, 0.95), 4, 3)
    for m in (1, 2, 3):
        assert table.value(0, m) == pytest.approx(0.05**m, rel=1e-14)
    assert table.value(0, 0) == 1.0
    assert list(table.column(0)) == [1.0, 0.0, 0.0, 0.0, 0.0]


def test_d_recursive_matches_direct() -> None:
    params = DSymbolParams(64, 0.05, 0.95)
    table = d_recursive(params, 3, 7)
    assert table.value(3, 7) == pytest.approx(d_direct(params, 3, 7), rel=1e-10)


def test_d_recursive_vanishes_below_diagonal_for_negative_tau() -> None:
    eta = 0.3
    table = d_recursive(DSymbolParams(4, -eta, eta), 4, 6)
    for k in range(5):
        for m in range(k):
            assert table.value(k, m) == 0.0
    for k in range(5):
        for m in range(k):
            assert d_exact(4, Fraction(-3, 10), Fraction(3, 10), k, m) == 0


def test_d_recursive_domain() -> None:
    with pytest.raises(ValidationError):
        d_recursive(DSymbolParams(4, 0.5, 0.5), 5, 3)
    with pytest.raises(ValidationError):
        d_recursive(DSymbolParams(4, 0.5, 0.5), 2, -1)


def test_d_exact() -> None:
    assert d_exact(4, Fraction(1, 2), Fraction(1, 2), 0, 0) == 1
    assert d_exact(4, Fraction(1, 20), Fraction(19, 20), 1, 1) == Fraction(19, 20)
    exact = d_exact(16, Fraction(1, 5), Fraction(4, 5), 5, 12)
    direct = d_direct(DSymbolParams(16, 0.2, 0.8), 5, 12)
    assert direct == pytest.approx(float(exact), rel=1e-12)


def test_table_values_are_read_only() -> None:
    table = d_recursive(DSymbolParams(4, 0.5, 0.5), 4, 4)
    with pytest.raises(ValueError):
        table.values[0, 0] = 2.0


@pytest.mark.parametrize("N", [1, 3, 4, 16, 64])
@pytest.mark.parametrize("eta", [0.0, 0.25, 0.3, 0.5, 0.8, 0.95, 1.0])
def test_click_table_columns_sum_to_one(N: int, eta: float) -> None:
    table = click_table(DetectorConfig(N, eta), 256)
    for m in range(257):
        assert math.fsum(table.column(m)) == pytest.approx(1.0, abs=1e-10)
    assert table.values.min() >= 0.0
    assert table.values.max() <= 1.0 + 1e-12


def test_click_table_diagonal() -> None:
    N, sigma = 16, 0.7
    table = click_table(DetectorConfig(N, sigma), 16)
    for k in range(N + 1):
        expected = (sigma / N) ** k * math.perm(N, k)
        assert table.value(k, k) == pytest.approx(expected, rel=1e-12)


def test_click_table_is_cached() -> None:
    det = DetectorConfig(8, 0.5)
    assert click_table(det, 10) is click_table(DetectorConfig(8, 0.5), 10)


@pytest.mark.parametrize("N", [1, 4, 16, 64])
def test_recursion_direct_and_exact_agree(N: int) -> None:
    params = DSymbolParams(N, 1 - 0.95, 0.95)
    tau, sigma = Fraction(params.tau), Fraction(params.sigma)
    kmax = min(N, 16)
    table = d_recursive(params, kmax, 128)
    for k in range(kmax + 1):
        for m in MS:
            exact = d_exact(N, tau, sigma, k, m)
            if k > m:
                assert exact == 0
                assert table.value(k, m) == 0.0
                continue
            if abs(exact) > 1e-300:
                assert table.value(k, m) == pytest.approx(float(exact), rel=1e-9)
            else:
                assert table.value(k, m) == pytest.approx(float(exact), abs=1e-12)

            direct, bound = d_direct_with_error(params, k, m)
            assert abs(direct - float(exact)) <= bound + 1e-300
            if bound < 1e-10 * abs(float(exact)):
                assert direct == pytest.approx(float(exact), rel=1e-9)
