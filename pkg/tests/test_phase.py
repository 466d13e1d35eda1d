import math

import mpmath as mp
import numpy as np
import pytest

from ampcap.errors import NoSignChangeError
from ampcap.medium import MediumParams
from ampcap.phase import (
    SATURATION_MFP,
    capacity_gap,
    region_of,
    saturation_mfp,
    scan_range,
    separatrix,
    separatrix_curve,
    small_power_asymptote,
)

mp.mp.dps = 40


def mp_gap(mfp_ratio, x):
    """C_inf - C_H(0) from the closed forms in extended precision."""
    x = mp.mpf(x)
    a = mp.mpf(4) * mp.mpf(mfp_ratio) * x / 3
    e = lambda z: mp.exp(z) * mp.e1(z)  # noqa: E731
    c_inf = e(2 / x) / mp.log(2)
    c_h0 = a * (e(1 / a) + mp.euler - mp.log(a)) / mp.log(2)
    return float(c_inf - c_h0)


def test_constants():
    assert SATURATION_MFP == pytest.approx(3 / (8 * math.e), rel=1e-15)
    assert SATURATION_MFP == pytest.approx(0.1379548, abs=1e-7)
    assert small_power_asymptote(0.05) == pytest.approx(15 * math.exp(-7.5 + 0.5772156649015329), rel=1e-14)
    assert small_power_asymptote(0.05) == pytest.approx(0.0147762, rel=1e-5)


def test_regions():
    assert region_of(MediumParams.from_power_per_mode(10, 0.0, 0.05, 10.0)) == "A"
    assert region_of(MediumParams.from_power_per_mode(10, 0.0, 0.3, 10.0)) == "B"


@pytest.mark.parametrize("n", [1, 10, 100])
def test_mode_number_cancels(n):
    for m, x in ((0.05, 0.01), (0.1, 1.0), (0.3, 100.0)):
        assert capacity_gap(m, x, n) == pytest.approx(capacity_gap(m, x, 1), abs=1e-11)


@pytest.mark.parametrize("m,x", [(0.02, 1e-6), (0.05, 0.02), (0.1, 3.0), (0.3, 10.0)])
def test_gap_matches_extended_precision(m, x):
    assert capacity_gap(m, x) == pytest.approx(mp_gap(m, x), abs=1e-10)


def test_separatrix_root_and_flip():
    pt = separatrix(0.05, (0.01, 0.02))
    assert pt.solved and abs(pt.residual) <= 1e-9
    assert abs(mp_gap(0.05, pt.power_per_mode)) <= 2e-9
    # the exact root, well away from the leading-order asymptote 0.014776
    assert pt.power_per_mode == pytest.approx(0.0156730, rel=1e-5)
    below = MediumParams.from_power_per_mode(1, 0.0, 0.05, pt.power_per_mode * 0.99)
    above = MediumParams.from_power_per_mode(1, 0.0, 0.05, pt.power_per_mode * 1.01)
    assert {region_of(below), region_of(above)} == {"A", "B"}
    at = MediumParams.from_power_per_mode(1, 0.0, 0.05, pt.power_per_mode)
    assert region_of(at, tol=1e-9) == "boundary"


def test_separatrix_no_sign_change():
    with pytest.raises(NoSignChangeError) as info:
        separatrix(0.2, (1.0, 1e6))
    assert info.value.low is not None and info.value.high is not None


def test_scan_range_reaches_below_asymptote():
    lo, hi = scan_range(0.02)
    assert lo <= small_power_asymptote(0.02) * 1e-3
    assert hi == 1e6
    assert scan_range(0.1) == (1e-6, 1e6)


@pytest.mark.slow
def test_curve_examples():
    pts = separatrix_curve([0.02, 0.05, 0.1, 0.2])
    solved = [p for p in pts if p.solved]
    assert [p.mfp_ratio for p in solved] == [0.02, 0.05, 0.1]
    assert all(abs(p.residual) <= 1e-9 for p in solved)
    assert all(p.branch_info == "root 1/1" for p in solved)
    assert solved[0].power_per_mode == pytest.approx(small_power_asymptote(0.02), rel=0.05)
    # single-valued and increasing towards saturation
    assert solved[0].power_per_mode < solved[1].power_per_mode < solved[2].power_per_mode
    last = pts[-1]
    assert not last.solved and last.branch_info.startswith("no-root: region B")


@pytest.mark.slow
def test_asymptote_accuracy_where_it_applies():
    # relative error of the small-power formula stays under 5% wherever it predicts P/NP0 < 1e-2
    grid = [m for m in np.linspace(0.02, 0.05, 7) if small_power_asymptote(m) < 1e-2]
    assert len(grid) >= 5
    for pt in separatrix_curve(grid):
        assert pt.solved
        rel = abs(pt.power_per_mode / small_power_asymptote(pt.mfp_ratio) - 1)
        assert rel <= 0.05


@pytest.mark.slow
def test_saturation():
    sat = saturation_mfp(1e6)
    assert 0.137 < sat < SATURATION_MFP
    assert sat == pytest.approx(SATURATION_MFP, abs=1e-5)
    assert saturation_mfp(1e3) < sat
    (high,) = separatrix_curve([0.137])
    assert high.solved and high.power_per_mode > 100
