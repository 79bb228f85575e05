import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from cavity_filter.analysis import (
    NoSolutionError,
    SweepTable,
    adiabatic_amplitude,
    dk_first_maximum,
    dk_maxima,
    dk_zeros,
    lowpass_residual,
    lowpass_sweep,
    lowpass_width_approx,
    lowpass_width_exact,
    nearest_maximum,
    q_sweep,
    sharpening_sweep,
    sharpening_width,
    x_m,
)
from cavity_filter.pulses import DKParams, dk_lower_filter

FIG2 = DKParams(g0=4.0, A0=0.1, T=0.1)
FIG5 = DKParams(g0=0.2, A0=0.6, T=0.9)
FIG6 = DKParams(g0=4.5, A0=0.1, T=0.1)
FIG7 = DKParams(g0=1.0, A0=2.0, T=1.0)


def test_first_maximum():
    assert dk_first_maximum(FIG2) == pytest.approx(1.0001 / 0.16, rel=1e-15)
    assert dk_first_maximum(FIG2) == pytest.approx(6.2506, abs=1e-4)
    assert dk_first_maximum(DKParams(g0=4.0, A0=0.0, T=0.1)) == pytest.approx(1 / 0.16, rel=1e-15)
    small = DKParams(g0=2.0, A0=1e-3, T=0.05)
    assert dk_first_maximum(small) == pytest.approx(1 / (0.05 * 2.0) ** 2, rel=1e-5)


def test_filter_peaks_at_first_maximum():
    assert dk_lower_filter(dk_first_maximum(FIG2), FIG2) == pytest.approx(
        1 / math.cosh(math.pi * 0.01) ** 2, rel=1e-13)


def test_maxima_and_zeros():
    assert dk_maxima(0, FIG2) == 0
    assert dk_maxima(2, FIG2) == pytest.approx(25.0, rel=1e-14)
    assert dk_zeros(0, FIG2) == pytest.approx(1.5625, rel=1e-14)
    assert nearest_maximum(19.8, FIG6) == pytest.approx(4 / 0.2025, rel=1e-14)
    with pytest.raises(ValueError):
        dk_maxima(-1, FIG2)


@settings(max_examples=60)
@given(st.floats(0.5, 8.0), st.floats(0.0, 1.0), st.floats(0.02, 0.3))
def test_integer_argmax_near_first_maximum(g0, A0, T):
    assume(g0 > A0 and A0 * T < 0.1)
    p = DKParams(g0=g0, A0=A0, T=T)
    n_M = dk_first_maximum(p)
    assume(1.0 <= n_M <= 2000)
    n = np.arange(1, math.floor(3 * n_M) + 1)
    best = n[np.argmax(dk_lower_filter(n, p))]
    assert abs(best - n_M) <= 1


def test_x_m():
    assert x_m(1) == pytest.approx(math.pi / 4, rel=1e-15)
    assert x_m(25) == pytest.approx(0.166126, abs=1e-6)
    assert x_m(10**6) < 1e-3
    with pytest.raises(ValueError):
        x_m(0)
    vals = [x_m(m) for m in range(1, 50)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


@given(st.integers(1, 200), st.floats(0.3, 10.0), st.floats(0.02, 1.0), st.floats(0.1, 1e4))
def test_sharpening_identity(m, g0, T, n_M):
    w = sharpening_width(m, DKParams(g0=g0, A0=0.0, T=T), n_M)
    a2, p2 = w.delta_n_a**2, w.delta_n_p**2
    assert w.delta_n**2 == pytest.approx(a2 * p2 / (a2 + p2), rel=1e-12)
    assert w.delta_n <= min(w.delta_n_a, w.delta_n_p) * (1 + 1e-12)
    assert min(w.n_M, w.delta_n_a, w.delta_n_p, w.delta_n, w.x_m) >= 0


def test_sharpening_narrow_filter_limit():
    w = sharpening_width(5000, FIG6, 19.75)
    assert w.delta_n / w.delta_n_a == pytest.approx(1.0, abs=1e-3)


def test_sharpening_direct_substitution():
    # pi T g0 = 2: delta_n_a = 4 x sqrt(n_M) / 2
    p = DKParams(g0=2 / (math.pi * 0.5), A0=0.0, T=0.5)
    w = sharpening_width(1, p, 16.0)
    assert w.delta_n_a == pytest.approx(2 * (math.pi / 4) * 4, rel=1e-14)
    assert w.delta_n_p == pytest.approx(math.sqrt(128 * math.log(2)), rel=1e-14)


def test_lowpass_exact_fig7():
    w = lowpass_width_exact(1, FIG7)
    assert w == pytest.approx(0.611, abs=5e-4)
    assert abs(lowpass_residual(w, 1, FIG7)) < 1e-10
    assert 0 < w <= FIG7.A0**2 / FIG7.g0**2


@settings(max_examples=80)
@given(st.integers(1, 500), st.floats(0.05, 2.0), st.floats(0.5, 5.0), st.floats(0.2, 3.0))
def test_lowpass_exact_back_substitution(m, g0, A0, T):
    p = DKParams(g0=g0, A0=A0, T=T)
    try:
        w = lowpass_width_exact(m, p)
    except NoSolutionError:
        return
    assert abs(lowpass_residual(w, m, p)) < 1e-10
    assert 0 < w <= A0**2 / g0**2 * (1 + 1e-12)


def test_lowpass_exact_vanishes_for_many_atoms():
    assert lowpass_width_exact(10**7, FIG7) < 1e-6


def test_lowpass_no_solution():
    with pytest.raises(NoSolutionError):
        lowpass_width_exact(1, DKParams(g0=0.05, A0=0.1, T=0.1))


def test_lowpass_approx():
    assert lowpass_width_approx(1, FIG7) == pytest.approx(2 / math.pi, rel=1e-15)
    assert lowpass_width_approx(10, FIG7) == pytest.approx(0.2 / math.pi, rel=1e-15)
    assert lowpass_width_approx(1, FIG7) == pytest.approx(0.6366, abs=1e-4)
    assert lowpass_width_approx(7, FIG7) * 7 == pytest.approx(lowpass_width_approx(1, FIG7))


@given(st.integers(1, 100), st.floats(0.1, 3.0), st.floats(0.1, 3.0))
def test_lowpass_approx_monotone(m, g0, T):
    p = DKParams(g0=g0, A0=2.0, T=T)
    w = lowpass_width_approx(m, p)
    assert lowpass_width_approx(m + 1, p) < w
    assert lowpass_width_approx(m, DKParams(g0=g0 * 1.1, A0=2.0, T=T)) < w
    assert lowpass_width_approx(m, DKParams(g0=g0, A0=2.0, T=T * 1.1)) < w


def test_adiabatic_amplitude():
    assert adiabatic_amplitude(DKParams(g0=1.0, A0=0.0, T=1.0))[0] == 1.0
    exact, approx = adiabatic_amplitude(FIG5)
    assert exact == pytest.approx(1 / math.cosh(0.54 * math.pi) ** 2, rel=1e-14)
    assert exact == pytest.approx(0.12584, abs=1e-5)
    exact, approx = adiabatic_amplitude(DKParams(g0=1.0, A0=5.0, T=2.0))
    assert exact / approx == pytest.approx(1.0, abs=1e-12)


def test_q_sweep_without_atoms_is_poissonian():
    t = q_sweep(30.0, 0, FIG2, [0.5, 2.0, 4.0])
    assert np.allclose(t.column("Q"), 0.0, atol=1e-10)
    assert np.all(t.column("log_success_prob") == 0.0)


def test_q_sweep_columns_and_bounds():
    t = q_sweep(100.0, 25, FIG2, np.linspace(0.5, 6, 12))
    q = t.column("Q")
    assert np.all(q >= -1) and np.any(q < 0)
    assert np.all(t.column("mean") > 0)
    assert t.fixed["m"] == 25 and t.fixed["A0"] == 0.1


def test_sweep_table_csv():
    t = SweepTable("x", [1.0, 2.0], {"y": [0.1, 1 / 3]}, fixed={"a": 1})
    text = t.to_csv()
    lines = text.splitlines()
    assert lines[0].startswith("# cavity_filter ")
    assert "# a = 1" in lines
    assert lines[-3:] == ["x,y", "1,0.10000000000000001", "2,0.33333333333333331"]
    with pytest.raises(ValueError):
        SweepTable("x", [1.0, 2.0], {"y": [1.0]})


def test_sharpening_and_lowpass_sweeps():
    t = sharpening_sweep(19.8, FIG6, [1, 5, 25])
    assert np.all(t.column("rel_error") < 0.15)
    t = lowpass_sweep(FIG7, [1, 2, 3])
    assert np.all(t.column("rel_error") < 0.1)
    with pytest.raises(ValueError):
        lowpass_sweep(FIG7, [0, 1])
