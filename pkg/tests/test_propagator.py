import math

import numpy as np
import pytest

from cavity_filter.propagator import (
    LOWER,
    UPPER,
    FamilyAmplitudes,
    IntegrationConfig,
    IntegrationError,
    default_config,
    numeric_filter_table,
    numeric_lower_filter,
    numeric_transfer_matrix,
    propagate_basis,
    propagate_family,
    unitarity_defect,
)
from cavity_filter.pulses import DKParams, LZParams, TabulatedPulse, dk_lower_filter

FIG2 = DKParams(g0=4.0, A0=0.1, T=0.1)
FIG5 = DKParams(g0=0.2, A0=0.6, T=0.9)
ZERO_COUPLING = TabulatedPulse(np.linspace(-5, 5, 11), np.linspace(-3, 3, 11), np.zeros(11))


def test_decoupled_family_keeps_lower_level():
    cfg = default_config(ZERO_COUPLING)
    out = propagate_family(4, ZERO_COUPLING, LOWER, cfg)
    assert out.a_plus == 0
    assert abs(out.a_minus) ** 2 == pytest.approx(1.0, abs=10 * cfg.rel_tol)
    assert numeric_transfer_matrix(4, ZERO_COUPLING).w == 0.0


def test_rejects_unnormalized_init():
    with pytest.raises(ValueError):
        propagate_family(1, FIG2, FamilyAmplitudes(1.0, 1.0), default_config(FIG2))


def test_config_validation():
    with pytest.raises(ValueError):
        IntegrationConfig(1.0, 0.0)
    with pytest.raises(ValueError):
        IntegrationConfig(0.0, 1.0, rel_tol=0.0)


def test_default_windows():
    cfg = default_config(FIG2)
    assert (cfg.t_start, cfg.t_end) == pytest.approx((-2.0, 2.0))
    lz = LZParams.from_v(0.126)
    cfg = default_config(lz)
    assert lz.lam * cfg.t_end**2 == pytest.approx(400.0)


def test_dk_fig2_n1_matches_closed_form():
    num = numeric_lower_filter(1, FIG2)
    assert abs(num - dk_lower_filter(1, FIG2)) < 1e-6


def test_dk_fig2_n6_transfer():
    tm = numeric_transfer_matrix(6, FIG2)
    assert abs(tm.w - (1 - dk_lower_filter(6, FIG2))) < 1e-6
    assert 0 <= tm.phi < 2 * math.pi


def test_lz_strong_coupling_transfers():
    lz = LZParams.from_v(5.0)
    tm = numeric_transfer_matrix(3, lz)
    assert tm.w == pytest.approx(1 - math.exp(-15), abs=1e-3)


def test_lz_converges_with_window():
    lz = LZParams.from_v(0.126)
    target = math.exp(-0.126)
    errs = [abs(numeric_lower_filter(1, lz, default_config(lz, window=w)) - target)
            for w in (100.0, 400.0, 6400.0)]
    assert errs[0] > errs[2]
    assert errs[1] < 5e-3
    assert errs[2] < 1e-4


def test_tail_averaging_reduces_lz_residual():
    lz = LZParams.from_v(0.126)
    target = math.exp(-0.126 * 5)
    raw = abs(numeric_lower_filter(5, lz) - target)
    avg = abs(numeric_lower_filter(5, lz, average_tail=True) - target)
    assert avg < raw


def test_basis_evolution_is_unitary():
    cfg = default_config(FIG5)
    for n in (1, 7, 30):
        u = propagate_basis(n, FIG5, cfg)
        assert unitarity_defect(u) < 10 * cfg.rel_tol


@pytest.mark.parametrize("model", [FIG2, FIG5, LZParams.from_v(0.126)])
def test_norm_drift(model):
    cfg = default_config(model)
    for n in (1, 10, 30):
        out = propagate_family(n, model, UPPER, cfg)
        assert abs(out.norm - 1.0) < 10 * cfg.rel_tol


@pytest.mark.parametrize("model", [FIG2, FIG5])
def test_window_doubling_from_default(model):
    a = numeric_filter_table(30, model, default_config(model, window=20.0))
    b = numeric_filter_table(30, model, default_config(model, window=40.0))
    assert np.max(np.abs(a - b)) < 1e-7


def test_short_window_misses_pulse_tails():
    # sech(10) ~ 1e-4 of the peak coupling is still active at +-10 T
    a = numeric_filter_table(10, FIG2, default_config(FIG2, window=10.0))
    b = numeric_filter_table(10, FIG2, default_config(FIG2, window=20.0))
    assert 1e-5 < np.max(np.abs(a - b)) < 1e-3


def test_step_underflow_reports_time():
    # at t ~ 1e12 the float spacing is coarser than any step that resolves dw ~ 2e12
    cfg = IntegrationConfig(1e12, 1e12 + 100.0)
    with pytest.raises(IntegrationError) as info:
        propagate_family(1, LZParams(g0=1.0, lam=1.0), LOWER, cfg)
    assert info.value.time == 1e12


def test_filter_table_family_zero():
    table = numeric_filter_table(3, FIG2)
    assert table[0] == 1.0
    assert np.allclose(table[1:], dk_lower_filter(np.arange(1, 4), FIG2), atol=1e-6)
