"""Structural predictions for the Demkov-Kunike filter and figure sweeps.

Two operating regimes are covered:

* sharpening (small ``A0 T``, ``g0 > A0``): the oscillating filter picks out a
  narrow window around one of its maxima;
* low-pass (large ``A0 T``, ``g0 < A0``): the hyperbolic branch suppresses
  high photon numbers roughly as ``exp(-pi g0**2 T m n / A0)``.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field as dc_field, replace

import numpy as np

from . import __version__
from .field import coherent, fwhm_numeric, mean, q_parameter
from .filtering import AtomInjectionCase, FilterTable, MeasurementSequence, apply_sequence
from .pulses import DKParams, sech2

DEFAULT_GRID_POINTS = 200


class NoSolutionError(ValueError):
    """The low-pass width equation has no root for these parameters."""


@dataclass(frozen=True)
class WidthEstimate:
    n_M: float
    delta_n_a: float
    delta_n_p: float
    delta_n: float
    x_m: float


# ---------------------------------------------------------------------------
# maxima and zeros


def dk_first_maximum(params: DKParams) -> float:
    """Location of the first maximum of the lower-level filter."""
    T, A0, g0 = params.T, params.A0, params.g0
    return (1.0 + T * T * A0 * A0) / (T * T * g0 * g0)


def dk_maxima(k: int, params: DKParams) -> float:
    """``k``-th maximum of the non-adiabatic filter ``cos**2(pi T g0 sqrt(n))``."""
    if k < 0:
        raise ValueError("k must be >= 0")
    return k * k / (params.T * params.g0) ** 2


def dk_zeros(k: int, params: DKParams) -> float:
    """``k``-th zero of the non-adiabatic filter."""
    if k < 0:
        raise ValueError("k must be >= 0")
    return (k + 0.5) ** 2 / (params.T * params.g0) ** 2


def nearest_maximum(nbar: float, params: DKParams) -> float:
    k = round(params.T * params.g0 * math.sqrt(nbar))
    return dk_maxima(k, params)


def adiabatic_amplitude(params: DKParams) -> tuple[float, float]:
    """Oscillation amplitude ``sech**2(pi T A0)`` and its estimate ``4 exp(-2 pi T A0)``."""
    x = math.pi * params.T * params.A0
    return float(sech2(x)), 4.0 * math.exp(-2.0 * x)


# ---------------------------------------------------------------------------
# widths


def x_m(m: int) -> float:
    """Half-maximum angle of ``cos**(2m)``: ``arccos(0.5**(1/(2m)))``."""
    if m < 1:
        raise ValueError("m must be >= 1")
    return math.acos(0.5 ** (1.0 / (2 * m)))


def sharpening_width(m: int, params: DKParams, n_M: float) -> WidthEstimate:
    """FWHM after ``m`` lower-level detections of a coherent state centred at ``n_M``.

    Combines the filter width and the Poisson width as
    ``1/dn**2 = 1/dn_a**2 + 1/dn_p**2``.
    """
    if n_M < 0:
        raise ValueError("n_M must be >= 0")
    x = x_m(m)
    tg = params.T * params.g0
    dn_a = 4.0 * x * math.sqrt(n_M) / (math.pi * tg)
    dn_p = math.sqrt(8.0 * n_M * math.log(2.0))
    ln2 = math.log(2.0)
    dn2 = 16.0 * x * x * n_M * ln2 / (math.pi**2 * tg * tg * ln2 + 2.0 * x * x)
    return WidthEstimate(n_M=n_M, delta_n_a=dn_a, delta_n_p=dn_p,
                         delta_n=math.sqrt(dn2), x_m=x)


def lowpass_residual(width: float, m: int, params: DKParams) -> float:
    """``cosh**(2m)(pi T sqrt(A0**2 - g0**2 w)) sech**(2m)(pi T A0) - exp(-1)``."""
    T, A0, g0 = params.T, params.A0, params.g0
    a = math.pi * T * math.sqrt(max(A0 * A0 - g0 * g0 * width, 0.0))
    b = math.pi * T * A0
    # log cosh a - log cosh b, overflow-free
    log_ratio = (a - b) + math.log1p(math.exp(-2 * a)) - math.log1p(math.exp(-2 * b))
    return math.exp(2 * m * log_ratio) - math.exp(-1.0)


def lowpass_width_exact(m: int, params: DKParams) -> float:
    """Photon number at which ``m`` hyperbolic-branch filters fall to ``1/e``."""
    if m < 1:
        raise ValueError("m must be >= 1")
    T, A0, g0 = params.T, params.A0, params.g0
    b = math.pi * T * A0
    # log of cosh(b) * exp(-1/(2m)), kept in log form for large b
    log_target = b + math.log1p(math.exp(-2 * b)) - math.log(2.0) - 1.0 / (2 * m)
    if log_target < 0:
        raise NoSolutionError(
            f"cosh(pi T A0) exp(-1/(2m)) < 1 for A0={A0}, T={T}, m={m}: "
            "the filter never drops to 1/e on the hyperbolic branch")
    # acosh(e^L) = L + log(1 + sqrt(1 - e^{-2L}))
    root = log_target + math.log1p(math.sqrt(-math.expm1(-2 * log_target)))
    return (A0 * A0 - (root / (math.pi * T)) ** 2) / (g0 * g0)


def lowpass_width_approx(m: int, params: DKParams) -> float:
    if m < 1:
        raise ValueError("m must be >= 1")
    return params.A0 / (math.pi * params.g0**2 * params.T * m)


# ---------------------------------------------------------------------------
# sweeps


@dataclass
class SweepTable:
    """One scanned axis plus any number of metric columns."""

    axis_name: str
    axis_values: np.ndarray
    metrics: dict[str, np.ndarray] = dc_field(default_factory=dict)
    fixed: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        self.axis_values = np.asarray(self.axis_values, dtype=float)
        self.metrics = {k: np.asarray(v, dtype=float) for k, v in self.metrics.items()}
        for name, col in self.metrics.items():
            if col.shape != self.axis_values.shape:
                raise ValueError(f"column {name!r} has {col.size} rows, axis has "
                                 f"{self.axis_values.size}")

    def column(self, name: str) -> np.ndarray:
        return self.axis_values if name == self.axis_name else self.metrics[name]

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# cavity_filter {__version__}\n")
        for key, value in self.fixed.items():
            buf.write(f"# {key} = {value}\n")
        w = csv.writer(buf, lineterminator="\n")
        names = [self.axis_name, *self.metrics]
        w.writerow(names)
        cols = [self.axis_values, *self.metrics.values()]
        for row in zip(*cols):
            w.writerow([format(float(x), ".17g") for x in row])
        return buf.getvalue()


def grid(start: float, stop: float, count: int = DEFAULT_GRID_POINTS) -> np.ndarray:
    if count < 1:
        raise ValueError("grid needs at least one point")
    return np.linspace(start, stop, count)


def q_sweep(nbar: float, m: int, template: DKParams, g0_values,
            approximate: bool = False) -> SweepTable:
    """Mandel Q after ``m`` lower-level detections, as a function of ``g0``."""
    g0_values = np.asarray(g0_values, dtype=float)
    start = coherent(nbar)
    seq = MeasurementSequence.minus(m)
    q, mu, logp = [], [], []
    for g0 in g0_values:
        params = replace(template, g0=float(g0))
        table = FilterTable.from_model(params, start.n_max, approximate=approximate)
        state = apply_sequence(start, table, seq, AtomInjectionCase.CASE_A)
        q.append(q_parameter(state.dist))
        mu.append(mean(state.dist))
        logp.append(state.log_success_prob)
    return SweepTable(
        "g0", g0_values, {"Q": q, "mean": mu, "log_success_prob": logp},
        fixed={"nbar": nbar, "m": m, "A0": template.A0, "T": template.T,
               "case": "a", "sequence": f"m{m}", "approximate": approximate})


def sharpening_sweep(nbar: float, params: DKParams, m_values, n_M: float | None = None) -> SweepTable:
    """Analytic versus pipeline FWHM for ``m`` lower-level detections.

    ``n_M`` defaults to the non-adiabatic maximum nearest to ``nbar``.
    """
    m_values = np.asarray(m_values, dtype=int)
    if np.any(m_values < 1):
        raise ValueError("m must be >= 1")
    if n_M is None:
        n_M = nearest_maximum(nbar, params)
    start = coherent(nbar)
    table = FilterTable.from_model(params, start.n_max)
    cols = {k: [] for k in ("delta_n", "delta_n_a", "delta_n_p", "fwhm_numeric", "rel_error")}
    for m in m_values:
        est = sharpening_width(int(m), params, n_M)
        numeric = fwhm_numeric(apply_sequence(start, table, MeasurementSequence.minus(int(m))).dist)
        cols["delta_n"].append(est.delta_n)
        cols["delta_n_a"].append(est.delta_n_a)
        cols["delta_n_p"].append(est.delta_n_p)
        cols["fwhm_numeric"].append(numeric)
        cols["rel_error"].append(abs(est.delta_n - numeric) / numeric)
    return SweepTable("m", m_values, cols,
                      fixed={"nbar": nbar, "n_M": n_M, "g0": params.g0, "A0": params.A0,
                             "T": params.T, "case": "a"})


def lowpass_sweep(params: DKParams, m_values) -> SweepTable:
    m_values = np.asarray(m_values, dtype=int)
    if np.any(m_values < 1):
        raise ValueError("m must be >= 1")
    exact = [lowpass_width_exact(int(m), params) for m in m_values]
    approx = [lowpass_width_approx(int(m), params) for m in m_values]
    rel = [abs(a - e) / e for a, e in zip(approx, exact)]
    return SweepTable("m", m_values, {"exact": exact, "approx": approx, "rel_error": rel},
                      fixed={"g0": params.g0, "A0": params.A0, "T": params.T})
