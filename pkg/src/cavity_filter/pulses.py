"""Pulse models for the per-family two-level problem and their asymptotic filters.

A pulse model fixes the time dependence of the detuning ``dw(t)`` and the
coupling ``g(t)``.  Two models have closed-form asymptotic solutions:

* Landau-Zener:    ``dw = 2 lambda t``,          ``g = g0``
* Demkov-Kunike:   ``dw = 2 A0 tanh(t/T)``,      ``g = g0 sech(t/T)``

Arbitrary shapes go through :class:`TabulatedPulse` and the numerical
propagator.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np


class NoClosedFormError(TypeError):
    """Raised when an analytic filter is requested for a tabulated pulse."""


class PulseRangeError(ValueError):
    """Raised when a tabulated pulse is sampled outside its window."""


# ---------------------------------------------------------------------------
# overflow-safe hyperbolic helpers


def sech2(x):
    """``sech(x)**2`` without overflowing for large ``|x|``."""
    ax = np.abs(np.asarray(x, dtype=float))
    e = np.exp(-2.0 * ax)
    return 4.0 * e / (1.0 + e) ** 2


def cosh2_ratio(a, b):
    """``cosh(a)**2 / cosh(b)**2`` evaluated in a form that cannot overflow."""
    aa = np.abs(np.asarray(a, dtype=float))
    ab = np.abs(np.asarray(b, dtype=float))
    ratio = np.exp(aa - ab) * (1.0 + np.exp(-2.0 * aa)) / (1.0 + np.exp(-2.0 * ab))
    return ratio**2


# ---------------------------------------------------------------------------
# model parameters


@dataclass(frozen=True)
class LZParams:
    """Landau-Zener sweep: constant coupling ``g0``, detuning rate ``lam``."""

    g0: float
    lam: float

    def __post_init__(self):
        if not self.g0 > 0:
            raise ValueError(f"g0 must be positive, got {self.g0}")
        if not self.lam > 0:
            raise ValueError(f"lambda must be positive, got {self.lam}")

    @property
    def v(self) -> float:
        """Adiabaticity exponent ``pi g0**2 / lambda``."""
        return math.pi * self.g0**2 / self.lam

    @classmethod
    def from_v(cls, v: float, g0: float = 1.0) -> "LZParams":
        """Build the sweep with a given ``v`` at coupling ``g0``."""
        if not v > 0:
            raise ValueError(f"v must be positive, got {v}")
        return cls(g0=g0, lam=math.pi * g0**2 / v)

    def sample(self, t):
        t = np.asarray(t, dtype=float)
        return 2.0 * self.lam * t, np.full_like(t, self.g0)


@dataclass(frozen=True)
class DKParams:
    """Demkov-Kunike pulse: peak coupling ``g0``, detuning amplitude ``A0``, duration ``T``."""

    g0: float
    A0: float
    T: float

    def __post_init__(self):
        if not self.g0 > 0:
            raise ValueError(f"g0 must be positive, got {self.g0}")
        if not self.T > 0:
            raise ValueError(f"T must be positive, got {self.T}")
        if not self.A0 >= 0:
            raise ValueError(f"A0 must be non-negative, got {self.A0}")

    @property
    def adiabaticity(self) -> float:
        return self.A0 * self.T

    def sample(self, t):
        s = np.asarray(t, dtype=float) / self.T
        # sech via exp(-|s|) keeps the tails finite
        e = np.exp(-np.abs(s))
        return 2.0 * self.A0 * np.tanh(s), self.g0 * 2.0 * e / (1.0 + e * e)


@dataclass(frozen=True)
class TabulatedPulse:
    """Sampled ``dw(t)`` and ``g(t)``, linearly interpolated between samples."""

    times: np.ndarray
    detuning: np.ndarray
    coupling: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        d = np.asarray(self.detuning, dtype=float)
        g = np.asarray(self.coupling, dtype=float)
        if t.ndim != 1 or t.size < 2:
            raise ValueError("need at least two sample times")
        if d.shape != t.shape or g.shape != t.shape:
            raise ValueError("times, detuning and coupling must have equal length")
        if np.any(np.diff(t) <= 0):
            raise ValueError("sample times must be strictly increasing")
        if np.any(g < 0):
            raise ValueError("coupling samples must be non-negative")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "detuning", d)
        object.__setattr__(self, "coupling", g)

    @property
    def window(self) -> tuple[float, float]:
        return float(self.times[0]), float(self.times[-1])

    def sample(self, t):
        t = np.asarray(t, dtype=float)
        lo, hi = self.window
        if np.any(t < lo) or np.any(t > hi):
            raise PulseRangeError(f"t={t} outside tabulated window [{lo}, {hi}]")
        return (np.interp(t, self.times, self.detuning),
                np.interp(t, self.times, self.coupling))


PulseModel = Union[LZParams, DKParams, TabulatedPulse]


@dataclass(frozen=True)
class TransferMatrix:
    """Asymptotic scattering data of one family.

    ``w`` is the probability of leaving the initial level (``|a+|**2`` for an
    atom entering in the lower level) and ``phi`` the relative phase between
    the transferred and the surviving amplitude, in ``[0, 2 pi)``.
    """

    w: float
    phi: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.w <= 1.0:
            raise ValueError(f"w must lie in [0, 1], got {self.w}")
        object.__setattr__(self, "phi", float(self.phi) % (2 * math.pi))

    @property
    def survival(self) -> float:
        return 1.0 - self.w

    def matrix(self) -> np.ndarray:
        """Unitary 2x2 map from initial ``(a+, a-)`` to final amplitudes."""
        s = math.sqrt(1.0 - self.w)
        t = math.sqrt(self.w)
        ph = np.exp(1j * self.phi)
        return np.array([[s, t / ph], [-t * ph, s]], dtype=complex)


# ---------------------------------------------------------------------------
# sampling and serialization


def sample_pulse(model: PulseModel, t):
    """Return ``(dw(t), g(t))`` for any pulse model."""
    return model.sample(t)


def model_to_dict(model: PulseModel) -> dict:
    if isinstance(model, LZParams):
        return {"type": "landau-zener", "g0": model.g0, "lambda": model.lam}
    if isinstance(model, DKParams):
        return {"type": "demkov-kunike", "g0": model.g0, "A0": model.A0, "T": model.T}
    if isinstance(model, TabulatedPulse):
        return {
            "type": "tabulated",
            "samples": {
                "t": model.times.tolist(),
                "detuning": model.detuning.tolist(),
                "coupling": model.coupling.tolist(),
            },
        }
    raise TypeError(f"not a pulse model: {model!r}")


def model_from_dict(doc: dict) -> PulseModel:
    kind = doc.get("type")
    if kind == "landau-zener":
        return LZParams(g0=float(doc["g0"]), lam=float(doc["lambda"]))
    if kind == "demkov-kunike":
        return DKParams(g0=float(doc["g0"]), A0=float(doc["A0"]), T=float(doc["T"]))
    if kind == "tabulated":
        s = doc["samples"]
        return TabulatedPulse(np.asarray(s["t"]), np.asarray(s["detuning"]),
                              np.asarray(s["coupling"]))
    raise ValueError(f"unknown pulse type {kind!r}")


# ---------------------------------------------------------------------------
# closed-form filters


def _family_index(n):
    n = np.asarray(n)
    if np.any(n <= 0):
        raise ValueError("family index must be >= 1 (family 0 has no coupled pair)")
    return n.astype(float)


def _scalar_or_array(x, like):
    return float(x) if np.ndim(like) == 0 else x


def lz_transfer_prob(n, params: LZParams):
    """Landau-Zener asymptotic ``w_n = exp(-v n)`` for family ``n >= 1``."""
    nn = _family_index(n)
    return _scalar_or_array(np.exp(-params.v * nn), n)


def dk_lower_filter(n, params: DKParams, approximate: bool = False):
    """Lower-level survival ``|a-(n)|**2`` of the Demkov-Kunike pulse.

    Uses the oscillatory branch when ``g0**2 n >= A0**2`` and the hyperbolic
    branch below it.  With ``approximate=True`` the non-adiabatic limit
    ``cos**2(pi T g0 sqrt(n))`` is returned instead.
    """
    nn = _family_index(n)
    g0, A0, T = params.g0, params.A0, params.T
    if approximate:
        out = np.cos(math.pi * T * g0 * np.sqrt(nn)) ** 2
        return _scalar_or_array(out, n)
    x = g0 * g0 * nn - A0 * A0
    root = np.sqrt(np.abs(x))
    osc = np.cos(math.pi * T * root) ** 2 * sech2(math.pi * T * A0)
    hyp = cosh2_ratio(math.pi * T * np.where(x < 0, root, 0.0), math.pi * T * A0)
    out = np.where(x >= 0, osc, hyp)
    return _scalar_or_array(np.clip(out, 0.0, 1.0), n)


def case_a_filter(n, model: PulseModel, approximate: bool = False):
    """``(lower, upper)`` filter pair for an atom entering in the lower level.

    Family 0 is uncoupled and returns ``(1, 0)``.  Works elementwise on arrays.
    """
    nn = np.asarray(n)
    if np.any(nn < 0):
        raise ValueError("photon family index must be >= 0")
    if isinstance(model, TabulatedPulse):
        raise NoClosedFormError(
            "tabulated pulses have no closed-form filter; use "
            "cavity_filter.propagator.numeric_filter_table")
    coupled = np.maximum(nn, 1)
    if isinstance(model, LZParams):
        lower = np.exp(-model.v * coupled.astype(float))
    elif isinstance(model, DKParams):
        lower = np.asarray(dk_lower_filter(coupled, model, approximate=approximate))
    else:
        raise TypeError(f"not a pulse model: {model!r}")
    lower = np.where(nn == 0, 1.0, lower)
    upper = 1.0 - lower
    if nn.ndim == 0:
        return float(lower), float(upper)
    return lower, upper
