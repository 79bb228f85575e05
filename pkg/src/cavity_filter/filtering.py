"""Measurement projections of the cavity field by successive atoms.

After each atom leaves the cavity its level is measured.  The outcome
multiplies the photon distribution by a filter function and, when the atom
has exchanged a photon with the field, shifts the photon number by one:

    atom enters lower (case A):  -  ->  p'[n] ~ lower(n)   p[n]
                                 +  ->  p'[n] ~ upper(n+1) p[n+1]
    atom enters upper (case B):  +  ->  p'[n] ~ lower(n+1) p[n]
                                 -  ->  p'[n] ~ upper(n)   p[n-1]

``lower``/``upper`` are the case-A filters of family ``n``.  Every step is
renormalized and its probability is accumulated in log space.
"""
from __future__ import annotations

import enum
import json
import math
import re
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from . import field
from .field import PhotonDistribution
from .pulses import PulseModel, case_a_filter

MIN_STEP_PROB = 1e-300


class ImpossibleOutcomeError(ArithmeticError):
    """The recorded outcome has (numerically) zero probability."""


class Outcome(enum.Enum):
    MINUS = "-"
    PLUS = "+"


class AtomInjectionCase(enum.Enum):
    CASE_A = "a"  # atom enters in the lower level
    CASE_B = "b"  # atom enters in the upper level


_RUN = re.compile(r"([mp])(\d+)")
_SYMBOLS = {"-": Outcome.MINUS, "−": Outcome.MINUS, "+": Outcome.PLUS}


class MeasurementSequence(tuple):
    """Ordered atomic outcomes.

    Parses either symbol strings (``"--+-"``, the Unicode minus is accepted)
    or run-length tokens (``"m25"``, ``"m3p1m2"``).
    """

    def __new__(cls, outcomes: Iterable[Outcome] = ()):
        return super().__new__(cls, (Outcome(o) for o in outcomes))

    @classmethod
    def parse(cls, text: str) -> "MeasurementSequence":
        text = text.strip()
        if not text:
            return cls()
        if text[0] in "mp":
            pos, out = 0, []
            for match in _RUN.finditer(text):
                if match.start() != pos:
                    break
                kind = Outcome.MINUS if match.group(1) == "m" else Outcome.PLUS
                out.extend([kind] * int(match.group(2)))
                pos = match.end()
            if pos != len(text):
                raise ValueError(f"cannot parse sequence {text!r}")
            return cls(out)
        try:
            return cls(_SYMBOLS[c] for c in text)
        except KeyError as exc:
            raise ValueError(f"unknown outcome symbol {exc.args[0]!r} in {text!r}") from None

    @classmethod
    def minus(cls, m: int) -> "MeasurementSequence":
        return cls([Outcome.MINUS] * m)

    def __str__(self):
        return "".join(o.value for o in self)


@dataclass(frozen=True)
class FilterTable:
    """Case-A filter values for families ``0..n_max``, computed once per model."""

    lower: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=float).copy()
        if lo.ndim != 1 or lo.size == 0:
            raise ValueError("filter table must be a non-empty vector")
        if np.any(lo < 0) or np.any(lo > 1):
            raise ValueError("filter values must lie in [0, 1]")
        lo.flags.writeable = False
        object.__setattr__(self, "lower", lo)

    @classmethod
    def from_model(cls, model: PulseModel, n_max: int, approximate: bool = False) -> "FilterTable":
        lower, _ = case_a_filter(np.arange(n_max + 1), model, approximate=approximate)
        return cls(lower)

    @property
    def n_max(self) -> int:
        return self.lower.size - 1

    @property
    def upper(self) -> np.ndarray:
        return 1.0 - self.lower

    def covers(self, n_max: int) -> bool:
        return self.n_max >= n_max


FilterSource = Union[PulseModel, FilterTable]


def _table(source: FilterSource, n_max: int) -> FilterTable:
    if isinstance(source, FilterTable):
        if not source.covers(n_max):
            raise ValueError(f"filter table covers n <= {source.n_max}, need {n_max}")
        return source
    return FilterTable.from_model(source, n_max)


def _weights(p: np.ndarray, table: FilterTable, outcome: Outcome,
             case: AtomInjectionCase) -> np.ndarray:
    n_max = p.size - 1
    lower = table.lower
    if case is AtomInjectionCase.CASE_A:
        if outcome is Outcome.MINUS:
            return lower[: n_max + 1] * p
        return (1.0 - lower[1: n_max + 1]) * p[1:]
    if outcome is Outcome.PLUS:
        return lower[1: n_max + 2] * p
    return np.concatenate([[0.0], (1.0 - lower[1: n_max + 2]) * p])


def _needed(n_max: int, case: AtomInjectionCase) -> int:
    return n_max + 1 if case is AtomInjectionCase.CASE_B else n_max


def apply_outcome(dist: PhotonDistribution, source: FilterSource, outcome: Outcome,
                  case: AtomInjectionCase = AtomInjectionCase.CASE_A):
    """Project the field on one recorded atomic outcome.

    Returns the renormalized distribution and the probability of the outcome.
    """
    outcome, case = Outcome(outcome), AtomInjectionCase(case)
    table = _table(source, _needed(dist.n_max, case))
    weights = _weights(dist.probs, table, outcome, case)
    step = math.fsum(weights)
    if not step >= MIN_STEP_PROB:
        raise ImpossibleOutcomeError(
            f"outcome {outcome.value} has probability {step:.3g}")
    return PhotonDistribution(weights / step, dist.tail_mass_bound), step


@dataclass(frozen=True)
class FilteredState:
    dist: PhotonDistribution
    log_success_prob: float = 0.0
    steps: int = 0

    @property
    def success_prob(self) -> float:
        return math.exp(self.log_success_prob)

    def header(self) -> dict:
        return {"steps": self.steps, "log_success_prob": self.log_success_prob}

    def to_csv(self) -> str:
        return "# " + json.dumps(self.header()) + "\n" + self.dist.to_csv()

    @classmethod
    def from_csv(cls, text: str) -> "FilteredState":
        first, _, rest = text.partition("\n")
        if not first.startswith("#"):
            raise ValueError("missing JSON header line")
        head = json.loads(first[1:])
        return cls(PhotonDistribution.from_csv(rest), float(head["log_success_prob"]),
                   int(head["steps"]))


def apply_sequence(dist: PhotonDistribution, source: FilterSource,
                   outcomes: Sequence[Outcome] | str,
                   case: AtomInjectionCase = AtomInjectionCase.CASE_A) -> FilteredState:
    """Apply a whole measurement record, atom by atom."""
    if isinstance(outcomes, str):
        outcomes = MeasurementSequence.parse(outcomes)
    case = AtomInjectionCase(case)
    grow = len(outcomes) if case is AtomInjectionCase.CASE_B else 0
    table = _table(source, _needed(dist.n_max + grow, case))
    log_p = 0.0
    for outcome in outcomes:
        dist, step = apply_outcome(dist, table, outcome, case)
        log_p += math.log(step)
    return FilteredState(dist, log_p, len(outcomes))


# ---------------------------------------------------------------------------
# Landau-Zener closed forms


def lz_minus_closed_form(nbar: float, v: float, m: int, n_max: int | None = None) -> PhotonDistribution:
    """Field after ``m`` lower-level detections in a Landau-Zener sweep.

    A coherent state stays coherent with the mean reduced to ``nbar exp(-v m)``.
    ``n_max`` defaults to the cutoff of the *input* state so the result lines up
    with the output of :func:`apply_sequence`.
    """
    if n_max is None:
        n_max = field.default_cutoff(nbar)
    return field.coherent(nbar * math.exp(-v * m), n_max=n_max)


def lz_minus_log_prob(nbar: float, v: float, m: int) -> float:
    """Log probability of ``m`` consecutive lower-level detections."""
    decay = math.expm1(-v)
    return sum(nbar * math.exp(-v * k) * decay for k in range(m))


def lz_upper_mean(nbar: float, v: float) -> float:
    """Mean photon number after one upper-level detection on a coherent state."""
    if not (nbar > 0 and v > 0):
        raise ValueError("need nbar > 0 and v > 0")
    a = nbar * math.expm1(-v)
    return -math.expm1(a - v) / -math.expm1(a) * nbar - 1.0
