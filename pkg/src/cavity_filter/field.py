"""Truncated photon-number distributions of the cavity mode."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import pdtrc

TAIL_LIMIT = 1e-10


class UndefinedQError(ValueError):
    """Q is undefined for a distribution with zero mean."""


def default_cutoff(nbar: float) -> int:
    return math.ceil(nbar + 12.0 * math.sqrt(nbar + 1.0) + 20.0)


@dataclass(frozen=True)
class PhotonDistribution:
    """Probabilities ``p[n]`` for ``n = 0..n_max``.

    ``tail_mass_bound`` bounds the probability discarded above ``n_max``.
    """

    probs: np.ndarray
    tail_mass_bound: float = 0.0

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise ValueError("probs must be a non-empty vector")
        if np.any(p < 0) or not np.all(np.isfinite(p)):
            raise ValueError("probabilities must be finite and non-negative")
        p = p.copy()
        p.flags.writeable = False
        object.__setattr__(self, "probs", p)

    @property
    def n_max(self) -> int:
        return self.probs.size - 1

    @property
    def n(self) -> np.ndarray:
        return np.arange(self.probs.size)

    def normalize(self) -> "PhotonDistribution":
        total = math.fsum(self.probs)
        if total <= 0:
            raise ValueError("cannot normalize a zero distribution")
        return PhotonDistribution(self.probs / total, self.tail_mass_bound)

    def padded(self, n_max: int) -> np.ndarray:
        """Probabilities zero-padded (never truncated) to length ``n_max + 1``."""
        if n_max < self.n_max:
            raise ValueError("padding cannot shrink the support")
        out = np.zeros(n_max + 1)
        out[: self.probs.size] = self.probs
        return out

    # serialization
    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "p_n"])
        for n, p in enumerate(self.probs):
            w.writerow([n, format(float(p), ".17g")])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, tail_mass_bound: float = 0.0) -> "PhotonDistribution":
        rows = [r for r in csv.reader(io.StringIO(text)) if r and not r[0].startswith("#")]
        if rows[0] != ["n", "p_n"]:
            raise ValueError("expected header n,p_n")
        body = rows[1:]
        n = [int(r[0]) for r in body]
        if n != list(range(len(n))):
            raise ValueError("rows must list n = 0, 1, 2, ... in order")
        return cls(np.array([float(r[1]) for r in body]), tail_mass_bound)

    def to_json(self) -> str:
        return json.dumps({"n_max": self.n_max, "probs": [float(p) for p in self.probs],
                           "tail_mass_bound": self.tail_mass_bound})

    @classmethod
    def from_json(cls, text: str) -> "PhotonDistribution":
        doc = json.loads(text)
        dist = cls(np.asarray(doc["probs"], dtype=float), float(doc.get("tail_mass_bound", 0.0)))
        if dist.n_max != int(doc["n_max"]):
            raise ValueError("n_max does not match the length of probs")
        return dist


# ---------------------------------------------------------------------------
# generators


def coherent(nbar: float, n_max: int | None = None) -> PhotonDistribution:
    """Poisson distribution with mean ``nbar``.

    Built from the ratio recurrence ``p[n] = p[n-1] nbar / n`` accumulated in
    log space, so large ``nbar`` neither overflows nor underflows ``p[0]``.
    """
    if nbar < 0:
        raise ValueError(f"nbar must be >= 0, got {nbar}")
    if n_max is None:
        n_max = default_cutoff(nbar)
    if nbar == 0:
        p = np.zeros(n_max + 1)
        p[0] = 1.0
        return PhotonDistribution(p, 0.0)
    n = np.arange(1, n_max + 1)
    logp = np.concatenate([[-nbar], -nbar + np.cumsum(math.log(nbar) - np.log(n))])
    tail = float(pdtrc(n_max, nbar))
    return PhotonDistribution(np.exp(logp), tail).normalize()


def thermal(nbar: float, n_max: int | None = None) -> PhotonDistribution:
    """Bose-Einstein distribution ``p[n] = (1 - r) r**n`` with ``r = nbar/(1+nbar)``."""
    if nbar < 0:
        raise ValueError(f"nbar must be >= 0, got {nbar}")
    r = nbar / (1.0 + nbar)
    if n_max is None:
        n_max = default_cutoff(nbar)
        if r > 0:
            # geometric tails decay slower than the Poisson rule assumes; going far
            # below TAIL_LIMIT keeps the n**2-weighted moments exact to ~1e-12
            n_max = max(n_max, math.ceil(math.log(1e-20) / math.log(r)))
    n = np.arange(n_max + 1)
    p = (1.0 - r) * r**n
    return PhotonDistribution(p, r ** (n_max + 1)).normalize()


def fock(n: int, n_max: int | None = None) -> PhotonDistribution:
    if n < 0:
        raise ValueError("photon number must be >= 0")
    n_max = n if n_max is None else n_max
    p = np.zeros(n_max + 1)
    p[n] = 1.0
    return PhotonDistribution(p, 0.0)


# ---------------------------------------------------------------------------
# statistics


def mean(dist: PhotonDistribution) -> float:
    return float(np.dot(dist.n, dist.probs))


def variance(dist: PhotonDistribution) -> float:
    mu = mean(dist)
    return float(np.dot((dist.n - mu) ** 2, dist.probs))


def q_parameter(dist: PhotonDistribution) -> float:
    """Mandel ``Q = (var - mean) / mean``; -1 for number states, 0 for Poisson."""
    mu = mean(dist)
    if mu <= 0:
        raise UndefinedQError("Q is undefined for the vacuum")
    return (variance(dist) - mu) / mu


@dataclass(frozen=True)
class HalfMaxCrossings:
    left: float
    right: float
    multimodal: bool

    @property
    def width(self) -> float:
        return self.right - self.left


def fwhm_crossings(dist: PhotonDistribution) -> HalfMaxCrossings:
    """Half-maximum crossings around the global maximum.

    Each crossing is linearly interpolated between the adjacent integer bins,
    with bins outside ``0..n_max`` taken as zero.  ``multimodal`` is set when
    some bin outside the bracket also reaches half the maximum.
    """
    p = np.concatenate([[0.0], dist.probs, [0.0]])
    k = int(np.argmax(p))
    half = 0.5 * p[k]
    i = k
    while p[i] >= half:
        i -= 1
    left = i + (half - p[i]) / (p[i + 1] - p[i])
    j = k
    while p[j] >= half:
        j += 1
    right = j - (half - p[j]) / (p[j - 1] - p[j])
    multimodal = bool(np.any(p[: i + 1] >= half) or np.any(p[j:] >= half))
    # shift back from padded to photon-number coordinates
    return HalfMaxCrossings(left - 1.0, right - 1.0, multimodal)


def fwhm_numeric(dist: PhotonDistribution) -> float:
    """Full width at half maximum of a discrete distribution (interpolated)."""
    return fwhm_crossings(dist).width
