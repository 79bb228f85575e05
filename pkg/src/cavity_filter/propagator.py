"""Direct integration of the per-family two-level equations of motion.

For family ``n`` the amplitudes ``(a+, a-)`` obey

    i d/dt (a+, a-) = [[dw/2, g sqrt(n)], [g sqrt(n), -dw/2]] (a+, a-)

This module is the numerical cross-check for the closed-form filters in
:mod:`cavity_filter.pulses`, and the only route for tabulated pulses.
The stepping is scipy's adaptive Dormand-Prince 8(5,3) pair.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .pulses import DKParams, LZParams, PulseModel, TabulatedPulse, TransferMatrix

DK_WINDOW = 20.0  # half-window in units of T
LZ_PHASE = 400.0  # lambda * tau**2 at the window edges


class IntegrationError(RuntimeError):
    """The integrator gave up; ``time`` is where it stopped."""

    def __init__(self, message: str, time: float):
        super().__init__(f"{message} (at t={time:.17g})")
        self.time = time


@dataclass(frozen=True)
class FamilyAmplitudes:
    a_plus: complex
    a_minus: complex

    @property
    def norm(self) -> float:
        return abs(self.a_plus) ** 2 + abs(self.a_minus) ** 2

    def as_array(self) -> np.ndarray:
        return np.array([self.a_plus, self.a_minus], dtype=complex)


LOWER = FamilyAmplitudes(0j, 1 + 0j)
UPPER = FamilyAmplitudes(1 + 0j, 0j)


@dataclass(frozen=True)
class IntegrationConfig:
    t_start: float
    t_end: float
    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    max_step: float = math.inf

    def __post_init__(self):
        if not self.t_start < self.t_end:
            raise ValueError("t_start must be before t_end")
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")
        if not self.max_step > 0:
            raise ValueError("max_step must be positive")


def default_config(model: PulseModel, window: float | None = None, **kw) -> IntegrationConfig:
    """Finite surrogate for the infinite interaction time.

    ``window`` is the half-width in units of ``T`` for Demkov-Kunike pulses
    and the edge phase ``lambda tau**2`` for Landau-Zener sweeps.  Tabulated
    pulses use their full sample range.
    """
    if isinstance(model, DKParams):
        half = (DK_WINDOW if window is None else window) * model.T
        return IntegrationConfig(-half, half, **kw)
    if isinstance(model, LZParams):
        tau = math.sqrt((LZ_PHASE if window is None else window) / model.lam)
        return IntegrationConfig(-tau, tau, **kw)
    if isinstance(model, TabulatedPulse):
        lo, hi = model.window
        return IntegrationConfig(lo, hi, **kw)
    raise TypeError(f"not a pulse model: {model!r}")


def _solve(n, model, y0, cfg, dense=False):
    if n < 1:
        raise ValueError("family index must be >= 1")
    root_n = math.sqrt(n)

    def rhs(t, y):
        dw, g = model.sample(t)
        half = 0.5 * float(dw)
        c = float(g) * root_n
        return np.array([-1j * (half * y[0] + c * y[1]),
                         -1j * (c * y[0] - half * y[1])])

    sol = solve_ivp(rhs, (cfg.t_start, cfg.t_end), y0, method="DOP853",
                    rtol=cfg.rel_tol, atol=cfg.abs_tol, max_step=cfg.max_step,
                    dense_output=dense)
    if sol.status != 0:
        raise IntegrationError(sol.message, float(sol.t[-1]))
    return sol


def propagate_family(n: int, model: PulseModel, init: FamilyAmplitudes,
                     cfg: IntegrationConfig) -> FamilyAmplitudes:
    """Integrate family ``n`` from ``cfg.t_start`` to ``cfg.t_end``."""
    if abs(init.norm - 1.0) > 1e-12:
        raise ValueError(f"initial amplitudes not normalized (norm={init.norm!r})")
    sol = _solve(n, model, init.as_array(), cfg)
    a_plus, a_minus = sol.y[:, -1]
    return FamilyAmplitudes(complex(a_plus), complex(a_minus))


def propagate_basis(n: int, model: PulseModel, cfg: IntegrationConfig) -> np.ndarray:
    """Numerical 2x2 evolution matrix; column 0 starts in ``+``, column 1 in ``-``."""
    cols = [propagate_family(n, model, init, cfg).as_array() for init in (UPPER, LOWER)]
    return np.column_stack(cols)


def numeric_transfer_matrix(n: int, model: PulseModel,
                            cfg: IntegrationConfig | None = None) -> TransferMatrix:
    """Extract ``(w, phi)`` from the evolution of an atom entering in the lower level.

    Both basis states are propagated; ``w`` and ``phi`` come from the lower-level
    column, and the upper-level column is only used by :func:`unitarity_defect`.
    """
    cfg = cfg or default_config(model)
    a_plus, a_minus = propagate_basis(n, model, cfg)[:, 1]
    w = min(max(abs(a_plus) ** 2, 0.0), 1.0)
    if abs(a_plus) == 0.0 or abs(a_minus) == 0.0:
        phi = 0.0
    else:
        phi = float(np.angle(a_minus) - np.angle(a_plus))
    return TransferMatrix(w=w, phi=phi)


def unitarity_defect(u: np.ndarray) -> float:
    """Largest entry of ``|U^dagger U - 1|``."""
    return float(np.max(np.abs(u.conj().T @ u - np.eye(2))))


def numeric_lower_filter(n: int, model: PulseModel, cfg: IntegrationConfig | None = None,
                         average_tail: bool = False) -> float:
    """``|a-|**2`` at the end of the window for an atom entering in the lower level.

    With ``average_tail`` the probability is averaged over the last period of
    the instantaneous level splitting, which removes the end-point ringing of
    finite Landau-Zener windows.
    """
    cfg = cfg or default_config(model)
    if not average_tail:
        return abs(propagate_family(n, model, LOWER, cfg).a_minus) ** 2
    sol = _solve(n, model, LOWER.as_array(), cfg, dense=True)
    dw, g = model.sample(cfg.t_end)
    splitting = math.hypot(float(dw), 2.0 * float(g) * math.sqrt(n))
    if splitting == 0.0:
        return abs(sol.y[1, -1]) ** 2
    period = min(2.0 * math.pi / splitting, cfg.t_end - cfg.t_start)
    ts = np.linspace(cfg.t_end - period, cfg.t_end, 257)
    pm = np.abs(sol.sol(ts)[1]) ** 2
    return float(np.trapezoid(pm, ts) / period)


def numeric_filter_table(n_max: int, model: PulseModel, cfg: IntegrationConfig | None = None,
                         average_tail: bool = False) -> np.ndarray:
    """Lower-level filter for families ``0..n_max`` (family 0 is exactly 1)."""
    cfg = cfg or default_config(model)
    out = np.ones(n_max + 1)
    for n in range(1, n_max + 1):
        out[n] = numeric_lower_filter(n, model, cfg, average_tail=average_tail)
    return out
