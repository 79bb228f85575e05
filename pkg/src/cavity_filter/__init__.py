"""Photon-number filtering of a cavity mode by atoms with swept Jaynes-Cummings parameters."""

__version__ = "0.1.0"

from .pulses import (  # noqa: E402
    DKParams,
    LZParams,
    TabulatedPulse,
    TransferMatrix,
    case_a_filter,
    dk_lower_filter,
    lz_transfer_prob,
    sample_pulse,
)
from .field import PhotonDistribution, coherent, fock, mean, q_parameter, thermal, variance  # noqa: E402
from .filtering import (  # noqa: E402
    AtomInjectionCase,
    FilteredState,
    FilterTable,
    MeasurementSequence,
    Outcome,
    apply_outcome,
    apply_sequence,
)
