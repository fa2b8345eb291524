"""Scattering by finite periodic chains of identical one-dimensional cells.

Builds the N-cell scattering matrix two independent ways (composition
recurrences and the Chebyshev closed form) and derives transmission and
reflection probabilities, phase time delays, Hartman traversal times, and
the total-reflection condition of the infinite chain.
"""

from .analysis import (
    AsymptoticFit,
    BandClass,
    BandVerdict,
    DelayRecord,
    HartmanRecord,
    asymptotic_phase_fit,
    band_classify,
    chain_phase_curves,
    hartman_scan,
    time_delays,
    traversal_time,
    wavepacket_average,
)
from .cells import (
    DeltaSpike,
    Lattice,
    PiecewiseConstant,
    PotentialCell,
    RectBarrier,
    TransferMatrix,
    cell_smatrix,
    smatrix_to_transfer,
    transfer_oracle,
    transfer_to_smatrix,
)
from .chain import (
    ChainState,
    bloch_parameter,
    chain_amplitudes,
    chain_amplitudes_addleft,
    chebyshev_U,
    chebyshev_transmission,
    compose,
    displace,
    transmission_profile,
)
from .core import (
    MODULUS_FLOOR,
    PhaseCurve,
    ScatteringMatrix,
    WaveNumber,
    branch_distance,
    identity_smatrix,
    phase_relation_residual,
    principal_phase,
    principal_phases,
    unitarity_defect,
    unwrap,
    wrap_to_principal,
)
from .errors import (
    BranchAmbiguityError,
    ConfigError,
    CoverageError,
    EdgeOfGridError,
    InBandWarning,
    ResonanceDivergenceError,
    SingularConversionError,
    UndefinedAmplitudeError,
)

__version__ = "0.1.0"

__all__ = [
    "AsymptoticFit",
    "BandClass",
    "BandVerdict",
    "BranchAmbiguityError",
    "ChainState",
    "ConfigError",
    "CoverageError",
    "DelayRecord",
    "DeltaSpike",
    "EdgeOfGridError",
    "HartmanRecord",
    "InBandWarning",
    "Lattice",
    "MODULUS_FLOOR",
    "PhaseCurve",
    "PiecewiseConstant",
    "PotentialCell",
    "RectBarrier",
    "ResonanceDivergenceError",
    "ScatteringMatrix",
    "SingularConversionError",
    "TransferMatrix",
    "UndefinedAmplitudeError",
    "WaveNumber",
    "asymptotic_phase_fit",
    "band_classify",
    "bloch_parameter",
    "branch_distance",
    "cell_smatrix",
    "chain_amplitudes",
    "chain_amplitudes_addleft",
    "chain_phase_curves",
    "chebyshev_U",
    "chebyshev_transmission",
    "compose",
    "displace",
    "hartman_scan",
    "identity_smatrix",
    "phase_relation_residual",
    "principal_phase",
    "principal_phases",
    "smatrix_to_transfer",
    "time_delays",
    "transfer_oracle",
    "transfer_to_smatrix",
    "transmission_profile",
    "traversal_time",
    "unitarity_defect",
    "unwrap",
    "wavepacket_average",
    "wrap_to_principal",
    "__version__",
]
