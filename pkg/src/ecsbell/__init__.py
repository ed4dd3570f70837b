"""Bell-CHSH violations of entangled coherent states under displaced on-off
and displaced parity measurements, with photon loss and detector inefficiency.

The closed-form correlators are in :mod:`ecsbell.correlators`; a truncated
Fock-space oracle used to check them is in :mod:`ecsbell.fock`.
"""

from .correlators import (
    MeasurementKind,
    MeasurementSettings,
    bell_chsh,
    corr_onoff,
    corr_parity,
    correlation,
)
from .errors import (
    DegenerateState,
    DimensionTooSmall,
    EcsBellError,
    NoConvergence,
    NonHermitianResult,
    OutOfRange,
    UnknownScenario,
    UsageError,
)
from .optimizer import OptimizationProblem, OptResult, maximize_bell, sweep_amplitude_grid, sweep_nbar
from .scenarios import ScenarioReport, ScenarioSpec, run_inefficiency_grid, run_scenario
from .states import (
    ChannelParams,
    EcsParams,
    Parity,
    invert_mean_photon_number,
    lossy_ecs_state,
    mean_photon_number,
    strategy_channel,
)

__version__ = "0.1.0"
