"""Interaction-free-measurement Grover search: circuit simulation, closed form, baselines."""

__version__ = "0.1.0"

from .circuit import (  # noqa: E402
    LargeCycleRecord,
    OutcomeDistribution,
    PolarizedState,
    SearchParams,
    ThetaMode,
    final_success,
    initial_state,
    inversion_about_average,
    leaky_oracle,
    monte_carlo,
    run_search,
    small_cycle,
)
from .closed_form import (  # noqa: E402
    AmplitudePair,
    DegenerateLeak,
    PhaseParameter,
    Regime,
    amplitudes,
    phase_parameter,
    success_probability,
    survival,
)
