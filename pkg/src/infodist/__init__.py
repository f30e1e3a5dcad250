"""Entropic disturbance, eigenvalue/outcome information and the tools to check I <= D."""

from infodist.channels import (
    Channel,
    ChoiMatrix,
    Decomposition,
    Instrument,
    StinespringModel,
    apply,
    choi,
    complementary,
    compose,
    decompose_xi,
    informational_map,
    mixture,
    outcome_probabilities,
    post_state,
    povm,
    stinespring,
)
from infodist.config import DEFAULT_TOLERANCES, Tolerances
from infodist.functionals import (
    TradeoffReport,
    coherent_information,
    disturbance,
    exchange_entropy,
    fidelity_disturbances,
    full_report,
    holevo_rhs,
    mutual_information,
    shannon_entropy,
    state_independent,
    von_neumann_entropy,
)
from infodist.linalg import (
    DensityMatrix,
    PureState,
    eigh,
    fidelity,
    haar_unitary,
    partial_trace,
    purify,
    random_density,
    tensor,
    trace_distance,
)

__version__ = "0.1.0"
