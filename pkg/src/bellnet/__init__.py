"""Bell nonlocality in quantum networks: states, behaviours, polytopes and protocols."""

from .behaviors import Behavior, Scenario, behavior_from_quantum
from .bell import BellFunctional, catalog, lift, seesaw
from .measurements import MeasurementAssignment, Povm
from .polytope import hybrid_vertices_3party, deterministic_vertices, membership
from .states import DensityState, isotropic, max_entangled
from .tensor import Operator, kron, partial_trace

__version__ = "0.1.0"
