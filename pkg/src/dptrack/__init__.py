"""Track finding with the Denby-Peterson segment network, cast as Ising/QUBO
problems and minimized by classical, mean-field and simulated-quantum annealing."""

from .errors import CapacityError, ContractError, EmbeddingInfeasible, ParseError
from .event_gen import DetectorGeometry, Event, EventGenConfig, Hit, generate_event
from .ising import IsingProblem, QuboProblem, ising_energy, ising_to_qubo, qubo_energy, qubo_to_ising
from .solvers import AnnealSchedule, MeanFieldParams, SolveResult, SqaParams, solve

__all__ = [
    "AnnealSchedule", "CapacityError", "ContractError", "DetectorGeometry", "EmbeddingInfeasible",
    "Event", "EventGenConfig", "Hit", "IsingProblem", "MeanFieldParams", "ParseError",
    "QuboProblem", "SolveResult", "SqaParams", "generate_event", "ising_energy", "ising_to_qubo",
    "qubo_energy", "qubo_to_ising", "solve",
]
__version__ = "0.1.0"
