"""Alignment-based conformance checking, exact and approximated with fitness bounds."""
from .alignment import (Alignment, CostFunction, Move, MoveKind, model_trace, optimal_alignment,
                        shortest_path_model, trace_fitness)
from .approximator import (ApproximationResult, BenchmarkReport, DeviationStats, Method, Rule,
                           TraceResult, aggregate, approximate, approximate_trace,
                           avg_nearest_neighbor_distance, benchmark, deviation_stats,
                           exact_conformance, trace_bounds)
from .edit_distance import EditOp, EditScript, edit_distance, edit_script, min_distance_to_set
from .errors import (ConfigError, ConformanceError, ModelError, ParseError, ResourceError,
                     SimulationError, StructuralError, UndefinedStatisticError)
from .event_log import Activity, CsvConfig, EventLog, parse_csv, parse_xes, variants
from .petri_net import Marking, SystemNet, enabled, enumerate_visible_traces, fire, parse_pnml
from .subset_builder import (CandidateInfo, ModelBehaviorSet, build_by_simulation,
                             build_from_candidates, select_candidates_clustering,
                             select_candidates_frequency, select_candidates_random)

__version__ = "0.1.0"
