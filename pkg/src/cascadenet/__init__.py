"""Network generators and threshold-cascade simulation for security experiments."""
from .cascade import (AttackPlan, CascadeResult, ThresholdAssignment, ThresholdSpec, assign_thresholds,
                      attack_curve, infection_set, infection_set_oracle, injury_set, select_attack)
from .errors import (CascadeNetError, DomainError, FormatError, NoPathError, ParameterError, SpecError)
from .experiments import ExperimentSpec, builtin_specs, parse_spec, run_experiment, serialize_spec
from .generators import GenParams, gen_er, gen_overlapping, gen_pa, gen_security, generate
from .graph import EdgeRecord, Graph, NodeMeta, conductance, largest_component_excluding
from .netgraph import read_graph, write_graph
from .rng import RngStream
from .structure import (build_ipt, classify_strong, communities, degree_priority, infection_inclusion_audit,
                        navigate, power_law_report, structure_report)

__version__ = "0.1.0"
