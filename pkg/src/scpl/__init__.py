"""Statechart product lines: feature models, statecharts with optional
elements, and the rewrite strategy that instantiates concrete products."""

from .binding import expanded_elements, nsc, validate_imp
from .errors import (DuplicateNameError, EmptyCompositeError,
                     FormatSyntaxError, InvalidInputError, IsInitialError,
                     NoInitialError, NotAndError, NotOptionalError,
                     NotSimpleError, NotSubstateError, OptionalComposeError,
                     RewriteError, ScplError, TooLargeError,
                     UnknownFeatureError, UnknownReferenceError)
from .features import (build_configuration, enumerate_configurations, kernel,
                       nsf, validate_configuration, validate_feature_model)
from .formats import (export_dot, parse_configuration, parse_product_line,
                      serialize_configuration, serialize_product_line)
from .model import (AndState, Condition, Configuration, FeatureModel, Guard,
                    History, ImpEntry, ImpMapping, InState, MachineIndex,
                    OrState, RewriteTrace, SimpleState, State, StateChart,
                    TraceStep, Transition, Violation, canonicalize,
                    check_well_formed, var_elems)
from .rewrite import (PendingSet, comp, comp_name, delete_and_state,
                      delete_or_state, delete_simple_state, delete_transition,
                      entry_exit_pairs, finalize_optionals, prune_conditions,
                      reachable_and, reachable_or, repair_initial)
from .strategy import (ConfluenceReport, GeneratedLine, InstantiationResult,
                       check_confluence, generate_random_product_line,
                       instantiate, validate_inputs)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
