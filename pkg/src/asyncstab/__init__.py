"""Stability and transition analysis of non-initialized, non-deterministic asynchronous systems."""
from .errors import (
    AsyncSysError,
    BudgetExceeded,
    EmptyDomain,
    EmptyValueSet,
    MalformedSignal,
    NotAnInput,
    ParseError,
    PreconditionError,
    SideConditionError,
    SigmaClosureViolation,
    TheoremFalsified,
    WidthMismatch,
)
from .generator import DelayPolicy, GeneratorSystem, UpdateRule, generate, library_examples
from .signal import BoolFn, Signal, apply_fn, parse_signal
from .stability import (
    Scope,
    StabilityFlavor,
    StabilityReport,
    Strength,
    check,
    check_combined,
    closure_suite,
    final_value_dependence,
    lim_system,
)
from .system import SystemTable, dual, intersect, is_non_anticipatory, is_subsystem, parallel, serial, union
from .transitions import (
    SigmaClosure,
    build_fundamental_input,
    check_controllability,
    fundamental_mode,
    is_hazard_free,
    plan_trajectory,
    sync_like_a,
    sync_like_b,
)

__version__ = "0.1.0"
