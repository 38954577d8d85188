"""Transaction logic with events: detection, execution and checking over paths."""

__version__ = "0.1.0"

from .checker import check_entailment, support_report
from .detection import DetectionTable, ResponseEntry, detect
from .errors import (
    BoundExceeded,
    BudgetExceeded,
    ExpansionLimit,
    FragmentError,
    GroundingError,
    KindConflict,
    ParseError,
    PathError,
    StratificationError,
    TrevError,
)
from .executor import ExecutionContext, ExecutionResult, NoExecution, execute, respond_loop, temporal_choice
from .grounding import ground, stratify
from .oracle import RELATIONAL, RelationalOracle
from .parser import parse, parse_goal, parse_state
from .paths import Path

__all__ = [
    "BoundExceeded",
    "BudgetExceeded",
    "DetectionTable",
    "ExecutionContext",
    "ExecutionResult",
    "ExpansionLimit",
    "FragmentError",
    "GroundingError",
    "KindConflict",
    "NoExecution",
    "ParseError",
    "Path",
    "PathError",
    "RELATIONAL",
    "RelationalOracle",
    "ResponseEntry",
    "StratificationError",
    "TrevError",
    "check_entailment",
    "detect",
    "execute",
    "ground",
    "parse",
    "parse_goal",
    "parse_state",
    "respond_loop",
    "stratify",
    "support_report",
    "temporal_choice",
]
