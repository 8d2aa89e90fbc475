"""repairlab: fault localization by prime-repair enumeration.

Given a structure (a propositional valuation, a finite first-order
interpretation, or a web-page layout snapshot) that violates a declarative
specification, enumerate the prime repairs: the minimal well-defined sets of
endomorphisms whose application restores satisfaction.  Layout specs
additionally produce witness forests explaining a failed verdict.
"""

from .core import (
    EMPTY_TRANSFORMATION,
    CellWrite,
    Endomorphism,
    RepairStream,
    SearchConfig,
    Spec,
    Transformation,
    apply_transformation,
    enumerate_prime_repairs,
    is_subsumed,
    is_well_defined,
    next_prime_repair,
    non_noop_filter,
    oracle_prime_repairs,
)
from .errors import (
    EvalError,
    IllDefinedTransformationError,
    ParseError,
    PoolTooLargeError,
    RepairLabError,
    SchemaError,
    SortMismatchError,
    UnboundVariableError,
    UnknownCellError,
)
from .proplogic import Valuation, VarFlip, eval_prop, parse_prop, prop_endo_pool
from .fol import (
    FunctionTable,
    Interpretation,
    MacroEndomorphism,
    PointUpdate,
    Sort,
    colour_change_pool,
    edge_change_pool,
    eval_fol,
    fol_endo_pool,
    load_instance,
    macro_endo,
    parse_fol,
)
from .layout import (
    Box,
    DomSnapshot,
    ElementNode,
    Selector,
    TruthValue,
    V_EMPTY,
    Verdict,
    WitnessNode,
    apply_to_snapshot,
    candidate_values,
    displacement_pool,
    ingest_snapshot,
    omega,
    parse_selector,
    parse_spec,
    point_pool,
    resize_pool,
    select,
    to_interpretation,
    verdict_and,
    verdict_not,
    verdict_or,
    witness_elements,
)
from .reporting import RepairReport, instance_digest

__version__ = "0.1.0"

__all__ = [
    "CellWrite",
    "Endomorphism",
    "EMPTY_TRANSFORMATION",
    "RepairStream",
    "SearchConfig",
    "Spec",
    "Transformation",
    "apply_transformation",
    "enumerate_prime_repairs",
    "is_subsumed",
    "is_well_defined",
    "next_prime_repair",
    "non_noop_filter",
    "oracle_prime_repairs",
    "RepairLabError",
    "IllDefinedTransformationError",
    "PoolTooLargeError",
    "ParseError",
    "SchemaError",
    "EvalError",
    "SortMismatchError",
    "UnboundVariableError",
    "UnknownCellError",
    "Valuation",
    "VarFlip",
    "eval_prop",
    "parse_prop",
    "prop_endo_pool",
    "Sort",
    "FunctionTable",
    "Interpretation",
    "PointUpdate",
    "MacroEndomorphism",
    "macro_endo",
    "eval_fol",
    "parse_fol",
    "fol_endo_pool",
    "colour_change_pool",
    "edge_change_pool",
    "load_instance",
    "Box",
    "DomSnapshot",
    "ElementNode",
    "Selector",
    "TruthValue",
    "V_EMPTY",
    "Verdict",
    "WitnessNode",
    "ingest_snapshot",
    "parse_selector",
    "select",
    "parse_spec",
    "omega",
    "verdict_and",
    "verdict_or",
    "verdict_not",
    "witness_elements",
    "to_interpretation",
    "candidate_values",
    "displacement_pool",
    "resize_pool",
    "point_pool",
    "apply_to_snapshot",
    "RepairReport",
    "instance_digest",
]
