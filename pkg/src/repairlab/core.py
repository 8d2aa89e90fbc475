"""Domain-agnostic repair engine.

A *structure* is any immutable value exposing ``cell_value(cell)`` and
``with_cell(cell, value)``.  An endomorphism writes fixed values to a fixed
set of cells (its footprint); a transformation is a set of endomorphisms,
well-defined when all footprints are pairwise disjoint so that composite
application is order-independent.  A repair of a structure violating a
satisfaction predicate is a well-defined transformation whose application
restores satisfaction; a prime repair has no proper subset that is also a
repair.

The enumerator walks subsets of the endomorphism pool by increasing
cardinality (ties broken lexicographically on sorted key sequences), skipping
ill-defined candidates, candidates subsumed by an already-yielded repair, and
candidates that do not restore satisfaction.  ``oracle_prime_repairs`` is the
independent brute-force ground truth used by the test suite.
"""

from __future__ import annotations

import itertools
from collections.abc import Callable, Hashable, Iterable
from dataclasses import dataclass
from typing import Any, Optional

from .errors import IllDefinedTransformationError, PoolTooLargeError

# A cell identifier is any hashable value; what it addresses is up to the
# structure (a variable name, a (function, args) pair, a (property, element)
# pair, ...).
Cell = Hashable

# Satisfaction predicate over structures.  Must be deterministic.
Spec = Callable[[Any], bool]


class Endomorphism:
    """A total self-map on structures writing fixed values to fixed cells.

    Subclasses provide ``key`` (a unique, totally ordered label within a
    pool) and ``writes`` (the ordered (cell, value) pairs).  Application is
    idempotent and touches only the footprint cells.
    """

    key: str

    @property
    def writes(self) -> tuple[tuple[Cell, Any], ...]:
        raise NotImplementedError

    @property
    def footprint(self) -> frozenset[Cell]:
        cached = getattr(self, "_footprint_cache", None)
        if cached is None:
            cached = frozenset(cell for cell, _ in self.writes)
            self._footprint_cache = cached
        return cached

    def apply(self, structure: Any) -> Any:
        for cell, value in self.writes:
            structure = structure.with_cell(cell, value)
        return structure

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Endomorphism) and self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)

    def __lt__(self, other: "Endomorphism") -> bool:
        return self.key < other.key

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.key}>"


class CellWrite(Endomorphism):
    """The generic point endomorphism: write one value to one cell."""

    def __init__(self, key: str, cell: Cell, value: Any):
        self.key = key
        self._cell = cell
        self._value = value

    @property
    def cell(self) -> Cell:
        return self._cell

    @property
    def value(self) -> Any:
        return self._value

    @property
    def writes(self) -> tuple[tuple[Cell, Any], ...]:
        return ((self._cell, self._value),)


class Transformation:
    """A finite set of endomorphisms, deduplicated and ordered by key."""

    __slots__ = ("_members", "_keys")

    def __init__(self, members: Iterable[Endomorphism] = ()):
        by_key: dict[str, Endomorphism] = {}
        for endo in members:
            by_key.setdefault(endo.key, endo)
        self._members: tuple[Endomorphism, ...] = tuple(
            by_key[k] for k in sorted(by_key)
        )
        self._keys: frozenset[str] = frozenset(by_key)

    @classmethod
    def _from_sorted(cls, members: tuple[Endomorphism, ...]) -> "Transformation":
        # Fast path for combos already unique and sorted by key.
        self = cls.__new__(cls)
        self._members = members
        self._keys = frozenset(e.key for e in members)
        return self

    @property
    def members(self) -> tuple[Endomorphism, ...]:
        return self._members

    @property
    def keys(self) -> frozenset[str]:
        return self._keys

    def __iter__(self):
        return iter(self._members)

    def __len__(self) -> int:
        return len(self._members)

    def __contains__(self, endo: Endomorphism) -> bool:
        return endo.key in self._keys

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Transformation) and self._keys == other._keys

    def __hash__(self) -> int:
        return hash(self._keys)

    def __le__(self, other: "Transformation") -> bool:
        return self._keys <= other._keys

    def __lt__(self, other: "Transformation") -> bool:
        return self._keys < other._keys

    def __repr__(self) -> str:
        inner = ", ".join(e.key for e in self._members)
        return f"{{{inner}}}"


EMPTY_TRANSFORMATION = Transformation()


def _disjoint_footprints(endos: Iterable[Endomorphism]) -> bool:
    footprints = [endo.footprint for endo in endos]
    if len(footprints) < 2:
        return True
    total = sum(len(fp) for fp in footprints)
    return len(frozenset().union(*footprints)) == total


def is_well_defined(transformation: Transformation) -> bool:
    """True iff every pair of distinct members commutes (disjoint footprints)."""
    return _disjoint_footprints(transformation.members)


def apply_transformation(transformation: Transformation, structure: Any) -> Any:
    """Apply all members (in key order) to a copy of ``structure``.

    Raises IllDefinedTransformationError when members overlap, since the
    composite would then depend on application order.
    """
    if not is_well_defined(transformation):
        raise IllDefinedTransformationError(
            f"transformation {transformation!r} has overlapping members"
        )
    for endo in transformation:
        structure = endo.apply(structure)
    return structure


def is_subsumed(transformation: Transformation, stored: Iterable[Transformation]) -> bool:
    """True iff some stored transformation is a subset (by key set) of this one."""
    keys = transformation.keys
    return any(t.keys <= keys for t in stored)


def non_noop_filter(structure: Any) -> Callable[[Endomorphism], bool]:
    """Filter dropping endomorphisms whose every write already holds in ``structure``."""

    def keep(endo: Endomorphism) -> bool:
        return any(structure.cell_value(cell) != value for cell, value in endo.writes)

    return keep


@dataclass
class SearchConfig:
    """Limits and pool restrictions for repair enumeration.

    max_cardinality bounds the size of candidate transformations (0 means
    only the empty transformation is considered).  max_repairs stops the
    stream after that many yields.  endo_filter restricts the pool to
    endomorphisms for which it returns true.
    """

    max_cardinality: Optional[int] = None
    max_repairs: Optional[int] = None
    endo_filter: Optional[Callable[[Endomorphism], bool]] = None

    def __post_init__(self) -> None:
        if self.max_cardinality is not None and self.max_cardinality < 0:
            raise ValueError("max_cardinality must be non-negative")
        if self.max_repairs is not None and self.max_repairs < 1:
            raise ValueError("max_repairs must be positive")


REASON_COMPLETE = "complete"
REASON_MAX_CARDINALITY = "max_cardinality"
REASON_MAX_REPAIRS = "max_repairs"


class RepairStream:
    """Iterator over prime repairs in deterministic cardinality order.

    The satisfaction predicate and structure are fixed for the stream's
    lifetime.  Yielded repairs are stored (``found``) and used to subsume
    later candidates, keeping the output an antichain under set inclusion.
    A stream is single-owner; it is not safe to share across threads.
    """

    def __init__(
        self,
        spec: Spec,
        structure: Any,
        pool: Iterable[Endomorphism],
        config: SearchConfig | None = None,
    ):
        self.config = config or SearchConfig()
        deduped: dict[str, Endomorphism] = {}
        for endo in pool:
            deduped.setdefault(endo.key, endo)
        members = [deduped[k] for k in sorted(deduped)]
        if self.config.endo_filter is not None:
            members = [e for e in members if self.config.endo_filter(e)]
        self._pool: list[Endomorphism] = members
        self._spec = spec
        self._structure = structure
        self.found: list[Transformation] = []
        self._found_keys: list[frozenset[str]] = []
        self.reason: Optional[str] = None
        self._candidates = self._make_candidates()

    @property
    def exhausted(self) -> bool:
        return self.reason == REASON_COMPLETE

    def _make_candidates(self):
        limit = len(self._pool)
        if self.config.max_cardinality is not None:
            limit = min(limit, self.config.max_cardinality)
        for size in range(limit + 1):
            yield from itertools.combinations(self._pool, size)
        # Runs when the caller drains the generator past the last combo.
        if self.config.max_cardinality is not None and self.config.max_cardinality < len(self._pool):
            self.reason = REASON_MAX_CARDINALITY
        else:
            self.reason = REASON_COMPLETE

    def next_repair(self) -> Optional[Transformation]:
        """Advance to the next prime repair, or None when the stream ends."""
        if self.reason is not None:
            return None
        if self.config.max_repairs is not None and len(self.found) >= self.config.max_repairs:
            self.reason = REASON_MAX_REPAIRS
            return None
        spec = self._spec
        found_keys = self._found_keys
        for combo in self._candidates:
            if not _disjoint_footprints(combo):
                continue
            keys = frozenset(e.key for e in combo)
            if any(s <= keys for s in found_keys):
                continue
            patched = self._structure
            for endo in combo:
                patched = endo.apply(patched)
            if not spec(patched):
                continue
            repair = Transformation._from_sorted(combo)
            self.found.append(repair)
            found_keys.append(keys)
            return repair
        return None

    def __iter__(self):
        return self

    def __next__(self) -> Transformation:
        repair = self.next_repair()
        if repair is None:
            raise StopIteration
        return repair


def next_prime_repair(stream: RepairStream) -> Optional[Transformation]:
    """Functional alias for RepairStream.next_repair."""
    return stream.next_repair()


def enumerate_prime_repairs(
    spec: Spec,
    structure: Any,
    pool: Iterable[Endomorphism],
    config: SearchConfig | None = None,
) -> list[Transformation]:
    """Collect the stream's prime repairs in yield order."""
    return list(RepairStream(spec, structure, pool, config))


ORACLE_POOL_LIMIT = 20
_ORACLE_CANDIDATE_LIMIT = 2**ORACLE_POOL_LIMIT


def _binomial_sum(n: int, k: int) -> int:
    total = 0
    term = 1
    for i in range(min(k, n) + 1):
        total += term
        term = term * (n - i) // (i + 1)
    return total


def oracle_prime_repairs(
    spec: Spec,
    structure: Any,
    pool: Iterable[Endomorphism],
    max_cardinality: Optional[int] = None,
) -> set[Transformation]:
    """Brute-force ground truth: the literal definitions, no shortcuts.

    Enumerates every subset of the pool (up to max_cardinality when given),
    keeps the well-defined ones whose application satisfies the predicate,
    and filters to the inclusion-minimal antichain.  Intended as a test
    oracle only; refuses unbounded pools past ORACLE_POOL_LIMIT, and
    cardinality-capped runs whose candidate count is past 2^ORACLE_POOL_LIMIT.
    """
    deduped: dict[str, Endomorphism] = {}
    for endo in pool:
        deduped.setdefault(endo.key, endo)
    members = [deduped[k] for k in sorted(deduped)]
    if max_cardinality is None:
        if len(members) > ORACLE_POOL_LIMIT:
            raise PoolTooLargeError(
                f"oracle refuses pools over {ORACLE_POOL_LIMIT} endomorphisms "
                f"(got {len(members)})"
            )
    elif _binomial_sum(len(members), max_cardinality) > _ORACLE_CANDIDATE_LIMIT:
        raise PoolTooLargeError(
            f"oracle refuses {_binomial_sum(len(members), max_cardinality)} "
            f"candidate subsets (limit {_ORACLE_CANDIDATE_LIMIT})"
        )
    limit = len(members)
    if max_cardinality is not None:
        limit = min(limit, max_cardinality)
    satisfying: list[Transformation] = []
    for size in range(limit + 1):
        for combo in itertools.combinations(members, size):
            if not _disjoint_footprints(combo):
                continue
            patched = structure
            for endo in combo:
                patched = endo.apply(patched)
            if spec(patched):
                satisfying.append(Transformation._from_sorted(combo))
    # Minimal antichain.  Any non-minimal repair contains a minimal one, so
    # checking against the minimal set collected in size order suffices.
    minimal: list[Transformation] = []
    for t in satisfying:  # already in non-decreasing size order
        if not any(m.keys <= t.keys for m in minimal):
            minimal.append(t)
    return set(minimal)
