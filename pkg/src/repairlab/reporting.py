"""Machine-readable repair reports (the CLI's JSON surface)."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Any

from .core import Transformation
from .errors import SchemaError


def instance_digest(*parts: bytes) -> str:
    """Stable content hash identifying the checked instance (and spec)."""
    h = hashlib.sha256()
    for part in parts:
        h.update(part)
        h.update(b"\x00")
    return h.hexdigest()


def _describe_endo(endo, structure) -> dict[str, Any]:
    changes = []
    for cell, new_value in endo.writes:
        if isinstance(cell, tuple) and len(cell) == 2 and isinstance(cell[1], tuple):
            function, args = cell
        else:
            function, args = cell, ()
        changes.append(
            {
                "function": function,
                "args": list(args),
                "old": structure.cell_value(cell),
                "new": new_value,
            }
        )
    return {"key": endo.key, "changes": changes}


@dataclass
class RepairReport:
    """Round-trippable record of one enumeration run.

    Repairs appear in yield order; each carries its cardinality and the
    ordered per-endomorphism value diffs (old -> new) against the original
    structure.
    """

    digest: str
    kind: str
    repairs: list[dict[str, Any]] = field(default_factory=list)
    exhausted: bool = True
    reason: str = "complete"

    @classmethod
    def build(
        cls,
        kind: str,
        digest: str,
        structure: Any,
        repairs: list[Transformation],
        exhausted: bool,
        reason: str,
    ) -> "RepairReport":
        entries = []
        for repair in repairs:
            entries.append(
                {
                    "cardinality": len(repair),
                    "endomorphisms": [
                        _describe_endo(endo, structure) for endo in repair
                    ],
                }
            )
        return cls(digest=digest, kind=kind, repairs=entries, exhausted=exhausted, reason=reason)

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "digest": self.digest,
            "kind": self.kind,
            "repairs": self.repairs,
            "exhausted": self.exhausted,
            "reason": self.reason,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str | bytes) -> "RepairReport":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"not a valid report: {exc}") from None
        required = {"digest", "kind", "repairs", "exhausted", "reason"}
        if not isinstance(data, dict) or not required <= set(data):
            raise SchemaError(f"report is missing fields {sorted(required - set(data or {}))}")
        return cls(
            digest=data["digest"],
            kind=data["kind"],
            repairs=data["repairs"],
            exhausted=data["exhausted"],
            reason=data["reason"],
        )

    def to_text(self) -> str:
        lines = [f"instance {self.digest[:12]} ({self.kind})"]
        if not self.repairs:
            lines.append("no repairs found")
        for i, repair in enumerate(self.repairs, 1):
            lines.append(f"repair {i} (cardinality {repair['cardinality']}):")
            for endo in repair["endomorphisms"]:
                for change in endo["changes"]:
                    args = ",".join(str(a) for a in change["args"])
                    target = f"{change['function']}({args})" if args else str(change["function"])
                    lines.append(f"  {target}: {change['old']} -> {change['new']}")
        lines.append(f"enumeration: {self.reason}" + ("" if self.exhausted else " (stopped early)"))
        return "\n".join(lines) + "\n"
