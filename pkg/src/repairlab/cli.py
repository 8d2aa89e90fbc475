"""Command-line front end: check a structure, enumerate repairs, or diff
against the brute-force oracle.

One binary covers all three instance kinds.  The kind is inferred from the
instance file's shape (a snapshot has "root", a first-order instance has
"sorts" and "functions", a propositional one has "valuation") and can be
forced with --kind.  Exit codes: 0 satisfied / repairs found, 1 violated /
none found, 2 usage, parse, or schema errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

from . import fol, layout, proplogic
from .core import REASON_COMPLETE, RepairStream, SearchConfig
from .errors import RepairLabError, SchemaError
from .reporting import RepairReport, instance_digest

# Unbounded enumeration visits 2^|pool| subsets; past ~2^20 that stops
# being interactive, so larger pools need --force or an explicit cap raise.
DEFAULT_POOL_CAP = 20
POOL_CAP_ENV = "REPAIRLAB_POOL_CAP"

LAYOUT_POOLS = ("point", "displace-h", "displace-v", "resize")
FOL_POOLS = ("point", "colour", "edge")
PROP_POOLS = ("point",)


class CliError(RepairLabError):
    """Usage-level error: bad flag combination for the instance kind."""


@dataclass
class LoadedInstance:
    kind: str
    digest: str
    structure: Any  # Valuation | Interpretation (layout keeps the snapshot too)
    satisfies: Any  # callable structure -> bool
    snapshot: Optional[layout.DomSnapshot] = None
    layout_spec: Optional[layout.LayoutSpec] = None


def _read(path: str) -> bytes:
    return Path(path).read_bytes()


def _infer_kind(data: Any) -> str:
    if isinstance(data, dict):
        if "root" in data:
            return "layout"
        if "sorts" in data and "functions" in data:
            return "fol"
        if "valuation" in data:
            return "prop"
    raise SchemaError(
        "cannot infer instance kind: expected a snapshot ('root'), a "
        "first-order instance ('sorts'/'functions'), or a propositional "
        "instance ('valuation'); use --kind to override"
    )


def load_inputs(args: argparse.Namespace) -> LoadedInstance:
    instance_bytes = _read(args.instance)
    spec_bytes = _read(args.spec) if args.spec else b""
    digest = instance_digest(instance_bytes, spec_bytes)
    try:
        data = json.loads(instance_bytes)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"instance is not valid JSON: {exc}")
    kind = args.kind or _infer_kind(data)

    if kind == "prop":
        raw = data.get("valuation")
        if not isinstance(raw, dict) or not all(isinstance(v, bool) for v in raw.values()):
            raise SchemaError("'valuation' must map variable names to booleans")
        valuation = proplogic.Valuation(raw)
        if args.spec:
            formula = proplogic.parse_prop(spec_bytes.decode("utf-8"))
        elif isinstance(data.get("formula"), str):
            formula = proplogic.parse_prop(data["formula"])
        else:
            raise CliError("no formula: pass --spec or put 'formula' in the instance")
        return LoadedInstance(
            kind, digest, valuation, lambda s: proplogic.eval_prop(formula, s)
        )

    if kind == "fol":
        interp, formula = fol.load_instance(data)
        if args.spec:
            formula = fol.parse_fol(spec_bytes.decode("utf-8"))
        if formula is None:
            raise CliError("no formula: pass --spec or put 'formula' in the instance")
        return LoadedInstance(
            kind, digest, interp, lambda s: fol.eval_fol(formula, s)
        )

    if kind == "layout":
        if not args.spec:
            raise CliError("layout instances need --spec pointing at a .cp file")
        snapshot = layout.ingest_snapshot(data)
        spec = layout.parse_spec(spec_bytes.decode("utf-8"))
        return LoadedInstance(
            kind,
            digest,
            None,
            None,
            snapshot=snapshot,
            layout_spec=spec,
        )

    raise CliError(f"unknown kind {kind!r}")


# --------------------------------------------------------------------------
# check


def _witness_json(forest: layout.Witness) -> list[dict]:
    return [
        {"element": node.element, "children": _witness_json(node.children)}
        for node in forest
    ]


def _witness_text(forest: layout.Witness, indent: int = 2) -> list[str]:
    lines = []
    for node in forest:
        lines.append(" " * indent + str(node.element))
        lines.extend(_witness_text(node.children, indent + 2))
    return lines


def cmd_check(args: argparse.Namespace) -> int:
    loaded = load_inputs(args)
    if loaded.kind == "layout":
        verdict = layout.omega(loaded.snapshot, loaded.layout_spec)
        satisfied = verdict.value is layout.TruthValue.TRUE
        if args.format == "json":
            payload = {
                "kind": loaded.kind,
                "value": verdict.value.value,
                "witness_true": _witness_json(verdict.w_true),
                "witness_false": _witness_json(verdict.w_false),
            }
            print(json.dumps(payload, sort_keys=True, indent=2))
        else:
            print(f"verdict: {verdict.value.value}")
            authoritative = verdict.w_true if satisfied else verdict.w_false
            label = "truth witness" if satisfied else "falsehood witness"
            for i, tree in enumerate(authoritative, 1):
                print(f"{label} {i}:")
                print("\n".join(_witness_text((tree,))))
        return 0 if satisfied else 1
    satisfied = loaded.satisfies(loaded.structure)
    if args.format == "json":
        print(json.dumps({"kind": loaded.kind, "value": "true" if satisfied else "false"},
                         sort_keys=True, indent=2))
    else:
        print(f"verdict: {'true' if satisfied else 'false'}")
    return 0 if satisfied else 1


# --------------------------------------------------------------------------
# pool assembly


def _fol_colour_pool(interp: fol.Interpretation) -> list[fol.MacroEndomorphism]:
    unary = [
        fn for fn in interp.functions.values()
        if fn.image == fol.BOOL_IMAGE and len(fn.arg_sorts) == 1
    ]
    sorts = {fn.arg_sorts[0] for fn in unary}
    if len(unary) != 3 or len(sorts) != 1:
        raise CliError(
            "--pool colour needs exactly three unary predicates over one "
            f"sort (found {sorted(fn.name for fn in unary)})"
        )
    names = sorted(fn.name for fn in unary)
    return fol.colour_change_pool(interp.sorts[unary[0].arg_sorts[0]], names)


def _fol_edge_pool(interp: fol.Interpretation) -> list[fol.MacroEndomorphism]:
    binary = [
        fn for fn in interp.functions.values()
        if fn.image == fol.BOOL_IMAGE
        and len(fn.arg_sorts) == 2
        and fn.arg_sorts[0] == fn.arg_sorts[1]
    ]
    if len(binary) != 1:
        raise CliError(
            "--pool edge needs exactly one binary predicate over a single "
            f"sort (found {sorted(fn.name for fn in binary)})"
        )
    adjacency = binary[0]
    return fol.edge_change_pool(interp.sorts[adjacency.arg_sorts[0]], adjacency.name)


def _build_pool_and_structure(args: argparse.Namespace, loaded: LoadedInstance):
    """Returns (pool, structure, satisfies) ready for enumeration."""
    pools = args.pool or ["point"]
    if loaded.kind == "prop":
        bad = [p for p in pools if p not in PROP_POOLS]
        if bad:
            raise CliError(f"pools {bad} are not valid for propositional instances")
        pool = proplogic.prop_endo_pool(loaded.structure.variables)
        return pool, loaded.structure, loaded.satisfies

    if loaded.kind == "fol":
        bad = [p for p in pools if p not in FOL_POOLS]
        if bad:
            raise CliError(f"pools {bad} are not valid for first-order instances")
        interp = loaded.structure
        pool: list = []
        for name in pools:
            if name == "point":
                pool.extend(fol.fol_endo_pool(interp))
            elif name == "colour":
                pool.extend(_fol_colour_pool(interp))
            elif name == "edge":
                pool.extend(_fol_edge_pool(interp))
        return pool, interp, loaded.satisfies

    # layout
    bad = [p for p in pools if p not in LAYOUT_POOLS]
    if bad:
        raise CliError(f"pools {bad} are not valid for layout instances")
    snapshot, spec = loaded.snapshot, loaded.layout_spec
    selectors: dict[str, layout.Selector] = {}
    layout._collect_selectors(spec, selectors)
    seen: set[str] = set()
    elements: list[layout.ElementNode] = []
    for sel in selectors.values():
        for node in layout.select(snapshot, sel):
            if node.elem_id not in seen:
                seen.add(node.elem_id)
                elements.append(node)
    elements.sort(key=lambda n: [int(p) for p in n.elem_id.split(".")])
    policy = args.values
    pool = []
    for name in pools:
        if name == "displace-h":
            pool.extend(
                layout.displacement_pool(
                    snapshot, elements, "h", layout.candidate_values(snapshot, "h", policy)
                )
            )
        elif name == "displace-v":
            pool.extend(
                layout.displacement_pool(
                    snapshot, elements, "v", layout.candidate_values(snapshot, "v", policy)
                )
            )
        elif name == "resize":
            pool.extend(
                layout.resize_pool(
                    snapshot, elements, "h", layout.candidate_sizes(snapshot, "h", policy)
                )
            )
            pool.extend(
                layout.resize_pool(
                    snapshot, elements, "v", layout.candidate_sizes(snapshot, "v", policy)
                )
            )
        elif name == "point":
            pool.extend(
                layout.point_pool(
                    snapshot,
                    elements,
                    layout.candidate_values(snapshot, "h", policy),
                    layout.candidate_values(snapshot, "v", policy),
                )
            )
    written = [
        value for endo in pool for _, value in endo.writes if isinstance(value, int)
    ]
    interp, formula = layout.to_interpretation(snapshot, spec, extra_values=written)
    return pool, interp, lambda s: fol.eval_fol(formula, s)


def _pool_cap() -> int:
    raw = os.environ.get(POOL_CAP_ENV)
    if raw is None:
        return DEFAULT_POOL_CAP
    try:
        cap = int(raw)
    except ValueError:
        raise CliError(f"{POOL_CAP_ENV} must be an integer, got {raw!r}")
    if cap < 1:
        raise CliError(f"{POOL_CAP_ENV} must be positive")
    return cap


def _emit_report(report: RepairReport, fmt: str) -> int:
    if fmt == "json":
        sys.stdout.write(report.to_json())
    else:
        sys.stdout.write(report.to_text())
    return 0 if report.repairs else 1


def cmd_repair(args: argparse.Namespace) -> int:
    loaded = load_inputs(args)
    pool, structure, satisfies = _build_pool_and_structure(args, loaded)
    cap = _pool_cap()
    if len(pool) > cap and not args.force:
        raise CliError(
            f"pool has {len(pool)} endomorphisms, over the safety cap {cap}; "
            f"re-run with --force or raise {POOL_CAP_ENV}"
        )
    config = SearchConfig(max_cardinality=args.max_card, max_repairs=args.max_count)
    stream = RepairStream(satisfies, structure, pool, config)
    repairs = list(stream)
    report = RepairReport.build(
        kind=loaded.kind,
        digest=loaded.digest,
        structure=structure,
        repairs=repairs,
        exhausted=stream.exhausted,
        reason=stream.reason or REASON_COMPLETE,
    )
    return _emit_report(report, args.format)


def cmd_oracle(args: argparse.Namespace) -> int:
    from .core import oracle_prime_repairs

    loaded = load_inputs(args)
    pool, structure, satisfies = _build_pool_and_structure(args, loaded)
    found = oracle_prime_repairs(satisfies, structure, pool)
    ordered = sorted(found, key=lambda t: (len(t), tuple(e.key for e in t.members)))
    report = RepairReport.build(
        kind=loaded.kind,
        digest=loaded.digest,
        structure=structure,
        repairs=ordered,
        exhausted=True,
        reason=REASON_COMPLETE,
    )
    return _emit_report(report, args.format)


# --------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="repairlab",
        description="Check structures against declarative specs and "
        "enumerate prime repairs for the violations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--spec", help="spec file (.cp layout DSL or a formula in text syntax)")
        p.add_argument(
            "--instance",
            "--snapshot",
            dest="instance",
            required=True,
            help="instance file: snapshot JSON, first-order instance JSON, or propositional JSON",
        )
        p.add_argument("--kind", choices=["prop", "fol", "layout"], help="override kind inference")
        p.add_argument("--format", choices=["text", "json"], default="text")

    p_check = sub.add_parser("check", help="evaluate the spec; report verdict and witnesses")
    common(p_check)
    p_check.set_defaults(func=cmd_check)

    def pool_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument(
            "--pool",
            action="append",
            choices=sorted(set(PROP_POOLS + FOL_POOLS + LAYOUT_POOLS)),
            help="endomorphism pool(s); repeatable; default: point",
        )
        p.add_argument(
            "--values",
            default="observed",
            help="layout candidate values: observed | grid:<step> | list:<v1,v2,...>",
        )

    p_repair = sub.add_parser("repair", help="stream prime repairs in cardinality order")
    common(p_repair)
    pool_flags(p_repair)
    p_repair.add_argument("--max-card", type=int, default=None, help="largest repair cardinality")
    p_repair.add_argument("--max-count", type=int, default=None, help="stop after this many repairs")
    p_repair.add_argument("--force", action="store_true", help="ignore the pool safety cap")
    p_repair.set_defaults(func=cmd_repair)

    p_oracle = sub.add_parser(
        "oracle", help="brute-force ground truth over every pool subset (small pools only)"
    )
    common(p_oracle)
    pool_flags(p_oracle)
    p_oracle.set_defaults(func=cmd_oracle)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except RepairLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
