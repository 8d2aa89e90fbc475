"""Finite first-order logic: evaluation, syntax, tables, pools, macros."""

from __future__ import annotations

import itertools
import json
import random
from pathlib import Path

import pytest

from repairlab import (
    IllDefinedTransformationError,
    ParseError,
    SchemaError,
    SortMismatchError,
    Transformation,
    UnboundVariableError,
    apply_transformation,
    enumerate_prime_repairs,
    non_noop_filter,
    oracle_prime_repairs,
)
from repairlab import fol
from repairlab.fol import (
    FunctionTable,
    Interpretation,
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

from genutil import random_fol_instance

FIXTURES = Path(__file__).parent / "fixtures"


def predicate(name: str, sort: Sort, true_cells, arity: int) -> FunctionTable:
    domain = itertools.product(*([sort.elements] * arity))
    return FunctionTable(
        name, (sort.name,) * arity, "bool", {args: args in true_cells for args in domain}
    )


@pytest.fixture
def partner():
    interp, formula = load_instance((FIXTURES / "partner.json").read_text())
    return interp, formula


class TestEval:
    def test_partner_example_violated(self, partner):
        interp, formula = partner
        assert eval_fol(formula, interp) is False

    def test_partner_fixed_by_single_update(self, partner):
        interp, formula = partner
        patched = apply_transformation(
            Transformation([PointUpdate("p", (2, 0), True)]), interp
        )
        assert eval_fol(formula, patched) is True

    def test_reflexivity_on_any_domain(self):
        for elements in [(), (0,), (0, 1, 2)]:
            sort = Sort("A", elements)
            interp = Interpretation({"A": sort}, {})
            assert eval_fol(parse_fol("forall x in A (x = x)"), interp) is True

    def test_empty_domain_quantifiers(self):
        interp = Interpretation({"A": Sort("A", ())}, {})
        assert eval_fol(parse_fol("forall x in A (x != x)"), interp) is True
        assert eval_fol(parse_fol("exists x in A (x = x)"), interp) is False

    def test_order_comparisons_follow_element_order(self):
        interp = Interpretation({"C": Sort("C", ("low", "mid", "high"))}, {})
        assert eval_fol(parse_fol("forall x in C (x <= high)"), interp) is True
        assert eval_fol(parse_fol("exists x in C (x < low)"), interp) is False

    def test_order_comparison_without_common_sort(self):
        interp = Interpretation(
            {"C": Sort("C", ("red",)), "D": Sort("D", ("blue",))}, {}
        )
        with pytest.raises(SortMismatchError):
            eval_fol(parse_fol("red < blue"), interp)

    def test_unbound_variable(self, partner):
        interp, _ = partner
        with pytest.raises(UnboundVariableError):
            eval_fol(parse_fol("p(x, y)"), interp)

    def test_non_boolean_atom_rejected(self):
        sort = Sort("A", (0, 1))
        table = FunctionTable("f", ("A",), "A", {(0,): 1, (1,): 0})
        interp = Interpretation({"A": sort}, {"f": table})
        with pytest.raises(SortMismatchError):
            eval_fol(parse_fol("forall x in A (f(x))"), interp)

    def test_quantifiers_match_explicit_expansion(self):
        rng = random.Random(4242)
        for _ in range(40):
            interp, formula = random_fol_instance(rng)
            sort = interp.sorts["A"]
            body_var = "y"
            name = next(iter(interp.functions))
            arity = len(interp.functions[name].arg_sorts)
            inner = fol.Holds(fol.TApp(name, (fol.TVar(body_var),) * arity))
            forall = fol.Forall(body_var, "A", inner)
            exists = fol.Exists(body_var, "A", inner)
            conj = True
            disj = False
            for el in sort.elements:
                value = eval_fol(inner, interp, {body_var: el})
                conj = conj and value
                disj = disj or value
            assert eval_fol(forall, interp) == conj
            assert eval_fol(exists, interp) == disj
            # Also check the randomly generated closed formula evaluates.
            assert eval_fol(formula, interp) in (True, False)


class TestParser:
    def test_dot_sugar(self):
        assert parse_fol("x.left = y.left") == fol.Cmp(
            "=",
            fol.TApp("left", (fol.TVar("x"),)),
            fol.TApp("left", (fol.TVar("y"),)),
        )

    def test_application_and_chaining(self):
        assert parse_fol("p(x, y)") == fol.Holds(
            fol.TApp("p", (fol.TVar("x"), fol.TVar("y")))
        )
        assert parse_fol("x.f.g = 3") == fol.Cmp(
            "=",
            fol.TApp("g", (fol.TApp("f", (fol.TVar("x"),)),)),
            fol.TConst(3),
        )

    def test_quantifier_body_extends_right(self):
        parsed = parse_fol("forall x in A exists y in A (x != y & p(x,y))")
        assert isinstance(parsed, fol.Forall)
        assert isinstance(parsed.body, fol.Exists)
        assert isinstance(parsed.body.body, fol.And)

    def test_connective_precedence(self):
        parsed = parse_fol("!p(x) & q(x) | r(x) -> s(x)")
        assert isinstance(parsed, fol.Implies)
        assert isinstance(parsed.left, fol.Or)
        assert isinstance(parsed.left.left, fol.And)
        assert isinstance(parsed.left.left.left, fol.Not)

    @pytest.mark.parametrize(
        "bad",
        ["", "forall x A (x = x)", "p(x", "x =", "forall in A (x = x)", "x ? y", "(x = y"],
    )
    def test_syntax_errors(self, bad):
        with pytest.raises(ParseError):
            parse_fol(bad)

    def test_error_carries_position(self):
        with pytest.raises(ParseError) as info:
            parse_fol("forall x in A (x ~ y)")
        assert info.value.line == 1
        assert info.value.column is not None


class TestTables:
    def test_totality_enforced(self):
        sort = Sort("A", (0, 1))
        with pytest.raises(SchemaError):
            Interpretation(
                {"A": sort},
                {"p": FunctionTable("p", ("A",), "bool", {(0,): True})},
            )

    def test_values_must_lie_in_image_sort(self):
        sort = Sort("A", (0, 1))
        with pytest.raises(SchemaError):
            Interpretation(
                {"A": sort},
                {"f": FunctionTable("f", ("A",), "A", {(0,): 7, (1,): 0})},
            )

    def test_open_image_sort_accepts_new_values(self):
        a = Sort("A", (0, 1))
        px = Sort("px", (10, 20), open=True)
        table = FunctionTable("f", ("A",), "px", {(0,): 10, (1,): 20})
        interp = Interpretation({"A": a, "px": px}, {"f": table})
        patched = interp.with_cell(("f", (0,)), 55)
        assert patched.value("f", (0,)) == 55

    def test_point_update_changes_exactly_one_cell(self, partner):
        interp, _ = partner
        update = PointUpdate("p", (2, 1), True)
        patched = update.apply(interp)
        for args in itertools.product((0, 1, 2), repeat=2):
            expected = True if args == (2, 1) else interp.value("p", args)
            assert patched.value("p", args) == expected


class TestPools:
    def test_unary_predicate_pool_size(self):
        sort = Sort("A", (0, 1))
        interp = Interpretation({"A": sort}, {"q": predicate("q", sort, set(), 1)})
        assert len(fol_endo_pool(interp)) == 4

    def test_partner_pool_size(self, partner):
        interp, _ = partner
        assert len(fol_endo_pool(interp)) == 18

    def test_name_filter(self, partner):
        interp, _ = partner
        assert fol_endo_pool(interp, functions=[]) == []

    def test_non_bool_image_enumerates_image_values(self):
        a = Sort("A", (0,))
        c = Sort("C", ("r", "g", "b"))
        interp = Interpretation(
            {"A": a, "C": c},
            {"f": FunctionTable("f", ("A",), "C", {(0,): "r"})},
        )
        assert {e.key for e in fol_endo_pool(interp)} == {
            "f(0):=r", "f(0):=g", "f(0):=b"
        }


class TestCommutation:
    def test_distinct_cells_commute_same_cell_does_not(self, partner):
        # Exhaustive over the partner pool: two distinct point updates
        # commute exactly when they address a different function or a
        # different argument tuple.
        interp, _ = partner
        pool = fol_endo_pool(interp)
        for first, second in itertools.combinations(pool, 2):
            one = second.apply(first.apply(interp))
            two = first.apply(second.apply(interp))
            same_cell = (first.function, first.args) == (second.function, second.args)
            if same_cell:
                assert one != two  # distinct keys on one cell write different values
            else:
                assert one == two


class TestMacros:
    def test_singleton_macro_equals_its_update(self, partner):
        interp, _ = partner
        update = PointUpdate("p", (2, 0), True)
        macro = macro_endo("single", [update])
        assert macro.apply(interp) == update.apply(interp)

    def test_empty_macro_is_identity(self, partner):
        interp, _ = partner
        assert macro_endo("noop", []).apply(interp) == interp

    def test_overlapping_members_rejected(self):
        with pytest.raises(IllDefinedTransformationError):
            macro_endo(
                "clash",
                [PointUpdate("p", (0, 0), True), PointUpdate("p", (0, 0), False)],
            )

    def test_colour_macro_contents(self):
        vertices = Sort("V", (1, 2, 3, 4, 5))
        pool = colour_change_pool(vertices, ["q1", "q2", "q3"])
        assert len(pool) == 15
        target = [m for m in pool if m.name == "colour(5):=q2"]
        assert len(target) == 1
        assert {u.key for u in target[0].members} == {
            "q1(5):=F", "q2(5):=T", "q3(5):=F"
        }

    def test_colour_pool_needs_three_predicates(self):
        with pytest.raises(ValueError):
            colour_change_pool(Sort("V", (1,)), ["q1", "q2"])

    def test_edge_macro_contents_and_count(self):
        vertices = Sort("V", (1, 2, 3))
        pool = edge_change_pool(vertices, "p")
        # 3 unordered off-diagonal pairs and 3 diagonal ones, times two values
        assert len(pool) == 12
        cut = [m for m in pool if m.name == "edge(1,2):=F"]
        assert {u.key for u in cut[0].members} == {"p(1,2):=F", "p(2,1):=F"}
        diagonal = [m for m in pool if m.name == "edge(2,2):=T"]
        assert {u.key for u in diagonal[0].members} == {"p(2,2):=T"}

    def test_colour_macros_preserve_exactly_one_colour(self):
        # Starting from valid colourings, every colour-change macro keeps
        # the one-colour-per-vertex constraint true.
        vertices = Sort("V", (1, 2, 3, 4))
        one_colour_each = parse_fol(
            "forall x in V ( (q1(x) & !q2(x) & !q3(x)) | (!q1(x) & q2(x) & !q3(x)) "
            "| (!q1(x) & !q2(x) & q3(x)) )"
        )
        rng = random.Random(5)
        pool = colour_change_pool(vertices, ["q1", "q2", "q3"])
        for _ in range(20):
            assignment = {x: rng.choice([1, 2, 3]) for x in vertices.elements}
            functions = {
                f"q{i}": FunctionTable(
                    f"q{i}", ("V",), "bool",
                    {(x,): assignment[x] == i for x in vertices.elements},
                )
                for i in (1, 2, 3)
            }
            interp = Interpretation({"V": vertices}, functions)
            assert eval_fol(one_colour_each, interp) is True
            for macro in pool:
                assert eval_fol(one_colour_each, macro.apply(interp)) is True

    def test_edge_macros_preserve_symmetry(self):
        # Starting from symmetric adjacency tables, every edge-change macro
        # keeps the relation symmetric.
        symmetry = parse_fol("forall x in V forall y in V ( p(x,y) -> p(y,x) )")
        rng = random.Random(6)
        for size in (2, 3, 4):
            vertices = Sort("V", tuple(range(1, size + 1)))
            pool = edge_change_pool(vertices, "p")
            for _ in range(10):
                table = {}
                for i, x in enumerate(vertices.elements):
                    for y in vertices.elements[i:]:
                        value = rng.random() < 0.5
                        table[(x, y)] = value
                        table[(y, x)] = value
                interp = Interpretation(
                    {"V": vertices},
                    {"p": FunctionTable("p", ("V", "V"), "bool", table)},
                )
                assert eval_fol(symmetry, interp) is True
                for macro in pool:
                    assert eval_fol(symmetry, macro.apply(interp)) is True


class TestLoader:
    def test_defaults_to_false_for_predicates(self):
        interp, _ = load_instance(
            json.dumps(
                {
                    "sorts": {"A": [0, 1]},
                    "functions": [
                        {"name": "q", "args": ["A"], "image": "bool", "table": [[0, True]]}
                    ],
                }
            )
        )
        assert interp.value("q", (0,)) is True
        assert interp.value("q", (1,)) is False

    def test_missing_rows_error_for_functions(self):
        with pytest.raises(SchemaError):
            load_instance(
                {
                    "sorts": {"A": [0, 1]},
                    "functions": [
                        {"name": "f", "args": ["A"], "image": "A", "table": [[0, 1]]}
                    ],
                }
            )

    def test_unknown_sort_rejected(self):
        with pytest.raises(SchemaError):
            load_instance({"sorts": {}, "functions": [{"name": "q", "args": ["A"], "table": []}]})

    def test_argument_outside_sort_rejected(self):
        with pytest.raises(SchemaError):
            load_instance(
                {
                    "sorts": {"A": [0, 1]},
                    "functions": [
                        {"name": "q", "args": ["A"], "table": [[5, True]]}
                    ],
                }
            )

    def test_duplicate_rows_rejected(self):
        with pytest.raises(SchemaError):
            load_instance(
                {
                    "sorts": {"A": [0]},
                    "functions": [
                        {"name": "q", "args": ["A"], "table": [[0, True], [0, False]]}
                    ],
                }
            )


class TestPartnerRepairs:
    def test_exactly_the_two_partner_singletons(self, partner):
        interp, formula = partner
        spec = lambda s: eval_fol(formula, s)
        repairs = enumerate_prime_repairs(spec, interp, fol_endo_pool(interp))
        assert repairs == [
            Transformation([PointUpdate("p", (2, 0), True)]),
            Transformation([PointUpdate("p", (2, 1), True)]),
        ]

    def test_directed_reading_regression(self):
        # Reading the partner table as directed cells (no symmetric closure)
        # leaves two vertices without partners; the true prime repairs are
        # then the four cardinality-2 pairings, not two singletons.
        sort = Sort("A", (0, 1, 2))
        interp = Interpretation(
            {"A": sort},
            {"p": predicate("p", sort, {(0, 0), (0, 1), (1, 1)}, 2)},
        )
        formula = parse_fol("forall x in A exists y in A (x != y & p(x,y))")
        spec = lambda s: eval_fol(formula, s)
        repairs = set(enumerate_prime_repairs(spec, interp, fol_endo_pool(interp)))
        assert repairs == {
            Transformation([PointUpdate("p", (1, 0), True), PointUpdate("p", (2, 0), True)]),
            Transformation([PointUpdate("p", (1, 0), True), PointUpdate("p", (2, 1), True)]),
            Transformation([PointUpdate("p", (1, 2), True), PointUpdate("p", (2, 0), True)]),
            Transformation([PointUpdate("p", (1, 2), True), PointUpdate("p", (2, 1), True)]),
        }
        assert repairs == oracle_prime_repairs(spec, interp, fol_endo_pool(interp))


def load_colouring():
    interp, formula = load_instance((FIXTURES / "colouring.json").read_text())
    spec = lambda s: eval_fol(formula, s)
    tc = colour_change_pool(interp.sorts["V"], ["q1", "q2", "q3"])
    te = edge_change_pool(interp.sorts["V"], "p")
    return interp, spec, tc, te


def reduced_colouring_pool(interp, tc, te):
    # Context restriction in the paper's style: drop macros that change
    # nothing, and allow only deletions of existing edges.
    keep = non_noop_filter(interp)
    return [m for m in tc if keep(m)] + [
        m for m in te if all(v is False for _, v in m.writes) and keep(m)
    ]


class TestColouringFixture:
    def test_fixture_violates_conjunction(self):
        interp, spec, _, _ = load_colouring()
        assert spec(interp) is False

    def test_reduced_pool_matches_frozen_expectation_and_oracle(self):
        interp, spec, tc, te = load_colouring()
        pool = reduced_colouring_pool(interp, tc, te)
        assert len(pool) == 15
        produced = enumerate_prime_repairs(spec, interp, pool)
        expected = json.loads((FIXTURES / "colouring_expected.json").read_text())
        assert [sorted(t.keys) for t in produced] == expected["reduced_pool"]
        assert set(produced) == oracle_prime_repairs(spec, interp, pool)
        assert all(spec(apply_transformation(t, interp)) for t in produced)

    def test_colour_change_and_edge_cut_repairs_present(self):
        interp, spec, tc, te = load_colouring()
        pool = reduced_colouring_pool(interp, tc, te)
        produced = enumerate_prime_repairs(spec, interp, pool)
        singles = {t.members[0].name for t in produced if len(t) == 1}
        assert "colour(5):=q2" in singles
        assert "colour(5):=q3" in singles
        assert "edge(4,5):=F" in singles
