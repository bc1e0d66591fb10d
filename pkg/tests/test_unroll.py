import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scgadjust import (
    MicroQuery,
    QueryError,
    TemplateCapExceeded,
    TemplateError,
    d_separated,
    d_separated_bruteforce,
    densest_templates,
    enumerate_compatible_templates,
    instantiate,
    macro_projection,
    make_template,
    possible_descendants,
    possible_descendants_bruteforce,
    unroll,
    validate_scg,
)
from scgadjust.graph import on_any_cycle
from scgadjust.oracle import CorpusConfig, random_scg
from scgadjust.unroll import count_compatible_templates, count_densest_templates, sort_temporal

from .conftest import small_scgs, tv, zset


class TestQuery:
    def test_rejects_self_effect(self):
        with pytest.raises(QueryError, match="self-effects"):
            MicroQuery("X", "X", 0, 1)

    def test_rejects_bad_lags(self):
        with pytest.raises(QueryError):
            MicroQuery("X", "Y", -1, 1)
        with pytest.raises(QueryError):
            MicroQuery("X", "Y", 0, 0)

    def test_window_floor(self):
        assert MicroQuery("X", "Y", 1, 2).window_floor == -3


class TestTemplateInvariants:
    def test_self_loop_lag_zero_rejected(self, single_edge):
        g = validate_scg(["X", "Y"], [("X", "Y"), ("X", "X")])
        with pytest.raises(TemplateError, match="outside"):
            make_template(g, 1, {("X", "Y"): {0}, ("X", "X"): {0, 1}})

    def test_opposing_instantaneous_rejected(self):
        g = validate_scg(["X", "Y"], [("X", "Y"), ("Y", "X")])
        with pytest.raises(TemplateError, match="cycle"):
            make_template(g, 1, {("X", "Y"): {0}, ("Y", "X"): {0}})

    def test_missing_edge_rejected(self, single_edge):
        with pytest.raises(TemplateError, match="cover"):
            make_template(single_edge, 1, {})

    def test_empty_lag_set_rejected(self, single_edge):
        with pytest.raises(TemplateError, match="empty"):
            make_template(single_edge, 1, {("X", "Y"): set()})


class TestEnumeration:
    def test_single_edge(self, single_edge):
        templates = enumerate_compatible_templates(single_edge, 1, cap=10)
        lag_sets = [dict(t.lag_entries)[("X", "Y")] for t in templates]
        assert lag_sets == [(0,), (1,), (0, 1)]

    def test_single_self_loop(self):
        g = validate_scg(["X"], [("X", "X")])
        templates = enumerate_compatible_templates(g, 1, cap=10)
        assert len(templates) == 1
        assert dict(templates[0].lag_entries)[("X", "X")] == (1,)

    def test_feedback_pair_count(self, cycle_pair_confounded):
        assert count_compatible_templates(cycle_pair_confounded, 1, 1000) == 45

    def test_over_cap_signal(self, cycle_pair_confounded):
        with pytest.raises(TemplateCapExceeded) as exc:
            enumerate_compatible_templates(cycle_pair_confounded, 1, cap=10)
        assert exc.value.cap == 10
        assert exc.value.partial_count == 11

    def test_deterministic(self, cycle_pair_confounded):
        a = enumerate_compatible_templates(cycle_pair_confounded, 1, cap=50)
        b = enumerate_compatible_templates(cycle_pair_confounded, 1, cap=50)
        assert a == b

    @given(small_scgs(max_nodes=4), st.integers(min_value=1, max_value=2))
    @settings(max_examples=40)
    def test_count_formula_on_cycle_free_graphs(self, g, gamma_max):
        # Independent lag choices when the non-self subgraph is acyclic:
        # (2^(gmax+1)-1)^m * (2^gmax-1)^k.
        from scgadjust import scc_partition

        if any(len(comp) > 1 for comp in scc_partition(g).components):
            return
        non_self = [e for e in g.edges if e[0] != e[1]]
        m, k = len(non_self), len(g.edges) - len(non_self)
        expected = (2 ** (gamma_max + 1) - 1) ** m * (2**gamma_max - 1) ** k
        assert count_compatible_templates(g, gamma_max, expected + 1) == expected


class TestDensest:
    def test_persistence_chain_single(self, persistence_chain):
        assert len(densest_templates(persistence_chain, 1)) == 1
        assert count_densest_templates(persistence_chain) == 1

    def test_feedback_pair_two(self, cycle_pair_confounded):
        templates = densest_templates(cycle_pair_confounded, 1)
        assert len(templates) == 2
        zero_choices = {
            frozenset(e for e, ls in t.lag_entries if 0 in ls and e[0] in ("X", "Y"))
            for t in templates
        }
        assert zero_choices == {frozenset({("X", "Y")}), frozenset({("Y", "X")})}

    def test_edgeless(self):
        g = validate_scg(["A", "B"], [])
        templates = densest_templates(g, 1)
        assert len(templates) == 1
        assert templates[0].lag_entries == ()

    @given(small_scgs(max_nodes=4))
    @settings(max_examples=30)
    def test_every_template_within_some_densest(self, g):
        total = count_compatible_templates(g, 1, 300)
        if total > 300:
            return
        dense = [t.lags for t in densest_templates(g, 1)]
        for t in enumerate_compatible_templates(g, 1, cap=300):
            lags = t.lags
            assert any(
                all(lags[e] <= d[e] for e in lags) for d in dense
            ), "template not dominated by any densest template"


class TestUnroll:
    def test_persistence_template_edges(self, persistence_template):
        u = unroll(persistence_template, -2, 0)
        expected = {
            (tv("W", -2), tv("X", -2)), (tv("W", -2), tv("X", -1)),
            (tv("W", -1), tv("X", -1)), (tv("W", -1), tv("X", 0)),
            (tv("W", 0), tv("X", 0)),
            (tv("X", -2), tv("Y", -2)), (tv("X", -2), tv("Y", -1)),
            (tv("X", -1), tv("Y", -1)), (tv("X", -1), tv("Y", 0)),
            (tv("X", 0), tv("Y", 0)),
            (tv("X", -2), tv("X", -1)), (tv("X", -1), tv("X", 0)),
            (tv("W", -2), tv("W", -1)), (tv("W", -1), tv("W", 0)),
        }
        assert u.edges == frozenset(expected)

    def test_empty_template(self):
        g = validate_scg(["A", "B"], [])
        u = unroll(densest_templates(g, 1)[0], -1, 0)
        assert len(u.nodes) == 4
        assert not u.edges

    def test_width_one_window(self, persistence_template):
        u = unroll(persistence_template, 0, 0)
        assert u.edges == frozenset({(tv("W", 0), tv("X", 0)), (tv("X", 0), tv("Y", 0))})

    @given(small_scgs(max_nodes=4))
    @settings(max_examples=30)
    def test_unrolled_graphs_acyclic(self, g):
        for t in densest_templates(g, 1)[:5]:
            u = unroll(t, -3, 1)
            # Kahn's algorithm must consume every node.
            indeg = {v: len(u.parents[v]) for v in u.nodes}
            queue = [v for v in u.nodes if indeg[v] == 0]
            seen = 0
            while queue:
                v = queue.pop()
                seen += 1
                for w in u.children[v]:
                    indeg[w] -= 1
                    if indeg[w] == 0:
                        queue.append(w)
            assert seen == len(u.nodes)


class TestMacroProjection:
    def test_round_trip_all_templates(self, cycle_pair_confounded):
        for t in enumerate_compatible_templates(cycle_pair_confounded, 1, cap=50):
            assert macro_projection(t) == cycle_pair_confounded

    def test_dense_round_trip(self, persistence_template, persistence_chain):
        assert macro_projection(persistence_template) == persistence_chain


class TestDSeparation:
    def test_blocked_chain(self):
        g = validate_scg(["A", "B", "C"], [("A", "B"), ("B", "C")])
        u = unroll(densest_templates(g, 1)[0], 0, 0)
        assert d_separated(u, [tv("A", 0)], [tv("C", 0)], [tv("B", 0)])
        assert not d_separated(u, [tv("A", 0)], [tv("C", 0)], [])

    def test_collider(self):
        g = validate_scg(["A", "B", "C"], [("A", "B"), ("C", "B")])
        u = unroll(densest_templates(g, 1)[0], 0, 0)
        assert d_separated(u, [tv("A", 0)], [tv("C", 0)], [])
        assert not d_separated(u, [tv("A", 0)], [tv("C", 0)], [tv("B", 0)])

    def test_active_fork_in_dense_unrolling(self, persistence_template):
        u = unroll(persistence_template, -2, 0)
        assert not d_separated(u, [tv("X", -1)], [tv("Y", 0)], [])

    def test_requires_disjoint(self, persistence_template):
        u = unroll(persistence_template, -2, 0)
        with pytest.raises(ValueError, match="disjoint"):
            d_separated(u, [tv("X", 0)], [tv("Y", 0)], [tv("X", 0)])

    def test_outside_window(self, persistence_template):
        u = unroll(persistence_template, -2, 0)
        with pytest.raises(Exception, match="outside window"):
            d_separated(u, [tv("X", -9)], [tv("Y", 0)], [])

    @given(small_scgs(max_nodes=3), st.data())
    @settings(max_examples=60)
    def test_matches_path_enumeration_oracle(self, g, data):
        t = densest_templates(g, 1)[0]
        u = unroll(t, -1, 0)
        nodes = sorted(u.nodes)
        a = data.draw(st.sampled_from(nodes))
        b = data.draw(st.sampled_from([v for v in nodes if v != a]))
        rest = [v for v in nodes if v not in (a, b)]
        z = data.draw(st.frozensets(st.sampled_from(rest))) if rest else frozenset()
        assert d_separated(u, [a], [b], z) == d_separated_bruteforce(u, [a], [b], z)

    @given(small_scgs(max_nodes=3), st.data())
    @settings(max_examples=30)
    def test_symmetric(self, g, data):
        t = densest_templates(g, 1)[0]
        u = unroll(t, -1, 0)
        nodes = sorted(u.nodes)
        a = data.draw(st.sampled_from(nodes))
        b = data.draw(st.sampled_from([v for v in nodes if v != a]))
        assert d_separated(u, [a], [b], []) == d_separated(u, [b], [a], [])


class TestPossibleDescendants:
    def test_persistence_chain_golden(self, persistence_chain):
        got = possible_descendants(persistence_chain, "X", -1, (-2, 0), 1)
        assert got == zset(("X", -1), ("X", 0), ("Y", -1), ("Y", 0))

    def test_sink_identity(self, persistence_chain):
        assert possible_descendants(persistence_chain, "Y", -1, (-2, 0), 1) == zset(("Y", -1))

    def test_single_edge_same_slice(self, single_edge):
        got = possible_descendants(single_edge, "X", 0, (-1, 0), 1)
        assert got == zset(("X", 0), ("Y", 0))

    def test_bruteforce_edgeless(self):
        g = validate_scg(["A", "B"], [])
        assert possible_descendants_bruteforce(g, "A", 0, (-1, 0), 1) == zset(("A", 0))

    def test_bruteforce_self_loop_chain(self):
        g = validate_scg(["A"], [("A", "A")])
        got = possible_descendants_bruteforce(g, "A", -1, (-1, 0), 1)
        assert got == zset(("A", -1), ("A", 0))

    def test_next_slice_membership_needs_cycle(self, persistence_chain):
        # v@offset+1 is a possible descendant of v@offset exactly when v cycles.
        for v in persistence_chain.nodes:
            got = possible_descendants(persistence_chain, v, -1, (-1, 0), 1)
            assert (tv(v, 0) in got) == on_any_cycle(persistence_chain, v)

    @pytest.mark.parametrize("index", range(25))
    def test_matches_bruteforce_on_random_graphs(self, index):
        cfg = CorpusConfig(n_graphs=25, node_count_range=(2, 5), seed=31)
        g = random_scg(cfg, index)
        if count_compatible_templates(g, 1, 3000) > 3000:
            pytest.skip("template count above the brute-force budget")
        q_offset = -1
        fast = possible_descendants(g, g.nodes[0], q_offset, (-2, 0), 1)
        brute = possible_descendants_bruteforce(g, g.nodes[0], q_offset, (-2, 0), 1)
        assert fast == brute


class TestSerialization:
    def test_canonical_temporal_order(self, persistence_chain):
        vars_ = zset(("X", -2), ("W", 0), ("W", -1))
        assert sort_temporal(persistence_chain, vars_) == [tv("W", 0), tv("W", -1), tv("X", -2)]

    def test_instantiate(self):
        got = instantiate(["A"], -1, 0)
        assert got == zset(("A", -1), ("A", 0))

    def test_template_json_round_trip(self, persistence_template):
        from scgadjust.unroll import template_from_json

        again = template_from_json(persistence_template.to_json())
        assert again == persistence_template

    def test_query_json_round_trip(self):
        from scgadjust.unroll import query_from_json

        q = MicroQuery("X", "Y", 1, 2)
        assert query_from_json(q.to_json()) == q
