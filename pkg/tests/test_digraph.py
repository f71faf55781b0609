import pytest

from orderflow.digraph import (
    Subgraph,
    build,
    embedded_loops,
    export_dot,
    face_dimension,
    is_face_subgraph,
    strongly_connected_components,
    subgraph,
    subgraph_from_json,
    subgraph_to_json,
)
from orderflow.errors import CapExceeded, FormatError, NotFaceSubgraph
from orderflow.perms import HEAD, TAIL, perm, restrict


class TestBuild:
    @pytest.mark.parametrize("n,v,e", [(2, 2, 6), (3, 6, 24), (4, 24, 120)])
    def test_counts(self, n, v, e):
        G = build(n)
        assert G.vertex_count() == v and G.edge_count() == e
        assert len(list(G.vertices())) == v and len(list(G.edges())) == e

    def test_cap(self):
        with pytest.raises(CapExceeded):
            build(12)

    def test_endpoints_and_degrees_exhaustive(self):
        for n in range(1, 6):
            G = build(n)
            vertices = set(G.vertices())
            out_deg = {v: 0 for v in vertices}
            in_deg = {v: 0 for v in vertices}
            for e in G.edges():
                h, t = restrict(e, HEAD), restrict(e, TAIL)
                assert h in vertices and t in vertices
                out_deg[h] += 1
                in_deg[t] += 1
            assert set(out_deg.values()) == {n + 1}
            assert set(in_deg.values()) == {n + 1}


class TestFaceSubgraphs:
    def test_examples(self, G2_full, two_cycle):
        assert is_face_subgraph(two_cycle)
        assert not is_face_subgraph(subgraph(2, ["132"]))
        assert is_face_subgraph(G2_full)

    def test_scc_examples(self):
        comps = strongly_connected_components(subgraph(2, ["123", "321"]))
        assert len(comps) == 2
        assert all(len(c.vertices) == 1 and len(c.edges) == 1 for c in comps)

        comps = strongly_connected_components(subgraph(2, ["132", "213", "231", "312"]))
        assert len(comps) == 1
        assert comps[0].vertices == frozenset({perm("12"), perm("21")})

        comps = strongly_connected_components(subgraph(2, ["132"]))
        assert len(comps) == 2
        assert all(not c.edges for c in comps)

    def test_face_iff_union_of_embedded_loop_supports(self, G2_full):
        edges = sorted(G2_full.edges)
        for mask in range(1, 1 << 6):
            H = Subgraph(2, frozenset(e for k, e in enumerate(edges) if mask >> k & 1))
            loops = embedded_loops(H)
            covered = frozenset(e for loop in loops for e in loop)
            assert is_face_subgraph(H) == (covered == H.edges)


class TestEmbeddedLoops:
    def test_g2_has_six(self, G2_full):
        loops = embedded_loops(G2_full)
        assert len(loops) == 6
        supports = {frozenset(loop) for loop in loops}
        assert len(supports) == 6
        expected = {
            frozenset({perm("123")}),
            frozenset({perm("321")}),
            frozenset({perm("132"), perm("213")}),
            frozenset({perm("132"), perm("312")}),
            frozenset({perm("231"), perm("213")}),
            frozenset({perm("231"), perm("312")}),
        }
        assert supports == expected

    def test_small_cases(self, two_cycle):
        assert len(embedded_loops(two_cycle)) == 1
        assert embedded_loops(subgraph(2, ["123"])) == [(perm("123"),)]

    def test_canonical_rotation(self, two_cycle):
        (loop,) = embedded_loops(two_cycle)
        assert loop == min(loop[i:] + loop[:i] for i in range(len(loop)))

    def test_vertex_cap(self):
        G3 = build(3).full_subgraph()
        with pytest.raises(CapExceeded):
            embedded_loops(G3, vertex_cap=2)


class TestFaceDimension:
    def test_examples(self, G2_full):
        assert face_dimension(G2_full) == 4
        assert face_dimension(subgraph(2, ["123"])) == 0
        assert face_dimension(subgraph(2, ["123", "321"])) == 1

    def test_full_graphs_match_polytope_dimensions(self):
        assert face_dimension(build(3).full_subgraph()) == 18  # 24 - 6 + 1 - 1

    def test_rejects_non_face(self):
        with pytest.raises(NotFaceSubgraph):
            face_dimension(subgraph(2, ["132"]))


class TestSerialization:
    def test_dot(self, G2_full, two_cycle):
        text = export_dot(G2_full)
        assert text.count("->") == 6 and text.count(";") == 8  # 2 nodes + 6 arcs
        text = export_dot(two_cycle)
        assert text.count("->") == 2
        assert export_dot(Subgraph(2, frozenset())).count(";") == 0

    def test_json_round_trip(self, two_cycle):
        assert subgraph_from_json(subgraph_to_json(two_cycle)) == two_cycle

    def test_json_errors(self):
        with pytest.raises(FormatError):
            subgraph_from_json("not json")
        with pytest.raises(FormatError):
            subgraph_from_json('{"n": 2}')
