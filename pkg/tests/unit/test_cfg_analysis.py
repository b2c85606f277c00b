from __future__ import annotations

import random

import networkx as nx
import pytest

from backdoorless_nac.domain.entities.inspection import CfgNode, ControlFlowGraph, StaticCompare
from backdoorless_nac.inspection.cfg_analysis import (
    detect_auth_bypass,
    guarded_nodes,
    score_static_compares,
    validate_graph,
)
from backdoorless_nac.inspection.errors import MalformedGraph


def _cfg(nodes, edges, compares=()) -> ControlFlowGraph:
    return ControlFlowGraph(
        nodes=tuple(CfgNode(id=n, labels=frozenset(lbl)) for n, lbl in nodes.items()),
        edges=tuple(edges),
        static_compares=tuple(StaticCompare(node=n, literal_hex=lit) for n, lit in compares),
    )


def _simple_paths(graph: nx.DiGraph, start: str):
    yield [start]
    for target in graph:
        if target != start:
            yield from nx.all_simple_paths(graph, start, target)


def _random_cfg(rng: random.Random) -> ControlFlowGraph:
    n = rng.randint(1, 12)
    ids = [f"n{i}" for i in range(n)]
    entry = rng.choice(ids)
    nodes = {}
    for i in ids:
        labels = set()
        if i == entry:
            labels.add("entry")
        if rng.random() < 0.25:
            labels.add("auth-check")
        if rng.random() < 0.3:
            labels.add("privileged")
        nodes[i] = labels
    edges = [(rng.choice(ids), rng.choice(ids)) for _ in range(rng.randint(0, int(1.5 * n)))]
    compares = [
        (rng.choice(ids), rng.randbytes(rng.randint(0, 4)).hex())
        for _ in range(rng.randint(0, 3))
    ]
    return _cfg(nodes, edges, compares)


def _graph(cfg: ControlFlowGraph) -> nx.DiGraph:
    graph = nx.DiGraph()
    graph.add_nodes_from(n.id for n in cfg.nodes)
    graph.add_edges_from(cfg.edges)
    return graph


def test_guarded_privileged_node_is_clean(cfgs) -> None:
    score, findings = detect_auth_bypass(cfgs["clean"], "fw")
    assert score == 0.0
    assert findings == []


def test_direct_edge_around_auth_is_flagged(cfgs) -> None:
    score, findings = detect_auth_bypass(cfgs["backdoor"], "fw")
    assert score == 1.0
    assert [f.location for f in findings] == ["p"]
    assert findings[0].detail.endswith("e -> p")
    assert findings[0].component == "fw"


def test_cycles_terminate() -> None:
    cfg = _cfg(
        {"e": {"entry"}, "a": set(), "b": set(), "p": {"privileged"}},
        [("e", "a"), ("a", "b"), ("b", "a"), ("b", "e"), ("b", "p")],
    )
    score, findings = detect_auth_bypass(cfg)
    assert score == 1.0
    assert findings[0].detail.endswith("e -> a -> b -> p")


def test_static_compare_weight_is_guarded_fraction() -> None:
    # s exclusively guards 3 of 10 nodes
    nodes = {"e": {"entry"}, **{k: set() for k in "sxyzabcdf"}}
    edges = [("e", "s"), ("s", "x"), ("x", "y"), ("y", "z"), ("e", "a"), ("a", "b")]
    edges += [("b", "c"), ("c", "d"), ("d", "f")]
    score, findings = score_static_compares(_cfg(nodes, edges, [("s", "6869")]), "fw")
    assert score == pytest.approx(0.3)
    assert findings[0].location == "s"
    assert "x, y, z" in findings[0].detail


def test_bypassable_compare_guards_nothing() -> None:
    cfg = _cfg(
        {"e": {"entry"}, "s": set(), "x": set()},
        [("e", "s"), ("s", "x"), ("e", "x")],
        [("s", "ff")],
    )
    assert guarded_nodes(cfg, "s") == set()
    assert score_static_compares(cfg) == (0.0, [])


def test_short_literals_are_skipped() -> None:
    cfg = _cfg({"e": {"entry"}, "x": set()}, [("e", "x")], [("e", "ab")])
    assert score_static_compares(cfg, min_literal_length=2) == (0.0, [])
    score, _ = score_static_compares(cfg, min_literal_length=1)
    assert score == 0.5


def test_empty_literal_site_is_scored() -> None:
    cfg = _cfg({"e": {"entry"}, "x": set()}, [("e", "x")], [("e", "")])
    score, findings = score_static_compares(cfg, "fw")
    assert score == 0.5
    assert [f.location for f in findings] == ["e"]
    assert "<empty>" in findings[0].detail


@pytest.mark.parametrize(
    "nodes, edges, compares",
    [
        ({"a": set()}, [], []),
        ({"a": {"entry"}, "b": {"entry"}}, [], []),
        ({"a": {"entry"}}, [("a", "missing")], []),
        ({"a": {"entry"}}, [], [("missing", "00")]),
    ],
)
def test_malformed_graphs(nodes, edges, compares) -> None:
    with pytest.raises(MalformedGraph):
        validate_graph(_cfg(nodes, edges, compares))


def test_duplicate_node_ids_are_malformed() -> None:
    cfg = ControlFlowGraph(
        nodes=(CfgNode(id="a", labels=frozenset({"entry"})), CfgNode(id="a")), edges=()
    )
    with pytest.raises(MalformedGraph):
        detect_auth_bypass(cfg)


def test_auth_bypass_matches_simple_path_enumeration() -> None:
    rng = random.Random(99)
    for _ in range(500):
        cfg = _random_cfg(rng)
        graph = _graph(cfg)
        labels = {n.id: n.labels for n in cfg.nodes}
        entry = next(n.id for n in cfg.nodes if "entry" in n.labels)

        expected = set()
        for path in _simple_paths(graph, entry):
            if "privileged" in labels[path[-1]] and not any(
                "auth-check" in labels[v] for v in path
            ):
                expected.add(path[-1])

        score, findings = detect_auth_bypass(cfg)
        assert {f.location for f in findings} == expected
        assert score == (1.0 if expected else 0.0)
        for f in findings:
            witness = f.detail.split(": ", 1)[1].split(" -> ")
            assert witness[0] == entry and witness[-1] == f.location
            assert all(graph.has_edge(a, b) for a, b in zip(witness, witness[1:]))
            assert not any("auth-check" in labels[v] for v in witness)


def test_static_compare_matches_simple_path_enumeration() -> None:
    rng = random.Random(7)
    for _ in range(500):
        cfg = _random_cfg(rng)
        graph = _graph(cfg)
        entry = next(n.id for n in cfg.nodes if "entry" in n.labels)
        min_len = rng.randint(0, 2)
        from_entry = list(_simple_paths(graph, entry))

        expected = []
        for site in cfg.static_compares:
            if len(site.literal_hex) // 2 < min_len:
                continue
            c = site.node
            behind = {p[-1] for p in _simple_paths(graph, c)} - {c}
            around = {p[-1] for p in from_entry if c not in p}
            guarded = behind - around
            if guarded:
                expected.append((c, len(guarded) / len(cfg.nodes)))

        score, findings = score_static_compares(cfg, min_literal_length=min_len)
        assert sorted((f.location, f.weight) for f in findings) == sorted(expected)
        assert score == max((w for _, w in expected), default=0.0)
