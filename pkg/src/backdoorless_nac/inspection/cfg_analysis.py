"""Reachability-based detectors over control-flow sidecars."""
from __future__ import annotations

import networkx as nx

from backdoorless_nac.domain.entities.inspection import ControlFlowGraph, Finding
from backdoorless_nac.inspection.errors import MalformedGraph


def validate_graph(cfg: ControlFlowGraph) -> str:
    """Check graph invariants and return the entry node id."""
    ids = [n.id for n in cfg.nodes]
    known = set(ids)
    if len(known) != len(ids):
        raise MalformedGraph("duplicate node ids")
    entries = [n.id for n in cfg.nodes if "entry" in n.labels]
    if len(entries) != 1:
        raise MalformedGraph(f"expected exactly one entry node, found {len(entries)}")
    for src, dst in cfg.edges:
        if src not in known or dst not in known:
            raise MalformedGraph(f"edge {src}->{dst} references an unknown node")
    for site in cfg.static_compares:
        if site.node not in known:
            raise MalformedGraph(f"static compare at unknown node {site.node}")
    return entries[0]


def to_digraph(cfg: ControlFlowGraph) -> nx.DiGraph:
    graph = nx.DiGraph()
    graph.add_nodes_from(n.id for n in cfg.nodes)
    graph.add_edges_from(sorted(cfg.edges))
    return graph


def reachable_from(
    graph: nx.DiGraph, start: str, removed: frozenset[str] = frozenset()
) -> set[str]:
    """Nodes reachable from `start` (inclusive) without entering `removed`."""
    if start in removed:
        return set()
    view = nx.restricted_view(graph, removed, []) if removed else graph
    return nx.descendants(view, start) | {start}


def detect_auth_bypass(cfg: ControlFlowGraph, component: str = "") -> tuple[float, list[Finding]]:
    entry = validate_graph(cfg)
    graph = to_digraph(cfg)
    auth = frozenset(n.id for n in cfg.nodes if "auth-check" in n.labels)
    if entry in auth:
        return 0.0, []
    open_graph = nx.restricted_view(graph, auth, [])
    reached = reachable_from(graph, entry, auth)

    findings = []
    for node in sorted(n.id for n in cfg.nodes if "privileged" in n.labels):
        if node not in reached:
            continue
        path = nx.shortest_path(open_graph, entry, node)
        findings.append(
            Finding(
                component=component,
                location=node,
                kind="auth-bypass",
                detail="privileged node reachable without authentication: " + " -> ".join(path),
                weight=1.0,
            )
        )
    return (1.0 if findings else 0.0), findings


def guarded_nodes(cfg: ControlFlowGraph, site: str, entry: str | None = None) -> set[str]:
    """Nodes reachable from `site` that the entry cannot reach once `site` is removed."""
    entry = entry or validate_graph(cfg)
    graph = to_digraph(cfg)
    behind = nx.descendants(graph, site) - {site}
    around = reachable_from(graph, entry, frozenset({site}))
    return behind - around


def score_static_compares(
    cfg: ControlFlowGraph, component: str = "", min_literal_length: int = 0
) -> tuple[float, list[Finding]]:
    entry = validate_graph(cfg)
    total = len(cfg.nodes)
    findings = []
    for site in sorted(cfg.static_compares, key=lambda s: (s.node, s.literal_hex)):
        if len(site.literal_hex) // 2 < min_literal_length:
            continue
        guarded = guarded_nodes(cfg, site.node, entry)
        weight = len(guarded) / total
        if weight <= 0.0:
            continue
        literal = site.literal_hex[:32] or "<empty>"
        findings.append(
            Finding(
                component=component,
                location=site.node,
                kind="static-compare",
                detail=(
                    f"comparison with static data {literal} exclusively guards "
                    f"{len(guarded)} node(s): {', '.join(sorted(guarded))}"
                ),
                weight=weight,
            )
        )
    score = max((f.weight for f in findings), default=0.0)
    return score, findings
