"""Query decomposition into search primitives and left-deep join trees."""

from __future__ import annotations

from dataclasses import dataclass

from graphwatch.query import QueryGraph
from graphwatch.sjtree import SJTree, SJTreeNode
from graphwatch.stats import GraphStatistics, selectivity_score

DEFAULT_MAX_LEAF_SIZE = 2


class PlanningError(ValueError):
    pass


@dataclass(frozen=True)
class DecompositionPlan:
    """Ordered search primitives; leaf i is joined onto the union of leaves before it."""

    query_name: str
    leaves: tuple[frozenset[int], ...]
    scores: tuple[float, ...]
    max_leaf_size: int

    def covered_vertices(self, q: QueryGraph, upto: int) -> frozenset[str]:
        return q.vertices_of(i for leaf in self.leaves[:upto] for i in leaf)

    def check(self, q: QueryGraph) -> None:
        """Raise PlanningError unless the plan partitions ``q`` into connected, chained leaves."""
        seen: set[int] = set()
        for n, leaf in enumerate(self.leaves):
            if not leaf:
                raise PlanningError(f"leaf {n} is empty")
            if len(leaf) > self.max_leaf_size:
                raise PlanningError(f"leaf {n} has {len(leaf)} edges > {self.max_leaf_size}")
            if seen & leaf:
                raise PlanningError(f"leaf {n} overlaps earlier leaves")
            if not _connected(q, leaf):
                raise PlanningError(f"leaf {n} is not connected")
            if n > 0 and not (q.vertices_of(leaf) & self.covered_vertices(q, n)):
                raise PlanningError(f"leaf {n} shares no vertex with leaves before it")
            seen |= leaf
        if seen != set(range(len(q.edges))):
            raise PlanningError(f"leaves cover {sorted(seen)}, query has {len(q.edges)} edges")


def _connected(q: QueryGraph, qeids: frozenset[int]) -> bool:
    remaining = set(qeids)
    first = remaining.pop()
    frontier = {q.edges[first].source, q.edges[first].target}
    grew = True
    while remaining and grew:
        grew = False
        for i in list(remaining):
            e = q.edges[i]
            if e.source in frontier or e.target in frontier:
                frontier.update((e.source, e.target))
                remaining.discard(i)
                grew = True
    return not remaining


def connected_edge_sets(q: QueryGraph, available: set[int], max_size: int) -> set[frozenset[int]]:
    """All connected subsets of ``available`` with 1..max_size edges."""
    incident: dict[str, list[int]] = {}
    for i in available:
        e = q.edges[i]
        incident.setdefault(e.source, []).append(i)
        incident.setdefault(e.target, []).append(i)

    found: set[frozenset[int]] = set()
    layer = {frozenset([i]) for i in available}
    while layer:
        found |= layer
        grown: set[frozenset[int]] = set()
        for subset in layer:
            if len(subset) >= max_size:
                continue
            for qid in q.vertices_of(subset):
                for j in incident[qid]:
                    if j not in subset:
                        grown.add(subset | {j})
        layer = grown - found
    return found


def _rank(q: QueryGraph, stats: GraphStatistics, subset: frozenset[int]):
    return (
        selectivity_score(stats, q, subset),
        sorted(q.edge_signature(i) for i in subset),
        sorted(subset),
    )


def decompose(
    q: QueryGraph, stats: GraphStatistics, max_leaf_size: int = DEFAULT_MAX_LEAF_SIZE
) -> DecompositionPlan:
    """Greedily pick the rarest connected primitive that extends the covered part of ``q``.

    Ties go to the lexicographically smaller sorted (etype, src_type, dst_type)
    list, then to the smaller sorted edge indices.
    """
    if max_leaf_size < 1:
        raise ValueError("max_leaf_size must be >= 1")
    if not _connected(q, frozenset(range(len(q.edges)))):
        raise PlanningError(f"query {q.name!r} is disconnected")

    remaining = set(range(len(q.edges)))
    covered: set[str] = set()
    leaves: list[frozenset[int]] = []
    scores: list[float] = []
    while remaining:
        options = connected_edge_sets(q, remaining, max_leaf_size)
        if covered:
            options = {s for s in options if q.vertices_of(s) & covered}
        best = min(options, key=lambda s: _rank(q, stats, s))
        leaves.append(best)
        scores.append(selectivity_score(stats, q, best))
        remaining -= best
        covered |= q.vertices_of(best)

    plan = DecompositionPlan(q.name, tuple(leaves), tuple(scores), max_leaf_size)
    plan.check(q)
    return plan


def build_sj_tree(plan: DecompositionPlan, q: QueryGraph) -> SJTree:
    """Left-deep tree: leaves in plan order, each internal node joins the previous subtree with the next leaf.

    Node ids: leaves are 0..k-1 in plan order, internal nodes k..2k-2 bottom-up;
    the root is the last id.
    """
    leaves = [
        SJTreeNode(node_id=n, edges=leaf, vertices=q.vertices_of(leaf), score=plan.scores[n])
        for n, leaf in enumerate(plan.leaves)
    ]
    current = leaves[0]
    next_id = len(leaves)
    for leaf in leaves[1:]:
        cut = current.vertices & leaf.vertices
        if not cut:
            raise PlanningError(f"empty cut joining leaf {leaf.node_id}")
        parent = SJTreeNode(
            node_id=next_id,
            edges=current.edges | leaf.edges,
            vertices=current.vertices | leaf.vertices,
            cut_vertices=cut,
            left=current,
            right=leaf,
        )
        current.parent = parent
        leaf.parent = parent
        current = parent
        next_id += 1
    return SJTree(current)


def render_tree(tree: SJTree, q: QueryGraph) -> str:
    """Indented text view: node id, query edges, cut vertices, leaf score."""
    lines: list[str] = [f"query {q.name} (window_ms={q.window_ms})"]

    def edge_text(i: int) -> str:
        e = q.edges[i]
        return f"e{i}:{e.source}-[{e.edge_type}]->{e.target}"

    def walk(node: SJTreeNode, depth: int) -> None:
        pad = "  " * depth
        kind = "root" if node.is_root else ("leaf" if node.is_leaf else "join")
        edges = " ".join(edge_text(i) for i in sorted(node.edges))
        detail = f"{pad}n{node.node_id} {kind} [{edges}]"
        if not node.is_leaf:
            detail += f" cut={{{','.join(sorted(node.cut_vertices))}}}"
        if node.is_leaf:
            detail += f" score={node.score:.6g}"
        lines.append(detail)
        if node.left is not None:
            walk(node.left, depth + 1)
            walk(node.right, depth + 1)

    walk(tree.root, 1)
    return "\n".join(lines) + "\n"
