"""Mechanical invariant checks for search trees."""

from __future__ import annotations

from .types import SearchTree

# Simulated node values stay inside the reward range; allow float slack.
_VALUE_EPS = 1e-9


def validate_tree(tree: SearchTree) -> list[str]:
    """Check every structural invariant of a tree.

    Returns a list of human-readable violations naming the offending node;
    an empty list means the tree is valid. Violations are data, not errors.
    """
    violations: list[str] = []

    roots = [n for n in tree.nodes.values() if n.parent_id is None]
    if len(roots) != 1:
        violations.append(f"tree has {len(roots)} roots, expected exactly 1")
    if tree.root_id not in tree.nodes:
        violations.append(f"root_id {tree.root_id} is not a node")
    elif tree.nodes[tree.root_id].parent_id is not None:
        violations.append(f"node {tree.root_id}: root_id points at a non-root node")

    for nid, node in tree.nodes.items():
        if node.node_id != nid:
            violations.append(f"node {nid}: keyed under {nid} but carries node_id {node.node_id}")
        if node.parent_id is None:
            if node.depth != 0:
                violations.append(f"node {nid}: root depth is {node.depth}, expected 0")
        else:
            parent = tree.nodes.get(node.parent_id)
            if parent is None:
                violations.append(f"node {nid}: parent {node.parent_id} does not exist")
            else:
                if nid not in parent.children:
                    violations.append(f"node {nid}: not listed among parent {parent.node_id}'s children")
                if node.depth != parent.depth + 1:
                    violations.append(
                        f"node {nid}: depth {node.depth} != parent depth {parent.depth} + 1"
                    )
        for child_id in node.children:
            child = tree.nodes.get(child_id)
            if child is None:
                violations.append(f"node {nid}: child {child_id} does not exist")
            elif child.parent_id != nid:
                violations.append(f"node {nid}: child {child_id} names parent {child.parent_id}")
        if len(set(node.children)) != len(node.children):
            violations.append(f"node {nid}: duplicate child ids")
        if node.visits < 0:
            violations.append(f"node {nid}: negative visit count {node.visits}")
        if node.terminal and node.children:
            violations.append(f"node {nid}: terminal node has children")
        if node.step is None and node.parent_id is not None:
            violations.append(f"node {nid}: non-root node carries no step")
        if not -_VALUE_EPS <= node.value <= 1.0 + _VALUE_EPS:
            violations.append(f"node {nid}: value {node.value} outside [0, 1]")

    if tree.root_id in tree.nodes:
        reachable = set()
        stack = [tree.root_id]
        while stack:
            nid = stack.pop()
            if nid in reachable or nid not in tree.nodes:
                continue
            reachable.add(nid)
            stack.extend(tree.nodes[nid].children)
        for nid in tree.nodes:
            if nid not in reachable:
                violations.append(f"node {nid}: unreachable from root")

    return violations
