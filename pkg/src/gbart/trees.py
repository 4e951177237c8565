"""Binary regression trees with group-restricted split rules.

Trees are immutable values: structural edits produce new trees and share
unchanged node records, so rejected sampler proposals cost nothing to undo.
Node identifiers are stable small integers assigned in creation order
(root is 0); identifiers of pruned nodes are never reused.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Union

import numpy as np

from .errors import GroupViolationError, InvalidInputError, InvalidMoveError


@dataclass(frozen=True, slots=True)
class SplitRule:
    """A decision rule: observations with X[variable] <= threshold go left."""

    variable: int
    threshold: float


@dataclass(frozen=True, slots=True)
class Leaf:
    value: float


@dataclass(frozen=True, slots=True)
class Internal:
    rule: SplitRule
    left: int
    right: int


Node = Union[Leaf, Internal]


@dataclass(frozen=True, slots=True)
class Grow:
    """Split a leaf with a new rule, attaching two fresh leaves."""

    leaf: int
    rule: SplitRule
    left_value: float = 0.0
    right_value: float = 0.0


@dataclass(frozen=True, slots=True)
class Prune:
    """Collapse an internal node whose children are both leaves back into a leaf."""

    node: int


@dataclass(frozen=True, slots=True)
class Change:
    """Replace the split rule of an internal node; the shape is unchanged."""

    node: int
    rule: SplitRule


Move = Union[Grow, Prune, Change]


class RegressionTree:
    """A binary regression tree restricted to splitting on one variable group.

    Attributes:
        nodes: mapping from node id to Leaf or Internal record.
        root: id of the root node.
        group: sorted tuple of predictor indices this tree may split on.
        next_id: next unused node id.
    """

    __slots__ = (
        "nodes",
        "root",
        "group",
        "next_id",
        "leaf_ids",
        "internal_ids",
        "prunable_ids",
        "depths",
        "parents",
    )

    def __init__(
        self,
        nodes: dict[int, Node],
        root: int,
        group: Iterable[int],
        next_id: int | None = None,
        _validate: bool = True,
    ):
        self.nodes = nodes
        self.root = root
        self.group = tuple(sorted(set(int(g) for g in group)))
        self.next_id = (max(nodes) + 1) if next_id is None else next_id
        self._index_structure()
        if _validate:
            self._check_invariants()

    def _index_structure(self) -> None:
        leaves: list[int] = []
        internals: list[int] = []
        prunable: list[int] = []
        depths: dict[int, int] = {}
        parents: dict[int, int] = {}
        stack = [(self.root, 0)]
        nodes = self.nodes
        while stack:
            nid, d = stack.pop()
            depths[nid] = d
            node = nodes[nid]
            if type(node) is Leaf:
                leaves.append(nid)
            else:
                internals.append(nid)
                if type(nodes[node.left]) is Leaf and type(nodes[node.right]) is Leaf:
                    prunable.append(nid)
                parents[node.left] = nid
                parents[node.right] = nid
                stack.append((node.left, d + 1))
                stack.append((node.right, d + 1))
        self.leaf_ids = tuple(sorted(leaves))
        self.internal_ids = tuple(sorted(internals))
        self.prunable_ids = tuple(sorted(prunable))
        self.depths = depths
        self.parents = parents

    def _check_invariants(self) -> None:
        if len(self.depths) != len(self.nodes):
            raise InvalidInputError("tree contains nodes unreachable from the root")
        if not self.group:
            raise InvalidInputError("tree group must be nonempty")
        for nid in self.leaf_ids:
            if not math.isfinite(self.nodes[nid].value):
                raise InvalidInputError(f"leaf {nid} has a non-finite value")
        for nid in self.internal_ids:
            rule = self.nodes[nid].rule
            if rule.variable not in self.group:
                raise GroupViolationError(
                    f"node {nid} splits on variable {rule.variable}, "
                    f"outside group {self.group}"
                )
            if not math.isfinite(rule.threshold):
                raise InvalidInputError(f"node {nid} has a non-finite threshold")

    def __eq__(self, other) -> bool:
        # Structural equality: creation-history bookkeeping (next_id) is excluded.
        if not isinstance(other, RegressionTree):
            return NotImplemented
        return (
            self.nodes == other.nodes
            and self.root == other.root
            and self.group == other.group
        )

    @property
    def num_leaves(self) -> int:
        return len(self.leaf_ids)

    @property
    def max_depth(self) -> int:
        return max(self.depths.values())

    def depth_of(self, node_id: int) -> int:
        return self.depths[node_id]

    def is_stump(self) -> bool:
        return len(self.nodes) == 1

    def _replace_leaf_values(self, values: dict[int, float]) -> "RegressionTree":
        """New tree with leaf values replaced; structure caches are shared."""
        nodes = dict(self.nodes)
        for nid, v in values.items():
            nodes[nid] = Leaf(v)
        new = RegressionTree.__new__(RegressionTree)
        new.nodes = nodes
        new.root = self.root
        new.group = self.group
        new.next_id = self.next_id
        new.leaf_ids = self.leaf_ids
        new.internal_ids = self.internal_ids
        new.prunable_ids = self.prunable_ids
        new.depths = self.depths
        new.parents = self.parents
        return new


def stump(group: Iterable[int], value: float = 0.0) -> RegressionTree:
    """A single-leaf tree."""
    return RegressionTree({0: Leaf(value)}, root=0, group=group)


def _validated_matrix(X, min_columns: int) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise InvalidInputError(f"expected a 2-D predictor matrix, got shape {X.shape}")
    if X.shape[1] < min_columns:
        raise InvalidInputError(
            f"predictor matrix has {X.shape[1]} columns, need at least {min_columns}"
        )
    if not np.isfinite(X).all():
        raise InvalidInputError("predictor matrix contains non-finite values")
    return X


def _min_columns(tree: RegressionTree) -> int:
    if not tree.internal_ids:
        return 0
    return 1 + max(tree.nodes[nid].rule.variable for nid in tree.internal_ids)


def evaluate(tree: RegressionTree, x) -> float:
    """Route a single predictor vector through the tree to its leaf value."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise InvalidInputError(f"expected a 1-D predictor vector, got shape {x.shape}")
    if x.shape[0] < _min_columns(tree):
        raise InvalidInputError(
            f"vector has {x.shape[0]} entries, tree needs {_min_columns(tree)}"
        )
    if not np.isfinite(x).all():
        raise InvalidInputError("predictor vector contains non-finite values")
    node = tree.nodes[tree.root]
    while type(node) is Internal:
        rule = node.rule
        child = node.left if x[rule.variable] <= rule.threshold else node.right
        node = tree.nodes[child]
    return node.value


def _route_subtree(
    tree: RegressionTree, start: int, X: np.ndarray, rows: np.ndarray
) -> np.ndarray:
    """Leaf id for each of X[rows] when routed from node `start` (no validation)."""
    out = np.empty(rows.shape[0], dtype=np.int64)
    stack = [(start, np.arange(rows.shape[0]))]
    nodes = tree.nodes
    while stack:
        nid, idx = stack.pop()
        node = nodes[nid]
        if type(node) is Leaf:
            out[idx] = nid
        else:
            rule = node.rule
            left = X[rows[idx], rule.variable] <= rule.threshold
            stack.append((node.left, idx[left]))
            stack.append((node.right, idx[~left]))
    return out


def leaf_assignments(tree: RegressionTree, X) -> np.ndarray:
    """Leaf id reached by each row of X; the ids partition the observations."""
    X = _validated_matrix(X, _min_columns(tree))
    return _route_subtree(tree, tree.root, X, np.arange(X.shape[0]))


def tree_values(tree: RegressionTree, X) -> np.ndarray:
    """Vectorized evaluate: the leaf value reached by each row of X."""
    if tree.is_stump():
        X = _validated_matrix(X, 0)
        return np.full(X.shape[0], tree.nodes[tree.root].value)
    assign = leaf_assignments(tree, X)
    lookup = np.zeros(tree.next_id)
    for nid in tree.leaf_ids:
        lookup[nid] = tree.nodes[nid].value
    return lookup[assign]


def apply_move(tree: RegressionTree, move: Move) -> RegressionTree:
    """Apply a structural edit, returning a new tree; the input is unchanged.

    Raises:
        InvalidMoveError: the target node is missing or has the wrong shape
            (grow on an internal node, prune below non-leaf children, ...).
        GroupViolationError: a new rule uses a variable outside tree.group.
    """
    nodes = tree.nodes
    if type(move) is Grow:
        target = nodes.get(move.leaf)
        if target is None or type(target) is not Leaf:
            raise InvalidMoveError(f"grow target {move.leaf} is not a leaf")
        if move.rule.variable not in tree.group:
            raise GroupViolationError(
                f"variable {move.rule.variable} is outside group {tree.group}"
            )
        left, right = tree.next_id, tree.next_id + 1
        new_nodes = dict(nodes)
        new_nodes[move.leaf] = Internal(move.rule, left, right)
        new_nodes[left] = Leaf(move.left_value)
        new_nodes[right] = Leaf(move.right_value)
        return RegressionTree(
            new_nodes, tree.root, tree.group, next_id=right + 1, _validate=False
        )
    if type(move) is Prune:
        target = nodes.get(move.node)
        if target is None or type(target) is not Internal:
            raise InvalidMoveError(f"prune target {move.node} is not an internal node")
        if type(nodes[target.left]) is not Leaf or type(nodes[target.right]) is not Leaf:
            raise InvalidMoveError(
                f"prune target {move.node} has non-leaf children"
            )
        new_nodes = dict(nodes)
        del new_nodes[target.left], new_nodes[target.right]
        new_nodes[move.node] = Leaf(0.0)
        return RegressionTree(
            new_nodes, tree.root, tree.group, next_id=tree.next_id, _validate=False
        )
    if type(move) is Change:
        target = nodes.get(move.node)
        if target is None or type(target) is not Internal:
            raise InvalidMoveError(f"change target {move.node} is not an internal node")
        if move.rule.variable not in tree.group:
            raise GroupViolationError(
                f"variable {move.rule.variable} is outside group {tree.group}"
            )
        new_nodes = dict(nodes)
        new_nodes[move.node] = Internal(move.rule, target.left, target.right)
        return RegressionTree(
            new_nodes, tree.root, tree.group, next_id=tree.next_id, _validate=False
        )
    raise InvalidMoveError(f"unknown move {move!r}")


def _node_to_json(tree: RegressionTree, nid: int) -> dict:
    node = tree.nodes[nid]
    if type(node) is Leaf:
        return {"mu": node.value}
    return {
        "var": node.rule.variable,
        "cut": node.rule.threshold,
        "left": _node_to_json(tree, node.left),
        "right": _node_to_json(tree, node.right),
    }


def tree_to_json(tree: RegressionTree) -> dict:
    """JSON-ready dict: nested nodes plus the tree's variable group."""
    return {"group": list(tree.group), "root": _node_to_json(tree, tree.root)}


def tree_from_json(obj: dict) -> RegressionTree:
    """Rebuild a tree from its JSON form; ids are reassigned in preorder."""
    nodes: dict[int, Node] = {}
    counter = [0]

    def build(spec: dict) -> int:
        nid = counter[0]
        counter[0] += 1
        if "mu" in spec:
            nodes[nid] = Leaf(float(spec["mu"]))
        else:
            rule = SplitRule(int(spec["var"]), float(spec["cut"]))
            left = build(spec["left"])
            right = build(spec["right"])
            nodes[nid] = Internal(rule, left, right)
        return nid

    root = build(obj["root"])
    return RegressionTree(nodes, root, [int(g) for g in obj["group"]])
