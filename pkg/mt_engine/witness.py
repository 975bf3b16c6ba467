"""Witness trees built from execution logs.

A witness tree explains one resampling: its root is the resampled event and,
scanning the log backward, every earlier event is attached at the deepest node
for which it is eligible (it is not already a child label there and the
enlarged child set stays orderable to the node's label). This module builds
such trees, derives active values and weights, and replays a log forward to
confirm that the peeling rule and the active-value property hold.
"""

import hashlib
import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

from mt_engine.criteria import OrderabilityOracle
from mt_engine.model import Instance, event_prob
from mt_engine.sequential import ExecutionLog, replay, run, run_seeds

logger = logging.getLogger(__name__)


class WitnessTreeError(Exception):
    """Exception raised for invalid steps or violated tree invariants."""

    pass


class Top(Enum):
    """Marker for a variable no tree node involves."""

    TOP = "⊤"

    def __repr__(self) -> str:
        return "⊤"


TOP = Top.TOP


@dataclass
class TreeNode:
    label: int
    depth: int
    parent: int | None
    children: list[int] = field(default_factory=list)


@dataclass
class WitnessTree:
    """Rooted tree of event labels; node 0 is the root at depth 1.

    Nodes are stored in insertion order and children keep the order in
    which they were attached.
    """

    nodes: list[TreeNode] = field(default_factory=list)
    removed: set[int] = field(default_factory=set)

    @classmethod
    def singleton(cls, label: int) -> "WitnessTree":
        return cls(nodes=[TreeNode(label=label, depth=1, parent=None)])

    @property
    def is_null(self) -> bool:
        return len(self.nodes) == len(self.removed)

    def live(self) -> list[int]:
        return [k for k in range(len(self.nodes)) if k not in self.removed]

    def __len__(self) -> int:
        return len(self.nodes) - len(self.removed)

    @property
    def height(self) -> int:
        return max((self.nodes[k].depth for k in self.live()), default=0)

    def children_of(self, index: int) -> list[int]:
        return [c for c in self.nodes[index].children if c not in self.removed]

    def child_labels(self, index: int) -> frozenset[int]:
        return frozenset(self.nodes[c].label for c in self.children_of(index))

    def is_leaf(self, index: int) -> bool:
        return not self.children_of(index)

    def preorder(self) -> list[int]:
        if self.is_null:
            return []
        order: list[int] = []
        stack = [0]
        while stack:
            index = stack.pop()
            order.append(index)
            stack.extend(reversed(self.children_of(index)))
        return order

    def attach(self, parent: int, label: int) -> int:
        node = TreeNode(label=label, depth=self.nodes[parent].depth + 1, parent=parent)
        self.nodes.append(node)
        self.nodes[parent].children.append(len(self.nodes) - 1)
        return len(self.nodes) - 1

    def remove_leaf(self, index: int) -> None:
        if not self.is_leaf(index):
            raise WitnessTreeError(f"Node {index} is not a leaf")
        self.removed.add(index)

    def copy(self) -> "WitnessTree":
        return WitnessTree(
            nodes=[TreeNode(n.label, n.depth, n.parent, list(n.children)) for n in self.nodes],
            removed=set(self.removed),
        )

    def labels_by_depth(self) -> dict[int, list[int]]:
        levels: dict[int, list[int]] = {}
        for index in self.preorder():
            node = self.nodes[index]
            levels.setdefault(node.depth, []).append(node.label)
        return levels

    def canonical_form(self) -> Any:
        """Nested ``(label, children)`` tuples with children in a fixed order.

        Children are sorted by label and then by subtree hash, so two trees
        have equal forms exactly when they are equal as labeled rooted trees.
        """
        if self.is_null:
            return None
        forms, _ = self._canonical()
        return forms[0]

    def canonical_hash(self) -> str:
        if self.is_null:
            return hashlib.sha256(b"null").hexdigest()
        _, hashes = self._canonical()
        return hashes[0]

    def _canonical(self) -> tuple[dict[int, Any], dict[int, str]]:
        forms: dict[int, Any] = {}
        hashes: dict[int, str] = {}
        for index in reversed(self.preorder()):
            label = self.nodes[index].label
            children = sorted(
                self.children_of(index), key=lambda c: (self.nodes[c].label, hashes[c])
            )
            forms[index] = (label, tuple(forms[c] for c in children))
            text = f"{label}(" + ",".join(hashes[c] for c in children) + ")"
            hashes[index] = hashlib.sha256(text.encode()).hexdigest()
        return forms, hashes

    def dump(self) -> str:
        """Indented text, one ``depth eventId`` line per node in preorder."""
        lines = []
        for index in self.preorder():
            node = self.nodes[index]
            lines.append(f"{'  ' * (node.depth - 1)}{node.depth} {node.label}")
        return "\n".join(lines)

    def to_dict(self) -> dict[str, Any]:
        return {
            "height": self.height,
            "size": len(self),
            "hash": self.canonical_hash(),
            "dump": self.dump(),
        }


def _deepest_eligible(
    tree: WitnessTree, label: int, instance: Instance, oracle: OrderabilityOracle
) -> int | None:
    best: list[int] = []
    best_depth = 0
    neighbors = instance.lopsided_neighbors(label)
    for index in tree.live():
        node = tree.nodes[index]
        if node.depth < best_depth:
            continue
        if node.label != label and node.label not in neighbors:
            continue
        labels = tree.child_labels(index)
        if label in labels or not oracle.is_orderable(node.label, labels | {label}):
            continue
        if node.depth > best_depth:
            best, best_depth = [index], node.depth
        else:
            best.append(index)
    if not best:
        return None
    if len(best) == 1:
        return best[0]
    position = {index: k for k, index in enumerate(tree.preorder())}
    return min(best, key=position.__getitem__)


def build(
    log: ExecutionLog,
    t: int,
    instance: Instance,
    t0: int = 1,
    oracle: OrderabilityOracle | None = None,
) -> WitnessTree:
    """Build the witness tree of the resampling at step ``t`` from steps ``t0..t``.

    Args:
        log: Execution log
        t: Step whose resampling labels the root
        instance: Instance the log was produced on
        t0: Earliest step taken into account
        oracle: Shared orderability cache

    Returns:
        The witness tree; the null tree when ``t0 > t``

    Raises:
        WitnessTreeError: If ``t`` or ``t0`` lies outside the log
    """
    if not 1 <= t <= log.T:
        raise WitnessTreeError(f"Step {t} outside 1..{log.T}")
    if t0 < 1:
        raise WitnessTreeError(f"Start step {t0} must be at least 1")
    if t0 > t:
        return WitnessTree()

    oracle = oracle or OrderabilityOracle(instance)
    tree = WitnessTree.singleton(log.event_at(t))
    for step in range(t - 1, t0 - 1, -1):
        label = log.event_at(step)
        target = _deepest_eligible(tree, label, instance, oracle)
        if target is not None:
            tree.attach(target, label)
    return tree


def active_values(tree: WitnessTree, instance: Instance) -> dict[int, int | Top]:
    """Active value of every variable: the common demand of the deepest nodes involving it.

    Raises:
        WitnessTreeError: If deepest nodes disagree on a variable
    """
    deepest: dict[int, tuple[int, int]] = {}
    for index in tree.live():
        node = tree.nodes[index]
        for variable, value in instance.events[node.label].terms:
            current = deepest.get(variable)
            if current is None or node.depth > current[0]:
                deepest[variable] = (node.depth, value)
            elif node.depth == current[0] and value != current[1]:
                raise WitnessTreeError(
                    f"Deepest nodes at depth {node.depth} disagree on variable {variable}"
                )
    return {
        variable: deepest[variable][1] if variable in deepest else TOP
        for variable in range(instance.n)
    }


def weight(tree: WitnessTree, instance: Instance) -> float:
    """Product of the label probabilities; 1 for the null tree."""
    return math.prod(
        event_prob(instance.events[tree.nodes[k].label], instance.space) for k in tree.live()
    )


def check_invariants(
    tree: WitnessTree, instance: Instance, oracle: OrderabilityOracle | None = None
) -> list[str]:
    """List every violated structural property of a built tree."""
    oracle = oracle or OrderabilityOracle(instance)
    problems: list[str] = []
    for index in tree.live():
        node = tree.nodes[index]
        labels = [tree.nodes[c].label for c in tree.children_of(index)]
        if len(set(labels)) != len(labels):
            problems.append(f"node {index} has repeated child labels {labels}")
        elif labels and not oracle.is_orderable(node.label, frozenset(labels)):
            problems.append(f"children {labels} of node {index} are not orderable")
    leaf_depths = Counter(
        (tree.nodes[k].label, tree.nodes[k].depth) for k in tree.live() if tree.is_leaf(k)
    )
    for (label, depth), count in leaf_depths.items():
        if count > 1:
            problems.append(f"{count} leaves labeled {label} share depth {depth}")
    try:
        active_values(tree, instance)
    except WitnessTreeError as e:
        problems.append(str(e))
    return problems


def peel(tree: WitnessTree, label: int) -> WitnessTree:
    """Forward update: drop the deepest leaf labeled ``label``, if any."""
    leaves = [k for k in tree.live() if tree.is_leaf(k) and tree.nodes[k].label == label]
    if not leaves:
        return tree
    updated = tree.copy()
    updated.remove_leaf(max(leaves, key=lambda k: tree.nodes[k].depth))
    return updated


@dataclass
class ReplayIssue:
    check: str
    step: int
    message: str
    variable: int | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "check": self.check,
            "step": self.step,
            "variable": self.variable,
            "message": self.message,
        }


@dataclass
class ReplayReport:
    """Outcome of replaying a log against the witness tree of one step."""

    t: int
    issues: list[ReplayIssue] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.issues

    def to_dict(self) -> dict[str, Any]:
        return {"t": self.t, "ok": self.ok, "issues": [i.to_dict() for i in self.issues]}


def verify_replay(
    log: ExecutionLog,
    t: int,
    instance: Instance,
    oracle: OrderabilityOracle | None = None,
    states: list[list[int]] | None = None,
) -> ReplayReport:
    """Replay the log forward against the witness tree of step ``t``.

    Three checks are made:

    * ``peeling``: peeling the deepest leaf labeled by each resampled event
      yields exactly the tree built backward from the next step;
    * ``active``: before every step ``t'`` the live assignment agrees with the
      active values of the tree for steps ``t'..t``;
    * ``distinct``: the tree of step ``t`` differs from the tree of every other step.
    """
    oracle = oracle or OrderabilityOracle(instance)
    states = states if states is not None else replay(instance, log)
    report = ReplayReport(t=t)

    current = build(log, t, instance, 1, oracle)
    for step in range(1, t + 1):
        for variable, value in active_values(current, instance).items():
            if value is not TOP and states[step - 1][variable] != value:
                report.issues.append(
                    ReplayIssue(
                        check="active",
                        step=step,
                        variable=variable,
                        message=f"X_{variable}={states[step - 1][variable]}, active value {value}",
                    )
                )
        current = peel(current, log.event_at(step))
        expected = build(log, t, instance, step + 1, oracle)
        if current.canonical_hash() != expected.canonical_hash():
            report.issues.append(
                ReplayIssue(
                    check="peeling",
                    step=step,
                    message="forward peeling disagrees with the backward-built tree",
                )
            )
            current = expected

    root_hash = build(log, t, instance, 1, oracle).canonical_hash()
    for other in range(1, log.T + 1):
        if other != t and build(log, other, instance, 1, oracle).canonical_hash() == root_hash:
            report.issues.append(
                ReplayIssue(check="distinct", step=other, message=f"same tree as step {t}")
            )

    if not report.ok:
        logger.info(f"Replay of step {t} found {len(report.issues)} issues")
    return report


def collect_trees(
    log: ExecutionLog, instance: Instance, oracle: OrderabilityOracle | None = None
) -> list[WitnessTree]:
    """Witness trees of every step of the log, in step order."""
    oracle = oracle or OrderabilityOracle(instance)
    return [build(log, t, instance, 1, oracle) for t in range(1, log.T + 1)]


@dataclass
class TreeFrequency:
    """How many runs produced a tree shape at least once, against its weight."""

    hash: str
    dump: str
    weight: float
    runs_seen: int
    runs: int

    @property
    def frequency(self) -> float:
        return self.runs_seen / self.runs

    @property
    def threshold(self) -> float:
        """Weight plus three standard errors, sqrt(weight / runs) each."""
        return self.weight + 3.0 * math.sqrt(self.weight / self.runs)

    @property
    def ok(self) -> bool:
        return self.frequency <= self.threshold

    def to_dict(self) -> dict[str, Any]:
        return {
            "hash": self.hash,
            "tree": self.dump,
            "weight": self.weight,
            "frequency": self.frequency,
            "threshold": self.threshold,
            "ok": self.ok,
        }


def tree_statistics(
    instance: Instance, runs: int, seed: int, max_steps: int = 10**6
) -> list[TreeFrequency]:
    """Observed frequency of every witness tree shape over seeded runs.

    Returns:
        One record per distinct shape, most frequent first
    """
    oracle = OrderabilityOracle(instance)
    seen: Counter[str] = Counter()
    shapes: dict[str, tuple[str, float]] = {}
    for run_seed in run_seeds(seed, runs):
        result = run(instance, seed=run_seed, max_steps=max_steps)
        hashes = set()
        for tree in collect_trees(result.log, instance, oracle):
            digest = tree.canonical_hash()
            hashes.add(digest)
            if digest not in shapes:
                shapes[digest] = (tree.dump(), weight(tree, instance))
        seen.update(hashes)
    logger.info(f"Observed {len(shapes)} distinct witness trees over {runs} runs")
    return [
        TreeFrequency(
            hash=digest,
            dump=shapes[digest][0],
            weight=shapes[digest][1],
            runs_seen=count,
            runs=runs,
        )
        for digest, count in seen.most_common()
    ]
