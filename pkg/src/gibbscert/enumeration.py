"""Exhaustive enumeration of animals and simple paths, plus growth averages.

An animal rooted at a node x is a connected set of nodes containing x.  The
enumerator generates each animal exactly once using canonical augmentation:
an animal A with more than one node has a unique canonical parent A - {v*},
where v* is the largest removable non-root node, and A is produced only from
that parent.  This avoids both duplicates and a global dedup set.

Simple paths are enumerated by depth-first extension with a visited set.

Both enumerators are streams with explicit truncation markers.  Combinatorial
families here grow exponentially, so every stream consumes from an optional
Budget of node-expansion steps and stops loudly (never silently) when the
budget runs out or a size cap cuts the family short.

Two scalar functionals drive all the uniqueness conditions:

* the degree-growth average of an animal: mean of g(degree) over its nodes;
* the oscillation average of a path: mean of log(exp(2*delta(e)) - 1) over
  the nodes e of the path, where delta(e) >= 0 is the per-node oscillation.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Mapping, NamedTuple

Adjacency = Mapping[int, tuple[int, ...]]


def _adjacency_of(graph) -> Adjacency:
    """Accept either a raw adjacency mapping or anything exposing .adjacency."""
    adj = getattr(graph, "adjacency", graph)
    if not isinstance(adj, Mapping):
        raise TypeError("graph must be an adjacency mapping or carry an .adjacency mapping")
    return adj


class GrowthFunction:
    """A nonnegative increasing function on the positive integers.

    Args:
        name: short tag used in reports ("log", "linear", ...).
        fn: the function itself, defined for integer arguments >= 1.
        log_fn: optional evaluation from log(t) instead of t, for arguments
            far beyond float range.  log_fn(L) must equal fn(exp(L)).
    """

    __slots__ = ("name", "_fn", "_log_fn")

    def __init__(self, name: str, fn: Callable[[float], float], log_fn=None):
        self.name = name
        self._fn = fn
        self._log_fn = log_fn

    def __call__(self, n: float) -> float:
        return self._fn(n)

    @property
    def supports_log_argument(self) -> bool:
        return self._log_fn is not None

    def of_log(self, log_n: float) -> float:
        """Value at exp(log_n); needs log_fn for arguments beyond float range."""
        if self._log_fn is not None:
            return self._log_fn(log_n)
        return self._fn(math.exp(log_n))

    def check_increasing(self, upto: int = 64, strict: bool = True) -> None:
        """Sample 1..upto and raise if the function fails to increase."""
        prev = self._fn(1)
        for n in range(2, upto + 1):
            cur = self._fn(n)
            if cur < prev or (strict and cur == prev):
                raise ValueError(f"growth function {self.name!r} is not increasing at {n}")
            prev = cur

    def __repr__(self) -> str:
        return f"GrowthFunction({self.name!r})"


GROWTH_LOG = GrowthFunction("log", math.log, log_fn=lambda log_t: log_t)
GROWTH_LINEAR = GrowthFunction("linear", float, log_fn=math.exp)


def growth_power_of_log(power: float) -> GrowthFunction:
    """The function t -> (log t)**power, usable at log-scale arguments."""
    return GrowthFunction(
        f"log^{power:g}",
        lambda t: math.log(t) ** power,
        log_fn=lambda log_t: log_t**power,
    )


def growth_floor_log_squared() -> GrowthFunction:
    """The integer-part rule t -> floor(log t)**2 used by plateau schedules."""
    return GrowthFunction(
        "floor-log-squared",
        lambda t: float(math.floor(math.log(t)) ** 2),
        log_fn=lambda log_t: float(math.floor(log_t) ** 2),
    )


def growth_from_table(name: str, table: Mapping[int, float]) -> GrowthFunction:
    """Tabulated growth function; raises KeyError outside the table."""

    def fn(n):
        return table[int(n)]

    return GrowthFunction(name, fn)


class Budget:
    """Shared counter of node-expansion steps across enumeration streams."""

    __slots__ = ("limit", "used")

    def __init__(self, limit: int | None):
        if limit is not None and limit < 0:
            raise ValueError("budget limit must be nonnegative")
        self.limit = limit
        self.used = 0

    def spend(self, amount: int = 1) -> bool:
        """Consume steps; returns False once the limit would be exceeded."""
        if self.limit is not None and self.used + amount > self.limit:
            self.used = self.limit
            return False
        self.used += amount
        return True

    @property
    def exhausted(self) -> bool:
        return self.limit is not None and self.used >= self.limit


class EnumerationStream:
    """Iterator with explicit markers for why it may have stopped early.

    Attributes:
        size_truncated: some members beyond the size cap exist but were not
            produced.
        budget_exhausted: the shared Budget ran out mid-enumeration; the
            stream holds a partial result.
    """

    def __init__(self, generator: Iterator):
        self._generator = generator
        self.size_truncated = False
        self.budget_exhausted = False

    def __iter__(self):
        return self

    def __next__(self):
        return next(self._generator)

    @property
    def complete(self) -> bool:
        return not (self.size_truncated or self.budget_exhausted)


def _ball_nodes(adj: Adjacency, x: int, radius: int) -> set[int]:
    if x not in adj:
        raise KeyError(f"unknown node {x}")
    dist = {x: 0}
    queue = deque([x])
    while queue:
        cur = queue.popleft()
        if dist[cur] == radius:
            continue
        for nxt in adj[cur]:
            if nxt not in dist:
                dist[nxt] = dist[cur] + 1
                queue.append(nxt)
    return set(dist)


def _connected_without(adj: Adjacency, nodes: frozenset[int], removed: int, root: int) -> bool:
    """Is nodes - {removed} still connected and containing root?"""
    remaining = nodes - {removed}
    stack = [root]
    seen = {root}
    while stack:
        cur = stack.pop()
        for nxt in adj[cur]:
            if nxt in remaining and nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return len(seen) == len(remaining)


def enumerate_animals(
    graph,
    x: int,
    radius: int,
    size_cap: int | None = None,
    budget: Budget | None = None,
) -> EnumerationStream:
    """Stream all animals rooted at x inside the radius ball, each exactly once.

    Produced sets A satisfy: x in A, A connected, A inside the ball of the
    given radius around x, and radius + 1 <= |A| <= size_cap.  With
    size_cap=None the cap is the whole ball.

    Args:
        graph: adjacency mapping or object with .adjacency.
        x: root node.
        radius: ball radius; also forces the minimum size radius + 1.
        size_cap: largest size to produce; must be at least radius + 1.
        budget: optional shared expansion budget.

    Returns:
        EnumerationStream of frozensets.
    """
    adj = _adjacency_of(graph)
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    allowed = _ball_nodes(adj, x, radius)
    cap = len(allowed) if size_cap is None else size_cap
    if cap < radius + 1:
        raise ValueError(f"size_cap {cap} is below the minimum animal size {radius + 1}")
    min_size = radius + 1

    stream: EnumerationStream

    def emit() -> Iterator[frozenset[int]]:
        root_set = frozenset((x,))

        def grow(animal: frozenset[int]) -> Iterator[frozenset[int]]:
            if len(animal) >= min_size:
                yield animal
            extensions = sorted(
                {
                    nxt
                    for node in animal
                    for nxt in adj[node]
                    if nxt in allowed and nxt not in animal
                }
            )
            if len(animal) == cap:
                if extensions:
                    stream.size_truncated = True
                return
            for v in extensions:
                if budget is not None and not budget.spend():
                    stream.budget_exhausted = True
                    return
                child = animal | {v}
                # canonical parent rule: accept the child only from the parent
                # obtained by deleting its largest removable non-root node
                if all(
                    w <= v or not _connected_without(adj, child, w, x)
                    for w in child
                    if w != x
                ):
                    yield from grow(child)

        yield from grow(root_set)

    stream = EnumerationStream(emit())
    return stream


def enumerate_paths(
    graph,
    x: int,
    radius: int,
    n_nodes: int,
    budget: Budget | None = None,
) -> EnumerationStream:
    """Stream all simple paths from x with exactly n_nodes nodes inside the ball.

    The path family of a radius r collects simple paths from x staying inside
    the ball of radius r whose length (node count minus one) is at least r;
    this function produces the fixed-size slice with n_nodes nodes, hence it
    requires n_nodes >= radius + 1.

    Returns:
        EnumerationStream of node tuples starting with x.
    """
    adj = _adjacency_of(graph)
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    if n_nodes < radius + 1:
        raise ValueError(f"a path of {n_nodes} nodes is shorter than the radius {radius}")
    allowed = _ball_nodes(adj, x, radius)

    stream: EnumerationStream

    def emit() -> Iterator[tuple[int, ...]]:
        path = [x]
        on_path = {x}

        def extend() -> Iterator[tuple[int, ...]]:
            if len(path) == n_nodes:
                yield tuple(path)
                return
            for nxt in adj[path[-1]]:
                if nxt in allowed and nxt not in on_path:
                    if budget is not None and not budget.spend():
                        stream.budget_exhausted = True
                        return
                    path.append(nxt)
                    on_path.add(nxt)
                    yield from extend()
                    on_path.discard(nxt)
                    path.pop()

        yield from extend()

    stream = EnumerationStream(emit())
    return stream


def animal_average(
    animal: Iterable[int], growth: GrowthFunction, degrees: Mapping[int, int]
) -> float:
    """Mean of growth(degree) over the animal's nodes."""
    nodes = list(animal)
    if not nodes:
        raise ValueError("animal is empty")
    total = 0.0
    for node in nodes:
        deg = degrees[node]
        if deg <= 0 and growth.name == "log":
            raise ValueError(f"node {node} has degree {deg}; log growth needs degree >= 1")
        total += growth(deg)
    return total / len(nodes)


class PathOscillation(NamedTuple):
    """Oscillation average of a path; value is -inf when some delta is zero."""

    value: float
    zero_oscillation: bool


def path_oscillation_average(
    path: Iterable[int], deltas: Mapping[int, float]
) -> PathOscillation:
    """Mean of log(exp(2*delta) - 1) over the path's nodes.

    A node with delta exactly zero contributes log(0) = -inf; the average is
    then the -inf sentinel with the zero_oscillation flag set, since a
    constant factor can never push the average up.
    """
    nodes = list(path)
    if not nodes:
        raise ValueError("path is empty")
    total = 0.0
    for node in nodes:
        d = deltas[node]
        if d < 0:
            raise ValueError(f"negative oscillation {d} at node {node}")
        if d == 0.0:
            return PathOscillation(-math.inf, True)
        total += math.log(math.expm1(2.0 * d))
    return PathOscillation(total / len(nodes), False)


@dataclass
class PathCountReport:
    """Comparison of path-family sizes against the exponential bound exp(abar*N)."""

    passed: bool
    abar: float
    rows: list[dict] = field(default_factory=list)
    witness: tuple[int, int] | None = None  # (k, N) of the first violation
    max_log_excess: float = -math.inf  # max over rows of log(count) - abar*N
    budget_exhausted: bool = False


def verify_path_count_bound(
    graph,
    x: int,
    schedule: Iterable[int],
    abar: float,
    n_max: int,
    budget: Budget | None = None,
) -> PathCountReport:
    """Count fixed-size path families and compare to exp(abar * N).

    For every radius N_k in the schedule and every node count N between N_k
    and n_max, the family of simple paths from x of N nodes inside the ball
    of radius N_k is counted exhaustively and checked against exp(abar * N).
    Node counts below N_k + 1 give empty families by definition and appear as
    zero rows.
    """
    report = PathCountReport(passed=True, abar=abar)
    for k, radius in enumerate(schedule, start=1):
        if radius < 1:
            raise ValueError("schedule radii must be positive")
        for n_nodes in range(radius, n_max + 1):
            if n_nodes < radius + 1:
                count = 0
            else:
                stream = enumerate_paths(graph, x, radius, n_nodes, budget=budget)
                count = sum(1 for _ in stream)
                if stream.budget_exhausted:
                    # partial counts prove nothing either way; leave the verdict
                    # to the caller via the flag
                    report.budget_exhausted = True
                    return report
            log_bound = abar * n_nodes
            log_excess = (math.log(count) - log_bound) if count else -math.inf
            report.rows.append(
                {"k": k, "radius": radius, "n_nodes": n_nodes, "count": count,
                 "log_bound": log_bound}
            )
            if log_excess > report.max_log_excess:
                report.max_log_excess = log_excess
            if log_excess > 0.0:
                report.passed = False
                if report.witness is None:
                    report.witness = (k, n_nodes)
    return report
