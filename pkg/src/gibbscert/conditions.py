"""Uniqueness conditions for Gibbs fields driven by degree growth and oscillation.

Four checks are provided, all phrased over a finite truncation of the
dependence structure:

* dobrushin_check: the one-vertex interaction-matrix criterion
  sup_x sum over edges at x of (|e| - 1) * delta(e) < 2.
* certify_temperedness: exhaustive verification that animal degree-growth
  averages stay below a claimed bound along a radius schedule.
* phi_class_certificate: hub-separation check plus the closed-form series
  bound that yields temperedness for hub-sparse graphs.
* main_uniqueness_check: the path-oscillation condition
  sup over paths of the oscillation average <= -(abar + epsilon).
* explicit_kappa_check: the per-edge sufficient condition
  delta(e) <= kappa * (abar + g(n_L(e))) with kappa = exp(-7*abar - epsilon),
  which implies the path condition above at the same epsilon.

Verdict semantics: a finite truncation can only ever witness "holds-to-depth"
or "fails"; the unconditional "holds" is reserved for closed-form analyses.
An exhausted enumeration budget yields "inconclusive".
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .enumeration import (
    Budget,
    EnumerationStream,
    GrowthFunction,
    animal_average,
    enumerate_animals,
    enumerate_paths,
    path_oscillation_average,
    _adjacency_of,
    _ball_nodes,
)

EPSILON_DEFAULT = 0.1

# tolerance for refuting a claimed growth bound; absorbs the rounding of an
# arithmetic mean of equal floats without masking any real violation
_REFUTATION_SLACK = 1e-12

VERDICT_HOLDS = "holds"
VERDICT_HOLDS_TO_DEPTH = "holds-to-depth"
VERDICT_FAILS = "fails"
VERDICT_INCONCLUSIVE = "inconclusive"

_EXIT_CODES = {
    VERDICT_HOLDS: 0,
    VERDICT_HOLDS_TO_DEPTH: 0,
    VERDICT_FAILS: 1,
    VERDICT_INCONCLUSIVE: 2,
}


class InteractionBounds:
    """Per-edge positive factor bounds m_e <= M_e and their log oscillation.

    The oscillation delta(e) = log(M_e / m_e) is stored once at construction,
    with the ratio taken before the logarithm, so rescaling both bounds by a
    common power of two leaves every delta bit-identical.
    """

    __slots__ = ("_lower", "_upper", "_delta")

    def __init__(self, lower: Mapping[int, float], upper: Mapping[int, float]):
        if set(lower) != set(upper):
            raise ValueError("lower and upper bounds must cover the same edges")
        self._lower = dict(lower)
        self._upper = dict(upper)
        self._delta = {}
        for e, m in self._lower.items():
            big = self._upper[e]
            if not (m > 0.0 and math.isfinite(m)):
                raise ValueError(f"edge {e}: lower bound must be positive and finite, got {m}")
            if big < m:
                raise ValueError(f"edge {e}: upper bound {big} below lower bound {m}")
            self._delta[e] = math.log(big / m)

    @classmethod
    def from_deltas(cls, deltas: Mapping[int, float]) -> "InteractionBounds":
        """Bounds with m_e = 1 and the given oscillations, stored exactly."""
        out = cls({e: 1.0 for e in deltas},
                  {e: math.exp(d) for e, d in deltas.items()})
        for e, d in deltas.items():
            if d < 0:
                raise ValueError(f"edge {e}: negative oscillation {d}")
            out._delta[e] = float(d)
        return out

    def edges(self) -> frozenset[int]:
        return frozenset(self._delta)

    def lower(self, e: int) -> float:
        return self._lower[e]

    def upper(self, e: int) -> float:
        return self._upper[e]

    def delta(self, e: int) -> float:
        return self._delta[e]

    def deltas(self) -> dict[int, float]:
        return dict(self._delta)

    def missing(self, edge_ids: Iterable[int]) -> list[int]:
        return sorted(set(edge_ids) - set(self._delta))


@dataclass
class TemperednessCertificate:
    """Statement that animal growth averages stay at or below abar.

    schedule maps each probed node to its increasing radius sequence; a
    closed-form certificate may carry no explicit schedule.  status is one of
    "verified-to-depth", "closed-form", "refuted", "inconclusive".
    """

    growth: GrowthFunction
    abar: float
    schedule: dict[int, tuple[int, ...]] | None
    status: str
    depth: int | None = None
    witness: dict | None = None
    observed_max: float = -math.inf
    budget_used: int | None = None
    note: str = ""

    @property
    def usable(self) -> bool:
        return self.status in ("verified-to-depth", "closed-form")

    def to_json_dict(self) -> dict:
        return {
            "growth": self.growth.name,
            "abar": self.abar,
            "status": self.status,
            "depth": self.depth,
            "witness": self.witness,
            "observed_max": None if self.observed_max == -math.inf else self.observed_max,
            "budget_used": self.budget_used,
            "note": self.note,
        }


@dataclass
class ConditionReport:
    """Outcome of one uniqueness check on one truncation."""

    criterion: str
    verdict: str
    margin: float | None = None
    witness: dict | None = None
    depth: int | None = None
    budget_used: int | None = None
    flags: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict in (VERDICT_HOLDS, VERDICT_HOLDS_TO_DEPTH)

    @property
    def exit_code(self) -> int:
        return _EXIT_CODES[self.verdict]

    def to_json_dict(self) -> dict:
        return {
            "criterion": self.criterion,
            "verdict": self.verdict,
            "margin": self.margin,
            "witness": self.witness,
            "depth": self.depth,
            "budget_used": self.budget_used,
            "flags": self.flags,
        }


def dobrushin_check(hg, bounds: InteractionBounds) -> ConditionReport:
    """One-vertex criterion: sup over vertices of sum (|e|-1)*delta(e) < 2.

    Args:
        hg: a Hypergraph.
        bounds: factor bounds covering every edge of hg.

    Returns:
        ConditionReport with the supremum's vertex as witness and margin
        2 - sup.  Verdict is holds-to-depth (the truncation cannot speak for
        larger volumes) or fails.
    """
    absent = bounds.missing(e.id for e in hg.edges)
    if absent:
        raise ValueError(f"bounds missing for edges {absent}")
    best = -math.inf
    best_vertex = None
    for x in sorted(hg.vertices):
        total = 0.0
        for eid in sorted(_incident_ids(hg, x)):
            edge = hg.edge(eid)
            total += (len(edge) - 1) * bounds.delta(eid)
        if total > best:
            best = total
            best_vertex = x
    verdict = VERDICT_HOLDS_TO_DEPTH if best < 2.0 else VERDICT_FAILS
    return ConditionReport(
        criterion="dobrushin",
        verdict=verdict,
        margin=2.0 - best,
        witness={"vertex": best_vertex, "sum": best},
        flags={"supremum": best},
    )


def _incident_ids(hg, x):
    from .hypergraph import edge_neighborhood

    return edge_neighborhood(hg, x)


def _resolve_schedule(
    schedule, probes: Sequence[int], depth_cap: int | None
) -> dict[int, tuple[int, ...]]:
    """Normalize a schedule argument to a per-probe mapping of radii."""
    if schedule is None:
        if depth_cap is None:
            raise ValueError("either a schedule or a depth_cap is required")
        default = tuple(range(1, depth_cap + 1))
        per_probe = {p: default for p in probes}
    elif isinstance(schedule, Mapping):
        per_probe = {p: tuple(schedule[p]) for p in probes}
    else:
        shared = tuple(schedule)
        per_probe = {p: shared for p in probes}
    for p, seq in per_probe.items():
        if not seq:
            raise ValueError(f"empty radius schedule for probe {p}")
        if any(b <= a for a, b in zip(seq, seq[1:])) or seq[0] < 1:
            raise ValueError(f"schedule for probe {p} must be strictly increasing and positive")
        if depth_cap is not None:
            per_probe[p] = tuple(r for r in seq if r <= depth_cap)
    return per_probe


def certify_temperedness(
    graph,
    growth: GrowthFunction,
    abar: float,
    schedule=None,
    depth_cap: int | None = None,
    budget: Budget | None = None,
    probes: Sequence[int] | None = None,
) -> TemperednessCertificate:
    """Exhaustively test the animal growth averages against a claimed bound.

    For every probed node and every radius in its schedule (clipped at
    depth_cap), all animals rooted at the node inside the radius ball are
    enumerated and their growth averages maximized.  Any average above abar
    refutes the claim with the witness animal; exhausting the budget makes
    the certificate inconclusive.

    Args:
        graph: line graph or adjacency mapping.
        growth: growth function g applied to node degrees.
        abar: the claimed bound.
        schedule: radius sequence, per-probe mapping, or None for 1..depth_cap.
        depth_cap: largest radius to check.
        budget: shared enumeration budget.
        probes: nodes to check; defaults to all nodes.
    """
    adj = _adjacency_of(graph)
    degrees = {node: len(nbrs) for node, nbrs in adj.items()}
    probe_list = sorted(adj) if probes is None else list(probes)
    per_probe = _resolve_schedule(schedule, probe_list, depth_cap)

    observed = -math.inf
    witness = None
    max_depth = 0
    for probe in probe_list:
        for radius in per_probe[probe]:
            stream = enumerate_animals(adj, probe, radius, None, budget=budget)
            for animal in stream:
                value = animal_average(animal, growth, degrees)
                if value > observed:
                    observed = value
                    witness = {"probe": probe, "radius": radius,
                               "animal": sorted(animal), "average": value}
                if value > abar + _REFUTATION_SLACK:
                    return TemperednessCertificate(
                        growth=growth, abar=abar, schedule=per_probe,
                        status="refuted", depth=radius, witness=witness,
                        observed_max=observed,
                        budget_used=None if budget is None else budget.used,
                    )
            if stream.budget_exhausted:
                return TemperednessCertificate(
                    growth=growth, abar=abar, schedule=per_probe,
                    status="inconclusive", depth=max_depth, witness=None,
                    observed_max=observed,
                    budget_used=None if budget is None else budget.used,
                    note="enumeration budget exhausted before all animals were seen",
                )
            max_depth = max(max_depth, radius)
    return TemperednessCertificate(
        growth=growth, abar=abar, schedule=per_probe,
        status="verified-to-depth", depth=max_depth, witness=witness,
        observed_max=observed,
        budget_used=None if budget is None else budget.used,
    )


@dataclass
class PhiClassResult:
    """Hub-separation verification plus the series bound for temperedness."""

    b_bar: float
    certificate: TemperednessCertificate
    hub_violations: list[dict] = field(default_factory=list)
    partial_sum: float = 0.0
    tail: float = 0.0
    tail_ratio: float | None = None
    tail_closed: bool = False


def phi_class_certificate(
    graph,
    phi: GrowthFunction,
    growth: GrowthFunction,
    t_sequence: Sequence[float] | None = None,
    log_t_sequence: Sequence[float] | None = None,
    terms: int | None = None,
    n_star: int = 2,
) -> PhiClassResult:
    """Certify temperedness for hub-separated graphs via the series bound.

    Two steps:

    1. Hub separation on the truncation: for every pair of nodes whose
       smaller degree is at least n_star, the graph distance must be at least
       phi(smaller degree).  Violating pairs are listed and refute the
       certificate.
    2. The series sum over k of growth(t_{k+1}) / phi(t_k) is accumulated for
       the given number of terms.  When the term ratios settle to a constant
       below one, the geometric tail is added in closed form and the sum is a
       true upper bound b_bar; the certificate then claims the growth bound
       2 * b_bar.  Without a recognizable tail the sum is only a lower bound
       and the certificate is inconclusive.

    The t sequence may be passed directly or as logarithms (log_t_sequence)
    when its entries overflow floats; one extra entry beyond `terms` is
    required for the final numerator.
    """
    if (t_sequence is None) == (log_t_sequence is None):
        raise ValueError("pass exactly one of t_sequence or log_t_sequence")
    logs = (
        [math.log(t) for t in t_sequence] if t_sequence is not None else list(log_t_sequence)
    )
    if any(b <= a for a, b in zip(logs, logs[1:])):
        raise ValueError("the t sequence must be strictly increasing")
    if terms is None:
        terms = len(logs) - 1
    if terms < 1 or terms + 1 > len(logs):
        raise ValueError(f"need {terms + 1} sequence entries for {terms} terms")

    # step 1: hub separation
    adj = _adjacency_of(graph)
    degrees = {node: len(nbrs) for node, nbrs in adj.items()}
    hubs = sorted(node for node, deg in degrees.items() if deg >= n_star)
    violations: list[dict] = []
    for i, a in enumerate(hubs):
        dist_from_a = _bfs_distances(adj, a)
        for b in hubs[i + 1 :]:
            m_minus = min(degrees[a], degrees[b])
            required = phi(m_minus)
            actual = dist_from_a.get(b, math.inf)
            if actual < required:
                violations.append(
                    {"pair": [a, b], "distance": actual, "required": required,
                     "min_degree": m_minus}
                )

    # step 2: the series
    term_values = [
        growth.of_log(logs[k + 1]) / phi.of_log(logs[k]) for k in range(terms)
    ]
    partial = math.fsum(term_values)
    tail, ratio, closed = _geometric_tail(term_values)
    b_bar = partial + tail

    if violations:
        status, note = "refuted", "hub separation fails on the truncation"
    elif closed:
        status, note = "closed-form", "series bounded by its geometric tail"
    else:
        status, note = "inconclusive", "series tail not recognized; b_bar is a lower bound"
    certificate = TemperednessCertificate(
        growth=growth, abar=2.0 * b_bar, schedule=None, status=status,
        witness=violations[0] if violations else None, observed_max=-math.inf,
        note=note,
    )
    return PhiClassResult(
        b_bar=b_bar, certificate=certificate, hub_violations=violations,
        partial_sum=partial, tail=tail, tail_ratio=ratio, tail_closed=closed,
    )


def _bfs_distances(adj, start):
    from collections import deque

    dist = {start: 0}
    queue = deque([start])
    while queue:
        cur = queue.popleft()
        for nxt in adj[cur]:
            if nxt not in dist:
                dist[nxt] = dist[cur] + 1
                queue.append(nxt)
    return dist


def _geometric_tail(
    term_values: Sequence[float], window: int = 5, rel_tol: float = 1e-9
) -> tuple[float, float | None, bool]:
    """Detect a settled geometric decay and return (tail, ratio, recognized)."""
    if len(term_values) < window + 1:
        return 0.0, None, False
    ratios = [
        term_values[i + 1] / term_values[i]
        for i in range(len(term_values) - window - 1, len(term_values) - 1)
        if term_values[i] > 0.0
    ]
    if len(ratios) < window:
        return 0.0, None, False
    mean_ratio = sum(ratios) / len(ratios)
    if mean_ratio <= 0.0 or mean_ratio >= 1.0:
        return 0.0, None, False
    if any(abs(r - mean_ratio) > rel_tol * mean_ratio for r in ratios):
        return 0.0, None, False
    tail = term_values[-1] * mean_ratio / (1.0 - mean_ratio)
    return tail, mean_ratio, True


def main_uniqueness_check(
    graph,
    bounds: InteractionBounds,
    certificate: TemperednessCertificate,
    epsilon: float = EPSILON_DEFAULT,
    depth_cap: int | None = None,
    budget: Budget | None = None,
    probes: Sequence[int] | None = None,
    patience: int | None = None,
) -> ConditionReport:
    """Path-oscillation condition: sup over paths of the average <= -(abar + eps).

    For every probed node and every schedule radius r, simple paths from the
    node inside the radius-r ball are enumerated by increasing node count,
    starting at r + 1, until the ball is exhausted (or, with a patience
    window, until the per-size maximum has stopped increasing that many times
    in a row; the report then carries the cutoff size).

    Args:
        graph: line graph or adjacency mapping.
        bounds: per-node oscillations.
        certificate: a usable temperedness certificate supplying abar and,
            when explicit, the radius schedule.
        epsilon: positive slack in the threshold.
        depth_cap: largest radius to probe (required when the certificate has
            no explicit schedule).
        budget: shared enumeration budget; exhaustion gives "inconclusive".
        probes: nodes to probe; defaults to all nodes.
        patience: optional early stop for the per-size sweep.

    Returns:
        ConditionReport with the extremal path as witness and margin
        -(abar + epsilon) - sup.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if certificate.status == "refuted":
        raise ValueError("temperedness certificate is refuted; the condition does not apply")
    if certificate.status == "inconclusive":
        return ConditionReport(
            criterion="tempered-main", verdict=VERDICT_INCONCLUSIVE,
            flags={"reason": "temperedness certificate inconclusive"},
        )

    adj = _adjacency_of(graph)
    missing = bounds.missing(adj)
    if missing:
        raise ValueError(f"bounds missing for nodes {missing}")
    probe_list = sorted(adj) if probes is None else list(probes)
    explicit = certificate.schedule if isinstance(certificate.schedule, Mapping) else None
    if explicit is not None and all(p in explicit for p in probe_list):
        per_probe = {p: explicit[p] for p in probe_list}
        if depth_cap is not None:
            per_probe = {p: tuple(r for r in seq if r <= depth_cap)
                         for p, seq in per_probe.items()}
    else:
        per_probe = _resolve_schedule(None, probe_list, depth_cap)

    deltas = bounds.deltas()
    threshold = -(certificate.abar + epsilon)
    sup = -math.inf
    witness = None
    zero_oscillation = False
    truncated_sizes: list[dict] = []
    max_depth = 0

    for probe in probe_list:
        for radius in per_probe[probe]:
            ball_size = len(_ball_nodes(adj, probe, radius))
            stale = 0
            previous_best = -math.inf
            for n_nodes in range(radius + 1, ball_size + 1):
                stream = enumerate_paths(adj, probe, radius, n_nodes, budget=budget)
                size_best = -math.inf
                count = 0
                for path in stream:
                    count += 1
                    value, flagged = path_oscillation_average(path, deltas)
                    zero_oscillation = zero_oscillation or flagged
                    if value > size_best:
                        size_best = value
                    if value > sup:
                        sup = value
                        witness = {"probe": probe, "radius": radius,
                                   "path": list(path), "average": value}
                if stream.budget_exhausted:
                    return ConditionReport(
                        criterion="tempered-main", verdict=VERDICT_INCONCLUSIVE,
                        depth=max_depth,
                        budget_used=None if budget is None else budget.used,
                        flags={"reason": "enumeration budget exhausted"},
                    )
                if count == 0:
                    break  # no path of this size fits in the ball, none longer will
                if patience is not None:
                    if size_best <= previous_best:
                        stale += 1
                        if stale >= patience:
                            truncated_sizes.append(
                                {"probe": probe, "radius": radius, "stopped_at": n_nodes}
                            )
                            break
                    else:
                        stale = 0
                previous_best = max(previous_best, size_best)
            max_depth = max(max_depth, radius)

    holds = sup <= threshold
    flags = {"supremum": sup, "threshold": threshold, "zero_oscillation": zero_oscillation}
    if truncated_sizes:
        flags["patience_cutoffs"] = truncated_sizes
    return ConditionReport(
        criterion="tempered-main",
        verdict=VERDICT_HOLDS_TO_DEPTH if holds else VERDICT_FAILS,
        margin=threshold - sup,
        witness=witness,
        depth=max_depth,
        budget_used=None if budget is None else budget.used,
        flags=flags,
    )


def explicit_kappa_check(
    graph,
    bounds: InteractionBounds,
    certificate: TemperednessCertificate,
    epsilon: float = EPSILON_DEFAULT,
) -> ConditionReport:
    """Per-edge condition delta(e) <= kappa * (abar + g(n_L(e))).

    kappa = exp(-7*abar - epsilon).  When this holds on a truncation whose
    temperedness certificate is usable, the path-oscillation condition holds
    there with the same epsilon.

    Isolated nodes (line degree zero) sit on no path shared with another
    edge and are skipped, with a flag.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    if not certificate.usable:
        raise ValueError(f"temperedness certificate has status {certificate.status!r}")
    adj = _adjacency_of(graph)
    missing = bounds.missing(adj)
    if missing:
        raise ValueError(f"bounds missing for nodes {missing}")
    growth = certificate.growth
    abar = certificate.abar
    kappa = math.exp(-7.0 * abar - epsilon)

    worst_margin = math.inf
    witness = None
    skipped: list[int] = []
    per_edge: list[dict] = []
    for node in sorted(adj):
        degree = len(adj[node])
        if degree == 0:
            skipped.append(node)
            continue
        allowance = kappa * (abar + growth(degree))
        margin = allowance - bounds.delta(node)
        per_edge.append({"edge": node, "allowance": allowance,
                         "delta": bounds.delta(node), "margin": margin})
        if margin < worst_margin:
            worst_margin = margin
            witness = per_edge[-1]

    verdict = VERDICT_HOLDS_TO_DEPTH if worst_margin >= 0.0 else VERDICT_FAILS
    flags: dict = {"kappa": kappa, "per_edge": per_edge}
    if skipped:
        flags["skipped_isolated"] = skipped
    return ConditionReport(
        criterion="explicit-kappa",
        verdict=verdict,
        margin=None if worst_margin == math.inf else worst_margin,
        witness=witness,
        flags=flags,
    )
