"""Finite-volume Gibbs machinery over hypergraph factor models.

The model is a product of one positive factor per hyperedge over a finite
spin space with a reference measure.  Everything here is exact arithmetic at
desk scale:

* exact_kernel sums the weighted configurations of a volume, with a fixed
  frozen region and a boundary condition, and returns the probability of a
  single-site event together with the partition function;
* gibbs_sampler is a single-site heat-bath sampler for volumes beyond the
  exact cap;
* boundary_sensitivity measures the worst-case influence of the boundary
  condition on a single-site event, the quantity whose decay in the radius
  certifies uniqueness;
* disorder_decay_experiment draws random interaction amplitudes and compares
  the path-sum bound on that influence against its geometric envelope.

Numerically, every factor table is stored normalized by its maximum, so all
probabilities are computed from tables with entries in (0, 1]; the discarded
maxima are added back on the log scale only where the partition function is
reported.  Rescaling a table by a power of two therefore leaves every
probability bit-identical.  Exact sums run in log space, chunked, and chunks
are combined with exact summation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from .hypergraph import Hypergraph, edge_neighborhood, span
from .linegraph import build_line_graph, ball

DEFAULT_CONFIG_CAP = 2**24  # weighted terms an exact summation may enumerate
_CHUNK = 2**16
_ELIM_WIDTH_CAP = 2**20  # entries of the largest intermediate elimination factor
_DISTRIBUTION_CAP = 2**20


class SizeError(Exception):
    """A requested exact computation exceeds its enumeration cap."""


class SpinSpace:
    """Finite ordered spin values with a positive reference measure.

    The weights must sum to 1 within 1e-12.  Factor tables are indexed in
    the order of `states`.
    """

    __slots__ = ("states", "weights")

    def __init__(self, states: Sequence, weights: Sequence[float]):
        states = tuple(states)
        weights = tuple(float(w) for w in weights)
        if len(states) < 2:
            raise ValueError("a spin space needs at least two states")
        if len(set(states)) != len(states):
            raise ValueError("spin states must be distinct")
        if len(weights) != len(states):
            raise ValueError("one weight per state is required")
        if any(w <= 0 for w in weights):
            raise ValueError("reference weights must be positive")
        if abs(math.fsum(weights) - 1.0) > 1e-12:
            raise ValueError("reference weights must sum to 1")
        self.states = states
        self.weights = weights

    @classmethod
    def ising(cls) -> "SpinSpace":
        return cls((-1, 1), (0.5, 0.5))

    @classmethod
    def uniform(cls, states: Sequence) -> "SpinSpace":
        n = len(tuple(states))
        return cls(states, (1.0 / n,) * n)

    @property
    def size(self) -> int:
        return len(self.states)

    def index(self, state) -> int:
        try:
            return self.states.index(state)
        except ValueError:
            raise ValueError(f"unknown spin state {state!r}") from None

    def __repr__(self) -> str:
        return f"SpinSpace(states={self.states})"


class FactorModel:
    """A hypergraph, a spin space, and one positive factor table per edge.

    The table for edge e has shape (q,) * |e| with axis j indexed by the spin
    at the j-th smallest vertex of e.  Tables are kept twice: raw, and
    normalized by their maximum (the form all kernels compute with).
    """

    __slots__ = ("hypergraph", "spin", "_raw", "_normalized", "_log_norm", "_log_max")

    def __init__(self, hypergraph: Hypergraph, spin: SpinSpace,
                 tables: Mapping[int, np.ndarray]):
        q = spin.size
        raw: dict[int, np.ndarray] = {}
        normalized: dict[int, np.ndarray] = {}
        log_norm: dict[int, np.ndarray] = {}
        log_max: dict[int, float] = {}
        for edge in hypergraph.edges:
            try:
                table = np.asarray(tables[edge.id], dtype=float)
            except KeyError:
                raise ValueError(f"no factor table for edge {edge.id}") from None
            if table.shape != (q,) * len(edge):
                raise ValueError(
                    f"edge {edge.id}: table shape {table.shape} does not match "
                    f"{(q,) * len(edge)}"
                )
            if not np.all(np.isfinite(table)) or not np.all(table > 0.0):
                raise ValueError(f"edge {edge.id}: factor entries must be positive and finite")
            top = float(table.max())
            raw[edge.id] = table.copy()
            raw[edge.id].flags.writeable = False
            normalized[edge.id] = table / top
            normalized[edge.id].flags.writeable = False
            log_norm[edge.id] = np.log(normalized[edge.id])
            log_norm[edge.id].flags.writeable = False
            log_max[edge.id] = math.log(top)
        extra = set(tables) - set(raw)
        if extra:
            raise ValueError(f"tables given for unknown edges {sorted(extra)}")
        self.hypergraph = hypergraph
        self.spin = spin
        self._raw = raw
        self._normalized = normalized
        self._log_norm = log_norm
        self._log_max = log_max

    @classmethod
    def from_tables(cls, edge_vertex_sets: Iterable[Iterable[int]], spin: SpinSpace,
                    tables: Sequence[np.ndarray]) -> "FactorModel":
        """Build the hypergraph and the model in one step; tables by edge order."""
        hg = Hypergraph(edge_vertex_sets)
        return cls(hg, spin, {i: t for i, t in enumerate(tables)})

    def table(self, edge_id: int) -> np.ndarray:
        return self._raw[edge_id]

    def factor_value(self, edge_id: int, assignment: Mapping[int, object]) -> float:
        """Raw factor at a configuration given as vertex -> spin value."""
        edge = self.hypergraph.edge(edge_id)
        missing = [v for v in edge.vertices if v not in assignment]
        if missing:
            raise ValueError(f"edge {edge_id}: configuration misses vertices {missing}")
        idx = tuple(self.spin.index(assignment[v]) for v in edge.vertices)
        return float(self._raw[edge_id][idx])

    def bounds(self):
        """Per-edge factor minima and maxima as condition-checking input."""
        from .conditions import InteractionBounds

        lower = {e: float(t.min()) for e, t in self._raw.items()}
        upper = {e: float(t.max()) for e, t in self._raw.items()}
        return InteractionBounds(lower, upper)

    def delta(self, edge_id: int) -> float:
        table = self._raw[edge_id]
        return math.log(float(table.max()) / float(table.min()))

    def scaled(self, factors: Mapping[int, float]) -> "FactorModel":
        """New model with table of edge e multiplied by factors.get(e, 1)."""
        tables = {}
        for e, t in self._raw.items():
            lam = float(factors.get(e, 1.0))
            if lam <= 0:
                raise ValueError(f"edge {e}: scale factor must be positive")
            tables[e] = t * lam
        return FactorModel(self.hypergraph, self.spin, tables)

    def line_graph(self):
        return build_line_graph(self.hypergraph)


# -- volume preparation -------------------------------------------------------


def _meeting_edges(hg: Hypergraph, volume: set[int]) -> list[int]:
    eids: set[int] = set()
    for v in volume:
        eids.update(edge_neighborhood(hg, v))
    return sorted(eids)


@dataclass
class _VolumeStructure:
    """Edge bookkeeping for one volume, independent of any outside values."""

    sites: list[int]
    site_pos: dict[int, int]
    edge_ids: list[int]
    inside_axes: list[list[int]]  # per edge: site positions, in table axis order
    outside_slots: list[list[int]]  # per edge: outside vertices, in axis order
    needed_outside: list[int]
    log_scale: float


def _volume_structure(model: FactorModel, volume: Iterable[int]) -> _VolumeStructure:
    hg = model.hypergraph
    sites = sorted(set(volume))
    if not sites:
        raise ValueError("volume is empty")
    for v in sites:
        hg._require_vertex(v)
    site_set = set(sites)
    site_pos = {v: i for i, v in enumerate(sites)}
    edge_ids = _meeting_edges(hg, site_set)
    inside_axes: list[list[int]] = []
    outside_slots: list[list[int]] = []
    needed: set[int] = set()
    log_scale = 0.0
    for eid in edge_ids:
        edge = hg.edge(eid)
        inside_axes.append([site_pos[v] for v in edge.vertices if v in site_set])
        outs = [v for v in edge.vertices if v not in site_set]
        outside_slots.append(outs)
        needed.update(outs)
        log_scale += model._log_max[eid]
    return _VolumeStructure(
        sites=sites, site_pos=site_pos, edge_ids=edge_ids,
        inside_axes=inside_axes, outside_slots=outside_slots,
        needed_outside=sorted(needed), log_scale=log_scale,
    )


def _combine_outside(
    model: FactorModel,
    structure: _VolumeStructure,
    boundary_config: Mapping[int, object] | None,
    frozen: Mapping[int, object] | None,
) -> dict[int, int]:
    """Resolve the needed outside vertices to spin indices.

    The frozen assignment wins where both are given; a frozen vertex inside
    the volume is an error, and so is an uncovered needed vertex.
    """
    frozen = frozen or {}
    boundary_config = boundary_config or {}
    clash = sorted(set(frozen) & set(structure.site_pos))
    if clash:
        raise ValueError(f"frozen vertices {clash} lie inside the volume")
    combined: dict[int, int] = {}
    missing: list[int] = []
    for v in structure.needed_outside:
        if v in frozen:
            combined[v] = model.spin.index(frozen[v])
        elif v in boundary_config:
            combined[v] = model.spin.index(boundary_config[v])
        else:
            missing.append(v)
    if missing:
        raise ValueError(f"outside configuration misses vertices {missing}")
    return combined


def _bind_subtables(
    model: FactorModel, structure: _VolumeStructure, outside_idx: Mapping[int, int]
) -> list[np.ndarray]:
    """Per-edge log tables with the outside coordinates fixed.

    The returned array for an edge carries one axis per inside vertex, in
    table axis order (so in sorted vertex order).
    """
    hg = model.hypergraph
    subtables = []
    for eid, outs in zip(structure.edge_ids, structure.outside_slots):
        edge = hg.edge(eid)
        if outs:
            sel = tuple(
                outside_idx[v] if v in outside_idx else slice(None)
                for v in edge.vertices
            )
            subtables.append(model._log_norm[eid][sel])
        else:
            subtables.append(model._log_norm[eid])
    return subtables


def _normalize_statistic(model, structure, statistic):
    """Turn (vertex, states) into (site position, sorted index tuple)."""
    if statistic is None:
        return None
    x, states = statistic
    if x not in structure.site_pos:
        raise ValueError(f"statistic vertex {x} is outside the volume")
    idx = sorted({model.spin.index(s) for s in states})
    return structure.site_pos[x], tuple(idx)


# -- brute-force engine --------------------------------------------------------


def _chunk_digits(start: int, stop: int, n_sites: int, q: int) -> np.ndarray:
    idx = np.arange(start, stop, dtype=np.int64)
    powers = q ** np.arange(n_sites, dtype=np.int64)
    return (idx[:, None] // powers[None, :]) % q


def _chunk_logweights(digits: np.ndarray, structure: _VolumeStructure,
                      subtables: Sequence[np.ndarray], log_chi: np.ndarray) -> np.ndarray:
    logw = log_chi[digits].sum(axis=1)
    for axes, table in zip(structure.inside_axes, subtables):
        flat = np.ascontiguousarray(table).ravel()
        key = np.zeros(len(digits), dtype=np.int64)
        stride = 1
        for pos in reversed(axes):
            key += digits[:, pos] * stride
            stride *= table.shape[0] if table.ndim else 1
        # stride grows by q per axis; table axes all have length q
        logw += flat[key]
    return logw


class _LogSumAccumulator:
    """Streaming log-sum-exp: per-chunk maxima and sums, combined exactly."""

    def __init__(self):
        self._parts: list[tuple[float, float]] = []

    def add(self, log_values: np.ndarray) -> None:
        if log_values.size == 0:
            return
        m = float(log_values.max())
        if m == -math.inf:
            return
        self._parts.append((m, float(np.exp(log_values - m).sum())))

    def result(self) -> float:
        if not self._parts:
            return -math.inf
        top = max(m for m, _ in self._parts)
        total = math.fsum(s * math.exp(m - top) for m, s in self._parts)
        return top + math.log(total)


def _solve_bruteforce(model, structure, subtables, statistic,
                      config_cap: int) -> tuple[float, float]:
    """Returns (log numerator, log denominator) over normalized tables."""
    q = model.spin.size
    n = len(structure.sites)
    total = q**n
    if total > config_cap:
        raise SizeError(
            f"{q}**{n} = {total} weighted terms exceed the exact cap {config_cap}; "
            "use the sampler for volumes this large"
        )
    log_chi = np.log(np.asarray(model.spin.weights))
    den = _LogSumAccumulator()
    num = _LogSumAccumulator()
    for start in range(0, total, _CHUNK):
        stop = min(start + _CHUNK, total)
        digits = _chunk_digits(start, stop, n, q)
        logw = _chunk_logweights(digits, structure, subtables, log_chi)
        den.add(logw)
        if statistic is not None:
            pos, allowed = statistic
            mask = np.isin(digits[:, pos], np.asarray(allowed, dtype=np.int64))
            num.add(logw[mask])
    log_den = den.result()
    log_num = log_den if statistic is None else num.result()
    return log_num, log_den


# -- variable-elimination engine ------------------------------------------------


@dataclass
class _Factor:
    vars: tuple[int, ...]  # site positions, strictly increasing
    values: np.ndarray  # linear domain, shape (q,)*len(vars)
    log_offset: float

    @classmethod
    def from_linear(cls, vars: tuple[int, ...], values: np.ndarray,
                    log_offset: float = 0.0) -> "_Factor":
        top = float(values.max())
        if top <= 0.0:
            # an all-zero factor annihilates the sum; keep it representable
            return cls(vars, np.zeros_like(values), -math.inf)
        return cls(vars, values / top, log_offset + math.log(top))


def _expand_to(values: np.ndarray, own_vars: tuple[int, ...],
               target_vars: tuple[int, ...]) -> np.ndarray:
    # insert singleton axes for the missing variables; both var tuples are
    # sorted, so relative order is preserved
    expanded = values
    for i, v in enumerate(target_vars):
        if v not in own_vars:
            expanded = np.expand_dims(expanded, axis=i)
    return expanded


def _solve_eliminate(model, structure, subtables, statistic,
                     width_cap: int = _ELIM_WIDTH_CAP) -> tuple[float, float]:
    """Same contract as _solve_bruteforce, via greedy variable elimination.

    The denominator run and the numerator run share everything except one
    indicator factor on the statistic's site.
    """
    q = model.spin.size
    chi = np.asarray(model.spin.weights)

    def run(extra: _Factor | None) -> float:
        factors: list[_Factor] = []
        for axes, table in zip(structure.inside_axes, subtables):
            if not axes:
                continue  # edge fully resolved by the outside configuration
            order = np.argsort(axes)
            arr = np.exp(np.transpose(table, axes=tuple(order)))
            factors.append(_Factor.from_linear(tuple(sorted(axes)), arr))
        for pos in range(len(structure.sites)):
            factors.append(_Factor.from_linear((pos,), chi.copy()))
        if extra is not None:
            factors.append(extra)
        constant = 0.0  # accumulated log of eliminated scalars
        alive = set(range(len(structure.sites)))
        while alive:
            # cheapest site: smallest union of variables among its factors
            best_site, best_union = None, None
            for site in sorted(alive):
                union: set[int] = set()
                for f in factors:
                    if site in f.vars:
                        union.update(f.vars)
                union.add(site)
                if best_union is None or len(union) < len(best_union):
                    best_site, best_union = site, union
            if q ** len(best_union) > width_cap:
                raise SizeError(
                    f"elimination would build a factor over {len(best_union)} sites "
                    f"({q}**{len(best_union)} entries), beyond the cap {width_cap}"
                )
            target = tuple(sorted(best_union))
            touching = [f for f in factors if best_site in f.vars]
            factors = [f for f in factors if best_site not in f.vars]
            product = np.ones((q,) * len(target))
            offset = 0.0
            for f in touching:
                product = product * _expand_to(f.values, f.vars, target)
                offset += f.log_offset
            axis = target.index(best_site)
            summed = product.sum(axis=axis)
            remaining = tuple(v for v in target if v != best_site)
            if remaining:
                factors.append(_Factor.from_linear(remaining, summed, offset))
            else:
                val = float(summed)
                if val <= 0.0:
                    return -math.inf
                constant += offset + math.log(val)
            alive.discard(best_site)
        for f in factors:  # zero-variable leftovers
            val = float(f.values)
            if val <= 0.0 or f.log_offset == -math.inf:
                return -math.inf
            constant += f.log_offset + math.log(val)
        return constant

    log_den = run(None)
    if statistic is None:
        return log_den, log_den
    pos, allowed = statistic
    indicator = np.zeros(q)
    indicator[list(allowed)] = 1.0
    log_num = run(_Factor.from_linear((pos,), indicator))
    return log_num, log_den


def _solve(model, structure, subtables, statistic, engine: str,
           config_cap: int) -> tuple[float, float]:
    q = model.spin.size
    n = len(structure.sites)
    if engine == "auto":
        engine = "bruteforce" if q**n <= config_cap else "eliminate"
    if engine == "bruteforce":
        return _solve_bruteforce(model, structure, subtables, statistic, config_cap)
    if engine == "eliminate":
        return _solve_eliminate(model, structure, subtables, statistic)
    raise ValueError(f"unknown engine {engine!r}")


# -- public exact operations ----------------------------------------------------


def h_volume(model: FactorModel, volume: Iterable[int],
             configuration: Mapping[int, object]) -> float:
    """Product of the raw factors of all edges meeting the volume.

    The configuration must assign a spin value to every vertex of every edge
    meeting the volume.  A volume meeting no edges gives the empty product 1.

    Raises:
        ValueError: listing the uncovered vertices when the configuration is
            incomplete.
    """
    hg = model.hypergraph
    vol = set(volume)
    if not vol:
        raise ValueError("volume is empty")
    for v in vol:
        hg._require_vertex(v)
    result = 1.0
    for eid in _meeting_edges(hg, vol):
        result *= model.factor_value(eid, configuration)
    return result


class KernelResult(NamedTuple):
    probability: float
    z: float


def exact_kernel(
    model: FactorModel,
    volume: Iterable[int],
    boundary_config: Mapping[int, object] | None = None,
    frozen: Mapping[int, object] | None = None,
    statistic: tuple[int, Iterable] | None = None,
    engine: str = "auto",
    config_cap: int = DEFAULT_CONFIG_CAP,
) -> KernelResult:
    """Exact single-volume Gibbs kernel.

    Sums chi-weighted products of the factors of all edges meeting the volume
    over every configuration of the volume.  Outside vertices take their
    values from `frozen` where given and from `boundary_config` otherwise;
    values on vertices that no relevant edge touches are ignored, so the
    result depends on nothing beyond the vertex boundary.

    Args:
        model: the factor model.
        volume: vertices summed over; must not meet the frozen assignment.
        boundary_config: vertex -> spin value on the free outside.
        frozen: vertex -> spin value held fixed regardless of the boundary.
        statistic: (x, states) asking for the probability that the spin at
            x lands in `states`; None asks only for the partition function.
        engine: "auto", "bruteforce", or "eliminate".
        config_cap: largest number of weighted terms brute force may touch.

    Returns:
        KernelResult(probability, z).  With statistic=None the probability
        is 1.0.

    Raises:
        SizeError: the volume exceeds the chosen engine's cap.
        ValueError: malformed volume, statistic, or missing outside values.
    """
    structure = _volume_structure(model, volume)
    outside_idx = _combine_outside(model, structure, boundary_config, frozen)
    subtables = _bind_subtables(model, structure, outside_idx)
    stat = _normalize_statistic(model, structure, statistic)
    log_num, log_den = _solve(model, structure, subtables, stat, engine, config_cap)
    probability = 1.0 if stat is None else math.exp(log_num - log_den)
    z = math.exp(log_den + structure.log_scale)
    return KernelResult(probability=probability, z=z)


def kernel_marginals(
    model: FactorModel,
    volume: Iterable[int],
    boundary_config: Mapping[int, object] | None = None,
    frozen: Mapping[int, object] | None = None,
    engine: str = "auto",
    config_cap: int = DEFAULT_CONFIG_CAP,
) -> dict[int, np.ndarray]:
    """Exact per-vertex marginals of the volume kernel.

    Returns, for every vertex of the volume, the probability vector over the
    spin states (each summing to 1 within 1e-12).
    """
    structure = _volume_structure(model, volume)
    outside_idx = _combine_outside(model, structure, boundary_config, frozen)
    subtables = _bind_subtables(model, structure, outside_idx)
    q = model.spin.size
    n = len(structure.sites)
    if engine == "auto":
        engine = "bruteforce" if q**n <= config_cap else "eliminate"

    if engine == "bruteforce":
        if q**n > config_cap:
            raise SizeError(
                f"{q}**{n} weighted terms exceed the exact cap {config_cap}; "
                "use the sampler for volumes this large"
            )
        log_chi = np.log(np.asarray(model.spin.weights))
        total = q**n
        # first pass: global maximum, for one stable shift
        top = -math.inf
        for start in range(0, total, _CHUNK):
            digits = _chunk_digits(start, min(start + _CHUNK, total), n, q)
            logw = _chunk_logweights(digits, structure, subtables, log_chi)
            top = max(top, float(logw.max()))
        sums = np.zeros((n, q))
        for start in range(0, total, _CHUNK):
            digits = _chunk_digits(start, min(start + _CHUNK, total), n, q)
            logw = _chunk_logweights(digits, structure, subtables, log_chi)
            w = np.exp(logw - top)
            for j in range(n):
                sums[j] += np.bincount(digits[:, j], weights=w, minlength=q)
        return {
            v: sums[j] / sums[j].sum() for j, v in enumerate(structure.sites)
        }

    out: dict[int, np.ndarray] = {}
    _, log_den = _solve_eliminate(model, structure, subtables, None)
    for j, v in enumerate(structure.sites):
        probs = np.empty(q)
        for s in range(q):
            log_num, _ = _solve_eliminate(model, structure, subtables, (j, (s,)))
            probs[s] = math.exp(log_num - log_den)
        out[v] = probs / probs.sum()
    return out


def kernel_distribution(
    model: FactorModel,
    volume: Iterable[int],
    boundary_config: Mapping[int, object] | None = None,
    frozen: Mapping[int, object] | None = None,
    cap: int = _DISTRIBUTION_CAP,
) -> tuple[list[int], np.ndarray]:
    """Full exact distribution of the volume kernel.

    Returns (sites, probabilities) where sites is the sorted vertex list and
    probabilities[i] belongs to the configuration whose spin index at the
    j-th site is (i // q**j) % q.
    """
    structure = _volume_structure(model, volume)
    outside_idx = _combine_outside(model, structure, boundary_config, frozen)
    subtables = _bind_subtables(model, structure, outside_idx)
    q = model.spin.size
    n = len(structure.sites)
    total = q**n
    if total > cap:
        raise SizeError(f"distribution over {total} configurations exceeds the cap {cap}")
    log_chi = np.log(np.asarray(model.spin.weights))
    digits = _chunk_digits(0, total, n, q)
    logw = _chunk_logweights(digits, structure, subtables, log_chi)
    w = np.exp(logw - logw.max())
    return structure.sites, w / w.sum()


# -- factor bound report ---------------------------------------------------------


@dataclass
class GammaBoundReport:
    """Per-edge verification that normalized factor products stay in range.

    For each edge, with hbar = h / min h, the product hbar(xi) * hbar(eta) - 1
    over configuration pairs must lie in [0, exp(2 * delta) - 1].
    """

    passed: bool
    rows: list[dict] = field(default_factory=list)
    witness: dict | None = None


def gamma_factor_bound_check(model: FactorModel, pair_scan_cap: int = 2**16,
                             tolerance: float = 1e-12) -> GammaBoundReport:
    """Scan every edge's configuration pairs against the oscillation bound.

    Small tables are scanned exhaustively; larger ones use the fact that the
    extremes of hbar(xi) * hbar(eta) are attained at extremal single factors.
    """
    report = GammaBoundReport(passed=True)
    for edge in model.hypergraph.edges:
        table = model.table(edge.id)
        low = float(table.min())
        hbar = table / low
        delta = model.delta(edge.id)
        bound = math.expm1(2.0 * delta)
        flat = hbar.ravel()
        if flat.size**2 <= pair_scan_cap:
            products = np.outer(flat, flat)
            gamma_max = float(products.max()) - 1.0
            gamma_min = float(products.min()) - 1.0
            i, j = np.unravel_index(int(products.argmax()), products.shape)
            pair = (
                tuple(np.unravel_index(int(i), table.shape)),
                tuple(np.unravel_index(int(j), table.shape)),
            )
            method = "exhaustive"
        else:
            gamma_max = float(flat.max()) ** 2 - 1.0
            gamma_min = float(flat.min()) ** 2 - 1.0
            arg = int(flat.argmax())
            pair = (
                tuple(np.unravel_index(arg, table.shape)),
                tuple(np.unravel_index(arg, table.shape)),
            )
            method = "extremal"
        slack = tolerance * max(1.0, bound)
        ok = gamma_min >= -slack and gamma_max <= bound + slack
        row = {
            "edge": edge.id, "delta": delta, "bound": bound,
            "gamma_max": gamma_max, "gamma_min": gamma_min,
            "margin": bound - gamma_max, "method": method, "passed": ok,
            "argmax_pair": pair,
        }
        report.rows.append(row)
        if not ok and report.witness is None:
            report.witness = row
            report.passed = False
    return report


# -- heat-bath sampler ------------------------------------------------------------


@dataclass
class SamplerResult:
    marginals: dict[int, np.ndarray]
    stderr: dict[int, np.ndarray]
    sweeps: int
    burn_in: int
    batches: int
    seed: int
    final_state: dict[int, object]


def _conditional_tables(model, structure, subtables):
    """Per site: (neighbor positions, cumulative spin distribution per key).

    Row r of the table is the conditional distribution of the site's spin
    given that the free neighbors of the site carry the digit expansion of r
    (least significant digit at the smallest neighbor position).
    """
    q = model.spin.size
    log_chi = np.log(np.asarray(model.spin.weights))
    n = len(structure.sites)
    per_site = []
    for pos in range(n):
        touching = [
            (axes, table)
            for axes, table in zip(structure.inside_axes, subtables)
            if pos in axes
        ]
        nbrs = sorted({a for axes, _ in touching for a in axes if a != pos})
        rows = q ** len(nbrs)
        if rows * q > 2**22:
            raise SizeError(
                f"site {structure.sites[pos]} has {len(nbrs)} interacting free "
                "neighbors; the conditional table would be too large"
            )
        digits = _chunk_digits(0, rows, len(nbrs), q)  # (rows, len(nbrs))
        logp = np.tile(log_chi, (rows, 1))  # (rows, q)
        for axes, table in touching:
            # own spin axis last, then pick the neighbor entries per row
            moved = np.moveaxis(table, axes.index(pos), -1)
            others = [a for a in axes if a != pos]
            if others:
                sel = tuple(digits[:, nbrs.index(a)] for a in others)
                logp += moved[sel]  # (rows, q)
            else:
                logp += moved[None, :]
        probs = np.exp(logp - logp.max(axis=1, keepdims=True))
        probs /= probs.sum(axis=1, keepdims=True)
        per_site.append((nbrs, np.cumsum(probs, axis=1)))
    return per_site


def gibbs_sampler(
    model: FactorModel,
    volume: Iterable[int],
    boundary_config: Mapping[int, object] | None = None,
    sweeps: int = 10_000,
    seed: int = 0,
    frozen: Mapping[int, object] | None = None,
    burn_in: int | None = None,
    batches: int = 32,
) -> SamplerResult:
    """Single-site heat-bath sampler with batch-means error bars.

    Sites are resampled in sorted order from their exact one-site conditional
    distributions, which are precomputed as lookup tables over the free
    neighbor configurations.  The trajectory is a deterministic function of
    the seed.

    Returns:
        SamplerResult with per-vertex empirical marginals over the states
        and their batch-means standard errors.
    """
    if sweeps < 1:
        raise ValueError("at least one sweep is required")
    structure = _volume_structure(model, volume)
    outside_idx = _combine_outside(model, structure, boundary_config, frozen)
    subtables = _bind_subtables(model, structure, outside_idx)
    q = model.spin.size
    n = len(structure.sites)
    per_site = _conditional_tables(model, structure, subtables)
    # plain-python lookups keep the update loop tight
    keyed = [
        [(j, q**k) for k, j in enumerate(nbrs)] for nbrs, _ in per_site
    ]
    binary = q == 2
    if binary:
        head = [cum[:, 0].tolist() for _, cum in per_site]
        rows = None
    else:
        head = None
        rows = [cum.tolist() for _, cum in per_site]

    rng = np.random.Generator(np.random.PCG64(seed))
    state = [int(s) for s in rng.integers(0, q, size=n)]
    if burn_in is None:
        burn_in = sweeps // 10
    measured = sweeps - burn_in
    if measured < 1:
        raise ValueError("burn_in leaves no measured sweeps")
    trace = np.empty((measured, n), dtype=np.int8)

    from bisect import bisect_right

    chunk = 4096
    site_range = range(n)
    for start in range(0, sweeps, chunk):
        block = rng.random((min(chunk, sweeps - start), n))
        for offset in range(block.shape[0]):
            t = start + offset
            row = block[offset].tolist()
            for i in site_range:
                key = 0
                for j, mult in keyed[i]:
                    key += state[j] * mult
                if binary:
                    state[i] = 0 if row[i] < head[i][key] else 1
                else:
                    state[i] = min(bisect_right(rows[i][key], row[i]), q - 1)
            if t >= burn_in:
                trace[t - burn_in] = state

    batches = max(1, min(batches, measured))
    batch_edges = np.linspace(0, measured, batches + 1).astype(np.int64)
    batch_counts = np.zeros((batches, n, q))
    for b in range(batches):
        segment = trace[batch_edges[b]:batch_edges[b + 1]]
        for i in range(n):
            batch_counts[b, i] = np.bincount(segment[:, i], minlength=q)

    totals = batch_counts.sum(axis=0)  # (n, q)
    marginals = totals / measured
    batch_sizes = np.diff(batch_edges).astype(float)
    means = batch_counts / batch_sizes[:, None, None]
    if batches > 1:
        stderr = means.std(axis=0, ddof=1) / math.sqrt(batches)
    else:
        stderr = np.full((n, q), math.nan)
    return SamplerResult(
        marginals={v: marginals[i] for i, v in enumerate(structure.sites)},
        stderr={v: stderr[i] for i, v in enumerate(structure.sites)},
        sweeps=sweeps,
        burn_in=burn_in,
        batches=batches,
        seed=seed,
        final_state={v: model.spin.states[state[i]]
                     for i, v in enumerate(structure.sites)},
    )


# -- boundary sensitivity ----------------------------------------------------------


def _tables_are_log_supermodular(model: FactorModel, tolerance: float = 1e-12) -> bool:
    """Pairwise log-supermodularity of every table (binary spins only).

    For binary spins this pairwise condition over all coordinate pairs, with
    the other coordinates fixed, characterizes the lattice condition that
    makes single-site conditionals monotone in the boundary.
    """
    if model.spin.size != 2:
        return False
    for edge in model.hypergraph.edges:
        table = model.table(edge.id)
        k = table.ndim
        for i in range(k):
            for j in range(i + 1, k):
                arr = np.moveaxis(table, (i, j), (0, 1))
                lhs = arr[1, 1] * arr[0, 0]
                rhs = arr[1, 0] * arr[0, 1]
                if np.any(lhs < rhs - tolerance * np.maximum(lhs, rhs)):
                    return False
    return True


def sensitivity_envelope(epsilon: float, n_k: float) -> float:
    """Theoretical decay envelope 2 * exp(-epsilon * n_k) / (exp(epsilon) - 1)."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    return 2.0 * math.exp(-epsilon * n_k) / math.expm1(epsilon)


@dataclass
class SensitivityResult:
    m_value: float
    envelope: float | None
    method: str
    radius: int
    volume: tuple[int, ...]
    boundary_sites: tuple[int, ...]
    statistic: tuple
    kernel_calls: int
    lower_bound: bool
    n_k: float | None = None
    flags: dict = field(default_factory=dict)


def boundary_sensitivity(
    model: FactorModel,
    x: int,
    e_x: int | None = None,
    radius: int = 1,
    statistic: Iterable | None = None,
    mode: str = "exact-sup",
    frozen: Mapping[int, object] | None = None,
    epsilon: float | None = None,
    n_k: float | None = None,
    enumeration_cap: int = 2**12,
    samples: int = 200,
    seed: int = 0,
    engine: str = "auto",
) -> SensitivityResult:
    """Worst-case boundary influence on a single-site event.

    The volume is the span of the radius ball around e_x in the line graph;
    the value is the supremum over pairs of boundary configurations of the
    difference in the probability that the spin at x lies in the statistic
    set, which equals (max - min) over single boundary configurations.

    In exact-sup mode the supremum is exact: either through the monotone
    shortcut (binary spins, log-supermodular tables, single-state statistic,
    where the extremes sit at the constant boundaries), or by enumerating all
    boundary configurations when there are at most enumeration_cap of them.
    random-search mode samples boundary configurations and reports a lower
    bound.

    Raises:
        SizeError: exact-sup without the shortcut and beyond the cap.
    """
    hg = model.hypergraph
    incident = edge_neighborhood(hg, x)
    if e_x is None:
        e_x = min(incident)
    if e_x not in incident:
        raise ValueError(f"edge {e_x} does not contain vertex {x}")
    if statistic is None:
        statistic = (model.spin.states[-1],)
    stat_states = tuple(statistic)

    lg = build_line_graph(hg)
    volume = sorted(span(hg, ball(lg, e_x, radius)))
    structure = _volume_structure(model, volume)
    frozen = frozen or {}
    free_sites = [v for v in structure.needed_outside if v not in frozen]

    def probability(assignment: Mapping[int, object]) -> float:
        result = exact_kernel(
            model, volume, boundary_config=assignment, frozen=frozen,
            statistic=(x, stat_states), engine=engine,
        )
        return result.probability

    calls = 0
    flags: dict = {}
    q = model.spin.size
    if not free_sites:
        m_value, method, lower = 0.0, "frozen-boundary", False
        flags["note"] = "no free boundary sites; the kernel is constant"
    elif mode == "exact-sup":
        singleton = len(set(stat_states)) == 1
        if singleton and _tables_are_log_supermodular(model):
            hi = {v: model.spin.states[-1] for v in free_sites}
            lo = {v: model.spin.states[0] for v in free_sites}
            p_hi = probability(hi)
            p_lo = probability(lo)
            calls = 2
            m_value = abs(p_hi - p_lo)
            method = "monotone-extremes"
            lower = False
            flags["p_at_top"] = p_hi
            flags["p_at_bottom"] = p_lo
        elif q ** len(free_sites) <= enumeration_cap:
            best, worst = -math.inf, math.inf
            for idx in range(q ** len(free_sites)):
                digits = [(idx // q**j) % q for j in range(len(free_sites))]
                assignment = {
                    v: model.spin.states[d] for v, d in zip(free_sites, digits)
                }
                p = probability(assignment)
                calls += 1
                best, worst = max(best, p), min(worst, p)
            m_value = best - worst
            method = "enumeration"
            lower = False
        else:
            raise SizeError(
                f"{q}**{len(free_sites)} boundary configurations exceed the cap "
                f"{enumeration_cap} and the monotone shortcut does not apply; "
                "use random-search mode"
            )
    elif mode == "random-search":
        rng = np.random.Generator(np.random.PCG64(seed))
        best, worst = -math.inf, math.inf
        for _ in range(max(2, samples)):
            digits = rng.integers(0, q, size=len(free_sites))
            assignment = {
                v: model.spin.states[int(d)] for v, d in zip(free_sites, digits)
            }
            p = probability(assignment)
            calls += 1
            best, worst = max(best, p), min(worst, p)
        m_value = best - worst
        method = "random-search"
        lower = True
    else:
        raise ValueError(f"unknown mode {mode!r}")

    if n_k is None:
        n_k = float(radius)
    envelope = None if epsilon is None else sensitivity_envelope(epsilon, n_k)
    return SensitivityResult(
        m_value=m_value, envelope=envelope, method=method, radius=radius,
        volume=tuple(volume), boundary_sites=tuple(free_sites),
        statistic=stat_states, kernel_calls=calls, lower_bound=lower,
        n_k=n_k, flags=flags,
    )


# -- quenched-disorder decay experiment ----------------------------------------------


@dataclass
class DisorderDecayResult:
    rows: list[dict]
    tau: float
    k_star: float
    coupling: float
    abar: float
    ratio: float  # exp(abar) * tau(K)
    supercritical: bool
    replicas: int
    seed: int


def disorder_decay_experiment(
    tree_spec,
    interactions,
    x: int = 0,
    schedule: Sequence[int] = (1, 2, 3, 4, 5, 6),
    replicas: int = 100,
    abar: float | None = None,
    seed: int | None = None,
    include_exact_m: bool = False,
) -> DisorderDecayResult:
    """Path-sum decay under random interaction amplitudes.

    For each replica the amplitudes c_e are redrawn and, for each path size
    N_k of the schedule, the bound X_k = sum over simple paths from e_x of
    N_k nodes of the product over path nodes of exp(2*K*c_e) - 1 is computed
    by exhaustive enumeration.  The replica mean is reported against the
    geometric envelope r**N_k / (1 - r) with r = exp(abar) * tau(K).

    Args:
        tree_spec: a CliqueTreeSpec fixing the hypergraph.
        interactions: a RandomInteractionSpec with the coupling K.
        x: the vertex whose lowest-id incident edge roots the paths.
        schedule: increasing path sizes N_k.
        replicas: disorder draws; 0 skips the table.
        abar: growth bound entering the envelope; required.
        seed: base seed; defaults to the interaction spec's seed.
        include_exact_m: also compute the exact boundary sensitivity per k
            where the volume is tractable.

    Returns:
        DisorderDecayResult; supercritical flags a coupling at or beyond the
        critical one, where the envelope diverges (the rows still compute).
    """
    from . import models as _models
    from .enumeration import enumerate_paths

    if abar is None:
        raise ValueError("abar is required for the envelope")
    if any(b <= a for a, b in zip(schedule, schedule[1:])) or (schedule and schedule[0] < 1):
        raise ValueError("schedule must be strictly increasing and positive")
    coupling = interactions.coupling
    threshold = _models.tau_and_threshold(interactions, abar)
    tau_val = interactions.tau(coupling)
    ratio = math.exp(abar) * tau_val
    supercritical = not coupling < threshold.k_star

    hg, _ = _models.build_overlapping_cliques(tree_spec)
    lg = build_line_graph(hg)
    root = min(edge_neighborhood(hg, x))
    base_seed = interactions.seed if seed is None else seed

    sums = np.zeros((max(replicas, 0), len(schedule)))
    for rep in range(replicas):
        draw = _models.sample_random_interactions(
            hg, interactions, seed_override=_models.replica_seed(base_seed, rep)
        )
        weight = {e: math.expm1(2.0 * d) for e, d in draw.bounds.deltas().items()}
        for col, n_nodes in enumerate(schedule):
            total = 0.0
            for path in enumerate_paths(lg, root, n_nodes - 1, n_nodes):
                term = 1.0
                for node in path:
                    term *= weight[node]
                total += term
            sums[rep, col] = total

    rows = []
    for col, n_nodes in enumerate(schedule):
        envelope = ratio**n_nodes / (1.0 - ratio) if ratio < 1.0 else math.inf
        row = {
            "k": col + 1,
            "n_k": n_nodes,
            "mean": float(sums[:, col].mean()) if replicas else None,
            "stderr": (
                float(sums[:, col].std(ddof=1) / math.sqrt(replicas))
                if replicas > 1 else None
            ),
            "envelope": envelope,
        }
        if include_exact_m and replicas:
            row["exact_m"] = _exact_m_or_none(tree_spec, interactions, x, n_nodes,
                                              base_seed)
        rows.append(row)
    return DisorderDecayResult(
        rows=rows, tau=tau_val, k_star=threshold.k_star, coupling=coupling,
        abar=abar, ratio=ratio, supercritical=supercritical,
        replicas=replicas, seed=base_seed,
    )


def _exact_m_or_none(tree_spec, interactions, x, radius, base_seed):
    """Exact boundary sensitivity for replica 0's disorder, if tractable."""
    from . import models as _models

    hg, _ = _models.build_overlapping_cliques(tree_spec)
    draw = _models.sample_random_interactions(
        hg, interactions, seed_override=_models.replica_seed(base_seed, 0)
    )
    tables = {}
    for edge in hg.edges:
        size = len(edge)
        unit = _models.curie_weiss_oscillation(size)
        # per-edge coupling chosen so the table's oscillation equals K * c_e
        kappa = draw.bounds.delta(edge.id) / unit
        tables[edge.id] = _models.curie_weiss_factor_table(size, kappa)
    model = FactorModel(hg, SpinSpace.ising(), tables)
    try:
        return boundary_sensitivity(model, x, radius=radius).m_value
    except SizeError:
        return None
