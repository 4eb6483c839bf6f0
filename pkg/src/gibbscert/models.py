"""Generators for the structured example families used throughout the package.

* Overlapping-clique trees: a root hyperedge of n_1 vertices; every vertex of
  a generation-m edge except the one shared with its parent spawns exactly
  one generation-(m+1) edge overlapping in that single vertex.  The line
  graph of such a hypergraph is a rooted tree whose interior degrees follow
  the degree sequence, and every vertex lies in at most two edges.
* Curie-Weiss clique interactions on Ising spins, with the closed form for
  the factor's log oscillation.
* I.i.d. random coupling amplitudes with finite exponential moments, plus the
  moment function tau(K) = E[exp(2*K*c) - 1] and the critical coupling K*
  solving tau(K*) = exp(-abar).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from typing import Mapping, Sequence

import numpy as np

from .conditions import InteractionBounds
from .enumeration import GrowthFunction, growth_floor_log_squared
from .gibbs import FactorModel, SpinSpace
from .hypergraph import Hypergraph

FACTOR_TABLE_SIZE_CAP = 20  # tables hold 2**|e| entries; beyond this, refuse


@dataclass(frozen=True)
class CliqueTreeSpec:
    """Recipe for an overlapping-clique tree with an interaction.

    degrees lists the clique size per generation, outermost first; depth is
    its length.  interaction is "curie-weiss" (Ising spins, coupling K) or
    "custom-table" with one table per clique size in `tables`.
    """

    degrees: tuple[int, ...]
    interaction: str = "curie-weiss"
    coupling: float = 0.0
    tables: Mapping[int, np.ndarray] | None = None

    def __post_init__(self):
        if len(self.degrees) < 1:
            raise ValueError("at least one generation is required")
        if any(n < 2 for n in self.degrees):
            raise ValueError("every clique needs at least two vertices")
        if self.interaction not in ("curie-weiss", "custom-table"):
            raise ValueError(f"unknown interaction {self.interaction!r}")
        if self.interaction == "custom-table" and not self.tables:
            raise ValueError("custom-table interaction needs per-size tables")

    @property
    def depth(self) -> int:
        return len(self.degrees)

    @classmethod
    def constant(cls, n: int, depth: int, **kwargs) -> "CliqueTreeSpec":
        return cls(degrees=(n,) * depth, **kwargs)

    @classmethod
    def from_schedule(
        cls,
        base_degrees: Sequence[int],
        plateau_lengths: Sequence[int],
        rule: GrowthFunction | None = None,
        **kwargs,
    ) -> "CliqueTreeSpec":
        """Expand a plateau schedule into an explicit degree sequence.

        The degree may increase only at the first generation of each plateau,
        and plateau s must be long enough for its entry degree:
        plateau_lengths[s] >= rule(base_degrees[s]).  The default rule is
        floor(log n)**2.

        Raises:
            ValueError: naming the offending plateau index when the length
                requirement or the monotonicity of the bases fails.
        """
        if len(base_degrees) != len(plateau_lengths):
            raise ValueError("one plateau length per base degree is required")
        rule = rule or growth_floor_log_squared()
        degrees: list[int] = []
        for s, (n, length) in enumerate(zip(base_degrees, plateau_lengths), start=1):
            if s > 1 and n < base_degrees[s - 2]:
                raise ValueError(f"schedule step s={s}: degree decreases from "
                                 f"{base_degrees[s - 2]} to {n}")
            required = rule(n)
            if length < required:
                raise ValueError(
                    f"schedule step s={s}: plateau length {length} is below the "
                    f"required {required} for degree {n}"
                )
            degrees.extend([n] * length)
        return cls(degrees=tuple(degrees), **kwargs)

    def to_dict(self) -> dict:
        if self.interaction == "custom-table":
            raise ValueError("custom tables do not serialize to spec files")
        return {
            "family": "overlapping-cliques",
            "degrees": list(self.degrees),
            "depth": self.depth,
            "interaction": self.interaction,
            "coupling": self.coupling,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "CliqueTreeSpec":
        if data.get("family") != "overlapping-cliques":
            raise ValueError(f"unsupported model family {data.get('family')!r}")
        if "degrees" in data:
            degrees = tuple(int(n) for n in data["degrees"])
        elif "schedule" in data:
            sched = data["schedule"]
            return cls.from_schedule(
                [int(n) for n in sched["base_degrees"]],
                [int(l) for l in sched["plateau_lengths"]],
                interaction=data.get("interaction", "curie-weiss"),
                coupling=float(data.get("coupling", 0.0)),
            )
        else:
            raise ValueError("spec needs either 'degrees' or 'schedule'")
        declared_depth = data.get("depth")
        if declared_depth is not None and int(declared_depth) != len(degrees):
            raise ValueError("declared depth disagrees with the degree list")
        return cls(
            degrees=degrees,
            interaction=data.get("interaction", "curie-weiss"),
            coupling=float(data.get("coupling", 0.0)),
        )


def build_overlapping_cliques(spec: CliqueTreeSpec) -> tuple[Hypergraph, FactorModel]:
    """Generate the clique tree and its factor model.

    Edge ids are assigned breadth first, so the line-graph distance of an
    edge from the root edge equals its generation minus one, and vertex
    volumes of line-graph balls align with generations.
    """
    edge_vertex_sets: list[list[int]] = []
    next_vertex = 0

    def fresh(count: int) -> list[int]:
        nonlocal next_vertex
        out = list(range(next_vertex, next_vertex + count))
        next_vertex += count
        return out

    root = fresh(spec.degrees[0])
    edge_vertex_sets.append(root)
    frontier: list[tuple[list[int], int | None]] = [(root, None)]
    for generation in range(1, spec.depth):
        size = spec.degrees[generation]
        next_frontier: list[tuple[list[int], int | None]] = []
        for verts, shared in frontier:
            for v in verts:
                if v == shared:
                    continue  # the vertex shared with the parent spawns nothing
                child = [v] + fresh(size - 1)
                edge_vertex_sets.append(child)
                next_frontier.append((child, v))
        frontier = next_frontier

    hg = Hypergraph(edge_vertex_sets)
    spin = SpinSpace.ising()
    tables: dict[int, np.ndarray] = {}
    cache: dict[int, np.ndarray] = {}
    for edge in hg.edges:
        size = len(edge)
        if size not in cache:
            if spec.interaction == "curie-weiss":
                cache[size] = curie_weiss_factor_table(size, spec.coupling)
            else:
                try:
                    cache[size] = np.asarray(spec.tables[size], dtype=float)
                except KeyError:
                    raise ValueError(f"no custom table for clique size {size}") from None
        tables[edge.id] = cache[size]
    return hg, FactorModel(hg, spin, tables)


def curie_weiss_oscillation(edge_size: int) -> float:
    """Log oscillation per unit coupling of the Curie-Weiss clique factor.

    Equals (|e| - 1)/2 + floor(|e|/2)/|e|, which never exceeds |e|/2.
    """
    if edge_size < 2:
        raise ValueError("cliques have at least two vertices")
    c = (edge_size - 1) / 2.0 + (edge_size // 2) / edge_size
    assert c <= edge_size / 2.0
    return c


def curie_weiss_factor_table(edge_size: int, coupling: float) -> np.ndarray:
    """Factor table exp(K/|e| * sum over pairs of s_i*s_j) on Ising spins.

    Axes follow the spin order (-1, +1); entry [i_1, ..., i_n] is the factor
    at the configuration with spin index i_j at the j-th vertex.  The pair
    sum equals ((sum of spins)**2 - |e|) / 2.

    Raises:
        ValueError: when edge_size exceeds FACTOR_TABLE_SIZE_CAP.
    """
    if edge_size < 2:
        raise ValueError("cliques have at least two vertices")
    if edge_size > FACTOR_TABLE_SIZE_CAP:
        raise ValueError(
            f"table for edge size {edge_size} would hold 2**{edge_size} entries; "
            f"the cap is {FACTOR_TABLE_SIZE_CAP}"
        )
    spins = np.array([-1.0, 1.0])
    grids = np.meshgrid(*([spins] * edge_size), indexing="ij")
    total = np.add.reduce(grids)
    pair_sum = (total**2 - edge_size) / 2.0
    return np.exp(coupling * pair_sum / edge_size)


@dataclass(frozen=True)
class RandomInteractionSpec:
    """I.i.d. amplitudes c_e with a distribution that keeps all exponential
    moments finite, a coupling K, and a 64-bit seed.

    distribution is one of "exponential" (params: rate), "uniform"
    (params: low, high) or "degenerate" (params: value).
    """

    distribution: str
    params: tuple[float, ...]
    coupling: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.coupling < 0:
            raise ValueError("coupling must be nonnegative")
        if self.distribution == "exponential":
            (rate,) = self.params
            if rate <= 0:
                raise ValueError("exponential rate must be positive")
        elif self.distribution == "uniform":
            low, high = self.params
            if not 0 <= low < high:
                raise ValueError("uniform support must satisfy 0 <= low < high")
        elif self.distribution == "degenerate":
            (value,) = self.params
            if value < 0:
                raise ValueError("degenerate value must be nonnegative")
        else:
            raise ValueError(f"unsupported distribution {self.distribution!r}")

    # -- moments -------------------------------------------------------------

    def mean(self) -> float:
        if self.distribution == "exponential":
            return 1.0 / self.params[0]
        if self.distribution == "uniform":
            return 0.5 * (self.params[0] + self.params[1])
        return self.params[0]

    def moment_domain(self) -> float:
        """Largest K (exclusive) for which E[exp(2*K*c)] is finite."""
        if self.distribution == "exponential":
            return self.params[0] / 2.0
        return math.inf

    def tau(self, coupling: float) -> float:
        """tau(K) = E[exp(2*K*c) - 1], in closed form."""
        if coupling < 0:
            raise ValueError("coupling must be nonnegative")
        if self.distribution == "exponential":
            rate = self.params[0]
            if coupling >= rate / 2.0:
                raise ValueError(
                    f"coupling {coupling} is outside the finite-moment domain "
                    f"[0, {rate / 2.0})"
                )
            return 2.0 * coupling / (rate - 2.0 * coupling)
        if self.distribution == "uniform":
            low, high = self.params
            if coupling == 0.0:
                return 0.0
            two_k = 2.0 * coupling
            return (math.exp(two_k * high) - math.exp(two_k * low)) / (
                two_k * (high - low)
            ) - 1.0
        return math.expm1(2.0 * coupling * self.params[0])

    def draw(self, rng: np.random.Generator) -> float:
        if self.distribution == "exponential":
            return float(rng.exponential(1.0 / self.params[0]))
        if self.distribution == "uniform":
            return float(rng.uniform(self.params[0], self.params[1]))
        return self.params[0]

    def to_dict(self) -> dict:
        return {
            "distribution": self.distribution,
            "params": list(self.params),
            "coupling": self.coupling,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "RandomInteractionSpec":
        return cls(
            distribution=data["distribution"],
            params=tuple(float(p) for p in data["params"]),
            coupling=float(data.get("coupling", 0.0)),
            seed=int(data.get("seed", 0)),
        )


@dataclass
class SampledInteractions:
    """One disorder realization: amplitudes and the resulting oscillations."""

    amplitudes: dict[int, float]
    coupling: float
    bounds: InteractionBounds


def sample_random_interactions(
    hg: Hypergraph, spec: RandomInteractionSpec, seed_override: int | None = None
) -> SampledInteractions:
    """Draw one i.i.d. amplitude per edge; delta(e) = K * c_e.

    The generator for edge e is seeded by (seed, e), so the draw for an edge
    never depends on traversal order and is reproducible edge by edge.
    """
    seed = spec.seed if seed_override is None else seed_override
    amplitudes: dict[int, float] = {}
    for edge in hg.edges:
        rng = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence(entropy=seed, spawn_key=(edge.id,)))
        )
        amplitudes[edge.id] = spec.draw(rng)
    deltas = {e: spec.coupling * c for e, c in amplitudes.items()}
    return SampledInteractions(
        amplitudes=amplitudes,
        coupling=spec.coupling,
        bounds=InteractionBounds.from_deltas(deltas),
    )


@dataclass
class TauThreshold:
    """The moment function tau and the critical coupling solving tau = target."""

    tau: object  # callable K -> tau(K)
    k_star: float  # +inf sentinel when tau never reaches the target
    target: float
    abar: float


def tau_and_threshold(
    spec: RandomInteractionSpec, abar: float, tolerance: float = 1e-12
) -> TauThreshold:
    """Solve tau(K*) = exp(-abar) by bisection.

    tau is increasing and continuous in K with tau(0) = 0, so a sign change
    inside the moment domain brackets a unique root.  When tau stays below
    the target on its whole domain the threshold is the +inf sentinel.

    Returns:
        TauThreshold with the closed-form tau as a callable and K* resolved
        to the given absolute tolerance.
    """
    if abar < 0:
        raise ValueError("abar must be nonnegative")
    target = math.exp(-abar)
    domain = spec.moment_domain()

    def tau(k: float) -> float:
        return spec.tau(k)

    # find an upper bracket
    if math.isfinite(domain):
        high = domain * (1.0 - 1e-15)
        step = domain / 2.0
        probe = step
        while probe < high and tau(probe) < target:
            step /= 2.0
            probe = domain - step
        high = probe if tau(probe) >= target else high
        if tau(high) < target:
            return TauThreshold(tau=tau, k_star=math.inf, target=target, abar=abar)
    else:
        high = 1.0
        for _ in range(200):
            if tau(high) >= target:
                break
            high *= 2.0
        else:
            return TauThreshold(tau=tau, k_star=math.inf, target=target, abar=abar)

    low = 0.0
    while high - low > tolerance:
        mid = 0.5 * (low + high)
        if tau(mid) >= target:
            high = mid
        else:
            low = mid
    return TauThreshold(tau=tau, k_star=0.5 * (low + high), target=target, abar=abar)


def closed_form_k_star(spec: RandomInteractionSpec, abar: float) -> float:
    """Exact threshold for the families that invert in closed form."""
    y = math.exp(-abar)
    if spec.distribution == "exponential":
        rate = spec.params[0]
        return rate * y / (2.0 * (1.0 + y))
    if spec.distribution == "degenerate":
        c = spec.params[0]
        if c == 0.0:
            return math.inf
        return math.log1p(y) / (2.0 * c)
    raise ValueError(f"no closed form for distribution {spec.distribution!r}")


# -- spec file round trip ----------------------------------------------------


def load_model_spec(path) -> dict:
    """Read a model spec from a .json or .toml file."""
    text = open(path, "rb").read()
    name = str(path)
    if name.endswith(".toml"):
        try:
            import tomllib  # python >= 3.11
        except ModuleNotFoundError:
            import tomli as tomllib
        return tomllib.loads(text.decode("utf-8"))
    return json.loads(text.decode("utf-8"))


def save_model_spec(path, data: Mapping) -> None:
    """Write a model spec as canonical JSON (the lossless round-trip format)."""
    name = str(path)
    if not name.endswith(".json"):
        raise ValueError("specs are written as .json; .toml is read-only input")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(dict(data), fh, sort_keys=True, indent=2)
        fh.write("\n")


def replica_seed(base_seed: int, replica: int) -> int:
    """Stable per-replica seed derived from the experiment seed."""
    return int(np.random.SeedSequence(entropy=(base_seed, replica)).generate_state(1)[0])


def with_coupling(spec: RandomInteractionSpec, coupling: float) -> RandomInteractionSpec:
    return replace(spec, coupling=coupling)
