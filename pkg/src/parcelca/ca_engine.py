"""Constrained vector cellular automaton over irregular parcels.

Each round scores every candidate parcel with the product

    P = P_local * P_neighborhood * suitability * P_random

where P_local is the logistic potential from parcel covariates,
P_neighborhood the fraction of urban parcels within a fixed radius,
suitability a binary constraint mask, and P_random a multiplicative
perturbation 1 + (-ln g)^beta >= 1. Parcels scoring above the threshold
convert to urban, highest score first, while the city's total urban area
stays within its budget. P is a score, not a probability: the perturbation
can push it above 1, and the threshold comparison is still well defined.

Randomness is counter-based (Philox keyed by seed and round, indexed by
parcel id), so results are bit-identical across reruns and independent of
evaluation order.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from shapely.strtree import STRtree

from .calibrator import LogisticModel, attrs_matrix, predict_many
from .errors import ConfigError
from .parcel_attrs import CityContext
from .parcelizer import Parcel, ParcelState

logger = logging.getLogger(__name__)

DEFAULT_NEIGHBORHOOD_RADIUS_M = 500.0
DEFAULT_P_THD = 0.8
DEFAULT_BETA = 1.0
DEFAULT_MAX_ROUNDS = 50

SEED_BUDGET_FRACTION = 0.01


@dataclass(frozen=True)
class CAParams:
    beta: float = DEFAULT_BETA
    p_thd: float = DEFAULT_P_THD
    neighborhood_radius_m: float = DEFAULT_NEIGHBORHOOD_RADIUS_M
    rng_seed: int = 0
    max_rounds: int = DEFAULT_MAX_ROUNDS
    selection_mode: str = "threshold_greedy"

    def __post_init__(self):
        if not 0.0 <= self.beta <= 10.0:
            raise ConfigError(f"beta must be in [0, 10], got {self.beta}")
        if not 0.0 < self.p_thd < 1.0:
            raise ConfigError(f"p_thd must be in (0, 1), got {self.p_thd}")
        if self.neighborhood_radius_m <= 0:
            raise ConfigError("neighborhood radius must be positive")
        if self.selection_mode != "threshold_greedy":
            raise ConfigError(f"unknown selection mode {self.selection_mode!r}")


@dataclass
class NeighborhoodGraph:
    """Symmetric adjacency: parcels whose boundaries lie within the radius."""

    neighbors: dict[int, list[int]]
    radius_m: float

    def n(self, parcel_id: int) -> int:
        return len(self.neighbors.get(parcel_id, []))


@dataclass
class ConstraintMask:
    """1 = parcel may develop, 0 = forbidden (intersects water/steep areas)."""

    suitability: dict[int, int]

    def __getitem__(self, parcel_id: int) -> int:
        return self.suitability[parcel_id]


@dataclass
class RoundRecord:
    round_index: int
    conversions: int
    converted_area_m2: float
    urban_area_m2: float
    seeded: bool = False


@dataclass
class CAResult:
    states: dict[int, ParcelState]
    rounds: list[RoundRecord]
    budget_warning: bool = False

    @property
    def urban_ids(self) -> list[int]:
        return sorted(pid for pid, s in self.states.items() if s is ParcelState.URBAN)

    def urban_area_m2(self) -> float:
        return self.rounds[-1].urban_area_m2 if self.rounds else 0.0


def build_neighborhood(parcels: list[Parcel], radius_m: float) -> NeighborhoodGraph:
    """All parcel pairs with boundary-to-boundary distance <= radius."""
    if radius_m <= 0:
        raise ConfigError("neighborhood radius must be positive")
    neighbors: dict[int, list[int]] = {p.parcel_id: [] for p in parcels}
    if len(parcels) > 1:
        geoms = np.array([p.geometry for p in parcels], dtype=object)
        tree = STRtree(geoms)
        left, right = tree.query(geoms, predicate="dwithin", distance=radius_m)
        ids = np.array([p.parcel_id for p in parcels])
        for a, b in zip(ids[left], ids[right]):
            if a != b:
                neighbors[int(a)].append(int(b))
        for lst in neighbors.values():
            lst.sort()
    return NeighborhoodGraph(neighbors=neighbors, radius_m=radius_m)


def build_constraint_mask(parcels: list[Parcel], constraint_polygons: list) -> ConstraintMask:
    """Suitability 0 for parcels flagged forbidden or touching a constraint area."""
    suitability = {p.parcel_id: 0 if p.forbidden else 1 for p in parcels}
    if constraint_polygons and parcels:
        tree = STRtree([p.geometry for p in parcels])
        for poly in constraint_polygons:
            for idx in tree.query(poly, predicate="intersects"):
                suitability[parcels[int(idx)].parcel_id] = 0
    return ConstraintMask(suitability=suitability)


def neighborhood_potential(
    parcel: Parcel, graph: NeighborhoodGraph, states: dict[int, ParcelState]
) -> float:
    """Urban fraction of the neighborhood; 0 for isolated parcels (n = 0)."""
    ids = graph.neighbors.get(parcel.parcel_id, [])
    if not ids:
        return 0.0
    urban = sum(1 for i in ids if states[i] is ParcelState.URBAN)
    return urban / len(ids)


def perturbation(gamma: np.ndarray | float, beta: float) -> np.ndarray | float:
    """Stochastic factor 1 + (-ln gamma)^beta for gamma in (0, 1)."""
    return 1.0 + (-np.log(gamma)) ** beta


def stochastic_factor(rng: np.random.Generator, beta: float) -> float:
    """Draw gamma uniformly from the open interval (0, 1) and perturb.

    beta = 0 always yields 2 because x^0 = 1 for every positive x.
    """
    gamma = max(float(rng.random()), np.finfo(float).tiny)
    return float(perturbation(gamma, beta))


def transition_probability(
    parcel: Parcel,
    model: LogisticModel,
    graph: NeighborhoodGraph,
    states: dict[int, ParcelState],
    mask: ConstraintMask,
    p_random: float,
) -> float:
    """Score one parcel against the previous round's states.

    `p_random` is the already-drawn stochastic factor, so tests can pin it
    and the engine can draw it from the counter-based stream.
    """
    if mask[parcel.parcel_id] == 0:
        return 0.0
    p_local = predict_many(model, attrs_matrix([parcel.attributes], model.covariates))[0]
    p_omega = neighborhood_potential(parcel, graph, states)
    return float(p_local * p_omega * p_random)


def _round_gammas(seed: int, round_index: int, n: int) -> np.ndarray:
    """Uniform (0,1) draws for every parcel id, keyed by (seed, round)."""
    bg = np.random.Philox(key=np.uint64(seed & (2**64 - 1)), counter=[round_index, 0, 0, 0])
    g = np.random.Generator(bg).random(n)
    return np.maximum(g, np.finfo(float).tiny)


def run_ca(
    parcels: list[Parcel],
    ctx: CityContext,
    model: LogisticModel,
    params: CAParams,
    graph: NeighborhoodGraph | None = None,
    mask: ConstraintMask | None = None,
) -> CAResult:
    """Run the automaton until the budget, a quiet round, or max_rounds stops it.

    Round 0 seeds the map when nothing is urban yet: the highest local
    potentials convert, in order, until 1% of the budget is urbanized
    (otherwise the neighborhood term is identically zero and nothing can ever
    convert). Every subsequent round scores all suitable non-urban parcels
    synchronously against the previous round's states, keeps those above the
    threshold, and converts them in (score desc, id asc) order while the
    budget allows. Urban parcels never revert, and the summed urban area never
    exceeds the budget.
    """
    if not parcels:
        raise ConfigError("run_ca needs at least one parcel")
    budget = ctx.total_budget_m2

    ids = np.array([p.parcel_id for p in parcels], dtype=np.int64)
    if len(set(ids.tolist())) != len(ids):
        raise ConfigError("parcel ids must be unique")
    id_to_pos = {int(pid): i for i, pid in enumerate(ids)}
    areas = np.array([p.area_m2 for p in parcels], dtype=float)
    median_area = float(np.median(areas))

    if graph is None:
        graph = build_neighborhood(parcels, params.neighborhood_radius_m)
    if mask is None:
        mask = build_constraint_mask(parcels, ctx.constraint_polygons)
    suitable = np.array([mask[int(pid)] == 1 for pid in ids], dtype=bool)
    urban = np.array([p.state is ParcelState.URBAN for p in parcels], dtype=bool)

    # flat edge list for the vectorized urban-neighbor counts
    counts = np.array([len(graph.neighbors.get(int(pid), [])) for pid in ids], dtype=np.int64)
    edge_dst = np.fromiter(
        (id_to_pos[j] for pid in ids for j in graph.neighbors.get(int(pid), [])),
        dtype=np.int64,
        count=int(counts.sum()),
    )
    edge_src = np.repeat(np.arange(len(ids)), counts)

    p_local = predict_many(model, attrs_matrix([p.attributes for p in parcels], model.covariates))

    total_suitable_area = float(areas[suitable].sum())
    budget_warning = budget > total_suitable_area
    if budget_warning:
        logger.warning(
            "%s: budget %.0f m2 exceeds total suitable parcel area %.0f m2",
            ctx.city_id, budget, total_suitable_area,
        )

    rounds: list[RoundRecord] = []
    urban_area = float(areas[urban].sum())

    if not urban.any():
        converted = _seed_round(ids, areas, p_local, suitable, budget)
        urban[converted] = True
        gained = float(areas[converted].sum())
        urban_area += gained
        rounds.append(RoundRecord(0, int(converted.sum()), gained, urban_area, seeded=True))
        assert urban_area <= budget + 1e-9

    for round_index in range(1, params.max_rounds + 1):
        remaining = budget - urban_area
        if remaining <= median_area:
            break

        candidates = suitable & ~urban
        if not candidates.any():
            break
        cand = np.flatnonzero(candidates)

        # urban neighbor fraction against the previous round's snapshot
        urb = urban.astype(float)
        neigh_urban = np.bincount(edge_src, weights=urb[edge_dst], minlength=len(ids))
        p_omega = np.where(counts > 0, neigh_urban / np.maximum(counts, 1), 0.0)

        gammas = _round_gammas(params.rng_seed, round_index, len(ids))
        p_random = perturbation(gammas, params.beta)
        score = p_local[cand] * p_omega[cand] * p_random[cand]

        passing = score > params.p_thd
        if not passing.any():
            rounds.append(RoundRecord(round_index, 0, 0.0, urban_area))
            break
        pool = cand[passing]
        pool_scores = score[passing]
        order = np.lexsort((ids[pool], -pool_scores))
        converted_pos: list[int] = []
        filled = 0.0
        for k in order:
            pos = pool[k]
            if filled + areas[pos] <= remaining:
                converted_pos.append(int(pos))
                filled += float(areas[pos])

        urban[converted_pos] = True
        urban_area += filled
        rounds.append(RoundRecord(round_index, len(converted_pos), filled, urban_area))
        assert urban_area <= budget + 1e-9
        if not converted_pos:
            break

    states = {
        int(pid): (ParcelState.URBAN if urban[i] else ParcelState.NON_URBAN)
        for i, pid in enumerate(ids)
    }
    return CAResult(states=states, rounds=rounds, budget_warning=budget_warning)


def _seed_round(
    ids: np.ndarray,
    areas: np.ndarray,
    p_local: np.ndarray,
    suitable: np.ndarray,
    budget: float,
) -> np.ndarray:
    """Pick the strongest local potentials until 1% of the budget is urban.

    Walks suitable parcels in (potential desc, id asc) order; a parcel that
    would push the total past the full budget is skipped, never converted.
    """
    target = SEED_BUDGET_FRACTION * budget
    converted = np.zeros(len(ids), dtype=bool)
    eligible = np.flatnonzero(suitable)
    order = np.lexsort((ids[eligible], -p_local[eligible]))
    filled = 0.0
    for k in order:
        if filled >= target:
            break
        pos = eligible[k]
        if filled + areas[pos] <= budget:
            converted[pos] = True
            filled += float(areas[pos])
    return converted


def apply_states(parcels: list[Parcel], result: CAResult) -> None:
    """Write the final automaton states back onto the parcel objects."""
    for p in parcels:
        p.state = result.states[p.parcel_id]
