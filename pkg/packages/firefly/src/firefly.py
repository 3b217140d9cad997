"""
Firefly search over (W, P) for the penalised sum-rate problem.

Every firefly is a raw location (W, P) whose brightness is the general-mode sum rate minus the
constraint penalty. In each generation every firefly m moves toward every brighter firefly n,
immediately, in index order; the population is then ranked and the incumbent updated. Feasibility
is left to the penalty during the search and enforced only on the returned incumbent.
"""

import dataclasses
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from packages.config.src.config import worker_count
from packages.constellation.src.constellation import repair_pmf
from packages.rate_engine.src.mixture import resolve_policy
from packages.rate_engine.src.rates import PenaltyWeights, RateProblem, fitness, penalty, sum_rate
from packages.utils.src.errors import Errors

logger = logging.getLogger(__name__)

PMF_FLOOR = 1e-6


@dataclass(frozen=True)
class FaConfig:
    population: int = 100
    generations: int = 35
    beta0: float = 1.0
    gamma_fa: float = 1.0
    alpha0: float = 0.9
    penalty: PenaltyWeights = PenaltyWeights()
    seed: int = 0
    binned_search: bool = True

    def __post_init__(self):
        if self.population < 2:
            raise Errors.InvalidInputError(f"population must be >= 2, got {self.population}")
        if self.generations < 0:
            raise Errors.InvalidInputError(f"generations must be >= 0, got {self.generations}")
        if not self.beta0 > 0:
            raise Errors.InvalidInputError(f"beta0 must be > 0, got {self.beta0}")
        if not self.gamma_fa > 0:
            raise Errors.InvalidInputError(f"gamma_fa must be > 0, got {self.gamma_fa}")
        if not 0 < self.alpha0 <= 1:
            raise Errors.InvalidInputError(f"alpha0 must lie in (0, 1], got {self.alpha0}")
        if not 0 <= self.seed < 2 ** 64:
            raise Errors.InvalidInputError(f"seed must be a 64-bit unsigned integer, got {self.seed}")


@dataclass
class Firefly:
    w: np.ndarray
    p: np.ndarray
    brightness: float

    def copy(self) -> "Firefly":
        return Firefly(self.w.copy(), self.p.copy(), self.brightness)


@dataclass
class FaTrace:
    best_fitness: List[float] = field(default_factory=list)
    best_sum_rate: List[float] = field(default_factory=list)
    best_penalty: List[float] = field(default_factory=list)

    def record(self, brightness: float, rate: float, penalty_value: float):
        self.best_fitness.append(brightness)
        self.best_sum_rate.append(rate)
        self.best_penalty.append(penalty_value)

    def rows(self):
        """
        :return: One dictionary per generation (generation 0 is the initial population).
        """
        return [
            {
                "generation": t,
                "best_fitness": self.best_fitness[t],
                "best_sum_rate_bits": self.best_sum_rate[t],
                "penalty": self.best_penalty[t],
            }
            for t in range(len(self.best_fitness))
        ]


@dataclass
class FaResult:
    w: np.ndarray
    p: np.ndarray
    sum_rate: float
    trace: FaTrace


def _brightness_key(firefly: Firefly) -> float:
    return -firefly.brightness if not math.isnan(firefly.brightness) else math.inf


def rank(population: List[Firefly]) -> List[Firefly]:
    """
    Stable sort in descending brightness; NaN brightness goes last.
    """
    return sorted(population, key=_brightness_key)


def _problem_for(cfg: FaConfig, problem: RateProblem) -> RateProblem:
    """Search-time problem: the configured penalty weights and, with `binned_search`, binned densities."""
    policy = dataclasses.replace(resolve_policy(problem.grid_policy), binned=cfg.binned_search)
    return dataclasses.replace(problem, penalty_weights=cfg.penalty, grid_policy=policy)


def init_population(cfg: FaConfig, problem: RateProblem, rng: np.random.Generator,
                    fixed_pmf: Optional[np.ndarray] = None) -> List[Firefly]:
    """
    Draws N random feasible locations: W entries uniform on [−1/K, 1/K] (so every row has L1 norm ≤ 1)
    and P rows uniform on the simplex, unless the PMF is held fixed.
    """
    problem = _problem_for(cfg, problem)
    k, n_t, m = problem.users, problem.leds, problem.order
    locations = []
    for _ in range(cfg.population):
        w = rng.uniform(-1.0 / k, 1.0 / k, size=(n_t, k))
        p = np.array(fixed_pmf, dtype=float) if fixed_pmf is not None else rng.dirichlet(np.ones(m), size=k)
        locations.append((w, p))

    workers = min(worker_count(), cfg.population)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(lambda loc: fitness(loc[1], loc[0], problem), locations))
    else:
        values = [fitness(p, w, problem) for w, p in locations]
    return [Firefly(w, p, value) for (w, p), value in zip(locations, values)]


def attract(x_m: np.ndarray, x_n: np.ndarray, beta0: float, gamma: float, perturbation: np.ndarray) -> np.ndarray:
    """
    x_m + β₀ exp(−γ r²)(x_n − x_m) + perturbation, with r the Frobenius distance between x_m and x_n.
    """
    r2 = float(np.sum((x_n - x_m) ** 2))
    return x_m + beta0 * math.exp(-gamma * r2) * (x_n - x_m) + perturbation


def move_firefly(m: Firefly, n: Firefly, t: int, cfg: FaConfig, rng: np.random.Generator,
                 problem: RateProblem, fixed_pmf: Optional[np.ndarray] = None) -> Firefly:
    """
    Moves firefly m toward the brighter firefly n at generation t and re-evaluates its brightness.

    The random terms are α₀ᵗ·V with V_W ~ N(0, 1)/K and V_P ~ N(0, 1)/M entrywise; the P block stays
    untouched when the PMF is held fixed.
    """
    problem = _problem_for(cfg, problem)
    k, m_order = m.w.shape[1], m.p.shape[1]
    alpha_t = cfg.alpha0 ** t
    v_w = rng.standard_normal(m.w.shape) / k
    w = attract(m.w, n.w, cfg.beta0, cfg.gamma_fa, alpha_t * v_w)
    if fixed_pmf is None:
        v_p = rng.standard_normal(m.p.shape) / m_order
        p = attract(m.p, n.p, cfg.beta0, cfg.gamma_fa, alpha_t * v_p)
    else:
        p = m.p
    return Firefly(w, p, fitness(p, w, problem))


def project_feasible(w, p, floor: float = PMF_FLOOR):
    """
    Projects a raw location onto the feasible set: P clamped to [floor, 1] and renormalised, W rows with
    L1 norm above 1 scaled back to 1.
    """
    w = np.array(w, dtype=float)
    row_l1 = np.abs(w).sum(axis=1)
    scale = np.where(row_l1 > 1.0, 1.0 / np.where(row_l1 > 0, row_l1, 1.0), 1.0)
    return w * scale[:, None], repair_pmf(p, floor)


def run_fa(cfg: FaConfig, problem: RateProblem, fixed_pmf: Optional[np.ndarray] = None) -> FaResult:
    """
    Runs the firefly search for `cfg.generations` generations.

    :param cfg: Population size, generations, attractiveness, randomisation, penalty weights, seed and
                whether brightness uses binned densities.
    :param problem: Channel, constellations and noise.
    :param fixed_pmf: Hold P at this K×M matrix and search over W only (uniform-signalling baseline).
    :return: The best-ever location after projection to the feasible set, its general-mode sum rate on the
             exact quadrature and the per-generation incumbent trace.
    :raises SolverError: If every firefly of the initial population has NaN brightness.
    """
    exact_policy = dataclasses.replace(resolve_policy(problem.grid_policy), binned=False)
    problem = _problem_for(cfg, problem)
    rng = np.random.default_rng(cfg.seed)
    population = init_population(cfg, problem, rng, fixed_pmf)
    if all(math.isnan(f.brightness) for f in population):
        raise Errors.SolverError("Every firefly has NaN brightness; check the channel and noise configuration")

    population = rank(population)
    best = population[0].copy()
    trace = FaTrace()
    trace.record(best.brightness, _rate_of(best, problem), penalty(best.p, best.w, cfg.penalty))

    for t in range(1, cfg.generations + 1):
        for i in range(cfg.population):
            for j in range(cfg.population):
                if population[j].brightness > population[i].brightness:
                    population[i] = move_firefly(population[i], population[j], t, cfg, rng, problem, fixed_pmf)
        population = rank(population)
        if population[0].brightness > best.brightness:
            best = population[0].copy()
        trace.record(best.brightness, _rate_of(best, problem), penalty(best.p, best.w, cfg.penalty))
        logger.debug(
            "FA generation %d: fitness %.6f, sum rate %.6f bits, penalty %.3g",
            t, trace.best_fitness[-1], trace.best_sum_rate[-1], trace.best_penalty[-1],
        )

    w_star, p_star = project_feasible(best.w, best.p)
    if fixed_pmf is not None:
        p_star = np.array(fixed_pmf, dtype=float)
    rate = sum_rate(problem.H, w_star, problem.constellations, p_star, problem.noise, "general", exact_policy)
    logger.info("FA finished after %d generations: sum rate %.6f bits", cfg.generations, rate)
    return FaResult(w_star, p_star, rate, trace)


def _rate_of(firefly: Firefly, problem: RateProblem) -> float:
    return firefly.brightness + penalty(firefly.p, firefly.w, problem.penalty_weights)
