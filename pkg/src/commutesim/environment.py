"""The city: congestion, attribute satisfaction, indicators and the period loop."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import consumat
from .config import EnvironmentConfig, ScenarioConfig
from .modes import ModeState
from .network import SocialGraph, build_network
from .policy import PolicyIntervention, apply_policies, intervention_from_spec
from .population import Population, synthesize_population
from .types import N_ATTRIBUTES, N_MODES, N_STRATEGIES, Attribute, ConfigError, Mode


@dataclass
class IndicatorSnapshot:
    period: int
    year: int
    shares: np.ndarray                 # (3,) car, moto, pub
    avg_travel_time: float             # minutes
    avg_speed: float                   # km/h, distance weighted
    co2_total: float                   # kg per year
    accidents_per_100k: float          # per 100k population per year
    strategy_counts: np.ndarray = field(default_factory=lambda: np.zeros(N_STRATEGIES, dtype=int))
    n_private_vehicles: dict = field(default_factory=dict)

    def as_row(self) -> dict:
        return {
            "period": self.period, "year": self.year,
            "share_car": float(self.shares[Mode.CAR]), "share_moto": float(self.shares[Mode.MOTORCYCLE]),
            "share_pub": float(self.shares[Mode.PUBLIC]), "avg_time_min": self.avg_travel_time,
            "avg_speed_kmh": self.avg_speed, "co2_kg": self.co2_total,
            "accidents_per_100k": self.accidents_per_100k,
            "n_repeat": int(self.strategy_counts[0]), "n_imitate": int(self.strategy_counts[1]),
            "n_inquire": int(self.strategy_counts[2]), "n_deliberate": int(self.strategy_counts[3]),
        }


# ---------------------------------------------------------------------------
# congestion

def road_capacity(env: EnvironmentConfig, n_agents: int) -> float:
    c = env.road_capacity_per_agent * n_agents
    if c <= 0:
        raise ConfigError("environment.road_capacity_per_agent", "capacity must be > 0")
    return c


def traffic_volume(modes: np.ndarray, state: ModeState) -> float:
    """Congesting volume in passenger-car units."""
    counts = np.bincount(modes, minlength=N_MODES)
    return float(counts @ state.pcu)


def congested_travel_time(mode: Mode, distance, volume: float, capacity: float,
                          state: ModeState, env: EnvironmentConfig):
    """Door-to-door minutes for ``mode`` under a BPR-type speed reduction.

    ``speed = base_speed / (1 + sensitivity * alpha * (volume / capacity) ** beta)``;
    public transit adds an average wait of half the headway.
    """
    if capacity <= 0:
        raise ConfigError("environment.road_capacity_per_agent", "capacity must be > 0")
    mode = int(mode)
    delay = 1.0 + state.congestion_sensitivity[mode] * env.bpr_alpha * (volume / capacity) ** env.bpr_beta
    minutes = np.asarray(distance, dtype=float) / state.base_speed[mode] * 60.0 * delay
    if mode == Mode.PUBLIC:
        minutes = minutes + state.headway[mode] / 2.0
    return float(minutes) if np.ndim(minutes) == 0 else minutes


def travel_times_all(distance: np.ndarray, volume: float, capacity: float,
                     state: ModeState, env: EnvironmentConfig) -> np.ndarray:
    return np.stack([congested_travel_time(m, distance, volume, capacity, state, env)
                     for m in Mode], axis=1)


# ---------------------------------------------------------------------------
# satisfaction with each attribute

def _clamp01(x):
    return np.clip(x, 0.0, 1.0)


def monthly_cost(distance, state: ModeState, env: EnvironmentConfig) -> np.ndarray:
    """(n, 3) running cost per month for each mode."""
    per_trip = np.asarray(distance, dtype=float)[:, None] * state.cost_per_km + state.fare_per_trip
    return per_trip * env.trips_per_year / 12.0


def attribute_satisfaction_all(pop: Population, state: ModeState, times: np.ndarray,
                               env: EnvironmentConfig) -> np.ndarray:
    """(n, 3, 7) satisfaction of every agent with every attribute of every mode."""
    n = len(pop)
    x = np.empty((n, N_MODES, N_ATTRIBUTES))
    income = pop.income[:, None]
    x[:, :, Attribute.ACQUISITION_COST] = _clamp01(
        1.0 - state.price / (env.accost_income_years * 12.0 * income))
    x[:, Mode.PUBLIC, Attribute.ACQUISITION_COST] = 1.0
    x[:, :, Attribute.OPERATING_COST] = _clamp01(
        1.0 - monthly_cost(pop.distance, state, env) / (env.opcost_income_share * income))
    x[:, :, Attribute.COMFORT] = state.comfort
    x[:, :, Attribute.ROAD_SAFETY] = _clamp01(1.0 - state.safety_risk / env.risk_max)
    x[:, :, Attribute.PERSONAL_SECURITY] = state.security
    x[:, :, Attribute.TRAVEL_TIME] = _clamp01((env.t_max - times) / (env.t_max - env.t_min))
    x[:, :, Attribute.EMISSIONS] = _clamp01(1.0 - per_passenger_gpkm(state, env) / env.gpkm_max)
    return x


def attribute_satisfaction(agent, mode: Mode, state: ModeState, time_min: float,
                           env: EnvironmentConfig) -> np.ndarray:
    """7-vector of attribute satisfactions for one agent and one mode."""
    m = int(mode)
    x = np.empty(N_ATTRIBUTES)
    annual_income = 12.0 * agent.income
    x[Attribute.ACQUISITION_COST] = 1.0 if m == Mode.PUBLIC else _clamp01(
        1.0 - state.price[m] / (env.accost_income_years * annual_income))
    cost = (agent.commute_distance * state.cost_per_km[m] + state.fare_per_trip[m]) * env.trips_per_year / 12.0
    x[Attribute.OPERATING_COST] = _clamp01(1.0 - cost / (env.opcost_income_share * agent.income))
    x[Attribute.COMFORT] = state.comfort[m]
    x[Attribute.ROAD_SAFETY] = _clamp01(1.0 - state.safety_risk[m] / env.risk_max)
    x[Attribute.PERSONAL_SECURITY] = state.security[m]
    x[Attribute.TRAVEL_TIME] = _clamp01((env.t_max - time_min) / (env.t_max - env.t_min))
    x[Attribute.EMISSIONS] = _clamp01(1.0 - per_passenger_gpkm(state, env)[m] / env.gpkm_max)
    return x


def per_passenger_gpkm(state: ModeState, env: EnvironmentConfig) -> np.ndarray:
    g = state.emissions_gpkm.copy()
    g[Mode.PUBLIC] /= env.bus_occupancy
    return g


def availability(pop: Population, state: ModeState) -> np.ndarray:
    """(n, 3) modes an agent can use: public always, private if owned or affordable."""
    affordable = state.price <= state.afford_ratio * 12.0 * pop.income[:, None]
    avail = pop.owns | affordable
    avail[:, Mode.PUBLIC] = True
    return avail


# ---------------------------------------------------------------------------
# indicators

def compute_indicators(modes: np.ndarray, distance: np.ndarray, times: np.ndarray,
                       state: ModeState, env: EnvironmentConfig, period: int = 0,
                       year: int = 0, strategy_counts=None) -> IndicatorSnapshot:
    """System indicators for one period.

    ``times`` is either each agent's realised trip time (length n) or the
    (n, 3) matrix of times per mode, from which the used mode is picked.
    """
    modes = np.asarray(modes)
    distance = np.asarray(distance, dtype=float)
    n = len(modes)
    times = np.asarray(times, dtype=float)
    if times.ndim == 2:
        times = times[np.arange(n), modes]
    counts = np.bincount(modes, minlength=N_MODES)
    gpkm = per_passenger_gpkm(state, env)
    km_per_year = distance * env.trips_per_year
    co2 = float(np.sum(km_per_year * gpkm[modes]) / 1000.0)
    accidents = float(np.sum(km_per_year * state.safety_risk[modes]) / 1e8)
    return IndicatorSnapshot(
        period=period, year=year, shares=counts / n,
        avg_travel_time=float(times.mean()),
        avg_speed=float(distance.sum() / (times.sum() / 60.0)),
        co2_total=co2,
        accidents_per_100k=accidents / n * 1e5,
        strategy_counts=np.zeros(N_STRATEGIES, dtype=int) if strategy_counts is None
        else np.asarray(strategy_counts, dtype=int),
        n_private_vehicles={"car": int(counts[Mode.CAR]), "moto": int(counts[Mode.MOTORCYCLE])},
    )


# ---------------------------------------------------------------------------
# period loop

@dataclass
class World:
    """Mutable state of one replication."""

    cfg: ScenarioConfig
    pop: Population
    graph: SocialGraph
    base_state: ModeState
    policies: list[PolicyIntervention]
    rng: np.random.Generator
    period: int = 0

    def __post_init__(self):
        self.adjacency = self.graph.adjacency()
        self.degree = np.maximum(self.graph.degree(), 1)
        self.capacity = road_capacity(self.cfg.environment, len(self.pop))

    @property
    def year(self) -> int:
        return self.cfg.simulation.start_year + self.period

    def mode_state(self, year_index: int | None = None) -> ModeState:
        y = self.period if year_index is None else year_index
        return apply_policies(self.base_state, [p for p in self.policies if p.active(y)])

    def expected_times(self, state: ModeState) -> np.ndarray:
        volume = traffic_volume(self.pop.mode, state)
        return travel_times_all(self.pop.distance, volume, self.capacity, state, self.cfg.environment)

    def snapshot(self, strategy_counts=None) -> IndicatorSnapshot:
        state = self.mode_state()
        times = self.expected_times(state)
        return compute_indicators(self.pop.mode, self.pop.distance, times, state,
                                  self.cfg.environment, self.period, self.year, strategy_counts)


def init_world(cfg: ScenarioConfig, seed) -> World:
    """Population, network and policy schedule for one replication.

    ``seed`` is anything accepted by :class:`numpy.random.SeedSequence`; three
    independent child streams drive the population, the network and the dynamics.
    """
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    s_pop, s_net, s_dyn = ss.spawn(3)
    pop = synthesize_population(cfg.population, np.random.default_rng(s_pop),
                                cfg.consumat.initial_experience)
    graph = build_network(pop.ses, cfg.network.m, cfg.network.homophily,
                          np.random.default_rng(s_net), cfg.network.bonus)
    policies = [intervention_from_spec(p, f"policies[{i}]") for i, p in enumerate(cfg.policies)]
    return World(cfg=cfg, pop=pop, graph=graph, base_state=ModeState.from_config(cfg.modes),
                 policies=policies, rng=np.random.default_rng(s_dyn))


def step_period(world: World) -> IndicatorSnapshot:
    """One decision period: commute for ``ticks_per_period`` ticks, then decide.

    During the ticks each agent accumulates its own door-to-door time on the
    mode it uses (with per-trip noise) while the system's expected times for the
    other modes are public knowledge. All agents then evaluate the same
    pre-decision state and switch simultaneously.
    """
    cfg, pop = world.cfg, world.pop
    env = cfg.environment
    n = len(pop)
    rows = np.arange(n)
    state = world.mode_state()
    times = world.expected_times(state)

    ticks = cfg.simulation.ticks_per_period
    sigma = env.tick_noise
    z = world.rng.standard_normal((ticks, n))
    trip_noise = np.exp(sigma * z - 0.5 * sigma * sigma).mean(axis=0)
    experienced = times.copy()
    experienced[rows, pop.mode] = times[rows, pop.mode] * trip_noise
    shock = env.satisfaction_noise * world.rng.standard_normal(n)
    u = world.rng.random(n)
    income_shock = world.rng.standard_normal(n)

    pop.experience = consumat.update_experience(pop.experience, pop.mode,
                                                cfg.consumat.experience_smoothing)

    # the trigger uses what the agent lived through this period; comparisons
    # between modes use the system's expected values
    sat = consumat.compute_satisfaction(
        pop.weights[:, None, :], attribute_satisfaction_all(pop, state, times, env))
    x_lived = attribute_satisfaction_all(pop, state, experienced, env)[rows, pop.mode]
    sat_lived = consumat.compute_satisfaction(pop.weights, x_lived) + shock

    counts = consumat.neighbor_mode_counts(world.adjacency, pop.mode)
    peer_share = counts[rows, pop.mode] / world.degree
    unc = consumat.uncertainty(pop.uncertainty_avoidance, pop.collectivism,
                               pop.experience[rows, pop.mode], peer_share)
    strategies = consumat.select_strategy(np.clip(sat_lived, 0.0, 1.0), pop.sat_threshold,
                                          unc, pop.unc_threshold)
    avail = availability(pop, state)
    new_modes = consumat.decide_modes_all(pop.mode, strategies, counts, sat, avail, u)

    pop.mode = new_modes
    pop.owns[rows, new_modes] = True
    vol = env.income_volatility
    pop.income = pop.income * (1.0 + env.income_growth) * np.exp(vol * income_shock - 0.5 * vol * vol)
    world.period += 1
    strategy_counts = np.bincount(strategies, minlength=N_STRATEGIES)
    return world.snapshot(strategy_counts)


def simulate(cfg: ScenarioConfig, seed) -> list[IndicatorSnapshot]:
    """Full horizon of one replication: the initial snapshot plus one per period."""
    world = init_world(cfg, seed)
    out = [world.snapshot()]
    for _ in range(cfg.simulation.years):
        out.append(step_period(world))
    return out
