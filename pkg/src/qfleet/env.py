"""Multi-robot smart-factory delivery environment.

Discrete-time shared-reward POMDP: N transport robots carry LCD-panel loads
into M site warehouses under hard capacity limits, with a defect-inspection
side channel. Loads evolve by the clipped balance

    c' = clip(c - a + b, 0, c_max)

where ``a`` is the *requested* outgoing mass (a robot's chosen delivery
quantity, a warehouse's per-step outflow demand) and ``b`` the incoming mass.
Requests are deliberately not capped by the current load: the pre-clip
residual |c - a + b| is what the boundary penalties measure, so over-requests
and unmet demand show up as negative balance utilities. The mass physically
transferred to a warehouse is still min(request, load) -- a robot cannot ship
panels it does not hold.

Panel bookkeeping: arrivals come in whole panels of ``lcd_unit_weight`` kg
with a true-positive/false-positive defect mix drawn from the scenario's
input precision. A quality request hands the load to inspection for
``quality_delay`` steps; on completion all false-positive panels (and their
mass) leave to the defect collection point.

A ``FactoryState`` is a value; ``step`` is a pure function of
(state, actions, rng), so independent episodes can run concurrently with
independent rng streams.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

INDEX_BITS = 3  # binary agent-id bits prefixed to every observation


class ContractError(ValueError):
    """Caller violated a step/reset contract (wrong action count, etc.)."""


class ScenarioError(ValueError):
    """Malformed or non-covering precision schedule."""


@dataclass(frozen=True)
class FactoryConfig:
    """Environment constants. Defaults model the 6-robot, 2-site factory."""

    num_agents: int = 6
    num_sites: int = 2
    warehouse_capacity: float = 2000.0
    amr_capacity: float = 500.0
    episode_length: int = 30
    lcd_unit_weight: float = 6.0
    precision_catalog: tuple = (0.619, 0.958, 0.971)
    quality_delay: int = 3
    delay_weight: float = 0.1
    balance_weight: float = 1.0
    warehouse_weight: float = 10.0
    arrival_cap: float = 60.0
    warehouse_outflow: float = 100.0
    quantity_levels: tuple = (30.0, 90.0)
    minutes_per_step: int = 2

    def __post_init__(self):
        if not 1 <= self.num_agents <= (1 << INDEX_BITS):
            raise ContractError(
                f"num_agents must be in 1..{1 << INDEX_BITS} "
                f"(observation carries {INDEX_BITS} id bits)"
            )
        if self.num_sites < 1:
            raise ContractError("num_sites must be >= 1")
        if min(self.warehouse_capacity, self.amr_capacity, self.lcd_unit_weight) <= 0:
            raise ContractError("capacities and unit weight must be positive")
        if self.episode_length < 1:
            raise ContractError("episode_length must be >= 1")
        if self.quality_delay < 0:
            raise ContractError("quality_delay must be >= 0")
        if self.arrival_cap < 0 or self.warehouse_outflow < 0:
            raise ContractError("arrival_cap and warehouse_outflow must be >= 0")
        for p in self.precision_catalog:
            if not 0 < p <= 1:
                raise ContractError(f"precision {p} outside (0, 1]")
        for q in self.quantity_levels:
            if q <= 0:
                raise ContractError("quantity levels must be positive")

    @property
    def num_actions(self) -> int:
        # (site, quantity) pairs plus the quality request
        return self.num_sites * len(self.quantity_levels) + 1

    @property
    def observation_dim(self) -> int:
        return INDEX_BITS + 1 + self.num_sites

    @property
    def state_dim(self) -> int:
        return 2 * self.num_agents + self.num_sites

    def decode_action(self, index: int):
        """(site, quantity, quality_flag) for a catalog index.

        Catalog order: (site 0, low qty), (site 0, high qty), ...,
        (site M-1, high qty), quality request.
        """
        if not 0 <= index < self.num_actions:
            raise ContractError(f"action index {index} outside 0..{self.num_actions - 1}")
        if index == self.num_actions - 1:
            return None, 0.0, True
        site, level = divmod(index, len(self.quantity_levels))
        return site, float(self.quantity_levels[level]), False


@dataclass
class FactoryState:
    """Ground-truth state: loads, per-robot defect statistics, queue status."""

    t: int
    warehouse_loads: np.ndarray
    amr_loads: np.ndarray
    true_positives: np.ndarray
    false_positives: np.ndarray
    pending_quality: np.ndarray
    delay_utilities: np.ndarray  # u_d from the step that produced this state
    incoming_precision: np.ndarray

    def copy(self) -> "FactoryState":
        return FactoryState(
            self.t,
            self.warehouse_loads.copy(),
            self.amr_loads.copy(),
            self.true_positives.copy(),
            self.false_positives.copy(),
            self.pending_quality.copy(),
            self.delay_utilities.copy(),
            self.incoming_precision.copy(),
        )


@dataclass(frozen=True)
class StepMetrics:
    """Per-step aggregates used by the experiment metric stream."""

    precision_pct: float
    processing_minutes: float
    avg_load_amr: float
    avg_load_warehouse: float
    overflow_amr: float
    overflow_warehouse: float
    underflow_amr: float
    underflow_warehouse: float


@dataclass(frozen=True)
class StepDetail:
    """Sampled draws and per-entity intermediates, for independent re-checks."""

    requested: np.ndarray  # per robot, the 'a' term of the load balance
    delivered: np.ndarray  # mass physically shipped to a warehouse
    destinations: np.ndarray  # warehouse index, -1 when no delivery
    arrivals: np.ndarray  # drawn incoming mass per robot
    arrival_tp: np.ndarray
    arrival_fp: np.ndarray
    precision_draws: np.ndarray  # nan where no arrival was drawn
    amr_preclip: np.ndarray  # signed c - a + b before clipping
    warehouse_preclip: np.ndarray
    quality_utils: np.ndarray
    delay_utils: np.ndarray
    balance_utils: np.ndarray
    warehouse_utils: np.ndarray


@dataclass(frozen=True)
class StepOutcome:
    state: FactoryState
    observations: list
    reward: float
    metrics: StepMetrics
    detail: StepDetail
    done: bool


def load_update(current: float, delivered: float, received: float, cap: float) -> float:
    """clip(current - delivered + received, 0, cap)."""
    if cap <= 0:
        raise ContractError("capacity must be positive")
    return min(cap, max(current - delivered + received, 0.0))


def precision_utility(tp: int, fp: int) -> float:
    """tp / (tp + fp); an empty load counts as perfectly clean (1.0)."""
    total = tp + fp
    if total == 0:
        return 1.0
    return tp / total


def delay_utility(quality_flag: int, quality_delay: int) -> float:
    """-(1 + quality_delay * quality_flag): every step costs one time unit,
    a quality request costs the inspection delay on top."""
    return -(1.0 + quality_delay * quality_flag)


def balance_utility(residual: float, cap: float, hit_floor: bool, hit_ceiling: bool) -> float:
    """Negative boundary-violation magnitude: the residual itself at the
    floor, the overshoot |cap - residual| at the ceiling, 0 inside."""
    penalty = 0.0
    if hit_floor:
        penalty += residual
    if hit_ceiling:
        penalty += abs(cap - residual)
    return -penalty


def shared_reward(quality_utils, delay_utils, balance_utils, warehouse_utils, config: FactoryConfig) -> float:
    """sum_n (u_q + w_d*u_d + w_b*u_b) + w_W * sum_m u_W."""
    per_agent = (
        np.sum(quality_utils)
        + config.delay_weight * np.sum(delay_utils)
        + config.balance_weight * np.sum(balance_utils)
    )
    return float(per_agent + config.warehouse_weight * np.sum(warehouse_utils))


def agent_observation(config: FactoryConfig, state: FactoryState, agent: int) -> np.ndarray:
    """[id bits (little-endian), own load, warehouse loads], loads in [0, 1]."""
    obs = np.empty(config.observation_dim)
    for j in range(INDEX_BITS):
        obs[j] = (agent >> j) & 1
    obs[INDEX_BITS] = state.amr_loads[agent] / config.amr_capacity
    obs[INDEX_BITS + 1 :] = state.warehouse_loads / config.warehouse_capacity
    return obs


def all_observations(config: FactoryConfig, state: FactoryState) -> list:
    return [agent_observation(config, state, n) for n in range(config.num_agents)]


def critic_state_vector(config: FactoryConfig, state: FactoryState) -> np.ndarray:
    """Normalized ground-truth vector for the centralized critic:
    (load, delay) pair per robot, then the warehouse loads, all in [0, 1]."""
    vec = np.empty(config.state_dim)
    tau = config.quality_delay
    for n in range(config.num_agents):
        vec[2 * n] = state.amr_loads[n] / config.amr_capacity
        vec[2 * n + 1] = (-state.delay_utilities[n] - 1.0) / tau if tau > 0 else 0.0
    vec[2 * config.num_agents :] = state.warehouse_loads / config.warehouse_capacity
    return vec


def _remove_panels(tp: int, fp: int, count: int):
    """Take ``count`` panels out, proportionally to the current tp/fp mix."""
    total = tp + fp
    if total == 0 or count <= 0:
        return tp, fp
    count = min(count, total)
    tp_out = int(round(count * tp / total))
    tp_out = min(tp, max(tp_out, count - fp))
    return tp - tp_out, fp - (count - tp_out)


class PrecisionSchedule:
    """Time-phased input-load precision.

    Phases are (start_minute, precision) pairs; a precision of None means
    "draw uniformly from the catalog at each arrival". The last phase extends
    to the end of the horizon.
    """

    def __init__(self, phases):
        phases = [(float(m), None if p is None else float(p)) for m, p in phases]
        if not phases:
            raise ScenarioError("schedule has no phases")
        if phases[0][0] > 0:
            raise ScenarioError("schedule must cover the horizon from minute 0")
        starts = [m for m, _ in phases]
        if sorted(starts) != starts or len(set(starts)) != len(starts):
            raise ScenarioError("phase start minutes must be strictly increasing")
        for _, p in phases:
            if p is not None and not 0 < p <= 1:
                raise ScenarioError(f"precision {p} outside (0, 1]")
        self.phases = phases

    @classmethod
    def always_random(cls) -> "PrecisionSchedule":
        return cls([(0.0, None)])

    @classmethod
    def from_file(cls, path) -> "PrecisionSchedule":
        try:
            raw = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ScenarioError(f"cannot read scenario {path}: {exc}") from None
        if not isinstance(raw, dict) or "phases" not in raw:
            raise ScenarioError(f"scenario {path} must be an object with a 'phases' list")
        phases = []
        for entry in raw["phases"]:
            prec = entry.get("precision", "random")
            phases.append(
                (entry["start_minute"], None if prec in (None, "random") else prec)
            )
        return cls(phases)

    def to_json(self) -> str:
        return json.dumps(
            {
                "phases": [
                    {"start_minute": m, "precision": "random" if p is None else p}
                    for m, p in self.phases
                ]
            }
        )

    def precision_at(self, minute: float, rng, catalog) -> float:
        value = None
        for start, p in self.phases:
            if minute >= start:
                value = p
            else:
                break
        if value is None:
            return float(catalog[rng.integers(len(catalog))])
        return value


class FactoryEnv:
    """Stateless episode driver bundling a config and a precision schedule."""

    def __init__(self, config: FactoryConfig | None = None, schedule: PrecisionSchedule | None = None):
        self.config = config if config is not None else FactoryConfig()
        self.schedule = schedule if schedule is not None else PrecisionSchedule.always_random()

    def reset(self, rng):
        """Fresh t=0 state: empty loads, idle queues, per-robot incoming
        precision drawn uniformly over the catalog's range."""
        if not isinstance(rng, np.random.Generator):
            rng = np.random.default_rng(rng)
        cfg = self.config
        lo, hi = min(cfg.precision_catalog), max(cfg.precision_catalog)
        state = FactoryState(
            t=0,
            warehouse_loads=np.zeros(cfg.num_sites),
            amr_loads=np.zeros(cfg.num_agents),
            true_positives=np.zeros(cfg.num_agents, dtype=np.int64),
            false_positives=np.zeros(cfg.num_agents, dtype=np.int64),
            pending_quality=np.zeros(cfg.num_agents, dtype=np.int64),
            delay_utilities=np.full(cfg.num_agents, -1.0),
            incoming_precision=rng.uniform(lo, hi, cfg.num_agents),
        )
        return state, all_observations(cfg, state)

    def step(self, state: FactoryState, actions, rng) -> StepOutcome:
        """One transition. Per active robot the rng stream is consumed in a
        fixed order: arrival panel count, input precision, composition draw."""
        cfg = self.config
        if len(actions) != cfg.num_agents:
            raise ContractError(
                f"expected {cfg.num_agents} actions, got {len(actions)}"
            )
        if state.t >= cfg.episode_length:
            raise ContractError("episode already finished")
        N, M = cfg.num_agents, cfg.num_sites
        unit = cfg.lcd_unit_weight
        minute = state.t * cfg.minutes_per_step

        loads = state.amr_loads.copy()
        tp = state.true_positives.copy()
        fp = state.false_positives.copy()
        pending = state.pending_quality.copy()
        incoming = state.incoming_precision.copy()

        requested = np.zeros(N)
        delivered = np.zeros(N)
        destinations = np.full(N, -1, dtype=np.int64)
        arrivals = np.zeros(N)
        arrival_tp = np.zeros(N, dtype=np.int64)
        arrival_fp = np.zeros(N, dtype=np.int64)
        precision_draws = np.full(N, np.nan)
        delay_utils = np.empty(N)
        max_panels = int(cfg.arrival_cap // unit)

        for n in range(N):
            if pending[n] > 0:
                # still with the quality engineers: no transfer, no arrivals
                pending[n] -= 1
                delay_utils[n] = delay_utility(0, cfg.quality_delay)
                if pending[n] == 0:
                    # inspection done: defective panels leave to the
                    # collection point, flowing through the load balance
                    requested[n] = fp[n] * unit
                    fp[n] = 0
                continue
            site, quantity, quality = cfg.decode_action(int(actions[n]))
            if quality:
                pending[n] = cfg.quality_delay
                delay_utils[n] = delay_utility(1, cfg.quality_delay)
                if cfg.quality_delay == 0:
                    fp[n] = 0  # instantaneous inspection
                continue
            delay_utils[n] = delay_utility(0, cfg.quality_delay)
            requested[n] = quantity
            destinations[n] = site
            delivered[n] = min(quantity, loads[n])
            panels_in = int(rng.integers(0, max_panels + 1))
            arrivals[n] = panels_in * unit
            rho = self.schedule.precision_at(minute, rng, cfg.precision_catalog)
            incoming[n] = rho
            precision_draws[n] = rho
            expected_tp = rho * panels_in
            whole = int(expected_tp)
            arrival_tp[n] = whole + (1 if rng.random() < expected_tp - whole else 0)
            arrival_fp[n] = panels_in - arrival_tp[n]

        amr_preclip = loads - requested + arrivals
        balance_utils = np.empty(N)
        for n in range(N):
            new_load = load_update(loads[n], requested[n], arrivals[n], cfg.amr_capacity)
            balance_utils[n] = balance_utility(
                abs(amr_preclip[n]),
                cfg.amr_capacity,
                new_load == 0.0,
                new_load == cfg.amr_capacity,
            )
            loads[n] = new_load
            # panel bookkeeping: shipments leave with the pre-arrival mix
            tp[n], fp[n] = _remove_panels(int(tp[n]), int(fp[n]), int(round(delivered[n] / unit)))
            tp[n] += arrival_tp[n]
            fp[n] += arrival_fp[n]
            held = int(round(loads[n] / unit))
            if tp[n] + fp[n] > held:
                tp[n], fp[n] = _remove_panels(int(tp[n]), int(fp[n]), int(tp[n] + fp[n]) - held)

        warehouse_in = np.zeros(M)
        for n in range(N):
            if destinations[n] >= 0:
                warehouse_in[destinations[n]] += delivered[n]
        wh_loads = state.warehouse_loads.copy()
        warehouse_preclip = wh_loads - cfg.warehouse_outflow + warehouse_in
        warehouse_utils = np.empty(M)
        for m in range(M):
            new_load = load_update(
                wh_loads[m], cfg.warehouse_outflow, warehouse_in[m], cfg.warehouse_capacity
            )
            warehouse_utils[m] = balance_utility(
                abs(warehouse_preclip[m]),
                cfg.warehouse_capacity,
                new_load == 0.0,
                new_load == cfg.warehouse_capacity,
            )
            wh_loads[m] = new_load

        quality_utils = np.array([precision_utility(int(tp[n]), int(fp[n])) for n in range(N)])
        reward = shared_reward(quality_utils, delay_utils, balance_utils, warehouse_utils, cfg)

        metrics = StepMetrics(
            precision_pct=100.0 * float(np.mean(quality_utils)),
            processing_minutes=float(-np.sum(delay_utils)) * cfg.minutes_per_step,
            avg_load_amr=float(np.mean(loads)),
            avg_load_warehouse=float(np.mean(wh_loads)),
            overflow_amr=float(np.sum(np.maximum(amr_preclip - cfg.amr_capacity, 0.0))),
            overflow_warehouse=float(
                np.sum(np.maximum(warehouse_preclip - cfg.warehouse_capacity, 0.0))
            ),
            underflow_amr=float(np.sum(np.maximum(-amr_preclip, 0.0))),
            underflow_warehouse=float(np.sum(np.maximum(-warehouse_preclip, 0.0))),
        )
        detail = StepDetail(
            requested=requested,
            delivered=delivered,
            destinations=destinations,
            arrivals=arrivals,
            arrival_tp=arrival_tp,
            arrival_fp=arrival_fp,
            precision_draws=precision_draws,
            amr_preclip=amr_preclip,
            warehouse_preclip=warehouse_preclip,
            quality_utils=quality_utils,
            delay_utils=delay_utils,
            balance_utils=balance_utils,
            warehouse_utils=warehouse_utils,
        )
        next_state = FactoryState(
            t=state.t + 1,
            warehouse_loads=wh_loads,
            amr_loads=loads,
            true_positives=tp,
            false_positives=fp,
            pending_quality=pending,
            delay_utilities=delay_utils.copy(),
            incoming_precision=incoming,
        )
        return StepOutcome(
            state=next_state,
            observations=all_observations(cfg, next_state),
            reward=reward,
            metrics=metrics,
            detail=detail,
            done=next_state.t >= cfg.episode_length,
        )
