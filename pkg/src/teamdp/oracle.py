"""Exhaustive ground-truth computations.

Everything in this module works by brute-force expansion of the outcome
tree with plain dicts and loops, independently of the belief-filter and
dynamic-programming code, so it can serve as the trusted side of every
cross-check.  It is deliberately naive; use it at desk scale only.

Occupancy bookkeeping: an "occupancy" is an unnormalized map
state -> probability mass of reaching this history node in this state.
Summing stage costs against occupancies and recursing over positive-mass
observation branches enumerates the full expectation exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .errors import BudgetExceededError, ZeroLikelihoodError
from .model import (
    HistoryView,
    InformationStructure,
    TeamModel,
    Trajectory,
    history_key,
    prefix_view,
    tiebreak_joint_actions,
    view_key,
    view_known,
)
from .strategies import CentralizedTableStrategy, DecentralizedStrategy, MemberTableStrategy

__all__ = [
    "WeightedOutcome",
    "EnumerationResult",
    "enumerate_outcomes",
    "exact_cost",
    "exact_cost_to_go",
    "exact_posterior",
    "enumerate_centralized",
    "enumerate_decentralized",
    "DEFAULT_STRATEGY_BUDGET",
]

DEFAULT_STRATEGY_BUDGET = 10_000_000


@dataclass(frozen=True)
class WeightedOutcome:
    """One trajectory with its probability (None for sampled rollouts) and
    realized total cost."""

    trajectory: Trajectory
    probability: float | None
    cost: float


@dataclass(frozen=True)
class EnumerationResult:
    """Outcome of an exhaustive strategy search."""

    num_strategies: int
    optimal_cost: float
    strategy: object


def _predict_occ(model: TeamModel, occ: dict[int, float], a: int) -> dict[int, float]:
    nxt: dict[int, float] = {}
    tr = model.transition
    for x, w in occ.items():
        row = tr[x, a]
        for x2 in range(model.num_states):
            p = row[x2]
            if p > 0.0:
                nxt[x2] = nxt.get(x2, 0.0) + w * p
    return nxt


def _obs_weight(model: TeamModel, x: int, y: tuple[int, ...]) -> float:
    w = 1.0
    for k, kern in enumerate(model.observation_kernels):
        w *= kern[x, y[k]]
        if w == 0.0:
            return 0.0
    return w


def _split_by_obs(model: TeamModel, occ: dict[int, float]):
    """Yield (joint observation, occupancy) for every positive branch."""
    for y in model.joint_observations:
        occy = {}
        for x, w in occ.items():
            ow = _obs_weight(model, x, y)
            if ow > 0.0:
                occy[x] = w * ow
        if occy:
            yield y, occy


# ---------------------------------------------------------------------------
# expected cost of a fixed strategy


def exact_cost(model: TeamModel, structure: InformationStructure, strategy) -> float:
    """Exact expected total cost of a deterministic team strategy.

    Raises StrategyUndefinedError if the strategy has no action at a
    history reached with positive probability.
    """
    occ0 = {x: float(p) for x, p in enumerate(model.initial_dist) if p > 0.0}
    return _cost_from(model, strategy, (), (), occ0, 0)


def _cost_from(model, strategy, obs_seq, act_seq, occ, t) -> float:
    T = model.horizon
    if t == T:
        return sum(w * model.terminal_cost[x] for x, w in occ.items())
    u = strategy.joint_action(obs_seq, act_seq, t)
    a = model.flat_action(u)
    total = sum(w * model.stage_cost[t, x, a] for x, w in occ.items())
    occp = _predict_occ(model, occ, a)
    if t + 1 == T:
        # the trailing observation carries no cost and integrates out
        return total + sum(w * model.terminal_cost[x] for x, w in occp.items())
    for y, occy in _split_by_obs(model, occp):
        total += _cost_from(model, strategy, obs_seq + (y,), act_seq + (u,), occy, t + 1)
    return total


def exact_cost_to_go(
    model: TeamModel,
    structure: InformationStructure,
    strategy,
    obs_seq: tuple,
    act_seq: tuple,
    t: int,
) -> float:
    """Expected cost from time t on, conditioned on a realized full-history
    prefix (t joint observations, t joint actions), with future actions
    drawn from ``strategy``."""
    occ = {x: float(p) for x, p in enumerate(model.initial_dist) if p > 0.0}
    for s in range(t):
        occ = _predict_occ(model, occ, model.flat_action(act_seq[s]))
        y = obs_seq[s]
        occ = {x: w * _obs_weight(model, x, y) for x, w in occ.items()}
        occ = {x: w for x, w in occ.items() if w > 0.0}
    z = sum(occ.values())
    if z == 0.0:
        raise ZeroLikelihoodError("history prefix has probability zero")
    occ = {x: w / z for x, w in occ.items()}
    return _cost_from(model, strategy, tuple(obs_seq), tuple(act_seq), occ, t)


# ---------------------------------------------------------------------------
# full outcome expansion


def enumerate_outcomes(model: TeamModel, structure: InformationStructure, strategy) -> list[WeightedOutcome]:
    """All positive-probability trajectories under ``strategy`` with their
    probabilities and realized costs.  Probabilities sum to one."""
    T = model.horizon
    out: list[WeightedOutcome] = []

    def rec(x_seq, obs_seq, act_seq, w, cost):
        t = len(act_seq)
        if t == T:
            out.append(WeightedOutcome(Trajectory(x_seq, obs_seq, act_seq), w, cost))
            return
        u = strategy.joint_action(obs_seq, act_seq, t)
        a = model.flat_action(u)
        c = cost + float(model.stage_cost[t, x_seq[-1], a])
        row = model.transition[x_seq[-1], a]
        for x2 in range(model.num_states):
            p = row[x2]
            if p == 0.0:
                continue
            for y in model.joint_observations:
                ow = _obs_weight(model, x2, y)
                if ow == 0.0:
                    continue
                c2 = c + (float(model.terminal_cost[x2]) if t + 1 == T else 0.0)
                rec(x_seq + (x2,), obs_seq + (y,), act_seq + (u,), w * p * ow, c2)

    for x0, p0 in enumerate(model.initial_dist):
        if p0 > 0.0:
            rec((x0,), (), (), float(p0), 0.0)
    return out


# ---------------------------------------------------------------------------
# posteriors by conditioning the joint outcome law


def exact_posterior(
    model: TeamModel,
    structure: InformationStructure,
    strategy,
    view: HistoryView,
) -> np.ndarray:
    """Distribution of x_t given a realized view, by direct conditioning.

    Sums the joint law induced by ``strategy`` over every trajectory
    consistent with the view's recorded data, then normalizes.  Action
    slots recorded in the view are used as given; where the view leaves an
    action unrecorded the strategy supplies it, and recorded slots must
    agree with the strategy (disagreeing branches carry zero mass).
    ``strategy`` may be None only if the view records every action.
    Raises ZeroLikelihoodError when the view has probability zero.
    """
    known = view_known(view)
    t = view.time
    S, K = model.num_states, model.num_members
    post = np.zeros(S)

    def joint_obs_at(s: int):
        choices = []
        for m in range(K):
            v = known.get((s, m, "obs"))
            choices.append((v,) if v is not None else tuple(range(model.observation_sizes[m])))
        return product(*choices)

    def rec(x, obs_seq, act_seq, w, s):
        if s == t:
            post[x] += w
            return
        su = strategy.joint_action(obs_seq, act_seq, s) if strategy is not None else None
        u = []
        for m in range(K):
            v = known.get((s, m, "act"))
            if v is not None:
                if su is not None and su[m] != v:
                    return  # strategy contradicts the recorded action
                u.append(v)
            elif su is not None:
                u.append(su[m])
            else:
                raise ZeroLikelihoodError(
                    f"action of member {m} at time {s} neither recorded nor supplied"
                )
        u = tuple(u)
        a = model.flat_action(u)
        row = model.transition[x, a]
        for x2 in range(S):
            p = row[x2]
            if p == 0.0:
                continue
            for y in joint_obs_at(s + 1):
                ow = _obs_weight(model, x2, y)
                if ow == 0.0:
                    continue
                rec(x2, obs_seq + (y,), act_seq + (u,), w * p * ow, s + 1)

    for x0, p0 in enumerate(model.initial_dist):
        if p0 > 0.0:
            rec(x0, (), (), float(p0), 0)
    z = post.sum()
    if z == 0.0:
        raise ZeroLikelihoodError("view has probability zero under this strategy profile")
    return post / z


# ---------------------------------------------------------------------------
# exhaustive strategy search, centralized class


def _capped_add(a: int, b: int, cap: int) -> int:
    s = a + b
    return s if s <= cap else cap + 1


def _capped_mul(a: int, b: int, cap: int) -> int:
    m = a * b
    return m if m <= cap else cap + 1


def _count_centralized(model: TeamModel, occ, t: int, cap: int) -> int:
    """Number of centralized strategy tables on positive-probability
    histories from this node on (capped at cap+1)."""
    T = model.horizon
    if t == T - 1:
        return model.num_joint_actions if model.num_joint_actions <= cap else cap + 1
    total = 0
    for u in tiebreak_joint_actions(model):
        occp = _predict_occ(model, occ, model.flat_action(u))
        prod_count = 1
        for _, occy in _split_by_obs(model, occp):
            prod_count = _capped_mul(prod_count, _count_centralized(model, occy, t + 1, cap), cap)
            if prod_count > cap:
                break
        total = _capped_add(total, prod_count, cap)
        if total > cap:
            return total
    return total


def _centralized_tables(model: TeamModel, pending: tuple):
    """Yield every complete centralized table, depth first, earlier nodes
    varying slowest and actions in tie-break order."""
    if not pending:
        yield {}
        return
    obs_seq, act_seq, occ, t = pending[0]
    rest = pending[1:]
    key = history_key(act_seq, obs_seq)
    T = model.horizon
    for u in tiebreak_joint_actions(model):
        children = ()
        if t + 1 < T:
            occp = _predict_occ(model, occ, model.flat_action(u))
            children = tuple(
                (obs_seq + (y,), act_seq + (u,), occy, t + 1)
                for y, occy in _split_by_obs(model, occp)
            )
        for sub in _centralized_tables(model, rest + children):
            table = {key: u}
            table.update(sub)
            yield table


def enumerate_centralized(
    model: TeamModel,
    structure: InformationStructure,
    budget: int = DEFAULT_STRATEGY_BUDGET,
) -> EnumerationResult:
    """Exhaustive minimum of exact_cost over all maps from positive-
    probability full joint histories to joint actions.

    The candidate count is computed first; if it exceeds ``budget`` a
    BudgetExceededError carries the (capped) count.  Ties go to the first
    minimizer in enumeration order.
    """
    occ0 = {x: float(p) for x, p in enumerate(model.initial_dist) if p > 0.0}
    count = _count_centralized(model, occ0, 0, budget)
    if count > budget:
        raise BudgetExceededError(
            f"centralized strategy count exceeds budget {budget}", budget=budget, observed=count
        )
    best_cost = None
    best_table = None
    for table in _centralized_tables(model, (((), (), occ0, 0),)):
        cost = exact_cost(model, structure, CentralizedTableStrategy(model, table))
        if best_cost is None or cost < best_cost:
            best_cost = cost
            best_table = table
    return EnumerationResult(count, best_cost, CentralizedTableStrategy(model, best_table))


# ---------------------------------------------------------------------------
# exhaustive strategy search, decentralized class


def _member_views(model, structure, nodes, t):
    """Distinct member views over the node list, first-seen order.

    Returns (per-member list of view keys, per-node list of per-member
    keys)."""
    K = model.num_members
    seen: list[list[str]] = [[] for _ in range(K)]
    node_keys: list[tuple[str, ...]] = []
    for obs_seq, act_seq, _ in nodes:
        keys = []
        for k in range(K):
            vk = view_key(prefix_view(structure, K, obs_seq, act_seq, t, k))
            if vk not in seen[k]:
                seen[k].append(vk)
            keys.append(vk)
        node_keys.append(tuple(keys))
    return seen, node_keys


def _assignments(model, seen):
    """Iterate all joint assignments of actions to (member, view) pairs.

    Deterministic order: the last listed view of the last member varies
    fastest, actions ascending."""
    slots = [(k, vk) for k in range(model.num_members) for vk in seen[k]]
    ranges = [range(model.action_sizes[k]) for k, _ in slots]
    for combo in product(*ranges):
        yield {slot: act for slot, act in zip(slots, combo)}


def _decentralized_children(model, nodes, node_keys, assignment, t):
    children = []
    for (obs_seq, act_seq, occ), keys in zip(nodes, node_keys):
        u = tuple(assignment[(k, keys[k])] for k in range(model.num_members))
        occp = _predict_occ(model, occ, model.flat_action(u))
        for y, occy in _split_by_obs(model, occp):
            children.append((obs_seq + (y,), act_seq + (u,), occy))
    return children


def _decentralized_profiles(model, structure, nodes, t, tables):
    T = model.horizon
    if t == T:
        yield tables
        return
    seen, node_keys = _member_views(model, structure, nodes, t)
    for assignment in _assignments(model, seen):
        tables2 = tuple(
            {**tables[k], **{vk: assignment[(k, vk)] for vk in seen[k]}}
            for k in range(model.num_members)
        )
        children = _decentralized_children(model, nodes, node_keys, assignment, t)
        yield from _decentralized_profiles(model, structure, children, t + 1, tables2)


def _count_decentralized(model, structure, nodes, t, cap) -> int:
    """Leaf count of the decentralized profile tree, capped at cap+1."""
    T = model.horizon
    if t == T:
        return 1
    seen, node_keys = _member_views(model, structure, nodes, t)
    if np.all(model.transition > 0.0) and all(np.all(k > 0.0) for k in model.observation_kernels):
        # supports do not depend on actions: every assignment spawns child
        # sets with identical view partitions, so the count factorizes
        per_stage = 1
        for k in range(model.num_members):
            per_stage = _capped_mul(per_stage, model.action_sizes[k] ** len(seen[k]), cap)
        first = next(iter(_assignments(model, seen)))
        children = _decentralized_children(model, nodes, node_keys, first, t)
        return _capped_mul(per_stage, _count_decentralized(model, structure, children, t + 1, cap), cap)
    total = 0
    for assignment in _assignments(model, seen):
        children = _decentralized_children(model, nodes, node_keys, assignment, t)
        total = _capped_add(total, _count_decentralized(model, structure, children, t + 1, cap), cap)
        if total > cap:
            return total
    return total


def enumerate_decentralized(
    model: TeamModel,
    structure: InformationStructure,
    budget: int = DEFAULT_STRATEGY_BUDGET,
) -> EnumerationResult:
    """Exhaustive minimum of exact_cost over all profiles of per-member
    maps from that member's positive-probability views to own actions.

    Views off the positive-probability set get the lexicographically first
    action (index 0).  The candidate count is computed first; ties go to
    the first minimizer in enumeration order.
    """
    occ0 = {x: float(p) for x, p in enumerate(model.initial_dist) if p > 0.0}
    root = [((), (), occ0)]
    empty = tuple({} for _ in range(model.num_members))
    count = _count_decentralized(model, structure, root, 0, budget)
    if count > budget:
        raise BudgetExceededError(
            f"decentralized profile count exceeds budget {budget}", budget=budget, observed=count
        )
    best_cost = None
    best_tables = None
    for tables in _decentralized_profiles(model, structure, root, 0, empty):
        profile = DecentralizedStrategy(
            model,
            structure,
            [
                MemberTableStrategy(model, structure, k, tables[k], default=0)
                for k in range(model.num_members)
            ],
        )
        cost = exact_cost(model, structure, profile)
        if best_cost is None or cost < best_cost:
            best_cost = cost
            best_tables = tables
    strategy = DecentralizedStrategy(
        model,
        structure,
        [
            MemberTableStrategy(model, structure, k, best_tables[k], default=0)
            for k in range(model.num_members)
        ],
    )
    return EnumerationResult(count, best_cost, strategy)
