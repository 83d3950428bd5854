# Deployable controllers: greedy, naive-proportional, learned-weights RL,
# plus the epsilon-greedy exploration wrapper.
#
# Tie-breaking everywhere: the lexicographically smallest action. Feasible
# sets are enumerated in lexicographic order, so "first maximizer" does it.

from __future__ import annotations

import math

import numpy as np

from .core import Action, BankConfig, BackgroundChain, State
from .env import action_bounds, state_actions
from .features import block_slice, kernel_matrix

POLICY_NAMES = ("greedy", "naive", "rl")


def greedy_action(bank: BankConfig, chain: BackgroundChain, s: State) -> Action:
    """Maximize the instantaneous reward over the feasible set."""
    ent = state_actions(bank, chain, s)
    return ent.actions[int(np.argmax(ent.rewards))]


def _round_half_toward_zero(t: float) -> int:
    a = math.floor(abs(t))
    if abs(t) - a > 0.5:
        a += 1
    return -a if t < 0 else a


def naive_action(bank: BankConfig, chain: BackgroundChain, s: State) -> Action:
    """Apportion the clipped target proportionally to capacities; repair to
    feasibility by minimal L1 local search when rounding breaks it."""
    target = action_bounds(bank, chain, s).target
    total_cap = sum(bank.capacities)
    t = [target * B / total_cap for B in bank.capacities]
    rounded = tuple(_round_half_toward_zero(v) for v in t)

    if sum(rounded) == target and all(
        abs(a) <= c and 0 <= a + b <= B
        for a, c, b, B in zip(rounded, bank.ramps, s.b, bank.capacities)
    ):
        return rounded

    ent = state_actions(bank, chain, s)
    acts = np.array(ent.actions, dtype=float)
    dist = np.abs(acts - np.array(t)).sum(axis=1)
    return ent.actions[int(np.argmin(dist))]


def q_values(bank: BankConfig, s_x: int, rewards: np.ndarray, kmat: np.ndarray,
             w: np.ndarray) -> np.ndarray:
    """Linear Q estimates for one state's whole feasible set, exploiting the
    block sparsity of the feature map."""
    blk = w[block_slice(s_x, bank.n)]
    return w[0] * rewards + blk[0] + kmat @ blk[1:]


def rl_action(bank: BankConfig, chain: BackgroundChain, s: State,
              w: np.ndarray) -> Action:
    ent = state_actions(bank, chain, s)
    kmat = kernel_matrix(bank, ent.posts)
    q = q_values(bank, s.x, ent.rewards, kmat, w)
    return ent.actions[int(np.argmax(q))]


def epsilon_greedy_action(bank: BankConfig, chain: BackgroundChain, s: State,
                          w: np.ndarray, eps: float,
                          rng: np.random.Generator) -> Action:
    ent = state_actions(bank, chain, s)
    if rng.random() < eps:
        return ent.actions[int(rng.integers(len(ent.actions)))]
    kmat = kernel_matrix(bank, ent.posts)
    q = q_values(bank, s.x, ent.rewards, kmat, w)
    return ent.actions[int(np.argmax(q))]


def make_policy(name: str, bank: BankConfig, chain: BackgroundChain,
                weights: np.ndarray | None = None):
    """Deterministic stationary policy as a memoized State -> Action callable.

    State spaces in play are small, so per-state memoization makes long
    coupled rollouts cheap.
    """
    if name not in POLICY_NAMES:
        raise ValueError(f"unknown policy {name!r}; expected one of {POLICY_NAMES}")
    if name == "rl" and weights is None:
        raise ValueError("rl policy needs a weight vector")

    cache: dict[State, Action] = {}

    if name == "greedy":
        fresh = lambda s: greedy_action(bank, chain, s)
    elif name == "naive":
        fresh = lambda s: naive_action(bank, chain, s)
    else:
        fresh = lambda s: rl_action(bank, chain, s, weights)

    def policy(s: State) -> Action:
        a = cache.get(s)
        if a is None:
            a = cache[s] = fresh(s)
        return a

    return policy
