# MDP mechanics: feasible action sets, battery evolution, cycling penalty.

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Action, BankConfig, BackgroundChain, State, clip


@dataclass(frozen=True)
class ActionBounds:
    m: int        # max total drain, negated (<= 0)
    M: int        # max total injection (>= 0)
    target: int   # net generation clipped onto [m, M]


def action_bounds(bank: BankConfig, chain: BackgroundChain, s: State) -> ActionBounds:
    """Bank-wide charge/drain limits and the clipped net-generation target."""
    m = -sum(min(b, c) for b, c in zip(s.b, bank.ramps))
    M = sum(min(B - b, c) for b, B, c in zip(s.b, bank.capacities, bank.ramps))
    target = clip(chain.net_gen[s.x], m, M)
    return ActionBounds(m=m, M=M, target=target)


def feasible_actions(bank: BankConfig, chain: BackgroundChain, s: State) -> list[Action]:
    """All integer action vectors satisfying ramp, capacity, and sum
    constraints, in lexicographic order. Never empty: the clipped target is
    reachable by construction."""
    target = action_bounds(bank, chain, s).target
    lo = [max(-c, -b) for c, b in zip(bank.ramps, s.b)]
    hi = [min(c, B - b) for c, B, b in zip(bank.ramps, bank.capacities, s.b)]

    n = bank.n
    # suffix_lo[i] / suffix_hi[i]: attainable sum over components i..n-1
    suffix_lo = [0] * (n + 1)
    suffix_hi = [0] * (n + 1)
    for i in range(n - 1, -1, -1):
        suffix_lo[i] = suffix_lo[i + 1] + lo[i]
        suffix_hi[i] = suffix_hi[i + 1] + hi[i]

    out: list[Action] = []
    prefix = [0] * n

    def rec(i: int, remaining: int) -> None:
        if i == n:
            out.append(tuple(prefix))
            return
        a_lo = max(lo[i], remaining - suffix_hi[i + 1])
        a_hi = min(hi[i], remaining - suffix_lo[i + 1])
        for a in range(a_lo, a_hi + 1):
            prefix[i] = a
            rec(i + 1, remaining - a)

    rec(0, target)
    return out


def reward(bank: BankConfig, s: State, a: Action) -> float:
    """Cycling penalty: nonpositive, zero iff every post-action occupancy
    lands inside [lower_frac*B, upper_frac*B]."""
    total = 0.0
    for bat, b_i, a_i in zip(bank.batteries, s.b, a):
        post = b_i + a_i
        lo = bat.lower_frac * bat.capacity
        hi = bat.upper_frac * bat.capacity
        total += bat.penalty_weight * (max(lo - post, 0.0) + max(post - hi, 0.0))
    return -total


def apply_action(bank: BankConfig, b: tuple[int, ...], a: Action) -> tuple[int, ...]:
    """Post-action occupancies with dissipation: floor(eta * (b + a))."""
    out = []
    for bat, b_i, a_i in zip(bank.batteries, b, a):
        post = b_i + a_i
        if not (0 <= post <= bat.capacity):
            raise ValueError(f"occupancy {post} outside [0, {bat.capacity}]")
        out.append(math.floor(bat.dissipation * post))
    return tuple(out)


def step(bank: BankConfig, chain: BackgroundChain, s: State, a: Action,
         next_x: int) -> tuple[State, float]:
    """One MDP transition. next_x is supplied by the caller so several
    policies can be coupled to one stored background trajectory."""
    r = reward(bank, s, a)
    b_next = apply_action(bank, s.b, a)
    return State(x=next_x, b=b_next), r


@dataclass
class StateActions:
    """Vectorized view of one state's feasible action set, for fast argmax
    scans. Row order matches feasible_actions (lexicographic)."""

    actions: list[Action]
    posts: np.ndarray     # (n_actions, N) int, b + a
    rewards: np.ndarray   # (n_actions,)
    next_b: list[tuple[int, ...]]   # occupancies after dissipation


def state_actions(bank: BankConfig, chain: BackgroundChain, s: State) -> StateActions:
    acts = feasible_actions(bank, chain, s)
    posts = np.array(acts, dtype=np.int64) + np.array(s.b, dtype=np.int64)
    caps = np.array(bank.capacities, dtype=float)
    lo = np.array([bat.lower_frac for bat in bank.batteries]) * caps
    hi = np.array([bat.upper_frac for bat in bank.batteries]) * caps
    wts = np.array([bat.penalty_weight for bat in bank.batteries])
    pen = np.maximum(lo - posts, 0.0) + np.maximum(posts - hi, 0.0)
    rewards = -(pen * wts).sum(axis=1)
    etas = [bat.dissipation for bat in bank.batteries]
    if all(eta == 1.0 for eta in etas):
        next_b = [tuple(int(v) for v in row) for row in posts]
    else:
        next_b = [
            tuple(math.floor(eta * int(v)) for eta, v in zip(etas, row))
            for row in posts
        ]
    return StateActions(actions=acts, posts=posts, rewards=rewards, next_b=next_b)
