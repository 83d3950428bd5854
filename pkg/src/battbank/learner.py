# Online semi-gradient Q-learning of the linear weight vector.

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .core import Action, BankConfig, BackgroundChain, State
from .env import state_actions
from .features import block_slice, feature_dim, kernel_matrix


@dataclass(frozen=True)
class LearnSchedule:
    """Hyperparameters for one training run.

    beta_k = beta0 * beta_tau / (beta_tau + k) satisfies the usual
    divergent-sum / convergent-square-sum conditions. eps_k decays
    exponentially from eps0 down to eps_min; the defaults keep the
    behavior policy fully exploratory (eps = 1, uniform over feasible
    actions), which proved markedly more robust across bank sizes than
    annealed epsilon-greedy behavior.
    """

    t_train: int = 100_000
    beta0: float = 0.05
    beta_tau: float = 30_000.0
    eps0: float = 1.0
    eps_min: float = 1.0
    eps_decay: float = 20_000.0
    seed: int = 0

    def beta(self, k: int) -> float:
        return self.beta0 * self.beta_tau / (self.beta_tau + k)

    def eps(self, k: int) -> float:
        return max(self.eps_min, self.eps0 * math.exp(-k / self.eps_decay))


@dataclass
class TrainLog:
    rows: list[tuple] = field(default_factory=list)  # (step, eps, beta, mean_abs_td, cum_reward)

    HEADER = ("step", "epsilon", "beta", "mean_abs_td", "cum_reward")

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(self.HEADER)
            wr.writerows(self.rows)


def td_error(bank: BankConfig, chain: BackgroundChain, s: State, a: Action,
             s_next: State, w: np.ndarray) -> float:
    """One-step TD error: R + gamma * max_a' Q_hat(s', a') - Q_hat(s, a)."""
    from .features import feature_vector, q_hat
    from .env import reward, feasible_actions

    r = reward(bank, s, a)
    q_sa = q_hat(feature_vector(bank, chain, s, a), w)
    q_next = max(
        q_hat(feature_vector(bank, chain, s_next, a2), w)
        for a2 in feasible_actions(bank, chain, s_next)
    )
    return r + bank.gamma * q_next - q_sa


def update_weights(w: np.ndarray, phi: np.ndarray, delta: float,
                   beta: float) -> np.ndarray:
    if phi.shape != w.shape:
        raise ValueError(f"dimension mismatch: phi {phi.shape} vs w {w.shape}")
    return w + beta * delta * phi


class _Entry:
    """Per-state tables reused across visits during training."""

    __slots__ = ("n", "rewards", "kmat", "next_b")

    def __init__(self, bank, chain, s):
        ent = state_actions(bank, chain, s)
        self.n = len(ent.actions)
        self.rewards = ent.rewards
        self.kmat = kernel_matrix(bank, ent.posts)
        self.next_b = ent.next_b


def train(bank: BankConfig, chain: BackgroundChain, schedule: LearnSchedule,
          x0: int = 0, b0: tuple[int, ...] | None = None,
          log_every: int = 1000) -> tuple[np.ndarray, TrainLog]:
    """Run the online learning loop for schedule.t_train steps.

    Behavior is epsilon-greedy in the current estimate; chain transitions are
    drawn fresh each step. Fully reproducible from schedule.seed: per step the
    rng yields the exploration coin, then (only when exploring) the uniform
    action index, then the chain-transition uniform.
    """
    if b0 is None:
        b0 = bank.start_occupancy()
    rng = np.random.default_rng(schedule.seed)
    N = bank.n
    gamma = bank.gamma
    width = 2 * N + 1
    d = feature_dim(N, chain.n_states)
    w = np.zeros(d)
    log = TrainLog()

    cum_p = np.cumsum(chain.transition, axis=1)
    cache: dict[tuple[int, tuple[int, ...]], _Entry] = {}

    def entry(x, b):
        key = (x, b)
        e = cache.get(key)
        if e is None:
            e = cache[key] = _Entry(bank, chain, State(x=x, b=b))
        return e

    x, b = x0, tuple(b0)
    cum_reward = 0.0
    abs_td_acc = 0.0

    for k in range(schedule.t_train):
        eps = schedule.eps(k)
        beta = schedule.beta(k)
        e = entry(x, b)
        blk_lo = 1 + x * width
        blk = w[blk_lo:blk_lo + width]
        q = w[0] * e.rewards + blk[0] + e.kmat @ blk[1:]

        if rng.random() < eps:
            a_idx = int(rng.integers(e.n))
        else:
            a_idx = int(np.argmax(q))

        r = e.rewards[a_idx]
        b_next = e.next_b[a_idx]
        x_next = int(np.searchsorted(cum_p[x], rng.random(), side="right"))

        e2 = entry(x_next, b_next)
        blk2_lo = 1 + x_next * width
        blk2 = w[blk2_lo:blk2_lo + width]
        q_next = w[0] * e2.rewards + blk2[0] + e2.kmat @ blk2[1:]

        delta = r + gamma * q_next.max() - q[a_idx]
        if not math.isfinite(delta):
            raise FloatingPointError(f"non-finite TD error at step {k}")

        # sparse form of w += beta * delta * phi(s, a)
        scale = beta * delta
        w[0] += scale * r
        blk[0] += scale
        blk[1:] += scale * e.kmat[a_idx]

        cum_reward += r
        abs_td_acc += abs(delta)
        if (k + 1) % log_every == 0:
            log.rows.append((k + 1, eps, beta, abs_td_acc / log_every, cum_reward))
            abs_td_acc = 0.0

        x, b = x_next, b_next

    return w, log
