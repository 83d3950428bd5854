# Coupled-trajectory evaluation of multiple policies and multi-seed
# comparison tables.

from __future__ import annotations

import csv
import dataclasses
import statistics
from dataclasses import dataclass, field

import numpy as np

from .chain import Trajectory, generate_trajectory
from .core import BankConfig, BackgroundChain, State, config_fingerprint
from .env import apply_action, reward
from .learner import LearnSchedule, train
from .policies import make_policy

# offset separating training-schedule seeds from trajectory seeds, so a
# comparison row never reuses one stream for both phases
TRAIN_SEED_OFFSET = 0x5EED


@dataclass
class PolicyStats:
    total_reward: float
    mean_reward: float
    penalty_events: int


@dataclass
class EvalReport:
    """Per-policy totals over one shared background trajectory."""

    per_policy: dict[str, PolicyStats]
    traj_seed: int
    T: int
    fingerprint: str


def coupled_rollout(bank: BankConfig, chain: BackgroundChain,
                    policies: list[tuple[str, object]], traj: Trajectory,
                    b0: tuple[int, ...]) -> EvalReport:
    """Evaluate each deterministic policy on the identical x-path, starting
    from the same occupancy vector."""
    T = len(traj.x_path) - 1
    stats = {}
    for name, policy in policies:
        total = 0.0
        events = 0
        b = tuple(b0)
        for k in range(T):
            s = State(x=traj.x_path[k], b=b)
            a = policy(s)
            r = reward(bank, s, a)
            total += r
            if r < 0:
                events += 1
            b = apply_action(bank, b, a)
        stats[name] = PolicyStats(
            total_reward=total,
            mean_reward=total / T if T else 0.0,
            penalty_events=events,
        )
    return EvalReport(per_policy=stats, traj_seed=traj.seed, T=T,
                      fingerprint=config_fingerprint(bank, chain))


@dataclass
class ComparisonRow:
    sizes: tuple[int, ...]
    policy: str
    mean: float
    stddev: float
    totals: list[float]


@dataclass
class ComparisonTable:
    rows: list[ComparisonRow] = field(default_factory=list)
    failures: list[str] = field(default_factory=list)

    def row(self, sizes: tuple[int, ...], policy: str) -> ComparisonRow:
        for r in self.rows:
            if r.sizes == tuple(sizes) and r.policy == policy:
                return r
        raise KeyError((sizes, policy))

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["sizes", "policy", "seed_mean", "seed_stddev", "totals"])
            for r in self.rows:
                wr.writerow([
                    "x".join(map(str, r.sizes)), r.policy,
                    f"{r.mean:.6f}", f"{r.stddev:.6f}",
                    " ".join(f"{t:.6f}" for t in r.totals),
                ])

    def format(self) -> str:
        lines = [f"{'sizes':>10} {'policy':>8} {'mean total':>16} {'stddev':>12}"]
        for r in self.rows:
            lines.append(f"{'x'.join(map(str, r.sizes)):>10} {r.policy:>8} "
                         f"{r.mean:>16.1f} {r.stddev:>12.1f}")
        lines.extend(f"FAILED: {f}" for f in self.failures)
        return "\n".join(lines)


def resize_bank(bank: BankConfig, sizes: tuple[int, ...],
                ramps: tuple[int, ...] | None = None) -> BankConfig:
    """Same bank with capacities (and optionally ramps) replaced; the
    initial occupancy reverts to the half-full default."""
    if len(sizes) != bank.n:
        raise ValueError(f"{len(sizes)} sizes for {bank.n} batteries")
    batteries = tuple(
        dataclasses.replace(
            bat, capacity=int(B),
            ramp=int(ramps[i]) if ramps is not None else bat.ramp)
        for i, (bat, B) in enumerate(zip(bank.batteries, sizes))
    )
    return dataclasses.replace(bank, batteries=batteries, initial_occupancy="half")


def compare_policies(bank: BankConfig, chain: BackgroundChain,
                     sizes: list[tuple[int, ...]], seeds: list[int], T: int,
                     schedule: LearnSchedule | None = None,
                     ramps: tuple[int, ...] | None = None,
                     x0: int = 0) -> ComparisonTable:
    """For each size tuple and seed: train RL with a fresh schedule seed,
    then run a coupled rollout of greedy / naive / rl on one shared
    trajectory. Rows that fail are recorded and the rest continue."""
    if schedule is None:
        schedule = LearnSchedule()
    table = ComparisonTable()

    for size in sizes:
        size = tuple(int(v) for v in size)
        totals: dict[str, list[float]] = {"greedy": [], "naive": [], "rl": []}
        try:
            sized = resize_bank(bank, size, ramps)
            b0 = sized.start_occupancy()
            for seed in seeds:
                sched = dataclasses.replace(schedule, seed=seed + TRAIN_SEED_OFFSET)
                w, _ = train(sized, chain, sched, x0=x0)
                traj = generate_trajectory(chain, x0, T, seed)
                report = coupled_rollout(
                    sized, chain,
                    [(name, make_policy(name, sized, chain,
                                        weights=w if name == "rl" else None))
                     for name in ("greedy", "naive", "rl")],
                    traj, b0)
                for name, st in report.per_policy.items():
                    totals[name].append(st.total_reward)
        except Exception as exc:  # keep remaining rows alive
            table.failures.append(f"sizes {size}: {exc}")
            continue
        for name, vals in totals.items():
            table.rows.append(ComparisonRow(
                sizes=size, policy=name,
                mean=statistics.fmean(vals),
                stddev=statistics.stdev(vals) if len(vals) > 1 else 0.0,
                totals=vals,
            ))
    return table
