# Background DTMC simulation and net-generation lookup.
#
# All randomness flows through numpy's PCG64 (np.random.default_rng), so a
# trajectory is reproducible bit-for-bit from (seed, x0, T) on any platform.

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import BackgroundChain


@dataclass(frozen=True)
class Trajectory:
    seed: int
    x_path: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.x_path)


def _cum_rows(chain: BackgroundChain) -> np.ndarray:
    return np.cumsum(chain.transition, axis=1)


def sample_next(chain: BackgroundChain, x: int, rng: np.random.Generator) -> int:
    """Draw the successor of x; consumes exactly one uniform from rng."""
    row = np.cumsum(chain.transition[x])
    return int(np.searchsorted(row, rng.random(), side="right"))


def generate_trajectory(chain: BackgroundChain, x0: int, T: int, seed: int) -> Trajectory:
    rng = np.random.default_rng(seed)
    cum = _cum_rows(chain)
    path = np.empty(T + 1, dtype=np.int64)
    path[0] = x0
    x = x0
    draws = rng.random(T)
    for k in range(T):
        x = int(np.searchsorted(cum[x], draws[k], side="right"))
        path[k + 1] = x
    return Trajectory(seed=seed, x_path=tuple(int(v) for v in path))


def net_generation(chain: BackgroundChain, x: int) -> int:
    return chain.net_gen[x]


def save_trajectory(traj: Trajectory, path) -> None:
    """Flat audit format: header with seed/T, then one state index per line."""
    with open(path, "w") as fh:
        fh.write(f"# seed={traj.seed} T={len(traj.x_path) - 1}\n")
        for x in traj.x_path:
            fh.write(f"{x}\n")


def load_trajectory(path) -> Trajectory:
    with open(path) as fh:
        header = fh.readline().strip()
        fields = dict(tok.split("=") for tok in header.lstrip("# ").split())
        xs = tuple(int(line) for line in fh if line.strip())
    return Trajectory(seed=int(fields["seed"]), x_path=xs)
