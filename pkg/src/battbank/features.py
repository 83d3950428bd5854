# Kernel feature map and the linear Q estimate.
#
# Layout of a feature vector of dimension d = (2N+1)*n_bg + 1:
#   entry 0:            instantaneous reward R(s, a)
#   block j (2N+1 wide): (1, -(1-y_1)^4, -y_1^4, ..., -(1-y_N)^4, -y_N^4)
#                        if x == j, else all zeros,
# where y_i is the normalised post-action occupancy of battery i.

from __future__ import annotations

import json

import numpy as np

from .core import (Action, BankConfig, BackgroundChain, State,
                   config_fingerprint)
from .env import reward

WEIGHTS_FORMAT_VERSION = 1


def feature_dim(n_batteries: int, n_bg_states: int) -> int:
    return (2 * n_batteries + 1) * n_bg_states + 1


def block_slice(x: int, n_batteries: int) -> slice:
    """Slice of the weight/feature vector holding background state x's block."""
    width = 2 * n_batteries + 1
    return slice(1 + x * width, 1 + (x + 1) * width)


def normalized_occupancy(bank: BankConfig, b: tuple[int, ...], a: Action) -> np.ndarray:
    caps = np.array(bank.capacities, dtype=float)
    return (np.array(b, dtype=float) + np.array(a, dtype=float)) / caps


def kernel_pair(y: float) -> tuple[float, float]:
    """Quartic empty-side / full-side kernels; both lie in [-1, 0]."""
    return (-((1.0 - y) ** 4), -(y ** 4))


def kernel_matrix(bank: BankConfig, posts: np.ndarray) -> np.ndarray:
    """Kernel pairs for a batch of post-action occupancies.

    posts: (n, N) integer occupancies; returns (n, 2N) interleaved as
    (empty-side, full-side) per battery.
    """
    caps = np.array(bank.capacities, dtype=float)
    y = posts / caps
    out = np.empty((posts.shape[0], 2 * bank.n))
    out[:, 0::2] = -((1.0 - y) ** 4)
    out[:, 1::2] = -(y ** 4)
    return out


def feature_vector(bank: BankConfig, chain: BackgroundChain, s: State,
                   a: Action) -> np.ndarray:
    d = feature_dim(bank.n, chain.n_states)
    phi = np.zeros(d)
    phi[0] = reward(bank, s, a)
    blk = block_slice(s.x, bank.n)
    y = normalized_occupancy(bank, s.b, a)
    block = np.empty(2 * bank.n + 1)
    block[0] = 1.0
    block[1::2] = -((1.0 - y) ** 4)
    block[2::2] = -(y ** 4)
    phi[blk] = block
    return phi


def q_hat(phi: np.ndarray, w: np.ndarray) -> float:
    if phi.shape != w.shape:
        raise ValueError(f"dimension mismatch: phi {phi.shape} vs w {w.shape}")
    return float(phi @ w)


# ---------------------------------------------------------------------------
# Weight persistence

def save_weights(path, w: np.ndarray, bank: BankConfig, chain: BackgroundChain) -> None:
    doc = {
        "version": WEIGHTS_FORMAT_VERSION,
        "fingerprint": config_fingerprint(bank, chain),
        "d": len(w),
        "N": bank.n,
        "num_bg_states": chain.n_states,
        "weights": [float(v) for v in w],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def load_weights(path, bank: BankConfig, chain: BackgroundChain) -> np.ndarray:
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("version") != WEIGHTS_FORMAT_VERSION:
        raise ValueError(f"unsupported weights file version: {doc.get('version')}")
    expect = config_fingerprint(bank, chain)
    if doc["fingerprint"] != expect:
        raise ValueError(
            f"weights fingerprint {doc['fingerprint']} does not match "
            f"config fingerprint {expect}")
    w = np.array(doc["weights"], dtype=float)
    d = feature_dim(bank.n, chain.n_states)
    if len(w) != d or doc["d"] != d:
        raise ValueError(f"weights dimension {len(w)} != expected {d}")
    return w
