# Domain types, config validation, and shared integer clipping.

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components


@dataclass(frozen=True)
class BatteryConfig:
    """Static parameters of one battery unit.

    Energy is measured in integer units; `capacity` and `ramp` are counts of
    those units. `penalty_weight` is the nonnegative magnitude of the cycling
    penalty prefactor (the minus sign lives in the reward formula).
    """

    capacity: int
    ramp: int
    penalty_weight: float
    dissipation: float = 1.0
    lower_frac: float = 0.2
    upper_frac: float = 0.8


@dataclass(frozen=True)
class BankConfig:
    batteries: tuple[BatteryConfig, ...]
    gamma: float = 0.9
    initial_occupancy: tuple[int, ...] | str = "half"

    @property
    def n(self) -> int:
        return len(self.batteries)

    @property
    def capacities(self) -> tuple[int, ...]:
        return tuple(bat.capacity for bat in self.batteries)

    @property
    def ramps(self) -> tuple[int, ...]:
        return tuple(bat.ramp for bat in self.batteries)

    def start_occupancy(self) -> tuple[int, ...]:
        """Resolve the 'half' sentinel to floor(capacity / 2) per battery."""
        if self.initial_occupancy == "half":
            return tuple(bat.capacity // 2 for bat in self.batteries)
        return tuple(self.initial_occupancy)


@dataclass(frozen=True, eq=False)
class BackgroundChain:
    """Finite irreducible DTMC driving net generation.

    `net_gen[x]` is the integer net generation (generation minus demand)
    emitted while the chain sits in state x.
    """

    labels: tuple
    transition: np.ndarray
    net_gen: tuple[int, ...]

    def __post_init__(self):
        mat = np.array(self.transition, dtype=float)
        mat.flags.writeable = False
        object.__setattr__(self, "transition", mat)
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "net_gen", tuple(int(g) for g in self.net_gen))

    @property
    def n_states(self) -> int:
        return len(self.labels)


@dataclass(frozen=True)
class State:
    x: int
    b: tuple[int, ...]


# Actions are plain integer tuples; positive entries charge, negative discharge.
Action = tuple[int, ...]


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    def __str__(self) -> str:
        if self.passed:
            return "config OK"
        return "\n".join(f"FAIL: {v}" for v in self.violations)


_ROW_SUM_TOL = 1e-12


def validate_config(bank: BankConfig, chain: BackgroundChain) -> ValidationReport:
    """Check every structural invariant; report violations by field path."""
    bad: list[str] = []

    if bank.n < 1:
        bad.append("batteries: at least one battery required")
    for i, bat in enumerate(bank.batteries):
        path = f"batteries[{i}]"
        if bat.capacity < 1:
            bad.append(f"{path}.capacity: must be >= 1, got {bat.capacity}")
        if bat.ramp < 1:
            bad.append(f"{path}.ramp: must be >= 1, got {bat.ramp}")
        if not (0.0 < bat.dissipation <= 1.0):
            bad.append(f"{path}.dissipation: must be in (0, 1], got {bat.dissipation}")
        if bat.penalty_weight < 0:
            bad.append(f"{path}.penalty_weight: must be >= 0, got {bat.penalty_weight}")
        if not (0.0 <= bat.lower_frac < 1.0):
            bad.append(f"{path}.lower_frac: must be in [0, 1), got {bat.lower_frac}")
        if not (bat.lower_frac < bat.upper_frac <= 1.0):
            bad.append(f"{path}: lower_frac < upper_frac <= 1 violated "
                       f"({bat.lower_frac} vs {bat.upper_frac})")

    if not (0.0 < bank.gamma < 1.0):
        bad.append(f"gamma: must lie strictly inside (0, 1), got {bank.gamma}")

    if bank.initial_occupancy != "half":
        occ = tuple(bank.initial_occupancy)
        if len(occ) != bank.n:
            bad.append(f"initial_occupancy: length {len(occ)} != {bank.n} batteries")
        else:
            for i, (o, bat) in enumerate(zip(occ, bank.batteries)):
                if not (0 <= o <= bat.capacity):
                    bad.append(f"initial_occupancy[{i}]: {o} outside [0, {bat.capacity}]")

    P = chain.transition
    ns = chain.n_states
    if P.shape != (ns, ns):
        bad.append(f"chain.transition: shape {P.shape} != ({ns}, {ns})")
    else:
        if (P < 0).any():
            bad.append("chain.transition: negative entries")
        for j, rowsum in enumerate(P.sum(axis=1)):
            if abs(rowsum - 1.0) > _ROW_SUM_TOL:
                bad.append(f"chain.transition[{j}]: row sums to {rowsum!r}, not 1")
        if not bad and not _is_irreducible(P):
            bad.append("chain.transition: chain is not irreducible")
    if len(chain.net_gen) != ns:
        bad.append(f"chain.net_gen: length {len(chain.net_gen)} != {ns} states")

    return ValidationReport(bad)


def _is_irreducible(P: np.ndarray) -> bool:
    adj = csr_matrix(P > 0)
    n_comp, _ = connected_components(adj, directed=True, connection="strong")
    return n_comp == 1


def clip(y: int, m: int, M: int) -> int:
    """Project y onto the closed interval [m, M]."""
    if m > M:
        raise ValueError(f"empty interval: [{m}, {M}]")
    return min(max(y, m), M)


# ---------------------------------------------------------------------------
# JSON config ingestion and fingerprinting

def config_to_dict(bank: BankConfig, chain: BackgroundChain) -> dict:
    return {
        "batteries": [
            {
                "capacity": bat.capacity,
                "ramp": bat.ramp,
                "dissipation": bat.dissipation,
                "penalty_weight": bat.penalty_weight,
                "lower_frac": bat.lower_frac,
                "upper_frac": bat.upper_frac,
            }
            for bat in bank.batteries
        ],
        "chain": {
            "labels": list(chain.labels),
            "transition": [list(row) for row in chain.transition],
            "net_gen": list(chain.net_gen),
        },
        "gamma": bank.gamma,
        "initial_occupancy": (
            bank.initial_occupancy
            if bank.initial_occupancy == "half"
            else list(bank.initial_occupancy)
        ),
    }


def config_from_dict(doc: dict) -> tuple[BankConfig, BackgroundChain]:
    batteries = tuple(
        BatteryConfig(
            capacity=int(b["capacity"]),
            ramp=int(b["ramp"]),
            dissipation=float(b.get("dissipation", 1.0)),
            penalty_weight=float(b["penalty_weight"]),
            lower_frac=float(b.get("lower_frac", 0.2)),
            upper_frac=float(b.get("upper_frac", 0.8)),
        )
        for b in doc["batteries"]
    )
    occ = doc.get("initial_occupancy", "half")
    if occ != "half":
        occ = tuple(int(v) for v in occ)
    bank = BankConfig(
        batteries=batteries,
        gamma=float(doc.get("gamma", 0.9)),
        initial_occupancy=occ,
    )
    ch = doc["chain"]
    chain = BackgroundChain(
        labels=tuple(ch["labels"]),
        transition=np.array(ch["transition"], dtype=float),
        net_gen=tuple(int(g) for g in ch["net_gen"]),
    )
    return bank, chain


def load_config(path) -> tuple[BankConfig, BackgroundChain]:
    with open(path) as fh:
        return config_from_dict(json.load(fh))


def config_fingerprint(bank: BankConfig, chain: BackgroundChain) -> str:
    """Stable hash of the canonicalized config; embedded in weight files and
    reports so artifacts cannot silently cross configs."""
    canon = json.dumps(config_to_dict(bank, chain), sort_keys=True)
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


def half_floor(capacity: int) -> int:
    return math.floor(capacity / 2)
