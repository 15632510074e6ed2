"""Iterative bias-field optimization loop and its run records."""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

import numpy as np

from . import mps as mps_backend
from . import statevector as sv_backend
from .cd import BiasState, DriveSpec, build_cd_circuit
from .hubo import HuboProblem
from .samples import SampleSet, cvar_energy, cvar_expectations, metrics
from .solvers import brute_force, exact_dp

__all__ = ["BfdcqoConfig", "IterationRecord", "RunRecord", "update_bias",
           "run_bfdcqo", "STRATEGIES"]

STRATEGIES = ("unsigned_bias", "unsigned_antibias", "signed_bias", "signed_antibias")

RUN_SCHEMA = "bfdcqo-run/1"


@dataclass(frozen=True)
class BfdcqoConfig:
    iterations: int = 11
    alpha: float = 0.01
    strategy_schedule: tuple = ()  # per-iteration; last entry repeats if short
    kappa: float = 5.0  # applied on signed-strategy iterations
    drive: DriveSpec = field(default_factory=DriveSpec)
    shots: int = 2000
    seed: int = 0
    backend: str = "statevector"  # or "mps"
    max_bond: int | None = 64
    trunc_cutoff: float = 1e-10
    e0: float | None = None  # reference energy; computed exactly when None

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha must be in (0, 1], got {self.alpha}")
        if self.iterations < 1:
            raise ValueError("need at least one iteration")
        if self.kappa <= 0:
            raise ValueError("kappa must be positive")
        if self.backend not in ("statevector", "mps"):
            raise ValueError(f"unknown backend {self.backend!r}")
        for s in self.strategy_schedule:
            if s not in STRATEGIES:
                raise ValueError(f"unknown strategy {s!r}")

    def strategy_for(self, iteration: int) -> str:
        """Update rule that produces the bias used by a 0-based iteration's
        circuit (iteration 0 always starts unbiased). Default schedule:
        unsigned bias throughout, signed bias feeding the final iteration."""
        if self.strategy_schedule:
            k = min(iteration, len(self.strategy_schedule) - 1)
            return self.strategy_schedule[k]
        return "signed_bias" if iteration == self.iterations - 1 else "unsigned_bias"


def update_bias(expectations, strategy: str, kappa: float = 1.0) -> BiasState:
    """Next bias fields from measured <sz_j> under the chosen strategy.

    The bias variants push the next initial state toward the measured
    configuration; antibias pushes away. Signed variants keep only the
    orientation, with sign(0) = 0.
    """
    z = np.asarray(expectations, dtype=float)
    if strategy == "unsigned_bias":
        hb = -z
    elif strategy == "unsigned_antibias":
        hb = z
    elif strategy == "signed_bias":
        hb = -np.sign(z)
    elif strategy == "signed_antibias":
        hb = np.sign(z)
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    return BiasState(hb=kappa * hb)


@dataclass
class IterationRecord:
    iteration: int
    strategy: str
    bias: list
    rotation_counts: dict  # locality -> count
    ar: float
    ds: float
    mean_energy: float
    cvar_energy: float
    best_energy: float
    best_bitstring: str
    entropy: float | None
    samples: list  # [[bitstring, count], ...]

    def to_json_dict(self):
        return {
            "iteration": self.iteration,
            "strategy": self.strategy,
            "bias": self.bias,
            "rotation_counts": {str(k): v for k, v in self.rotation_counts.items()},
            "ar": self.ar,
            "ds": self.ds,
            "mean_energy": self.mean_energy,
            "cvar_energy": self.cvar_energy,
            "best_energy": self.best_energy,
            "best_bitstring": self.best_bitstring,
            "entropy": self.entropy,
            "samples": self.samples,
        }

    @classmethod
    def from_json_dict(cls, d):
        return cls(
            iteration=int(d["iteration"]),
            strategy=str(d["strategy"]),
            bias=[float(v) for v in d["bias"]],
            rotation_counts={int(k): int(v) for k, v in d["rotation_counts"].items()},
            ar=float(d["ar"]),
            ds=float(d["ds"]),
            mean_energy=float(d["mean_energy"]),
            cvar_energy=float(d["cvar_energy"]),
            best_energy=float(d["best_energy"]),
            best_bitstring=str(d["best_bitstring"]),
            entropy=None if d.get("entropy") is None else float(d["entropy"]),
            samples=[[str(b), int(c)] for b, c in d["samples"]],
        )


@dataclass
class RunRecord:
    n: int
    e0: float
    iterations: list
    best_energy: float
    best_bitstring: str
    wall_time: float
    config: dict

    def to_json_dict(self):
        return {
            "schema": RUN_SCHEMA,
            "n": self.n,
            "e0": self.e0,
            "iterations": [it.to_json_dict() for it in self.iterations],
            "best_energy": self.best_energy,
            "best_bitstring": self.best_bitstring,
            "wall_time": self.wall_time,
            "config": self.config,
        }

    @classmethod
    def from_json_dict(cls, d):
        if d.get("schema") != RUN_SCHEMA:
            raise ValueError(f"unexpected schema {d.get('schema')!r}")
        return cls(
            n=int(d["n"]),
            e0=float(d["e0"]),
            iterations=[IterationRecord.from_json_dict(x) for x in d["iterations"]],
            best_energy=float(d["best_energy"]),
            best_bitstring=str(d["best_bitstring"]),
            wall_time=float(d["wall_time"]),
            config=dict(d["config"]),
        )

    def save(self, path):
        with open(path, "w") as f:
            json.dump(self.to_json_dict(), f)
            f.write("\n")

    @classmethod
    def load(cls, path):
        with open(path) as f:
            return cls.from_json_dict(json.load(f))


def reference_energy(p: HuboProblem) -> float:
    """Exact ground energy: chain DP when the couplings are short-ranged,
    otherwise brute force."""
    spread = p.coupling_range()
    if spread <= min(20, p.n):
        e0, _ = exact_dp(p, r=max(spread, 1))
        return e0
    e0, _ = brute_force(p)
    return e0


def _config_snapshot(cfg: BfdcqoConfig) -> dict:
    return {
        "iterations": cfg.iterations,
        "alpha": cfg.alpha,
        "strategy_schedule": list(cfg.strategy_schedule),
        "kappa": cfg.kappa,
        "shots": cfg.shots,
        "seed": cfg.seed,
        "backend": cfg.backend,
        "max_bond": cfg.max_bond,
        "trunc_cutoff": cfg.trunc_cutoff,
        "drive": {
            "total_time": cfg.drive.total_time,
            "n_trot": cfg.drive.n_trot,
            "theta_cutoff": cfg.drive.theta_cutoff,
            "evaluation_points": cfg.drive.evaluation_points,
        },
    }


def run_bfdcqo(p: HuboProblem, cfg: BfdcqoConfig) -> RunRecord:
    """Iterate circuit synthesis, execution, sampling and bias updates.

    The first iteration always starts from zero bias. The rescale factor
    kappa is applied only on iterations whose strategy is signed.
    """
    t_start = time.perf_counter()
    if cfg.backend == "mps" and p.coupling_range() > 3:
        raise ValueError("mps backend requires couplings within 3 consecutive sites")
    e0 = cfg.e0 if cfg.e0 is not None else reference_energy(p)
    bias = BiasState.zero(p.n)
    seed_seq = np.random.SeedSequence(cfg.seed)
    iter_seeds = [int(s.generate_state(1)[0]) for s in seed_seq.spawn(cfg.iterations)]

    records = []
    best_energy = np.inf
    best_bits = ""
    for it in range(cfg.iterations):
        strategy = cfg.strategy_for(it)
        circuit = build_cd_circuit(p, cfg.drive, bias)
        entropy = None
        if cfg.backend == "statevector":
            state = sv_backend.run_circuit(circuit)
            sset = sv_backend.sample(state, cfg.shots, iter_seeds[it])
        else:
            m = mps_backend.mps_run_circuit(
                circuit, max_bond=cfg.max_bond, trunc_cutoff=cfg.trunc_cutoff)
            entropy = mps_backend.avg_entropy(m)
            sset = mps_backend.mps_sample(m, cfg.shots, iter_seeds[it])
        sset = sset.with_energies(p)
        ar, ds = metrics(sset, e0)
        expectations = cvar_expectations(sset, cfg.alpha)
        records.append(IterationRecord(
            iteration=it + 1,
            strategy=strategy,
            bias=[float(v) for v in bias.hb],
            rotation_counts=circuit.rotation_count_by_locality(),
            ar=ar,
            ds=ds,
            mean_energy=sset.mean_energy(),
            cvar_energy=cvar_energy(sset, cfg.alpha),
            best_energy=sset.min_energy(),
            best_bitstring=sset.best_bitstring(),
            entropy=entropy,
            samples=sset.to_json_list(),
        ))
        if sset.min_energy() < best_energy:
            best_energy = sset.min_energy()
            best_bits = sset.best_bitstring()
        if it + 1 < cfg.iterations:
            next_strategy = cfg.strategy_for(it + 1)
            kappa = cfg.kappa if next_strategy.startswith("signed") else 1.0
            bias = update_bias(expectations, next_strategy, kappa)

    return RunRecord(
        n=p.n,
        e0=e0,
        iterations=records,
        best_energy=float(best_energy),
        best_bitstring=best_bits,
        wall_time=time.perf_counter() - t_start,
        config=_config_snapshot(cfg),
    )
