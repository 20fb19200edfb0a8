"""Brute-force oracle for the closed-form security analysis.

Two independent routes:

* :func:`sample_rounds` draws protocol rounds one by one (Bell branch from
  Eve's purification, Alice's bit, Bob's post-selection, pointer position)
  and bins the pointer readout.
* :func:`density_oracle` builds the full Alice-Bob-Eve-pointer state on a
  position grid, applies the coupling ``exp(-i gamma sigma_z (x) p)`` in the
  computational basis, post-selects, projects the pointer and takes a partial
  trace to get Eve's memory.

Neither route uses weak values.
"""

from __future__ import annotations

import json
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .keyrate import holevo_from_states
from .protocol import ChannelModel, KET0, KET1, KET_PLUS, ProtocolParams, bell_states
from .qmath import DensityMatrix, partial_trace
from .security_exact import eve_state_exact, holevo_exact, joint_prob_exact
from .security_wma import WMAArtifactWarning, holevo_wma

CHUNK = 1 << 16
OUTCOMES = (0, 1, "inconclusive", "discarded")
ORACLE_TOL = 1e-6
RESOLUTION_TOL = 1e-4
LOW_POWER = 1000


class ResolutionError(RuntimeError):
    """The pointer grid is too coarse for the requested accuracy."""


@dataclass(frozen=True)
class SimConfig:
    eta: float
    params: ProtocolParams
    rounds: int = 1_000_000
    seed: int = 42
    grid_half_width: float = 8.0
    grid_points: int = 4096
    workers: int = 1
    shift: str = "analytic"

    def __post_init__(self):
        ChannelModel.depolarizing(self.eta)
        if self.rounds < 1:
            raise ValueError("need at least one round")
        if self.grid_points < 256:
            raise ValueError("grid_points must be at least 256")
        if not self.grid_half_width > 0.0:
            raise ValueError("grid_half_width must be positive")
        if self.shift not in ("analytic", "fft"):
            raise ValueError("shift must be 'analytic' or 'fft'")

    @property
    def bin_width(self) -> float:
        w = self.params.bin_width
        return 0.1 * self.params.delta if w is None else w


@dataclass
class EmpiricalCounts:
    counts: dict = field(default_factory=lambda: {(a, o): 0 for a in (0, 1) for o in OUTCOMES})
    total: int = 0

    def merge(self, other: "EmpiricalCounts") -> "EmpiricalCounts":
        for k, v in other.counts.items():
            self.counts[k] += v
        self.total += other.total
        return self

    @property
    def conclusive(self) -> int:
        return sum(self.counts[(a, b)] for a in (0, 1) for b in (0, 1))

    @property
    def discarded(self) -> int:
        return self.counts[(0, "discarded")] + self.counts[(1, "discarded")]

    def joint(self) -> np.ndarray:
        """Empirical ``P(a, b)`` among conclusive rounds."""
        n = self.conclusive
        if n == 0:
            raise ValueError("no conclusive rounds")
        return np.array([[self.counts[(a, b)] for b in (0, 1)] for a in (0, 1)], dtype=float) / n

    def to_json(self) -> dict:
        return {f"{a}:{o}": v for (a, o), v in self.counts.items()}


def _sample_chunk(n: int, seed_seq: np.random.SeedSequence, cfg: SimConfig) -> EmpiricalCounts:
    rng = np.random.Generator(np.random.PCG64(seed_seq))
    p = cfg.params
    lam = np.array(ChannelModel.depolarizing(cfg.eta).lambdas)
    branch = rng.choice(4, size=n, p=lam / lam.sum())
    a = rng.integers(0, 2, size=n)
    kept = rng.random(n) < 0.5
    # Phi+- keep Bob's qubit equal to Alice's, Psi+- flip it
    bob = np.where(branch < 2, a, 1 - a)
    x = rng.normal(p.gamma * (1 - 2 * bob), p.delta)

    half = 0.5 * cfg.bin_width
    in0 = (x >= p.alpha - half) & (x < p.alpha + half)
    in1 = (x >= -p.alpha - half) & (x < -p.alpha + half) & ~in0
    out = EmpiricalCounts(total=n)
    for bit in (0, 1):
        mine = a == bit
        out.counts[(bit, "discarded")] = int(np.sum(mine & ~kept))
        k = mine & kept
        out.counts[(bit, 0)] = int(np.sum(k & in0))
        out.counts[(bit, 1)] = int(np.sum(k & in1))
        out.counts[(bit, "inconclusive")] = int(np.sum(k & ~in0 & ~in1))
    return out


def sample_rounds(cfg: SimConfig) -> EmpiricalCounts:
    """Simulate ``cfg.rounds`` protocol rounds.

    Rounds are split into fixed chunks, each with its own stream spawned from
    ``cfg.seed``, so the counts do not depend on ``cfg.workers``.
    """
    sizes = [CHUNK] * (cfg.rounds // CHUNK)
    if cfg.rounds % CHUNK:
        sizes.append(cfg.rounds % CHUNK)
    streams = np.random.SeedSequence(cfg.seed).spawn(len(sizes))
    jobs = list(zip(sizes, streams))
    if cfg.workers > 1:
        with ThreadPoolExecutor(cfg.workers) as ex:
            parts = list(ex.map(lambda j: _sample_chunk(j[0], j[1], cfg), jobs))
    else:
        parts = [_sample_chunk(n, s, cfg) for n, s in jobs]
    total = EmpiricalCounts()
    for part in parts:
        total.merge(part)
    return total


@dataclass(frozen=True)
class PointerGrid:
    x: np.ndarray
    dx: float
    alpha_index: int
    centre: int


def pointer_grid(cfg: SimConfig) -> PointerGrid:
    """Uniform grid over ``+-(alpha + grid_half_width delta)`` with nodes at ``+-alpha``."""
    p = cfg.params
    span = p.alpha + cfg.grid_half_width * p.delta
    dx = 2.0 * span / (cfg.grid_points - 1)
    k = 0
    if p.alpha > 0.0:
        k = max(1, round(p.alpha / dx))
        dx = p.alpha / k
    n_half = math.ceil(span / dx)
    x = dx * np.arange(-n_half, n_half + 1)
    return PointerGrid(x, dx, k, n_half)


def _shifted_pointers(cfg: SimConfig, grid: PointerGrid) -> np.ndarray:
    """Pointer amplitudes after the coupling, one row per Bob computational bit."""
    p = cfg.params
    d = p.delta

    def xi(x):
        return (2 * math.pi * d * d) ** -0.25 * np.exp(-(x**2) / (4 * d * d))

    base = xi(grid.x)
    norm = math.sqrt(np.sum(np.abs(base) ** 2) * grid.dx)
    if abs(norm - 1.0) > RESOLUTION_TOL:
        raise ResolutionError(
            f"pointer norm on the grid is {norm:.6f}; raise grid_points or grid_half_width"
        )
    if cfg.shift == "analytic":
        rows = [xi(grid.x - p.gamma), xi(grid.x + p.gamma)]
    else:
        k = 2 * math.pi * np.fft.fftfreq(grid.x.size, grid.dx)
        spectrum = np.fft.fft(base)
        rows = [np.fft.ifft(spectrum * np.exp(-1j * p.gamma * s * k)) for s in (1.0, -1.0)]
    return np.array(rows, dtype=complex) / norm


def _projected_eve(a: int, b: int, cfg: SimConfig, pointers: np.ndarray, grid: PointerGrid):
    """Eve's memory and the log-weight of outcome ``(a, b)``."""
    lam = ChannelModel.depolarizing(cfg.eta).lambdas
    node = grid.centre + (grid.alpha_index if b == 0 else -grid.alpha_index)
    # psi[A, B, E] with the pointer fixed at the chosen node
    psi = np.zeros((2, 2, 4), dtype=complex)
    for i, bell in enumerate(bell_states()):
        ab = bell.reshape(2, 2)
        for bob in (0, 1):
            psi[:, bob, i] += math.sqrt(lam[i]) * ab[:, bob] * pointers[bob, node]
    vec = psi.reshape(16) * math.sqrt(grid.dx)
    scale = np.max(np.abs(vec))
    if scale == 0.0:
        raise ResolutionError("pointer amplitude underflows at the bin centre")
    vec = vec / scale
    alice = KET0 if a == 0 else KET1
    proj = np.kron(np.outer(alice, alice.conj()), np.kron(np.outer(KET_PLUS, KET_PLUS.conj()), np.eye(4)))
    v = proj @ vec
    rho = partial_trace(np.outer(v, v.conj()), [2, 2, 4], [0, 1])
    weight = float(np.trace(rho).real)
    log_w = math.log(weight) + 2.0 * math.log(scale)
    return DensityMatrix.normalized(rho), log_w


def density_oracle(a: int, b: int, cfg: SimConfig) -> DensityMatrix:
    """Eve's memory given key bits ``(a, b)``, by explicit partial trace on a grid."""
    grid = pointer_grid(cfg)
    return _projected_eve(a, b, cfg, _shifted_pointers(cfg, grid), grid)[0]


def oracle_states(cfg: SimConfig) -> tuple[dict, np.ndarray]:
    """All four oracle memories and the joint table implied by the projection weights."""
    grid = pointer_grid(cfg)
    pointers = _shifted_pointers(cfg, grid)
    states, logw = {}, np.empty((2, 2))
    for a in (0, 1):
        for b in (0, 1):
            states[(a, b)], logw[a, b] = _projected_eve(a, b, cfg, pointers, grid)
    w = np.exp(logw - logw.max())
    return states, w / w.sum()


def max_entry_deviation(x, y) -> float:
    return float(np.max(np.abs(np.asarray(x) - np.asarray(y))))


def oracle_deviation(cfg: SimConfig) -> float:
    """Largest entry difference between oracle and closed-form memories."""
    states, _ = oracle_states(cfg)
    dev = max(
        max_entry_deviation(states[(a, b)].matrix, eve_state_exact(a, b, cfg.eta, cfg.params).matrix)
        for a in (0, 1)
        for b in (0, 1)
    )
    if dev > RESOLUTION_TOL:
        raise ResolutionError(
            f"oracle differs from closed form by {dev:.3e}; raise grid_points (now {cfg.grid_points})"
        )
    return dev


def wma_discrepancy_probe(cfg: SimConfig, sample: bool = False) -> dict:
    """Holevo quantity from oracle states vs. both closed-form pipelines."""
    states, joint = oracle_states(cfg)
    chi_oracle = holevo_from_states(joint, states)
    chi_exact = holevo_exact(cfg.eta, cfg.params)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", WMAArtifactWarning)
        chi_wma = holevo_wma(cfg.eta, cfg.params)
    out = {
        "chi_oracle": chi_oracle,
        "chi_exact": chi_exact,
        "chi_wma": chi_wma,
        "deviation_exact": abs(chi_oracle - chi_exact),
        "deviation_wma": abs(chi_oracle - chi_wma),
    }
    out["agrees_with_exact"] = out["deviation_exact"] <= ORACLE_TOL
    out["sides_with_exact"] = out["deviation_exact"] <= out["deviation_wma"]
    if sample:
        counts = sample_rounds(cfg)
        out["conclusive_rounds"] = counts.conclusive
        if counts.conclusive and np.all(counts.joint().sum(axis=1) > 0):
            out["chi_empirical_joint"] = holevo_from_states(counts.joint(), states)
    return out


def _z(observed: float, expected: float, n: int) -> float:
    var = expected * (1.0 - expected) / n
    if var <= 0.0:
        return 0.0 if observed == expected else math.copysign(1e9, observed - expected)
    return (observed - expected) / math.sqrt(var)


def validation_report(cfg: SimConfig) -> dict:
    """Everything the Monte Carlo check produces, as a JSON-ready dict."""
    counts = sample_rounds(cfg)
    target = joint_prob_exact(cfg.eta, cfg.params)
    n_conc = counts.conclusive
    low_power = n_conc < LOW_POWER

    z_scores, empirical = {}, {}
    if n_conc:
        emp = counts.joint()
        for a in (0, 1):
            for b in (0, 1):
                empirical[f"{a}{b}"] = float(emp[a, b])
                z_scores[f"joint_{a}{b}"] = _z(emp[a, b], target[a, b], n_conc)
    post = counts.total - counts.discarded
    z_scores["postselection"] = _z(post / counts.total, 0.5, counts.total)

    checks = []
    for name, z in sorted(z_scores.items()):
        checks.append({"name": f"z<3:{name}", "value": z, "passed": bool(abs(z) < 3.0), "gating": not low_power or name == "postselection"})

    dev = oracle_deviation(cfg)
    checks.append({"name": "oracle_vs_closed_form", "value": dev, "passed": bool(dev <= ORACLE_TOL), "gating": True})

    return {
        "schema_version": 1,
        "config": {
            "eta": cfg.eta,
            "gamma": cfg.params.gamma,
            "delta": cfg.params.delta,
            "alpha": cfg.params.alpha,
            "bin_width": cfg.bin_width,
            "rounds": cfg.rounds,
            "seed": cfg.seed,
            "grid_points": cfg.grid_points,
            "grid_half_width": cfg.grid_half_width,
        },
        "counts": counts.to_json(),
        "total": counts.total,
        "conclusive": n_conc,
        "low_power": low_power,
        "empirical_joint": empirical,
        "analytic_joint": {f"{a}{b}": float(target[a, b]) for a in (0, 1) for b in (0, 1)},
        "z_scores": z_scores,
        "oracle_max_entry_deviation": dev,
        "checks": checks,
        "passed": all(c["passed"] for c in checks if c["gating"]),
    }


def report_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True, allow_nan=False) + "\n"
