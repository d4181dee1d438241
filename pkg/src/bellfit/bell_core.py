"""Observational layer of the CHSH scenario.

Behaviors p(a,b|x,y), finite-run count tables, empirical frequencies,
seeded multinomial sampling, the CHSH functionals and the no-signalling
deviation gauge.  Arrays are indexed [x, y, a, b] with all four indices
binary.
"""
from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

BEHAVIOR_TOL = 1e-10

# substream tags for derived sampling streams
STREAM_TRAIN = 0
STREAM_TEST = 1


class EmptySettingError(ValueError):
    """A setting pair (x, y) has no recorded trials."""


def check_behavior(p: np.ndarray, tol: float = BEHAVIOR_TOL) -> np.ndarray:
    """Validate a behavior array: entries in [0,1], per-setting normalization."""
    p = np.asarray(p, dtype=float)
    if p.shape != (2, 2, 2, 2):
        raise ValueError(f"expected shape (2,2,2,2), got {p.shape}")
    if p.min() < -tol or p.max() > 1.0 + tol:
        raise ValueError("behavior entries outside [0,1]")
    norms = p.sum(axis=(2, 3))
    if np.max(np.abs(norms - 1.0)) > tol:
        raise ValueError("per-setting normalization violated")
    return p


def uniform_behavior() -> np.ndarray:
    return np.full((2, 2, 2, 2), 0.25)


@dataclass(frozen=True)
class EmpiricalFrequencies:
    """Per-setting relative frequencies f(a,b|x,y) and design weights w_xy."""

    f: np.ndarray  # shape (2,2,2,2), normalized per setting
    w: np.ndarray  # shape (2,2), sums to 1

    def __post_init__(self):
        check_behavior(self.f)
        if abs(self.w.sum() - 1.0) > BEHAVIOR_TOL:
            raise ValueError("weights must sum to 1")


def sample(p: np.ndarray, trials_per_setting: int, seed: int) -> np.ndarray:
    """Draw a count table from behavior `p`, N trials per setting.

    Each setting (x, y) uses an independent substream derived from
    (seed, x, y), so the result does not depend on iteration order.
    """
    if trials_per_setting < 1:
        raise ValueError("trials_per_setting must be >= 1")
    p = check_behavior(p)
    counts = np.zeros((2, 2, 2, 2), dtype=np.int64)
    for x in range(2):
        for y in range(2):
            rng = np.random.default_rng(np.random.SeedSequence((seed, x, y)))
            cell = p[x, y].ravel()
            cell = np.clip(cell, 0.0, None)
            cell = cell / cell.sum()
            counts[x, y] = rng.multinomial(trials_per_setting, cell).reshape(2, 2)
    return counts


def substream_seed(seed: int, tag: int) -> int:
    """Derive an independent integer seed from (seed, tag)."""
    return int(np.random.SeedSequence((seed, tag)).generate_state(1, np.uint64)[0])


def trials_per_setting(counts: np.ndarray) -> np.ndarray:
    return np.asarray(counts).sum(axis=(2, 3))


def frequencies(counts: np.ndarray) -> EmpiricalFrequencies:
    """Empirical frequencies and design weights from a count table."""
    counts = np.asarray(counts)
    n_xy = trials_per_setting(counts)
    if (n_xy == 0).any():
        raise EmptySettingError("every setting pair needs at least one trial")
    f = counts / n_xy[:, :, None, None]
    w = n_xy / n_xy.sum()
    return EmpiricalFrequencies(f=f, w=w)


def correlators(p: np.ndarray) -> np.ndarray:
    """E_xy = sum_ab (-1)^(a+b) p(a,b|x,y), shape (2,2)."""
    signs = np.array([[1.0, -1.0], [-1.0, 1.0]])
    return np.einsum('xyab,ab->xy', np.asarray(p, dtype=float), signs)


def chsh(p: np.ndarray) -> float:
    """CHSH functional S = E00 + E01 + E10 - E11."""
    e = correlators(p)
    return float(e[0, 0] + e[0, 1] + e[1, 0] - e[1, 1])


def chsh_max(p: np.ndarray) -> float:
    """Max |S| over the 8 CHSH sign conventions."""
    e = correlators(p)
    best = 0.0
    for alpha in range(2):
        for beta in range(2):
            s = 0.0
            for x in range(2):
                for y in range(2):
                    s += (-1.0) ** ((alpha * x) ^ (beta * y) ^ (x * y)) * e[x, y]
            best = max(best, abs(s))
    return best


def ns_delta(p: np.ndarray) -> float:
    """Worst-case marginal shift across the remote setting.

    Zero iff no-signalling holds exactly; positive on signalling behaviors.
    """
    p = np.asarray(p, dtype=float)
    pa = p.sum(axis=3)  # p_A(a|x,y), indices [x,y,a]
    pb = p.sum(axis=2)  # p_B(b|x,y), indices [x,y,b]
    da = np.max(np.abs(pa[:, 0, :] - pa[:, 1, :]))
    db = np.max(np.abs(pb[0, :, :] - pb[1, :, :]))
    return float(max(da, db))


# ---------------------------------------------------------------------------
# CSV interchange format: header "x,y,a,b,count", one row per nonzero cell.

CSV_HEADER = "x,y,a,b,count"


def table_to_csv(counts: np.ndarray) -> str:
    counts = np.asarray(counts)
    lines = [CSV_HEADER]
    for x in range(2):
        for y in range(2):
            for a in range(2):
                for b in range(2):
                    c = int(counts[x, y, a, b])
                    if c != 0:
                        lines.append(f"{x},{y},{a},{b},{c}")
    return "\n".join(lines) + "\n"


def table_from_csv(text: str) -> np.ndarray:
    counts = np.zeros((2, 2, 2, 2), dtype=np.int64)
    reader = io.StringIO(text)
    header = reader.readline().strip()
    if header != CSV_HEADER:
        raise ValueError(f"bad header: {header!r}")
    for line in reader:
        line = line.strip()
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 5:
            raise ValueError(f"bad row: {line!r}")
        x, y, a, b, c = (int(v) for v in parts)
        if not (0 <= x <= 1 and 0 <= y <= 1 and 0 <= a <= 1 and 0 <= b <= 1):
            raise ValueError(f"indices out of range in row {line!r}")
        if c < 0:
            raise ValueError("negative count")
        counts[x, y, a, b] = c
    return counts
