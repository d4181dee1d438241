"""Ground-truth generators for the five experimental regimes.

Each scenario id names a physical story and yields an exact behavior:

  E1-entangled        noisy singlet-class source at CHSH-optimal angles
  E2-dephased         the same source after one-sided dephasing (separable)
  E3-near-saturation  separable truth tuned to chsh_max = 2 - epsilon
  E4-signalling       dephased truth mixed with a signalling component
  E5-near-tsirelson   PR/uniform mixture tuned just below the Tsirelson bound

Finite-run count tables come from `generate`, which draws independent
train/test samples off substreams of the scenario seed.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from . import qmath
from .bell_core import (STREAM_TEST, STREAM_TRAIN, check_behavior, chsh_max,
                        sample, substream_seed, uniform_behavior)
from .oracles import is_ppt_separable, pr_box

SCENARIO_IDS = ("E1-entangled", "E2-dephased", "E3-near-saturation",
                "E4-signalling", "E5-near-tsirelson")

TSIRELSON = 2.0 * math.sqrt(2.0)
TUNE_TOL = 1e-9


class UnreachableTarget(RuntimeError):
    """A tuning search cannot reach its target value."""


@dataclass(frozen=True)
class ScenarioSpec:
    id: str
    noise: float = 0.0
    epsilon: float = 0.01           # E3/E5 shortfall
    signalling_strength: float = 0.1  # E4 only
    trials_per_setting: int = 10_000
    seed: int = 0

    def __post_init__(self):
        if self.id not in SCENARIO_IDS:
            raise ValueError(f"unknown scenario id {self.id!r}")
        if not 0.0 <= self.noise <= 1.0:
            raise ValueError("noise must lie in [0, 1]")
        if self.epsilon < 0.0:
            raise ValueError("epsilon must be >= 0")
        if not 0.0 <= self.signalling_strength <= 1.0:
            raise ValueError("signalling_strength must lie in [0, 1]")
        if self.trials_per_setting < 1:
            raise ValueError("trials_per_setting must be >= 1")

    def with_seed(self, seed: int) -> "ScenarioSpec":
        return ScenarioSpec(self.id, self.noise, self.epsilon,
                            self.signalling_strength, self.trials_per_setting,
                            int(seed))

    def to_dict(self) -> dict:
        return {"id": self.id, "noise": self.noise, "epsilon": self.epsilon,
                "signalling_strength": self.signalling_strength,
                "trials_per_setting": self.trials_per_setting, "seed": self.seed}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @staticmethod
    def from_dict(obj: dict) -> "ScenarioSpec":
        return ScenarioSpec(
            id=obj["id"], noise=float(obj.get("noise", 0.0)),
            epsilon=float(obj.get("epsilon", 0.01)),
            signalling_strength=float(obj.get("signalling_strength", 0.1)),
            trials_per_setting=int(obj.get("trials_per_setting", 10_000)),
            seed=int(obj.get("seed", 0)))

    @staticmethod
    def from_json(text: str) -> "ScenarioSpec":
        return ScenarioSpec.from_dict(json.loads(text))


def born_behavior(rho: np.ndarray, a_axes: np.ndarray, b_axes: np.ndarray) -> np.ndarray:
    """Behavior of projective measurements along Bloch axes on a 4x4 state."""
    p = np.empty((2, 2, 2, 2))
    for x in range(2):
        pa = qmath.bloch_projector(a_axes[x])
        for y in range(2):
            pb = qmath.bloch_projector(b_axes[y])
            for a in range(2):
                ea = pa if a == 0 else qmath.I2 - pa
                for b in range(2):
                    fb = pb if b == 0 else qmath.I2 - pb
                    p[x, y, a, b] = np.trace(rho @ qmath.kron(ea, fb)).real
    return check_behavior(p)


_SQ = 1.0 / math.sqrt(2.0)
# CHSH-optimal axes for the Phi+ state: A in {Z, X}, B in {(Z+X)/sqrt2, (Z-X)/sqrt2}
_E1_A_AXES = np.array([[0.0, 0.0, 1.0], [1.0, 0.0, 0.0]])
_E1_B_AXES = np.array([[_SQ, 0.0, _SQ], [-_SQ, 0.0, _SQ]])


def _phi_plus() -> np.ndarray:
    v = np.array([1.0, 0.0, 0.0, 1.0], dtype=complex) / math.sqrt(2.0)
    return np.outer(v, v.conj())


def _e1_state(noise: float) -> np.ndarray:
    return (1.0 - noise) * _phi_plus() + noise * qmath.I4 / 4.0


def _e2_state(noise: float) -> np.ndarray:
    rho = _e1_state(noise)
    x1 = qmath.kron(qmath.PAULI_X, qmath.I2)
    return 0.5 * rho + 0.5 * (x1 @ rho @ x1)


def _e3_axes(t: float) -> tuple[np.ndarray, np.ndarray]:
    axes = np.array([[1.0, 0.0, 0.0],
                     [math.cos(t), 0.0, math.sin(t)]])
    return axes, axes


def _e3_behavior(t: float) -> np.ndarray:
    a_axes, b_axes = _e3_axes(t)
    return born_behavior(qmath.kron(qmath.bloch_projector([1.0, 0.0, 0.0]),
                                    qmath.bloch_projector([1.0, 0.0, 0.0])),
                         a_axes, b_axes)


def truth_state(s: ScenarioSpec) -> np.ndarray:
    """Quantum state behind the scenario truth (E1/E2 only)."""
    if s.id == "E1-entangled":
        return _e1_state(s.noise)
    if s.id == "E2-dephased":
        return _e2_state(s.noise)
    raise ValueError(f"{s.id} has no single underlying state")


def ground_truth(s: ScenarioSpec) -> np.ndarray:
    """Exact behavior p(a,b|x,y) of the scenario."""
    if s.id == "E1-entangled":
        return born_behavior(_e1_state(s.noise), _E1_A_AXES, _E1_B_AXES)
    if s.id == "E2-dephased":
        rho = _e2_state(s.noise)
        if not is_ppt_separable(rho):
            raise RuntimeError("dephased state failed the PPT certificate")
        return born_behavior(rho, _E1_A_AXES, _E1_B_AXES)
    if s.id == "E3-near-saturation":
        return _e3_truth(s.epsilon)
    if s.id == "E4-signalling":
        base = ground_truth(ScenarioSpec("E2-dephased", noise=s.noise))
        leak = np.zeros((2, 2, 2, 2))
        for x in range(2):
            leak[x, :, :, x] = 0.5   # Bob's outcome copies Alice's setting
        p = (1.0 - s.signalling_strength) * base + s.signalling_strength * leak
        return check_behavior(p)
    # E5-near-tsirelson
    target = TSIRELSON - s.epsilon
    w = target / 4.0
    if not 0.0 <= w <= 1.0:
        raise UnreachableTarget(f"PR weight {w:.4f} outside [0, 1]")
    p = w * pr_box() + (1.0 - w) * uniform_behavior()
    if abs(chsh_max(p) - target) > TUNE_TOL:
        raise UnreachableTarget("PR mixture missed the CHSH target")
    return p


def _e3_truth(epsilon: float) -> np.ndarray:
    """Bisection on the second measurement angle for chsh_max = 2 - epsilon."""
    target = 2.0 - epsilon
    if epsilon > 1.0:
        raise UnreachableTarget("E3 family only reaches chsh_max in [1, 2]")
    lo, hi = 0.0, math.pi / 2.0   # chsh_max decreasing in t on this interval
    if chsh_max(_e3_behavior(hi)) > target + TUNE_TOL:
        raise UnreachableTarget("target below the bracketing interval")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if chsh_max(_e3_behavior(mid)) >= target:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-15:
            break
    p = _e3_behavior(0.5 * (lo + hi))
    if abs(chsh_max(p) - target) > TUNE_TOL:
        raise UnreachableTarget("bisection failed to certify the CHSH target")
    return p


def generate(s: ScenarioSpec) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Independent train and test count tables plus the exact truth."""
    truth = ground_truth(s)
    train = sample(truth, s.trials_per_setting, substream_seed(s.seed, STREAM_TRAIN))
    test = sample(truth, s.trials_per_setting, substream_seed(s.seed, STREAM_TEST))
    return train, test, truth
