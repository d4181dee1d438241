"""The five parametric causal-model classes.

Each class is a smooth map from an unconstrained real vector to a CHSH
behavior:

  cCC   classical common cause: p = sum_l p(l) p(a|x,l) p(b|y,l)
  cSD0  superdeterministic: the common cause also influences Alice's
        setting; observed behavior conditions on x by Bayes.
  cCE0  cause-effect: Alice's setting influences Bob's outcome directly.
  qCC   quantum common cause: p = Tr[rho (E_{a|x} x F_{b|y})] over a
        two-qubit state and binary POVMs.
  nsCC  post-quantum: convex mixture of the 24 no-signalling vertices.

The chart-to-behavior evaluation lives in the kernels backend; this module
owns the specs, parameter bookkeeping and the structural witnesses.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import kernels

MODEL_CLASSES = ("cCC", "qCC", "cSD0", "cCE0", "nsCC")


class ChartMismatchError(ValueError):
    """Parameter vector length does not match the model spec."""


class UnsupportedCardinalityError(ValueError):
    """Operation requires a specific latent cardinality."""


class EmbeddingFailure(RuntimeError):
    """The model-inclusion witness could not certify reproduction."""


@dataclass(frozen=True)
class ModelSpec:
    model_class: str
    d: int = 4                  # latent cardinality, classical classes only
    constraint: str = "none"    # "none" | "ppt" (qCC only)

    def __post_init__(self):
        if self.model_class not in MODEL_CLASSES:
            raise ValueError(f"unknown model class {self.model_class!r}")
        if self.d < 1:
            raise ValueError("latent cardinality must be >= 1")
        if self.constraint not in ("none", "ppt"):
            raise ValueError(f"unknown constraint {self.constraint!r}")
        if self.constraint == "ppt" and self.model_class != "qCC":
            raise ValueError("ppt constraint applies to qCC only")

    def label(self) -> str:
        s = self.model_class
        if self.model_class in ("cCC", "cSD0", "cCE0"):
            s += f"(d={self.d})"
        if self.constraint != "none":
            s += f"[{self.constraint}]"
        return s

    def to_json(self) -> str:
        return json.dumps({"class": self.model_class, "d": self.d,
                           "constraint": self.constraint})

    @staticmethod
    def from_dict(obj: dict) -> "ModelSpec":
        return ModelSpec(model_class=obj["class"], d=int(obj.get("d", 4)),
                         constraint=obj.get("constraint", "none"))

    @staticmethod
    def from_json(text: str) -> "ModelSpec":
        return ModelSpec.from_dict(json.loads(text))


def param_count(spec: ModelSpec) -> int:
    if spec.model_class == "cCC":
        return 5 * spec.d
    if spec.model_class == "cSD0":
        return 6 * spec.d
    if spec.model_class == "cCE0":
        return 7 * spec.d
    if spec.model_class == "qCC":
        return 56
    return 24  # nsCC


def _check_theta(spec: ModelSpec, theta: np.ndarray) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    n = param_count(spec)
    if theta.shape != (n,):
        raise ChartMismatchError(f"{spec.label()} expects {n} parameters, got {theta.shape}")
    if not np.all(np.isfinite(theta)):
        raise ChartMismatchError("parameters must be finite")
    return theta


def behavior_of(spec: ModelSpec, theta: np.ndarray) -> np.ndarray:
    """Evaluate the chart: unconstrained parameters -> behavior."""
    theta = _check_theta(spec, theta)
    return kernels.behavior(spec.model_class, theta, spec.d)


def loss_and_grad_of(spec: ModelSpec, theta: np.ndarray, f: np.ndarray,
                     w: np.ndarray) -> tuple[float, np.ndarray]:
    """Relative-entropy loss of the chart point against frequencies, with gradient."""
    theta = _check_theta(spec, theta)
    return kernels.loss_and_grad(spec.model_class, theta, spec.d, f, w)


def embed_ccc_into_qcc(theta_ccc: np.ndarray, d: int = 4,
                       tol: float = 1e-9, max_restarts: int = 64) -> np.ndarray:
    """Model-inclusion witness: qCC parameters reproducing a cCC behavior.

    A two-qubit register cannot carry a 4-valued latent readable in full on
    both wings with diagonal states and effects, so the witness is found by
    a seeded deterministic projection: minimize the relative entropy of the
    target cCC behavior from the qCC image until the cell-wise error is
    certified below `tol`.
    """
    from .fitting import minimize_chart  # deferred: fitting imports models

    if d != 4:
        raise UnsupportedCardinalityError("embedding defined for d = 4")
    ccc = ModelSpec("cCC", d=4)
    qcc = ModelSpec("qCC")
    target = behavior_of(ccc, theta_ccc)
    w = np.full((2, 2), 0.25)
    best_theta, best_err = None, np.inf
    for k in range(max_restarts):
        rng = np.random.default_rng(np.random.SeedSequence((0xE3BED, k)))
        theta0 = rng.normal(0.0, 0.8, 56)
        theta, _, _ = minimize_chart(qcc, theta0, target, w,
                                     max_iters=6000, step_tol=1e-14, loss_tol=1e-17)
        err = float(np.max(np.abs(behavior_of(qcc, theta) - target)))
        if err < best_err:
            best_theta, best_err = theta, err
        if best_err <= tol / 2:
            return best_theta
    if best_err <= tol:
        return best_theta
    raise EmbeddingFailure(f"best cell error {best_err:.3e} exceeds {tol:.1e}")


def witness_signalling_params(model_class: str, d: int = 4) -> np.ndarray:
    """Parameters whose behavior violates no-signalling by at least 0.1.

    cCE0: Bob's outcome tracks Alice's setting outright.  cSD0: the latent
    is perfectly correlated with Alice's setting and drives Bob's outcome.
    """
    big = 30.0  # saturates the logits
    if model_class == "cCE0":
        theta = np.zeros(7 * d)
        b = np.zeros((2, 2, d))
        b[0, :, :] = -big   # x=0: p(b=1) ~ 0
        b[1, :, :] = big    # x=1: p(b=1) ~ 1
        theta[3 * d:7 * d] = b.ravel()
        return theta
    if model_class == "cSD0":
        if d < 2:
            raise UnsupportedCardinalityError("cSD0 witness needs d >= 2")
        theta = np.zeros(6 * d)
        xl = np.zeros(d)
        xl[0], xl[1] = -big, big    # lam=0 -> x=0, lam=1 -> x=1
        bl = np.zeros((2, d))
        bl[:, 0], bl[:, 1] = -big, big  # b follows lam, hence x
        theta[d:2 * d] = xl
        theta[4 * d:6 * d] = bl.ravel()
        return theta
    raise ValueError("witness defined for cSD0 and cCE0 only")
