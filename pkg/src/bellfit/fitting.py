"""Maximum-likelihood fitting of a model class to a count table.

The objective is the weighted conditional relative entropy of the
empirical frequencies from the model behavior.  Minimization runs on the
unconstrained chart with Barzilai-Borwein scaled gradient descent under an
Armijo backtracking safeguard; multi-start initialization makes the
procedure deterministic given (spec, table, config).

The optional PPT mode (qCC only) adds a quadratic penalty on the negative
part of the minimum eigenvalue of the partially transposed state and walks
a growing penalty schedule, warm-starting each stage, until the final
state is certified PPT.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import kernels, qmath
from .bell_core import EmpiricalFrequencies, chsh_max, frequencies, ns_delta
from .models import ModelSpec, behavior_of, loss_and_grad_of, param_count

ARMIJO_C = 1e-4
PPT_CERT_TOL = 1e-6


class PptCertificationError(RuntimeError):
    """Penalty continuation failed to reach a PPT state."""


@dataclass(frozen=True)
class FitConfig:
    restarts: int = 16
    max_iters: int = 4000
    step_tol: float = 1e-10
    loss_tol: float = 1e-11
    penalty_weight_schedule: tuple = (10.0, 100.0, 1000.0)
    seed: int = 0

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        sched = tuple(self.penalty_weight_schedule)
        if any(m <= 0 for m in sched) or list(sched) != sorted(sched):
            raise ValueError("penalty schedule must be positive increasing")
        object.__setattr__(self, "penalty_weight_schedule", sched)

    def to_dict(self) -> dict:
        return {"restarts": self.restarts, "max_iters": self.max_iters,
                "step_tol": self.step_tol, "loss_tol": self.loss_tol,
                "penalty_weight_schedule": list(self.penalty_weight_schedule),
                "seed": self.seed}

    @staticmethod
    def from_dict(obj: dict) -> "FitConfig":
        allowed = {"restarts", "max_iters", "step_tol", "loss_tol",
                   "penalty_weight_schedule", "seed"}
        kwargs = {k: v for k, v in obj.items() if k in allowed}
        if "penalty_weight_schedule" in kwargs:
            kwargs["penalty_weight_schedule"] = tuple(kwargs["penalty_weight_schedule"])
        return FitConfig(**kwargs)


@dataclass(frozen=True)
class FitResult:
    spec: ModelSpec
    best_theta: np.ndarray
    train_error: float
    fitted_behavior: np.ndarray
    fitted_ns_delta: float
    fitted_chsh_max: float
    restarts_converged: int
    config: FitConfig
    ppt_min_eig: float | None = None  # PPT mode only

    def to_dict(self) -> dict:
        return {
            "spec": json.loads(self.spec.to_json()),
            "best_theta": [float(v) for v in self.best_theta],
            "train_error": self.train_error,
            "fitted_behavior": self.fitted_behavior.ravel().tolist(),
            "fitted_ns_delta": self.fitted_ns_delta,
            "fitted_chsh_max": self.fitted_chsh_max,
            "restarts_converged": self.restarts_converged,
            "config": self.config.to_dict(),
            "ppt_min_eig": self.ppt_min_eig,
        }


def loss(f: EmpiricalFrequencies, b: np.ndarray) -> float:
    """Weighted conditional relative entropy err(f || b), in nats per trial."""
    return kernels.loss_value(f.f, f.w, b)


def exact_frequencies(b: np.ndarray) -> EmpiricalFrequencies:
    """Treat a behavior as an infinite-N table with uniform design weights."""
    return EmpiricalFrequencies(f=np.asarray(b, dtype=float),
                                w=np.full((2, 2), 0.25))


def ppt_penalty_and_grad(theta: np.ndarray, mu: float) -> tuple[float, np.ndarray]:
    """mu * max(0, -lambda_min(rho^T_B))^2 and its chart gradient (qCC)."""
    grad = np.zeros(56)
    g = (theta[:16] + 1j * theta[16:32]).reshape(4, 4)
    gg = g @ g.conj().T
    trg = np.trace(gg).real
    rho = gg / trg
    w, v = np.linalg.eigh(qmath.partial_transpose_b(rho))
    lmin = float(w[0])
    if lmin >= 0.0:
        return 0.0, grad
    vv = np.outer(v[:, 0], v[:, 0].conj())
    k = 2.0 * mu * lmin * qmath.partial_transpose_b(vv)
    kt = k - np.trace(rho @ k).real * np.eye(4)
    ggrad = 2.0 * (kt @ g) / trg
    grad[:16] = ggrad.real.ravel()
    grad[16:32] = ggrad.imag.ravel()
    return mu * lmin * lmin, grad


def _descend(fun, theta0, max_iters, step_tol, loss_tol):
    """BB-scaled gradient descent with Armijo backtracking."""
    theta = np.array(theta0, dtype=float)
    val, grad = fun(theta)
    t = 1.0 / max(1.0, float(np.linalg.norm(grad)))
    converged = False
    for _ in range(max_iters):
        gn2 = float(grad @ grad)
        if np.sqrt(gn2) < 1e-14:
            converged = True
            break
        step = t
        accepted = False
        for _ in range(60):
            theta_new = theta - step * grad
            val_new, grad_new = fun(theta_new)
            if val_new <= val - ARMIJO_C * step * gn2:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            converged = True  # no descent at float resolution
            break
        s = theta_new - theta
        yv = grad_new - grad
        drop = val - val_new
        theta, val, grad = theta_new, val_new, grad_new
        sy = float(s @ yv)
        t = min(max(float(s @ s) / sy, 1e-12), 1e6) if sy > 1e-300 else step * 2.0
        if float(np.max(np.abs(s))) < step_tol or drop < loss_tol:
            converged = True
            break
    return theta, val, converged


def minimize_chart(spec: ModelSpec, theta0: np.ndarray, f: np.ndarray,
                   w: np.ndarray, max_iters: int, step_tol: float,
                   loss_tol: float, mu: float = 0.0):
    """Single local minimization of the loss on the spec's chart."""
    d = spec.d
    cls = spec.model_class
    if mu > 0.0:
        def fun(th):
            v, g = kernels.loss_and_grad(cls, th, d, f, w)
            pv, pg = ppt_penalty_and_grad(th, mu)
            return v + pv, g + pg
    else:
        def fun(th):
            return kernels.loss_and_grad(cls, th, d, f, w)
    return _descend(fun, theta0, max_iters, step_tol, loss_tol)


def _restart_point(spec: ModelSpec, seed: int, k: int) -> np.ndarray:
    rng = np.random.default_rng(np.random.SeedSequence((seed, k)))
    return rng.normal(0.0, 0.5, param_count(spec))


def _fit_one_restart(spec, theta0, f, w, cfg):
    if spec.constraint == "ppt":
        theta = theta0
        converged = True
        schedule = list(cfg.penalty_weight_schedule)
        for mu in schedule:
            theta, _, converged = minimize_chart(
                spec, theta, f, w, cfg.max_iters, cfg.step_tol, cfg.loss_tol, mu=mu)
        # continuation until the state is certifiably PPT
        mu = schedule[-1]
        while _ppt_min_eig(theta) < -1e-9 and mu < 1e12:
            mu *= 10.0
            theta, _, converged = minimize_chart(
                spec, theta, f, w, cfg.max_iters, cfg.step_tol, cfg.loss_tol, mu=mu)
        val, _ = kernels.loss_and_grad(spec.model_class, theta, spec.d, f, w)
        return theta, val, converged
    theta, val, converged = minimize_chart(
        spec, theta0, f, w, cfg.max_iters, cfg.step_tol, cfg.loss_tol)
    return theta, val, converged


def _ppt_min_eig(theta: np.ndarray) -> float:
    g = (theta[:16] + 1j * theta[16:32]).reshape(4, 4)
    gg = g @ g.conj().T
    rho = gg / np.trace(gg).real
    return float(np.linalg.eigvalsh(qmath.partial_transpose_b(rho))[0])


def fit(spec: ModelSpec, table: np.ndarray, cfg: FitConfig | None = None) -> FitResult:
    """Best-of-restarts maximum-likelihood fit of `spec` to a count table.

    Deterministic given (spec, table, cfg); non-convergence of individual
    restarts is reported through `restarts_converged`, not raised.
    """
    cfg = cfg or FitConfig()
    freqs = frequencies(table)
    return fit_frequencies(spec, freqs, cfg)


def fit_frequencies(spec: ModelSpec, freqs: EmpiricalFrequencies,
                    cfg: FitConfig | None = None) -> FitResult:
    """Like `fit`, but on precomputed (possibly exact) frequencies."""
    cfg = cfg or FitConfig()
    f, w = freqs.f, freqs.w
    best = None
    n_converged = 0
    for k in range(cfg.restarts):
        theta0 = _restart_point(spec, cfg.seed, k)
        theta, val, converged = _fit_one_restart(spec, theta0, f, w, cfg)
        n_converged += int(converged)
        if best is None or val < best[1]:
            best = (theta, val)
    theta, _ = best
    fitted = behavior_of(spec, theta)
    ppt_eig = None
    if spec.constraint == "ppt":
        ppt_eig = _ppt_min_eig(theta)
        if ppt_eig < -PPT_CERT_TOL:
            raise PptCertificationError(f"min PT eigenvalue {ppt_eig:.3e}")
    return FitResult(
        spec=spec,
        best_theta=theta,
        train_error=kernels.loss_value(f, w, fitted),
        fitted_behavior=fitted,
        fitted_ns_delta=ns_delta(fitted),
        fitted_chsh_max=chsh_max(fitted),
        restarts_converged=n_converged,
        config=cfg,
        ppt_min_eig=ppt_eig,
    )


def gradient_check(spec: ModelSpec, theta: np.ndarray,
                   freqs: EmpiricalFrequencies, h: float = 1e-6) -> float:
    """Max deviation of the analytic loss gradient from central differences."""
    theta = np.asarray(theta, dtype=float)
    _, grad = loss_and_grad_of(spec, theta, freqs.f, freqs.w)
    worst = 0.0
    for i in range(len(theta)):
        e = np.zeros_like(theta)
        e[i] = h
        lp = kernels.loss_and_grad(spec.model_class, theta + e, spec.d, freqs.f, freqs.w)[0]
        lm = kernels.loss_and_grad(spec.model_class, theta - e, spec.d, freqs.f, freqs.w)[0]
        fd = (lp - lm) / (2.0 * h)
        worst = max(worst, abs(grad[i] - fd) / (1.0 + abs(fd)))
    return worst
