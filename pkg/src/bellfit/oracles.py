"""Brute-force references for the CHSH polytopes and separability.

These stay deliberately independent of the model charts: vertices come
from closed-form enumeration, the local bound from an exhaustive scan and
separability from the partial-transpose spectrum.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from . import qmath
from .bell_core import chsh, check_behavior

PPT_TOL = 1e-9


@dataclass(frozen=True)
class VertexSet:
    kind: str  # "local-deterministic" | "no-signalling"
    vertices: np.ndarray  # shape (n, 2, 2, 2, 2)


def _local_vertex(alpha: int, beta: int, gamma: int, delta: int) -> np.ndarray:
    """Deterministic behavior a = alpha*x xor beta, b = gamma*y xor delta."""
    p = np.zeros((2, 2, 2, 2))
    for x in range(2):
        for y in range(2):
            a = (alpha * x) ^ beta
            b = (gamma * y) ^ delta
            p[x, y, a, b] = 1.0
    return p


def _pr_vertex(alpha: int, beta: int, gamma: int) -> np.ndarray:
    """PR-box variant: a xor b = x*y xor alpha*x xor beta*y xor gamma."""
    p = np.zeros((2, 2, 2, 2))
    for x in range(2):
        for y in range(2):
            for a in range(2):
                b = a ^ (x * y) ^ (alpha * x) ^ (beta * y) ^ gamma
                p[x, y, a, b] = 0.5
    return p


def enumerate_local_vertices() -> VertexSet:
    """The 16 local deterministic behaviors, lexicographic in (alpha,beta,gamma,delta)."""
    vs = [_local_vertex(*idx) for idx in np.ndindex(2, 2, 2, 2)]
    return VertexSet(kind="local-deterministic", vertices=np.array(vs))


def enumerate_ns_vertices() -> VertexSet:
    """The 24 no-signalling vertices: 16 local ones then the 8 PR variants."""
    vs = [_local_vertex(*idx) for idx in np.ndindex(2, 2, 2, 2)]
    vs += [_pr_vertex(*idx) for idx in np.ndindex(2, 2, 2)]
    return VertexSet(kind="no-signalling", vertices=np.array(vs))


def pr_box() -> np.ndarray:
    return _pr_vertex(0, 0, 0)


def local_bound_chsh() -> float:
    """Max of the CHSH functional over the 16 local vertices."""
    return max(chsh(v) for v in enumerate_local_vertices().vertices)


def in_convex_hull(p: np.ndarray, vertices: np.ndarray, tol: float = 1e-9) -> bool:
    """LP feasibility: is `p` a convex combination of the given behaviors?"""
    p = check_behavior(np.asarray(p, dtype=float))
    v = np.asarray(vertices, dtype=float).reshape(len(vertices), -1).T  # (16, n)
    a_eq = np.vstack([v, np.ones((1, v.shape[1]))])
    b_eq = np.concatenate([p.ravel(), [1.0]])
    res = linprog(np.zeros(v.shape[1]), A_eq=a_eq, b_eq=b_eq,
                  bounds=[(0, None)] * v.shape[1], method="highs")
    if res.status == 2:  # infeasible
        return False
    if not res.success:
        raise RuntimeError(f"LP solver failure: {res.message}")
    mix = v @ res.x
    return bool(np.max(np.abs(mix - p.ravel())) <= tol)


def in_ns_polytope(p: np.ndarray, tol: float = 1e-9) -> bool:
    return in_convex_hull(p, enumerate_ns_vertices().vertices, tol=tol)


def in_local_polytope(p: np.ndarray, tol: float = 1e-9) -> bool:
    return in_convex_hull(p, enumerate_local_vertices().vertices, tol=tol)


def is_ppt_separable(rho: np.ndarray) -> bool:
    """Two-qubit separability decided by positivity of the partial transpose."""
    rho = qmath.check_density_matrix(rho)
    w = np.linalg.eigvalsh(qmath.partial_transpose_b(rho))
    return bool(w.min() >= -PPT_TOL)
