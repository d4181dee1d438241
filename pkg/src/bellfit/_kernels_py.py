"""Pure-numpy kernels: chart-to-behavior maps and loss gradients.

This is the fallback backend; `bellfit._kernels_c` (Cython) implements the
same functions for the hot fitting loop.  Both must agree to float
precision -- `tests/test_kernels.py` enforces parity and checks every
gradient against central finite differences.

Parameter layouts (all charts are unconstrained real vectors):

  cCC  (5d):  q_logits[d] | a_logits[2,d] | b_logits[2,d]
  cSD0 (6d):  q_logits[d] | x_logits[d] | a_logits[2,d] | b_logits[2,d]
  cCE0 (7d):  q_logits[d] | a_logits[2,d] | b_logits[2,2,d]
  qCC  (56):  Re g[16] | Im g[16] | four effect blocks of 6
              (A|x=0, A|x=1, B|y=0, B|y=1), each (t1, t2, h00, h11, hre, him)
  nsCC (24):  simplex logits over the 24 no-signalling vertices

Binary conditionals use a single logit for the outcome-1 probability;
latent weights use softmax.  The loss is the weighted conditional relative
entropy sum_xy w_xy sum_ab f log(f/p) with p clamped below at 1e-12.
"""
from __future__ import annotations

import numpy as np

P_CLAMP = 1e-12

_I2 = np.eye(2, dtype=complex)


def _softmax(z):
    e = np.exp(z - z.max())
    return e / e.sum()


def _sigmoid(z):
    return 1.0 / (1.0 + np.exp(-z))


def _binary(p1):
    """Stack (1-p1, p1) along a new leading outcome axis."""
    return np.stack([1.0 - p1, p1])


# ---------------------------------------------------------------------------
# forward maps


def behavior_ccc(theta, d):
    q = _softmax(theta[:d])
    a1 = _sigmoid(theta[d:3 * d].reshape(2, d))
    b1 = _sigmoid(theta[3 * d:5 * d].reshape(2, d))
    return np.einsum('l,axl,byl->xyab', q, _binary(a1), _binary(b1))


def behavior_csd0(theta, d):
    q = _softmax(theta[:d])
    xi1 = _sigmoid(theta[d:2 * d])
    a1 = _sigmoid(theta[2 * d:4 * d].reshape(2, d))
    b1 = _sigmoid(theta[4 * d:6 * d].reshape(2, d))
    u = q[None, :] * _binary(xi1)          # [x, lam]
    r = u / u.sum(axis=1, keepdims=True)   # posterior p(lam|x)
    return np.einsum('xl,axl,byl->xyab', r, _binary(a1), _binary(b1))


def behavior_cce0(theta, d):
    q = _softmax(theta[:d])
    a1 = _sigmoid(theta[d:3 * d].reshape(2, d))
    b1 = _sigmoid(theta[3 * d:7 * d].reshape(2, 2, d))
    return np.einsum('l,axl,bxyl->xyab', q, _binary(a1), _binary(b1))


def behavior_nscc(theta, vertices):
    w = _softmax(theta[:24])
    return np.einsum('v,vxyab->xyab', w, vertices)


def _expm_i_herm2(h):
    """exp(iH) for 2x2 Hermitian H via the Pauli split (closed form)."""
    c0 = (h[0, 0].real + h[1, 1].real) / 2.0
    vz = (h[0, 0].real - h[1, 1].real) / 2.0
    vx, vy = h[1, 0].real, h[1, 0].imag
    r = np.sqrt(vx * vx + vy * vy + vz * vz)
    phase = np.exp(1j * c0)
    if r < 1e-300:
        return phase * _I2
    sx, sy, sz = vx / r, vy / r, vz / r
    ns = np.array([[sz, sx - 1j * sy], [sx + 1j * sy, -sz]])
    return phase * (np.cos(r) * _I2 + 1j * np.sin(r) * ns)


def _effect_internals(block):
    """(E0, U, s) for one effect block (t1, t2, h00, h11, hre, him)."""
    t1, t2, h00, h11, hre, him = block
    u = _expm_i_herm2(np.array([[h00, hre - 1j * him], [hre + 1j * him, h11]]))
    s = _sigmoid(np.array([t1, t2]))
    e0 = (u * s[None, :]) @ u.conj().T
    return e0, u, s


def _qcc_internals(theta):
    g = (theta[:16] + 1j * theta[16:32]).reshape(4, 4)
    gg = g @ g.conj().T
    trg = np.trace(gg).real
    rho = gg / trg
    effs = [_effect_internals(theta[32 + 6 * k:38 + 6 * k]) for k in range(4)]
    ea = np.empty((2, 2, 2, 2), dtype=complex)  # [x, a, i, j]
    fb = np.empty((2, 2, 2, 2), dtype=complex)  # [y, b, i, j]
    for x in range(2):
        ea[x, 0] = effs[x][0]
        ea[x, 1] = _I2 - effs[x][0]
    for y in range(2):
        fb[y, 0] = effs[2 + y][0]
        fb[y, 1] = _I2 - effs[2 + y][0]
    return g, trg, rho, effs, ea, fb


def behavior_qcc(theta):
    _, _, rho, _, ea, fb = _qcc_internals(theta)
    rho4 = rho.reshape(2, 2, 2, 2)  # [i, j, k, l] = row (i,j), col (k,l)
    # p = Tr[rho (E tensor F)] = sum rho_{(ij),(kl)} E_{ki} F_{lj}
    p = np.einsum('ijkl,xaki,yblj->xyab', rho4, ea, fb).real
    return np.clip(p, 0.0, 1.0)


def behavior(model_class, theta, d, vertices=None):
    theta = np.asarray(theta, dtype=float)
    if model_class == 'cCC':
        return behavior_ccc(theta, d)
    if model_class == 'cSD0':
        return behavior_csd0(theta, d)
    if model_class == 'cCE0':
        return behavior_cce0(theta, d)
    if model_class == 'qCC':
        return behavior_qcc(theta)
    if model_class == 'nsCC':
        return behavior_nscc(theta, vertices)
    raise ValueError(f"unknown model class {model_class!r}")


# ---------------------------------------------------------------------------
# loss and gradient


def loss_value(f, w, p):
    """Weighted conditional relative entropy of f from p (nats/trial)."""
    pc = np.maximum(p, P_CLAMP)
    with np.errstate(divide='ignore', invalid='ignore'):
        terms = np.where(f > 0.0, f * (np.log(np.maximum(f, P_CLAMP)) - np.log(pc)), 0.0)
    return float(np.einsum('xy,xyab->', w, terms))


def _loss_coeffs(f, w, p):
    """dL/dp cellwise; zero where the clamp is active or f is zero."""
    c = np.zeros_like(p)
    mask = (f > 0.0) & (p > P_CLAMP)
    c[mask] = -(w[:, :, None, None] * np.ones_like(f))[mask] * f[mask] / p[mask]
    return c


def _softmax_chain(q, gq):
    return q * (gq - float(q @ gq))


def loss_and_grad_ccc(theta, d, f, w):
    q = _softmax(theta[:d])
    a1 = _sigmoid(theta[d:3 * d].reshape(2, d))
    b1 = _sigmoid(theta[3 * d:5 * d].reshape(2, d))
    A, B = _binary(a1), _binary(b1)
    p = np.einsum('l,axl,byl->xyab', q, A, B)
    loss = loss_value(f, w, p)
    c = _loss_coeffs(f, w, p)
    gq = np.einsum('xyab,axl,byl->l', c, A, B)
    ga = np.einsum('xyab,l,byl->axl', c, q, B)
    gb = np.einsum('xyab,l,axl->byl', c, q, A)
    grad = np.concatenate([
        _softmax_chain(q, gq),
        ((ga[1] - ga[0]) * a1 * (1.0 - a1)).ravel(),
        ((gb[1] - gb[0]) * b1 * (1.0 - b1)).ravel(),
    ])
    return loss, grad


def loss_and_grad_csd0(theta, d, f, w):
    q = _softmax(theta[:d])
    xi1 = _sigmoid(theta[d:2 * d])
    a1 = _sigmoid(theta[2 * d:4 * d].reshape(2, d))
    b1 = _sigmoid(theta[4 * d:6 * d].reshape(2, d))
    A, B = _binary(a1), _binary(b1)
    xi = _binary(xi1)                       # [x, lam]
    u = q[None, :] * xi
    z = u.sum(axis=1, keepdims=True)
    r = u / z
    p = np.einsum('xl,axl,byl->xyab', r, A, B)
    loss = loss_value(f, w, p)
    c = _loss_coeffs(f, w, p)
    gr = np.einsum('xyab,axl,byl->xl', c, A, B)
    # through the posterior normalization r = u / sum(u)
    gu = (gr - np.einsum('xl,xl->x', r, gr)[:, None]) / z
    gq = np.einsum('xl,xl->l', xi, gu)
    gxi = q * xi1 * (1.0 - xi1) * (gu[1] - gu[0])
    ga = np.einsum('xyab,xl,byl->axl', c, r, B)
    gb = np.einsum('xyab,xl,axl->byl', c, r, A)
    grad = np.concatenate([
        _softmax_chain(q, gq),
        gxi,
        ((ga[1] - ga[0]) * a1 * (1.0 - a1)).ravel(),
        ((gb[1] - gb[0]) * b1 * (1.0 - b1)).ravel(),
    ])
    return loss, grad


def loss_and_grad_cce0(theta, d, f, w):
    q = _softmax(theta[:d])
    a1 = _sigmoid(theta[d:3 * d].reshape(2, d))
    b1 = _sigmoid(theta[3 * d:7 * d].reshape(2, 2, d))
    A, B = _binary(a1), _binary(b1)        # B: [b, x, y, lam]
    p = np.einsum('l,axl,bxyl->xyab', q, A, B)
    loss = loss_value(f, w, p)
    c = _loss_coeffs(f, w, p)
    gq = np.einsum('xyab,axl,bxyl->l', c, A, B)
    ga = np.einsum('xyab,l,bxyl->axl', c, q, B)
    gb = np.einsum('xyab,l,axl->bxyl', c, q, A)
    grad = np.concatenate([
        _softmax_chain(q, gq),
        ((ga[1] - ga[0]) * a1 * (1.0 - a1)).ravel(),
        ((gb[1] - gb[0]) * b1 * (1.0 - b1)).ravel(),
    ])
    return loss, grad


def loss_and_grad_nscc(theta, f, w, vertices):
    wts = _softmax(theta[:24])
    p = np.einsum('v,vxyab->xyab', wts, vertices)
    loss = loss_value(f, w, p)
    c = _loss_coeffs(f, w, p)
    gv = np.einsum('xyab,vxyab->v', c, vertices)
    return loss, _softmax_chain(wts, gv)


def _expi_frechet_coeffs(h):
    """Eigendecomposition of H and the divided-difference table for exp(i.)."""
    mu, v = np.linalg.eigh(h)
    e = np.exp(1j * mu)
    gamma = np.empty((2, 2), dtype=complex)
    for i in range(2):
        for j in range(2):
            dm = mu[i] - mu[j]
            if abs(dm) > 1e-12:
                gamma[i, j] = (e[i] - e[j]) / dm
            else:
                gamma[i, j] = 1j * np.exp(1j * 0.5 * (mu[i] + mu[j]))
    return mu, v, gamma


_DH_BASIS = [
    np.array([[1, 0], [0, 0]], dtype=complex),   # d/dh00
    np.array([[0, 0], [0, 1]], dtype=complex),   # d/dh11
    np.array([[0, 1], [1, 0]], dtype=complex),   # d/dhre
    np.array([[0, -1j], [1j, 0]], dtype=complex),  # d/dhim
]


def _effect_block_grad(block, u, s, rt):
    """Gradient of Re Tr[dE0 . rt] through one effect block."""
    g = np.empty(6)
    urtu = u.conj().T @ rt @ u
    g[0] = s[0] * (1.0 - s[0]) * urtu[0, 0].real
    g[1] = s[1] * (1.0 - s[1]) * urtu[1, 1].real
    h00, h11, hre, him = block[2], block[3], block[4], block[5]
    h = np.array([[h00, hre - 1j * him], [hre + 1j * him, h11]])
    _, v, gamma = _expi_frechet_coeffs(h)
    dsu = (u * s[None, :]) @ u.conj().T  # not needed; keep s-scaled left factor
    sut = np.diag(s).astype(complex) @ u.conj().T @ rt  # S = D U^dag Rt
    for k, dh in enumerate(_DH_BASIS):
        m = v.conj().T @ dh @ v
        du = v @ (gamma * m) @ v.conj().T
        g[2 + k] = 2.0 * np.trace(du @ sut).real
    return g


def loss_and_grad_qcc(theta, f, w):
    g, trg, rho, effs, ea, fb = _qcc_internals(theta)
    rho4 = rho.reshape(2, 2, 2, 2)
    p = np.einsum('ijkl,xaki,yblj->xyab', rho4, ea, fb).real
    loss = loss_value(f, w, p)
    c = _loss_coeffs(f, w, p)

    # state part: dL = Tr[drho K], rho = G/trG
    k4 = np.einsum('xyab,xaik,ybjl->ijkl', c, ea, fb).reshape(4, 4)
    kt = k4 - np.trace(rho @ k4).real * np.eye(4)
    gg = 2.0 * (kt @ g) / trg
    grad = np.empty(56)
    grad[:16] = gg.real.ravel()
    grad[16:32] = gg.imag.ravel()

    # effect parts via partial contractions against rho
    dc = c[:, :, 0, :] - c[:, :, 1, :]      # [x, y, b]: d/dE0 sign pattern
    for x in range(2):
        wmat = np.einsum('yb,ybjl->jl', dc[x], fb)
        r2 = np.einsum('pmij,jm->pi', rho4, wmat)
        rt = (r2 + r2.conj().T) / 2.0
        block = theta[32 + 6 * x:38 + 6 * x]
        grad[32 + 6 * x:38 + 6 * x] = _effect_block_grad(block, effs[x][1], effs[x][2], rt)
    dcb = c[:, :, :, 0] - c[:, :, :, 1]     # [x, y, a]
    for y in range(2):
        vmat = np.einsum('xa,xaik->ik', dcb[:, y, :], ea)
        r2 = np.einsum('mpij,im->pj', rho4, vmat)
        rt = (r2 + r2.conj().T) / 2.0
        k = 2 + y
        block = theta[32 + 6 * k:38 + 6 * k]
        grad[32 + 6 * k:38 + 6 * k] = _effect_block_grad(block, effs[k][1], effs[k][2], rt)
    return loss, grad


def loss_and_grad(model_class, theta, d, f, w, vertices=None):
    theta = np.asarray(theta, dtype=float)
    if model_class == 'cCC':
        return loss_and_grad_ccc(theta, d, f, w)
    if model_class == 'cSD0':
        return loss_and_grad_csd0(theta, d, f, w)
    if model_class == 'cCE0':
        return loss_and_grad_cce0(theta, d, f, w)
    if model_class == 'qCC':
        return loss_and_grad_qcc(theta, f, w)
    if model_class == 'nsCC':
        return loss_and_grad_nscc(theta, f, w, vertices)
    raise ValueError(f"unknown model class {model_class!r}")
