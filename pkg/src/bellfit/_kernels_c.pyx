# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Cython kernels: chart evaluations and loss gradients for the fitter.

Mirrors `bellfit._kernels_py` exactly (same charts, same clamping, same
gradient formulas); parity is enforced by tests/test_kernels.py.  All
arithmetic is on fixed-size stack arrays -- the problems are 2x2/4x4 and
at most a few dozen parameters, so no BLAS is involved.
"""
import numpy as np

cimport cython
from libc.math cimport exp, log, sqrt, cos, sin, fabs

DEF PCLAMP = 1e-12
DEF DMAX = 64          # max latent cardinality for the classical charts


cdef inline double _sig(double z) noexcept nogil:
    return 1.0 / (1.0 + exp(-z))


cdef void _softmax(const double* z, double* out, int n) noexcept nogil:
    cdef int i
    cdef double m = z[0], s = 0.0
    for i in range(1, n):
        if z[i] > m:
            m = z[i]
    for i in range(n):
        out[i] = exp(z[i] - m)
        s += out[i]
    for i in range(n):
        out[i] /= s


cdef double _loss_cells(const double* f, const double* w, const double* p,
                        double* c) noexcept nogil:
    """Loss over the 16 cells; fills c = dL/dp (0 where clamped or f=0)."""
    cdef int s, xy
    cdef double loss = 0.0, pc, fv, wv
    for s in range(16):
        xy = s >> 2
        wv = w[xy]
        fv = f[s]
        c[s] = 0.0
        if fv > 0.0:
            pc = p[s] if p[s] > PCLAMP else PCLAMP
            loss += wv * fv * (log(fv if fv > PCLAMP else PCLAMP) - log(pc))
            if p[s] > PCLAMP:
                c[s] = -wv * fv / p[s]
    return loss


# ---------------------------------------------------------------------------
# classical charts


cdef void _ccc_forward(const double* th, int d, double* q,
                       double* a1, double* b1, double* p) noexcept nogil:
    cdef int l, x, y, a, b, s
    cdef double acc, av, bv
    _softmax(th, q, d)
    for x in range(2):
        for l in range(d):
            a1[x * d + l] = _sig(th[d + x * d + l])
            b1[x * d + l] = _sig(th[3 * d + x * d + l])
    for x in range(2):
        for y in range(2):
            for a in range(2):
                for b in range(2):
                    acc = 0.0
                    for l in range(d):
                        av = a1[x * d + l] if a == 1 else 1.0 - a1[x * d + l]
                        bv = b1[y * d + l] if b == 1 else 1.0 - b1[y * d + l]
                        acc += q[l] * av * bv
                    p[x * 8 + y * 4 + a * 2 + b] = acc


cdef double _ccc_lg(const double* th, int d, const double* f, const double* w,
                    double* grad) noexcept nogil:
    cdef double q[DMAX]
    cdef double a1[2 * DMAX]
    cdef double b1[2 * DMAX]
    cdef double p[16]
    cdef double c[16]
    cdef double gq[DMAX]
    cdef double ga[2 * DMAX]
    cdef double gb[2 * DMAX]
    cdef int l, x, y, a, b, s
    cdef double loss, cv, av, bv, dav, dbv, dot
    _ccc_forward(th, d, q, a1, b1, p)
    loss = _loss_cells(f, w, p, c)
    for l in range(d):
        gq[l] = 0.0
    for l in range(2 * d):
        ga[l] = 0.0
        gb[l] = 0.0
    for x in range(2):
        for y in range(2):
            for a in range(2):
                for b in range(2):
                    cv = c[x * 8 + y * 4 + a * 2 + b]
                    if cv == 0.0:
                        continue
                    for l in range(d):
                        av = a1[x * d + l] if a == 1 else 1.0 - a1[x * d + l]
                        bv = b1[y * d + l] if b == 1 else 1.0 - b1[y * d + l]
                        dav = 1.0 if a == 1 else -1.0
                        dbv = 1.0 if b == 1 else -1.0
                        gq[l] += cv * av * bv
                        ga[x * d + l] += cv * dav * q[l] * bv
                        gb[y * d + l] += cv * dbv * q[l] * av
    dot = 0.0
    for l in range(d):
        dot += q[l] * gq[l]
    for l in range(d):
        grad[l] = q[l] * (gq[l] - dot)
    for l in range(2 * d):
        grad[d + l] = ga[l] * a1[l] * (1.0 - a1[l])
        grad[3 * d + l] = gb[l] * b1[l] * (1.0 - b1[l])
    return loss


cdef void _csd0_forward(const double* th, int d, double* q, double* xi1,
                        double* a1, double* b1, double* r, double* z,
                        double* p) noexcept nogil:
    cdef int l, x, y, a, b
    cdef double acc, av, bv, xv
    _softmax(th, q, d)
    for l in range(d):
        xi1[l] = _sig(th[d + l])
    for x in range(2):
        for l in range(d):
            a1[x * d + l] = _sig(th[2 * d + x * d + l])
            b1[x * d + l] = _sig(th[4 * d + x * d + l])
    for x in range(2):
        z[x] = 0.0
        for l in range(d):
            xv = xi1[l] if x == 1 else 1.0 - xi1[l]
            r[x * d + l] = q[l] * xv
            z[x] += r[x * d + l]
        for l in range(d):
            r[x * d + l] /= z[x]
    for x in range(2):
        for y in range(2):
            for a in range(2):
                for b in range(2):
                    acc = 0.0
                    for l in range(d):
                        av = a1[x * d + l] if a == 1 else 1.0 - a1[x * d + l]
                        bv = b1[y * d + l] if b == 1 else 1.0 - b1[y * d + l]
                        acc += r[x * d + l] * av * bv
                    p[x * 8 + y * 4 + a * 2 + b] = acc


cdef double _csd0_lg(const double* th, int d, const double* f, const double* w,
                     double* grad) noexcept nogil:
    cdef double q[DMAX]
    cdef double xi1[DMAX]
    cdef double a1[2 * DMAX]
    cdef double b1[2 * DMAX]
    cdef double r[2 * DMAX]
    cdef double z[2]
    cdef double p[16]
    cdef double c[16]
    cdef double gr[2 * DMAX]
    cdef double gu[2 * DMAX]
    cdef double gq[DMAX]
    cdef double ga[2 * DMAX]
    cdef double gb[2 * DMAX]
    cdef int l, x, y, a, b
    cdef double loss, cv, av, bv, dav, dbv, dot, rg
    _csd0_forward(th, d, q, xi1, a1, b1, r, z, p)
    loss = _loss_cells(f, w, p, c)
    for l in range(2 * d):
        gr[l] = 0.0
        ga[l] = 0.0
        gb[l] = 0.0
    for x in range(2):
        for y in range(2):
            for a in range(2):
                for b in range(2):
                    cv = c[x * 8 + y * 4 + a * 2 + b]
                    if cv == 0.0:
                        continue
                    for l in range(d):
                        av = a1[x * d + l] if a == 1 else 1.0 - a1[x * d + l]
                        bv = b1[y * d + l] if b == 1 else 1.0 - b1[y * d + l]
                        dav = 1.0 if a == 1 else -1.0
                        dbv = 1.0 if b == 1 else -1.0
                        gr[x * d + l] += cv * av * bv
                        ga[x * d + l] += cv * dav * r[x * d + l] * bv
                        gb[y * d + l] += cv * dbv * r[x * d + l] * av
    for x in range(2):
        rg = 0.0
        for l in range(d):
            rg += r[x * d + l] * gr[x * d + l]
        for l in range(d):
            gu[x * d + l] = (gr[x * d + l] - rg) / z[x]
    for l in range(d):
        gq[l] = (1.0 - xi1[l]) * gu[l] + xi1[l] * gu[d + l]
    dot = 0.0
    for l in range(d):
        dot += q[l] * gq[l]
    for l in range(d):
        grad[l] = q[l] * (gq[l] - dot)
        grad[d + l] = q[l] * xi1[l] * (1.0 - xi1[l]) * (gu[d + l] - gu[l])
    for l in range(2 * d):
        grad[2 * d + l] = ga[l] * a1[l] * (1.0 - a1[l])
        grad[4 * d + l] = gb[l] * b1[l] * (1.0 - b1[l])
    return loss


cdef void _cce0_forward(const double* th, int d, double* q, double* a1,
                        double* b1, double* p) noexcept nogil:
    cdef int l, x, y, a, b
    cdef double acc, av, bv
    _softmax(th, q, d)
    for x in range(2):
        for l in range(d):
            a1[x * d + l] = _sig(th[d + x * d + l])
    for x in range(2):
        for y in range(2):
            for l in range(d):
                b1[(x * 2 + y) * d + l] = _sig(th[3 * d + (x * 2 + y) * d + l])
    for x in range(2):
        for y in range(2):
            for a in range(2):
                for b in range(2):
                    acc = 0.0
                    for l in range(d):
                        av = a1[x * d + l] if a == 1 else 1.0 - a1[x * d + l]
                        bv = b1[(x * 2 + y) * d + l] if b == 1 else 1.0 - b1[(x * 2 + y) * d + l]
                        acc += q[l] * av * bv
                    p[x * 8 + y * 4 + a * 2 + b] = acc


cdef double _cce0_lg(const double* th, int d, const double* f, const double* w,
                     double* grad) noexcept nogil:
    cdef double q[DMAX]
    cdef double a1[2 * DMAX]
    cdef double b1[4 * DMAX]
    cdef double p[16]
    cdef double c[16]
    cdef double gq[DMAX]
    cdef double ga[2 * DMAX]
    cdef double gb[4 * DMAX]
    cdef int l, x, y, a, b
    cdef double loss, cv, av, bv, dav, dbv, dot
    _cce0_forward(th, d, q, a1, b1, p)
    loss = _loss_cells(f, w, p, c)
    for l in range(d):
        gq[l] = 0.0
    for l in range(2 * d):
        ga[l] = 0.0
    for l in range(4 * d):
        gb[l] = 0.0
    for x in range(2):
        for y in range(2):
            for a in range(2):
                for b in range(2):
                    cv = c[x * 8 + y * 4 + a * 2 + b]
                    if cv == 0.0:
                        continue
                    for l in range(d):
                        av = a1[x * d + l] if a == 1 else 1.0 - a1[x * d + l]
                        bv = b1[(x * 2 + y) * d + l] if b == 1 else 1.0 - b1[(x * 2 + y) * d + l]
                        dav = 1.0 if a == 1 else -1.0
                        dbv = 1.0 if b == 1 else -1.0
                        gq[l] += cv * av * bv
                        ga[x * d + l] += cv * dav * q[l] * bv
                        gb[(x * 2 + y) * d + l] += cv * dbv * q[l] * av
    dot = 0.0
    for l in range(d):
        dot += q[l] * gq[l]
    for l in range(d):
        grad[l] = q[l] * (gq[l] - dot)
    for l in range(2 * d):
        grad[d + l] = ga[l] * a1[l] * (1.0 - a1[l])
    for l in range(4 * d):
        grad[3 * d + l] = gb[l] * b1[l] * (1.0 - b1[l])
    return loss


cdef double _nscc_lg(const double* th, const double* verts, const double* f,
                     const double* w, double* p, double* grad,
                     bint want_grad) noexcept nogil:
    cdef double wt[24]
    cdef double c[16]
    cdef double gv[24]
    cdef int v, s
    cdef double loss, dot
    _softmax(th, wt, 24)
    for s in range(16):
        p[s] = 0.0
    for v in range(24):
        for s in range(16):
            p[s] += wt[v] * verts[v * 16 + s]
    if not want_grad:
        return 0.0
    loss = _loss_cells(f, w, p, c)
    dot = 0.0
    for v in range(24):
        gv[v] = 0.0
        for s in range(16):
            gv[v] += c[s] * verts[v * 16 + s]
        dot += wt[v] * gv[v]
    for v in range(24):
        grad[v] = wt[v] * (gv[v] - dot)
    return loss


# ---------------------------------------------------------------------------
# quantum chart


cdef void _expi2(double h00, double h11, double hre, double him,
                 double complex* u) noexcept nogil:
    """u = exp(i H) row-major for H = [[h00, hre-i him], [hre+i him, h11]]."""
    cdef double c0 = 0.5 * (h00 + h11)
    cdef double vz = 0.5 * (h00 - h11)
    cdef double r = sqrt(hre * hre + him * him + vz * vz)
    cdef double complex phase = cos(c0) + 1j * sin(c0)
    cdef double cr, sr
    if r < 1e-300:
        u[0] = phase; u[1] = 0; u[2] = 0; u[3] = phase
        return
    cr = cos(r)
    sr = sin(r) / r
    u[0] = phase * (cr + 1j * sr * vz)
    u[1] = phase * (1j * sr * (hre - 1j * him))
    u[2] = phase * (1j * sr * (hre + 1j * him))
    u[3] = phase * (cr - 1j * sr * vz)


cdef void _eig2herm(double h00, double h11, double hre, double him,
                    double* mu, double complex* v) noexcept nogil:
    """Ascending eigenvalues and orthonormal eigenvector columns (row-major v)."""
    cdef double c0 = 0.5 * (h00 + h11)
    cdef double vz = 0.5 * (h00 - h11)
    cdef double r = sqrt(hre * hre + him * him + vz * vz)
    cdef double complex up0, up1
    cdef double nrm
    mu[0] = c0 - r
    mu[1] = c0 + r
    if r < 1e-300:
        v[0] = 1; v[1] = 0; v[2] = 0; v[3] = 1
        return
    if vz >= 0.0:
        up0 = vz + r
        up1 = hre + 1j * him
        nrm = sqrt(2.0 * r * (r + vz))
    else:
        up0 = hre - 1j * him
        up1 = r - vz
        nrm = sqrt(2.0 * r * (r - vz))
    up0 /= nrm
    up1 /= nrm
    # columns: [u_minus, u_plus] with u_minus the orthogonal complement
    v[0] = -up1.conjugate(); v[1] = up0
    v[2] = up0.conjugate();  v[3] = up1


cdef void _effect_grad_block(const double* blk, const double complex* u,
                             const double* sg, const double complex* rt,
                             double* gout) noexcept nogil:
    """Gradient of Re Tr[dE0 rt] through one 6-parameter effect block."""
    cdef double mu[2]
    cdef double complex v[4]
    cdef double complex gamma[4]
    cdef double complex m[4]
    cdef double complex gm[4]
    cdef double complex du[4]
    cdef double complex sut[4]
    cdef double complex urtu00, urtu11, acc, e0, e1
    cdef double dm
    cdef int i, j, k, p, q, dirn
    # t1, t2 entries: s_k (1-s_k) Re[(U^dag rt U)_kk]
    urtu00 = 0; urtu11 = 0
    for i in range(2):
        for j in range(2):
            urtu00 += u[i * 2].conjugate() * rt[i * 2 + j] * u[j * 2]
            urtu11 += u[i * 2 + 1].conjugate() * rt[i * 2 + j] * u[j * 2 + 1]
    gout[0] = sg[0] * (1.0 - sg[0]) * urtu00.real
    gout[1] = sg[1] * (1.0 - sg[1]) * urtu11.real
    _eig2herm(blk[2], blk[3], blk[4], blk[5], mu, v)
    e0 = cos(mu[0]) + 1j * sin(mu[0])
    e1 = cos(mu[1]) + 1j * sin(mu[1])
    dm = mu[0] - mu[1]
    gamma[0] = 1j * e0
    gamma[3] = 1j * e1
    if fabs(dm) > 1e-12:
        gamma[1] = (e0 - e1) / dm
        gamma[2] = (e1 - e0) / (-dm)
    else:
        acc = cos(0.5 * (mu[0] + mu[1])) + 1j * sin(0.5 * (mu[0] + mu[1]))
        gamma[1] = 1j * acc
        gamma[2] = 1j * acc
    # sut = diag(s) U^dag rt
    for p in range(2):
        for q in range(2):
            acc = 0
            for k in range(2):
                acc += u[k * 2 + p].conjugate() * rt[k * 2 + q]
            sut[p * 2 + q] = sg[p] * acc
    for dirn in range(4):
        # m = V^dag dH V for the basis direction
        if dirn == 0:      # diag(1,0)
            for p in range(2):
                for q in range(2):
                    m[p * 2 + q] = v[p].conjugate() * v[q]
        elif dirn == 1:    # diag(0,1)
            for p in range(2):
                for q in range(2):
                    m[p * 2 + q] = v[2 + p].conjugate() * v[2 + q]
        elif dirn == 2:    # sigma_x
            for p in range(2):
                for q in range(2):
                    m[p * 2 + q] = v[p].conjugate() * v[2 + q] + v[2 + p].conjugate() * v[q]
        else:              # sigma_y
            for p in range(2):
                for q in range(2):
                    m[p * 2 + q] = (-1j) * v[p].conjugate() * v[2 + q] + 1j * v[2 + p].conjugate() * v[q]
        for p in range(2):
            for q in range(2):
                gm[p * 2 + q] = gamma[p * 2 + q] * m[p * 2 + q]
        # du = V gm V^dag
        for p in range(2):
            for q in range(2):
                acc = 0
                for i in range(2):
                    for j in range(2):
                        acc += v[p * 2 + i] * gm[i * 2 + j] * v[q * 2 + j].conjugate()
                du[p * 2 + q] = acc
        acc = 0
        for p in range(2):
            for q in range(2):
                acc += du[p * 2 + q] * sut[q * 2 + p]
        gout[2 + dirn] = 2.0 * acc.real


cdef double _qcc_lg(const double* th, const double* f, const double* w,
                    double* p, double* grad, bint want_grad) noexcept nogil:
    cdef double complex g[16]
    cdef double complex gg[16]
    cdef double complex rho[16]
    cdef double complex u[4][4]
    cdef double complex e0[4][4]
    cdef double complex ea[2][2][4]     # [x][a][2x2]
    cdef double complex fb[2][2][4]
    cdef double complex kk[16]
    cdef double complex kt[16]
    cdef double complex ggr[16]
    cdef double complex wm[4]
    cdef double complex r2[4]
    cdef double complex rt[4]
    cdef double sg[4][2]
    cdef double c[16]
    cdef double dc[2][2][2]
    cdef double p_loc[16]
    cdef int i, j, k, l, x, y, a, b, s, kb, m
    cdef double trg, loss, tk, cv
    cdef double complex acc
    for i in range(4):
        for j in range(4):
            g[i * 4 + j] = th[i * 4 + j] + 1j * th[16 + i * 4 + j]
    trg = 0.0
    for i in range(4):
        for j in range(4):
            acc = 0
            for k in range(4):
                acc += g[i * 4 + k] * g[j * 4 + k].conjugate()
            gg[i * 4 + j] = acc
        trg += gg[i * 4 + i].real
    for i in range(16):
        rho[i] = gg[i] / trg
    for kb in range(4):
        sg[kb][0] = _sig(th[32 + 6 * kb])
        sg[kb][1] = _sig(th[33 + 6 * kb])
        _expi2(th[34 + 6 * kb], th[35 + 6 * kb], th[36 + 6 * kb], th[37 + 6 * kb], u[kb])
        for i in range(2):
            for j in range(2):
                e0[kb][i * 2 + j] = (sg[kb][0] * u[kb][i * 2] * u[kb][j * 2].conjugate()
                                     + sg[kb][1] * u[kb][i * 2 + 1] * u[kb][j * 2 + 1].conjugate())
    for x in range(2):
        for i in range(4):
            ea[x][0][i] = e0[x][i]
            ea[x][1][i] = -e0[x][i]
        ea[x][1][0] += 1.0
        ea[x][1][3] += 1.0
    for y in range(2):
        for i in range(4):
            fb[y][0][i] = e0[2 + y][i]
            fb[y][1][i] = -e0[2 + y][i]
        fb[y][1][0] += 1.0
        fb[y][1][3] += 1.0
    # p(a,b|x,y) = sum rho_{(ij),(kl)} E_{ki} F_{lj}
    for x in range(2):
        for y in range(2):
            for a in range(2):
                for b in range(2):
                    acc = 0
                    for i in range(2):
                        for j in range(2):
                            for k in range(2):
                                for l in range(2):
                                    acc += (rho[(i * 2 + j) * 4 + (k * 2 + l)]
                                            * ea[x][a][k * 2 + i] * fb[y][b][l * 2 + j])
                    cv = acc.real
                    if cv < 0.0:
                        cv = 0.0
                    elif cv > 1.0:
                        cv = 1.0
                    p_loc[x * 8 + y * 4 + a * 2 + b] = cv
    for s in range(16):
        p[s] = p_loc[s]
    if not want_grad:
        return 0.0
    loss = _loss_cells(f, w, p_loc, c)
    # state part: K_{(ij),(kl)} = sum c E_{ik} F_{jl}
    for i in range(16):
        kk[i] = 0
    for x in range(2):
        for y in range(2):
            for a in range(2):
                for b in range(2):
                    cv = c[x * 8 + y * 4 + a * 2 + b]
                    if cv == 0.0:
                        continue
                    for i in range(2):
                        for j in range(2):
                            for k in range(2):
                                for l in range(2):
                                    kk[(i * 2 + j) * 4 + (k * 2 + l)] += (
                                        cv * ea[x][a][i * 2 + k] * fb[y][b][j * 2 + l])
    tk = 0.0
    for i in range(4):
        for j in range(4):
            tk += (rho[i * 4 + j] * kk[j * 4 + i]).real
    for i in range(16):
        kt[i] = kk[i]
    for i in range(4):
        kt[i * 4 + i] -= tk
    for i in range(4):
        for j in range(4):
            acc = 0
            for k in range(4):
                acc += kt[i * 4 + k] * g[k * 4 + j]
            ggr[i * 4 + j] = 2.0 * acc / trg
    for i in range(16):
        grad[i] = ggr[i].real
        grad[16 + i] = ggr[i].imag
    # effect parts
    for x in range(2):
        for y in range(2):
            for b in range(2):
                dc[x][y][b] = c[x * 8 + y * 4 + b] - c[x * 8 + y * 4 + 2 + b]
    for x in range(2):
        for i in range(4):
            wm[i] = 0
        for y in range(2):
            for b in range(2):
                for i in range(4):
                    wm[i] += dc[x][y][b] * fb[y][b][i]
        # r2[p,i] = sum_{m,j} rho_{(p m),(i j)} wm_{j m}
        for k in range(2):
            for i in range(2):
                acc = 0
                for m in range(2):
                    for j in range(2):
                        acc += rho[(k * 2 + m) * 4 + (i * 2 + j)] * wm[j * 2 + m]
                r2[k * 2 + i] = acc
        rt[0] = r2[0].real
        rt[3] = r2[3].real
        rt[1] = 0.5 * (r2[1] + r2[2].conjugate())
        rt[2] = rt[1].conjugate()
        _effect_grad_block(&th[32 + 6 * x], u[x], sg[x], rt, &grad[32 + 6 * x])
    for y in range(2):
        for x in range(2):
            for a in range(2):
                dc[y][x][a] = c[x * 8 + y * 4 + a * 2] - c[x * 8 + y * 4 + a * 2 + 1]
    for y in range(2):
        for i in range(4):
            wm[i] = 0
        for x in range(2):
            for a in range(2):
                for i in range(4):
                    wm[i] += dc[y][x][a] * ea[x][a][i]
        # r2[p,j] = sum_{m,i} rho_{(m p),(i j)} wm_{i m}
        for k in range(2):
            for j in range(2):
                acc = 0
                for m in range(2):
                    for i in range(2):
                        acc += rho[(m * 2 + k) * 4 + (i * 2 + j)] * wm[i * 2 + m]
                r2[k * 2 + j] = acc
        rt[0] = r2[0].real
        rt[3] = r2[3].real
        rt[1] = 0.5 * (r2[1] + r2[2].conjugate())
        rt[2] = rt[1].conjugate()
        _effect_grad_block(&th[32 + 6 * (2 + y)], u[2 + y], sg[2 + y], rt,
                           &grad[32 + 6 * (2 + y)])
    return loss


# ---------------------------------------------------------------------------
# python-visible API (matches _kernels_py)


def behavior(model_class, theta, d, vertices=None):
    cdef double[::1] th = np.ascontiguousarray(theta, dtype=np.float64)
    out = np.empty(16)
    cdef double[::1] pv = out
    cdef double q[DMAX]
    cdef double xi1[DMAX]
    cdef double a1[2 * DMAX]
    cdef double b1[4 * DMAX]
    cdef double r[2 * DMAX]
    cdef double z[2]
    cdef double dummy[64]
    cdef double[::1] vv
    cdef int dd = d if d is not None else 4
    if dd > DMAX:
        raise ValueError(f"latent cardinality {dd} exceeds compiled limit {DMAX}")
    if model_class == 'cCC':
        _ccc_forward(&th[0], dd, q, a1, b1, &pv[0])
    elif model_class == 'cSD0':
        _csd0_forward(&th[0], dd, q, xi1, a1, b1, r, z, &pv[0])
    elif model_class == 'cCE0':
        _cce0_forward(&th[0], dd, q, a1, b1, &pv[0])
    elif model_class == 'qCC':
        _qcc_lg(&th[0], NULL, NULL, &pv[0], NULL, False)
    elif model_class == 'nsCC':
        vv = np.ascontiguousarray(np.asarray(vertices).reshape(-1), dtype=np.float64)
        _nscc_lg(&th[0], &vv[0], NULL, NULL, &pv[0], dummy, False)
    else:
        raise ValueError(f"unknown model class {model_class!r}")
    return out.reshape(2, 2, 2, 2)


def loss_and_grad(model_class, theta, d, f, w, vertices=None):
    cdef double[::1] th = np.ascontiguousarray(theta, dtype=np.float64)
    cdef double[::1] fv = np.ascontiguousarray(np.asarray(f).reshape(-1), dtype=np.float64)
    cdef double[::1] wv = np.ascontiguousarray(np.asarray(w).reshape(-1), dtype=np.float64)
    grad = np.empty(th.shape[0])
    cdef double[::1] gv = grad
    cdef double p[16]
    cdef double loss
    cdef double[::1] vv
    cdef int dd = d if d is not None else 4
    if dd > DMAX:
        raise ValueError(f"latent cardinality {dd} exceeds compiled limit {DMAX}")
    if model_class == 'cCC':
        loss = _ccc_lg(&th[0], dd, &fv[0], &wv[0], &gv[0])
    elif model_class == 'cSD0':
        loss = _csd0_lg(&th[0], dd, &fv[0], &wv[0], &gv[0])
    elif model_class == 'cCE0':
        loss = _cce0_lg(&th[0], dd, &fv[0], &wv[0], &gv[0])
    elif model_class == 'qCC':
        loss = _qcc_lg(&th[0], &fv[0], &wv[0], p, &gv[0], True)
    elif model_class == 'nsCC':
        vv = np.ascontiguousarray(np.asarray(vertices).reshape(-1), dtype=np.float64)
        loss = _nscc_lg(&th[0], &vv[0], &fv[0], &wv[0], p, &gv[0], True)
    else:
        raise ValueError(f"unknown model class {model_class!r}")
    return loss, grad
