# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled kernel backend: small dense matrix exponential (Pade scaling
and squaring), affine propagation through the augmented flow, and an
explicit Dormand-Prince 5(4) integrator with dense output.

API-compatible with the pure NumPy backend in ``pyref``.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, frexp, sqrt
from libc.string cimport memcpy, memset

cnp.import_array()

BACKEND_NAME = "cython"

DEF NMAX = 8

cdef double _EPS = 2.220446049250313e-16

# ---------------------------------------------------------------------------
# dense helpers on row-major n x n buffers
# ---------------------------------------------------------------------------

cdef inline void mat_zero(int n, double* a) noexcept nogil:
    memset(a, 0, n * n * sizeof(double))


cdef void mat_mul(int n, double* a, double* b, double* out) noexcept nogil:
    cdef int i, j, k
    cdef double s
    for i in range(n):
        for j in range(n):
            s = 0.0
            for k in range(n):
                s += a[i * n + k] * b[k * n + j]
            out[i * n + j] = s


cdef void mat_vec(int n, double* a, double* x, double* out) noexcept nogil:
    cdef int i, k
    cdef double s
    for i in range(n):
        s = 0.0
        for k in range(n):
            s += a[i * n + k] * x[k]
        out[i] = s


cdef double mat_norm1(int n, double* a) noexcept nogil:
    cdef int i, j
    cdef double s, best = 0.0
    for j in range(n):
        s = 0.0
        for i in range(n):
            s += fabs(a[i * n + j])
        if s > best:
            best = s
    return best


cdef int mat_solve(int n, double* q, double* p) noexcept nogil:
    """Solve Q X = P in place (X overwrites P); Q is destroyed.
    Gaussian elimination with partial pivoting. Returns -1 if singular."""
    cdef int i, j, k, piv
    cdef double best, factor, tmp
    for k in range(n):
        piv = k
        best = fabs(q[k * n + k])
        for i in range(k + 1, n):
            if fabs(q[i * n + k]) > best:
                best = fabs(q[i * n + k])
                piv = i
        if best == 0.0:
            return -1
        if piv != k:
            for j in range(n):
                tmp = q[k * n + j]; q[k * n + j] = q[piv * n + j]; q[piv * n + j] = tmp
                tmp = p[k * n + j]; p[k * n + j] = p[piv * n + j]; p[piv * n + j] = tmp
        for i in range(k + 1, n):
            factor = q[i * n + k] / q[k * n + k]
            if factor != 0.0:
                for j in range(k, n):
                    q[i * n + j] -= factor * q[k * n + j]
                for j in range(n):
                    p[i * n + j] -= factor * p[k * n + j]
    for k in range(n - 1, -1, -1):
        for j in range(n):
            tmp = p[k * n + j]
            for i in range(k + 1, n):
                tmp -= q[k * n + i] * p[i * n + j]
            p[k * n + j] = tmp / q[k * n + k]
    return 0


# Pade numerator coefficients, orders 3/5/7/9/13, and the Higham thetas.
cdef double _B3[4]
cdef double _B5[6]
cdef double _B7[8]
cdef double _B9[10]
cdef double _B13[14]
_B3[:] = [120., 60., 12., 1.]
_B5[:] = [30240., 15120., 3360., 420., 30., 1.]
_B7[:] = [17297280., 8648640., 1995840., 277200., 25200., 1512., 56., 1.]
_B9[:] = [17643225600., 8821612800., 2075673600., 302702400., 30270240.,
          2162160., 110880., 3960., 90., 1.]
_B13[:] = [64764752532480000., 32382376266240000., 7771770303897600.,
           1187353796428800., 129060195264000., 10559470521600.,
           670442572800., 33522128640., 1323241920., 40840800., 960960.,
           16380., 182., 1.]

cdef double _THETA3 = 1.495585217958292e-2
cdef double _THETA5 = 2.539398330063230e-1
cdef double _THETA7 = 9.504178996162932e-1
cdef double _THETA9 = 2.097847961257068e0
cdef double _THETA13 = 5.371920351148152e0


cdef int _expm_core(int n, double* a, double* out) noexcept nogil:
    """out = exp(a); a is preserved. Returns -1 on a singular Pade solve."""
    cdef double work_a[NMAX * NMAX]
    cdef double a2[NMAX * NMAX]
    cdef double a4[NMAX * NMAX]
    cdef double a6[NMAX * NMAX]
    cdef double u[NMAX * NMAX]
    cdef double v[NMAX * NMAX]
    cdef double w[NMAX * NMAX]
    cdef double q[NMAX * NMAX]
    cdef int i, j, s, m, kexp
    cdef double nrm, scale, mant
    cdef double* b

    memcpy(work_a, a, n * n * sizeof(double))
    nrm = mat_norm1(n, work_a)
    s = 0
    if nrm > _THETA13:
        mant = frexp(nrm / _THETA13, &s)
        if mant == 0.5:
            s -= 1
        if s < 0:
            s = 0
        scale = 1.0
        for i in range(s):
            scale *= 2.0
        for i in range(n * n):
            work_a[i] /= scale
        m = 13
    elif nrm <= _THETA3:
        m = 3
    elif nrm <= _THETA5:
        m = 5
    elif nrm <= _THETA7:
        m = 7
    elif nrm <= _THETA9:
        m = 9
    else:
        m = 13

    mat_mul(n, work_a, work_a, a2)
    if m == 3:
        b = _B3
    elif m == 5:
        b = _B5
    elif m == 7:
        b = _B7
    elif m == 9:
        b = _B9
    else:
        b = _B13
    if m >= 5:
        mat_mul(n, a2, a2, a4)
    if m >= 7:
        mat_mul(n, a2, a4, a6)

    if m == 13:
        # w = a6*(b13 a6 + b11 a4 + b9 a2) + b7 a6 + b5 a4 + b3 a2 + b1 I
        for i in range(n * n):
            u[i] = b[13] * a6[i] + b[11] * a4[i] + b[9] * a2[i]
        mat_mul(n, a6, u, w)
        for i in range(n * n):
            w[i] += b[7] * a6[i] + b[5] * a4[i] + b[3] * a2[i]
        for i in range(n):
            w[i * n + i] += b[1]
        mat_mul(n, work_a, w, u)
        # v = a6*(b12 a6 + b10 a4 + b8 a2) + b6 a6 + b4 a4 + b2 a2 + b0 I
        for i in range(n * n):
            w[i] = b[12] * a6[i] + b[10] * a4[i] + b[8] * a2[i]
        mat_mul(n, a6, w, v)
        for i in range(n * n):
            v[i] += b[6] * a6[i] + b[4] * a4[i] + b[2] * a2[i]
        for i in range(n):
            v[i * n + i] += b[0]
    else:
        # w = sum of odd coefficients, u = a*w ; v = even part
        mat_zero(n, w)
        mat_zero(n, v)
        for i in range(n):
            w[i * n + i] = b[1]
            v[i * n + i] = b[0]
        for i in range(n * n):
            w[i] += b[3] * a2[i]
            v[i] += b[2] * a2[i]
        if m >= 5:
            for i in range(n * n):
                w[i] += b[5] * a4[i]
                v[i] += b[4] * a4[i]
        if m >= 7:
            for i in range(n * n):
                w[i] += b[7] * a6[i]
                v[i] += b[6] * a6[i]
        if m == 9:
            mat_mul(n, a4, a4, q)  # a8
            for i in range(n * n):
                w[i] += b[9] * q[i]
                v[i] += b[8] * q[i]
        mat_mul(n, work_a, w, u)

    # solve (v - u) F = (v + u)
    for i in range(n * n):
        q[i] = v[i] - u[i]
        out[i] = v[i] + u[i]
    if mat_solve(n, q, out) != 0:
        return -1
    for kexp in range(s):
        memcpy(w, out, n * n * sizeof(double))
        mat_mul(n, w, w, out)
    return 0


def expm(a):
    """Matrix exponential of a small (n <= 8) dense real matrix."""
    cdef cnp.ndarray[double, ndim=2, mode="c"] am = np.ascontiguousarray(
        a, dtype=np.float64)
    cdef int n = am.shape[0]
    if am.shape[1] != n or n > NMAX:
        raise ValueError("expected a square matrix of size <= 8")
    out = np.empty((n, n), dtype=np.float64)
    cdef cnp.ndarray[double, ndim=2, mode="c"] om = out
    if _expm_core(n, <double*> am.data, <double*> om.data) != 0:
        raise ArithmeticError("Pade denominator is singular")
    return out


def propagate_affine(a, d, times, y0=None):
    """Exact sampling of rho' = A rho + d via the augmented 5x5 flow.

    Matches pyref.propagate_affine: no inversion of A, uniform grids reuse
    one per-step propagator.
    """
    cdef cnp.ndarray[double, ndim=2, mode="c"] am = np.ascontiguousarray(
        a, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1, mode="c"] dm = np.ascontiguousarray(
        d, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1, mode="c"] tm = np.ascontiguousarray(
        times, dtype=np.float64)
    if am.shape[0] != 4 or am.shape[1] != 4 or dm.shape[0] != 4:
        raise ValueError("expected a 4x4 matrix and a 4-vector")
    cdef int nt = tm.shape[0]
    out = np.empty((nt, 4), dtype=np.float64)
    cdef cnp.ndarray[double, ndim=2, mode="c"] om = out

    cdef double maug[25]
    cdef double estep[25]
    cdef double efirst[25]
    cdef double y[5]
    cdef double ynext[5]
    cdef int i, j, uniform
    cdef double dt, dt0, prev, span

    mat_zero(5, maug)
    for i in range(4):
        for j in range(4):
            maug[i * 5 + j] = am[i, j]
        maug[i * 5 + 4] = dm[i]
    for i in range(4):
        y[i] = 0.0
    if y0 is not None:
        y0a = np.ascontiguousarray(y0, dtype=np.float64)
        if y0a.shape[0] != 4:
            raise ValueError("initial state must have 4 components")
        for i in range(4):
            y[i] = y0a[i]
    y[4] = 1.0

    # uniform-grid detection (after the first interval)
    uniform = 0
    if nt > 2:
        dt0 = tm[1] - tm[0]
        span = dt0 if dt0 > 1e-300 else 1e-300
        uniform = 1
        for i in range(2, nt):
            dt = tm[i] - tm[i - 1]
            if fabs(dt - dt0) > 1e-12 * span:
                uniform = 0
                break

    if uniform:
        for i in range(25):
            estep[i] = maug[i] * dt0
        if _expm_core(5, estep, efirst) != 0:
            raise ArithmeticError("Pade denominator is singular")
        memcpy(estep, efirst, 25 * sizeof(double))
        for i in range(25):
            efirst[i] = maug[i] * tm[0]
        if _expm_core(5, efirst, maug) != 0:
            raise ArithmeticError("Pade denominator is singular")
        mat_vec(5, maug, y, ynext)
        memcpy(y, ynext, 5 * sizeof(double))
        for j in range(4):
            om[0, j] = y[j]
        for i in range(1, nt):
            mat_vec(5, estep, y, ynext)
            memcpy(y, ynext, 5 * sizeof(double))
            for j in range(4):
                om[i, j] = y[j]
        return out

    prev = 0.0
    for i in range(nt):
        dt = tm[i] - prev
        prev = tm[i]
        if dt != 0.0:
            for j in range(25):
                estep[j] = maug[j] * dt
            if _expm_core(5, estep, efirst) != 0:
                raise ArithmeticError("Pade denominator is singular")
            mat_vec(5, efirst, y, ynext)
            memcpy(y, ynext, 5 * sizeof(double))
        for j in range(4):
            om[i, j] = y[j]
    return out


# Dormand-Prince 5(4) coefficients
cdef double _C2 = 1.0 / 5.0, _C3 = 3.0 / 10.0, _C4 = 4.0 / 5.0, _C5 = 8.0 / 9.0
cdef double _A21 = 1.0 / 5.0
cdef double _A31 = 3.0 / 40.0, _A32 = 9.0 / 40.0
cdef double _A41 = 44.0 / 45.0, _A42 = -56.0 / 15.0, _A43 = 32.0 / 9.0
cdef double _A51 = 19372.0 / 6561.0, _A52 = -25360.0 / 2187.0
cdef double _A53 = 64448.0 / 6561.0, _A54 = -212.0 / 729.0
cdef double _A61 = 9017.0 / 3168.0, _A62 = -355.0 / 33.0
cdef double _A63 = 46732.0 / 5247.0, _A64 = 49.0 / 176.0, _A65 = -5103.0 / 18656.0
cdef double _B1 = 35.0 / 384.0, _B3c = 500.0 / 1113.0, _B4 = 125.0 / 192.0
cdef double _B5c = -2187.0 / 6784.0, _B6 = 11.0 / 84.0
cdef double _E1 = 71.0 / 57600.0, _E3 = -71.0 / 16695.0, _E4 = 71.0 / 1920.0
cdef double _E5 = -17253.0 / 339200.0, _E6 = 22.0 / 525.0, _E7 = -1.0 / 40.0
cdef double _D1 = -12715105075.0 / 11282082432.0
cdef double _D3 = 87487479700.0 / 32700410799.0
cdef double _D4 = -10690763975.0 / 1880347072.0
cdef double _D5 = 701980252875.0 / 199316789632.0
cdef double _D6 = -1453857185.0 / 822651844.0
cdef double _D7 = 69997945.0 / 29380423.0


cdef inline void _rhs(double* a, double* d, double* y, double* out) noexcept nogil:
    cdef int i, k
    cdef double s
    for i in range(4):
        s = d[i]
        for k in range(4):
            s += a[i * 4 + k] * y[k]
        out[i] = s


def rk45_affine(a, d, times, double tol, y0=None):
    """Adaptive Dormand-Prince integration of rho' = A rho + d.

    Matches pyref.rk45_affine: absolute RMS local error <= tol per step,
    dense output at the requested sample times. Returns
    (states, accepted steps, rejected steps).
    """
    cdef cnp.ndarray[double, ndim=2, mode="c"] am = np.ascontiguousarray(
        a, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1, mode="c"] dm = np.ascontiguousarray(
        d, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1, mode="c"] tm = np.ascontiguousarray(
        times, dtype=np.float64)
    if am.shape[0] != 4 or am.shape[1] != 4 or dm.shape[0] != 4:
        raise ValueError("expected a 4x4 matrix and a 4-vector")
    cdef int nt = tm.shape[0]
    out = np.empty((nt, 4), dtype=np.float64)
    cdef cnp.ndarray[double, ndim=2, mode="c"] om = out

    cdef double* ap = <double*> am.data
    cdef double* dp = <double*> dm.data
    cdef double y[4]
    cdef double ywork[4]
    cdef double ynew[4]
    cdef double k1[4]
    cdef double k2[4]
    cdef double k3[4]
    cdef double k4[4]
    cdef double k5[4]
    cdef double k6[4]
    cdef double k7[4]
    cdef double ydiff[4]
    cdef double bspl[4]
    cdef double cont4[4]
    cdef double cont5[4]
    cdef int i, idx, n_acc, n_rej
    cdef double t, t_end, h, err, err_norm, factor, theta, theta1, t_new

    for i in range(4):
        y[i] = 0.0
    if y0 is not None:
        y0a = np.ascontiguousarray(y0, dtype=np.float64)
        if y0a.shape[0] != 4:
            raise ValueError("initial state must have 4 components")
        for i in range(4):
            y[i] = y0a[i]

    t_end = tm[nt - 1]
    idx = 0
    while idx < nt and tm[idx] <= 0.0:
        for i in range(4):
            om[idx, i] = y[i]
        idx += 1
    if idx == nt:
        return out, 0, 0

    t = 0.0
    _rhs(ap, dp, y, k1)
    h = 0.1 if t_end > 0.1 else t_end
    n_acc = 0
    n_rej = 0
    while idx < nt:
        if h > t_end - t:
            h = t_end - t
        for i in range(4):
            ywork[i] = y[i] + h * _A21 * k1[i]
        _rhs(ap, dp, ywork, k2)
        for i in range(4):
            ywork[i] = y[i] + h * (_A31 * k1[i] + _A32 * k2[i])
        _rhs(ap, dp, ywork, k3)
        for i in range(4):
            ywork[i] = y[i] + h * (_A41 * k1[i] + _A42 * k2[i] + _A43 * k3[i])
        _rhs(ap, dp, ywork, k4)
        for i in range(4):
            ywork[i] = y[i] + h * (_A51 * k1[i] + _A52 * k2[i] + _A53 * k3[i]
                                   + _A54 * k4[i])
        _rhs(ap, dp, ywork, k5)
        for i in range(4):
            ywork[i] = y[i] + h * (_A61 * k1[i] + _A62 * k2[i] + _A63 * k3[i]
                                   + _A64 * k4[i] + _A65 * k5[i])
        _rhs(ap, dp, ywork, k6)
        for i in range(4):
            ynew[i] = y[i] + h * (_B1 * k1[i] + _B3c * k3[i] + _B4 * k4[i]
                                  + _B5c * k5[i] + _B6 * k6[i])
        _rhs(ap, dp, ynew, k7)
        err_norm = 0.0
        for i in range(4):
            err = h * (_E1 * k1[i] + _E3 * k3[i] + _E4 * k4[i] + _E5 * k5[i]
                       + _E6 * k6[i] + _E7 * k7[i]) / tol
            err_norm += err * err
        err_norm = sqrt(err_norm / 4.0)
        if err_norm <= 1.0:
            n_acc += 1
            t_new = t + h
            if idx < nt and tm[idx] <= t_new:
                for i in range(4):
                    ydiff[i] = ynew[i] - y[i]
                    bspl[i] = h * k1[i] - ydiff[i]
                    cont4[i] = ydiff[i] - h * k7[i] - bspl[i]
                    cont5[i] = h * (_D1 * k1[i] + _D3 * k3[i] + _D4 * k4[i]
                                    + _D5 * k5[i] + _D6 * k6[i] + _D7 * k7[i])
                while idx < nt and tm[idx] <= t_new * (1.0 + 4.0 * _EPS):
                    theta = (tm[idx] - t) / h
                    theta1 = 1.0 - theta
                    for i in range(4):
                        om[idx, i] = y[i] + theta * (
                            ydiff[i] + theta1 * (bspl[i] + theta * (
                                cont4[i] + theta1 * cont5[i])))
                    idx += 1
            t = t_new
            for i in range(4):
                y[i] = ynew[i]
                k1[i] = k7[i]
            if t >= t_end:
                break
        else:
            n_rej += 1
        factor = 5.0 if err_norm == 0.0 else 0.9 * err_norm ** -0.2
        if factor > 5.0:
            factor = 5.0
        elif factor < 0.2:
            factor = 0.2
        h *= factor
        if h < 16.0 * _EPS * (fabs(t) if fabs(t) > 1.0 else 1.0):
            raise RuntimeError(
                f"step size underflow at t={t:.6g} (h={h:.3g}, "
                f"error norm {err_norm:.3g}, tol {tol:.3g})"
            )
    return out, n_acc, n_rej
