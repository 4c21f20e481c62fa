# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled run loop for all optimizers on dense SVM and quadratic problems.

Mirrors :func:`dualavg._pycore.run_loop` operation for operation; the two
differ only in the summation order of dot products.
"""
import time

import numpy as np

from cpython.mem cimport PyMem_Malloc, PyMem_Free
from libc.math cimport sqrt, isfinite
from libc.string cimport memcpy

from .errors import ContractError
from .projections import project, L2_BALL, BOX

ctypedef long double ld

cdef double EPS = 2.220446049250313e-16

cdef enum:
    ALG_GDA = 0
    ALG_SCPDA = 1
    ALG_PEGASOS = 2
    ALG_PAPSG = 3
    ALG_SCRDA = 4
    ALG_DA = 5

cdef enum:
    SET_FREE = 0
    SET_BALL = 1
    SET_BOX = 2

_ALGO_CODES = {"gda": ALG_GDA, "scpda": ALG_SCPDA, "pegasos": ALG_PEGASOS,
               "papsg": ALG_PAPSG, "scrda": ALG_SCRDA, "da": ALG_DA}


cdef inline double _dot(const double* a, const double* b, Py_ssize_t d) noexcept nogil:
    cdef double s = 0.0
    cdef Py_ssize_t j
    for j in range(d):
        s += a[j] * b[j]
    return s


cdef double _objective(bint is_svm, const double* X, const double* y, const double* c,
                       Py_ssize_t n, Py_ssize_t d, double mu, const double* w) noexcept nogil:
    cdef Py_ssize_t i, j
    cdef double s = 0.0, m, r
    if not is_svm:
        for j in range(d):
            r = w[j] - c[j]
            s += r * r
        return 0.5 * mu * s
    for i in range(n):
        m = 1.0 - y[i] * _dot(X + i * d, w, d)
        if m > 0.0:
            s += m
    return 0.5 * mu * _dot(w, w, d) + s / n


cdef double _full_gradient(bint is_svm, const double* X, const double* y, const double* c,
                           Py_ssize_t n, Py_ssize_t d, double mu, const double* w,
                           double* g, double* acc) noexcept nogil:
    """Writes the subgradient into g and returns f(w)."""
    cdef Py_ssize_t i, j
    cdef double h = 0.0, m, r, yi
    if not is_svm:
        for j in range(d):
            r = w[j] - c[j]
            g[j] = mu * r
            h += r * r
        return 0.5 * mu * h
    for j in range(d):
        acc[j] = 0.0
    for i in range(n):
        yi = y[i]
        m = yi * _dot(X + i * d, w, d)
        if m < 1.0:
            h += 1.0 - m
            for j in range(d):
                acc[j] += yi * X[i * d + j]
    for j in range(d):
        g[j] = mu * w[j] - acc[j] / n
    return 0.5 * mu * _dot(w, w, d) + h / n


cdef void _example_gradient(const double* X, const double* y, Py_ssize_t d, double mu,
                            const double* w, Py_ssize_t i, double* g) noexcept nogil:
    cdef Py_ssize_t j
    cdef double yi = y[i]
    cdef const double* x = X + i * d
    if yi * _dot(x, w, d) < 1.0:
        for j in range(d):
            g[j] = mu * w[j] - yi * x[j]
    else:
        for j in range(d):
            g[j] = mu * w[j]


cdef int _project(int kind, double R, const double* lo, const double* hi,
                  double* v, Py_ssize_t d) noexcept nogil:
    """In-place projection; returns -1 on non-finite input."""
    cdef Py_ssize_t j
    cdef double nrm, s
    for j in range(d):
        if not isfinite(v[j]):
            return -1
    if kind == SET_BOX:
        for j in range(d):
            if v[j] < lo[j]:
                v[j] = lo[j]
            elif v[j] > hi[j]:
                v[j] = hi[j]
    elif kind == SET_BALL:
        nrm = sqrt(_dot(v, v, d))
        if nrm > R:
            s = R / nrm
            for j in range(d):
                v[j] = v[j] * s
            while sqrt(_dot(v, v, d)) > R:
                for j in range(d):
                    v[j] = v[j] * (1.0 - EPS)
    return 0


def run_loop(problem, fset, algo, schedule, Py_ssize_t iters, indices, w0, checkpoints,
             w_ref, bint track_weighted, double da_gamma, bint gda_average=True):
    if algo not in _ALGO_CODES:
        raise ContractError(f"unknown algorithm {algo!r}")
    cdef int alg = _ALGO_CODES[algo]
    cdef bint linear = schedule == "linear"
    if schedule not in ("linear", "constant"):
        raise ContractError(f"unknown schedule {schedule!r}")

    cdef Py_ssize_t d = problem.dim
    cdef bint is_svm = problem.kind == "svm_hinge"
    cdef double mu = problem.mu
    cdef ld mu_l = mu
    X_arr = np.ascontiguousarray(problem.X if is_svm else np.zeros((1, d)), dtype=np.float64)
    y_arr = np.ascontiguousarray(problem.y if is_svm else np.zeros(1), dtype=np.float64)
    c_arr = np.ascontiguousarray(np.zeros(d) if is_svm else problem.center, dtype=np.float64)
    cdef const double[:, ::1] Xv = X_arr
    cdef const double[::1] yv = y_arr
    cdef const double[::1] cv = c_arr
    cdef Py_ssize_t n = X_arr.shape[0] if is_svm else 0

    cdef int skind = SET_FREE
    cdef double R = 0.0
    lo_arr = np.zeros(d)
    hi_arr = np.zeros(d)
    if fset.kind == L2_BALL:
        skind = SET_BALL
        R = fset.radius
    elif fset.kind == BOX:
        skind = SET_BOX
        lo_arr = np.ascontiguousarray(np.broadcast_to(fset.lower, (d,)), dtype=np.float64)
        hi_arr = np.ascontiguousarray(np.broadcast_to(fset.upper, (d,)), dtype=np.float64)
    cdef const double[::1] lov = lo_arr
    cdef const double[::1] hiv = hi_arr

    stochastic = indices is not None and len(indices) > 0
    if stochastic and not is_svm:
        raise ContractError("stochastic subgradients are defined for svm_hinge only")
    if stochastic and len(indices) < iters:
        raise ContractError("need one sample index per iteration")
    idx_arr = np.ascontiguousarray(indices if stochastic else np.zeros(1, dtype=np.int64),
                                   dtype=np.int64)
    cdef const long long[::1] idxv = idx_arr
    cdef bint stoch = stochastic

    ck_arr = np.ascontiguousarray(checkpoints, dtype=np.int64)
    cdef const long long[::1] ckv = ck_arr
    cdef Py_ssize_t n_ck = ck_arr.shape[0]

    cdef bint has_ref = w_ref is not None and len(w_ref) > 0
    ref_arr = np.ascontiguousarray(w_ref if has_ref else np.zeros(d), dtype=np.float64)
    cdef const double[::1] refv = ref_arr

    w_init = project(fset, np.zeros(d) if w0 is None else np.asarray(w0, dtype=np.float64))
    if w_init.shape != (d,):
        raise ContractError(f"initial point must have length {d}")

    out_w = np.empty((n_ck, d))
    out_f = np.empty(n_ck)
    bound = np.full(n_ck, np.nan)
    wobj = np.full(n_ck, np.nan)
    maxdist = np.full(n_ck, np.nan)
    time_ns = np.empty(n_ck, dtype=np.int64)
    gnorm2 = np.empty(iters)
    cdef double[:, ::1] out_wv = out_w
    cdef double[::1] out_fv = out_f
    cdef double[::1] boundv = bound
    cdef double[::1] wobjv = wobj
    cdef double[::1] maxdv = maxdist
    cdef double[::1] gn2v = gnorm2

    cdef double* w = <double*> PyMem_Malloc(d * sizeof(double))
    cdef double* wp = <double*> PyMem_Malloc(d * sizeof(double))
    cdef double* wpp = <double*> PyMem_Malloc(d * sizeof(double))
    cdef double* wold = <double*> PyMem_Malloc(d * sizeof(double))
    cdef double* g = <double*> PyMem_Malloc(d * sizeof(double))
    cdef double* acc = <double*> PyMem_Malloc(d * sizeof(double))
    cdef double* outp = <double*> PyMem_Malloc(d * sizeof(double))
    cdef ld* psum = <ld*> PyMem_Malloc(d * sizeof(ld))
    cdef ld* gsum = <ld*> PyMem_Malloc(d * sizeof(ld))
    cdef ld* anum = <ld*> PyMem_Malloc(d * sizeof(ld))
    if (w == NULL or wp == NULL or wpp == NULL or wold == NULL or g == NULL or acc == NULL
            or outp == NULL or psum == NULL or gsum == NULL or anum == NULL):
        raise MemoryError()

    cdef const double* Xp = &Xv[0, 0]
    cdef const double* yp = &yv[0]
    cdef const double* cp = &cv[0]
    cdef const double* lop = &lov[0]
    cdef const double* hip = &hiv[0]
    cdef Py_ssize_t t, j, c = 0
    cdef double a, gam, A = 0.0, Gam = 0.0, An, an
    cdef double fw = 0.0, gn2, bsum = 0.0, wsum = 0.0, dmax = 0.0, dist, r
    cdef double delta, eta, gamma_da, ca, cb
    cdef ld Gam_l, den = 0.0
    cdef long long start

    try:
        for j in range(d):
            w[j] = w_init[j]
            wp[j] = w[j]
            wpp[j] = w[j]
            psum[j] = 0.0
            gsum[j] = 0.0
            anum[j] = 0.0
        start = time.perf_counter_ns()
        for t in range(1, iters + 1):
            if stoch:
                _example_gradient(Xp, yp, d, mu, w, idxv[t - 1], g)
                if track_weighted:
                    fw = _objective(is_svm, Xp, yp, cp, n, d, mu, w)
            else:
                fw = _full_gradient(is_svm, Xp, yp, cp, n, d, mu, w, g, acc)
            gn2 = _dot(g, g, d)
            gn2v[t - 1] = gn2
            if linear:
                a = <double> t
            else:
                a = 1.0
            gam = a
            A += a
            Gam += gam
            bsum += (a * a) / (mu * Gam) * gn2
            if track_weighted:
                wsum += a * fw
            if has_ref:
                dist = 0.0
                for j in range(d):
                    r = w[j] - refv[j]
                    dist += r * r
                dist = sqrt(dist)
                if dist > dmax:
                    dmax = dist

            memcpy(wold, w, d * sizeof(double))
            if alg == ALG_GDA or alg == ALG_SCPDA:
                Gam_l = Gam
                for j in range(d):
                    psum[j] = psum[j] + (<ld> gam) * (<ld> w[j])
                    gsum[j] = gsum[j] + (<ld> a) * (<ld> g[j])
                    wp[j] = <double> ((psum[j] - gsum[j] / mu_l) / Gam_l)
                if _project(skind, R, lop, hip, wp, d) < 0:
                    raise ContractError("non-finite iterate")
                if alg == ALG_GDA:
                    for j in range(d):
                        anum[j] = anum[j] + (<ld> a) * (<ld> w[j])
                        w[j] = wp[j]
                    den += a
                else:
                    an = (<double> (t + 1)) if linear else 1.0
                    An = A + an
                    ca = A / An
                    cb = an / An
                    for j in range(d):
                        w[j] = ca * w[j] + cb * wp[j]
            elif alg == ALG_PEGASOS:
                eta = 1.0 / (mu * t)
                for j in range(d):
                    w[j] = w[j] - eta * g[j]
                if _project(skind, R, lop, hip, w, d) < 0:
                    raise ContractError("non-finite iterate")
            elif alg == ALG_PAPSG:
                delta = 1.0 / (1.0 + a * mu)
                for j in range(d):
                    wp[j] = delta * wpp[j] - (a * delta) * (g[j] - mu * w[j])
                if _project(skind, R, lop, hip, wp, d) < 0:
                    raise ContractError("non-finite iterate")
                an = (<double> (t + 1)) if linear else 1.0
                An = A + an
                ca = A / An
                cb = an / An
                for j in range(d):
                    w[j] = ca * w[j] + cb * wp[j]
                    wpp[j] = wp[j]
            elif alg == ALG_SCRDA:
                for j in range(d):
                    gsum[j] = gsum[j] + (<ld> (g[j] - mu * w[j]))
                    w[j] = <double> ((-gsum[j]) / (mu_l * (<ld> t)))
                if _project(skind, R, lop, hip, w, d) < 0:
                    raise ContractError("non-finite iterate")
            else:
                gamma_da = da_gamma * A / sqrt(<double> t)
                for j in range(d):
                    gsum[j] = gsum[j] + (<ld> a) * (<ld> g[j])
                    w[j] = <double> ((-gsum[j]) / (<ld> gamma_da))
                if _project(skind, R, lop, hip, w, d) < 0:
                    raise ContractError("non-finite iterate")

            if c < n_ck and ckv[c] == t:
                if alg == ALG_GDA and gda_average:
                    for j in range(d):
                        outp[j] = <double> (anum[j] / den)
                else:
                    memcpy(outp, wold, d * sizeof(double))
                for j in range(d):
                    out_wv[c, j] = outp[j]
                out_fv[c] = _objective(is_svm, Xp, yp, cp, n, d, mu, outp)
                if alg == ALG_GDA or alg == ALG_SCPDA:
                    boundv[c] = bsum / (2.0 * A)
                if track_weighted:
                    wobjv[c] = wsum / A
                if has_ref:
                    maxdv[c] = dmax
                time_ns[c] = time.perf_counter_ns() - start
                c += 1
    finally:
        PyMem_Free(w)
        PyMem_Free(wp)
        PyMem_Free(wpp)
        PyMem_Free(wold)
        PyMem_Free(g)
        PyMem_Free(acc)
        PyMem_Free(outp)
        PyMem_Free(psum)
        PyMem_Free(gsum)
        PyMem_Free(anum)
    return {"out_w": out_w, "out_f": out_f, "bound": bound, "wobj": wobj,
            "maxdist": maxdist, "time_ns": time_ns, "gnorm2": gnorm2}


def dual_cd_epochs(const double[:, ::1] X, const double[::1] y, double C,
                   double[::1] alpha, double[::1] w, const long long[:, ::1] orders):
    """Dual coordinate ascent sweeps for the hinge SVM (in-place on alpha, w).

    Maximizes sum(alpha) - ||w||^2 / 2 with w = sum_i alpha_i y_i x_i and
    0 <= alpha_i <= C, one closed-form coordinate update at a time.
    """
    cdef Py_ssize_t n = X.shape[0], d = X.shape[1]
    cdef Py_ssize_t e, k, i, j
    cdef double q, grad, new, step, yi
    cdef const double* Xp = &X[0, 0]
    cdef double* wp = &w[0]
    with nogil:
        for e in range(orders.shape[0]):
            for k in range(n):
                i = orders[e, k]
                yi = y[i]
                q = _dot(Xp + i * d, Xp + i * d, d)
                if q > 0.0:
                    grad = yi * _dot(Xp + i * d, wp, d) - 1.0
                    new = alpha[i] - grad / q
                else:
                    new = C
                if new < 0.0:
                    new = 0.0
                elif new > C:
                    new = C
                step = new - alpha[i]
                if step != 0.0:
                    alpha[i] = new
                    for j in range(d):
                        wp[j] += step * yi * Xp[i * d + j]
