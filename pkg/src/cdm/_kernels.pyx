# cython: language_level=3
"""Compiled inner loops: distances, psi sums, Weiszfeld and SMO.

Every function here has a pure-Python twin in ``_kernels_py`` with the same
signature and return convention.
"""
import numpy as np
cimport numpy as cnp

from cdm._kernels_py import bias_from_gradient
from libc.math cimport sqrt

cnp.import_array()

ctypedef cnp.float64_t f64
ctypedef cnp.intp_t intp


cdef inline double _dist(const f64[:, ::1] A, Py_ssize_t i,
                         const f64[:, ::1] B, Py_ssize_t j, bint squared) noexcept nogil:
    cdef Py_ssize_t k
    cdef double s = 0.0, t
    for k in range(A.shape[1]):
        t = A[i, k] - B[j, k]
        s += t * t
    if squared:
        return s
    return sqrt(s)


def pairwise_dist(A, B):
    cdef const f64[:, ::1] a = np.ascontiguousarray(A, dtype=np.float64)
    cdef const f64[:, ::1] b = np.ascontiguousarray(B, dtype=np.float64)
    cdef Py_ssize_t p = a.shape[0], q = b.shape[0], i, j
    out = np.empty((p, q), dtype=np.float64)
    cdef f64[:, ::1] o = out
    with nogil:
        for i in range(p):
            for j in range(q):
                o[i, j] = _dist(a, i, b, j, False)
    return out


def psi_sums(U, lu, V, lv, bint squared=False):
    cdef const f64[:, ::1] u = np.ascontiguousarray(U, dtype=np.float64)
    cdef const f64[:, ::1] v = np.ascontiguousarray(V, dtype=np.float64)
    cdef const intp[::1] a = np.ascontiguousarray(lu, dtype=np.intp)
    cdef const intp[::1] b = np.ascontiguousarray(lv, dtype=np.intp)
    cdef Py_ssize_t nu = u.shape[0], nv = v.shape[0], i, j
    cdef double same = 0.0, diff = 0.0, t
    with nogil:
        for i in range(nu):
            for j in range(nv):
                t = _dist(u, i, v, j, squared)
                if a[i] == b[j]:
                    same += t
                else:
                    diff += t
        for i in range(nu):
            for j in range(i + 1, nu):
                t = _dist(u, i, u, j, squared)
                if a[i] == a[j]:
                    same += t
                else:
                    diff += t
        for i in range(nv):
            for j in range(i + 1, nv):
                t = _dist(v, i, v, j, squared)
                if b[i] == b[j]:
                    same += t
                else:
                    diff += t
    return same, diff


DEF _MAX_DOUBLINGS = 40


cdef double _objective(const f64[:, ::1] X, const f64[::1] y) noexcept nogil:
    cdef Py_ssize_t i, k
    cdef double s = 0.0, acc, t
    for i in range(X.shape[0]):
        acc = 0.0
        for k in range(X.shape[1]):
            t = X[i, k] - y[k]
            acc += t * t
        s += sqrt(acc)
    return s


cdef bint _vertex_optimal(const f64[:, ::1] X, Py_ssize_t j, f64[::1] work) noexcept nogil:
    # x_j minimizes the sum of distances iff |sum of unit pulls from other points| <= multiplicity
    cdef Py_ssize_t i, k, d = X.shape[1]
    cdef double acc, t, mult = 0.0, r = 0.0
    for k in range(d):
        work[k] = 0.0
    for i in range(X.shape[0]):
        acc = 0.0
        for k in range(d):
            t = X[i, k] - X[j, k]
            acc += t * t
        if acc == 0.0:
            mult += 1.0
            continue
        acc = sqrt(acc)
        for k in range(d):
            work[k] += (X[i, k] - X[j, k]) / acc
    for k in range(d):
        r += work[k] * work[k]
    return sqrt(r) <= mult


def weiszfeld(points, double tol, Py_ssize_t max_iter):
    """Return (median, iterations, converged, last_move, objective_trace)."""
    cdef const f64[:, ::1] X = np.ascontiguousarray(points, dtype=np.float64)
    cdef Py_ssize_t n = X.shape[0], d = X.shape[1], i, k, it = 0, nearest
    y_arr = np.ascontiguousarray(np.asarray(X).mean(axis=0), dtype=np.float64)
    cdef f64[::1] y = y_arr
    cdef f64[::1] num = np.zeros(d)
    cdef f64[::1] work = np.zeros(d)
    cdef f64[::1] step = np.zeros(d)
    cdef f64[::1] cand = np.zeros(d)
    cdef f64[::1] trial = np.zeros(d)
    cdef double fbest, ftry, lam
    cdef int dbl
    trace_arr = np.empty(max_iter + 1)
    cdef f64[::1] trace = trace_arr
    cdef double den, dist, acc, t, mult, r, beta, move = np.inf, best
    cdef bint converged = False, at_optimum
    trace[0] = _objective(X, y)
    with nogil:
        while it < max_iter:
            for k in range(d):
                num[k] = 0.0
            den = 0.0
            mult = 0.0
            best = -1.0
            nearest = 0
            for i in range(n):
                acc = 0.0
                for k in range(d):
                    t = X[i, k] - y[k]
                    acc += t * t
                dist = sqrt(acc)
                if best < 0.0 or dist < best:
                    best = dist
                    nearest = i
                if dist == 0.0:
                    mult += 1.0
                    continue
                den += 1.0 / dist
                for k in range(d):
                    num[k] += X[i, k] / dist
            at_optimum = False
            if den == 0.0:
                at_optimum = True
            elif _vertex_optimal(X, nearest, work):
                move = 0.0
                for k in range(d):
                    t = X[nearest, k] - y[k]
                    move += t * t
                    y[k] = X[nearest, k]
                move = sqrt(move)
                at_optimum = True
            if at_optimum:
                it += 1
                trace[it] = _objective(X, y)
                converged = True
                break
            if mult > 0.0:
                r = 0.0
                for k in range(d):
                    t = num[k] - den * y[k]
                    r += t * t
                r = sqrt(r)
                beta = mult / r
                if beta >= 1.0:
                    converged = True
                    break
            else:
                beta = 0.0
            for k in range(d):
                step[k] = (1.0 - beta) * (num[k] / den) + beta * y[k] - y[k]
                cand[k] = y[k] + step[k]
            fbest = _objective(X, cand)
            lam = 1.0
            # extrapolate along the Weiszfeld direction while the objective keeps falling
            for dbl in range(_MAX_DOUBLINGS):
                for k in range(d):
                    trial[k] = y[k] + 2.0 * lam * step[k]
                ftry = _objective(X, trial)
                if not ftry < fbest:
                    break
                fbest = ftry
                lam *= 2.0
            move = 0.0
            for k in range(d):
                t = y[k] + lam * step[k]
                move += (t - y[k]) * (t - y[k])
                y[k] = t
            move = sqrt(move)
            it += 1
            trace[it] = _objective(X, y)
            if move <= tol:
                converged = True
                break
    return y_arr, int(it), bool(converged), float(move), trace_arr[: it + 1].copy()


def smo(K, y, double C, double tol, Py_ssize_t max_iter):
    """Solve the binary SVM dual on a precomputed kernel matrix.

    Returns (alpha, bias, iterations, converged); the decision function is
    sum_i alpha_i y_i K(x_i, x) + bias.
    """
    cdef const f64[:, ::1] k_ = np.ascontiguousarray(K, dtype=np.float64)
    cdef const f64[::1] yy = np.ascontiguousarray(y, dtype=np.float64)
    cdef Py_ssize_t n = yy.shape[0], t, i, j, it = 0
    alpha_arr = np.zeros(n)
    grad_arr = -np.ones(n)
    cdef f64[::1] alpha = alpha_arr
    cdef f64[::1] G = grad_arr
    cdef double gmax, gmax2, v, b, a, obj, best, quad, delta, diff, total
    cdef double old_i, old_j, d_i, d_j, tau = 1e-12
    cdef bint converged = False
    with nogil:
        while it < max_iter:
            gmax = -1e300
            gmax2 = -1e300
            i = -1
            for t in range(n):
                if (yy[t] > 0 and alpha[t] < C) or (yy[t] < 0 and alpha[t] > 0):
                    v = -yy[t] * G[t]
                    if v > gmax:
                        gmax = v
                        i = t
            j = -1
            best = 1e300
            for t in range(n):
                if (yy[t] > 0 and alpha[t] > 0) or (yy[t] < 0 and alpha[t] < C):
                    v = yy[t] * G[t]
                    if v >= gmax2:
                        gmax2 = v
                    if i >= 0:
                        b = gmax + v
                        if b > 0:
                            a = k_[i, i] + k_[t, t] - 2.0 * k_[i, t]
                            if a <= 0:
                                a = tau
                            obj = -(b * b) / a
                            if obj < best:
                                best = obj
                                j = t
            if i < 0 or j < 0 or gmax + gmax2 < tol:
                converged = True
                break
            it += 1
            old_i = alpha[i]
            old_j = alpha[j]
            if yy[i] != yy[j]:
                quad = k_[i, i] + k_[j, j] + 2.0 * k_[i, j] * (yy[i] * yy[j])
                if quad <= 0:
                    quad = tau
                delta = (-G[i] - G[j]) / quad
                diff = alpha[i] - alpha[j]
                alpha[i] += delta
                alpha[j] += delta
                if diff > 0:
                    if alpha[j] < 0:
                        alpha[j] = 0
                        alpha[i] = diff
                else:
                    if alpha[i] < 0:
                        alpha[i] = 0
                        alpha[j] = -diff
                if diff > 0:
                    if alpha[i] > C:
                        alpha[i] = C
                        alpha[j] = C - diff
                else:
                    if alpha[j] > C:
                        alpha[j] = C
                        alpha[i] = C + diff
            else:
                quad = k_[i, i] + k_[j, j] - 2.0 * k_[i, j] * (yy[i] * yy[j])
                if quad <= 0:
                    quad = tau
                delta = (G[i] - G[j]) / quad
                total = alpha[i] + alpha[j]
                alpha[i] -= delta
                alpha[j] += delta
                if total > C:
                    if alpha[i] > C:
                        alpha[i] = C
                        alpha[j] = total - C
                else:
                    if alpha[j] < 0:
                        alpha[j] = 0
                        alpha[i] = total
                if total > C:
                    if alpha[j] > C:
                        alpha[j] = C
                        alpha[i] = total - C
                else:
                    if alpha[i] < 0:
                        alpha[i] = 0
                        alpha[j] = total
            d_i = alpha[i] - old_i
            d_j = alpha[j] - old_j
            for t in range(n):
                G[t] += yy[t] * (yy[i] * k_[i, t] * d_i + yy[j] * k_[j, t] * d_j)
    return alpha_arr, bias_from_gradient(alpha_arr, grad_arr, np.asarray(yy), C), int(it), bool(converged)

