"""Pure-Python (numpy) versions of the compiled kernels in ``_kernels.pyx``."""

import numpy as np

_CHUNK = 1024
_MAX_DOUBLINGS = 40


def pairwise_dist(A, B):
    A = np.ascontiguousarray(A, dtype=np.float64)
    B = np.ascontiguousarray(B, dtype=np.float64)
    out = np.empty((A.shape[0], B.shape[0]))
    # accumulate coordinate by coordinate so the rounding matches a scalar loop
    for start in range(0, A.shape[0], _CHUNK):
        block = A[start:start + _CHUNK]
        acc = np.zeros((block.shape[0], B.shape[0]))
        for k in range(A.shape[1]):
            t = block[:, k, None] - B[None, :, k]
            acc += t * t
        out[start:start + _CHUNK] = np.sqrt(acc)
    return out


def _block_sum(D, same):
    return float(D[same].sum()), float(D[~same].sum())


def psi_sums(U, lu, V, lv, squared=False):
    U = np.asarray(U, dtype=np.float64)
    V = np.asarray(V, dtype=np.float64)
    lu = np.asarray(lu)
    lv = np.asarray(lv)
    same = diff = 0.0
    blocks = [(U, lu, V, lv, False), (U, lu, U, lu, True), (V, lv, V, lv, True)]
    for A, la, B, lb, upper in blocks:
        if A.shape[0] == 0 or B.shape[0] == 0:
            continue
        D = pairwise_dist(A, B)
        if squared:
            D = D * D
        mask = la[:, None] == lb[None, :]
        if upper:
            keep = np.triu(np.ones(D.shape, dtype=bool), k=1)
            s, d = float(D[mask & keep].sum()), float(D[~mask & keep].sum())
        else:
            s, d = _block_sum(D, mask)
        same += s
        diff += d
    return same, diff


def _objective(X, y):
    return float(np.sqrt(((X - y) ** 2).sum(axis=1)).sum())


def _vertex_optimal(X, j):
    diff = X - X[j]
    dist = np.sqrt((diff ** 2).sum(axis=1))
    coincident = dist == 0.0
    pull = (diff[~coincident] / dist[~coincident, None]).sum(axis=0)
    return np.linalg.norm(pull) <= coincident.sum()


def weiszfeld(points, tol, max_iter):
    """Return (median, iterations, converged, last_move, objective_trace)."""
    X = np.ascontiguousarray(points, dtype=np.float64)
    y = X.mean(axis=0)
    trace = [_objective(X, y)]
    move = np.inf
    converged = False
    it = 0
    while it < max_iter:
        dist = np.sqrt(((X - y) ** 2).sum(axis=1))
        nearest = int(np.argmin(dist))
        coincident = dist == 0.0
        mult = float(coincident.sum())
        if mult == X.shape[0] or _vertex_optimal(X, nearest):
            move = float(np.linalg.norm(X[nearest] - y)) if mult < X.shape[0] else 0.0
            if mult < X.shape[0]:
                y = X[nearest].copy()
            it += 1
            trace.append(_objective(X, y))
            converged = True
            break
        inv = np.zeros_like(dist)
        inv[~coincident] = 1.0 / dist[~coincident]
        den = inv.sum()
        num = inv @ X
        beta = 0.0
        if mult > 0.0:
            # Vardi-Zhang step when the iterate sits on a data point
            r = np.linalg.norm(num - den * y)
            beta = mult / r
            if beta >= 1.0:
                converged = True
                break
        step = (1.0 - beta) * (num / den) + beta * y - y
        fbest = _objective(X, y + step)
        lam = 1.0
        # extrapolate along the Weiszfeld direction while the objective keeps falling
        for _ in range(_MAX_DOUBLINGS):
            ftry = _objective(X, y + 2.0 * lam * step)
            if not ftry < fbest:
                break
            fbest = ftry
            lam *= 2.0
        y_new = y + lam * step
        move = float(np.linalg.norm(y_new - y))
        y = y_new
        it += 1
        trace.append(_objective(X, y))
        if move <= tol:
            converged = True
            break
    return y, it, converged, move, np.asarray(trace)


def smo(K, y, C, tol, max_iter):
    """Solve the binary SVM dual on a precomputed kernel matrix.

    Returns (alpha, bias, iterations, converged); the decision function is
    sum_i alpha_i y_i K(x_i, x) + bias.
    """
    K = np.ascontiguousarray(K, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    n = y.shape[0]
    alpha = np.zeros(n)
    G = -np.ones(n)
    diag = np.diag(K).copy()
    tau = 1e-12
    converged = False
    it = 0
    while it < max_iter:
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
        if not up.any() or not low.any():
            converged = True
            break
        score = np.where(up, -y * G, -np.inf)
        i = int(np.argmax(score))
        gmax = score[i]
        yg = y * G
        gmax2 = np.max(yg[low])
        b = gmax + yg
        cand = low & (b > 0)
        if not cand.any() or gmax + gmax2 < tol:
            converged = True
            break
        a = diag[i] + diag - 2.0 * K[i]
        a = np.where(a <= 0, tau, a)
        obj = np.where(cand, -(b * b) / a, np.inf)
        j = int(np.argmin(obj))
        it += 1
        old_i, old_j = alpha[i], alpha[j]
        if y[i] != y[j]:
            quad = diag[i] + diag[j] + 2.0 * K[i, j] * (y[i] * y[j])
            quad = tau if quad <= 0 else quad
            delta = (-G[i] - G[j]) / quad
            diff = alpha[i] - alpha[j]
            alpha[i] += delta
            alpha[j] += delta
            if diff > 0:
                if alpha[j] < 0:
                    alpha[j], alpha[i] = 0.0, diff
            elif alpha[i] < 0:
                alpha[i], alpha[j] = 0.0, -diff
            if diff > 0:
                if alpha[i] > C:
                    alpha[i], alpha[j] = C, C - diff
            elif alpha[j] > C:
                alpha[j], alpha[i] = C, C + diff
        else:
            quad = diag[i] + diag[j] - 2.0 * K[i, j] * (y[i] * y[j])
            quad = tau if quad <= 0 else quad
            delta = (G[i] - G[j]) / quad
            total = alpha[i] + alpha[j]
            alpha[i] -= delta
            alpha[j] += delta
            if total > C:
                if alpha[i] > C:
                    alpha[i], alpha[j] = C, total - C
            elif alpha[j] < 0:
                alpha[j], alpha[i] = 0.0, total
            if total > C:
                if alpha[j] > C:
                    alpha[j], alpha[i] = C, total - C
            elif alpha[i] < 0:
                alpha[i], alpha[j] = 0.0, total
        d_i = alpha[i] - old_i
        d_j = alpha[j] - old_j
        G += y * (y[i] * K[i] * d_i + y[j] * K[j] * d_j)
    return alpha, bias_from_gradient(alpha, G, y, C), it, converged


def bias_from_gradient(alpha, G, y, C):
    yg = y * G
    upper = alpha >= C
    lower = alpha <= 0
    free = ~(upper | lower)
    if free.any():
        rho = yg[free].mean()
    else:
        ub = np.min(yg[(upper & (y < 0)) | (lower & (y > 0))], initial=np.inf)
        lb = np.max(yg[(upper & (y > 0)) | (lower & (y < 0))], initial=-np.inf)
        rho = 0.5 * (ub + lb)
    return float(-rho)
