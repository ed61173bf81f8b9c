"""Loop-bound numeric kernels.

Each kernel is written once as plain Python over numpy arrays and compiled
with numba when it is available (see :mod:`cryptoeff._accel`). Path
simulators additionally have a numpy-vectorized twin that is used when numba
is disabled, since a per-element Python loop over 10^7 steps is unusable.
"""
import math

import numpy as np

from ._accel import HAS_NUMBA, jit

NAN = np.nan


# --------------------------------------------------------------------------
# Wilder recursions
# --------------------------------------------------------------------------

@jit
def wilder_average(x, n, first):
    """Wilder smoothing of ``x`` starting at index ``first``.

    out[first + n - 1] is the mean of x[first:first + n]; afterwards
    out[t] = (out[t-1] * (n - 1) + x[t]) / n. Everything before is NaN.
    """
    m = x.shape[0]
    out = np.full(m, NAN)
    last = first + n - 1
    if first < 0 or last >= m:
        return out
    acc = 0.0
    for t in range(first, last + 1):
        acc += x[t]
    avg = acc / n
    out[last] = avg
    for t in range(last + 1, m):
        avg = (avg * (n - 1) + x[t]) / n
        out[t] = avg
    return out


@jit
def rsi_kernel(closes, n):
    m = closes.shape[0]
    out = np.full(m, NAN)
    if m <= n:
        return out
    gain = 0.0
    loss = 0.0
    for t in range(1, n + 1):
        d = closes[t] - closes[t - 1]
        if d > 0:
            gain += d
        else:
            loss -= d
    gain /= n
    loss /= n
    for t in range(n, m):
        if t > n:
            d = closes[t] - closes[t - 1]
            up = d if d > 0 else 0.0
            dn = -d if d < 0 else 0.0
            gain = (gain * (n - 1) + up) / n
            loss = (loss * (n - 1) + dn) / n
        if loss == 0.0:
            out[t] = 100.0 if gain > 0.0 else 50.0
        else:
            out[t] = 100.0 - 100.0 / (1.0 + gain / loss)
    return out


@jit
def true_range(high, low, close):
    """TR[0] is NaN (no previous close)."""
    m = high.shape[0]
    out = np.full(m, NAN)
    for t in range(1, m):
        pc = close[t - 1]
        a = high[t] - low[t]
        b = abs(high[t] - pc)
        c = abs(low[t] - pc)
        out[t] = max(a, max(b, c))
    return out


@jit
def directional_movement(high, low):
    """(+DM, -DM); index 0 is NaN."""
    m = high.shape[0]
    plus = np.full(m, NAN)
    minus = np.full(m, NAN)
    for t in range(1, m):
        up = high[t] - high[t - 1]
        down = low[t - 1] - low[t]
        plus[t] = up if (up > down and up > 0.0) else 0.0
        minus[t] = down if (down > up and down > 0.0) else 0.0
    return plus, minus


@jit
def adx_kernel(high, low, close, n):
    m = high.shape[0]
    out = np.full(m, NAN)
    if m <= 2 * n:
        return out
    tr = true_range(high, low, close)
    pdm, mdm = directional_movement(high, low)
    atr = wilder_average(tr, n, 1)
    sp = wilder_average(pdm, n, 1)
    sm = wilder_average(mdm, n, 1)
    dx = np.full(m, NAN)
    for t in range(n, m):
        if atr[t] > 0.0:
            pdi = 100.0 * sp[t] / atr[t]
            mdi = 100.0 * sm[t] / atr[t]
        else:
            pdi = 0.0
            mdi = 0.0
        s = pdi + mdi
        dx[t] = 100.0 * abs(pdi - mdi) / s if s > 0.0 else 0.0
    adx = wilder_average(dx, n, n)
    for t in range(m):
        out[t] = adx[t]
    return out


@jit
def sar_kernel(high, low, start_long, af_step, af_max):
    """Wilder's parabolic stop-and-reverse; out[0] is NaN."""
    m = high.shape[0]
    out = np.full(m, NAN)
    if m < 2:
        return out
    long = start_long
    af = af_step
    if long:
        sar = min(low[0], low[1])
        ep = max(high[0], high[1])
    else:
        sar = max(high[0], high[1])
        ep = min(low[0], low[1])
    out[1] = sar
    for t in range(2, m):
        nxt = sar + af * (ep - sar)
        if long:
            nxt = min(nxt, min(low[t - 1], low[t - 2]))
            if low[t] < nxt:
                long = False
                nxt = max(ep, high[t])
                ep = low[t]
                af = af_step
            elif high[t] > ep:
                ep = high[t]
                af = min(af + af_step, af_max)
        else:
            nxt = max(nxt, max(high[t - 1], high[t - 2]))
            if high[t] > nxt:
                long = True
                nxt = min(ep, low[t])
                ep = high[t]
                af = af_step
            elif low[t] < ep:
                ep = low[t]
                af = min(af + af_step, af_max)
        sar = nxt
        out[t] = sar
    return out


# --------------------------------------------------------------------------
# SMO for the binary C-SVM dual (second-order working-set selection)
# --------------------------------------------------------------------------

@jit
def smo_solve(K, y, C, eps, max_iter):
    """Minimise 0.5 a'Qa - sum(a) s.t. 0 <= a <= C, y'a = 0, Q = yy' * K.

    Returns ``(alpha, rho, iterations, converged)``; the decision function
    is ``sum_i alpha_i y_i K(x_i, x) - rho``.
    """
    n = y.shape[0]
    tau = 1e-12
    alpha = np.zeros(n)
    grad = -np.ones(n)
    qd = np.empty(n)
    for i in range(n):
        qd[i] = K[i, i]
    it = 0
    converged = False
    while it < max_iter:
        # i: maximal violating index in I_up
        gmax = -np.inf
        gmax_idx = -1
        for t in range(n):
            if y[t] > 0:
                if alpha[t] < C and -grad[t] >= gmax:
                    gmax = -grad[t]
                    gmax_idx = t
            else:
                if alpha[t] > 0.0 and grad[t] >= gmax:
                    gmax = grad[t]
                    gmax_idx = t
        i = gmax_idx
        gmax2 = -np.inf
        gmin_idx = -1
        obj_min = np.inf
        for j in range(n):
            if y[j] > 0:
                if alpha[j] > 0.0:
                    if grad[j] >= gmax2:
                        gmax2 = grad[j]
                    if i >= 0:
                        gd = gmax + grad[j]
                        if gd > 0.0:
                            quad = qd[i] + qd[j] - 2.0 * y[i] * K[i, j]
                            if quad <= 0.0:
                                quad = tau
                            od = -(gd * gd) / quad
                            if od <= obj_min:
                                gmin_idx = j
                                obj_min = od
            else:
                if alpha[j] < C:
                    if -grad[j] >= gmax2:
                        gmax2 = -grad[j]
                    if i >= 0:
                        gd = gmax - grad[j]
                        if gd > 0.0:
                            quad = qd[i] + qd[j] + 2.0 * y[i] * K[i, j]
                            if quad <= 0.0:
                                quad = tau
                            od = -(gd * gd) / quad
                            if od <= obj_min:
                                gmin_idx = j
                                obj_min = od
        if gmax + gmax2 < eps or gmin_idx < 0:
            converged = True
            break
        j = gmin_idx
        it += 1
        qij = y[i] * y[j] * K[i, j]
        old_i = alpha[i]
        old_j = alpha[j]
        if y[i] != y[j]:
            quad = qd[i] + qd[j] + 2.0 * qij
            if quad <= 0.0:
                quad = tau
            delta = (-grad[i] - grad[j]) / quad
            diff = alpha[i] - alpha[j]
            alpha[i] += delta
            alpha[j] += delta
            if diff > 0.0:
                if alpha[j] < 0.0:
                    alpha[j] = 0.0
                    alpha[i] = diff
            else:
                if alpha[i] < 0.0:
                    alpha[i] = 0.0
                    alpha[j] = -diff
            if diff > 0.0:
                if alpha[i] > C:
                    alpha[i] = C
                    alpha[j] = C - diff
            else:
                if alpha[j] > C:
                    alpha[j] = C
                    alpha[i] = C + diff
        else:
            quad = qd[i] + qd[j] - 2.0 * qij
            if quad <= 0.0:
                quad = tau
            delta = (grad[i] - grad[j]) / quad
            s = alpha[i] + alpha[j]
            alpha[i] -= delta
            alpha[j] += delta
            if s > C:
                if alpha[i] > C:
                    alpha[i] = C
                    alpha[j] = s - C
            else:
                if alpha[j] < 0.0:
                    alpha[j] = 0.0
                    alpha[i] = s
            if s > C:
                if alpha[j] > C:
                    alpha[j] = C
                    alpha[i] = s - C
            else:
                if alpha[i] < 0.0:
                    alpha[i] = 0.0
                    alpha[j] = s
        di = alpha[i] - old_i
        dj = alpha[j] - old_j
        for t in range(n):
            # K is symmetric; row access is contiguous
            grad[t] += y[t] * (y[i] * K[i, t] * di + y[j] * K[j, t] * dj)

    # bias from free vectors, or the midpoint of the feasible interval
    ub = np.inf
    lb = -np.inf
    nfree = 0
    sfree = 0.0
    for t in range(n):
        yg = y[t] * grad[t]
        if alpha[t] >= C:
            if y[t] < 0:
                ub = min(ub, yg)
            else:
                lb = max(lb, yg)
        elif alpha[t] <= 0.0:
            if y[t] > 0:
                ub = min(ub, yg)
            else:
                lb = max(lb, yg)
        else:
            nfree += 1
            sfree += yg
    if nfree > 0:
        rho = sfree / nfree
    else:
        rho = (ub + lb) / 2.0
    return alpha, rho, it, converged


@jit
def rbf_kernel_matrix(A, B, gamma):
    na = A.shape[0]
    nb = B.shape[0]
    d = A.shape[1]
    out = np.empty((na, nb))
    for i in range(na):
        for j in range(nb):
            s = 0.0
            for k in range(d):
                diff = A[i, k] - B[j, k]
                s += diff * diff
            out[i, j] = math.exp(-gamma * s)
    return out


# --------------------------------------------------------------------------
# Path simulators
# --------------------------------------------------------------------------

@jit
def _heston_paths_nb(s0, v0, r, kappa, theta, sigma_v, rho, dt, z1, z2):
    n_paths, steps = z1.shape
    log_s = np.empty((n_paths, steps + 1))
    var = np.empty((n_paths, steps + 1))
    touches = 0
    sq = math.sqrt(dt)
    rho_c = math.sqrt(max(0.0, 1.0 - rho * rho))
    ls0 = math.log(s0)
    for p in range(n_paths):
        ls = ls0
        v = v0
        log_s[p, 0] = ls
        var[p, 0] = v
        for k in range(steps):
            vp = v if v > 0.0 else 0.0
            if v <= 0.0:
                touches += 1
            w1 = z1[p, k]
            w2 = rho * w1 + rho_c * z2[p, k]
            sv = math.sqrt(vp)
            ls = ls + (r - 0.5 * vp) * dt + sv * sq * w1
            v = v + kappa * (theta - vp) * dt + sigma_v * sv * sq * w2
            log_s[p, k + 1] = ls
            var[p, k + 1] = v
    return log_s, var, touches


def _heston_paths_np(s0, v0, r, kappa, theta, sigma_v, rho, dt, z1, z2):
    n_paths, steps = z1.shape
    log_s = np.empty((n_paths, steps + 1))
    var = np.empty((n_paths, steps + 1))
    log_s[:, 0] = math.log(s0)
    var[:, 0] = v0
    sq = math.sqrt(dt)
    rho_c = math.sqrt(max(0.0, 1.0 - rho * rho))
    touches = 0
    for k in range(steps):
        v = var[:, k]
        touches += int(np.count_nonzero(v <= 0.0))
        vp = np.maximum(v, 0.0)
        sv = np.sqrt(vp)
        w1 = z1[:, k]
        w2 = rho * w1 + rho_c * z2[:, k]
        log_s[:, k + 1] = log_s[:, k] + (r - 0.5 * vp) * dt + sv * sq * w1
        var[:, k + 1] = v + kappa * (theta - vp) * dt + sigma_v * sv * sq * w2
    return log_s, var, touches


_heston_paths_np.py_func = _heston_paths_np

heston_paths = _heston_paths_nb if HAS_NUMBA else _heston_paths_np
