"""ARIMA(p, 1, 0) by conditional sum of squares, with diagnostics and forecasts.

The model on first differences is

    dy_t = c + phi_1 dy_{t-1} + ... + phi_p dy_{t-p} + e_t,   e_t ~ N(0, sigma^2)

conditioning on the first ``p`` differences. The CSS objective is quadratic
in ``(c, phi)``, so the least-squares solution is the exact minimiser; a
Newton refinement step checks stationarity of the gradient before
returning. Standard errors come from a central-difference Hessian of the
full Gaussian log-likelihood in ``(c, phi, sigma^2)``.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np

from .econometrics import norm_cdf
from .errors import InsufficientHistory, NonConvergence, TooShort

Z_975 = 1.959964


@dataclass(frozen=True)
class ArimaFit:
    p: int
    d: int
    q: int
    const: float
    ar_coeffs: np.ndarray
    std_errs: np.ndarray  # const first, then AR terms
    z_stats: np.ndarray
    p_values: np.ndarray
    sigma: float
    log_likelihood: float
    aic: float
    bic: float
    hqic: float
    n_obs: int  # length of the differenced series
    n_eff: int  # residuals entering the likelihood
    roots: np.ndarray
    css: float
    grad_norm: float
    iterations: int
    sample: tuple = ("", "")
    dep_name: str = "D.Close"

    @property
    def params(self) -> np.ndarray:
        return np.concatenate(([self.const], self.ar_coeffs))

    @property
    def stationary(self) -> bool:
        return bool(np.all(np.abs(self.roots) > 1.0))

    @property
    def moduli(self) -> np.ndarray:
        return np.abs(self.roots)

    @property
    def frequencies(self) -> np.ndarray:
        return root_frequencies(self.roots)


def lag_matrix(dy: np.ndarray, p: int):
    """Design ``[1, dy_{t-1}, ..., dy_{t-p}]`` and target ``dy_t`` for t >= p."""
    n = len(dy)
    cols = [np.ones(n - p)] + [dy[p - i:n - i] for i in range(1, p + 1)]
    return np.column_stack(cols), dy[p:]


def css(params, dy, p) -> float:
    X, target = lag_matrix(dy, p)
    r = target - X @ np.asarray(params, dtype=np.float64)
    return float(r @ r)


def loglike(params, sigma2, dy, p) -> float:
    X, target = lag_matrix(dy, p)
    n = len(target)
    s = css(params, dy, p)
    return -0.5 * n * math.log(2 * math.pi * sigma2) - s / (2.0 * sigma2)


def numerical_hessian(f, x, steps) -> np.ndarray:
    """Central-difference Hessian of ``f`` at ``x`` with per-coordinate ``steps``."""
    x = np.asarray(x, dtype=np.float64)
    h = np.asarray(steps, dtype=np.float64)
    k = len(x)
    H = np.empty((k, k))

    def at(i, si, j, sj):
        z = x.copy()
        z[i] += si * h[i]
        z[j] += sj * h[j]
        return f(z)

    for i in range(k):
        for j in range(i, k):
            val = (at(i, 1, j, 1) - at(i, 1, j, -1) - at(i, -1, j, 1) + at(i, -1, j, -1)) / (4 * h[i] * h[j])
            H[i, j] = H[j, i] = val
    return H


def ar_roots(phi) -> np.ndarray:
    """Roots of ``1 - phi_1 z - ... - phi_p z^p`` via the companion matrix."""
    phi = np.asarray(phi, dtype=np.float64)
    p = len(phi)
    if p == 0 or np.all(phi == 0.0):
        return np.array([], dtype=complex)
    comp = np.zeros((p, p))
    comp[0, :] = phi
    comp[1:, :-1] = np.eye(p - 1)
    eig = np.linalg.eigvals(comp)
    roots = []
    for z in 1.0 / eig[np.abs(eig) > 0]:
        # real roots get a negative-zero imaginary part: frequency 0 or -0.5
        if abs(z.imag) <= 1e-12 * abs(z):
            z = complex(z.real, -0.0)
        roots.append(z)
    roots = np.array(roots, dtype=complex)
    order = np.lexsort((roots.imag, np.abs(roots)))
    return roots[order]


def root_frequencies(roots) -> np.ndarray:
    return np.array([math.atan2(z.imag, z.real) / (2 * math.pi) for z in roots])


def information_criteria(llf: float, k: int, n: int):
    """``(AIC, BIC, HQIC)`` for ``k`` estimated parameters and ``n`` observations."""
    return (-2 * llf + 2 * k,
            -2 * llf + k * math.log(n),
            -2 * llf + 2 * k * math.log(math.log(n)))


def fit_arima(closes, p: int, max_iter: int = 500, tol: float = 1e-6, dates=None) -> ArimaFit:
    """Fit ARIMA(p, 1, 0) to a level series."""
    y = np.asarray(getattr(closes, "close", closes), dtype=np.float64)
    if dates is None and hasattr(closes, "dates"):
        dates = closes.dates
    if p < 1:
        raise ValueError("p must be >= 1")
    dy = np.diff(y)
    n_obs = len(dy)
    if n_obs - p < 2 * (p + 2):
        raise TooShort(f"{len(y)} levels are too few for an AR({p}) on differences")
    X, target = lag_matrix(dy, p)
    n_eff = len(target)

    beta, *_ = np.linalg.lstsq(X, target, rcond=None)
    XtX = X.T @ X
    scale = np.sqrt(np.diag(XtX))
    it = 0
    while True:
        resid = target - X @ beta
        rnorm = math.sqrt(float(resid @ resid))
        if rnorm == 0.0:
            grad_norm = 0.0
            break
        # cosine between each regressor and the residual vector
        grad_norm = float(np.max(np.abs(X.T @ resid) / (scale * rnorm)))
        if grad_norm < tol:
            break
        if it >= max_iter:
            raise NonConvergence(f"gradient norm {grad_norm:.3g} after {it} iterations")
        beta = beta + np.linalg.solve(XtX, X.T @ resid)
        it += 1

    ssr = float(resid @ resid)
    sigma2 = ssr / n_eff
    if sigma2 == 0.0:
        raise NonConvergence("residual variance is zero; the fit is degenerate")
    llf = -0.5 * n_eff * (math.log(2 * math.pi * sigma2) + 1.0)

    def negll(theta):
        return -loglike(theta[:-1], theta[-1], dy, p)

    # steps of 1e-3 standard errors keep rounding noise far below the curvature
    approx_se = np.sqrt(np.concatenate((sigma2 * np.diag(np.linalg.inv(XtX)), [2.0 * sigma2 ** 2 / n_eff])))
    H = numerical_hessian(negll, np.concatenate((beta, [sigma2])), 1e-3 * approx_se)
    cov = np.linalg.inv(H)
    se = np.sqrt(np.diag(cov)[:-1])
    z = beta / se
    pv = np.array([2.0 * (1.0 - norm_cdf(abs(v))) for v in z])

    aic, bic, hqic = information_criteria(llf, p + 2, n_obs)

    sample = ("", "")
    if dates is not None and len(dates) == len(y):
        d = np.asarray(dates, dtype="datetime64[D]")
        sample = (str(d[1]), str(d[-1]))
    return ArimaFit(p=p, d=1, q=0, const=float(beta[0]), ar_coeffs=beta[1:].copy(), std_errs=se,
                    z_stats=z, p_values=pv, sigma=math.sqrt(sigma2), log_likelihood=llf,
                    aic=aic, bic=bic, hqic=hqic, n_obs=n_obs, n_eff=n_eff,
                    roots=ar_roots(beta[1:]), css=ssr, grad_norm=grad_norm, iterations=it,
                    sample=sample)


def psi_weights(phi, h: int) -> np.ndarray:
    """MA(inf) weights psi_0..psi_{h-1} of the AR polynomial on differences."""
    phi = np.asarray(phi, dtype=np.float64)
    psi = np.zeros(h)
    if h:
        psi[0] = 1.0
    for j in range(1, h):
        psi[j] = sum(phi[i - 1] * psi[j - i] for i in range(1, min(j, len(phi)) + 1))
    return psi


@dataclass(frozen=True)
class Forecast:
    mean: np.ndarray
    stderr: np.ndarray

    def lower(self, z: float = Z_975) -> np.ndarray:
        return self.mean - z * self.stderr

    def upper(self, z: float = Z_975) -> np.ndarray:
        return self.mean + z * self.stderr

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write("step,forecast,stderr,lower_95,upper_95\n")
        lo, hi = self.lower(), self.upper()
        for k in range(len(self.mean)):
            out.write(f"{k + 1},{self.mean[k]:.4f},{self.stderr[k]:.4f},{lo[k]:.4f},{hi[k]:.4f}\n")
        return out.getvalue()


def forecast(fit: ArimaFit, last_values, horizon: int) -> Forecast:
    """Level forecasts with future shocks set to zero.

    ``stderr[k-1] = sigma * sqrt(sum_{j<k} Psi_j^2)`` where ``Psi`` are the
    MA weights of the level process (cumulated difference weights).
    """
    y = np.asarray(last_values, dtype=np.float64)
    p = fit.p
    if len(y) < p + 1:
        raise InsufficientHistory(f"need {p + 1} closes, got {len(y)}")
    hist = list(np.diff(y)[-p:])
    level = float(y[-1])
    mean = np.empty(horizon)
    for k in range(horizon):
        d = fit.const + sum(fit.ar_coeffs[i] * hist[-1 - i] for i in range(p))
        hist.append(d)
        level += d
        mean[k] = level
    level_psi = np.cumsum(psi_weights(fit.ar_coeffs, horizon))
    stderr = fit.sigma * np.sqrt(np.cumsum(level_psi ** 2))
    return Forecast(mean, stderr)


def arima_report(fit: ArimaFit) -> str:
    """Render the three-block summary: header, coefficients, roots."""
    w = 78
    rule = "=" * w
    thin = "-" * w
    names = ["const"] + [f"ar.L{i}.{fit.dep_name}" for i in range(1, fit.p + 1)]
    params = fit.params
    lines = ["ARIMA Model Results".center(w), rule]

    def pair(lk, lv, rk, rv):
        return f"{lk:<16}{lv:>22}   {rk:<20}{rv:>17}"

    lines.append(pair("Dep. Variable:", fit.dep_name, "No. Observations:", str(fit.n_obs)))
    lines.append(pair("Model:", f"ARIMA({fit.p}, {fit.d}, {fit.q})", "Log Likelihood", f"{fit.log_likelihood:.3f}"))
    lines.append(pair("Method:", "css", "S.D. of innovations", f"{fit.sigma:.3f}"))
    lines.append(pair("Sample:", fit.sample[0], "AIC", f"{fit.aic:.3f}"))
    lines.append(pair("", f"- {fit.sample[1]}" if fit.sample[1] else "", "BIC", f"{fit.bic:.3f}"))
    lines.append(pair("", "", "HQIC", f"{fit.hqic:.3f}"))
    lines.append(rule)
    lines.append(f"{'':<20}{'coef':>10}{'std err':>10}{'z':>10}{'P>|z|':>10}{'[0.025':>10}{'0.975]':>10}")
    lines.append(thin)
    for name, b, se, z, pv in zip(names, params, fit.std_errs, fit.z_stats, fit.p_values):
        lo, hi = b - Z_975 * se, b + Z_975 * se
        lines.append(f"{name:<20}{b:>10.4f}{se:>10.4f}{z:>10.4f}{pv:>10.4f}{lo:>10.4f}{hi:>10.4f}")
    lines.append(rule)
    lines.append("Roots".center(w))
    lines.append(rule)
    lines.append(f"{'':<10}{'Real':>15}{'Imaginary':>18}{'Modulus':>15}{'Frequency':>15}")
    lines.append(thin)
    for i, z in enumerate(fit.roots, start=1):
        freq = math.atan2(z.imag, z.real) / (2 * math.pi)
        sign = "-" if math.copysign(1.0, z.imag) < 0 else "+"
        imag = f"{sign}{abs(z.imag):.4f}j"
        lines.append(f"{'AR.' + str(i):<10}{z.real:>15.4f}{imag:>18}{abs(z):>15.4f}{freq:>15.4f}")
    lines.append(thin)
    return "\n".join(lines) + "\n"
