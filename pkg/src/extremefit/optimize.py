"""Maximum-likelihood fitting via a derivative-free simplex search.

The negative log-likelihood has hard +inf cliffs at the support boundary,
which rules out naive quasi-Newton steps; a Nelder-Mead simplex with
out-of-bounds vertices scored +inf handles the box constraints without any
reparameterization. Box bounds themselves are inferred from a stationary
L-moment fit when not supplied.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, FitError, InitializationError
from .lmoments import stationary_estimate
from .model import ModelSpec, neg_log_likelihood, param_dim
from .numerics import RngState

_JITTER_SEED = 202406


@dataclass
class Bounds:
    """Elementwise box lo < hi; +-inf entries leave a side unconstrained."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        self.lo = np.asarray(self.lo, dtype=float)
        self.hi = np.asarray(self.hi, dtype=float)
        if self.lo.shape != self.hi.shape:
            raise DomainError("bounds lo/hi must have equal length")
        if not np.all(self.lo < self.hi):
            raise DomainError("bounds require lo < hi elementwise")

    def contains(self, x: np.ndarray) -> bool:
        return bool(np.all(x >= self.lo) and np.all(x <= self.hi))

    @classmethod
    def unbounded(cls, dim: int) -> "Bounds":
        return cls(np.full(dim, -np.inf), np.full(dim, np.inf))


@dataclass
class FitResult:
    theta_hat: np.ndarray
    nll_min: float
    converged: bool
    n_evals: int
    std_errors: np.ndarray | None = None


def nelder_mead(f, x0, bounds: Bounds | None = None, tol: float = 1e-8,
                max_iter: int | None = None) -> FitResult:
    """Minimize f with the standard reflect/expand/contract/shrink simplex.

    Coefficients (1, 2, 0.5, 0.5). The initial simplex perturbs coordinate i
    of x0 by max(0.05*|x0_i|, 0.01); vertices outside the bounds evaluate to
    +inf. Converged once the simplex value spread drops below tol AND the
    simplex has geometrically collapsed (diameter below 1e-5 relative to the
    best point) - the spread test alone can fire while vertices straddle the
    minimum symmetrically - or once the diameter falls below 1e-10 outright.
    Hitting max_iter returns the best point with converged=False.
    """
    x0 = np.asarray(x0, dtype=float)
    dim = x0.size
    if max_iter is None:
        max_iter = 400 * dim
    if bounds is None:
        bounds = Bounds.unbounded(dim)
    if not bounds.contains(x0):
        raise InitializationError("x0 lies outside the bounds")

    evals = 0

    def fx(x):
        nonlocal evals
        evals += 1
        if not bounds.contains(x):
            return math.inf
        v = f(x)
        return v if math.isfinite(v) else math.inf

    f0 = fx(x0)
    if not math.isfinite(f0):
        raise InitializationError("objective is not finite at x0")

    verts = [x0]
    for i in range(dim):
        step = max(0.05 * abs(x0[i]), 0.01)
        v = x0.copy()
        v[i] += step
        if not bounds.contains(v):
            v[i] = x0[i] - step  # step into the box when the +side is outside
        verts.append(v)
    simplex = np.array(verts)
    values = np.array([f0] + [fx(v) for v in simplex[1:]])

    converged = False
    for _ in range(max_iter):
        order = np.argsort(values, kind="stable")
        simplex = simplex[order]
        values = values[order]
        spread = values[-1] - values[0]
        diameter = np.max(np.linalg.norm(simplex[1:] - simplex[0], axis=1))
        collapsed = diameter <= 1e-5 * (1.0 + np.linalg.norm(simplex[0]))
        if (math.isfinite(spread) and spread < tol and collapsed) or diameter < 1e-10:
            converged = True
            break

        centroid = simplex[:-1].mean(axis=0)
        worst = simplex[-1]
        reflected = centroid + (centroid - worst)
        f_r = fx(reflected)
        if f_r < values[0]:
            expanded = centroid + 2.0 * (centroid - worst)
            f_e = fx(expanded)
            if f_e < f_r:
                simplex[-1], values[-1] = expanded, f_e
            else:
                simplex[-1], values[-1] = reflected, f_r
        elif f_r < values[-2]:
            simplex[-1], values[-1] = reflected, f_r
        else:
            if f_r < values[-1]:
                contracted = centroid + 0.5 * (reflected - centroid)
                f_c = fx(contracted)
                better = f_c <= f_r
            else:
                contracted = centroid + 0.5 * (worst - centroid)
                f_c = fx(contracted)
                better = f_c < values[-1]
            if better:
                simplex[-1], values[-1] = contracted, f_c
            else:
                for i in range(1, dim + 1):
                    simplex[i] = simplex[0] + 0.5 * (simplex[i] - simplex[0])
                    values[i] = fx(simplex[i])

    order = np.argsort(values, kind="stable")
    simplex = simplex[order]
    values = values[order]
    return FitResult(
        theta_hat=simplex[0].copy(),
        nll_min=float(values[0]),
        converged=converged,
        n_evals=evals,
    )


def infer_bounds(spec: ModelSpec) -> Bounds:
    """Data-driven box bounds from the stationary L-moment fit.

    Location intercept within +-10 sigma of the L-moment location, scale in
    (1e-8 sigma, 100 sigma) (log-scale intercept +-5 around ln sigma when
    covariates enter), shape intercept in [-0.5, 0.5], and every covariate
    slope within +-10 / std(column).
    """
    est = stationary_estimate(spec.family, spec.data)
    a, b, c = spec.config
    lo: list[float] = []
    hi: list[float] = []

    def slope_bounds(which: int):
        for col in spec.columns_for(which):
            std = max(float(np.std(spec.covariates[:, col])), 1e-6)
            lo.append(-10.0 / std)
            hi.append(10.0 / std)

    lo.append(est.loc - 10.0 * est.scale)
    hi.append(est.loc + 10.0 * est.scale)
    slope_bounds(0)
    if b == 0:
        lo.append(1e-8 * est.scale)
        hi.append(100.0 * est.scale)
    else:
        lo.append(math.log(est.scale) - 5.0)
        hi.append(math.log(est.scale) + 5.0)
        slope_bounds(1)
    lo.append(-0.5)
    hi.append(0.5)
    slope_bounds(2)
    return Bounds(np.array(lo), np.array(hi))


def default_start(spec: ModelSpec) -> np.ndarray:
    """Stationary L-moment estimates with zero covariate slopes."""
    est = stationary_estimate(spec.family, spec.data)
    a, b, c = spec.config
    theta = [est.loc] + [0.0] * a
    theta.append(est.scale if b == 0 else math.log(est.scale))
    theta.extend([0.0] * b)
    theta.append(min(max(est.shape, -0.45), 0.45))
    theta.extend([0.0] * c)
    return np.array(theta)


def _clip_into(x: np.ndarray, bounds: Bounds) -> np.ndarray:
    out = x.copy()
    span = np.where(
        np.isfinite(bounds.hi - bounds.lo), bounds.hi - bounds.lo, 1.0
    )
    lo = np.where(np.isfinite(bounds.lo), bounds.lo + 1e-6 * span, -np.inf)
    hi = np.where(np.isfinite(bounds.hi), bounds.hi - 1e-6 * span, np.inf)
    return np.clip(out, lo, hi)


def _hessian_std_errors(spec: ModelSpec, theta: np.ndarray) -> np.ndarray | None:
    """Best-effort standard errors from the central-difference nll Hessian."""
    dim = theta.size
    h = np.maximum(1e-4, 1e-3 * np.abs(theta))
    f0 = neg_log_likelihood(spec, theta)
    hess = np.empty((dim, dim))

    def f_at(offset):
        return neg_log_likelihood(spec, theta + offset)

    for i in range(dim):
        ei = np.zeros(dim)
        ei[i] = h[i]
        fp = f_at(ei)
        fm = f_at(-ei)
        if not (math.isfinite(fp) and math.isfinite(fm)):
            return None
        hess[i, i] = (fp - 2.0 * f0 + fm) / h[i] ** 2
        for j in range(i + 1, dim):
            ej = np.zeros(dim)
            ej[j] = h[j]
            fpp = f_at(ei + ej)
            fpm = f_at(ei - ej)
            fmp = f_at(-ei + ej)
            fmm = f_at(-ei - ej)
            if not all(math.isfinite(v) for v in (fpp, fpm, fmp, fmm)):
                return None
            hess[i, j] = hess[j, i] = (fpp - fpm - fmp + fmm) / (4.0 * h[i] * h[j])

    try:
        eigvals = np.linalg.eigvalsh(hess)
        if np.any(eigvals <= 0):
            return None
        cov = np.linalg.inv(hess)
    except np.linalg.LinAlgError:
        return None
    diag = np.diag(cov)
    if np.any(diag <= 0) or not np.all(np.isfinite(diag)):
        return None
    return np.sqrt(diag)


def fit_mle(spec: ModelSpec, x0=None, bounds: Bounds | None = None,
            tol: float = 1e-8, max_iter: int | None = None) -> FitResult:
    """Maximum-likelihood fit of the packed parameter vector.

    x0 defaults to the stationary L-moment estimates with zero slopes and
    bounds to infer_bounds(spec). If the nll is infinite at the start, up
    to 20 deterministic fallback jitters (shrinking the shape, inflating
    the scale) are tried before giving up.
    """
    if bounds is None:
        bounds = infer_bounds(spec)
    dim = param_dim(spec)
    if bounds.lo.size != dim:
        raise DomainError(f"bounds have length {bounds.lo.size}, expected {dim}")
    if x0 is None:
        x0 = default_start(spec)
    x0 = _clip_into(np.asarray(x0, dtype=float), bounds)

    def nll(theta):
        return neg_log_likelihood(spec, theta)

    start = x0
    if not math.isfinite(nll(start)):
        a, b, _ = spec.config
        scale_idx = a + 1
        shape_idx = a + b + 2
        found = False
        for attempt in range(20):
            cand = x0.copy()
            cand[shape_idx] *= 0.5 ** (attempt + 1)
            if b == 0:
                cand[scale_idx] *= 1.25 ** (attempt + 1)
            else:
                cand[scale_idx] += 0.25 * (attempt + 1)
            rng = RngState(_JITTER_SEED, attempt)
            cand += 0.05 * rng.normals(dim) * np.maximum(np.abs(x0), 0.1)
            cand = _clip_into(cand, bounds)
            if math.isfinite(nll(cand)):
                start = cand
                found = True
                break
        if not found:
            raise FitError("no finite starting point found after 20 jitter attempts")

    result = nelder_mead(nll, start, bounds=bounds, tol=tol, max_iter=max_iter)
    result.std_errors = _hessian_std_errors(spec, result.theta_hat)
    return result


def bounds_to_json(bounds: Bounds) -> dict:
    return {"lo": bounds.lo.tolist(), "hi": bounds.hi.tolist()}


def bounds_from_json(obj) -> Bounds:
    if not isinstance(obj, dict) or "lo" not in obj or "hi" not in obj:
        raise DomainError('bounds file must be a JSON object {"lo": [...], "hi": [...]}')

    def side(values, sign):
        out = []
        for v in values:
            out.append(sign * math.inf if v is None else float(v))
        return np.array(out)

    return Bounds(side(obj["lo"], -1.0), side(obj["hi"], +1.0))


def load_bounds(path) -> Bounds:
    with open(path, "r", encoding="utf-8") as fh:
        return bounds_from_json(json.load(fh))
