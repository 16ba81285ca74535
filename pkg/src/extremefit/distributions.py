"""GEV and GPD log-densities, quantiles, simulation, and parameter gradients.

Shape convention
----------------
The shape parameter ``xi`` follows Coles: the support requires
``1 + xi * (x - loc) / scale > 0``, so xi > 0 means a heavy upper tail for
the GEV. Note that some software (e.g. scipy's genextreme) parameterizes
the shape with the opposite sign.

Within ``|xi| < XI_EPS`` the exact Gumbel / exponential limit expressions
are used to avoid cancellation in ``t**(-1/xi)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DomainError

XI_EPS = 1e-8


class EvdFamily(Enum):
    GEV = "gev"
    GPD = "gpd"

    @classmethod
    def parse(cls, name: str) -> "EvdFamily":
        try:
            return cls(name.strip().lower())
        except ValueError:
            raise DomainError(f"unknown distribution family {name!r}; use 'gev' or 'gpd'")


@dataclass(frozen=True)
class ParamTriple:
    """Realized (location, scale, shape) for one observation."""

    loc: float
    scale: float
    shape: float


def _check_scale(scale) -> None:
    arr = np.asarray(scale, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
        raise DomainError("scale parameter must be finite and > 0")


def logpdf_values(family: EvdFamily, x, loc, scale, shape) -> np.ndarray:
    """Vectorized log-density; -inf outside the support.

    All arguments broadcast against each other. The caller guarantees
    scale > 0 (violations raise DomainError rather than returning -inf).
    """
    _check_scale(scale)
    x, loc, scale, shape = np.broadcast_arrays(
        *(np.asarray(v, dtype=float) for v in (x, loc, scale, shape))
    )
    z = (x - loc) / scale
    out = np.full(z.shape, -np.inf)
    small = np.abs(shape) < XI_EPS

    if family is EvdFamily.GEV:
        if small.any():
            zs = z[small]
            with np.errstate(over="ignore"):
                out[small] = -np.log(scale[small]) - zs - np.exp(-zs)
        gen = ~small
        if gen.any():
            xi = shape[gen]
            zg = z[gen]
            t = 1.0 + xi * zg
            ok = t > 0
            vals = np.full(zg.shape, -np.inf)
            if ok.any():
                xio = xi[ok]
                logt = np.log1p(xio * zg[ok])
                with np.errstate(over="ignore"):
                    vals[ok] = (
                        -np.log(scale[gen][ok])
                        - (1.0 + 1.0 / xio) * logt
                        - np.exp(-logt / xio)
                    )
            out[gen] = vals
    else:
        if small.any():
            zs = z[small]
            ok = zs >= 0
            vals = np.full(zs.shape, -np.inf)
            vals[ok] = -np.log(scale[small][ok]) - zs[ok]
            out[small] = vals
        gen = ~small
        if gen.any():
            xi = shape[gen]
            zg = z[gen]
            t = 1.0 + xi * zg
            ok = (zg >= 0) & (t > 0)
            vals = np.full(zg.shape, -np.inf)
            if ok.any():
                xio = xi[ok]
                logt = np.log1p(xio * zg[ok])
                vals[ok] = -np.log(scale[gen][ok]) - (1.0 + 1.0 / xio) * logt
            out[gen] = vals
    return out


def logpdf(family: EvdFamily, x: float, p: ParamTriple) -> float:
    """Log-density at x; -inf outside the support, DomainError on scale <= 0."""
    return float(logpdf_values(family, np.array([x]), p.loc, p.scale, p.shape)[0])


def quantile_values(family: EvdFamily, p_nonexceed, loc, scale, shape) -> np.ndarray:
    """Vectorized quantile (inverse CDF) at non-exceedance probability p."""
    _check_scale(scale)
    p = np.asarray(p_nonexceed, dtype=float)
    if np.any(p <= 0) or np.any(p >= 1):
        raise DomainError("non-exceedance probability must lie strictly in (0, 1)")
    p, loc, scale, shape = np.broadcast_arrays(
        *(np.asarray(v, dtype=float) for v in (p, loc, scale, shape))
    )
    out = np.empty(p.shape)
    small = np.abs(shape) < XI_EPS
    if family is EvdFamily.GEV:
        w = -np.log(-np.log(p))  # standard Gumbel quantile
        out[small] = loc[small] + scale[small] * w[small]
        gen = ~small
        if gen.any():
            xi = shape[gen]
            out[gen] = loc[gen] + scale[gen] * np.expm1(xi * w[gen]) / xi
    else:
        w = -np.log1p(-p)  # standard exponential quantile
        out[small] = loc[small] + scale[small] * w[small]
        gen = ~small
        if gen.any():
            xi = shape[gen]
            out[gen] = loc[gen] + scale[gen] * np.expm1(xi * w[gen]) / xi
    return out


def quantile(family: EvdFamily, p_nonexceed: float, params: ParamTriple) -> float:
    """Quantile at non-exceedance probability p in (0, 1)."""
    return float(
        quantile_values(
            family, np.array([p_nonexceed]), params.loc, params.scale, params.shape
        )[0]
    )


def cdf_values(family: EvdFamily, x, loc, scale, shape) -> np.ndarray:
    """Vectorized CDF (clamped to [0, 1] outside the support)."""
    _check_scale(scale)
    x, loc, scale, shape = np.broadcast_arrays(
        *(np.asarray(v, dtype=float) for v in (x, loc, scale, shape))
    )
    z = (x - loc) / scale
    out = np.empty(z.shape)
    small = np.abs(shape) < XI_EPS
    if family is EvdFamily.GEV:
        with np.errstate(over="ignore"):
            out[small] = np.exp(-np.exp(-z[small]))
        gen = ~small
        if gen.any():
            xi = shape[gen]
            t = 1.0 + xi * z[gen]
            vals = np.where(xi > 0, 0.0, 1.0)  # below/above the finite endpoint
            ok = t > 0
            with np.errstate(over="ignore"):
                vals[ok] = np.exp(-np.exp(-np.log1p(xi[ok] * z[gen][ok]) / xi[ok]))
            out[gen] = vals
    else:
        zc = np.clip(z, 0.0, None)
        with np.errstate(over="ignore"):
            out[small] = -np.expm1(-zc[small])
        gen = ~small
        if gen.any():
            xi = shape[gen]
            t = 1.0 + xi * zc[gen]
            vals = np.ones(t.shape)  # beyond the upper endpoint when xi < 0
            ok = t > 0
            vals[ok] = -np.expm1(-np.log1p(xi[ok] * zc[gen][ok]) / xi[ok])
            out[gen] = vals
    return out


def cdf(family: EvdFamily, x: float, params: ParamTriple) -> float:
    """Cumulative distribution function at x."""
    return float(cdf_values(family, np.array([x]), params.loc, params.scale, params.shape)[0])


def sample(family: EvdFamily, params: ParamTriple, rng, size: int | None = None):
    """Inverse-CDF simulation: quantile(family, U, params) with U from rng.

    Returns a float when size is None, else an ndarray of length size.
    """
    _check_scale(params.scale)
    if size is None:
        return quantile(family, rng.uniform(), params)
    u = rng.uniforms(size)
    return quantile_values(family, u, params.loc, params.scale, params.shape)


def grad_logpdf_values(family: EvdFamily, x, loc, scale, shape):
    """Vectorized (d/dloc, d/dscale, d/dshape) of the log-density.

    Entries outside the support are returned as NaN; callers that require
    interior points must check the log-density first.
    """
    _check_scale(scale)
    x, loc, scale, shape = np.broadcast_arrays(
        *(np.asarray(v, dtype=float) for v in (x, loc, scale, shape))
    )
    s = (x - loc) / scale
    gmu = np.full(s.shape, np.nan)
    gsig = np.full(s.shape, np.nan)
    gxi = np.full(s.shape, np.nan)
    small = np.abs(shape) < XI_EPS

    if family is EvdFamily.GEV:
        if small.any():
            zs = s[small]
            sg = scale[small]
            with np.errstate(over="ignore"):
                emz = np.exp(-zs)
            gmu[small] = (1.0 - emz) / sg
            gsig[small] = (zs * (1.0 - emz) - 1.0) / sg
            gxi[small] = 0.5 * zs**2 * (1.0 - emz) - zs
        gen = ~small
        if gen.any():
            xi = shape[gen]
            sg = s[gen]
            sc = scale[gen]
            t = 1.0 + xi * sg
            ok = t > 0
            if ok.any():
                xio = xi[ok]
                so = sg[ok]
                to = t[ok]
                logt = np.log1p(xio * so)
                with np.errstate(over="ignore"):
                    u = np.exp(-logt / xio)  # t^(-1/xi)
                    u1 = np.exp(-(1.0 / xio + 1.0) * logt)  # t^(-1/xi - 1)
                core = (xio + 1.0) / to - u1
                tmp_mu = np.full(sg.shape, np.nan)
                tmp_sig = np.full(sg.shape, np.nan)
                tmp_xi = np.full(sg.shape, np.nan)
                tmp_mu[ok] = core / sc[ok]
                tmp_sig[ok] = -1.0 / sc[ok] + core * so / sc[ok]
                lt_over_xi2 = logt / xio**2
                tmp_xi[ok] = (
                    lt_over_xi2
                    - (1.0 + 1.0 / xio) * so / to
                    - u * (lt_over_xi2 - so / (xio * to))
                )
                gmu[gen] = tmp_mu
                gsig[gen] = tmp_sig
                gxi[gen] = tmp_xi
    else:
        if small.any():
            zs = s[small]
            sg = scale[small]
            inside = zs >= 0
            tmp_mu = np.full(zs.shape, np.nan)
            tmp_sig = np.full(zs.shape, np.nan)
            tmp_xi = np.full(zs.shape, np.nan)
            tmp_mu[inside] = 1.0 / sg[inside]
            tmp_sig[inside] = (zs[inside] - 1.0) / sg[inside]
            tmp_xi[inside] = 0.5 * zs[inside] ** 2 - zs[inside]
            gmu[small] = tmp_mu
            gsig[small] = tmp_sig
            gxi[small] = tmp_xi
        gen = ~small
        if gen.any():
            xi = shape[gen]
            sg = s[gen]
            sc = scale[gen]
            t = 1.0 + xi * sg
            ok = (sg >= 0) & (t > 0)
            if ok.any():
                xio = xi[ok]
                so = sg[ok]
                to = t[ok]
                logt = np.log1p(xio * so)
                core = (xio + 1.0) / to
                tmp_mu = np.full(sg.shape, np.nan)
                tmp_sig = np.full(sg.shape, np.nan)
                tmp_xi = np.full(sg.shape, np.nan)
                tmp_mu[ok] = core / sc[ok]
                tmp_sig[ok] = -1.0 / sc[ok] + core * so / sc[ok]
                tmp_xi[ok] = logt / xio**2 - (1.0 + 1.0 / xio) * so / to
                gmu[gen] = tmp_mu
                gsig[gen] = tmp_sig
                gxi[gen] = tmp_xi
    return gmu, gsig, gxi


def grad_logpdf(family: EvdFamily, x: float, p: ParamTriple) -> np.ndarray:
    """Analytic gradient of logpdf w.r.t. (loc, scale, shape) at an interior x."""
    if not np.isfinite(logpdf(family, x, p)):
        raise DomainError("x lies on or outside the support boundary")
    gmu, gsig, gxi = grad_logpdf_values(
        family, np.array([x]), p.loc, p.scale, p.shape
    )
    return np.array([gmu[0], gsig[0], gxi[0]])
