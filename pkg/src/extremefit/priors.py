"""Prior specification, evaluation, gradients, and data-driven defaults.

A PriorSet holds one independent component per packed parameter, either
Normal(mean, sd) or Uniform(lo, hi). Defaults are weakly informative and
centered on the stationary L-moment fit, so the L-moment initialization
point always has finite prior density.

JSON interchange format (packing order):
    [{"kind": "normal", "a": <mean>, "b": <sd>},
     {"kind": "uniform", "a": <lo>, "b": <hi>}, ...]
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DomainError
from .lmoments import stationary_estimate
from .model import ModelSpec

_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class PriorComponent:
    """One marginal prior: kind 'normal' (a=mean, b=sd) or 'uniform' (a=lo, b=hi)."""

    kind: str
    a: float
    b: float

    def __post_init__(self):
        if self.kind not in ("normal", "uniform"):
            raise DomainError(f"unknown prior kind {self.kind!r}")
        if self.kind == "normal" and not self.b > 0:
            raise DomainError(f"normal prior requires sd > 0, got {self.b}")
        if self.kind == "uniform" and not self.a < self.b:
            raise DomainError(f"uniform prior requires lo < hi, got ({self.a}, {self.b})")


@dataclass(frozen=True)
class PriorSet:
    components: tuple[PriorComponent, ...]

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))

    def __len__(self) -> int:
        return len(self.components)

    @cached_property
    def _packed(self):
        is_normal = np.array([c.kind == "normal" for c in self.components])
        a = np.array([c.a for c in self.components])
        b = np.array([c.b for c in self.components])
        const = np.array(
            [
                -0.5 * (_LOG_2PI + 2.0 * math.log(c.b))
                if c.kind == "normal"
                else -math.log(c.b - c.a)
                for c in self.components
            ]
        )
        return is_normal, a, b, const


def default_priors(spec: ModelSpec) -> PriorSet:
    """Weakly informative priors inferred from the data and configuration.

    The stationary L-moment fit (mu, sigma, xi) anchors the intercepts;
    covariate slopes get Normal(0, 1/std(column)) so that a standardized
    covariate has a unit-scale slope prior.
    """
    est = stationary_estimate(spec.family, spec.data)
    a, b, c = spec.config
    comps: list[PriorComponent] = []

    def slope_priors(which: int) -> list[PriorComponent]:
        out = []
        for col in spec.columns_for(which):
            std = float(np.std(spec.covariates[:, col]))
            out.append(PriorComponent("normal", 0.0, 1.0 / max(std, 1e-6)))
        return out

    comps.append(
        PriorComponent("normal", est.loc, 2.0 * est.scale + 0.1 * abs(est.loc) + 1.0)
    )
    comps.extend(slope_priors(0))
    if b == 0:
        comps.append(PriorComponent("normal", est.scale, est.scale))
    else:
        comps.append(PriorComponent("normal", math.log(est.scale), 1.0))
        comps.extend(slope_priors(1))
    comps.append(PriorComponent("normal", 0.0, 0.25))
    comps.extend(slope_priors(2))
    return PriorSet(tuple(comps))


def _check_len(priors: PriorSet, theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (len(priors),):
        raise DomainError(
            f"theta length {theta.size} does not match prior count {len(priors)}"
        )
    return theta


def log_prior(priors: PriorSet, theta) -> float:
    """Sum of component log-densities; -inf outside any uniform support."""
    theta = _check_len(priors, theta)
    is_normal, a, b, const = priors._packed
    out = 0.0
    norm = is_normal
    if norm.any():
        resid = (theta[norm] - a[norm]) / b[norm]
        out += float(np.sum(const[norm] - 0.5 * resid**2))
    unif = ~norm
    if unif.any():
        inside = (theta[unif] >= a[unif]) & (theta[unif] <= b[unif])
        if not inside.all():
            return -math.inf
        out += float(np.sum(const[unif]))
    return out


def grad_log_prior(priors: PriorSet, theta) -> np.ndarray:
    """Gradient of log_prior; requires a finite log_prior at theta."""
    theta = _check_len(priors, theta)
    if not math.isfinite(log_prior(priors, theta)):
        raise DomainError("log prior is -inf at theta; gradient undefined")
    is_normal, a, b, _ = priors._packed
    grad = np.zeros_like(theta)
    grad[is_normal] = -(theta[is_normal] - a[is_normal]) / b[is_normal] ** 2
    return grad


def priors_to_json(priors: PriorSet) -> list[dict]:
    return [{"kind": c.kind, "a": c.a, "b": c.b} for c in priors.components]


def priors_from_json(obj) -> PriorSet:
    if not isinstance(obj, list):
        raise DomainError("prior file must hold a JSON array of components")
    comps = []
    for i, entry in enumerate(obj):
        try:
            comps.append(
                PriorComponent(str(entry["kind"]), float(entry["a"]), float(entry["b"]))
            )
        except (KeyError, TypeError) as exc:
            raise DomainError(f"malformed prior component at index {i}: {exc}")
    return PriorSet(tuple(comps))


def load_priors(path) -> PriorSet:
    with open(path, "r", encoding="utf-8") as fh:
        return priors_from_json(json.load(fh))
