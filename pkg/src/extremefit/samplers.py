"""Random-walk Metropolis, MALA, and Hamiltonian Monte Carlo kernels.

All three target a tempered posterior: with temperature T the chain
invariant density is proportional to exp(log_post / T), and the same 1/T
scaling is applied to gradients so that drift terms and acceptance tests
describe one consistent target. T > 1 flattens the posterior for tuning,
T < 1 sharpens it.

Conventions shared by the kernels:

* ``num_samples`` counts retained draws; the chain runs
  ``burn_in + num_samples * thin`` iterations in total (burn-in defaults
  to 25% of num_samples).
* the acceptance rate counts post-burn-in proposals only, and proposals
  rejected because a trajectory diverged still count in the denominator;
* a stored sample always has finite log-posterior.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError, InitializationError
from .model import (
    ModelSpec,
    grad_neg_log_likelihood,
    neg_log_likelihood,
    param_dim,
)
from .numerics import RngState
from .priors import PriorSet, grad_log_prior, log_prior


@dataclass
class Target:
    """Log-posterior (and optional gradient) plus a tuning temperature."""

    log_post: Callable[[np.ndarray], float]
    grad_log_post: Callable[[np.ndarray], np.ndarray] | None = None
    temperature: float = 1.0


@dataclass
class Chain:
    """Retained posterior draws plus sampler metadata."""

    samples: np.ndarray
    acceptance_rate: float
    sampler_tag: str
    seed: int
    stream_id: int
    num_samples: int
    burn_in: int
    thin: int
    temperature: float


def posterior_target(spec: ModelSpec, priors: PriorSet, temperature: float = 1.0) -> Target:
    """Bundle -nll + log_prior (and its gradient) for the samplers.

    The gradient returns NaN instead of raising outside the support so
    that trajectory integrators can flag divergences and reject.
    """
    dim = param_dim(spec)

    def log_post(theta: np.ndarray) -> float:
        lp = log_prior(priors, theta)
        if lp == -math.inf:
            return -math.inf
        nll = neg_log_likelihood(spec, theta)
        if not math.isfinite(nll):
            return -math.inf
        return lp - nll

    def grad(theta: np.ndarray) -> np.ndarray:
        try:
            return grad_log_prior(priors, theta) - grad_neg_log_likelihood(spec, theta)
        except DomainError:
            return np.full(dim, np.nan)

    return Target(log_post=log_post, grad_log_post=grad, temperature=temperature)


def _setup(target, num_samples, initial_params, T, rng, burn_in, thin, scales=None):
    theta0 = np.asarray(initial_params, dtype=float).copy()
    dim = theta0.size
    temp = float(target.temperature if T is None else T)
    if temp <= 0:
        raise DomainError(f"temperature must be > 0, got {temp}")
    if int(num_samples) < 1:
        raise DomainError("num_samples must be >= 1")
    if int(thin) < 1:
        raise DomainError("thin must be >= 1")
    if burn_in is None:
        burn_in = int(num_samples) // 4
    if int(burn_in) < 0:
        raise DomainError("burn_in must be >= 0")
    if rng is None:
        rng = RngState(0, 0)
    packed_scales = None
    if scales is not None:
        packed_scales = np.broadcast_to(np.asarray(scales, dtype=float), (dim,)).astype(float)
        if np.any(packed_scales <= 0) or not np.all(np.isfinite(packed_scales)):
            raise DomainError("per-coordinate scales must be finite and > 0")
    lp0 = target.log_post(theta0)
    if not math.isfinite(lp0):
        raise InitializationError("log-posterior is not finite at the initial point")
    return theta0, dim, temp, int(num_samples), int(burn_in), int(thin), rng, packed_scales, lp0


def mh_random_walk(target: Target, num_samples: int, initial_params,
                   proposal_widths, T: float | None = None,
                   rng: RngState | None = None, burn_in: int | None = None,
                   thin: int = 1) -> Chain:
    """Random-walk Metropolis with a diagonal Gaussian proposal.

    Proposes theta' = theta + proposal_widths * z and accepts with
    probability min(1, exp((log_post' - log_post) / T)).
    """
    theta, dim, temp, num_samples, burn_in, thin, rng, widths, lp = _setup(
        target, num_samples, initial_params, T, rng, burn_in, thin, proposal_widths
    )
    log_post = target.log_post
    samples = np.empty((num_samples, dim))
    total = burn_in + num_samples * thin
    accepted = 0
    stored = 0
    for it in range(total):
        prop = theta + widths * rng.normals(dim)
        lp_prop = log_post(prop)
        u = rng.uniform()
        acc = math.log(u) < (lp_prop - lp) / temp
        if acc:
            theta, lp = prop, lp_prop
        if it >= burn_in:
            accepted += acc
            if (it - burn_in) % thin == thin - 1:
                samples[stored] = theta
                stored += 1
    return Chain(samples, accepted / (num_samples * thin), "rw",
                 rng.seed, rng.stream_id, num_samples, burn_in, thin, temp)


def mala(target: Target, num_samples: int, initial_params, step_sizes,
         T: float | None = None, rng: RngState | None = None,
         burn_in: int | None = None, thin: int = 1) -> Chain:
    """Metropolis-adjusted Langevin: gradient-drifted Gaussian proposal.

    With tempered gradient g = grad_log_post/T and tau_i = step_i^2 / 2 the
    proposal is theta'_i = theta_i + tau_i g_i + step_i z_i, corrected by
    the forward/reverse Gaussian proposal density ratio. A non-finite
    gradient at the proposal rejects it (the chain stays put) and still
    counts toward the acceptance denominator.
    """
    if target.grad_log_post is None:
        raise DomainError("mala requires a target gradient")
    theta, dim, temp, num_samples, burn_in, thin, rng, steps, lp = _setup(
        target, num_samples, initial_params, T, rng, burn_in, thin, step_sizes
    )
    grad = target.grad_log_post
    g = grad(theta)
    if not np.all(np.isfinite(g)):
        raise InitializationError("gradient is not finite at the initial point")
    gt = g / temp
    tau = 0.5 * steps**2

    samples = np.empty((num_samples, dim))
    total = burn_in + num_samples * thin
    accepted = 0
    stored = 0
    for it in range(total):
        mean_fwd = theta + tau * gt
        prop = mean_fwd + steps * rng.normals(dim)
        lp_prop = target.log_post(prop)
        u = rng.uniform()
        acc = False
        if lp_prop > -math.inf:
            g_prop = grad(prop)
            if np.all(np.isfinite(g_prop)):
                gt_prop = g_prop / temp
                mean_rev = prop + tau * gt_prop
                lq_fwd = -0.5 * float(np.sum(((prop - mean_fwd) / steps) ** 2))
                lq_rev = -0.5 * float(np.sum(((theta - mean_rev) / steps) ** 2))
                log_alpha = (lp_prop - lp) / temp + lq_rev - lq_fwd
                if math.log(u) < log_alpha:
                    theta, lp, gt = prop, lp_prop, gt_prop
                    acc = True
        if it >= burn_in:
            accepted += acc
            if (it - burn_in) % thin == thin - 1:
                samples[stored] = theta
                stored += 1
    return Chain(samples, accepted / (num_samples * thin), "mala",
                 rng.seed, rng.stream_id, num_samples, burn_in, thin, temp)


def leapfrog(target: Target, theta, momentum, eps: float, n_steps: int,
             mass_diag, T: float | None = None):
    """Leapfrog integration of Hamiltonian dynamics.

    Potential U(theta) = -log_post(theta)/T; kinetic energy uses a diagonal
    mass matrix. Returns (theta', momentum', diverged); a non-finite
    gradient or position mid-trajectory sets the divergence flag, which
    callers treat as an automatic rejection.
    """
    if target.grad_log_post is None:
        raise DomainError("leapfrog requires a target gradient")
    temp = float(target.temperature if T is None else T)
    q = np.asarray(theta, dtype=float).copy()
    p = np.asarray(momentum, dtype=float).copy()
    mass = np.broadcast_to(np.asarray(mass_diag, dtype=float), q.shape)
    if np.any(mass <= 0):
        raise DomainError("mass_diag entries must be > 0")
    inv_mass = 1.0 / mass
    grad = target.grad_log_post

    def grad_u(pos):
        g = grad(pos)
        if not np.all(np.isfinite(g)):
            return None
        return -g / temp

    g = grad_u(q)
    if g is None:
        return q, p, True
    p = p - 0.5 * eps * g
    for step in range(n_steps):
        q = q + eps * inv_mass * p
        if not np.all(np.isfinite(q)):
            return q, p, True
        g = grad_u(q)
        if g is None:
            return q, p, True
        if step < n_steps - 1:
            p = p - eps * g
    p = p - 0.5 * eps * g
    return q, p, False


def hmc(target: Target, num_samples: int, initial_params, eps: float,
        n_leapfrog: int, mass_diag=None, T: float | None = None,
        rng: RngState | None = None, burn_in: int | None = None,
        thin: int = 1) -> Chain:
    """Hamiltonian Monte Carlo with a fixed step size and path length.

    Each iteration draws momentum ~ Normal(0, M), integrates n_leapfrog
    steps of size eps, and accepts with probability
    min(1, exp(H(theta, p) - H(theta', p'))). Divergent trajectories are
    rejected and counted.
    """
    if target.grad_log_post is None:
        raise DomainError("hmc requires a target gradient")
    if eps <= 0:
        raise DomainError("eps must be > 0")
    if n_leapfrog < 1:
        raise DomainError("n_leapfrog must be >= 1")
    theta, dim, temp, num_samples, burn_in, thin, rng, mass, lp = _setup(
        target, num_samples, initial_params, T, rng, burn_in, thin,
        np.ones(1) if mass_diag is None else mass_diag,
    )
    g0 = target.grad_log_post(theta)
    if not np.all(np.isfinite(g0)):
        raise InitializationError("gradient is not finite at the initial point")
    sqrt_mass = np.sqrt(mass)
    inv_mass = 1.0 / mass
    u_cur = -lp / temp

    samples = np.empty((num_samples, dim))
    total = burn_in + num_samples * thin
    accepted = 0
    stored = 0
    for it in range(total):
        p0 = sqrt_mass * rng.normals(dim)
        q_new, p_new, diverged = leapfrog(target, theta, p0, eps, n_leapfrog, mass, T=temp)
        u = rng.uniform()
        acc = False
        if not diverged:
            lp_new = target.log_post(q_new)
            if lp_new > -math.inf:
                h0 = u_cur + 0.5 * float(np.sum(p0 * p0 * inv_mass))
                h1 = -lp_new / temp + 0.5 * float(np.sum(p_new * p_new * inv_mass))
                if math.isfinite(h1) and math.log(u) < h0 - h1:
                    theta, lp, u_cur = q_new, lp_new, -lp_new / temp
                    acc = True
        if it >= burn_in:
            accepted += acc
            if (it - burn_in) % thin == thin - 1:
                samples[stored] = theta
                stored += 1
    return Chain(samples, accepted / (num_samples * thin), "hmc",
                 rng.seed, rng.stream_id, num_samples, burn_in, thin, temp)
