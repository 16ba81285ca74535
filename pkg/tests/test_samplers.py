"""Random-walk Metropolis, MALA, leapfrog, and HMC kernels."""

import math

import numpy as np
import pytest

from extremefit import (
    DomainError,
    EvdFamily,
    InitializationError,
    ModelSpec,
    ParamTriple,
    RngState,
    Target,
    central_diff_grad,
    default_priors,
    ess,
    hmc,
    leapfrog,
    mala,
    mh_random_walk,
    posterior_target,
    sample,
)

ACC_DLOGPOST_MINUS2_T1 = 0.1353352832366127  # exp(-2)
ACC_DLOGPOST_MINUS2_T2 = 0.36787944117144233  # exp(-1)


def std_normal_target():
    return Target(
        log_post=lambda th: -0.5 * float(th @ th),
        grad_log_post=lambda th: -th,
    )


def correlated_gaussian_target(rho=0.5):
    cov = np.array([[1.0, rho], [rho, 1.0]])
    prec = np.linalg.inv(cov)
    return Target(
        log_post=lambda th: -0.5 * float(th @ prec @ th),
        grad_log_post=lambda th: -(prec @ th),
    ), cov


class ScriptedRng:
    """Deterministic draw script for pinning acceptance arithmetic."""

    def __init__(self, normals, uniforms):
        self._normals = list(normals)
        self._uniforms = list(uniforms)
        self.seed = -1
        self.stream_id = -1

    def normals(self, size):
        return np.array([self._normals.pop(0) for _ in range(size)])

    def normal(self):
        return self._normals.pop(0)

    def uniform(self):
        return self._uniforms.pop(0)

    def uniforms(self, size):
        return np.array([self._uniforms.pop(0) for _ in range(size)])


class TestRandomWalk:
    @pytest.mark.parametrize("temp", [0.5, 1.0, 3.0, 10.0])
    def test_zero_delta_always_accepts(self, temp):
        target = Target(log_post=lambda th: 0.0)
        chain = mh_random_walk(target, 500, [0.0], [1.0], T=temp,
                               rng=RngState(1, 0), burn_in=0)
        assert chain.acceptance_rate == 1.0

    def test_acceptance_threshold_tempered(self):
        # log_post drops by exactly 2 per unit step; scripted draws probe
        # both sides of the acceptance threshold exp(-2/T).
        target = Target(log_post=lambda th: -2.0 * float(th[0]))
        chain = mh_random_walk(
            target, 2, [0.0], [1.0], T=1.0, burn_in=0,
            rng=ScriptedRng([1.0, 1.0],
                            [ACC_DLOGPOST_MINUS2_T1 - 1e-9,
                             ACC_DLOGPOST_MINUS2_T1 + 1e-9]),
        )
        assert chain.samples[0, 0] == 1.0  # accepted
        assert chain.samples[1, 0] == 1.0  # rejected, state retained
        assert chain.acceptance_rate == 0.5
        chain = mh_random_walk(
            target, 2, [0.0], [1.0], T=2.0, burn_in=0,
            rng=ScriptedRng([1.0, 1.0],
                            [ACC_DLOGPOST_MINUS2_T2 - 1e-9,
                             ACC_DLOGPOST_MINUS2_T2 + 1e-9]),
        )
        assert chain.samples[0, 0] == 1.0
        assert chain.samples[1, 0] == 1.0
        assert chain.acceptance_rate == 0.5

    def test_standard_normal_moments(self):
        chain = mh_random_walk(std_normal_target(), 100_000, [0.0], [2.4],
                               rng=RngState(5, 0))
        x = chain.samples[:, 0]
        assert abs(x.mean()) < 0.02
        assert abs(x.var() - 1.0) < 0.05

    def test_infinite_start(self):
        target = Target(log_post=lambda th: -math.inf)
        with pytest.raises(InitializationError):
            mh_random_walk(target, 10, [0.0], [1.0], rng=RngState(1, 0))

    def test_shapes_and_metadata(self):
        chain = mh_random_walk(std_normal_target(), 50, [0.0, 0.0], [1.0, 1.0],
                               rng=RngState(2, 3), burn_in=10, thin=3)
        assert chain.samples.shape == (50, 2)
        assert chain.burn_in == 10 and chain.thin == 3
        assert chain.sampler_tag == "rw"
        assert (chain.seed, chain.stream_id) == (2, 3)

    def test_default_burn_in_is_quarter(self):
        chain = mh_random_walk(std_normal_target(), 100, [0.0, 0.0], [1.0, 1.0],
                               rng=RngState(2, 0))
        assert chain.burn_in == 25

    def test_deterministic(self):
        a = mh_random_walk(std_normal_target(), 200, [0.0], [1.0], rng=RngState(9, 4))
        b = mh_random_walk(std_normal_target(), 200, [0.0], [1.0], rng=RngState(9, 4))
        assert np.array_equal(a.samples, b.samples)
        assert a.acceptance_rate == b.acceptance_rate

    def test_bounded_support_never_stores_infinite(self):
        def lp(th):
            return 0.0 if abs(th[0]) <= 1.0 else -math.inf

        chain = mh_random_walk(Target(log_post=lp), 2000, [0.0], [1.5],
                               rng=RngState(3, 0))
        assert np.all(np.abs(chain.samples) <= 1.0)

    def test_invalid_args(self):
        t = std_normal_target()
        with pytest.raises(DomainError):
            mh_random_walk(t, 10, [0.0], [1.0], T=0.0, rng=RngState(0, 0))
        with pytest.raises(DomainError):
            mh_random_walk(t, 10, [0.0], [-1.0], rng=RngState(0, 0))
        with pytest.raises(DomainError):
            mh_random_walk(t, 10, [0.0], [1.0], thin=0, rng=RngState(0, 0))

    def test_stationarity_from_equilibrium_start(self):
        start = RngState(40, 0).normal()
        chain = mh_random_walk(std_normal_target(), 1000, [start], [2.4],
                               rng=RngState(41, 0), burn_in=0)
        x = chain.samples[:, 0]
        z = abs(x.mean()) / (x.std() / math.sqrt(ess(chain, 0)))
        assert z < 4.0


class TestMala:
    def test_zero_gradient_keeps_proposal_at_state(self):
        # at the mode the drift vanishes; with scripted z=0 the proposal
        # equals the current state exactly
        chain = mala(std_normal_target(), 1, [0.0], [0.5], burn_in=0,
                     rng=ScriptedRng([0.0], [0.5]))
        assert chain.samples[0, 0] == 0.0
        assert chain.acceptance_rate == 1.0

    def test_drift_is_tempered_gradient_times_tau(self):
        # Normal(3,1) target at theta=0: drift tau*3 with tau = step^2/2
        target = Target(
            log_post=lambda th: -0.5 * float((th[0] - 3.0) ** 2),
            grad_log_post=lambda th: np.array([-(th[0] - 3.0)]),
        )
        step = 0.5
        chain = mala(target, 1, [0.0], [step], burn_in=0,
                     rng=ScriptedRng([0.0], [0.5]))
        assert chain.samples[0, 0] == pytest.approx((step**2 / 2.0) * 3.0, abs=1e-15)

    def test_standard_normal_variance(self):
        chain = mala(std_normal_target(), 100_000, [0.0], [1.2], rng=RngState(6, 0))
        x = chain.samples[:, 0]
        assert abs(x.mean()) < 0.02
        assert abs(x.var() - 1.0) < 0.05

    def test_requires_gradient(self):
        with pytest.raises(DomainError):
            mala(Target(log_post=lambda th: 0.0), 10, [0.0], [1.0], rng=RngState(0, 0))

    def test_deterministic(self):
        a = mala(std_normal_target(), 200, [0.3], [0.8], rng=RngState(11, 2))
        b = mala(std_normal_target(), 200, [0.3], [0.8], rng=RngState(11, 2))
        assert np.array_equal(a.samples, b.samples)

    def test_nonfinite_gradient_rejects_and_counts(self):
        # gradient explodes outside |theta| < 1 while log_post stays finite
        def bad_grad(th):
            return np.array([math.nan]) if abs(th[0]) > 1.0 else -th

        target = Target(log_post=lambda th: -0.5 * float(th @ th), grad_log_post=bad_grad)
        chain = mala(target, 400, [0.0], [3.0], rng=RngState(12, 0), burn_in=0)
        assert np.all(np.abs(chain.samples) <= 1.0)
        assert chain.acceptance_rate < 1.0


class TestLeapfrog:
    def test_reversibility(self):
        target, _ = correlated_gaussian_target()
        q0 = np.array([0.3, -0.8])
        p0 = np.array([1.1, 0.4])
        q1, p1, d1 = leapfrog(target, q0, p0, 0.2, 25, [1.0, 1.0])
        q2, p2, d2 = leapfrog(target, q1, -p1, 0.2, 25, [1.0, 1.0])
        assert not d1 and not d2
        assert np.max(np.abs(q2 - q0)) < 1e-10
        assert np.max(np.abs(p2 + p0)) < 1e-10

    def test_energy_error_second_order(self):
        target = std_normal_target()

        def energy_error(eps, total_time=3.0):
            steps = int(round(total_time / eps))
            q = np.array([1.3, -0.4])
            p = np.array([0.6, 0.9])
            h0 = -target.log_post(q) + 0.5 * float(p @ p)
            q1, p1, _ = leapfrog(target, q, p, eps, steps, [1.0, 1.0])
            return abs(-target.log_post(q1) + 0.5 * float(p1 @ p1) - h0)

        ratio = energy_error(0.2) / energy_error(0.1)
        assert 3.0 <= ratio <= 5.0

    def test_fixed_point(self):
        # zero momentum at the mode (zero gradient) stays put
        q, p, diverged = leapfrog(std_normal_target(), [0.0, 0.0], [0.0, 0.0],
                                  0.3, 10, [1.0, 1.0])
        assert not diverged
        assert np.all(q == 0.0) and np.all(p == 0.0)

    def test_divergence_flag(self):
        target = Target(
            log_post=lambda th: 0.0,
            grad_log_post=lambda th: np.array([math.nan] * len(th)),
        )
        _, _, diverged = leapfrog(target, [0.0], [1.0], 0.1, 5, [1.0])
        assert diverged


class TestHmc:
    def test_tiny_step_accepts_everything(self):
        chain = hmc(std_normal_target(), 2000, [0.0, 0.0], eps=1e-4, n_leapfrog=5,
                    mass_diag=[1.0, 1.0], rng=RngState(7, 0))
        assert chain.acceptance_rate > 0.999

    def test_correlated_gaussian_moments(self):
        target, cov = correlated_gaussian_target()
        chain = hmc(target, 30_000, [0.0, 0.0], eps=0.6, n_leapfrog=5,
                    mass_diag=[1.0, 1.0], rng=RngState(8, 0))
        means = chain.samples.mean(axis=0)
        sample_cov = np.cov(chain.samples.T, ddof=0)
        assert np.max(np.abs(means)) < 0.03
        assert np.max(np.abs(sample_cov - cov)) < 0.05

    def test_single_step_matches_mala_acceptance(self):
        target = std_normal_target()
        step = 0.9
        ch_h = hmc(target, 20_000, [0.0], eps=step, n_leapfrog=1,
                   mass_diag=[1.0], rng=RngState(14, 0))
        ch_m = mala(target, 20_000, [0.0], [step], rng=RngState(15, 0))
        assert abs(ch_h.acceptance_rate - ch_m.acceptance_rate) < 0.05

    def test_deterministic(self):
        a = hmc(std_normal_target(), 300, [0.0], eps=0.5, n_leapfrog=4,
                mass_diag=[1.0], rng=RngState(16, 1))
        b = hmc(std_normal_target(), 300, [0.0], eps=0.5, n_leapfrog=4,
                mass_diag=[1.0], rng=RngState(16, 1))
        assert np.array_equal(a.samples, b.samples)

    def test_invalid_args(self):
        t = std_normal_target()
        with pytest.raises(DomainError):
            hmc(t, 10, [0.0], eps=0.0, n_leapfrog=5, rng=RngState(0, 0))
        with pytest.raises(DomainError):
            hmc(t, 10, [0.0], eps=0.1, n_leapfrog=0, rng=RngState(0, 0))
        with pytest.raises(DomainError):
            hmc(t, 10, [0.0], eps=0.1, n_leapfrog=5, mass_diag=[-1.0],
                rng=RngState(0, 0))


class TestTemperature:
    """T enters acceptance and gradients as one consistent tempered target.

    A standard normal tempered with T has variance T, so the sampled
    variance pins the 1/T scaling in both places at once.
    """

    def test_rw_tempered_variance(self):
        chain = mh_random_walk(std_normal_target(), 60_000, [0.0], [4.0], T=4.0,
                               rng=RngState(18, 0))
        assert abs(chain.samples[:, 0].var() - 4.0) < 0.3

    def test_mala_tempered_variance(self):
        chain = mala(std_normal_target(), 60_000, [0.0], [2.2], T=4.0,
                     rng=RngState(19, 0))
        assert abs(chain.samples[:, 0].var() - 4.0) < 0.3

    def test_hmc_tempered_variance(self):
        chain = hmc(std_normal_target(), 30_000, [0.0], eps=1.0, n_leapfrog=5,
                    mass_diag=[0.25], T=4.0, rng=RngState(20, 0))
        assert abs(chain.samples[:, 0].var() - 4.0) < 0.3

    def test_target_temperature_field_used_when_t_omitted(self):
        target = Target(log_post=lambda th: -0.5 * float(th @ th),
                        grad_log_post=lambda th: -th, temperature=4.0)
        chain = mh_random_walk(target, 60_000, [0.0], [4.0], rng=RngState(21, 0))
        assert abs(chain.samples[:, 0].var() - 4.0) < 0.3


class TestPosteriorTarget:
    def test_combines_likelihood_and_prior(self):
        data = sample(EvdFamily.GEV, ParamTriple(10, 5, 0), RngState(22, 0), size=200)
        spec = ModelSpec(data=data, covariates=None, config=(0, 0, 0),
                         family=EvdFamily.GEV)
        priors = default_priors(spec)
        target = posterior_target(spec, priors)
        theta = np.array([10.0, 5.0, 0.05])
        fd = central_diff_grad(target.log_post, theta)
        assert np.allclose(target.grad_log_post(theta), fd, rtol=1e-5, atol=1e-5)

    def test_outside_support_is_minus_inf_and_nan_gradient(self):
        data = np.array([0.0, 1.0, 2.0, 3.0])
        spec = ModelSpec(data=data, covariates=None, config=(0, 0, 0),
                         family=EvdFamily.GEV)
        priors = default_priors(spec)
        target = posterior_target(spec, priors)
        bad = np.array([0.0, 1.0, -0.6])  # upper endpoint below the data
        assert target.log_post(bad) == -math.inf
        assert np.all(np.isnan(target.grad_log_post(bad)))
