"""Shared fixtures: a quadratic likelihood stand-in and data builders."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import pytest
from scipy.signal import fftconvolve

import specmcmc as sm


@dataclass(frozen=True)
class QuadraticTerms:
    """Likelihood stand-in whose per-frequency terms are exact quadratics.

    terms_i(theta) = c_i + g_i . delta + delta . H_i delta / 2 with
    delta = theta - center.  A second-order control variate reproduces any
    group total exactly, which is what several degeneracy tests rely on.
    """

    consts: np.ndarray
    grads: np.ndarray
    hessians: np.ndarray
    center: np.ndarray

    @property
    def n_freq(self) -> int:
        return self.consts.size

    @property
    def dim(self) -> int:
        return self.center.size

    def terms(self, theta, indices=None):
        delta = np.asarray(theta, dtype=float) - self.center
        if indices is None:
            consts, grads, hessians = self.consts, self.grads, self.hessians
        else:
            consts, grads, hessians = self.consts[indices], self.grads[indices], self.hessians[indices]
        quad = np.einsum("kij,i,j->k", hessians, delta, delta)
        return consts + grads @ delta + 0.5 * quad

    def total_mode(self) -> np.ndarray:
        """Maximizer of the summed terms (flat prior)."""
        return self.center - np.linalg.solve(self.hessians.sum(axis=0), self.grads.sum(axis=0))

    def total_cov(self) -> np.ndarray:
        """Gaussian covariance implied by the summed quadratic."""
        return np.linalg.inv(-self.hessians.sum(axis=0))


def make_quadratic_stub(rng: np.random.Generator, n_terms: int, dim: int) -> QuadraticTerms:
    consts = rng.normal(-1.0, 1.0, size=n_terms)
    grads = rng.normal(0.0, 0.05, size=(n_terms, dim))
    factors = rng.normal(0.0, 1.0, size=(n_terms, dim))
    hessians = -(np.einsum("ki,kj->kij", factors, factors) + 0.5 * np.eye(dim)) / n_terms
    return QuadraticTerms(
        consts=consts, grads=grads, hessians=hessians, center=rng.normal(size=dim)
    )


def tempered_fractional_series(
    phi, theta, sigma2: float, d: float, lam: float, n: int, seed: int
) -> sm.TimeSeries:
    """ARMA path passed through truncated tempered fractional integration.

    The integration filter (1 - exp(-lam) L)^(-d) has coefficients
    c_0 = 1, c_j = c_{j-1} (j - 1 + d) exp(-lam) / j, which decay like
    exp(-lam j); truncation keeps every coefficient above 1e-12 of c_0.  The
    output spectrum is the ARMA spectrum times |1 - exp(-(lam + i w))|^(-2d).
    """
    coeffs = [1.0]
    damp = math.exp(-lam)
    j = 1
    while abs(coeffs[-1]) > 1e-12 and j < 200_000:
        coeffs.append(coeffs[-1] * (j - 1 + d) * damp / j)
        j += 1
    coeffs = np.asarray(coeffs)
    pad = coeffs.size - 1
    core = sm.simulate_arma(phi, theta, sigma2, n + pad, seed=seed)
    full = fftconvolve(core.values, coeffs)
    return sm.TimeSeries(full[pad : pad + n])


@pytest.fixture(scope="session")
def arma11_data():
    """Small ARMA(1,1) dataset with its Whittle wrapper and posterior mode."""
    ts = sm.demean(sm.simulate_arma([0.5], [0.3], 1.0, 4001, seed=11))
    model = sm.ModelSpec(1, 1)
    data = sm.WhittleData(periodogram=sm.periodogram(ts), model=model)
    log_prior_fn = lambda v: sm.log_prior(model, v)
    mode = sm.find_mode(data, log_prior_fn, np.zeros(model.n_params))
    return data, log_prior_fn, mode
