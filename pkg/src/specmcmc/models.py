"""Model families, their spectral densities, and the unconstrained parameterization.

Every sampler runs in an unconstrained space: AR and MA blocks are stored as
arctanh of partial autocorrelations (so stationarity and invertibility hold by
construction), variances and the tempering rate on the log scale, and the
memory parameter either as d_tilde with d = 0.5*tanh(d_tilde) (ARFIMA, keeping
d inside the stationary band) or directly (ARTFIMA, where any real d is
admissible).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

LOG_TWO_PI = math.log(2.0 * math.pi)

FRACTIONAL_KINDS = ("none", "arfima", "artfima")


@dataclass(frozen=True)
class ModelSpec:
    """Structural choices: ARMA orders, fractional behaviour, volatility wrapper.

    ``ar_order`` counts autoregressive lags, ``ma_order`` moving-average lags.
    ``fractional`` selects plain ARMA ("none"), ARFIMA ("arfima") or tempered
    fractional ARTFIMA ("artfima").  ``sv_wrapper`` adds the additive noise
    floor used when fitting log squared returns of a volatility model.
    """

    ar_order: int
    ma_order: int
    fractional: str = "none"
    sv_wrapper: bool = False

    def __post_init__(self) -> None:
        if self.ar_order < 0 or self.ma_order < 0:
            raise ValueError("model orders must be non-negative")
        if self.fractional not in FRACTIONAL_KINDS:
            raise ValueError(f"fractional must be one of {FRACTIONAL_KINDS}")

    @property
    def n_params(self) -> int:
        extra = {"none": 0, "arfima": 1, "artfima": 2}[self.fractional]
        return self.ar_order + self.ma_order + extra + 1 + int(self.sv_wrapper)

    def param_names(self) -> tuple[str, ...]:
        names = [f"phi_tilde_{i}" for i in range(1, self.ar_order + 1)]
        names += [f"theta_tilde_{j}" for j in range(1, self.ma_order + 1)]
        if self.fractional == "arfima":
            names.append("d_tilde")
        elif self.fractional == "artfima":
            names += ["d", "log_lambda"]
        names.append("log_sigma2")
        if self.sv_wrapper:
            names.append("log_sigma2_eps")
        return tuple(names)


@dataclass(frozen=True)
class NaturalParams:
    """Parameters on their natural scale.

    ``lambda_`` is None unless the model is tempered; ``sigma2_eps`` is None
    without the volatility wrapper; ``d`` is 0.0 for plain ARMA.
    """

    phi: np.ndarray
    theta: np.ndarray
    d: float
    lambda_: float | None
    sigma2: float
    sigma2_eps: float | None

    def __post_init__(self) -> None:
        for name in ("phi", "theta"):
            arr = np.atleast_1d(np.asarray(getattr(self, name), dtype=float))
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite values")
            object.__setattr__(self, name, arr)
        if not self.sigma2 > 0:
            raise ValueError("sigma2 must be positive")
        if self.lambda_ is not None and not self.lambda_ > 0:
            raise ValueError("lambda_ must be positive when present")
        if self.sigma2_eps is not None and not self.sigma2_eps > 0:
            raise ValueError("sigma2_eps must be positive when present")


def pacf_to_ar(pacf) -> np.ndarray:
    """Map partial autocorrelations to AR coefficients (Durbin-Levinson).

    phi_k^(k) = pacf_k and phi_j^(k) = phi_j^(k-1) - pacf_k * phi_{k-j}^(k-1);
    any pacf in (-1, 1)^q yields a stationary coefficient vector.
    """
    pacf = np.asarray(pacf, dtype=float)
    coeffs = np.zeros(0)
    for k, r in enumerate(pacf, start=1):
        prev = coeffs
        coeffs = np.empty(k)
        coeffs[: k - 1] = prev - r * prev[::-1]
        coeffs[k - 1] = r
    return coeffs


def ar_to_pacf(coeffs) -> np.ndarray:
    """Inverse of :func:`pacf_to_ar`; fails if the input is not stationary."""
    coeffs = np.asarray(coeffs, dtype=float)
    pacf = np.empty(coeffs.size)
    work = coeffs.copy()
    for k in range(coeffs.size, 0, -1):
        r = work[k - 1]
        if abs(r) >= 1.0:
            raise ValueError("coefficients do not correspond to pacf in (-1, 1)")
        pacf[k - 1] = r
        prev = work[: k - 1]
        work = (prev + r * prev[::-1]) / (1.0 - r * r)
    return pacf


def _ma_from_unconstrained(block: np.ndarray) -> np.ndarray:
    # The MA polynomial is 1 + theta_1 z + ...; negating the stationary AR
    # image of the reflected pacf keeps every root outside the unit circle.
    return -pacf_to_ar(-np.tanh(block))


def _ma_to_unconstrained(theta: np.ndarray) -> np.ndarray:
    return np.arctanh(-ar_to_pacf(-np.asarray(theta, dtype=float)))


def to_natural(spec: ModelSpec, vector) -> NaturalParams:
    """Decode an unconstrained vector into natural-scale parameters."""
    vector = np.asarray(vector, dtype=float)
    if vector.shape != (spec.n_params,):
        raise ValueError(f"expected {spec.n_params} parameters, got shape {vector.shape}")
    if not np.all(np.isfinite(vector)):
        raise ValueError("parameter vector contains non-finite entries")
    q, p = spec.ar_order, spec.ma_order
    phi = pacf_to_ar(np.tanh(vector[:q]))
    theta = _ma_from_unconstrained(vector[q : q + p])
    pos = q + p
    d, lambda_ = 0.0, None
    if spec.fractional == "arfima":
        d = 0.5 * math.tanh(vector[pos])
        pos += 1
    elif spec.fractional == "artfima":
        d = float(vector[pos])
        lambda_ = math.exp(vector[pos + 1])
        pos += 2
    sigma2 = math.exp(vector[pos])
    pos += 1
    sigma2_eps = math.exp(vector[pos]) if spec.sv_wrapper else None
    return NaturalParams(phi=phi, theta=theta, d=d, lambda_=lambda_, sigma2=sigma2, sigma2_eps=sigma2_eps)


def from_natural(spec: ModelSpec, nat: NaturalParams) -> np.ndarray:
    """Encode natural-scale parameters back into the unconstrained space."""
    parts = [np.arctanh(ar_to_pacf(nat.phi)), _ma_to_unconstrained(nat.theta)]
    if spec.fractional == "arfima":
        if not -0.5 < nat.d < 0.5:
            raise ValueError("ARFIMA requires d in (-0.5, 0.5)")
        parts.append([math.atanh(2.0 * nat.d)])
    elif spec.fractional == "artfima":
        if nat.lambda_ is None or nat.lambda_ <= 0:
            raise ValueError("ARTFIMA requires a positive tempering rate")
        parts.append([nat.d, math.log(nat.lambda_)])
    parts.append([math.log(nat.sigma2)])
    if spec.sv_wrapper:
        if nat.sigma2_eps is None or nat.sigma2_eps <= 0:
            raise ValueError("volatility wrapper requires positive sigma2_eps")
        parts.append([math.log(nat.sigma2_eps)])
    vector = np.concatenate([np.asarray(part, dtype=float) for part in parts])
    if vector.shape != (spec.n_params,):
        raise ValueError("natural parameters do not match the model specification")
    return vector


def _density_from_unit_circle(spec: ModelSpec, nat: NaturalParams, z: np.ndarray) -> np.ndarray:
    """Spectral density evaluated from z = exp(-i*omega).

    f(omega) = sigma2/(2*pi) * |1 - exp(-(lambda + i*omega))|^(-2d)
               * |theta(z)|^2 / |phi(z)|^2   (+ sigma2_eps/(2*pi) if wrapped),
    with theta(z) = 1 + sum theta_j z^j and phi(z) = 1 - sum phi_i z^i.
    """
    ar_poly = np.ones_like(z)
    ma_poly = np.ones_like(z)
    power = z
    for lag in range(max(nat.phi.size, nat.theta.size)):
        if lag < nat.phi.size:
            ar_poly = ar_poly - nat.phi[lag] * power
        if lag < nat.theta.size:
            ma_poly = ma_poly + nat.theta[lag] * power
        power = power * z
    dens = (nat.sigma2 / (2.0 * np.pi)) * (
        (ma_poly.real**2 + ma_poly.imag**2) / (ar_poly.real**2 + ar_poly.imag**2)
    )
    if spec.fractional != "none" and nat.d != 0.0:
        damp = math.exp(-nat.lambda_) if nat.lambda_ is not None else 1.0
        frac = 1.0 - damp * z
        dens = dens * (frac.real**2 + frac.imag**2) ** (-nat.d)
    if spec.sv_wrapper:
        dens = dens + nat.sigma2_eps / (2.0 * np.pi)
    return dens


def spectral_density(spec: ModelSpec, nat: NaturalParams, omega) -> np.ndarray | float:
    """Evaluate the model spectral density at frequencies in (0, pi)."""
    omega_arr = np.atleast_1d(np.asarray(omega, dtype=float))
    if np.any(omega_arr <= 0.0) or np.any(omega_arr >= np.pi):
        raise ValueError("frequencies must lie strictly inside (0, pi)")
    dens = _density_from_unit_circle(spec, nat, np.exp(-1j * omega_arr))
    return dens if np.ndim(omega) else float(dens[0])


@dataclass(frozen=True)
class PriorHyperparams:
    """Gaussian prior settings for the non-uniform coordinates.

    Each pair is (mean, standard deviation) on the scale the sampler sees:
    log sigma2, log lambda, the memory coordinate (d_tilde or d), and
    log sigma2_eps.  AR and MA coordinates always get the flat-on-pacf prior.
    """

    log_sigma2: tuple[float, float] = (0.0, 1.0)
    log_lambda: tuple[float, float] = (0.0, 1.0)
    memory: tuple[float, float] = (0.0, 1.0)
    log_sigma2_eps: tuple[float, float] = (0.0, 0.1)


DEFAULT_PRIORS = PriorHyperparams()


def _normal_logpdf(x: float, mean: float, sd: float) -> float:
    z = (x - mean) / sd
    return -0.5 * (z * z + LOG_TWO_PI) - math.log(sd)


def log_prior(spec: ModelSpec, vector, hyper: PriorHyperparams = DEFAULT_PRIORS) -> float:
    """Log prior density of an unconstrained vector.

    Uniform(-1, 1) on each partial autocorrelation, expressed in the
    unconstrained space through the tanh Jacobian; independent Gaussians on
    the remaining coordinates as configured in ``hyper``.
    """
    vector = np.asarray(vector, dtype=float)
    if vector.shape != (spec.n_params,):
        raise ValueError(f"expected {spec.n_params} parameters, got shape {vector.shape}")
    q, p = spec.ar_order, spec.ma_order
    block = vector[: q + p]
    # log(0.5 * (1 - tanh(v)^2)) per coordinate, written stably.
    total = float(np.sum(np.log1p(-np.tanh(block) ** 2) - math.log(2.0)))
    pos = q + p
    if spec.fractional in ("arfima", "artfima"):
        total += _normal_logpdf(vector[pos], *hyper.memory)
        pos += 1
    if spec.fractional == "artfima":
        total += _normal_logpdf(vector[pos], *hyper.log_lambda)
        pos += 1
    total += _normal_logpdf(vector[pos], *hyper.log_sigma2)
    pos += 1
    if spec.sv_wrapper:
        total += _normal_logpdf(vector[pos], *hyper.log_sigma2_eps)
    return total
