"""Whittle log-likelihood over the positive Fourier grid, whole or in groups.

The likelihood is a sum of per-frequency terms -(log f(omega_k) + I_k /
f(omega_k)).  Everything downstream (subsampling, control variates) only
needs the ability to evaluate those terms on an arbitrary index subset, so
that is the interface ``WhittleData`` exposes; test doubles with the same
``terms`` method can stand in for it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .models import ModelSpec, _density_from_unit_circle, to_natural
from .spectral import Periodogram


@dataclass(frozen=True)
class WhittleData:
    """Periodogram plus model; evaluates per-frequency log-likelihood terms."""

    periodogram: Periodogram
    model: ModelSpec

    def __post_init__(self) -> None:
        # exp(-i*omega) is theta-independent and by far the costliest factor
        # of a density evaluation, so it is computed once per dataset.
        z = np.exp(-1j * self.periodogram.grid.omegas)
        z.flags.writeable = False
        object.__setattr__(self, "_z", z)

    @property
    def n_freq(self) -> int:
        return self.periodogram.grid.n_freq

    def terms(self, theta, indices=None) -> np.ndarray:
        """Whittle terms -(log f + I/f) at all frequencies or a subset."""
        nat = to_natural(self.model, theta)
        if indices is None:
            z, ordinates = self._z, self.periodogram.ordinates
        else:
            z, ordinates = self._z[indices], self.periodogram.ordinates[indices]
        dens = _density_from_unit_circle(self.model, nat, z)
        return -(np.log(dens) + ordinates / dens)


@dataclass(frozen=True)
class GroupIndex:
    """Partition of frequency indices into groups of near-equal size.

    ``membership`` maps each frequency index to its group; ``groups`` lists
    the member indices per group.  Sizes may differ by at most one.
    """

    groups: tuple
    n_freq: int

    def __post_init__(self) -> None:
        membership = np.full(self.n_freq, -1, dtype=np.intp)
        sizes = []
        for gid, idx in enumerate(self.groups):
            idx = np.asarray(idx, dtype=np.intp)
            if idx.size == 0:
                raise ValueError("groups must be non-empty")
            membership[idx] = gid
            sizes.append(idx.size)
        if np.any(membership < 0) or sum(sizes) != self.n_freq:
            raise ValueError("groups must partition the frequency indices exactly")
        if max(sizes) - min(sizes) > 1:
            raise ValueError("group sizes may differ by at most one")
        membership.flags.writeable = False
        object.__setattr__(self, "membership", membership)

    @property
    def n_groups(self) -> int:
        return len(self.groups)

    def group_sums(self, values: np.ndarray) -> np.ndarray:
        """Sum per-frequency values within each group."""
        return np.bincount(self.membership, weights=values, minlength=self.n_groups)


def term(data, theta, k: int) -> float:
    """Single per-frequency log-likelihood term."""
    return float(data.terms(theta, np.array([k]))[0])


def full_loglik(data, theta) -> float:
    """Whittle log-likelihood, summed in ascending frequency order."""
    return float(np.sum(data.terms(theta)))


def group_loglik(data, g: GroupIndex, theta, k: int) -> float:
    """Log-likelihood contribution of one group."""
    return float(np.sum(data.terms(theta, g.groups[k])))


def group_logliks(data, g: GroupIndex, theta) -> np.ndarray:
    """All group contributions in one pass over the frequencies."""
    return g.group_sums(data.terms(theta))


def fd_steps(x: np.ndarray) -> np.ndarray:
    """Central-difference steps h_j = max(1e-5, 1e-7 * |x_j|)."""
    return np.maximum(1e-5, 1e-7 * np.abs(x))


def _checked(fun, x) -> np.ndarray:
    out = np.asarray(fun(np.asarray(x, dtype=float)), dtype=float)
    if not np.all(np.isfinite(out)):
        raise ValueError(f"non-finite objective in difference stencil at {x!r}")
    return out


def fd_gradient(fun, x, step=None) -> np.ndarray:
    """Central-difference gradient of a scalar- or vector-valued function.

    For vector-valued ``fun`` the derivative axis is appended last.
    """
    x = np.asarray(x, dtype=float)
    h = fd_steps(x) if step is None else np.broadcast_to(step, x.shape)
    cols = []
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = h[j]
        cols.append((_checked(fun, x + e) - _checked(fun, x - e)) / (2.0 * h[j]))
    return np.stack(cols, axis=-1)


def taylor_coefficients(fun, x, step=None):
    """Value, gradient, and symmetrized Hessian by central differences.

    Shares the axial stencil between the gradient and the Hessian diagonal;
    off-diagonal entries use the four-point cross stencil.  Raises if any
    stencil evaluation is non-finite.
    """
    x = np.asarray(x, dtype=float)
    dim = x.size
    h = fd_steps(x) if step is None else np.broadcast_to(step, x.shape)
    f0 = _checked(fun, x)
    plus, minus = [], []
    for j in range(dim):
        e = np.zeros(dim)
        e[j] = h[j]
        plus.append(_checked(fun, x + e))
        minus.append(_checked(fun, x - e))
    grad = np.stack([(plus[j] - minus[j]) / (2.0 * h[j]) for j in range(dim)], axis=-1)
    hess = np.zeros(f0.shape + (dim, dim))
    for j in range(dim):
        hess[..., j, j] = (plus[j] - 2.0 * f0 + minus[j]) / h[j] ** 2
    for i in range(dim):
        for j in range(i + 1, dim):
            e = np.zeros(dim)
            e[i], e[j] = h[i], h[j]
            ei = np.zeros(dim)
            ei[i], ei[j] = h[i], -h[j]
            cross = (
                _checked(fun, x + e)
                - _checked(fun, x + ei)
                - _checked(fun, x - ei)
                + _checked(fun, x - e)
            ) / (4.0 * h[i] * h[j])
            hess[..., i, j] = cross
            hess[..., j, i] = cross
    return f0, grad, hess


def fd_hessian(fun, x, step=None) -> np.ndarray:
    """Symmetrized central-difference Hessian."""
    return taylor_coefficients(fun, x, step=step)[2]


def grad_hess(data, g: GroupIndex, theta_star):
    """Per-group value, gradient, and Hessian of the log-likelihood.

    Returns arrays of shapes (n_groups,), (n_groups, dim) and
    (n_groups, dim, dim); each stencil point costs one pass over all
    frequencies regardless of the number of groups.
    """
    return taylor_coefficients(lambda v: group_logliks(data, g, v), np.asarray(theta_star, dtype=float))
