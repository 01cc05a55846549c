"""Spectral quantities determined by the actions alone.

Given gamma_1..gamma_N (and gamma_k = 0 beyond N) the Lax eigenvalues are
lambda_n = n - sum_{k>n} gamma_k, and the weights kappa_n, mu_n and the
coefficients a_n^* are finite products over the gaps.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .core import as_gamma

# switch to summing logarithms above this size
LOG_SPACE_N = 256
SMALL_FACTOR = 1e-8


class ConditioningWarning(RuntimeWarning):
    """A product factor 1 - gamma_p/(lambda_p - lambda_n) is nearly zero."""


class ConsistencyError(ArithmeticError):
    """A product factor that must be positive is not."""


@dataclass(frozen=True)
class SpectralParams:
    """lambda_n, kappa_n (n = 0..N), mu_n (n = 1..N) and a_n^* (n = 0..N-1).

    Arrays are zero-based: ``mu[k]`` is mu_{k+1}; the others start at index 0.
    """

    gamma: np.ndarray
    lam: np.ndarray
    kappa: np.ndarray
    mu: np.ndarray
    a_star: np.ndarray

    @property
    def N(self):
        return self.gamma.size


def lambda_from_gamma(gamma):
    """lambda_n = n - sum_{k=n+1}^N gamma_k for n = 0..N."""
    g = as_gamma(gamma)
    N = g.size
    tail = np.zeros(N + 1)
    # tail[n] = sum_{k > n} gamma_k, one backward pass
    tail[:-1] = np.cumsum(g[::-1])[::-1]
    return np.arange(N + 1) - tail


def _factor_table(g, lam):
    """F[p, n] = 1 - gamma_p/(lambda_p - lambda_n) for p = 1..N (rows), n = 0..N.

    Entries with p = n are set to 1 so they drop out of products.
    """
    N = g.size
    lp = lam[1:, None]
    d = lp - lam[None, :]
    p = np.arange(1, N + 1)[:, None]
    n = np.arange(N + 1)[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        F = 1.0 - g[:, None] / d
    F[p == n] = 1.0
    return F


def _check(F, what):
    if np.any(F <= 0) or not np.all(np.isfinite(F)):
        raise ConsistencyError(f"nonpositive factor in the product for {what}")
    if np.any(F < SMALL_FACTOR):
        warnings.warn(f"ill-conditioned product for {what}", ConditioningWarning, stacklevel=3)


def _colprod(F):
    if F.shape[0] > LOG_SPACE_N:
        return np.exp(np.sum(np.log(F), axis=0))
    return np.prod(F, axis=0)


def kappa_from_gamma(gamma, lam=None):
    """kappa_0 = prod_p (1 - gamma_p/(lambda_p - lambda_0)) and, for n >= 1,
    kappa_n = (lambda_n - lambda_0)^{-1} prod_{p != n} (1 - gamma_p/(lambda_p - lambda_n)).

    Products run over p = 1..N; the truncation makes them exact.
    """
    g = as_gamma(gamma)
    if lam is None:
        lam = lambda_from_gamma(g)
    F = _factor_table(g, lam)
    _check(F, "kappa")
    kap = _colprod(F)
    kap[1:] /= lam[1:] - lam[0]
    return kap


def mu_from_gamma(gamma, lam=None):
    """mu_n = (1 - gamma_n/(lambda_n - lambda_0)) prod_{p != n} r_p(n) for n = 1..N, where
    r_p(n) = (1 - gamma_p/(lambda_p - lambda_n)) / (1 - gamma_p/(lambda_p - lambda_{n-1} - 1)).
    """
    g = as_gamma(gamma)
    N = g.size
    if lam is None:
        lam = lambda_from_gamma(g)
    if N == 0:
        return np.zeros(0)
    num = _factor_table(g, lam)[:, 1:]
    p = np.arange(1, N + 1)[:, None]
    n = np.arange(1, N + 1)[None, :]
    d = lam[1:, None] - lam[None, :-1] - 1.0
    with np.errstate(divide="ignore", invalid="ignore"):
        den = 1.0 - g[:, None] / d
    den[p == n] = 1.0
    _check(num, "mu")
    _check(den, "mu")
    lead = 1.0 - g / (lam[1:] - lam[0])
    _check(lead, "mu")
    return lead * _colprod(num / den)


def a_star_from_params(params):
    """a_n^* = sqrt(mu_{n+1}) sqrt(kappa_n / kappa_{n+1}) for n = 0..N-1."""
    return np.sqrt(params.mu) * np.sqrt(params.kappa[:-1] / params.kappa[1:])


def spectral_params(gamma):
    """All action-only quantities in one O(N^2) pass."""
    g = as_gamma(gamma).copy()
    lam = lambda_from_gamma(g)
    kap = kappa_from_gamma(g, lam)
    mu = mu_from_gamma(g, lam)
    a = np.sqrt(mu) * np.sqrt(kap[:-1] / kap[1:])
    return SpectralParams(gamma=g, lam=lam, kappa=kap, mu=mu, a_star=a)


def m_entry(n, p, state, params=None):
    """Entry M_{n,p} = <f_p|S f_n> of the shift in the Lax eigenbasis, 0 <= n, p <= N.

    Indices beyond the truncation use zeta_k = 0, so only p = n + 1 <= N
    and the rows n < N can be nonzero apart from that.
    """
    if params is None:
        params = spectral_params(state.gamma)
    N = state.N
    if not (0 <= n <= N and 0 <= p <= N):
        raise IndexError((n, p))
    if n + 1 > N:
        # mu_{N+1} = 1 and zeta_{N+1} = 0 under the truncation
        return 1.0 + 0j if p == n + 1 else 0j
    sq_mu = np.sqrt(params.mu[n])
    if p == n + 1:
        return complex(sq_mu)
    z = state.padded()
    if z[n + 1] == 0:
        return 0j
    lam, kap = params.lam, params.kappa
    return complex(
        sq_mu * np.sqrt(kap[p] / kap[n + 1]) * np.conj(z[p]) * z[n + 1] / (lam[p] - lam[n] - 1)
    )

