"""Direct Birkhoff map: Lax spectrum of a potential and its normalized coordinates.

The Lax operator L_u = D - T_u acts on the Hardy space; on the Fourier
basis e^{inx}, n >= 0, its Galerkin matrix is A[n, m] = n delta_{nm} - u_hat(n - m).
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh, toeplitz

from .core import Actions, BirkhoffState, InvalidInputError
from .spectral import kappa_from_gamma

# spacing below 1 - SPACING_TOL means the Galerkin cut is too small
SPACING_TOL = 1e-6
# |<f_n|S f_{n-1}>| below this triggers the fallback phase rule
PHASE_TOL = 1e-10


class TruncationError(ArithmeticError):
    """The truncated spectrum violates lambda_n - lambda_{n-1} >= 1."""

    def __init__(self, msg, spacing=None):
        super().__init__(msg)
        self.spacing = spacing


class ClampWarning(RuntimeWarning):
    """A slightly negative gap was clamped to zero."""


@dataclass(frozen=True)
class LaxSpectrum:
    """Eigen-data of the truncated Lax matrix.

    Attributes
    ----------
    lam : ndarray, shape (M_cut + 1,)
        Eigenvalues in ascending order.
    eigvecs : ndarray, shape (M_cut + 1, M_cut + 1)
        Column n holds f_hat_n(0..M_cut), phases normalized.
    gamma : ndarray
        Gaps gamma_1..gamma_K over the trusted band K = M_cut // 2.
    kappa : ndarray
        kappa_0..kappa_K from the product formula on ``gamma``.
    zeta : ndarray
        zeta_1..zeta_N.
    """

    lam: np.ndarray
    eigvecs: np.ndarray
    gamma: np.ndarray
    kappa: np.ndarray
    zeta: np.ndarray

    @property
    def band(self):
        return self.gamma.size

    def to_json(self):
        """Arrays lambda, gamma, kappa over the trusted band and zeta as [re, im] pairs."""
        K = self.band
        return json.dumps(
            {
                "lambda": self.lam[: K + 1].tolist(),
                "gamma": self.gamma.tolist(),
                "kappa": self.kappa.tolist(),
                "zeta": [[z.real, z.imag] for z in self.zeta.tolist()],
            },
            indent=1,
        )

    def dump(self, path):
        with open(path, "w") as fh:
            fh.write(self.to_json())


def build_lax_matrix(u, M_cut):
    """Hermitian matrix A[n, m] = n delta_{nm} - u_hat(n - m), 0 <= n, m <= M_cut.

    Coefficients beyond the grid band of ``u`` are zero, so ``M_cut`` may
    exceed M/2 without approximation.
    """
    c = np.zeros(M_cut + 1, complex)
    k = min(M_cut + 1, u.coeff.size)
    c[:k] = u.coeff[:k]
    if c[0] != 0:
        raise InvalidInputError("potential must have zero mean")
    # toeplitz(c) uses conj(c) for the first row: T[n, m] = u_hat(n - m)
    A = -toeplitz(c)
    A[np.diag_indices_from(A)] += np.arange(M_cut + 1)
    return A


def gamma_from_lambda(lam):
    """gamma_n = max(0, lambda_n - lambda_{n-1} - 1) for n = 1..len(lam)-1."""
    lam = np.asarray(lam, dtype=float)
    d = np.diff(lam) - 1.0
    if np.any(d < -SPACING_TOL):
        bad = int(np.argmin(d)) + 1
        raise TruncationError(
            f"eigenvalue spacing {d[bad - 1] + 1:.3e} < 1 at n = {bad}; increase M_cut",
            spacing=d + 1.0,
        )
    if np.any(d < 0):
        worst = float(d.min())
        if worst < -1e-12:
            warnings.warn(f"clamped gap {worst:.2e} to zero", ClampWarning, stacklevel=2)
        d = np.maximum(d, 0.0)
    return Actions(d)


def _normalize_phases(V):
    """Fix <1|f_0> > 0 and <f_n|S f_{n-1}> > 0 for n >= 1, in place."""
    ncol = V.shape[1]
    # s[n] = sum_k f_n(k) conj(f_{n-1}(k-1)) on the raw eigenvectors
    s = np.einsum("kn,kn->n", V[1:, 1:], np.conj(V[:-1, :-1]))
    theta = np.empty(ncol)
    theta[0] = -np.angle(V[0, 0]) if abs(V[0, 0]) > 0 else 0.0
    for n in range(1, ncol):
        if abs(s[n - 1]) >= PHASE_TOL:
            theta[n] = theta[n - 1] - np.angle(s[n - 1])
        else:
            j = int(np.argmax(np.abs(V[:, n])))
            theta[n] = -np.angle(V[j, n])
    V *= np.exp(1j * theta)[None, :]
    return V


def birkhoff_forward(u, N, M_cut=None):
    """Birkhoff coordinates zeta_1..zeta_N of the potential ``u``.

    Parameters
    ----------
    u : FourierFunction
    N : int
        Number of coordinates returned.
    M_cut : int, optional
        Galerkin size; at least 4N (default max(4N, M/2)).

    Returns
    -------
    state : BirkhoffState
    spectrum : LaxSpectrum

    Notes
    -----
    The gaps gamma_n are read off the eigenvalues over the band
    n <= M_cut // 2, and kappa_n uses all of them, so the coordinates of
    the first N modes do not depend on N.
    """
    if M_cut is None:
        M_cut = max(4 * N, u.M // 2)
    if M_cut < 4 * N:
        raise InvalidInputError(f"M_cut = {M_cut} is below the 4N = {4 * N} headroom rule")
    A = build_lax_matrix(u, M_cut)
    try:
        lam, V = eigh(A)
    except np.linalg.LinAlgError as exc:
        raise ArithmeticError(f"eigensolver failed: {exc}") from exc
    V = _normalize_phases(V)
    K = M_cut // 2
    gamma = gamma_from_lambda(lam[: K + 1]).gamma
    kappa = kappa_from_gamma(gamma)
    zeta = np.conj(V[0, 1 : N + 1]) / np.sqrt(kappa[1 : N + 1])
    spectrum = LaxSpectrum(lam=lam, eigvecs=V, gamma=gamma, kappa=kappa, zeta=zeta)
    return BirkhoffState(0.0, zeta), spectrum
